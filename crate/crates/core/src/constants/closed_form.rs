use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::grid::SurvivalGrid;
use crate::quadrature::{bisect, gauss_legendre};
use crate::special::{erf, erfc, lambert_w};

/// `theta = -2 ln q / (1 + q)`: the dilution at which the d = 1 matching
/// fixed point has atom `q` at `theta / 2`.
pub fn matching_d1_theta(q: f64) -> Result<f64> {
    check_q(q)?;
    Ok(-2.0 * q.ln() / (1.0 + q))
}

/// `∫_q^1 (-ln t) / (1 + t) dt`, the d = 1 diluted matching cost.
pub fn matching_d1_beta(q: f64) -> Result<f64> {
    check_q(q)?;
    // t = e^{-u}
    let upper = (-q.ln()).min(60.0);
    let panels = (upper * 8.0).ceil().max(1.0) as usize;
    Ok(gauss_legendre(
        |u| u * (-u).exp() / (1.0 + (-u).exp()),
        0.0,
        upper,
        panels,
    ))
}

fn check_q(q: f64) -> Result<()> {
    if !(q > 0.0 && q < 1.0) {
        return Err(invalid("q", format!("must lie in (0, 1), got {q}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct MatchingD1 {
    pub q: f64,
    pub theta: f64,
    /// `F(x) = (1+q) / (1 + e^{(1+q)x})` sampled on `[-theta/2, theta/2]`.
    pub survival: SurvivalGrid,
    pub beta: f64,
}

pub fn matching_d1_closed_form(q: f64, cells: usize) -> Result<MatchingD1> {
    let theta = matching_d1_theta(q)?;
    let k = 1.0 + q;
    let half = 0.5 * theta;
    let survival = SurvivalGrid::from_fn(-half, half, cells, 1.0, 0.0, |x| {
        (k / (1.0 + (k * x).exp())).min(1.0)
    })?;
    Ok(MatchingD1 {
        q,
        theta,
        survival,
        beta: matching_d1_beta(q)?,
    })
}

fn g_tsp(z: f64) -> f64 {
    (1.0 + 0.5 * z) * (-z).exp()
}

/// `1 - g(z)` without cancellation for small `z`.
fn one_minus_g_tsp(z: f64) -> f64 {
    -(-z).exp_m1() - 0.5 * z * (-z).exp()
}

/// `β_TSP(1) = (1/2)·area{(x, y) >= 0 : g(x) + g(y) >= 1}` with
/// `g(z) = (1 + z/2) e^{-z}`.
///
/// The curve is symmetric in `x <-> y` and crosses the diagonal at `c` with
/// `g(c) = 1/2`, so the area is `c² + 2 ∫_c^∞ y(x) dx`; on that range
/// `y(x) <= c` is finite, which avoids the `y(0) = ∞` endpoint.
pub fn tsp_d1_reference() -> Result<f64> {
    let c = bisect(|z| g_tsp(z) - 0.5, 0.0, 10.0)
        .ok_or_else(|| Error::RootBracket("diagonal crossing".into()))?;
    let y_of = |x: f64| -> f64 {
        let target = g_tsp(x);
        if target <= 0.0 {
            return 0.0;
        }
        bisect(|y| one_minus_g_tsp(y) - target, 0.0, c).unwrap_or(f64::NAN)
    };
    // y(x) ~ x e^{-x}; beyond 60 the tail is below 1e-24
    let tail = gauss_legendre(y_of, c, 60.0, 400);
    if !tail.is_finite() {
        return Err(Error::RootBracket("y(x) not bracketed".into()));
    }
    Ok(0.5 * (c * c + 2.0 * tail))
}

/// Undiluted edge cover in d = 1: `F(x) = W(1) e^{-x}`, cost `W + W²/2`.
pub fn edgecover_d1() -> (f64, f64) {
    let w = lambert_w(1.0);
    (w, w + 0.5 * w * w)
}

/// `A = ∫_0^∞ F`, `B = ∫_0^∞ t F(t) dt` of the d = 2 undiluted edge-cover
/// fixed point `F(x) = exp(-x² - 2Ax - 2B)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgeCoverMoments {
    pub a: f64,
    pub b: f64,
}

impl EdgeCoverMoments {
    /// The moment map whose fixed point determines `F`.
    pub fn map(self) -> Self {
        let sqrt_pi = std::f64::consts::PI.sqrt();
        // e^{A²}(erf(A) - 1) = -e^{A²} erfc(A)
        let e = -(-2.0 * self.b).exp() * (self.a * self.a).exp() * erfc(self.a);
        Self {
            a: -0.5 * sqrt_pi * e,
            b: 0.5 * (-2.0 * self.b).exp() + 0.5 * self.a * sqrt_pi * e,
        }
    }

    /// Residual of `B = e^{-2B}/2 - A²`.
    pub fn constraint_residual(self) -> f64 {
        self.b - (0.5 * (-2.0 * self.b).exp() - self.a * self.a)
    }

    pub fn survival(self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        (-x * x - 2.0 * self.a * x - 2.0 * self.b).exp()
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EdgeCoverD2 {
    pub moments: EdgeCoverMoments,
    pub cost: f64,
    pub map_residual: f64,
    pub iterations: usize,
}

/// Undiluted edge cover in d = 2.
pub fn edgecover_d2() -> Result<EdgeCoverD2> {
    let mut m = EdgeCoverMoments { a: 0.5, b: 0.2 };
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    for it in 1..=10_000 {
        let next = m.map();
        residual = (next.a - m.a).abs().max((next.b - m.b).abs());
        m = EdgeCoverMoments {
            a: 0.5 * (m.a + next.a),
            b: 0.5 * (m.b + next.b),
        };
        iterations = it;
        if residual < 1e-15 {
            break;
        }
    }
    if residual > 1e-12 {
        return Err(Error::NonConvergence {
            iterations,
            residual,
        });
    }
    Ok(EdgeCoverD2 {
        moments: m,
        cost: edgecover_d2_cost(m),
        map_residual: residual,
        iterations,
    })
}

/// `∫_0^∞ l² P(f1 + f2 >= l) dl` with
/// `P = (2 - F(0+)) F(l) + ∫_0^l (2x + 2A) F(x) F(l - x) dx`; the
/// convolution is Gaussian and has a closed form in `erf`.
fn edgecover_d2_cost(m: EdgeCoverMoments) -> f64 {
    let f0 = m.survival(f64::MIN_POSITIVE);
    let c = (0.5 * std::f64::consts::PI).sqrt();
    let integrand = |l: f64| {
        let conv = (-0.5 * l * l - 2.0 * m.a * l - 4.0 * m.b).exp()
            * (l + 2.0 * m.a)
            * c
            * erf(l / std::f64::consts::SQRT_2);
        l * l * ((2.0 - f0) * m.survival(l) + conv)
    };
    gauss_legendre(integrand, 0.0, 12.0, 120)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matching_theta_and_beta_limits() {
        assert!((matching_d1_theta(0.5).unwrap() - 4.0 * 2f64.ln() / 3.0).abs() < 1e-15);
        assert!(matching_d1_beta(1.0 - 1e-9).unwrap().abs() < 1e-12);
        let pi2_12 = std::f64::consts::PI.powi(2) / 12.0;
        assert!((matching_d1_beta(1e-300).unwrap() - pi2_12).abs() < 1e-13);
        assert!(matching_d1_theta(0.0).is_err() && matching_d1_theta(1.0).is_err());
    }

    #[test]
    fn matching_beta_against_series() {
        // ∫_q^1 -ln t/(1+t) dt = Σ_k (-1)^k ∫_q^1 -t^k ln t dt
        //   = π²/12 - Σ_k (-1)^k q^(k+1) (1/(k+1)² - ln q/(k+1))
        let q: f64 = 0.5;
        let mut s = std::f64::consts::PI.powi(2) / 12.0;
        for k in 0..200 {
            let kp = (k + 1) as f64;
            let term = q.powf(kp) * (1.0 / (kp * kp) - q.ln() / kp);
            s -= if k % 2 == 0 { term } else { -term };
        }
        assert!((matching_d1_beta(q).unwrap() - s).abs() < 1e-13);
    }

    #[test]
    fn tsp_reference_value() {
        let v = tsp_d1_reference().unwrap();
        assert!((v - 2.041_548_186_4).abs() < 1e-8, "{v}");
    }

    #[test]
    fn edgecover_d1_value() {
        let (w, cost) = edgecover_d1();
        assert!((w - (-w).exp()).abs() < 1e-15);
        assert!((cost - 0.72797).abs() < 5e-6);
    }

    #[test]
    fn edgecover_d2_values() {
        let r = edgecover_d2().unwrap();
        assert!((r.moments.a - 0.41079).abs() < 1e-4);
        assert!((r.moments.b - 0.18005).abs() < 1e-4);
        assert!(r.moments.constraint_residual().abs() < 1e-9);
        assert!((r.cost - 0.55872).abs() < 1e-4);
    }

    #[test]
    fn edgecover_d2_moments_are_consistent() {
        let m = edgecover_d2().unwrap().moments;
        let a = gauss_legendre(|x| m.survival(x), 0.0, 12.0, 60);
        let b = gauss_legendre(|x| x * m.survival(x), 0.0, 12.0, 60);
        assert!((a - m.a).abs() < 1e-12);
        assert!((b - m.b).abs() < 1e-12);
    }

    #[test]
    fn edgecover_d2_cost_matches_nested_quadrature() {
        let m = edgecover_d2().unwrap().moments;
        let f0 = m.survival(1e-300);
        let p = |l: f64| {
            let conv = gauss_legendre(
                |x| (2.0 * x + 2.0 * m.a) * m.survival(x) * m.survival(l - x),
                0.0,
                l,
                8,
            );
            (1.0 - f0) * m.survival(l) + m.survival(l) + conv
        };
        let nested = gauss_legendre(|l| l * l * p(l), 0.0, 10.0, 60);
        assert!((nested - edgecover_d2_cost(m)).abs() < 1e-10);
    }
}
