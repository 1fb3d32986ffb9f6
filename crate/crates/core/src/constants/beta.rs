use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::grid::{ModelParams, NodeKernel, SurvivalGrid};
use crate::operators::{solve_fixed_point, Problem, SolverConfig};
use crate::quadrature::gl4_unit;

/// Atom of the law at the upper end, `q = F(theta/2)`.
pub fn density_q(f: &SurvivalGrid) -> f64 {
    *f.values().last().expect("grid has nodes")
}

/// Diluted cost
/// `β_θ = (d²/2) ∬_{x+y>=0} (x+y)^(d-1) F(x) F(y) dx dy = (d/2) ∫ F(x) I(x) dx`
/// for a matching or TSP fixed point on `[-θ/2, θ/2]`.
///
/// Grids on `[0, hi]` (edge cover) have `F = 1` below zero and the double
/// integral does not apply; those are routed to [`beta_theta_convolution`].
pub fn beta_theta(f: &SurvivalGrid, p: &ModelParams) -> Result<f64> {
    if f.lo() >= 0.0 {
        return beta_theta_convolution(f, p);
    }
    check_symmetric(f, p)?;
    let n = f.cells();
    let h = f.step();
    let nodes = NodeKernel::new(f, p.d, 0.0, n + 1).apply(f.values(), 0.0);
    let mids = NodeKernel::new(f, p.d, 0.5, n).apply(f.values(), 0.0);
    let v = f.values();
    let mut total = 0.0;
    for i in 0..n {
        let fm = 0.5 * (v[i] + v[i + 1]);
        total += v[i] * nodes[i] + 4.0 * fm * mids[i] + v[i + 1] * nodes[i + 1];
    }
    Ok(0.5 * p.d * total * h / 6.0)
}

fn check_symmetric(f: &SurvivalGrid, p: &ModelParams) -> Result<()> {
    if !p.is_finite() {
        return Err(invalid("theta", "the double-integral form needs a finite theta"));
    }
    let half = p.half_theta();
    let scale = half.max(1.0);
    if (f.lo() + half).abs() > 1e-9 * scale || (f.hi() - half).abs() > 1e-9 * scale {
        return Err(Error::GridMismatch(format!(
            "expected [-{half}, {half}], grid is on [{}, {}]",
            f.lo(),
            f.hi()
        )));
    }
    Ok(())
}

/// Diluted cost in convolution form `(d/2) ∫_0^{2·hi} l^d P(f1 + f2 >= l) dl`,
/// `f1, f2` independent with survival `F`.
///
/// `P` is assembled from the endpoint atoms and the piecewise-constant
/// density of the linear part; it is a piecewise cubic in `l` with breaks on
/// the lattice `2·lo + m·step`, integrated cell by cell with 4-point
/// Gauss-Legendre.
pub fn beta_theta_convolution(f: &SurvivalGrid, p: &ModelParams) -> Result<f64> {
    let n = f.cells();
    let h = f.step();
    let v = f.values();
    let lo = f.lo();
    let hi = f.hi();
    let cum = f.cumulative();
    let atom_lo = (f.below() - v[0]).max(0.0);
    let atom_hi = (v[n] - f.above()).max(0.0);
    let density: Vec<f64> = v.windows(2).map(|w| (w[0] - w[1]) / h).collect();
    let nodes: Vec<f64> = f.nodes().collect();
    let prob = |l: f64| {
        let mut s = 0.0;
        if atom_lo > 0.0 {
            s += atom_lo * f.eval(l - lo);
        }
        if atom_hi > 0.0 {
            s += atom_hi * f.eval(l - hi);
        }
        let mut prev = f.antiderivative(&cum, l - nodes[0]);
        for j in 0..n {
            let next = f.antiderivative(&cum, l - nodes[j + 1]);
            s += density[j] * (prev - next);
            prev = next;
        }
        s
    };
    let rule = gl4_unit();
    let d = p.d;
    let cells: Vec<f64> = (0..2 * n)
        .into_par_iter()
        .map(|m| {
            let mut a = 2.0 * lo + m as f64 * h;
            let b = if m + 1 == 2 * n { 2.0 * hi } else { a + h };
            if b <= 0.0 {
                return 0.0;
            }
            a = a.max(0.0);
            let w = b - a;
            rule.iter()
                .map(|&(t, wt)| {
                    let l = a + t * w;
                    wt * l.powf(d) * prob(l)
                })
                .sum::<f64>()
                * w
        })
        .collect();
    Ok(0.5 * d * cells.iter().sum::<f64>())
}

#[derive(Debug, Clone, Serialize)]
pub struct BetaConfig {
    pub schedule: Vec<f64>,
    pub solver: SolverConfig,
    /// Stop once `β` grows by less than this over one step of the schedule.
    pub increment_tol: f64,
    /// Allowed decrease of `β` along the schedule before it is an error.
    pub monotone_slack: f64,
    /// Combine the solves on `step` and `2·step` by Richardson extrapolation.
    pub richardson: bool,
}

impl Default for BetaConfig {
    fn default() -> Self {
        Self {
            schedule: vec![2.0, 4.0, 8.0, 16.0, 32.0],
            solver: SolverConfig::default(),
            increment_tol: 1e-9,
            monotone_slack: 1e-9,
            richardson: true,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BetaPoint {
    pub theta: f64,
    /// Richardson value `(4 β_h - β_2h) / 3` (or `β_h` when disabled).
    pub beta: f64,
    pub beta_fine: f64,
    pub beta_coarse: Option<f64>,
    pub step: f64,
    /// Atom at `theta/2`; for edge cover the mass of `f = theta/2`.
    pub q: f64,
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BetaEstimate {
    pub problem: Problem,
    pub d: f64,
    pub theta_values: Vec<f64>,
    pub beta_values: Vec<f64>,
    pub beta_limit: f64,
    pub extrapolation_gap: f64,
    /// The increment criterion was met before the schedule ran out.
    pub schedule_converged: bool,
    pub points: Vec<BetaPoint>,
    /// Edge cover only: the `theta = inf` solve that supplies `beta_limit`.
    pub undiluted: Option<BetaPoint>,
}

fn solve_beta(problem: Problem, p: &ModelParams, cfg: &SolverConfig) -> Result<(f64, SurvivalGrid, usize, f64)> {
    let rep = solve_fixed_point(problem, p, cfg)?;
    if !rep.converged {
        return Err(Error::NonConvergence {
            iterations: rep.iterations,
            residual: rep.even_odd_gap,
        });
    }
    let beta = beta_theta(&rep.fixed_point, p)?;
    Ok((beta, rep.fixed_point, rep.iterations, rep.even_odd_gap))
}

/// `β_θ` for one dilution, with the optional Richardson refinement.
pub fn beta_point(problem: Problem, p: &ModelParams, cfg: &BetaConfig) -> Result<BetaPoint> {
    let (fine, grid, iterations, residual) = solve_beta(problem, p, &cfg.solver)?;
    let coarse = if cfg.richardson {
        let cells = grid.cells();
        let even = problem == Problem::EdgeCover && !p.is_finite();
        if cells % 2 == 1 || (even && cells % 4 != 0) {
            return Err(invalid("cells", "Richardson refinement needs a cell count divisible by 4"));
        }
        let coarse_cfg = cfg.solver.clone().with_cells(cells / 2);
        Some(solve_beta(problem, p, &coarse_cfg)?.0)
    } else {
        None
    };
    let beta = match coarse {
        Some(c) => (4.0 * fine - c) / 3.0,
        None => fine,
    };
    Ok(BetaPoint {
        theta: p.theta,
        beta,
        beta_fine: fine,
        beta_coarse: coarse,
        step: grid.step(),
        q: density_q(&grid),
        iterations,
        residual,
    })
}

/// Runs the `theta` schedule and reports the monotone sequence of diluted
/// costs. For edge cover the limit comes from a direct `theta = inf` solve.
pub fn beta_limit(problem: Problem, d: f64, cfg: &BetaConfig) -> Result<BetaEstimate> {
    if cfg.schedule.is_empty() {
        return Err(invalid("schedule", "must not be empty"));
    }
    if cfg.schedule.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("schedule", "must be strictly increasing"));
    }
    let mut points: Vec<BetaPoint> = Vec::new();
    let mut schedule_converged = false;
    for &theta in &cfg.schedule {
        let p = ModelParams::new(d, theta)?;
        let point = beta_point(problem, &p, cfg)?;
        if let Some(prev) = points.last() {
            if prev.beta - point.beta > cfg.monotone_slack {
                return Err(Error::NonMonotoneBeta {
                    theta_prev: prev.theta,
                    prev: prev.beta,
                    theta,
                    next: point.beta,
                });
            }
            let increment = point.beta - prev.beta;
            points.push(point);
            if increment < cfg.increment_tol {
                schedule_converged = true;
                break;
            }
        } else {
            points.push(point);
        }
    }
    let last = points.last().expect("schedule is non-empty");
    let extrapolation_gap = match points.len() {
        1 => 0.0,
        k => (points[k - 1].beta - points[k - 2].beta).max(0.0),
    };
    let mut beta_limit = last.beta;
    let undiluted = if problem == Problem::EdgeCover {
        let p = ModelParams::undiluted(d)?;
        let point = beta_point(problem, &p, cfg)?;
        if last.beta - point.beta > cfg.monotone_slack {
            return Err(Error::NonMonotoneBeta {
                theta_prev: last.theta,
                prev: last.beta,
                theta: f64::INFINITY,
                next: point.beta,
            });
        }
        beta_limit = point.beta;
        Some(point)
    } else {
        None
    };
    Ok(BetaEstimate {
        problem,
        d,
        theta_values: points.iter().map(|p| p.theta).collect(),
        beta_values: points.iter().map(|p| p.beta).collect(),
        beta_limit,
        extrapolation_gap,
        schedule_converged,
        points,
        undiluted,
    })
}
