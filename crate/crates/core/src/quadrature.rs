//! Fixed-order Gauss-Legendre rules and a few scalar helpers shared by the
//! integrators.

/// 10-point Gauss-Legendre abscissae on [-1, 1] (positive half).
const GL10_X: [f64; 5] = [
    0.148_874_338_981_631_2,
    0.433_395_394_129_247_2,
    0.679_409_568_299_024_4,
    0.865_063_366_688_984_5,
    0.973_906_528_517_171_7,
];
const GL10_W: [f64; 5] = [
    0.295_524_224_714_752_9,
    0.269_266_719_309_996_4,
    0.219_086_362_515_982,
    0.149_451_349_150_580_6,
    0.066_671_344_308_688_1,
];

/// 4-point rule, exact for polynomials of degree 7.
const GL4_X: [f64; 2] = [0.339_981_043_584_856_3, 0.861_136_311_594_052_6];
const GL4_W: [f64; 2] = [0.652_145_154_862_546_1, 0.347_854_845_137_453_9];

/// Nodes and weights of the 10-point rule mapped to [0, 1].
pub(crate) fn gl10_unit() -> [(f64, f64); 10] {
    unit_rule(&GL10_X, &GL10_W)
}

/// Nodes and weights of the 4-point rule mapped to [0, 1].
pub(crate) fn gl4_unit() -> [(f64, f64); 4] {
    unit_rule(&GL4_X, &GL4_W)
}

fn unit_rule<const H: usize, const N: usize>(x: &[f64; H], w: &[f64; H]) -> [(f64, f64); N] {
    let mut out = [(0.0, 0.0); N];
    for k in 0..H {
        out[2 * k] = (0.5 - 0.5 * x[k], 0.5 * w[k]);
        out[2 * k + 1] = (0.5 + 0.5 * x[k], 0.5 * w[k]);
    }
    out
}

/// Composite Gauss-Legendre (10 points per panel) of `f` on `[a, b]`.
pub fn gauss_legendre<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let rule = gl10_unit();
    let width = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let start = a + p as f64 * width;
        let panel: f64 = rule.iter().map(|&(t, w)| w * f(start + t * width)).sum();
        total += panel * width;
    }
    total
}

/// Weights `(w0, w1)` with
/// `∫_{s0}^{s1} d·s^(d-1)·[(1-τ)·f0 + τ·f1] ds = w0·f0 + w1·f1`,
/// where `τ = (s - a)/(b - a)` is the position inside the linear piece `[a, b]`
/// and `0 <= s0 <= s1` is the sub-range actually integrated.
pub(crate) fn linear_piece_weights(a: f64, b: f64, s0: f64, s1: f64, d: f64) -> (f64, f64) {
    debug_assert!(s0 >= 0.0 && s1 >= s0);
    let width = b - a;
    if s1 <= s0 || width <= 0.0 {
        return (0.0, 0.0);
    }
    if d == 1.0 {
        // ∫ (s - a)/width ds over [s0, s1]
        let w1 = ((s1 - a).powi(2) - (s0 - a).powi(2)) / (2.0 * width);
        return ((s1 - s0) - w1, w1);
    }
    let span = s1 - s0;
    if s0 <= span {
        // close to the origin: closed form has no harmful cancellation
        let m0 = s1.powf(d) - s0.powf(d);
        let m1 = d / (d + 1.0) * (s1.powf(d + 1.0) - s0.powf(d + 1.0));
        let w1 = (m1 - a * m0) / width;
        return (m0 - w1, w1);
    }
    let mut w0 = 0.0;
    let mut w1 = 0.0;
    for (t, w) in gl10_unit() {
        let s = s0 + t * span;
        let g = w * d * s.powf(d - 1.0);
        let tau = (s - a) / width;
        w0 += g * (1.0 - tau);
        w1 += g * tau;
    }
    (w0 * span, w1 * span)
}

/// `∫_{s0}^{s1} d·s^(d-1) ds`.
pub(crate) fn power_mass(s0: f64, s1: f64, d: f64) -> f64 {
    if s1 <= s0 {
        0.0
    } else if d == 1.0 {
        s1 - s0
    } else {
        s1.powf(d) - s0.powf(d)
    }
}

/// Bisection on a sign change, polished to full precision.
pub(crate) fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> Option<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() {
        return None;
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Some(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}
