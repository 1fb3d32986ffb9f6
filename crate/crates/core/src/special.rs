//! Scalar special functions. Error function and Gamma come from `libm`;
//! Lambert W and the Riemann zeta function are evaluated here.

/// Error function.
pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

/// Complementary error function, accurate for large arguments.
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// Principal branch of the Lambert W function for `x >= 0`; NaN otherwise.
pub fn lambert_w(x: f64) -> f64 {
    if !(x >= 0.0) {
        return f64::NAN;
    }
    if x == 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return f64::INFINITY;
    }
    let mut w = if x < 3.0 { x.ln_1p() * 0.8 } else { x.ln() - x.ln().ln().max(0.0) };
    for _ in 0..64 {
        let e = w.exp();
        let f = w * e - x;
        let wp1 = w + 1.0;
        // Halley step
        let denom = e * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let next = w - f / denom;
        if (next - w).abs() <= 1e-16 * next.abs().max(1e-300) {
            return next;
        }
        w = next;
    }
    w
}

// B_2k / (2k)!
const BERNOULLI_OVER_FACTORIAL: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30_240.0,
    -1.0 / 1_209_600.0,
    1.0 / 47_900_160.0,
    -691.0 / 1_307_674_368_000.0,
    1.0 / 74_724_249_600.0,
    -3617.0 / 10_670_622_842_880_000.0,
];

/// Riemann zeta function for real `s > 1` by Euler-Maclaurin summation.
pub fn zeta(s: f64) -> f64 {
    if !(s > 1.0) {
        return f64::NAN;
    }
    if s > 60.0 {
        return 1.0 + 2f64.powf(-s);
    }
    let n = 10.0f64;
    let mut sum: f64 = (1..10).map(|k| (k as f64).powf(-s)).sum();
    sum += n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s);
    // rising factorial s (s+1) ... (s+2k-2) times N^(-s-2k+1)
    let mut rising = s;
    let mut power = n.powf(-s - 1.0);
    for (k, c) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        if k > 0 {
            let j = 2.0 * k as f64;
            rising *= (s + j - 1.0) * (s + j);
            power /= n * n;
        }
        sum += c * rising * power;
    }
    sum
}
