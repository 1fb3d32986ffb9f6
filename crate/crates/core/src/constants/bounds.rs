use serde::Serialize;

use crate::error::{invalid, Result};
use crate::special::{gamma, zeta};

/// Rigorous bounds on the matching constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bounds {
    pub d: f64,
    /// `Γ(1 + 1/d) / 2`, half the expected nearest-neighbour distance.
    pub lower: f64,
    /// `Γ(1 + 1/d) ζ(1 + 1/d) / (2d)`.
    pub upper: f64,
    /// Greedy matching cost `(π/d) / sin(π/d) / 2`; diverges at `d = 1`.
    pub greedy: Option<f64>,
}

pub fn rigorous_bounds(d: f64) -> Result<Bounds> {
    if !(d >= 1.0) || !d.is_finite() {
        return Err(invalid("d", format!("must be a finite number >= 1, got {d}")));
    }
    let g = gamma(1.0 + 1.0 / d);
    let greedy = (d > 1.0).then(|| {
        let a = std::f64::consts::PI / d;
        0.5 * a / a.sin()
    });
    Ok(Bounds {
        d,
        lower: 0.5 * g,
        upper: g * zeta(1.0 + 1.0 / d) / (2.0 * d),
        greedy,
    })
}
