//! Survival functions `F(x) = P(f >= x)` sampled on a uniform mesh.
//!
//! Between nodes a grid is linear; outside `[lo, hi]` it takes the explicit
//! `below` / `above` conventions. An atom of the underlying law at `hi`
//! shows up as `values[last] - above`, one at `lo` as `below - values[0]`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::quadrature::{linear_piece_weights, power_mass};

const MONOTONE_SLACK: f64 = 1e-12;
const MESH_TOL: f64 = 1e-9;

/// Pseudo-dimension `d` and dilution parameter `theta`.
///
/// `theta = +inf` is accepted and means the undiluted problem; only the
/// edge-cover routines understand it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    pub d: f64,
    pub theta: f64,
}

impl ModelParams {
    pub fn new(d: f64, theta: f64) -> Result<Self> {
        if !(d >= 1.0) || !d.is_finite() {
            return Err(invalid("d", format!("must be a finite number >= 1, got {d}")));
        }
        if !(theta > 0.0) {
            return Err(invalid("theta", format!("must be positive, got {theta}")));
        }
        Ok(Self { d, theta })
    }

    /// Undiluted parameters (`theta = inf`).
    pub fn undiluted(d: f64) -> Result<Self> {
        Self::new(d, f64::INFINITY)
    }

    pub fn is_finite(&self) -> bool {
        self.theta.is_finite()
    }

    /// `theta / 2`, the cost of quitting.
    pub fn half_theta(&self) -> f64 {
        0.5 * self.theta
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurvivalGrid {
    lo: f64,
    hi: f64,
    step: f64,
    values: Vec<f64>,
    below: f64,
    above: f64,
}

impl SurvivalGrid {
    /// Grid on `[lo, hi]` split into `values.len() - 1` equal cells.
    pub fn new(lo: f64, hi: f64, values: Vec<f64>, below: f64, above: f64) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidGrid("need at least two nodes".into()));
        }
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::InvalidGrid(format!("bad domain [{lo}, {hi}]")));
        }
        let step = (hi - lo) / (values.len() - 1) as f64;
        let grid = Self {
            lo,
            hi,
            step,
            values,
            below,
            above,
        };
        grid.validate()?;
        Ok(grid)
    }

    /// Grid with a prescribed step; `(hi - lo) / step` must be an integer.
    pub fn with_step(
        lo: f64,
        hi: f64,
        step: f64,
        values: Vec<f64>,
        below: f64,
        above: f64,
    ) -> Result<Self> {
        let cells = cells_for_step(lo, hi, step)?;
        if values.len() != cells + 1 {
            return Err(Error::InvalidGrid(format!(
                "expected {} values for step {step}, got {}",
                cells + 1,
                values.len()
            )));
        }
        Self::new(lo, hi, values, below, above)
    }

    /// Samples `f` at the nodes of a `cells`-cell mesh.
    pub fn from_fn<F: Fn(f64) -> f64>(
        lo: f64,
        hi: f64,
        cells: usize,
        below: f64,
        above: f64,
        f: F,
    ) -> Result<Self> {
        if cells == 0 {
            return Err(Error::InvalidGrid("need at least one cell".into()));
        }
        let step = (hi - lo) / cells as f64;
        let values = (0..=cells).map(|i| f(node_at(lo, hi, step, cells, i))).collect();
        Self::new(lo, hi, values, below, above)
    }

    pub fn constant(lo: f64, hi: f64, cells: usize, c: f64, below: f64, above: f64) -> Result<Self> {
        Self::from_fn(lo, hi, cells, below, above, |_| c)
    }

    // Used by the operators, whose outputs are valid by construction up to
    // rounding.
    pub(crate) fn from_parts(lo: f64, hi: f64, values: Vec<f64>, below: f64, above: f64) -> Self {
        let step = (hi - lo) / (values.len() - 1) as f64;
        Self {
            lo,
            hi,
            step,
            values,
            below,
            above,
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, c) in [("below", self.below), ("above", self.above)] {
            if c != 0.0 && c != 1.0 {
                return Err(Error::InvalidGrid(format!("{name} convention must be 0 or 1, got {c}")));
            }
        }
        for (i, &v) in self.values.iter().enumerate() {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidGrid(format!("value {v} at node {i} outside [0, 1]")));
            }
        }
        if let Some(i) = self
            .values
            .windows(2)
            .position(|w| w[1] > w[0] + MONOTONE_SLACK)
        {
            return Err(Error::InvalidGrid(format!("values increase at node {}", i + 1)));
        }
        if self.values[0] > self.below + MONOTONE_SLACK {
            return Err(Error::InvalidGrid("first value exceeds the below convention".into()));
        }
        if *self.values.last().unwrap() < self.above - MONOTONE_SLACK {
            return Err(Error::InvalidGrid("last value is below the above convention".into()));
        }
        Ok(())
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn below(&self) -> f64 {
        self.below
    }

    pub fn above(&self) -> f64 {
        self.above
    }

    /// Number of cells (one less than the number of nodes).
    pub fn cells(&self) -> usize {
        self.values.len() - 1
    }

    /// Position of node `i`; the last node is exactly `hi`.
    pub fn node(&self, i: usize) -> f64 {
        node_at(self.lo, self.hi, self.step, self.cells(), i)
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(move |i| self.node(i))
    }

    /// `F(x)`, with the conventions outside the domain.
    pub fn eval(&self, x: f64) -> f64 {
        if x < self.lo {
            return self.below;
        }
        if x > self.hi {
            return self.above;
        }
        let n = self.cells();
        let pos = (x - self.lo) / self.step;
        let near = pos.round();
        if (pos - near).abs() <= 1e-9 {
            return self.values[(near as usize).min(n)];
        }
        let i = (pos.floor() as usize).min(n);
        if i == n {
            return self.values[n];
        }
        let frac = pos - i as f64;
        self.values[i] + (self.values[i + 1] - self.values[i]) * frac
    }

    /// Same mesh and conventions (up to rounding in the endpoints).
    pub fn same_mesh(&self, other: &SurvivalGrid) -> bool {
        let scale = self.hi.abs().max(self.lo.abs()).max(1.0);
        self.values.len() == other.values.len()
            && (self.lo - other.lo).abs() <= MESH_TOL * scale
            && (self.hi - other.hi).abs() <= MESH_TOL * scale
    }

    pub(crate) fn with_values(&self, values: Vec<f64>) -> SurvivalGrid {
        debug_assert_eq!(values.len(), self.values.len());
        SurvivalGrid {
            values,
            ..self.clone()
        }
    }

    /// Prefix integrals `∫_lo^{node i} F`, one per node.
    pub(crate) fn cumulative(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.values.len());
        let mut acc = 0.0;
        out.push(0.0);
        for w in self.values.windows(2) {
            acc += 0.5 * self.step * (w[0] + w[1]);
            out.push(acc);
        }
        out
    }

    /// Antiderivative `Φ(y) = ∫_lo^y F`, extended with the conventions.
    pub(crate) fn antiderivative(&self, cumulative: &[f64], y: f64) -> f64 {
        if y <= self.lo {
            return self.below * (y - self.lo);
        }
        let n = self.cells();
        if y >= self.hi {
            return cumulative[n] + self.above * (y - self.hi);
        }
        let pos = (y - self.lo) / self.step;
        let i = (pos.floor() as usize).min(n - 1);
        let dx = y - self.node(i);
        let slope = (self.values[i + 1] - self.values[i]) / self.step;
        cumulative[i] + dx * (self.values[i] + 0.5 * slope * dx)
    }

    /// `d ∫_0^upper l^(d-1) F(l - x) dl`, see [`kernel_integral`].
    pub fn kernel_integral(&self, x: f64, d: f64, upper: f64) -> Result<f64> {
        kernel_integral(self, x, d, upper)
    }
}

fn node_at(lo: f64, hi: f64, step: f64, cells: usize, i: usize) -> f64 {
    if i == cells {
        hi
    } else {
        lo + i as f64 * step
    }
}

/// Number of cells for `step` on `[lo, hi]`, rejecting non-integral ratios.
pub fn cells_for_step(lo: f64, hi: f64, step: f64) -> Result<usize> {
    if !(step > 0.0) {
        return Err(invalid("step", format!("must be positive, got {step}")));
    }
    let ratio = (hi - lo) / step;
    let cells = ratio.round();
    if cells < 1.0 || (ratio - cells).abs() > MESH_TOL * ratio.max(1.0) {
        return Err(Error::InvalidGrid(format!(
            "(hi - lo) / step = {ratio} is not an integer"
        )));
    }
    Ok(cells as usize)
}

/// `I(x) = d ∫_0^upper l^(d-1) F(l - x) dl`.
///
/// The integrand is split wherever `l - x` crosses a node or a domain end, and
/// each piece is integrated exactly against the linear interpolant, so the
/// result is exact for the grid's piecewise-linear `F` at every `d`.
pub fn kernel_integral(grid: &SurvivalGrid, x: f64, d: f64, upper: f64) -> Result<f64> {
    if !(upper >= 0.0) {
        return Err(invalid("upper", format!("must be >= 0, got {upper}")));
    }
    if !(d >= 1.0) {
        return Err(invalid("d", format!("must be >= 1, got {d}")));
    }
    if upper == 0.0 {
        return Ok(0.0);
    }
    // work in t = l - x on [t_start, t_end]
    let t_start = -x;
    let t_end = upper - x;
    let mut total = 0.0;

    if t_start < grid.lo {
        let seg_end = t_end.min(grid.lo);
        total += grid.below * power_mass(0.0, seg_end + x, d);
    }
    if t_end > grid.hi {
        let seg_start = t_start.max(grid.hi);
        total += grid.above * power_mass(seg_start + x, upper, d);
    }

    let a = t_start.max(grid.lo);
    let b = t_end.min(grid.hi);
    if b > a {
        let n = grid.cells();
        let first = (((a - grid.lo) / grid.step).floor() as usize).min(n - 1);
        let last = ((((b - grid.lo) / grid.step).ceil() as usize).max(first + 1)).min(n);
        for j in first..last {
            let c0 = grid.node(j);
            let c1 = grid.node(j + 1);
            let p0 = c0.max(a);
            let p1 = c1.min(b);
            if p1 <= p0 {
                continue;
            }
            let s0 = (p0 + x).max(0.0);
            let s1 = (p1 + x).max(0.0);
            let (w0, w1) = linear_piece_weights(c0 + x, c1 + x, s0, s1, d);
            total += w0 * grid.values[j] + w1 * grid.values[j + 1];
        }
    }
    Ok(total.max(0.0))
}

/// `max_i |a_i - b_i|` over the nodes of two grids on the same mesh.
pub fn sup_distance(a: &SurvivalGrid, b: &SurvivalGrid) -> Result<f64> {
    if !a.same_mesh(b) {
        return Err(Error::GridMismatch(format!(
            "[{}, {}] x {} vs [{}, {}] x {}",
            a.lo,
            a.hi,
            a.values.len(),
            b.lo,
            b.hi,
            b.values.len()
        )));
    }
    Ok(a.values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}

/// Precomputed weights for evaluating the kernel at every point
/// `x_i = lo + (i + phase)·step` with `upper = hi + x_i`.
///
/// With `t_j + x_i = 2·lo + (i + j + phase)·step` the weight of a cell only
/// depends on `i + j`, so one pass over `O(cells)` pieces serves all rows.
pub(crate) struct NodeKernel {
    d: f64,
    lo: f64,
    step: f64,
    phase: f64,
    rows: usize,
    w0: Vec<f64>,
    w1: Vec<f64>,
    first_live: usize,
}

impl NodeKernel {
    pub(crate) fn new(grid: &SurvivalGrid, d: f64, phase: f64, rows: usize) -> Self {
        let cells = grid.cells();
        let h = grid.step;
        let span = rows + cells;
        let mut w0 = vec![0.0; span];
        let mut w1 = vec![0.0; span];
        let mut first_live = span;
        for m in 0..span {
            let a = 2.0 * grid.lo + (m as f64 + phase) * h;
            let b = a + h;
            if b <= 0.0 {
                continue;
            }
            first_live = first_live.min(m);
            let (x0, x1) = linear_piece_weights(a, b, a.max(0.0), b, d);
            w0[m] = x0;
            w1[m] = x1;
        }
        Self {
            d,
            lo: grid.lo,
            step: h,
            phase,
            rows,
            w0,
            w1,
            first_live,
        }
    }

    pub(crate) fn point(&self, i: usize) -> f64 {
        self.lo + (i as f64 + self.phase) * self.step
    }

    /// Kernel values at all rows for the grid values `f` (conventions taken
    /// from `below`).
    pub(crate) fn apply(&self, f: &[f64], below: f64) -> Vec<f64> {
        let cells = f.len() - 1;
        let body = |i: usize| {
            let x = self.point(i);
            let mut acc = if below != 0.0 && self.lo + x > 0.0 {
                below * power_mass(0.0, self.lo + x, self.d)
            } else {
                0.0
            };
            let j0 = self.first_live.saturating_sub(i).min(cells);
            let w0 = &self.w0[i + j0..i + cells];
            let w1 = &self.w1[i + j0..i + cells];
            let f0 = &f[j0..cells];
            let f1 = &f[j0 + 1..=cells];
            let mut s = 0.0;
            for k in 0..f0.len() {
                s += w0[k] * f0[k] + w1[k] * f1[k];
            }
            acc += s;
            acc.max(0.0)
        };
        if self.rows * cells >= 1 << 16 {
            (0..self.rows).into_par_iter().map(body).collect()
        } else {
            (0..self.rows).map(body).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ramp() -> SurvivalGrid {
        SurvivalGrid::new(0.0, 1.0, vec![1.0, 0.0], 1.0, 0.0).unwrap()
    }

    #[test]
    fn eval_constant_and_conventions() {
        let g = SurvivalGrid::constant(-1.0, 1.0, 8, 1.0, 1.0, 0.0).unwrap();
        assert_eq!(g.eval(0.37), 1.0);
        assert_eq!(g.eval(-6.0), 1.0);
        assert_eq!(g.eval(1.5), 0.0);
        assert_eq!(ramp().eval(0.25), 0.75);
    }

    #[test]
    fn eval_is_exact_at_nodes() {
        let g = SurvivalGrid::from_fn(-2.0, 2.0, 40, 1.0, 0.0, |x| 1.0 / (1.0 + x.exp())).unwrap();
        for (i, x) in g.nodes().enumerate() {
            assert_eq!(g.eval(x), g.values()[i]);
        }
    }

    #[test]
    fn rejects_invalid_grids() {
        assert!(SurvivalGrid::new(0.0, 1.0, vec![0.5, 0.7], 1.0, 0.0).is_err());
        assert!(SurvivalGrid::new(0.0, 1.0, vec![1.2, 0.7], 1.0, 0.0).is_err());
        assert!(SurvivalGrid::new(0.0, 1.0, vec![1.0, 0.7], 0.5, 0.0).is_err());
        assert!(SurvivalGrid::new(0.0, 1.0, vec![1.0, 0.0], 1.0, 1.0).is_err());
        assert!(SurvivalGrid::with_step(0.0, 1.0, 0.3, vec![1.0; 4], 1.0, 0.0).is_err());
        assert!(SurvivalGrid::with_step(0.0, 1.0, 0.25, vec![1.0; 5], 1.0, 0.0).is_ok());
    }

    #[test]
    fn kernel_of_constant_one_is_power() {
        let g = SurvivalGrid::constant(-4.0, 4.0, 64, 1.0, 1.0, 0.0).unwrap();
        for &d in &[1.0, 1.5, 2.0, 3.0] {
            for &x in &[-3.7, -1.0, 0.0, 0.3, 2.9] {
                let upper = 4.0 + x;
                let v = kernel_integral(&g, x, d, upper).unwrap();
                let exact = upper.powf(d);
                assert!((v - exact).abs() <= 1e-10 * exact.max(1.0), "d={d} x={x}: {v} vs {exact}");
            }
        }
    }

    #[test]
    fn kernel_of_zero_is_zero() {
        let g = SurvivalGrid::constant(-1.0, 1.0, 16, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(kernel_integral(&g, 0.2, 2.0, 1.2).unwrap(), 0.0);
    }

    #[test]
    fn kernel_rejects_negative_upper() {
        assert!(kernel_integral(&ramp(), 0.0, 1.0, -0.1).is_err());
    }

    #[test]
    fn kernel_d1_matches_closed_form_fixed_point() {
        // F(x) = (1+q)/(1+exp((1+q)x)) on [-θ/2, θ/2] with q = 1/2
        let q: f64 = 0.5;
        let theta = -2.0 * q.ln() / (1.0 + q);
        let k = 1.0 + q;
        let grid = SurvivalGrid::from_fn(-theta / 2.0, theta / 2.0, 4096, 1.0, 0.0, |x| {
            k / (1.0 + (k * x).exp())
        })
        .unwrap();
        // antiderivative of k/(1+e^{k t}) is t - ln(1+e^{k t})/k·k/k = k·t - ln(1+e^{kt}) ... /1
        let anti = |t: f64| k * t - (1.0 + (k * t).exp()).ln();
        let x = 0.0;
        let exact = anti(theta / 2.0) - anti(-x);
        let v = kernel_integral(&grid, x, 1.0, theta / 2.0 + x).unwrap();
        assert!((v - exact).abs() < 1e-8, "{v} vs {exact}");
    }

    #[test]
    fn sup_distance_cases() {
        let one = SurvivalGrid::constant(0.0, 1.0, 4, 1.0, 1.0, 0.0).unwrap();
        let zero = SurvivalGrid::constant(0.0, 1.0, 4, 0.0, 1.0, 0.0).unwrap();
        assert_eq!(sup_distance(&one, &one).unwrap(), 0.0);
        assert_eq!(sup_distance(&one, &zero).unwrap(), 1.0);
        let bumped = one.with_values(vec![1.0, 1.0, 0.75, 0.75, 0.75]);
        let other = one.with_values(vec![1.0, 1.0, 1.0, 0.75, 0.75]);
        assert_eq!(sup_distance(&bumped, &other).unwrap(), 0.25);
        let coarse = SurvivalGrid::constant(0.0, 1.0, 2, 1.0, 1.0, 0.0).unwrap();
        assert!(matches!(sup_distance(&one, &coarse), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn node_kernel_matches_generic_kernel() {
        for &(lo, hi, below) in &[(-3.0, 3.0, 1.0), (0.0, 2.5, 1.0)] {
            let g = SurvivalGrid::from_fn(lo, hi, 30, below, 0.0, |x| (-(x - lo) * 0.7).exp()).unwrap();
            for &d in &[1.0, 1.7, 2.0] {
                for &phase in &[0.0, 0.5] {
                    let rows = if phase == 0.0 { 31 } else { 30 };
                    let nk = NodeKernel::new(&g, d, phase, rows);
                    let fast = nk.apply(g.values(), below);
                    for (i, &v) in fast.iter().enumerate() {
                        let x = nk.point(i);
                        let slow = kernel_integral(&g, x, d, hi + x).unwrap();
                        assert!((v - slow).abs() < 1e-12 * slow.max(1.0), "d={d} i={i}: {v} vs {slow}");
                    }
                }
            }
        }
    }

    fn arb_grid() -> impl Strategy<Value = SurvivalGrid> {
        prop::collection::vec(0.0f64..1.0, 3..24).prop_map(|mut steps| {
            // cumulative products give a non-increasing sequence in [0, 1]
            let mut v = 1.0;
            for s in steps.iter_mut() {
                v *= 0.6 + 0.4 * *s;
                *s = v;
            }
            SurvivalGrid::new(-2.0, 2.0, steps, 1.0, 0.0).unwrap()
        })
    }

    proptest! {
        #[test]
        fn eval_is_monotone(g in arb_grid()) {
            let mut prev = f64::INFINITY;
            for k in 0..=500 {
                let x = -2.5 + 5.0 * k as f64 / 500.0;
                let v = g.eval(x);
                prop_assert!(v <= prev + 1e-15);
                prev = v;
            }
        }

        #[test]
        fn kernel_is_monotone_in_f(g in arb_grid(), scale in 0.0f64..1.0, x in -2.0f64..2.0, d in 1.0f64..3.0) {
            let smaller = g.with_values(g.values().iter().map(|v| v * scale).collect());
            let big = kernel_integral(&g, x, d, 2.0 + x).unwrap();
            let small = kernel_integral(&smaller, x, d, 2.0 + x).unwrap();
            prop_assert!(small <= big + 1e-12);
        }
    }
}
