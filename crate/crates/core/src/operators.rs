//! The cavity operators for matching (`V`), the 2-factor/TSP relaxation (`W`)
//! and edge cover, acting on survival grids, plus the fixed-point drivers.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::grid::{sup_distance, ModelParams, NodeKernel, SurvivalGrid};
use crate::pwit::Favor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Problem {
    Matching,
    Tsp,
    EdgeCover,
}

impl Problem {
    pub fn name(self) -> &'static str {
        match self {
            Problem::Matching => "matching",
            Problem::Tsp => "tsp",
            Problem::EdgeCover => "edge-cover",
        }
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Problem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "matching" => Ok(Problem::Matching),
            "tsp" => Ok(Problem::Tsp),
            "edge-cover" | "edge_cover" | "edgecover" => Ok(Problem::EdgeCover),
            other => Err(invalid("problem", format!("unknown problem `{other}`"))),
        }
    }
}

/// Mesh and stopping rules for the fixed-point solvers.
#[derive(Debug, Clone, Serialize)]
pub struct SolverConfig {
    /// Cells on the domain when `step` is not given.
    pub cells: usize,
    /// Requested grid step; rounded so that it divides the domain.
    pub step: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
    pub record_history: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            cells: 4096,
            step: None,
            tol: 1e-10,
            max_iter: 10_000,
            record_history: false,
        }
    }
}

impl SolverConfig {
    fn cells_for(&self, width: f64, even: bool) -> Result<usize> {
        let mut cells = match self.step {
            Some(h) if h > 0.0 => (width / h - 1e-9).ceil().max(1.0) as usize,
            Some(h) => return Err(invalid("step", format!("must be positive, got {h}"))),
            None => self.cells,
        };
        if cells == 0 {
            return Err(invalid("cells", "must be positive"));
        }
        if even && cells % 2 == 1 {
            cells += 1;
        }
        Ok(cells)
    }

    pub fn with_cells(mut self, cells: usize) -> Self {
        self.cells = cells;
        self.step = None;
        self
    }
}

/// Domain of the survival function for a problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Domain {
    pub lo: f64,
    pub hi: f64,
    pub cells: usize,
    pub below: f64,
    pub above: f64,
}

impl Domain {
    pub fn constant(&self, c: f64) -> SurvivalGrid {
        SurvivalGrid::constant(self.lo, self.hi, self.cells, c, self.below, self.above)
            .expect("constant grid in [0,1] is valid")
    }
}

/// Truncation point for the undiluted edge-cover equation: the a priori bound
/// `F(x) <= exp(-x^d)` puts the neglected tail below `tol / 10`.
pub fn edgecover_cutoff(d: f64, tol: f64) -> f64 {
    (10.0 / tol).ln().powf(1.0 / d)
}

pub fn domain(problem: Problem, p: &ModelParams, cfg: &SolverConfig) -> Result<Domain> {
    match problem {
        Problem::Matching | Problem::Tsp => {
            if !p.is_finite() {
                return Err(invalid("theta", format!("{problem} requires a finite theta")));
            }
            let half = p.half_theta();
            Ok(Domain {
                lo: -half,
                hi: half,
                cells: cfg.cells_for(p.theta, false)?,
                below: 1.0,
                above: 0.0,
            })
        }
        Problem::EdgeCover => {
            let (hi, even) = if p.is_finite() {
                (p.half_theta(), false)
            } else {
                (edgecover_cutoff(p.d, cfg.tol), true)
            };
            Ok(Domain {
                lo: 0.0,
                hi,
                cells: cfg.cells_for(hi, even)?,
                below: 1.0,
                above: 0.0,
            })
        }
    }
}

/// How the edge-cover operator treats the dilution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EdgeCoverHorizon {
    Diluted(ModelParams),
    /// `theta = inf`, truncated at the grid's upper end; `tol` bounds the
    /// neglected tail `exp(-cutoff^d)`.
    Undiluted { d: f64, tol: f64 },
}

/// An operator bound to one mesh, with its quadrature weights precomputed.
pub struct PreparedOperator {
    problem: Problem,
    params: ModelParams,
    lo: f64,
    hi: f64,
    below: f64,
    above: f64,
    kind: KernelKind,
}

enum KernelKind {
    Exact(NodeKernel),
    Simpson { weights: Vec<f64>, powers: Vec<f64>, base: Vec<f64> },
}

fn check_domain(grid: &SurvivalGrid, lo: f64, hi: f64) -> Result<()> {
    let scale = lo.abs().max(hi.abs()).max(1.0);
    if (grid.lo() - lo).abs() > 1e-9 * scale || (grid.hi() - hi).abs() > 1e-9 * scale {
        return Err(Error::GridMismatch(format!(
            "operator expects [{lo}, {hi}], grid is on [{}, {}]",
            grid.lo(),
            grid.hi()
        )));
    }
    Ok(())
}

impl PreparedOperator {
    pub fn new(problem: Problem, p: &ModelParams, mesh: &SurvivalGrid) -> Result<Self> {
        let (lo, hi) = match problem {
            Problem::Matching | Problem::Tsp => {
                if !p.is_finite() {
                    return Err(invalid("theta", format!("{problem} requires a finite theta")));
                }
                (-p.half_theta(), p.half_theta())
            }
            Problem::EdgeCover if p.is_finite() => (0.0, p.half_theta()),
            Problem::EdgeCover => (0.0, mesh.hi()),
        };
        check_domain(mesh, lo, hi)?;
        let kind = if problem == Problem::EdgeCover && !p.is_finite() {
            let n = mesh.cells();
            if n % 2 == 1 {
                return Err(Error::InvalidGrid(
                    "undiluted edge-cover grid needs an even number of cells".into(),
                ));
            }
            let h = mesh.step();
            let weights = (0..=n)
                .map(|j| {
                    let c = if j == 0 || j == n {
                        1.0
                    } else if j % 2 == 1 {
                        4.0
                    } else {
                        2.0
                    };
                    c * h / 3.0
                })
                .collect();
            let d = p.d;
            let powers = (0..=2 * n)
                .map(|m| {
                    let s = (m as f64 * h).min(2.0 * mesh.hi());
                    if d == 1.0 {
                        1.0
                    } else {
                        d * s.powf(d - 1.0)
                    }
                })
                .collect();
            let base = mesh.nodes().map(|x| x.powf(d)).collect();
            KernelKind::Simpson {
                weights,
                powers,
                base,
            }
        } else {
            KernelKind::Exact(NodeKernel::new(mesh, p.d, 0.0, mesh.values().len()))
        };
        Ok(Self {
            problem,
            params: *p,
            lo,
            hi,
            below: 1.0,
            above: 0.0,
            kind,
        })
    }

    pub fn problem(&self) -> Problem {
        self.problem
    }

    /// Kernel `I(x_i)` at every node.
    pub fn kernel(&self, f: &[f64], below: f64) -> Vec<f64> {
        match &self.kind {
            KernelKind::Exact(k) => k.apply(f, below),
            KernelKind::Simpson {
                weights,
                powers,
                base,
            } => {
                let n = f.len() - 1;
                let wf: Vec<f64> = weights.iter().zip(f).map(|(w, v)| w * v).collect();
                let row = |i: usize| {
                    let mut acc = 0.0;
                    for (j, &x) in wf.iter().enumerate() {
                        acc += x * powers[i + j];
                    }
                    below * base[i] + acc
                };
                if n >= 256 {
                    (0..=n).into_par_iter().map(row).collect()
                } else {
                    (0..=n).map(row).collect()
                }
            }
        }
    }

    /// Applies the operator to a grid on this operator's mesh.
    pub fn apply(&self, f: &SurvivalGrid) -> Result<SurvivalGrid> {
        check_domain(f, self.lo, self.hi)?;
        let below = match self.problem {
            // the matching/TSP kernel never reaches below the domain
            Problem::Matching | Problem::Tsp => 0.0,
            Problem::EdgeCover => 1.0,
        };
        Ok(self.apply_values(f.values(), below, f))
    }

    fn apply_values(&self, f: &[f64], below: f64, mesh: &SurvivalGrid) -> SurvivalGrid {
        let kernel = self.kernel(f, below);
        let values = kernel
            .into_iter()
            .map(|i| match self.problem {
                Problem::Tsp => ((1.0 + i) * (-i).exp()).min(1.0),
                _ => (-i).exp(),
            })
            .collect();
        SurvivalGrid::from_parts(mesh.lo(), mesh.hi(), values, self.below, self.above)
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }
}

/// `(V_θ F)(x) = exp(-d ∫_0^{θ/2+x} l^(d-1) F(l-x) dl)` on `[-θ/2, θ/2]`.
pub fn apply_matching_operator(f: &SurvivalGrid, p: &ModelParams) -> Result<SurvivalGrid> {
    PreparedOperator::new(Problem::Matching, p, f)?.apply(f)
}

/// `(W_θ F)(x) = (1 + I(x)) exp(-I(x))` with the matching kernel `I`.
pub fn apply_tsp_operator(f: &SurvivalGrid, p: &ModelParams) -> Result<SurvivalGrid> {
    PreparedOperator::new(Problem::Tsp, p, f)?.apply(f)
}

/// Edge-cover operator. `F` lives on `[0, θ/2]` (or `[0, cutoff]`) with
/// `F = 1` below zero; node 0 holds the right limit `F(0+)`.
pub fn apply_edgecover_operator(f: &SurvivalGrid, horizon: EdgeCoverHorizon) -> Result<SurvivalGrid> {
    match horizon {
        EdgeCoverHorizon::Diluted(p) => {
            if !p.is_finite() {
                return Err(invalid("theta", "use EdgeCoverHorizon::Undiluted for theta = inf"));
            }
            PreparedOperator::new(Problem::EdgeCover, &p, f)?.apply(f)
        }
        EdgeCoverHorizon::Undiluted { d, tol } => {
            let p = ModelParams::undiluted(d)?;
            check_cutoff(f.hi(), d, tol)?;
            PreparedOperator::new(Problem::EdgeCover, &p, f)?.apply(f)
        }
    }
}

pub fn check_cutoff(cutoff: f64, d: f64, tol: f64) -> Result<()> {
    let tail = (-cutoff.powf(d)).exp();
    if tail > tol {
        return Err(Error::CutoffTooSmall { cutoff, tail, tol });
    }
    Ok(())
}

/// Dispatches on `problem`; undiluted edge cover uses `cfg.tol` for the tail.
pub fn apply_operator(problem: Problem, f: &SurvivalGrid, p: &ModelParams) -> Result<SurvivalGrid> {
    PreparedOperator::new(problem, p, f)?.apply(f)
}

#[derive(Debug, Clone, Serialize)]
pub struct FixedPointReport {
    pub fixed_point: SurvivalGrid,
    /// Operator applications performed.
    pub iterations: usize,
    /// Sup distance between the last two iterates.
    pub even_odd_gap: f64,
    pub converged: bool,
    /// Even and odd subsequences have each settled while their mutual gap
    /// stays above tolerance.
    pub period_two: bool,
    pub history: Option<Vec<f64>>,
}

/// Plain iteration from the zero function.
///
/// Successive iterates are the laws of the Alice/Bob partial valuations, so
/// the even/odd gap is reported as is; it is never averaged away.
pub fn iterate_to_fixed_point(
    problem: Problem,
    p: &ModelParams,
    cfg: &SolverConfig,
) -> Result<FixedPointReport> {
    let dom = domain(problem, p, cfg)?;
    iterate_from(problem, p, dom.constant(0.0), cfg)
}

/// Plain iteration from an arbitrary starting grid.
pub fn iterate_from(
    problem: Problem,
    p: &ModelParams,
    start: SurvivalGrid,
    cfg: &SolverConfig,
) -> Result<FixedPointReport> {
    if !(cfg.tol > 0.0) {
        return Err(invalid("tol", "must be positive"));
    }
    if problem == Problem::EdgeCover && !p.is_finite() {
        check_cutoff(start.hi(), p.d, cfg.tol / 10.0)?;
    }
    let op = PreparedOperator::new(problem, p, &start)?;
    let mut history = cfg.record_history.then(Vec::new);
    let mut older: Option<SurvivalGrid> = None;
    let mut gaps: Vec<f64> = Vec::new();
    let mut current = start;
    let mut gap = f64::INFINITY;
    for it in 1..=cfg.max_iter {
        let next = op.apply(&current)?;
        gap = sup_distance(&next, &current)?;
        gaps.push(gap);
        if let Some(h) = history.as_mut() {
            h.push(gap);
        }
        if gap <= cfg.tol {
            return Ok(FixedPointReport {
                fixed_point: next,
                iterations: it,
                even_odd_gap: gap,
                converged: true,
                period_two: false,
                history,
            });
        }
        // a genuine 2-cycle: both subsequences have stopped moving and the
        // gap between them no longer shrinks
        if let Some(prev2) = &older {
            let settled = sup_distance(&next, prev2)?;
            let stalled = gaps.len() >= 3 && gap >= (1.0 - 1e-9) * gaps[gaps.len() - 3];
            if settled <= cfg.tol && stalled {
                return Ok(FixedPointReport {
                    fixed_point: next,
                    iterations: it,
                    even_odd_gap: gap,
                    converged: false,
                    period_two: true,
                    history,
                });
            }
        }
        older = Some(std::mem::replace(&mut current, next));
    }
    Ok(FixedPointReport {
        fixed_point: current,
        iterations: cfg.max_iter,
        even_odd_gap: gap,
        converged: false,
        period_two: false,
        history,
    })
}

/// Damped iteration `F <- (F + T F) / 2`, accepted once the undamped residual
/// `sup |T F - F|` is within `cfg.tol`.
///
/// Plain iteration contracts very slowly at large `theta` (the linearised
/// operator has an eigenvalue close to -1); damping removes that mode.
/// The returned grid is a genuine fixed point up to the residual, which is
/// reported in `even_odd_gap`.
pub fn solve_fixed_point(problem: Problem, p: &ModelParams, cfg: &SolverConfig) -> Result<FixedPointReport> {
    let dom = domain(problem, p, cfg)?;
    if problem == Problem::EdgeCover && !p.is_finite() {
        check_cutoff(dom.hi, p.d, cfg.tol / 10.0)?;
    }
    let start = dom.constant(0.0);
    let op = PreparedOperator::new(problem, p, &start)?;
    let mut current = op.apply(&start)?;
    let mut history = cfg.record_history.then(Vec::new);
    let mut omega = 0.5;
    let mut best = f64::INFINITY;
    let mut stale = 0;
    for it in 1..=cfg.max_iter {
        let next = op.apply(&current)?;
        let residual = sup_distance(&next, &current)?;
        if let Some(h) = history.as_mut() {
            h.push(residual);
        }
        if residual <= cfg.tol {
            return Ok(FixedPointReport {
                fixed_point: current,
                iterations: it,
                even_odd_gap: residual,
                converged: true,
                period_two: false,
                history,
            });
        }
        if residual < best {
            best = residual;
            stale = 0;
        } else {
            stale += 1;
            if stale >= 50 {
                omega *= 0.5;
                stale = 0;
            }
        }
        let mixed = current
            .values()
            .iter()
            .zip(next.values())
            .map(|(a, b)| (1.0 - omega) * a + omega * b)
            .collect();
        current = current.with_values(mixed);
    }
    let residual = sup_distance(&op.apply(&current)?, &current)?;
    Ok(FixedPointReport {
        fixed_point: current,
        iterations: cfg.max_iter,
        even_odd_gap: residual,
        converged: false,
        period_two: false,
        history,
    })
}

/// Law of the depth-`k` partial valuation at the root: the boundary law at
/// distance `k` pushed through `k` operator applications.
pub fn partial_valuation_law(
    problem: Problem,
    p: &ModelParams,
    k: usize,
    favor: Favor,
    cfg: &SolverConfig,
) -> Result<SurvivalGrid> {
    let dom = domain(problem, p, cfg)?;
    let high_at_boundary = (favor == Favor::Bob) == k.is_multiple_of(2);
    let mut g = dom.constant(if high_at_boundary { 1.0 } else { 0.0 });
    let op = PreparedOperator::new(problem, p, &g)?;
    for _ in 0..k {
        g = op.apply(&g)?;
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(d: f64, theta: f64) -> ModelParams {
        ModelParams::new(d, theta).unwrap()
    }

    fn cfg(cells: usize) -> SolverConfig {
        SolverConfig::default().with_cells(cells)
    }

    #[test]
    fn matching_of_zero_is_one() {
        let p = params(2.0, 3.0);
        let zero = SurvivalGrid::constant(-1.5, 1.5, 64, 0.0, 0.0, 0.0).unwrap();
        let out = apply_matching_operator(&zero, &p).unwrap();
        assert!(out.values().iter().all(|&v| v == 1.0));
        let tsp = apply_tsp_operator(&zero, &p).unwrap();
        assert!(tsp.values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn operators_of_one_are_analytic() {
        let p = params(2.0, 3.0);
        let one = SurvivalGrid::constant(-1.5, 1.5, 64, 1.0, 1.0, 0.0).unwrap();
        let v = apply_matching_operator(&one, &p).unwrap();
        let w = apply_tsp_operator(&one, &p).unwrap();
        for (i, x) in one.nodes().enumerate() {
            let i_x = (1.5 + x).powi(2);
            assert!((v.values()[i] - (-i_x).exp()).abs() < 1e-13);
            assert!((w.values()[i] - (1.0 + i_x) * (-i_x).exp()).abs() < 1e-13);
        }
    }

    #[test]
    fn matching_closed_form_is_fixed_for_q_half() {
        let q: f64 = 0.5;
        let theta = -2.0 * q.ln() / (1.0 + q);
        let p = params(1.0, theta);
        let k = 1.0 + q;
        let f = SurvivalGrid::from_fn(-theta / 2.0, theta / 2.0, 4096, 1.0, 0.0, |x| {
            k / (1.0 + (k * x).exp())
        })
        .unwrap();
        let g = apply_matching_operator(&f, &p).unwrap();
        assert!(sup_distance(&f, &g).unwrap() < 1e-8);
    }

    #[test]
    fn operators_reject_wrong_domain() {
        let p = params(1.0, 2.0);
        let g = SurvivalGrid::constant(-2.0, 2.0, 8, 1.0, 1.0, 0.0).unwrap();
        assert!(matches!(apply_matching_operator(&g, &p), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn undiluted_edgecover_of_zero_is_exp() {
        let cutoff = edgecover_cutoff(2.0, 1e-10);
        let zero = SurvivalGrid::constant(0.0, cutoff, 256, 0.0, 1.0, 0.0).unwrap();
        let out = apply_edgecover_operator(&zero, EdgeCoverHorizon::Undiluted { d: 2.0, tol: 1e-10 }).unwrap();
        for (i, x) in zero.nodes().enumerate() {
            assert!((out.values()[i] - (-x * x).exp()).abs() < 1e-14);
        }
    }

    #[test]
    fn undiluted_edgecover_d1_maps_exponentials() {
        let cutoff = edgecover_cutoff(1.0, 1e-12);
        let a = 0.8;
        let f = SurvivalGrid::from_fn(0.0, cutoff, 4096, 1.0, 0.0, |x| a * (-x).exp()).unwrap();
        let out = apply_edgecover_operator(&f, EdgeCoverHorizon::Undiluted { d: 1.0, tol: 1e-11 }).unwrap();
        let expected = (-a_f64(a)).exp();
        for (i, x) in f.nodes().enumerate() {
            assert!((out.values()[i] - expected * (-x).exp()).abs() < 1e-10);
        }
    }

    fn a_f64(a: f64) -> f64 {
        a
    }

    #[test]
    fn small_cutoff_is_rejected() {
        let g = SurvivalGrid::constant(0.0, 2.0, 16, 0.0, 1.0, 0.0).unwrap();
        assert!(matches!(
            apply_edgecover_operator(&g, EdgeCoverHorizon::Undiluted { d: 1.0, tol: 1e-10 }),
            Err(Error::CutoffTooSmall { .. })
        ));
    }

    #[test]
    fn second_iterate_is_v_of_one() {
        let p = params(1.5, 2.0);
        let c = SolverConfig {
            max_iter: 2,
            ..cfg(128)
        };
        let rep = iterate_to_fixed_point(Problem::Matching, &p, &c).unwrap();
        assert_eq!(rep.iterations, 2);
        let one = domain(Problem::Matching, &p, &c).unwrap().constant(1.0);
        let v1 = apply_matching_operator(&one, &p).unwrap();
        assert_eq!(sup_distance(&rep.fixed_point, &v1).unwrap(), 0.0);
    }

    #[test]
    fn small_theta_converges_d1() {
        for &theta in &[0.25, 0.5, 1.0] {
            let rep = iterate_to_fixed_point(Problem::Matching, &params(1.0, theta), &cfg(512)).unwrap();
            assert!(rep.converged, "theta={theta}");
            assert!(rep.fixed_point.values().last().unwrap() > &0.0);
        }
    }

    #[test]
    fn iterates_alternate_monotonically() {
        let p = params(2.0, 3.0);
        let c = cfg(128);
        let dom = domain(Problem::Matching, &p, &c).unwrap();
        let op = PreparedOperator::new(Problem::Matching, &p, &dom.constant(0.0)).unwrap();
        let mut iterates = vec![dom.constant(0.0)];
        for _ in 0..12 {
            let next = op.apply(iterates.last().unwrap()).unwrap();
            iterates.push(next);
        }
        for k in (0..iterates.len() - 2).step_by(1) {
            let (a, b) = (&iterates[k], &iterates[k + 2]);
            for (x, y) in a.values().iter().zip(b.values()) {
                if k % 2 == 0 {
                    assert!(y >= &(x - 1e-15), "even iterates must increase");
                } else {
                    assert!(y <= &(x + 1e-15), "odd iterates must decrease");
                }
            }
        }
        for g in &iterates[1..] {
            assert!(g.values().iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn fixed_point_independent_of_start() {
        let p = params(1.0, 2.0);
        let c = SolverConfig {
            tol: 1e-11,
            ..cfg(256)
        };
        let dom = domain(Problem::Matching, &p, &c).unwrap();
        let from_zero = iterate_from(Problem::Matching, &p, dom.constant(0.0), &c).unwrap();
        let from_one = iterate_from(Problem::Matching, &p, dom.constant(1.0), &c).unwrap();
        let ramp = SurvivalGrid::from_fn(dom.lo, dom.hi, dom.cells, 1.0, 0.0, |x| 0.5 - x / 4.0).unwrap();
        let from_ramp = iterate_from(Problem::Matching, &p, ramp, &c).unwrap();
        assert!(from_zero.converged && from_one.converged && from_ramp.converged);
        assert!(sup_distance(&from_zero.fixed_point, &from_one.fixed_point).unwrap() <= 2.0 * c.tol);
        assert!(sup_distance(&from_zero.fixed_point, &from_ramp.fixed_point).unwrap() <= 2.0 * c.tol);
    }

    #[test]
    fn damped_and_plain_agree() {
        let p = params(2.0, 2.5);
        let c = SolverConfig {
            tol: 1e-12,
            ..cfg(256)
        };
        for problem in [Problem::Matching, Problem::Tsp, Problem::EdgeCover] {
            let plain = iterate_to_fixed_point(problem, &p, &c).unwrap();
            let damped = solve_fixed_point(problem, &p, &c).unwrap();
            assert!(plain.converged && damped.converged, "{problem}");
            assert!(sup_distance(&plain.fixed_point, &damped.fixed_point).unwrap() < 1e-10);
        }
    }

    #[test]
    fn refinement_is_second_order() {
        let p = params(2.0, 3.0);
        let c = SolverConfig {
            tol: 1e-13,
            ..SolverConfig::default()
        };
        let solve = |cells| {
            solve_fixed_point(Problem::Matching, &p, &c.clone().with_cells(cells))
                .unwrap()
                .fixed_point
        };
        let g1 = solve(32);
        let g2 = solve(64);
        let g3 = solve(128);
        let diff = |a: &SurvivalGrid, b: &SurvivalGrid, stride: usize| {
            (0..=32)
                .map(|i| (a.values()[i * stride] - b.values()[i * 2 * stride]).abs())
                .fold(0.0, f64::max)
        };
        let first = diff(&g1, &g2, 1);
        let second = diff(&g2, &g3, 2);
        assert!(second <= 4.0 * first);
        let ratio = first / second;
        assert!(ratio > 3.0 && ratio < 5.0, "ratio {ratio}");
    }

    #[test]
    fn law_of_shallow_valuations() {
        let p = params(1.0, 2.0);
        let c = cfg(64);
        let b0 = partial_valuation_law(Problem::Matching, &p, 0, Favor::Bob, &c).unwrap();
        assert!(b0.values().iter().all(|&v| v == 1.0));
        let b1 = partial_valuation_law(Problem::Matching, &p, 1, Favor::Bob, &c).unwrap();
        assert!(b1.values().iter().all(|&v| v == 1.0));
        let a1 = partial_valuation_law(Problem::Matching, &p, 1, Favor::Alice, &c).unwrap();
        for (i, x) in a1.nodes().enumerate() {
            assert!((a1.values()[i] - (-(1.0 + x)).exp()).abs() < 1e-14);
        }
    }

    fn grid_in(dom: Domain, seed: Vec<f64>) -> SurvivalGrid {
        let n = dom.cells;
        let mut v = 1.0;
        let values = (0..=n)
            .map(|i| {
                v *= 0.5 + 0.5 * seed[i % seed.len()];
                v
            })
            .collect();
        SurvivalGrid::new(dom.lo, dom.hi, values, dom.below, dom.above).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn operators_are_antitone(
            seed in prop::collection::vec(0.0f64..1.0, 4..12),
            shrink in 0.0f64..1.0,
            d in 1.0f64..3.0,
            theta in 0.5f64..4.0,
        ) {
            let p = params(d, theta);
            let c = cfg(48);
            for problem in [Problem::Matching, Problem::Tsp, Problem::EdgeCover] {
                let dom = domain(problem, &p, &c).unwrap();
                let big = grid_in(dom, seed.clone());
                let small = big.with_values(big.values().iter().map(|v| v * shrink).collect());
                let a = apply_operator(problem, &big, &p).unwrap();
                let b = apply_operator(problem, &small, &p).unwrap();
                for (x, y) in a.values().iter().zip(b.values()) {
                    prop_assert!(x <= &(y + 1e-14));
                }
                prop_assert!(a.values().iter().all(|v| *v > 0.0 && *v <= 1.0));
            }
        }
    }
}
