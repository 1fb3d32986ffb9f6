//! Verification suites shared by the command line and the acceptance tests.
//! Each check records whether it passed and, for finite instances, the
//! instance itself in the graph interchange format so it can be replayed.

use rand::Rng;
use serde::Serialize;

use crate::constants::{beta_limit, rigorous_bounds, BetaConfig};
use crate::error::Result;
use crate::finite::{
    diluted_matching, matching_best_two, optimal_play_path, random_graph, random_tree,
    verify_payoff_identity, write_graph, WeightedGraph,
};
use crate::grid::{sup_distance, ModelParams, SurvivalGrid};
use crate::operators::{
    apply_operator, domain, iterate_from, partial_valuation_law, Problem, SolverConfig,
};
use crate::pwit::{
    dkw_epsilon, ks_distance, replica_gap_profile, root_values, sample_rng, Favor, GapMethod,
};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: Option<f64>,
    pub bound: Option<f64>,
    pub detail: String,
    /// Failing finite instance in the interchange format.
    pub instance: Option<String>,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            value: None,
            bound: None,
            detail: detail.into(),
            instance: None,
        }
    }

    fn measured(mut self, value: f64, bound: f64) -> Self {
        self.value = Some(value);
        self.bound = Some(bound);
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    fn new(suite: &str, seed: u64, checks: Vec<Check>) -> Self {
        Self {
            suite: suite.into(),
            seed,
            passed: checks.iter().all(|c| c.passed),
            checks,
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Payoff identity on `graphs` random unit-capacity graphs (`n <= 10`,
/// some edges longer than `theta`) and `trees` random capacity-2 trees, plus
/// the optimal-play path property on graphs whose optima are unique.
pub fn payoff_identity_suite(seed: u64, graphs: usize, trees: usize) -> Result<SuiteReport> {
    let mut checks = Vec::new();
    let mut failed_graphs = Vec::new();
    let mut path_checked = 0;
    let mut path_failed = Vec::new();
    for i in 0..graphs {
        let mut rng = sample_rng(seed, i as u64);
        let n = rng.random_range(1..=10);
        let theta = rng.random_range(0.5..3.0);
        let density = rng.random_range(0.2..0.9);
        let g = random_graph(n, density, 1.5 * theta, &mut rng);
        let start = rng.random_range(0..n);
        let r = verify_payoff_identity(&g, start, theta, Problem::Matching)?;
        if !r.equal {
            failed_graphs.push(instance_text(&g, Problem::Matching, start, theta, r.game_value, r.optimization_difference));
        }
        if n <= 8 {
            if let Some(ok) = play_path_property(&g, start, theta)? {
                path_checked += 1;
                if !ok {
                    path_failed.push(instance_text(&g, Problem::Matching, start, theta, r.game_value, r.optimization_difference));
                }
            }
        }
    }
    checks.push(batch_check("matching payoff identity", graphs, failed_graphs));
    checks.push(batch_check("optimal play path is the symmetric difference", path_checked, path_failed));
    for (game, cap, name) in [
        (Problem::Tsp, 2, "capacity-2 tree payoff identity"),
        (Problem::EdgeCover, 1, "edge-cover tree payoff identity"),
    ] {
        let mut failed = Vec::new();
        for i in 0..trees {
            let mut rng = sample_rng(seed ^ 0x5eed_7ee5, i as u64 + if cap == 2 { 0 } else { 1 << 32 });
            let n = rng.random_range(1..=12);
            let theta = rng.random_range(0.5..3.0);
            let t = random_tree(n, 1.5 * theta, cap, &mut rng);
            let start = rng.random_range(0..n);
            let r = verify_payoff_identity(&t, start, theta, game)?;
            if !r.equal {
                failed.push(instance_text(&t, game, start, theta, r.game_value, r.optimization_difference));
            }
        }
        checks.push(batch_check(name, trees, failed));
    }
    Ok(SuiteReport::new("payoff-identity", seed, checks))
}

/// Graph text preceded by a `# problem P start S theta T ...` comment that
/// [`parse_instance_header`] reads back.
pub fn instance_text(g: &WeightedGraph, problem: Problem, start: usize, theta: f64, value: f64, diff: f64) -> String {
    format!(
        "# problem {problem} start {start} theta {} game {} difference {}\n{}",
        crate::finite::format_float(theta),
        crate::finite::format_float(value),
        crate::finite::format_float(diff),
        write_graph(g)
    )
}

/// `(problem, start, theta)` from the first line of a replay file.
pub fn parse_instance_header(text: &str) -> Option<(Problem, usize, f64)> {
    let line = text.lines().find(|l| l.trim_start().starts_with('#'))?;
    let f: Vec<&str> = line.trim_start_matches(|c: char| c == '#' || c.is_whitespace()).split_whitespace().collect();
    let get = |key: &str| f.iter().position(|w| *w == key).and_then(|i| f.get(i + 1));
    Some((get("problem")?.parse().ok()?, get("start")?.parse().ok()?, get("theta")?.parse().ok()?))
}

fn batch_check(name: &str, total: usize, failed: Vec<String>) -> Check {
    let mut c = Check::new(
        name,
        failed.is_empty(),
        format!("{} of {total} instances agree", total - failed.len()),
    );
    c.instance = failed.into_iter().next();
    c
}

/// `Some(ok)` when both `G` and `G - v` have a unique optimum (gap above
/// `1e-9` to the runner-up), `None` otherwise.
fn play_path_property(g: &WeightedGraph, start: usize, theta: f64) -> Result<Option<bool>> {
    let h = g.remove_vertex(start);
    let (b1, s1) = matching_best_two(g, theta)?;
    let (b2, s2) = if h.n() == 0 {
        (0.0, f64::INFINITY)
    } else {
        matching_best_two(&h, theta)?
    };
    if s1 - b1 <= 1e-9 || s2 - b2 <= 1e-9 {
        return Ok(None);
    }
    let key = |u: usize, v: usize| (u.min(v), u.max(v));
    let edges_of = |graph: &WeightedGraph, relabel: &dyn Fn(usize) -> usize| -> Result<Vec<(usize, usize)>> {
        if graph.n() == 0 {
            return Ok(Vec::new());
        }
        let s = diluted_matching(graph, theta)?;
        Ok(s.chosen_edges
            .iter()
            .map(|&i| {
                let e = graph.edges()[i];
                key(relabel(e.u), relabel(e.v))
            })
            .collect())
    };
    let m1 = edges_of(g, &|x| x)?;
    let m2 = edges_of(&h, &|x| if x >= start { x + 1 } else { x })?;
    let mut sym: Vec<(usize, usize)> = m1
        .iter()
        .filter(|e| !m2.contains(e))
        .chain(m2.iter().filter(|e| !m1.contains(e)))
        .copied()
        .collect();
    sym.sort_unstable();
    let path = optimal_play_path(g, start, theta)?;
    let mut walk: Vec<(usize, usize)> = path.windows(2).map(|w| key(w[0], w[1])).collect();
    walk.sort_unstable();
    Ok(Some(sym == walk))
}

/// Antitonicity, range after two iterations, alternating monotonicity of
/// the iterates and start-independence of the fixed point, for all three
/// operators on seeded random inputs.
pub fn operator_properties_suite(seed: u64) -> Result<SuiteReport> {
    let mut checks = Vec::new();
    let cfg = SolverConfig {
        tol: 1e-11,
        ..SolverConfig::default().with_cells(128)
    };
    for problem in [Problem::Matching, Problem::Tsp, Problem::EdgeCover] {
        let mut rng = sample_rng(seed, problem as u64);
        let mut antitone = true;
        let mut in_range = true;
        for _ in 0..20 {
            let d = rng.random_range(1.0..3.0);
            let theta = rng.random_range(0.5..4.0);
            let p = ModelParams::new(d, theta)?;
            let dom = domain(problem, &p, &cfg)?;
            let big = random_survival(dom.lo, dom.hi, dom.cells, &mut rng)?;
            let scale: f64 = rng.random();
            let small = SurvivalGrid::new(
                dom.lo,
                dom.hi,
                big.values().iter().map(|v| v * scale).collect(),
                1.0,
                0.0,
            )?;
            let a = apply_operator(problem, &big, &p)?;
            let b = apply_operator(problem, &small, &p)?;
            antitone &= a.values().iter().zip(b.values()).all(|(x, y)| *x <= y + 1e-14);
            // any starting function in [0,1] lands in [0,1] after two steps
            let wild = SurvivalGrid::new(dom.lo, dom.hi, big.values().to_vec(), 1.0, 0.0)?;
            let two = apply_operator(problem, &apply_operator(problem, &wild, &p)?, &p)?;
            in_range &= two.values().iter().all(|v| (0.0..=1.0).contains(v));
        }
        checks.push(Check::new(format!("{problem}: antitone"), antitone, "20 random grid pairs"));
        checks.push(Check::new(format!("{problem}: values in [0,1] after two iterations"), in_range, "20 random grids"));

        let p = ModelParams::new(1.5, 2.5)?;
        let dom = domain(problem, &p, &cfg)?;
        let mut iterates = vec![dom.constant(0.0)];
        for _ in 0..10 {
            let next = apply_operator(problem, iterates.last().expect("non-empty"), &p)?;
            iterates.push(next);
        }
        let mut alternating = true;
        for k in 0..iterates.len() - 2 {
            let (x, y) = (&iterates[k], &iterates[k + 2]);
            alternating &= x.values().iter().zip(y.values()).all(|(a, b)| {
                if k % 2 == 0 {
                    *b >= a - 1e-15
                } else {
                    *b <= a + 1e-15
                }
            });
        }
        checks.push(Check::new(
            format!("{problem}: even iterates increase, odd iterates decrease"),
            alternating,
            "d = 1.5, theta = 2.5, 10 iterations from zero",
        ));

        let starts = [
            dom.constant(0.0),
            dom.constant(1.0),
            random_survival(dom.lo, dom.hi, dom.cells, &mut rng)?,
        ];
        let mut fixed = Vec::new();
        for s in starts {
            let rep = iterate_from(problem, &p, s, &cfg)?;
            fixed.push((rep.converged, rep.fixed_point));
        }
        let spread = fixed
            .iter()
            .map(|(_, f)| sup_distance(f, &fixed[0].1))
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        let all_converged = fixed.iter().all(|(c, _)| *c);
        checks.push(
            Check::new(
                format!("{problem}: fixed point independent of the start"),
                all_converged && spread <= 2.0 * cfg.tol,
                "starts: zero, one, random",
            )
            .measured(spread, 2.0 * cfg.tol),
        );
    }
    Ok(SuiteReport::new("operator-properties", seed, checks))
}

fn random_survival<R: Rng>(lo: f64, hi: f64, cells: usize, rng: &mut R) -> Result<SurvivalGrid> {
    let mut v = 1.0;
    let values = (0..=cells)
        .map(|_| {
            v *= rng.random_range(0.9..1.0);
            v
        })
        .collect();
    SurvivalGrid::new(lo, hi, values, 1.0, 0.0)
}

/// Kolmogorov-Smirnov distance between the simulated law of `f_B^k(root)`
/// and the `k`-th operator iterate, against the DKW band at level 0.01, and
/// per-sample monotonicity of the replica gap in `k`.
pub fn simulator_consistency_suite(
    d: f64,
    theta: f64,
    k: usize,
    samples: usize,
    seed: u64,
    games: &[Problem],
    cells: usize,
) -> Result<SuiteReport> {
    let p = ModelParams::new(d, theta)?;
    let cfg = SolverConfig::default().with_cells(cells);
    let eps = dkw_epsilon(samples, 0.01);
    let mut checks = Vec::new();
    for &game in games {
        let vals = root_values(&p, k, samples, seed, game, Favor::Bob)?;
        let law = partial_valuation_law(game, &p, k, Favor::Bob, &cfg)?;
        let ks = ks_distance(&vals, &law);
        checks.push(
            Check::new(
                format!("{game}: KS distance of f_B^{k}(root) to the operator iterate"),
                ks <= eps,
                format!("d = {d}, theta = {theta}, {samples} samples, DKW alpha = 0.01"),
            )
            .measured(ks, eps),
        );
        let ks_list: Vec<usize> = (0..=k).collect();
        let prof = replica_gap_profile(&p, &ks_list, samples.min(20_000), seed, game, GapMethod::Exact)?;
        let monotone = prof.rows.windows(2).all(|w| w[1].mean_gap <= w[0].mean_gap + 1e-15);
        let nonneg = prof.rows.iter().all(|r| r.min_gap >= 0.0);
        checks.push(Check::new(
            format!("{game}: replica gap non-negative and non-increasing in k"),
            monotone && nonneg,
            format!("k = 0..={k}"),
        ));
    }
    Ok(SuiteReport::new("simulator-consistency", seed, checks))
}

/// `lower(d) <= beta_limit(matching, d) <= upper(d)` for each `d`.
pub fn bounds_sandwich_suite(ds: &[f64], cfg: &BetaConfig) -> Result<SuiteReport> {
    let mut checks = Vec::new();
    for &d in ds {
        let b = rigorous_bounds(d)?;
        let est = beta_limit(Problem::Matching, d, cfg)?;
        let ok = b.lower <= est.beta_limit && est.beta_limit <= b.upper;
        let mut c = Check::new(
            format!("d = {d}: lower <= beta <= upper"),
            ok,
            format!("{} <= {} <= {}", b.lower, est.beta_limit, b.upper),
        );
        c.value = Some(est.beta_limit);
        c.bound = Some(b.upper);
        checks.push(c);
    }
    Ok(SuiteReport::new("bounds-sandwich", 0, checks))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_payoff_suite_passes() {
        let r = payoff_identity_suite(3, 60, 30).unwrap();
        assert!(r.passed, "{:?}", r.failures().collect::<Vec<_>>());
        assert!(r.checks[1].detail.starts_with(|c: char| c.is_ascii_digit()));
    }

    #[test]
    fn instance_header_round_trips() {
        let g = WeightedGraph::new(2, vec![crate::finite::Edge { u: 0, v: 1, length: 0.3 }]).unwrap();
        let text = instance_text(&g, Problem::Tsp, 1, 2.5, 0.1, 0.2);
        assert_eq!(parse_instance_header(&text), Some((Problem::Tsp, 1, 2.5)));
        assert_eq!(crate::finite::parse_graph(&text).unwrap().edges(), g.edges());
    }

    #[test]
    fn operator_suite_passes() {
        let r = operator_properties_suite(1).unwrap();
        assert!(r.passed, "{:?}", r.failures().collect::<Vec<_>>());
    }

    #[test]
    fn simulator_suite_passes_small() {
        let r = simulator_consistency_suite(1.0, 2.0, 4, 5000, 2, &[Problem::Matching, Problem::EdgeCover], 512).unwrap();
        assert!(r.passed, "{:?}", r.failures().collect::<Vec<_>>());
    }
}
