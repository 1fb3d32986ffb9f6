use serde::Serialize;

use super::graph::WeightedGraph;
use crate::error::{invalid, Error, Result};

/// Largest vertex count for the subset dynamic program.
pub const MAX_MATCHING_VERTICES: usize = 24;
/// Largest number of relevant edges for the enumerating solvers.
pub const MAX_EXACT_EDGES: usize = 25;

/// Optimal solution of a diluted problem: chosen edges (indices into
/// `g.edges()`), total cost, and the unmet capacity that was paid for.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DilutedSolution {
    pub chosen_edges: Vec<usize>,
    pub edge_length: f64,
    pub deficiency: u32,
    /// `edge_length + (theta/2) · deficiency`.
    pub cost: f64,
}

impl DilutedSolution {
    fn new(g: &WeightedGraph, mut chosen: Vec<usize>, deficiency: u32, theta: f64) -> Self {
        chosen.sort_unstable();
        let edge_length: f64 = chosen.iter().map(|&i| g.edges()[i].length).sum();
        let cost = if deficiency == 0 {
            edge_length
        } else {
            edge_length + 0.5 * theta * deficiency as f64
        };
        Self {
            chosen_edges: chosen,
            edge_length,
            deficiency,
            cost,
        }
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if !(theta > 0.0) {
        return Err(invalid("theta", format!("must be positive, got {theta}")));
    }
    Ok(())
}

/// Diluted matching cost `M(G[S])` for every vertex subset `S`.
#[derive(Debug, Clone)]
pub struct MatchingTable {
    n: usize,
    theta: f64,
    cost: Vec<f64>,
}

impl MatchingTable {
    pub fn cost(&self, mask: u32) -> f64 {
        self.cost[mask as usize]
    }

    pub fn full_mask(&self) -> u32 {
        ((1u64 << self.n) - 1) as u32
    }

    /// `M(G)`.
    pub fn full(&self) -> f64 {
        self.cost(self.full_mask())
    }

    /// `M(G - v)`.
    pub fn without(&self, v: usize) -> f64 {
        self.cost(self.full_mask() & !(1u32 << v))
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

fn length_matrix(g: &WeightedGraph, theta: f64) -> Vec<Vec<(usize, f64, usize)>> {
    // per vertex: (neighbour, length, edge index) over relevant edges
    let mut adj = vec![Vec::new(); g.n()];
    for (i, e) in g.edges().iter().enumerate() {
        if e.length <= theta {
            adj[e.u].push((e.v, e.length, i));
            adj[e.v].push((e.u, e.length, i));
        }
    }
    for a in &mut adj {
        a.sort_by_key(|&(w, _, _)| w);
    }
    adj
}

/// Subset dynamic program over all vertex subsets; `theta = inf` forbids
/// unmatched vertices.
pub fn matching_table(g: &WeightedGraph, theta: f64) -> Result<MatchingTable> {
    check_theta(theta)?;
    let n = g.n();
    if n > MAX_MATCHING_VERTICES {
        return Err(Error::TooLarge(format!(
            "{n} vertices, the subset program handles at most {MAX_MATCHING_VERTICES}"
        )));
    }
    if !g.unit_capacities() {
        return Err(Error::Capacity("matching needs unit capacities".into()));
    }
    let adj = length_matrix(g, theta);
    let penalty = 0.5 * theta;
    let size = 1usize << n;
    let mut cost = vec![0.0; size];
    for mask in 1..size {
        let v = mask.trailing_zeros() as usize;
        let rest = mask & !(1 << v);
        let mut best = penalty + cost[rest];
        for &(w, l, _) in &adj[v] {
            if rest & (1 << w) != 0 {
                let c = l + cost[rest & !(1 << w)];
                if c < best {
                    best = c;
                }
            }
        }
        cost[mask] = best;
    }
    Ok(MatchingTable { n, theta, cost })
}

/// Minimum of edge lengths plus `theta/2` per unmatched vertex.
pub fn diluted_matching(g: &WeightedGraph, theta: f64) -> Result<DilutedSolution> {
    let table = matching_table(g, theta)?;
    if !table.full().is_finite() {
        return Err(Error::Infeasible(if g.n() % 2 == 1 {
            "odd vertex count has no perfect matching".into()
        } else {
            "graph has no perfect matching".into()
        }));
    }
    let adj = length_matrix(g, theta);
    let penalty = 0.5 * theta;
    let mut mask = table.full_mask() as usize;
    let mut chosen = Vec::new();
    let mut unmatched = 0;
    while mask != 0 {
        let v = mask.trailing_zeros() as usize;
        let rest = mask & !(1 << v);
        let target = table.cost[mask];
        let mut next = None;
        if penalty + table.cost[rest] == target {
            next = Some((rest, None));
        } else {
            for &(w, l, i) in &adj[v] {
                if rest & (1 << w) != 0 && l + table.cost[rest & !(1 << w)] == target {
                    next = Some((rest & !(1 << w), Some(i)));
                    break;
                }
            }
        }
        let (m, edge) = next.expect("table entry is attained");
        match edge {
            Some(i) => chosen.push(i),
            None => unmatched += 1,
        }
        mask = m;
    }
    Ok(DilutedSolution::new(g, chosen, unmatched, theta))
}

/// Best and second-best diluted matching costs by plain enumeration of all
/// matchings (not just those with relevant edges). Exponential; small `n`.
pub fn matching_best_two(g: &WeightedGraph, theta: f64) -> Result<(f64, f64)> {
    if g.n() > 14 {
        return Err(Error::TooLarge("enumeration limited to 14 vertices".into()));
    }
    let adj = length_matrix(g, f64::INFINITY);
    let mut best = (f64::INFINITY, f64::INFINITY);
    fn rec(v: usize, used: &mut [bool], adj: &[Vec<(usize, f64, usize)>], acc: f64, half: f64, best: &mut (f64, f64)) {
        let n = used.len();
        let mut v = v;
        while v < n && used[v] {
            v += 1;
        }
        if v == n {
            if acc < best.0 {
                best.1 = best.0;
                best.0 = acc;
            } else if acc < best.1 {
                best.1 = acc;
            }
            return;
        }
        used[v] = true;
        rec(v + 1, used, adj, acc + half, half, best);
        for &(w, l, _) in &adj[v] {
            if !used[w] {
                used[w] = true;
                rec(v + 1, used, adj, acc + l, half, best);
                used[w] = false;
            }
        }
        used[v] = false;
    }
    rec(0, &mut vec![false; g.n()], &adj, 0.0, 0.5 * theta, &mut best);
    Ok(best)
}

/// Branch and bound over edge subsets. `need[x]` is the capacity to be met,
/// `limit[x]` the maximum degree allowed (`None` for edge cover).
fn enumerate(
    g: &WeightedGraph,
    theta: f64,
    need: &[u32],
    limit: Option<&[u32]>,
) -> Result<(Vec<usize>, u32)> {
    let relevant: Vec<usize> = (0..g.edges().len())
        .filter(|&i| g.edges()[i].length <= theta)
        .collect();
    if relevant.len() > MAX_EXACT_EDGES {
        return Err(Error::TooLarge(format!(
            "{} relevant edges, the exact search handles at most {MAX_EXACT_EDGES}",
            relevant.len()
        )));
    }
    let n = g.n();
    let half = 0.5 * theta;
    let m = relevant.len();
    // cheapest half-edge still available at each vertex from position i on
    let mut suffix = vec![vec![f64::INFINITY; n]; m + 1];
    for i in (0..m).rev() {
        suffix[i] = suffix[i + 1].clone();
        let e = g.edges()[relevant[i]];
        suffix[i][e.u] = suffix[i][e.u].min(0.5 * e.length);
        suffix[i][e.v] = suffix[i][e.v].min(0.5 * e.length);
    }
    struct State<'a> {
        g: &'a WeightedGraph,
        relevant: Vec<usize>,
        suffix: Vec<Vec<f64>>,
        need: &'a [u32],
        limit: Option<&'a [u32]>,
        half: f64,
        deg: Vec<u32>,
        chosen: Vec<usize>,
        best_cost: f64,
        best: Option<(Vec<usize>, u32)>,
    }
    impl State<'_> {
        fn missing(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
            self.deg
                .iter()
                .zip(self.need)
                .enumerate()
                .map(|(x, (&d, &c))| (x, c.saturating_sub(d)))
        }

        fn bound(&self, i: usize, acc: f64) -> f64 {
            let mut b = acc;
            for (x, miss) in self.missing() {
                if miss > 0 {
                    b += miss as f64 * self.half.min(self.suffix[i][x]);
                }
            }
            b
        }

        fn run(&mut self, i: usize, acc: f64) {
            if self.bound(i, acc) >= self.best_cost {
                return;
            }
            if i == self.relevant.len() {
                let deficiency: u32 = self.missing().map(|(_, m)| m).sum();
                let cost = if deficiency == 0 { acc } else { acc + self.half * deficiency as f64 };
                if cost < self.best_cost {
                    self.best_cost = cost;
                    self.best = Some((self.chosen.clone(), deficiency));
                }
                return;
            }
            let idx = self.relevant[i];
            let e = self.g.edges()[idx];
            let fits = self
                .limit
                .is_none_or(|lim| self.deg[e.u] < lim[e.u] && self.deg[e.v] < lim[e.v]);
            if fits {
                self.deg[e.u] += 1;
                self.deg[e.v] += 1;
                self.chosen.push(idx);
                self.run(i + 1, acc + e.length);
                self.chosen.pop();
                self.deg[e.u] -= 1;
                self.deg[e.v] -= 1;
            }
            self.run(i + 1, acc);
        }
    }
    let mut st = State {
        g,
        relevant,
        suffix,
        need,
        limit,
        half,
        deg: vec![0; n],
        chosen: Vec::new(),
        best_cost: f64::INFINITY,
        best: None,
    };
    st.run(0, 0.0);
    st.best
        .ok_or_else(|| Error::Infeasible("no feasible edge set without penalties".into()))
}

/// Diluted capacitated problem: edge sets with degree at most the capacity,
/// each unit of unused capacity costs `theta/2`.
pub fn diluted_flow(g: &WeightedGraph, theta: f64) -> Result<DilutedSolution> {
    check_theta(theta)?;
    flow_with_capacities(g, g.capacities(), theta)
}

/// As [`diluted_flow`] with capacities overridden (zeros allowed).
pub(crate) fn flow_with_capacities(g: &WeightedGraph, caps: &[u32], theta: f64) -> Result<DilutedSolution> {
    let (chosen, deficiency) = enumerate(g, theta, caps, Some(caps))?;
    Ok(DilutedSolution::new(g, chosen, deficiency, theta))
}

/// Diluted edge cover: edge lengths plus `theta/2` per uncovered vertex.
/// `theta = inf` gives the classical minimum edge cover.
pub fn diluted_edge_cover(g: &WeightedGraph, theta: f64) -> Result<DilutedSolution> {
    diluted_edge_cover_precovered(g, theta, None)
}

/// Edge cover where `precovered` (if any) needs no covering edge.
pub fn diluted_edge_cover_precovered(
    g: &WeightedGraph,
    theta: f64,
    precovered: Option<usize>,
) -> Result<DilutedSolution> {
    check_theta(theta)?;
    let mut need = vec![1; g.n()];
    if let Some(v) = precovered {
        if v >= g.n() {
            return Err(invalid("vertex", format!("{v} out of range")));
        }
        need[v] = 0;
    }
    let (chosen, deficiency) = enumerate(g, theta, &need, None)?;
    Ok(DilutedSolution::new(g, chosen, deficiency, theta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite::graph::{random_graph, Edge};
    use rand::SeedableRng;

    fn e(u: usize, v: usize, length: f64) -> Edge {
        Edge { u, v, length }
    }

    #[test]
    fn small_cases() {
        let single = WeightedGraph::new(1, vec![]).unwrap();
        assert_eq!(diluted_matching(&single, 3.0).unwrap().cost, 1.5);
        for &l in &[0.5, 2.9, 3.5] {
            let g = WeightedGraph::new(2, vec![e(0, 1, l)]).unwrap();
            assert_eq!(diluted_matching(&g, 3.0).unwrap().cost, l.min(3.0));
            assert_eq!(diluted_flow(&g, 3.0).unwrap().cost, l.min(3.0));
            assert_eq!(diluted_edge_cover(&g, 3.0).unwrap().cost, l.min(3.0));
        }
        assert_eq!(diluted_edge_cover(&single, 3.0).unwrap().cost, 1.5);
    }

    #[test]
    fn undiluted_mode() {
        let tri = WeightedGraph::new(3, vec![e(0, 1, 1.0), e(1, 2, 1.0), e(0, 2, 1.0)]).unwrap();
        assert!(matches!(diluted_matching(&tri, f64::INFINITY), Err(Error::Infeasible(_))));
        let ec = diluted_edge_cover(&tri, f64::INFINITY).unwrap();
        assert_eq!(ec.cost, 2.0);
        let path = WeightedGraph::new(2, vec![e(0, 1, 7.0)]).unwrap();
        assert_eq!(diluted_matching(&path, f64::INFINITY).unwrap().cost, 7.0);
    }

    #[test]
    fn triangle_with_capacity_two() {
        let l = 0.3;
        let tri = WeightedGraph::with_capacities(3, vec![e(0, 1, l), e(1, 2, l), e(0, 2, l)], vec![2; 3]).unwrap();
        let s = diluted_flow(&tri, 2.0).unwrap();
        assert_eq!(s.chosen_edges, vec![0, 1, 2]);
        assert!((s.cost - 3.0 * l).abs() < 1e-15);
    }

    #[test]
    fn path_edge_cover() {
        let (a, b) = (0.8, 1.3);
        for &theta in &[1.0, 2.0, 5.0, f64::INFINITY] {
            let g = WeightedGraph::new(3, vec![e(0, 1, a), e(1, 2, b)]).unwrap();
            let got = diluted_edge_cover(&g, theta).unwrap().cost;
            // all four subsets of {a, b}
            let h = theta / 2.0;
            let mut best = 3.0 * h;
            if a <= theta {
                best = best.min(a + h);
            }
            if b <= theta {
                best = best.min(b + h);
            }
            if a <= theta && b <= theta {
                best = best.min(a + b);
            }
            assert!((got - best).abs() < 1e-15, "theta={theta}");
        }
    }

    #[test]
    fn solution_is_consistent() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let g = random_graph(7, 0.6, 3.0, &mut rng);
            let theta = 2.0;
            for s in [diluted_matching(&g, theta).unwrap(), diluted_flow(&g, theta).unwrap()] {
                let mut deg = [0; 7];
                for &i in &s.chosen_edges {
                    deg[g.edges()[i].u] += 1;
                    deg[g.edges()[i].v] += 1;
                }
                assert!(deg.iter().all(|&d| d <= 1));
                let unmatched = deg.iter().filter(|&&d| d == 0).count() as u32;
                assert_eq!(unmatched, s.deficiency);
                assert!((s.cost - s.edge_length - theta / 2.0 * unmatched as f64).abs() < 1e-12);
            }
            assert_eq!(diluted_matching(&g, 2.0).unwrap().cost, diluted_flow(&g, 2.0).unwrap().cost);
        }
    }

    #[test]
    fn size_limits() {
        let big = WeightedGraph::new(25, vec![]).unwrap();
        assert!(matches!(diluted_matching(&big, 1.0), Err(Error::TooLarge(_))));
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let dense = random_graph(9, 1.0, 1.0, &mut rng);
        assert!(matches!(diluted_flow(&dense, 2.0), Err(Error::TooLarge(_))));
    }
}
