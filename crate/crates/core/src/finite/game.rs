use std::collections::HashMap;

use serde::Serialize;

use super::graph::WeightedGraph;
use super::solvers::{diluted_edge_cover_precovered, flow_with_capacities, matching_table};
use crate::error::{invalid, Error, Result};
use crate::operators::Problem;
use crate::pwit::combine;

/// Largest graph accepted by the exact game search.
pub const MAX_GAME_VERTICES: usize = 20;

fn check_game(g: &WeightedGraph, start: usize, theta: f64) -> Result<()> {
    if !(theta > 0.0) || !theta.is_finite() {
        return Err(invalid("theta", format!("must be positive and finite, got {theta}")));
    }
    if start >= g.n() {
        return Err(invalid("start", format!("vertex {start} out of range")));
    }
    Ok(())
}

struct Search<'a> {
    adj: Vec<Vec<(usize, f64)>>,
    half: f64,
    memo: HashMap<(usize, u32), f64>,
    _g: &'a WeightedGraph,
}

impl Search<'_> {
    /// Value to the player who just moved to `v`; `avail` are the
    /// unvisited vertices.
    fn value(&mut self, v: usize, avail: u32) -> f64 {
        if let Some(&x) = self.memo.get(&(v, avail)) {
            return x;
        }
        let mut best = self.half;
        for k in 0..self.adj[v].len() {
            let (w, l) = self.adj[v][k];
            if avail & (1 << w) != 0 {
                let x = l - self.value(w, avail & !(1 << w));
                if x < best {
                    best = x;
                }
            }
        }
        self.memo.insert((v, avail), best);
        best
    }
}

fn search(g: &WeightedGraph, theta: f64) -> Result<Search<'_>> {
    if g.n() > MAX_GAME_VERTICES {
        return Err(Error::TooLarge(format!(
            "{} vertices, the game search handles at most {MAX_GAME_VERTICES}",
            g.n()
        )));
    }
    if !g.unit_capacities() {
        return Err(Error::Capacity(
            "the exact game search on general graphs needs unit capacities; use tree_game_value".into(),
        ));
    }
    let adj = g
        .adjacency()
        .into_iter()
        .map(|a| a.into_iter().map(|(i, w)| (w, g.edges()[i].length)).collect())
        .collect();
    Ok(Search {
        adj,
        half: 0.5 * theta,
        memo: HashMap::new(),
        _g: g,
    })
}

/// Bob's payoff under optimal play of the exploration game started at
/// `start`: the opponent either quits, paying `theta/2`, or extends the
/// self-avoiding walk along an edge of length `l`, paying `l`.
pub fn game_value(g: &WeightedGraph, start: usize, theta: f64) -> Result<f64> {
    check_game(g, start, theta)?;
    let mut s = search(g, theta)?;
    let all = ((1u64 << g.n()) - 1) as u32;
    Ok(s.value(start, all & !(1 << start)))
}

/// The walk produced by optimal play. Ties go to quitting, then to the
/// smallest vertex index.
pub fn optimal_play_path(g: &WeightedGraph, start: usize, theta: f64) -> Result<Vec<usize>> {
    check_game(g, start, theta)?;
    let mut s = search(g, theta)?;
    let all = ((1u64 << g.n()) - 1) as u32;
    let mut avail = all & !(1 << start);
    let mut path = vec![start];
    let mut v = start;
    loop {
        let mut best = s.half;
        let mut choice = None;
        for k in 0..s.adj[v].len() {
            let (w, l) = s.adj[v][k];
            if avail & (1 << w) != 0 {
                let x = l - s.value(w, avail & !(1 << w));
                if x < best {
                    best = x;
                    choice = Some(w);
                }
            }
        }
        match choice {
            Some(w) => {
                path.push(w);
                avail &= !(1 << w);
                v = w;
            }
            None => return Ok(path),
        }
    }
}

/// Game value on a tree rooted at `start` by the direct recursion:
/// matching `min(θ/2, min(l - f))`, TSP `min(θ/2, min₂(l - f))`, edge cover
/// `max(0, min(θ/2, min(l - f)))`.
pub fn tree_game_value(tree: &WeightedGraph, start: usize, theta: f64, game: Problem) -> Result<f64> {
    check_game(tree, start, theta)?;
    if !tree.is_tree() {
        return Err(Error::NotATree);
    }
    let adj = tree.adjacency();
    let half = 0.5 * theta;
    // iterative post-order
    let n = tree.n();
    let mut parent = vec![usize::MAX; n];
    let mut parent_len = vec![0.0; n];
    let mut order = Vec::with_capacity(n);
    let mut stack = vec![start];
    parent[start] = start;
    while let Some(v) = stack.pop() {
        order.push(v);
        for &(i, w) in &adj[v] {
            if parent[w] == usize::MAX {
                parent[w] = v;
                parent_len[w] = tree.edges()[i].length;
                stack.push(w);
            }
        }
    }
    let mut value = vec![0.0; n];
    for &v in order.iter().rev() {
        let children = adj[v]
            .iter()
            .filter(|&&(_, w)| w != start && parent[w] == v)
            .map(|&(_, w)| (parent_len[w], value[w]));
        value[v] = combine(game, half, children);
    }
    Ok(value[start])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PayoffReport {
    pub game: Problem,
    pub game_value: f64,
    pub optimization_difference: f64,
    pub equal: bool,
}

/// Absolute tolerance of the payoff identity.
pub const PAYOFF_TOL: f64 = 1e-12;

/// Checks Bob's payoff against the optimization difference:
/// matching `M(G) - M(G - v)` on any unit-capacity graph; TSP (capacity 2)
/// `F(G) - F(G')` with the capacity of `v` lowered by one, on trees; edge
/// cover `EC(G) - EC(G with v already covered)`, on trees.
pub fn verify_payoff_identity(g: &WeightedGraph, start: usize, theta: f64, game: Problem) -> Result<PayoffReport> {
    check_game(g, start, theta)?;
    let (value, diff) = match game {
        Problem::Matching => {
            let table = matching_table(g, theta)?;
            (game_value(g, start, theta)?, table.full() - table.without(start))
        }
        Problem::Tsp => {
            let value = tree_game_value(g, start, theta, game)?;
            if g.capacities().iter().any(|&c| c != 2) {
                return Err(Error::Capacity("the min₂ recursion needs capacity 2 everywhere".into()));
            }
            let mut caps = g.capacities().to_vec();
            let full = flow_with_capacities(g, &caps, theta)?.cost;
            caps[start] -= 1;
            let reduced = flow_with_capacities(g, &caps, theta)?.cost;
            (value, full - reduced)
        }
        Problem::EdgeCover => {
            let value = tree_game_value(g, start, theta, game)?;
            let full = diluted_edge_cover_precovered(g, theta, None)?.cost;
            let covered = diluted_edge_cover_precovered(g, theta, Some(start))?.cost;
            (value, full - covered)
        }
    };
    Ok(PayoffReport {
        game,
        game_value: value,
        optimization_difference: diff,
        equal: (value - diff).abs() <= PAYOFF_TOL,
    })
}
