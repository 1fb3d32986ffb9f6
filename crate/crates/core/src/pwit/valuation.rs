use serde::Serialize;

use super::cluster::ThetaCluster;
use crate::error::{invalid, Result};
use crate::grid::ModelParams;
use crate::operators::Problem;

/// Which player the boundary values at distance `k` favour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Favor {
    Bob,
    Alice,
}

/// Value given to the vertices at distance `k` from the root: the top of the
/// range (`theta/2`) when that favours the chosen player, the bottom
/// (`-theta/2`, or 0 for edge cover) otherwise.
pub fn boundary_value(game: Problem, p: &ModelParams, k: usize, favor: Favor) -> f64 {
    let high = (favor == Favor::Bob) == k.is_multiple_of(2);
    if high {
        p.half_theta()
    } else if game == Problem::EdgeCover {
        0.0
    } else {
        -p.half_theta()
    }
}

/// One step of the valuation recursion from the children's
/// `(edge length, value)` pairs.
pub fn combine<I: IntoIterator<Item = (f64, f64)>>(game: Problem, half_theta: f64, children: I) -> f64 {
    let mut best = f64::INFINITY;
    let mut second = f64::INFINITY;
    for (l, f) in children {
        let x = l - f;
        if x < best {
            second = best;
            best = x;
        } else if x < second {
            second = x;
        }
    }
    match game {
        Problem::Matching => half_theta.min(best),
        Problem::Tsp => half_theta.min(second),
        Problem::EdgeCover => half_theta.min(best).max(0.0),
    }
}

/// Values of the depth-`k` partial valuation on the nodes of depth `<= k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Valuation {
    pub game: Problem,
    pub favor: Favor,
    pub k: usize,
    pub values: Vec<f64>,
}

impl Valuation {
    pub fn root(&self) -> f64 {
        self.values[0]
    }
}

pub fn partial_valuation(c: &ThetaCluster, k: usize, favor: Favor, game: Problem) -> Result<Valuation> {
    if k > c.depth_limit {
        return Err(invalid(
            "k",
            format!("depth {k} exceeds the cluster's depth limit {}", c.depth_limit),
        ));
    }
    let p = c.params;
    let half = p.half_theta();
    let inner = if k == 0 { 0 } else { c.size_to_depth(k - 1) };
    let total = c.size_to_depth(k);
    let mut values = vec![boundary_value(game, &p, k, favor); total];
    for v in (0..inner).rev() {
        let children = c.children(v);
        values[v] = combine(game, half, children.map(|u| (c.length(u), values[u])));
    }
    Ok(Valuation {
        game,
        favor,
        k,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pwit::sample_cluster;

    #[test]
    fn k_zero_bob_is_half_theta() {
        let p = ModelParams::new(1.0, 2.0).unwrap();
        let c = sample_cluster(&p, 3, 5).unwrap();
        for game in [Problem::Matching, Problem::Tsp, Problem::EdgeCover] {
            assert_eq!(partial_valuation(&c, 0, Favor::Bob, game).unwrap().root(), 1.0);
        }
        assert_eq!(partial_valuation(&c, 0, Favor::Alice, Problem::Matching).unwrap().root(), -1.0);
        assert_eq!(partial_valuation(&c, 0, Favor::Alice, Problem::EdgeCover).unwrap().root(), 0.0);
        assert!(partial_valuation(&c, 4, Favor::Bob, Problem::Matching).is_err());
    }

    #[test]
    fn combine_by_hand() {
        let half = 1.5;
        // single child at boundary -θ/2 with length 0.4
        assert_eq!(combine(Problem::Matching, half, [(0.4, -half)]), half);
        assert_eq!(combine(Problem::Matching, half, [(0.4, half)]), 0.4 - half);
        assert_eq!(combine(Problem::Tsp, half, [(0.4, half)]), half);
        assert_eq!(combine(Problem::Tsp, half, [(0.4, half), (0.9, half)]), 0.9 - half);
        assert_eq!(combine(Problem::EdgeCover, half, [(0.4, half)]), 0.0);
        assert_eq!(combine(Problem::EdgeCover, half, [(2.0, 0.2)]), 1.5);
        assert_eq!(combine(Problem::EdgeCover, half, std::iter::empty()), half);
        assert_eq!(combine(Problem::Matching, half, std::iter::empty()), half);
    }

    #[test]
    fn values_in_range_and_sandwich() {
        for game in [Problem::Matching, Problem::Tsp, Problem::EdgeCover] {
            let p = ModelParams::new(1.0, 2.2).unwrap();
            for seed in 0..200 {
                let c = sample_cluster(&p, 8, seed).unwrap();
                let lo = if game == Problem::EdgeCover { 0.0 } else { -1.1 };
                let mut a_prev = f64::NEG_INFINITY;
                let mut b_prev = f64::INFINITY;
                for k in (0..=8).step_by(2) {
                    let a = partial_valuation(&c, k, Favor::Alice, game).unwrap();
                    let b = partial_valuation(&c, k, Favor::Bob, game).unwrap();
                    for v in a.values.iter().chain(&b.values) {
                        assert!(*v >= lo && *v <= 1.1);
                    }
                    assert!(a.root() >= a_prev && b.root() <= b_prev && a.root() <= b.root());
                    a_prev = a.root();
                    b_prev = b.root();
                }
            }
        }
    }
}
