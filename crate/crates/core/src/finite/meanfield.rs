use std::collections::{HashMap, VecDeque};

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::Serialize;

use super::graph::{Edge, WeightedGraph};
use super::solvers::matching_table;
use crate::error::{invalid, Result};
use crate::grid::ModelParams;
use crate::pwit::{sample_rng, ThetaCluster};

/// Complete graph with lengths `(n X)^(1/d)`, `X` standard exponential.
pub fn sample_meanfield(n: usize, d: f64, seed: u64) -> Result<WeightedGraph> {
    if n < 2 {
        return Err(invalid("n", "needs at least two vertices"));
    }
    if !(d >= 1.0) {
        return Err(invalid("d", format!("must be >= 1, got {d}")));
    }
    Ok(meanfield_with_rng(n, d, &mut sample_rng(seed, 0)))
}

fn meanfield_with_rng<R: Rng>(n: usize, d: f64, rng: &mut R) -> WeightedGraph {
    let mut edges = Vec::with_capacity(n * (n - 1) / 2);
    for u in 0..n {
        for v in u + 1..n {
            let x: f64 = Exp1.sample(rng);
            let length = (n as f64 * x).powf(1.0 / d);
            // an exponential draw of exactly 0 has probability ~2^-53
            edges.push(Edge { u, v, length: length.max(f64::MIN_POSITIVE) });
        }
    }
    WeightedGraph::new(n, edges).expect("complete graph is valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiniteStats {
    pub n: usize,
    pub d: f64,
    pub theta: f64,
    pub trials: usize,
    /// Mean of `M_n(θ)/n`, the total edge length of the optimal diluted
    /// matching per vertex (penalties excluded).
    pub mean_diluted_per_vertex: f64,
    pub ci_diluted: f64,
    /// Mean fraction of unmatched vertices.
    pub mean_q: f64,
    pub ci_q: f64,
    /// Mean of `M_n/n` for the minimum perfect matching (even `n` only).
    pub mean_perfect_per_vertex: Option<f64>,
    pub ci_perfect: Option<f64>,
    /// Standard deviation of the per-trial `M_n/n`.
    pub sd_perfect: Option<f64>,
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

/// Trial `t` uses the graph drawn from stream `(seed, t)`, so runs with the
/// same seed and different `theta` are paired on identical instances.
pub fn empirical_statistics(n: usize, d: f64, theta: f64, trials: usize, seed: u64) -> Result<FiniteStats> {
    if trials == 0 {
        return Err(invalid("trials", "must be at least 1"));
    }
    sample_meanfield(n.max(2), d, seed)?;
    let rows: Vec<(f64, f64, Option<f64>)> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let g = meanfield_with_rng(n, d, &mut sample_rng(seed, t));
            let diluted = super::solvers::diluted_matching(&g, theta)?;
            let perfect = if n.is_multiple_of(2) {
                Some(matching_table(&g, f64::INFINITY)?.full() / n as f64)
            } else {
                None
            };
            Ok((
                diluted.edge_length / n as f64,
                diluted.deficiency as f64 / n as f64,
                perfect,
            ))
        })
        .collect::<Result<_>>()?;
    let ci = |sd: f64| 1.96 * sd / (trials as f64).sqrt();
    let (m, m_sd) = mean_sd(&rows.iter().map(|r| r.0).collect::<Vec<_>>());
    let (q, q_sd) = mean_sd(&rows.iter().map(|r| r.1).collect::<Vec<_>>());
    let perfect: Option<Vec<f64>> = rows.iter().map(|r| r.2).collect();
    let perfect = perfect.map(|p| mean_sd(&p));
    Ok(FiniteStats {
        n,
        d,
        theta,
        trials,
        mean_diluted_per_vertex: m,
        ci_diluted: ci(m_sd),
        mean_q: q,
        ci_q: ci(q_sd),
        mean_perfect_per_vertex: perfect.map(|p| p.0),
        ci_perfect: perfect.map(|p| ci(p.1)),
        sd_perfect: perfect.map(|p| p.1),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouplingStat {
    pub n: usize,
    pub k: usize,
    pub trials: usize,
    /// Mean number of vertices within `k` steps of a vertex of `K_n` along
    /// edges of length at most `theta`.
    pub mean_kn: f64,
    pub mean_pwit: f64,
    /// `1 + m + ... + m^k` with `m = theta^d`.
    pub expected_pwit: f64,
    pub z_score: f64,
}

/// Compares `(k, θ)`-neighbourhood sizes in the mean-field `K_n` with
/// θ-cluster sizes of the PWIT.
pub fn neighborhood_coupling_stat(
    n: usize,
    d: f64,
    theta: f64,
    k: usize,
    trials: usize,
    seed: u64,
) -> Result<CouplingStat> {
    let p = ModelParams::new(d, theta)?;
    if n < 2 || trials == 0 {
        return Err(invalid("n", "needs n >= 2 and at least one trial"));
    }
    let expected = crate::pwit::expected_cluster_size(&p, k);
    if expected > crate::pwit::MAX_EXPECTED_NODES {
        return Err(crate::error::Error::ClusterTooLarge {
            expected,
            cap: crate::pwit::MAX_EXPECTED_NODES,
        });
    }
    // P(l <= θ) for l = (nX)^(1/d)
    let present = -(-theta.powf(d) / n as f64).exp_m1();
    let kn: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = sample_rng(seed, 2 * t);
            let mut edges: HashMap<(usize, usize), bool> = HashMap::new();
            let mut depth = vec![usize::MAX; n];
            depth[0] = 0;
            let mut queue = VecDeque::from([0usize]);
            let mut count = 1usize;
            while let Some(u) = queue.pop_front() {
                if depth[u] == k {
                    continue;
                }
                for w in 0..n {
                    if w == u {
                        continue;
                    }
                    let key = (u.min(w), u.max(w));
                    let on = *edges.entry(key).or_insert_with(|| rng.random::<f64>() < present);
                    if on && depth[w] == usize::MAX {
                        depth[w] = depth[u] + 1;
                        count += 1;
                        queue.push_back(w);
                    }
                }
            }
            count as f64
        })
        .collect();
    let pw: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let c: ThetaCluster = crate::pwit::sample_cluster_with_rng(&p, k, seed, &mut sample_rng(seed, 2 * t + 1));
            c.len() as f64
        })
        .collect();
    let (mk, sk) = mean_sd(&kn);
    let (mp, sp) = mean_sd(&pw);
    let se = ((sk * sk + sp * sp) / trials as f64).sqrt();
    let z = if se > 0.0 { (mk - mp) / se } else if mk == mp { 0.0 } else { f64::INFINITY };
    Ok(CouplingStat {
        n,
        k,
        trials,
        mean_kn: mk,
        mean_pwit: mp,
        expected_pwit: expected,
        z_score: z,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn meanfield_lengths_d1() {
        let n = 40;
        let g = sample_meanfield(n, 1.0, 3).unwrap();
        assert_eq!(g.edges().len(), n * (n - 1) / 2);
        let m = g.edges().len() as f64;
        let below = g.edges().iter().filter(|e| e.length < 1.0).count() as f64;
        let p = 1.0 - (-1.0 / n as f64).exp();
        assert!((below / m - p).abs() < 3.0 * (p * (1.0 - p) / m).sqrt() + 1.0 / m);
        assert_eq!(sample_meanfield(n, 1.0, 3).unwrap(), g);
    }

    #[test]
    fn meanfield_small_lengths_d2() {
        // P(l < r) = 1 - exp(-r²/n) ~ r²/n
        let n = 200;
        let g = sample_meanfield(n, 2.0, 8).unwrap();
        let r: f64 = 3.0;
        let m = g.edges().len() as f64;
        let frac = g.edges().iter().filter(|e| e.length < r).count() as f64 / m;
        let p = r * r / n as f64;
        assert!((frac - p).abs() < 4.0 * (p / m).sqrt() + p * p, "{frac} vs {p}");
    }

    #[test]
    fn tiny_theta_leaves_everything_unmatched() {
        let s = empirical_statistics(8, 1.0, 1e-4, 50, 1).unwrap();
        assert!(s.mean_q > 0.99);
        assert!(s.mean_diluted_per_vertex < 1e-4);
    }

    #[test]
    fn q_decreases_in_theta_on_paired_seeds() {
        let qs: Vec<f64> = [0.5, 1.0, 2.0, 4.0]
            .iter()
            .map(|&t| empirical_statistics(10, 1.0, t, 100, 5).unwrap().mean_q)
            .collect();
        assert!(qs.windows(2).all(|w| w[1] <= w[0]), "{qs:?}");
    }

    #[test]
    fn coupling_k0_is_trivial() {
        let c = neighborhood_coupling_stat(64, 1.0, 1.5, 0, 20, 1).unwrap();
        assert_eq!(c.mean_kn, 1.0);
        assert_eq!(c.mean_pwit, 1.0);
        assert_eq!(c.z_score, 0.0);
    }
}
