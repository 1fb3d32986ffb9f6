use rayon::prelude::*;
use serde::Serialize;

use super::cluster::{check_size, expected_cluster_size, grow, sample_rng};
use super::population::{population_gap_profile, PopulationConfig};
use super::valuation::{partial_valuation, Favor};
use crate::error::{invalid, Result};
use crate::grid::{ModelParams, SurvivalGrid};
use crate::operators::Problem;

/// Root values of the depth-`k` partial valuation, one per sample, in
/// sample order.
pub fn root_values(
    p: &ModelParams,
    k: usize,
    samples: usize,
    seed: u64,
    game: Problem,
    favor: Favor,
) -> Result<Vec<f64>> {
    check_size(p, k)?;
    (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let c = grow(p, k, seed, &mut sample_rng(seed, i));
            Ok(partial_valuation(&c, k, favor, game)?.root())
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapEstimate {
    pub k: usize,
    pub mean_gap: f64,
    /// Half-width of the normal 95% interval, `1.96 · sd / sqrt(n)`.
    pub ci_halfwidth: f64,
    pub samples: usize,
    pub min_gap: f64,
}

fn summarize(k: usize, gaps: &[f64]) -> GapEstimate {
    let n = gaps.len() as f64;
    let mean = gaps.iter().sum::<f64>() / n;
    let var = if gaps.len() > 1 {
        gaps.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    GapEstimate {
        k,
        mean_gap: mean,
        ci_halfwidth: 1.96 * (var / n).sqrt(),
        samples: gaps.len(),
        min_gap: gaps.iter().copied().fold(f64::INFINITY, f64::min),
    }
}

/// Mean of `f_B^k(root) - f_A^k(root)` over independent clusters.
pub fn replica_gap(p: &ModelParams, k: usize, samples: usize, seed: u64, game: Problem) -> Result<GapEstimate> {
    let profile = replica_gap_profile(p, &[k], samples, seed, game, GapMethod::Exact)?;
    Ok(profile.rows[0])
}

/// Expected cluster nodes summed over samples above which
/// [`GapMethod::Auto`] switches to population dynamics.
pub const AUTO_EXACT_BUDGET: f64 = 2e7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GapMethod {
    /// One explicit cluster per sample.
    Exact,
    /// Population dynamics with shared subtrees.
    Population,
    /// Exact when the cluster fits under the size cap and the expected total
    /// node count stays under `AUTO_EXACT_BUDGET`, population otherwise.
    Auto,
}

#[derive(Debug, Clone, Serialize)]
pub struct GapProfile {
    pub method: GapMethod,
    pub rows: Vec<GapEstimate>,
}

/// Replica gap for every depth in `ks`. With [`GapMethod::Exact`] each
/// sample is one cluster of depth `max(ks)` evaluated at every `k`, so the
/// per-sample gaps are non-increasing in `k`.
pub fn replica_gap_profile(
    p: &ModelParams,
    ks: &[usize],
    samples: usize,
    seed: u64,
    game: Problem,
    method: GapMethod,
) -> Result<GapProfile> {
    if samples == 0 {
        return Err(invalid("samples", "must be at least 1"));
    }
    if ks.is_empty() {
        return Err(invalid("k", "no depths requested"));
    }
    let kmax = *ks.iter().max().expect("non-empty");
    let method = match method {
        GapMethod::Auto
            if check_size(p, kmax).is_ok()
                && expected_cluster_size(p, kmax) * samples as f64 <= AUTO_EXACT_BUDGET =>
        {
            GapMethod::Exact
        }
        GapMethod::Auto => GapMethod::Population,
        m => m,
    };
    if method == GapMethod::Population {
        let cfg = PopulationConfig { size: samples, seed };
        return population_gap_profile(p, ks, game, &cfg);
    }
    check_size(p, kmax)?;
    let per_sample: Vec<Vec<f64>> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let c = grow(p, kmax, seed, &mut sample_rng(seed, i));
            ks.iter()
                .map(|&k| {
                    let b = partial_valuation(&c, k, Favor::Bob, game)?.root();
                    let a = partial_valuation(&c, k, Favor::Alice, game)?.root();
                    Ok(b - a)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let rows = ks
        .iter()
        .enumerate()
        .map(|(j, &k)| {
            let gaps: Vec<f64> = per_sample.iter().map(|g| g[j]).collect();
            summarize(k, &gaps)
        })
        .collect();
    Ok(GapProfile { method, rows })
}

pub(crate) fn summarize_gaps(k: usize, gaps: &[f64]) -> GapEstimate {
    summarize(k, gaps)
}

/// Domain of the valuation law of `game`.
fn value_domain(game: Problem, p: &ModelParams) -> (f64, f64) {
    match game {
        Problem::EdgeCover => (0.0, p.half_theta()),
        _ => (-p.half_theta(), p.half_theta()),
    }
}

/// Empirical survival function of `f_B^k(root)` at the nodes of a uniform
/// grid with `cells` cells; the last node carries the atom at `theta/2`.
/// Node 0 holds the right limit `P(f > lo)`, matching the operator grids.
pub fn empirical_survival(
    p: &ModelParams,
    k: usize,
    samples: usize,
    seed: u64,
    game: Problem,
    cells: usize,
) -> Result<SurvivalGrid> {
    if samples == 0 {
        return Err(invalid("samples", "must be at least 1"));
    }
    let mut vals = root_values(p, k, samples, seed, game, Favor::Bob)?;
    vals.sort_by(f64::total_cmp);
    let (lo, hi) = value_domain(game, p);
    let n = samples as f64;
    let count_ge = |x: f64| (samples - vals.partition_point(|&v| v < x)) as f64 / n;
    let count_gt = |x: f64| (samples - vals.partition_point(|&v| v <= x)) as f64 / n;
    let grid = SurvivalGrid::from_fn(lo, hi, cells, 1.0, 0.0, |x| if x == lo { count_gt(x) } else { count_ge(x) })?;
    Ok(grid)
}

/// Kolmogorov-Smirnov distance between the empirical survival of `samples`
/// and the law `law`, taken over the open-closed range `(lo, hi]` where the
/// grid represents the law (the atom at `lo`, if any, is implied).
pub fn ks_distance(samples: &[f64], law: &SurvivalGrid) -> f64 {
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let lo = law.lo();
    let hi = law.hi();
    let mut dist: f64 = 0.0;
    // just above lo
    let gt_lo = (v.len() - v.partition_point(|&x| x <= lo)) as f64 / n;
    dist = dist.max((gt_lo - law.values()[0]).abs());
    let mut i = 0;
    while i < v.len() {
        let s = v[i];
        let mut j = i;
        while j < v.len() && v[j] == s {
            j += 1;
        }
        if s > lo && s <= hi {
            let ge = (v.len() - i) as f64 / n;
            let gt = (v.len() - j) as f64 / n;
            let f = law.eval(s);
            let f_right = if s >= hi { law.above() } else { f };
            dist = dist.max((ge - f).abs()).max((gt - f_right).abs());
        }
        i = j;
    }
    // the top node, in case no sample sits exactly there
    let at_hi = (v.len() - v.partition_point(|&x| x < hi)) as f64 / n;
    dist.max((at_hi - law.values()[law.cells()]).abs())
}

/// Dvoretzky-Kiefer-Wolfowitz half-width at level `alpha`.
pub fn dkw_epsilon(samples: usize, alpha: f64) -> f64 {
    ((2.0 / alpha).ln() / (2.0 * samples as f64)).sqrt()
}
