//! Population dynamics for partial valuations at depths where explicit
//! clusters are out of reach.
//!
//! Generation `g` holds `size` members, each standing for a root whose
//! children are drawn (Poisson count, i.i.d. lengths) from generation
//! `g - 1`. A member stores `A_j = f_A^j(root)` and `B_j = f_B^j(root)` for
//! every `j <= g`, computed from one fixed set of children, so it is the
//! root of a genuine depth-`g` tree and the gaps `B_j - A_j` are exactly
//! non-increasing in `j`. Members share subtrees, so the samples are
//! correlated and the reported interval is optimistic.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::Serialize;

use super::cluster::sample_rng;
use super::stats::{summarize_gaps, GapMethod, GapProfile};
use super::valuation::{boundary_value, combine, Favor};
use crate::error::{invalid, Result};
use crate::grid::ModelParams;
use crate::operators::Problem;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PopulationConfig {
    pub size: usize,
    pub seed: u64,
}

pub fn population_gap_profile(
    p: &ModelParams,
    ks: &[usize],
    game: Problem,
    cfg: &PopulationConfig,
) -> Result<GapProfile> {
    if cfg.size == 0 {
        return Err(invalid("samples", "population must not be empty"));
    }
    if !p.is_finite() {
        return Err(invalid("theta", "population dynamics needs a finite theta"));
    }
    let kmax = ks.iter().copied().max().unwrap_or(0);
    let half = p.half_theta();
    let a0 = boundary_value(game, p, 0, Favor::Alice);
    let b0 = boundary_value(game, p, 0, Favor::Bob);
    let poisson = Poisson::new(p.theta.powf(p.d)).ok();
    let inv_d = 1.0 / p.d;
    // member-major layout: [A_0..A_g, B_0..B_g]
    let mut width = 1;
    let mut pop: Vec<f64> = (0..cfg.size).flat_map(|_| [a0, b0]).collect();
    for g in 1..=kmax {
        let prev = &pop;
        let prev_width = width;
        width = g + 1;
        let next: Vec<Vec<f64>> = (0..cfg.size)
            .into_par_iter()
            .map(|i| {
                let mut rng = sample_rng(cfg.seed, (g * cfg.size + i) as u64);
                let count = poisson.as_ref().map_or(0, |d| d.sample(&mut rng) as usize);
                let children: Vec<(f64, usize)> = (0..count)
                    .map(|_| {
                        let u: f64 = rng.random();
                        (p.theta * u.powf(inv_d), rng.random_range(0..cfg.size))
                    })
                    .collect();
                let mut member = vec![0.0; 2 * width];
                member[0] = a0;
                member[width] = b0;
                for j in 1..width {
                    let at = |c: usize, off: usize| prev[c * 2 * prev_width + off + j - 1];
                    member[j] = combine(game, half, children.iter().map(|&(l, c)| (l, at(c, prev_width))));
                    member[width + j] = combine(game, half, children.iter().map(|&(l, c)| (l, at(c, 0))));
                }
                member
            })
            .collect();
        pop = next.into_iter().flatten().collect();
    }
    let rows = ks
        .iter()
        .map(|&k| {
            let gaps: Vec<f64> = (0..cfg.size)
                .map(|i| pop[i * 2 * width + width + k] - pop[i * 2 * width + k])
                .collect();
            summarize_gaps(k, &gaps)
        })
        .collect();
    Ok(GapProfile {
        method: GapMethod::Population,
        rows,
    })
}
