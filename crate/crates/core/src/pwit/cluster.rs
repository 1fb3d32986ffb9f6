use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::ModelParams;

/// Clusters whose expected size exceeds this are refused.
pub const MAX_EXPECTED_NODES: f64 = 1e8;

/// A depth-truncated θ-cluster stored in breadth-first order: the children
/// of a node are contiguous and come after it, and the nodes of depth `<= k`
/// form a prefix of the arena.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThetaCluster {
    pub params: ModelParams,
    pub depth_limit: usize,
    pub seed: u64,
    /// Length of the edge to the parent (0 for the root).
    lengths: Vec<f64>,
    first_child: Vec<u32>,
    child_count: Vec<u32>,
    /// `level_end[j]` is one past the last node of depth `j`.
    level_end: Vec<usize>,
}

impl ThetaCluster {
    pub fn len(&self) -> usize {
        self.lengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lengths.is_empty()
    }

    /// Number of nodes of depth at most `k`.
    pub fn size_to_depth(&self, k: usize) -> usize {
        self.level_end[k.min(self.level_end.len() - 1)]
    }

    pub fn children(&self, v: usize) -> std::ops::Range<usize> {
        let start = self.first_child[v] as usize;
        start..start + self.child_count[v] as usize
    }

    pub fn length(&self, v: usize) -> f64 {
        self.lengths[v]
    }

    /// Child edge lengths of `v`.
    pub fn child_lengths(&self, v: usize) -> &[f64] {
        &self.lengths[self.children(v)]
    }

    pub fn depth_of_level_end(&self) -> &[usize] {
        &self.level_end
    }
}

/// `1 + m + ... + m^k` with `m = theta^d`.
pub fn expected_cluster_size(p: &ModelParams, depth: usize) -> f64 {
    let m = p.theta.powf(p.d);
    let mut total = 0.0;
    let mut term = 1.0;
    for _ in 0..=depth {
        total += term;
        term *= m;
    }
    total
}

pub(crate) fn check_size(p: &ModelParams, depth: usize) -> Result<()> {
    if !p.is_finite() {
        return Err(crate::error::invalid("theta", "the θ-cluster needs a finite theta"));
    }
    let expected = expected_cluster_size(p, depth);
    if expected > MAX_EXPECTED_NODES {
        return Err(Error::ClusterTooLarge {
            expected,
            cap: MAX_EXPECTED_NODES,
        });
    }
    Ok(())
}

/// Independent stream for sample `index` of a run seeded with `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Samples the θ-cluster of the root down to `depth_limit`.
pub fn sample_cluster(p: &ModelParams, depth_limit: usize, seed: u64) -> Result<ThetaCluster> {
    check_size(p, depth_limit)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(grow(p, depth_limit, seed, &mut rng))
}

/// Grows a cluster from an explicit random source (no size check).
pub fn sample_cluster_with_rng<R: Rng>(p: &ModelParams, depth_limit: usize, seed: u64, rng: &mut R) -> ThetaCluster {
    grow(p, depth_limit, seed, rng)
}

pub(crate) fn grow<R: Rng>(p: &ModelParams, depth_limit: usize, seed: u64, rng: &mut R) -> ThetaCluster {
    let mean = p.theta.powf(p.d);
    let poisson = Poisson::new(mean).ok();
    let inv_d = 1.0 / p.d;
    let mut lengths = vec![0.0];
    let mut first_child = vec![0u32];
    let mut child_count = vec![0u32];
    let mut level_end = vec![1usize];
    let mut level_start = 0;
    for _ in 0..depth_limit {
        let end = lengths.len();
        for v in level_start..end {
            let count = poisson.as_ref().map_or(0, |d| d.sample(rng) as u32);
            first_child[v] = lengths.len() as u32;
            child_count[v] = count;
            for _ in 0..count {
                let u: f64 = rng.random();
                lengths.push(p.theta * u.powf(inv_d));
                first_child.push(0);
                child_count.push(0);
            }
        }
        level_start = end;
        level_end.push(lengths.len());
        if level_start == lengths.len() {
            // extinct: keep the level table complete
            while level_end.len() <= depth_limit {
                level_end.push(lengths.len());
            }
            break;
        }
    }
    for v in level_start..lengths.len() {
        first_child[v] = lengths.len() as u32;
    }
    ThetaCluster {
        params: *p,
        depth_limit,
        seed,
        lengths,
        first_child,
        child_count,
        level_end,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_zero_is_a_single_root() {
        let p = ModelParams::new(2.0, 1.5).unwrap();
        let c = sample_cluster(&p, 0, 1).unwrap();
        assert_eq!(c.len(), 1);
        assert!(c.children(0).is_empty());
    }

    #[test]
    fn offspring_mean_and_lengths() {
        for &(d, theta) in &[(1.0, 1.0), (2.0, 1.5)] {
            let p = ModelParams::new(d, theta).unwrap();
            let n = 100_000;
            let mut total = 0.0;
            let mut below_half = 0usize;
            let mut lengths = 0usize;
            for i in 0..n {
                let c = grow(&p, 1, 3, &mut sample_rng(3, i));
                total += c.children(0).len() as f64;
                for &l in c.child_lengths(0) {
                    assert!(l > 0.0 && l <= theta);
                    lengths += 1;
                    if l <= theta / 2.0 {
                        below_half += 1;
                    }
                }
            }
            let m = theta.powf(d);
            let sigma = (m / n as f64).sqrt();
            assert!((total / n as f64 - m).abs() < 3.0 * sigma, "d={d}");
            // P(l <= θ/2) = 2^{-d}
            let frac = below_half as f64 / lengths as f64;
            let pr = 0.5f64.powf(d);
            let s = (pr * (1.0 - pr) / lengths as f64).sqrt();
            assert!((frac - pr).abs() < 4.0 * s);
        }
    }

    #[test]
    fn breadth_first_layout() {
        let p = ModelParams::new(1.0, 1.8).unwrap();
        let c = sample_cluster(&p, 5, 11).unwrap();
        for v in 0..c.len() {
            for u in c.children(v) {
                assert!(u > v);
            }
        }
        let ends = c.depth_of_level_end();
        assert_eq!(ends.len(), 6);
        assert!(ends.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(*ends.last().unwrap(), c.len());
    }

    #[test]
    fn deterministic_given_seed() {
        let p = ModelParams::new(1.5, 1.6).unwrap();
        assert_eq!(sample_cluster(&p, 6, 99).unwrap(), sample_cluster(&p, 6, 99).unwrap());
        assert_ne!(sample_cluster(&p, 6, 99).unwrap(), sample_cluster(&p, 6, 100).unwrap());
    }

    #[test]
    fn refuses_huge_clusters() {
        let p = ModelParams::new(1.0, 4.0).unwrap();
        assert!(matches!(sample_cluster(&p, 20, 0), Err(Error::ClusterTooLarge { .. })));
        assert!((expected_cluster_size(&ModelParams::new(1.0, 1.5).unwrap(), 2) - 4.75).abs() < 1e-12);
    }
}
