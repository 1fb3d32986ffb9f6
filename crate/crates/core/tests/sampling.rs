use cavity_core::finite::CouplingStat;
use cavity_core::pwit::{dkw_epsilon, ks_distance, root_values};
use cavity_core::{
    neighborhood_coupling_stat, partial_valuation, partial_valuation_law, sample_cluster,
    sample_meanfield, Favor, ModelParams, Problem, SolverConfig,
};
use proptest::prelude::*;

/// Fraction of edge lengths below `r` pooled over `graphs` seeds, with the
/// binomial standard error.
fn fraction_below(n: usize, d: f64, r: f64, graphs: u64) -> (f64, usize) {
    let mut hits = 0;
    let mut total = 0;
    for seed in 0..graphs {
        let g = sample_meanfield(n, d, seed).unwrap();
        hits += g.edges().iter().filter(|e| e.length < r).count();
        total += g.edges().len();
    }
    (hits as f64 / total as f64, total)
}

#[test]
fn d1_lengths_are_scaled_exponentials() {
    let n = 40;
    let (frac, m) = fraction_below(n, 1.0, 1.0, 200);
    let p = 1.0 - (-1.0 / n as f64).exp();
    let sigma = (p * (1.0 - p) / m as f64).sqrt();
    assert!((frac - p).abs() <= 3.0 * sigma, "{frac} vs {p} (sigma {sigma})");
}

#[test]
fn d2_short_lengths_scale_like_r_squared() {
    let n = 40;
    let r: f64 = 1.5;
    let (frac, m) = fraction_below(n, 2.0, r, 200);
    let p = 1.0 - (-r * r / n as f64).exp();
    let sigma = (p * (1.0 - p) / m as f64).sqrt();
    assert!((frac - p).abs() <= 3.0 * sigma);
    assert!((frac / (r * r / n as f64) - 1.0).abs() < 0.05);
}

#[test]
fn meanfield_is_deterministic_per_seed() {
    let a = sample_meanfield(12, 1.5, 9).unwrap();
    let b = sample_meanfield(12, 1.5, 9).unwrap();
    let c = sample_meanfield(12, 1.5, 10).unwrap();
    assert_eq!(a.edges(), b.edges());
    assert_ne!(a.edges(), c.edges());
}

#[test]
fn coupling_depth_zero_is_trivial() {
    let s = neighborhood_coupling_stat(64, 1.0, 1.5, 0, 50, 1).unwrap();
    assert_eq!((s.mean_kn, s.mean_pwit, s.expected_pwit), (1.0, 1.0, 1.0));
    assert_eq!(s.z_score, 0.0);
}

#[test]
fn coupling_holds_for_large_n_and_fails_for_tiny_n() {
    let big: CouplingStat = neighborhood_coupling_stat(512, 1.0, 1.5, 2, 4000, 3).unwrap();
    assert!((big.expected_pwit - 4.75).abs() < 1e-12);
    assert!(big.z_score.abs() <= 3.0, "{big:?}");
    let small = neighborhood_coupling_stat(8, 1.0, 1.5, 2, 4000, 3).unwrap();
    assert!(small.z_score.abs() > 3.0 && small.z_score.abs() > big.z_score.abs(), "{small:?}");
}

#[test]
fn cluster_size_mean_is_geometric_sum() {
    let p = ModelParams::new(1.0, 1.5).unwrap();
    let sizes: Vec<f64> = (0..4000).map(|s| sample_cluster(&p, 3, s).unwrap().len() as f64).collect();
    let mean = sizes.iter().sum::<f64>() / sizes.len() as f64;
    let var = sizes.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (sizes.len() - 1) as f64;
    let expected = 1.0 + 1.5 + 2.25 + 3.375;
    assert!((mean - expected).abs() <= 3.0 * (var / sizes.len() as f64).sqrt());
}

#[test]
fn simulated_laws_match_operator_iterates() {
    let cfg = SolverConfig::default().with_cells(2048);
    let samples = 40_000;
    let eps = dkw_epsilon(samples, 0.01);
    for (game, d, theta, k) in [
        (Problem::Tsp, 1.0, 2.0, 4),
        (Problem::EdgeCover, 1.5, 2.0, 5),
        (Problem::Matching, 2.0, 1.5, 3),
    ] {
        let p = ModelParams::new(d, theta).unwrap();
        for favor in [Favor::Bob, Favor::Alice] {
            let vals = root_values(&p, k, samples, 4, game, favor).unwrap();
            let law = partial_valuation_law(game, &p, k, favor, &cfg).unwrap();
            let ks = ks_distance(&vals, &law);
            assert!(ks <= eps, "{game} {favor:?}: {ks} > {eps}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn valuations_are_ordered_by_depth_parity(seed in any::<u64>(), k in 0usize..6, theta in 0.5f64..2.5) {
        // B >= A at even depths and B <= A at odd depths, the recursion
        // being antitone
        let p = ModelParams::new(1.0, theta).unwrap();
        let c = sample_cluster(&p, k, seed).unwrap();
        for game in [Problem::Matching, Problem::Tsp, Problem::EdgeCover] {
            let a = partial_valuation(&c, k, Favor::Alice, game).unwrap();
            let b = partial_valuation(&c, k, Favor::Bob, game).unwrap();
            let mut begin = 0;
            for (depth, &end) in c.depth_of_level_end().iter().enumerate().take(k + 1) {
                for v in begin..end {
                    let (x, y) = (a.values[v], b.values[v]);
                    let ordered = if depth % 2 == 0 { x <= y } else { y <= x };
                    prop_assert!(ordered, "depth {depth}: A {x} B {y}");
                }
                begin = end;
            }
        }
    }
}
