//! Monte Carlo on the θ-cluster of the d-dimensional Poisson weighted
//! infinite tree: partial valuations, replica gap and empirical laws.

mod cluster;
mod population;
mod stats;
mod valuation;

pub use cluster::{
    expected_cluster_size, sample_cluster, sample_cluster_with_rng, sample_rng, ThetaCluster, MAX_EXPECTED_NODES};
pub use population::{population_gap_profile, PopulationConfig};
pub use stats::{
    dkw_epsilon, empirical_survival, ks_distance, replica_gap, replica_gap_profile, root_values,
    GapEstimate, GapMethod, GapProfile, AUTO_EXACT_BUDGET,
};
pub use valuation::{boundary_value, combine, partial_valuation, Favor, Valuation};
