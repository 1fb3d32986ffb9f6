//! Cavity fixed points, limit constants and exact finite oracles for
//! mean-field minimum matching, the 2-factor/TSP relaxation and edge cover.

// `!(x >= 0.0)` style guards are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constants;
pub mod error;
pub mod finite;
pub mod grid;
pub mod operators;
pub mod pwit;
mod quadrature;
pub mod special;
pub mod suites;

pub use constants::{
    beta_limit, beta_theta, beta_theta_convolution, density_q, edgecover_d1, edgecover_d2,
    matching_d1_closed_form, rigorous_bounds, tsp_d1_reference, BetaConfig, BetaEstimate, BetaPoint,
    Bounds, EdgeCoverD2, EdgeCoverMoments,
};
pub use error::{Error, Result};
pub use finite::{
    diluted_edge_cover, diluted_flow, diluted_matching, empirical_statistics, game_value,
    neighborhood_coupling_stat, sample_meanfield, tree_game_value, verify_payoff_identity,
    DilutedSolution, Edge, WeightedGraph,
};
pub use grid::{kernel_integral, sup_distance, ModelParams, SurvivalGrid};
pub use operators::{
    apply_edgecover_operator, apply_matching_operator, apply_operator, apply_tsp_operator,
    iterate_to_fixed_point, partial_valuation_law, solve_fixed_point, EdgeCoverHorizon,
    FixedPointReport, Problem, SolverConfig,
};
pub use pwit::{
    empirical_survival, partial_valuation, replica_gap, replica_gap_profile, sample_cluster, Favor,
    ThetaCluster, Valuation,
};
pub use quadrature::gauss_legendre;
pub use special::{erf, erfc, gamma, lambert_w, zeta};
