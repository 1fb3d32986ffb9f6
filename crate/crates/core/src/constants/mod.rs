//! Scalar limit quantities: diluted costs `beta_theta`, their `theta -> inf`
//! limits, the density `q`, closed forms and rigorous bounds.

mod beta;
mod bounds;
mod closed_form;

pub use beta::{
    beta_limit, beta_point, beta_theta, beta_theta_convolution, density_q, BetaConfig, BetaEstimate,
    BetaPoint,
};
pub use bounds::{rigorous_bounds, Bounds};
pub use closed_form::{
    edgecover_d1, edgecover_d2, matching_d1_beta, matching_d1_closed_form, matching_d1_theta,
    tsp_d1_reference, EdgeCoverD2, EdgeCoverMoments, MatchingD1,
};
