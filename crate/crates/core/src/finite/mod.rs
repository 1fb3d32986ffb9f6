//! Exact desk-scale oracles: the exploration game on finite graphs and the
//! diluted matching, flow and edge-cover problems it is tied to.

mod game;
mod graph;
mod io;
mod meanfield;
mod solvers;

pub use game::{
    game_value, optimal_play_path, tree_game_value, verify_payoff_identity, PayoffReport,
};
pub use graph::{random_graph, random_tree, Edge, WeightedGraph};
pub use io::{format_float, parse_graph, write_graph};
pub use meanfield::{
    empirical_statistics, neighborhood_coupling_stat, sample_meanfield, CouplingStat, FiniteStats,
};
pub use solvers::{
    diluted_edge_cover, diluted_edge_cover_precovered, diluted_flow, diluted_matching,
    matching_best_two, matching_table, DilutedSolution, MatchingTable, MAX_EXACT_EDGES, MAX_MATCHING_VERTICES,
};
