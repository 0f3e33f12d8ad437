//! The disassortative three-community stochastic block model.

mod census;
mod graph;
mod params;
mod posterior;

pub use census::{census, census_cell_expectation, census_class_expectation, TypeCensus};
pub use graph::{generate, generate_with_rng, PlantedGraph};
pub use params::{derive_rates, kesten_stigum, SbmParams};
pub use posterior::{
    agreement, class_sizes, edge_split, log_posterior, loss, map_exhaustive, rebalance_isolated,
    theorem_loss, MaxMode, EXHAUSTIVE_LIMIT,
};
