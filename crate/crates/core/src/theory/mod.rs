//! The full type-space system: flat-white expansion, the forced-colouring
//! offspring matrix and its `κ` tables, closed forms, spectral radii, the
//! cleanup and high-degree branching matrices, and the checks tying them
//! together.

mod branching;
mod closed;
mod flat;
mod high;
mod naive;
mod spectral;
mod system;
mod types;
mod verify;

pub use branching::{BranchingEstimate, BranchingOracle, SHARDS};
pub use closed::{
    cleanup_identity_gap, cleanup_matrix, edge_table_closed, kappa_scalar, kappa_table_closed, lambda_closed,
    Cleanup,
};
pub use flat::{flat_white_expand, neighbour_weight, product_form, FullTypeState, Moments};
pub use high::{delta0, high_degree_matrix, HighDegree};
pub use naive::{naive_system, NaiveSystem};
pub use spectral::{spectral_radius, POWER_MAX_ITER, POWER_TOL};
pub use system::{
    assemble_system, edge_table, edge_type, full_rhs, kappa_linear, kappa_neumann, vertex_edge_factors,
    Assembled, FullDerivative, KappaTable,
};
pub use types::{third_colour, TypeIndex};
pub use verify::{tamper_state, trajectory_states, verify_theory, CheckResult, VerifyConfig, MAX_VERIFY_DELTA, TAMPER};
