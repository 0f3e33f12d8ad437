//! The list-colouring algorithm: forced steps first, otherwise a 2-list vertex
//! picked with probability proportional to `degree^α`, with a restart on
//! 3-lists once no smaller list is left.

mod pools;
mod precolour;
mod run;
mod state;

pub use precolour::{high_degree_precolor, PrecolourResult};
pub use run::{
    epoch_diagnostics, profile_lambda_gamma, run, write_trace_csv, EpochDiagnostics, Event, RunOptions,
    RunOutput, RunStats, StepKind,
};
pub use state::{init_lists, ColoringState, InitMode};
