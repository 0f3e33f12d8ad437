//! The reduced `2(Δ+1)`-variable system tracking the densities `u_ℓ` (2-list
//! vertices of live degree ℓ) and `w_ℓ` (3-list vertices), its adaptive
//! integration and the `d_max(α)` scan.

mod dmax;
pub mod dopri;
mod system;
mod trajectory;

pub use dmax::{d_max, DmaxResult, DmaxScan};
pub use system::{
    default_delta, gamma_of, initial_state, lambda_of, moment, phi, OdeState, OdeSystem, Rates,
    LAMBDA_GAP,
};
pub use trajectory::{
    integrate, max_slope_jump, probe, AssumptionReport, OdeConfig, Probe, Termination, Trajectory,
    STOP_EPSILON,
};
