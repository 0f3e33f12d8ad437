//! Disassortative three-community stochastic block model, the Achlioptas–Moore
//! list-colouring algorithm run on it, and the differential-equation and
//! branching-process machinery that describes the algorithm's trajectory.
//!
//! Module map:
//!
//! * [`sbm`]: model parameters, planted-graph generation, census, agreement,
//!   posterior weights and the MAP loss.
//! * [`am`]: the list-colouring algorithm with degree-power selection,
//!   high-degree precolouring and per-epoch diagnostics.
//! * [`ode`]: the reduced `2(Δ+1)`-variable system, its adaptive integration and
//!   the `d_max(α)` scan.
//! * [`theory`]: the full type-space system, flat-white expansion, offspring
//!   matrices, spectral radii and a Monte-Carlo branching oracle.
//! * [`experiments`]: seeded, parallel experiment drivers with CSV/JSON output.
//!
//! Colours are `0, 1, 2` in memory and `1, 2, 3` in every file format.

pub mod am;
pub mod error;
pub mod experiments;
pub mod ode;
pub mod poisson;
pub mod rng;
pub mod sbm;
pub mod theory;

pub use error::{Error, Result};

/// Number of colours / communities. Fixed throughout.
pub const Q: usize = 3;

/// A colour (or planted community) in `0..3`.
pub type Colour = u8;
