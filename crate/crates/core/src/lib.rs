//! Workbench for a service system whose agents are invited on demand,
//! respond after a random delay and may rejoin after serving.
//!
//! - [`model`]: parameters, states, centering/scaling maps.
//! - [`simulator`]: exact event-driven simulation of the stochastic system.
//! - [`fluid`]: the fluid-limit ODE with its reflecting boundary.
//! - [`stability`] and [`cubic`]: Hurwitz, rank-one CQLF and closed-form
//!   sufficient conditions for local exponential stability.
//! - [`experiments`] and [`presets`]: comparisons, sweeps and bundled
//!   parameter sets.

// `!(a < b)` comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cubic;
pub mod experiments;
pub mod fluid;
pub mod model;
pub mod presets;
pub mod simulator;
pub mod stability;

pub use model::{scale_center, z_from_yw, CtmcState, FluidState, ModelParams, Trajectory};
