//! Simulation and optimization of a free-induction-decay photon memory in an
//! inhomogeneously broadened absorber with spin-wave storage.
//!
//! All solver quantities are dimensionless: frequencies in units of the
//! inhomogeneous half-width Γ, times in 1/Γ, and lengths in absorption
//! lengths, so a scenario is fixed by the optical depth αL, the pulse
//! duration ΓT, the line shape and the read-out direction.

// `!(x > 0.0)` is used deliberately so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod error;
pub mod feasibility;
pub mod grid;
pub mod line;
pub mod mbsolve;
pub mod optimize;
pub mod pulse;
pub mod quadrature;
pub mod scenario;

pub use error::{Error, Result};
pub use grid::{make_time_grid, TimeGrid};
pub use line::{sample_distribution, DetuningQuadrature, LineShape};
pub use pulse::{exponential_input, pulse_energy, time_reverse, PulseEnvelope};
pub use scenario::{Direction, MediumScenario, Resolution};
