//! Steady-state Gaussian quantum correlations of a driven
//! photon–magnon–molecular-vibration system with a Barnett frequency
//! shift.
//!
//! The pipeline: classical steady state → linearized drift/diffusion
//! matrices → stability check → Lyapunov covariance matrix → correlation
//! measures (logarithmic negativity, residual contangle, Gaussian quantum
//! discord, EPR steering). Flipping the sign of the Barnett shift and
//! comparing branches quantifies the nonreciprocity of each measure
//! through a bidirectional contrast ratio.
//!
//! Modules:
//! - [`model`]: parameters, steady state, drift/diffusion matrices
//! - [`dynamics`]: stability and Lyapunov/ODE covariance solvers
//! - [`measures`]: correlation functionals on covariance matrices
//! - [`sweep`]: parameter grids, Barnett branches, figure presets
//! - [`config`], [`output`], [`cli`]: configuration and data emission

pub mod cli;
pub mod config;
pub mod dynamics;
pub mod measures;
pub mod model;
pub mod output;
pub mod sweep;

pub use dynamics::{CovarianceMatrix, StabilityReport};
pub use measures::{CorrelationReport, MeasureSelection};
pub use model::{LinearModel, SteadyState, SystemParams};
pub use sweep::{Preset, SweepResult, SweepSpec};
