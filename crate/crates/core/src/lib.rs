//! Desk-scale simulator of a nested Mach-Zehnder interferometer with weakly
//! vibrating mirrors.
//!
//! The crate is organized along the signal chain:
//!
//! - [`optics`]: beam splitters, mirrors, phases, block and leak elements, and
//!   the fixed nested topology with configurable parameters;
//! - [`state`]: forward/backward path states and weak values of path
//!   projectors;
//! - [`field`]: transverse Gaussian-mode time-domain simulation and quad-cell
//!   signal extraction;
//! - [`analytic`]: independent first-order prediction of the quad signal from
//!   weak values, used to cross-validate the field engine;
//! - [`spectra`]: power spectra, peak detection and power-law slope fits;
//! - [`scenario`]: built-in experiment configurations, the runner, sweeps and
//!   file formats.
//!
//! All engines are pure functions over value types and are safe to share
//! across threads; time samples are evaluated in parallel with deterministic
//! results.

pub mod analytic;
pub mod error;
pub mod field;
pub mod optics;
pub mod scenario;
pub mod spectra;
pub mod state;

pub use error::{Error, Result};
pub use optics::{Amp, Mirror, NetworkSpec, Path};
pub use scenario::{build_scenario, run, sweep, Overrides, Scenario};
