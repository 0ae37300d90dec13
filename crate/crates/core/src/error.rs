//! Error types shared across the simulator.

use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    /// Network parameter outside its validated range, or an inconsistent drive set.
    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    /// Grid parameters that cannot support the requested tolerances.
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// Pre- and post-selected states are orthogonal; weak values are undefined.
    #[error("singular post-selection: |<post|pre>| = {overlap_magnitude:.3e} <= 1e-12")]
    PostSelectionSingular { overlap_magnitude: f64 },

    /// A phase ramp or displacement the grid cannot resolve.
    #[error("unresolved ramp: {0}")]
    RampUnresolved(String),

    /// Requested spectral bin outside 1..n_samples/2.
    #[error("frequency {freq} out of range (Nyquist {nyquist})")]
    FreqOutOfRange { freq: u32, nyquist: u32 },

    /// Sweep observable fell below the arithmetic-noise floor; a log-log fit
    /// would measure rounding error, not physics.
    #[error("degenerate sweep: smallest observable {min_value:.3e} underflows 1e-15")]
    DegenerateSweep { min_value: f64 },

    #[error("unknown scenario '{0}'")]
    UnknownScenario(String),

    #[error("invalid override: {0}")]
    InvalidOverride(String),

    #[error("invalid parameter path '{0}' (expected 'drives.<A|B|C|E|F>.g0' or 'leak_eps')")]
    InvalidParamPath(String),

    /// Scenario configuration document that fails strict parsing or validation.
    #[error("invalid config: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
