//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide error enum.
#[derive(Debug, Error)]
pub enum Error {
    /// A model builder was asked for an unbuildable system (e.g. fewer than
    /// two sites).
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// Operator-file parse failure, with the 1-based line number.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// A gate or observable referenced a site outside `0..n`.
    #[error("site {site} out of range for {n} qubits")]
    SiteOutOfRange { site: usize, n: usize },

    /// Mismatched operator/state dimensions.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Dense simulation past the configured qubit cap.
    #[error("resource cap exceeded: {n} qubits > cap {cap}")]
    ResourceCap { n: usize, cap: usize },

    /// A caller-supplied argument is unusable (zero samples, empty grid, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A resource-formula precondition does not hold; the message names the
    /// violated inequality.
    #[error("domain error: {0}")]
    Domain(String),

    /// Peak-search window does not overlap the grid or holds too few points.
    #[error("invalid window: {0}")]
    InvalidWindow(String),

    /// Decay fitting had too few usable samples.
    #[error("fit error: {0}")]
    Fit(String),

    /// Synthetic-spectrum request cannot be packed into the energy range.
    #[error("infeasible spectrum: {0}")]
    Infeasible(String),

    /// Run-configuration validation failure, naming the offending field.
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
