use thiserror::Error;

/// Errors surfaced by the mechanism, the analysis oracles and the scenario
/// harness.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid game configuration (agent count, rounds, negative money, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// A caller violated an operation contract (wrong-length bid vector,
    /// acceptance outside the selected set, round past the horizon).
    #[error("protocol error: {0}")]
    Protocol(String),

    /// An internal invariant that must hold by construction was violated.
    #[error("invariant violation: {0}")]
    Invariant(String),

    /// Exhaustive equilibrium search would enumerate too many profiles.
    #[error("search space too large: {profiles} profiles exceeds cap {cap}")]
    SearchSpace { profiles: u128, cap: u128 },

    /// Malformed input file (scenario or surge table).
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Scenario-level problem (missing threshold source, bad sweep, ...).
    #[error("scenario error: {0}")]
    Scenario(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
