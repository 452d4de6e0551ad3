//! Error type shared across the crate.

/// Everything that can go wrong in the library, partitioned so callers (and
/// the CLI exit-status logic) can tell bad input apart from runtime failures.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An operation was invoked on a state or pair of states whose scheme,
    /// grid, or shape does not match what the operation requires.
    #[error("usage error: {0}")]
    Usage(String),

    /// A scenario or packet configuration violates a structural invariant.
    #[error("configuration error: {0}")]
    Config(String),

    /// The requested computation is not available for this input class.
    #[error("capability error: {0}")]
    Capability(String),

    /// A numerical probe point is unusable (vanishing test amplitude).
    #[error("probe error: {0}")]
    Probe(String),

    /// The state has no usable content (zero norm).
    #[error("degenerate state: {0}")]
    Degenerate(String),

    /// Refused: the scheme has a complex spectrum on the sampled modes, so
    /// real-time phase evolution would not be unitary.
    #[error("reality condition violated: {0}")]
    RealityViolated(String),

    /// Too much probability reached the edge of the periodic position grid.
    #[error("grid boundary guard tripped: {0}")]
    BoundaryGuard(String),

    /// Internal consistency failure (schema mismatch, empty emission, ...).
    #[error("internal error: {0}")]
    Internal(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by bad user input rather than a failed run.
    /// The CLI maps these to a distinct exit status.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Usage(_) | Error::Config(_) | Error::Capability(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
