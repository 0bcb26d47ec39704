use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by lattice, window, patch, matching and equidecomposition
/// operations. Messages name the violated precondition.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("bound must be positive")]
    NonPositiveBound,

    #[error("basis not full rank")]
    RankDeficient,

    #[error("p2 projection of the basis is rank-deficient: p2(lattice) cannot be dense")]
    NotDense,

    #[error("general position violated: {0}")]
    GeneralPosition(String),

    #[error("window must be bounded")]
    UnboundedWindow,

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("coverage exceeded: {0}")]
    CoverageExceeded(String),

    #[error("windows must have equal measure (got {0} and {1})")]
    MeasureMismatch(f64, f64),

    #[error("displacement not in Z*alpha + Z^d: {0}")]
    DisplacementNotInGroup(String),

    #[error("basis too degenerate to enumerate")]
    DegenerateBasis,

    #[error("K must be positive")]
    NonPositiveK,

    #[error("point contained in multiple pieces: {0:?}")]
    AmbiguousPieces(Vec<usize>),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
