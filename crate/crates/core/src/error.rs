use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("direction vector is zero")]
    ZeroDirection,

    #[error("input vectors are linearly dependent")]
    DependentVectors,

    #[error("centers are affinely dependent")]
    AffinelyDependent,

    #[error("query point coincides with center {index}")]
    CenterCoincidesWithQuery { index: usize },

    #[error("the ball intersection is empty")]
    EmptyIntersection,

    #[error("general position violated: {0}")]
    GeneralPosition(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("scale guard: {0}")]
    ScaleGuard(String),

    #[error("numerically inconclusive: {0}")]
    Inconclusive(String),

    #[error("linear program failed: {0}")]
    LpFailure(String),

    #[error("subset-sum geometry invalid: {0}")]
    SspGeometry(String),

    #[error("rejection sampling exceeded {0} attempts")]
    RejectionCap(usize),
}

impl Error {
    /// Stable snake-case tag for machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::InvalidInput(_) => "invalid_input",
            Error::ZeroDirection => "zero_direction",
            Error::DependentVectors => "dependent_vectors",
            Error::AffinelyDependent => "affinely_dependent",
            Error::CenterCoincidesWithQuery { .. } => "center_coincides_with_query",
            Error::EmptyIntersection => "empty_intersection",
            Error::GeneralPosition(_) => "general_position",
            Error::Precondition(_) => "precondition",
            Error::ScaleGuard(_) => "scale_guard",
            Error::Inconclusive(_) => "inconclusive",
            Error::LpFailure(_) => "lp_failure",
            Error::SspGeometry(_) => "ssp_geometry",
            Error::RejectionCap(_) => "rejection_cap",
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ScaleGuard(_) => 3,
            Error::Inconclusive(_) | Error::LpFailure(_) | Error::RejectionCap(_) => 4,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
