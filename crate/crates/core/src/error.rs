use thiserror::Error;

/// Process exit codes shared by the CLI and the C ABI.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(i32)]
pub enum ExitCode {
    Success = 0,
    Config = 1,
    NotPowerBounded = 2,
    TolAmbiguous = 3,
    Precondition = 4,
    Exhausted = 5,
    ParityFailure = 6,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("config error: {0}")]
    Config(String),

    #[error("operator is not power-bounded: {0}")]
    NotPowerBounded(String),

    #[error("peripheral classification is ambiguous at the requested tolerance: {0}")]
    TolAmbiguous(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("power {requested} exceeds the iteration horizon {max}")]
    HorizonExceeded { requested: u64, max: u64 },

    #[error("Sylvester equation ill-conditioned: spectral separation {separation:e}")]
    SylvesterIllConditioned { separation: f64 },

    #[error("unsupported diagonal operator: {0}")]
    UnsupportedDiagonal(String),

    #[error("projection unavailable: {0}")]
    ProjectionUnavailable(String),

    #[error("no separation: {0}")]
    NoSeparation(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("search exhausted at stage {stage} (best tolerance achieved {best_tol:e})")]
    Exhausted {
        stage: usize,
        best_tol: f64,
        partial: Option<Box<crate::witness::WitnessState>>,
    },

    #[error("Bessaga-Pelczynski condition violated: {0}")]
    BpViolation(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            Error::Config(_) | Error::Io(_) => ExitCode::Config,
            Error::NotPowerBounded(_) => ExitCode::NotPowerBounded,
            Error::TolAmbiguous(_) | Error::SylvesterIllConditioned { .. } => ExitCode::TolAmbiguous,
            Error::DimensionMismatch { .. }
            | Error::HorizonExceeded { .. }
            | Error::UnsupportedDiagonal(_)
            | Error::ProjectionUnavailable(_)
            | Error::NoSeparation(_)
            | Error::Precondition(_)
            | Error::Unsupported(_) => ExitCode::Precondition,
            Error::Exhausted { .. } => ExitCode::Exhausted,
            Error::BpViolation(_) => ExitCode::ParityFailure,
        }
    }

    /// Stable upper-case identifier used in reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Config(_) => "CONFIG",
            Error::NotPowerBounded(_) => "NOT_POWER_BOUNDED",
            Error::TolAmbiguous(_) => "TOL_AMBIGUOUS",
            Error::DimensionMismatch { .. } => "DIMENSION_MISMATCH",
            Error::HorizonExceeded { .. } => "HORIZON_EXCEEDED",
            Error::SylvesterIllConditioned { .. } => "SYLVESTER_ILL_CONDITIONED",
            Error::UnsupportedDiagonal(_) => "UNSUPPORTED_DIAGONAL",
            Error::ProjectionUnavailable(_) => "PROJECTION_UNAVAILABLE",
            Error::NoSeparation(_) => "NO_SEPARATION",
            Error::Precondition(_) => "PRECONDITION",
            Error::Unsupported(_) => "UNSUPPORTED",
            Error::Exhausted { .. } => "EXHAUSTED",
            Error::BpViolation(_) => "BP_VIOLATION",
            Error::Io(_) => "IO",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
