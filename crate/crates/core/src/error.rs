use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("candidate eigenvalue {candidate} outside admissible bracket (0, {upper})")]
    OutOfBracket { candidate: f64, upper: f64 },

    #[error("bracketing failed: {0}")]
    BracketingFailed(String),

    #[error("mesh failure at triangle {triangle} (vertices {vertices:?}): {reason}")]
    MeshFailure {
        triangle: usize,
        vertices: [usize; 3],
        reason: String,
    },

    #[error("weight has nonnegative average ({total_integral}); principal eigenvalue is zero")]
    NegativeAverageViolated { total_integral: f64 },

    #[error("no convergence after {iterations} iterations (last residual {residual:e})")]
    ConvergenceFailure { iterations: usize, residual: f64 },

    #[error("eigenvector has mixed signs (min {min:e}, max {max:e}); not the principal branch")]
    NotPrincipal { min: f64, max: f64 },

    #[error("measure {delta} is not admissible (must lie in (0, {bound}))")]
    InadmissibleMeasure { delta: f64, bound: f64 },

    #[error("superlevel sets of a constant field are trivial")]
    NotApplicable,

    #[error("rearrangement increased the eigenvalue from {previous} to {next}")]
    MonotonicityViolation { previous: f64, next: f64 },

    #[error("{multi} of {total} rays cross the free boundary more than once")]
    NotStarShaped { multi: usize, total: usize },

    #[error("only {found} usable samples, need {needed}")]
    InsufficientSamples { found: usize, needed: usize },

    #[error("only {converged} converged rows, need {needed}")]
    InsufficientData { converged: usize, needed: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("refusing to overwrite existing file {0}")]
    FileExists(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable code, used by the CLI diagnostic line.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::OutOfBracket { .. } => "OutOfBracket",
            Error::BracketingFailed(_) => "BracketingFailed",
            Error::MeshFailure { .. } => "MeshFailure",
            Error::NegativeAverageViolated { .. } => "NegativeAverageViolated",
            Error::ConvergenceFailure { .. } => "ConvergenceFailure",
            Error::NotPrincipal { .. } => "NotPrincipal",
            Error::InadmissibleMeasure { .. } => "InadmissibleMeasure",
            Error::NotApplicable => "NotApplicable",
            Error::MonotonicityViolation { .. } => "MonotonicityViolation",
            Error::NotStarShaped { .. } => "NotStarShaped",
            Error::InsufficientSamples { .. } => "InsufficientSamples",
            Error::InsufficientData { .. } => "InsufficientData",
            Error::Config(_) => "ConfigError",
            Error::FileExists(_) => "FileExists",
            Error::Io(_) => "IoError",
        }
    }

    /// Process exit status associated with the error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidArgument(_) => 2,
            Error::NegativeAverageViolated { .. } | Error::InadmissibleMeasure { .. } => 3,
            Error::FileExists(_) | Error::Io(_) => 4,
            Error::MeshFailure { .. } => 5,
            Error::ConvergenceFailure { .. }
            | Error::BracketingFailed(_)
            | Error::OutOfBracket { .. }
            | Error::NotPrincipal { .. }
            | Error::MonotonicityViolation { .. } => 6,
            Error::NotApplicable
            | Error::NotStarShaped { .. }
            | Error::InsufficientSamples { .. }
            | Error::InsufficientData { .. } => 7,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
