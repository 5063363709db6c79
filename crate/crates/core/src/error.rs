use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (relative deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not unitary (deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("invalid Schatten order p = {0} (must be in [1, inf])")]
    InvalidP(f64),

    #[error("invalid dimension {0}")]
    InvalidDimension(usize),

    #[error("noise parameter eta = {0} outside [0, 1]")]
    InvalidEta(f64),

    #[error("measurement is not a rank-1 projective measurement")]
    NotRank1,

    #[error("outcome counts differ ({left} vs {right})")]
    OutcomeCountMismatch { left: usize, right: usize },

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("invalid PVM: {0}")]
    InvalidPvm(String),

    #[error("invalid quantum state: {0}")]
    InvalidState(String),

    #[error("state vector is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("angle {name} = {value} outside its allowed interval")]
    AngleOutOfRange { name: &'static str, value: f64 },

    #[error("matrix entries must be finite")]
    NonFinite,

    #[error("eigensolver failed to converge")]
    NoConvergence,

    #[error("infeasible target: {0}")]
    InfeasibleTarget(String),

    #[error("configuration error in `{field}`{}: {message}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Config {
        field: String,
        line: Option<usize>,
        message: String,
    },

    #[error("unknown report kind `{0}`")]
    UnknownKind(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            line: None,
            message: message.into(),
        }
    }
}
