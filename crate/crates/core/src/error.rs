use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("qubit index {index} out of range for a {num_qubits}-qubit register")]
    QubitOutOfRange { index: usize, num_qubits: usize },

    #[error("gate targets must be distinct, got {0:?}")]
    DuplicateQubits(Vec<usize>),

    #[error("gate {gate} expects {expected} target qubits, got {actual}")]
    TargetArity {
        gate: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("amplitude vector is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("amplitude vector length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("amplitude injection requires the target qubits to be in |0>")]
    TargetsNotReset,

    #[error("shot count must be at least 1")]
    ZeroShots,

    #[error("cannot encode a zero vector")]
    ZeroVector,

    #[error("non-finite value {value} at component {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("angle encoding needs exactly 2 features, got {0}")]
    AngleDimension(usize),

    #[error("encoded points are incompatible: {0}")]
    IncompatibleEncoding(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("need at least {needed} samples, got {available}")]
    TooFewSamples { needed: usize, available: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("too many distinct labels for exhaustive matching: {0}")]
    TooManyLabels(usize),

    #[error("missing schedule {schedule} for qubit {qubit}")]
    MissingSchedule { qubit: usize, schedule: String },

    #[error("unequal shot counts across schedules of pair {pair}")]
    UnequalShots { pair: String },

    #[error("inputs cover different qubit pairs: {0}")]
    PairMismatch(String),

    #[error("line {line}: {message}")]
    MalformedRow { line: u64, message: String },

    #[error("line {line}: duplicate key (qubit {qubit}, schedule {schedule}, shot {shot})")]
    DuplicateKey {
        line: u64,
        qubit: usize,
        schedule: String,
        shot: usize,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("config parse error: {0}")]
    Toml(#[from] toml::de::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by malformed or inconsistent data (as opposed
    /// to bad configuration or I/O failures).
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::MalformedRow { .. }
                | Error::DuplicateKey { .. }
                | Error::MissingSchedule { .. }
                | Error::UnequalShots { .. }
                | Error::PairMismatch(_)
                | Error::NonFinite { .. }
                | Error::ZeroVector
                | Error::TooFewSamples { .. }
                | Error::LengthMismatch { .. }
                | Error::DimensionMismatch { .. }
                | Error::Empty(_)
                | Error::Csv(_)
        )
    }
}
