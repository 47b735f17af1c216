use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("qubit index {qubit} out of range for {num_qubits} qubits")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },

    #[error("duplicate qubit index {0} in gate operands")]
    DuplicateQubit(usize),

    #[error("gate {gate} expects {expected} qubit(s) and {expected_params} parameter(s), got {qubits} and {params}")]
    GateArity {
        gate: &'static str,
        expected: usize,
        expected_params: usize,
        qubits: usize,
        params: usize,
    },

    #[error("{0} qubits exceeds the simulation cap of {1}")]
    QubitCap(usize, usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid quantum object: {0}")]
    InvalidState(String),

    #[error("gate of width {width} does not fit a block of {s_blk} qubits")]
    GateTooWide { width: usize, s_blk: usize },

    #[error("synthesis failed for partition {partition}: no candidate within eps_syn = {eps_syn:e} up to {k_max} CNOTs")]
    SynthesisFailed {
        partition: usize,
        eps_syn: f64,
        k_max: usize,
    },

    #[error("non-finite objective during optimization")]
    NonFinite,

    #[error("two-qubit gate on ({0}, {1}) which is not a coupling edge")]
    NotAnEdge(usize, usize),

    #[error("confusion matrix for qubit {0} is singular")]
    SingularConfusion(usize),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("dataset error: {0}")]
    Dataset(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("training diverged: {0}")]
    Diverged(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("stage `{stage}` failed (config {config_hash}): {source}")]
    Stage {
        stage: &'static str,
        config_hash: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Process exit code for the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Stage { source, .. } => source.exit_code(),
            Error::Config(_) | Error::Parse { .. } | Error::Dataset(_) | Error::Io { .. } => 2,
            Error::SynthesisFailed { .. } | Error::NonFinite => 3,
            _ => 4,
        }
    }
}
