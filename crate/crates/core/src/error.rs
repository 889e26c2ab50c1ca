use std::path::PathBuf;

use crate::vqs::VqsTrajectory;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    QubitIndex { index: usize, n_qubits: usize },

    #[error("two-qubit gate needs distinct qubits, got {0} twice")]
    RepeatedQubit(usize),

    #[error("parameter index {index} out of range for {n_params} parameters")]
    ParameterIndex { index: usize, n_params: usize },

    #[error("shape mismatch: expected {expected}, found {found}")]
    Shape { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    Domain(String),

    #[error("{n_qubits} qubits exceeds the dense-matrix limit of {limit}")]
    Resource { n_qubits: usize, limit: usize },

    #[error("McLachlan distance {value:e} is negative beyond round-off; A/C assembly is inconsistent")]
    NumericalConsistency { value: f64 },

    #[error("step size {step:e} underflowed at t = {time}")]
    Stiffness {
        time: f64,
        step: f64,
        trajectory: Box<VqsTrajectory>,
    },

    #[error("insufficient data for fit: {found} usable rows ({reason})")]
    InsufficientData { found: usize, reason: String },

    #[error("degenerate advantage boundary: {0}")]
    DegenerateBoundary(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Error::Format {
            path: path.into(),
            message: message.to_string(),
        }
    }
}
