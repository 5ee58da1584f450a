use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("width mismatch: {left} vs {right} qubits")]
    WidthMismatch { left: usize, right: usize },

    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid circuit: {0}")]
    InvalidCircuit(#[from] crate::circuit::ValidationErrors),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("leaf cap exceeded: expansion produced more than {cap} leaves")]
    LeafCapExceeded { cap: usize },

    #[error("ill-conditioned system: {0}")]
    Conditioning(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures caused by the input (as opposed to a computation
    /// running into a cap or a numerical wall).
    pub fn is_input_error(&self) -> bool {
        !matches!(
            self,
            Error::LeafCapExceeded { .. } | Error::Conditioning(_) | Error::Capacity(_)
        )
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
