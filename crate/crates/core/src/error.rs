use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("qubit index {index} out of range for a {n_qubits}-qubit register")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    #[error("gate targets must be distinct, got {0:?}")]
    DuplicateTargets(Vec<usize>),

    #[error("{kind} expects {expected} target(s), got {got}")]
    GateArity {
        kind: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid partial-trace selection: {0}")]
    InvalidSubsystem(String),

    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("degenerate scaling range: min = max = {0}")]
    DegenerateRange(f64),

    #[error("attention row {row} sums to {sum:e}; cannot normalize")]
    DegenerateAttentionRow { row: usize, sum: f64 },

    #[error("{path}:{line}: {msg}")]
    Dataset {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("sentence has no tokens after normalization: {0:?}")]
    EmptySentence(String),

    #[error("invalid split: {0}")]
    InvalidSplit(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("training diverged at iteration {iter}: loss = {loss}")]
    Diverged { iter: usize, loss: f64 },

    #[error("non-finite gradient entry at index {0}")]
    NonFiniteGradient(usize),

    #[error("malformed noise plan {plan:?}: unexpected token {token:?}")]
    NoisePlan { plan: String, token: String },

    #[error("checkpoint layout mismatch: {0}")]
    Layout(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
