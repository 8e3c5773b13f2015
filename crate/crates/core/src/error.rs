use thiserror::Error;

/// Errors produced anywhere in the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit index {index} out of range for a {n_qubits}-qubit register")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    #[error("register of {requested} qubits exceeds the {cap}-qubit cap")]
    TooManyQubits { requested: usize, cap: usize },

    #[error("{gate} expects {expected} distinct target(s), got {got}")]
    Arity {
        gate: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("duplicate target qubit {index}")]
    DuplicateTarget { index: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("amplitude vector of length {got} is not 2^{n_qubits}")]
    BadAmplitudeLength { got: usize, n_qubits: usize },

    #[error("state not normalized (norm² = {norm_sqr:.3e})")]
    NotNormalized { norm_sqr: f64 },

    #[error("selected a measurement branch of probability {prob:.3e}; state numerics are broken")]
    ZeroNormBranch { prob: f64 },

    #[error("partial trace requires a nonempty subset of kept qubits")]
    EmptyKeep,

    #[error("matrix is not a density operator: {0}")]
    BadDensity(String),

    #[error("parameter {name} out of range: {value}")]
    InvalidParameter { name: &'static str, value: f64 },

    #[error("inconsistent code: {0}")]
    BadCode(String),

    #[error("infeasible role assignment: {0}")]
    InfeasibleRoles(String),

    #[error("vertex {vertex}: prepared state does not match role: {detail}")]
    RoleMismatch { vertex: usize, detail: String },

    #[error("invalid pattern: {0}")]
    BadPattern(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
