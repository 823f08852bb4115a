use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("index set cardinality {0} exceeds the limit of {limit}", limit = crate::index_sets::MAX_CARDINALITY)]
    CardinalityTooLarge(usize),
    #[error("invalid index set: {0}")]
    InvalidIndexSet(String),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("no accepted sample after {proposals} proposals on domain `{domain}`")]
    AcceptanceTooLow { domain: String, proposals: u64 },
    #[error("householder pivot column {0} is exactly zero")]
    ExactRankDeficiency(usize),
    #[error("triangular system has a zero diagonal entry at {0}")]
    SingularTriangular(usize),
    #[error("design matrix is rank deficient: numerical rank {rank} < {n}")]
    RankDeficient { rank: usize, n: usize },
    #[error("orthogonality lost: ||Q^T Q - I||_F = {epsilon:e} exceeds {threshold:e}")]
    OrthogonalityLost { epsilon: f64, threshold: f64 },
    #[error("adaptive rescaling hit a vanishing pivot at column {0}")]
    SingularPivot(usize),
    #[error("Christoffel function vanishes at anchor {0}")]
    ZeroRow(usize),
    #[error("discrete measure has zero total mass")]
    ZeroMass,
    #[error("only {support} anchors carry positive mass, cannot draw {requested} distinct ones")]
    InsufficientSupport { support: usize, requested: usize },
    #[error("parameter `{name}` out of range: {reason}")]
    ParameterOutOfRange { name: &'static str, reason: String },
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("operation supports only d = 2, got d = {0}")]
    DimensionUnsupported(usize),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::ParameterOutOfRange {
            name,
            reason: reason.into(),
        }
    }
}
