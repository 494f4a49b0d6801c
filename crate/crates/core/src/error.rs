use thiserror::Error;

pub type Result<T, E = MopError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MopError {
    /// Malformed input or a request the operation does not support.
    #[error("usage error: {0}")]
    Usage(String),
    /// Parameters outside the admissible range of a family or operation.
    #[error("domain error: {0}")]
    Domain(String),
    #[error("singular matrix at pivot {pivot}")]
    Singular { pivot: usize },
    #[error("functional is not quasi-definite: Hankel determinant {n} vanishes but a later one does not")]
    QuasiDefiniteViolation { n: usize },
    #[error("multi-index {n:?} is not normal")]
    NonNormal { n: Vec<usize> },
    #[error("recurrence breakdown at {n:?} (axes {j}, {l})")]
    Breakdown { n: Vec<usize>, j: usize, l: usize },
    #[error("one-step transform breaks down at degree {n}: {reason}")]
    OneStepBreakdown { n: usize, reason: String },
    /// `P_k(z_0) = 0`: the one-step transform is not normal at `k`.
    #[error("P_{n:?} vanishes at the transform root")]
    RootHit { n: Vec<usize> },
    /// The normalising determinant of a Christoffel formula vanishes.
    #[error("determinant D_{n:?} vanishes")]
    DegenerateD { n: Vec<usize> },
    #[error("root polishing did not converge for root {index}")]
    NonConverged { index: usize },
    #[error("interlacing comparison within tolerance band: {0}")]
    ToleranceAmbiguous(String),
    #[error("operation needs the {needed} backend")]
    Backend { needed: &'static str },
}

impl MopError {
    /// Process exit code: 2 for bad input or domain problems, 1 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            MopError::Usage(_) | MopError::Domain(_) | MopError::Backend { .. } => 2,
            _ => 1,
        }
    }
}
