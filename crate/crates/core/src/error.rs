use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Shapes or layouts that do not line up.
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },
    /// A primitive produced NaN or an infinity.
    #[error("non-finite value produced by `{op}`")]
    NonFinite { op: &'static str },
    /// An integrator or optimizer state left the finite range.
    #[error("non-finite state at step {step}")]
    NonFiniteState { step: u64, last_good: Vec<f64> },
    #[error("matrix is too close to defective (eigenvector condition {condition:e})")]
    Conditioning { condition: f64 },
    /// A Hessian spectrum that should be real came back complex.
    #[error("symmetric operator produced complex eigenvalues (max |Im| {max_imag:e})")]
    Asymmetric { max_imag: f64 },
    #[error("dimension {dim} exceeds the dense cap {cap}; use the matrix-free path")]
    TooLarge { dim: usize, cap: usize },
}

impl Error {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
}
