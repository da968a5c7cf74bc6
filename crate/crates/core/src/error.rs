use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("polynomial is identically zero")]
    ZeroPolynomial,

    #[error("order {order} is not supported (maximum {max})")]
    UnsupportedOrder { order: usize, max: usize },

    #[error("argument {re}{im:+}i is outside the domain Re z > 0")]
    Domain { re: f64, im: f64 },

    #[error("non-finite sample at node {index} (t = {t})")]
    NonFiniteSample { index: usize, t: f64 },

    #[error("degenerate polynomial: linear coefficient must be nonzero")]
    DegeneratePolynomial,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite kernel entry at node pair ({row}, {col})")]
    TruncationDomain { row: usize, col: usize },

    #[error("assembled matrix asymmetry {asymmetry:e} exceeds {tolerance:e}")]
    DiscretizationFailure { asymmetry: f64, tolerance: f64 },

    #[error("eigensolver failed: {0}")]
    Solver(String),

    #[error("boundary constraints are rank deficient")]
    ModelRank,

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("eigenvalue {index} has imaginary part {imag:e} relative to modulus {modulus:e}")]
    Convergence { index: usize, imag: f64, modulus: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Numerical failures as opposed to malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Solver(_)
                | Error::Convergence { .. }
                | Error::DiscretizationFailure { .. }
                | Error::TruncationDomain { .. }
                | Error::ModelRank
        )
    }
}
