use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid Hamiltonian: {0}")]
    InvalidHamiltonian(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("eigensolver failed to converge")]
    Eigensolver,
    #[error("quadrature did not reach tolerance {tol:e} (estimated error {err:e})")]
    Quadrature { tol: f64, err: f64 },
    #[error("generator is not detailed balanced (residual {0:e})")]
    NotDetailedBalanced(f64),
    #[error("ambiguous kernel: first eigenvalue above threshold is {value:e}, threshold {threshold:e}")]
    AmbiguousKernel { value: f64, threshold: f64 },
    #[error("commuting cut does not hold: {0}")]
    CutFailure(String),
    #[error("simultaneous diagonalization residual {0:e} above tolerance")]
    SimultaneousDiagonalization(f64),
    #[error("resource guard: {0}")]
    ResourceGuard(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("bisection failed to bracket a crossing for state {0}")]
    Bisection(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
