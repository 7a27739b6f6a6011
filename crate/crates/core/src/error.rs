use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter is outside its physical or numerical domain.
    #[error("invalid parameter `{name}` = {value}: must satisfy {bound}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        bound: &'static str,
    },

    #[error("unknown mode {0}")]
    UnknownMode(String),

    #[error("invalid operation: {0}")]
    InvalidOperation(String),

    /// A covariance left the physical set (symplectic eigenvalue below 1/2)
    /// or is not positive definite.
    #[error("model violation: {0}")]
    ModelViolation(String),

    /// The spin covariance is too anisotropic to resolve its smallest
    /// eigenvalue in double precision.
    #[error("ill-conditioned spin covariance (condition number {0:.3e})")]
    IllConditioned(f64),

    #[error("integrators disagree: max deviation {deviation:.3e} exceeds {tolerance:.1e}")]
    Inconsistent { deviation: f64, tolerance: f64 },

    #[error("optimizer did not converge after {iterations} cycles (best xi^2 = {best:.6e})")]
    NotConverged { iterations: usize, best: f64 },

    #[error("config: {0}")]
    Config(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    /// Process exit status for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter { .. } | Error::UnknownMode(_) | Error::Config(_) => 2,
            Error::InvalidOperation(_) | Error::ModelViolation(_) | Error::IllConditioned(_) | Error::Inconsistent { .. } => 3,
            Error::NotConverged { .. } => 4,
            Error::Io(_) => 1,
        }
    }

    pub(crate) fn invalid(name: &'static str, value: f64, bound: &'static str) -> Self {
        Error::InvalidParameter { name, value, bound }
    }
}
