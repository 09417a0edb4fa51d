use thiserror::Error;

/// Errors raised by the model, solvers and trainers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("hamiltonian is not hermitian (max deviation {0:e})")]
    NonHermitianHamiltonian(f64),
    #[error("negative jump rate {0}")]
    NegativeRate(f64),
    #[error("no steady state: smallest eigenvalue magnitude {0:e}")]
    NoSteadyState(f64),
    #[error("degenerate steady state: second eigenvalue magnitude {0:e}")]
    DegenerateSteadyState(f64),
    #[error("eigenvalue solver failed to converge")]
    EigenSolverFailed,
    #[error("full solver capped at N={cap}, got N={n}")]
    ModelTooLarge { n: usize, cap: usize },
    #[error("effective generator routes disagree by {0:e}")]
    RouteMismatch(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("objective returned a non-finite value at coordinate {0:?}")]
    NonFiniteObjective(Option<usize>),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("labels contain a single class")]
    SingleClassDataset,
    #[error("training failed at epoch {epoch}: {source}")]
    Training { epoch: usize, source: Box<Error> },
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoSteadyState(_)
                | Error::DegenerateSteadyState(_)
                | Error::EigenSolverFailed
                | Error::RouteMismatch(_)
                | Error::NonFiniteObjective(_)
        ) || matches!(self, Error::Training { source, .. } if source.is_numerical())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
