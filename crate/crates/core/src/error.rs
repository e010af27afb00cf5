use crate::sca::SolverTrace;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(&'static str),

    #[error("degenerate relaxed solution: g^H V g = {value:e} for downlink user {user}")]
    DegenerateSolution { user: usize, value: f64 },

    #[error("no feasible starting point found after {attempts} attempts")]
    InfeasibleInit { attempts: usize, trace: Box<SolverTrace> },

    #[error("subproblem failed at iteration {iteration}")]
    SubproblemFailure { iteration: usize, trace: Box<SolverTrace> },

    #[error("recovered design violates {constraint} by {violation_db:.4} dB")]
    ConstraintViolation {
        constraint: String,
        violation_db: f64,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Solver trace carried by early SCA terminations.
    pub fn trace(&self) -> Option<&SolverTrace> {
        match self {
            Error::InfeasibleInit { trace, .. } | Error::SubproblemFailure { trace, .. } => Some(trace),
            _ => None,
        }
    }
}
