//! File formats and drivers behind the command-line tool.
//!
//! * [`config`]: versioned JSON configuration and sweep files.
//! * [`output`]: CSV and JSON artifacts written by the subcommands.
//! * [`sweep`]: grid × seed × scheme fan-out with canonical row order.

pub mod config;
pub mod output;
pub mod sweep;

use crate::Error;

/// Process exit codes of the command-line tool.
pub mod exit {
    pub const CONVERGED: i32 = 0;
    pub const PARSE_ERROR: i32 = 2;
    pub const INFEASIBLE: i32 = 3;
    pub const SOLVER_FAILURE: i32 = 4;
}

/// Exit code reported for a failed run.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) => exit::PARSE_ERROR,
        Error::InfeasibleInit { .. } => exit::INFEASIBLE,
        _ => exit::SOLVER_FAILURE,
    }
}

/// Short machine-readable outcome label used in CSV rows.
pub fn outcome_label(err: &Error) -> &'static str {
    match err {
        Error::Config(_) => "config_error",
        Error::InfeasibleInit { .. } => "infeasible_init",
        Error::SubproblemFailure { .. } => "subproblem_failure",
        Error::ConstraintViolation { .. } => "constraint_violation",
        Error::DegenerateSolution { .. } => "degenerate_solution",
        _ => "error",
    }
}
