//! Configuration, result files and the command implementations behind the CLI.

pub mod commands;
pub mod config;
pub mod table;
pub mod verify;

pub use commands::{
    cmd_background, cmd_coeffs, cmd_perturb, cmd_sweep, cmd_window, run_perturbation, solve_background, PerturbOutcome,
    ResultBundle, THREADS_ENV,
};
pub use config::{ParamRange, SolverConfig};
pub use table::Table;
pub use verify::{cmd_verify, Check, VerifyReport};
