//! Batch front-end: configs, solve/sweep/verify commands and report files.

pub mod commands;
pub mod config;
pub mod report;
pub mod verify;

pub use commands::{cmd_solve, cmd_sweep, exit_code, run_solve, run_sweep, SweepRow, SweepSpec};
pub use config::RunConfig;
pub use report::Report;
pub use verify::{cmd_verify, run_suite, Suite, VerifyReport};
