//! Newton solves, t → 0 continuation, blow-up detection and diagnostics.

pub mod blowup;
pub mod bounds;
pub mod continuation;
pub mod diagnostics;
pub mod newton;

pub use blowup::{detect_blow_up_sets, Level};
pub use bounds::{apriori_bounds, beta2, AprioriBounds};
pub use continuation::{
    continuation, continuation_with, initial_guess, monitored_a2, BoundCheck, BoundChecks, LevelRecord, Outcome,
    Schedule, SolveReport,
};
pub use diagnostics::{
    barrier_check, barrier_check_with, comparison_check, comparison_tolerance, gradient_monitor, BarrierReport, ComparisonReport,
    GradientMonitor,
};
pub use newton::{data_scale, rounding_floor, newton_solve, newton_solve_with, newton_tolerance, residual_norm, NewtonOptions, NewtonResult};
