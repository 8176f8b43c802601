//! Problem data (F, φ, ψ, t), domains, named families and hypothesis checks.

pub mod checks;
pub mod counterexample;
pub mod domain;
pub mod problem;

pub use checks::{ncf_sufficient_check, serrin_condition_check, NcfBranch, NcfReport, SerrinReport, TOL_GEOM};
pub use counterexample::{counterexample_problem, counterexample_problem_with_k, Counterexample};
pub use domain::{DomainChart, Shape};
pub use problem::{
    make_cmc, make_conformal_minimal, make_custom, make_jang, ConformalFactor, FFn, PMCProblem, PhiFn, ScalarFn,
};
