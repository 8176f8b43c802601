//! Independent truths the solver is tested against: closed-form solutions,
//! radial flux analysis, barrier constants, the Θ identity and the Q-field.

pub mod barrier;
pub mod cap;
pub mod flux;
pub mod qfield;
pub mod theta;

pub use barrier::{barrier_constants, barrier_formula, BarrierConstants};
pub use cap::{spherical_cap_oracle, CapOracle};
pub use flux::{flux_analysis, ExactRadial, FluxAnalysis, RadialODE};
pub use qfield::{q_field, q_field_checked, QField};
pub use theta::{theta_identity_residual, ThetaResidual};

use crate::discretization::{node_jet, Grid};
use crate::problems::PMCProblem;

/// The mean curvature the data prescribe at node p: −F + (φ + tu)/ω.
pub(crate) fn prescribed_curvature(problem: &PMCProblem, grid: &Grid, u: &[f64], p: usize) -> f64 {
    let jet = node_jet(grid, u, p);
    let x = &grid.coords[p];
    let xv = jet.x_vec();
    let r = 1.0 / jet.omega;
    -(problem.big_f)(x, &xv, r) + ((problem.phi)(x, u[p], &xv, r) + problem.t * u[p]) * r
}
