//! Prescribed-mean-curvature graphs over Riemannian chart domains.
//!
//! The crate solves the Dirichlet problem
//!
//!   −div(Du/ω) − F(x, −Du/ω, 1/ω) + φ(x, u, −Du/ω, 1/ω)/ω = 0,  ω = √(1 + |Du|²),
//!
//! by damped Newton on the regularized family with an added t·u/ω term and
//! continuation t → 0, and flags the sets where u_t diverges.

pub mod cli;
pub mod discretization;
pub mod error;
pub mod exec;
pub mod geometry;
pub mod oracles;
pub mod problems;
pub mod quad;
pub mod solver;

pub use error::{PmcError, Result};
pub use exec::Exec;
