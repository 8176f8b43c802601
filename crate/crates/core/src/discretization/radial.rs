use std::fmt;
use std::sync::Arc;

use crate::error::{PmcError, Result};
use crate::geometry::{MetricKind, Warp};
use crate::problems::{DomainChart, PMCProblem, Shape};
use crate::quad::adaptive_simpson;

/// Absolute tolerance for the cumulative flux quadrature.
pub const FLUX_TOL: f64 = 1e-10;

/// Flux form (J·u′/ω)′ = J·RHS of a rotationally symmetric problem on
/// [0, r_max], J = h^{n−1}.
#[derive(Clone)]
pub struct RadialODE {
    pub dim: usize,
    pub r_max: f64,
    pub warp: Warp,
    pub rhs: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for RadialODE {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialODE").field("dim", &self.dim).field("r_max", &self.r_max).finish()
    }
}

impl RadialODE {
    pub fn new(dim: usize, r_max: f64, warp: Warp, rhs: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        RadialODE { dim, r_max, warp, rhs: Arc::new(rhs) }
    }

    pub fn j(&self, r: f64) -> f64 {
        self.warp.value(r).powi(self.dim as i32 - 1)
    }

    /// Φ(r) = ∫₀ʳ J·RHS.
    pub fn phi(&self, r: f64) -> f64 {
        adaptive_simpson(&|s: f64| self.j(s) * (self.rhs)(s), 0.0, r, FLUX_TOL)
    }

    /// Φ/J, continued by its limit 0 at the pole.
    pub fn ratio(&self, r: f64) -> f64 {
        if r <= 0.0 {
            0.0
        } else {
            self.phi(r) / self.j(r)
        }
    }

    /// u′ = Φ/√(J² − Φ²) wherever |Φ| < J.
    pub fn slope(&self, r: f64) -> f64 {
        let q = self.ratio(r);
        q / (1.0 - q * q).sqrt()
    }
}

/// Reduces div(Du/ω) = H(r) on a centered ball of a spherically warped (or
/// Euclidean) chart to its radial flux form.
pub fn radial_reduce(problem: &PMCProblem, domain: &DomainChart) -> Result<RadialODE> {
    let rhs = match (&problem.radial_source, problem.phi_is_zero) {
        (Some(h), true) => h.clone(),
        _ => return Err(PmcError::NotRadial),
    };
    if problem.t != 0.0 {
        return Err(PmcError::NotRadial);
    }
    let r_max = match &domain.shape {
        Shape::PolarCap { r_max } => *r_max,
        Shape::Disk { center, radius } if center.iter().all(|c| *c == 0.0) => *radius,
        _ => return Err(PmcError::NotRadial),
    };
    let warp = match &domain.metric.kind {
        MetricKind::Euclidean => Warp::Identity,
        MetricKind::SphericalWarped(w) => w.clone(),
        _ => return Err(PmcError::NotRadial),
    };
    Ok(RadialODE { dim: domain.dim(), r_max, warp, rhs })
}
