use serde::{Deserialize, Serialize};

use super::domain::{unit_directions, DomainChart};
use super::problem::PMCProblem;
use crate::error::{PmcError, Result};
use crate::geometry::ricci_min_estimate;

/// Tolerance for closed-form hypothesis checks.
pub const TOL_GEOM: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SerrinReport {
    pub holds: bool,
    pub worst_margin: f64,
    pub worst_point: Vec<f64>,
}

/// Samples H_∂Ω(y) − max{f(y, γ), −f(y, −γ)} over the boundary.
pub fn serrin_condition_check(problem: &PMCProblem, domain: &DomainChart, samples: usize) -> Result<SerrinReport> {
    let mut worst = SerrinReport { holds: true, worst_margin: f64::INFINITY, worst_point: vec![] };
    for y in domain.boundary_samples(samples)? {
        let g = domain.gamma(&y)?;
        let ng: Vec<f64> = g.iter().map(|v| -v).collect();
        let bound = problem.f(&y, &g).max(-problem.f(&y, &ng));
        let margin = domain.h_boundary(&y)? - bound;
        if margin < worst.worst_margin {
            worst.worst_margin = margin;
            worst.worst_point = y;
        }
    }
    worst.holds = worst.worst_margin >= -TOL_GEOM;
    Ok(worst)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NcfBranch {
    #[serde(rename = "2a")]
    A,
    #[serde(rename = "2b")]
    B,
    #[serde(rename = "none")]
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NcfReport {
    pub satisfied: bool,
    pub branch: NcfBranch,
    pub mu: f64,
    /// Condition (1): H_∂Ω is neither identically f(·, γ) nor −f(·, −γ).
    pub boundary_not_identical: bool,
    pub min_boundary_h: f64,
    pub min_ricci: f64,
}

/// Sufficient condition for the obstruction-free property:
/// (1) ∧ ((2a) H ≥ μ, Ric > −μ²/(n−1)  ∨  (2b) H > μ, Ric ≥ −μ²/(n−1)).
pub fn ncf_sufficient_check(problem: &PMCProblem, domain: &DomainChart) -> Result<NcfReport> {
    if !domain.metric.is_analytic() {
        return Err(PmcError::UnsupportedMetricKind("grid_sampled"));
    }
    let n = domain.dim();
    let metric = &domain.metric;
    let dirs = unit_directions(n, if n == 2 { 32 } else { 64 });
    let mut mu: f64 = 0.0;
    for x in domain.sample_points(64) {
        // σ-unit directions via the Cholesky factor: e = L^{-T} u for Euclidean-unit u
        let l = metric.components(&x).cholesky().expect("metric positive definite").l();
        let lt_inv = l.transpose().try_inverse().expect("invertible factor");
        for u in &dirs {
            let e = &lt_inv * nalgebra::DVector::from_column_slice(u);
            mu = mu.max(problem.f(&x, e.as_slice()).abs());
        }
    }
    let mut same_plus = true;
    let mut same_minus = true;
    let mut min_h = f64::INFINITY;
    for y in domain.boundary_samples(64)? {
        let g = domain.gamma(&y)?;
        let ng: Vec<f64> = g.iter().map(|v| -v).collect();
        let h = domain.h_boundary(&y)?;
        min_h = min_h.min(h);
        same_plus &= (h - problem.f(&y, &g)).abs() <= TOL_GEOM;
        same_minus &= (h + problem.f(&y, &ng)).abs() <= TOL_GEOM;
    }
    let ric = ricci_min_estimate(metric, domain, 64)?;
    let floor = -mu * mu / (n as f64 - 1.0);
    let cond1 = !same_plus && !same_minus;
    let a = min_h >= mu - TOL_GEOM && ric > floor + TOL_GEOM;
    let b = min_h > mu + TOL_GEOM && ric >= floor - TOL_GEOM;
    let branch = if a {
        NcfBranch::A
    } else if b {
        NcfBranch::B
    } else {
        NcfBranch::None
    };
    Ok(NcfReport {
        satisfied: cond1 && branch != NcfBranch::None,
        branch,
        mu,
        boundary_not_identical: cond1,
        min_boundary_h: min_h,
        min_ricci: ric,
    })
}
