//! Checks run on solved fields: ordering, barrier envelopes, gradient bounds.

use serde::{Deserialize, Serialize};

use super::newton::{newton_tolerance, residual_norm, NewtonOptions};
use crate::discretization::{node_jet, Field};
use crate::error::{PmcError, Result};
use crate::problems::PMCProblem;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    /// min over nodes of u1 − u2.
    pub min_difference: f64,
    pub tol_cmp: f64,
    pub pass: bool,
}

/// Tolerance for ordering/uniqueness of two solves: 10·tol_newton divided by
/// the monotonicity t + β of the zeroth-order term (or scaled by 1 + diam²
/// when that vanishes, a Poincaré-type bound for the pure divergence part).
pub fn comparison_tolerance(problem: &PMCProblem, u: &Field) -> f64 {
    let tol = newton_tolerance(problem, u, &NewtonOptions::default());
    let m = problem.t + problem.beta();
    if m > 0.0 {
        10.0 * tol / m
    } else {
        let d = u.grid.domain.diam();
        10.0 * tol * (1.0 + if d.is_finite() { d * d } else { 1.0 })
    }
}

/// Verifies u1 ≥ u2 − tol_cmp for solutions of `p1` and `p2`, which differ only
/// in their boundary data (ψ₁ ≥ ψ₂).
pub fn comparison_check(p1: &PMCProblem, u1: &Field, p2: &PMCProblem, u2: &Field) -> Result<ComparisonReport> {
    if !u1.same_layout(u2) {
        return Err(PmcError::LayoutMismatch("comparison needs fields on one grid".into()));
    }
    let (r1, r2) = (residual_norm(p1, u1)?, residual_norm(p2, u2)?);
    let opts = NewtonOptions::default();
    if r1 > newton_tolerance(p1, u1, &opts) || r2 > newton_tolerance(p2, u2, &opts) {
        return Err(PmcError::NotSolutions(r1, r2));
    }
    let min_difference = u1.values.iter().zip(&u2.values).map(|(a, b)| a - b).fold(f64::INFINITY, f64::min);
    let tol_cmp = comparison_tolerance(p1, u1).max(comparison_tolerance(p2, u2));
    Ok(ComparisonReport { min_difference, tol_cmp, pass: min_difference >= -tol_cmp })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BarrierReport {
    pub nodes_checked: usize,
    pub violations: usize,
    /// Largest amount by which u leaves the envelope (≤ 0 when contained).
    pub worst_violation: f64,
    pub pass: bool,
}

/// Checks ψ̃ − log(1+κd)/ν ≤ u ≤ ψ̃ + log(1+κd)/ν on the collar d ≤ d₀.
pub fn barrier_check(problem: &PMCProblem, u: &Field, kappa: f64, nu: f64, d0: f64) -> Result<BarrierReport> {
    barrier_check_with(problem, u, d0, |d| (kappa * d).ln_1p() / nu)
}

/// Checks |u − ψ̃| ≤ width(d) on the collar d ≤ d₀.
pub fn barrier_check_with(problem: &PMCProblem, u: &Field, d0: f64, width: impl Fn(f64) -> f64) -> Result<BarrierReport> {
    let grid = &u.grid;
    let domain = &grid.domain;
    if !domain.has_boundary() {
        return Err(PmcError::NoBoundary);
    }
    if d0 < grid.h() {
        return Err(PmcError::CollarEmpty);
    }
    let mut nodes_checked = 0;
    let mut violations = 0;
    let mut worst = f64::NEG_INFINITY;
    for (p, x) in grid.coords.iter().enumerate() {
        let d = domain.d(x).max(0.0);
        if d > d0 {
            continue;
        }
        nodes_checked += 1;
        let excess = (u.values[p] - problem.psi_at(x)).abs() - width(d);
        if excess > 1e-12 {
            violations += 1;
        }
        worst = worst.max(excess);
    }
    if nodes_checked == 0 {
        return Err(PmcError::CollarEmpty);
    }
    Ok(BarrierReport { nodes_checked, violations, worst_violation: worst, pass: violations == 0 })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientMonitor {
    pub max_grad: f64,
    pub location: Vec<f64>,
}

/// max |Du|_σ over the nodes in the chart ball B(center, radius).
pub fn gradient_monitor(u: &Field, center: &[f64], radius: f64) -> Result<GradientMonitor> {
    let grid = &u.grid;
    let domain = &grid.domain;
    let dim = domain.dim();
    if center.len() != dim || radius <= 0.0 {
        return Err(PmcError::Invalid("monitor ball must be a positive-radius ball of the chart".into()));
    }
    // the closed ball must lie in Ω̄ (its boundary may touch ∂Ω only on closed domains)
    if domain.has_boundary() {
        let probes = crate::problems::domain::unit_directions(dim, 64);
        if domain.d(center) < 0.0 || probes.iter().any(|v| {
            let y: Vec<f64> = center.iter().zip(v).map(|(c, e)| c + radius * e).collect();
            domain.d(&y) < -1e-12
        }) {
            return Err(PmcError::BallOutsideDomain);
        }
    }
    let mut best = GradientMonitor { max_grad: 0.0, location: center.to_vec() };
    let tol = 1e-12 * (1.0 + radius);
    for (p, x) in grid.coords.iter().enumerate() {
        let dist = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        if dist > radius + tol {
            continue;
        }
        let g = node_jet(grid, &u.values, p).grad_norm();
        if g > best.max_grad {
            best = GradientMonitor { max_grad: g, location: x.clone() };
        }
    }
    Ok(best)
}
