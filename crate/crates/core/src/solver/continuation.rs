//! The t → 0 continuation of the regularized problem.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::blowup::{detect_blow_up_sets, Level};
use super::bounds::{apriori_bounds, beta2};
use super::newton::{newton_solve_with, NewtonOptions};
use crate::discretization::{assemble_jacobian_with, graph_geometry, sup_gradient, Field, Grid};
use crate::error::{PmcError, Result};
use crate::problems::PMCProblem;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Schedule {
    pub t0: f64,
    pub ratio: f64,
    pub t_min: f64,
    /// Intermediate levels allowed between two scheduled ones after stalls.
    pub max_insertions: usize,
    /// sup|u_{t_k} − u_{t_{k+1}}| that counts as converged.
    pub converge_tol: f64,
    /// Further ratio steps below t_min before giving up on convergence.
    pub max_extra_levels: usize,
    /// End the run at the first confirmed blow-up; otherwise keep descending
    /// to t_min (or until Newton fails) and report the masks of the last levels.
    pub stop_at_blow_up: bool,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule { t0: 0.1, ratio: 0.5, t_min: 1e-6, max_insertions: 5, converge_tol: 1e-6, max_extra_levels: 12, stop_at_blow_up: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub t: f64,
    pub sup_u: f64,
    pub sup_grad: f64,
    /// None when the monitored set holds no nodes.
    pub max_a2: Option<f64>,
    pub newton_iters: usize,
    pub final_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    Converged,
    BlowUp,
    NewtonFailure { t: f64, reason: String },
}

impl Outcome {
    pub fn name(&self) -> &'static str {
        match self {
            Outcome::Converged => "converged",
            Outcome::BlowUp => "blow_up",
            Outcome::NewtonFailure { .. } => "newton_failure",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

impl BoundCheck {
    fn new(value: f64, bound: f64) -> Self {
        BoundCheck { value, bound, pass: value <= bound + 1e-8 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundChecks {
    /// sup|u| ≤ α₁ on Dirichlet problems with β > 0.
    pub alpha1: Option<BoundCheck>,
    /// sup|u| ≤ α₂ on closed domains with β > 0.
    pub alpha2: Option<BoundCheck>,
    /// max over levels of sup|t·u_t| ≤ β₂.
    pub tu_beta2: BoundCheck,
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub records: Vec<LevelRecord>,
    pub outcome: Outcome,
    pub omega_plus: Vec<bool>,
    pub omega_minus: Vec<bool>,
    pub bound_checks: BoundChecks,
    pub beta2: f64,
    /// Last solved field (the t = 0 polish when it ran).
    pub final_u: Field,
    /// The last (up to three) solved levels.
    pub levels: Vec<Level>,
}

impl SolveReport {
    pub fn omega_plus_cells(&self) -> usize {
        self.omega_plus.iter().filter(|b| **b).count()
    }

    pub fn omega_minus_cells(&self) -> usize {
        self.omega_minus.iter().filter(|b| **b).count()
    }

    /// Largest |t·u_t| over the recorded levels.
    pub fn max_tu(&self) -> f64 {
        self.records.iter().map(|r| r.t * r.sup_u).fold(0.0, f64::max)
    }
}

/// Max |A|² over interior nodes with d ≥ 0.1·diam(Ω) (all nodes on closed domains).
pub fn monitored_a2(u: &Field) -> Option<f64> {
    let grid = &u.grid;
    let domain = &grid.domain;
    let cut = if domain.has_boundary() { 0.1 * domain.diam() } else { f64::NEG_INFINITY };
    grid.unknowns
        .iter()
        .filter(|&&p| domain.d(&grid.coords[p]) >= cut)
        .map(|&p| graph_geometry(u, p).second_form_sq)
        .reduce(f64::max)
}

fn record(t: f64, u: &Field, iters: usize, residual: f64) -> LevelRecord {
    LevelRecord { t, sup_u: u.sup_abs(), sup_grad: sup_gradient(u), max_a2: monitored_a2(u), newton_iters: iters, final_residual: residual }
}

/// One Newton step of the t₀ problem from (0 inside, ψ on ∂Ω): the
/// linearized extension of the boundary data.
pub fn initial_guess(problem: &PMCProblem, grid: Arc<Grid>, t0: f64, opts: &NewtonOptions) -> Field {
    let p = problem.clone().with_t(t0);
    let u = Field::zeros(grid).with_boundary(&p);
    let step = assemble_jacobian_with(&p, &u, opts.exec).and_then(|sys| {
        let rhs: Vec<f64> = u.grid.unknowns.iter().map(|&q| -sys.residual.values[q]).collect();
        sys.jacobian.solve(&rhs)
    });
    match step {
        Ok(delta) => {
            let mut v = u.clone();
            v.set_unknowns(&delta.iter().zip(u.unknowns()).map(|(d, a)| a + d).collect::<Vec<_>>());
            v
        }
        Err(_) => u,
    }
}

pub fn continuation(problem: &PMCProblem, grid: Arc<Grid>, schedule: &Schedule) -> Result<SolveReport> {
    continuation_with(problem, grid, schedule, &NewtonOptions::default())
}

/// Warm-started Newton solves along t₀, t₀·ratio, …, inserting geometric means
/// on stalls. Stops at blow-up confirmation, convergence of u_t, or failure.
pub fn continuation_with(problem: &PMCProblem, grid: Arc<Grid>, schedule: &Schedule, opts: &NewtonOptions) -> Result<SolveReport> {
    if !(schedule.t0 > 0.0 && schedule.ratio > 0.0 && schedule.ratio < 1.0 && schedule.t_min > 0.0) {
        return Err(PmcError::Invalid("schedule needs t0 > 0, 0 < ratio < 1, t_min > 0".into()));
    }
    let domain = grid.domain.clone();
    if domain.has_boundary() && problem.psi.is_none() {
        return Err(PmcError::Invalid("Dirichlet problem without boundary data".into()));
    }
    let b2 = beta2(problem, &domain);
    let mut u = initial_guess(problem, grid.clone(), schedule.t0, opts);
    let mut records = Vec::new();
    let mut levels: Vec<Level> = Vec::new();
    let n = grid.n_nodes();
    let (mut plus, mut minus) = (vec![false; n], vec![false; n]);
    let mut target = schedule.t0;
    let mut t = target;
    let mut last_t: Option<f64> = None;
    let mut insertions = 0;
    let mut extra = 0;
    let mut blown_up = false;
    let outcome = loop {
        let p = problem.clone().with_t(t);
        match newton_solve_with(&p, &u, opts) {
            Ok(res) => {
                log::info!("t = {t:.4e}: {} newton iterations, sup|u| = {:.6e}", res.iterations, res.u.sup_abs());
                records.push(record(t, &res.u, res.iterations, res.residual));
                u = res.u;
                levels.push(Level { t, u: u.clone() });
                if levels.len() > 3 {
                    levels.remove(0);
                }
                last_t = Some(t);
                if levels.len() >= 3 {
                    let (pl, mi) = detect_blow_up_sets(&levels, b2)?;
                    let found = pl.iter().chain(&mi).any(|b| *b);
                    if found || blown_up {
                        plus = pl;
                        minus = mi;
                    }
                    blown_up |= found;
                    if blown_up && (schedule.stop_at_blow_up || t <= schedule.t_min * (1.0 + 1e-12)) {
                        break Outcome::BlowUp;
                    }
                }
                if levels.len() >= 2 && !blown_up {
                    let k = levels.len();
                    let diff = levels[k - 1].u.max_abs_diff(&levels[k - 2].u);
                    if diff <= schedule.converge_tol {
                        break Outcome::Converged;
                    }
                }
                if t < target {
                    // an inserted level: retry the scheduled one
                    t = target;
                    continue;
                }
                insertions = 0;
                if t <= schedule.t_min * (1.0 + 1e-12) {
                    extra += 1;
                    if extra > schedule.max_extra_levels {
                        break Outcome::NewtonFailure { t, reason: format!("u_t still changing at t = {t:.3e}") };
                    }
                }
                target = t * schedule.ratio;
                t = target;
            }
            Err(e @ (PmcError::NewtonStall { .. } | PmcError::SingularJacobian | PmcError::DivergedField)) => {
                insertions += 1;
                log::info!("t = {t:.4e}: {e}; inserting a level ({insertions})");
                if insertions > schedule.max_insertions {
                    if blown_up {
                        break Outcome::BlowUp;
                    }
                    break Outcome::NewtonFailure { t: target, reason: e.to_string() };
                }
                let upper = last_t.unwrap_or(target / schedule.ratio);
                t = (upper * t).sqrt();
            }
            Err(e) => return Err(e),
        }
    };
    let mut final_u = u;
    if outcome == Outcome::Converged && (domain.has_boundary() || problem.beta() > 0.0) {
        let p0 = problem.clone().with_t(0.0);
        match newton_solve_with(&p0, &final_u, opts) {
            Ok(res) => {
                records.push(record(0.0, &res.u, res.iterations, res.residual));
                final_u = res.u;
            }
            Err(e) => log::warn!("t = 0 polish failed ({e}); keeping the last level"),
        }
    }
    let tu = records.iter().map(|r| r.t * r.sup_u).fold(0.0, f64::max);
    let (mut alpha1, mut alpha2) = (None, None);
    if outcome == Outcome::Converged && problem.beta() > 0.0 {
        let ab = apriori_bounds(problem, &domain)?;
        let sup = final_u.sup_abs();
        if domain.has_boundary() {
            alpha1 = Some(BoundCheck::new(sup, ab.alpha1));
        } else {
            alpha2 = Some(BoundCheck::new(sup, ab.alpha2));
        }
    }
    Ok(SolveReport {
        records,
        outcome,
        omega_plus: plus,
        omega_minus: minus,
        bound_checks: BoundChecks { alpha1, alpha2, tu_beta2: BoundCheck::new(tu, b2) },
        beta2: b2,
        final_u,
        levels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ChartMetric;
    use crate::problems::{make_cmc, make_custom, DomainChart, Shape};

    fn disk(radius: f64, nr: usize) -> Arc<Grid> {
        Arc::new(Grid::polar(DomainChart::new(ChartMetric::euclidean(2), Shape::disk(radius)), nr, 2 * nr).unwrap())
    }

    #[test]
    fn small_disk_converges() {
        let p = make_cmc(1.0).with_constant_psi(0.0);
        let rep = continuation(&p, disk(0.5, 8), &Schedule::default()).unwrap();
        assert_eq!(rep.outcome, Outcome::Converged);
        assert!(rep.records.windows(2).all(|w| w[0].t > w[1].t));
        assert!(rep.bound_checks.tu_beta2.pass);
        assert_eq!(rep.omega_minus_cells() + rep.omega_plus_cells(), 0);
        assert_eq!(rep.records.last().unwrap().t, 0.0);
    }

    #[test]
    fn constant_data_converge_to_constant() {
        let p = make_cmc(0.0).with_constant_psi(3.0);
        let rep = continuation(&p, disk(1.0, 8), &Schedule::default()).unwrap();
        assert_eq!(rep.outcome, Outcome::Converged);
        assert!(rep.final_u.values.iter().all(|v| (v - 3.0).abs() <= 1e-6));
    }

    #[test]
    fn torus_monotone_problem_respects_alpha2() {
        let g = Arc::new(Grid::periodic(DomainChart::new(ChartMetric::euclidean(2), Shape::BoxPeriodic { length: 1.0 }), 12).unwrap());
        let p = make_custom(0.0, 1.0, Arc::new(|x: &[f64]| 0.5 * (2.0 * std::f64::consts::PI * x[0]).sin()));
        let rep = continuation(&p, g, &Schedule::default()).unwrap();
        assert_eq!(rep.outcome, Outcome::Converged);
        assert!(rep.bound_checks.alpha2.unwrap().pass);
    }
}
