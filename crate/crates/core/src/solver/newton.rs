use crate::discretization::{assemble_jacobian_with, assemble_residual_with, Field, SparseMatrix};
use crate::error::{PmcError, Result};
use crate::exec::Exec;
use crate::problems::PMCProblem;

#[derive(Clone, Copy, Debug)]
pub struct NewtonOptions {
    /// Absolute tolerance before scaling by 1 + data scale.
    pub tol: f64,
    pub max_iterations: usize,
    pub max_backtracks: usize,
    pub backtrack_factor: f64,
    pub sufficient_decrease: f64,
    pub exec: Exec,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            tol: 1e-10,
            max_iterations: 60,
            max_backtracks: 30,
            backtrack_factor: 0.5,
            sufficient_decrease: 1e-4,
            exec: Exec::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct NewtonResult {
    pub u: Field,
    pub iterations: usize,
    /// ∞-norm of the residual over the unknowns.
    pub residual: f64,
}

/// Magnitude of the data: max|ψ| on the boundary plus max|F| + |φ| at
/// (z, X, r) = (0, 0, 1) over the nodes.
pub fn data_scale(problem: &PMCProblem, u: &Field) -> f64 {
    let grid = &u.grid;
    let dim = grid.domain.dim();
    let zero = vec![0.0; dim];
    grid.coords
        .iter()
        .enumerate()
        .map(|(p, x)| {
            let psi = if grid.boundary[p] { problem.psi_at(x).abs() } else { 0.0 };
            psi + (problem.big_f)(x, &zero, 1.0).abs() + (problem.phi)(x, 0.0, &zero, 1.0).abs()
        })
        .fold(0.0, f64::max)
}

pub fn newton_tolerance(problem: &PMCProblem, u: &Field, opts: &NewtonOptions) -> f64 {
    opts.tol * (1.0 + data_scale(problem, u))
}

fn interior_norms(r: &Field) -> (f64, f64) {
    let grid = &r.grid;
    let (mut inf, mut two) = (0.0f64, 0.0);
    for &p in &grid.unknowns {
        inf = inf.max(r.values[p].abs());
        two += r.values[p] * r.values[p];
    }
    (inf, two.sqrt())
}

/// Residual ∞-norm over the unknowns, together with the mismatch of the
/// boundary nodes against ψ.
pub fn residual_norm(problem: &PMCProblem, u: &Field) -> Result<f64> {
    let r = interior_norms(&assemble_residual_with(problem, u, Exec::default())?).0;
    Ok(r.max(u.boundary_mismatch(problem)))
}

/// Residual noise from rounding the unknowns: 8ε·max_i Σ_j |J_ij|·max(1, |u_j|).
/// Below it no Newton step can make progress; on coarse grids it sits far
/// under the tolerance and never triggers.
pub fn rounding_floor(jacobian: &SparseMatrix, u: &Field) -> f64 {
    let x = u.unknowns();
    (0..jacobian.n)
        .map(|i| jacobian.row(i).map(|(j, v)| v.abs() * x[j].abs().max(1.0)).sum::<f64>())
        .fold(0.0, f64::max)
        * 8.0
        * f64::EPSILON
}

pub fn newton_solve(problem: &PMCProblem, u_init: &Field) -> Result<Field> {
    newton_solve_with(problem, u_init, &NewtonOptions::default()).map(|r| r.u)
}

/// Damped Newton with Armijo backtracking on the residual 2-norm.
pub fn newton_solve_with(problem: &PMCProblem, u_init: &Field, opts: &NewtonOptions) -> Result<NewtonResult> {
    let mut u = u_init.clone();
    u.pin_boundary(problem);
    u.check_finite()?;
    let tol = newton_tolerance(problem, &u, opts);
    let mut res = assemble_residual_with(problem, &u, opts.exec)?;
    let (mut inf, mut two) = interior_norms(&res);
    for it in 0..opts.max_iterations {
        if inf <= tol {
            return Ok(NewtonResult { u, iterations: it, residual: inf });
        }
        let sys = assemble_jacobian_with(problem, &u, opts.exec)?;
        if inf <= rounding_floor(&sys.jacobian, &u) {
            log::debug!("newton it {it}: residual {inf:.3e} at the rounding floor");
            return Ok(NewtonResult { u, iterations: it, residual: inf });
        }
        let rhs: Vec<f64> = u.grid.unknowns.iter().map(|&p| -res.values[p]).collect();
        let delta = sys.jacobian.solve(&rhs)?;
        let base = u.unknowns();
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_backtracks {
            let mut trial = u.clone();
            let x: Vec<f64> = base.iter().zip(&delta).map(|(a, d)| a + lambda * d).collect();
            trial.set_unknowns(&x);
            if let Ok(r) = assemble_residual_with(problem, &trial, opts.exec) {
                let (ti, tt) = interior_norms(&r);
                if tt <= (1.0 - opts.sufficient_decrease * lambda) * two || ti <= tol {
                    accepted = Some((trial, r, ti, tt));
                    break;
                }
            }
            lambda *= opts.backtrack_factor;
        }
        match accepted {
            Some((trial, r, ti, tt)) => {
                log::debug!("newton it {it}: |R|inf {ti:.3e}, step {lambda}");
                u = trial;
                res = r;
                inf = ti;
                two = tt;
            }
            None => return Err(PmcError::NewtonStall { iterations: it + 1, residual: inf }),
        }
    }
    if inf <= tol {
        Ok(NewtonResult { u, iterations: opts.max_iterations, residual: inf })
    } else {
        Err(PmcError::NewtonStall { iterations: opts.max_iterations, residual: inf })
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::discretization::Grid;
    use crate::geometry::ChartMetric;
    use crate::problems::{make_cmc, make_custom, DomainChart, Shape};

    fn disk(nr: usize) -> Arc<Grid> {
        Arc::new(Grid::polar(DomainChart::new(ChartMetric::euclidean(2), Shape::disk(1.0)), nr, 2 * nr).unwrap())
    }

    #[test]
    fn minimal_zero_data_gives_zero() {
        let p = make_cmc(0.0).with_constant_psi(0.0);
        let u = newton_solve(&p, &Field::from_fn(disk(8), |x| 0.1 * x[0])).unwrap();
        assert!(u.sup_abs() < 1e-10);
    }

    #[test]
    fn linear_zeroth_order_on_torus_gives_zero() {
        let g = Arc::new(Grid::periodic(DomainChart::new(ChartMetric::euclidean(2), Shape::BoxPeriodic { length: 1.0 }), 12).unwrap());
        let p = make_custom(0.0, 1.0, Arc::new(|_| 0.0));
        let u0 = Field::from_fn(g, |x| (6.0 * x[0]).sin() * 0.2);
        let r = newton_solve_with(&p, &u0, &NewtonOptions::default()).unwrap();
        assert!(r.u.sup_abs() < 1e-9);
        assert!(r.residual <= 1e-10);
    }

    #[test]
    fn cap_center_value() {
        let p = make_cmc(1.0).with_psi(|x| -(4.0 - x[0] * x[0] - x[1] * x[1]).sqrt());
        let u = newton_solve(&p, &Field::from_fn(disk(16), |_| -3f64.sqrt())).unwrap();
        assert!((u.values[0] + 2.0).abs() < 2e-3, "u(0) = {}", u.values[0]);
    }
}
