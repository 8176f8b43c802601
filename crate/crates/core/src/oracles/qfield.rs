use crate::discretization::grid::{Layout, E, N, S, W};
use crate::discretization::local::comp_gradient;
use crate::discretization::{assemble_jacobian, node_jet, Field};
use crate::error::{PmcError, Result};
use crate::solver::{newton_tolerance, residual_norm, rounding_floor, NewtonOptions};

use super::prescribed_curvature;
use crate::problems::PMCProblem;

/// Q = Du/ω of a graph, with div Q checked against the prescribed curvature.
#[derive(Clone, Debug)]
pub struct QField {
    /// Chart components of Q at every node.
    pub q: Vec<Vec<f64>>,
    /// div Q − H on the mask, 0 elsewhere.
    pub div_residual: Field,
    pub mask: Vec<bool>,
    /// sup ⟨Q, Q⟩_σ over all nodes.
    pub sup_norm: f64,
    pub max_div_residual: f64,
}

impl QField {
    /// 1 − sup⟨Q, Q⟩: positive exactly when the field is subcritical.
    pub fn margin(&self) -> f64 {
        1.0 - self.sup_norm
    }
}

/// Builds Q and evaluates div Q by a centered nodal stencil (independent of
/// the face-flux operator used by the solver).
pub fn q_field(problem: &PMCProblem, u: &Field) -> Result<QField> {
    let grid = &u.grid;
    let uv = &u.values;
    let n = grid.n_nodes();
    let jets: Vec<_> = (0..n).map(|p| node_jet(grid, uv, p)).collect();
    let q: Vec<Vec<f64>> = jets.iter().map(|j| j.grad.iter().map(|g| g / j.omega).collect()).collect();
    // ⟨Q, Q⟩ = |Du|²/ω² = 1 − 1/ω²
    let sup_norm = jets.iter().map(|j| 1.0 - 1.0 / (j.omega * j.omega)).fold(0.0, f64::max);
    let mut mask = vec![false; n];
    let mut div = vec![0.0; n];
    match grid.layout {
        Layout::Radial { nr, dr, .. } => {
            let rd = grid.radial.as_ref().unwrap();
            let jq = |i: usize| rd.j_node[i] * q[i][0];
            for i in 1..nr.saturating_sub(1) {
                mask[i] = true;
                div[i] = (jq(i + 1) - jq(i - 1)) / (2.0 * dr * rd.j_node[i]);
            }
        }
        _ => {
            // √G·Q^a in computational coordinates
            let flux: Vec<[f64; 2]> = (0..n)
                .map(|p| {
                    let geom = &grid.node_geom[p];
                    if geom.sqrt_g == 0.0 {
                        return [0.0, 0.0];
                    }
                    let g = comp_gradient(grid, uv, p);
                    let gi = &geom.ginv;
                    let up = [gi[0] * g[0] + gi[1] * g[1], gi[1] * g[0] + gi[2] * g[1]];
                    [geom.sqrt_g * up[0] / jets[p].omega, geom.sqrt_g * up[1] / jets[p].omega]
                })
                .collect();
            for p in 0..n {
                let Some(s) = &grid.stencils[p] else { continue };
                if grid.is_pole(p) || s.nbr[..4].iter().any(|&k| grid.boundary[k]) {
                    continue;
                }
                mask[p] = true;
                let nb = &s.nbr;
                div[p] = ((flux[nb[E]][0] - flux[nb[W]][0]) / (2.0 * s.d[0])
                    + (flux[nb[N]][1] - flux[nb[S]][1]) / (2.0 * s.d[1]))
                    / grid.node_geom[p].sqrt_g;
            }
        }
    }
    for p in (0..n).filter(|&p| mask[p]) {
        div[p] -= prescribed_curvature(problem, grid, uv, p);
    }
    let max_div_residual = div.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    Ok(QField { q, div_residual: Field::from_values(grid.clone(), div)?, mask, sup_norm, max_div_residual })
}

/// [`q_field`] for a claimed solution: fails with NotASolution when the
/// discrete residual exceeds ten times the Newton acceptance level.
pub fn q_field_checked(problem: &PMCProblem, u: &Field) -> Result<QField> {
    let r = residual_norm(problem, u)?;
    let tol = newton_tolerance(problem, u, &NewtonOptions::default());
    if r > 10.0 * tol {
        let floor = rounding_floor(&assemble_jacobian(problem, u)?.jacobian, u);
        if r > 10.0 * tol.max(floor) {
            return Err(PmcError::NotASolution(r));
        }
    }
    q_field(problem, u)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::discretization::Grid;
    use crate::geometry::ChartMetric;
    use crate::oracles::spherical_cap_oracle;
    use crate::problems::{make_cmc, DomainChart, Shape};
    use approx::assert_abs_diff_eq;

    fn polar(nr: usize) -> Arc<Grid> {
        let d = DomainChart::new(ChartMetric::euclidean(2), Shape::disk(1.0));
        Arc::new(Grid::polar(d, nr, 32).unwrap())
    }

    #[test]
    fn constant_field() {
        let u = Field::from_fn(polar(8), |_| 1.5);
        let q = q_field(&make_cmc(0.7), &u).unwrap();
        assert_eq!(q.sup_norm, 0.0);
        assert!(q.q.iter().flatten().all(|c| c.abs() < 1e-14));
        for p in (0..u.grid.n_nodes()).filter(|&p| q.mask[p]) {
            assert_abs_diff_eq!(q.div_residual.values[p], -0.7, epsilon = 1e-14);
        }
    }

    #[test]
    fn cap_field_is_x_over_r() {
        let cap = spherical_cap_oracle(2.0, 1.0, 2);
        let errs: Vec<f64> = [16, 32, 64]
            .iter()
            .map(|&nr| {
                let g = polar(nr);
                let u = Field::from_fn(g.clone(), |x| cap.u(x));
                let q = q_field(&cap.problem(), &u).unwrap();
                if nr == 64 {
                    let p = g.nearest_node(&[0.5, 0.0]);
                    assert_abs_diff_eq!(q.q[p][0], 0.25, epsilon = 1e-3);
                    assert_abs_diff_eq!(q.sup_norm, 0.25, epsilon = 1e-2);
                }
                q.max_div_residual
            })
            .collect();
        assert!(errs[0] / errs[1] > 3.0 && errs[1] / errs[2] > 3.0, "{errs:?}");
    }

    #[test]
    fn radial_layout() {
        let d = DomainChart::new(ChartMetric::euclidean(2), Shape::disk(1.0));
        let g = Arc::new(Grid::radial(d, 200).unwrap());
        let cap = spherical_cap_oracle(2.0, 1.0, 2);
        let u = Field::from_fn(g, |x| cap.u(x));
        let q = q_field(&cap.problem(), &u).unwrap();
        assert!(q.max_div_residual < 1e-4, "{}", q.max_div_residual);
        assert!(q.margin() > 0.7);
    }

    #[test]
    fn checked_variant_rejects_non_solutions() {
        let u = Field::from_fn(polar(8), |_| 0.0);
        assert!(matches!(q_field_checked(&make_cmc(1.0).with_constant_psi(0.0), &u), Err(PmcError::NotASolution(_))));
    }
}
