use nalgebra::DVector;

use crate::discretization::grid::{Layout, NodeStencil, E, W};
use crate::discretization::local::{comp_gradient, face_gradient, flux_divergence, node_hessian_frame};
use crate::discretization::{node_jet, Field};
use crate::error::{PmcError, Result};
use crate::geometry::MetricKind;
use crate::problems::PMCProblem;

use super::prescribed_curvature;

/// Pointwise residual of ΔΘ + (|A|² + Ric(ν, ν))Θ + ⟨∇H, ∇u⟩ = 0 on the
/// graph, Θ = 1/ω, evaluated on the nodes whose whole stencil is interior.
#[derive(Clone, Debug)]
pub struct ThetaResidual {
    /// Zero off the mask.
    pub residual: Field,
    pub mask: Vec<bool>,
    pub max_abs: f64,
}

fn raise(ginv: &[f64; 3], g: [f64; 2]) -> [f64; 2] {
    [ginv[0] * g[0] + ginv[1] * g[1], ginv[1] * g[0] + ginv[2] * g[1]]
}

/// √G·ω·(g⁻¹∇Θ)^normal at a face, g = G + du⊗du the induced metric.
fn theta_flux(s: &NodeStencil, u: &[f64], theta: &[f64], p: usize, face: usize) -> f64 {
    let du = face_gradient(s, u, p, face);
    let dt = face_gradient(s, theta, p, face);
    let ginv = &s.face_ginv[face];
    let w = raise(ginv, du);
    let omega2 = 1.0 + w[0] * du[0] + w[1] * du[1];
    let up = raise(ginv, dt);
    let wd = (w[0] * dt[0] + w[1] * dt[1]) / omega2;
    let k = if face == E || face == W { 0 } else { 1 };
    s.face_sqrt_g[face] * omega2.sqrt() * (up[k] - w[k] * wd)
}

/// Evaluates the Θ identity on a 2D structured grid. The Ricci term uses the
/// closed-form curvature of analytic metrics and vanishes on flat ones.
pub fn theta_identity_residual(problem: &PMCProblem, u: &Field) -> Result<ThetaResidual> {
    let grid = &u.grid;
    if matches!(grid.layout, Layout::Radial { .. }) {
        return Err(PmcError::Invalid("the theta identity needs a two-dimensional grid".into()));
    }
    let flat = matches!(grid.domain.metric.kind, MetricKind::Euclidean);
    let n = grid.n_nodes();
    let uv = &u.values;
    let theta: Vec<f64> = (0..n).map(|p| 1.0 / node_jet(grid, uv, p).omega).collect();
    let h: Vec<f64> = (0..n).map(|p| prescribed_curvature(problem, grid, uv, p)).collect();
    let mask: Vec<bool> = (0..n)
        .map(|p| match &grid.stencils[p] {
            Some(s) if !grid.is_pole(p) => s.nbr.iter().all(|&q| !grid.boundary[q] && !grid.is_pole(q)),
            _ => false,
        })
        .collect();
    if !mask.iter().any(|m| *m) {
        return Err(PmcError::Invalid("grid too coarse for the theta identity".into()));
    }
    let mut residual = vec![0.0; n];
    for p in (0..n).filter(|&p| mask[p]) {
        let s = grid.stencils[p].as_ref().unwrap();
        let geom = &grid.node_geom[p];
        let jet = node_jet(grid, uv, p);
        let lap = flux_divergence(s, geom.sqrt_g * jet.omega, |f| theta_flux(s, uv, &theta, p, f));
        let (gmat, du, hess) = node_hessian_frame(grid, uv, p);
        let a2 = crate::geometry::GraphGeometry::from_jet(&gmat, &du, &hess, 0.0).second_form_sq;
        let ric = if flat {
            0.0
        } else {
            let x = &grid.coords[p];
            let grad = DVector::from_vec(jet.grad.clone());
            (grad.transpose() * grid.domain.metric.ricci(x)? * &grad)[(0, 0)] / (jet.omega * jet.omega)
        };
        // ⟨∇H, ∇u⟩ in the induced metric: g^{ab} = G^{ab} − w^a w^b/ω²
        let dh = comp_gradient(grid, &h, p);
        let g = [du[0], du[1]];
        let w = raise(&geom.ginv, g);
        let wh = raise(&geom.ginv, dh);
        let omega2 = jet.omega * jet.omega;
        let cross = (g[0] * wh[0] + g[1] * wh[1]) - (w[0] * g[0] + w[1] * g[1]) * (w[0] * dh[0] + w[1] * dh[1]) / omega2;
        residual[p] = lap + (a2 + ric) * theta[p] + cross;
    }
    let max_abs = residual.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    Ok(ThetaResidual { residual: Field::from_values(grid.clone(), residual)?, mask, max_abs })
}
