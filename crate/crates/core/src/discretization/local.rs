//! Node-local stencil evaluations shared by assembly and diagnostics.

use nalgebra::{DMatrix, DVector};

use super::grid::{Grid, Layout, NodeStencil, E, N, NE, NW, S, SE, SW, W};

/// Computational gradient of u at a face of an interior node.
#[inline]
pub(crate) fn face_gradient(s: &NodeStencil, u: &[f64], p: usize, face: usize) -> [f64; 2] {
    let n = &s.nbr;
    let [d1, d2] = s.d;
    match face {
        E => [(u[n[E]] - u[p]) / d1, ((u[n[N]] - u[n[S]]) + (u[n[NE]] - u[n[SE]])) / (4.0 * d2)],
        W => [(u[p] - u[n[W]]) / d1, ((u[n[N]] - u[n[S]]) + (u[n[NW]] - u[n[SW]])) / (4.0 * d2)],
        N => [((u[n[E]] - u[n[W]]) + (u[n[NE]] - u[n[NW]])) / (4.0 * d1), (u[n[N]] - u[p]) / d2],
        _ => [((u[n[E]] - u[n[W]]) + (u[n[SE]] - u[n[SW]])) / (4.0 * d1), (u[p] - u[n[S]]) / d2],
    }
}

#[inline]
fn raise(ginv: &[f64; 3], g: [f64; 2]) -> [f64; 2] {
    [ginv[0] * g[0] + ginv[1] * g[1], ginv[1] * g[0] + ginv[2] * g[1]]
}

/// √G·(G⁻¹∇u/ω)^normal at a face: the graph flux through it.
#[inline]
pub(crate) fn face_flux(s: &NodeStencil, u: &[f64], p: usize, face: usize) -> f64 {
    let g = face_gradient(s, u, p, face);
    let up = raise(&s.face_ginv[face], g);
    let omega = (1.0 + up[0] * g[0] + up[1] * g[1]).sqrt();
    let comp = if face == E || face == W { up[0] } else { up[1] };
    s.face_sqrt_g[face] * comp / omega
}

/// Generic flux-form divergence with a per-face flux function.
#[inline]
pub(crate) fn flux_divergence(s: &NodeStencil, sqrt_g: f64, flux: impl Fn(usize) -> f64) -> f64 {
    ((flux(E) - flux(W)) / s.d[0] + (flux(N) - flux(S)) / s.d[1]) / sqrt_g
}

/// div(Du/ω) at node p by the compact flux stencil (the assembly operator).
pub(crate) fn mean_curvature(grid: &Grid, u: &[f64], p: usize) -> f64 {
    if grid.is_pole(p) {
        let pole = grid.pole.as_ref().unwrap();
        let total: f64 = pole
            .ring
            .iter()
            .map(|&q| face_flux(grid.stencils[q].as_ref().unwrap(), u, q, W))
            .sum();
        return total * pole.dtheta / pole.volume;
    }
    if let Some(rd) = &grid.radial {
        let dr = rd.dr;
        let flux = |i: usize| {
            let g = (u[i + 1] - u[i]) / dr;
            rd.j_face[i] * g / (1.0 + g * g).sqrt()
        };
        return if p == 0 { flux(0) / rd.pole_volume } else { (flux(p) - flux(p - 1)) / (dr * rd.j_node[p]) };
    }
    let s = grid.stencils[p].as_ref().expect("interior node");
    flux_divergence(s, grid.node_geom[p].sqrt_g, |f| face_flux(s, u, p, f))
}

/// First-order jet of u at a node, in chart coordinates.
#[derive(Clone, Debug)]
pub struct NodeJet {
    /// Chart covector du.
    pub du: Vec<f64>,
    /// σ⁻¹du (chart vector).
    pub grad: Vec<f64>,
    pub omega: f64,
}

impl NodeJet {
    /// X = −Du/ω as a chart vector.
    pub fn x_vec(&self) -> Vec<f64> {
        self.grad.iter().map(|g| -g / self.omega).collect()
    }

    pub fn grad_norm(&self) -> f64 {
        (self.omega * self.omega - 1.0).max(0.0).sqrt()
    }
}

/// Computational gradient at any node of a 2D structured grid: centered in
/// the interior, one-sided second order across Dirichlet edges.
pub(crate) fn comp_gradient(grid: &Grid, u: &[f64], p: usize) -> [f64; 2] {
    if let Some(s) = &grid.stencils[p] {
        let n = &s.nbr;
        return [(u[n[E]] - u[n[W]]) / (2.0 * s.d[0]), (u[n[N]] - u[n[S]]) / (2.0 * s.d[1])];
    }
    match grid.layout {
        Layout::Polar { r_inner, nr, ntheta, .. } => {
            let has_pole = r_inner == 0.0;
            let base = usize::from(has_pole);
            let (ring, j) = ((p - base) / ntheta + usize::from(has_pole), (p - base) % ntheta);
            let id = |i: usize, j: usize| base + (i - usize::from(has_pole)) * ntheta + j % ntheta;
            let dr = grid.h();
            let dth = 2.0 * std::f64::consts::PI / ntheta as f64;
            let gr = if ring == nr {
                (3.0 * u[p] - 4.0 * u[id(nr - 1, j)] + u[id(nr - 2, j)]) / (2.0 * dr)
            } else {
                (-3.0 * u[p] + 4.0 * u[id(1, j)] + -u[id(2, j)]) / (2.0 * dr)
            };
            let gt = (u[id(ring, j + 1)] - u[id(ring, j + ntheta - 1)]) / (2.0 * dth);
            [gr, gt]
        }
        Layout::Grid2d { nx, ny, h, .. } => {
            let (i, j) = (p % nx, p / nx);
            let id = |i: usize, j: usize| j * nx + i;
            let along = |c: usize, n: usize, f: &dyn Fn(usize) -> f64| -> f64 {
                if c == 0 {
                    (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2.0 * h)
                } else if c == n - 1 {
                    (3.0 * f(n - 1) - 4.0 * f(n - 2) + f(n - 3)) / (2.0 * h)
                } else {
                    (f(c + 1) - f(c - 1)) / (2.0 * h)
                }
            };
            [along(i, nx, &|k| u[id(k, j)]), along(j, ny, &|k| u[id(i, k)])]
        }
        _ => unreachable!("structured 2D layouts only"),
    }
}

/// Jet of u at node p.
pub fn node_jet(grid: &Grid, u: &[f64], p: usize) -> NodeJet {
    if let Some(rd) = &grid.radial {
        let nr = rd.j_node.len() - 1;
        let g = if p == 0 {
            0.0
        } else if p == nr {
            (3.0 * u[p] - 4.0 * u[p - 1] + u[p - 2]) / (2.0 * rd.dr)
        } else {
            (u[p + 1] - u[p - 1]) / (2.0 * rd.dr)
        };
        let mut du = vec![0.0; grid.domain.dim()];
        du[0] = g;
        return NodeJet { grad: du.clone(), du, omega: (1.0 + g * g).sqrt() };
    }
    if grid.is_pole(p) {
        let pole = grid.pole.as_ref().unwrap();
        let m = pole.ring.len() as f64;
        let (mut ux, mut uy) = (0.0, 0.0);
        for (k, &q) in pole.ring.iter().enumerate() {
            ux += u[q] * pole.cos[k];
            uy += u[q] * pole.sin[k];
        }
        let du = DVector::from_vec(vec![2.0 * ux / (m * pole.dr), 2.0 * uy / (m * pole.dr)]);
        let up = &pole.sigma_inv * &du;
        let omega = (1.0 + du.dot(&up)).sqrt();
        return NodeJet { du: du.as_slice().to_vec(), grad: up.as_slice().to_vec(), omega };
    }
    let geom = &grid.node_geom[p];
    let g = comp_gradient(grid, u, p);
    let up = raise(&geom.ginv, g);
    let omega = (1.0 + up[0] * g[0] + up[1] * g[1]).sqrt();
    let j = &geom.jac;
    // grad (vector) pushes forward by J; du (covector) pulls back by J^{-T}
    let grad = vec![j[0][0] * up[0] + j[1][0] * up[1], j[0][1] * up[0] + j[1][1] * up[1]];
    let det = j[0][0] * j[1][1] - j[1][0] * j[0][1];
    let du = vec![(j[1][1] * g[0] - j[0][1] * g[1]) / det, (-j[1][0] * g[0] + j[0][0] * g[1]) / det];
    NodeJet { du, grad, omega }
}

/// Second-order jet: σ (or G), du and covariant Hessian in one coordinate
/// frame at node p, for the graph geometry.
pub(crate) fn node_hessian_frame(grid: &Grid, u: &[f64], p: usize) -> (DMatrix<f64>, DVector<f64>, DMatrix<f64>) {
    if let Some(rd) = &grid.radial {
        let dim = grid.domain.dim();
        let dr = rd.dr;
        let nr = rd.j_node.len() - 1;
        let r = p as f64 * dr;
        let [h, dh, _] = rd.warp.jet(r);
        let (g1, g2) = if p == 0 {
            (0.0, 2.0 * (u[1] - u[0]) / (dr * dr))
        } else if p == nr {
            ((3.0 * u[p] - 4.0 * u[p - 1] + u[p - 2]) / (2.0 * dr), (2.0 * u[p] - 5.0 * u[p - 1] + 4.0 * u[p - 2] - u[p - 3]) / (dr * dr))
        } else {
            ((u[p + 1] - u[p - 1]) / (2.0 * dr), (u[p + 1] - 2.0 * u[p] + u[p - 1]) / (dr * dr))
        };
        // orthonormal frame (∂_r, tangential unit vectors): Hess = diag(u'', (h'/h)u')
        let tang = if p == 0 { g2 } else { dh / h * g1 };
        let mut hess = DMatrix::from_element(dim, dim, 0.0);
        hess[(0, 0)] = g2;
        for k in 1..dim {
            hess[(k, k)] = tang;
        }
        let mut du = DVector::zeros(dim);
        du[0] = g1;
        return (DMatrix::identity(dim, dim), du, hess);
    }
    if grid.is_pole(p) {
        let pole = grid.pole.as_ref().unwrap();
        let m = pole.ring.len() as f64;
        let dr = pole.dr;
        let (mut mean, mut c1, mut s1, mut c2, mut s2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (k, &q) in pole.ring.iter().enumerate() {
            let (c, s) = (pole.cos[k], pole.sin[k]);
            mean += u[q] / m;
            c1 += 2.0 * u[q] * c / m;
            s1 += 2.0 * u[q] * s / m;
            c2 += 2.0 * u[q] * (c * c - s * s) / m;
            s2 += 2.0 * u[q] * (2.0 * s * c) / m;
        }
        let lap = 4.0 * (mean - u[p]) / (dr * dr);
        let diff = 4.0 * c2 / (dr * dr);
        let uxy = 2.0 * s2 / (dr * dr);
        let du = DVector::from_vec(vec![c1 / dr, s1 / dr]);
        let mut hess = DMatrix::from_row_slice(2, 2, &[0.5 * (lap + diff), uxy, uxy, 0.5 * (lap - diff)]);
        let gam = grid.domain.metric.christoffel(&grid.coords[p]);
        for a in 0..2 {
            for b in 0..2 {
                hess[(a, b)] -= (0..2).map(|c| gam[c][(a, b)] * du[c]).sum::<f64>();
            }
        }
        return (pole.sigma.clone(), du, hess);
    }
    let s = grid.stencils[p].as_ref().expect("interior node");
    let geom = &grid.node_geom[p];
    let n = &s.nbr;
    let [d1, d2] = s.d;
    let g = comp_gradient(grid, u, p);
    let u11 = (u[n[E]] - 2.0 * u[p] + u[n[W]]) / (d1 * d1);
    let u22 = (u[n[N]] - 2.0 * u[p] + u[n[S]]) / (d2 * d2);
    let u12 = (u[n[NE]] - u[n[NW]] - u[n[SE]] + u[n[SW]]) / (4.0 * d1 * d2);
    let gm = &geom.gamma;
    let cov = |raw: f64, k: usize| raw - gm[0][k] * g[0] - gm[1][k] * g[1];
    let hess = DMatrix::from_row_slice(2, 2, &[cov(u11, 0), cov(u12, 1), cov(u12, 1), cov(u22, 2)]);
    let gmat = DMatrix::from_row_slice(2, 2, &[geom.g[0], geom.g[1], geom.g[1], geom.g[2]]);
    (gmat, DVector::from_vec(g.to_vec()), hess)
}

/// Graph quantities (ω, normal, induced metric, |A|², H) at an interior node.
pub fn graph_geometry(u: &super::Field, p: usize) -> crate::geometry::GraphGeometry {
    let (sigma, du, hess) = node_hessian_frame(&u.grid, &u.values, p);
    crate::geometry::GraphGeometry::from_jet(&sigma, &du, &hess, mean_curvature(&u.grid, &u.values, p))
}

/// Max |Du|_σ over all nodes.
pub fn sup_gradient(u: &super::Field) -> f64 {
    (0..u.grid.n_nodes()).map(|p| node_jet(&u.grid, &u.values, p).grad_norm()).fold(0.0, f64::max)
}
