use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{PmcError, Result};
use crate::geometry::metric::norm;
use crate::geometry::{ChartMetric, MetricKind, Warp};
use crate::problems::{DomainChart, Shape};

#[derive(Clone, Debug, PartialEq)]
pub enum Layout {
    /// Cartesian lattice with Dirichlet nodes on the outer ring.
    Grid2d { nx: usize, ny: usize, h: f64, origin: [f64; 2] },
    /// Cartesian lattice on the flat torus.
    Periodic { nx: usize, ny: usize, h: f64, origin: [f64; 2] },
    /// Boundary-fitted (r, θ) lattice. With r_inner = 0 node 0 is the pole.
    Polar { center: [f64; 2], r_inner: f64, r_outer: f64, nr: usize, ntheta: usize },
    /// Rotationally symmetric reduction on [0, r_max]; node 0 is the pole.
    Radial { nr: usize, dr: f64, dim: usize },
}

/// Compact nine-point flux stencil of an interior node in computational
/// coordinates ξ = (ξ1, ξ2) with metric G = Jᵀσ J.
#[derive(Clone, Debug)]
pub(crate) struct NodeStencil {
    /// E, W, N, S, NE, NW, SE, SW node ids.
    pub nbr: [usize; 8],
    pub d: [f64; 2],
    /// √det G and (G^11, G^12, G^22) at the E, W, N, S faces.
    pub face_sqrt_g: [f64; 4],
    pub face_ginv: [[f64; 3]; 4],
}

/// Metric data of a node in computational coordinates.
#[derive(Clone, Debug, Default)]
pub(crate) struct NodeGeom {
    pub sqrt_g: f64,
    pub g: [f64; 3],
    pub ginv: [f64; 3],
    /// Columns ∂x/∂ξ1, ∂x/∂ξ2.
    pub jac: [[f64; 2]; 2],
    /// Γ^c_11, Γ^c_12, Γ^c_22 of G for c = 1, 2.
    pub gamma: [[f64; 3]; 2],
}

pub(crate) const E: usize = 0;
pub(crate) const W: usize = 1;
pub(crate) const N: usize = 2;
pub(crate) const S: usize = 3;
pub(crate) const NE: usize = 4;
pub(crate) const NW: usize = 5;
pub(crate) const SE: usize = 6;
pub(crate) const SW: usize = 7;

#[derive(Clone, Debug)]
pub(crate) struct PoleData {
    pub ring: Vec<usize>,
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
    pub dr: f64,
    pub dtheta: f64,
    pub volume: f64,
    pub sigma: DMatrix<f64>,
    pub sigma_inv: DMatrix<f64>,
}

#[derive(Clone, Debug)]
pub(crate) struct RadialData {
    pub dr: f64,
    /// Area density J = h^{n−1} at nodes and at faces i+½.
    pub j_node: Vec<f64>,
    pub j_face: Vec<f64>,
    /// ∫_0^{dr/2} J.
    pub pole_volume: f64,
    pub warp: Warp,
}

/// A structured grid over a domain chart, with precomputed metric data.
#[derive(Clone, Debug)]
pub struct Grid {
    pub layout: Layout,
    pub domain: DomainChart,
    /// Chart coordinates of each node.
    pub coords: Vec<Vec<f64>>,
    pub boundary: Vec<bool>,
    /// Node ids of the unknowns, in solver order.
    pub unknowns: Vec<usize>,
    pub unknown_of: Vec<Option<usize>>,
    pub(crate) stencils: Vec<Option<NodeStencil>>,
    pub(crate) node_geom: Vec<NodeGeom>,
    pub(crate) pole: Option<PoleData>,
    pub(crate) radial: Option<RadialData>,
}

fn sym_inverse(g: [f64; 3]) -> ([f64; 3], f64) {
    let det = g[0] * g[2] - g[1] * g[1];
    ([g[2] / det, -g[1] / det, g[0] / det], det.sqrt())
}

impl Grid {
    pub fn n_nodes(&self) -> usize {
        self.coords.len()
    }

    pub fn n_unknowns(&self) -> usize {
        self.unknowns.len()
    }

    pub fn metric(&self) -> &ChartMetric {
        &self.domain.metric
    }

    pub fn is_pole(&self, p: usize) -> bool {
        self.pole.is_some() && p == 0 && matches!(self.layout, Layout::Polar { .. })
    }

    /// Representative mesh width.
    pub fn h(&self) -> f64 {
        match self.layout {
            Layout::Grid2d { h, .. } | Layout::Periodic { h, .. } => h,
            Layout::Polar { r_inner, r_outer, nr, .. } => (r_outer - r_inner) / nr as f64,
            Layout::Radial { dr, .. } => dr,
        }
    }

    /// Cartesian Dirichlet grid on a rectangle with nx × ny nodes.
    pub fn cartesian(domain: DomainChart, nx: usize, ny: usize) -> Result<Grid> {
        let Shape::Rectangle { lo, hi } = domain.shape else {
            return Err(PmcError::Invalid("cartesian grids need a rectangle".into()));
        };
        check_2d(&domain)?;
        if nx < 9 || ny < 9 {
            return Err(PmcError::Invalid("need at least 9 nodes per axis".into()));
        }
        let h = (hi[0] - lo[0]) / (nx - 1) as f64;
        if ((hi[1] - lo[1]) / (ny - 1) as f64 - h).abs() > 1e-12 * h {
            return Err(PmcError::Invalid("cartesian grid needs equal spacing".into()));
        }
        Ok(Self::lattice(domain, Layout::Grid2d { nx, ny, h, origin: lo }))
    }

    /// n × n grid on the flat torus [0, L)².
    pub fn periodic(domain: DomainChart, n: usize) -> Result<Grid> {
        let Shape::BoxPeriodic { length } = domain.shape else {
            return Err(PmcError::Invalid("periodic grids need a periodic box".into()));
        };
        check_2d(&domain)?;
        if n < 9 {
            return Err(PmcError::Invalid("need at least 9 nodes per axis".into()));
        }
        Ok(Self::lattice(domain, Layout::Periodic { nx: n, ny: n, h: length / n as f64, origin: [0.0, 0.0] }))
    }

    fn lattice(domain: DomainChart, layout: Layout) -> Grid {
        let (nx, ny, h, origin, periodic) = match layout {
            Layout::Grid2d { nx, ny, h, origin } => (nx, ny, h, origin, false),
            Layout::Periodic { nx, ny, h, origin } => (nx, ny, h, origin, true),
            _ => unreachable!(),
        };
        let metric = domain.metric.clone();
        let id = |i: isize, j: isize| -> usize {
            let (i, j) = (i.rem_euclid(nx as isize) as usize, j.rem_euclid(ny as isize) as usize);
            j * nx + i
        };
        let mut coords = Vec::with_capacity(nx * ny);
        let mut boundary = Vec::with_capacity(nx * ny);
        let mut stencils = Vec::with_capacity(nx * ny);
        let mut geom = Vec::with_capacity(nx * ny);
        let g_at = |x: f64, y: f64| {
            let s = metric.components(&[x, y]);
            [s[(0, 0)], s[(0, 1)], s[(1, 1)]]
        };
        for j in 0..ny {
            for i in 0..nx {
                let (x, y) = (origin[0] + i as f64 * h, origin[1] + j as f64 * h);
                coords.push(vec![x, y]);
                let node_g = g_at(x, y);
                let (ginv, sqrt_g) = sym_inverse(node_g);
                let gam = metric.christoffel(&[x, y]);
                geom.push(NodeGeom {
                    sqrt_g,
                    g: node_g,
                    ginv,
                    jac: [[1.0, 0.0], [0.0, 1.0]],
                    gamma: [
                        [gam[0][(0, 0)], gam[0][(0, 1)], gam[0][(1, 1)]],
                        [gam[1][(0, 0)], gam[1][(0, 1)], gam[1][(1, 1)]],
                    ],
                });
                let b = !periodic && (i == 0 || j == 0 || i == nx - 1 || j == ny - 1);
                boundary.push(b);
                if b {
                    stencils.push(None);
                    continue;
                }
                let (ii, jj) = (i as isize, j as isize);
                let nbr = [
                    id(ii + 1, jj),
                    id(ii - 1, jj),
                    id(ii, jj + 1),
                    id(ii, jj - 1),
                    id(ii + 1, jj + 1),
                    id(ii - 1, jj + 1),
                    id(ii + 1, jj - 1),
                    id(ii - 1, jj - 1),
                ];
                let faces = [(x + 0.5 * h, y), (x - 0.5 * h, y), (x, y + 0.5 * h), (x, y - 0.5 * h)];
                let mut face_sqrt_g = [0.0; 4];
                let mut face_ginv = [[0.0; 3]; 4];
                for (f, &(fx, fy)) in faces.iter().enumerate() {
                    let (inv, sq) = sym_inverse(g_at(fx, fy));
                    face_sqrt_g[f] = sq;
                    face_ginv[f] = inv;
                }
                stencils.push(Some(NodeStencil { nbr, d: [h, h], face_sqrt_g, face_ginv }));
            }
        }
        Self::finish(domain, layout, coords, boundary, stencils, geom, None, None)
    }

    /// Boundary-fitted polar grid: nr radial intervals (nodes r_i = r_inner + i·Δr,
    /// the last ring on ∂Ω) and ntheta angular nodes.
    pub fn polar(domain: DomainChart, nr: usize, ntheta: usize) -> Result<Grid> {
        check_2d(&domain)?;
        let (center, r_inner, r_outer) = match &domain.shape {
            Shape::Disk { center, radius } => {
                ([center.first().copied().unwrap_or(0.0), center.get(1).copied().unwrap_or(0.0)], 0.0, *radius)
            }
            Shape::PolarCap { r_max } => ([0.0, 0.0], 0.0, *r_max),
            Shape::Annulus { center, inner, outer } => {
                ([center.first().copied().unwrap_or(0.0), center.get(1).copied().unwrap_or(0.0)], *inner, *outer)
            }
            _ => return Err(PmcError::Invalid("polar grids need a disk, cap or annulus".into())),
        };
        if nr < 4 || ntheta < 8 || ntheta % 2 != 0 {
            return Err(PmcError::Invalid("polar grid needs nr >= 4 and an even ntheta >= 8".into()));
        }
        let layout = Layout::Polar { center, r_inner, r_outer, nr, ntheta };
        let metric = domain.metric.clone();
        let has_pole = r_inner == 0.0;
        let dr = (r_outer - r_inner) / nr as f64;
        let dth = 2.0 * PI / ntheta as f64;
        let centered = center == [0.0, 0.0];
        // computational metric G(r, θ) = Jᵀσ J
        let comp_g = |r: f64, th: f64| -> [f64; 3] {
            match &metric.kind {
                MetricKind::Euclidean => [1.0, 0.0, r * r],
                MetricKind::SphericalWarped(w) if centered => {
                    let h = w.value(r);
                    [1.0, 0.0, h * h]
                }
                _ => {
                    let (c, s) = (th.cos(), th.sin());
                    let x = [center[0] + r * c, center[1] + r * s];
                    let sg = metric.components(&x);
                    let j = DMatrix::from_row_slice(2, 2, &[c, -r * s, s, r * c]);
                    let g = j.transpose() * sg * j;
                    [g[(0, 0)], g[(0, 1)], g[(1, 1)]]
                }
            }
        };
        let first_ring = if has_pole { 1 } else { 0 };
        let id = |i: usize, j: isize| -> usize {
            if has_pole && i == 0 {
                0
            } else {
                let j = j.rem_euclid(ntheta as isize) as usize;
                usize::from(has_pole) + (i - first_ring) * ntheta + j
            }
        };
        let mut coords = Vec::new();
        let mut boundary = Vec::new();
        let mut stencils = Vec::new();
        let mut geom = Vec::new();
        if has_pole {
            coords.push(center.to_vec());
            boundary.push(false);
            stencils.push(None);
            // the pole uses chart coordinates; √G = 0 makes flux-form sums vanish there
            geom.push(NodeGeom { jac: [[1.0, 0.0], [0.0, 1.0]], ..Default::default() });
        }
        let christoffel = |r: f64, th: f64| -> [[f64; 3]; 2] {
            let dg = |a: usize| -> [f64; 3] {
                let (p, m, eps) = if a == 0 {
                    let eps = 1e-5 * r.max(1e-3);
                    (comp_g(r + eps, th), comp_g(r - eps, th), eps)
                } else {
                    (comp_g(r, th + 1e-5), comp_g(r, th - 1e-5), 1e-5)
                };
                [(p[0] - m[0]) / (2.0 * eps), (p[1] - m[1]) / (2.0 * eps), (p[2] - m[2]) / (2.0 * eps)]
            };
            let (d0, d1) = (dg(0), dg(1));
            let gd = |a: usize, i: usize, j: usize| -> f64 {
                let d = if a == 0 { d0 } else { d1 };
                match (i, j) {
                    (0, 0) => d[0],
                    (1, 1) => d[2],
                    _ => d[1],
                }
            };
            let (ginv, _) = sym_inverse(comp_g(r, th));
            let gi = |c: usize, l: usize| match (c, l) {
                (0, 0) => ginv[0],
                (1, 1) => ginv[2],
                _ => ginv[1],
            };
            let mut out = [[0.0; 3]; 2];
            for c in 0..2 {
                for (k, (a, b)) in [(0, 0), (0, 1), (1, 1)].into_iter().enumerate() {
                    out[c][k] = 0.5 * (0..2).map(|l| gi(c, l) * (gd(a, l, b) + gd(b, l, a) - gd(l, a, b))).sum::<f64>();
                }
            }
            out
        };
        for i in first_ring..=nr {
            let r = r_inner + i as f64 * dr;
            for j in 0..ntheta {
                let th = j as f64 * dth;
                let (c, s) = (th.cos(), th.sin());
                coords.push(vec![center[0] + r * c, center[1] + r * s]);
                let node_g = comp_g(r, th);
                let (ginv, sqrt_g) = sym_inverse(node_g);
                geom.push(NodeGeom {
                    sqrt_g,
                    g: node_g,
                    ginv,
                    jac: [[c, s], [-r * s, r * c]],
                    gamma: christoffel(r, th),
                });
                let b = i == nr || (!has_pole && i == 0);
                boundary.push(b);
                if b {
                    stencils.push(None);
                    continue;
                }
                let jj = j as isize;
                let nbr = [
                    id(i + 1, jj),
                    id(i - 1, jj),
                    id(i, jj + 1),
                    id(i, jj - 1),
                    id(i + 1, jj + 1),
                    id(i - 1, jj + 1),
                    id(i + 1, jj - 1),
                    id(i - 1, jj - 1),
                ];
                let faces = [(r + 0.5 * dr, th), (r - 0.5 * dr, th), (r, th + 0.5 * dth), (r, th - 0.5 * dth)];
                let mut face_sqrt_g = [0.0; 4];
                let mut face_ginv = [[0.0; 3]; 4];
                for (f, &(fr, ft)) in faces.iter().enumerate() {
                    let (inv, sq) = sym_inverse(comp_g(fr, ft));
                    face_sqrt_g[f] = sq;
                    face_ginv[f] = inv;
                }
                stencils.push(Some(NodeStencil { nbr, d: [dr, dth], face_sqrt_g, face_ginv }));
            }
        }
        let pole = has_pole.then(|| {
            let ring: Vec<usize> = (0..ntheta).map(|j| id(1, j as isize)).collect();
            let angles: Vec<f64> = (0..ntheta).map(|j| j as f64 * dth).collect();
            // ∫∫ √G over the cell r < Δr/2, two-point Gauss in r per angular column
            let gauss = [0.25 * dr * (1.0 - 1.0 / 3f64.sqrt()), 0.25 * dr * (1.0 + 1.0 / 3f64.sqrt())];
            let volume = angles
                .iter()
                .map(|&th| gauss.iter().map(|&r| sym_inverse(comp_g(r, th)).1).sum::<f64>() * 0.25 * dr * dth)
                .sum();
            let sigma = metric.components(&center);
            PoleData {
                ring,
                cos: angles.iter().map(|a| a.cos()).collect(),
                sin: angles.iter().map(|a| a.sin()).collect(),
                dr,
                dtheta: dth,
                volume,
                sigma_inv: sigma.clone().try_inverse().expect("metric positive definite"),
                sigma,
            }
        });
        Ok(Self::finish(domain, layout, coords, boundary, stencils, geom, pole, None))
    }

    /// Radial reduction of a rotationally symmetric problem on a ball about the pole.
    pub fn radial(domain: DomainChart, nr: usize) -> Result<Grid> {
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
        if nr < 4 {
            return Err(PmcError::Invalid("radial grid needs nr >= 4".into()));
        }
        let dim = domain.dim();
        let dr = r_max / nr as f64;
        let jd = |r: f64| warp.value(r).powi(dim as i32 - 1);
        let j_node: Vec<f64> = (0..=nr).map(|i| jd(i as f64 * dr)).collect();
        let j_face: Vec<f64> = (0..nr).map(|i| jd((i as f64 + 0.5) * dr)).collect();
        let pole_volume = crate::quad::adaptive_simpson(&jd, 0.0, 0.5 * dr, 1e-16 * dr.powi(dim as i32).max(1e-300));
        let coords: Vec<Vec<f64>> = (0..=nr)
            .map(|i| {
                let mut x = vec![0.0; dim];
                x[0] = i as f64 * dr;
                x
            })
            .collect();
        let boundary = (0..=nr).map(|i| i == nr).collect();
        let stencils = vec![None; nr + 1];
        let geom = vec![NodeGeom::default(); nr + 1];
        let radial = RadialData { dr, j_node, j_face, pole_volume, warp };
        Ok(Self::finish(domain, Layout::Radial { nr, dr, dim }, coords, boundary, stencils, geom, None, Some(radial)))
    }

    #[allow(clippy::too_many_arguments)]
    fn finish(
        domain: DomainChart,
        layout: Layout,
        coords: Vec<Vec<f64>>,
        boundary: Vec<bool>,
        stencils: Vec<Option<NodeStencil>>,
        node_geom: Vec<NodeGeom>,
        pole: Option<PoleData>,
        radial: Option<RadialData>,
    ) -> Grid {
        let mut unknowns = Vec::new();
        let mut unknown_of = vec![None; coords.len()];
        for (p, b) in boundary.iter().enumerate() {
            if !b {
                unknown_of[p] = Some(unknowns.len());
                unknowns.push(p);
            }
        }
        Grid { layout, domain, coords, boundary, unknowns, unknown_of, stencils, node_geom, pole, radial }
    }

    /// Node ids whose values enter the residual at node p (including p).
    pub fn dependencies(&self, p: usize) -> Vec<usize> {
        if self.is_pole(p) {
            let mut v = vec![0];
            v.extend(&self.pole.as_ref().unwrap().ring);
            return v;
        }
        if let Layout::Radial { nr, .. } = self.layout {
            return (p.saturating_sub(1)..=(p + 1).min(nr)).collect();
        }
        match &self.stencils[p] {
            Some(s) => {
                let mut v = vec![p];
                v.extend(s.nbr);
                v.sort_unstable();
                v.dedup();
                v
            }
            None => vec![p],
        }
    }

    /// Index of the node nearest to x.
    pub fn nearest_node(&self, x: &[f64]) -> usize {
        let mut best = (f64::INFINITY, 0);
        for (p, c) in self.coords.iter().enumerate() {
            let d = norm(&c.iter().zip(x).map(|(a, b)| a - b).collect::<Vec<_>>());
            if d < best.0 {
                best = (d, p);
            }
        }
        best.1
    }

    /// Radius of each node about the polar / radial center (polar and radial layouts).
    pub fn radius_of(&self, p: usize) -> f64 {
        match self.layout {
            Layout::Polar { center, .. } => ((self.coords[p][0] - center[0]).powi(2) + (self.coords[p][1] - center[1]).powi(2)).sqrt(),
            Layout::Radial { .. } => self.coords[p][0],
            _ => norm(&self.coords[p]),
        }
    }
}

fn check_2d(domain: &DomainChart) -> Result<()> {
    if domain.dim() != 2 {
        return Err(PmcError::Invalid("two-dimensional grids need a 2D chart".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polar_indexing_and_pole_volume() {
        let d = DomainChart::new(ChartMetric::euclidean(2), Shape::disk(1.0));
        let g = Grid::polar(d, 8, 16).unwrap();
        assert_eq!(g.n_nodes(), 1 + 8 * 16);
        assert_eq!(g.n_unknowns(), 1 + 7 * 16);
        let pole = g.pole.as_ref().unwrap();
        assert!((pole.volume - PI * (0.5 / 8.0f64).powi(2)).abs() < 1e-14);
        // ring-1 stencils reach the pole through W, NW, SW
        let s = g.stencils[1].as_ref().unwrap();
        assert_eq!((s.nbr[W], s.nbr[NW], s.nbr[SW]), (0, 0, 0));
        assert_eq!(g.dependencies(0).len(), 17);
    }

    #[test]
    fn annulus_has_two_boundary_rings() {
        let d = DomainChart::new(ChartMetric::euclidean(2), Shape::annulus(0.5, 1.0));
        let g = Grid::polar(d, 8, 16).unwrap();
        assert_eq!(g.boundary.iter().filter(|b| **b).count(), 32);
    }

    #[test]
    fn rejects_bad_resolution() {
        let d = DomainChart::new(ChartMetric::euclidean(2), Shape::BoxPeriodic { length: 1.0 });
        assert!(Grid::periodic(d, 8).is_err());
    }
}
