use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::warp::Warp;
use crate::error::{PmcError, Result};

/// A Riemannian metric σ on a coordinate chart of ℝⁿ.
#[derive(Clone, Debug)]
pub struct ChartMetric {
    pub dim: usize,
    pub kind: MetricKind,
}

#[derive(Clone, Debug)]
pub enum MetricKind {
    Euclidean,
    /// φ(x_n)²·δ: the product σ + dr² of a flat factor with the last
    /// coordinate, conformally rescaled by the warp.
    ConformalProduct(Warp),
    /// h(|x|)²σ_{n−1} + dr² written in Cartesian chart coordinates.
    SphericalWarped(Warp),
    GridSampled(Arc<SampledMetric>),
}

impl MetricKind {
    pub fn name(&self) -> &'static str {
        match self {
            MetricKind::Euclidean => "euclidean",
            MetricKind::ConformalProduct(_) => "conformal_product",
            MetricKind::SphericalWarped(_) => "spherical_warped",
            MetricKind::GridSampled(_) => "grid_sampled",
        }
    }
}

/// Metric components stored at the nodes of a 2D Cartesian lattice,
/// bilinearly interpolated in between.
#[derive(Clone, Debug)]
pub struct SampledMetric {
    pub origin: [f64; 2],
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    /// (σ11, σ12, σ22) per node, row-major in y.
    pub comps: Vec<[f64; 3]>,
}

impl SampledMetric {
    pub fn from_fn(origin: [f64; 2], h: f64, nx: usize, ny: usize, f: impl Fn(f64, f64) -> [f64; 3]) -> Self {
        let mut comps = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                comps.push(f(origin[0] + i as f64 * h, origin[1] + j as f64 * h));
            }
        }
        SampledMetric { origin, h, nx, ny, comps }
    }

    fn contains(&self, x: &[f64]) -> bool {
        let (u, v) = ((x[0] - self.origin[0]) / self.h, (x[1] - self.origin[1]) / self.h);
        u >= 0.0 && v >= 0.0 && u <= (self.nx - 1) as f64 && v <= (self.ny - 1) as f64
    }

    fn interpolate(&self, x: &[f64]) -> [f64; 3] {
        let u = ((x[0] - self.origin[0]) / self.h).clamp(0.0, (self.nx - 1) as f64);
        let v = ((x[1] - self.origin[1]) / self.h).clamp(0.0, (self.ny - 1) as f64);
        let (i, j) = ((u.floor() as usize).min(self.nx - 2), (v.floor() as usize).min(self.ny - 2));
        let (a, b) = (u - i as f64, v - j as f64);
        let at = |i: usize, j: usize| self.comps[j * self.nx + i];
        let (c00, c10, c01, c11) = (at(i, j), at(i + 1, j), at(i, j + 1), at(i + 1, j + 1));
        let mut out = [0.0; 3];
        for k in 0..3 {
            out[k] = (1.0 - a) * (1.0 - b) * c00[k] + a * (1.0 - b) * c10[k] + (1.0 - a) * b * c01[k] + a * b * c11[k];
        }
        out
    }
}

const POLE_EPS: f64 = 1e-12;

impl ChartMetric {
    pub fn euclidean(dim: usize) -> Self {
        ChartMetric { dim, kind: MetricKind::Euclidean }
    }

    pub fn conformal_product(dim: usize, warp: Warp) -> Self {
        ChartMetric { dim, kind: MetricKind::ConformalProduct(warp) }
    }

    /// Upper half-space model, sectional curvature −1; chart x_n > 0.
    pub fn hyperbolic(dim: usize) -> Self {
        Self::conformal_product(dim, Warp::Reciprocal)
    }

    pub fn spherical_warped(dim: usize, warp: Warp) -> Self {
        ChartMetric { dim, kind: MetricKind::SphericalWarped(warp) }
    }

    pub fn grid_sampled(sampled: SampledMetric) -> Self {
        ChartMetric { dim: 2, kind: MetricKind::GridSampled(Arc::new(sampled)) }
    }

    pub fn is_analytic(&self) -> bool {
        !matches!(self.kind, MetricKind::GridSampled(_))
    }

    /// Whether x lies in the open set where the metric is defined and positive definite.
    pub fn chart_contains(&self, x: &[f64]) -> bool {
        if x.len() != self.dim || x.iter().any(|v| !v.is_finite()) {
            return false;
        }
        match &self.kind {
            MetricKind::Euclidean => true,
            MetricKind::ConformalProduct(w) => {
                let p = w.value(x[self.dim - 1]);
                p.is_finite() && p > 0.0 && (!matches!(w, Warp::Reciprocal) || x[self.dim - 1] > 0.0)
            }
            MetricKind::SphericalWarped(w) => {
                let r = norm(x);
                r < POLE_EPS || {
                    let h = w.value(r);
                    h.is_finite() && h > 0.0
                }
            }
            MetricKind::GridSampled(s) => s.contains(x),
        }
    }

    pub fn components(&self, x: &[f64]) -> DMatrix<f64> {
        let n = self.dim;
        match &self.kind {
            MetricKind::Euclidean => DMatrix::identity(n, n),
            MetricKind::ConformalProduct(w) => {
                let p = w.value(x[n - 1]);
                DMatrix::identity(n, n) * (p * p)
            }
            MetricKind::SphericalWarped(w) => {
                let r = norm(x);
                if r < POLE_EPS {
                    return DMatrix::identity(n, n);
                }
                let h = w.value(r);
                let a = (h / r) * (h / r);
                DMatrix::from_fn(n, n, |i, j| {
                    let p = x[i] * x[j] / (r * r);
                    a * (delta(i, j) - p) + p
                })
            }
            MetricKind::GridSampled(s) => {
                let c = s.interpolate(x);
                DMatrix::from_row_slice(2, 2, &[c[0], c[1], c[1], c[2]])
            }
        }
    }

    /// ∂_k σ_ij for k = 0..n.
    pub fn first_derivatives(&self, x: &[f64]) -> Vec<DMatrix<f64>> {
        let n = self.dim;
        match &self.kind {
            MetricKind::Euclidean => vec![DMatrix::zeros(n, n); n],
            MetricKind::ConformalProduct(w) => {
                let [p, dp, _] = w.jet(x[n - 1]);
                let mut out = vec![DMatrix::zeros(n, n); n];
                out[n - 1] = DMatrix::identity(n, n) * (2.0 * p * dp);
                out
            }
            MetricKind::SphericalWarped(w) => {
                let r = norm(x);
                if r < POLE_EPS {
                    return vec![DMatrix::zeros(n, n); n];
                }
                let [h, dh, _] = w.jet(r);
                let a = (h / r) * (h / r);
                let da = 2.0 * (h / r) * (dh * r - h) / (r * r);
                (0..n)
                    .map(|k| {
                        DMatrix::from_fn(n, n, |i, j| {
                            let p = x[i] * x[j] / (r * r);
                            let dp = (delta(i, k) * x[j] + x[i] * delta(j, k)) / (r * r)
                                - 2.0 * x[i] * x[j] * x[k] / (r * r * r * r);
                            da * x[k] / r * (delta(i, j) - p) + (1.0 - a) * dp
                        })
                    })
                    .collect()
            }
            MetricKind::GridSampled(s) => {
                let h = s.h;
                (0..2)
                    .map(|k| {
                        let mut xp = x.to_vec();
                        let mut xm = x.to_vec();
                        xp[k] += h;
                        xm[k] -= h;
                        (self.components(&xp) - self.components(&xm)) / (2.0 * h)
                    })
                    .collect()
            }
        }
    }

    pub fn inverse(&self, x: &[f64]) -> DMatrix<f64> {
        self.components(x).try_inverse().expect("metric must be positive definite")
    }

    pub fn sqrt_det(&self, x: &[f64]) -> f64 {
        self.components(x).determinant().sqrt()
    }

    pub fn min_eigenvalue(&self, x: &[f64]) -> f64 {
        self.components(x).symmetric_eigen().eigenvalues.min()
    }

    /// |v|_σ for a tangent vector v.
    pub fn norm_vec(&self, x: &[f64], v: &[f64]) -> f64 {
        let v = DVector::from_column_slice(v);
        (v.transpose() * self.components(x) * &v)[(0, 0)].sqrt()
    }

    /// Γ^k_ij, returned as gamma[k][(i, j)].
    pub fn christoffel(&self, x: &[f64]) -> Vec<DMatrix<f64>> {
        let n = self.dim;
        let inv = self.inverse(x);
        let d = self.first_derivatives(x);
        (0..n)
            .map(|k| {
                DMatrix::from_fn(n, n, |i, j| {
                    0.5 * (0..n)
                        .map(|l| inv[(k, l)] * (d[i][(l, j)] + d[j][(l, i)] - d[l][(i, j)]))
                        .sum::<f64>()
                })
            })
            .collect()
    }

    /// Ricci tensor R_ij. Christoffel symbols are analytic; their derivatives
    /// use a fourth-order central stencil.
    pub fn ricci(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        if !self.is_analytic() {
            return Err(PmcError::UnsupportedMetricKind("grid_sampled"));
        }
        let n = self.dim;
        let h = 1e-3 * if let MetricKind::ConformalProduct(Warp::Reciprocal) = self.kind {
            x[n - 1].abs().min(1.0)
        } else {
            1.0
        };
        let g0 = self.christoffel(x);
        // dg[m][k][(i,j)] = ∂_m Γ^k_ij
        let mut dg = Vec::with_capacity(n);
        for m in 0..n {
            let at = |s: f64| -> Result<Vec<DMatrix<f64>>> {
                let mut y = x.to_vec();
                y[m] += s * h;
                if !self.chart_contains(&y) {
                    return Err(PmcError::StencilOutOfDomain(x.to_vec()));
                }
                Ok(self.christoffel(&y))
            };
            let (p2, p1, m1, m2) = (at(2.0)?, at(1.0)?, at(-1.0)?, at(-2.0)?);
            dg.push(
                (0..n)
                    .map(|k| (-&p2[k] + &p1[k] * 8.0 - &m1[k] * 8.0 + &m2[k]) / (12.0 * h))
                    .collect::<Vec<_>>(),
            );
        }
        Ok(DMatrix::from_fn(n, n, |i, j| {
            let mut s = 0.0;
            for k in 0..n {
                s += dg[k][k][(i, j)] - dg[j][k][(i, k)];
                for l in 0..n {
                    s += g0[k][(k, l)] * g0[l][(i, j)] - g0[k][(j, l)] * g0[l][(i, k)];
                }
            }
            s
        }))
    }

    /// min over σ-unit e of Ric(e, e): the smallest eigenvalue of the pencil (Ric, σ).
    pub fn ricci_min_at(&self, x: &[f64]) -> Result<f64> {
        let ric = self.ricci(x)?;
        let l = self
            .components(x)
            .cholesky()
            .ok_or_else(|| PmcError::Invalid("metric not positive definite".into()))?
            .l();
        let linv = l.try_inverse().expect("cholesky factor invertible");
        let m = &linv * ric * linv.transpose();
        let m = (&m + m.transpose()) * 0.5;
        Ok(m.symmetric_eigen().eigenvalues.min())
    }
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn delta(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}
