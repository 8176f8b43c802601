use std::f64::consts::PI;

use nalgebra::DVector;

use crate::error::{PmcError, Result};
use crate::geometry::metric::norm;
use crate::geometry::{boundary_mean_curvature, ChartMetric, MetricKind};

#[derive(Clone, Debug, PartialEq)]
pub enum Shape {
    /// Coordinate ball |x − c| < radius (a disk in two dimensions).
    Disk { center: Vec<f64>, radius: f64 },
    Annulus { center: Vec<f64>, inner: f64, outer: f64 },
    /// Flat torus [0, L)ⁿ; no boundary.
    BoxPeriodic { length: f64 },
    /// Geodesic ball |x| < r_max about the pole of a rotationally symmetric metric.
    PolarCap { r_max: f64 },
    /// {x_n < level}; its boundary is a coordinate slice.
    HalfSpace { level: f64 },
    Rectangle { lo: [f64; 2], hi: [f64; 2] },
}

impl Shape {
    pub fn disk(radius: f64) -> Self {
        Shape::Disk { center: vec![], radius }
    }

    pub fn disk_at(center: [f64; 2], radius: f64) -> Self {
        Shape::Disk { center: center.to_vec(), radius }
    }

    pub fn annulus(inner: f64, outer: f64) -> Self {
        Shape::Annulus { center: vec![], inner, outer }
    }
}

/// A coordinate region of a chart together with its metric.
#[derive(Clone, Debug)]
pub struct DomainChart {
    pub metric: ChartMetric,
    pub shape: Shape,
}

fn offset(x: &[f64], center: &[f64]) -> Vec<f64> {
    x.iter().enumerate().map(|(i, v)| v - center.get(i).copied().unwrap_or(0.0)).collect()
}

impl DomainChart {
    pub fn new(metric: ChartMetric, shape: Shape) -> Self {
        DomainChart { metric, shape }
    }

    pub fn dim(&self) -> usize {
        self.metric.dim
    }

    pub fn has_boundary(&self) -> bool {
        !matches!(self.shape, Shape::BoxPeriodic { .. })
    }

    pub fn is_periodic(&self) -> bool {
        !self.has_boundary()
    }

    pub fn inside(&self, x: &[f64]) -> bool {
        self.d(x) > 0.0
    }

    /// Signed distance to ∂Ω, positive inside. It is the σ-distance for
    /// Euclidean metrics and for polar caps; for other pairings it is a
    /// smooth defining function with the right level sets.
    pub fn d(&self, x: &[f64]) -> f64 {
        match &self.shape {
            Shape::Disk { center, radius } => radius - norm(&offset(x, center)),
            Shape::Annulus { center, inner, outer } => {
                let r = norm(&offset(x, center));
                (r - inner).min(outer - r)
            }
            Shape::BoxPeriodic { .. } => f64::INFINITY,
            Shape::PolarCap { r_max } => r_max - norm(x),
            Shape::HalfSpace { level } => level - x[x.len() - 1],
            Shape::Rectangle { lo, hi } => (x[0] - lo[0]).min(hi[0] - x[0]).min(x[1] - lo[1]).min(hi[1] - x[1]),
        }
    }

    /// Coordinate gradient of d (a covector).
    pub fn grad_d(&self, x: &[f64]) -> Vec<f64> {
        let radial = |c: &[f64], sign: f64| {
            let v = offset(x, c);
            let r = norm(&v);
            v.iter().map(|a| sign * a / r).collect::<Vec<_>>()
        };
        match &self.shape {
            Shape::Disk { center, .. } => radial(center, -1.0),
            Shape::PolarCap { .. } => radial(&[], -1.0),
            Shape::Annulus { center, inner, outer } => {
                let r = norm(&offset(x, center));
                radial(center, if r - inner < outer - r { 1.0 } else { -1.0 })
            }
            Shape::BoxPeriodic { .. } => vec![0.0; x.len()],
            Shape::HalfSpace { .. } => {
                let mut g = vec![0.0; x.len()];
                g[x.len() - 1] = -1.0;
                g
            }
            Shape::Rectangle { lo, hi } => {
                let c = [x[0] - lo[0], hi[0] - x[0], x[1] - lo[1], hi[1] - x[1]];
                let k = (0..4).min_by(|&a, &b| c[a].total_cmp(&c[b])).unwrap();
                let mut g = vec![0.0; 2];
                g[k / 2] = if k % 2 == 0 { 1.0 } else { -1.0 };
                g
            }
        }
    }

    /// Whether d is smooth on a ball of radius `reach` around y.
    pub fn distance_valid(&self, y: &[f64], reach: f64) -> bool {
        match &self.shape {
            Shape::Disk { center, .. } => norm(&offset(y, center)) > reach,
            Shape::PolarCap { .. } => norm(y) > reach,
            Shape::Annulus { center, inner, outer } => {
                let r = norm(&offset(y, center));
                r > reach && ((r - inner) - (outer - r)).abs() > 2.0 * reach
            }
            Shape::BoxPeriodic { .. } => false,
            Shape::HalfSpace { .. } => true,
            Shape::Rectangle { lo, hi } => {
                let c = [y[0] - lo[0], hi[0] - y[0], y[1] - lo[1], hi[1] - y[1]];
                let mut s = c;
                s.sort_by(f64::total_cmp);
                s[1] - s[0] > 2.0 * reach
            }
        }
    }

    /// Outward σ-unit normal at a boundary point.
    pub fn gamma(&self, y: &[f64]) -> Result<Vec<f64>> {
        if !self.has_boundary() {
            return Err(PmcError::NoBoundary);
        }
        let g = DVector::from_vec(self.grad_d(y));
        let up = self.metric.inverse(y) * &g;
        let len = g.dot(&up).sqrt();
        Ok(up.iter().map(|v| -v / len).collect())
    }

    pub fn h_boundary(&self, y: &[f64]) -> Result<f64> {
        boundary_mean_curvature(self, y)
    }

    /// Closed-form boundary mean curvature where one is known.
    pub fn analytic_boundary_curvature(&self, y: &[f64]) -> Option<f64> {
        let n = self.dim() as f64;
        let euclid = matches!(self.metric.kind, MetricKind::Euclidean);
        match (&self.shape, &self.metric.kind) {
            (Shape::Disk { radius, .. }, MetricKind::Euclidean) => Some((n - 1.0) / radius),
            (Shape::Disk { center, radius }, MetricKind::SphericalWarped(w)) if center.iter().all(|c| *c == 0.0) => {
                let [h, dh, _] = w.jet(*radius);
                Some((n - 1.0) * dh / h)
            }
            (Shape::PolarCap { r_max }, MetricKind::SphericalWarped(w)) => {
                let [h, dh, _] = w.jet(*r_max);
                Some((n - 1.0) * dh / h)
            }
            (Shape::PolarCap { r_max }, MetricKind::Euclidean) => Some((n - 1.0) / r_max),
            (Shape::Annulus { center, inner, outer }, MetricKind::Euclidean) => {
                let r = norm(&offset(y, center));
                Some(if (r - inner).abs() < (outer - r).abs() { -(n - 1.0) / inner } else { (n - 1.0) / outer })
            }
            (Shape::HalfSpace { .. } | Shape::Rectangle { .. }, _) if euclid => Some(0.0),
            _ => None,
        }
    }

    pub fn diam(&self) -> f64 {
        match &self.shape {
            Shape::Disk { radius, .. } => 2.0 * radius,
            Shape::Annulus { outer, .. } => 2.0 * outer,
            Shape::BoxPeriodic { length } => length * (self.dim() as f64).sqrt(),
            Shape::PolarCap { r_max } => 2.0 * r_max,
            Shape::HalfSpace { .. } => f64::INFINITY,
            Shape::Rectangle { lo, hi } => ((hi[0] - lo[0]).powi(2) + (hi[1] - lo[1]).powi(2)).sqrt(),
        }
    }

    /// Deterministic boundary samples.
    pub fn boundary_samples(&self, count: usize) -> Result<Vec<Vec<f64>>> {
        let n = self.dim();
        let count = count.max(1);
        let sphere = |center: &[f64], radius: f64| -> Vec<Vec<f64>> {
            unit_directions(n, count)
                .into_iter()
                .map(|e| e.iter().enumerate().map(|(i, v)| center.get(i).copied().unwrap_or(0.0) + radius * v).collect())
                .collect()
        };
        Ok(match &self.shape {
            Shape::BoxPeriodic { .. } => return Err(PmcError::NoBoundary),
            Shape::Disk { center, radius } => sphere(center, *radius),
            Shape::PolarCap { r_max } => sphere(&[], *r_max),
            Shape::Annulus { center, inner, outer } => {
                let mut s = sphere(center, *inner);
                s.extend(sphere(center, *outer));
                s
            }
            Shape::HalfSpace { level } => (0..count)
                .map(|i| {
                    let mut x = vec![0.0; n];
                    x[0] = i as f64 / count as f64 - 0.5;
                    x[n - 1] = *level;
                    x
                })
                .collect(),
            Shape::Rectangle { lo, hi } => {
                let per = count.div_ceil(4).max(1);
                let mut s = Vec::new();
                for i in 0..per {
                    let a = (i as f64 + 0.5) / per as f64;
                    let (x, y) = (lo[0] + a * (hi[0] - lo[0]), lo[1] + a * (hi[1] - lo[1]));
                    s.extend([vec![x, lo[1]], vec![x, hi[1]], vec![lo[0], y], vec![hi[0], y]]);
                }
                s
            }
        })
    }

    /// Deterministic points of the closure of Ω (interior lattice plus boundary samples).
    pub fn sample_points(&self, count: usize) -> Vec<Vec<f64>> {
        let n = self.dim();
        let count = count.max(1);
        let (lo, hi) = self.bounding_box();
        let mut pts: Vec<Vec<f64>> = halton(n, 4 * count)
            .into_iter()
            .map(|u| u.iter().enumerate().map(|(i, v)| lo[i] + v * (hi[i] - lo[i])).collect::<Vec<f64>>())
            .filter(|x| self.is_periodic() || self.d(x) >= 0.0)
            .take(count)
            .collect();
        if let Ok(b) = self.boundary_samples(count.div_ceil(2)) {
            pts.extend(b);
        }
        pts
    }

    fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.dim();
        let around = |center: &[f64], r: f64| {
            let c: Vec<f64> = (0..n).map(|i| center.get(i).copied().unwrap_or(0.0)).collect();
            (c.iter().map(|v| v - r).collect(), c.iter().map(|v| v + r).collect())
        };
        match &self.shape {
            Shape::Disk { center, radius } => around(center, *radius),
            Shape::Annulus { center, outer, .. } => around(center, *outer),
            Shape::PolarCap { r_max } => around(&[], *r_max),
            Shape::BoxPeriodic { length } => (vec![0.0; n], vec![*length; n]),
            Shape::HalfSpace { level } => {
                let mut lo = vec![-0.5; n];
                let mut hi = vec![0.5; n];
                lo[n - 1] = level - 1.0;
                hi[n - 1] = *level;
                (lo, hi)
            }
            Shape::Rectangle { lo, hi } => (lo.to_vec(), hi.to_vec()),
        }
    }
}

/// Deterministic, roughly uniform unit vectors in ℝⁿ.
pub fn unit_directions(n: usize, count: usize) -> Vec<Vec<f64>> {
    match n {
        2 => (0..count)
            .map(|i| {
                let a = 2.0 * PI * i as f64 / count as f64;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        3 => {
            // Fibonacci sphere
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|i| {
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
                    let r = (1.0 - z * z).sqrt();
                    let a = golden * i as f64;
                    vec![r * a.cos(), r * a.sin(), z]
                })
                .collect()
        }
        _ => halton(n, count)
            .into_iter()
            .map(|u| {
                // Box–Muller on consecutive Halton coordinates
                let mut v: Vec<f64> = (0..n)
                    .map(|i| {
                        let a = u[i].max(1e-12);
                        let b = u[(i + 1) % n];
                        (-2.0 * a.ln()).sqrt() * (2.0 * PI * b).cos()
                    })
                    .collect();
                let len = norm(&v).max(1e-300);
                v.iter_mut().for_each(|c| *c /= len);
                v
            })
            .collect(),
    }
}

/// First `count` points of the Halton sequence in [0, 1)ⁿ (skipping the origin).
pub fn halton(n: usize, count: usize) -> Vec<Vec<f64>> {
    const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];
    (1..=count as u64)
        .map(|i| {
            (0..n)
                .map(|d| {
                    let b = PRIMES[d % PRIMES.len()];
                    let (mut f, mut r, mut k) = (1.0, 0.0, i);
                    while k > 0 {
                        f /= b as f64;
                        r += f * (k % b) as f64;
                        k /= b;
                    }
                    r
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn distance_and_normal_invariants() {
        let domains = [
            DomainChart::new(ChartMetric::euclidean(2), Shape::disk(0.7)),
            DomainChart::new(ChartMetric::euclidean(2), Shape::annulus(0.3, 1.0)),
            DomainChart::new(ChartMetric::euclidean(3), Shape::disk(1.0)),
            DomainChart::new(ChartMetric::hyperbolic(2), Shape::disk_at([0.0, 2.0], 1.0)),
        ];
        for d in &domains {
            for y in d.boundary_samples(24).unwrap() {
                assert_abs_diff_eq!(d.d(&y), 0.0, epsilon = 1e-12);
                let g = d.gamma(&y).unwrap();
                assert_abs_diff_eq!(d.metric.norm_vec(&y, &g), 1.0, epsilon = 1e-12);
            }
            for x in d.sample_points(50) {
                assert!(d.d(&x) >= -1e-12);
            }
        }
    }

    #[test]
    fn torus_has_no_boundary() {
        let t = DomainChart::new(ChartMetric::euclidean(2), Shape::BoxPeriodic { length: 1.0 });
        assert_eq!(t.gamma(&[0.0, 0.0]), Err(PmcError::NoBoundary));
        assert_eq!(t.boundary_samples(4), Err(PmcError::NoBoundary));
        assert_eq!(t.h_boundary(&[0.0, 0.0]), Err(PmcError::NoBoundary));
    }

    #[test]
    fn annulus_inner_boundary_is_concave() {
        let d = DomainChart::new(ChartMetric::euclidean(2), Shape::annulus(0.5, 1.0));
        assert_abs_diff_eq!(d.h_boundary(&[0.5, 0.0]).unwrap(), -2.0);
        assert_abs_diff_eq!(d.h_boundary(&[0.0, 1.0]).unwrap(), 1.0);
    }
}
