use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::discretization::Field;
use crate::error::{PmcError, Result};
use crate::geometry::covariant_divergence;
use crate::problems::domain::unit_directions;
use crate::problems::{serrin_condition_check, DomainChart, PMCProblem, Shape, TOL_GEOM};
use crate::solver::{barrier_check_with, BarrierReport};

/// Multiplier applied to every sampled coefficient bound.
pub const SAFETY: f64 = 10.0;
const FD_STEP: f64 = 1e-4;

/// Constants of the boundary barriers u± = φ ± log(1 + κd)/ν on {d < d₀}.
/// κ is usually astronomically large (it contains e^{C₄ν}), so it is carried
/// through its logarithm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BarrierConstants {
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub nu: f64,
    pub d0: f64,
    pub ln_kappa: f64,
    /// Worst boundary margin H_∂Ω − max{f(γ), −f(−γ)}; absent for
    /// [`barrier_formula`].
    pub serrin_margin: Option<f64>,
}

impl BarrierConstants {
    /// κ itself; infinite when it overflows.
    pub fn kappa(&self) -> f64 {
        self.ln_kappa.exp()
    }

    /// log(1 + κd)/ν, evaluated without forming κ.
    pub fn width(&self, d: f64) -> f64 {
        if d <= 0.0 {
            return 0.0;
        }
        let ld = d.ln();
        // log(1 + κd) = max(a, b) + log1p(e^{−|a−b|}) with a = ln κ + ln d, b = 0
        let a = self.ln_kappa + ld;
        (a.max(0.0) + (-a.abs()).exp().ln_1p()) / self.nu
    }

    /// (u₋, u₊) at a point with extension value φ(x).
    pub fn envelope(&self, varphi: f64, d: f64) -> (f64, f64) {
        let w = self.width(d);
        (varphi - w, varphi + w)
    }

    /// Lower bound C₂ν/(1 − C₂νd₀) that κ must meet.
    pub fn kappa_floor(&self) -> f64 {
        let a = self.c2 * self.nu;
        a / (1.0 - a * self.d0)
    }

    /// Counts nodes of the collar d ≤ d₀ where u leaves the envelope around ψ.
    pub fn check(&self, problem: &PMCProblem, u: &Field) -> Result<BarrierReport> {
        barrier_check_with(problem, u, self.d0, |d| self.width(d))
    }
}

/// ν = max{1, C₃} and κ = max{C₂ν/(1 − C₂νd₀), (e^{C₄ν} − 1)/d₀}.
pub fn barrier_formula(c2: f64, c3: f64, c4: f64, d0: f64) -> Result<BarrierConstants> {
    if !(c2 >= 1.0 && c3 >= 0.0 && c4 > 0.0 && d0 > 0.0) {
        return Err(PmcError::Invalid("need C2 >= 1, C3 >= 0, C4 > 0, d0 > 0".into()));
    }
    let nu = c3.max(1.0);
    if d0 * c2 * nu > 0.5 {
        return Err(PmcError::Invalid(format!("d0·C2·ν = {} exceeds 1/2", d0 * c2 * nu)));
    }
    let a = c2 * nu;
    let first = (a / (1.0 - a * d0)).ln();
    // ln(e^{C₄ν} − 1) = C₄ν + ln(1 − e^{−C₄ν})
    let x = c4 * nu;
    let second = x + (-(-x).exp()).ln_1p() - d0.ln();
    Ok(BarrierConstants { c2, c3, c4, nu, d0, ln_kappa: first.max(second), serrin_margin: None })
}

/// Largest depth at which the distance function is trusted for each shape.
fn collar_reach(domain: &DomainChart) -> f64 {
    match &domain.shape {
        Shape::Disk { radius, .. } => *radius,
        Shape::PolarCap { r_max } => *r_max,
        Shape::Annulus { inner, outer, .. } => 0.5 * (outer - inner),
        Shape::HalfSpace { .. } => 1.0,
        Shape::Rectangle { lo, hi } => 0.5 * (hi[0] - lo[0]).min(hi[1] - lo[1]),
        Shape::BoxPeriodic { .. } => 0.0,
    }
}

fn shifted(x: &[f64], k: usize, s: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    y[k] += s;
    y
}

/// σ-norm of the gradient and σ-operator norm of the covariant Hessian of φ.
fn second_jet_norms(domain: &DomainChart, varphi: &dyn Fn(&[f64]) -> f64, x: &[f64]) -> (f64, f64) {
    let n = domain.dim();
    let e = FD_STEP;
    let du = DVector::from_fn(n, |k, _| (varphi(&shifted(x, k, e)) - varphi(&shifted(x, k, -e))) / (2.0 * e));
    let f0 = varphi(x);
    let mut hess = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            (varphi(&shifted(x, i, e)) - 2.0 * f0 + varphi(&shifted(x, i, -e))) / (e * e)
        } else {
            let pp = varphi(&shifted(&shifted(x, i, e), j, e));
            let pm = varphi(&shifted(&shifted(x, i, e), j, -e));
            let mp = varphi(&shifted(&shifted(x, i, -e), j, e));
            let mm = varphi(&shifted(&shifted(x, i, -e), j, -e));
            (pp - pm - mp + mm) / (4.0 * e * e)
        }
    });
    let gam = domain.metric.christoffel(x);
    for i in 0..n {
        for j in 0..n {
            hess[(i, j)] -= (0..n).map(|c| gam[c][(i, j)] * du[c]).sum::<f64>();
        }
    }
    let sigma = domain.metric.components(x);
    let l = sigma.clone().cholesky().expect("metric positive definite").l();
    let l_inv = l.try_inverse().expect("invertible factor");
    let grad = (du.transpose() * sigma.try_inverse().unwrap() * &du)[(0, 0)].max(0.0).sqrt();
    let a = &l_inv * hess * l_inv.transpose();
    let op = a.symmetric_eigen().eigenvalues.amax();
    (grad, op)
}

/// Estimates κ, ν, d₀ for the barriers of the boundary value problem with
/// extension `varphi` of the boundary data and height cutoff c₀ > sup|φ|.
///
/// The coefficient bounds are sampled over Ω̄ and over a lattice of the
/// collar:
/// - μ = sup |F| + |φ + tz| for |z| ≤ c₀, |X| ≤ 1, |r| ≤ 1,
/// - the gradient and Hessian norms of φ,
/// - sup |Δd + H_∂Ω(y)|/d, the curvature remainder of the distance function,
/// - a Lipschitz bound of F in (x, X, r).
///
/// Then C₂ = 10·max{1, 2|Dφ|}, C₃ = 10·(μ + |D²φ| + remainder + Lipschitz),
/// d₀ = min{reach/8, 1/(2C₂ν)} and κ follows from [`barrier_formula`].
pub fn barrier_constants(
    c0: f64,
    varphi: &(dyn Fn(&[f64]) -> f64 + Sync),
    problem: &PMCProblem,
    domain: &DomainChart,
) -> Result<BarrierConstants> {
    if !domain.has_boundary() {
        return Err(PmcError::NoBoundary);
    }
    let serrin = serrin_condition_check(problem, domain, 256)?;
    if serrin.worst_margin < -TOL_GEOM {
        return Err(PmcError::HypothesisFailed(serrin.worst_margin));
    }
    let n = domain.dim();
    let metric = &domain.metric;
    let reach = collar_reach(domain);
    let boundary = domain.boundary_samples(if n == 2 { 128 } else { 256 })?;
    let depths: Vec<f64> = [64.0, 32.0, 16.0, 8.0].iter().map(|k| reach / k).collect();

    // interior and collar sample points
    let mut points = domain.sample_points(256);
    let mut collar = Vec::new();
    for y in &boundary {
        let g = domain.grad_d(y);
        let len = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        for &s in &depths {
            let x: Vec<f64> = y.iter().zip(&g).map(|(a, b)| a + s * b / len).collect();
            if domain.d(&x) > 0.0 {
                collar.push((x, y.clone()));
            }
        }
    }
    points.extend(collar.iter().map(|(x, _)| x.clone()));

    let sup_varphi = points.iter().map(|x| varphi(x).abs()).fold(0.0, f64::max);
    if c0 <= sup_varphi {
        return Err(PmcError::Invalid(format!("c0 = {c0} must exceed sup|varphi| = {sup_varphi}")));
    }

    let dirs = unit_directions(n, if n == 2 { 16 } else { 32 });
    let (mut mu, mut lip, mut g1, mut g2): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for x in &points {
        let l = metric.components(x).cholesky().expect("metric positive definite").l();
        let lt_inv = l.transpose().try_inverse().expect("invertible factor");
        // σ-unit vectors e = L^{-T}v
        let unit: Vec<Vec<f64>> =
            dirs.iter().map(|v| (&lt_inv * DVector::from_column_slice(v)).as_slice().to_vec()).collect();
        for e in &unit {
            for scale in [0.0, 0.5, 1.0] {
                let xv: Vec<f64> = e.iter().map(|c| scale * c).collect();
                for r in [-1.0, -0.5, 0.0, 0.5, 1.0] {
                    let big_f = (problem.big_f)(x, &xv, r);
                    for z in [-c0, 0.0, c0] {
                        mu = mu.max(big_f.abs() + ((problem.phi)(x, z, &xv, r) + problem.t * z).abs());
                    }
                }
                // |∂F/∂x|_σ + |∂F/∂X|_σ + |∂F/∂r| at r = 0
                let h = 1e-5;
                let f = |y: &[f64], v: &[f64], r: f64| (problem.big_f)(y, v, r);
                let dx = DVector::from_fn(n, |k, _| {
                    (f(&shifted(x, k, h), &xv, 0.0) - f(&shifted(x, k, -h), &xv, 0.0)) / (2.0 * h)
                });
                let dv: Vec<f64> = (0..n)
                    .map(|k| (f(x, &shifted(&xv, k, h), 0.0) - f(x, &shifted(&xv, k, -h), 0.0)) / (2.0 * h))
                    .collect();
                let dr = (f(x, &xv, h) - f(x, &xv, -h)) / (2.0 * h);
                let inv = metric.inverse(x);
                let cov = |c: &DVector<f64>| (c.transpose() * &inv * c)[(0, 0)].max(0.0).sqrt();
                lip = lip.max(cov(&dx) + cov(&DVector::from_vec(dv)) + dr.abs());
            }
        }
        let (a, b) = second_jet_norms(domain, varphi, x);
        g1 = g1.max(a);
        g2 = g2.max(b);
    }

    // curvature remainder of the distance function
    let mut remainder: f64 = 0.0;
    for (x, y) in &collar {
        let grad_d = |p: &[f64]| {
            let g = DVector::from_vec(domain.grad_d(p));
            (metric.inverse(p) * g).as_slice().to_vec()
        };
        let lap = covariant_divergence(metric, grad_d, x, 1e-5 * reach)?;
        remainder = remainder.max((lap + domain.h_boundary(y)?).abs() / domain.d(x));
    }

    let c2 = SAFETY * (2.0 * g1).max(1.0);
    let c3 = SAFETY * (mu + g2 + remainder + lip);
    let nu = c3.max(1.0);
    let d0 = (reach / 8.0).min(1.0 / (2.0 * c2 * nu));
    let mut out = barrier_formula(c2, c3, c0 + sup_varphi, d0)?;
    out.serrin_margin = Some(serrin.worst_margin);
    Ok(out)
}
