use super::metric::ChartMetric;
use super::warp::Warp;
use crate::error::{PmcError, Result};
use crate::problems::DomainChart;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Order {
    Second,
    Fourth,
}

/// (1/√det σ) ∂_i(√det σ Wⁱ) at x by central differences of step h.
pub fn covariant_divergence<W>(metric: &ChartMetric, w: W, x: &[f64], h: f64) -> Result<f64>
where
    W: Fn(&[f64]) -> Vec<f64>,
{
    covariant_divergence_with(metric, w, x, h, Order::Second)
}

pub fn covariant_divergence_with<W>(metric: &ChartMetric, w: W, x: &[f64], h: f64, order: Order) -> Result<f64>
where
    W: Fn(&[f64]) -> Vec<f64>,
{
    let n = metric.dim;
    let offsets: &[(f64, f64)] = match order {
        Order::Second => &[(1.0, 0.5), (-1.0, -0.5)],
        Order::Fourth => &[(2.0, -1.0 / 12.0), (1.0, 8.0 / 12.0), (-1.0, -8.0 / 12.0), (-2.0, 1.0 / 12.0)],
    };
    let mut total = 0.0;
    for i in 0..n {
        let mut acc = 0.0;
        for &(s, c) in offsets {
            let mut y = x.to_vec();
            y[i] += s * h;
            if !metric.chart_contains(&y) {
                return Err(PmcError::StencilOutOfDomain(x.to_vec()));
            }
            acc += c * metric.sqrt_det(&y) * w(&y)[i];
        }
        total += acc / h;
    }
    Ok(total / metric.sqrt_det(x))
}

/// H of the slice {r = t} in φ²(σ + dr²), for an n-dimensional slice.
pub fn slice_mean_curvature(warp: &Warp, n: usize, t: f64) -> Result<f64> {
    let [p, dp, _] = warp.jet(t);
    if !(p > 0.0) {
        return Err(PmcError::NonpositiveWarp(t));
    }
    Ok(n as f64 * dp / (p * p))
}

/// Mean curvature of ∂Ω at y w.r.t. the outward normal: the analytic value when
/// the shape provides one, otherwise [`boundary_mean_curvature_numeric`].
pub fn boundary_mean_curvature(domain: &DomainChart, y: &[f64]) -> Result<f64> {
    if !domain.has_boundary() {
        return Err(PmcError::NoBoundary);
    }
    match domain.analytic_boundary_curvature(y) {
        Some(h) => Ok(h),
        None => boundary_mean_curvature_numeric(domain, y),
    }
}

/// div_σ(−grad_σ d/|grad_σ d|_σ) at y with nested fourth-order differences.
/// Only the level sets of d matter, so any smooth defining function works.
pub fn boundary_mean_curvature_numeric(domain: &DomainChart, y: &[f64]) -> Result<f64> {
    if !domain.has_boundary() {
        return Err(PmcError::NoBoundary);
    }
    let metric = &domain.metric;
    let n = metric.dim;
    let (h_out, h_in) = (5e-3, 2.5e-3);
    let reach = 2.0 * (h_out + h_in);
    if !domain.distance_valid(y, reach) {
        return Err(PmcError::CollarTooThin(y.to_vec()));
    }
    let normal = |x: &[f64]| -> Vec<f64> {
        let mut grad = vec![0.0; n];
        for (k, gk) in grad.iter_mut().enumerate() {
            let at = |s: f64| {
                let mut z = x.to_vec();
                z[k] += s * h_in;
                domain.d(&z)
            };
            *gk = (-at(2.0) + 8.0 * at(1.0) - 8.0 * at(-1.0) + at(-2.0)) / (12.0 * h_in);
        }
        let inv = metric.inverse(x);
        let up: Vec<f64> = (0..n).map(|i| (0..n).map(|j| inv[(i, j)] * grad[j]).sum()).collect();
        let len = up.iter().zip(&grad).map(|(a, b)| a * b).sum::<f64>().sqrt();
        up.iter().map(|v| -v / len).collect()
    };
    covariant_divergence_with(metric, normal, y, h_out, Order::Fourth)
}

/// min Ric(e, e) over σ-unit directions and the domain's sample points.
/// The direction minimum is taken exactly (smallest generalized eigenvalue)
/// rather than by sampling directions.
pub fn ricci_min_estimate(metric: &ChartMetric, domain: &DomainChart, samples: usize) -> Result<f64> {
    if !metric.is_analytic() {
        return Err(PmcError::UnsupportedMetricKind("grid_sampled"));
    }
    if samples == 0 {
        return Err(PmcError::Invalid("samples must be positive".into()));
    }
    let mut worst = f64::INFINITY;
    for x in domain.sample_points(samples) {
        worst = worst.min(metric.ricci_min_at(&x)?);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::Shape;
    use approx::assert_abs_diff_eq;
    use std::sync::Arc;

    #[test]
    fn divergence_examples() {
        let m = ChartMetric::euclidean(2);
        let x = [0.3, -0.2];
        assert_abs_diff_eq!(covariant_divergence(&m, |y| y.to_vec(), &x, 1e-2).unwrap(), 2.0, epsilon = 1e-12);
        let cap = covariant_divergence(&m, |y| vec![y[0] / 2.0, y[1] / 2.0], &x, 1e-2).unwrap();
        assert_abs_diff_eq!(cap, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(covariant_divergence(&m, |_| vec![3.0, -1.0], &x, 1e-2).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn divergence_second_order_on_curved_metric() {
        let m = ChartMetric::hyperbolic(2);
        let w = |y: &[f64]| vec![y[0].sin() * y[1], y[0] * y[1] * y[1]];
        let x = [0.4, 1.2];
        let e = |h: f64| covariant_divergence(&m, w, &x, h).unwrap();
        let fine = covariant_divergence_with(&m, w, &x, 1e-3, Order::Fourth).unwrap();
        let ratio = (e(0.04) - fine) / (e(0.02) - fine);
        assert!((3.5..4.5).contains(&ratio), "{ratio}");
    }

    #[test]
    fn slice_examples() {
        assert_eq!(slice_mean_curvature(&Warp::Cosh, 2, 0.0).unwrap(), 0.0);
        let exact = 3.0 * 1f64.sinh() / 1f64.cosh().powi(2);
        assert_abs_diff_eq!(slice_mean_curvature(&Warp::Cosh, 3, 1.0).unwrap(), exact, epsilon = 1e-12);
        assert_abs_diff_eq!(exact, 1.480663, epsilon = 1e-6);
        assert!(slice_mean_curvature(&Warp::Cosh, 2, -0.5).unwrap() < 0.0);
        let neg = Warp::Custom(Arc::new(|r| [-r, -1.0, 0.0]));
        assert_eq!(slice_mean_curvature(&neg, 2, 1.0), Err(PmcError::NonpositiveWarp(1.0)));
    }

    #[test]
    fn boundary_curvature_examples() {
        let d = DomainChart::new(ChartMetric::euclidean(2), Shape::disk(0.5));
        assert_abs_diff_eq!(boundary_mean_curvature(&d, &[0.5, 0.0]).unwrap(), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(boundary_mean_curvature_numeric(&d, &[0.3, 0.4]).unwrap(), 2.0, epsilon = 1e-7);
        let ball = DomainChart::new(ChartMetric::euclidean(3), Shape::disk(1.0));
        assert_abs_diff_eq!(boundary_mean_curvature_numeric(&ball, &[0.0, 0.6, 0.8]).unwrap(), 2.0, epsilon = 1e-7);
        let half = DomainChart::new(ChartMetric::euclidean(2), Shape::HalfSpace { level: 0.0 });
        assert_abs_diff_eq!(boundary_mean_curvature(&half, &[1.0, 0.0]).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(boundary_mean_curvature_numeric(&half, &[1.0, 0.0]).unwrap(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn ricci_estimates() {
        let d = DomainChart::new(ChartMetric::euclidean(2), Shape::disk(1.0));
        assert_eq!(ricci_min_estimate(&d.metric, &d, 16).unwrap(), 0.0);
        let polar = ChartMetric::spherical_warped(2, Warp::Identity);
        let dp = DomainChart::new(polar.clone(), Shape::disk(1.0));
        assert_abs_diff_eq!(ricci_min_estimate(&polar, &dp, 16).unwrap(), 0.0, epsilon = 1e-8);
        let hyp = DomainChart::new(ChartMetric::hyperbolic(2), Shape::disk_at([0.0, 2.0], 1.0));
        assert_abs_diff_eq!(ricci_min_estimate(&hyp.metric, &hyp, 16).unwrap(), -1.0, epsilon = 1e-6);
    }
}
