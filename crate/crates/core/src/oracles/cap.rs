use crate::geometry::ChartMetric;
use crate::problems::{make_cmc, DomainChart, PMCProblem, Shape};

/// The lower spherical cap u = −√(R² − |x|²) over the Euclidean disk of
/// radius a < R: a graph of constant mean curvature n/R.
#[derive(Clone, Debug, PartialEq)]
pub struct CapOracle {
    pub radius: f64,
    pub a: f64,
    pub n: usize,
    /// div(Du/ω) of the cap.
    pub f: f64,
}

pub fn spherical_cap_oracle(radius: f64, a: f64, n: usize) -> CapOracle {
    assert!(0.0 < a && a < radius, "need 0 < a < R");
    CapOracle { radius, a, n, f: n as f64 / radius }
}

impl CapOracle {
    pub fn u(&self, x: &[f64]) -> f64 {
        -(self.radius * self.radius - x.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    /// Boundary value on |x| = a.
    pub fn psi(&self) -> f64 {
        -(self.radius * self.radius - self.a * self.a).sqrt()
    }

    /// |Du| = |x|/√(R² − |x|²).
    pub fn grad_norm(&self, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        (r2 / (self.radius * self.radius - r2)).sqrt()
    }

    pub fn domain(&self) -> DomainChart {
        DomainChart::new(ChartMetric::euclidean(self.n), Shape::disk(self.a))
    }

    /// make_cmc(n/R) with the cap itself as boundary data (and extension).
    pub fn problem(&self) -> PMCProblem {
        let me = self.clone();
        make_cmc(self.f).with_psi(move |x| me.u(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::covariant_divergence;
    use approx::assert_abs_diff_eq;

    #[test]
    fn unit_curvature_cap() {
        let c = spherical_cap_oracle(2.0, 1.0, 2);
        assert_eq!(c.f, 1.0);
        assert_eq!(c.u(&[0.0, 0.0]), -2.0);
        assert_abs_diff_eq!(c.psi(), -3f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(c.grad_norm(&[0.5, 0.0]), 0.5 / 3.75f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn three_dimensional_cap() {
        assert_eq!(spherical_cap_oracle(1.0, 0.5, 3).f, 3.0);
    }

    #[test]
    fn large_radius_flattens() {
        let c = spherical_cap_oracle(1e8, 1.0, 2);
        assert!(c.f < 1e-7);
        assert!((c.u(&[0.5, 0.5]) - c.u(&[0.0, 0.0])).abs() < 1e-8);
    }

    #[test]
    fn divergence_of_unit_normal_is_n_over_r() {
        let c = spherical_cap_oracle(2.0, 1.0, 3);
        let m = ChartMetric::euclidean(3);
        // Du/ω = x/R for the lower cap
        let w = |x: &[f64]| {
            let s = (4.0 - x.iter().map(|v| v * v).sum::<f64>()).sqrt();
            let du: Vec<f64> = x.iter().map(|v| v / s).collect();
            let om = (1.0 + du.iter().map(|v| v * v).sum::<f64>()).sqrt();
            du.iter().map(|v| v / om).collect()
        };
        let d = covariant_divergence(&m, w, &[0.3, -0.2, 0.4], 1e-3).unwrap();
        assert_abs_diff_eq!(d, c.f, epsilon = 1e-6);
    }
}
