//! Sampled a-priori bounds for the regularized and the strictly monotone problem.

use serde::{Deserialize, Serialize};

use crate::error::{PmcError, Result};
use crate::problems::domain::unit_directions;
use crate::problems::{DomainChart, PMCProblem};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AprioriBounds {
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta2: f64,
}

const SAMPLE_POINTS: usize = 400;
const SAMPLE_DIRECTIONS: usize = 24;

/// Chart vectors X with |X|_σ ∈ {0, ½, 1} at x.
fn tangent_samples(domain: &DomainChart, x: &[f64]) -> Vec<Vec<f64>> {
    let n = domain.dim();
    let mut out = vec![vec![0.0; n]];
    for d in unit_directions(n, SAMPLE_DIRECTIONS) {
        let s = domain.metric.norm_vec(x, &d);
        for scale in [0.5, 1.0] {
            out.push(d.iter().map(|c| c * scale / s).collect());
        }
    }
    out
}

const R_SAMPLES: [f64; 5] = [-1.0, -0.5, 0.0, 0.5, 1.0];

/// sup over sampled x ∈ Ω̄, |X| ≤ 1, |r| ≤ 1 and z ∈ zs(x) of |F| + |φ|.
fn sup_data(problem: &PMCProblem, domain: &DomainChart, zs: impl Fn(&[f64]) -> Vec<f64>) -> f64 {
    let mut m = 0.0f64;
    for x in domain.sample_points(SAMPLE_POINTS) {
        for v in tangent_samples(domain, &x) {
            for r in R_SAMPLES {
                let f = (problem.big_f)(&x, &v, r).abs();
                for z in zs(&x) {
                    m = m.max(f + (problem.phi)(&x, z, &v, r).abs());
                }
            }
        }
    }
    m
}

fn sup_psi(problem: &PMCProblem, domain: &DomainChart) -> f64 {
    if !domain.has_boundary() {
        return 0.0;
    }
    domain.boundary_samples(SAMPLE_POINTS).map_or(0.0, |b| b.iter().map(|y| problem.psi_at(y).abs()).fold(0.0, f64::max))
}

/// β₂ bounding |t·u_t| for the regularized family: max{sup|ψ|, sup(|F| + |φ|)}
/// with |z| ≤ sup|ψ|.
pub fn beta2(problem: &PMCProblem, domain: &DomainChart) -> f64 {
    let psi = sup_psi(problem, domain);
    let data = sup_data(problem, domain, |_| vec![-psi, 0.0, psi]);
    psi.max(data)
}

/// α₁ (Dirichlet), α₂ (closed) and β₂ from sampled suprema of the data.
pub fn apriori_bounds(problem: &PMCProblem, domain: &DomainChart) -> Result<AprioriBounds> {
    let beta = problem.beta();
    if beta <= 0.0 {
        return Err(PmcError::ZeroBeta);
    }
    let psi = sup_psi(problem, domain);
    let a1 = sup_data(problem, domain, |x| vec![problem.psi_at(x)]) / beta + psi + 1.0;
    let a2 = sup_data(problem, domain, |_| vec![0.0]) / beta + 1.0;
    Ok(AprioriBounds { alpha1: a1, alpha2: a2, beta2: beta2(problem, domain) })
}
