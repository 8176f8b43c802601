//! A rotationally symmetric manifold on which −div(Du/ω) + β = 0 has no
//! solution although the boundary is strictly mean convex: the Euclidean ball
//! of radius n/β sits inside it, and on that ball the source flux β·|B|
//! equals the boundary area, which a graph flux |Du/ω| < 1 cannot carry.

use super::domain::{DomainChart, Shape};
use super::problem::{make_cmc, PMCProblem};
use crate::geometry::{BridgeWarp, ChartMetric, Warp};
use crate::quad::{adaptive_simpson, sphere_area};

#[derive(Clone, Debug)]
pub struct Counterexample {
    pub beta: f64,
    pub n: usize,
    /// The exponential rate, also the radius of the manifold.
    pub k: f64,
    pub warp: BridgeWarp,
    pub metric: ChartMetric,
    pub domain: DomainChart,
    pub problem: PMCProblem,
}

/// h(r) = r on [0, n/β), e^{kr} on [k, ∞) with k = 1.25·max{β, n/β}, bridged
/// by a log-space quintic; domain: the cap r < k; data: H ≡ β, ψ ≡ 0.
pub fn counterexample_problem(beta: f64, n: usize) -> Counterexample {
    let r0 = n as f64 / beta;
    counterexample_problem_with_k(beta, n, 1.25 * r0.max(beta))
}

pub fn counterexample_problem_with_k(beta: f64, n: usize, k: f64) -> Counterexample {
    assert!(beta > 0.0 && n >= 2);
    let r0 = n as f64 / beta;
    assert!(k > r0.max(beta), "k must exceed max(beta, n/beta)");
    let warp = BridgeWarp::new(r0, k);
    let metric = ChartMetric::spherical_warped(n, Warp::Bridged(warp.clone()));
    let domain = DomainChart::new(metric.clone(), Shape::PolarCap { r_max: k });
    let problem = make_cmc(beta).with_constant_psi(0.0);
    Counterexample { beta, n, k, warp, metric, domain, problem }
}

impl Counterexample {
    /// (n−1)h'/h on the sphere r = const.
    pub fn sphere_curvature(&self, r: f64) -> f64 {
        let [h, dh, _] = self.warp.jet(r);
        (self.n as f64 - 1.0) * dh / h
    }

    /// Mean curvature of ∂M; equals (n−1)k.
    pub fn boundary_curvature(&self) -> f64 {
        self.sphere_curvature(self.k)
    }

    /// Radius of the inner sphere with mean curvature β.
    pub fn beta_sphere_radius(&self) -> f64 {
        (self.n as f64 - 1.0) / self.beta
    }

    /// Radius of the Euclidean ball inside M.
    pub fn euclidean_radius(&self) -> f64 {
        self.n as f64 / self.beta
    }

    /// |M_r| = ω_{n−1}∫_0^r h^{n−1}, by adaptive quadrature.
    pub fn volume(&self, r: f64) -> f64 {
        let n = self.n as i32;
        let f = |s: f64| self.warp.jet(s)[0].powi(n - 1);
        sphere_area(self.n) * adaptive_simpson(&f, 0.0, r, 1e-12)
    }

    /// |∂M_r| = ω_{n−1} h(r)^{n−1}.
    pub fn area(&self, r: f64) -> f64 {
        sphere_area(self.n) * self.warp.jet(r)[0].powi(self.n as i32 - 1)
    }
}
