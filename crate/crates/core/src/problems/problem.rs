use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::geometry::ChartMetric;

/// F(x, X, r): point, tangent vector (standing for −Du/ω), real (standing for 1/ω).
pub type FFn = Arc<dyn Fn(&[f64], &[f64], f64) -> f64 + Send + Sync>;
/// φ(x, z, X, r).
pub type PhiFn = Arc<dyn Fn(&[f64], f64, &[f64], f64) -> f64 + Send + Sync>;
pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type TensorFn = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;

/// Data (F, φ, ψ, t) of the regularized Dirichlet problem
///
///   −div(Du/ω) − F(x, −Du/ω, 1/ω) + (φ(x, u, −Du/ω, 1/ω) + t·u)/ω = 0,  u = ψ on ∂Ω.
///
/// With this residual the graph's mean curvature H = div(Du/ω) equals
/// −F + (φ + tu)/ω; in particular `make_cmc(c)` stores F ≡ −c so that its
/// solutions have H = c (the lower spherical cap of radius R has c = n/R).
#[derive(Clone)]
pub struct PMCProblem {
    pub name: String,
    pub big_f: FFn,
    pub phi: PhiFn,
    /// True when φ ≡ 0 (enables radial reduction).
    pub phi_is_zero: bool,
    /// β: a lower bound of ∂φ/∂z, not counting the t·z term.
    pub dphi_dz_lower_bound: f64,
    /// Boundary data, given on the whole chart; its restriction to Ω̄ serves as
    /// the extension ψ̃ used by barriers. `None` on closed domains.
    pub psi: Option<ScalarFn>,
    pub t: f64,
    /// H(r) for rotationally symmetric data with φ ≡ 0: div(Du/ω) = H(r).
    pub radial_source: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
}

impl fmt::Debug for PMCProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PMCProblem")
            .field("name", &self.name)
            .field("beta", &self.dphi_dz_lower_bound)
            .field("t", &self.t)
            .field("has_psi", &self.psi.is_some())
            .finish()
    }
}

impl PMCProblem {
    pub fn new(name: impl Into<String>, big_f: FFn, phi: Option<PhiFn>, beta: f64) -> Self {
        assert!(beta >= 0.0, "dphi/dz lower bound must be nonnegative");
        let phi_is_zero = phi.is_none();
        PMCProblem {
            name: name.into(),
            big_f,
            phi: phi.unwrap_or_else(|| Arc::new(|_, _, _, _| 0.0)),
            phi_is_zero,
            dphi_dz_lower_bound: beta,
            psi: None,
            t: 0.0,
            radial_source: None,
        }
    }

    pub fn with_psi(mut self, psi: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        self.psi = Some(Arc::new(psi));
        self
    }

    pub fn with_constant_psi(self, value: f64) -> Self {
        self.with_psi(move |_| value)
    }

    pub fn with_t(mut self, t: f64) -> Self {
        assert!(t >= 0.0);
        self.t = t;
        self
    }

    /// f(x, X) = F(x, X, 0).
    pub fn f(&self, x: &[f64], v: &[f64]) -> f64 {
        (self.big_f)(x, v, 0.0)
    }

    pub fn beta(&self) -> f64 {
        self.dphi_dz_lower_bound
    }

    pub fn needs_continuation(&self) -> bool {
        self.t == 0.0 && self.dphi_dz_lower_bound == 0.0
    }

    pub fn psi_at(&self, x: &[f64]) -> f64 {
        self.psi.as_ref().map_or(0.0, |p| p(x))
    }
}

/// Constant mean curvature c: div(Du/ω) = c, i.e. F ≡ −c, φ ≡ 0.
pub fn make_cmc(c: f64) -> PMCProblem {
    let mut p = PMCProblem::new(format!("cmc({c})"), Arc::new(move |_, _, _| -c), None, 0.0);
    p.radial_source = Some(Arc::new(move |_| c));
    p
}

/// Jang-type data: F(x, X, r) = tr_σ k(x) − k(X, X), φ ≡ 0.
pub fn make_jang(metric: ChartMetric, k: TensorFn) -> PMCProblem {
    let f: FFn = Arc::new(move |x, v, _| {
        let km = k(x);
        let tr = (metric.inverse(x).component_mul(&km)).sum();
        let v = DVector::from_column_slice(v);
        tr - (v.transpose() * &km * &v)[(0, 0)]
    });
    PMCProblem::new("jang", f, None, 0.0)
}

/// Conformal factor f on N×ℝ for [`make_conformal_minimal`]. The x-gradient
/// must not depend on the height coordinate, since F cannot see u.
#[derive(Clone)]
pub struct ConformalFactor {
    pub grad_x: Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>,
    pub d_height: Arc<dyn Fn(&[f64], f64) -> f64 + Send + Sync>,
    /// inf ∂²f/∂z², used for the monotonicity bound of φ.
    pub d2_height_lower_bound: f64,
}

/// Minimal graphs in the conformal metric e^{2f}(σ + dz²):
///   −div(Du/ω) + n⟨Df, −Du/ω⟩ + n ∂_z f/ω = 0,
/// realized as F(x, X, r) = −n⟨D_x f, X⟩ and φ(x, z, X, r) = n ∂_z f(x, z).
pub fn make_conformal_minimal(n: usize, fconf: ConformalFactor) -> PMCProblem {
    let nf = n as f64;
    let g = fconf.grad_x.clone();
    let f: FFn = Arc::new(move |x, v, _| -nf * g(x).iter().zip(v).map(|(a, b)| a * b).sum::<f64>());
    let dz = fconf.d_height.clone();
    let phi: PhiFn = Arc::new(move |x, z, _, _| nf * dz(x, z));
    PMCProblem::new("conformal_minimal", f, Some(phi), (nf * fconf.d2_height_lower_bound).max(0.0))
}

/// F ≡ f0, φ(x, z) = slope·z + offset(x).
pub fn make_custom(f0: f64, slope: f64, offset: ScalarFn) -> PMCProblem {
    assert!(slope >= 0.0, "phi must be nondecreasing in z");
    let phi: PhiFn = Arc::new(move |x, z, _, _| slope * z + offset(x));
    PMCProblem::new("custom", Arc::new(move |_, _, _| f0), Some(phi), slope)
}
