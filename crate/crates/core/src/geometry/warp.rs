//! Scalar warp profiles for conformal products φ²(σ + dr²) and
//! rotationally symmetric metrics h²(r)σ_{n−1} + dr².

use std::sync::Arc;

/// Value, first and second derivative of a warp at one point.
pub type WarpJet = [f64; 3];

#[derive(Clone)]
pub enum Warp {
    /// h(r) = r: the Euclidean metric in polar form.
    Identity,
    /// φ(r) = cosh r.
    Cosh,
    /// φ(r) = 1/r: the upper half-space model of hyperbolic space.
    Reciprocal,
    /// The piecewise profile r ↦ r, bridge, e^{kr}.
    Bridged(BridgeWarp),
    Custom(Arc<dyn Fn(f64) -> WarpJet + Send + Sync>),
}

impl std::fmt::Debug for Warp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Warp::Identity => write!(f, "Identity"),
            Warp::Cosh => write!(f, "Cosh"),
            Warp::Reciprocal => write!(f, "Reciprocal"),
            Warp::Bridged(b) => write!(f, "Bridged(r0={}, k={})", b.r0, b.k),
            Warp::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl Warp {
    pub fn jet(&self, r: f64) -> WarpJet {
        match self {
            Warp::Identity => [r, 1.0, 0.0],
            Warp::Cosh => [r.cosh(), r.sinh(), r.cosh()],
            Warp::Reciprocal => [1.0 / r, -1.0 / (r * r), 2.0 / (r * r * r)],
            Warp::Bridged(b) => b.jet(r),
            Warp::Custom(f) => f(r),
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        self.jet(r)[0]
    }

    pub fn derivative(&self, r: f64) -> f64 {
        self.jet(r)[1]
    }
}

/// h(r) = r on [0, r0), h(r) = e^{kr} on [k, ∞), and on [r0, k] a quintic in
/// log h matching ln h and its first two derivatives at both ends. Working in
/// log space keeps h positive for any coefficients; monotonicity is checked
/// at construction.
#[derive(Clone, Debug)]
pub struct BridgeWarp {
    pub r0: f64,
    pub k: f64,
    coeffs: [f64; 6],
}

impl BridgeWarp {
    pub fn new(r0: f64, k: f64) -> Self {
        assert!(r0 > 0.0 && k > r0, "bridge needs 0 < r0 < k");
        let len = k - r0;
        // ln h and its r-derivatives at both ends, rescaled to s = (r - r0)/len
        let (a0, a1, a2) = (r0.ln(), len / r0, -len * len / (r0 * r0));
        let (b0, b1, b2) = (k * k, k * len, 0.0);
        let (c0, c1, c2) = (a0, a1, 0.5 * a2);
        let e0 = b0 - c0 - c1 - c2;
        let e1 = b1 - c1 - 2.0 * c2;
        let e2 = b2 - 2.0 * c2;
        let c3 = 10.0 * e0 - 4.0 * e1 + 0.5 * e2;
        let c4 = -15.0 * e0 + 7.0 * e1 - e2;
        let c5 = 6.0 * e0 - 3.0 * e1 + 0.5 * e2;
        let b = BridgeWarp { r0, k, coeffs: [c0, c1, c2, c3, c4, c5] };
        debug_assert!(b.is_monotone(2000));
        b
    }

    fn log_jet(&self, s: f64) -> [f64; 3] {
        let c = &self.coeffs;
        let g = c[0] + s * (c[1] + s * (c[2] + s * (c[3] + s * (c[4] + s * c[5]))));
        let gs = c[1] + s * (2.0 * c[2] + s * (3.0 * c[3] + s * (4.0 * c[4] + s * 5.0 * c[5])));
        let gss = 2.0 * c[2] + s * (6.0 * c[3] + s * (12.0 * c[4] + s * 20.0 * c[5]));
        [g, gs, gss]
    }

    pub fn jet(&self, r: f64) -> WarpJet {
        if r < self.r0 {
            [r, 1.0, 0.0]
        } else if r >= self.k {
            let e = (self.k * r).exp();
            [e, self.k * e, self.k * self.k * e]
        } else {
            let len = self.k - self.r0;
            let [g, gs, gss] = self.log_jet((r - self.r0) / len);
            let (gr, grr) = (gs / len, gss / (len * len));
            let e = g.exp();
            [e, gr * e, (grr + gr * gr) * e]
        }
    }

    /// Checks h' > 0 on a uniform sample of the bridge.
    pub fn is_monotone(&self, samples: usize) -> bool {
        (0..=samples).all(|i| self.log_jet(i as f64 / samples as f64)[1] > 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn bridge_matches_two_derivatives_at_both_ends() {
        let b = BridgeWarp::new(2.0, 2.5);
        let eps = 1e-12;
        for r in [2.0, 2.5] {
            let lo = b.jet(r - eps);
            let hi = b.jet(r + eps);
            for d in 0..3 {
                assert_relative_eq!(lo[d], hi[d], epsilon = 1e-7, max_relative = 1e-8);
            }
        }
    }

    #[test]
    fn bridge_monotone_for_shipped_parameters() {
        for (beta, n) in [(0.5, 2.0), (1.0, 2.0), (2.0, 2.0), (0.5, 3.0), (1.0, 3.0), (2.0, 3.0)] {
            let r0: f64 = n / beta;
            let k = 1.25 * r0.max(beta);
            assert!(BridgeWarp::new(r0, k).is_monotone(5000), "beta={beta} n={n}");
        }
    }

    #[test]
    fn reciprocal_derivatives() {
        let [v, d, dd] = Warp::Reciprocal.jet(2.0);
        assert_eq!((v, d, dd), (0.5, -0.25, 0.25));
    }
}
