use nalgebra::{DMatrix, DVector};

/// Pointwise geometry of the graph of u in N×ℝ.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphGeometry {
    pub omega: f64,
    pub theta: f64,
    /// Upward unit normal (−Du/ω, 1/ω): n raised components followed by the vertical one.
    pub normal: Vec<f64>,
    pub induced_metric: DMatrix<f64>,
    pub induced_inverse: DMatrix<f64>,
    pub second_form_sq: f64,
    /// div(Du/ω), computed by the caller's divergence stencil.
    pub mean_curvature: f64,
}

impl GraphGeometry {
    /// Builds the pointwise quantities from σ, the differential du (a covector)
    /// and the covariant Hessian u_{;ij}.
    pub fn from_jet(sigma: &DMatrix<f64>, du: &DVector<f64>, hess: &DMatrix<f64>, mean_curvature: f64) -> Self {
        let sigma_inv = sigma.clone().try_inverse().expect("metric must be positive definite");
        let up = &sigma_inv * du;
        let grad_sq = du.dot(&up);
        let omega = (1.0 + grad_sq).sqrt();
        let induced_metric = sigma + du * du.transpose();
        let induced_inverse = &sigma_inv - &up * up.transpose() / (omega * omega);
        let v = &induced_inverse * hess / omega;
        let second_form_sq = (&v * &v).trace();
        let mut normal: Vec<f64> = up.iter().map(|c| -c / omega).collect();
        normal.push(1.0 / omega);
        GraphGeometry {
            omega,
            theta: 1.0 / omega,
            normal,
            induced_metric,
            induced_inverse,
            second_form_sq,
            mean_curvature,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn cap_at_center() {
        let g = GraphGeometry::from_jet(
            &DMatrix::identity(2, 2),
            &DVector::zeros(2),
            &(DMatrix::identity(2, 2) * 0.5),
            1.0,
        );
        assert_eq!(g.theta, 1.0);
        assert_abs_diff_eq!(g.second_form_sq, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn plane() {
        let g = GraphGeometry::from_jet(
            &DMatrix::identity(2, 2),
            &DVector::from_vec(vec![3.0, 0.0]),
            &DMatrix::zeros(2, 2),
            0.0,
        );
        assert_abs_diff_eq!(g.theta, 1.0 / 10f64.sqrt(), epsilon = 1e-15);
        assert_eq!(g.second_form_sq, 0.0);
    }

    proptest! {
        #[test]
        fn invariants(p in prop::collection::vec(-5.0f64..5.0, 2), s in 0.2f64..3.0, q in -2.0f64..2.0,
                      h in prop::collection::vec(-3.0f64..3.0, 3)) {
            let sigma = DMatrix::from_row_slice(2, 2, &[s, 0.3 * q.tanh(), 0.3 * q.tanh(), 1.0 + s * s]);
            let du = DVector::from_vec(p);
            let hess = DMatrix::from_row_slice(2, 2, &[h[0], h[1], h[1], h[2]]);
            let g = GraphGeometry::from_jet(&sigma, &du, &hess, 0.0);
            prop_assert!(g.theta > 0.0 && g.theta <= 1.0);
            prop_assert!((g.theta * g.omega - 1.0).abs() < 1e-15);
            prop_assert!(g.second_form_sq >= -1e-12);
            prop_assert!((&g.induced_metric * &g.induced_inverse - DMatrix::identity(2, 2)).amax() < 1e-10);
            prop_assert!(g.induced_metric.clone().cholesky().is_some());
            // the normal is σ+dr² unit length
            let nv = DVector::from_column_slice(&g.normal[..2]);
            let len = (nv.transpose() * &sigma * &nv)[(0, 0)] + g.normal[2] * g.normal[2];
            prop_assert!((len - 1.0).abs() < 1e-12);
        }
    }
}
