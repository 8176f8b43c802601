use crate::discretization::radial::FLUX_TOL;
pub use crate::discretization::RadialODE;
use crate::quad::adaptive_simpson;

/// Saturation threshold on Φ/J.
pub const SATURATION: f64 = 1.0 - 1e-12;
/// Largest ratio for which the exact radial solution is reconstructed.
pub const EXACT_RATIO_LIMIT: f64 = 0.9;
const SCAN_SAMPLES: usize = 4096;

/// Exact radial solution u(r) = ∫₀ʳ Φ/√(J² − Φ²), normalized by u(0) = 0.
#[derive(Clone, Debug)]
pub struct ExactRadial {
    ode: RadialODE,
}

impl ExactRadial {
    pub fn u(&self, r: f64) -> f64 {
        adaptive_simpson(&|s: f64| self.ode.slope(s), 0.0, r, 1e-12)
    }

    pub fn slope(&self, r: f64) -> f64 {
        self.ode.slope(r)
    }
}

#[derive(Clone, Debug)]
pub struct FluxAnalysis {
    pub saturation_radius: Option<f64>,
    /// (r, Φ/J) on the scan lattice.
    pub samples: Vec<(f64, f64)>,
    pub max_ratio: f64,
    pub exact: Option<ExactRadial>,
}

impl FluxAnalysis {
    /// 1 − max Φ/J: positive when the flux never saturates.
    pub fn margin(&self) -> f64 {
        1.0 - self.max_ratio
    }
}

/// Locates the smallest r with Φ(r)/J(r) ≥ 1 − 1e−12: no graph flux |Du/ω| < 1
/// can carry the source beyond it, so solutions cannot exist on balls reaching it.
pub fn flux_analysis(ode: &RadialODE) -> FluxAnalysis {
    let dr = ode.r_max / SCAN_SAMPLES as f64;
    let integrand = |s: f64| ode.j(s) * (ode.rhs)(s);
    let mut samples = Vec::with_capacity(SCAN_SAMPLES);
    let mut phi = 0.0;
    let mut bracket = None;
    let mut max_ratio: f64 = 0.0;
    for k in 1..=SCAN_SAMPLES {
        let (a, b) = ((k - 1) as f64 * dr, k as f64 * dr);
        phi += adaptive_simpson(&integrand, a, b, FLUX_TOL / SCAN_SAMPLES as f64);
        let ratio = phi / ode.j(b);
        samples.push((b, ratio));
        max_ratio = max_ratio.max(ratio);
        if ratio >= SATURATION {
            bracket = Some((a, b));
            break;
        }
    }
    let saturation_radius = bracket.map(|(mut lo, mut hi)| {
        // ratio(lo) < threshold <= ratio(hi)
        while hi - lo > 1e-12 * hi.max(1.0) {
            let mid = 0.5 * (lo + hi);
            if ode.ratio(mid) >= SATURATION {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    });
    let exact = (saturation_radius.is_none() && samples.iter().all(|(_, q)| q.abs() <= EXACT_RATIO_LIMIT))
        .then(|| ExactRadial { ode: ode.clone() });
    FluxAnalysis { saturation_radius, samples, max_ratio, exact }
}
