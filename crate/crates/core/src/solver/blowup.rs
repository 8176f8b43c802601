//! Detection of the sets Ω± where u_t diverges as t → 0.

use crate::discretization::Field;
use crate::error::{PmcError, Result};

/// Minimal |t·u_t|, relative to β₂, for a node to count as blowing up.
pub const TU_FRACTION: f64 = 1e-3;
/// Minimal growth exponent p in |u_t| ~ t^{−p} between consecutive levels.
pub const GROWTH_EXPONENT: f64 = 0.5;

/// A solved level of the continuation.
#[derive(Clone, Debug)]
pub struct Level {
    pub t: f64,
    pub u: Field,
}

fn pair_masks(a: &Level, b: &Level, beta2: f64) -> (Vec<bool>, Vec<bool>) {
    let n = b.u.values.len();
    let mut plus = vec![false; n];
    let mut minus = vec![false; n];
    let log_t = (a.t / b.t).ln();
    for p in 0..n {
        let (ua, ub) = (a.u.values[p], b.u.values[p]);
        if ua * ub <= 0.0 || (b.t * ub).abs() < TU_FRACTION * beta2 {
            continue;
        }
        let growth = (ub.abs() / ua.abs()).ln() / log_t;
        if growth >= GROWTH_EXPONENT {
            if ub > 0.0 {
                plus[p] = true;
            } else {
                minus[p] = true;
            }
        }
    }
    (plus, minus)
}

/// Ω⁺ and Ω⁻ masks from the last recorded levels (strictly decreasing t).
///
/// A node belongs to Ω± when, at the last two level pairs, ±u_t > 0,
/// |t·u_t| ≥ 10⁻³·β₂ and |u_t| grows at least like t^{−1/2}. Bounded
/// families give empty masks. With only two levels one pair is used.
pub fn detect_blow_up_sets(history: &[Level], beta2: f64) -> Result<(Vec<bool>, Vec<bool>)> {
    if history.len() < 2 {
        return Err(PmcError::InsufficientHistory);
    }
    let k = history.len();
    let (mut plus, mut minus) = pair_masks(&history[k - 2], &history[k - 1], beta2);
    if k >= 3 {
        let (p2, m2) = pair_masks(&history[k - 3], &history[k - 2], beta2);
        plus.iter_mut().zip(p2).for_each(|(a, b)| *a &= b);
        minus.iter_mut().zip(m2).for_each(|(a, b)| *a &= b);
    }
    Ok((plus, minus))
}
