//! Simple diagnostics of colour-blind data.

use crate::dist::DistributionSpec;
use crate::empirical::ColourBlindSample;
use crate::error::{Error, Result};

/// Expected cross probability `P(Uⱼ > Vᵢ)`, `i ≠ j`, under the null.
pub const NULL_CROSS_PROBABILITY: f64 = 5.0 / 6.0;

/// U-statistic `(1/(n(n−1)))·Σ_{i≠j} 1{uⱼ > vᵢ}` in `O(n log n)`.
pub fn cross_probability(s: &ColourBlindSample) -> Result<f64> {
    let n = s.n();
    if n < 2 {
        return Err(Error::Domain(format!("cross probability needs n >= 2, got {n}")));
    }
    let mut minima: Vec<f64> = s.minima().collect();
    minima.sort_unstable_by(f64::total_cmp);
    let mut count: u64 = 0;
    for &(u, v) in s.pairs() {
        count += minima.partition_point(|&m| m < u) as u64;
        if u > v {
            count -= 1;
        }
    }
    Ok(count as f64 / (n as f64 * (n - 1) as f64))
}

/// `(P₁P₂, ((P₁+P₂)/2)², (1 − √((1−P₁)(1−P₂)))²)` at `x`.
///
/// The first is the CDF of the maxima, the last bounds it from above given
/// only the pooled marginal.
pub fn inequality_chain(p1: &DistributionSpec, p2: &DistributionSpec, x: f64) -> Result<(f64, f64, f64)> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("x = {x} outside [0, 1]")));
    }
    Ok(chain_values(p1.cdf(x), p2.cdf(x)))
}

/// The chain for CDF values `a = P₁(x)`, `b = P₂(x)`.
pub fn chain_values(a: f64, b: f64) -> (f64, f64, f64) {
    let lo = a * b;
    let m = 0.5 * (a + b);
    let mid = (m * m).max(lo);
    let r = 1.0 - ((1.0 - a) * (1.0 - b)).max(0.0).sqrt();
    let hi = (r * r).max(mid);
    (lo, mid, hi)
}
