//! Statistics built from the maxima process `Rₙ⁽²⁾(u) = Rₙˢ(u, u)`.
//!
//! Inner products `⟨α, β⟩_{Q²}` integrate against `dQ²(x) = 2Q(x)q(x)dx`.

use std::sync::Arc;

use crate::dist::{q_direction, DistributionSpec, EqualityAlternative, RealFn, TABLE_CELLS};
use crate::empirical::ColourBlindSample;
use crate::error::{Error, Result};
use crate::quadrature::{cumulative_simpson, simpson_cell, NodeGrid};

const Q2_PANELS: usize = 2048;
const CONE_TOL: f64 = -1e-10;
const H_FLOOR: f64 = 1e-8;

/// `(1/√n)·Σ α(uᵢ) − √n·∫α dQₙ²`.
pub fn maxima_stat(s: &ColourBlindSample, alpha: impl Fn(f64) -> f64) -> f64 {
    let n = s.n() as f64;
    let mean = s.maxima().map(&alpha).sum::<f64>() / n;
    // Summation by parts: ∫α dQₙ² = α(W_max) − Σ Qₙ²(Wⱼ)·[α(Wⱼ₊₁) − α(Wⱼ)].
    let w = s.pooled();
    let m = w.len() as f64;
    let mut integral = 0.0;
    let mut j = 0;
    let mut last = 0.0;
    while j < w.len() {
        let x = w[j];
        while j < w.len() && w[j] == x {
            j += 1;
        }
        let ax = alpha(x);
        if j < w.len() {
            let q = j as f64 / m;
            integral -= q * q * (alpha(w[j]) - ax);
        }
        last = ax;
    }
    n.sqrt() * (mean - (last + integral))
}

/// Running tail integral `x ↦ ∫ₓ¹ α dQ`, tabulated.
fn tail_integral(alpha: &RealFn, q: &DistributionSpec) -> Result<RealFn> {
    let a = alpha.clone();
    let qd = q.clone();
    let f = move |t: f64| a(t) * qd.density(t);
    let table = Arc::new(cumulative_simpson(&f, TABLE_CELLS)?);
    let total = *table.last().unwrap();
    Ok(Arc::new(move |x: f64| {
        if x <= 0.0 {
            return total;
        }
        if x >= 1.0 {
            return 0.0;
        }
        let pos = x * TABLE_CELLS as f64;
        let k = (pos.floor() as usize).min(TABLE_CELLS - 1);
        let left = k as f64 / TABLE_CELLS as f64;
        total - table[k] - simpson_cell(&f, left, x)
    }))
}

/// `Sα(x) = α(x)Q(x) + 4∫ₓ¹ α dQ`.
pub fn s_operator(alpha: RealFn, q: &DistributionSpec) -> Result<RealFn> {
    let tail = tail_integral(&alpha, q)?;
    let qd = q.clone();
    Ok(Arc::new(move |x| alpha(x) * qd.cdf(x) + 4.0 * tail(x)))
}

/// `∫ f dQ²` by composite Simpson.
pub fn q2_integral(f: impl Fn(f64) -> f64, q: &DistributionSpec) -> Result<f64> {
    let grid = NodeGrid::new(Q2_PANELS);
    let mut acc = 0.0;
    for (&x, &w) in grid.nodes.iter().zip(&grid.weights) {
        let v = f(x) * 2.0 * q.cdf(x) * q.density(x);
        if !v.is_finite() {
            return Err(Error::NonFinite {
                value: v,
                location: format!("Q²-integrand at x = {x}"),
            });
        }
        acc += w * v;
    }
    Ok(acc)
}

/// `⟨α, β⟩_{Q²}`.
pub fn q2_inner(a: impl Fn(f64) -> f64, b: impl Fn(f64) -> f64, q: &DistributionSpec) -> Result<f64> {
    q2_integral(|x| a(x) * b(x), q)
}

/// Asymptotic variance of `Rₙ⁽²⁾(α)` through the `S` operator.
///
/// Equals `⟨α, α⟩_{Q²} − ⟨α, Sα⟩_{Q²}` after centring `α` under `Q²`.
pub fn maxima_variance(alpha: &RealFn, q: &DistributionSpec) -> Result<f64> {
    let mean = q2_integral(|x| alpha(x), q)?;
    let a = alpha.clone();
    let centred: RealFn = Arc::new(move |x| a(x) - mean);
    let s_alpha = s_operator(centred.clone(), q)?;
    let aa = q2_inner(|x| centred(x), |x| centred(x), q)?;
    let asa = q2_inner(|x| centred(x), |x| s_alpha(x), q)?;
    Ok(aa - asa)
}

/// Quadrature summary of a maxima statistic under an equality alternative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaximaSnr {
    /// `⟨α, q⟩_{Q²}`.
    pub inner: f64,
    /// `−ε²·⟨α, q⟩_{Q²}`: mean of the statistic divided by `√n`.
    pub shift_per_root_n: f64,
    /// `∫ q(z) d(z³)` for the alternative's `q`.
    pub cubic_moment: f64,
    pub variance: f64,
    /// `√n·ε²·|⟨α, q⟩| / √variance`.
    pub snr: f64,
}

/// Signal-to-noise ratio of the maxima statistic with weight `α`.
pub fn snr_maxima(alpha: &RealFn, alt: &EqualityAlternative, n: usize) -> Result<MaximaSnr> {
    let q = alt.base();
    let variance = maxima_variance(alpha, q)?;
    let scale = q2_integral(|x| alpha(x) * alpha(x), q)?;
    if !(variance > 1e-14 * scale.max(f64::MIN_POSITIVE)) {
        return Err(Error::IllPosed(format!(
            "maxima statistic has non-positive variance {variance:e}"
        )));
    }
    let qd = q_direction(alt);
    let inner = q2_inner(|x| alpha(x), |x| qd(x), q)?;
    let grid = NodeGrid::new(Q2_PANELS);
    let cubic_moment: f64 = grid
        .nodes
        .iter()
        .zip(&grid.weights)
        .map(|(&x, &w)| w * qd(x) * 3.0 * x * x)
        .sum();
    let eps2 = alt.epsilon() * alt.epsilon();
    Ok(MaximaSnr {
        inner,
        shift_per_root_n: -eps2 * inner,
        cubic_moment,
        variance,
        snr: (n as f64).sqrt() * eps2 * inner.abs() / variance.sqrt(),
    })
}

/// Result of testing `α` for membership in the admissible cone.
#[derive(Clone)]
pub struct ConeMembership {
    pub is_member: bool,
    running: Arc<Vec<f64>>,
    alpha: RealFn,
    q: DistributionSpec,
    /// Grid points in `(0, 1)` where `|H| ≤ 1e-8` and `h` is not reported.
    pub exceptional: Vec<f64>,
    /// Smallest value of the running integral on the grid.
    pub min_running: f64,
}

impl std::fmt::Debug for ConeMembership {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ConeMembership")
            .field("is_member", &self.is_member)
            .field("min_running", &self.min_running)
            .field("exceptional", &self.exceptional.len())
            .finish()
    }
}

impl ConeMembership {
    /// `I(u) = ∫₀ᵘ α dQ²`.
    pub fn running(&self, u: f64) -> f64 {
        let t = &self.running;
        if u <= 0.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return *t.last().unwrap();
        }
        let pos = u * TABLE_CELLS as f64;
        let k = (pos.floor() as usize).min(TABLE_CELLS - 1);
        let left = k as f64 / TABLE_CELLS as f64;
        let (a, q) = (&self.alpha, &self.q);
        t[k] + simpson_cell(&|x: f64| a(x) * 2.0 * q.cdf(x) * q.density(x), left, u)
    }

    /// `H = √I` on the positive branch, `0` where `I < 0`.
    pub fn big_h(&self, u: f64) -> f64 {
        self.running(u).max(0.0).sqrt()
    }

    /// Recovered direction `h = Q·α/H`, `None` where `|H| ≤ 1e-8`.
    pub fn small_h(&self, u: f64) -> Option<f64> {
        let big = self.big_h(u);
        (big > H_FLOOR).then(|| self.q.cdf(u) * (self.alpha)(u) / big)
    }
}

/// Checks `∫₀ᵘ α dQ² ≥ 0` for all `u` and recovers `H` and `h`.
pub fn cone_membership(alpha: RealFn, q: &DistributionSpec) -> Result<ConeMembership> {
    let (a, qd) = (alpha.clone(), q.clone());
    let running = cumulative_simpson(&|x: f64| a(x) * 2.0 * qd.cdf(x) * qd.density(x), TABLE_CELLS)?;
    let min_running = running.iter().copied().fold(0.0, f64::min);
    let is_member = min_running >= CONE_TOL;
    let exceptional = running
        .iter()
        .enumerate()
        .skip(1)
        .take(TABLE_CELLS - 1)
        .filter(|(_, &v)| v.max(0.0).sqrt() <= H_FLOOR)
        .map(|(k, _)| k as f64 / TABLE_CELLS as f64)
        .collect();
    Ok(ConeMembership {
        is_member,
        running: Arc::new(running),
        alpha,
        q: q.clone(),
        exceptional,
        min_running,
    })
}
