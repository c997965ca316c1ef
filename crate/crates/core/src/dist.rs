//! Continuous model distributions on [0, 1], the local alternative
//! families built on them, and their samplers.
//!
//! Equality alternatives perturb a base distribution `Q` in opposite
//! directions: the first coordinate has density `(1 + εh)·q` and the
//! second `(1 − εh)·q`, where `∫h dQ = 0`. Dependence alternatives perturb
//! the product `Q×Q` by `(1 + εg)` with vanishing `Q`-marginals of `g`.
//!
//! Sign convention: [`direction_from_pair`] uses
//! `h = (a₁ − a₂)/(a₁ + a₂)`. Every statistic depends on `h` only through
//! `h×h`, `H²` or `h·H`, so the opposite convention gives identical results.

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::empirical::LabeledSample;
use crate::error::{Error, Result};
use crate::quadrature::{cumulative_simpson, simpson, simpson_cell};

/// Shared univariate function.
pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
/// Shared bivariate function.
pub type BiFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Number of cells used to tabulate `H` and the alternative CDFs.
pub const TABLE_CELLS: usize = 4096;
const CHECK_GRID: usize = 1000;

/// A continuous distribution on [0, 1] given by its CDF and density.
#[derive(Clone)]
pub struct DistributionSpec {
    name: String,
    cdf: RealFn,
    density: RealFn,
    quantile: Option<RealFn>,
}

impl fmt::Debug for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DistributionSpec")
            .field("name", &self.name)
            .finish_non_exhaustive()
    }
}

impl DistributionSpec {
    /// Builds and validates a distribution.
    pub fn new(name: impl Into<String>, cdf: RealFn, density: RealFn) -> Result<Self> {
        let d = DistributionSpec {
            name: name.into(),
            cdf,
            density,
            quantile: None,
        };
        d.validate()?;
        Ok(d)
    }

    /// Attaches a closed-form quantile function used by the samplers.
    pub fn with_quantile(mut self, quantile: RealFn) -> Self {
        self.quantile = Some(quantile);
        self
    }

    pub fn uniform() -> Self {
        DistributionSpec {
            name: "uniform".into(),
            cdf: Arc::new(|x| x),
            density: Arc::new(|_| 1.0),
            quantile: Some(Arc::new(|p| p)),
        }
    }

    /// `F(x) = x^k`.
    pub fn power(k: u32) -> Self {
        assert!(k >= 1, "power distribution needs k >= 1");
        let kf = k as f64;
        DistributionSpec {
            name: if k == 2 { "square".into() } else { format!("power-{k}") },
            cdf: Arc::new(move |x| x.powi(k as i32)),
            density: Arc::new(move |x| kf * x.powi(k as i32 - 1)),
            quantile: Some(Arc::new(move |p: f64| p.powf(1.0 / kf))),
        }
    }

    /// `Q(x) = (x + x²)/2`, the equal mixture of `x` and `x²`.
    pub fn uniform_square_mix() -> Self {
        DistributionSpec {
            name: "uniform-square-mix".into(),
            cdf: Arc::new(|x| 0.5 * (x + x * x)),
            density: Arc::new(|x| 0.5 + x),
            quantile: Some(Arc::new(|p: f64| {
                // Stable root of x² + x − 2p = 0.
                let disc = (1.0 + 8.0 * p).sqrt();
                4.0 * p / (1.0 + disc)
            })),
        }
    }

    /// CDF given by polynomial coefficients in ascending powers.
    pub fn polynomial(coeffs: &[f64]) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidModel("empty polynomial".into()));
        }
        let c: Arc<[f64]> = coeffs.into();
        let dc: Arc<[f64]> = coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, a)| i as f64 * a)
            .collect::<Vec<_>>()
            .into();
        let name = format!("polynomial{coeffs:?}");
        DistributionSpec::new(
            name,
            Arc::new(move |x| horner(&c, x)),
            Arc::new(move |x| horner(&dc, x)),
        )
    }

    /// Looks up a builtin distribution by name.
    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            "uniform" => Ok(Self::uniform()),
            "square" => Ok(Self::power(2)),
            "cube" => Ok(Self::power(3)),
            "mix" | "uniform-square-mix" => Ok(Self::uniform_square_mix()),
            other => Err(Error::Parse(format!("unknown distribution {other:?}"))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else if x >= 1.0 {
            1.0
        } else {
            (self.cdf)(x)
        }
    }

    #[inline]
    pub fn density(&self, x: f64) -> f64 {
        if !(0.0..=1.0).contains(&x) {
            0.0
        } else {
            (self.density)(x)
        }
    }

    /// Quantile used for sampling: closed form when known, otherwise
    /// numerical inversion.
    #[inline]
    pub fn quantile(&self, p: f64) -> f64 {
        match &self.quantile {
            Some(q) => q(p).clamp(0.0, 1.0),
            None => solve_cdf(|x| self.cdf(x), |x| self.density(x), p, 0.0, 1.0, p),
        }
    }

    /// Checks the boundary values, monotonicity, normalisation and the
    /// CDF/density consistency on a 1001-point grid.
    pub fn validate(&self) -> Result<()> {
        let raw_cdf = |x: f64| (self.cdf)(x);
        let f0 = raw_cdf(0.0);
        let f1 = raw_cdf(1.0);
        if f0.abs() > 1e-12 || (f1 - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidModel(format!(
                "{}: cdf(0) = {f0}, cdf(1) = {f1}",
                self.name
            )));
        }
        let mut prev = f0;
        for k in 1..=CHECK_GRID {
            let x = k as f64 / CHECK_GRID as f64;
            let f = raw_cdf(x);
            if !f.is_finite() || f < prev - 1e-14 {
                return Err(Error::InvalidModel(format!(
                    "{}: cdf not nondecreasing at x = {x}",
                    self.name
                )));
            }
            prev = f;
        }
        let dens = |x: f64| (self.density)(x);
        let total = simpson(&dens, 0.0, 1.0, 1024)?;
        if (total - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidModel(format!(
                "{}: density integrates to {total}",
                self.name
            )));
        }
        let running = cumulative_simpson(&dens, CHECK_GRID)?;
        for (k, integral) in running.iter().enumerate() {
            let x = k as f64 / CHECK_GRID as f64;
            if (raw_cdf(x) - integral).abs() > 1e-6 {
                return Err(Error::InvalidModel(format!(
                    "{}: cdf differs from integrated density at x = {x}",
                    self.name
                )));
            }
            if (self.density)(x) < 0.0 {
                return Err(Error::InvalidModel(format!(
                    "{}: negative density at x = {x}",
                    self.name
                )));
            }
        }
        Ok(())
    }
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, a| acc * x + a)
}

/// Safeguarded Newton iteration for `F(x) = p` on the bracket `[lo, hi]`.
///
/// Falls back to bisection whenever the Newton step leaves the bracket.
pub(crate) fn solve_cdf<F, D>(cdf: F, density: D, p: f64, mut lo: f64, mut hi: f64, x0: f64) -> f64
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let mut x = x0.clamp(lo, hi);
    for _ in 0..200 {
        let f = cdf(x) - p;
        if f == 0.0 {
            return x;
        }
        if f < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let d = density(x);
        let mut next = if d > 0.0 { x - f / d } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-15 || hi - lo <= 1e-15 {
            return next;
        }
        x = next;
    }
    x
}

/// Quantile of `d` at `p` by bracketed root finding on [0, 1].
pub fn inverse_cdf(d: &DistributionSpec, p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("probability {p} outside [0, 1]")));
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    if p == 1.0 {
        return Ok(1.0);
    }
    Ok(solve_cdf(|x| d.cdf(x), |x| d.density(x), p, 0.0, 1.0, p))
}

/// Product alternative with densities `(1 ± εh)·q` relative to `Q`.
#[derive(Clone)]
pub struct EqualityAlternative {
    name: String,
    base: DistributionSpec,
    h: RealFn,
    epsilon: f64,
    // H at the TABLE_CELLS + 1 equispaced nodes.
    h_integral: Arc<Vec<f64>>,
}

impl fmt::Debug for EqualityAlternative {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EqualityAlternative")
            .field("name", &self.name)
            .field("base", &self.base.name)
            .field("epsilon", &self.epsilon)
            .finish_non_exhaustive()
    }
}

impl EqualityAlternative {
    pub fn new(name: impl Into<String>, base: DistributionSpec, h: RealFn, epsilon: f64) -> Result<Self> {
        let weighted = {
            let h = h.clone();
            let base = base.clone();
            move |x: f64| h(x) * base.density(x)
        };
        let table = cumulative_simpson(&weighted, TABLE_CELLS)?;
        let alt = EqualityAlternative {
            name: name.into(),
            base,
            h,
            epsilon,
            h_integral: Arc::new(table),
        };
        alt.validate()?;
        Ok(alt)
    }

    /// The alternative `A₁ = x`, `A₂ = x²` written around `Q = (x + x²)/2`.
    pub fn uniform_vs_square() -> Self {
        direction_from_pair(&DistributionSpec::uniform(), &DistributionSpec::power(2))
            .expect("builtin pair is valid")
            .renamed("uniform-vs-square")
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Same direction with a different ε; the integral table is reused.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        let alt = EqualityAlternative {
            epsilon,
            ..self.clone()
        };
        alt.validate_epsilon()?;
        Ok(alt)
    }

    fn validate(&self) -> Result<()> {
        let total = *self.h_integral.last().unwrap();
        if total.abs() > 1e-8 {
            return Err(Error::InvalidModel(format!(
                "{}: ∫h dQ = {total}, expected 0",
                self.name
            )));
        }
        self.validate_epsilon()
    }

    fn validate_epsilon(&self) -> Result<()> {
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidModel(format!(
                "{}: epsilon must be finite and >= 0, got {}",
                self.name, self.epsilon
            )));
        }
        for k in 0..=TABLE_CELLS {
            let x = k as f64 / TABLE_CELLS as f64;
            let eh = self.epsilon * (self.h)(x);
            if !eh.is_finite() {
                return Err(Error::NonFinite {
                    value: eh,
                    location: format!("direction h at x = {x}"),
                });
            }
            if 1.0 + eh < -1e-12 || 1.0 - eh < -1e-12 {
                return Err(Error::InvalidModel(format!(
                    "{}: 1 ± εh negative at x = {x} (εh = {eh})",
                    self.name
                )));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn base(&self) -> &DistributionSpec {
        &self.base
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    #[inline]
    pub fn h(&self, x: f64) -> f64 {
        (self.h)(x)
    }

    pub fn h_fn(&self) -> RealFn {
        self.h.clone()
    }

    /// `H(x) = ∫_0^x h dQ`.
    pub fn big_h(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return *self.h_integral.last().unwrap();
        }
        let pos = x * TABLE_CELLS as f64;
        let k = (pos.floor() as usize).min(TABLE_CELLS - 1);
        let left = k as f64 / TABLE_CELLS as f64;
        let tail = simpson_cell(&|t: f64| self.h(t) * self.base.density(t), left, x);
        self.h_integral[k] + tail
    }

    /// CDF of the first (`sign = 1`) or second (`sign = -1`) coordinate.
    pub fn coordinate_cdf(&self, sign: f64, x: f64) -> f64 {
        self.base.cdf(x) + sign * self.epsilon * self.big_h(x)
    }

    pub fn coordinate_density(&self, sign: f64, x: f64) -> f64 {
        (1.0 + sign * self.epsilon * self.h(x)) * self.base.density(x)
    }

    /// The two coordinate distributions `A₁`, `A₂`.
    pub fn coordinates(&self) -> (DistributionSpec, DistributionSpec) {
        let make = |sign: f64, label: &str| {
            let a = self.clone();
            let b = self.clone();
            DistributionSpec {
                name: format!("{}:{label}", self.name),
                cdf: Arc::new(move |x| a.coordinate_cdf(sign, x)),
                density: Arc::new(move |x| b.coordinate_density(sign, x)),
                quantile: None,
            }
        };
        (make(1.0, "a1"), make(-1.0, "a2"))
    }
}

/// Precomputed inverse-CDF sampler for an equality alternative.
pub struct EqualitySampler {
    first: TabulatedCdf,
    second: TabulatedCdf,
}

struct TabulatedCdf {
    alt: EqualityAlternative,
    sign: f64,
    values: Vec<f64>,
}

impl TabulatedCdf {
    fn new(alt: &EqualityAlternative, sign: f64) -> Self {
        let values = (0..=TABLE_CELLS)
            .map(|k| {
                let x = k as f64 / TABLE_CELLS as f64;
                alt.base.cdf(x) + sign * alt.epsilon * alt.h_integral[k]
            })
            .collect();
        TabulatedCdf {
            alt: alt.clone(),
            sign,
            values,
        }
    }

    fn quantile(&self, p: f64) -> f64 {
        if self.alt.epsilon == 0.0 {
            return self.alt.base.quantile(p);
        }
        let k = self.values.partition_point(|&v| v <= p).clamp(1, TABLE_CELLS) - 1;
        let lo = k as f64 / TABLE_CELLS as f64;
        let hi = (k + 1) as f64 / TABLE_CELLS as f64;
        let (vl, vh) = (self.values[k], self.values[k + 1]);
        let guess = if vh > vl {
            lo + (p - vl) / (vh - vl) * (hi - lo)
        } else {
            lo
        };
        let dens = |x: f64| self.alt.coordinate_density(self.sign, x);
        let cdf = |x: f64| vl + simpson_cell(&dens, lo, x);
        solve_cdf(cdf, dens, p, lo, hi, guess)
    }
}

impl EqualitySampler {
    pub fn new(alt: &EqualityAlternative) -> Self {
        EqualitySampler {
            first: TabulatedCdf::new(alt, 1.0),
            second: TabulatedCdf::new(alt, -1.0),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> LabeledSample {
        let pairs = (0..n)
            .map(|_| {
                let x = self.first.quantile(rng.random::<f64>());
                let y = self.second.quantile(rng.random::<f64>());
                (x, y)
            })
            .collect();
        LabeledSample::new_unchecked(pairs)
    }
}

/// `n` i.i.d. pairs from the equality alternative.
pub fn sample_equality_alt<R: Rng + ?Sized>(alt: &EqualityAlternative, n: usize, rng: &mut R) -> Result<LabeledSample> {
    if n == 0 {
        return Err(Error::Domain("sample size must be >= 1".into()));
    }
    Ok(EqualitySampler::new(alt).sample(n, rng))
}

/// `n` i.i.d. pairs from `Q×Q`.
pub fn sample_null<R: Rng + ?Sized>(q: &DistributionSpec, n: usize, rng: &mut R) -> LabeledSample {
    let pairs = (0..n)
        .map(|_| {
            let x = q.quantile(rng.random::<f64>());
            let y = q.quantile(rng.random::<f64>());
            (x, y)
        })
        .collect();
    LabeledSample::new_unchecked(pairs)
}

/// Symmetric representation of a pair of distributions around their
/// average `Q`, with `ε = 1`.
pub fn direction_from_pair(a1: &DistributionSpec, a2: &DistributionSpec) -> Result<EqualityAlternative> {
    let mut prev_zero = false;
    for k in 0..=TABLE_CELLS {
        let x = k as f64 / TABLE_CELLS as f64;
        let s = a1.density(x) + a2.density(x);
        let zero = s <= 0.0;
        if zero && prev_zero {
            return Err(Error::InvalidModel(format!(
                "densities of {} and {} both vanish near x = {x}",
                a1.name(),
                a2.name()
            )));
        }
        prev_zero = zero;
    }
    let (c1, c2) = (a1.clone(), a2.clone());
    let (d1, d2) = (a1.clone(), a2.clone());
    let base = DistributionSpec::new(
        format!("mix({}, {})", a1.name(), a2.name()),
        Arc::new(move |x| 0.5 * (c1.cdf(x) + c2.cdf(x))),
        Arc::new(move |x| 0.5 * (d1.density(x) + d2.density(x))),
    )?;
    let (e1, e2) = (a1.clone(), a2.clone());
    let h: RealFn = Arc::new(move |x| {
        let (p, q) = (e1.density(x), e2.density(x));
        let s = p + q;
        if s > 0.0 {
            (p - q) / s
        } else {
            0.0
        }
    });
    EqualityAlternative::new(format!("{} vs {}", a1.name(), a2.name()), base, h, 1.0)
}

/// `q(x) = h(x)·H(x)/Q(x)`, with `q(0) = h(0)²`.
pub fn q_direction(alt: &EqualityAlternative) -> RealFn {
    let alt = alt.clone();
    Arc::new(move |x| {
        let qx = alt.base.cdf(x);
        if x <= 0.0 || qx <= 0.0 {
            let h0 = alt.h(0.0);
            h0 * h0
        } else {
            alt.h(x) * alt.big_h(x) / qx
        }
    })
}

/// Bivariate alternative with density `(1 + εg)` relative to `Q×Q`.
#[derive(Clone)]
pub struct DependenceAlternative {
    name: String,
    base: DistributionSpec,
    g: BiFn,
    epsilon: f64,
    sup_abs_g: f64,
}

impl fmt::Debug for DependenceAlternative {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DependenceAlternative")
            .field("name", &self.name)
            .field("base", &self.base.name)
            .field("epsilon", &self.epsilon)
            .finish_non_exhaustive()
    }
}

const DEP_GRID: usize = 256;
const DEP_PANELS: usize = 128;

impl DependenceAlternative {
    pub fn new(name: impl Into<String>, base: DistributionSpec, g: BiFn, epsilon: f64) -> Result<Self> {
        let name = name.into();
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidModel(format!("{name}: epsilon must be finite and >= 0")));
        }
        let mut sup: f64 = 0.0;
        for i in 0..=DEP_GRID {
            for j in 0..=DEP_GRID {
                let (x, y) = (i as f64 / DEP_GRID as f64, j as f64 / DEP_GRID as f64);
                let v = g(x, y);
                if !v.is_finite() {
                    return Err(Error::NonFinite {
                        value: v,
                        location: format!("g({x}, {y})"),
                    });
                }
                if 1.0 + epsilon * v < -1e-12 {
                    return Err(Error::InvalidModel(format!("{name}: 1 + εg negative at ({x}, {y})")));
                }
                sup = sup.max(v.abs());
            }
        }
        let alt = DependenceAlternative {
            name,
            base,
            g,
            epsilon,
            sup_abs_g: sup,
        };
        for k in 0..=10 {
            let t = k as f64 / 10.0;
            let gx = &alt.g;
            let d = &alt.base;
            let col = simpson(&|x: f64| gx(x, t) * d.density(x), 0.0, 1.0, DEP_PANELS)?;
            let row = simpson(&|y: f64| gx(t, y) * d.density(y), 0.0, 1.0, DEP_PANELS)?;
            if col.abs() > 1e-6 || row.abs() > 1e-6 {
                return Err(Error::InvalidModel(format!(
                    "{}: Q-marginal of g does not vanish at {t} ({col}, {row})",
                    alt.name
                )));
            }
        }
        Ok(alt)
    }

    /// `g(x, y) = c·(2Q(x) − 1)(2Q(y) − 1)`.
    pub fn product(base: DistributionSpec, c: f64, epsilon: f64) -> Result<Self> {
        let b = base.clone();
        let g: BiFn = Arc::new(move |x, y| c * (2.0 * b.cdf(x) - 1.0) * (2.0 * b.cdf(y) - 1.0));
        Self::new(format!("product({c})"), base, g, epsilon)
    }

    /// Anti-symmetric direction with vanishing marginals:
    /// `g(x, y) = c·[(2s − 1)·P(t) − P(s)·(2t − 1)]`, `s = Q(x)`, `t = Q(y)`,
    /// with `P(t) = 6t² − 6t + 1`.
    pub fn antisymmetric(base: DistributionSpec, c: f64, epsilon: f64) -> Result<Self> {
        let b = base.clone();
        let p2 = |t: f64| 6.0 * t * t - 6.0 * t + 1.0;
        let g: BiFn = Arc::new(move |x, y| {
            let (s, t) = (b.cdf(x), b.cdf(y));
            c * ((2.0 * s - 1.0) * p2(t) - p2(s) * (2.0 * t - 1.0))
        });
        Self::new(format!("antisymmetric({c})"), base, g, epsilon)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn base(&self) -> &DistributionSpec {
        &self.base
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    #[inline]
    pub fn g(&self, x: f64, y: f64) -> f64 {
        (self.g)(x, y)
    }

    pub fn g_fn(&self) -> BiFn {
        self.g.clone()
    }

    pub fn sup_abs_g(&self) -> f64 {
        self.sup_abs_g
    }

    /// `G(x, y) = ∫_0^x ∫_0^y g dQ dQ` by tensor Simpson.
    pub fn big_g(&self, x: f64, y: f64) -> f64 {
        let (x, y) = (x.clamp(0.0, 1.0), y.clamp(0.0, 1.0));
        if x == 0.0 || y == 0.0 {
            return 0.0;
        }
        let n = DEP_PANELS;
        let (hx, hy) = (x / n as f64, y / n as f64);
        let w = |k: usize| {
            if k == 0 || k == n {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            }
        };
        let mut acc = 0.0;
        for i in 0..=n {
            let s = i as f64 * hx;
            let ws = w(i) * self.base.density(s);
            let mut row = 0.0;
            for j in 0..=n {
                let t = j as f64 * hy;
                row += w(j) * self.base.density(t) * self.g(s, t);
            }
            acc += ws * row;
        }
        acc * hx * hy / 9.0
    }
}

/// `n` i.i.d. pairs from `(1 + εg)·q(x)q(y)` by rejection from `Q×Q`.
pub fn sample_dependence_alt<R: Rng + ?Sized>(
    alt: &DependenceAlternative,
    n: usize,
    rng: &mut R,
) -> Result<LabeledSample> {
    if n == 0 {
        return Err(Error::Domain("sample size must be >= 1".into()));
    }
    let envelope = 1.0 + alt.epsilon * alt.sup_abs_g;
    let mut pairs = Vec::with_capacity(n);
    while pairs.len() < n {
        let x = alt.base.quantile(rng.random::<f64>());
        let y = alt.base.quantile(rng.random::<f64>());
        let ratio = (1.0 + alt.epsilon * alt.g(x, y)) / envelope;
        if ratio > 1.0 + 1e-12 {
            return Err(Error::Envelope { ratio, x, y });
        }
        if rng.random::<f64>() < ratio {
            pairs.push((x, y));
        }
    }
    Ok(LabeledSample::new_unchecked(pairs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{quad, QuadratureRule, Weight};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn builtins_validate() {
        for d in [
            DistributionSpec::uniform(),
            DistributionSpec::power(2),
            DistributionSpec::power(3),
            DistributionSpec::uniform_square_mix(),
        ] {
            d.validate().unwrap();
        }
        assert!(DistributionSpec::polynomial(&[0.0, 0.5, 0.5]).is_ok());
        assert!(DistributionSpec::polynomial(&[0.0, 2.0, -1.0]).is_ok());
        assert!(DistributionSpec::polynomial(&[0.0, -1.0, 2.0]).is_err());
        assert!(DistributionSpec::polynomial(&[0.0, 0.5]).is_err());
    }

    #[test]
    fn inverse_cdf_examples() {
        let u = DistributionSpec::uniform();
        assert!((inverse_cdf(&u, 0.25).unwrap() - 0.25).abs() < 1e-12);
        let mix = DistributionSpec::polynomial(&[0.0, 0.5, 0.5]).unwrap();
        let golden = (5f64.sqrt() - 1.0) / 2.0;
        assert!((inverse_cdf(&mix, 0.5).unwrap() - golden).abs() < 1e-10);
        let sq = DistributionSpec::polynomial(&[0.0, 0.0, 1.0]).unwrap();
        assert!((inverse_cdf(&sq, 0.25).unwrap() - 0.5).abs() < 1e-10);
        assert!(inverse_cdf(&u, 1.5).is_err());
        assert!(inverse_cdf(&u, -0.1).is_err());
    }

    #[test]
    fn inverse_cdf_inverts_cdf() {
        let d = DistributionSpec::polynomial(&[0.0, 0.2, 0.0, 0.8]).unwrap();
        for k in 1..200 {
            let x = k as f64 / 200.0;
            let back = inverse_cdf(&d, d.cdf(x)).unwrap();
            assert!((back - x).abs() < 1e-8, "x = {x}, back = {back}");
            assert!((d.cdf(back) - d.cdf(x)).abs() <= 1e-10);
        }
    }

    #[test]
    fn closed_form_mix_quantile() {
        let d = DistributionSpec::uniform_square_mix();
        for k in 0..=100 {
            let p = k as f64 / 100.0;
            assert!((d.cdf(d.quantile(p)) - p).abs() < 1e-14);
        }
    }

    #[test]
    fn uniform_vs_square_direction() {
        let alt = EqualityAlternative::uniform_vs_square();
        for k in 0..=50 {
            let x = k as f64 / 50.0;
            let h = (1.0 - 2.0 * x) / (1.0 + 2.0 * x);
            assert!((alt.h(x) - h).abs() < 1e-14);
            assert!((alt.big_h(x) - x * (1.0 - x) / 2.0).abs() < 1e-12, "x = {x}");
            assert!((alt.base().cdf(x) - (x + x * x) / 2.0).abs() < 1e-15);
            // (1 ± h)·q recover the input densities.
            assert!((alt.coordinate_density(1.0, x) - 1.0).abs() < 1e-10);
            assert!((alt.coordinate_density(-1.0, x) - 2.0 * x).abs() < 1e-10);
        }
    }

    #[test]
    fn equal_pair_has_zero_direction() {
        let alt = direction_from_pair(&DistributionSpec::uniform(), &DistributionSpec::uniform()).unwrap();
        for k in 0..=10 {
            assert_eq!(alt.h(k as f64 / 10.0), 0.0);
        }
    }

    #[test]
    fn alternative_densities_normalised() {
        let alt = EqualityAlternative::uniform_vs_square().with_epsilon(0.7).unwrap();
        for sign in [1.0, -1.0] {
            let v = quad(
                |x| 1.0 + sign * alt.epsilon() * alt.h(x),
                Weight::Dist(alt.base()),
                0.0,
                1.0,
                QuadratureRule::default(),
            )
            .unwrap();
            assert!((v - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn invalid_alternatives() {
        let base = DistributionSpec::uniform();
        // Not centred.
        assert!(EqualityAlternative::new("bad", base.clone(), Arc::new(|x| x), 0.1).is_err());
        // Centred but too large a perturbation.
        let h: RealFn = Arc::new(|x| 2.0 * x - 1.0);
        assert!(EqualityAlternative::new("big", base.clone(), h.clone(), 1.5).is_err());
        assert!(EqualityAlternative::new("ok", base.clone(), h.clone(), 1.0).is_ok());
        assert!(EqualityAlternative::new("neg", base, h, -0.1).is_err());
    }

    #[test]
    fn q_direction_closed_form() {
        let alt = EqualityAlternative::uniform_vs_square();
        let q = q_direction(&alt);
        assert!((q(0.0) - 1.0).abs() < 1e-15);
        for k in 1..=40 {
            let x = k as f64 / 40.0;
            let want = (x - 1.0) * (2.0 * x - 1.0) / ((1.0 + x) * (1.0 + 2.0 * x));
            assert!((q(x) - want).abs() < 1e-10, "x = {x}");
        }
        assert!(q(0.5).abs() < 1e-12);
        assert!(q(1.0).abs() < 1e-12);
        let zero = direction_from_pair(&DistributionSpec::uniform(), &DistributionSpec::uniform()).unwrap();
        assert_eq!(q_direction(&zero)(0.3), 0.0);
    }

    #[test]
    fn equality_sampler_is_deterministic() {
        let alt = EqualityAlternative::uniform_vs_square();
        let a = sample_equality_alt(&alt, 5, &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
        let b = sample_equality_alt(&alt, 5, &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
        assert_eq!(a.pairs(), b.pairs());
    }

    #[test]
    fn equality_sampler_marginals() {
        // With ε = 1 the coordinates are exactly Uniform and x².
        let alt = EqualityAlternative::uniform_vs_square();
        let s = sample_equality_alt(&alt, 20_000, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        let xs: Vec<f64> = s.pairs().iter().map(|p| p.0).collect();
        let ys: Vec<f64> = s.pairs().iter().map(|p| p.1).collect();
        // One-sample KS distance against the target CDFs, 1% level.
        let crit = 1.628 / (20_000f64).sqrt();
        assert!(ks_one_sample(&xs, |x| x) < crit);
        assert!(ks_one_sample(&ys, |x| x * x) < crit);
    }

    #[test]
    fn tabulated_quantile_inverts_alternative_cdf() {
        let alt = EqualityAlternative::uniform_vs_square().with_epsilon(0.4).unwrap();
        let sampler = EqualitySampler::new(&alt);
        for k in 1..100 {
            let p = k as f64 / 100.0;
            let x = sampler.first.quantile(p);
            assert!((alt.coordinate_cdf(1.0, x) - p).abs() < 1e-10);
            let y = sampler.second.quantile(p);
            assert!((alt.coordinate_cdf(-1.0, y) - p).abs() < 1e-10);
        }
    }

    fn ks_one_sample(xs: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
        let mut v = xs.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len() as f64;
        v.iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = cdf(x);
                ((i + 1) as f64 / n - f).abs().max((f - i as f64 / n).abs())
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn dependence_validation_and_sampling() {
        let alt = DependenceAlternative::product(DistributionSpec::uniform(), 1.0, 0.5).unwrap();
        assert!((alt.sup_abs_g() - 1.0).abs() < 1e-12);
        let s = sample_dependence_alt(&alt, 100_000, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let n = s.n() as f64;
        let (mx, my) = s.pairs().iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
        let (mx, my) = (mx / n, my / n);
        let cov = s.pairs().iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / n;
        assert!(cov > 0.0, "covariance {cov}");
        // Non-centred g is rejected.
        let g: BiFn = Arc::new(|x, _| x);
        assert!(DependenceAlternative::new("bad", DistributionSpec::uniform(), g, 0.1).is_err());
    }

    #[test]
    fn dependence_null_and_determinism() {
        let alt = DependenceAlternative::product(DistributionSpec::uniform(), 1.0, 0.0).unwrap();
        let a = sample_dependence_alt(&alt, 50, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = sample_dependence_alt(&alt, 50, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a.pairs(), b.pairs());
    }

    #[test]
    fn envelope_violation_is_reported() {
        let mut alt = DependenceAlternative::product(DistributionSpec::uniform(), 1.0, 0.5).unwrap();
        alt.sup_abs_g = 0.1;
        let err = sample_dependence_alt(&alt, 1000, &mut ChaCha8Rng::seed_from_u64(1)).unwrap_err();
        assert!(matches!(err, Error::Envelope { .. }));
    }

    #[test]
    fn big_g_vanishes_on_upper_boundary() {
        let alt = DependenceAlternative::antisymmetric(DistributionSpec::uniform_square_mix(), 0.5, 1.0).unwrap();
        for k in 0..=5 {
            let t = k as f64 / 5.0;
            assert!(alt.big_g(t, 1.0).abs() < 1e-6);
            assert!(alt.big_g(1.0, t).abs() < 1e-6);
        }
    }
}
