//! Empirical distribution functions of minima, maxima and the pooled
//! sample, and the empirical processes built from them.
//!
//! All EDFs are right-continuous (`1{X ≤ x}`). Ties are allowed and make
//! an EDF jump by their multiplicity.
//!
//! With `Rₙ(x, y) = √n[ℙₙ(x, y) − Qₙ(x)Qₙ(y)]`, `vₙ = √n(ℙₙ − Q×Q)`,
//! `zₙ = 𝓛vₙ` and `dₙ = Qₙ − Q`, expanding `Qₙ(x)Qₙ(y) − Q(x)Q(y)` gives
//! the exact finite-sample identity
//!
//! ```text
//! Rₙˢ(u, v) = zₙ(S_{u,v}) − rₙ(S_{u,v}),
//! rₙ(S_{u,v}) = 2√n·dₙ(u)dₙ(v) − √n·dₙ(v)²,
//! ```
//!
//! i.e. the residual enters with a negative sign. [`residual_rn`] returns
//! `rₙ(S_{u,v})` itself and [`pillow_decomposition`] returns both parts.

use crate::dist::DistributionSpec;
use crate::error::{Error, Result};

/// Labelled pairs `(xᵢ, yᵢ)`; only available in simulations.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pairs: Vec<(f64, f64)>,
}

impl LabeledSample {
    pub fn new(pairs: Vec<(f64, f64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::Domain("a sample needs at least one pair".into()));
        }
        for (i, &(x, y)) in pairs.iter().enumerate() {
            if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
                return Err(Error::Domain(format!("pair {i} = ({x}, {y}) is not in [0, 1]²")));
            }
        }
        Ok(LabeledSample { pairs })
    }

    pub(crate) fn new_unchecked(pairs: Vec<(f64, f64)>) -> Self {
        LabeledSample { pairs }
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    pub fn n(&self) -> usize {
        self.pairs.len()
    }

    /// Pooled EDF `Qₙ(t) = (P₁ₙ(t) + P₂ₙ(t))/2` by direct count.
    pub fn pooled_edf(&self, t: f64) -> f64 {
        let c = self
            .pairs
            .iter()
            .map(|&(x, y)| (x <= t) as usize + (y <= t) as usize)
            .sum::<usize>();
        c as f64 / (2 * self.n()) as f64
    }

    /// Bivariate EDF `ℙₙ(x, y)`.
    pub fn bivariate_edf(&self, x: f64, y: f64) -> f64 {
        let c = self.pairs.iter().filter(|p| p.0 <= x && p.1 <= y).count();
        c as f64 / self.n() as f64
    }
}

/// Unordered pairs stored as `(uᵢ, vᵢ) = (max, min)` with the pooled
/// sorted sample.
#[derive(Debug, Clone, PartialEq)]
pub struct ColourBlindSample {
    pairs: Vec<(f64, f64)>,
    pooled: Vec<f64>,
}

impl ColourBlindSample {
    /// From unordered measurement pairs; each pair is ordered internally.
    pub fn from_pairs(raw: &[(f64, f64)]) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::Domain("a sample needs at least one pair".into()));
        }
        for (i, &(a, b)) in raw.iter().enumerate() {
            if !a.is_finite() || !b.is_finite() {
                return Err(Error::Domain(format!("pair {i} has a non-finite value")));
            }
        }
        Ok(Self::build(raw))
    }

    fn build(raw: &[(f64, f64)]) -> Self {
        let pairs: Vec<(f64, f64)> = raw.iter().map(|&(a, b)| (a.max(b), a.min(b))).collect();
        let mut pooled: Vec<f64> = pairs.iter().flat_map(|&(u, v)| [u, v]).collect();
        pooled.sort_unstable_by(f64::total_cmp);
        ColourBlindSample { pairs, pooled }
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    pub fn pooled(&self) -> &[f64] {
        &self.pooled
    }

    pub fn n(&self) -> usize {
        self.pairs.len()
    }

    pub fn maxima(&self) -> impl Iterator<Item = f64> + '_ {
        self.pairs.iter().map(|p| p.0)
    }

    pub fn minima(&self) -> impl Iterator<Item = f64> + '_ {
        self.pairs.iter().map(|p| p.1)
    }

    /// Pooled EDF `Qₙ(t)`.
    #[inline]
    pub fn qn(&self, t: f64) -> f64 {
        self.pooled.partition_point(|&w| w <= t) as f64 / self.pooled.len() as f64
    }

    /// Applies a map to every value (e.g. a rescaling or time change).
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        let raw: Vec<(f64, f64)> = self.pairs.iter().map(|&(u, v)| (f(u), f(v))).collect();
        Self::build(&raw)
    }
}

/// Forgets the labels: `uᵢ = max(xᵢ, yᵢ)`, `vᵢ = min(xᵢ, yᵢ)`.
pub fn blind(sample: &LabeledSample) -> ColourBlindSample {
    ColourBlindSample::build(&sample.pairs)
}

/// Right-continuous piecewise-constant function.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    jumps: Vec<f64>,
    values: Vec<f64>,
    left: f64,
}

impl StepFunction {
    pub fn new(jumps: Vec<f64>, values: Vec<f64>, left: f64) -> Result<Self> {
        if jumps.len() != values.len() {
            return Err(Error::Domain("jump and value arrays differ in length".into()));
        }
        if jumps.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain("jump points must be strictly increasing".into()));
        }
        Ok(StepFunction { jumps, values, left })
    }

    /// Empirical distribution function of `data`.
    pub fn edf(data: impl IntoIterator<Item = f64>) -> Self {
        let mut v: Vec<f64> = data.into_iter().collect();
        v.sort_unstable_by(f64::total_cmp);
        let m = v.len() as f64;
        let mut jumps = Vec::new();
        let mut values = Vec::new();
        for (i, &x) in v.iter().enumerate() {
            if i + 1 < v.len() && v[i + 1] == x {
                continue;
            }
            jumps.push(x);
            values.push((i + 1) as f64 / m);
        }
        StepFunction {
            jumps,
            values,
            left: 0.0,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self.jumps.partition_point(|&j| j <= x) {
            0 => self.left,
            k => self.values[k - 1],
        }
    }

    /// Left limit `f(x⁻)`.
    pub fn eval_left(&self, x: f64) -> f64 {
        match self.jumps.partition_point(|&j| j < x) {
            0 => self.left,
            k => self.values[k - 1],
        }
    }

    pub fn jumps(&self) -> &[f64] {
        &self.jumps
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Pointwise `(a·f + b·g)` on the union of jump points.
    pub fn combine(&self, other: &StepFunction, a: f64, b: f64) -> StepFunction {
        let mut jumps: Vec<f64> = self.jumps.iter().chain(&other.jumps).copied().collect();
        jumps.sort_unstable_by(f64::total_cmp);
        jumps.dedup();
        let values = jumps.iter().map(|&x| a * self.eval(x) + b * other.eval(x)).collect();
        StepFunction {
            jumps,
            values,
            left: a * self.left + b * other.left,
        }
    }
}

/// EDFs of the minima, the maxima and the pooled sample.
pub fn edfs(s: &ColourBlindSample) -> (StepFunction, StepFunction, StepFunction) {
    let pmin = StepFunction::edf(s.minima());
    let pmax = StepFunction::edf(s.maxima());
    let qn = StepFunction::edf(s.pooled().iter().copied());
    (pmin, pmax, qn)
}

fn check_simplex(u: f64, v: f64) -> Result<()> {
    if v > u {
        return Err(Error::Domain(format!("need v <= u, got u = {u}, v = {v}")));
    }
    Ok(())
}

/// Empirical mass of the symmetrised rectangle `S_{u,v}`:
/// `(1/n)·#{i : uᵢ ≤ u, vᵢ ≤ v}`.
pub fn sym_rect_mass(s: &ColourBlindSample, u: f64, v: f64) -> Result<f64> {
    check_simplex(u, v)?;
    let c = s.pairs.iter().filter(|p| p.0 <= u && p.1 <= v).count();
    Ok(c as f64 / s.n() as f64)
}

/// Colour-blind process `Rₙˢ(u, v) = √n[mass(S_{u,v}) − (2Qₙ(u)Qₙ(v) − Qₙ(v)²)]`.
pub fn process_rs(s: &ColourBlindSample, u: f64, v: f64) -> Result<f64> {
    let mass = sym_rect_mass(s, u, v)?;
    let (qu, qv) = (s.qn(u), s.qn(v));
    Ok((s.n() as f64).sqrt() * (mass - (2.0 * qu * qv - qv * qv)))
}

/// Maxima process `Rₙ⁽²⁾(u) = √n[Pₙ⁽²⁾(u) − Qₙ(u)²]`.
pub fn maxima_process(s: &ColourBlindSample, u: f64) -> f64 {
    process_rs(s, u, u).expect("diagonal is in the simplex")
}

/// Two-sample process `Rₙ(x, y) = √n[ℙₙ(x, y) − Qₙ(x)Qₙ(y)]` on labelled data.
pub fn process_r_full(s: &LabeledSample, x: f64, y: f64) -> f64 {
    (s.n() as f64).sqrt() * (s.bivariate_edf(x, y) - s.pooled_edf(x) * s.pooled_edf(y))
}

fn process_vn(s: &LabeledSample, q: &DistributionSpec, x: f64, y: f64) -> f64 {
    (s.n() as f64).sqrt() * (s.bivariate_edf(x, y) - q.cdf(x) * q.cdf(y))
}

/// Pillow process `zₙ = 𝓛vₙ` with the true `Q`.
pub fn pillow_zn(s: &LabeledSample, q: &DistributionSpec, x: f64, y: f64) -> f64 {
    let (qx, qy) = (q.cdf(x), q.cdf(y));
    process_vn(s, q, x, y) - qx * process_vn(s, q, 1.0, y) - qy * process_vn(s, q, x, 1.0)
        + qx * qy * process_vn(s, q, 1.0, 1.0)
}

/// `zₙ(S_{u,v}) = zₙ(u, v) + zₙ(v, u) − zₙ(v, v)`.
pub fn pillow_sym(s: &LabeledSample, q: &DistributionSpec, u: f64, v: f64) -> f64 {
    pillow_zn(s, q, u, v) + pillow_zn(s, q, v, u) - pillow_zn(s, q, v, v)
}

/// `rₙ(S_{u,v}) = 2√n[Qₙ(u) − Q(u)][Qₙ(v) − Q(v)] − √n[Qₙ(v) − Q(v)]²`.
///
/// Enters the decomposition of `Rₙˢ` with a negative sign, see the module
/// documentation.
pub fn residual_rn(s: &LabeledSample, q: &DistributionSpec, u: f64, v: f64) -> Result<f64> {
    check_simplex(u, v)?;
    let du = s.pooled_edf(u) - q.cdf(u);
    let dv = s.pooled_edf(v) - q.cdf(v);
    let rn = (s.n() as f64).sqrt();
    Ok(2.0 * rn * du * dv - rn * dv * dv)
}

/// `(zₙ(S_{u,v}), rₙ(S_{u,v}))` with `Rₙˢ(u, v) = zₙ(S) − rₙ(S)`.
pub fn pillow_decomposition(s: &LabeledSample, q: &DistributionSpec, u: f64, v: f64) -> Result<(f64, f64)> {
    let r = residual_rn(s, q, u, v)?;
    Ok((pillow_sym(s, q, u, v), r))
}

/// Distinct pooled values with the pooled EDF on each cell.
///
/// Cell `k = 0` is everything below the smallest value; cell `k ≥ 1`
/// starts at `points[k − 1]`. Piecewise-constant processes attain their
/// suprema on these cells.
#[derive(Debug, Clone)]
pub struct JumpGrid {
    pub points: Vec<f64>,
    pub qn: Vec<f64>,
}

impl JumpGrid {
    pub fn from_sorted(pooled: &[f64]) -> Self {
        let mut grid = JumpGrid {
            points: Vec::new(),
            qn: Vec::new(),
        };
        grid.rebuild(pooled);
        grid
    }

    /// Rebuilds in place, reusing allocations.
    pub fn rebuild(&mut self, pooled: &[f64]) {
        let m = pooled.len() as f64;
        self.points.clear();
        self.qn.clear();
        self.qn.push(0.0);
        for (i, &w) in pooled.iter().enumerate() {
            if i + 1 < pooled.len() && pooled[i + 1] == w {
                continue;
            }
            self.points.push(w);
            self.qn.push((i + 1) as f64 / m);
        }
    }

    /// Number of cells (`distinct values + 1`).
    pub fn cells(&self) -> usize {
        self.qn.len()
    }

    /// Cell index of `x`: the number of distinct values `≤ x`.
    #[inline]
    pub fn cell(&self, x: f64) -> usize {
        self.points.partition_point(|&w| w <= x)
    }
}
