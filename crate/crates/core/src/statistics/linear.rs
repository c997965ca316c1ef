//! Linear functionals of the colour-blind process.

use std::fmt;
use std::sync::Arc;

use crate::dist::{BiFn, EqualityAlternative, RealFn};
use crate::empirical::ColourBlindSample;
use crate::error::{Error, Result};

/// Structure of a kernel, used to pick cheaper quadrature routes.
#[derive(Clone)]
pub enum KernelForm {
    General,
    /// `h(x)·h(y)`.
    Product(RealFn),
    /// `α(max(x, y))`.
    MaxOf(RealFn),
    Constant(f64),
}

impl fmt::Debug for KernelForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            KernelForm::General => "General",
            KernelForm::Product(_) => "Product",
            KernelForm::MaxOf(_) => "MaxOf",
            KernelForm::Constant(_) => "Constant",
        };
        f.write_str(s)
    }
}

/// A kernel `φ` on the simplex `{v ≤ u}`, extended symmetrically to the
/// unit square by `φ̃(x, y) = φ(max, min)`.
#[derive(Clone)]
pub struct SymmetricKernel {
    name: String,
    phi: BiFn,
    form: KernelForm,
}

impl fmt::Debug for SymmetricKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SymmetricKernel")
            .field("name", &self.name)
            .field("form", &self.form)
            .finish()
    }
}

impl SymmetricKernel {
    /// `phi(u, v)` is only ever called with `u ≥ v`.
    pub fn new(name: impl Into<String>, phi: BiFn) -> Self {
        SymmetricKernel {
            name: name.into(),
            phi,
            form: KernelForm::General,
        }
    }

    pub fn product(h: RealFn) -> Self {
        let g = h.clone();
        SymmetricKernel {
            name: "product".into(),
            phi: Arc::new(move |u, v| g(u) * g(v)),
            form: KernelForm::Product(h),
        }
    }

    pub fn max_of(alpha: RealFn) -> Self {
        let a = alpha.clone();
        SymmetricKernel {
            name: "max".into(),
            phi: Arc::new(move |u, _| a(u)),
            form: KernelForm::MaxOf(alpha),
        }
    }

    pub fn constant(c: f64) -> Self {
        SymmetricKernel {
            name: format!("constant({c})"),
            phi: Arc::new(move |_, _| c),
            form: KernelForm::Constant(c),
        }
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn form(&self) -> &KernelForm {
        &self.form
    }

    #[inline]
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        if x >= y {
            (self.phi)(x, y)
        } else {
            (self.phi)(y, x)
        }
    }
}

/// `ℝₙˢ(φ) = (1/√n)·Σ φ̃(uᵢ, vᵢ) − √n·∬ φ̃ dQₙ dQₙ`.
///
/// The double integral is the full `O(n²)` sum over the pooled sample.
pub fn linear_stat(s: &ColourBlindSample, k: &SymmetricKernel) -> Result<f64> {
    let n = s.n() as f64;
    let mut first = 0.0;
    for (i, &(u, v)) in s.pairs().iter().enumerate() {
        let val = k.eval(u, v);
        if !val.is_finite() {
            return Err(Error::NonFinite {
                value: val,
                location: format!("kernel at pair {i} ({u}, {v})"),
            });
        }
        first += val;
    }
    let w = s.pooled();
    let mut diag = 0.0;
    let mut off = 0.0;
    for j in 0..w.len() {
        let d = k.eval(w[j], w[j]);
        if !d.is_finite() {
            return Err(Error::NonFinite {
                value: d,
                location: format!("kernel at pooled value {j} ({})", w[j]),
            });
        }
        diag += d;
        for l in 0..j {
            let val = k.eval(w[j], w[l]);
            if !val.is_finite() {
                return Err(Error::NonFinite {
                    value: val,
                    location: format!("kernel at pooled values ({j}, {l})"),
                });
            }
            off += val;
        }
    }
    let m = w.len() as f64;
    let double = (diag + 2.0 * off) / (m * m);
    Ok(n.sqrt() * (first / n - double))
}

/// `(1/√n)·Σ h(uᵢ)h(vᵢ) − √n·m̄²` with `m̄` the pooled mean of `h`.
pub fn product_linear_stat(s: &ColourBlindSample, h: impl Fn(f64) -> f64) -> f64 {
    let n = s.n() as f64;
    let first: f64 = s.pairs().iter().map(|&(u, v)| h(u) * h(v)).sum();
    let mean = s.pooled().iter().map(|&w| h(w)).sum::<f64>() / (2.0 * n);
    n.sqrt() * (first / n - mean * mean)
}

/// Asymptotically optimal linear statistic for the direction of `alt`.
pub fn optimal_linear_stat(s: &ColourBlindSample, alt: &EqualityAlternative) -> f64 {
    product_linear_stat(s, |x| alt.h(x))
}
