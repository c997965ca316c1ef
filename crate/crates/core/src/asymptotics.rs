//! Limit theory: the projection `𝓛*`, `L²(Q×Q)` inner products, expected
//! shifts under local alternatives, signal-to-noise ratios and the Gaussian
//! power bound.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::dist::{BiFn, DependenceAlternative, DistributionSpec, EqualityAlternative, RealFn};
use crate::error::{Error, Result};
use crate::quadrature::{simpson, NodeGrid, DEFAULT_PANELS};
use crate::statistics::{maxima_variance, q2_inner, KernelForm, SymmetricKernel};

const OFF_GRID_PANELS: usize = 512;

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal quantile by Newton iteration on [`normal_cdf`].
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("normal quantile needs p in (0, 1), got {p}")));
    }
    let (mut lo, mut hi) = (-40.0f64, 40.0f64);
    let mut x = 0.0;
    for _ in 0..200 {
        let f = normal_cdf(x) - p;
        if f.abs() < 1e-17 || hi - lo < 1e-15 {
            break;
        }
        if f > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let dens = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let step = x - f / dens;
        x = if dens > 0.0 && step > lo && step < hi {
            step
        } else {
            0.5 * (lo + hi)
        };
    }
    Ok(x)
}

/// Maximal total-variation distance between `N(0, 1)` and `N(T, 1)`:
/// `2Φ(T/2) − 1`.
pub fn tv_power(t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("signal-to-noise ratio must be >= 0, got {t}")));
    }
    Ok(libm::erf(t / (2.0 * std::f64::consts::SQRT_2)))
}

/// Power of the two-sided level-`level` z-test at mean shift `t`.
pub fn gaussian_power(t: f64, level: f64) -> Result<f64> {
    let z = normal_quantile(1.0 - level / 2.0)?;
    Ok(normal_cdf(t - z) + normal_cdf(-t - z))
}

/// Q-marginals `x ↦ ∫ φ̃(x, y) dQ(y)` cached on the node grid.
struct Marginal {
    k: SymmetricKernel,
    q: DistributionSpec,
    grid: Arc<NodeGrid>,
    at_nodes: Vec<f64>,
    mean: f64,
    off_grid: Mutex<HashMap<u64, f64>>,
}

impl Marginal {
    fn new(k: SymmetricKernel, q: DistributionSpec, grid: Arc<NodeGrid>) -> Self {
        let len = grid.len();
        let dens: Vec<f64> = grid.nodes.iter().map(|&x| q.density(x)).collect();
        let mut at_nodes = vec![0.0; len];
        let mut w = Vec::new();
        for (i, slot) in at_nodes.iter_mut().enumerate() {
            let x = grid.nodes[i];
            grid.prefix_weights(i, &mut w);
            let mut acc = 0.0;
            for j in 0..=i {
                acc += w[j] * k.eval(x, grid.nodes[j]) * dens[j];
            }
            // Mirrored prefix weights integrate over [x, 1].
            grid.prefix_weights(len - 1 - i, &mut w);
            for (off, wj) in w.iter().enumerate() {
                let j = len - 1 - off;
                acc += wj * k.eval(x, grid.nodes[j]) * dens[j];
            }
            *slot = acc;
        }
        let mean = grid
            .weights
            .iter()
            .zip(&at_nodes)
            .zip(&dens)
            .map(|((w, m), d)| w * m * d)
            .sum();
        Marginal {
            k,
            q,
            grid,
            at_nodes,
            mean,
            off_grid: Mutex::new(HashMap::new()),
        }
    }

    fn eval(&self, x: f64) -> f64 {
        if let Some(i) = self.grid.node_index(x) {
            return self.at_nodes[i];
        }
        if let Some(&v) = self.off_grid.lock().unwrap().get(&x.to_bits()) {
            return v;
        }
        let x = x.clamp(0.0, 1.0);
        let f = |y: f64| self.k.eval(x, y) * self.q.density(y);
        let v = simpson(&f, 0.0, x, OFF_GRID_PANELS).unwrap_or(f64::NAN)
            + simpson(&f, x, 1.0, OFF_GRID_PANELS).unwrap_or(f64::NAN);
        let mut cache = self.off_grid.lock().unwrap();
        if cache.len() < 1 << 16 {
            cache.insert(x.to_bits(), v);
        }
        v
    }
}

/// `(𝓛*φ)(x, y) = φ̃(x, y) − (Qφ)(x) − (Qφ)(y) + E_{Q×Q}φ̃`.
pub fn project_lstar(k: &SymmetricKernel, q: &DistributionSpec) -> SymmetricKernel {
    match k.form() {
        KernelForm::Constant(_) => SymmetricKernel::constant(0.0).named(format!("L*{}", k.name())),
        KernelForm::Product(h) => {
            let h = h.clone();
            let hq = h.clone();
            let qd = q.clone();
            let mean = simpson(&|x: f64| hq(x) * qd.density(x), 0.0, 1.0, DEFAULT_PANELS).unwrap_or(f64::NAN);
            let centred: RealFn = Arc::new(move |x| h(x) - mean);
            SymmetricKernel::product(centred).named(format!("L*{}", k.name()))
        }
        _ => {
            let grid = Arc::new(NodeGrid::new(DEFAULT_PANELS));
            let m = Arc::new(Marginal::new(k.clone(), q.clone(), grid));
            let k2 = k.clone();
            let phi: BiFn = Arc::new(move |u, v| k2.eval(u, v) - m.eval(u) - m.eval(v) + m.mean);
            SymmetricKernel::new(format!("L*{}", k.name()), phi)
        }
    }
}

/// `Q`-marginal `(Qφ)(x)` of a kernel, for checking projections.
pub fn kernel_marginal(k: &SymmetricKernel, q: &DistributionSpec, x: f64) -> f64 {
    let f = |y: f64| k.eval(x, y) * q.density(y);
    simpson(&f, 0.0, x, OFF_GRID_PANELS).unwrap_or(f64::NAN) + simpson(&f, x, 1.0, OFF_GRID_PANELS).unwrap_or(f64::NAN)
}

/// `⟨φ, ψ⟩_{Q×Q}` by Simpson quadrature over the triangle `y ≤ x`.
pub fn inner_product_general(k1: &SymmetricKernel, k2: &SymmetricKernel, q: &DistributionSpec) -> f64 {
    let grid = NodeGrid::new(DEFAULT_PANELS);
    let dens: Vec<f64> = grid.nodes.iter().map(|&x| q.density(x)).collect();
    let mut w = Vec::new();
    let mut outer = 0.0;
    for i in 0..grid.len() {
        let x = grid.nodes[i];
        grid.prefix_weights(i, &mut w);
        let mut inner = 0.0;
        for j in 0..=i {
            let y = grid.nodes[j];
            inner += w[j] * k1.eval(x, y) * k2.eval(x, y) * dens[j];
        }
        outer += grid.weights[i] * inner * dens[i];
    }
    2.0 * outer
}

/// `⟨φ, ψ⟩_{Q×Q}`, reduced to one-dimensional integrals for product and
/// max-type kernels.
pub fn inner_product(k1: &SymmetricKernel, k2: &SymmetricKernel, q: &DistributionSpec) -> Result<f64> {
    let one_dim = |f: &dyn Fn(f64) -> f64| simpson(&|x: f64| f(x) * q.density(x), 0.0, 1.0, DEFAULT_PANELS);
    match (k1.form(), k2.form()) {
        (KernelForm::Constant(a), KernelForm::Constant(b)) => Ok(a * b),
        (KernelForm::Constant(c), KernelForm::Product(h)) | (KernelForm::Product(h), KernelForm::Constant(c)) => {
            let m = one_dim(&|x| h(x))?;
            Ok(c * m * m)
        }
        (KernelForm::Product(g), KernelForm::Product(h)) => {
            let m = one_dim(&|x| g(x) * h(x))?;
            Ok(m * m)
        }
        (KernelForm::MaxOf(a), KernelForm::MaxOf(b)) => q2_inner(|x| a(x), |x| b(x), q),
        (KernelForm::Constant(c), KernelForm::MaxOf(a)) | (KernelForm::MaxOf(a), KernelForm::Constant(c)) => {
            Ok(c * q2_inner(|x| a(x), |_| 1.0, q)?)
        }
        _ => {
            let v = inner_product_general(k1, k2, q);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::NonFinite {
                    value: v,
                    location: format!("inner product of {} and {}", k1.name(), k2.name()),
                })
            }
        }
    }
}

/// Expected shift `(u, v) ↦ E Rₙˢ(u, v)` under a local alternative.
#[derive(Clone)]
pub struct ShiftSurface {
    eval: BiFn,
    /// Exponent `r` of the detectability rate `εₙ ≍ nʳ`.
    pub rate_exponent: f64,
    /// `√n·ε²` for equality, `√n·ε` for dependence alternatives.
    pub scale: f64,
}

impl std::fmt::Debug for ShiftSurface {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ShiftSurface")
            .field("rate_exponent", &self.rate_exponent)
            .field("scale", &self.scale)
            .finish()
    }
}

impl ShiftSurface {
    /// Either argument order is accepted.
    pub fn eval(&self, u: f64, v: f64) -> f64 {
        if u >= v {
            (self.eval)(u, v)
        } else {
            (self.eval)(v, u)
        }
    }

    /// Shift of the maxima process, `eval(u, u)`.
    pub fn diagonal(&self, u: f64) -> f64 {
        (self.eval)(u, u)
    }
}

/// `√n·ε²·[−2H(u)H(v) + H(v)²]`.
pub fn shift_equality(alt: &EqualityAlternative, n: usize) -> ShiftSurface {
    let scale = (n as f64).sqrt() * alt.epsilon() * alt.epsilon();
    let a = alt.clone();
    ShiftSurface {
        eval: Arc::new(move |u, v| {
            let (hu, hv) = (a.big_h(u), a.big_h(v));
            scale * (-2.0 * hu * hv + hv * hv)
        }),
        rate_exponent: -0.25,
        scale,
    }
}

/// `√n·ε·[G(u, v) + G(v, u) − G(v, v)]`.
pub fn shift_dependence(alt: &DependenceAlternative, n: usize) -> ShiftSurface {
    let scale = (n as f64).sqrt() * alt.epsilon();
    let a = alt.clone();
    ShiftSurface {
        eval: Arc::new(move |u, v| scale * (a.big_g(u, v) + a.big_g(v, u) - a.big_g(v, v))),
        rate_exponent: -0.5,
        scale,
    }
}

/// `g*(x, y) = [g(x, y) − g(y, x)]/2`.
pub fn antisymmetric_part(g: BiFn) -> BiFn {
    Arc::new(move |x, y| 0.5 * (g(x, y) - g(y, x)))
}

/// `‖h‖²_Q = ∫h² dQ`.
pub fn direction_norm_sq(alt: &EqualityAlternative) -> Result<f64> {
    let q = alt.base();
    simpson(&|x: f64| alt.h(x) * alt.h(x) * q.density(x), 0.0, 1.0, DEFAULT_PANELS)
}

/// `√n·ε²·‖h‖²_Q`, the signal-to-noise ratio of the optimal linear statistic.
pub fn snr_linear(alt: &EqualityAlternative, n: usize) -> Result<f64> {
    let norm = direction_norm_sq(alt)?;
    if !(norm > 0.0) {
        return Err(Error::IllPosed(format!(
            "direction of {} is identically zero",
            alt.name()
        )));
    }
    Ok((n as f64).sqrt() * alt.epsilon() * alt.epsilon() * norm)
}

/// `T_φ = √n·ε²·⟨𝓛*φ̃, h×h⟩ / ‖𝓛*φ̃‖` for an arbitrary kernel.
pub fn snr_kernel(k: &SymmetricKernel, alt: &EqualityAlternative, n: usize) -> Result<f64> {
    let q = alt.base();
    let hh = SymmetricKernel::product(alt.h_fn());
    let proj = project_lstar(k, q);
    let num = inner_product(&proj, &hh, q)?;
    let den = inner_product(&proj, &proj, q)?;
    if !(den > 0.0) {
        return Err(Error::IllPosed(format!("kernel {} projects to zero", k.name())));
    }
    Ok((n as f64).sqrt() * alt.epsilon() * alt.epsilon() * num / den.sqrt())
}

/// `⟨𝓛*φ_α, 𝓛*φ_α⟩_{Q×Q}` by direct bivariate quadrature.
pub fn maxima_variance_direct(alpha: &RealFn, q: &DistributionSpec) -> f64 {
    let a = alpha.clone();
    let phi = SymmetricKernel::new("max", Arc::new(move |u, _| a(u)));
    let proj = project_lstar(&phi, q);
    inner_product_general(&proj, &proj, q)
}

/// Variance of a maxima statistic by the `S`-operator identity.
pub fn maxima_variance_identity(alpha: &RealFn, q: &DistributionSpec) -> Result<f64> {
    maxima_variance(alpha, q)
}
