//! Composite and adaptive Simpson quadrature on subintervals of [0, 1].

use crate::dist::DistributionSpec;
use crate::error::{Error, Result};

/// Default number of Simpson subintervals.
pub const DEFAULT_PANELS: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuadratureRule {
    /// Composite Simpson with an even number (>= 64) of subintervals.
    Simpson { panels: usize },
    /// Recursive adaptive Simpson with absolute tolerance in (0, 1e-4].
    Adaptive { tol: f64 },
}

impl Default for QuadratureRule {
    fn default() -> Self {
        QuadratureRule::Simpson { panels: DEFAULT_PANELS }
    }
}

impl QuadratureRule {
    pub fn simpson(panels: usize) -> Result<Self> {
        if panels < 64 || !panels.is_multiple_of(2) {
            return Err(Error::Domain(format!(
                "Simpson panel count must be even and >= 64, got {panels}"
            )));
        }
        Ok(QuadratureRule::Simpson { panels })
    }

    pub fn adaptive(tol: f64) -> Result<Self> {
        if !(tol > 0.0 && tol <= 1e-4) {
            return Err(Error::Domain(format!(
                "adaptive tolerance must lie in (0, 1e-4], got {tol}"
            )));
        }
        Ok(QuadratureRule::Adaptive { tol })
    }
}

/// Integrating weight: Lebesgue measure or the density of a distribution.
#[derive(Clone, Copy)]
pub enum Weight<'a> {
    Uniform,
    Dist(&'a DistributionSpec),
}

/// `∫_a^b f(x) w(x) dx` where `w` is the weight density (or 1).
pub fn quad<F>(f: F, weight: Weight<'_>, a: f64, b: f64, rule: QuadratureRule) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) || a > b {
        return Err(Error::Domain(format!(
            "integration bounds must satisfy 0 <= a <= b <= 1, got [{a}, {b}]"
        )));
    }
    match weight {
        Weight::Uniform => integrate(&f, a, b, rule),
        Weight::Dist(d) => integrate(&|x| f(x) * d.density(x), a, b, rule),
    }
}

fn integrate<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, b: f64, rule: QuadratureRule) -> Result<f64> {
    match rule {
        QuadratureRule::Simpson { panels } => simpson(f, a, b, panels),
        QuadratureRule::Adaptive { tol } => adaptive_simpson(f, a, b, tol),
    }
}

fn checked<F: Fn(f64) -> f64 + ?Sized>(f: &F, x: f64) -> Result<f64> {
    let y = f(x);
    if y.is_finite() {
        Ok(y)
    } else {
        Err(Error::NonFinite {
            value: y,
            location: format!("x = {x}"),
        })
    }
}

/// Composite Simpson rule with `panels` (even) subintervals.
pub fn simpson<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, b: f64, panels: usize) -> Result<f64> {
    debug_assert!(panels.is_multiple_of(2) && panels > 0);
    if a == b {
        return Ok(0.0);
    }
    let h = (b - a) / panels as f64;
    let mut odd = 0.0;
    let mut even = 0.0;
    for k in 1..panels {
        let y = checked(f, a + k as f64 * h)?;
        if k % 2 == 1 {
            odd += y;
        } else {
            even += y;
        }
    }
    let ends = checked(f, a)? + checked(f, b)?;
    Ok(h / 3.0 * (ends + 4.0 * odd + 2.0 * even))
}

const MAX_DEPTH: u32 = 48;

/// Adaptive Simpson with Richardson correction.
pub fn adaptive_simpson<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let fa = checked(f, a)?;
    let fb = checked(f, b)?;
    let m = 0.5 * (a + b);
    let fm = checked(f, m)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    adaptive_step(f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_step<F: Fn(f64) -> f64 + ?Sized>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = checked(f, lm)?;
    let frm = checked(f, rm)?;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    Ok(adaptive_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
        + adaptive_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
}

/// Equispaced node grid on [0, 1] with composite Simpson weights.
#[derive(Debug, Clone)]
pub struct NodeGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    panels: usize,
}

impl NodeGrid {
    pub fn new(panels: usize) -> Self {
        assert!(panels.is_multiple_of(2) && panels >= 2, "panels must be even");
        let h = 1.0 / panels as f64;
        let nodes = (0..=panels).map(|k| k as f64 / panels as f64).collect();
        let weights = (0..=panels)
            .map(|k| {
                let c = if k == 0 || k == panels {
                    1.0
                } else if k % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                c * h / 3.0
            })
            .collect();
        NodeGrid { nodes, weights, panels }
    }

    pub fn panels(&self) -> usize {
        self.panels
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Index of `x` if it coincides exactly with a node.
    pub fn node_index(&self, x: f64) -> Option<usize> {
        let k = (x * self.panels as f64).round();
        if k < 0.0 || k > self.panels as f64 {
            return None;
        }
        let k = k as usize;
        (self.nodes[k] == x).then_some(k)
    }

    /// Weights integrating over `[0, nodes[i]]` using nodes `0..=i`.
    ///
    /// Simpson on an even prefix, closed by a 3/8 panel when `i` is odd.
    pub fn prefix_weights(&self, i: usize, out: &mut Vec<f64>) {
        out.clear();
        out.resize(i + 1, 0.0);
        let h = 1.0 / self.panels as f64;
        match i {
            0 => {}
            1 => {
                out[0] = 0.5 * h;
                out[1] = 0.5 * h;
            }
            3 => add_three_eighths(out, 0, h),
            _ => {
                let simpson_end = if i.is_multiple_of(2) { i } else { i - 3 };
                for k in (0..simpson_end).step_by(2) {
                    out[k] += h / 3.0;
                    out[k + 1] += 4.0 * h / 3.0;
                    out[k + 2] += h / 3.0;
                }
                if i % 2 == 1 {
                    add_three_eighths(out, i - 3, h);
                }
            }
        }
    }
}

fn add_three_eighths(out: &mut [f64], start: usize, h: f64) {
    let c = 3.0 * h / 8.0;
    out[start] += c;
    out[start + 1] += 3.0 * c;
    out[start + 2] += 3.0 * c;
    out[start + 3] += c;
}

/// Running integral of a tabulated function over an equispaced grid.
///
/// Each cell `[x_k, x_{k+1}]` is integrated by Simpson's rule using the
/// cell midpoint, so `table[k] = ∫_0^{x_k} f`.
pub fn cumulative_simpson<F: Fn(f64) -> f64 + ?Sized>(f: &F, cells: usize) -> Result<Vec<f64>> {
    let h = 1.0 / cells as f64;
    let mut table = Vec::with_capacity(cells + 1);
    table.push(0.0);
    let mut acc = 0.0;
    let mut left = checked(f, 0.0)?;
    for k in 0..cells {
        let a = k as f64 * h;
        let b = (k + 1) as f64 / cells as f64;
        let mid = checked(f, 0.5 * (a + b))?;
        let right = checked(f, b)?;
        acc += (b - a) / 6.0 * (left + 4.0 * mid + right);
        table.push(acc);
        left = right;
    }
    Ok(table)
}

/// Single Simpson panel on `[a, b]`.
#[inline]
pub fn simpson_cell<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
}
