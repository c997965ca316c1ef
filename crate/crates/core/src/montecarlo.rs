//! Seeded, parallel Monte Carlo simulation of test statistics.
//!
//! Replicate `r` draws from `ChaCha8Rng` seeded with the master seed on
//! stream `r`, so results do not depend on the number of workers.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{
    sample_dependence_alt, sample_null, DependenceAlternative, DistributionSpec, EqualityAlternative, EqualitySampler,
    RealFn,
};
use crate::empirical::{blind, LabeledSample};
use crate::error::{Error, Result};
use crate::statistics::{
    cross_probability, linear_stat, maxima_stat, product_linear_stat, KsWorkspace, SymmetricKernel, TestReport,
    DEFAULT_MAX_CELLS, NULL_CROSS_PROBABILITY,
};

/// Upper bound on replications held in memory.
pub const MAX_REPLICATIONS: usize = 1_000_000;
/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "CBTEST_THREADS";

/// Statistic computed on each simulated sample.
#[derive(Clone)]
pub enum Statistic {
    /// Colour-blind Kolmogorov–Smirnov `Dₙˢ`.
    KsSym,
    /// Labelled two-sample Kolmogorov–Smirnov `Dₙ`.
    KsFull,
    /// Product-kernel linear statistic with direction `h`.
    Linear {
        label: String,
        h: RealFn,
    },
    /// Linear statistic with a general kernel (`O(n²)` per sample).
    Kernel(SymmetricKernel),
    /// Maxima statistic with weight `α`.
    Maxima {
        label: String,
        alpha: RealFn,
    },
    CrossProb,
}

impl fmt::Debug for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

impl Statistic {
    pub fn name(&self) -> &'static str {
        match self {
            Statistic::KsSym => "ks-sym",
            Statistic::KsFull => "ks-full",
            Statistic::Linear { .. } => "linear",
            Statistic::Kernel(_) => "kernel",
            Statistic::Maxima { .. } => "maxima",
            Statistic::CrossProb => "cross-prob",
        }
    }

    /// Name plus direction label, e.g. `linear(example-4-2)`.
    pub fn describe(&self) -> String {
        match self {
            Statistic::Linear { label, .. } | Statistic::Maxima { label, .. } => {
                format!("{}({label})", self.name())
            }
            Statistic::Kernel(k) => format!("kernel({})", k.name()),
            _ => self.name().to_string(),
        }
    }

    /// Right tail for KS statistics, two-sided otherwise.
    pub fn default_tail(&self) -> Tail {
        match self {
            Statistic::KsSym | Statistic::KsFull => Tail::Right,
            Statistic::CrossProb => Tail::TwoSided {
                centre: NULL_CROSS_PROBABILITY,
            },
            _ => Tail::TwoSided { centre: 0.0 },
        }
    }

    /// Evaluates the statistic on one labelled sample.
    pub fn evaluate(&self, s: &LabeledSample, ws: &mut KsWorkspace, max_cells: usize) -> Result<f64> {
        if let Statistic::KsFull = self {
            return Ok(ws.ks_full(s, max_cells));
        }
        let cb = blind(s);
        Ok(match self {
            Statistic::KsSym => ws.ks_colour_blind(&cb, max_cells),
            Statistic::KsFull => unreachable!(),
            Statistic::Linear { h, .. } => product_linear_stat(&cb, |x| h(x)),
            Statistic::Kernel(k) => linear_stat(&cb, k)?,
            Statistic::Maxima { alpha, .. } => maxima_stat(&cb, |x| alpha(x)),
            Statistic::CrossProb => cross_probability(&cb)?,
        })
    }
}

/// Rejection region of a test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Tail {
    Right,
    Left,
    TwoSided { centre: f64 },
}

impl Tail {
    /// Maps a statistic so that large values are evidence against the null.
    #[inline]
    pub fn score(&self, x: f64) -> f64 {
        match *self {
            Tail::Right => x,
            Tail::Left => -x,
            Tail::TwoSided { centre } => (x - centre).abs(),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Tail::Right => "right".into(),
            Tail::Left => "left".into(),
            Tail::TwoSided { centre } => format!("two-sided about {centre}"),
        }
    }
}

/// Data-generating model of a simulation.
#[derive(Clone, Debug)]
pub enum Model {
    Null(DistributionSpec),
    Equality(EqualityAlternative),
    Dependence(DependenceAlternative),
}

impl Model {
    pub fn describe(&self) -> String {
        match self {
            Model::Null(q) => format!("null({})", q.name()),
            Model::Equality(a) => format!("equality({}, epsilon={})", a.name(), a.epsilon()),
            Model::Dependence(a) => format!("dependence({}, epsilon={})", a.name(), a.epsilon()),
        }
    }

    /// Distribution of the pooled values under the null this model perturbs.
    pub fn base(&self) -> &DistributionSpec {
        match self {
            Model::Null(q) => q,
            Model::Equality(a) => a.base(),
            Model::Dependence(a) => a.base(),
        }
    }
}

/// Configuration of a simulation run.
#[derive(Clone, Debug)]
pub struct SimConfig {
    pub statistic: Statistic,
    pub model: Model,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    /// Worker count hint; `None` uses all available cores.
    pub workers: Option<usize>,
    /// Grid cells per axis for KS suprema.
    pub max_cells: usize,
}

impl SimConfig {
    pub fn new(statistic: Statistic, model: Model, n: usize, reps: usize, seed: u64) -> Self {
        SimConfig {
            statistic,
            model,
            n,
            reps,
            seed,
            workers: None,
            max_cells: DEFAULT_MAX_CELLS,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = Some(workers);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_model(mut self, model: Model) -> Self {
        self.model = model;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("n must be >= 1".into()));
        }
        if self.reps == 0 || self.reps > MAX_REPLICATIONS {
            return Err(Error::Config(format!(
                "replications must be in 1..={MAX_REPLICATIONS}, got {}",
                self.reps
            )));
        }
        if self.workers == Some(0) {
            return Err(Error::Config("worker count must be >= 1".into()));
        }
        if self.max_cells < 2 {
            return Err(Error::Config("grid must have at least 2 cells".into()));
        }
        if matches!(self.statistic, Statistic::CrossProb) && self.n < 2 {
            return Err(Error::Config("cross-prob needs n >= 2".into()));
        }
        Ok(())
    }

    pub fn meta(&self) -> SimMeta {
        SimMeta {
            statistic: self.statistic.describe(),
            model: self.model.describe(),
            n: self.n,
            reps: self.reps,
            seed: self.seed,
            grid: self.max_cells,
        }
    }
}

/// Serializable description of a [`SimConfig`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimMeta {
    pub statistic: String,
    pub model: String,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub grid: usize,
}

/// Generator for replicate `r` under master seed `seed`.
pub fn replicate_rng(seed: u64, r: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(r as u64);
    rng
}

/// Worker count from a hint, capped by `CBTEST_THREADS`.
pub fn resolve_workers(hint: Option<usize>) -> usize {
    let available = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut w = hint.unwrap_or(available).max(1);
    if let Some(cap) = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
    {
        if cap >= 1 {
            w = w.min(cap);
        }
    }
    w
}

/// Runs `f(r, rng)` for `r = 0..reps` in parallel, returning results in
/// replicate order.
pub fn run_replicates<T, S, I, F>(reps: usize, seed: u64, workers: Option<usize>, init: I, f: F) -> Result<Vec<T>>
where
    T: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, usize, &mut ChaCha8Rng) -> Result<T> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(resolve_workers(workers))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| {
        (0..reps)
            .into_par_iter()
            .map_init(&init, |state, r| {
                let mut rng = replicate_rng(seed, r);
                f(state, r, &mut rng)
            })
            .collect()
    })
}

/// Simulated statistic values in replicate order.
pub fn simulate_values(cfg: &SimConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let sampler = match &cfg.model {
        Model::Equality(a) => Some(EqualitySampler::new(a)),
        _ => None,
    };
    run_replicates(cfg.reps, cfg.seed, cfg.workers, KsWorkspace::new, |ws, r, rng| {
        let sample = match &cfg.model {
            Model::Null(q) => sample_null(q, cfg.n, rng),
            Model::Equality(_) => sampler.as_ref().unwrap().sample(cfg.n, rng),
            Model::Dependence(a) => sample_dependence_alt(a, cfg.n, rng)?,
        };
        let v = cfg.statistic.evaluate(&sample, ws, cfg.max_cells)?;
        if !v.is_finite() {
            return Err(Error::NonFinite {
                value: v,
                location: format!("replicate {r}"),
            });
        }
        Ok(v)
    })
}

/// Simulates the statistic and returns its empirical distribution.
pub fn simulate(cfg: &SimConfig) -> Result<EcdfTable> {
    let mut values = simulate_values(cfg)?;
    values.sort_unstable_by(f64::total_cmp);
    Ok(EcdfTable {
        values,
        meta: cfg.meta(),
    })
}

/// Sorted simulated values with ECDF probabilities `k/R`.
#[derive(Debug, Clone, PartialEq)]
pub struct EcdfTable {
    values: Vec<f64>,
    pub meta: SimMeta,
}

impl EcdfTable {
    /// Builds a table from raw values, sorting them.
    pub fn from_values(mut values: Vec<f64>, meta: SimMeta) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Config("empty table".into()));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                value: *v,
                location: "ECDF table".into(),
            });
        }
        values.sort_unstable_by(f64::total_cmp);
        Ok(EcdfTable { values, meta })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn probabilities(&self) -> impl Iterator<Item = f64> + '_ {
        let r = self.values.len() as f64;
        (1..=self.values.len()).map(move |k| k as f64 / r)
    }

    /// `#{values ≤ x}/R`.
    pub fn ecdf(&self, x: f64) -> f64 {
        self.values.partition_point(|&v| v <= x) as f64 / self.values.len() as f64
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Sample standard deviation (0 for a single value).
    pub fn sd(&self) -> f64 {
        let r = self.values.len();
        if r < 2 {
            return 0.0;
        }
        let m = self.mean();
        (self.values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (r - 1) as f64).sqrt()
    }

    /// CSV with header `value,probability` at full precision.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::with_capacity(32 * self.values.len() + 20);
        out.push_str("value,probability\n");
        for (v, p) in self.values.iter().zip(self.probabilities()) {
            out.push_str(&format!("{v:?},{p:?}\n"));
        }
        out
    }

    /// Writes the CSV and a JSON sidecar next to it; returns the sidecar path.
    pub fn write_csv(&self, path: &Path) -> Result<PathBuf> {
        fs::write(path, self.to_csv_string())?;
        let side = sidecar_path(path);
        fs::write(&side, serde_json::to_string_pretty(&self.meta)? + "\n")?;
        Ok(side)
    }
}

/// `out.csv` → `out.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

fn check_level(level: f64) -> Result<()> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Domain(format!("level must be in (0, 1), got {level}")));
    }
    Ok(())
}

fn order_statistic(sorted: &[f64], level: f64) -> f64 {
    let r = sorted.len();
    let k = ((1.0 - level) * r as f64 - 1e-9).ceil().clamp(1.0, r as f64) as usize;
    sorted[k - 1]
}

/// The `⌈(1 − level)·R⌉`-th smallest simulated value.
pub fn critical_value(t: &EcdfTable, level: f64) -> Result<f64> {
    check_level(level)?;
    Ok(order_statistic(&t.values, level))
}

/// Critical value of the tail score `tail.score(value)`.
pub fn critical_value_tail(t: &EcdfTable, level: f64, tail: Tail) -> Result<f64> {
    check_level(level)?;
    let mut scores: Vec<f64> = t.values.iter().map(|&v| tail.score(v)).collect();
    scores.sort_unstable_by(f64::total_cmp);
    Ok(order_statistic(&scores, level))
}

/// `(1 + #{simulated ≥ observed})/(R + 1)`.
pub fn p_value(t: &EcdfTable, observed: f64) -> f64 {
    let ge = t.values.len() - t.values.partition_point(|&v| v < observed);
    (1 + ge) as f64 / (t.values.len() + 1) as f64
}

/// Add-one p-value on the tail score.
pub fn p_value_tail(t: &EcdfTable, observed: f64, tail: Tail) -> f64 {
    let obs = tail.score(observed);
    let ge = t.values.iter().filter(|&&v| tail.score(v) >= obs).count();
    (1 + ge) as f64 / (t.values.len() + 1) as f64
}

/// Fraction of `values` whose tail score exceeds `critical`.
pub fn rejection_rate(values: &[f64], critical: f64, tail: Tail) -> f64 {
    values.iter().filter(|&&v| tail.score(v) > critical).count() as f64 / values.len() as f64
}

/// Monte Carlo power estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerEstimate {
    pub power: f64,
    pub critical_value: f64,
    /// Binomial standard error of `power`.
    pub se: f64,
    pub level: f64,
}

/// Power at `level` with the statistic's default tail.
pub fn power(null_cfg: &SimConfig, alt_cfg: &SimConfig, level: f64) -> Result<PowerEstimate> {
    power_with_tail(null_cfg, alt_cfg, level, null_cfg.statistic.default_tail())
}

/// Power at `level` rejecting on `tail`.
pub fn power_with_tail(null_cfg: &SimConfig, alt_cfg: &SimConfig, level: f64, tail: Tail) -> Result<PowerEstimate> {
    check_level(level)?;
    if null_cfg.statistic.describe() != alt_cfg.statistic.describe() {
        return Err(Error::Config(format!(
            "statistics differ: {} vs {}",
            null_cfg.statistic.describe(),
            alt_cfg.statistic.describe()
        )));
    }
    if null_cfg.n != alt_cfg.n {
        return Err(Error::Config(format!(
            "sample sizes differ: {} vs {}",
            null_cfg.n, alt_cfg.n
        )));
    }
    null_cfg.validate()?;
    alt_cfg.validate()?;
    let null = simulate(null_cfg)?;
    let crit = critical_value_tail(&null, level, tail)?;
    let alt = simulate_values(alt_cfg)?;
    let p = rejection_rate(&alt, crit, tail);
    Ok(PowerEstimate {
        power: p,
        critical_value: crit,
        se: (p * (1.0 - p) / alt.len() as f64).sqrt(),
        level,
    })
}

/// Report for an observed value against a simulated null.
pub fn test_report(observed: f64, null: &EcdfTable, tail: Tail, levels: &[f64]) -> Result<TestReport> {
    let mut critical_values = std::collections::BTreeMap::new();
    for &level in levels {
        critical_values.insert(format!("{level}"), critical_value_tail(null, level, tail)?);
    }
    Ok(TestReport {
        statistic: null.meta.statistic.clone(),
        observed,
        p_value: p_value_tail(null, observed, tail),
        critical_values,
        replications: null.len(),
        seed: null.meta.seed,
        n: null.meta.n,
        tail: tail.label(),
        null_mean: null.mean(),
        null_sd: null.sd(),
        data_range: None,
    })
}
