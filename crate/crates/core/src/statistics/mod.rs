//! Test statistics for colour-blind data.

mod diagnostics;
mod ks;
mod linear;
mod maxima;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use diagnostics::{chain_values, cross_probability, inequality_chain, NULL_CROSS_PROBABILITY};
pub use ks::{ks_colour_blind, ks_full, KsWorkspace, DEFAULT_MAX_CELLS};
pub use linear::{linear_stat, optimal_linear_stat, product_linear_stat, KernelForm, SymmetricKernel};
pub use maxima::{
    cone_membership, maxima_stat, maxima_variance, q2_inner, q2_integral, s_operator, snr_maxima, ConeMembership,
    MaximaSnr,
};

/// Outcome of applying a statistic to data with a Monte Carlo null.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub statistic: String,
    pub observed: f64,
    pub p_value: f64,
    /// Keyed by level, e.g. `"0.05"`.
    pub critical_values: BTreeMap<String, f64>,
    pub replications: usize,
    pub seed: u64,
    pub n: usize,
    pub tail: String,
    pub null_mean: f64,
    pub null_sd: f64,
    /// Pooled `(min, max)` of the raw data when it was rescaled to [0, 1].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data_range: Option<(f64, f64)>,
}
