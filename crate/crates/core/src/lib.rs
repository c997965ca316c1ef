//! Two-sample tests for unlabelled pairs.
//!
//! Each observation is a pair whose coordinates come from two distributions
//! `P₁` and `P₂`, but the labels are lost: only `max` and `min` of each pair
//! are seen. This crate tests `P₁ = P₂` from such "colour-blind" data with
//! Kolmogorov–Smirnov, linear and maxima-based statistics, computes their
//! asymptotic signal-to-noise ratios, and calibrates them by Monte Carlo.
//!
//! ```
//! use cbtest::{blind, ks_colour_blind, LabeledSample};
//!
//! let s = LabeledSample::new(vec![(0.3, 0.8), (0.6, 0.1)]).unwrap();
//! let d = ks_colour_blind(&blind(&s));
//! assert!(d >= 0.0);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod altspec;
pub mod asymptotics;
pub mod dist;
pub mod empirical;
pub mod error;
pub mod expr;
pub mod montecarlo;
pub mod quadrature;
pub mod statistics;

pub use altspec::{parse_alt, AltSpec};
pub use asymptotics::{
    antisymmetric_part, inner_product, project_lstar, shift_dependence, shift_equality, snr_kernel, snr_linear,
    tv_power, ShiftSurface,
};
pub use dist::{
    direction_from_pair, inverse_cdf, q_direction, sample_dependence_alt, sample_equality_alt, sample_null, BiFn,
    DependenceAlternative, DistributionSpec, EqualityAlternative, RealFn,
};
pub use empirical::{blind, process_r_full, process_rs, ColourBlindSample, LabeledSample, StepFunction};
pub use error::{Error, Result};
pub use montecarlo::{critical_value, p_value, power, simulate, EcdfTable, Model, SimConfig, Statistic, Tail};
pub use statistics::{
    cone_membership, cross_probability, inequality_chain, ks_colour_blind, ks_full, linear_stat, maxima_stat,
    optimal_linear_stat, s_operator, snr_maxima, SymmetricKernel, TestReport,
};
