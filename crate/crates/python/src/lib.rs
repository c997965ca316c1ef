//! Python bindings.
//!
//! Samples are passed as lists of `(x, y)` tuples in [0, 1]².

use cbtest::montecarlo::{critical_value_tail, p_value_tail, simulate as mc_simulate};
use cbtest::statistics::{maxima_stat, product_linear_stat};
use cbtest::{
    blind, parse_alt, AltSpec, ColourBlindSample, DistributionSpec, EcdfTable, LabeledSample, Model, SimConfig,
    Statistic,
};
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

fn err(e: cbtest::Error) -> PyErr {
    match e {
        cbtest::Error::NonFinite { .. } | cbtest::Error::IllPosed(_) => PyArithmeticError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn labeled(pairs: Vec<(f64, f64)>) -> PyResult<LabeledSample> {
    LabeledSample::new(pairs).map_err(err)
}

fn colour_blind(pairs: Vec<(f64, f64)>) -> PyResult<ColourBlindSample> {
    Ok(blind(&labeled(pairs)?))
}

/// A parsed alternative: builtin name, inline JSON, or JSON file path.
#[pyclass(name = "Alternative", module = "cbtest_py", frozen)]
struct PyAlternative {
    spec: AltSpec,
}

#[pymethods]
impl PyAlternative {
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        Ok(PyAlternative {
            spec: parse_alt(spec).map_err(err)?,
        })
    }

    #[getter]
    fn name(&self) -> String {
        self.spec.name().to_string()
    }

    #[getter]
    fn is_equality(&self) -> bool {
        self.spec.equality().is_some()
    }

    #[getter]
    fn epsilon(&self) -> f64 {
        match &self.spec {
            AltSpec::Equality { alt, .. } => alt.epsilon(),
            AltSpec::Dependence(a) => a.epsilon(),
        }
    }

    fn with_epsilon(&self, epsilon: f64) -> PyResult<Self> {
        Ok(PyAlternative {
            spec: self.spec.with_epsilon(epsilon).map_err(err)?,
        })
    }

    /// Direction `h(x)`; equality alternatives only.
    fn h(&self, x: f64) -> PyResult<f64> {
        Ok(self.equality()?.h(x))
    }

    /// Labelled pairs drawn from the alternative.
    fn sample(&self, n: usize, seed: u64) -> PyResult<Vec<(f64, f64)>> {
        let mut rng = cbtest::montecarlo::replicate_rng(seed, 0);
        let s = match &self.spec {
            AltSpec::Equality { alt, .. } => cbtest::dist::EqualitySampler::new(alt).sample(n, &mut rng),
            AltSpec::Dependence(a) => cbtest::sample_dependence_alt(a, n, &mut rng).map_err(err)?,
        };
        Ok(s.pairs().to_vec())
    }

    fn __repr__(&self) -> String {
        format!("Alternative({:?}, epsilon={})", self.spec.name(), self.epsilon())
    }
}

impl PyAlternative {
    fn equality(&self) -> PyResult<&cbtest::EqualityAlternative> {
        self.spec
            .equality()
            .ok_or_else(|| PyValueError::new_err(format!("{} is not an equality alternative", self.spec.name())))
    }
}

/// Sorted simulated statistic values.
#[pyclass(name = "EcdfTable", module = "cbtest_py", frozen)]
struct PyEcdfTable {
    table: EcdfTable,
    statistic: Statistic,
}

#[pymethods]
impl PyEcdfTable {
    #[getter]
    fn values(&self) -> Vec<f64> {
        self.table.values().to_vec()
    }

    #[getter]
    fn probabilities(&self) -> Vec<f64> {
        self.table.probabilities().collect()
    }

    #[getter]
    fn statistic(&self) -> String {
        self.table.meta.statistic.clone()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.table.meta.seed
    }

    fn __len__(&self) -> usize {
        self.table.len()
    }

    fn ecdf(&self, x: f64) -> f64 {
        self.table.ecdf(x)
    }

    fn mean(&self) -> f64 {
        self.table.mean()
    }

    fn sd(&self) -> f64 {
        self.table.sd()
    }

    /// Critical value on the statistic's default tail score.
    fn critical_value(&self, level: f64) -> PyResult<f64> {
        critical_value_tail(&self.table, level, self.statistic.default_tail()).map_err(err)
    }

    fn p_value(&self, observed: f64) -> f64 {
        p_value_tail(&self.table, observed, self.statistic.default_tail())
    }

    fn to_csv(&self) -> String {
        self.table.to_csv_string()
    }
}

#[pyfunction]
fn ks_colour_blind(pairs: Vec<(f64, f64)>) -> PyResult<f64> {
    Ok(cbtest::ks_colour_blind(&colour_blind(pairs)?))
}

#[pyfunction]
fn ks_full(pairs: Vec<(f64, f64)>) -> PyResult<f64> {
    Ok(cbtest::ks_full(&labeled(pairs)?))
}

/// U-statistic estimate of `P(max of one pair > min of another)`.
#[pyfunction]
fn cross_probability(pairs: Vec<(f64, f64)>) -> PyResult<f64> {
    cbtest::cross_probability(&colour_blind(pairs)?).map_err(err)
}

/// Optimal linear statistic for the alternative's direction.
#[pyfunction]
fn linear_stat(pairs: Vec<(f64, f64)>, alt: &PyAlternative) -> PyResult<f64> {
    let h = alt.equality()?.h_fn();
    Ok(product_linear_stat(&colour_blind(pairs)?, |x| h(x)))
}

#[pyfunction]
fn maxima_statistic(pairs: Vec<(f64, f64)>, alt: &PyAlternative) -> PyResult<f64> {
    let (_, alpha) = alt.spec.maxima_weight().ok_or_else(|| alt.equality().unwrap_err())?;
    Ok(maxima_stat(&colour_blind(pairs)?, |x| alpha(x)))
}

/// `(lo, mid, hi)` of the inequality chain for two builtin distributions.
#[pyfunction]
fn inequality_chain(p1: &str, p2: &str, x: f64) -> PyResult<(f64, f64, f64)> {
    let a = DistributionSpec::builtin(p1).map_err(err)?;
    let b = DistributionSpec::builtin(p2).map_err(err)?;
    cbtest::inequality_chain(&a, &b, x).map_err(err)
}

#[pyfunction]
fn snr_linear(alt: &PyAlternative, n: usize) -> PyResult<f64> {
    cbtest::snr_linear(alt.equality()?, n).map_err(err)
}

/// `(snr, variance, shift)` of the maxima statistic.
#[pyfunction]
fn snr_maxima(alt: &PyAlternative, n: usize) -> PyResult<(f64, f64, f64)> {
    let eq = alt.equality()?;
    let (_, alpha) = alt.spec.maxima_weight().expect("equality alternative");
    let m = cbtest::snr_maxima(&alpha, eq, n).map_err(err)?;
    Ok((m.snr, m.variance, (n as f64).sqrt() * m.shift_per_root_n))
}

#[pyfunction]
fn tv_power(t: f64) -> PyResult<f64> {
    cbtest::tv_power(t).map_err(err)
}

/// Simulates a statistic. `model` is `"null"` (uniform unless `q` names a
/// builtin distribution), `"null-alt"` or `"alt"`.
#[pyfunction]
#[pyo3(signature = (statistic, n, reps, seed, model = "null", alt = None, q = None, workers = None))]
#[allow(clippy::too_many_arguments)]
fn simulate(
    py: Python<'_>,
    statistic: &str,
    n: usize,
    reps: usize,
    seed: u64,
    model: &str,
    alt: Option<&PyAlternative>,
    q: Option<&str>,
    workers: Option<usize>,
) -> PyResult<PyEcdfTable> {
    let need_alt = |what: &str| alt.ok_or_else(|| PyValueError::new_err(format!("{what} requires alt")));
    let stat = match statistic {
        "ks-sym" => Statistic::KsSym,
        "ks-full" => Statistic::KsFull,
        "cross-prob" => Statistic::CrossProb,
        "linear" => {
            let a = need_alt("linear")?;
            Statistic::Linear {
                label: a.spec.name().to_string(),
                h: a.equality()?.h_fn(),
            }
        }
        "maxima" => {
            let a = need_alt("maxima")?;
            a.equality()?;
            let (label, alpha) = a.spec.maxima_weight().expect("equality alternative");
            Statistic::Maxima { label, alpha }
        }
        other => return Err(PyValueError::new_err(format!("unknown statistic {other:?}"))),
    };
    let model = match model {
        "null" => Model::Null(match q {
            Some(name) => DistributionSpec::builtin(name).map_err(err)?,
            None => DistributionSpec::uniform(),
        }),
        "null-alt" => Model::Null(need_alt("null-alt")?.spec.base().clone()),
        "alt" => match &need_alt("alt")?.spec {
            AltSpec::Equality { alt, .. } => Model::Equality(alt.clone()),
            AltSpec::Dependence(d) => Model::Dependence(d.clone()),
        },
        other => return Err(PyValueError::new_err(format!("unknown model {other:?}"))),
    };
    let mut cfg = SimConfig::new(stat.clone(), model, n, reps, seed);
    cfg.workers = workers;
    let table = py.detach(|| mc_simulate(&cfg)).map_err(err)?;
    Ok(PyEcdfTable { table, statistic: stat })
}

#[pymodule]
fn cbtest_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyAlternative>()?;
    m.add_class::<PyEcdfTable>()?;
    m.add_function(wrap_pyfunction!(ks_colour_blind, m)?)?;
    m.add_function(wrap_pyfunction!(ks_full, m)?)?;
    m.add_function(wrap_pyfunction!(cross_probability, m)?)?;
    m.add_function(wrap_pyfunction!(linear_stat, m)?)?;
    m.add_function(wrap_pyfunction!(maxima_statistic, m)?)?;
    m.add_function(wrap_pyfunction!(inequality_chain, m)?)?;
    m.add_function(wrap_pyfunction!(snr_linear, m)?)?;
    m.add_function(wrap_pyfunction!(snr_maxima, m)?)?;
    m.add_function(wrap_pyfunction!(tv_power, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add("NULL_CROSS_PROBABILITY", cbtest::statistics::NULL_CROSS_PROBABILITY)?;
    Ok(())
}
