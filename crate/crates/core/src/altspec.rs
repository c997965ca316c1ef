//! Alternative specifications: builtin names or JSON documents.
//!
//! ```json
//! {"kind": "equality", "q": "mix", "h": "(1-2*x)/(1+2*x)", "epsilon": 1.0}
//! {"kind": "equality", "pair": ["uniform", "square"]}
//! {"kind": "dependence", "q": "uniform", "g": "antisymmetric", "epsilon": 0.5}
//! ```
//!
//! Distributions are builtin names or ascending CDF coefficients. `h` and
//! `g` are builtin names or expressions in `x` (and `y`). An equality spec
//! may carry `"alpha"`, the weight used by maxima statistics, and
//! `"centre": true` to subtract `∫h dQ` from `h`.

use std::sync::Arc;

use serde::Deserialize;
use serde_json::Value;

use crate::dist::{
    direction_from_pair, q_direction, BiFn, DependenceAlternative, DistributionSpec, EqualityAlternative, RealFn,
};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::quadrature::{simpson, DEFAULT_PANELS};

/// Builtin alternative names.
pub const BUILTIN_ALTERNATIVES: &[&str] = &[
    "example-4-2",
    "example-5-2",
    "uniform-vs-square",
    "dependence-product",
    "dependence-antisymmetric",
];

/// A parsed alternative.
#[derive(Clone)]
pub enum AltSpec {
    Equality {
        alt: EqualityAlternative,
        /// Weight for maxima statistics; defaults to `q = hH/Q`.
        alpha: Option<(String, RealFn)>,
    },
    Dependence(DependenceAlternative),
}

impl std::fmt::Debug for AltSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AltSpec::Equality { alt, alpha } => f
                .debug_struct("Equality")
                .field("alt", alt)
                .field("alpha", &alpha.as_ref().map(|a| &a.0))
                .finish(),
            AltSpec::Dependence(a) => f.debug_tuple("Dependence").field(a).finish(),
        }
    }
}

impl AltSpec {
    pub fn name(&self) -> &str {
        match self {
            AltSpec::Equality { alt, .. } => alt.name(),
            AltSpec::Dependence(a) => a.name(),
        }
    }

    pub fn base(&self) -> &DistributionSpec {
        match self {
            AltSpec::Equality { alt, .. } => alt.base(),
            AltSpec::Dependence(a) => a.base(),
        }
    }

    pub fn equality(&self) -> Option<&EqualityAlternative> {
        match self {
            AltSpec::Equality { alt, .. } => Some(alt),
            AltSpec::Dependence(_) => None,
        }
    }

    /// Maxima weight: the explicit `alpha` or the induced `q`.
    pub fn maxima_weight(&self) -> Option<(String, RealFn)> {
        match self {
            AltSpec::Equality { alt, alpha } => Some(
                alpha
                    .clone()
                    .unwrap_or_else(|| (format!("q[{}]", alt.name()), q_direction(alt))),
            ),
            AltSpec::Dependence(_) => None,
        }
    }

    /// Same alternative with `ε` replaced.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<AltSpec> {
        Ok(match self {
            AltSpec::Equality { alt, alpha } => AltSpec::Equality {
                alt: alt.with_epsilon(epsilon)?,
                alpha: alpha.clone(),
            },
            AltSpec::Dependence(a) => AltSpec::Dependence(DependenceAlternative::new(
                a.name(),
                a.base().clone(),
                a.g_fn(),
                epsilon,
            )?),
        })
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    kind: String,
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    q: Option<Value>,
    #[serde(default)]
    h: Option<String>,
    #[serde(default)]
    pair: Option<(Value, Value)>,
    #[serde(default)]
    g: Option<String>,
    #[serde(default)]
    c: Option<f64>,
    #[serde(default)]
    alpha: Option<String>,
    #[serde(default)]
    epsilon: Option<f64>,
    #[serde(default)]
    centre: bool,
}

/// Parses a builtin name, an inline JSON document, or a path to one.
pub fn parse_alt(text: &str) -> Result<AltSpec> {
    let t = text.trim();
    if let Some(spec) = builtin_alt(t)? {
        return Ok(spec);
    }
    if t.starts_with('{') {
        return parse_alt_json(t);
    }
    let path = std::path::Path::new(t);
    if path.is_file() {
        let body = std::fs::read_to_string(path)?;
        return parse_alt_json(&body);
    }
    Err(Error::Parse(format!(
        "unknown alternative {t:?}; expected one of {BUILTIN_ALTERNATIVES:?}, inline JSON, or a file"
    )))
}

/// Builtin alternatives by name.
pub fn builtin_alt(name: &str) -> Result<Option<AltSpec>> {
    let mix = DistributionSpec::uniform_square_mix;
    Ok(Some(match name {
        "example-4-2" | "uniform-vs-square" => AltSpec::Equality {
            alt: EqualityAlternative::uniform_vs_square().renamed(name),
            alpha: None,
        },
        "example-5-2" => {
            let alt = EqualityAlternative::uniform_vs_square().renamed(name);
            AltSpec::Equality {
                alpha: Some(("q[example-5-2]".into(), q_direction(&alt))),
                alt,
            }
        }
        "dependence-product" => AltSpec::Dependence(DependenceAlternative::product(mix(), 1.0, 0.5)?),
        "dependence-antisymmetric" => AltSpec::Dependence(DependenceAlternative::antisymmetric(mix(), 1.0, 0.5)?),
        _ => return Ok(None),
    }))
}

/// Parses a JSON alternative document.
pub fn parse_alt_json(text: &str) -> Result<AltSpec> {
    let raw: RawSpec = serde_json::from_str(text)?;
    match raw.kind.as_str() {
        "equality" => equality_from_raw(raw),
        "dependence" => dependence_from_raw(raw),
        other => Err(Error::Parse(format!("unknown alternative kind {other:?}"))),
    }
}

/// Distribution from a builtin name or an array of CDF coefficients.
pub fn parse_distribution(v: &Value) -> Result<DistributionSpec> {
    match v {
        Value::String(s) => DistributionSpec::builtin(s),
        Value::Array(items) => {
            let coeffs = items
                .iter()
                .map(|c| c.as_f64().ok_or_else(|| Error::Parse(format!("bad coefficient {c}"))))
                .collect::<Result<Vec<_>>>()?;
            DistributionSpec::polynomial(&coeffs)
        }
        other => Err(Error::Parse(format!("bad distribution {other}"))),
    }
}

fn real_fn(expr: &str) -> Result<RealFn> {
    let e = Expr::parse(expr)?;
    if e.uses_y() {
        return Err(Error::Parse(format!("{expr:?} must depend on x only")));
    }
    Ok(Arc::new(move |x| e.eval(x, 0.0)))
}

fn equality_from_raw(raw: RawSpec) -> Result<AltSpec> {
    if raw.g.is_some() || raw.c.is_some() {
        return Err(Error::Parse("`g` and `c` only apply to dependence alternatives".into()));
    }
    let alpha = raw
        .alpha
        .as_deref()
        .map(|a| real_fn(a).map(|f| (a.to_string(), f)))
        .transpose()?;
    let mut alt = if let Some((a1, a2)) = &raw.pair {
        if raw.q.is_some() || raw.h.is_some() {
            return Err(Error::Parse("`pair` excludes `q` and `h`".into()));
        }
        direction_from_pair(&parse_distribution(a1)?, &parse_distribution(a2)?)?
    } else {
        let q = parse_distribution(raw.q.as_ref().unwrap_or(&Value::String("uniform".into())))?;
        let h_text = raw
            .h
            .as_deref()
            .ok_or_else(|| Error::Parse("equality alternative needs `h` or `pair`".into()))?;
        let mut h = match h_text {
            "example-4-2" => EqualityAlternative::uniform_vs_square().h_fn(),
            other => real_fn(other)?,
        };
        if raw.centre {
            let (hc, qc) = (h.clone(), q.clone());
            let mean = simpson(&|x: f64| hc(x) * qc.density(x), 0.0, 1.0, DEFAULT_PANELS)?;
            let inner = h.clone();
            h = Arc::new(move |x| inner(x) - mean);
        }
        EqualityAlternative::new(format!("h = {h_text}"), q, h, 1.0)?
    };
    if let Some(eps) = raw.epsilon {
        alt = alt.with_epsilon(eps)?;
    }
    if let Some(name) = raw.name {
        alt = alt.renamed(name);
    }
    Ok(AltSpec::Equality { alt, alpha })
}

fn dependence_from_raw(raw: RawSpec) -> Result<AltSpec> {
    if raw.h.is_some() || raw.pair.is_some() || raw.alpha.is_some() {
        return Err(Error::Parse(
            "`h`, `pair` and `alpha` only apply to equality alternatives".into(),
        ));
    }
    let q = parse_distribution(raw.q.as_ref().unwrap_or(&Value::String("uniform".into())))?;
    let eps = raw.epsilon.unwrap_or(0.5);
    let c = raw.c.unwrap_or(1.0);
    let g_text = raw
        .g
        .as_deref()
        .ok_or_else(|| Error::Parse("dependence alternative needs `g`".into()))?;
    let alt = match g_text {
        "product" => DependenceAlternative::product(q, c, eps)?,
        "antisymmetric" => DependenceAlternative::antisymmetric(q, c, eps)?,
        expr => {
            let e = Expr::parse(expr)?;
            let g: BiFn = Arc::new(move |x, y| c * e.eval(x, y));
            DependenceAlternative::new(format!("g = {expr}"), q, g, eps)?
        }
    };
    Ok(AltSpec::Dependence(match raw.name {
        Some(name) => DependenceAlternative::new(name, alt.base().clone(), alt.g_fn(), alt.epsilon())?,
        None => alt,
    }))
}
