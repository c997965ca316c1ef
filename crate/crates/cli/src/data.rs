//! CSV ingestion of unlabelled pairs.

use std::path::Path;

use crate::error::CliError;

/// Reads two numeric columns per row. A first row that does not parse as
/// numbers is treated as a header.
pub fn read_pairs(path: &Path) -> Result<Vec<(f64, f64)>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    let mut pairs = Vec::new();
    let mut first = true;
    for record in reader.records() {
        let record = record.map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        if record.len() != 2 {
            return Err(CliError::data(format!(
                "{}:{line}: expected 2 columns, found {}",
                path.display(),
                record.len()
            )));
        }
        let parsed: Vec<Option<f64>> = record.iter().map(|f| f.parse::<f64>().ok()).collect();
        match (parsed[0], parsed[1]) {
            (Some(a), Some(b)) => {
                if !a.is_finite() || !b.is_finite() {
                    return Err(CliError::data(format!("{}:{line}: non-finite value", path.display())));
                }
                pairs.push((a, b));
            }
            (None, None) if first => {}
            _ => {
                return Err(CliError::data(format!(
                    "{}:{line}: cannot parse {:?} as two numbers",
                    path.display(),
                    record.iter().collect::<Vec<_>>()
                )))
            }
        }
        first = false;
    }
    if pairs.is_empty() {
        return Err(CliError::data(format!("{}: no data rows", path.display())));
    }
    Ok(pairs)
}

/// Affine map of the pooled range onto [0, 1]; returns the range.
pub fn rescale(pairs: &mut [(f64, f64)]) -> (f64, f64) {
    let (lo, hi) = pairs
        .iter()
        .flat_map(|&(a, b)| [a, b])
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), x| (l.min(x), h.max(x)));
    let width = hi - lo;
    for p in pairs.iter_mut() {
        let f = |x: f64| {
            if width > 0.0 {
                ((x - lo) / width).clamp(0.0, 1.0)
            } else {
                0.5
            }
        };
        *p = (f(p.0), f(p.1));
    }
    (lo, hi)
}
