//! Serialization helpers: round-trip float formatting with an explicit `inf`
//! sentinel, the `k,x_k` weights file format, and the run manifest.

use std::path::Path;
use std::time::Duration;

use serde_json::{json, Value};

use crate::config::{CliError, Result, RunConfig};

/// Shortest round-trip decimal form; infinities spelled out, never blank.
pub fn fmt_value(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else if v == f64::INFINITY {
        "inf".to_string()
    } else if v == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{v}")
    }
}

/// JSON value for a possibly non-finite float; JSON numbers cannot carry
/// infinities, so those become the same string sentinel as in CSV.
pub fn json_value(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::String(fmt_value(v))
    }
}

/// Loads a `k,x_k` weights file. Rows must cover k = 0..n in order with
/// non-negative entries; the weights are renormalized on load, with a warning
/// (returned as `true`) when the raw sum is off by more than 1e-9.
pub fn load_weights(path: &Path) -> Result<(Vec<f64>, bool)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| CliError::Runtime(format!("cannot open {}: {e}", path.display())))?;
    {
        let headers = reader
            .headers()
            .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
        if headers.len() < 2 || &headers[0] != "k" || &headers[1] != "x_k" {
            return Err(CliError::Runtime(format!(
                "{}: expected header `k,x_k`, found {:?}",
                path.display(),
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
    }
    let mut weights = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2; // header is line 1
        let record =
            record.map_err(|e| CliError::Runtime(format!("{}:{line}: {e}", path.display())))?;
        let k: usize = record
            .get(0)
            .ok_or_else(|| CliError::Runtime(format!("{}:{line}: missing k", path.display())))?
            .trim()
            .parse()
            .map_err(|e| CliError::Runtime(format!("{}:{line}: bad k: {e}", path.display())))?;
        if k != weights.len() {
            return Err(CliError::Runtime(format!(
                "{}:{line}: expected k={}, found k={k}",
                path.display(),
                weights.len()
            )));
        }
        let x: f64 = record
            .get(1)
            .ok_or_else(|| CliError::Runtime(format!("{}:{line}: missing x_k", path.display())))?
            .trim()
            .parse()
            .map_err(|e| CliError::Runtime(format!("{}:{line}: bad x_k: {e}", path.display())))?;
        if !(x >= 0.0) {
            return Err(CliError::Runtime(format!(
                "{}:{line}: x_k must be non-negative, got {x}",
                path.display()
            )));
        }
        weights.push(x);
    }
    if weights.len() < 2 {
        return Err(CliError::Runtime(format!(
            "{}: need rows for k = 0..n with n >= 1",
            path.display()
        )));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(CliError::Runtime(format!(
            "{}: weights sum to zero",
            path.display()
        )));
    }
    let off = (total - 1.0).abs() > 1e-9;
    for w in &mut weights {
        *w /= total;
    }
    Ok((weights, off))
}

pub fn write_weights(path: &Path, weights: &[f64]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
    writer
        .write_record(["k", "x_k"])
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    for (k, &x) in weights.iter().enumerate() {
        writer
            .write_record([k.to_string(), fmt_value(x)])
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    writer.flush().map_err(|e| CliError::Runtime(e.to_string()))
}

/// Run manifest: what was asked, how it was seeded, which tolerances applied,
/// and how the run went.
pub fn write_manifest(
    path: &Path,
    command: &str,
    config: &RunConfig,
    wall_time: Duration,
    warnings: usize,
) -> Result<()> {
    let tol = lossphase::TOL;
    let manifest = json!({
        "command": command,
        "config": config,
        "seed": config.seed(),
        "tolerances": {
            "construction": tol.construction,
            "identity": tol.identity,
            "oracle": tol.oracle,
            "weight_truncation": tol.weight_truncation,
            "readback": 1e-10,
        },
        "wall_time_s": wall_time.as_secs_f64(),
        "warnings": warnings,
    });
    write_json(path, &manifest)
}

pub fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}
