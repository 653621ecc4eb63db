//! Line-oriented model files.
//!
//! ```text
//! VCASIR-MODEL v1
//! <kernel>
//! <C> <epsilon> <gamma> <tol>
//! <dim>
//! <norm_mean ...>
//! <norm_std ...>
//! <bias>
//! <support vector count>
//! <coefficient> <f1> ... <fd>      (one line per support vector)
//! ```
//!
//! Numbers use 17 significant digits, so a reloaded model predicts
//! bit-identically.

use std::fmt::Write as _;
use std::path::Path;

use super::svr::SvrModel;
use crate::error::{Error, Result};

pub const MODEL_HEADER: &str = "VCASIR-MODEL v1";

/// Formats a value with 17 significant digits.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| fmt17(*v))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn model_to_string(model: &SvrModel) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{MODEL_HEADER}");
    let _ = writeln!(s, "{}", model.kernel);
    let _ = writeln!(
        s,
        "{}",
        join(&[model.c, model.epsilon, model.gamma, model.tol])
    );
    let _ = writeln!(s, "{}", model.dim());
    let _ = writeln!(s, "{}", join(&model.norm_mean));
    let _ = writeln!(s, "{}", join(&model.norm_std));
    let _ = writeln!(s, "{}", fmt17(model.bias));
    let _ = writeln!(s, "{}", model.support_vectors.len());
    for (sv, c) in model.support_vectors.iter().zip(&model.coefficients) {
        let mut row = vec![*c];
        row.extend_from_slice(sv);
        let _ = writeln!(s, "{}", join(&row));
    }
    s
}

fn parse_floats(line: &str, expect: usize, what: &str) -> Result<Vec<f64>> {
    let values = line
        .split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad number '{t}' in {what}")))
        })
        .collect::<Result<Vec<_>>>()?;
    if values.len() != expect {
        return Err(Error::Parse(format!(
            "{what}: expected {expect} values, found {}",
            values.len()
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Parse(format!("{what}: non-finite value")));
    }
    Ok(values)
}

pub fn model_from_str(text: &str) -> Result<SvrModel> {
    let mut lines = text.split('\n');
    let mut next = |what: &str| {
        lines
            .next()
            .ok_or_else(|| Error::Parse(format!("missing {what}")))
    };
    let header = next("header")?;
    if header != MODEL_HEADER {
        return Err(Error::Format(format!(
            "unsupported model header '{header}', expected '{MODEL_HEADER}'"
        )));
    }
    let kernel = next("kernel")?.parse()?;
    let hp = parse_floats(next("hyperparameters")?, 4, "hyperparameters")?;
    let dim: usize = next("dimension")?
        .trim()
        .parse()
        .map_err(|_| Error::Parse("bad feature dimension".into()))?;
    let norm_mean = parse_floats(next("norm_mean")?, dim, "norm_mean")?;
    let norm_std = parse_floats(next("norm_std")?, dim, "norm_std")?;
    if norm_std.iter().any(|s| *s <= 0.0) {
        return Err(Error::Parse("norm_std must be positive".into()));
    }
    let bias = parse_floats(next("bias")?, 1, "bias")?[0];
    let count: usize = next("support vector count")?
        .trim()
        .parse()
        .map_err(|_| Error::Parse("bad support vector count".into()))?;
    let mut support_vectors = Vec::with_capacity(count);
    let mut coefficients = Vec::with_capacity(count);
    for k in 0..count {
        let line = next("support vector")
            .map_err(|_| Error::Parse(format!("expected {count} support vectors, found {k}")))?;
        if line.is_empty() {
            return Err(Error::Parse(format!(
                "expected {count} support vectors, found {k}"
            )));
        }
        let row = parse_floats(line, dim + 1, "support vector")?;
        coefficients.push(row[0]);
        support_vectors.push(row[1..].to_vec());
    }
    if lines.any(|l| !l.trim().is_empty()) {
        return Err(Error::Parse(format!(
            "more support vector rows than the declared {count}"
        )));
    }
    Ok(SvrModel {
        kernel,
        c: hp[0],
        epsilon: hp[1],
        gamma: hp[2],
        tol: hp[3],
        norm_mean,
        norm_std,
        support_vectors,
        coefficients,
        bias,
    })
}

pub fn serialize_model(model: &SvrModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, model_to_string(model)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<SvrModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    model_from_str(&text)
}
