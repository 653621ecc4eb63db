//! Agreement between predicted scores and subjective ratings.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationMetrics {
    pub plcc: f64,
    pub srcc: f64,
    pub krcc: f64,
    pub rmse: f64,
}

fn check_lengths(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(Error::Input(format!(
            "need two equal-length vectors of at least 2 values, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

pub fn rmse(pred: &[f64], truth: &[f64]) -> f64 {
    let n = pred.len() as f64;
    (pred
        .iter()
        .zip(truth)
        .map(|(p, t)| (p - t).powi(2))
        .sum::<f64>()
        / n)
        .sqrt()
}

/// Pearson correlation; `None` when either input has zero variance.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa <= 0.0 || sbb <= 0.0 {
        return None;
    }
    Some((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

/// 1-based ranks with ties given their average rank.
pub fn average_ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
    let mut ranks = vec![0.0; v.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && v[idx[end]] == v[idx[start]] {
            end += 1;
        }
        let avg = (start + end + 1) as f64 / 2.0;
        for &i in &idx[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    ranks
}

pub fn spearman(a: &[f64], b: &[f64]) -> Option<f64> {
    pearson(&average_ranks(a), &average_ranks(b))
}

/// Kendall's τ-b.
pub fn kendall_tau_b(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len();
    let (mut concordant, mut discordant) = (0i64, 0i64);
    let (mut ties_a, mut ties_b) = (0i64, 0i64);
    for i in 0..n {
        for j in i + 1..n {
            let da = a[i].partial_cmp(&a[j])?;
            let db = b[i].partial_cmp(&b[j])?;
            use std::cmp::Ordering::Equal;
            match (da == Equal, db == Equal) {
                (true, true) => {
                    ties_a += 1;
                    ties_b += 1;
                }
                (true, false) => ties_a += 1,
                (false, true) => ties_b += 1,
                (false, false) if da == db => concordant += 1,
                (false, false) => discordant += 1,
            }
        }
    }
    let pairs = (n * (n - 1) / 2) as i64;
    let denom = (((pairs - ties_a) as f64) * ((pairs - ties_b) as f64)).sqrt();
    if denom == 0.0 {
        return None;
    }
    Some((concordant - discordant) as f64 / denom)
}

/// PLCC, SRCC, KRCC on raw scores (no logistic mapping) and RMSE.
pub fn correlation_metrics(pred: &[f64], mos: &[f64]) -> Result<CorrelationMetrics> {
    check_lengths(pred, mos)?;
    let rmse = rmse(pred, mos);
    let undefined = || Error::UndefinedCorrelation { rmse };
    Ok(CorrelationMetrics {
        plcc: pearson(pred, mos).ok_or_else(undefined)?,
        srcc: spearman(pred, mos).ok_or_else(undefined)?,
        krcc: kendall_tau_b(pred, mos).ok_or_else(undefined)?,
        rmse,
    })
}
