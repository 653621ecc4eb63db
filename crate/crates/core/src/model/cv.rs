//! Repeated random train/test evaluation.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::metrics::{correlation_metrics, CorrelationMetrics};
use super::svr::{train_svr, SvrParams};
use crate::error::{Error, Result};
use crate::features::{FeatureGroup, FeatureSet, FeatureVector};

/// Subjective scores of one stimulus on the 1–5 scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MosLabels {
    pub vc: f64,
    pub iq: Option<f64>,
    pub dq: Option<f64>,
    pub ov: Option<f64>,
}

impl MosLabels {
    pub fn comfort(vc: f64) -> Self {
        Self {
            vc,
            iq: None,
            dq: None,
            ov: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for v in [Some(self.vc), self.iq, self.dq, self.ov]
            .into_iter()
            .flatten()
        {
            if !(1.0..=5.0).contains(&v) {
                return Err(Error::Data(format!("MOS {v} outside [1, 5]")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatedSample {
    pub id: String,
    /// Source scene; retargeted variants of one scene share it.
    pub scene: String,
    pub method: String,
    pub features: FeatureVector,
    pub mos: MosLabels,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvConfig {
    pub iterations: usize,
    pub train_fraction: f64,
    pub seed: u64,
    pub group_by_scene: bool,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self {
            iterations: 100,
            train_fraction: 0.8,
            seed: 0,
            group_by_scene: true,
        }
    }
}

/// Mean and sample standard deviation over iterations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
}

impl Summary {
    fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Self { mean, std }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub label: String,
    pub plcc: Summary,
    pub srcc: Summary,
    pub krcc: Summary,
    pub rmse: Summary,
    pub iterations: usize,
    pub skipped: usize,
    pub train_fraction: f64,
    pub seed: u64,
}

/// Train/test sample indices of one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Group index per sample, groups numbered by first appearance.
fn grouping(samples: &[RatedSample], by_scene: bool) -> Vec<Vec<usize>> {
    if !by_scene {
        return (0..samples.len()).map(|i| vec![i]).collect();
    }
    let mut names: Vec<&str> = Vec::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, s) in samples.iter().enumerate() {
        match names.iter().position(|n| *n == s.scene) {
            Some(g) => groups[g].push(i),
            None => {
                names.push(&s.scene);
                groups.push(vec![i]);
            }
        }
    }
    groups
}

/// Seeded splits for every iteration.
pub fn make_splits(samples: &[RatedSample], config: &CvConfig) -> Result<Vec<Split>> {
    if !(config.train_fraction > 0.0 && config.train_fraction < 1.0) {
        return Err(Error::Parameter(format!(
            "train fraction {} outside (0, 1)",
            config.train_fraction
        )));
    }
    let groups = grouping(samples, config.group_by_scene);
    if groups.len() < 2 {
        return Err(Error::Input("need at least two groups to split".into()));
    }
    let n_train =
        ((groups.len() as f64 * config.train_fraction).round() as usize).clamp(1, groups.len() - 1);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..groups.len()).collect();
    let mut splits = Vec::with_capacity(config.iterations);
    for _ in 0..config.iterations {
        order.shuffle(&mut rng);
        let mut train: Vec<usize> = order[..n_train]
            .iter()
            .flat_map(|&g| groups[g].clone())
            .collect();
        let mut test: Vec<usize> = order[n_train..]
            .iter()
            .flat_map(|&g| groups[g].clone())
            .collect();
        train.sort_unstable();
        test.sort_unstable();
        splits.push(Split { train, test });
    }
    Ok(splits)
}

fn design(samples: &[RatedSample], idx: &[usize], set: &FeatureSet) -> (Vec<Vec<f64>>, Vec<f64>) {
    idx.iter()
        .map(|&i| (samples[i].features.select(set), samples[i].mos.vc))
        .unzip()
}

fn run_split(
    samples: &[RatedSample],
    split: &Split,
    set: &FeatureSet,
    params: &SvrParams,
) -> Option<CorrelationMetrics> {
    if split.train.len() < 2 || split.test.len() < 2 {
        return None;
    }
    let (xtr, ytr) = design(samples, &split.train, set);
    let (xte, yte) = design(samples, &split.test, set);
    let model = train_svr(&xtr, &ytr, params).ok()?;
    let pred = model.predict_many(&xte).ok()?;
    correlation_metrics(&pred, &yte).ok()
}

/// Trains on the training part of each split and scores the held-out part
/// against the visual-comfort MOS. Degenerate iterations are skipped; more
/// than 10% skipped is an error.
pub fn cross_validate(
    samples: &[RatedSample],
    set: &FeatureSet,
    params: &SvrParams,
    config: &CvConfig,
) -> Result<EvalReport> {
    if config.iterations == 0 {
        return Err(Error::Parameter("iterations must be positive".into()));
    }
    for s in samples {
        s.mos.validate()?;
    }
    if set.contains(FeatureGroup::Fiq) && samples.iter().any(|s| s.features.fiq.is_empty()) {
        return Err(Error::Input(
            "FIQ selected but some samples carry no external scores".into(),
        ));
    }
    let dims: Vec<usize> = samples
        .iter()
        .map(|s| s.features.select(set).len())
        .collect();
    if dims.windows(2).any(|w| w[0] != w[1]) {
        return Err(Error::Input(
            "inconsistent feature dimensions across samples".into(),
        ));
    }
    let splits = make_splits(samples, config)?;
    let results: Vec<Option<CorrelationMetrics>> = splits
        .par_iter()
        .map(|s| run_split(samples, s, set, params))
        .collect();
    let ok: Vec<CorrelationMetrics> = results.iter().flatten().copied().collect();
    let skipped = results.len() - ok.len();
    if ok.is_empty() || skipped * 10 > config.iterations {
        return Err(Error::Input(format!(
            "{skipped} of {} cross-validation iterations were degenerate",
            config.iterations
        )));
    }
    let pick =
        |f: fn(&CorrelationMetrics) -> f64| Summary::of(&ok.iter().map(f).collect::<Vec<_>>());
    Ok(EvalReport {
        label: set.label(),
        plcc: pick(|m| m.plcc),
        srcc: pick(|m| m.srcc),
        krcc: pick(|m| m.krcc),
        rmse: pick(|m| m.rmse),
        iterations: ok.len(),
        skipped,
        train_fraction: config.train_fraction,
        seed: config.seed,
    })
}
