//! Subject screening and mean opinion scores.

use super::metrics::pearson;
use crate::error::{Error, Result};

pub const DEFAULT_REJECTION_THRESHOLD: f64 = 0.7;
pub const MIN_SUBJECTS: usize = 3;

/// Ratings of every subject for every image: `ratings[subject][image]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingMatrix {
    pub subjects: Vec<String>,
    pub ratings: Vec<Vec<f64>>,
}

impl RatingMatrix {
    pub fn new(subjects: Vec<String>, ratings: Vec<Vec<f64>>) -> Result<Self> {
        if subjects.len() != ratings.len() {
            return Err(Error::Input("one rating row per subject required".into()));
        }
        if subjects.len() < MIN_SUBJECTS {
            return Err(Error::Input(format!(
                "need at least {MIN_SUBJECTS} subjects, got {}",
                subjects.len()
            )));
        }
        let n = ratings[0].len();
        if n == 0 || ratings.iter().any(|r| r.len() != n) {
            return Err(Error::Input("every subject must rate every image".into()));
        }
        if let Some(v) = ratings.iter().flatten().find(|v| !(1.0..=5.0).contains(*v)) {
            return Err(Error::Data(format!("rating {v} outside [1, 5]")));
        }
        Ok(Self { subjects, ratings })
    }

    pub fn image_count(&self) -> usize {
        self.ratings[0].len()
    }
}

/// Agreement of one subject with the mean of the others.
#[derive(Debug, Clone, PartialEq)]
pub struct SubjectAgreement {
    pub subject: String,
    /// `None` when either side has zero variance.
    pub plcc: Option<f64>,
}

/// Outcome of screening: MOS per image, rejected subjects in rejection order,
/// and agreement statistics of the retained panel.
#[derive(Debug, Clone, PartialEq)]
pub struct MosReport {
    pub mos: Vec<f64>,
    pub rejected: Vec<String>,
    pub retained: Vec<String>,
    pub agreement: Vec<SubjectAgreement>,
    pub average_plcc: Option<f64>,
    pub min_plcc: Option<f64>,
    pub max_plcc: Option<f64>,
}

fn leave_one_out(ratings: &[&Vec<f64>]) -> Vec<Option<f64>> {
    let n_sub = ratings.len();
    let n_img = ratings[0].len();
    let totals: Vec<f64> = (0..n_img)
        .map(|i| ratings.iter().map(|r| r[i]).sum())
        .collect();
    ratings
        .iter()
        .map(|r| {
            let others: Vec<f64> = (0..n_img)
                .map(|i| (totals[i] - r[i]) / (n_sub - 1) as f64)
                .collect();
            pearson(r, &others)
        })
        .collect()
}

/// Repeatedly rejects the subject least correlated with the rest while that
/// correlation is below `threshold`, keeping at least three subjects.
/// Subjects with undefined correlation are never rejected.
pub fn mos_from_ratings(matrix: &RatingMatrix, threshold: f64) -> Result<MosReport> {
    let mut active: Vec<usize> = (0..matrix.subjects.len()).collect();
    let mut rejected = Vec::new();
    loop {
        let rows: Vec<&Vec<f64>> = active.iter().map(|&s| &matrix.ratings[s]).collect();
        let scores = leave_one_out(&rows);
        if active.len() <= MIN_SUBJECTS {
            return Ok(report(matrix, &active, rejected, &scores));
        }
        let worst = scores
            .iter()
            .enumerate()
            .filter_map(|(k, s)| s.map(|v| (k, v)))
            .fold(None, |best: Option<(usize, f64)>, (k, v)| match best {
                Some((_, bv)) if bv <= v => best,
                _ => Some((k, v)),
            });
        match worst {
            Some((k, v)) if v < threshold => {
                rejected.push(matrix.subjects[active[k]].clone());
                active.remove(k);
            }
            _ => return Ok(report(matrix, &active, rejected, &scores)),
        }
    }
}

fn report(
    matrix: &RatingMatrix,
    active: &[usize],
    rejected: Vec<String>,
    scores: &[Option<f64>],
) -> MosReport {
    let n_img = matrix.image_count();
    let mos = (0..n_img)
        .map(|i| active.iter().map(|&s| matrix.ratings[s][i]).sum::<f64>() / active.len() as f64)
        .collect();
    let agreement: Vec<SubjectAgreement> = active
        .iter()
        .zip(scores)
        .map(|(&s, p)| SubjectAgreement {
            subject: matrix.subjects[s].clone(),
            plcc: *p,
        })
        .collect();
    let defined: Vec<f64> = scores.iter().flatten().copied().collect();
    let (average_plcc, min_plcc, max_plcc) = if defined.is_empty() {
        (None, None, None)
    } else {
        (
            Some(defined.iter().sum::<f64>() / defined.len() as f64),
            defined.iter().copied().reduce(f64::min),
            defined.iter().copied().reduce(f64::max),
        )
    };
    MosReport {
        mos,
        rejected,
        retained: active.iter().map(|&s| matrix.subjects[s].clone()).collect(),
        agreement,
        average_plcc,
        min_plcc,
        max_plcc,
    }
}
