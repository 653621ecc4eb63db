//! ε-support vector regression trained by sequential minimal optimization.
//!
//! The dual is solved in the standard doubled form over `β = [α; α*]`:
//!
//! ```text
//! min ½ βᵀQβ + pᵀβ   s.t.  yᵀβ = 0,  0 ≤ β ≤ C
//! ```
//!
//! with `y = [+1; −1]`, `p = [ε − t; ε + t]` for labels `t`, and
//! `Q_st = y_s y_t K(x_s, x_t)`. Each step updates the maximal KKT-violating
//! pair (ties to the lowest index), so training is deterministic.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Dimensions whose training spread falls below this are left unscaled.
pub const STD_FLOOR: f64 = 1e-12;
const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    Rbf,
    Linear,
}

impl Kernel {
    pub fn name(self) -> &'static str {
        match self {
            Kernel::Rbf => "rbf",
            Kernel::Linear => "linear",
        }
    }

    #[inline]
    pub fn eval(self, gamma: f64, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Kernel::Rbf => {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-gamma * d2).exp()
            }
            Kernel::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
        }
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Kernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "rbf" => Ok(Kernel::Rbf),
            "linear" => Ok(Kernel::Linear),
            other => Err(Error::Parse(format!("unknown kernel '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvrParams {
    pub kernel: Kernel,
    pub c: f64,
    pub epsilon: f64,
    /// RBF width; `None` means `1 / feature_dim`.
    pub gamma: Option<f64>,
    /// Stopping threshold on the maximal KKT violation.
    pub tol: f64,
    /// `None` means `10·n²` clamped to `[10⁴, 10⁷]`.
    pub max_iter: Option<usize>,
    pub seed: u64,
}

impl Default for SvrParams {
    fn default() -> Self {
        Self {
            kernel: Kernel::Rbf,
            c: 10.0,
            epsilon: 0.1,
            gamma: None,
            tol: 1e-3,
            max_iter: None,
            seed: 0,
        }
    }
}

impl SvrParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::Parameter(format!(
                "C must be positive, got {}",
                self.c
            )));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Parameter(format!(
                "epsilon must be non-negative, got {}",
                self.epsilon
            )));
        }
        if let Some(g) = self.gamma {
            if !(g > 0.0 && g.is_finite()) {
                return Err(Error::Parameter(format!("gamma must be positive, got {g}")));
            }
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::Parameter("tol must be positive".into()));
        }
        Ok(())
    }

    fn resolved_gamma(&self, dim: usize) -> f64 {
        self.gamma.unwrap_or(1.0 / dim.max(1) as f64)
    }

    fn resolved_max_iter(&self, n: usize) -> usize {
        self.max_iter.unwrap_or_else(|| {
            n.saturating_mul(n)
                .saturating_mul(10)
                .clamp(10_000, 10_000_000)
        })
    }
}

/// A trained regressor, including the z-score statistics of its training set.
#[derive(Debug, Clone, PartialEq)]
pub struct SvrModel {
    pub kernel: Kernel,
    pub c: f64,
    pub epsilon: f64,
    pub gamma: f64,
    pub tol: f64,
    pub norm_mean: Vec<f64>,
    pub norm_std: Vec<f64>,
    /// Normalized training rows with nonzero coefficient.
    pub support_vectors: Vec<Vec<f64>>,
    /// `α_i − α_i*` per support vector.
    pub coefficients: Vec<f64>,
    pub bias: f64,
}

/// Solver diagnostics for one training run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    /// Maximal KKT violation `m(β) − M(β)` at exit.
    pub kkt_gap: f64,
    /// `½ βᵀQβ + pᵀβ` at exit.
    pub dual_objective: f64,
    /// `Σ(α_i − α_i*)` over all samples.
    pub coefficient_sum: f64,
}

impl SvrModel {
    pub fn dim(&self) -> usize {
        self.norm_mean.len()
    }

    pub fn normalize(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.norm_mean)
            .zip(&self.norm_std)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::Input(format!(
                "feature row has {} values, model expects {}",
                x.len(),
                self.dim()
            )));
        }
        let z = self.normalize(x);
        let s: f64 = self
            .support_vectors
            .iter()
            .zip(&self.coefficients)
            .map(|(sv, c)| c * self.kernel.eval(self.gamma, sv, &z))
            .sum();
        Ok(s + self.bias)
    }

    pub fn predict_many(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>> {
        rows.iter().map(|r| self.predict(r)).collect()
    }
}

fn zscore_stats(x: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let n = x.len() as f64;
    let d = x[0].len();
    let mut mean = vec![0.0; d];
    for row in x {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut std = vec![0.0; d];
    for row in x {
        for ((s, v), m) in std.iter_mut().zip(row).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    for s in &mut std {
        *s = (*s / n).sqrt();
        if s.is_nan() || *s <= STD_FLOOR {
            *s = 1.0;
        }
    }
    (mean, std)
}

/// Trains an ε-SVR.
pub fn train_svr(x: &[Vec<f64>], y: &[f64], params: &SvrParams) -> Result<SvrModel> {
    train_svr_with_report(x, y, params).map(|(m, _)| m)
}

pub fn train_svr_with_report(
    x: &[Vec<f64>],
    y: &[f64],
    params: &SvrParams,
) -> Result<(SvrModel, SolveReport)> {
    params.validate()?;
    if x.len() < 2 {
        return Err(Error::Input(format!(
            "need at least 2 samples, got {}",
            x.len()
        )));
    }
    if x.len() != y.len() {
        return Err(Error::Input(format!(
            "{} feature rows but {} labels",
            x.len(),
            y.len()
        )));
    }
    let dim = x[0].len();
    if dim == 0 || x.iter().any(|r| r.len() != dim) {
        return Err(Error::Input(
            "feature rows must share a nonzero dimension".into(),
        ));
    }
    if x.iter().flatten().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::Data("non-finite feature or label".into()));
    }

    let (norm_mean, norm_std) = zscore_stats(x);
    let z: Vec<Vec<f64>> = x
        .iter()
        .map(|r| {
            r.iter()
                .zip(&norm_mean)
                .zip(&norm_std)
                .map(|((v, m), s)| (v - m) / s)
                .collect()
        })
        .collect();
    let gamma = params.resolved_gamma(dim);
    let l = z.len();
    let mut kmat = vec![0.0; l * l];
    for i in 0..l {
        for j in i..l {
            let k = params.kernel.eval(gamma, &z[i], &z[j]);
            kmat[i * l + j] = k;
            kmat[j * l + i] = k;
        }
    }

    let sol = solve_dual(
        &kmat,
        y,
        params.c,
        params.epsilon,
        params.tol,
        params.resolved_max_iter(l),
    )?;

    let mut support_vectors = Vec::new();
    let mut coefficients = Vec::new();
    let mut coefficient_sum = 0.0;
    for (i, zi) in z.iter().enumerate() {
        let c = sol.beta[i] - sol.beta[i + l];
        coefficient_sum += c;
        if c != 0.0 {
            support_vectors.push(zi.clone());
            coefficients.push(c);
        }
    }
    let model = SvrModel {
        kernel: params.kernel,
        c: params.c,
        epsilon: params.epsilon,
        gamma,
        tol: params.tol,
        norm_mean,
        norm_std,
        support_vectors,
        coefficients,
        bias: -sol.rho,
    };
    let report = SolveReport {
        iterations: sol.iterations,
        kkt_gap: sol.gap,
        dual_objective: sol.objective,
        coefficient_sum,
    };
    Ok((model, report))
}

struct DualSolution {
    beta: Vec<f64>,
    rho: f64,
    iterations: usize,
    gap: f64,
    objective: f64,
}

fn solve_dual(
    kmat: &[f64],
    labels: &[f64],
    c: f64,
    eps: f64,
    tol: f64,
    max_iter: usize,
) -> Result<DualSolution> {
    let l = labels.len();
    let n = 2 * l;
    let sign = |t: usize| if t < l { 1.0 } else { -1.0 };
    let src = |t: usize| if t < l { t } else { t - l };
    let q = |s: usize, t: usize| sign(s) * sign(t) * kmat[src(s) * l + src(t)];

    let p: Vec<f64> = (0..n)
        .map(|t| {
            if t < l {
                eps - labels[t]
            } else {
                eps + labels[t - l]
            }
        })
        .collect();
    let mut beta = vec![0.0; n];
    let mut grad = p.clone();

    let in_up = |t: usize, b: f64| if t < l { b < c } else { b > 0.0 };
    let in_low = |t: usize, b: f64| if t < l { b > 0.0 } else { b < c };

    let mut iterations = 0;
    let gap = loop {
        let mut i = usize::MAX;
        let mut gmax = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut gmin = f64::INFINITY;
        for t in 0..n {
            let v = -sign(t) * grad[t];
            if in_up(t, beta[t]) && v > gmax {
                gmax = v;
                i = t;
            }
            if in_low(t, beta[t]) && v < gmin {
                gmin = v;
                j = t;
            }
        }
        let gap = if i == usize::MAX || j == usize::MAX {
            0.0
        } else {
            gmax - gmin
        };
        if gap < tol {
            break gap.max(0.0);
        }
        if iterations >= max_iter {
            return Err(Error::Convergence { iterations, gap });
        }
        iterations += 1;

        let (old_i, old_j) = (beta[i], beta[j]);
        let qii = q(i, i);
        let qjj = q(j, j);
        let qij = q(i, j);
        if sign(i) != sign(j) {
            let mut quad = qii + qjj + 2.0 * qij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = beta[i] - beta[j];
            beta[i] += delta;
            beta[j] += delta;
            if diff > 0.0 {
                if beta[j] < 0.0 {
                    beta[j] = 0.0;
                    beta[i] = diff;
                }
            } else if beta[i] < 0.0 {
                beta[i] = 0.0;
                beta[j] = -diff;
            }
            if diff > 0.0 {
                if beta[i] > c {
                    beta[i] = c;
                    beta[j] = c - diff;
                }
            } else if beta[j] > c {
                beta[j] = c;
                beta[i] = c + diff;
            }
        } else {
            let mut quad = qii + qjj - 2.0 * qij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = beta[i] + beta[j];
            beta[i] -= delta;
            beta[j] += delta;
            if sum > c {
                if beta[i] > c {
                    beta[i] = c;
                    beta[j] = sum - c;
                }
            } else if beta[j] < 0.0 {
                beta[j] = 0.0;
                beta[i] = sum;
            }
            if sum > c {
                if beta[j] > c {
                    beta[j] = c;
                    beta[i] = sum - c;
                }
            } else if beta[i] < 0.0 {
                beta[i] = 0.0;
                beta[j] = sum;
            }
        }
        let (di, dj) = (beta[i] - old_i, beta[j] - old_j);
        for (t, g) in grad.iter_mut().enumerate() {
            *g += q(t, i) * di + q(t, j) * dj;
        }
    };

    // Offset from free variables, or the midpoint of the feasible interval.
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    let mut free_sum = 0.0;
    let mut free = 0usize;
    for t in 0..n {
        let yg = sign(t) * grad[t];
        if beta[t] >= c {
            if sign(t) < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if beta[t] <= 0.0 {
            if sign(t) > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            free_sum += yg;
        }
    }
    let rho = if free > 0 {
        free_sum / free as f64
    } else {
        (ub + lb) / 2.0
    };
    let objective = 0.5 * (0..n).map(|t| beta[t] * (grad[t] + p[t])).sum::<f64>();
    Ok(DualSolution {
        beta,
        rho,
        iterations,
        gap,
        objective,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(v: &[f64]) -> Vec<Vec<f64>> {
        v.iter().map(|&x| vec![x]).collect()
    }

    #[test]
    fn constant_labels_give_constant_model() {
        let x = col(&[0.0, 1.0, 2.0, 3.0]);
        let y = vec![3.0; 4];
        let (m, r) = train_svr_with_report(&x, &y, &SvrParams::default()).unwrap();
        assert!(m.coefficients.is_empty());
        assert!((m.bias - 3.0).abs() < 1e-12);
        assert_eq!(r.iterations, 0);
        for v in [-5.0, 0.5, 10.0] {
            assert!((m.predict(&[v]).unwrap() - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_kernel_recovers_line() {
        let xs = [0.0, 0.25, 0.5, 0.75, 1.0];
        let y: Vec<f64> = xs.iter().map(|x| 2.0 * x + 1.0).collect();
        let params = SvrParams {
            kernel: Kernel::Linear,
            c: 100.0,
            epsilon: 0.01,
            ..Default::default()
        };
        let (m, r) = train_svr_with_report(&col(&xs), &y, &params).unwrap();
        assert!(r.kkt_gap < params.tol);
        for (x, t) in xs.iter().zip(&y) {
            assert!(
                (m.predict(&[*x]).unwrap() - t).abs() <= 0.01 + params.tol,
                "{x}"
            );
        }
    }

    #[test]
    fn rbf_fits_five_points() {
        let xs = [0.0, 0.3, 0.5, 0.8, 1.0];
        let y = [1.0, 2.5, 2.0, 4.0, 3.0];
        let params = SvrParams {
            epsilon: 0.01,
            c: 100.0,
            ..Default::default()
        };
        let (m, r) = train_svr_with_report(&col(&xs), &y, &params).unwrap();
        let mse: f64 = xs
            .iter()
            .zip(&y)
            .map(|(x, t)| (m.predict(&[*x]).unwrap() - t).powi(2))
            .sum::<f64>()
            / 5.0;
        assert!(mse.sqrt() <= 0.02, "rmse {}", mse.sqrt());
        assert!(r.coefficient_sum.abs() < params.tol);
        assert!(m.coefficients.iter().all(|c| c.abs() <= params.c + 1e-12));
    }

    #[test]
    fn input_validation() {
        let p = SvrParams::default();
        assert!(matches!(
            train_svr(&col(&[1.0]), &[1.0], &p),
            Err(Error::Input(_))
        ));
        assert!(train_svr(&col(&[1.0, 2.0]), &[1.0], &p).is_err());
        assert!(train_svr(&[vec![1.0], vec![1.0, 2.0]], &[1.0, 2.0], &p).is_err());
        let bad = SvrParams {
            c: 0.0,
            ..Default::default()
        };
        assert!(matches!(
            train_svr(&col(&[1.0, 2.0]), &[1.0, 2.0], &bad),
            Err(Error::Parameter(_))
        ));
        let m = train_svr(&col(&[1.0, 2.0]), &[1.0, 2.0], &p).unwrap();
        assert!(matches!(m.predict(&[1.0, 2.0]), Err(Error::Input(_))));
    }

    #[test]
    fn iteration_cap_reports_convergence_error() {
        let xs = [0.0, 0.3, 0.5, 0.8, 1.0];
        let y = [1.0, 2.5, 2.0, 4.0, 3.0];
        let params = SvrParams {
            epsilon: 0.0,
            c: 1000.0,
            tol: 1e-12,
            max_iter: Some(2),
            ..Default::default()
        };
        let err = train_svr(&col(&xs), &y, &params).unwrap_err();
        assert!(matches!(err, Error::Convergence { iterations: 2, .. }));
        assert!(!err.is_input_error());
    }

    #[test]
    fn constant_feature_column_is_harmless() {
        let x: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64, 5.0]).collect();
        let y: Vec<f64> = (0..6).map(|i| i as f64 * 0.5).collect();
        let m = train_svr(&x, &y, &SvrParams::default()).unwrap();
        assert_eq!(m.norm_std[1], 1.0);
        assert!(m.predict(&[2.0, 6.0]).unwrap().is_finite());
    }
}
