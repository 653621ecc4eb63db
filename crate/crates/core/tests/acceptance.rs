//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::path::Path;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stereo_comfort::features::{
    boundary_disparity_feature, did_feature, disparity_range_from_extremes, jndd_threshold,
    ComfortZone, DidParams, DrParams,
};
use stereo_comfort::imagecore::{DisparityMap, GrayImage, StereoPair};
use stereo_comfort::model::{
    kendall_tau_b, mos_from_ratings, spearman, train_svr_with_report, Kernel, RatingMatrix,
    SvrParams,
};
use stereo_comfort::retarget::{
    find_vertical_seam, retarget, stereo_crop, stereo_scale, target_width_for, EnergyMap, Operator,
    RetargetSpec,
};
use stereo_comfort::synth::SceneSpec;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_time(start: Instant, limit: Duration, what: &str) -> Result<(), String> {
    let t = start.elapsed();
    check(t < limit, || format!("{what} took {t:?}, limit {limit:?}"))
}

fn dr_analytic() -> Outcome {
    let start = Instant::now();
    let zone = ComfortZone::default();
    let p = DrParams::default();
    for (x, y, want) in [
        (-79.55, 79.55, 0.0),
        (-159.1, 159.1, -0.5),
        (-39.775, 39.775, 1.0),
    ] {
        let got = disparity_range_from_extremes(x, y, &zone, &p);
        check((got - want).abs() <= 1e-9, || {
            format!("({x}, {y}) gave {got}, want {want}")
        })?;
    }
    within_time(start, Duration::from_secs(1), "DR cases")?;
    Ok("3 cases within 1e-9".into())
}

fn jndd_table() -> Outcome {
    for (d, want) in [(50.0, 21.0), (100.0, 19.0), (150.0, 18.0), (200.0, 20.0)] {
        let got = jndd_threshold(d);
        check(got == want, || format!("|d|={d} gave {got}, want {want}"))?;
    }
    let mut samples = 0;
    for k in 0..=40_000 {
        let d = k as f64 * 0.01;
        check(jndd_threshold(d) == jndd_threshold(-d), || {
            format!("odd at {d}")
        })?;
        samples += 1;
    }
    Ok(format!(
        "table exact, even on {samples} samples over [0, 400]"
    ))
}

fn bd_toy() -> Outcome {
    // 6 rows x 8 columns; first column averages -3.4, so the left band is 3
    // columns wide and every value in it except the first column is -5.8,
    // giving a band mean of exactly -5.
    let first = [-2.0, -4.0, -3.0, -4.0, -3.0, -4.4];
    let dmap = DisparityMap::from_fn(8, 6, |x, y| match x {
        0 => first[y],
        1 | 2 => -5.8,
        _ => 2.0,
    })
    .map_err(|e| e.to_string())?;
    let view = GrayImage::from_fn(8, 6, |x, y| ((x * 31 + y * 17) % 200) as f64)
        .map_err(|e| e.to_string())?;
    let pair = StereoPair::new(view.clone(), view).map_err(|e| e.to_string())?;
    let bd = boundary_disparity_feature(&pair, &dmap).map_err(|e| e.to_string())?;
    // Independent hand evaluation.
    let col0_mean = first.iter().sum::<f64>() / 6.0;
    let b_l = col0_mean.abs().round() as usize;
    let band: f64 = (0..6)
        .map(|y| first[y] + (1..b_l).map(|_| -5.8).sum::<f64>())
        .sum::<f64>()
        / (6 * b_l) as f64;
    check(b_l == 3 && bd.left_band == 3, || {
        format!("band width {} vs {b_l}", bd.left_band)
    })?;
    check(
        (bd.a_left - band).abs() <= 1e-9 && (bd.a_left + 5.0).abs() <= 1e-9,
        || format!("A_l = {}, want -5", bd.a_left),
    )?;
    check(bd.energy_ratio == 1.0, || {
        format!("D = {}", bd.energy_ratio)
    })?;
    Ok(format!("b_l=3, A_l={:.12}, D=1", bd.a_left))
}

fn did_ramp() -> Outcome {
    let ramp = DisparityMap::from_fn(30, 12, |x, _| x as f64).map_err(|e| e.to_string())?;
    let params = DidParams::new(0.5).map_err(|e| e.to_string())?;
    let got = did_feature(&ramp, &params).map_err(|e| e.to_string())?;
    let want = [1.5f64.sqrt() / 2.0, 0.0];
    check(
        (got[0] - want[0]).abs() <= 1e-9 && (got[1] - want[1]).abs() <= 1e-9,
        || format!("ramp gave {got:?}, want {want:?}"),
    )?;
    let flat = DisparityMap::filled(30, 12, 7.0).map_err(|e| e.to_string())?;
    let z = did_feature(&flat, &params).map_err(|e| e.to_string())?;
    check(z == [0.0, 0.0], || format!("constant map gave {z:?}"))?;
    Ok(format!(
        "ramp [{:.12}, {:.12}], constant [0, 0]",
        got[0], got[1]
    ))
}

/// Exhaustive minimum over all 8-connected vertical seams; ties resolved by
/// the lexicographically smallest column sequence read bottom-up.
fn brute_force_seam(e: &EnergyMap) -> (f64, Vec<usize>) {
    let (w, h) = (e.width, e.height);
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut cols = vec![0usize; h];
    fn rec(
        y: usize,
        e: &EnergyMap,
        cols: &mut Vec<usize>,
        acc: f64,
        best: &mut Option<(f64, Vec<usize>)>,
    ) {
        let (w, h) = (e.width, e.height);
        if y == h {
            let rev: Vec<usize> = cols.iter().rev().copied().collect();
            let better = match best {
                None => true,
                Some((c, r)) => acc < *c || (acc == *c && rev < *r),
            };
            if better {
                *best = Some((acc, rev));
            }
            return;
        }
        let range: Vec<usize> = if y == 0 {
            (0..w).collect()
        } else {
            let p = cols[y - 1];
            (p.saturating_sub(1)..=(p + 1).min(w - 1)).collect()
        };
        for x in range {
            cols[y] = x;
            rec(y + 1, e, cols, acc + e.get(x, y), best);
        }
    }
    let _ = w;
    rec(0, e, &mut cols, 0.0, &mut best);
    let (c, rev) = best.unwrap();
    (c, rev.into_iter().rev().collect())
}

fn seam_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for case in 0..200 {
        let n = if case % 2 == 0 { 5 } else { 6 };
        // Small integer energies make ties common.
        let data: Vec<f64> = (0..n * n).map(|_| rng.random_range(0..6) as f64).collect();
        let e = EnergyMap::new(n, n, data).map_err(|e| e.to_string())?;
        let seam = find_vertical_seam(&e).map_err(|e| e.to_string())?;
        let (cost, cols) = brute_force_seam(&e);
        check(
            seam.cost(&e) == cost && seam.columns() == cols.as_slice(),
            || {
                format!(
                    "case {case}: got {:?} cost {}, oracle {cols:?} cost {cost}",
                    seam.columns(),
                    seam.cost(&e)
                )
            },
        )?;
    }
    within_time(start, Duration::from_secs(5), "seam oracle")?;
    Ok(format!("200 grids exact in {:?}", start.elapsed()))
}

fn retarget_invariants() -> Outcome {
    let e = |e: stereo_comfort::Error| e.to_string();
    for seed in 0..3 {
        let (pair, dmap) = SceneSpec::random(64, 48, seed).render().map_err(e)?;
        let target = target_width_for(64, 0.7).map_err(e)?;
        for op in Operator::ALL {
            let (out, d) = retarget(&pair, &dmap, &RetargetSpec::new(op, target)).map_err(e)?;
            check(
                out.width() == 45 && d.width() == 45 && out.height() == 48,
                || format!("{op} produced width {}", out.width()),
            )?;
        }
        let (_, cropped) = stereo_crop(&pair, &dmap, 45, 9, 9).map_err(e)?;
        for y in 0..48 {
            check(cropped.row(y) == &dmap.row(y)[9..54], || {
                format!("crop changed row {y}")
            })?;
        }
    }

    let full_w = target_width_for(1920, 0.7).map_err(e)?;
    check(full_w == 1344, || format!("1920 -> {full_w}"))?;
    let big = GrayImage::from_fn(1920, 1080, |x, y| ((x * 7 + y * 3) % 251) as f64).map_err(e)?;
    let big_pair = StereoPair::new(big.clone(), big).map_err(e)?;
    let const_d = DisparityMap::filled(1920, 1080, 10.0).map_err(e)?;
    for op in [Operator::Crop, Operator::Scale] {
        let (out, d) = retarget(&big_pair, &const_d, &RetargetSpec::new(op, full_w)).map_err(e)?;
        check(
            out.width() == 1344 && d.width() == 1344 && out.height() == 1080,
            || format!("{op} at full size gave {}x{}", out.width(), out.height()),
        )?;
    }
    let (_, scaled) = stereo_scale(&big_pair, &const_d, 1344).map_err(e)?;
    check(scaled.data().iter().all(|&v| v == 10.0 * 0.7), || {
        "scaled disparity not 7".into()
    })?;
    // Seam-based operators at full width on a short strip.
    let strip = GrayImage::from_fn(1920, 16, |x, y| ((x * 13 + y * 5) % 241) as f64).map_err(e)?;
    let strip_pair = StereoPair::new(strip.clone(), strip).map_err(e)?;
    let strip_d = DisparityMap::from_fn(1920, 16, |x, _| (x % 40) as f64 - 20.0).map_err(e)?;
    for op in [Operator::Seam, Operator::Multi] {
        let (out, d) =
            retarget(&strip_pair, &strip_d, &RetargetSpec::new(op, full_w)).map_err(e)?;
        check(out.width() == 1344 && d.width() == 1344, || {
            format!("{op} gave {}", out.width())
        })?;
    }
    Ok("64->45 for all operators, 1920->1344, crop exact, scale x0.7 exact".into())
}

/// Exact minimum of `½uᵀKu − yᵀu + ε‖u‖₁` s.t. `Σu = 0`, `|u_i| ≤ C`, by
/// enumerating the state of every sample (zero, free positive, free
/// negative, at +C, at −C) and solving each face's KKT system.
fn qp_oracle(k: &DMatrix<f64>, y: &[f64], c: f64, eps: f64) -> f64 {
    let n = y.len();
    let objective = |u: &DVector<f64>| {
        0.5 * (u.transpose() * k * u)[(0, 0)] - u.iter().zip(y).map(|(a, b)| a * b).sum::<f64>()
            + eps * u.iter().map(|v| v.abs()).sum::<f64>()
    };
    let mut best = f64::INFINITY;
    let mut state = vec![0u8; n];
    'outer: loop {
        let free: Vec<usize> = (0..n).filter(|&i| state[i] == 1 || state[i] == 2).collect();
        let mut u = DVector::zeros(n);
        for i in 0..n {
            match state[i] {
                3 => u[i] = c,
                4 => u[i] = -c,
                _ => {}
            }
        }
        let bound_sum: f64 = u.iter().sum();
        let feasible = if free.is_empty() {
            bound_sum.abs() < 1e-12
        } else {
            let f = free.len();
            let mut a = DMatrix::zeros(f + 1, f + 1);
            let mut rhs = DVector::zeros(f + 1);
            for (r, &i) in free.iter().enumerate() {
                for (s, &j) in free.iter().enumerate() {
                    a[(r, s)] = k[(i, j)];
                }
                a[(r, f)] = 1.0;
                a[(f, r)] = 1.0;
                let sign = if state[i] == 1 { 1.0 } else { -1.0 };
                let fixed: f64 = (0..n)
                    .filter(|j| !free.contains(j))
                    .map(|j| k[(i, j)] * u[j])
                    .sum();
                rhs[r] = y[i] - eps * sign - fixed;
            }
            rhs[f] = -bound_sum;
            match a.lu().solve(&rhs) {
                Some(sol) => {
                    let mut ok = true;
                    for (r, &i) in free.iter().enumerate() {
                        let v = sol[r];
                        let sign = if state[i] == 1 { 1.0 } else { -1.0 };
                        if v * sign < -1e-12 || v.abs() > c + 1e-12 {
                            ok = false;
                        }
                        u[i] = v;
                    }
                    ok
                }
                None => false,
            }
        };
        if feasible {
            best = best.min(objective(&u));
        }
        for s in state.iter_mut() {
            *s += 1;
            if *s < 5 {
                continue 'outer;
            }
            *s = 0;
        }
        break;
    }
    best
}

fn zscore(x: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = x.len() as f64;
    let d = x[0].len();
    let mean: Vec<f64> = (0..d)
        .map(|j| x.iter().map(|r| r[j]).sum::<f64>() / n)
        .collect();
    let std: Vec<f64> = (0..d)
        .map(|j| {
            let s = (x.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n).sqrt();
            if s > 1e-12 {
                s
            } else {
                1.0
            }
        })
        .collect();
    x.iter()
        .map(|r| (0..d).map(|j| (r[j] - mean[j]) / std[j]).collect())
        .collect()
}

/// Largest KKT violation of the doubled dual at the coefficients `u`.
fn kkt_violation(k: &DMatrix<f64>, y: &[f64], u: &[f64], c: f64, eps: f64) -> f64 {
    let n = y.len();
    let mut m_up = f64::NEG_INFINITY;
    let mut m_low = f64::INFINITY;
    for i in 0..n {
        let ku: f64 = (0..n).map(|j| k[(i, j)] * u[j]).sum();
        let (a, a_star) = (u[i].max(0.0), (-u[i]).max(0.0));
        // Variable a (label +1): gradient ku + eps - y; value -grad.
        let g = ku + eps - y[i];
        if a < c {
            m_up = m_up.max(-g);
        }
        if a > 0.0 {
            m_low = m_low.min(-g);
        }
        // Variable a* (label -1): gradient -ku + eps + y; value +grad.
        let g_star = -ku + eps + y[i];
        if a_star > 0.0 {
            m_up = m_up.max(g_star);
        }
        if a_star < c {
            m_low = m_low.min(g_star);
        }
    }
    (m_up - m_low).max(0.0)
}

fn svr_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst_obj = 0.0f64;
    let mut worst_kkt = 0.0f64;
    for inst in 0..50 {
        let n = rng.random_range(2..=6usize);
        let dim = rng.random_range(1..=3usize);
        let x: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect())
            .collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(1.0..5.0)).collect();
        let c = [0.5, 1.0, 10.0][inst % 3];
        let eps = [0.05, 0.1, 0.3][inst % 3];
        let gamma = rng.random_range(0.2..2.0);
        let params = SvrParams {
            kernel: Kernel::Rbf,
            c,
            epsilon: eps,
            gamma: Some(gamma),
            tol: 1e-6,
            ..SvrParams::default()
        };
        let (model, report) =
            train_svr_with_report(&x, &y, &params).map_err(|e| format!("instance {inst}: {e}"))?;
        let z = zscore(&x);
        let k = DMatrix::from_fn(n, n, |i, j| {
            (-gamma
                * z[i]
                    .iter()
                    .zip(&z[j])
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>())
            .exp()
        });
        let oracle = qp_oracle(&k, &y, c, eps);
        let diff = (report.dual_objective - oracle).abs();
        worst_obj = worst_obj.max(diff);
        check(diff <= 1e-4, || {
            format!(
                "instance {inst}: objective {} vs oracle {oracle}",
                report.dual_objective
            )
        })?;
        // Map support vectors back to training rows.
        let mut u = vec![0.0; n];
        for (sv, coef) in model.support_vectors.iter().zip(&model.coefficients) {
            let i = (0..n)
                .find(|&i| model.normalize(&x[i]) == *sv)
                .ok_or_else(|| format!("instance {inst}: support vector not found"))?;
            u[i] = *coef;
        }
        let viol = kkt_violation(&k, &y, &u, c, eps);
        worst_kkt = worst_kkt.max(viol);
        check(
            viol <= params.tol + 1e-9 && report.kkt_gap <= params.tol,
            || {
                format!(
                    "instance {inst}: KKT violation {viol:e}, reported {:e}",
                    report.kkt_gap
                )
            },
        )?;
    }
    within_time(start, Duration::from_secs(30), "SVR oracle")?;
    Ok(format!(
        "50 instances, max |Δobj| {worst_obj:.2e}, max KKT {worst_kkt:.2e}"
    ))
}

fn brute_kendall(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len();
    let (mut conc, mut disc, mut ta, mut tb) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for i in 0..n {
        for j in i + 1..n {
            let da = (a[i] - a[j]).signum() * ((a[i] != a[j]) as u8 as f64);
            let db = (b[i] - b[j]).signum() * ((b[i] != b[j]) as u8 as f64);
            if da == 0.0 && db == 0.0 {
                continue;
            } else if da == 0.0 {
                ta += 1.0;
            } else if db == 0.0 {
                tb += 1.0;
            } else if da == db {
                conc += 1.0;
            } else {
                disc += 1.0;
            }
        }
    }
    (conc - disc) / ((conc + disc + ta) * (conc + disc + tb)).sqrt()
}

fn oracle_ranks(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|x| {
            let less = v.iter().filter(|y| *y < x).count() as f64;
            let equal = v.iter().filter(|y| *y == x).count() as f64;
            less + (equal + 1.0) / 2.0
        })
        .collect()
}

fn oracle_pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 1 {
        return vec![vec![0]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

fn correlation_oracle() -> Outcome {
    let base = [1.0, 2.0, 3.0, 4.0, 5.0];
    let perms = permutations(5);
    for p in &perms {
        let b: Vec<f64> = p.iter().map(|&i| base[i]).collect();
        let kt = kendall_tau_b(&base, &b).ok_or("undefined tau")?;
        let sr = spearman(&base, &b).ok_or("undefined rho")?;
        // Without ties tau = (C - D) / 10, rho = 1 - 6Σd²/(n(n²-1)); both rational.
        let s_kt = brute_kendall(&base, &b);
        let d2: f64 = base.iter().zip(&b).map(|(x, y)| (x - y).powi(2)).sum();
        let s_sr = 1.0 - 6.0 * d2 / 120.0;
        check(kt == s_kt && (sr - s_sr).abs() <= 1e-15, || {
            format!("permutation {p:?}: tau {kt} vs {s_kt}, rho {sr} vs {s_sr}")
        })?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for case in 0..100 {
        // Coarse values so ties appear.
        let a: Vec<f64> = (0..10).map(|_| rng.random_range(0..6) as f64).collect();
        let b: Vec<f64> = (0..10).map(|_| rng.random_range(0..6) as f64).collect();
        let (Some(kt), Some(sr)) = (kendall_tau_b(&a, &b), spearman(&a, &b)) else {
            return Err(format!("case {case}: undefined"));
        };
        let okt = brute_kendall(&a, &b);
        let osr = oracle_pearson(&oracle_ranks(&a), &oracle_ranks(&b));
        check(
            (kt - okt).abs() <= 1e-12 && (sr - osr).abs() <= 1e-12,
            || format!("case {case}: tau {kt} vs {okt}, rho {sr} vs {osr}"),
        )?;
    }
    Ok(format!(
        "{} permutations exact, 100 random vectors within 1e-12",
        perms.len()
    ))
}

fn run_cli(args: &[&str]) -> Result<(), String> {
    let argv: Vec<String> = std::iter::once("stereo-comfort")
        .chain(args.iter().copied())
        .map(String::from)
        .collect();
    match stereo_comfort::cli::run(argv) {
        0 => Ok(()),
        code => Err(format!("`{}` exited with {code}", args.join(" "))),
    }
}

fn read_report(path: &Path) -> Result<(f64, f64), String> {
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().ok_or("empty report")?.split(',').collect();
    let row: Vec<&str> = lines.next().ok_or("no report row")?.split(',').collect();
    let col = |name: &str| -> Result<f64, String> {
        let i = header
            .iter()
            .position(|h| *h == name)
            .ok_or(format!("no {name} column"))?;
        row[i].parse().map_err(|_| format!("bad {name}"))
    };
    Ok((col("plcc")?, col("srcc")?))
}

/// synth -> extract -> evaluate in `dir`; returns the produced files.
fn pipeline(dir: &Path, seed: &str) -> Result<Vec<std::path::PathBuf>, String> {
    let src = dir.join("src");
    let out = dir.join("corpus");
    let s = |p: &Path| p.to_str().unwrap().to_string();
    run_cli(&[
        "synth",
        "--generate",
        "40",
        "--width",
        "64",
        "--height",
        "48",
        "--source",
        &s(&src),
        "--out",
        &s(&out),
        "--seed",
        seed,
        "--synthetic-mos",
    ])?;
    let manifest = out.join("manifest.csv");
    let features = dir.join("features.csv");
    let report = dir.join("report.csv");
    run_cli(&[
        "extract",
        "--manifest",
        &s(&manifest),
        "--out",
        &s(&features),
    ])?;
    run_cli(&[
        "evaluate",
        "--manifest",
        &s(&manifest),
        "--table",
        &s(&features),
        "--features",
        "dr,bd,did",
        "--iters",
        "100",
        "--split",
        "0.8",
        "--seed",
        seed,
        "--out",
        &s(&report),
    ])?;
    let mut files = vec![manifest, features, report];
    let mut images: Vec<_> = std::fs::read_dir(&out)
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x != "csv"))
        .collect();
    images.sort();
    files.extend(images);
    Ok(files)
}

fn end_to_end() -> Outcome {
    let start = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let files = pipeline(dir.path(), "0")?;
    let (plcc, srcc) = read_report(&files[2])?;
    let elapsed = start.elapsed();
    check(plcc >= 0.95 && srcc >= 0.95, || {
        format!("PLCC {plcc:.4}, SRCC {srcc:.4}")
    })?;
    within_time(start, Duration::from_secs(120), "end-to-end run")?;
    Ok(format!(
        "160 pairs, PLCC {plcc:.4}, SRCC {srcc:.4} in {elapsed:.1?}"
    ))
}

fn determinism() -> Outcome {
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    let fa = pipeline(a.path(), "7")?;
    let fb = pipeline(b.path(), "7")?;
    check(fa.len() == fb.len(), || "different file counts".into())?;
    for (x, y) in fa.iter().zip(&fb) {
        let bx = std::fs::read(x).map_err(|e| e.to_string())?;
        let by = std::fs::read(y).map_err(|e| e.to_string())?;
        check(x.file_name() == y.file_name() && bx == by, || {
            format!("{} differs", x.file_name().unwrap().to_string_lossy())
        })?;
    }
    Ok(format!("{} files byte-identical", fa.len()))
}

fn screening() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(28);
    let images = 40;
    let truth: Vec<f64> = (0..images).map(|_| rng.random_range(1.5..4.5)).collect();
    let mut subjects = Vec::new();
    let mut ratings = Vec::new();
    for s in 0..28 {
        let anti = s >= 25;
        subjects.push(format!("{}{s:02}", if anti { "x" } else { "s" }));
        ratings.push(
            truth
                .iter()
                .map(|t| {
                    let v = if anti { 6.0 - t } else { *t };
                    (v + rng.random_range(-0.4..0.4)).round().clamp(1.0, 5.0)
                })
                .collect(),
        );
    }
    let m = RatingMatrix::new(subjects, ratings).map_err(|e| e.to_string())?;
    let r = mos_from_ratings(&m, 0.7).map_err(|e| e.to_string())?;
    check(r.retained.len() == 25, || {
        format!("retained {}", r.retained.len())
    })?;
    let mut rejected = r.rejected.clone();
    rejected.sort();
    check(rejected == ["x25", "x26", "x27"], || {
        format!("rejected {rejected:?}")
    })?;
    Ok(format!("retained 25 of 28, rejected {rejected:?}"))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("disparity range analytic cases", dr_analytic),
        ("JNDD table fidelity", jndd_table),
        ("boundary disparity toy map", bd_toy),
        ("DID ramp", did_ramp),
        ("seam-carving oracle", seam_oracle),
        ("retargeting invariants", retarget_invariants),
        ("SVR QP oracle", svr_oracle),
        ("correlation oracle", correlation_oracle),
        ("end-to-end synthetic recovery", end_to_end),
        ("determinism", determinism),
        ("subject screening", screening),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1)
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
