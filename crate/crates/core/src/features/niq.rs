//! No-reference image-quality statistics from oriented gradients: gradient
//! magnitude (GM), relative gradient magnitude (RM) and relative gradient
//! orientation (RO), each pooled to mean and standard deviation per view.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::imagecore::{GrayImage, StereoPair};

/// Gradient magnitudes below this are treated as flat; their orientation is 0.
pub const FLAT_GRADIENT: f64 = 1e-9;

pub const NIQ_PER_VIEW: usize = 6;

struct Gradients {
    gx: Vec<f64>,
    gy: Vec<f64>,
}

fn sobel(img: &GrayImage) -> Gradients {
    let (w, h) = (img.width(), img.height());
    let mut gx = vec![0.0; w * h];
    let mut gy = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let p = |dx: isize, dy: isize| img.get_clamped(x as isize + dx, y as isize + dy);
            let i = y * w + x;
            gx[i] = (p(1, -1) + 2.0 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2.0 * p(-1, 0) + p(-1, 1));
            gy[i] = (p(-1, 1) + 2.0 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2.0 * p(0, -1) + p(1, -1));
        }
    }
    Gradients { gx, gy }
}

fn local_mean(values: &[f64], w: usize, h: usize) -> Vec<f64> {
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut s = 0.0;
            for dy in -1isize..=1 {
                let yy = (y as isize + dy).clamp(0, h as isize - 1) as usize;
                for dx in -1isize..=1 {
                    let xx = (x as isize + dx).clamp(0, w as isize - 1) as usize;
                    s += values[yy * w + xx];
                }
            }
            out[y * w + x] = s / 9.0;
        }
    }
    out
}

/// Wraps an angle difference into `(-π, π]`.
pub fn wrap_angle(mut a: f64) -> f64 {
    while a <= -PI {
        a += 2.0 * PI;
    }
    while a > PI {
        a -= 2.0 * PI;
    }
    a
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// `[GM mean, GM std, RM mean, RM std, RO mean, RO std]` for one view.
pub fn view_gradient_statistics(img: &GrayImage) -> Result<[f64; NIQ_PER_VIEW]> {
    let (w, h) = (img.width(), img.height());
    if w < 3 || h < 3 {
        return Err(Error::Dimension(format!(
            "quality statistics need at least 3x3 views, got {w}x{h}"
        )));
    }
    let Gradients { gx, gy } = sobel(img);
    let gm: Vec<f64> = gx.iter().zip(&gy).map(|(a, b)| a.hypot(*b)).collect();
    let theta: Vec<f64> = gx
        .iter()
        .zip(&gy)
        .zip(&gm)
        .map(|((a, b), m)| if *m < FLAT_GRADIENT { 0.0 } else { b.atan2(*a) })
        .collect();

    let gm_local = local_mean(&gm, w, h);
    let gx_local = local_mean(&gx, w, h);
    let gy_local = local_mean(&gy, w, h);

    let rm: Vec<f64> = gm.iter().zip(&gm_local).map(|(g, m)| g - m).collect();
    let ro: Vec<f64> = (0..w * h)
        .map(|i| wrap_angle(theta[i] - gy_local[i].atan2(gx_local[i])))
        .collect();

    let (gm_mean, gm_std) = mean_std(&gm);
    let (rm_mean, rm_std) = mean_std(&rm);
    let (ro_mean, ro_std) = mean_std(&ro);
    Ok([gm_mean, gm_std, rm_mean, rm_std, ro_mean, ro_std])
}

/// Left-view statistics followed by right-view statistics.
pub fn niq_features(pair: &StereoPair) -> Result<[f64; 2 * NIQ_PER_VIEW]> {
    let l = view_gradient_statistics(pair.left())?;
    let r = view_gradient_statistics(pair.right())?;
    let mut out = [0.0; 2 * NIQ_PER_VIEW];
    out[..NIQ_PER_VIEW].copy_from_slice(&l);
    out[NIQ_PER_VIEW..].copy_from_slice(&r);
    Ok(out)
}
