//! Seam energies, minimal vertical seams and disparity-matched stereo seam
//! carving.

use crate::error::{Error, Result};
use crate::imagecore::{DisparityMap, GrayImage, StereoPair};

/// Per-pixel energy raster.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyMap {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl EnergyMap {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || data.len() != width * height {
            return Err(Error::Dimension(format!(
                "{} energies do not fill a {width}x{height} grid",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn total(&self) -> f64 {
        self.data.iter().sum()
    }

    /// Energy summed over column `x`.
    pub fn column_sum(&self, x: usize) -> f64 {
        (0..self.height).map(|y| self.get(x, y)).sum()
    }
}

/// A top-to-bottom path, one column index per row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Seam(pub Vec<usize>);

impl Seam {
    pub fn columns(&self) -> &[usize] {
        &self.0
    }

    pub fn is_connected(&self) -> bool {
        self.0.windows(2).all(|w| w[0].abs_diff(w[1]) <= 1)
    }

    pub fn cost(&self, energy: &EnergyMap) -> f64 {
        self.0
            .iter()
            .enumerate()
            .map(|(y, &x)| energy.get(x, y))
            .sum()
    }
}

fn forward_abs_differences(
    width: usize,
    height: usize,
    v: impl Fn(usize, usize) -> f64,
) -> (Vec<f64>, Vec<f64>) {
    let mut dx = vec![0.0; width * height];
    let mut dy = vec![0.0; width * height];
    for y in 0..height {
        for x in 0..width {
            // the last column/row reuses its neighbor's difference
            let xa = if x + 1 < width {
                x
            } else {
                x.saturating_sub(1)
            };
            let ya = if y + 1 < height {
                y
            } else {
                y.saturating_sub(1)
            };
            if width > 1 {
                dx[y * width + x] = (v(xa + 1, y) - v(xa, y)).abs();
            }
            if height > 1 {
                dy[y * width + x] = (v(x, ya + 1) - v(x, ya)).abs();
            }
        }
    }
    (dx, dy)
}

/// `e = |∂x v| + |∂y v|` with forward differences; the last column and row
/// replicate the differences of their neighbors.
pub fn gradient_energy(img: &GrayImage) -> Result<EnergyMap> {
    let (w, h) = (img.width(), img.height());
    if w < 2 || h < 2 {
        return Err(Error::Dimension(format!(
            "gradient energy needs at least 2x2 pixels, got {w}x{h}"
        )));
    }
    let (dx, dy) = forward_abs_differences(w, h, |x, y| img.get(x, y));
    let data = dx.iter().zip(&dy).map(|(a, b)| a + b).collect();
    Ok(EnergyMap {
        width: w,
        height: h,
        data,
    })
}

/// `|∂x d|` with the same forward-difference convention.
fn disparity_edge_energy(dmap: &DisparityMap) -> Vec<f64> {
    forward_abs_differences(dmap.width(), dmap.height(), |x, y| dmap.get(x, y)).0
}

/// Minimal-energy 8-connected vertical seam. Ties go to the leftmost column,
/// both when picking the bottom end and when stepping to the previous row.
pub fn find_vertical_seam(energy: &EnergyMap) -> Result<Seam> {
    let (w, h) = (energy.width, energy.height);
    if w < 3 {
        return Err(Error::Dimension(format!(
            "seam search needs at least 3 columns, got {w}"
        )));
    }
    let mut acc = energy.data.clone();
    for y in 1..h {
        for x in 0..w {
            let prev = &acc[(y - 1) * w..y * w];
            let lo = x.saturating_sub(1);
            let hi = (x + 1).min(w - 1);
            let best = prev[lo..=hi].iter().copied().fold(f64::INFINITY, f64::min);
            acc[y * w + x] += best;
        }
    }
    let mut cols = vec![0usize; h];
    cols[h - 1] = argmin_leftmost(&acc[(h - 1) * w..h * w], 0);
    for y in (0..h - 1).rev() {
        let x = cols[y + 1];
        let lo = x.saturating_sub(1);
        let hi = (x + 1).min(w - 1);
        cols[y] = argmin_leftmost(&acc[y * w + lo..=y * w + hi], lo);
    }
    Ok(Seam(cols))
}

fn argmin_leftmost(values: &[f64], offset: usize) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v < values[best] {
            best = i;
        }
    }
    offset + best
}

fn remove_per_row(data: &[f64], width: usize, cols: &[usize]) -> Vec<f64> {
    let mut out = Vec::with_capacity(data.len() - cols.len());
    for (y, &c) in cols.iter().enumerate() {
        let row = &data[y * width..(y + 1) * width];
        out.extend_from_slice(&row[..c]);
        out.extend_from_slice(&row[c + 1..]);
    }
    out
}

/// Combined seam energy on the left grid: left gradient energy, right
/// gradient energy at the matched column, and `gamma · |∂x d|`.
pub fn stereo_seam_energy(
    left: &GrayImage,
    right: &GrayImage,
    dmap: &DisparityMap,
    gamma: f64,
) -> Result<EnergyMap> {
    let (w, h) = (left.width(), left.height());
    let el = gradient_energy(left)?;
    let er = gradient_energy(right)?;
    let ed = disparity_edge_energy(dmap);
    let mut data = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let xr = matched_column(x, dmap.get(x, y), w);
            data.push(el.get(x, y) + er.get(xr, y) + gamma * ed[y * w + x]);
        }
    }
    Ok(EnergyMap {
        width: w,
        height: h,
        data,
    })
}

/// Right-view column of left column `x`: `clamp(round(x - d), 0, w - 1)`.
#[inline]
pub fn matched_column(x: usize, d: f64, width: usize) -> usize {
    (x as f64 - d).round().clamp(0.0, (width - 1) as f64) as usize
}

/// Result of carving: the retargeted pair, its disparity map and the summed
/// energy of the removed seams.
#[derive(Debug, Clone)]
pub struct Carved {
    pub pair: StereoPair,
    pub disparity: DisparityMap,
    pub removed_energy: f64,
}

/// Removes `k` seams from both views and the disparity map. Each seam is found
/// on the left view and mapped to the right view through the disparity map.
pub fn stereo_seam_carve(
    pair: &StereoPair,
    dmap: &DisparityMap,
    k: usize,
    gamma: f64,
) -> Result<(StereoPair, DisparityMap)> {
    carve(pair, dmap, k, gamma).map(|c| (c.pair, c.disparity))
}

pub fn carve(pair: &StereoPair, dmap: &DisparityMap, k: usize, gamma: f64) -> Result<Carved> {
    if !dmap.same_shape(pair.left()) {
        return Err(Error::Dimension(
            "disparity map does not match views".into(),
        ));
    }
    let width = pair.width();
    let h = pair.height();
    if k > 0 && k + 2 >= width {
        return Err(Error::Parameter(format!(
            "cannot remove {k} seams from a {width}-column image"
        )));
    }
    let mut left = pair.left().clone();
    let mut right = pair.right().clone();
    let mut disp = dmap.clone();
    let mut removed_energy = 0.0;

    for _ in 0..k {
        let w = left.width();
        let energy = stereo_seam_energy(&left, &right, &disp, gamma)?;
        let seam = find_vertical_seam(&energy)?;
        removed_energy += seam.cost(&energy);
        let right_cols: Vec<usize> = seam
            .columns()
            .iter()
            .enumerate()
            .map(|(y, &x)| matched_column(x, disp.get(x, y), w))
            .collect();
        left =
            GrayImage::from_raw_unchecked(w - 1, h, remove_per_row(left.data(), w, seam.columns()));
        right =
            GrayImage::from_raw_unchecked(w - 1, h, remove_per_row(right.data(), w, &right_cols));
        disp = DisparityMap::from_raw_unchecked(
            w - 1,
            h,
            remove_per_row(disp.data(), w, seam.columns()),
        );
    }
    Ok(Carved {
        pair: StereoPair::new(left, right)?,
        disparity: disp,
        removed_energy,
    })
}
