//! Cropping, scaling and the block-wise multi-operator.

use super::seam::{carve, gradient_energy};
use super::Operator;
use crate::error::{Error, Result};
use crate::imagecore::{DisparityMap, GrayImage, StereoPair};

fn check_pair(pair: &StereoPair, dmap: &DisparityMap) -> Result<()> {
    if !dmap.same_shape(pair.left()) {
        return Err(Error::Dimension(format!(
            "disparity map {}x{} does not match views {}x{}",
            dmap.width(),
            dmap.height(),
            pair.width(),
            pair.height()
        )));
    }
    Ok(())
}

fn columns(data: &[f64], width: usize, height: usize, start: usize, len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len * height);
    for y in 0..height {
        out.extend_from_slice(&data[y * width + start..y * width + start + len]);
    }
    out
}

fn slice_gray(img: &GrayImage, start: usize, len: usize) -> GrayImage {
    GrayImage::from_raw_unchecked(
        len,
        img.height(),
        columns(img.data(), img.width(), img.height(), start, len),
    )
}

fn slice_disp(d: &DisparityMap, start: usize, len: usize) -> DisparityMap {
    DisparityMap::from_raw_unchecked(
        len,
        d.height(),
        columns(d.data(), d.width(), d.height(), start, len),
    )
}

/// Keeps columns `[o_l, o_l + W)` of the left view and `[o_r, o_r + W)` of the
/// right view. Disparities shift by `o_r - o_l`.
pub fn stereo_crop(
    pair: &StereoPair,
    dmap: &DisparityMap,
    target_width: usize,
    offset_left: usize,
    offset_right: usize,
) -> Result<(StereoPair, DisparityMap)> {
    check_pair(pair, dmap)?;
    let w = pair.width();
    if target_width == 0 || offset_left + target_width > w || offset_right + target_width > w {
        return Err(Error::Parameter(format!(
            "crop of width {target_width} at offsets ({offset_left}, {offset_right}) does not fit {w} columns"
        )));
    }
    let shift = offset_right as f64 - offset_left as f64;
    let left = slice_gray(pair.left(), offset_left, target_width);
    let right = slice_gray(pair.right(), offset_right, target_width);
    let mut disp = slice_disp(dmap, offset_left, target_width);
    if shift != 0.0 {
        let data = disp.into_data().into_iter().map(|d| d + shift).collect();
        disp = DisparityMap::from_raw_unchecked(target_width, pair.height(), data);
    }
    Ok((StereoPair::new(left, right)?, disp))
}

/// Linear resampling of one row onto `new_w` samples, pixel centers aligned.
fn resample_row(row: &[f64], new_w: usize, out: &mut Vec<f64>) {
    let w = row.len();
    let step = w as f64 / new_w as f64;
    for x in 0..new_w {
        let src = ((x as f64 + 0.5) * step - 0.5).clamp(0.0, (w - 1) as f64);
        let x0 = src.floor() as usize;
        let t = src - x0 as f64;
        let a = row[x0];
        let b = row[(x0 + 1).min(w - 1)];
        out.push(a + t * (b - a));
    }
}

fn resample(data: &[f64], width: usize, height: usize, new_w: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(new_w * height);
    for y in 0..height {
        resample_row(&data[y * width..(y + 1) * width], new_w, &mut out);
    }
    out
}

/// Horizontal bilinear rescale of both views; disparities are resampled and
/// multiplied by `s = target_width / width`.
pub fn stereo_scale(
    pair: &StereoPair,
    dmap: &DisparityMap,
    target_width: usize,
) -> Result<(StereoPair, DisparityMap)> {
    check_pair(pair, dmap)?;
    let (w, h) = (pair.width(), pair.height());
    if target_width == 0 || target_width > w {
        return Err(Error::Parameter(format!(
            "scale target {target_width} outside (0, {w}]"
        )));
    }
    let s = target_width as f64 / w as f64;
    let view = |img: &GrayImage| {
        let data = resample(img.data(), w, h, target_width)
            .into_iter()
            .map(|v| v.clamp(0.0, 255.0))
            .collect();
        GrayImage::from_raw_unchecked(target_width, h, data)
    };
    let disp = resample(dmap.data(), w, h, target_width)
        .into_iter()
        .map(|d| d * s)
        .collect();
    Ok((
        StereoPair::new(view(pair.left()), view(pair.right()))?,
        DisparityMap::from_raw_unchecked(target_width, h, disp),
    ))
}

/// Output of [`stereo_multi_operator`], with the operator chosen per block.
#[derive(Debug, Clone)]
pub struct MultiOperatorResult {
    pub pair: StereoPair,
    pub disparity: DisparityMap,
    pub choices: Vec<Operator>,
}

/// Target width of each block; cumulative rounding makes the widths add up
/// to `target_width` exactly.
fn block_targets(
    width: usize,
    target_width: usize,
    block_width: usize,
) -> Vec<(usize, usize, usize)> {
    let round_div = |num: usize, den: usize| (2 * num + den) / (2 * den);
    let mut out = Vec::new();
    let mut start = 0;
    while start < width {
        let end = (start + block_width).min(width);
        let t = round_div(end * target_width, width) - round_div(start * target_width, width);
        out.push((start, end - start, t));
        start = end;
    }
    out
}

fn hconcat(parts: &[Vec<f64>], widths: &[usize], height: usize) -> Vec<f64> {
    let total: usize = widths.iter().sum();
    let mut out = Vec::with_capacity(total * height);
    for y in 0..height {
        for (p, &w) in parts.iter().zip(widths) {
            out.extend_from_slice(&p[y * w..(y + 1) * w]);
        }
    }
    out
}

/// Chooses crop, seam carving or scaling independently for each block of
/// `block_width` columns, by least removed gradient energy.
///
/// Costs: crop sums the energy of the cut columns; seam sums the energy of the
/// removed seams; scale charges `(1 - s)` times the block energy. Ties resolve
/// crop, then seam, then scale.
pub fn stereo_multi_operator(
    pair: &StereoPair,
    dmap: &DisparityMap,
    target_width: usize,
    block_width: usize,
    seam_gamma: f64,
) -> Result<MultiOperatorResult> {
    check_pair(pair, dmap)?;
    if block_width < 3 {
        return Err(Error::Parameter(format!(
            "block width {block_width} must be at least 3"
        )));
    }
    let (w, h) = (pair.width(), pair.height());
    if target_width == 0 || target_width > w {
        return Err(Error::Parameter(format!(
            "target width {target_width} outside (0, {w}]"
        )));
    }
    let el = gradient_energy(pair.left())?;
    let er = gradient_energy(pair.right())?;
    let col_energy: Vec<f64> = (0..w)
        .map(|x| el.column_sum(x) + er.column_sum(x))
        .collect();

    let mut lefts = Vec::new();
    let mut rights = Vec::new();
    let mut disps = Vec::new();
    let mut widths = Vec::new();
    let mut choices = Vec::new();

    for (start, wb, tb) in block_targets(w, target_width, block_width) {
        let bl = slice_gray(pair.left(), start, wb);
        let br = slice_gray(pair.right(), start, wb);
        let bd = slice_disp(dmap, start, wb);
        let k = wb - tb;

        let cut_left = k / 2;
        let crop_cost: f64 = col_energy[start..start + cut_left].iter().sum::<f64>()
            + col_energy[start + cut_left + tb..start + wb]
                .iter()
                .sum::<f64>();

        let block_pair = StereoPair::new(bl, br)?;
        let carved = if k == 0 || k + 2 < wb {
            Some(carve(&block_pair, &bd, k, seam_gamma)?)
        } else {
            None
        };
        let seam_cost = carved.as_ref().map_or(f64::INFINITY, |c| c.removed_energy);

        let scale_cost = if tb > 0 {
            let s = tb as f64 / wb as f64;
            (1.0 - s) * col_energy[start..start + wb].iter().sum::<f64>()
        } else {
            f64::INFINITY
        };

        let choice = if crop_cost <= seam_cost && crop_cost <= scale_cost {
            Operator::Crop
        } else if seam_cost <= scale_cost {
            Operator::Seam
        } else {
            Operator::Scale
        };

        let (op, od) = match choice {
            Operator::Crop => {
                if tb == 0 {
                    choices.push(choice);
                    continue;
                }
                stereo_crop(&block_pair, &bd, tb, cut_left, cut_left)?
            }
            Operator::Seam => {
                let c = carved.expect("seam chosen only when feasible");
                (c.pair, c.disparity)
            }
            _ => stereo_scale(&block_pair, &bd, tb)?,
        };
        let (l, r) = op.into_views();
        lefts.push(l.into_data());
        rights.push(r.into_data());
        disps.push(od.into_data());
        widths.push(tb);
        choices.push(choice);
    }

    let out_w: usize = widths.iter().sum();
    let left = GrayImage::from_raw_unchecked(out_w, h, hconcat(&lefts, &widths, h));
    let right = GrayImage::from_raw_unchecked(out_w, h, hconcat(&rights, &widths, h));
    let disparity = DisparityMap::from_raw_unchecked(out_w, h, hconcat(&disps, &widths, h));
    let mut pair = StereoPair::new(left, right)?;
    let mut disparity = disparity;
    if out_w > target_width {
        let off = (out_w - target_width) / 2;
        (pair, disparity) = stereo_crop(&pair, &disparity, target_width, off, off)?;
    }
    debug_assert_eq!(pair.width(), target_width);
    Ok(MultiOperatorResult {
        pair,
        disparity,
        choices,
    })
}
