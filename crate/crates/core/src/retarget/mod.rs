//! Stereoscopic retargeting operators. All of them shrink only the column
//! direction and keep both views and the disparity map the same size.

mod ops;
mod seam;

pub use ops::{stereo_crop, stereo_multi_operator, stereo_scale, MultiOperatorResult};
pub use seam::{
    carve, find_vertical_seam, gradient_energy, matched_column, stereo_seam_carve,
    stereo_seam_energy, Carved, EnergyMap, Seam,
};

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::imagecore::{DisparityMap, StereoPair};

/// Shrink ratio used for corpus synthesis (1920 → 1344 columns).
pub const DEFAULT_RATIO: f64 = 0.7;
pub const DEFAULT_BLOCK_WIDTH: usize = 36;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Operator {
    Crop,
    Scale,
    Seam,
    Multi,
}

impl Operator {
    pub const ALL: [Operator; 4] = [
        Operator::Crop,
        Operator::Scale,
        Operator::Seam,
        Operator::Multi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Operator::Crop => "crop",
            Operator::Scale => "scale",
            Operator::Seam => "seam",
            Operator::Multi => "multi",
        }
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Operator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "crop" => Ok(Operator::Crop),
            "scale" => Ok(Operator::Scale),
            "seam" => Ok(Operator::Seam),
            "multi" => Ok(Operator::Multi),
            other => Err(Error::Input(format!(
                "unknown retargeting operator '{other}'"
            ))),
        }
    }
}

/// Width in columns after shrinking by `ratio`.
pub fn target_width_for(width: usize, ratio: f64) -> Result<usize> {
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(Error::Parameter(format!("ratio {ratio} outside (0, 1]")));
    }
    Ok(((width as f64 * ratio).round() as usize).max(1))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RetargetSpec {
    pub target_width: usize,
    pub operator: Operator,
    /// `(o_l, o_r)` for cropping; centered equal offsets when absent.
    pub crop_offsets: Option<(usize, usize)>,
    pub seam_gamma: f64,
    pub block_width: usize,
}

impl RetargetSpec {
    pub fn new(operator: Operator, target_width: usize) -> Self {
        Self {
            target_width,
            operator,
            crop_offsets: None,
            seam_gamma: 1.0,
            block_width: DEFAULT_BLOCK_WIDTH,
        }
    }
}

/// Applies one operator.
pub fn retarget(
    pair: &StereoPair,
    dmap: &DisparityMap,
    spec: &RetargetSpec,
) -> Result<(StereoPair, DisparityMap)> {
    let w = pair.width();
    if spec.target_width == 0 || spec.target_width > w {
        return Err(Error::Parameter(format!(
            "target width {} outside (0, {w}]",
            spec.target_width
        )));
    }
    match spec.operator {
        Operator::Crop => {
            let (ol, or) = spec.crop_offsets.unwrap_or_else(|| {
                let o = (w - spec.target_width) / 2;
                (o, o)
            });
            stereo_crop(pair, dmap, spec.target_width, ol, or)
        }
        Operator::Scale => stereo_scale(pair, dmap, spec.target_width),
        Operator::Seam => stereo_seam_carve(pair, dmap, w - spec.target_width, spec.seam_gamma),
        Operator::Multi => stereo_multi_operator(
            pair,
            dmap,
            spec.target_width,
            spec.block_width,
            spec.seam_gamma,
        )
        .map(|r| (r.pair, r.disparity)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imagecore::GrayImage;

    #[test]
    fn paper_resolution_target() {
        assert_eq!(target_width_for(1920, DEFAULT_RATIO).unwrap(), 1344);
        assert_eq!(target_width_for(64, DEFAULT_RATIO).unwrap(), 45);
        assert!(target_width_for(64, 0.0).is_err());
    }

    #[test]
    fn every_operator_hits_target() {
        let l = GrayImage::from_fn(64, 12, |x, y| ((x * 29 + y * 11) % 240) as f64).unwrap();
        let r = GrayImage::from_fn(64, 12, |x, y| ((x * 29 + 58 + y * 11) % 240) as f64).unwrap();
        let d = DisparityMap::filled(64, 12, -2.0).unwrap();
        let pair = StereoPair::new(l, r).unwrap();
        for op in Operator::ALL {
            let (p, dm) = retarget(&pair, &d, &RetargetSpec::new(op, 45)).unwrap();
            assert_eq!(
                (p.width(), p.right().width(), dm.width()),
                (45, 45, 45),
                "{op}"
            );
            assert_eq!(op.name().parse::<Operator>().unwrap(), op);
        }
    }
}
