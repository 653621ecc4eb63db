//! Synthetic layered stereo scenes and the synthetic comfort label.
//!
//! A scene is a textured background plane whose disparity ramps from
//! `0.6·b` at the left edge to `b` at the right edge, with two textured
//! rectangles (a third and a quarter of the frame in each direction) at
//! randomly drawn positions in front, at disparities `−a` and `−a·t`. Both views are rendered
//! from the same per-layer textures, so the ground-truth disparity map is
//! exact for every visible left-view pixel.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::features::{disparity_range_feature, ComfortZone, DrParams};
use crate::imagecore::{DisparityMap, GrayImage, StereoPair};

/// Scale of the synthetic label curve.
pub const SYNTHETIC_LABEL_SCALE: f64 = 1.5;
/// Standard deviation of the noise added to synthetic labels.
pub const SYNTHETIC_LABEL_NOISE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Layer {
    x0: i64,
    y0: i64,
    x1: i64,
    y1: i64,
    disparity: i64,
}

impl Layer {
    fn contains(&self, x: i64, y: i64) -> bool {
        (self.x0..self.x1).contains(&x) && (self.y0..self.y1).contains(&y)
    }
}

/// Parameters of one synthetic scene; see the module docs.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    /// Nearest (most negative) disparity magnitude.
    pub near: i64,
    /// Farthest background disparity.
    pub far: i64,
    texture_seed: u64,
    layers: Vec<Layer>,
}

impl SceneSpec {
    /// Draws a scene from a seed. The nearest disparity magnitude is uniform
    /// in `[12, 72]` px and the farthest lies within ±25% of it, clamped to
    /// the same interval.
    pub fn random(width: usize, height: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let near = rng.random_range(12..=72i64);
        let far = ((near as f64 * rng.random_range(0.75..1.25)).round() as i64).clamp(12, 72);
        let (w, h) = (width as i64, height as i64);
        let mut layers = Vec::new();
        for k in 0..2 {
            let rw = (w / (3 + k)).max(1);
            let rh = (h / (3 + k)).max(1);
            let x0 = rng.random_range(0..=(w - rw).max(0));
            let y0 = rng.random_range(0..=(h - rh).max(0));
            let t: f64 = if k == 0 {
                1.0
            } else {
                rng.random_range(0.3..0.8)
            };
            layers.push(Layer {
                x0,
                y0,
                x1: x0 + rw,
                y1: y0 + rh,
                disparity: -((near as f64 * t).round() as i64),
            });
        }
        // Nearest layer drawn last.
        layers.reverse();
        Self {
            width,
            height,
            near,
            far,
            texture_seed: rng.random(),
            layers,
        }
    }

    fn background_disparity(&self, x: i64) -> i64 {
        let t = if self.width > 1 {
            x as f64 / (self.width - 1) as f64
        } else {
            1.0
        };
        (self.far as f64 * (0.6 + 0.4 * t)).round() as i64
    }

    fn texture(&self, layer: usize, x: i64, y: i64) -> f64 {
        let mut v = self.texture_seed
            ^ (layer as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)
            ^ (x as u64).wrapping_mul(0xbf58_476d_1ce4_e5b9)
            ^ (y as u64).wrapping_mul(0x94d0_49bb_1331_11eb);
        v ^= v >> 31;
        v = v.wrapping_mul(0xd6e8_feb8_6659_fd93);
        v ^= v >> 32;
        30.0 + (v % 196) as f64
    }

    /// Topmost layer at left-view coordinates, `None` for background.
    fn layer_at_left(&self, x: i64, y: i64) -> Option<usize> {
        (0..self.layers.len())
            .rev()
            .find(|&i| self.layers[i].contains(x, y))
    }

    fn left_value(&self, x: i64, y: i64) -> f64 {
        match self.layer_at_left(x, y) {
            Some(i) => self.texture(i + 1, x, y),
            None => self.texture(0, x, y),
        }
    }

    fn right_value(&self, xr: i64, y: i64) -> f64 {
        for i in (0..self.layers.len()).rev() {
            let l = &self.layers[i];
            if l.contains(xr + l.disparity, y) {
                return self.texture(i + 1, xr + l.disparity, y);
            }
        }
        // Background disparity varies with x; find the left column landing on xr.
        let mut xl = xr + self.background_disparity(xr);
        for _ in 0..4 {
            xl = xr + self.background_disparity(xl);
        }
        self.texture(0, xl, y)
    }

    fn disparity_at(&self, x: i64, y: i64) -> f64 {
        match self.layer_at_left(x, y) {
            Some(i) => self.layers[i].disparity as f64,
            None => self.background_disparity(x) as f64,
        }
    }

    /// Renders both views and the left-referenced disparity map.
    pub fn render(&self) -> Result<(StereoPair, DisparityMap)> {
        let left = GrayImage::from_fn(self.width, self.height, |x, y| {
            self.left_value(x as i64, y as i64)
        })?;
        let right = GrayImage::from_fn(self.width, self.height, |x, y| {
            self.right_value(x as i64, y as i64)
        })?;
        let dmap = DisparityMap::from_fn(self.width, self.height, |x, y| {
            self.disparity_at(x as i64, y as i64)
        })?;
        Ok((StereoPair::new(left, right)?, dmap))
    }
}

/// Noise-free synthetic comfort score: `1 + 4·(1 − exp(−max(DR, 0)/1.5))`.
///
/// DR falls as disparities approach or leave the comfort zone, so the score
/// is monotone non-decreasing in DR and lies in `[1, 5)`.
pub fn synthetic_comfort(dr: f64) -> f64 {
    1.0 + 4.0 * (1.0 - (-dr.max(0.0) / SYNTHETIC_LABEL_SCALE).exp())
}

/// DR of `dmap` under default zone and weights, mapped through
/// [`synthetic_comfort`], plus `noise` and clamped to `[1, 5]`.
pub fn synthetic_label(dmap: &DisparityMap, noise: f64) -> f64 {
    let dr = disparity_range_feature(dmap, &ComfortZone::default(), &DrParams::default());
    (synthetic_comfort(dr) + noise).clamp(1.0, 5.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rendered_views_agree_with_ground_truth() {
        let spec = SceneSpec::random(64, 48, 3);
        let (pair, dmap) = spec.render().unwrap();
        let mut checked = 0;
        for y in 0..48 {
            for x in 0..64 {
                let d = dmap.get(x, y) as i64;
                let xr = x as i64 - d;
                if !(0..64).contains(&xr) {
                    continue;
                }
                // Visible in both views when the right pixel resolves to the same surface.
                if pair.right().get(xr as usize, y) == pair.left().get(x, y) {
                    checked += 1;
                }
            }
        }
        assert!(checked > 64 * 48 / 4, "only {checked} consistent pixels");
        let (lo, hi) = dmap.min_max();
        assert_eq!(lo, -(spec.near as f64));
        assert!(hi <= spec.far as f64);
    }

    #[test]
    fn scenes_are_seeded() {
        assert_eq!(SceneSpec::random(32, 24, 9), SceneSpec::random(32, 24, 9));
        assert_ne!(SceneSpec::random(32, 24, 9), SceneSpec::random(32, 24, 10));
    }

    #[test]
    fn label_curve_is_monotone_and_bounded() {
        let mut prev = synthetic_comfort(-1.0);
        assert_eq!(prev, 1.0);
        for k in 0..200 {
            let v = synthetic_comfort(k as f64 * 0.1);
            assert!(v >= prev && v < 5.0);
            prev = v;
        }
        let d = DisparityMap::filled(4, 4, 0.0).unwrap();
        assert_eq!(synthetic_label(&d, 10.0), 5.0);
    }
}
