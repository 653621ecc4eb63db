//! Block-matching disparity estimation and comfort-zone geometry.

use crate::error::{Error, Result};
use crate::imagecore::{DisparityMap, GrayImage, StereoPair};

/// Comfort-zone half width in pixels for a ±1° visual angle in the reference
/// viewing setup.
pub const DEFAULT_COMFORT_LIMIT_PX: f64 = 79.55;

/// SAD block-matching configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockMatchParams {
    /// Window half size; the window is `(2r + 1)²` pixels.
    pub window_radius: usize,
    pub search_min: i32,
    pub search_max: i32,
    /// Parabolic refinement around the integer minimum.
    pub subpixel: bool,
}

impl Default for BlockMatchParams {
    fn default() -> Self {
        Self {
            window_radius: 4,
            search_min: -128,
            search_max: 128,
            subpixel: false,
        }
    }
}

impl BlockMatchParams {
    pub fn validate(&self) -> Result<()> {
        if self.window_radius < 1 {
            return Err(Error::Parameter("window_radius must be at least 1".into()));
        }
        if self.search_min >= self.search_max {
            return Err(Error::Parameter(format!(
                "empty search range [{}, {}]",
                self.search_min, self.search_max
            )));
        }
        Ok(())
    }

    /// Same parameters with the search range clipped to `±(width - 1)`.
    pub fn clipped_to_width(mut self, width: usize) -> Self {
        let lim = width.saturating_sub(1).min(i32::MAX as usize) as i32;
        self.search_min = self.search_min.max(-lim);
        self.search_max = self.search_max.min(lim);
        if self.search_min >= self.search_max {
            self.search_min = -lim.max(1);
            self.search_max = lim.max(1);
        }
        self
    }
}

// Lower key wins: prefer small |d|, then negative d.
#[inline]
fn tie_key(d: i32) -> (u32, bool) {
    (d.unsigned_abs(), d > 0)
}

/// Estimates a left-referenced disparity map by SAD block matching.
///
/// The left window at `x` is compared against the right window at `x - d`.
/// Windows and shifted lookups replicate edge pixels.
pub fn estimate_disparity(pair: &StereoPair, params: &BlockMatchParams) -> Result<DisparityMap> {
    params.validate()?;
    let (w, h) = (pair.width(), pair.height());
    let span = 2 * params.window_radius + 1;
    if w < span || h < span {
        return Err(Error::Dimension(format!(
            "{w}x{h} image is smaller than the {span}x{span} matching window"
        )));
    }
    let reach = params
        .search_min
        .unsigned_abs()
        .max(params.search_max.unsigned_abs()) as usize;
    if reach >= w {
        return Err(Error::Parameter(format!(
            "search range [{}, {}] exceeds image width {w}",
            params.search_min, params.search_max
        )));
    }

    let left = pair.left();
    let right = pair.right();
    let n = w * h;
    let r = params.window_radius as isize;

    let mut best_d = vec![0i32; n];
    let mut best_c = vec![f64::INFINITY; n];
    let mut c_minus = vec![f64::NAN; n];
    let mut c_plus = vec![f64::NAN; n];
    let mut prev = vec![f64::NAN; n];

    let mut diff = vec![0.0f64; n];
    let mut rowsum = vec![0.0f64; n];
    let mut cost = vec![0.0f64; n];

    for d in params.search_min..=params.search_max {
        for y in 0..h {
            let lrow = left.row(y);
            let rrow = right.row(y);
            for x in 0..w {
                let xr = (x as isize - d as isize).clamp(0, w as isize - 1) as usize;
                diff[y * w + x] = (lrow[x] - rrow[xr]).abs();
            }
        }
        box_sum(&diff, &mut rowsum, &mut cost, w, h, r);

        for i in 0..n {
            let c = cost[i];
            let better = c < best_c[i] || (c == best_c[i] && tie_key(d) < tie_key(best_d[i]));
            if better {
                best_d[i] = d;
                best_c[i] = c;
                c_minus[i] = prev[i];
                c_plus[i] = f64::NAN;
            } else if d == best_d[i] + 1 {
                c_plus[i] = c;
            }
            prev[i] = c;
        }
    }

    let data = (0..n)
        .map(|i| {
            let d = f64::from(best_d[i]);
            if !params.subpixel {
                return d;
            }
            let (cm, c0, cp) = (c_minus[i], best_c[i], c_plus[i]);
            let denom = cm - 2.0 * c0 + cp;
            if cm.is_finite() && cp.is_finite() && denom > 0.0 {
                (d + 0.5 * (cm - cp) / denom)
                    .clamp(f64::from(params.search_min), f64::from(params.search_max))
            } else {
                d
            }
        })
        .collect();
    Ok(DisparityMap::from_raw_unchecked(w, h, data))
}

// Separable (2r+1)² window sum with edge replication.
fn box_sum(src: &[f64], tmp: &mut [f64], out: &mut [f64], w: usize, h: usize, r: isize) {
    let clampx = |x: isize| x.clamp(0, w as isize - 1) as usize;
    let clampy = |y: isize| y.clamp(0, h as isize - 1) as usize;
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        for x in 0..w {
            let mut s = 0.0;
            for dx in -r..=r {
                s += row[clampx(x as isize + dx)];
            }
            tmp[y * w + x] = s;
        }
    }
    for y in 0..h {
        for x in 0..w {
            let mut s = 0.0;
            for dy in -r..=r {
                s += tmp[clampy(y as isize + dy) * w + x];
            }
            out[y * w + x] = s;
        }
    }
}

/// Viewing setup used to convert visual angles into screen pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViewingGeometry {
    pub viewing_distance_mm: f64,
    /// Horizontal screen density.
    pub pixels_per_mm: f64,
}

impl ViewingGeometry {
    pub fn new(viewing_distance_mm: f64, pixels_per_mm: f64) -> Result<Self> {
        if !(viewing_distance_mm > 0.0 && viewing_distance_mm.is_finite())
            || !(pixels_per_mm > 0.0 && pixels_per_mm.is_finite())
        {
            return Err(Error::Parameter(format!(
                "viewing geometry must be strictly positive (distance {viewing_distance_mm} mm, density {pixels_per_mm} px/mm)"
            )));
        }
        Ok(Self {
            viewing_distance_mm,
            pixels_per_mm,
        })
    }
}

/// Half width `z` of the symmetric comfort zone `[-z, z]` in pixels:
/// `z = 2 · distance · tan(angle / 2) · density`.
pub fn comfort_zone_pixels(half_angle_deg: f64, geom: &ViewingGeometry) -> Result<f64> {
    if !(half_angle_deg > 0.0 && half_angle_deg < 10.0) {
        return Err(Error::Parameter(format!(
            "comfort angle {half_angle_deg}° outside (0, 10)"
        )));
    }
    // Re-check in case the struct was built literally.
    ViewingGeometry::new(geom.viewing_distance_mm, geom.pixels_per_mm)?;
    let half = (half_angle_deg / 2.0).to_radians();
    Ok(2.0 * geom.viewing_distance_mm * half.tan() * geom.pixels_per_mm)
}

/// Convenience wrapper building a pair from two views and estimating disparity.
pub fn estimate_from_views(
    left: &GrayImage,
    right: &GrayImage,
    params: &BlockMatchParams,
) -> Result<DisparityMap> {
    let pair = StereoPair::new(left.clone(), right.clone())?;
    estimate_disparity(&pair, params)
}
