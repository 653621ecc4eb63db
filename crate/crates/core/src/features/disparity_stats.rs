//! Disparity-driven comfort features: range (DR), boundary disparity (BD)
//! and disparity intensity distribution (DID).

use crate::disparity::DEFAULT_COMFORT_LIMIT_PX;
use crate::error::{Error, Result};
use crate::imagecore::{DisparityMap, GrayImage, StereoPair};

/// Added to both view energies before taking their ratio.
pub const ENERGY_EPSILON: f64 = 1e-6;

/// Comfortable disparity interval `[d_min, d_max]` in pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComfortZone {
    pub d_min: f64,
    pub d_max: f64,
}

impl Default for ComfortZone {
    fn default() -> Self {
        Self {
            d_min: -DEFAULT_COMFORT_LIMIT_PX,
            d_max: DEFAULT_COMFORT_LIMIT_PX,
        }
    }
}

impl ComfortZone {
    pub fn new(d_min: f64, d_max: f64) -> Result<Self> {
        if !(d_min < 0.0 && 0.0 < d_max) || !d_min.is_finite() || !d_max.is_finite() {
            return Err(Error::Parameter(format!(
                "comfort zone [{d_min}, {d_max}] must straddle zero"
            )));
        }
        Ok(Self { d_min, d_max })
    }

    /// Symmetric zone `[-z, z]`.
    pub fn symmetric(z: f64) -> Result<Self> {
        Self::new(-z, z)
    }
}

/// Penalty weights for the crossed (`alpha`) and uncrossed (`beta`) extremes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrParams {
    pub alpha: f64,
    pub beta: f64,
    /// Smallest denominator magnitude, in pixels.
    pub denom_floor: f64,
}

impl Default for DrParams {
    fn default() -> Self {
        Self {
            alpha: 0.4,
            beta: 0.6,
            denom_floor: 1.0,
        }
    }
}

impl DrParams {
    pub fn new(alpha: f64, beta: f64, denom_floor: f64) -> Result<Self> {
        let p = Self {
            alpha,
            beta,
            denom_floor,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0 && self.beta >= 0.0) || (self.alpha + self.beta - 1.0).abs() > 1e-12
        {
            return Err(Error::Parameter(format!(
                "alpha={} and beta={} must be non-negative and sum to 1",
                self.alpha, self.beta
            )));
        }
        if self.denom_floor.is_nan() || self.denom_floor <= 0.0 {
            return Err(Error::Parameter("denom_floor must be positive".into()));
        }
        Ok(())
    }
}

/// Weight between the ranked and raw gradient statistics of DID.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DidParams {
    pub lambda: f64,
}

impl Default for DidParams {
    fn default() -> Self {
        Self { lambda: 0.5 }
    }
}

impl DidParams {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::Parameter(format!("lambda {lambda} outside [0, 1]")));
        }
        Ok(Self { lambda })
    }
}

/// DR from the extremes of a disparity map.
pub fn disparity_range_feature(dmap: &DisparityMap, zone: &ComfortZone, params: &DrParams) -> f64 {
    let (x, y) = dmap.min_max();
    disparity_range_from_extremes(x, y, zone, params)
}

/// `R = α (d_min − x) / x' + β (d_max − y) / y'`, where the denominators keep
/// the sign of `x`/`y` (zero counts as negative for `x`, positive for `y`) and
/// are at least `denom_floor` in magnitude.
pub fn disparity_range_from_extremes(x: f64, y: f64, zone: &ComfortZone, params: &DrParams) -> f64 {
    let floor = params.denom_floor;
    let xd = if x > 0.0 {
        x.max(floor)
    } else {
        -(-x).max(floor)
    };
    let yd = if y < 0.0 {
        -(-y).max(floor)
    } else {
        y.max(floor)
    };
    params.alpha * (zone.d_min - x) / xd + params.beta * (zone.d_max - y) / yd
}

/// Population variance of the luma values.
pub fn image_energy(img: &GrayImage) -> f64 {
    let n = img.data().len() as f64;
    let mean = img.data().iter().sum::<f64>() / n;
    img.data().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n
}

/// Boundary band widths and statistics making up BD.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryDisparity {
    pub left_band: usize,
    pub right_band: usize,
    pub a_left: f64,
    pub a_right: f64,
    pub energy_ratio: f64,
}

impl BoundaryDisparity {
    pub fn to_array(&self) -> [f64; 3] {
        [self.a_left, self.a_right, self.energy_ratio]
    }
}

/// Band width from the mean disparity of one edge column:
/// `clamp(round(|mean|), 1, ⌊m/2⌋)`.
fn band_width(dmap: &DisparityMap, column: usize) -> usize {
    let n = dmap.height();
    let mean = (0..n).map(|y| dmap.get(column, y)).sum::<f64>() / n as f64;
    let cap = dmap.width() / 2;
    (mean.abs().round() as usize).clamp(1, cap)
}

fn band_mean(dmap: &DisparityMap, cols: std::ops::Range<usize>) -> f64 {
    let count = (cols.len() * dmap.height()) as f64;
    let mut sum = 0.0;
    for y in 0..dmap.height() {
        sum += dmap.row(y)[cols.clone()].iter().sum::<f64>();
    }
    sum / count
}

/// BD: mean disparity inside the left and right boundary bands, plus the
/// ratio of left to right view energy.
pub fn boundary_disparity_feature(
    pair: &StereoPair,
    dmap: &DisparityMap,
) -> Result<BoundaryDisparity> {
    if !dmap.same_shape(pair.left()) {
        return Err(Error::Dimension(format!(
            "disparity map {}x{} does not match views {}x{}",
            dmap.width(),
            dmap.height(),
            pair.width(),
            pair.height()
        )));
    }
    let m = dmap.width();
    if m < 4 {
        return Err(Error::Dimension(format!(
            "boundary bands need at least 4 columns, got {m}"
        )));
    }
    let left_band = band_width(dmap, 0);
    let right_band = band_width(dmap, m - 1);
    let a_left = band_mean(dmap, 0..left_band);
    let a_right = band_mean(dmap, m - right_band..m);
    let e_l = image_energy(pair.left());
    let e_r = image_energy(pair.right());
    Ok(BoundaryDisparity {
        left_band,
        right_band,
        a_left,
        a_right,
        energy_ratio: (e_l + ENERGY_EPSILON) / (e_r + ENERGY_EPSILON),
    })
}

/// Just-noticeable depth difference for a base disparity, graded by `|d|`.
pub fn jndd_threshold(d: f64) -> f64 {
    let a = d.abs();
    if a < 64.0 {
        21.0
    } else if a < 128.0 {
        19.0
    } else if a < 192.0 {
        18.0
    } else {
        20.0
    }
}

fn patch_gradient(p: &[[f64; 3]; 3]) -> f64 {
    let col_mean = |c: usize| (p[0][c] + p[1][c] + p[2][c]) / 3.0;
    let row_mean = |r: usize| (p[r][0] + p[r][1] + p[r][2]) / 3.0;
    let gh = (col_mean(2) - col_mean(0)) / 2.0;
    let gv = (row_mean(2) - row_mean(0)) / 2.0;
    let gd = (p[2][2] - p[0][0]) / (2.0 * std::f64::consts::SQRT_2);
    (gh * gh + gv * gv + gd * gd).sqrt()
}

fn mean_and_variance(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var)
}

/// Per-patch general gradients on JNDD ranks and on raw disparities, over the
/// non-overlapping 3×3 tiling (partial tiles dropped).
pub fn did_patch_gradients(dmap: &DisparityMap) -> Result<(Vec<f64>, Vec<f64>)> {
    if dmap.width() < 3 || dmap.height() < 3 {
        return Err(Error::Dimension(format!(
            "DID needs at least a 3x3 map, got {}x{}",
            dmap.width(),
            dmap.height()
        )));
    }
    let (tiles_x, tiles_y) = (dmap.width() / 3, dmap.height() / 3);
    let mut ranked = Vec::with_capacity(tiles_x * tiles_y);
    let mut raw = Vec::with_capacity(tiles_x * tiles_y);
    for ty in 0..tiles_y {
        for tx in 0..tiles_x {
            let mut patch = [[0.0; 3]; 3];
            for (r, row) in patch.iter_mut().enumerate() {
                for (c, v) in row.iter_mut().enumerate() {
                    *v = dmap.get(tx * 3 + c, ty * 3 + r);
                }
            }
            let center = patch[1][1];
            let t = jndd_threshold(center);
            let ranks = patch.map(|row| row.map(|d| ((d - center) / t).trunc()));
            ranked.push(patch_gradient(&ranks));
            raw.push(patch_gradient(&patch));
        }
    }
    Ok((ranked, raw))
}

/// DID: `λ`-weighted blend of the (mean, variance) of ranked and raw patch
/// gradients.
pub fn did_feature(dmap: &DisparityMap, params: &DidParams) -> Result<[f64; 2]> {
    let (ranked, raw) = did_patch_gradients(dmap)?;
    let (mr, vr) = mean_and_variance(&ranked);
    let (mw, vw) = mean_and_variance(&raw);
    let l = params.lambda;
    Ok([l * mr + (1.0 - l) * mw, l * vr + (1.0 - l) * vw])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dr_at(x: f64, y: f64) -> f64 {
        disparity_range_from_extremes(x, y, &ComfortZone::default(), &DrParams::default())
    }

    #[test]
    fn dr_analytic_cases() {
        assert_eq!(dr_at(-79.55, 79.55), 0.0);
        assert!((dr_at(-159.1, 159.1) + 0.5).abs() < 1e-9);
        assert!((dr_at(-39.775, 39.775) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn dr_floors_zero_extremes() {
        // x' = -1, y' = +1
        let flat = dr_at(0.0, 0.0);
        assert!((flat - (0.4 * 79.55 + 0.6 * 79.55)).abs() < 1e-9);
        assert!(flat.is_finite() && flat > 0.0);
        let tiny = dr_at(0.25, 0.5);
        assert!((tiny - (0.4 * (-79.55 - 0.25) / 1.0 + 0.6 * (79.55 - 0.5) / 1.0)).abs() < 1e-9);
    }

    #[test]
    fn dr_params_validation() {
        assert!(DrParams::new(0.4, 0.6, 1.0).is_ok());
        assert!(DrParams::new(0.5, 0.6, 1.0).is_err());
        assert!(DrParams::new(-0.2, 1.2, 1.0).is_err());
        assert!(DrParams::new(0.4, 0.6, 0.0).is_err());
        assert!(ComfortZone::new(1.0, 5.0).is_err());
    }

    #[test]
    fn energy_examples() {
        assert_eq!(image_energy(&GrayImage::filled(4, 4, 9.0).unwrap()), 0.0);
        let two = GrayImage::from_fn(4, 2, |x, _| if x % 2 == 0 { 0.0 } else { 2.0 }).unwrap();
        assert!((image_energy(&two) - 1.0).abs() < 1e-12);
        let pair = GrayImage::new(2, 1, vec![0.0, 255.0]).unwrap();
        assert!((image_energy(&pair) - 16256.25).abs() < 1e-9);
    }

    fn flat_pair(w: usize, h: usize) -> StereoPair {
        let v = GrayImage::from_fn(w, h, |x, y| ((x * 7 + y * 3) % 11) as f64).unwrap();
        StereoPair::new(v.clone(), v).unwrap()
    }

    #[test]
    fn bd_constant_map() {
        let pair = flat_pair(40, 5);
        let d = DisparityMap::filled(40, 5, 10.0).unwrap();
        let bd = boundary_disparity_feature(&pair, &d).unwrap();
        assert_eq!((bd.left_band, bd.right_band), (10, 10));
        assert_eq!((bd.a_left, bd.a_right), (10.0, 10.0));
        assert_eq!(bd.energy_ratio, 1.0);
    }

    #[test]
    fn bd_narrow_map_rejected() {
        let pair = flat_pair(3, 5);
        let d = DisparityMap::filled(3, 5, 0.0).unwrap();
        assert!(matches!(
            boundary_disparity_feature(&pair, &d),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn bd_band_clamps() {
        let pair = flat_pair(12, 3);
        let zero = DisparityMap::filled(12, 3, 0.0).unwrap();
        assert_eq!(
            boundary_disparity_feature(&pair, &zero).unwrap().left_band,
            1
        );
        let huge = DisparityMap::filled(12, 3, -500.0).unwrap();
        let bd = boundary_disparity_feature(&pair, &huge).unwrap();
        assert_eq!((bd.left_band, bd.right_band), (6, 6));
    }

    #[test]
    fn bd_constant_views_ratio_one() {
        let v = GrayImage::filled(8, 4, 3.0).unwrap();
        let pair = StereoPair::new(v.clone(), v).unwrap();
        let d = DisparityMap::filled(8, 4, 0.0).unwrap();
        assert_eq!(
            boundary_disparity_feature(&pair, &d).unwrap().energy_ratio,
            1.0
        );
    }

    #[test]
    fn jndd_bins() {
        for (d, t) in [
            (0.0, 21.0),
            (50.0, 21.0),
            (63.9, 21.0),
            (64.0, 19.0),
            (100.0, 19.0),
            (128.0, 18.0),
            (150.0, 18.0),
            (192.0, 20.0),
            (200.0, 20.0),
            (1000.0, 20.0),
        ] {
            assert_eq!(jndd_threshold(d), t, "d={d}");
            assert_eq!(jndd_threshold(-d), t, "d=-{d}");
        }
    }

    #[test]
    fn did_constant_and_ramp() {
        let c = DisparityMap::filled(9, 9, 42.0).unwrap();
        assert_eq!(did_feature(&c, &DidParams::default()).unwrap(), [0.0, 0.0]);

        let ramp = DisparityMap::from_fn(12, 9, |x, _| x as f64).unwrap();
        let [m, v] = did_feature(&ramp, &DidParams::default()).unwrap();
        assert!((m - 1.5f64.sqrt() / 2.0).abs() < 1e-9);
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn did_lambda_one_is_ranked_path() {
        let d = DisparityMap::from_fn(9, 6, |x, y| ((x * x * 13 + y * 29) % 90) as f64).unwrap();
        let (ranked, _) = did_patch_gradients(&d).unwrap();
        let (m, v) = mean_and_variance(&ranked);
        assert_eq!(
            did_feature(&d, &DidParams::new(1.0).unwrap()).unwrap(),
            [m, v]
        );
    }

    #[test]
    fn did_rank_truncates_toward_zero() {
        // right column jumps by 30 with T = 21: rank 1; left column by -30: rank -1
        let d = DisparityMap::from_fn(3, 3, |x, _| [-30.0, 0.0, 30.0][x]).unwrap();
        let (ranked, raw) = did_patch_gradients(&d).unwrap();
        let gd = 2.0 / (2.0 * std::f64::consts::SQRT_2);
        assert!((ranked[0] - (1.0 + gd * gd).sqrt()).abs() < 1e-12);
        let gd = 60.0 / (2.0 * std::f64::consts::SQRT_2);
        assert!((raw[0] - (900.0 + gd * gd).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn did_small_map_rejected() {
        let d = DisparityMap::filled(2, 5, 0.0).unwrap();
        assert!(matches!(
            did_feature(&d, &DidParams::default()),
            Err(Error::Dimension(_))
        ));
        assert!(DidParams::new(1.5).is_err());
    }

    proptest! {
        #[test]
        fn dr_non_decreasing_in_crossed_extreme(x1 in -400.0f64..-0.01, dx in 0.0f64..100.0, y in -50.0f64..400.0) {
            let x2 = (x1 + dx).min(-0.005);
            prop_assert!(dr_at(x2, y) >= dr_at(x1, y) - 1e-12);
        }

        #[test]
        fn dr_permutation_invariant(mut v in prop::collection::vec(-200.0f64..200.0, 12), rot in 0usize..12) {
            let a = DisparityMap::new(4, 3, v.clone()).unwrap();
            v.rotate_left(rot);
            v.reverse();
            let b = DisparityMap::new(4, 3, v).unwrap();
            let (z, p) = (ComfortZone::default(), DrParams::default());
            prop_assert_eq!(disparity_range_feature(&a, &z, &p), disparity_range_feature(&b, &z, &p));
        }

        #[test]
        fn energy_invariances(v in prop::collection::vec(0.0f64..200.0, 16), c in 0.0f64..55.0, rot in 0usize..16) {
            let e = image_energy(&GrayImage::new(4, 4, v.clone()).unwrap());
            let shifted = GrayImage::new(4, 4, v.iter().map(|x| x + c).collect()).unwrap();
            prop_assert!((image_energy(&shifted) - e).abs() < 1e-9);
            let mut p = v.clone();
            p.rotate_left(rot);
            prop_assert!((image_energy(&GrayImage::new(4, 4, p).unwrap()) - e).abs() < 1e-9);
        }

        #[test]
        fn bd_swap_inverts_ratio(a in prop::collection::vec(0.0f64..255.0, 24), b in prop::collection::vec(0.0f64..255.0, 24), d in prop::collection::vec(-40.0f64..40.0, 24)) {
            let l = GrayImage::new(6, 4, a).unwrap();
            let r = GrayImage::new(6, 4, b).unwrap();
            let dmap = DisparityMap::new(6, 4, d).unwrap();
            prop_assume!(image_energy(&l) > 0.0 && image_energy(&r) > 0.0);
            let fwd = boundary_disparity_feature(&StereoPair::new(l.clone(), r.clone()).unwrap(), &dmap).unwrap();
            let back = boundary_disparity_feature(&StereoPair::new(r, l).unwrap(), &dmap).unwrap();
            prop_assert!((fwd.energy_ratio * back.energy_ratio - 1.0).abs() < 1e-9);
            prop_assert_eq!((fwd.a_left, fwd.a_right), (back.a_left, back.a_right));
        }

        #[test]
        fn jndd_even(d in 0.0f64..400.0) {
            prop_assert_eq!(jndd_threshold(d), jndd_threshold(-d));
        }

        #[test]
        fn did_shift_within_bin(v in prop::collection::vec(-10.0f64..10.0, 36), shift in -20.0f64..20.0) {
            // centers stay inside bin 1 (|c| < 64) before and after the shift
            let a = DisparityMap::new(6, 6, v.clone()).unwrap();
            let b = DisparityMap::new(6, 6, v.iter().map(|x| x + shift).collect()).unwrap();
            let (ra, wa) = did_patch_gradients(&a).unwrap();
            let (rb, wb) = did_patch_gradients(&b).unwrap();
            for (x, y) in wa.iter().zip(&wb) {
                prop_assert!((x - y).abs() < 1e-9);
            }
            prop_assert_eq!(ra, rb);
        }

        #[test]
        fn did_nonzero_for_generic_maps(v in prop::collection::vec(-50.0f64..50.0, 9)) {
            prop_assume!(v.iter().any(|x| (x - v[0]).abs() > 1e-3));
            let d = DisparityMap::new(3, 3, v).unwrap();
            let f = did_feature(&d, &DidParams::default()).unwrap();
            let (_, raw) = did_patch_gradients(&d).unwrap();
            // zero only on the measure-zero set where all three raw gradients cancel
            prop_assert_eq!(f[0] > 0.0, raw[0] > 0.0);
        }
    }
}
