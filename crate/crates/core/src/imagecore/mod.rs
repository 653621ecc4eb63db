//! Raster types shared by every stage of the pipeline.
//!
//! Images are real-valued after decode. Rasters are row-major with `width`
//! columns and `height` rows; `(x, y)` addresses column `x` of row `y`.

mod io;

pub use io::{
    load_disparity, load_image, load_rgb, save_disparity, save_gray_png, DisparityEncoding,
};

use crate::error::{Error, Result};

/// Rec.601 luma weights.
pub const LUMA_WEIGHTS: [f64; 3] = [0.299, 0.587, 0.114];

/// Single-channel luminance raster with values in `[0, 255]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        if let Some(v) = data
            .iter()
            .find(|v| !v.is_finite() || **v < 0.0 || **v > 255.0)
        {
            return Err(Error::Data(format!("luma value {v} outside [0, 255]")));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Image filled with one value.
    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    /// Builds an image by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    pub(crate) fn from_raw_unchecked(width: usize, height: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    /// Pixel lookup with edge replication for out-of-range coordinates.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> f64 {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.get(x, y)
    }

    pub fn row(&self, y: usize) -> &[f64] {
        &self.data[y * self.width..(y + 1) * self.width]
    }
}

/// Per-pixel signed horizontal disparity, referenced to the left view.
///
/// Sign convention: `d = x_left - x_right`, positive values are crossed
/// (in front of the screen).
#[derive(Debug, Clone, PartialEq)]
pub struct DisparityMap {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl DisparityMap {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        if let Some(v) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::Data(format!("non-finite disparity {v}")));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    pub(crate) fn from_raw_unchecked(width: usize, height: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> f64 {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.get(x, y)
    }

    pub fn row(&self, y: usize) -> &[f64] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    /// Smallest and largest disparity.
    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &d| {
                (lo.min(d), hi.max(d))
            })
    }

    pub fn same_shape(&self, img: &GrayImage) -> bool {
        self.width == img.width && self.height == img.height
    }
}

/// Interleaved RGB raster, channel values in `[0, 255]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<[f64; 3]>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, data: Vec<[f64; 3]>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        if data
            .iter()
            .flatten()
            .any(|v| !v.is_finite() || *v < 0.0 || *v > 255.0)
        {
            return Err(Error::Data("RGB value outside [0, 255]".into()));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[[f64; 3]] {
        &self.data
    }
}

/// Converts RGB to real-valued Rec.601 luma without rounding.
pub fn to_gray(rgb: &RgbImage) -> GrayImage {
    let data = rgb.data.iter().map(|&p| luma(p)).collect();
    GrayImage::from_raw_unchecked(rgb.width, rgb.height, data)
}

#[inline]
pub fn luma([r, g, b]: [f64; 3]) -> f64 {
    // Weights sum to one, so the result stays inside [0, 255] up to rounding.
    (LUMA_WEIGHTS[0] * r + LUMA_WEIGHTS[1] * g + LUMA_WEIGHTS[2] * b).clamp(0.0, 255.0)
}

/// Left and right views of one stereoscopic pair, with an optional disparity map.
#[derive(Debug, Clone, PartialEq)]
pub struct StereoPair {
    left: GrayImage,
    right: GrayImage,
    disparity: Option<DisparityMap>,
}

impl StereoPair {
    pub fn new(left: GrayImage, right: GrayImage) -> Result<Self> {
        if left.width != right.width || left.height != right.height {
            return Err(Error::Dimension(format!(
                "left view is {}x{} but right view is {}x{}",
                left.width, left.height, right.width, right.height
            )));
        }
        Ok(Self {
            left,
            right,
            disparity: None,
        })
    }

    pub fn with_disparity(mut self, disparity: DisparityMap) -> Result<Self> {
        if !disparity.same_shape(&self.left) {
            return Err(Error::Dimension(format!(
                "disparity map is {}x{} but views are {}x{}",
                disparity.width, disparity.height, self.left.width, self.left.height
            )));
        }
        self.disparity = Some(disparity);
        Ok(self)
    }

    pub fn left(&self) -> &GrayImage {
        &self.left
    }

    pub fn right(&self) -> &GrayImage {
        &self.right
    }

    pub fn disparity(&self) -> Option<&DisparityMap> {
        self.disparity.as_ref()
    }

    pub fn width(&self) -> usize {
        self.left.width
    }

    pub fn height(&self) -> usize {
        self.left.height
    }

    pub fn into_views(self) -> (GrayImage, GrayImage) {
        (self.left, self.right)
    }
}

fn check_dims(width: usize, height: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::Dimension(format!("empty raster ({width}x{height})")));
    }
    if width.checked_mul(height) != Some(len) {
        return Err(Error::Dimension(format!(
            "{len} samples do not fill a {width}x{height} raster"
        )));
    }
    Ok(())
}
