use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use image::{DynamicImage, ImageBuffer, ImageError, ImageReader, Luma};

use super::{to_gray, DisparityMap, GrayImage, RgbImage};
use crate::error::{Error, Result};

/// How a disparity map is stored on disk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DisparityEncoding {
    /// Single-channel little-endian PFM, lossless for `f32`-representable values.
    Pfm,
    /// 16-bit grayscale PNG holding `raw = (d - offset) / scale`.
    Png16 { scale: f64, offset: f64 },
}

impl DisparityEncoding {
    /// Picks PFM for `.pfm` paths and 16-bit PNG otherwise.
    pub fn for_path(path: &Path, scale: f64, offset: f64) -> Self {
        match extension(path).as_deref() {
            Some("pfm") => DisparityEncoding::Pfm,
            _ => DisparityEncoding::Png16 { scale, offset },
        }
    }
}

fn extension(path: &Path) -> Option<String> {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
}

fn map_image_error(path: &Path, err: ImageError) -> Error {
    match err {
        ImageError::IoError(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => {
            Error::Decode(format!("{}: truncated file", path.display()))
        }
        ImageError::IoError(e) => Error::io(path, e),
        ImageError::Unsupported(e) => Error::Format(format!("{}: {e}", path.display())),
        other => Error::Decode(format!("{}: {other}", path.display())),
    }
}

fn decode(path: &Path) -> Result<DynamicImage> {
    let reader = ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?;
    if reader.format().is_none() {
        return Err(Error::Format(format!(
            "{}: not a PNG or PNM file",
            path.display()
        )));
    }
    reader.decode().map_err(|e| map_image_error(path, e))
}

/// Loads a PNG or binary PGM/PPM as real-valued luma.
///
/// Gray sources are taken as-is (16-bit samples are mapped onto `[0, 255]`);
/// color sources go through [`to_gray`].
pub fn load_image(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let img = decode(path)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    match img {
        DynamicImage::ImageLuma8(buf) => Ok(GrayImage::from_raw_unchecked(
            w,
            h,
            buf.into_raw().into_iter().map(f64::from).collect(),
        )),
        DynamicImage::ImageLuma16(buf) => Ok(GrayImage::from_raw_unchecked(
            w,
            h,
            buf.into_raw()
                .into_iter()
                .map(|v| f64::from(v) / 257.0)
                .collect(),
        )),
        DynamicImage::ImageLumaA8(_) | DynamicImage::ImageLumaA16(_) => {
            let buf = img.to_luma16();
            Ok(GrayImage::from_raw_unchecked(
                w,
                h,
                buf.into_raw()
                    .into_iter()
                    .map(|v| f64::from(v) / 257.0)
                    .collect(),
            ))
        }
        other => Ok(to_gray(&rgb_from_dynamic(other))),
    }
}

/// Loads a color image without luma conversion.
pub fn load_rgb(path: impl AsRef<Path>) -> Result<RgbImage> {
    Ok(rgb_from_dynamic(decode(path.as_ref())?))
}

fn rgb_from_dynamic(img: DynamicImage) -> RgbImage {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let buf = img.to_rgb8();
    let data = buf
        .pixels()
        .map(|p| [f64::from(p[0]), f64::from(p[1]), f64::from(p[2])])
        .collect();
    RgbImage {
        width: w,
        height: h,
        data,
    }
}

/// Writes luma as an 8-bit grayscale PNG (values rounded and clamped).
pub fn save_gray_png(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let raw: Vec<u8> = img
        .data()
        .iter()
        .map(|v| v.round().clamp(0.0, 255.0) as u8)
        .collect();
    let buf: ImageBuffer<Luma<u8>, Vec<u8>> =
        ImageBuffer::from_raw(img.width() as u32, img.height() as u32, raw)
            .expect("buffer length matches dimensions");
    buf.save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| map_image_error(path, e))
}

/// Loads a disparity map from PFM or 16-bit grayscale PNG.
///
/// For PNG, `d = raw * scale + offset`; PFM stores disparities directly and
/// ignores `scale`/`offset`.
pub fn load_disparity(path: impl AsRef<Path>, scale: f64, offset: f64) -> Result<DisparityMap> {
    let path = path.as_ref();
    let mut magic = [0u8; 2];
    {
        let mut f = File::open(path).map_err(|e| Error::io(path, e))?;
        f.read_exact(&mut magic)
            .map_err(|_| Error::Decode(format!("{}: file too short", path.display())))?;
    }
    if &magic == b"Pf" || &magic == b"PF" {
        return read_pfm(path);
    }
    let img = decode(path)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let raw = match img {
        DynamicImage::ImageLuma16(buf) => buf.into_raw(),
        other => {
            return Err(Error::Format(format!(
                "{}: disparity PNG must be 16-bit grayscale, found {:?}",
                path.display(),
                other.color()
            )))
        }
    };
    let data = raw
        .into_iter()
        .map(|r| f64::from(r) * scale + offset)
        .collect();
    DisparityMap::new(w, h, data)
}

/// Writes a disparity map. PFM round-trips `f32` values bit-exactly; the PNG
/// path quantizes to the nearest multiple of `scale`.
pub fn save_disparity(
    map: &DisparityMap,
    path: impl AsRef<Path>,
    encoding: DisparityEncoding,
) -> Result<()> {
    let path = path.as_ref();
    match encoding {
        DisparityEncoding::Pfm => write_pfm(map, path),
        DisparityEncoding::Png16 { scale, offset } => {
            if !(scale > 0.0 && scale.is_finite() && offset.is_finite()) {
                return Err(Error::Parameter(format!(
                    "invalid PNG disparity encoding scale={scale} offset={offset}"
                )));
            }
            let raw: Vec<u16> = map
                .data()
                .iter()
                .map(|d| ((d - offset) / scale).round().clamp(0.0, 65535.0) as u16)
                .collect();
            let buf: ImageBuffer<Luma<u16>, Vec<u16>> =
                ImageBuffer::from_raw(map.width() as u32, map.height() as u32, raw)
                    .expect("buffer length matches dimensions");
            buf.save_with_format(path, image::ImageFormat::Png)
                .map_err(|e| map_image_error(path, e))
        }
    }
}

// PFM stores rows bottom-to-top; a negative scale marks little-endian data.
fn write_pfm(map: &DisparityMap, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    write!(out, "Pf\n{} {}\n-1.0\n", map.width(), map.height()).map_err(io)?;
    for y in (0..map.height()).rev() {
        for &d in map.row(y) {
            out.write_all(&(d as f32).to_le_bytes()).map_err(io)?;
        }
    }
    out.flush().map_err(io)
}

fn read_pfm(path: &Path) -> Result<DisparityMap> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::new(file);
    let bad = |msg: &str| Error::Decode(format!("{}: {msg}", path.display()));

    let mut line = String::new();
    let mut next_line = |reader: &mut BufReader<File>| -> Result<String> {
        line.clear();
        reader
            .read_line(&mut line)
            .map_err(|e| Error::io(path, e))?;
        Ok(line.trim().to_string())
    };

    match next_line(&mut reader)?.as_str() {
        "Pf" => {}
        "PF" => {
            return Err(Error::Format(format!(
                "{}: three-channel PFM is not a disparity map",
                path.display()
            )))
        }
        _ => return Err(bad("missing PFM header")),
    }
    let dims = next_line(&mut reader)?;
    let mut it = dims.split_whitespace().map(str::parse::<usize>);
    let (w, h) = match (it.next(), it.next(), it.next()) {
        (Some(Ok(w)), Some(Ok(h)), None) => (w, h),
        _ => return Err(bad("malformed PFM dimensions")),
    };
    if w == 0 || h == 0 {
        return Err(Error::Dimension(format!(
            "{}: empty PFM ({w}x{h})",
            path.display()
        )));
    }
    let scale: f32 = next_line(&mut reader)?
        .parse()
        .map_err(|_| bad("malformed PFM scale"))?;
    let little_endian = scale < 0.0;

    let mut bytes = vec![0u8; w * h * 4];
    reader
        .read_exact(&mut bytes)
        .map_err(|_| bad("truncated PFM payload"))?;
    let mut data = vec![0.0f64; w * h];
    for (i, chunk) in bytes.chunks_exact(4).enumerate() {
        let b = [chunk[0], chunk[1], chunk[2], chunk[3]];
        let v = if little_endian {
            f32::from_le_bytes(b)
        } else {
            f32::from_be_bytes(b)
        };
        let (file_row, x) = (i / w, i % w);
        data[(h - 1 - file_row) * w + x] = f64::from(v);
    }
    DisparityMap::new(w, h, data)
}
