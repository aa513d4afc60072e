//! Raster, depth, defocus and mask files.
//!
//! The format is chosen by extension: `.png` (8- or 16-bit, gray or RGB) or
//! `.pfm`. Floats stored in PFM are `f32`; values already representable as
//! `f32` round-trip exactly.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use image::{DynamicImage, ImageBuffer, ImageFormat, Luma, Rgb};

use super::pfm::{read_pfm, write_pfm, PfmError, PfmImage};
use crate::error::{Error, Result};
use crate::map::{Mask, MaskedMap};
use crate::raster::Raster;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileFormat {
    Png,
    Pfm,
}

impl FileFormat {
    pub fn from_path(path: &Path) -> Result<Self> {
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        match ext.as_deref() {
            Some("png") => Ok(FileFormat::Png),
            Some("pfm") => Ok(FileFormat::Pfm),
            _ => Err(Error::format(path, "expected a .png or .pfm file")),
        }
    }
}

fn image_error(path: &Path, err: image::ImageError) -> Error {
    match err {
        image::ImageError::IoError(e) => Error::io(path, e),
        other => Error::format(path, other.to_string()),
    }
}

fn open_pfm(path: &Path) -> Result<PfmImage> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_pfm(BufReader::new(file)).map_err(|e| match e {
        PfmError::Io(e) => Error::io(path, e),
        PfmError::Header(msg) => Error::format(path, msg),
    })
}

fn store_pfm(path: &Path, img: &PfmImage) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_pfm(BufWriter::new(file), img).map_err(|e| Error::io(path, e))
}

fn open_png(path: &Path) -> Result<DynamicImage> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    image::load(BufReader::new(file), ImageFormat::Png).map_err(|e| image_error(path, e))
}

fn quantize16(v: f64) -> u16 {
    (v.clamp(0.0, 1.0) * 65535.0).round() as u16
}

/// Loads an image; PNG samples map linearly onto `[0, 1]`.
pub fn load_raster(path: impl AsRef<Path>) -> Result<Raster> {
    let path = path.as_ref();
    match FileFormat::from_path(path)? {
        FileFormat::Pfm => {
            let img = open_pfm(path)?;
            let data = img.data.iter().map(|&v| v as f64).collect();
            Raster::new(img.height, img.width, img.channels, data)
        }
        FileFormat::Png => {
            let img = open_png(path)?;
            let (w, h) = (img.width() as usize, img.height() as usize);
            let (channels, data): (usize, Vec<f64>) = match img {
                DynamicImage::ImageLuma8(b) => (1, b.into_raw().iter().map(|&v| v as f64 / 255.0).collect()),
                DynamicImage::ImageLuma16(b) => (1, b.into_raw().iter().map(|&v| v as f64 / 65535.0).collect()),
                DynamicImage::ImageRgb8(b) => (3, b.into_raw().iter().map(|&v| v as f64 / 255.0).collect()),
                DynamicImage::ImageRgb16(b) => (3, b.into_raw().iter().map(|&v| v as f64 / 65535.0).collect()),
                DynamicImage::ImageLumaA8(_) | DynamicImage::ImageRgba8(_) => {
                    let rgb = img.to_rgb8();
                    (3, rgb.into_raw().iter().map(|&v| v as f64 / 255.0).collect())
                }
                DynamicImage::ImageLumaA16(_) | DynamicImage::ImageRgba16(_) => {
                    let rgb = img.to_rgb16();
                    (3, rgb.into_raw().iter().map(|&v| v as f64 / 65535.0).collect())
                }
                _ => return Err(Error::format(path, "unsupported PNG sample layout")),
            };
            Raster::new(h, w, channels, data)
        }
    }
}

/// Saves an image. PNG output is 16-bit with samples clamped to `[0, 1]`.
pub fn save_raster(raster: &Raster, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let (h, w) = raster.dims();
    match FileFormat::from_path(path)? {
        FileFormat::Pfm => store_pfm(
            path,
            &PfmImage {
                width: w,
                height: h,
                channels: raster.channels(),
                data: raster.data().iter().map(|&v| v as f32).collect(),
            },
        ),
        FileFormat::Png => {
            let samples: Vec<u16> = raster.data().iter().map(|&v| quantize16(v)).collect();
            let (w32, h32) = (w as u32, h as u32);
            let result = if raster.channels() == 1 {
                ImageBuffer::<Luma<u16>, _>::from_raw(w32, h32, samples)
                    .expect("buffer length matches")
                    .save_with_format(path, ImageFormat::Png)
            } else {
                ImageBuffer::<Rgb<u16>, _>::from_raw(w32, h32, samples)
                    .expect("buffer length matches")
                    .save_with_format(path, ImageFormat::Png)
            };
            result.map_err(|e| image_error(path, e))
        }
    }
}

/// Saves an image as 8-bit PNG.
pub fn save_raster_png8(raster: &Raster, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let (h, w) = raster.dims();
    let samples: Vec<u8> = raster
        .data()
        .iter()
        .map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
        .collect();
    let color = if raster.channels() == 1 {
        image::ExtendedColorType::L8
    } else {
        image::ExtendedColorType::Rgb8
    };
    image::save_buffer_with_format(path, &samples, w as u32, h as u32, color, ImageFormat::Png)
        .map_err(|e| image_error(path, e))
}

/// Loads a scalar map (depth in mm, defocus in px).
///
/// PNG maps must be single-channel; each stored integer is multiplied by
/// `unit_scale` and 0 marks an invalid pixel. PFM maps hold values directly
/// and NaN marks an invalid pixel. Non-finite or nonpositive values are
/// loaded as invalid in either format.
pub fn load_map<M: MaskedMap>(path: impl AsRef<Path>, unit_scale: f64) -> Result<M> {
    let path = path.as_ref();
    let (h, w, raw): (usize, usize, Vec<f64>) = match FileFormat::from_path(path)? {
        FileFormat::Pfm => {
            let img = open_pfm(path)?;
            if img.channels != 1 {
                return Err(Error::format(path, "map files must have one channel"));
            }
            (img.height, img.width, img.data.iter().map(|&v| v as f64).collect())
        }
        FileFormat::Png => {
            let img = open_png(path)?;
            let (w, h) = (img.width() as usize, img.height() as usize);
            let ints: Vec<f64> = match img {
                DynamicImage::ImageLuma16(b) => b.into_raw().iter().map(|&v| v as f64).collect(),
                DynamicImage::ImageLuma8(b) => b.into_raw().iter().map(|&v| v as f64).collect(),
                _ => return Err(Error::format(path, "map PNGs must be single-channel")),
            };
            (h, w, ints.into_iter().map(|v| v * unit_scale).collect())
        }
    };
    let valid = raw.iter().map(|v| v.is_finite() && *v > 0.0).collect();
    M::new(h, w, raw, valid)
}

/// Defocus maps carry meaningful zeros, so unlike [`load_map`] only
/// non-finite (NaN) samples are treated as invalid.
pub fn load_defocus(path: impl AsRef<Path>) -> Result<crate::map::DefocusMap> {
    let path = path.as_ref();
    if FileFormat::from_path(path)? != FileFormat::Pfm {
        return Err(Error::format(path, "defocus maps are stored as .pfm"));
    }
    let img = open_pfm(path)?;
    if img.channels != 1 {
        return Err(Error::format(path, "map files must have one channel"));
    }
    let raw: Vec<f64> = img.data.iter().map(|&v| v as f64).collect();
    let valid = raw.iter().map(|v| v.is_finite()).collect();
    crate::map::DefocusMap::new(img.height, img.width, raw, valid)
}

/// Saves a scalar map; see [`load_map`] for the encodings.
pub fn save_map<M: MaskedMap>(map: &M, path: impl AsRef<Path>, unit_scale: f64) -> Result<()> {
    let path = path.as_ref();
    let (h, w) = map.dims();
    match FileFormat::from_path(path)? {
        FileFormat::Pfm => {
            let data = map
                .values()
                .iter()
                .zip(map.valid())
                .map(|(&v, &ok)| if ok { v as f32 } else { f32::NAN })
                .collect();
            store_pfm(
                path,
                &PfmImage {
                    width: w,
                    height: h,
                    channels: 1,
                    data,
                },
            )
        }
        FileFormat::Png => {
            if !(unit_scale.is_finite() && unit_scale > 0.0) {
                return Err(Error::domain(format!("unit scale must be positive, got {unit_scale}")));
            }
            let mut ints = Vec::with_capacity(map.len());
            for (i, (&v, &ok)) in map.values().iter().zip(map.valid()).enumerate() {
                if !ok {
                    ints.push(0u16);
                    continue;
                }
                let q = (v / unit_scale).round();
                if !(1.0..=65535.0).contains(&q) {
                    return Err(Error::data(format!(
                        "value {v} at row {}, col {} does not fit a 16-bit PNG at unit scale {unit_scale}",
                        i / w,
                        i % w
                    )));
                }
                ints.push(q as u16);
            }
            ImageBuffer::<Luma<u16>, _>::from_raw(w as u32, h as u32, ints)
                .expect("buffer length matches")
                .save_with_format(path, ImageFormat::Png)
                .map_err(|e| image_error(path, e))
        }
    }
}

/// Loads a mask from a PNG; nonzero pixels are set.
pub fn load_mask(path: impl AsRef<Path>) -> Result<Mask> {
    let path = path.as_ref();
    if FileFormat::from_path(path)? != FileFormat::Png {
        return Err(Error::format(path, "masks are stored as .png"));
    }
    let img = open_png(path)?.to_luma16();
    let (w, h) = img.dimensions();
    Mask::new(h as usize, w as usize, img.into_raw().iter().map(|&v| v != 0).collect())
}

/// Saves a mask as an 8-bit PNG (255 = set).
pub fn save_mask(mask: &Mask, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let samples: Vec<u8> = mask.bits().iter().map(|&b| if b { 255 } else { 0 }).collect();
    image::save_buffer_with_format(
        path,
        &samples,
        mask.width() as u32,
        mask.height() as u32,
        image::ExtendedColorType::L8,
        ImageFormat::Png,
    )
    .map_err(|e| image_error(path, e))
}
