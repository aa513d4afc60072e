use crate::error::{Error, Result};
use crate::map::MaskedMap;

/// Rec.601 luma weights.
pub const LUMA_WEIGHTS: [f64; 3] = [0.299, 0.587, 0.114];

/// Dense `height × width × channels` image, interleaved row-major, nominal
/// range `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<f64>,
}

impl Raster {
    pub fn new(height: usize, width: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::shape("nonzero dimensions", format!("{height}x{width}")));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::shape("1 or 3 channels", channels));
        }
        if data.len() != height * width * channels {
            return Err(Error::shape(height * width * channels, data.len()));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::data(format!("raster sample {i} is not finite")));
        }
        Ok(Raster {
            height,
            width,
            channels,
            data,
        })
    }

    pub fn filled(height: usize, width: usize, channels: usize, value: f64) -> Self {
        Raster::new(height, width, channels, vec![value; height * width * channels])
            .expect("filled raster has consistent shape")
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    /// The channel samples of pixel `(row, col)`.
    pub fn pixel(&self, row: usize, col: usize) -> &[f64] {
        let start = (row * self.width + col) * self.channels;
        &self.data[start..start + self.channels]
    }

    /// Single-channel copy; RGB is reduced with Rec.601 weights.
    pub fn to_luma(&self) -> Raster {
        if self.channels == 1 {
            return self.clone();
        }
        let data = self
            .data
            .chunks_exact(3)
            .map(|p| LUMA_WEIGHTS[0] * p[0] + LUMA_WEIGHTS[1] * p[1] + LUMA_WEIGHTS[2] * p[2])
            .collect();
        Raster {
            height: self.height,
            width: self.width,
            channels: 1,
            data,
        }
    }

    /// Reinterprets the valid values of a map as a single-channel raster;
    /// invalid pixels become 0.
    pub fn from_map<M: MaskedMap>(map: &M) -> Raster {
        let data = map
            .values()
            .iter()
            .zip(map.valid())
            .map(|(&v, &ok)| if ok { v } else { 0.0 })
            .collect();
        Raster {
            height: map.height(),
            width: map.width(),
            channels: 1,
            data,
        }
    }

    pub(crate) fn check_same_dims(&self, height: usize, width: usize) -> Result<()> {
        if (self.height, self.width) != (height, width) {
            return Err(Error::shape(
                format!("{height}x{width}"),
                format!("{}x{}", self.height, self.width),
            ));
        }
        Ok(())
    }
}
