//! Dense scalar maps with a validity mask.

use crate::error::{Error, Result};

/// Per-pixel boolean mask, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    height: usize,
    width: usize,
    bits: Vec<bool>,
}

impl Mask {
    pub fn new(height: usize, width: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != height * width {
            return Err(Error::shape(
                format!("{} mask entries", height * width),
                bits.len(),
            ));
        }
        Ok(Mask { height, width, bits })
    }

    pub fn empty(height: usize, width: usize) -> Self {
        Mask {
            height,
            width,
            bits: vec![false; height * width],
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.width + col]
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }
}

/// Behaviour shared by [`DepthMap`] and [`DefocusMap`].
pub trait MaskedMap: Sized {
    fn new(height: usize, width: usize, values: Vec<f64>, valid: Vec<bool>) -> Result<Self>;
    fn height(&self) -> usize;
    fn width(&self) -> usize;
    fn values(&self) -> &[f64];
    fn valid(&self) -> &[bool];

    fn len(&self) -> usize {
        self.values().len()
    }

    fn is_empty(&self) -> bool {
        self.values().is_empty()
    }

    fn dims(&self) -> (usize, usize) {
        (self.height(), self.width())
    }

    /// `(index, value)` of every valid pixel in row-major order.
    fn iter_valid(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values()
            .iter()
            .zip(self.valid())
            .enumerate()
            .filter(|(_, (_, &ok))| ok)
            .map(|(i, (&v, _))| (i, v))
    }

    fn fully_valid(&self) -> bool {
        self.valid().iter().all(|&b| b)
    }

    fn from_values(height: usize, width: usize, values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        Self::new(height, width, values, vec![true; n])
    }

    fn filled(height: usize, width: usize, value: f64) -> Self {
        Self::new(
            height,
            width,
            vec![value; height * width],
            vec![true; height * width],
        )
        .expect("filled map has consistent shape")
    }

    /// Errors unless both maps have the same dimensions.
    fn check_same_shape<M: MaskedMap>(&self, other: &M) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::shape(
                format!("{}x{}", self.height(), self.width()),
                format!("{}x{}", other.height(), other.width()),
            ));
        }
        Ok(())
    }
}

macro_rules! masked_map {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq)]
        pub struct $name {
            height: usize,
            width: usize,
            values: Vec<f64>,
            valid: Vec<bool>,
        }

        impl MaskedMap for $name {
            fn new(height: usize, width: usize, values: Vec<f64>, valid: Vec<bool>) -> Result<Self> {
                if height == 0 || width == 0 {
                    return Err(Error::shape("nonzero dimensions", format!("{height}x{width}")));
                }
                let n = height * width;
                if values.len() != n || valid.len() != n {
                    return Err(Error::shape(
                        format!("{n} values and mask entries"),
                        format!("{} values, {} mask entries", values.len(), valid.len()),
                    ));
                }
                Ok($name { height, width, values, valid })
            }

            fn height(&self) -> usize {
                self.height
            }

            fn width(&self) -> usize {
                self.width
            }

            fn values(&self) -> &[f64] {
                &self.values
            }

            fn valid(&self) -> &[bool] {
                &self.valid
            }
        }

        impl $name {
            pub fn new(height: usize, width: usize, values: Vec<f64>, valid: Vec<bool>) -> Result<Self> {
                <Self as MaskedMap>::new(height, width, values, valid)
            }

            pub fn from_values(height: usize, width: usize, values: Vec<f64>) -> Result<Self> {
                <Self as MaskedMap>::from_values(height, width, values)
            }

            pub fn filled(height: usize, width: usize, value: f64) -> Self {
                <Self as MaskedMap>::filled(height, width, value)
            }

            pub fn height(&self) -> usize {
                self.height
            }

            pub fn width(&self) -> usize {
                self.width
            }

            pub fn values(&self) -> &[f64] {
                &self.values
            }

            pub fn valid(&self) -> &[bool] {
                &self.valid
            }

            pub fn get(&self, row: usize, col: usize) -> Option<f64> {
                let i = row * self.width + col;
                self.valid[i].then(|| self.values[i])
            }

            pub fn into_parts(self) -> (Vec<f64>, Vec<bool>) {
                (self.values, self.valid)
            }
        }
    };
}

masked_map!(
    /// Scene depth in millimeters.
    DepthMap
);

masked_map!(
    /// Per-pixel CoC diameter in pixels.
    DefocusMap
);
