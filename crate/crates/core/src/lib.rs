//! Defocus physics toolkit.
//!
//! The crate covers the whole loop between scene geometry and defocused
//! photographs:
//!
//! * [`optics`]: thin-lens focus geometry and circle-of-confusion (CoC) size.
//! * [`render`]: synthetic focused images by per-pixel Gaussian PSF splatting.
//! * [`stack`]: focus-stack analysis (all-in-focus compositing, shape from
//!   focus, depth refinement).
//! * [`metrics`]: depth/defocus evaluation metrics, SSIM and training losses.
//! * [`dataset`]: raster/depth I/O and on-disk scene generation/validation.
//!
//! Depths are millimeters and CoC diameters are pixels throughout.

// `!(x > 0.0)` style checks are used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dataset;
pub mod error;
pub mod map;
pub mod metrics;
pub mod optics;
pub mod raster;
pub mod render;
pub mod stack;

pub use error::{Error, Result};
pub use map::{DefocusMap, DepthMap, Mask, MaskedMap};
pub use metrics::{LossWeights, MetricReport};
pub use optics::{FocusSetting, LensConfig};
pub use raster::Raster;
pub use render::RenderOptions;
pub use stack::FocusStack;
