//! Scene-level file I/O, generation and validation.

mod io;
pub mod pfm;
mod scene;

pub use io::{
    load_defocus, load_map, load_mask, load_raster, save_map, save_mask, save_raster,
    save_raster_png8, FileFormat,
};
pub use scene::{
    generate_scene, validate_scene, Finding, SceneManifest, SceneOptions, SceneReport, Shot,
    FLOAT_CONSISTENCY_TOL_PX, MANIFEST_FILE, QUANTIZED_CONSISTENCY_TOL_PX, SCHEMA_VERSION,
};

use std::path::Path;

use crate::error::Result;
use crate::map::DepthMap;

/// Loads a depth map in millimeters; PNG integers are scaled by `unit_scale`.
pub fn load_depth(path: impl AsRef<Path>, unit_scale: f64) -> Result<DepthMap> {
    load_map(path, unit_scale)
}

/// Saves a depth map; PNG stores `round(mm / unit_scale)` with 0 as invalid.
pub fn save_depth(depth: &DepthMap, path: impl AsRef<Path>, unit_scale: f64) -> Result<()> {
    save_map(depth, path, unit_scale)
}
