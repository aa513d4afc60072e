//! On-disk scenes: an all-in-focus image, its depth map, and one rendered
//! focused image plus ground-truth defocus map per focus depth.
//!
//! ```text
//! <scene>/manifest.json
//! <scene>/aif.pfm
//! <scene>/depth.pfm
//! <scene>/shots/<t>_img.png
//! <scene>/shots/<t>_defocus.pfm
//! ```

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::io::{load_defocus, load_map, load_raster, save_map, save_raster, FileFormat};
use crate::error::{Error, Result};
use crate::map::{DefocusMap, DepthMap, MaskedMap};
use crate::optics::{coc_unchecked, defocus_map_from_depth, FocusSetting, LensConfig};
use crate::raster::Raster;
use crate::render::{check_focus_depths, render_focused, RenderOptions};

pub const SCHEMA_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";

/// Largest residual accepted between a stored defocus map and its
/// recomputation when both maps are stored as floats.
pub const FLOAT_CONSISTENCY_TOL_PX: f64 = 1e-9;
/// Same, when the depth map was quantized to integers.
pub const QUANTIZED_CONSISTENCY_TOL_PX: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Shot {
    pub focused_image_path: String,
    pub focus_depth_mm: f64,
    pub defocus_map_path: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneManifest {
    pub schema_version: u32,
    pub scene_id: String,
    pub lens: LensConfig,
    /// Paths are relative to the directory holding the manifest.
    pub depth_path: String,
    pub all_in_focus_path: String,
    /// Millimeters per stored integer, for PNG depth maps.
    pub depth_unit_scale: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub render: Option<RenderOptions>,
    pub shots: Vec<Shot>,
}

impl SceneManifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn focus_depths(&self) -> Vec<f64> {
        self.shots.iter().map(|s| s.focus_depth_mm).collect()
    }

    /// Structural checks that need no file access.
    pub fn check_invariants(&self) -> Vec<String> {
        let mut problems = Vec::new();
        if self.schema_version != SCHEMA_VERSION {
            problems.push(format!(
                "schema version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        if let Err(e) = self.lens.validate() {
            problems.push(e.to_string());
        }
        if !(self.depth_unit_scale.is_finite() && self.depth_unit_scale > 0.0) {
            problems.push(format!("depth unit scale {} is not positive", self.depth_unit_scale));
        }
        if let Err(e) = check_focus_depths(&self.focus_depths(), &self.lens) {
            problems.push(e.to_string());
        }
        problems
    }
}

#[derive(Debug, Clone)]
pub struct SceneOptions {
    pub scene_id: String,
    pub render: RenderOptions,
}

impl Default for SceneOptions {
    fn default() -> Self {
        SceneOptions {
            scene_id: "scene".into(),
            render: RenderOptions::default(),
        }
    }
}

fn round_to_f32(v: f64) -> f64 {
    v as f32 as f64
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

/// Renders and writes a full scene under `out_dir`.
///
/// Inputs are first rounded to the precision they are stored at, so the
/// files on disk are mutually consistent: reloading the depth map and
/// recomputing any defocus map reproduces the stored one.
pub fn generate_scene(
    all_in_focus: &Raster,
    depth: &DepthMap,
    lens: &LensConfig,
    focus_depths: &[f64],
    out_dir: impl AsRef<Path>,
    opts: &SceneOptions,
) -> Result<SceneManifest> {
    let out_dir = out_dir.as_ref();
    lens.validate()?;
    opts.render.validate()?;
    check_focus_depths(focus_depths, lens)?;
    all_in_focus.check_same_dims(depth.height(), depth.width())?;
    if let Some((i, d)) = depth
        .values()
        .iter()
        .zip(depth.valid())
        .enumerate()
        .find(|(_, (d, ok))| !(**ok && d.is_finite() && **d > 0.0))
        .map(|(i, (d, _))| (i, *d))
    {
        return Err(Error::data(format!(
            "depth at row {}, col {} is invalid ({d}); refine the depth map first",
            i / depth.width(),
            i % depth.width()
        )));
    }

    let stored_depth = DepthMap::from_values(
        depth.height(),
        depth.width(),
        depth.values().iter().map(|&d| round_to_f32(d)).collect(),
    )?;
    let stored_aif = Raster::new(
        all_in_focus.height(),
        all_in_focus.width(),
        all_in_focus.channels(),
        all_in_focus.data().iter().map(|&v| round_to_f32(v)).collect(),
    )?;

    create_dir(&out_dir.join("shots"))?;
    let manifest = SceneManifest {
        schema_version: SCHEMA_VERSION,
        scene_id: opts.scene_id.clone(),
        lens: *lens,
        depth_path: "depth.pfm".into(),
        all_in_focus_path: "aif.pfm".into(),
        depth_unit_scale: 1.0,
        render: Some(opts.render),
        shots: focus_depths
            .iter()
            .enumerate()
            .map(|(t, &f)| Shot {
                focused_image_path: format!("shots/{t:03}_img.png"),
                focus_depth_mm: f,
                defocus_map_path: format!("shots/{t:03}_defocus.pfm"),
            })
            .collect(),
    };
    save_raster(&stored_aif, out_dir.join(&manifest.all_in_focus_path))?;
    save_map(&stored_depth, out_dir.join(&manifest.depth_path), 1.0)?;

    manifest.shots.par_iter().try_for_each(|shot| -> Result<()> {
        let setting = FocusSetting::at_depth(shot.focus_depth_mm);
        let focused = render_focused(&stored_aif, &stored_depth, &setting, lens, &opts.render)?;
        save_raster(&focused, out_dir.join(&shot.focused_image_path))?;
        let defocus = defocus_map_from_depth(&stored_depth, &setting, lens)?;
        save_map(&defocus, out_dir.join(&shot.defocus_map_path), 1.0)
    })?;

    manifest.save(out_dir.join(MANIFEST_FILE))?;
    Ok(manifest)
}

/// One problem found while validating a scene.
#[derive(Debug, Clone, PartialEq)]
pub enum Finding {
    Manifest(String),
    Load { path: PathBuf, message: String },
    Shape { path: PathBuf, expected: (usize, usize), actual: (usize, usize) },
    Consistency { shot: usize, focus_depth_mm: f64, max_residual_px: f64, tolerance_px: f64 },
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finding::Manifest(msg) => write!(f, "manifest: {msg}"),
            Finding::Load { path, message } => write!(f, "load {}: {message}", path.display()),
            Finding::Shape { path, expected, actual } => write!(
                f,
                "shape {}: expected {}x{}, got {}x{}",
                path.display(),
                expected.0,
                expected.1,
                actual.0,
                actual.1
            ),
            Finding::Consistency {
                shot,
                focus_depth_mm,
                max_residual_px,
                tolerance_px,
            } => write!(
                f,
                "shot {shot} at {focus_depth_mm} mm: defocus residual {max_residual_px:e} px exceeds {tolerance_px:e} px"
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SceneReport {
    pub findings: Vec<Finding>,
}

impl SceneReport {
    pub fn is_clean(&self) -> bool {
        self.findings.is_empty()
    }
}

/// Checks a scene against its manifest: manifest invariants, that every
/// file loads with matching dimensions, and that each stored defocus map
/// equals the CoC map recomputed from the stored depth.
pub fn validate_scene(manifest: &SceneManifest, scene_dir: impl AsRef<Path>) -> SceneReport {
    let dir = scene_dir.as_ref();
    let mut findings: Vec<Finding> = manifest
        .check_invariants()
        .into_iter()
        .map(Finding::Manifest)
        .collect();
    let load_failed = |path: PathBuf, err: Error| Finding::Load {
        path,
        message: err.to_string(),
    };

    let depth_path = dir.join(&manifest.depth_path);
    let depth: Option<DepthMap> = match load_map(&depth_path, manifest.depth_unit_scale) {
        Ok(d) => Some(d),
        Err(e) => {
            findings.push(load_failed(depth_path.clone(), e));
            None
        }
    };
    let depth_quantized = matches!(FileFormat::from_path(&depth_path), Ok(FileFormat::Png));
    let dims = depth.as_ref().map(|d| d.dims());

    let check_dims = |path: &Path, actual: (usize, usize), findings: &mut Vec<Finding>| {
        if let Some(expected) = dims {
            if expected != actual {
                findings.push(Finding::Shape {
                    path: path.to_path_buf(),
                    expected,
                    actual,
                });
                return false;
            }
        }
        true
    };

    let aif_path = dir.join(&manifest.all_in_focus_path);
    match load_raster(&aif_path) {
        Ok(r) => {
            check_dims(&aif_path, r.dims(), &mut findings);
        }
        Err(e) => findings.push(load_failed(aif_path, e)),
    }

    let lens_ok = manifest.lens.validate().is_ok();
    for (t, shot) in manifest.shots.iter().enumerate() {
        let img_path = dir.join(&shot.focused_image_path);
        match load_raster(&img_path) {
            Ok(r) => {
                check_dims(&img_path, r.dims(), &mut findings);
            }
            Err(e) => findings.push(load_failed(img_path, e)),
        }
        let j_path = dir.join(&shot.defocus_map_path);
        let stored = match load_defocus(&j_path) {
            Ok(j) => j,
            Err(e) => {
                findings.push(load_failed(j_path, e));
                continue;
            }
        };
        if !check_dims(&j_path, stored.dims(), &mut findings) {
            continue;
        }
        let (Some(depth), true) = (&depth, lens_ok) else {
            continue;
        };
        let setting = FocusSetting::at_depth(shot.focus_depth_mm);
        if setting.validate(&manifest.lens).is_err() {
            continue;
        }
        let tolerance_px = if depth_quantized {
            QUANTIZED_CONSISTENCY_TOL_PX
        } else {
            FLOAT_CONSISTENCY_TOL_PX
        };
        let residual = defocus_residual(&stored, depth, &setting, &manifest.lens);
        if !(residual <= tolerance_px) {
            findings.push(Finding::Consistency {
                shot: t,
                focus_depth_mm: shot.focus_depth_mm,
                max_residual_px: residual,
                tolerance_px,
            });
        }
    }
    SceneReport { findings }
}

/// Largest absolute difference between a stored (`f32`) defocus map and the
/// CoC recomputed from `depth`, rounded to the same storage precision.
/// Pixels valid in only one of the two maps count as an infinite residual.
fn defocus_residual(
    stored: &DefocusMap,
    depth: &DepthMap,
    setting: &FocusSetting,
    lens: &LensConfig,
) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..depth.len() {
        let d_ok = depth.valid()[i];
        let j_ok = stored.valid()[i];
        if d_ok != j_ok {
            return f64::INFINITY;
        }
        if d_ok {
            let expected = round_to_f32(coc_unchecked(depth.values()[i], setting.focus_depth_mm, lens));
            worst = worst.max((stored.values()[i] - expected).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::MaskedMap;

    fn tiny_scene() -> (Raster, DepthMap) {
        let aif = Raster::new(6, 8, 3, (0..144).map(|i| (i % 17) as f64 / 16.0).collect()).unwrap();
        let depth = DepthMap::from_values(6, 8, (0..48).map(|i| if i % 8 < 4 { 600.0 } else { 900.0 }).collect())
            .unwrap();
        (aif, depth)
    }

    fn opts() -> SceneOptions {
        SceneOptions {
            scene_id: "tiny".into(),
            render: RenderOptions {
                max_kernel_radius_px: 4,
                ..Default::default()
            },
        }
    }

    #[test]
    fn two_shot_scene_layout() {
        let dir = tempfile::tempdir().unwrap();
        let (aif, depth) = tiny_scene();
        let lens = LensConfig::fast_50mm();
        let m = generate_scene(&aif, &depth, &lens, &[620.0, 880.0], dir.path(), &opts()).unwrap();
        assert_eq!(m.shots.len(), 2);
        let top: Vec<_> = fs::read_dir(dir.path()).unwrap().collect();
        let shots: Vec<_> = fs::read_dir(dir.path().join("shots")).unwrap().collect();
        // manifest, aif, depth, shots/
        assert_eq!(top.len(), 4);
        assert_eq!(shots.len(), 4);
        assert_eq!(SceneManifest::load(dir.path().join(MANIFEST_FILE)).unwrap(), m);
        assert!(validate_scene(&m, dir.path()).is_clean());
    }

    #[test]
    fn invalid_depth_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let (aif, depth) = tiny_scene();
        let (mut v, mut ok) = depth.into_parts();
        v[3] = 0.0;
        ok[3] = false;
        let holes = DepthMap::new(6, 8, v, ok).unwrap();
        let r = generate_scene(&aif, &holes, &LensConfig::fast_50mm(), &[700.0], dir.path(), &opts());
        assert!(matches!(r, Err(Error::Data(_))));
    }

    #[test]
    fn tampering_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let (aif, depth) = tiny_scene();
        let lens = LensConfig::fast_50mm();
        let mut m = generate_scene(&aif, &depth, &lens, &[620.0, 880.0], dir.path(), &opts()).unwrap();
        m.shots[1].focus_depth_mm += 10.0;
        let report = validate_scene(&m, dir.path());
        assert_eq!(report.findings.len(), 1, "{:?}", report.findings);
        assert!(matches!(report.findings[0], Finding::Consistency { shot: 1, .. }));

        m.shots[1].focus_depth_mm -= 10.0;
        fs::remove_file(dir.path().join(&m.shots[0].focused_image_path)).unwrap();
        let report = validate_scene(&m, dir.path());
        assert!(matches!(report.findings[..], [Finding::Load { .. }]));

        m.schema_version = 99;
        assert!(validate_scene(&m, dir.path())
            .findings
            .iter()
            .any(|f| matches!(f, Finding::Manifest(_))));
    }

    #[test]
    fn stored_defocus_is_consistent_with_stored_depth() {
        let dir = tempfile::tempdir().unwrap();
        let (aif, depth) = tiny_scene();
        let lens = LensConfig::fast_50mm();
        let m = generate_scene(&aif, &depth, &lens, &[700.0], dir.path(), &opts()).unwrap();
        let d: DepthMap = load_map(dir.path().join(&m.depth_path), 1.0).unwrap();
        let j = load_defocus(dir.path().join(&m.shots[0].defocus_map_path)).unwrap();
        let w = crate::metrics::LossWeights::default();
        let pc = crate::metrics::physical_consistency(&j, &d, &FocusSetting::at_depth(700.0), &lens, &w)
            .unwrap();
        // Only f32 storage rounding of the CoC values remains.
        let bound = j.values().iter().fold(0.0f64, |m, v| m.max(v.abs())) * f32::EPSILON as f64;
        assert!(pc <= bound, "{pc} > {bound}");
        assert!(j.values().iter().all(|v| *v >= 0.0));
        assert_eq!(j.len(), 48);
    }
}
