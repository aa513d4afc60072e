use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use defocus_core::dataset::{
    self, generate_scene, load_defocus, load_depth, load_mask, load_raster, save_depth, save_map,
    save_mask, save_raster, validate_scene, FileFormat, SceneManifest, SceneOptions, MANIFEST_FILE,
};
use defocus_core::metrics::{self, DEFOCUS_LOG_FLOOR};
use defocus_core::optics::defocus_map_from_depth;
use defocus_core::render::{check_focus_depths, render_focused};
use defocus_core::stack::{compose_all_in_focus, detect_invalid, refine_depth};
use defocus_core::{DefocusMap, DepthMap, FocusSetting, FocusStack, MaskedMap, MetricReport};
use serde::{Deserialize, Serialize};

use crate::args::{
    ComposeCmd, DefocusCmd, EvalCmd, GenSceneCmd, ImageFormatArg, MapKind, RefineCmd, RenderCmd,
    ReportFormat, StackCmd,
};
use crate::failure::Failure;
use crate::synth;

pub const STACK_INDEX: &str = "stack.json";
const STACK_SCHEMA_VERSION: u32 = 1;

/// Index written next to the members of a rendered stack.
#[derive(Debug, Serialize, Deserialize)]
struct StackIndex {
    schema_version: u32,
    members: Vec<StackMember>,
}

#[derive(Debug, Serialize, Deserialize)]
struct StackMember {
    path: String,
    focus_depth_mm: f64,
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::io(path, e))
}

fn create_dir(path: &Path) -> Result<(), Failure> {
    fs::create_dir_all(path).map_err(|e| Failure::io(path, e))
}

pub fn render(cmd: &RenderCmd) -> Result<(), Failure> {
    let lens = cmd.lens.lens()?;
    let aif = load_raster(&cmd.aif)?;
    let depth = load_depth(&cmd.depth.depth, cmd.depth.unit_scale)?;
    let setting = FocusSetting::at_depth(cmd.focus_mm);
    let out = render_focused(&aif, &depth, &setting, &lens, &cmd.render.options())?;
    save_raster(&out, &cmd.out)?;
    Ok(())
}

pub fn stack(cmd: &StackCmd) -> Result<(), Failure> {
    let lens = cmd.lens.lens()?;
    let opts = cmd.render.options();
    if cmd.focus.focus_count == 0 {
        return Err(Failure::usage("--focus-count must be at least 1"));
    }
    let depths = cmd.focus.depths();
    let aif = load_raster(&cmd.aif)?;
    let depth = load_depth(&cmd.depth.depth, cmd.depth.unit_scale)?;
    // Validate the whole range before writing anything.
    check_focus_depths(&depths, &lens)?;
    opts.validate()?;

    create_dir(&cmd.out_dir)?;
    let ext = match cmd.format {
        ImageFormatArg::Png => "png",
        ImageFormatArg::Pfm => "pfm",
    };
    let mut members = Vec::with_capacity(depths.len());
    for (t, &f) in depths.iter().enumerate() {
        let img = render_focused(&aif, &depth, &FocusSetting::at_depth(f), &lens, &opts)?;
        let name = format!("{t:03}_img.{ext}");
        save_raster(&img, cmd.out_dir.join(&name))?;
        members.push(StackMember {
            path: name,
            focus_depth_mm: f,
        });
    }
    let index = StackIndex {
        schema_version: STACK_SCHEMA_VERSION,
        members,
    };
    let json = serde_json::to_string_pretty(&index).expect("stack index serializes");
    write_text(&cmd.out_dir.join(STACK_INDEX), &(json + "\n"))
}

/// Member paths and focus depths of a stack directory or a scene.
fn stack_members(dir: &Path) -> Result<Vec<(PathBuf, f64)>, Failure> {
    let index_path = dir.join(STACK_INDEX);
    if index_path.exists() {
        let text = fs::read_to_string(&index_path).map_err(|e| Failure::io(&index_path, e))?;
        let index: StackIndex = serde_json::from_str(&text)
            .map_err(|e| Failure::data(format!("{}: {e}", index_path.display())))?;
        if index.schema_version != STACK_SCHEMA_VERSION {
            return Err(Failure::data(format!(
                "{}: unsupported schema_version {}",
                index_path.display(),
                index.schema_version
            )));
        }
        return Ok(index
            .members
            .into_iter()
            .map(|m| (dir.join(m.path), m.focus_depth_mm))
            .collect());
    }
    let manifest_path = dir.join(MANIFEST_FILE);
    if manifest_path.exists() {
        let manifest = SceneManifest::load(&manifest_path)?;
        return Ok(manifest
            .shots
            .into_iter()
            .map(|s| (dir.join(s.focused_image_path), s.focus_depth_mm))
            .collect());
    }
    Err(Failure::io_msg(
        dir,
        format!("neither {STACK_INDEX} nor {MANIFEST_FILE} found"),
    ))
}

pub fn compose(cmd: &ComposeCmd) -> Result<(), Failure> {
    let entries = stack_members(&cmd.stack_dir)?;
    let mut members = Vec::with_capacity(entries.len());
    let mut depths = Vec::with_capacity(entries.len());
    for (path, f) in entries {
        members.push(load_raster(&path)?);
        depths.push(f);
    }
    let stack = FocusStack::new(members, depths)?;
    let (aif, depth) = compose_all_in_focus(&stack, cmd.window)?;
    save_raster(&aif, &cmd.out_aif)?;
    save_depth(&depth, &cmd.out_depth, cmd.unit_scale)?;
    Ok(())
}

pub fn refine(cmd: &RefineCmd) -> Result<(), Failure> {
    let primary = load_depth(&cmd.depth.depth, cmd.depth.unit_scale)?;
    let fill = load_depth(&cmd.fill, cmd.depth.unit_scale)?;
    let mask = match &cmd.mask {
        Some(p) => load_mask(p)?,
        None => detect_invalid(&primary),
    };
    let refined = refine_depth(&primary, &mask, &fill)?;
    if let Some(p) = &cmd.out_mask {
        save_mask(&mask, p)?;
    }
    save_depth(&refined, &cmd.out, cmd.depth.unit_scale)?;
    Ok(())
}

pub fn defocus(cmd: &DefocusCmd) -> Result<(), Failure> {
    let lens = cmd.lens.lens()?;
    let depth = load_depth(&cmd.depth.depth, cmd.depth.unit_scale)?;
    let map = defocus_map_from_depth(&depth, &FocusSetting::at_depth(cmd.focus_mm), &lens)?;
    save_map(&map, &cmd.out, 1.0)?;
    Ok(())
}

fn load_defocus_any(path: &Path, unit_scale: f64) -> Result<DefocusMap, Failure> {
    Ok(match FileFormat::from_path(path)? {
        FileFormat::Pfm => load_defocus(path)?,
        FileFormat::Png => dataset::load_map(path, unit_scale)?,
    })
}

fn floored<M: MaskedMap>(m: &M) -> M {
    let values = m.values().iter().map(|v| v.max(DEFOCUS_LOG_FLOOR)).collect();
    M::new(m.height(), m.width(), values, m.valid().to_vec()).expect("same shape as input")
}

fn eval_report(cmd: &EvalCmd) -> Result<MetricReport, Failure> {
    Ok(match cmd.kind {
        MapKind::Depth => {
            let pred = load_depth(&cmd.pred, cmd.unit_scale)?;
            let gt = load_depth(&cmd.gt, cmd.unit_scale)?;
            if cmd.normalize {
                // the minimum maps to zero, so floor it like a defocus value
                let pred: DepthMap = floored(&metrics::normalize_map(&pred));
                let gt: DepthMap = floored(&metrics::normalize_map(&gt));
                metrics::depth_metrics(&pred, &gt)?
            } else {
                metrics::depth_metrics(&pred, &gt)?
            }
        }
        MapKind::Defocus => {
            let pred = load_defocus_any(&cmd.pred, cmd.unit_scale)?;
            let gt = load_defocus_any(&cmd.gt, cmd.unit_scale)?;
            if cmd.normalize {
                metrics::defocus_metrics(&metrics::normalize_map(&pred), &metrics::normalize_map(&gt))?
            } else {
                metrics::defocus_metrics(&pred, &gt)?
            }
        }
    })
}

pub fn eval(cmd: &EvalCmd) -> Result<(), Failure> {
    let report = eval_report(cmd)?;
    let text = match cmd.format {
        ReportFormat::Csv if cmd.header => {
            format!("{}\n{}\n", MetricReport::csv_header(), report.to_csv_row())
        }
        ReportFormat::Csv => format!("{}\n", report.to_csv_row()),
        ReportFormat::Kv => report.to_kv(),
    };
    match &cmd.out {
        Some(p) => write_text(p, &text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Failure::io(Path::new("<stdout>"), e))
        }
    }
}

pub fn gen_scene(cmd: &GenSceneCmd) -> Result<(), Failure> {
    let lens = cmd.lens.lens()?;
    if cmd.focus.focus_count == 0 {
        return Err(Failure::usage("--focus-count must be at least 1"));
    }
    let (aif, depth) = match (&cmd.aif, &cmd.depth) {
        (Some(a), Some(d)) => (load_raster(a)?, load_depth(d, cmd.unit_scale)?),
        _ => {
            if cmd.width == 0 || cmd.height == 0 {
                return Err(Failure::usage("--width and --height must be positive"));
            }
            (
                synth::texture(cmd.height, cmd.width, cmd.seed),
                synth::two_plane_depth(cmd.height, cmd.width, cmd.near_mm, cmd.far_mm)?,
            )
        }
    };
    let opts = SceneOptions {
        scene_id: cmd.scene_id.clone(),
        render: cmd.render.options(),
    };
    let manifest = generate_scene(&aif, &depth, &lens, &cmd.focus.depths(), &cmd.out_dir, &opts)?;
    let report = validate_scene(&manifest, &cmd.out_dir);
    for finding in &report.findings {
        eprintln!("finding: {finding}");
    }
    if !report.is_clean() {
        return Err(Failure::data(format!(
            "scene {} failed validation with {} finding(s)",
            manifest.scene_id,
            report.findings.len()
        )));
    }
    println!(
        "scene {}: {} shots, 0 findings",
        manifest.scene_id,
        manifest.shots.len()
    );
    Ok(())
}
