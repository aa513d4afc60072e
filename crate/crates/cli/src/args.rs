use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use defocus_core::stack::DEFAULT_FOCUS_WINDOW;
use defocus_core::{LensConfig, RenderOptions};

#[derive(Debug, Parser)]
#[command(name = "defocus", version, about = "Defocus rendering, shape from focus and depth/defocus evaluation")]
pub struct Cli {
    /// Worker threads (0 = one per core). Output does not depend on this.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    /// Echo the fully resolved configuration to stderr.
    #[arg(long, global = true)]
    pub verbose: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render one focused image from an all-in-focus image and a depth map.
    Render(RenderCmd),
    /// Render a focus stack over evenly spaced focus depths.
    Stack(StackCmd),
    /// Composite a stack into an all-in-focus image and a shape-from-focus depth map.
    Compose(ComposeCmd),
    /// Fill invalid depth pixels from a second depth map.
    Refine(RefineCmd),
    /// Compute the ground-truth defocus (CoC) map for a focus depth.
    Defocus(DefocusCmd),
    /// Compare a predicted map against ground truth.
    Eval(EvalCmd),
    /// Generate and validate an on-disk scene.
    GenScene(GenSceneCmd),
}

#[derive(Debug, Clone, Args)]
pub struct LensArgs {
    /// Focal length in millimeters.
    #[arg(long, default_value_t = 50.0)]
    pub focal_mm: f64,

    /// Aperture f-number.
    #[arg(long, default_value_t = 1.4)]
    pub f_number: f64,

    /// Calibrated CoC scale (aperture over pixel footprint); 800 when no
    /// sensor geometry is given.
    #[arg(long, conflicts_with_all = ["pixel_mm", "output_scale"])]
    pub coc_scale: Option<f64>,

    /// Pixel pitch in millimeters; derives the CoC scale with --output-scale.
    #[arg(long, requires = "output_scale")]
    pub pixel_mm: Option<f64>,

    /// Output scale of the camera; used with --pixel-mm.
    #[arg(long, requires = "pixel_mm")]
    pub output_scale: Option<f64>,
}

pub const DEFAULT_COC_SCALE: f64 = 800.0;

impl LensArgs {
    pub fn lens(&self) -> defocus_core::Result<LensConfig> {
        match (self.pixel_mm, self.output_scale) {
            (Some(p), Some(s)) => LensConfig::from_sensor(self.focal_mm, self.f_number, p, s),
            _ => LensConfig::with_coc_scale(
                self.focal_mm,
                self.f_number,
                self.coc_scale.unwrap_or(DEFAULT_COC_SCALE),
            ),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct RenderArgs {
    /// Kernel half-width in sigmas.
    #[arg(long, default_value_t = 3.0)]
    pub truncation_sigmas: f64,

    /// Kernel half-width cap in pixels.
    #[arg(long, default_value_t = 64)]
    pub max_kernel_radius: usize,

    /// Sigmas below this are not blurred.
    #[arg(long, default_value_t = 0.25)]
    pub min_sigma: f64,

    /// Gaussian sigma per pixel of CoC diameter.
    #[arg(long, default_value_t = 1.0)]
    pub coc_to_sigma: f64,
}

impl RenderArgs {
    pub fn options(&self) -> RenderOptions {
        RenderOptions {
            truncation_sigmas: self.truncation_sigmas,
            max_kernel_radius_px: self.max_kernel_radius,
            min_sigma_px: self.min_sigma,
            coc_to_sigma: self.coc_to_sigma,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct DepthInput {
    /// Depth map (.pfm in mm, or 16-bit .png scaled by --unit-scale).
    #[arg(long)]
    pub depth: PathBuf,

    /// Millimeters per stored integer in PNG depth maps.
    #[arg(long, default_value_t = 1.0)]
    pub unit_scale: f64,
}

#[derive(Debug, Clone, Args)]
pub struct FocusRange {
    #[arg(long)]
    pub focus_min: f64,

    #[arg(long)]
    pub focus_max: f64,

    #[arg(long, default_value_t = 200)]
    pub focus_count: usize,
}

impl FocusRange {
    /// Evenly spaced depths from `focus_min` to `focus_max` inclusive.
    pub fn depths(&self) -> Vec<f64> {
        match self.focus_count {
            0 => Vec::new(),
            1 => vec![self.focus_min],
            n => {
                let step = (self.focus_max - self.focus_min) / (n - 1) as f64;
                (0..n)
                    .map(|t| if t == n - 1 { self.focus_max } else { self.focus_min + step * t as f64 })
                    .collect()
            }
        }
    }
}

#[derive(Debug, Args)]
pub struct RenderCmd {
    /// All-in-focus image (.png or .pfm).
    #[arg(long)]
    pub aif: PathBuf,
    #[command(flatten)]
    pub depth: DepthInput,
    /// Focus depth in millimeters.
    #[arg(long)]
    pub focus_mm: f64,
    /// Output image (.png or .pfm).
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub lens: LensArgs,
    #[command(flatten)]
    pub render: RenderArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ImageFormatArg {
    Png,
    Pfm,
}

#[derive(Debug, Args)]
pub struct StackCmd {
    #[arg(long)]
    pub aif: PathBuf,
    #[command(flatten)]
    pub depth: DepthInput,
    #[command(flatten)]
    pub focus: FocusRange,
    /// Directory receiving the members and `stack.json`.
    #[arg(long)]
    pub out_dir: PathBuf,
    /// File format of the stack members.
    #[arg(long, value_enum, default_value_t = ImageFormatArg::Png)]
    pub format: ImageFormatArg,
    #[command(flatten)]
    pub lens: LensArgs,
    #[command(flatten)]
    pub render: RenderArgs,
}

#[derive(Debug, Args)]
pub struct ComposeCmd {
    /// Directory holding `stack.json` (or a scene `manifest.json`).
    #[arg(long)]
    pub stack_dir: PathBuf,
    /// Odd side length of the focus-measure window.
    #[arg(long, default_value_t = DEFAULT_FOCUS_WINDOW)]
    pub window: usize,
    #[arg(long)]
    pub out_aif: PathBuf,
    #[arg(long)]
    pub out_depth: PathBuf,
    /// Millimeters per stored integer when --out-depth is a PNG.
    #[arg(long, default_value_t = 1.0)]
    pub unit_scale: f64,
}

#[derive(Debug, Args)]
pub struct RefineCmd {
    #[command(flatten)]
    pub depth: DepthInput,
    /// Depth map supplying values at masked pixels.
    #[arg(long)]
    pub fill: PathBuf,
    /// Mask PNG (nonzero = replace). Detected from the depth map when absent.
    #[arg(long)]
    pub mask: Option<PathBuf>,
    /// Also write the mask that was used.
    #[arg(long)]
    pub out_mask: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DefocusCmd {
    #[command(flatten)]
    pub depth: DepthInput,
    #[arg(long)]
    pub focus_mm: f64,
    /// Output defocus map (.pfm).
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub lens: LensArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MapKind {
    Depth,
    Defocus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Csv,
    Kv,
}

#[derive(Debug, Args)]
pub struct EvalCmd {
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub gt: PathBuf,
    #[arg(long, value_enum, default_value_t = MapKind::Depth)]
    pub kind: MapKind,
    /// Min-max normalize both maps before comparing.
    #[arg(long)]
    pub normalize: bool,
    #[arg(long, value_enum, default_value_t = ReportFormat::Csv)]
    pub format: ReportFormat,
    /// Print the CSV header line before the row.
    #[arg(long)]
    pub header: bool,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Millimeters per stored integer in PNG maps.
    #[arg(long, default_value_t = 1.0)]
    pub unit_scale: f64,
}

#[derive(Debug, Args)]
pub struct GenSceneCmd {
    #[arg(long, required_unless_present = "synthetic", requires = "depth")]
    pub aif: Option<PathBuf>,
    #[arg(long, requires = "aif")]
    pub depth: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    pub unit_scale: f64,
    /// Use a seeded random texture over a two-plane depth map instead of input files.
    #[arg(long, conflicts_with_all = ["aif", "depth"])]
    pub synthetic: bool,
    #[arg(long, default_value_t = 256)]
    pub width: usize,
    #[arg(long, default_value_t = 256)]
    pub height: usize,
    #[arg(long, default_value_t = 600.0)]
    pub near_mm: f64,
    #[arg(long, default_value_t = 900.0)]
    pub far_mm: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub focus: FocusRange,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value = "scene")]
    pub scene_id: String,
    #[command(flatten)]
    pub lens: LensArgs,
    #[command(flatten)]
    pub render: RenderArgs,
}
