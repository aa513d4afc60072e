//! Training losses: SSIM plus scale-invariant log terms for depth and
//! defocus, and the depth/defocus physical-consistency residual.

use serde::{Deserialize, Serialize};

use super::ssim::ssim_masked;
use super::{floor_map, paired_values};
use crate::error::{Error, Result};
use crate::map::{DefocusMap, DepthMap, MaskedMap};
use crate::optics::{defocus_map_from_depth, FocusSetting, LensConfig};

/// Defocus values are clamped to at least this many pixels before any
/// logarithm; in-focus pixels have a CoC of exactly zero.
pub const DEFOCUS_LOG_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    /// Depth SSIM term.
    pub lambda1: f64,
    /// Depth scale-invariant log term.
    pub lambda2: f64,
    /// Defocus SSIM term.
    pub lambda3: f64,
    /// Defocus scale-invariant log term.
    pub lambda4: f64,
    /// Physical consistency.
    pub lambda5: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights {
            lambda1: 1.0,
            lambda2: 1.0,
            lambda3: 1.0,
            lambda4: 1.0,
            lambda5: 1.0,
        }
    }
}

impl LossWeights {
    pub fn validate(&self) -> Result<()> {
        let all = [self.lambda1, self.lambda2, self.lambda3, self.lambda4, self.lambda5];
        if let Some(l) = all.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
            return Err(Error::domain(format!("loss weights must be nonnegative, got {l}")));
        }
        Ok(())
    }
}

/// Scale-invariant log error: with `d = ln gt − ln pred` over the `N`
/// pixels valid in both maps, `(1/N)·Σd² − (1/(2N²))·(Σd)²`.
pub fn silog_term<M: MaskedMap>(pred: &M, gt: &M) -> Result<f64> {
    let (mut n, mut sum, mut sum_sq) = (0usize, 0.0, 0.0);
    for (p, g) in paired_values(pred, gt)? {
        if !(p > 0.0 && g > 0.0 && p.is_finite() && g.is_finite()) {
            return Err(Error::data(format!(
                "log loss needs positive values, got prediction {p} against {g}"
            )));
        }
        let d = g.ln() - p.ln();
        n += 1;
        sum += d;
        sum_sq += d * d;
    }
    if n == 0 {
        return Err(Error::data("no pixel is valid in both maps"));
    }
    let n = n as f64;
    Ok(sum_sq / n - sum * sum / (2.0 * n * n))
}

/// SSIM of two maps over their common valid pixels, with the dynamic range
/// taken as the largest valid magnitude in either map.
fn map_ssim<M: MaskedMap>(pred: &M, gt: &M) -> Result<f64> {
    pred.check_same_shape(gt)?;
    let valid: Vec<bool> = pred
        .valid()
        .iter()
        .zip(gt.valid())
        .map(|(&a, &b)| a && b)
        .collect();
    let peak = pred
        .values()
        .iter()
        .zip(gt.values())
        .zip(&valid)
        .filter(|(_, &ok)| ok)
        .fold(0.0f64, |m, ((p, g), _)| m.max(p.abs()).max(g.abs()));
    let range = if peak > 0.0 { peak } else { 1.0 };
    ssim_masked(pred.values(), gt.values(), &valid, pred.height(), pred.width(), range)
}

/// `λ1·(1 − SSIM)/2 + λ2·silog` on depth maps.
pub fn depth_loss(pred: &DepthMap, gt: &DepthMap, w: &LossWeights) -> Result<f64> {
    w.validate()?;
    let structural = (1.0 - map_ssim(pred, gt)?) / 2.0;
    Ok(w.lambda1 * structural + w.lambda2 * silog_term(pred, gt)?)
}

/// `λ3·(1 − SSIM)/2 + λ4·silog` on defocus maps; the log term sees values
/// floored at [`DEFOCUS_LOG_FLOOR`].
pub fn defocus_loss(pred: &DefocusMap, gt: &DefocusMap, w: &LossWeights) -> Result<f64> {
    w.validate()?;
    let structural = (1.0 - map_ssim(pred, gt)?) / 2.0;
    let log_term = silog_term(
        &floor_map(pred, DEFOCUS_LOG_FLOOR)?,
        &floor_map(gt, DEFOCUS_LOG_FLOOR)?,
    )?;
    Ok(w.lambda3 * structural + w.lambda4 * log_term)
}

/// `λ5·(1/N)·‖Ĵ − CoC(D̂)‖₂`, the Euclidean norm of the residual between the
/// predicted defocus map and the one implied by the predicted depth, divided
/// by the number `N` of pixels valid in both.
pub fn physical_consistency(
    defocus: &DefocusMap,
    depth: &DepthMap,
    setting: &FocusSetting,
    lens: &LensConfig,
    w: &LossWeights,
) -> Result<f64> {
    w.validate()?;
    defocus.check_same_shape(depth)?;
    let implied = defocus_map_from_depth(depth, setting, lens)?;
    let (mut n, mut sq) = (0usize, 0.0);
    for (j, k) in paired_values(defocus, &implied)? {
        let r = j - k;
        sq += r * r;
        n += 1;
    }
    if n == 0 {
        return Err(Error::data("no pixel is valid in both maps"));
    }
    Ok(w.lambda5 * sq.sqrt() / n as f64)
}

/// The three loss components and their sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossTerms {
    pub depth: f64,
    pub defocus: f64,
    pub physical: f64,
}

impl LossTerms {
    pub fn total(&self) -> f64 {
        self.depth + self.defocus + self.physical
    }
}

pub fn loss_terms(
    pred_depth: &DepthMap,
    gt_depth: &DepthMap,
    pred_defocus: &DefocusMap,
    gt_defocus: &DefocusMap,
    setting: &FocusSetting,
    lens: &LensConfig,
    w: &LossWeights,
) -> Result<LossTerms> {
    Ok(LossTerms {
        depth: depth_loss(pred_depth, gt_depth, w)?,
        defocus: defocus_loss(pred_defocus, gt_defocus, w)?,
        physical: physical_consistency(pred_defocus, pred_depth, setting, lens, w)?,
    })
}

/// Depth loss + defocus loss + physical consistency.
pub fn total_loss(
    pred_depth: &DepthMap,
    gt_depth: &DepthMap,
    pred_defocus: &DefocusMap,
    gt_defocus: &DefocusMap,
    setting: &FocusSetting,
    lens: &LensConfig,
    w: &LossWeights,
) -> Result<f64> {
    loss_terms(pred_depth, gt_depth, pred_defocus, gt_defocus, setting, lens, w).map(|t| t.total())
}
