//! Depth and defocus evaluation: the standard monocular-depth metric family,
//! SSIM, the training losses and min-max map normalization.

mod loss;
mod ssim;

pub use loss::{
    defocus_loss, depth_loss, loss_terms, physical_consistency, silog_term, total_loss,
    LossTerms, LossWeights, DEFOCUS_LOG_FLOOR,
};
pub use ssim::{ssim, ssim_masked, SSIM_SIGMA, SSIM_WINDOW};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::{DefocusMap, DepthMap, MaskedMap};

/// Threshold accuracies and error statistics, in the conventional column
/// order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub delta_1_05: f64,
    pub delta_1_15: f64,
    pub delta_1_25: f64,
    pub abs_rel: f64,
    pub sq_rel: f64,
    pub rmse: f64,
    pub rmse_log: f64,
    pub log10_err: f64,
}

impl MetricReport {
    pub const COLUMNS: [&'static str; 8] = [
        "delta_1_05",
        "delta_1_15",
        "delta_1_25",
        "abs_rel",
        "sq_rel",
        "rmse",
        "rmse_log",
        "log10_err",
    ];

    pub fn values(&self) -> [f64; 8] {
        [
            self.delta_1_05,
            self.delta_1_15,
            self.delta_1_25,
            self.abs_rel,
            self.sq_rel,
            self.rmse,
            self.rmse_log,
            self.log10_err,
        ]
    }

    pub fn csv_header() -> String {
        Self::COLUMNS.join(",")
    }

    /// Comma-separated values using the shortest round-tripping decimal form.
    pub fn to_csv_row(&self) -> String {
        self.values()
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }

    /// One `key=value` line per metric.
    pub fn to_kv(&self) -> String {
        Self::COLUMNS
            .iter()
            .zip(self.values())
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }

    pub fn from_kv(text: &str) -> Result<Self> {
        let mut vals = [f64::NAN; 8];
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::data(format!("malformed metric line {line:?}")))?;
            let slot = Self::COLUMNS
                .iter()
                .position(|&c| c == key.trim())
                .ok_or_else(|| Error::data(format!("unknown metric {key:?}")))?;
            vals[slot] = value
                .trim()
                .parse()
                .map_err(|_| Error::data(format!("bad value for {key}: {value:?}")))?;
        }
        if let Some(i) = vals.iter().position(|v| v.is_nan()) {
            return Err(Error::data(format!("missing metric {}", Self::COLUMNS[i])));
        }
        Ok(MetricReport {
            delta_1_05: vals[0],
            delta_1_15: vals[1],
            delta_1_25: vals[2],
            abs_rel: vals[3],
            sq_rel: vals[4],
            rmse: vals[5],
            rmse_log: vals[6],
            log10_err: vals[7],
        })
    }
}

/// Pixel pairs valid in both maps, in row-major order.
pub(crate) fn paired_values<'a, M: MaskedMap>(
    pred: &'a M,
    gt: &'a M,
) -> Result<impl Iterator<Item = (f64, f64)> + 'a> {
    pred.check_same_shape(gt)?;
    Ok(pred
        .values()
        .iter()
        .zip(gt.values())
        .zip(pred.valid().iter().zip(gt.valid()))
        .filter(|(_, (&a, &b))| a && b)
        .map(|((&p, &g), _)| (p, g)))
}

/// Metric family over the pixels valid in both maps.
pub fn compare_maps<M: MaskedMap>(pred: &M, gt: &M) -> Result<MetricReport> {
    let mut n = 0usize;
    let mut hits = [0usize; 3];
    let (mut abs_rel, mut sq_rel, mut sq, mut sq_log, mut log10) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (p, g) in paired_values(pred, gt)? {
        if !(p.is_finite() && p > 0.0 && g.is_finite() && g > 0.0) {
            return Err(Error::data(format!(
                "metrics need positive values, got prediction {p} against {g}"
            )));
        }
        n += 1;
        let ratio = (p / g).max(g / p);
        for (hit, t) in hits.iter_mut().zip([1.05, 1.15, 1.25]) {
            if ratio < t {
                *hit += 1;
            }
        }
        let diff = p - g;
        abs_rel += diff.abs() / g;
        sq_rel += diff * diff / g;
        sq += diff * diff;
        let dl = p.ln() - g.ln();
        sq_log += dl * dl;
        log10 += (p.log10() - g.log10()).abs();
    }
    if n == 0 {
        return Err(Error::data("no pixel is valid in both maps"));
    }
    let nf = n as f64;
    Ok(MetricReport {
        delta_1_05: hits[0] as f64 / nf,
        delta_1_15: hits[1] as f64 / nf,
        delta_1_25: hits[2] as f64 / nf,
        abs_rel: abs_rel / nf,
        sq_rel: sq_rel / nf,
        rmse: (sq / nf).sqrt(),
        rmse_log: (sq_log / nf).sqrt(),
        log10_err: log10 / nf,
    })
}

pub fn depth_metrics(pred: &DepthMap, gt: &DepthMap) -> Result<MetricReport> {
    compare_maps(pred, gt)
}

/// Metric family on defocus maps. Values are floored at
/// [`DEFOCUS_LOG_FLOOR`] first, since in-focus pixels are exactly zero.
pub fn defocus_metrics(pred: &DefocusMap, gt: &DefocusMap) -> Result<MetricReport> {
    compare_maps(&floor_map(pred, DEFOCUS_LOG_FLOOR)?, &floor_map(gt, DEFOCUS_LOG_FLOOR)?)
}

pub(crate) fn floor_map<M: MaskedMap>(m: &M, floor: f64) -> Result<M> {
    M::new(
        m.height(),
        m.width(),
        m.values().iter().map(|&v| v.max(floor)).collect(),
        m.valid().to_vec(),
    )
}

/// Min-max rescales the valid pixels to `[0, 1]`. Constant maps become all
/// zeros; invalid pixels are left untouched.
pub fn normalize_map<M: MaskedMap>(m: &M) -> M {
    let (lo, hi) = m
        .iter_valid()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, v)| {
            (lo.min(v), hi.max(v))
        });
    let span = hi - lo;
    let values = m
        .values()
        .iter()
        .zip(m.valid())
        .map(|(&v, &ok)| match ok {
            false => v,
            true if span > 0.0 => (v - lo) / span,
            true => 0.0,
        })
        .collect();
    M::new(m.height(), m.width(), values, m.valid().to_vec()).expect("same shape as input")
}
