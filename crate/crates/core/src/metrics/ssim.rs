use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::raster::Raster;

/// Side of the Gaussian SSIM window.
pub const SSIM_WINDOW: usize = 11;
/// Standard deviation of the SSIM window.
pub const SSIM_SIGMA: f64 = 1.5;
const K1: f64 = 0.01;
const K2: f64 = 0.03;

/// Mean structural similarity of two single-channel rasters.
///
/// Local statistics use an 11×11 Gaussian window (σ = 1.5) renormalized
/// over the part of the window that lies inside the image, so every pixel
/// contributes a local index and images smaller than the window are fine.
pub fn ssim(a: &Raster, b: &Raster, dynamic_range: f64) -> Result<f64> {
    if a.channels() != 1 || b.channels() != 1 {
        return Err(Error::shape(
            "single-channel rasters",
            format!("{} and {} channels", a.channels(), b.channels()),
        ));
    }
    if a.dims() != b.dims() {
        return Err(Error::shape(
            format!("{}x{}", a.height(), a.width()),
            format!("{}x{}", b.height(), b.width()),
        ));
    }
    let valid = vec![true; a.data().len()];
    ssim_masked(a.data(), b.data(), &valid, a.height(), a.width(), dynamic_range)
}

/// SSIM restricted to `valid` pixels: masked pixels neither enter any local
/// window nor receive a local index of their own.
pub fn ssim_masked(
    a: &[f64],
    b: &[f64],
    valid: &[bool],
    height: usize,
    width: usize,
    dynamic_range: f64,
) -> Result<f64> {
    let n = height * width;
    if a.len() != n || b.len() != n || valid.len() != n {
        return Err(Error::shape(n, format!("{}, {}, {}", a.len(), b.len(), valid.len())));
    }
    if !(dynamic_range.is_finite() && dynamic_range > 0.0) {
        return Err(Error::domain(format!(
            "dynamic range must be positive, got {dynamic_range}"
        )));
    }
    let c1 = (K1 * dynamic_range).powi(2);
    let c2 = (K2 * dynamic_range).powi(2);
    let half = SSIM_WINDOW / 2;
    let taps: Vec<f64> = (0..SSIM_WINDOW)
        .map(|k| {
            let d = k as f64 - half as f64;
            (-(d * d) / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp()
        })
        .collect();
    let taps = taps.as_slice();

    let local: Vec<(f64, usize)> = (0..height)
        .into_par_iter()
        .map(|y| {
            let mut sum = 0.0;
            let mut count = 0;
            let rows = y.saturating_sub(half)..(y + half + 1).min(height);
            for x in 0..width {
                if !valid[y * width + x] {
                    continue;
                }
                let cols = x.saturating_sub(half)..(x + half + 1).min(width);
                let window = || {
                    let cols = cols.clone();
                    rows.clone().flat_map(move |yy| {
                        let wy = taps[yy + half - y];
                        cols.clone().filter_map(move |xx| {
                            let i = yy * width + xx;
                            valid[i].then(|| (wy * taps[xx + half - x], i))
                        })
                    })
                };
                let (mut wsum, mut sa, mut sb) = (0.0, 0.0, 0.0);
                for (w, i) in window() {
                    wsum += w;
                    sa += w * a[i];
                    sb += w * b[i];
                }
                let (mu_a, mu_b) = (sa / wsum, sb / wsum);
                let (mut va, mut vb, mut cov) = (0.0, 0.0, 0.0);
                for (w, i) in window() {
                    let (da, db) = (a[i] - mu_a, b[i] - mu_b);
                    va += w * (da * da);
                    vb += w * (db * db);
                    cov += w * (da * db);
                }
                let (va, vb, cov) = (va / wsum, vb / wsum, cov / wsum);
                let num = (2.0 * (mu_a * mu_b) + c1) * (2.0 * cov + c2);
                let den = (mu_a * mu_a + mu_b * mu_b + c1) * (va + vb + c2);
                sum += num / den;
                count += 1;
            }
            (sum, count)
        })
        .collect();

    let (total, count) = local
        .iter()
        .fold((0.0, 0), |(s, c), &(rs, rc)| (s + rs, c + rc));
    if count == 0 {
        return Err(Error::data("no valid pixel to compare"));
    }
    Ok(total / count as f64)
}
