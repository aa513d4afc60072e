//! Synthetic focused images by per-pixel Gaussian PSF splatting.
//!
//! Every source pixel spreads its intensity over a truncated isotropic
//! Gaussian whose width is the CoC at that pixel's depth. Destinations divide
//! the accumulated intensity by the accumulated weight, so constant images
//! are fixed points and energy lost off the image border is absorbed.
//! Contributions are summed regardless of depth order (no occlusion).
//!
//! Sources that share a kernel are splatted as one separable two-pass sum
//! when the group is large enough to pay for it; the rest are splatted one
//! by one. Output is bit-identical for any thread count: each destination
//! sums its individual contributions in row-major source order, then the
//! separable groups in kernel order, however rows are spread over workers.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::DepthMap;
use crate::optics::{coc_unchecked, FocusSetting, LensConfig};
use crate::raster::Raster;
use crate::stack::FocusStack;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenderOptions {
    /// Kernel half-width in units of sigma.
    pub truncation_sigmas: f64,
    /// Upper bound on the kernel half-width in pixels.
    pub max_kernel_radius_px: usize,
    /// Sigmas below this render as a unit delta (no blur).
    pub min_sigma_px: f64,
    /// Sigma per pixel of CoC diameter. 1.0 uses the diameter as sigma,
    /// 0.5 the radius.
    pub coc_to_sigma: f64,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            truncation_sigmas: 3.0,
            max_kernel_radius_px: 64,
            min_sigma_px: 0.25,
            coc_to_sigma: 1.0,
        }
    }
}

impl RenderOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.truncation_sigmas.is_finite() && self.truncation_sigmas >= 1.0) {
            return Err(Error::domain(format!(
                "truncation must be at least one sigma, got {}",
                self.truncation_sigmas
            )));
        }
        if self.max_kernel_radius_px < 1 {
            return Err(Error::domain("max kernel radius must be at least 1 px"));
        }
        if !(self.min_sigma_px.is_finite() && self.min_sigma_px >= 0.0) {
            return Err(Error::domain(format!(
                "min sigma must be nonnegative, got {}",
                self.min_sigma_px
            )));
        }
        if !(self.coc_to_sigma.is_finite() && self.coc_to_sigma > 0.0) {
            return Err(Error::domain(format!(
                "coc-to-sigma factor must be positive, got {}",
                self.coc_to_sigma
            )));
        }
        Ok(())
    }
}

/// Normalized 2-D isotropic Gaussian evaluated at offset `(dx, dy)`.
pub fn gaussian_weight(dx: f64, dy: f64, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::domain(format!("sigma must be positive, got {sigma}")));
    }
    let two_var = 2.0 * sigma * sigma;
    Ok((-(dx * dx + dy * dy) / two_var).exp() / (PI * two_var))
}

/// Half-width of the splat kernel for `sigma`; 0 means the pixel is copied
/// through unblurred.
pub fn kernel_radius(sigma: f64, opts: &RenderOptions) -> usize {
    if !(sigma >= opts.min_sigma_px) || sigma <= 0.0 {
        return 0;
    }
    let r = (opts.truncation_sigmas * sigma).ceil();
    if r >= opts.max_kernel_radius_px as f64 {
        opts.max_kernel_radius_px
    } else {
        r as usize
    }
}

/// Per-source kernel parameters.
#[derive(Clone, Copy)]
struct Splat {
    sigma: f64,
    radius: usize,
}

fn source_splats(
    depth: &DepthMap,
    setting: &FocusSetting,
    lens: &LensConfig,
    opts: &RenderOptions,
) -> Result<Vec<Splat>> {
    if let Some(i) = depth.valid().iter().position(|&ok| !ok) {
        return Err(Error::data(format!(
            "depth pixel at row {}, col {} is invalid; refine the depth map before rendering",
            i / depth.width(),
            i % depth.width()
        )));
    }
    if let Some(i) = depth.values().iter().position(|&d| !(d.is_finite() && d > 0.0)) {
        return Err(Error::data(format!(
            "depth at row {}, col {} is {}; depths must be positive",
            i / depth.width(),
            i % depth.width(),
            depth.values()[i]
        )));
    }
    let focus = setting.focus_depth_mm;
    Ok(depth
        .values()
        .par_iter()
        .map(|&d| {
            let sigma = coc_unchecked(d, focus, lens) * opts.coc_to_sigma;
            Splat {
                sigma,
                radius: kernel_radius(sigma, opts),
            }
        })
        .collect())
}

/// Renders the image seen when focused at `setting` from an all-in-focus
/// image and a fully valid depth map.
pub fn render_focused(
    all_in_focus: &Raster,
    depth: &DepthMap,
    setting: &FocusSetting,
    lens: &LensConfig,
    opts: &RenderOptions,
) -> Result<Raster> {
    opts.validate()?;
    lens.validate()?;
    setting.validate(lens)?;
    all_in_focus.check_same_dims(depth.height(), depth.width())?;
    let splats = source_splats(depth, setting, lens, opts)?;
    let data = match all_in_focus.channels() {
        1 => splat_image::<1>(all_in_focus, &splats, true),
        3 => splat_image::<3>(all_in_focus, &splats, true),
        c => unreachable!("raster with {c} channels"),
    };
    Raster::new(
        all_in_focus.height(),
        all_in_focus.width(),
        all_in_focus.channels(),
        data,
    )
}

fn splat_image<const C: usize>(image: &Raster, splats: &[Splat], separable: bool) -> Vec<f64> {
    let (height, width) = image.dims();
    let mut classes = separable_classes(splats, height, width);
    if !separable {
        classes.clear();
    }
    let mut deferred = vec![false; splats.len()];
    for members in classes.values() {
        for &s in members {
            deferred[s] = true;
        }
    }
    let reach = splats
        .iter()
        .zip(&deferred)
        .filter(|(_, &d)| !d)
        .map(|(s, _)| s.radius)
        .max()
        .unwrap_or(0);
    let threads = rayon::current_num_threads();
    // Band height only affects scheduling, never the summation order.
    let band = if threads <= 1 {
        height
    } else {
        height.div_ceil(4 * threads).max(16).min(height)
    };

    let mut accum = vec![0.0f64; height * width * C];
    let mut weight = vec![0.0f64; height * width];
    accum
        .par_chunks_mut(band * width * C)
        .zip(weight.par_chunks_mut(band * width))
        .enumerate()
        .for_each(|(b, (acc, wsum))| {
            let y0 = b * band;
            let y1 = y0 + wsum.len() / width;
            splat_band::<C>(image, splats, &deferred, reach, y0, y1, acc, wsum);
        });

    for (&(bits, radius), members) in &classes {
        splat_separable::<C>(image, f64::from_bits(bits), radius, members, &mut accum, &mut weight);
    }

    for (px, w) in accum.chunks_exact_mut(C).zip(&weight) {
        for v in px {
            *v /= *w;
        }
    }
    accum
}

/// Groups blurred sources by kernel and keeps the groups large enough that
/// two 1-D passes over the image beat splatting each member directly.
/// Keys are `(sigma bits, radius)`; sigma is nonnegative so the bit order
/// is the numeric order.
fn separable_classes(
    splats: &[Splat],
    height: usize,
    width: usize,
) -> BTreeMap<(u64, usize), Vec<usize>> {
    let mut classes: BTreeMap<(u64, usize), Vec<usize>> = BTreeMap::new();
    for (s, splat) in splats.iter().enumerate() {
        if splat.radius > 0 {
            classes.entry((splat.sigma.to_bits(), splat.radius)).or_default().push(s);
        }
    }
    classes.retain(|&(_, r), members| members.len() * (2 * r + 1) > 2 * height * width);
    classes
}

/// Adds the splats of `members`, which all share `sigma` and `radius`, as a
/// horizontal pass followed by a vertical pass. Each output element is
/// summed sequentially, so the result does not depend on the thread count.
fn splat_separable<const C: usize>(
    image: &Raster,
    sigma: f64,
    radius: usize,
    members: &[usize],
    acc: &mut [f64],
    wsum: &mut [f64],
) {
    let (height, width) = image.dims();
    let src = image.data();
    let two_var = 2.0 * sigma * sigma;
    let norm = 1.0 / (PI * two_var);
    let table: Vec<f64> = (0..=radius)
        .map(|d| {
            let d = d as f64;
            (-(d * d) / two_var).exp()
        })
        .collect();

    // Members per row; `members` is sorted, so each row stays in column order.
    let mut row_start = vec![0usize; height + 1];
    for &s in members {
        row_start[s / width + 1] += 1;
    }
    for y in 0..height {
        row_start[y + 1] += row_start[y];
    }

    // Horizontal pass: channels followed by the weight, per pixel.
    let stride = C + 1;
    let mut horiz = vec![0.0f64; height * width * stride];
    horiz
        .par_chunks_mut(width * stride)
        .enumerate()
        .for_each(|(y, row)| {
            for &s in &members[row_start[y]..row_start[y + 1]] {
                let sx = s % width;
                let value = &src[s * C..s * C + C];
                let lo = sx.saturating_sub(radius);
                let hi = (sx + radius).min(width - 1);
                for x in lo..=hi {
                    let w = table[x.abs_diff(sx)];
                    let out = &mut row[x * stride..x * stride + stride];
                    for c in 0..C {
                        out[c] += value[c] * w;
                    }
                    out[C] += w;
                }
            }
        });

    // Vertical pass into the shared accumulators.
    let occupied: Vec<bool> = (0..height).map(|y| row_start[y + 1] > row_start[y]).collect();
    acc.par_chunks_mut(width * C)
        .zip(wsum.par_chunks_mut(width))
        .enumerate()
        .for_each(|(y, (arow, wrow))| {
            let lo = y.saturating_sub(radius);
            let hi = (y + radius).min(height - 1);
            let mut col = vec![0.0f64; width * stride];
            let mut touched = false;
            for sy in lo..=hi {
                if !occupied[sy] {
                    continue;
                }
                touched = true;
                let wy = norm * table[y.abs_diff(sy)];
                let hrow = &horiz[sy * width * stride..(sy + 1) * width * stride];
                for (o, h) in col.iter_mut().zip(hrow) {
                    *o += wy * h;
                }
            }
            if !touched {
                return;
            }
            for x in 0..width {
                for c in 0..C {
                    arow[x * C + c] += col[x * stride + c];
                }
                wrow[x] += col[x * stride + C];
            }
        });
}

/// Accumulates every source whose kernel touches destination rows `y0..y1`.
#[allow(clippy::too_many_arguments)]
fn splat_band<const C: usize>(
    image: &Raster,
    splats: &[Splat],
    deferred: &[bool],
    reach: usize,
    y0: usize,
    y1: usize,
    acc: &mut [f64],
    wsum: &mut [f64],
) {
    let (height, width) = image.dims();
    let src = image.data();
    let mut table = Vec::with_capacity(reach + 1);
    for sy in y0.saturating_sub(reach)..(y1 + reach).min(height) {
        for sx in 0..width {
            let s = sy * width + sx;
            if deferred[s] {
                continue;
            }
            let Splat { sigma, radius: r } = splats[s];
            let value = &src[s * C..s * C + C];
            if r == 0 {
                if sy >= y0 && sy < y1 {
                    let d = (sy - y0) * width + sx;
                    for c in 0..C {
                        acc[d * C + c] += value[c];
                    }
                    wsum[d] += 1.0;
                }
                continue;
            }
            let lo_y = sy.saturating_sub(r).max(y0);
            let hi_y = (sy + r).min(y1 - 1);
            if lo_y > hi_y {
                continue;
            }
            let two_var = 2.0 * sigma * sigma;
            let norm = 1.0 / (PI * two_var);
            table.clear();
            table.extend((0..=r).map(|d| {
                let d = d as f64;
                (-(d * d) / two_var).exp()
            }));
            let lo_x = sx.saturating_sub(r);
            let hi_x = (sx + r).min(width - 1);
            for y in lo_y..=hi_y {
                let wy = norm * table[y.abs_diff(sy)];
                let row = (y - y0) * width;
                let wrow = &mut wsum[row + lo_x..=row + hi_x];
                let arow = &mut acc[(row + lo_x) * C..(row + hi_x + 1) * C];
                for (k, (w_out, a_out)) in wrow.iter_mut().zip(arow.chunks_exact_mut(C)).enumerate()
                {
                    let w = wy * table[(lo_x + k).abs_diff(sx)];
                    for c in 0..C {
                        a_out[c] += value[c] * w;
                    }
                    *w_out += w;
                }
            }
        }
    }
}

/// Renders one focused image per entry of `focus_depths`, in order.
pub fn render_stack(
    all_in_focus: &Raster,
    depth: &DepthMap,
    focus_depths: &[f64],
    lens: &LensConfig,
    opts: &RenderOptions,
) -> Result<FocusStack> {
    check_focus_depths(focus_depths, lens)?;
    let members = focus_depths
        .iter()
        .map(|&f| render_focused(all_in_focus, depth, &FocusSetting::at_depth(f), lens, opts))
        .collect::<Result<Vec<_>>>()?;
    FocusStack::new(members, focus_depths.to_vec())
}

/// Checks that focus depths are nonempty, strictly increasing and beyond
/// the focal length.
pub fn check_focus_depths(focus_depths: &[f64], lens: &LensConfig) -> Result<()> {
    if focus_depths.is_empty() {
        return Err(Error::domain("at least one focus depth is required"));
    }
    if let Some(&f) = focus_depths
        .iter()
        .find(|&&f| !(f.is_finite() && f > lens.focal_length_mm))
    {
        return Err(Error::domain(format!(
            "focus depth {f} mm must exceed the focal length {} mm",
            lens.focal_length_mm
        )));
    }
    if let Some(w) = focus_depths.windows(2).find(|w| !(w[1] > w[0])) {
        return Err(Error::domain(format!(
            "focus depths must be strictly increasing ({} then {})",
            w[0], w[1]
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn texture(h: usize, w: usize, c: usize, seed: u64) -> Raster {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Raster::new(h, w, c, (0..h * w * c).map(|_| rng.gen()).collect()).unwrap()
    }

    fn mean_abs_laplacian(r: &Raster) -> f64 {
        let (h, w) = r.dims();
        let l = r.to_luma();
        let v = |y: usize, x: usize| l.data()[y * w + x];
        let mut sum = 0.0;
        for y in 1..h - 1 {
            for x in 1..w - 1 {
                sum += (v(y - 1, x) + v(y + 1, x) + v(y, x - 1) + v(y, x + 1) - 4.0 * v(y, x)).abs();
            }
        }
        sum / ((h - 2) * (w - 2)) as f64
    }

    #[test]
    fn gaussian_weight_values() {
        let w0 = gaussian_weight(0.0, 0.0, 1.0).unwrap();
        assert!((w0 - 0.159_154_943_091_895_34).abs() < 1e-15);
        let ratio = gaussian_weight(3.0, 0.0, 1.0).unwrap() / w0;
        assert!((ratio - (-4.5f64).exp()).abs() < 1e-15);
        assert!((ratio - 0.011109).abs() < 1e-6);
        let a = gaussian_weight(1.5, -0.5, 2.0).unwrap();
        assert_eq!(a, gaussian_weight(-0.5, 1.5, 2.0).unwrap());
        assert_eq!(a, gaussian_weight(-1.5, 0.5, 2.0).unwrap());
        assert!(gaussian_weight(0.0, 0.0, 0.0).is_err());
        assert!(gaussian_weight(0.0, 0.0, -1.0).is_err());
    }

    #[test]
    fn kernel_radius_examples() {
        let o = RenderOptions::default();
        assert_eq!(kernel_radius(0.0, &o), 0);
        assert_eq!(kernel_radius(0.2, &o), 0);
        assert_eq!(kernel_radius(2.0, &o), 6);
        assert_eq!(kernel_radius(40.0, &o), 64);
        assert_eq!(kernel_radius(1e300, &o), 64);
        let o = RenderOptions { min_sigma_px: 0.0, ..o };
        assert_eq!(kernel_radius(0.0, &o), 0);
        assert_eq!(kernel_radius(0.1, &o), 1);
    }

    #[test]
    fn options_are_validated() {
        let bad = RenderOptions {
            truncation_sigmas: 0.5,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = RenderOptions {
            max_kernel_radius_px: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn in_focus_plane_is_identity() {
        let lens = LensConfig::fast_50mm();
        let img = texture(32, 40, 3, 1);
        let depth = DepthMap::filled(32, 40, 700.0);
        let out = render_focused(&img, &depth, &FocusSetting::at_depth(700.0), &lens, &Default::default())
            .unwrap();
        assert_eq!(out, img);
    }

    #[test]
    fn constant_image_is_fixed_point() {
        let lens = LensConfig::fast_50mm();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let depth = DepthMap::from_values(24, 24, (0..576).map(|_| rng.gen_range(300.0..2000.0)).collect())
            .unwrap();
        let img = Raster::filled(24, 24, 1, 0.5);
        let out = render_focused(&img, &depth, &FocusSetting::at_depth(600.0), &lens, &Default::default())
            .unwrap();
        assert!(out.data().iter().all(|v| (v - 0.5).abs() <= 1e-6));
    }

    #[test]
    fn impulse_row_matches_dense_convolution() {
        let lens = LensConfig::fast_50mm();
        let setting = FocusSetting::at_depth(500.0);
        let d = 520.0;
        let opts = RenderOptions::default();
        let n = 41;
        let mut data = vec![0.0; n];
        data[20] = 1.0;
        data[3] = 0.25;
        let img = Raster::new(1, n, 1, data.clone()).unwrap();
        let depth = DepthMap::filled(1, n, d);
        let out = render_focused(&img, &depth, &setting, &lens, &opts).unwrap();

        let sigma = 800.0 * ((d - 500.0) / d) * (50.0 / 450.0);
        let r = (3.0 * sigma).ceil() as i64;
        for x in 0..n as i64 {
            let (mut num, mut den) = (0.0, 0.0);
            for i in (x - r).max(0)..=(x + r).min(n as i64 - 1) {
                let g = (-((x - i) as f64).powi(2) / (2.0 * sigma * sigma)).exp();
                num += data[i as usize] * g;
                den += g;
            }
            assert!((out.data()[x as usize] - num / den).abs() <= 1e-9);
        }
    }

    #[test]
    fn blur_grows_with_defocus() {
        let lens = LensConfig::fast_50mm();
        let img = texture(48, 48, 1, 3);
        let setting = FocusSetting::at_depth(500.0);
        let opts = RenderOptions::default();
        let energies: Vec<f64> = [500.5, 502.0, 505.0, 510.0, 530.0]
            .iter()
            .map(|&d| {
                let depth = DepthMap::filled(48, 48, d);
                mean_abs_laplacian(&render_focused(&img, &depth, &setting, &lens, &opts).unwrap())
            })
            .collect();
        assert!(energies.windows(2).all(|w| w[1] < w[0]), "{energies:?}");
    }

    #[test]
    fn output_does_not_depend_on_thread_count() {
        let lens = LensConfig::fast_50mm();
        let img = texture(40, 33, 3, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let depth = DepthMap::from_values(40, 33, (0..40 * 33).map(|_| rng.gen_range(450.0..700.0)).collect())
            .unwrap();
        let opts = RenderOptions {
            max_kernel_radius_px: 12,
            ..Default::default()
        };
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| render_focused(&img, &depth, &FocusSetting::at_depth(520.0), &lens, &opts).unwrap())
        };
        let one = run(1);
        for t in [2, 3, 8] {
            let other = run(t);
            assert!(one.data().iter().zip(other.data()).all(|(a, b)| a.to_bits() == b.to_bits()));
        }
    }

    fn layered_depth(h: usize, w: usize, seed: u64) -> DepthMap {
        // two large planes plus a scattered band of unique depths
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..h * w)
            .map(|i| match (i / w) % 5 {
                0 => rng.gen_range(450.0..700.0),
                _ if i % w < w / 2 => 560.0,
                _ => 640.0,
            })
            .collect();
        DepthMap::from_values(h, w, values).unwrap()
    }

    #[test]
    fn separable_groups_match_individual_splats() {
        let lens = LensConfig::fast_50mm();
        let img = texture(37, 29, 3, 11);
        let depth = layered_depth(37, 29, 12);
        let opts = RenderOptions {
            max_kernel_radius_px: 10,
            ..Default::default()
        };
        let splats = source_splats(&depth, &FocusSetting::at_depth(520.0), &lens, &opts).unwrap();
        assert_eq!(separable_classes(&splats, 37, 29).len(), 2);
        let grouped = splat_image::<3>(&img, &splats, true);
        let direct = splat_image::<3>(&img, &splats, false);
        let worst = grouped.iter().zip(&direct).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(worst <= 1e-12, "{worst}");
    }

    #[test]
    fn separable_groups_do_not_depend_on_thread_count() {
        let lens = LensConfig::fast_50mm();
        let img = texture(45, 31, 1, 13);
        let depth = layered_depth(45, 31, 14);
        let opts = RenderOptions {
            max_kernel_radius_px: 9,
            ..Default::default()
        };
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| render_focused(&img, &depth, &FocusSetting::at_depth(510.0), &lens, &opts).unwrap())
        };
        let one = run(1);
        for t in [2, 5, 8] {
            let other = run(t);
            assert!(one.data().iter().zip(other.data()).all(|(a, b)| a.to_bits() == b.to_bits()));
        }
    }

    #[test]
    fn shape_and_validity_errors() {
        let lens = LensConfig::fast_50mm();
        let s = FocusSetting::at_depth(500.0);
        let o = RenderOptions::default();
        let img = Raster::filled(4, 4, 1, 0.1);
        assert!(matches!(
            render_focused(&img, &DepthMap::filled(4, 5, 600.0), &s, &lens, &o),
            Err(Error::Shape { .. })
        ));
        let mut valid = vec![true; 16];
        valid[5] = false;
        let holes = DepthMap::new(4, 4, vec![600.0; 16], valid).unwrap();
        assert!(matches!(render_focused(&img, &holes, &s, &lens, &o), Err(Error::Data(_))));
    }

    #[test]
    fn stack_members_match_single_renders() {
        let lens = LensConfig::fast_50mm();
        let img = texture(16, 16, 1, 8);
        let depth = DepthMap::from_values(16, 16, (0..256).map(|i| 500.0 + (i % 16) as f64 * 10.0).collect())
            .unwrap();
        let o = RenderOptions::default();
        let fds = [480.0, 550.0, 640.0];
        let stack = render_stack(&img, &depth, &fds, &lens, &o).unwrap();
        assert_eq!(stack.len(), 3);
        for (t, &f) in fds.iter().enumerate() {
            let single = render_focused(&img, &depth, &FocusSetting::at_depth(f), &lens, &o).unwrap();
            assert_eq!(stack.members()[t], single);
        }
        let one = render_stack(&img, &depth, &fds[..1], &lens, &o).unwrap();
        assert_eq!(one.len(), 1);

        assert!(render_stack(&img, &depth, &[], &lens, &o).is_err());
        assert!(render_stack(&img, &depth, &[600.0, 550.0], &lens, &o).is_err());
        assert!(render_stack(&img, &depth, &[600.0, 600.0], &lens, &o).is_err());
        assert!(render_stack(&img, &depth, &[40.0, 600.0], &lens, &o).is_err());
    }

    #[test]
    fn two_hundred_member_stack() {
        let lens = LensConfig::fast_50mm();
        let img = texture(8, 8, 1, 2);
        let depth = DepthMap::filled(8, 8, 700.0);
        let fds: Vec<f64> = (0..200).map(|t| 400.0 + 3.0 * t as f64).collect();
        let opts = RenderOptions {
            max_kernel_radius_px: 4,
            ..Default::default()
        };
        assert_eq!(render_stack(&img, &depth, &fds, &lens, &opts).unwrap().len(), 200);
    }
}
