//! Focus-stack analysis: focus measure, all-in-focus compositing with shape
//! from focus, and depth refinement.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::map::{DepthMap, Mask, MaskedMap};
use crate::raster::Raster;

/// Default side of the square window summing the focus measure.
pub const DEFAULT_FOCUS_WINDOW: usize = 9;

/// Images of one scene at strictly increasing focus depths.
#[derive(Debug, Clone, PartialEq)]
pub struct FocusStack {
    members: Vec<Raster>,
    focus_depths_mm: Vec<f64>,
}

impl FocusStack {
    pub fn new(members: Vec<Raster>, focus_depths_mm: Vec<f64>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::domain("a focus stack needs at least one member"));
        }
        if members.len() != focus_depths_mm.len() {
            return Err(Error::shape(
                format!("{} focus depths", members.len()),
                focus_depths_mm.len(),
            ));
        }
        let first = &members[0];
        for m in &members[1..] {
            if m.dims() != first.dims() || m.channels() != first.channels() {
                return Err(Error::shape(
                    format!("{}x{}x{}", first.height(), first.width(), first.channels()),
                    format!("{}x{}x{}", m.height(), m.width(), m.channels()),
                ));
            }
        }
        if let Some(w) = focus_depths_mm.windows(2).find(|w| !(w[1] > w[0])) {
            return Err(Error::domain(format!(
                "focus depths must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        Ok(FocusStack {
            members,
            focus_depths_mm,
        })
    }

    pub fn members(&self) -> &[Raster] {
        &self.members
    }

    pub fn focus_depths_mm(&self) -> &[f64] {
        &self.focus_depths_mm
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn into_parts(self) -> (Vec<Raster>, Vec<f64>) {
        (self.members, self.focus_depths_mm)
    }
}

/// Windowed sum of the absolute 4-neighbour Laplacian of the image luma.
///
/// Borders are replicate-padded for both the Laplacian and the window sum.
pub fn focus_measure(image: &Raster, window_px: usize) -> Result<Raster> {
    if window_px == 0 || window_px.is_multiple_of(2) {
        return Err(Error::domain(format!(
            "focus window must be a positive odd size, got {window_px}"
        )));
    }
    let luma = image.to_luma();
    let (h, w) = luma.dims();
    let px = luma.data();
    let at = |y: usize, x: usize| px[y * w + x];

    let mut lap = vec![0.0; h * w];
    lap.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        let up = y.saturating_sub(1);
        let down = (y + 1).min(h - 1);
        for (x, out) in row.iter_mut().enumerate() {
            let left = x.saturating_sub(1);
            let right = (x + 1).min(w - 1);
            let v = at(up, x) + at(down, x) + at(y, left) + at(y, right) - 4.0 * at(y, x);
            *out = v.abs();
        }
    });

    let data = box_sum(&lap, h, w, window_px / 2);
    Raster::new(h, w, 1, data)
}

/// Separable `(2r+1)²` box sum with replicate padding.
fn box_sum(src: &[f64], h: usize, w: usize, r: usize) -> Vec<f64> {
    if r == 0 {
        return src.to_vec();
    }
    let clamp = |i: isize, n: usize| i.clamp(0, n as isize - 1) as usize;
    let mut horiz = vec![0.0; h * w];
    horiz.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        let line = &src[y * w..(y + 1) * w];
        for (x, out) in row.iter_mut().enumerate() {
            let x = x as isize;
            *out = (x - r as isize..=x + r as isize)
                .map(|k| line[clamp(k, w)])
                .sum();
        }
    });
    let mut out = vec![0.0; h * w];
    out.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        let y = y as isize;
        for (x, o) in row.iter_mut().enumerate() {
            *o = (y - r as isize..=y + r as isize)
                .map(|k| horiz[clamp(k, h) * w + x])
                .sum();
        }
    });
    out
}

/// Per pixel, picks the stack member with the largest focus measure (lowest
/// index on ties). Returns the composited all-in-focus image and the depth
/// map holding each pixel's winning focus depth.
pub fn compose_all_in_focus(stack: &FocusStack, window_px: usize) -> Result<(Raster, DepthMap)> {
    let (ids, _) = sharpest_member(stack, window_px)?;
    let first = &stack.members()[0];
    let (h, w) = first.dims();
    let c = first.channels();

    let mut image = vec![0.0; h * w * c];
    image
        .par_chunks_mut(c)
        .zip(ids.par_iter())
        .enumerate()
        .for_each(|(i, (out, &t))| {
            out.copy_from_slice(&stack.members()[t].data()[i * c..(i + 1) * c]);
        });
    let depths = ids.iter().map(|&t| stack.focus_depths_mm()[t]).collect();

    Ok((Raster::new(h, w, c, image)?, DepthMap::from_values(h, w, depths)?))
}

/// Index of the sharpest member at every pixel, plus the per-member measures.
pub fn sharpest_member(stack: &FocusStack, window_px: usize) -> Result<(Vec<usize>, Vec<Raster>)> {
    if stack.len() < 2 {
        return Err(Error::domain(format!(
            "compositing needs at least two stack members, got {}",
            stack.len()
        )));
    }
    let measures = stack
        .members()
        .par_iter()
        .map(|m| focus_measure(m, window_px))
        .collect::<Result<Vec<_>>>()?;
    let n = measures[0].data().len();
    let ids = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut best = 0;
            let mut best_val = measures[0].data()[i];
            for (t, m) in measures.iter().enumerate().skip(1) {
                if m.data()[i] > best_val {
                    best = t;
                    best_val = m.data()[i];
                }
            }
            best
        })
        .collect();
    Ok((ids, measures))
}

/// Marks pixels that are masked, non-finite or nonpositive.
pub fn detect_invalid(depth: &DepthMap) -> Mask {
    let bits = depth
        .values()
        .iter()
        .zip(depth.valid())
        .map(|(&d, &ok)| !ok || !d.is_finite() || d <= 0.0)
        .collect();
    Mask::new(depth.height(), depth.width(), bits).expect("mask matches depth shape")
}

/// Replaces masked pixels of `primary` with the corresponding `fill` depths.
pub fn refine_depth(primary: &DepthMap, invalid: &Mask, fill: &DepthMap) -> Result<DepthMap> {
    primary.check_same_shape(fill)?;
    if (invalid.height(), invalid.width()) != primary.dims() {
        return Err(Error::shape(
            format!("{}x{}", primary.height(), primary.width()),
            format!("{}x{} mask", invalid.height(), invalid.width()),
        ));
    }
    let good = |ok: bool, d: f64| ok && d.is_finite() && d > 0.0;
    let mut values = Vec::with_capacity(primary.len());
    for (i, &masked) in invalid.bits().iter().enumerate() {
        let (src, name) = if masked { (fill, "fill") } else { (primary, "primary") };
        let d = src.values()[i];
        if !good(src.valid()[i], d) {
            return Err(Error::data(format!(
                "{name} depth at row {}, col {} is not a valid depth ({d})",
                i / primary.width(),
                i % primary.width()
            )));
        }
        values.push(d);
    }
    DepthMap::from_values(primary.height(), primary.width(), values)
}
