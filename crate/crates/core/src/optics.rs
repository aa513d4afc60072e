//! Thin-lens focus geometry and circle-of-confusion size.
//!
//! For a lens of focal length `F` focused so that the sensor sits at distance
//! `v` behind it, the plane imaged sharply lies at `D_f` with
//! `1/D_f + 1/v = 1/F`. A point at depth `D` then spreads over a disk whose
//! diameter, in output pixels, is
//!
//! ```text
//! C_pix = A · |D − D_f| / D · F / (D_f − F),      A = (F/N) / (ρ·s)
//! ```
//!
//! where `N` is the f-number, `ρ` the pixel pitch and `s` the output scale.
//! Only the combined scale `A` enters the formula, so a lens may be described
//! either by `ρ` and `s` or by `A` directly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::{DefocusMap, DepthMap, MaskedMap};

/// Optical constants of the capturing camera.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LensConfig {
    pub focal_length_mm: f64,
    pub f_number: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pixel_size_mm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_scale: Option<f64>,
    /// Aperture diameter over pixel footprint, `(F/N)/(ρ·s)`.
    pub coc_scale: f64,
}

fn require_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be positive and finite, got {value}")))
    }
}

impl LensConfig {
    /// Describes a lens by its sensor geometry; the CoC scale is derived.
    pub fn from_sensor(
        focal_length_mm: f64,
        f_number: f64,
        pixel_size_mm: f64,
        output_scale: f64,
    ) -> Result<Self> {
        require_positive("focal length", focal_length_mm)?;
        require_positive("f-number", f_number)?;
        require_positive("pixel size", pixel_size_mm)?;
        require_positive("output scale", output_scale)?;
        let aperture = focal_length_mm / f_number;
        Ok(LensConfig {
            focal_length_mm,
            f_number,
            pixel_size_mm: Some(pixel_size_mm),
            output_scale: Some(output_scale),
            coc_scale: aperture / (pixel_size_mm * output_scale),
        })
    }

    /// Describes a lens by an explicitly calibrated CoC scale.
    pub fn with_coc_scale(focal_length_mm: f64, f_number: f64, coc_scale: f64) -> Result<Self> {
        require_positive("focal length", focal_length_mm)?;
        require_positive("f-number", f_number)?;
        require_positive("coc scale", coc_scale)?;
        Ok(LensConfig {
            focal_length_mm,
            f_number,
            pixel_size_mm: None,
            output_scale: None,
            coc_scale,
        })
    }

    /// 50 mm lens wide open at f/1.4 with a calibrated CoC scale of 800.
    pub fn fast_50mm() -> Self {
        LensConfig {
            focal_length_mm: 50.0,
            f_number: 1.4,
            pixel_size_mm: None,
            output_scale: None,
            coc_scale: 800.0,
        }
    }

    /// Aperture diameter `F/N` in millimeters.
    pub fn aperture_mm(&self) -> f64 {
        self.focal_length_mm / self.f_number
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("focal length", self.focal_length_mm)?;
        require_positive("f-number", self.f_number)?;
        require_positive("coc scale", self.coc_scale)?;
        if let Some(p) = self.pixel_size_mm {
            require_positive("pixel size", p)?;
        }
        if let Some(s) = self.output_scale {
            require_positive("output scale", s)?;
        }
        Ok(())
    }

    /// Returns a copy with the CoC scale multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        LensConfig {
            coc_scale: self.coc_scale * factor,
            ..*self
        }
    }
}

/// Where the lens is focused.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FocusSetting {
    pub focus_depth_mm: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sensor_distance_mm: Option<f64>,
}

impl FocusSetting {
    pub fn at_depth(focus_depth_mm: f64) -> Self {
        FocusSetting {
            focus_depth_mm,
            sensor_distance_mm: None,
        }
    }

    /// Focus setting implied by a measured lens-to-sensor distance.
    pub fn from_sensor(sensor_distance_mm: f64, lens: &LensConfig) -> Result<Self> {
        let focus_depth_mm = focus_depth_from_sensor(sensor_distance_mm, lens.focal_length_mm)?;
        Ok(FocusSetting {
            focus_depth_mm,
            sensor_distance_mm: Some(sensor_distance_mm),
        })
    }

    /// Checks that a real image forms and, when present, that the sensor
    /// distance agrees with the focus depth through the lens equation.
    pub fn validate(&self, lens: &LensConfig) -> Result<()> {
        let f = lens.focal_length_mm;
        if !(self.focus_depth_mm.is_finite() && self.focus_depth_mm > f) {
            return Err(Error::domain(format!(
                "focus depth {} mm must exceed the focal length {f} mm",
                self.focus_depth_mm
            )));
        }
        if let Some(v) = self.sensor_distance_mm {
            let lhs = 1.0 / self.focus_depth_mm + 1.0 / v;
            let rhs = 1.0 / f;
            if !((lhs - rhs).abs() <= 1e-9 * rhs) {
                return Err(Error::domain(format!(
                    "sensor distance {v} mm is inconsistent with focus depth {} mm",
                    self.focus_depth_mm
                )));
            }
        }
        Ok(())
    }
}

/// Object distance imaged sharply when the sensor sits `sensor_mm` behind a
/// lens of focal length `focal_mm`.
pub fn focus_depth_from_sensor(sensor_mm: f64, focal_mm: f64) -> Result<f64> {
    require_positive("focal length", focal_mm)?;
    if !(sensor_mm.is_finite() && sensor_mm > focal_mm) {
        return Err(Error::domain(format!(
            "sensor distance {sensor_mm} mm must exceed the focal length {focal_mm} mm"
        )));
    }
    Ok(sensor_mm * focal_mm / (sensor_mm - focal_mm))
}

/// Inverse of [`focus_depth_from_sensor`].
pub fn sensor_from_focus_depth(focus_mm: f64, focal_mm: f64) -> Result<f64> {
    require_positive("focal length", focal_mm)?;
    if !(focus_mm.is_finite() && focus_mm > focal_mm) {
        return Err(Error::domain(format!(
            "focus depth {focus_mm} mm must exceed the focal length {focal_mm} mm"
        )));
    }
    Ok(focus_mm * focal_mm / (focus_mm - focal_mm))
}

/// CoC diameter in pixels for an object at `depth_mm`.
///
/// The value is not clamped to the image size.
pub fn coc_pixels(depth_mm: f64, setting: &FocusSetting, lens: &LensConfig) -> Result<f64> {
    if !(depth_mm.is_finite() && depth_mm > 0.0) {
        return Err(Error::domain(format!("depth must be positive, got {depth_mm}")));
    }
    lens.validate()?;
    setting.validate(lens)?;
    Ok(coc_unchecked(depth_mm, setting.focus_depth_mm, lens))
}

/// Pointwise CoC with no argument checks. Callers validate once per map.
#[inline]
pub(crate) fn coc_unchecked(depth_mm: f64, focus_mm: f64, lens: &LensConfig) -> f64 {
    let f = lens.focal_length_mm;
    lens.coc_scale * ((depth_mm - focus_mm).abs() / depth_mm) * (f / (focus_mm - f))
}

/// Ground-truth defocus map: the CoC of every valid depth pixel.
///
/// Invalid depth pixels stay invalid (value 0) in the output.
pub fn defocus_map_from_depth(
    depth: &DepthMap,
    setting: &FocusSetting,
    lens: &LensConfig,
) -> Result<DefocusMap> {
    lens.validate()?;
    setting.validate(lens)?;
    if let Some((idx, v)) = depth
        .iter_valid()
        .find(|&(_, v)| !(v.is_finite() && v > 0.0))
    {
        let (row, col) = (idx / depth.width(), idx % depth.width());
        return Err(Error::data(format!(
            "depth at row {row}, col {col} is {v}; valid depths must be positive"
        )));
    }
    let focus = setting.focus_depth_mm;
    let values = depth
        .values()
        .iter()
        .zip(depth.valid())
        .map(|(&d, &ok)| if ok { coc_unchecked(d, focus, lens) } else { 0.0 })
        .collect();
    DefocusMap::new(depth.height(), depth.width(), values, depth.valid().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn symmetric_two_f_case() {
        assert_eq!(focus_depth_from_sensor(100.0, 50.0).unwrap(), 100.0);
        assert_eq!(sensor_from_focus_depth(100.0, 50.0).unwrap(), 100.0);
    }

    #[test]
    fn sixty_mm_sensor_focuses_at_three_hundred() {
        // 1/300 + 1/60 = 6/300 = 1/50
        assert!(rel(focus_depth_from_sensor(60.0, 50.0).unwrap(), 300.0) < 1e-15);
        assert!(rel(sensor_from_focus_depth(300.0, 50.0).unwrap(), 60.0) < 1e-15);
    }

    #[test]
    fn focus_depth_approaches_focal_length_as_sensor_recedes() {
        let mut prev = f64::INFINITY;
        for k in 1..40 {
            let eps = 2f64.powi(k - 20);
            let d = focus_depth_from_sensor(50.0 * (1.0 + eps), 50.0).unwrap();
            assert!(d < prev && d > 50.0);
            prev = d;
        }
    }

    #[test]
    fn round_trip_small_set() {
        for v in [51.0, 75.0, 1000.0] {
            let d = focus_depth_from_sensor(v, 50.0).unwrap();
            assert!(rel(sensor_from_focus_depth(d, 50.0).unwrap(), v) < 1e-12);
        }
    }

    #[test]
    fn sensor_inside_focal_length_is_rejected() {
        assert!(matches!(focus_depth_from_sensor(50.0, 50.0), Err(Error::Domain(_))));
        assert!(matches!(focus_depth_from_sensor(20.0, 50.0), Err(Error::Domain(_))));
        assert!(matches!(sensor_from_focus_depth(50.0, 50.0), Err(Error::Domain(_))));
    }

    #[test]
    fn coc_reference_values() {
        let lens = LensConfig::fast_50mm();
        let s = FocusSetting::at_depth(500.0);
        assert_eq!(coc_pixels(500.0, &s, &lens).unwrap(), 0.0);
        // 800 · (500/1000) · (50/450)
        let expected = 800.0 * 0.5 * (50.0 / 450.0);
        assert!(rel(coc_pixels(1000.0, &s, &lens).unwrap(), expected) < 1e-12);
        assert!(rel(expected, 44.444_444_444_444_44) < 1e-12);
        // D → ∞ limit 800 · 50/450
        let far = coc_pixels(1e15, &s, &lens).unwrap();
        assert!(rel(far, 88.888_888_888_888_89) < 1e-9);
    }

    #[test]
    fn coc_rejects_nonpositive_depth_and_bad_focus() {
        let lens = LensConfig::fast_50mm();
        let s = FocusSetting::at_depth(500.0);
        assert!(coc_pixels(0.0, &s, &lens).is_err());
        assert!(coc_pixels(-3.0, &s, &lens).is_err());
        assert!(coc_pixels(100.0, &FocusSetting::at_depth(40.0), &lens).is_err());
    }

    #[test]
    fn derived_coc_scale_matches_definition() {
        let lens = LensConfig::from_sensor(50.0, 1.4, 0.00345, 1.5).unwrap();
        let expected = (50.0 / 1.4) / (0.00345 * 1.5);
        assert!(rel(lens.coc_scale, expected) < 1e-12);
        assert!(LensConfig::from_sensor(50.0, 0.0, 0.1, 1.0).is_err());
        assert!(LensConfig::with_coc_scale(-1.0, 1.4, 800.0).is_err());
    }

    #[test]
    fn sensor_distance_must_agree_with_focus_depth() {
        let lens = LensConfig::fast_50mm();
        let s = FocusSetting::from_sensor(60.0, &lens).unwrap();
        s.validate(&lens).unwrap();
        let bad = FocusSetting {
            focus_depth_mm: 310.0,
            sensor_distance_mm: Some(60.0),
        };
        assert!(bad.validate(&lens).is_err());
    }

    #[test]
    fn defocus_map_examples() {
        let lens = LensConfig::fast_50mm();
        let s = FocusSetting::at_depth(500.0);
        let flat = DepthMap::filled(3, 4, 500.0);
        let j = defocus_map_from_depth(&flat, &s, &lens).unwrap();
        assert!(j.values().iter().all(|&v| v == 0.0));

        let pair = DepthMap::from_values(1, 2, vec![500.0, 1000.0]).unwrap();
        let j = defocus_map_from_depth(&pair, &s, &lens).unwrap();
        assert_eq!(j.values()[0], 0.0);
        assert!(rel(j.values()[1], 800.0 * 0.5 * 50.0 / 450.0) < 1e-12);

        let masked = DepthMap::new(1, 2, vec![500.0, 1000.0], vec![true, false]).unwrap();
        let j = defocus_map_from_depth(&masked, &s, &lens).unwrap();
        assert_eq!(j.valid(), &[true, false]);
    }

    #[test]
    fn defocus_map_names_first_bad_pixel() {
        let lens = LensConfig::fast_50mm();
        let s = FocusSetting::at_depth(500.0);
        let d = DepthMap::new(2, 2, vec![500.0, 600.0, -1.0, 0.0], vec![true; 4]).unwrap();
        let err = defocus_map_from_depth(&d, &s, &lens).unwrap_err().to_string();
        assert!(err.contains("row 1, col 0"), "{err}");
    }

    #[test]
    fn log_spaced_round_trip_grid() {
        let f = 50.0;
        for k in 0..1000 {
            // sensor distances from F·(1 + 1e-3) to F·(1 + 1e3); closer to F the
            // conversion itself is too ill-conditioned for 1e-12
            let v = f * (1.0 + 10f64.powf(-3.0 + 6.0 * k as f64 / 999.0));
            let d = focus_depth_from_sensor(v, f).unwrap();
            let back = sensor_from_focus_depth(d, f).unwrap();
            assert!(rel(back, v) <= 1e-12, "v={v} back={back}");
            assert!(rel(1.0 / d + 1.0 / v, 1.0 / f) <= 1e-12);
        }
    }

    proptest! {
        #[test]
        fn coc_is_nonnegative_and_v_shaped(
            focus in 60.0f64..5000.0,
            a in 1.0f64..2.0,
            b in 1.0f64..2.0,
        ) {
            let lens = LensConfig::fast_50mm();
            let s = FocusSetting::at_depth(focus);
            let (lo, hi) = (a.min(b), a.max(b));
            prop_assume!(hi > lo * (1.0 + 1e-9));
            // strictly increasing beyond the focus plane
            let near = coc_pixels(focus * lo, &s, &lens).unwrap();
            let far = coc_pixels(focus * hi, &s, &lens).unwrap();
            prop_assert!(near >= 0.0 && far > near);
            // strictly decreasing before it
            let near = coc_pixels(focus / hi, &s, &lens).unwrap();
            let closer = coc_pixels(focus / lo, &s, &lens).unwrap();
            prop_assert!(near > closer && closer >= 0.0);
        }

        #[test]
        fn coc_is_linear_in_scale(depth in 10.0f64..1e5, c in 0.01f64..100.0) {
            let lens = LensConfig::fast_50mm();
            let s = FocusSetting::at_depth(700.0);
            let base = coc_pixels(depth, &s, &lens).unwrap();
            let scaled = coc_pixels(depth, &s, &lens.scaled(c)).unwrap();
            prop_assert!((scaled - c * base).abs() <= 1e-12 * scaled.abs().max(1e-300));
        }
    }
}
