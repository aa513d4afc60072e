use defocus_core::dataset::{
    generate_scene, load_defocus, load_depth, load_raster, validate_scene, SceneManifest, SceneOptions,
    MANIFEST_FILE,
};
use defocus_core::metrics::{defocus_metrics, depth_metrics};
use defocus_core::optics::defocus_map_from_depth;
use defocus_core::stack::compose_all_in_focus;
use defocus_core::{DepthMap, FocusSetting, FocusStack, LensConfig, Raster, RenderOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn scene_inputs(h: usize, w: usize) -> (Raster, DepthMap) {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let img = Raster::new(h, w, 3, (0..h * w * 3).map(|_| rng.gen()).collect()).unwrap();
    let depth = DepthMap::from_values(h, w, (0..h * w).map(|i| if (i / w) < h / 2 { 650.0 } else { 820.0 }).collect())
        .unwrap();
    (img, depth)
}

#[test]
fn scene_on_disk_supports_shape_from_focus() {
    let dir = tempfile::tempdir().unwrap();
    let (img, depth) = scene_inputs(40, 36);
    let lens = LensConfig::fast_50mm();
    let focus: Vec<f64> = (0..30).map(|t| 600.0 + 10.0 * t as f64).collect();
    let opts = SceneOptions {
        scene_id: "halves".into(),
        render: RenderOptions {
            max_kernel_radius_px: 6,
            ..Default::default()
        },
    };
    let manifest = generate_scene(&img, &depth, &lens, &focus, dir.path(), &opts).unwrap();
    assert!(validate_scene(&manifest, dir.path()).is_clean());

    let reread = SceneManifest::load(dir.path().join(MANIFEST_FILE)).unwrap();
    assert_eq!(reread, manifest);

    let members = reread
        .shots
        .iter()
        .map(|s| load_raster(dir.path().join(&s.focused_image_path)).unwrap())
        .collect();
    let stack = FocusStack::new(members, reread.focus_depths()).unwrap();
    let (_, sff) = compose_all_in_focus(&stack, 9).unwrap();

    // rows away from the boundary between the two planes
    let stored = load_depth(dir.path().join(&reread.depth_path), 1.0).unwrap();
    let interior: Vec<usize> = (0..40 * 36usize).filter(|i| (i / 36).abs_diff(20) > 12).collect();
    let close = interior
        .iter()
        .filter(|&&i| (sff.values()[i] - stored.values()[i]).abs() <= 10.0)
        .count();
    assert!(close as f64 >= 0.95 * interior.len() as f64, "{close}/{}", interior.len());

    let report = depth_metrics(&sff, &stored).unwrap();
    assert!(report.delta_1_05 > 0.9, "{report:?}");
}

#[test]
fn stored_defocus_maps_match_recomputation() {
    let dir = tempfile::tempdir().unwrap();
    let (img, depth) = scene_inputs(12, 9);
    let lens = LensConfig::fast_50mm();
    let manifest = generate_scene(&img, &depth, &lens, &[640.0, 700.0, 820.0], dir.path(), &SceneOptions::default())
        .unwrap();
    let stored = load_depth(dir.path().join(&manifest.depth_path), 1.0).unwrap();
    for shot in &manifest.shots {
        let j = load_defocus(dir.path().join(&shot.defocus_map_path)).unwrap();
        let again = defocus_map_from_depth(&stored, &FocusSetting::at_depth(shot.focus_depth_mm), &lens).unwrap();
        let worst = j
            .values()
            .iter()
            .zip(again.values())
            .map(|(a, b)| (a - (*b as f32 as f64)).abs())
            .fold(0.0, f64::max);
        assert_eq!(worst, 0.0);
        let m = defocus_metrics(&j, &again).unwrap();
        assert_eq!(m.delta_1_05, 1.0);
    }
    // the in-focus plane of the 820 mm shot is exactly zero
    let j = load_defocus(dir.path().join(&manifest.shots[2].defocus_map_path)).unwrap();
    assert_eq!(j.values()[12 * 9 - 1], 0.0);
}
