use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use defocus_core::metrics::{depth_metrics, ssim};
use defocus_core::render::{render_focused, render_stack};
use defocus_core::stack::{compose_all_in_focus, focus_measure, DEFAULT_FOCUS_WINDOW};
use defocus_core::{DepthMap, FocusSetting, LensConfig, Raster, RenderOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn texture(n: usize, c: usize, seed: u64) -> Raster {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Raster::new(n, n, c, (0..n * n * c).map(|_| rng.gen()).collect()).unwrap()
}

fn two_plane(n: usize) -> DepthMap {
    DepthMap::from_values(n, n, (0..n * n).map(|i| if i % n < n / 2 { 600.0 } else { 900.0 }).collect()).unwrap()
}

fn random_depth(n: usize, seed: u64) -> DepthMap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DepthMap::from_values(n, n, (0..n * n).map(|_| rng.gen_range(550.0..950.0)).collect()).unwrap()
}

fn bench_render(c: &mut Criterion) {
    let lens = LensConfig::fast_50mm();
    let opts = RenderOptions::default();
    let img = texture(128, 3, 1);
    let mut group = c.benchmark_group("render_focused");
    group.sample_size(10);
    for (name, depth) in [("two_plane", two_plane(128)), ("random_depth", random_depth(128, 2))] {
        for focus in [600.0, 750.0] {
            group.bench_with_input(BenchmarkId::new(name, focus), &focus, |b, &f| {
                b.iter(|| render_focused(&img, &depth, &FocusSetting::at_depth(f), &lens, &opts).unwrap())
            });
        }
    }
    group.finish();
}

fn bench_stack(c: &mut Criterion) {
    let lens = LensConfig::fast_50mm();
    let opts = RenderOptions {
        max_kernel_radius_px: 8,
        ..Default::default()
    };
    let img = texture(64, 3, 3);
    let focus: Vec<f64> = (0..50).map(|t| 550.0 + 8.0 * t as f64).collect();
    let stack = render_stack(&img, &two_plane(64), &focus, &lens, &opts).unwrap();
    c.bench_function("focus_measure_256", |b| {
        let big = texture(256, 3, 4);
        b.iter(|| focus_measure(black_box(&big), DEFAULT_FOCUS_WINDOW).unwrap())
    });
    c.bench_function("compose_50x64", |b| {
        b.iter(|| compose_all_in_focus(black_box(&stack), DEFAULT_FOCUS_WINDOW).unwrap())
    });
}

fn bench_metrics(c: &mut Criterion) {
    let a = texture(256, 1, 5);
    let b2 = texture(256, 1, 6);
    c.bench_function("ssim_256", |b| b.iter(|| ssim(black_box(&a), black_box(&b2), 1.0).unwrap()));
    let p = random_depth(256, 7);
    let g = random_depth(256, 8);
    c.bench_function("depth_metrics_256", |b| b.iter(|| depth_metrics(black_box(&p), black_box(&g)).unwrap()));
}

criterion_group!(benches, bench_render, bench_stack, bench_metrics);
criterion_main!(benches);
