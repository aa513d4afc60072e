//! Seeded synthetic inputs for `gen-scene --synthetic`.

use defocus_core::{DepthMap, Raster};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Uniform RGB noise in `[0, 1)`.
pub fn texture(height: usize, width: usize, seed: u64) -> Raster {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..height * width * 3).map(|_| rng.gen::<f64>()).collect();
    Raster::new(height, width, 3, data).expect("finite samples")
}

/// Left half at `near_mm`, right half at `far_mm`.
pub fn two_plane_depth(height: usize, width: usize, near_mm: f64, far_mm: f64) -> defocus_core::Result<DepthMap> {
    let values = (0..height * width)
        .map(|i| if i % width < width / 2 { near_mm } else { far_mm })
        .collect();
    DepthMap::from_values(height, width, values)
}
