//! Deterministic input generators shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sketch3d::mlsdeform::ControlPairSet;
use sketch3d::pointcloud::PointCloud;
use sketch3d::sketchimg::{binarize, rasterize_polyline, BinaryMask, SketchImage};

pub fn random_cloud(n: usize, seed: u64) -> PointCloud {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    PointCloud::new(
        (0..n)
            .map(|_| {
                [
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                ]
            })
            .collect(),
    )
    .expect("non-empty finite cloud")
}

pub fn stroke_sketch(size: usize, seed: u64) -> SketchImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let limit = size as i64 - 2;
    let points: Vec<(i64, i64)> = (0..6)
        .map(|_| (rng.random_range(2..limit), rng.random_range(2..limit)))
        .collect();
    rasterize_polyline(&points, size, size).expect("enough points")
}

pub fn stroke_mask(size: usize, seed: u64) -> BinaryMask {
    binarize(&stroke_sketch(size, seed), 0.5)
}

pub fn random_controls(k: usize, span: f64, sigma: f64, seed: u64) -> ControlPairSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let sources: Vec<(f64, f64)> = (0..k)
            .map(|_| (rng.random_range(0.0..span), rng.random_range(0.0..span)))
            .collect();
        let targets: Vec<(f64, f64)> = sources
            .iter()
            .map(|&(x, y)| {
                (
                    x + rng.random_range(-sigma..sigma),
                    y + rng.random_range(-sigma..sigma),
                )
            })
            .collect();
        if let Ok(set) = ControlPairSet::new(sources, targets, 1.0) {
            return set;
        }
    }
}
