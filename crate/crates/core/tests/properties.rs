//! Property tests for the module invariants that hold on arbitrary inputs.

mod common;

use proptest::prelude::*;

use common::chamfer_brute;
use sketch3d::mlsdeform::{mls_rigid_point, ControlPairSet};
use sketch3d::pointcloud::{
    chamfer, emd_exact, encode_pc3d, encode_xyz, parse_pc3d, parse_xyz, PointCloud,
};
use sketch3d::sketchimg::{
    binarize, dilate, encode_pgm, parse_pgm, thin, BinaryMask, SketchImage, StructuringElement,
};

fn mask_strategy(w: usize, h: usize) -> impl Strategy<Value = BinaryMask> {
    proptest::collection::vec(any::<bool>(), w * h).prop_map(move |bits| {
        let mut mask = BinaryMask::empty(w, h);
        for (i, bit) in bits.into_iter().enumerate() {
            if bit {
                mask.set(i % w, i / w, true);
            }
        }
        mask
    })
}

fn cloud_strategy(max_n: usize) -> impl Strategy<Value = PointCloud> {
    proptest::collection::vec(
        [-100.0..100.0f64, -100.0..100.0f64, -100.0..100.0f64],
        1..=max_n,
    )
    .prop_map(|points| PointCloud::new(points).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dilation_is_extensive_and_monotone(
        base in mask_strategy(16, 16),
        extra in mask_strategy(16, 16),
        radius in 1usize..=3,
        iterations in 0usize..=3,
    ) {
        let se = StructuringElement::new(radius).unwrap();
        let dilated = dilate(&base, se, iterations);
        prop_assert!(base.is_subset_of(&dilated));

        // grow the mask and dilation must grow with it
        let mut bigger = base.clone();
        for (x, y) in extra.ink_pixels() {
            bigger.set(x, y, true);
        }
        prop_assert!(dilated.is_subset_of(&dilate(&bigger, se, iterations)));
    }

    #[test]
    fn dilation_iterations_compose_into_radii(
        mask in mask_strategy(16, 16),
        k in 1usize..=5,
    ) {
        let iterated = dilate(&mask, StructuringElement::new(1).unwrap(), k);
        let single = dilate(&mask, StructuringElement::new(k).unwrap(), 1);
        prop_assert_eq!(iterated, single);
    }

    #[test]
    fn thinning_is_idempotent_and_shrinking(mask in mask_strategy(16, 16)) {
        let thinned = thin(&mask);
        prop_assert!(thinned.is_subset_of(&mask));
        prop_assert_eq!(thin(&thinned), thinned);
    }

    #[test]
    fn pgm_io_does_not_change_binarization(
        pixels in proptest::collection::vec(0.0..=1.0f64, 64),
        threshold in 0.05..0.95f64,
    ) {
        // 8-bit data round-trips bit-exactly, so thresholds are unaffected
        let quantized: Vec<f64> =
            pixels.iter().map(|p| (p * 255.0).round() / 255.0).collect();
        let img = SketchImage::new(8, 8, quantized).unwrap();
        let back = parse_pgm(&encode_pgm(&img)).unwrap();
        prop_assert_eq!(binarize(&back, threshold), binarize(&img, threshold));
    }

    #[test]
    fn pgm_io_preserves_the_default_threshold_for_any_image(
        pixels in proptest::collection::vec(0.0..=1.0f64, 64),
    ) {
        let img = SketchImage::new(8, 8, pixels).unwrap();
        let back = parse_pgm(&encode_pgm(&img)).unwrap();
        prop_assert_eq!(binarize(&back, 0.5), binarize(&img, 0.5));
    }

    #[test]
    fn cloud_formats_round_trip(cloud in cloud_strategy(24)) {
        let ascii = parse_xyz(&encode_xyz(&cloud)).unwrap();
        prop_assert_eq!(ascii.points(), cloud.points());
        let binary = parse_pc3d(&encode_pc3d(&cloud)).unwrap();
        prop_assert_eq!(binary.points(), cloud.points());
    }

    #[test]
    fn chamfer_is_symmetric_and_matches_brute_force(
        p in cloud_strategy(24),
        q in cloud_strategy(24),
    ) {
        let pq = chamfer(&p, &q);
        prop_assert_eq!(pq.to_bits(), chamfer(&q, &p).to_bits());
        prop_assert_eq!(pq.to_bits(), chamfer_brute(&p, &q).to_bits());
    }

    #[test]
    fn metric_scaling_laws(
        p in cloud_strategy(6),
        q in cloud_strategy(6),
        s in 0.1..10.0f64,
    ) {
        let scale = |c: &PointCloud| {
            PointCloud::new(
                c.points().iter().map(|p| [s * p[0], s * p[1], s * p[2]]).collect(),
            )
            .unwrap()
        };
        let cd = chamfer(&p, &q);
        let cd_scaled = chamfer(&scale(&p), &scale(&q));
        prop_assert!((cd_scaled - s * s * cd).abs() <= 1e-9 * cd_scaled.abs().max(1.0));
        if p.len() == q.len() {
            let (emd, _) = emd_exact(&p, &q).unwrap();
            let (emd_scaled, _) = emd_exact(&scale(&p), &scale(&q)).unwrap();
            prop_assert!((emd_scaled - s * emd).abs() <= 1e-9 * emd_scaled.abs().max(1.0));
        }
    }

    #[test]
    fn mls_preserves_distance_to_the_weighted_centroid(
        controls in proptest::collection::vec(
            ([0.0..64.0f64, 0.0..64.0f64], [0.0..64.0f64, 0.0..64.0f64]),
            2..6,
        ),
        v in [0.0..64.0f64, 0.0..64.0f64],
    ) {
        let sources: Vec<(f64, f64)> = controls.iter().map(|&(p, _)| (p[0], p[1])).collect();
        let targets: Vec<(f64, f64)> = controls.iter().map(|&(_, q)| (q[0], q[1])).collect();
        let Ok(set) = ControlPairSet::new(sources, targets, 1.0) else {
            return Ok(()); // duplicate random sources, astronomically rare
        };
        let v = (v[0], v[1]);
        if set.sources().contains(&v) {
            return Ok(());
        }
        let mut sw = 0.0;
        let mut p_star = (0.0, 0.0);
        let mut q_star = (0.0, 0.0);
        for (&p, &q) in set.sources().iter().zip(set.targets()) {
            let d2 = (p.0 - v.0).powi(2) + (p.1 - v.1).powi(2);
            let w = 1.0 / d2;
            sw += w;
            p_star = (p_star.0 + w * p.0, p_star.1 + w * p.1);
            q_star = (q_star.0 + w * q.0, q_star.1 + w * q.1);
        }
        p_star = (p_star.0 / sw, p_star.1 / sw);
        q_star = (q_star.0 / sw, q_star.1 / sw);
        let f = mls_rigid_point(&set, v);
        let out_dist = ((f.0 - q_star.0).powi(2) + (f.1 - q_star.1).powi(2)).sqrt();
        let in_dist = ((v.0 - p_star.0).powi(2) + (v.1 - p_star.1).powi(2)).sqrt();
        prop_assert!((out_dist - in_dist).abs() < 1e-6 * in_dist.max(1.0));
    }

    #[test]
    fn control_csv_round_trips(
        controls in proptest::collection::vec(
            ([0.0..64.0f64, 0.0..64.0f64], [-64.0..64.0f64, -64.0..64.0f64]),
            1..6,
        ),
        alpha in 0.25..4.0f64,
    ) {
        let sources: Vec<(f64, f64)> = controls.iter().map(|&(p, _)| (p[0], p[1])).collect();
        let targets: Vec<(f64, f64)> = controls.iter().map(|&(_, q)| (q[0], q[1])).collect();
        let Ok(set) = ControlPairSet::new(sources, targets, alpha) else {
            return Ok(());
        };
        prop_assert_eq!(ControlPairSet::from_csv(&set.to_csv()).unwrap(), set);
    }
}
