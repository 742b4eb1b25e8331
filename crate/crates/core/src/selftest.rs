//! Cross-module runtime checks behind the `selftest` CLI command: each check
//! re-derives an expected result with an independent brute-force or
//! closed-form oracle and compares the shipped implementation against it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::eval::format_sig9;
use crate::lossgrad::{gradcheck, GradCheckReport};
use crate::mlsdeform::mls_rigid_point;
use crate::mlsdeform::ControlPairSet;
use crate::pipeline::{
    plan_batches, standardize, train_chain, Category, DatasetEntry, StandardizeConfig,
};
use crate::pointcloud::{
    chamfer, emd_exact, nearest_rotation, orth_loss, PointCloud, RotationMatrix,
};
use crate::sketchimg::{
    binarize, dilate, rasterize_polyline, thin, BinaryMask, StructuringElement,
};

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct SelfTestReport {
    pub checks: Vec<CheckOutcome>,
    pub gradcheck: GradCheckReport,
}

impl SelfTestReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed) && self.gradcheck.all_passed()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for check in &self.checks {
            out.push_str(&format!(
                "check {}: {} ({})\n",
                check.name,
                if check.passed { "PASS" } else { "FAIL" },
                check.detail
            ));
        }
        out.push_str(&format!(
            "check gradient fidelity: {} (max_rel_err {:.3e} over {} trials)\n",
            if self.gradcheck.all_passed() {
                "PASS"
            } else {
                "FAIL"
            },
            self.gradcheck.max_rel_err(),
            self.gradcheck.trials.len()
        ));
        out.push_str(&format!(
            "selftest: {}\n",
            if self.all_passed() { "PASS" } else { "FAIL" }
        ));
        out
    }
}

/// Run every check. Deterministic given the seed.
pub fn run_selftest(seed: u64) -> SelfTestReport {
    let checks = vec![
        dilation_composition(),
        thinning_properties(),
        rigid_mls_reproduction(seed),
        chamfer_oracle(seed),
        emd_oracle(seed),
        orthogonality_machinery(seed),
        standardization_composition(),
        sampler_balance(seed),
    ];
    let gradcheck = gradcheck(50, seed).expect("positive trial count");
    SelfTestReport { checks, gradcheck }
}

fn outcome(name: &'static str, passed: bool, detail: String) -> CheckOutcome {
    CheckOutcome {
        name,
        passed,
        detail,
    }
}

fn dilation_composition() -> CheckOutcome {
    let mut failures = 0;
    let mut cases = 0;
    for y in (1..32).step_by(4) {
        for x in (1..32).step_by(4) {
            let mut mask = BinaryMask::empty(32, 32);
            mask.set(x, y, true);
            for k in 1..=5 {
                cases += 1;
                let iterated = dilate(&mask, StructuringElement::new(1).unwrap(), k);
                let single = dilate(&mask, StructuringElement::new(k).unwrap(), 1);
                if iterated != single {
                    failures += 1;
                }
            }
        }
    }
    outcome(
        "dilation composition law",
        failures == 0,
        format!("{cases} cases, {failures} failures"),
    )
}

fn thinning_properties() -> CheckOutcome {
    let strokes = [
        vec![(2i64, 2i64), (28, 6)],
        vec![(4, 24), (24, 4), (28, 28)],
        vec![(8, 8), (8, 24), (24, 24), (24, 8), (8, 8)],
    ];
    let mut passed = true;
    for points in &strokes {
        let img = rasterize_polyline(points, 32, 32).unwrap();
        let mask = dilate(&binarize(&img, 0.5), StructuringElement::new(1).unwrap(), 3);
        let thinned = thin(&mask);
        passed &= thin(&thinned) == thinned;
        passed &= thinned.is_subset_of(&mask);
        passed &= thinned.component_count() == mask.component_count();
    }
    outcome(
        "thinning idempotence and topology",
        passed,
        format!("{} strokes", strokes.len()),
    )
}

fn rigid_mls_reproduction(seed: u64) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x11);
    let mut max_err: f64 = 0.0;
    for _ in 0..10 {
        let theta: f64 = rng.random_range(-3.0..3.0);
        let t = (rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0));
        let sources: Vec<(f64, f64)> = (0..4)
            .map(|_| (rng.random_range(0.0..100.0), rng.random_range(0.0..100.0)))
            .collect();
        let targets: Vec<(f64, f64)> = sources
            .iter()
            .map(|&(x, y)| {
                let (s, c) = theta.sin_cos();
                (c * x - s * y + t.0, s * x + c * y + t.1)
            })
            .collect();
        let Ok(controls) = ControlPairSet::new(sources, targets, 1.0) else {
            continue;
        };
        for _ in 0..20 {
            let v = (rng.random_range(0.0..100.0), rng.random_range(0.0..100.0));
            let (s, c) = theta.sin_cos();
            let expected = (c * v.0 - s * v.1 + t.0, s * v.0 + c * v.1 + t.1);
            let got = mls_rigid_point(&controls, v);
            let err = ((got.0 - expected.0).powi(2) + (got.1 - expected.1).powi(2)).sqrt();
            max_err = max_err.max(err);
        }
    }
    outcome(
        "rigid MLS motion reproduction",
        max_err < 1e-9,
        format!("max error {}", format_sig9(max_err)),
    )
}

fn chamfer_oracle(seed: u64) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x22);
    let brute = |p: &PointCloud, q: &PointCloud| -> f64 {
        let nn = |pt: [f64; 3], other: &PointCloud| {
            other
                .points()
                .iter()
                .map(|&o| {
                    let dx = pt[0] - o[0];
                    let dy = pt[1] - o[1];
                    let dz = pt[2] - o[2];
                    dx * dx + dy * dy + dz * dz
                })
                .fold(f64::INFINITY, f64::min)
        };
        p.points().iter().map(|&pt| nn(pt, q)).sum::<f64>()
            + q.points().iter().map(|&qt| nn(qt, p)).sum::<f64>()
    };
    let mut mismatches = 0;
    for _ in 0..50 {
        let cloud = |rng: &mut ChaCha8Rng| {
            let n = rng.random_range(1..64);
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
            .unwrap()
        };
        let p = cloud(&mut rng);
        let q = cloud(&mut rng);
        if chamfer(&p, &q).to_bits() != brute(&p, &q).to_bits() {
            mismatches += 1;
        }
    }
    outcome(
        "chamfer equals brute force",
        mismatches == 0,
        format!("50 instances, {mismatches} mismatches"),
    )
}

fn emd_oracle(seed: u64) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x33);
    let mut max_gap: f64 = 0.0;
    for _ in 0..30 {
        let n = rng.random_range(1..6);
        let cloud = |rng: &mut ChaCha8Rng| {
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
            .unwrap()
        };
        let p = cloud(&mut rng);
        let q = cloud(&mut rng);
        let (cost, _) = emd_exact(&p, &q).unwrap();
        let brute = brute_force_emd(&p, &q);
        max_gap = max_gap.max((cost - brute).abs());
    }
    outcome(
        "emd equals factorial brute force",
        max_gap <= 1e-12,
        format!("30 instances, max gap {max_gap:.3e}"),
    )
}

fn brute_force_emd(p: &PointCloud, q: &PointCloud) -> f64 {
    fn recurse(
        p: &[[f64; 3]],
        q: &[[f64; 3]],
        row: usize,
        cols: &mut Vec<usize>,
        acc: f64,
        best: &mut f64,
    ) {
        if row == p.len() {
            *best = best.min(acc);
            return;
        }
        for k in 0..cols.len() {
            let c = cols.swap_remove(k);
            let dx = p[row][0] - q[c][0];
            let dy = p[row][1] - q[c][1];
            let dz = p[row][2] - q[c][2];
            let d = (dx * dx + dy * dy + dz * dz).sqrt();
            recurse(p, q, row + 1, cols, acc + d, best);
            cols.push(c);
            let last = cols.len() - 1;
            cols.swap(k, last);
        }
    }
    let mut best = f64::INFINITY;
    recurse(
        p.points(),
        q.points(),
        0,
        &mut (0..q.len()).collect(),
        0.0,
        &mut best,
    );
    best
}

fn orthogonality_machinery(seed: u64) -> CheckOutcome {
    let spot = orth_loss(&RotationMatrix::identity()) == 0.0
        && orth_loss(
            &RotationMatrix::raw([[2.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 2.0]]).unwrap(),
        ) == 27.0
        && orth_loss(
            &RotationMatrix::raw([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.0]]).unwrap(),
        ) == 1.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x44);
    let mut max_residual: f64 = 0.0;
    for _ in 0..10 {
        let base = RotationMatrix::rotation_z(rng.random_range(-3.0..3.0))
            .compose(&RotationMatrix::rotation_x(rng.random_range(-3.0..3.0)));
        let mut m = *base.entries();
        for row in &mut m {
            for cell in row.iter_mut() {
                *cell += rng.random_range(-0.05..0.05);
            }
        }
        let projected = nearest_rotation(&RotationMatrix::raw(m).unwrap()).unwrap();
        max_residual = max_residual.max(orth_loss(&projected));
    }
    outcome(
        "orthogonality spot values and projection",
        spot && max_residual < 1e-20,
        format!("projection residual {max_residual:.3e}"),
    )
}

fn standardization_composition() -> CheckOutcome {
    let img = rasterize_polyline(&[(6, 6), (40, 20), (12, 50)], 64, 64).unwrap();
    let identity = ControlPairSet::new(
        vec![(10.0, 10.0), (50.0, 20.0), (30.0, 50.0)],
        vec![(10.0, 10.0), (50.0, 20.0), (30.0, 50.0)],
        1.0,
    )
    .unwrap();
    let cfg = StandardizeConfig::default();
    let passed = match (
        train_chain(&img, &identity, 4, &cfg),
        standardize(&img, &cfg),
    ) {
        (Ok(chained), Ok(direct)) => chained == direct,
        _ => false,
    };
    outcome(
        "train chain with identity deformation equals standardize",
        passed,
        "pixel-exact comparison".into(),
    )
}

fn sampler_balance(seed: u64) -> CheckOutcome {
    let entries: Vec<DatasetEntry> = Category::ALL
        .iter()
        .flat_map(|&c| {
            (0..3).map(move |k| DatasetEntry {
                id: format!("{}-{k}", c.label()),
                category: c,
                sketch_path: "s.pgm".into(),
                cloud_path: "c.xyz".into(),
                viewpoint_index: 0,
            })
        })
        .collect();
    let passed = match plan_batches(&entries, 13, seed) {
        Ok(plan) => plan.batches().iter().all(|batch| {
            batch.len() == 13
                && Category::ALL
                    .iter()
                    .all(|c| batch.iter().filter(|id| id.starts_with(c.label())).count() == 1)
        }),
        Err(_) => false,
    };
    outcome(
        "sampler balance",
        passed,
        "13 categories x 3 entries".into(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selftest_passes_and_is_deterministic() {
        let a = run_selftest(0);
        assert!(a.all_passed(), "report:\n{}", a.to_text());
        let b = run_selftest(0);
        assert_eq!(a.to_text(), b.to_text());
    }
}
