//! Independent oracles shared by the integration suites. Everything here
//! recomputes expected values from first principles (double loops, factorial
//! enumeration, closed-form geometry) without touching the accelerated
//! implementation paths it checks.
#![allow(dead_code)] // each integration test compiles its own copy

use rand::Rng;
use sketch3d::pointcloud::PointCloud;

/// O(nm) Chamfer distance: per-direction sums in index order, then one add.
pub fn chamfer_brute(p: &PointCloud, q: &PointCloud) -> f64 {
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
    let forward: f64 = p.points().iter().map(|&pt| nn(pt, q)).sum();
    let backward: f64 = q.points().iter().map(|&qt| nn(qt, p)).sum();
    forward + backward
}

/// Factorial-enumeration EMD (minimum over all bijections).
pub fn emd_brute(p: &PointCloud, q: &PointCloud) -> f64 {
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

/// Distance from a point to a triangle (closest-point region walk).
pub fn point_triangle_distance(p: [f64; 3], a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    let sub = |x: [f64; 3], y: [f64; 3]| [x[0] - y[0], x[1] - y[1], x[2] - y[2]];
    let add = |x: [f64; 3], y: [f64; 3]| [x[0] + y[0], x[1] + y[1], x[2] + y[2]];
    let scale = |x: [f64; 3], s: f64| [x[0] * s, x[1] * s, x[2] * s];
    let dot = |x: [f64; 3], y: [f64; 3]| x[0] * y[0] + x[1] * y[1] + x[2] * y[2];
    let norm = |x: [f64; 3]| dot(x, x).sqrt();

    let ab = sub(b, a);
    let ac = sub(c, a);
    let ap = sub(p, a);
    let d1 = dot(ab, ap);
    let d2 = dot(ac, ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return norm(ap);
    }
    let bp = sub(p, b);
    let d3 = dot(ab, bp);
    let d4 = dot(ac, bp);
    if d3 >= 0.0 && d4 <= d3 {
        return norm(bp);
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return norm(sub(p, add(a, scale(ab, v))));
    }
    let cp = sub(p, c);
    let d5 = dot(ab, cp);
    let d6 = dot(ac, cp);
    if d6 >= 0.0 && d5 <= d6 {
        return norm(cp);
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return norm(sub(p, add(a, scale(ac, w))));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return norm(sub(p, add(b, scale(sub(c, b), w))));
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    let closest = add(a, add(scale(ab, v), scale(ac, w)));
    norm(sub(p, closest))
}

pub fn random_cloud(rng: &mut impl Rng, n: usize, span: f64) -> PointCloud {
    PointCloud::new(
        (0..n)
            .map(|_| {
                [
                    rng.random_range(-span..span),
                    rng.random_range(-span..span),
                    rng.random_range(-span..span),
                ]
            })
            .collect(),
    )
    .expect("random clouds are finite and non-empty")
}
