//! Point clouds, the two reconstruction metrics (Chamfer distance and exact
//! Earth Mover's Distance), rotation handling, and the nearest proper
//! rotation projection.
//!
//! The two metrics deliberately differ in their ground cost: Chamfer sums
//! squared nearest-neighbor distances in both directions, while EMD is the
//! minimum-cost bijection under unsquared Euclidean distances.

mod assignment;
mod io;
mod kdtree;

pub use io::{
    encode_pc3d, encode_xyz, parse_pc3d, parse_xyz, read_pc3d, read_xyz, write_pc3d, write_xyz,
};

use kdtree::{dist2, KdTree};

use crate::error::{Error, Result};

/// Orthogonality residual accepted by [`RotationMatrix::checked`].
pub const ROTATION_ORTH_TOL: f64 = 1e-6;

/// Cloud size above which [`emd_exact`] logs a warning about its O(n^3) cost.
pub const EMD_SIZE_GUARD: usize = 2048;

/// Non-empty set of finite 3D points.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Vec<[f64; 3]>,
}

impl PointCloud {
    pub fn new(points: Vec<[f64; 3]>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyCloud);
        }
        for (index, p) in points.iter().enumerate() {
            if !p.iter().all(|c| c.is_finite()) {
                return Err(Error::NonFinitePoint { index });
            }
        }
        Ok(Self { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees at least one point
    }

    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn translated(&self, offset: [f64; 3]) -> PointCloud {
        PointCloud {
            points: self
                .points
                .iter()
                .map(|p| [p[0] + offset[0], p[1] + offset[1], p[2] + offset[2]])
                .collect(),
        }
    }
}

/// 3x3 view matrix. `raw` admits any finite matrix (the unconstrained
/// estimate the loss is driven through); `checked` additionally requires
/// `|I - A A^T|_F <= 1e-6` and positive determinant, which is what the
/// metric-preservation guarantees are stated for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationMatrix {
    m: [[f64; 3]; 3],
    checked: bool,
}

impl RotationMatrix {
    pub fn raw(m: [[f64; 3]; 3]) -> Result<Self> {
        for (row, r) in m.iter().enumerate() {
            for (col, &v) in r.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFiniteMatrix { row, col });
                }
            }
        }
        Ok(Self { m, checked: false })
    }

    pub fn checked(m: [[f64; 3]; 3]) -> Result<Self> {
        let raw = Self::raw(m)?;
        let residual = orth_loss(&raw).sqrt();
        let det = raw.det();
        if residual > ROTATION_ORTH_TOL || det <= 0.0 {
            return Err(Error::NotARotation { residual, det });
        }
        Ok(Self { m, checked: true })
    }

    pub fn identity() -> Self {
        Self {
            m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            checked: true,
        }
    }

    pub fn rotation_x(radians: f64) -> Self {
        let (s, c) = radians.sin_cos();
        Self {
            m: [[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]],
            checked: true,
        }
    }

    pub fn rotation_y(radians: f64) -> Self {
        let (s, c) = radians.sin_cos();
        Self {
            m: [[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]],
            checked: true,
        }
    }

    pub fn rotation_z(radians: f64) -> Self {
        let (s, c) = radians.sin_cos();
        Self {
            m: [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]],
            checked: true,
        }
    }

    pub fn entries(&self) -> &[[f64; 3]; 3] {
        &self.m
    }

    pub fn is_checked(&self) -> bool {
        self.checked
    }

    /// Apply to a column vector: `A p`.
    #[inline]
    pub fn apply(&self, p: [f64; 3]) -> [f64; 3] {
        let m = &self.m;
        [
            m[0][0] * p[0] + m[0][1] * p[1] + m[0][2] * p[2],
            m[1][0] * p[0] + m[1][1] * p[1] + m[1][2] * p[2],
            m[2][0] * p[0] + m[2][1] * p[1] + m[2][2] * p[2],
        ]
    }

    pub fn transposed(&self) -> Self {
        let m = &self.m;
        Self {
            m: [
                [m[0][0], m[1][0], m[2][0]],
                [m[0][1], m[1][1], m[2][1]],
                [m[0][2], m[1][2], m[2][2]],
            ],
            checked: self.checked,
        }
    }

    /// Matrix product `self * rhs`.
    pub fn compose(&self, rhs: &Self) -> Self {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..3).map(|k| self.m[i][k] * rhs.m[k][j]).sum();
            }
        }
        Self {
            m,
            checked: self.checked && rhs.checked,
        }
    }

    pub fn det(&self) -> f64 {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }
}

/// A bijection between two equal-size clouds: `indices()[i]` is the index in
/// the second cloud matched to point `i` of the first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    perm: Vec<usize>,
}

impl Assignment {
    pub fn new(perm: Vec<usize>) -> Result<Self> {
        let len = perm.len();
        let mut seen = vec![false; len];
        for &i in &perm {
            if i >= len || seen[i] {
                return Err(Error::NotAPermutation { len });
            }
            seen[i] = true;
        }
        Ok(Self { perm })
    }

    pub fn indices(&self) -> &[usize] {
        &self.perm
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }
}

/// Chamfer distance: the sum of squared nearest-neighbor distances from each
/// cloud into the other. Sizes may differ. Accelerated by a kd-tree but
/// summed in fixed index order (all of `p`, then all of `q`), so the value is
/// bit-identical to the O(nm) double loop.
pub fn chamfer(p: &PointCloud, q: &PointCloud) -> f64 {
    let tree_q = KdTree::build(q.points());
    let tree_p = KdTree::build(p.points());
    // the two directional sums each accumulate in index order and are added
    // as a final step, which also makes the symmetry exact
    let forward: f64 = p.points().iter().map(|&pt| tree_q.nearest(pt).0).sum();
    let backward: f64 = q.points().iter().map(|&qt| tree_p.nearest(qt).0).sum();
    forward + backward
}

/// Gradient of [`chamfer`] with respect to the points of `p`:
/// `2 (p - nn_q(p))` from the forward term plus `2 (p - q)` for every `q`
/// whose nearest neighbor in `p` is this point. Nearest-neighbor ties break
/// to the lowest index.
pub fn chamfer_grad(p: &PointCloud, q: &PointCloud) -> Vec<[f64; 3]> {
    let tree_q = KdTree::build(q.points());
    let tree_p = KdTree::build(p.points());
    let mut grad = vec![[0.0; 3]; p.len()];
    for (k, &pt) in p.points().iter().enumerate() {
        let (_, j) = tree_q.nearest(pt);
        let nn = q.points()[j];
        for a in 0..3 {
            grad[k][a] += 2.0 * (pt[a] - nn[a]);
        }
    }
    for &qt in q.points() {
        let (_, i) = tree_p.nearest(qt);
        let pt = p.points()[i];
        for a in 0..3 {
            grad[i][a] += 2.0 * (pt[a] - qt[a]);
        }
    }
    grad
}

/// Exact Earth Mover's Distance between equal-size clouds: the minimum over
/// bijections of the summed (unsquared) Euclidean distances, together with an
/// optimal bijection.
pub fn emd_exact(p: &PointCloud, q: &PointCloud) -> Result<(f64, Assignment)> {
    if p.len() != q.len() {
        return Err(Error::SizeMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    let n = p.len();
    if n > EMD_SIZE_GUARD {
        log::warn!("emd_exact on {n} points: the exact solver is O(n^3)");
    }
    let mut cost = vec![0.0; n * n];
    for (i, &pi) in p.points().iter().enumerate() {
        for (j, &qj) in q.points().iter().enumerate() {
            cost[i * n + j] = dist2(pi, qj).sqrt();
        }
    }
    let (total, perm) = assignment::solve(&cost, n);
    Ok((total, Assignment { perm }))
}

/// Rotate every point: `p -> A p` (points are column vectors).
pub fn rotate(cloud: &PointCloud, a: &RotationMatrix) -> PointCloud {
    PointCloud {
        points: cloud.points.iter().map(|&p| a.apply(p)).collect(),
    }
}

/// Orthogonality regularizer `|I - A A^T|_F^2`.
pub fn orth_loss(a: &RotationMatrix) -> f64 {
    let e = orth_residual(a);
    e.iter().flatten().map(|&v| v * v).sum()
}

/// Gradient of [`orth_loss`]: `-4 (I - A A^T) A`.
pub fn orth_loss_grad(a: &RotationMatrix) -> [[f64; 3]; 3] {
    let e = orth_residual(a);
    let mut grad = [[0.0; 3]; 3];
    for (i, row) in grad.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = -4.0 * (0..3).map(|k| e[i][k] * a.m[k][j]).sum::<f64>();
        }
    }
    grad
}

fn orth_residual(a: &RotationMatrix) -> [[f64; 3]; 3] {
    let m = &a.m;
    let mut e = [[0.0; 3]; 3];
    for (i, row) in e.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let aat: f64 = (0..3).map(|k| m[i][k] * m[j][k]).sum();
            *cell = if i == j { 1.0 - aat } else { -aat };
        }
    }
    e
}

/// Project a full-rank matrix onto the nearest proper rotation (Frobenius
/// norm), via the singular decomposition with a determinant sign fix on the
/// smallest singular value.
pub fn nearest_rotation(a: &RotationMatrix) -> Result<RotationMatrix> {
    let m = nalgebra::Matrix3::from_fn(|r, c| a.m[r][c]);
    let svd = m.svd(true, true);
    let sigma = svd.singular_values;
    let largest = sigma.iter().cloned().fold(0.0, f64::max);
    let smallest = sigma.iter().cloned().fold(f64::INFINITY, f64::min);
    if smallest <= 1e-12 * largest.max(1e-300) {
        return Err(Error::RankDeficient { smallest });
    }
    let mut u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    if (u * v_t).determinant() < 0.0 {
        // flip the column of U paired with the smallest singular value
        let k = sigma.imin();
        for r in 0..3 {
            u[(r, k)] = -u[(r, k)];
        }
    }
    let r = u * v_t;
    let mut m_out = [[0.0; 3]; 3];
    for (i, row) in m_out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = r[(i, j)];
        }
    }
    RotationMatrix::checked(m_out)
}
