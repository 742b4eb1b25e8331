//! Exact nearest-neighbor queries over a fixed set of 3D points.
//!
//! Ties on distance resolve to the lowest point index, and pruning keeps
//! subtrees whose bounding plane sits exactly at the current best distance,
//! so queries return bit-identical results to a full linear scan.

#[inline]
pub(crate) fn dist2(a: [f64; 3], b: [f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}

pub(crate) struct KdTree<'a> {
    points: &'a [[f64; 3]],
    root: Option<Box<Node>>,
}

struct Node {
    index: usize,
    dim: usize,
    left: Option<Box<Node>>,
    right: Option<Box<Node>>,
}

impl<'a> KdTree<'a> {
    pub fn build(points: &'a [[f64; 3]]) -> Self {
        let mut order: Vec<usize> = (0..points.len()).collect();
        let root = build_node(points, &mut order, 0);
        KdTree { points, root }
    }

    /// Returns `(squared distance, index)` of the nearest point; ties break
    /// toward the lowest index.
    pub fn nearest(&self, query: [f64; 3]) -> (f64, usize) {
        let mut best = (f64::INFINITY, usize::MAX);
        if let Some(root) = &self.root {
            self.search(root, query, &mut best);
        }
        best
    }

    fn search(&self, node: &Node, query: [f64; 3], best: &mut (f64, usize)) {
        let point = self.points[node.index];
        let d2 = dist2(point, query);
        if d2 < best.0 || (d2 == best.0 && node.index < best.1) {
            *best = (d2, node.index);
        }
        let delta = query[node.dim] - point[node.dim];
        let (near, far) = if delta < 0.0 {
            (&node.left, &node.right)
        } else {
            (&node.right, &node.left)
        };
        if let Some(n) = near {
            self.search(n, query, best);
        }
        if let Some(f) = far {
            if delta * delta <= best.0 {
                self.search(f, query, best);
            }
        }
    }
}

fn build_node(points: &[[f64; 3]], order: &mut [usize], depth: usize) -> Option<Box<Node>> {
    if order.is_empty() {
        return None;
    }
    let dim = depth % 3;
    let mid = order.len() / 2;
    order.select_nth_unstable_by(mid, |&a, &b| {
        points[a][dim]
            .partial_cmp(&points[b][dim])
            .expect("point cloud coordinates are finite")
            .then(a.cmp(&b))
    });
    let index = order[mid];
    let (left, rest) = order.split_at_mut(mid);
    let right = &mut rest[1..];
    Some(Box::new(Node {
        index,
        dim,
        left: build_node(points, left, depth + 1),
        right: build_node(points, right, depth + 1),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn linear_scan(points: &[[f64; 3]], q: [f64; 3]) -> (f64, usize) {
        let mut best = (f64::INFINITY, usize::MAX);
        for (i, &p) in points.iter().enumerate() {
            let d2 = dist2(p, q);
            if d2 < best.0 {
                best = (d2, i);
            }
        }
        best
    }

    #[test]
    fn matches_linear_scan_bitwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let n = rng.random_range(1..80);
            let points: Vec<[f64; 3]> = (0..n)
                .map(|_| {
                    [
                        rng.random_range(-1.0..1.0),
                        rng.random_range(-1.0..1.0),
                        rng.random_range(-1.0..1.0),
                    ]
                })
                .collect();
            let tree = KdTree::build(&points);
            for _ in 0..20 {
                let q = [
                    rng.random_range(-1.5..1.5),
                    rng.random_range(-1.5..1.5),
                    rng.random_range(-1.5..1.5),
                ];
                let (bd, bi) = linear_scan(&points, q);
                let (td, ti) = tree.nearest(q);
                assert_eq!(bd.to_bits(), td.to_bits());
                assert_eq!(bi, ti);
            }
        }
    }

    #[test]
    fn ties_break_to_lowest_index() {
        // two points equidistant from the query on opposite sides
        let points = vec![[2.0, 0.0, 0.0], [0.0, 0.0, 0.0], [2.0, 0.0, 0.0]];
        let tree = KdTree::build(&points);
        let (_, idx) = tree.nearest([2.0, 0.0, 0.0]);
        assert_eq!(idx, 0);
        let (_, idx) = tree.nearest([1.0, 0.0, 0.0]);
        assert_eq!(idx, 0);
    }
}
