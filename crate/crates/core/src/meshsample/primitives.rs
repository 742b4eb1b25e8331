//! Built-in primitive meshes for tests and synthetic datasets.

use super::TriangleMesh;

/// Axis-aligned unit cube centered at the origin (12 triangles).
pub fn cube() -> TriangleMesh {
    let s = 0.5;
    let vertices = vec![
        [-s, -s, -s],
        [s, -s, -s],
        [s, s, -s],
        [-s, s, -s],
        [-s, -s, s],
        [s, -s, s],
        [s, s, s],
        [-s, s, s],
    ];
    let quads = [
        [0, 1, 2, 3], // z = -s
        [4, 7, 6, 5], // z = +s
        [0, 4, 5, 1], // y = -s
        [3, 2, 6, 7], // y = +s
        [0, 3, 7, 4], // x = -s
        [1, 5, 6, 2], // x = +s
    ];
    let mut faces = Vec::with_capacity(12);
    for q in quads {
        faces.push([q[0], q[1], q[2]]);
        faces.push([q[0], q[2], q[3]]);
    }
    TriangleMesh::new(vertices, faces).expect("cube is a valid mesh")
}

/// Regular tetrahedron inscribed in the unit-radius sphere.
pub fn tetrahedron() -> TriangleMesh {
    let k = 1.0 / 3.0_f64.sqrt();
    let vertices = vec![[k, k, k], [k, -k, -k], [-k, k, -k], [-k, -k, k]];
    let faces = vec![[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]];
    TriangleMesh::new(vertices, faces).expect("tetrahedron is a valid mesh")
}

/// Regular octahedron with unit-distance vertices on the axes.
pub fn octahedron() -> TriangleMesh {
    let vertices = vec![
        [1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, -1.0, 0.0],
        [0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0],
    ];
    let faces = vec![
        [0, 2, 4],
        [2, 1, 4],
        [1, 3, 4],
        [3, 0, 4],
        [2, 0, 5],
        [1, 2, 5],
        [3, 1, 5],
        [0, 3, 5],
    ];
    TriangleMesh::new(vertices, faces).expect("octahedron is a valid mesh")
}

/// Closed cylinder of radius 0.5 and height 1 along the y axis.
pub fn cylinder(segments: usize) -> TriangleMesh {
    assert!(segments >= 3, "a cylinder needs at least 3 segments");
    let r = 0.5;
    let h = 0.5;
    let mut vertices = Vec::with_capacity(2 * segments + 2);
    for &y in &[-h, h] {
        for k in 0..segments {
            let a = 2.0 * std::f64::consts::PI * k as f64 / segments as f64;
            vertices.push([r * a.cos(), y, r * a.sin()]);
        }
    }
    let bottom_center = vertices.len();
    vertices.push([0.0, -h, 0.0]);
    let top_center = vertices.len();
    vertices.push([0.0, h, 0.0]);

    let mut faces = Vec::new();
    for k in 0..segments {
        let k1 = (k + 1) % segments;
        let (b0, b1) = (k, k1);
        let (t0, t1) = (segments + k, segments + k1);
        faces.push([b0, b1, t0]);
        faces.push([b1, t1, t0]);
        faces.push([bottom_center, b1, b0]);
        faces.push([top_center, t0, t1]);
    }
    TriangleMesh::new(vertices, faces).expect("cylinder is a valid mesh")
}
