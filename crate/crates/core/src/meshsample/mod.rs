//! Mesh ingestion, area-weighted surface sampling, viewpoint generation, and
//! a deterministic pseudo-sketch projector.

pub mod primitives;

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::pointcloud::{PointCloud, RotationMatrix};
use crate::sketchimg::{dilate, erode, thin, BinaryMask, SketchImage, StructuringElement};

/// Indexed triangle mesh. Face indices are 0-based, in range, and distinct
/// within each face.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    vertices: Vec<[f64; 3]>,
    faces: Vec<[usize; 3]>,
}

impl TriangleMesh {
    pub fn new(vertices: Vec<[f64; 3]>, faces: Vec<[usize; 3]>) -> Result<Self> {
        if faces.is_empty() {
            return Err(Error::EmptyMesh);
        }
        for (index, v) in vertices.iter().enumerate() {
            if !v.iter().all(|c| c.is_finite()) {
                return Err(Error::NonFinitePoint { index });
            }
        }
        for &[a, b, c] in &faces {
            if a == b || b == c || a == c {
                return Err(Error::DegenerateFace { a, b, c });
            }
            for idx in [a, b, c] {
                if idx >= vertices.len() {
                    return Err(Error::ObjIndexRange {
                        index: idx as isize,
                        vertices: vertices.len(),
                        line: 0,
                    });
                }
            }
        }
        Ok(Self { vertices, faces })
    }

    pub fn vertices(&self) -> &[[f64; 3]] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn surface_area(&self) -> f64 {
        self.faces
            .iter()
            .map(|&f| triangle_area(self.corners(f)))
            .sum()
    }

    pub fn scaled(&self, factor: f64) -> TriangleMesh {
        TriangleMesh {
            vertices: self
                .vertices
                .iter()
                .map(|v| [v[0] * factor, v[1] * factor, v[2] * factor])
                .collect(),
            faces: self.faces.clone(),
        }
    }

    fn corners(&self, face: [usize; 3]) -> [[f64; 3]; 3] {
        [
            self.vertices[face[0]],
            self.vertices[face[1]],
            self.vertices[face[2]],
        ]
    }
}

fn triangle_area([a, b, c]: [[f64; 3]; 3]) -> f64 {
    let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
    let cross = [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ];
    0.5 * (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt()
}

/// Parse the OBJ subset: `v x y z` and polygonal `f i j k ...` records with
/// plain (possibly negative, 1-based) indices, plus `#` comments. Anything
/// else is rejected. Polygons are fan-triangulated.
pub fn parse_obj(text: &str) -> Result<TriangleMesh> {
    let mut vertices: Vec<[f64; 3]> = Vec::new();
    let mut faces: Vec<[usize; 3]> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        match tokens.next() {
            Some("v") => {
                let fields: Vec<&str> = tokens.collect();
                if fields.len() != 3 {
                    return Err(Error::ObjParse {
                        line,
                        message: format!("vertex needs 3 coordinates, got {}", fields.len()),
                    });
                }
                let mut v = [0.0; 3];
                for (slot, field) in v.iter_mut().zip(&fields) {
                    *slot = field.parse::<f64>().map_err(|_| Error::ObjParse {
                        line,
                        message: format!("non-numeric vertex coordinate {field:?}"),
                    })?;
                }
                vertices.push(v);
            }
            Some("f") => {
                let mut poly = Vec::new();
                for tok in tokens {
                    let raw_index: isize = tok.parse().map_err(|_| Error::ObjParse {
                        line,
                        message: format!("face index {tok:?} is not a plain integer"),
                    })?;
                    // 1-based; negative counts back from the vertices seen so far
                    let resolved = if raw_index > 0 {
                        raw_index as usize - 1
                    } else if raw_index < 0 {
                        let back = (-raw_index) as usize;
                        if back > vertices.len() {
                            return Err(Error::ObjIndexRange {
                                index: raw_index,
                                vertices: vertices.len(),
                                line,
                            });
                        }
                        vertices.len() - back
                    } else {
                        return Err(Error::ObjIndexRange {
                            index: 0,
                            vertices: vertices.len(),
                            line,
                        });
                    };
                    if resolved >= vertices.len() {
                        return Err(Error::ObjIndexRange {
                            index: raw_index,
                            vertices: vertices.len(),
                            line,
                        });
                    }
                    poly.push(resolved);
                }
                if poly.len() < 3 {
                    return Err(Error::ObjParse {
                        line,
                        message: format!("face needs at least 3 indices, got {}", poly.len()),
                    });
                }
                for k in 1..poly.len() - 1 {
                    faces.push([poly[0], poly[k], poly[k + 1]]);
                }
            }
            Some(other) => {
                return Err(Error::ObjParse {
                    line,
                    message: format!("unsupported record {other:?} (only v and f are accepted)"),
                });
            }
            None => {}
        }
    }
    TriangleMesh::new(vertices, faces)
}

pub fn load_obj(path: impl AsRef<Path>) -> Result<TriangleMesh> {
    let text = fs::read_to_string(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
    parse_obj(&text)
}

/// Draw `n` points on the mesh surface, each triangle weighted by its area
/// and positions uniform within the triangle (square-root barycentric
/// scheme). Zero-area triangles never receive points. Deterministic given
/// the seed.
pub fn sample_surface(mesh: &TriangleMesh, n: usize, seed: u64) -> Result<PointCloud> {
    let mut cumulative = Vec::with_capacity(mesh.faces.len());
    let mut triangles = Vec::with_capacity(mesh.faces.len());
    let mut total = 0.0;
    for &face in &mesh.faces {
        let corners = mesh.corners(face);
        let area = triangle_area(corners);
        if area > 0.0 {
            total += area;
            cumulative.push(total);
            triangles.push(corners);
        }
    }
    if total <= 0.0 {
        return Err(Error::ZeroSurfaceArea);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        let r = rng.random::<f64>() * total;
        let t = cumulative
            .partition_point(|&c| c <= r)
            .min(triangles.len() - 1);
        let [a, b, c] = triangles[t];
        let su = rng.random::<f64>().sqrt();
        let r2 = rng.random::<f64>();
        let (wa, wb, wc) = (1.0 - su, su * (1.0 - r2), su * r2);
        points.push([
            wa * a[0] + wb * b[0] + wc * c[0],
            wa * a[1] + wb * b[1] + wc * c[1],
            wa * a[2] + wb * b[2] + wc * c[2],
        ]);
    }
    PointCloud::new(points)
}

/// Camera rotations at uniform azimuth steps and a fixed elevation.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewpointSet {
    views: Vec<RotationMatrix>,
}

impl ViewpointSet {
    pub fn views(&self) -> &[RotationMatrix] {
        &self.views
    }

    pub fn len(&self) -> usize {
        self.views.len()
    }

    pub fn is_empty(&self) -> bool {
        self.views.is_empty()
    }

    /// One row per view: the 9 matrix entries, row-major, full precision.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for view in &self.views {
            let m = view.entries();
            let row: Vec<String> = m.iter().flatten().map(|v| format!("{v}")).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut views = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() {
                continue;
            }
            let fields: Vec<&str> = trimmed.split(',').collect();
            if fields.len() != 9 {
                return Err(Error::ViewpointCsv {
                    line,
                    message: format!("expected 9 entries, got {}", fields.len()),
                });
            }
            let mut m = [[0.0; 3]; 3];
            for (k, field) in fields.iter().enumerate() {
                m[k / 3][k % 3] = field
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::ViewpointCsv {
                        line,
                        message: format!("bad number {field:?}: {e}"),
                    })?;
            }
            views.push(RotationMatrix::checked(m)?);
        }
        if views.is_empty() {
            return Err(Error::NoViewpoints);
        }
        Ok(Self { views })
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path.as_ref(), self.to_csv()).map_err(|e| Error::io(path.as_ref(), e))
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
        Self::from_csv(&text)
    }
}

/// Build `count` views: azimuth steps of 360/count degrees about the +y axis
/// followed by the fixed elevation tilt about +x.
pub fn make_viewpoints(count: usize, elevation_deg: f64) -> Result<ViewpointSet> {
    if count == 0 {
        return Err(Error::NoViewpoints);
    }
    let tilt = RotationMatrix::rotation_x(elevation_deg.to_radians());
    let views = (0..count)
        .map(|k| {
            let azimuth = 2.0 * std::f64::consts::PI * k as f64 / count as f64;
            tilt.compose(&RotationMatrix::rotation_y(azimuth))
        })
        .collect();
    Ok(ViewpointSet { views })
}

/// Orthographic pseudo-sketch of a point cloud: rotate by `view`, drop the
/// depth (z) axis, fit isotropically into the canvas with a 5% margin, splat,
/// and thin the silhouette boundary into a stroke-like contour.
///
/// The fit uses the centroid and the maximum radius of the projected points,
/// so views that differ by an in-plane rotation produce ink sets related by
/// the same 2D rotation.
pub fn project_silhouette(
    cloud: &PointCloud,
    view: &RotationMatrix,
    width: usize,
    height: usize,
) -> SketchImage {
    let projected: Vec<(f64, f64)> = cloud
        .points()
        .iter()
        .map(|&p| {
            let r = view.apply(p);
            (r[0], r[1])
        })
        .collect();
    let n = projected.len() as f64;
    let cx = projected.iter().map(|p| p.0).sum::<f64>() / n;
    let cy = projected.iter().map(|p| p.1).sum::<f64>() / n;
    let radius = projected
        .iter()
        .map(|p| ((p.0 - cx).powi(2) + (p.1 - cy).powi(2)).sqrt())
        .fold(0.0, f64::max);
    let half_extent = 0.45 * width.min(height) as f64;
    let scale = if radius > 0.0 {
        half_extent / radius
    } else {
        0.0
    };
    let (ox, oy) = ((width as f64 - 1.0) / 2.0, (height as f64 - 1.0) / 2.0);

    let mut splat = BinaryMask::empty(width, height);
    for (x, y) in projected {
        let px = (ox + scale * (x - cx)).round();
        let py = (oy + scale * (y - cy)).round();
        let px = px.clamp(0.0, width as f64 - 1.0) as usize;
        let py = py.clamp(0.0, height as f64 - 1.0) as usize;
        splat.set(px, py, true);
    }

    let se = StructuringElement::new(1).expect("radius 1");
    let solid = dilate(&splat, se, 2);
    let interior = erode(&solid, se, 1);
    let mut boundary = BinaryMask::empty(width, height);
    for (x, y) in solid.ink_pixels() {
        if !interior.get(x, y) {
            boundary.set(x, y, true);
        }
    }
    thin(&boundary).to_image()
}
