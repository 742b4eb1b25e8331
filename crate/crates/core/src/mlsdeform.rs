//! Moving-least-squares rigid deformation of sketches, random distortion
//! generation, and spatial augmentation.
//!
//! Each evaluation point `v` gets its own rigid (rotation + translation) map,
//! fit to control pairs `(p_i, q_i)` under weights `w_i = 1 / |p_i - v|^(2a)`.
//! The closed form: with weighted centroids `p*`, `q*` and centered controls
//! `p^_i`, `q^_i`, accumulate the 2-vector `z = sum_i w_i (p^_i . q^_i,
//! p^_i x q^_i)`; the optimal rotation is `z / |z|` acting on `v - p*` (as a
//! complex number), and the result is `q* + |v - p*| * z (v - p*) / |z (v - p*)|`.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::sketchimg::{BinaryMask, SketchImage};

/// Default lattice spacing (pixels) for [`build_field`] / [`deform_sketch`].
pub const DEFAULT_FIELD_SPACING: usize = 4;

/// Default weight exponent; the standard choice for rigid MLS.
pub const DEFAULT_ALPHA: f64 = 1.0;

/// Default control count for [`random_deformation`]. A two-scale scheme (a
/// few far-spread controls plus many local ones) can be emulated by merging
/// two draws with different counts and sigmas.
pub const DEFAULT_CONTROL_COUNT: usize = 8;

/// Default [`random_deformation`] magnitude: 5% of the image diagonal.
pub fn default_sigma(width: usize, height: usize) -> f64 {
    0.05 * ((width * width + height * height) as f64).sqrt()
}

/// MLS control points: sources `p_i`, targets `q_i`, weight exponent `alpha`.
///
/// Sources must be pairwise distinct so the inverse-distance weights are
/// well-defined per control.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlPairSet {
    sources: Vec<(f64, f64)>,
    targets: Vec<(f64, f64)>,
    alpha: f64,
}

impl ControlPairSet {
    pub fn new(sources: Vec<(f64, f64)>, targets: Vec<(f64, f64)>, alpha: f64) -> Result<Self> {
        if sources.is_empty() || sources.len() != targets.len() {
            return Err(Error::ControlCount {
                sources: sources.len(),
                targets: targets.len(),
            });
        }
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(Error::BadAlpha(alpha));
        }
        for &(x, y) in sources.iter().chain(targets.iter()) {
            if !x.is_finite() || !y.is_finite() {
                return Err(Error::NonFiniteControl { x, y });
            }
        }
        for i in 0..sources.len() {
            for j in i + 1..sources.len() {
                if sources[i] == sources[j] {
                    return Err(Error::DuplicateControl {
                        x: sources[i].0,
                        y: sources[i].1,
                    });
                }
            }
        }
        Ok(Self {
            sources,
            targets,
            alpha,
        })
    }

    pub fn len(&self) -> usize {
        self.sources.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees at least one pair
    }

    pub fn sources(&self) -> &[(f64, f64)] {
        &self.sources
    }

    pub fn targets(&self) -> &[(f64, f64)] {
        &self.targets
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Swap the roles of sources and targets, used for backward warping.
    ///
    /// Targets are not required to be distinct, so exact duplicates are
    /// dropped (first occurrence wins) to keep the swapped set valid.
    pub fn swapped(&self) -> ControlPairSet {
        let mut sources = Vec::with_capacity(self.len());
        let mut targets = Vec::with_capacity(self.len());
        for (&q, &p) in self.targets.iter().zip(&self.sources) {
            if !sources.contains(&q) {
                sources.push(q);
                targets.push(p);
            }
        }
        ControlPairSet {
            sources,
            targets,
            alpha: self.alpha,
        }
    }

    /// Serialize as a header line `alpha=<value>` followed by one
    /// `px,py,qx,qy` row per control, all at full float precision.
    pub fn to_csv(&self) -> String {
        let mut out = format!("alpha={}\n", self.alpha);
        for (&(px, py), &(qx, qy)) in self.sources.iter().zip(&self.targets) {
            out.push_str(&format!("{px},{py},{qx},{qy}\n"));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut alpha = None;
        let mut sources = Vec::new();
        let mut targets = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() {
                continue;
            }
            if alpha.is_none() {
                let value = trimmed.strip_prefix("alpha=").ok_or(Error::ControlCsv {
                    line,
                    message: "expected header line alpha=<value>".into(),
                })?;
                alpha = Some(value.parse::<f64>().map_err(|e| Error::ControlCsv {
                    line,
                    message: format!("bad alpha: {e}"),
                })?);
                continue;
            }
            let fields: Vec<&str> = trimmed.split(',').collect();
            if fields.len() != 4 {
                return Err(Error::ControlCsv {
                    line,
                    message: format!("expected 4 comma-separated fields, got {}", fields.len()),
                });
            }
            let mut nums = [0.0; 4];
            for (slot, field) in nums.iter_mut().zip(&fields) {
                *slot = field.trim().parse::<f64>().map_err(|e| Error::ControlCsv {
                    line,
                    message: format!("bad number {field:?}: {e}"),
                })?;
            }
            sources.push((nums[0], nums[1]));
            targets.push((nums[2], nums[3]));
        }
        let alpha = alpha.ok_or(Error::ControlCsv {
            line: 1,
            message: "missing alpha header".into(),
        })?;
        ControlPairSet::new(sources, targets, alpha)
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
        Self::from_csv(&text)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path.as_ref(), self.to_csv()).map_err(|e| Error::io(path.as_ref(), e))
    }
}

/// Rigid MLS evaluation at a single point.
///
/// If `v` coincides with a source the corresponding target is returned (the
/// interpolation limit), and a degenerate zero accumulator falls back to the
/// pure translation `q* + (v - p*)`; with a single control that fallback is
/// exactly the translation by `q1 - p1`.
pub fn mls_rigid_point(controls: &ControlPairSet, v: (f64, f64)) -> (f64, f64) {
    for (&p, &q) in controls.sources.iter().zip(&controls.targets) {
        if p == v {
            return q;
        }
    }

    let alpha = controls.alpha;
    let n = controls.len();
    let mut weights = Vec::with_capacity(n);
    let mut weight_sum = 0.0;
    for &(px, py) in &controls.sources {
        let d2 = (px - v.0) * (px - v.0) + (py - v.1) * (py - v.1);
        let w = d2.powf(-alpha);
        weights.push(w);
        weight_sum += w;
    }
    if !weight_sum.is_finite() {
        // numerically indistinguishable from a coincident control
        let idx = weights.iter().position(|w| !w.is_finite()).unwrap_or(0);
        return controls.targets[idx];
    }

    // weighted means accumulated relative to the first control, so a single
    // control yields exactly centered residuals and lands in the
    // pure-translation fallback below
    let ref_p = controls.sources[0];
    let ref_q = controls.targets[0];
    let mut p_acc = (0.0, 0.0);
    let mut q_acc = (0.0, 0.0);
    for ((&w, &p), &q) in weights.iter().zip(&controls.sources).zip(&controls.targets) {
        p_acc.0 += w * (p.0 - ref_p.0);
        p_acc.1 += w * (p.1 - ref_p.1);
        q_acc.0 += w * (q.0 - ref_q.0);
        q_acc.1 += w * (q.1 - ref_q.1);
    }
    let p_star = (
        ref_p.0 + p_acc.0 / weight_sum,
        ref_p.1 + p_acc.1 / weight_sum,
    );
    let q_star = (
        ref_q.0 + q_acc.0 / weight_sum,
        ref_q.1 + q_acc.1 / weight_sum,
    );

    // z = sum_i w_i * (p^ . q^, p^ x q^), the unnormalized optimal rotation
    let mut zr = 0.0;
    let mut zi = 0.0;
    for ((&w, &p), &q) in weights.iter().zip(&controls.sources).zip(&controls.targets) {
        let ph = (p.0 - p_star.0, p.1 - p_star.1);
        let qh = (q.0 - q_star.0, q.1 - q_star.1);
        zr += w * (ph.0 * qh.0 + ph.1 * qh.1);
        zi += w * (ph.0 * qh.1 - ph.1 * qh.0);
    }

    let vh = (v.0 - p_star.0, v.1 - p_star.1);
    let fx = zr * vh.0 - zi * vh.1;
    let fy = zr * vh.1 + zi * vh.0;
    let f_norm = (fx * fx + fy * fy).sqrt();
    if f_norm == 0.0 {
        return (q_star.0 + vh.0, q_star.1 + vh.1);
    }
    let v_norm = (vh.0 * vh.0 + vh.1 * vh.1).sqrt();
    (
        q_star.0 + v_norm * fx / f_norm,
        q_star.1 + v_norm * fy / f_norm,
    )
}

/// Displacements of [`mls_rigid_point`] precomputed over a pixel lattice and
/// interpolated bilinearly in between.
#[derive(Debug, Clone)]
pub struct DeformField {
    spacing: usize,
    cols: usize,
    rows: usize,
    displacement: Vec<(f64, f64)>,
}

impl DeformField {
    pub fn spacing(&self) -> usize {
        self.spacing
    }

    /// Map a point through the field. Lattice nodes are exact; everything
    /// else is bilinear in the node displacements.
    pub fn map_point(&self, v: (f64, f64)) -> (f64, f64) {
        let s = self.spacing as f64;
        let gx = (v.0 / s).clamp(0.0, (self.cols - 1) as f64);
        let gy = (v.1 / s).clamp(0.0, (self.rows - 1) as f64);
        let i = (gx.floor() as usize).min(self.cols.saturating_sub(2));
        let j = (gy.floor() as usize).min(self.rows.saturating_sub(2));
        let fx = gx - i as f64;
        let fy = gy - j as f64;
        let at = |i: usize, j: usize| self.displacement[j * self.cols + i];
        let (i1, j1) = ((i + 1).min(self.cols - 1), (j + 1).min(self.rows - 1));
        let d00 = at(i, j);
        let d10 = at(i1, j);
        let d01 = at(i, j1);
        let d11 = at(i1, j1);
        let top = (
            d00.0 * (1.0 - fx) + d10.0 * fx,
            d00.1 * (1.0 - fx) + d10.1 * fx,
        );
        let bottom = (
            d01.0 * (1.0 - fx) + d11.0 * fx,
            d01.1 * (1.0 - fx) + d11.1 * fx,
        );
        (
            v.0 + top.0 * (1.0 - fy) + bottom.0 * fy,
            v.1 + top.1 * (1.0 - fy) + bottom.1 * fy,
        )
    }
}

/// Evaluate the MLS map over a lattice covering the whole canvas.
pub fn build_field(
    controls: &ControlPairSet,
    width: usize,
    height: usize,
    spacing: usize,
) -> Result<DeformField> {
    if spacing == 0 {
        return Err(Error::ZeroSpacing);
    }
    let cols = (width - 1).div_ceil(spacing) + 1;
    let rows = (height - 1).div_ceil(spacing) + 1;
    let mut displacement = Vec::with_capacity(cols * rows);
    for j in 0..rows {
        for i in 0..cols {
            let v = ((i * spacing) as f64, (j * spacing) as f64);
            let mapped = mls_rigid_point(controls, v);
            displacement.push((mapped.0 - v.0, mapped.1 - v.1));
        }
    }
    Ok(DeformField {
        spacing,
        cols,
        rows,
        displacement,
    })
}

/// Warp a sketch by the MLS deformation (operator D1).
///
/// Backward warping: the inverse map is approximated by MLS with the control
/// roles swapped (sources = targets and vice versa); each output pixel
/// samples the source bilinearly there and thresholds at 0.5, with
/// out-of-canvas reads filling as background.
pub fn deform_sketch(
    img: &SketchImage,
    controls: &ControlPairSet,
    spacing: usize,
) -> Result<SketchImage> {
    let field = build_field(&controls.swapped(), img.width(), img.height(), spacing)?;
    let mut out = SketchImage::blank(img.width(), img.height());
    for y in 0..img.height() {
        for x in 0..img.width() {
            let src = field.map_point((x as f64, y as f64));
            let value = img.sample_bilinear(src.0, src.1);
            out.set(x, y, if value < 0.5 { 0.0 } else { 1.0 });
        }
    }
    Ok(out)
}

/// Sample a random deformation: `k` distinct ink pixels become sources and
/// targets are offset by isotropic Gaussian noise (std `sigma`), clamped to
/// the canvas. Deterministic given the seed.
pub fn random_deformation(
    mask: &BinaryMask,
    k: usize,
    sigma: f64,
    seed: u64,
) -> Result<ControlPairSet> {
    if sigma < 0.0 || !sigma.is_finite() {
        return Err(Error::NegativeSigma(sigma));
    }
    let ink: Vec<(usize, usize)> = mask.ink_pixels().collect();
    if ink.len() < k || k == 0 {
        return Err(Error::NotEnoughInk {
            required: k,
            available: ink.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chosen = sample(&mut rng, ink.len(), k);
    let normal = Normal::new(0.0, sigma).expect("sigma validated above");
    let mut sources = Vec::with_capacity(k);
    let mut targets = Vec::with_capacity(k);
    for idx in chosen.iter() {
        let (x, y) = ink[idx];
        let src = (x as f64, y as f64);
        let dx: f64 = normal.sample(&mut rng);
        let dy: f64 = normal.sample(&mut rng);
        sources.push(src);
        targets.push((
            (src.0 + dx).clamp(0.0, mask.width() as f64 - 1.0),
            (src.1 + dy).clamp(0.0, mask.height() as f64 - 1.0),
        ));
    }
    ControlPairSet::new(sources, targets, DEFAULT_ALPHA)
}

/// Rotate about the image center by `theta` degrees, then translate by
/// `(dx, dy)` pixels. Backward warp with bilinear sampling, background fill 1.
///
/// Positive `theta` turns the +x axis toward the +y axis; the center is the
/// pixel-grid center `((w - 1) / 2, (h - 1) / 2)`.
pub fn augment(img: &SketchImage, dx: f64, dy: f64, theta_deg: f64) -> SketchImage {
    let (w, h) = (img.width(), img.height());
    let cx = (w as f64 - 1.0) / 2.0;
    let cy = (h as f64 - 1.0) / 2.0;
    let t = -theta_deg.to_radians();
    let (sin, cos) = t.sin_cos();
    let mut out = SketchImage::blank(w, h);
    for y in 0..h {
        for x in 0..w {
            let rx = x as f64 - cx - dx;
            let ry = y as f64 - cy - dy;
            let sx = cos * rx - sin * ry + cx;
            let sy = sin * rx + cos * ry + cy;
            out.set(x, y, img.sample_bilinear(sx, sy));
        }
    }
    out
}
