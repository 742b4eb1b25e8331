//! Raster sketch images, binary masks, and the morphological operators the
//! standardization pipeline is built from.
//!
//! Convention throughout: sketches are dark-on-light, intensity 0 is ink and
//! intensity 1 is background. Pixel grids are row-major with `(x, y)` meaning
//! column `x` of row `y`.

mod pgm;
mod thin;

pub use pgm::{encode_pgm, parse_pgm, read_pgm, write_pgm};
pub use thin::thin;

use crate::error::{Error, Result};

/// Grayscale raster sketch with intensities in `[0, 1]` (0 = ink).
#[derive(Debug, Clone, PartialEq)]
pub struct SketchImage {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl SketchImage {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || pixels.len() != width * height {
            return Err(Error::ImageShape {
                width,
                height,
                pixels: pixels.len(),
            });
        }
        for (index, &value) in pixels.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::IntensityRange { value, index });
            }
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// All-background image.
    pub fn blank(width: usize, height: usize) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        Self {
            width,
            height,
            pixels: vec![1.0; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.pixels[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: f64) {
        debug_assert!((0.0..=1.0).contains(&value));
        self.pixels[y * self.width + x] = value;
    }

    /// Bilinear sample at a fractional position; positions outside the canvas
    /// read as background (1.0).
    pub fn sample_bilinear(&self, x: f64, y: f64) -> f64 {
        let x0 = x.floor();
        let y0 = y.floor();
        let fx = x - x0;
        let fy = y - y0;
        let at = |ix: f64, iy: f64| -> f64 {
            if ix < 0.0 || iy < 0.0 || ix >= self.width as f64 || iy >= self.height as f64 {
                1.0
            } else {
                self.get(ix as usize, iy as usize)
            }
        };
        let v00 = at(x0, y0);
        let v10 = at(x0 + 1.0, y0);
        let v01 = at(x0, y0 + 1.0);
        let v11 = at(x0 + 1.0, y0 + 1.0);
        let top = v00 * (1.0 - fx) + v10 * fx;
        let bottom = v01 * (1.0 - fx) + v11 * fx;
        top * (1.0 - fy) + bottom * fy
    }
}

/// Boolean ink mask derived from a [`SketchImage`] (true = ink).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn empty(width: usize, height: usize) -> Self {
        assert!(width > 0 && height > 0, "mask dimensions must be positive");
        Self {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.bits[y * self.width + x] = value;
    }

    pub fn ink_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Ink pixel coordinates in row-major order.
    pub fn ink_pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let width = self.width;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| (i % width, i / width))
    }

    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    /// Render as a grayscale image: ink 0.0, background 1.0.
    pub fn to_image(&self) -> SketchImage {
        SketchImage {
            width: self.width,
            height: self.height,
            pixels: self
                .bits
                .iter()
                .map(|&b| if b { 0.0 } else { 1.0 })
                .collect(),
        }
    }

    /// Number of 8-connected ink components.
    pub fn component_count(&self) -> usize {
        let mut seen = vec![false; self.bits.len()];
        let mut count = 0;
        let mut stack = Vec::new();
        for start in 0..self.bits.len() {
            if !self.bits[start] || seen[start] {
                continue;
            }
            count += 1;
            seen[start] = true;
            stack.push(start);
            while let Some(i) = stack.pop() {
                let (x, y) = (i % self.width, i / self.width);
                for dy in -1i64..=1 {
                    for dx in -1i64..=1 {
                        if dx == 0 && dy == 0 {
                            continue;
                        }
                        let nx = x as i64 + dx;
                        let ny = y as i64 + dy;
                        if nx < 0 || ny < 0 || nx >= self.width as i64 || ny >= self.height as i64 {
                            continue;
                        }
                        let j = ny as usize * self.width + nx as usize;
                        if self.bits[j] && !seen[j] {
                            seen[j] = true;
                            stack.push(j);
                        }
                    }
                }
            }
        }
        count
    }
}

/// Square structuring element of a given Chebyshev radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StructuringElement {
    radius: usize,
}

impl StructuringElement {
    pub fn new(radius: usize) -> Result<Self> {
        if radius == 0 {
            return Err(Error::ZeroRadius);
        }
        Ok(Self { radius })
    }

    pub fn radius(&self) -> usize {
        self.radius
    }
}

/// Threshold an image into an ink mask: a bit is set exactly where the
/// intensity is strictly below `threshold` (ink is dark).
pub fn binarize(img: &SketchImage, threshold: f64) -> BinaryMask {
    BinaryMask {
        width: img.width,
        height: img.height,
        bits: img.pixels.iter().map(|&p| p < threshold).collect(),
    }
}

/// Morphological dilation with a square structuring element, iterated.
///
/// Each iteration sets every pixel within Chebyshev distance `se.radius()` of
/// an ink pixel; zero iterations is the identity.
pub fn dilate(mask: &BinaryMask, se: StructuringElement, iterations: usize) -> BinaryMask {
    let mut out = mask.clone();
    for _ in 0..iterations {
        out = max_filter(&out, se.radius(), true);
    }
    out
}

/// Morphological erosion with a square structuring element, iterated.
/// Dual of [`dilate`]; an ink pixel survives only if its whole Chebyshev
/// neighborhood is ink.
pub fn erode(mask: &BinaryMask, se: StructuringElement, iterations: usize) -> BinaryMask {
    let mut out = mask.clone();
    for _ in 0..iterations {
        out = max_filter(&out, se.radius(), false);
    }
    out
}

// Separable sliding window over a square neighborhood: horizontal pass then
// vertical pass. `dilating` picks OR-of-window (dilate) vs AND-of-window
// with out-of-canvas treated as background (erode).
fn max_filter(mask: &BinaryMask, radius: usize, dilating: bool) -> BinaryMask {
    let (w, h) = (mask.width, mask.height);
    let r = radius as i64;
    let window = |bits: &[bool], len: i64, center: i64, stride: usize, base: usize| -> bool {
        let lo = (center - r).max(0);
        let hi = (center + r).min(len - 1);
        if dilating {
            (lo..=hi).any(|i| bits[base + i as usize * stride])
        } else {
            // out-of-canvas counts as background, so a window clipped by the
            // border can only erode
            if center - r < 0 || center + r > len - 1 {
                return false;
            }
            (lo..=hi).all(|i| bits[base + i as usize * stride])
        }
    };

    let mut horiz = vec![false; w * h];
    for y in 0..h {
        for x in 0..w {
            horiz[y * w + x] = window(&mask.bits, w as i64, x as i64, 1, y * w);
        }
    }
    let mut bits = vec![false; w * h];
    for y in 0..h {
        for x in 0..w {
            bits[y * w + x] = window(&horiz, h as i64, y as i64, w, x);
        }
    }
    BinaryMask {
        width: w,
        height: h,
        bits,
    }
}

/// Rasterize an 8-connected polyline onto a fresh canvas: ink 0 on the
/// stroke, background 1 elsewhere. Points are clamped into the canvas.
pub fn rasterize_polyline(
    points: &[(i64, i64)],
    width: usize,
    height: usize,
) -> Result<SketchImage> {
    if points.len() < 2 {
        return Err(Error::TooFewPoints(points.len()));
    }
    let clamp = |(x, y): (i64, i64)| (x.clamp(0, width as i64 - 1), y.clamp(0, height as i64 - 1));
    let mut img = SketchImage::blank(width, height);
    for pair in points.windows(2) {
        let (x0, y0) = clamp(pair[0]);
        let (x1, y1) = clamp(pair[1]);
        for (x, y) in bresenham(x0, y0, x1, y1) {
            img.set(x as usize, y as usize, 0.0);
        }
    }
    Ok(img)
}

fn bresenham(mut x0: i64, mut y0: i64, x1: i64, y1: i64) -> Vec<(i64, i64)> {
    let dx = (x1 - x0).abs();
    let dy = -(y1 - y0).abs();
    let sx = if x0 < x1 { 1 } else { -1 };
    let sy = if y0 < y1 { 1 } else { -1 };
    let mut err = dx + dy;
    let mut out = Vec::new();
    loop {
        out.push((x0, y0));
        if x0 == x1 && y0 == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x0 += sx;
        }
        if e2 <= dx {
            err += dx;
            y0 += sy;
        }
    }
    out
}
