//! Point cloud file formats.
//!
//! ASCII XYZ: one `x y z` per line, written at full round-trip precision.
//! Binary PC3D: magic `PC3D`, little-endian u32 count, then n*3 f64
//! little-endian coordinates.

use std::fs;
use std::path::Path;

use super::PointCloud;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"PC3D";

pub fn encode_xyz(cloud: &PointCloud) -> String {
    let mut out = String::new();
    for p in cloud.points() {
        out.push_str(&format!("{} {} {}\n", p[0], p[1], p[2]));
    }
    out
}

pub fn parse_xyz(text: &str) -> Result<PointCloud> {
    let mut points = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::CloudParse {
                line,
                message: format!("expected 3 coordinates, got {}", fields.len()),
            });
        }
        let mut p = [0.0; 3];
        for (slot, field) in p.iter_mut().zip(&fields) {
            *slot = field.parse::<f64>().map_err(|e| Error::CloudParse {
                line,
                message: format!("bad number {field:?}: {e}"),
            })?;
        }
        points.push(p);
    }
    PointCloud::new(points)
}

pub fn read_xyz(path: impl AsRef<Path>) -> Result<PointCloud> {
    let text = fs::read_to_string(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
    parse_xyz(&text)
}

pub fn write_xyz(cloud: &PointCloud, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path.as_ref(), encode_xyz(cloud)).map_err(|e| Error::io(path.as_ref(), e))
}

pub fn encode_pc3d(cloud: &PointCloud) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + cloud.len() * 24);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(cloud.len() as u32).to_le_bytes());
    for p in cloud.points() {
        for &c in p {
            out.extend_from_slice(&c.to_le_bytes());
        }
    }
    out
}

pub fn parse_pc3d(bytes: &[u8]) -> Result<PointCloud> {
    if bytes.len() < 8 || &bytes[..4] != MAGIC {
        return Err(Error::CloudBinary("missing PC3D magic".into()));
    }
    let count = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let expected = 8 + count * 24;
    if bytes.len() != expected {
        return Err(Error::CloudBinary(format!(
            "expected {expected} bytes for {count} points, found {}",
            bytes.len()
        )));
    }
    let mut points = Vec::with_capacity(count);
    for chunk in bytes[8..].chunks_exact(24) {
        points.push([
            f64::from_le_bytes(chunk[0..8].try_into().unwrap()),
            f64::from_le_bytes(chunk[8..16].try_into().unwrap()),
            f64::from_le_bytes(chunk[16..24].try_into().unwrap()),
        ]);
    }
    PointCloud::new(points)
}

pub fn read_pc3d(path: impl AsRef<Path>) -> Result<PointCloud> {
    let bytes = fs::read(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
    parse_pc3d(&bytes)
}

pub fn write_pc3d(cloud: &PointCloud, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path.as_ref(), encode_pc3d(cloud)).map_err(|e| Error::io(path.as_ref(), e))
}
