//! PGM image I/O.
//!
//! Reads P2 (ASCII) and P5 (binary) with maxval up to 65535; writes 8-bit P5.
//! Header grammar: magic, then width, height, maxval as decimal integers
//! separated by whitespace (with `#` comments allowed between tokens), then a
//! single whitespace byte before the payload. Intensities map linearly to
//! `[0, 1]` as value / maxval, so an 8-bit write → read round trip is
//! bit-exact.

use std::fs;
use std::path::Path;

use super::SketchImage;
use crate::error::{Error, Result};

const MAX_PIXELS: usize = 1 << 30;

pub fn read_pgm(path: impl AsRef<Path>) -> Result<SketchImage> {
    let bytes = fs::read(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
    parse_pgm(&bytes)
}

pub fn write_pgm(img: &SketchImage, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path.as_ref(), encode_pgm(img)).map_err(|e| Error::io(path.as_ref(), e))
}

/// Encode as binary 8-bit P5.
pub fn encode_pgm(img: &SketchImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend(img.pixels().iter().map(|&p| (p * 255.0).round() as u8));
    out
}

pub fn parse_pgm(bytes: &[u8]) -> Result<SketchImage> {
    let mut cursor = Cursor { bytes, pos: 0 };
    let magic = cursor.token()?;
    let binary = match magic.as_str() {
        "P5" => true,
        "P2" => false,
        other => return Err(Error::PgmHeader(format!("unknown magic {other:?}"))),
    };
    let width = cursor.integer()? as usize;
    let height = cursor.integer()? as usize;
    let maxval = cursor.integer()?;
    if width == 0 || height == 0 || width.saturating_mul(height) > MAX_PIXELS {
        return Err(Error::PgmDimension { width, height });
    }
    if maxval == 0 || maxval > 65535 {
        return Err(Error::PgmHeader(format!("maxval {maxval} out of range")));
    }
    let count = width * height;
    let scale = 1.0 / maxval as f64;

    let raw: Vec<u64> = if binary {
        // exactly one whitespace byte separates the header from the payload
        cursor.expect_single_whitespace()?;
        let payload = &bytes[cursor.pos..];
        if maxval <= 255 {
            if payload.len() < count {
                return Err(Error::PgmTruncated {
                    expected: count,
                    found: payload.len(),
                });
            }
            payload[..count].iter().map(|&b| b as u64).collect()
        } else {
            // 16-bit samples are big-endian
            if payload.len() < 2 * count {
                return Err(Error::PgmTruncated {
                    expected: 2 * count,
                    found: payload.len(),
                });
            }
            payload[..2 * count]
                .chunks_exact(2)
                .map(|c| u64::from(c[0]) << 8 | u64::from(c[1]))
                .collect()
        }
    } else {
        let mut values = Vec::with_capacity(count);
        for _ in 0..count {
            match cursor.integer() {
                Ok(v) => values.push(v),
                Err(_) => {
                    return Err(Error::PgmTruncated {
                        expected: count,
                        found: values.len(),
                    })
                }
            }
        }
        values
    };

    for (i, &v) in raw.iter().enumerate() {
        if v > maxval {
            return Err(Error::PgmHeader(format!(
                "sample {i} has value {v} above maxval {maxval}"
            )));
        }
    }
    let pixels = raw.iter().map(|&v| v as f64 * scale).collect();
    SketchImage::new(width, height, pixels)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn skip_whitespace_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> Result<String> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::PgmHeader("unexpected end of header".into()));
        }
        String::from_utf8(self.bytes[start..self.pos].to_vec())
            .map_err(|_| Error::PgmHeader("non-ASCII header token".into()))
    }

    fn integer(&mut self) -> Result<u64> {
        let tok = self.token()?;
        tok.parse()
            .map_err(|_| Error::PgmHeader(format!("expected integer, got {tok:?}")))
    }

    fn expect_single_whitespace(&mut self) -> Result<()> {
        if self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::PgmHeader(
                "missing whitespace between maxval and payload".into(),
            ))
        }
    }
}
