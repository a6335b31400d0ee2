//! PGM (portable graymap) reading and writing.
//!
//! Reads both ASCII (`P2`) and binary (`P5`) files with maxval up to 65535;
//! 16-bit binary samples are big-endian per the format. Writing always
//! emits ASCII `P2` with the grid min-max scaled onto 0..=255.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::PgmError;
use crate::moments::DensityGrid;

/// A parsed PGM image. Row 0 is the top row, matching [`DensityGrid`].
#[derive(Debug, Clone)]
pub struct PgmImage {
    pub rows: usize,
    pub cols: usize,
    pub maxval: u32,
    pub samples: Vec<u32>,
}

impl PgmImage {
    /// Converts intensity to mass. With `invert` false, intensity is mass
    /// directly; with `invert` true, mass is `maxval - intensity`, so dark
    /// shapes on white backgrounds become dense.
    pub fn into_density(self, invert: bool) -> DensityGrid {
        let maxval = f64::from(self.maxval);
        let values = self
            .samples
            .iter()
            .map(|&s| {
                if invert {
                    maxval - f64::from(s)
                } else {
                    f64::from(s)
                }
            })
            .collect();
        DensityGrid::new(self.rows, self.cols, values)
    }
}

pub fn read_pgm(path: &Path) -> Result<PgmImage, PgmError> {
    let bytes = fs::read(path)?;
    parse_pgm(&bytes)
}

pub fn parse_pgm(bytes: &[u8]) -> Result<PgmImage, PgmError> {
    if bytes.len() < 2 {
        return Err(PgmError::BadMagic(String::from_utf8_lossy(bytes).into()));
    }
    let magic = &bytes[..2];
    let binary = match magic {
        b"P2" => false,
        b"P5" => true,
        other => return Err(PgmError::BadMagic(String::from_utf8_lossy(other).into())),
    };

    let mut pos = 2;
    let cols = read_header_int(bytes, &mut pos)? as usize;
    let rows = read_header_int(bytes, &mut pos)? as usize;
    let maxval = read_header_int(bytes, &mut pos)?;
    if maxval == 0 || maxval > 65535 {
        return Err(PgmError::BadMaxval(maxval));
    }
    if rows == 0 || cols == 0 {
        return Err(PgmError::BadHeader(format!("degenerate size {cols}x{rows}")));
    }

    let expected = rows * cols;
    let mut samples = Vec::with_capacity(expected);
    if binary {
        // Exactly one whitespace byte separates the header from the raster.
        if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
            return Err(PgmError::BadHeader("missing raster separator".into()));
        }
        pos += 1;
        let wide = maxval > 255;
        let per = if wide { 2 } else { 1 };
        let avail = (bytes.len() - pos) / per;
        if avail < expected {
            return Err(PgmError::Truncated { expected, got: avail });
        }
        for i in 0..expected {
            let at = pos + i * per;
            let v = if wide {
                (u32::from(bytes[at]) << 8) | u32::from(bytes[at + 1])
            } else {
                u32::from(bytes[at])
            };
            samples.push(v);
        }
    } else {
        while samples.len() < expected {
            match try_read_header_int(bytes, &mut pos) {
                Some(Ok(v)) => samples.push(v),
                Some(Err(e)) => return Err(e),
                None => {
                    return Err(PgmError::Truncated { expected, got: samples.len() });
                }
            }
        }
    }
    for (i, &s) in samples.iter().enumerate() {
        if s > maxval {
            return Err(PgmError::BadPixel(format!(
                "sample {i} value {s} exceeds maxval {maxval}"
            )));
        }
    }
    Ok(PgmImage { rows, cols, maxval, samples })
}

fn read_header_int(bytes: &[u8], pos: &mut usize) -> Result<u32, PgmError> {
    try_read_header_int(bytes, pos)
        .unwrap_or_else(|| Err(PgmError::BadHeader("unexpected end of header".into())))
}

/// Reads the next ASCII integer, skipping whitespace and `#` comments.
fn try_read_header_int(bytes: &[u8], pos: &mut usize) -> Option<Result<u32, PgmError>> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    if *pos >= bytes.len() {
        return None;
    }
    let start = *pos;
    while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
        *pos += 1;
    }
    if *pos == start {
        return Some(Err(PgmError::BadPixel(format!(
            "expected digit, found byte {:?}",
            bytes[*pos] as char
        ))));
    }
    let text = std::str::from_utf8(&bytes[start..*pos]).expect("digits are ascii");
    Some(text.parse::<u32>().map_err(|e| PgmError::BadPixel(e.to_string())))
}

/// Serializes a grid as ASCII PGM, min-max scaled onto 0..=255. A constant
/// grid maps to all zeros.
pub fn grid_to_pgm(grid: &DensityGrid) -> String {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in grid.values() {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let span = hi - lo;
    let mut out = format!("P2\n{} {}\n255\n", grid.cols(), grid.rows());
    for r in 0..grid.rows() {
        let mut line = String::new();
        for c in 0..grid.cols() {
            let scaled = if span > 0.0 {
                ((grid.get(r, c) - lo) / span * 255.0).round() as u32
            } else {
                0
            };
            if c > 0 {
                line.push(' ');
            }
            line.push_str(&scaled.to_string());
        }
        out.push_str(&line);
        out.push('\n');
    }
    out
}

pub fn write_pgm(path: &Path, grid: &DensityGrid) -> Result<(), PgmError> {
    let mut file = fs::File::create(path)?;
    file.write_all(grid_to_pgm(grid).as_bytes())?;
    Ok(())
}
