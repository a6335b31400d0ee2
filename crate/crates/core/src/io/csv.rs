//! CSV formats: moment vectors, raw grids, gain schedules, and edge lists.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a
//! written file re-reads to bit-identical values and seeded runs produce
//! byte-identical outputs.

use std::fs;
use std::path::Path;

use crate::controller::GainSchedule;
use crate::error::CsvError;
use crate::moments::{BasisKind, DensityGrid, MomentBasis, MomentVector, Part};

/// Serializes a moment vector as `p,q,part,value` rows in canonical
/// component order.
pub fn moments_to_csv(m: &MomentVector) -> String {
    let mut out = String::from("p,q,part,value\n");
    for (c, v) in m.basis().components().iter().zip(m.values()) {
        out.push_str(&format!("{},{},{},{}\n", c.p, c.q, c.part, v));
    }
    out
}

pub fn write_moments_csv(path: &Path, m: &MomentVector) -> Result<(), CsvError> {
    fs::write(path, moments_to_csv(m))?;
    Ok(())
}

/// Parses a moment CSV, inferring the basis from the index set: any `im`
/// row means pseudo-Zernike (order = max p), otherwise Legendre
/// (order = max p+q). The rows must list the complete basis in canonical
/// order.
pub fn parse_moments_csv(text: &str) -> Result<MomentVector, CsvError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == "p,q,part,value" => {}
        Some((_, header)) => {
            return Err(CsvError::Malformed {
                line: 1,
                msg: format!("expected header 'p,q,part,value', got '{header}'"),
            })
        }
        None => return Err(CsvError::Malformed { line: 1, msg: "empty file".into() }),
    }

    let mut rows: Vec<(u32, u32, Part, f64)> = Vec::new();
    for (idx, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(CsvError::Malformed {
                line: lineno,
                msg: format!("expected 4 fields, got {}", fields.len()),
            });
        }
        let parse_u32 = |s: &str, what: &str| {
            s.trim().parse::<u32>().map_err(|e| CsvError::Malformed {
                line: lineno,
                msg: format!("bad {what} '{s}': {e}"),
            })
        };
        let p = parse_u32(fields[0], "p")?;
        let q = parse_u32(fields[1], "q")?;
        let part = match fields[2].trim().to_ascii_lowercase().as_str() {
            "re" => Part::Re,
            "im" => Part::Im,
            other => {
                return Err(CsvError::Malformed {
                    line: lineno,
                    msg: format!("part must be re or im, got '{other}'"),
                })
            }
        };
        let value = fields[3].trim().parse::<f64>().map_err(|e| CsvError::Malformed {
            line: lineno,
            msg: format!("bad value '{}': {e}", fields[3]),
        })?;
        rows.push((p, q, part, value));
    }
    if rows.is_empty() {
        return Err(CsvError::IncompleteBasis("no moment rows".into()));
    }

    let has_im = rows.iter().any(|r| r.2 == Part::Im);
    let (kind, order) = if has_im {
        (BasisKind::PseudoZernike, rows.iter().map(|r| r.0).max().unwrap())
    } else {
        (BasisKind::Legendre, rows.iter().map(|r| r.0 + r.1).max().unwrap())
    };
    let basis = MomentBasis::new(kind, order)
        .map_err(|e| CsvError::IncompleteBasis(e.to_string()))?;
    if rows.len() != basis.embedding_len() {
        return Err(CsvError::IncompleteBasis(format!(
            "{kind} order {order} needs {} rows, found {}",
            basis.embedding_len(),
            rows.len()
        )));
    }
    let mut values = Vec::with_capacity(rows.len());
    for (row, expected) in rows.iter().zip(basis.components()) {
        if row.0 != expected.p || row.1 != expected.q || row.2 != expected.part {
            return Err(CsvError::IncompleteBasis(format!(
                "row ({},{},{}) out of canonical order (expected ({},{},{}))",
                row.0, row.1, row.2, expected.p, expected.q, expected.part
            )));
        }
        values.push(row.3);
    }
    Ok(MomentVector::new(basis, values).expect("length checked above"))
}

pub fn read_moments_csv(path: &Path) -> Result<MomentVector, CsvError> {
    parse_moments_csv(&fs::read_to_string(path)?)
}

/// Raw grid values as one CSV row per grid row (row 0 = top).
pub fn grid_to_csv(grid: &DensityGrid) -> String {
    let mut out = String::new();
    for r in 0..grid.rows() {
        for c in 0..grid.cols() {
            if c > 0 {
                out.push(',');
            }
            out.push_str(&grid.get(r, c).to_string());
        }
        out.push('\n');
    }
    out
}

pub fn write_grid_csv(path: &Path, grid: &DensityGrid) -> Result<(), CsvError> {
    fs::write(path, grid_to_csv(grid))?;
    Ok(())
}

/// Gain schedule dump: `index,p,q,part,gamma`.
pub fn gains_to_csv(basis: &MomentBasis, gains: &GainSchedule) -> String {
    let mut out = String::from("index,p,q,part,gamma\n");
    for (i, (c, g)) in basis.components().iter().zip(gains.diag()).enumerate() {
        out.push_str(&format!("{i},{},{},{},{}\n", c.p, c.q, c.part, g));
    }
    out
}
