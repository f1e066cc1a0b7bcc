//! Byte- and text-level codecs for the shared file formats.
//!
//! The same two formats carry descriptor sets (rows = frames, columns =
//! dimensions) and distance/score matrices (rows = references, columns =
//! queries):
//!
//! - CSV: one row per line, comma-separated decimal floats, no header.
//! - Binary: magic `VPRD`, little-endian `u32` version (1), `u32` rows,
//!   `u32` cols, then `rows * cols` little-endian `f64` values row-major.
//!
//! Ground truth is one reference index per line; prediction masks are one
//! `0`/`1` per line; match lists are `query,reference,score,accepted` rows.
//! File IO lives in the companion CLI crate; everything here works on
//! buffers.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matching::MatchCandidate;

pub const BIN_MAGIC: [u8; 4] = *b"VPRD";
pub const BIN_VERSION: u32 = 1;

/// Rectangular float table decoded from either format.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatTable {
    pub rows: usize,
    pub cols: usize,
    /// Row-major values, all finite.
    pub values: Vec<f64>,
}

pub fn encode_table_csv(rows: usize, cols: usize, values: &[f64]) -> String {
    debug_assert_eq!(values.len(), rows * cols);
    let mut out = String::new();
    for r in 0..rows {
        for c in 0..cols {
            if c > 0 {
                out.push(',');
            }
            // `{}` prints the shortest representation that round-trips.
            out.push_str(&format!("{}", values[r * cols + c]));
        }
        out.push('\n');
    }
    out
}

pub fn decode_table_csv(text: &str) -> Result<FloatTable> {
    let mut values = Vec::new();
    let mut cols = 0usize;
    let mut rows = 0usize;
    for (r, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let mut width = 0usize;
        for (c, field) in line.split(',').enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| Error::Parse {
                row: r,
                col: c,
                message: format!("not a number: {:?}", field.trim()),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row: r,
                    col: c,
                    message: "non-finite value".to_string(),
                });
            }
            values.push(v);
            width += 1;
        }
        if rows == 0 {
            cols = width;
        } else if width != cols {
            return Err(Error::Parse {
                row: r,
                col: width.min(cols),
                message: format!("ragged row: expected {cols} columns, found {width}"),
            });
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::Empty("csv table"));
    }
    Ok(FloatTable { rows, cols, values })
}

pub fn encode_table_bin(rows: usize, cols: usize, values: &[f64]) -> Vec<u8> {
    debug_assert_eq!(values.len(), rows * cols);
    let mut out = Vec::with_capacity(16 + values.len() * 8);
    out.extend_from_slice(&BIN_MAGIC);
    out.extend_from_slice(&BIN_VERSION.to_le_bytes());
    out.extend_from_slice(&(rows as u32).to_le_bytes());
    out.extend_from_slice(&(cols as u32).to_le_bytes());
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_table_bin(bytes: &[u8]) -> Result<FloatTable> {
    if bytes.len() < 16 {
        return Err(Error::Empty("binary table header"));
    }
    if bytes[0..4] != BIN_MAGIC {
        return Err(Error::Parse {
            row: 0,
            col: 0,
            message: "bad magic (expected VPRD)".to_string(),
        });
    }
    let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4 bytes"));
    let version = word(4);
    if version != BIN_VERSION {
        return Err(Error::Parse {
            row: 0,
            col: 4,
            message: format!("unsupported version {version}"),
        });
    }
    let rows = word(8) as usize;
    let cols = word(12) as usize;
    if rows == 0 || cols == 0 {
        return Err(Error::Empty("binary table"));
    }
    let expected = 16 + rows * cols * 8;
    if bytes.len() != expected {
        return Err(Error::SizeMismatch {
            what: "binary table payload bytes",
            left: expected,
            right: bytes.len(),
        });
    }
    let mut values = Vec::with_capacity(rows * cols);
    for (k, chunk) in bytes[16..].chunks_exact(8).enumerate() {
        let v = f64::from_le_bytes(chunk.try_into().expect("8 bytes"));
        if !v.is_finite() {
            return Err(Error::Parse {
                row: k / cols,
                col: k % cols,
                message: "non-finite value".to_string(),
            });
        }
        values.push(v);
    }
    Ok(FloatTable { rows, cols, values })
}

pub fn encode_gt_csv(refs: &[usize]) -> String {
    let mut out = String::new();
    for r in refs {
        out.push_str(&format!("{r}\n"));
    }
    out
}

pub fn decode_gt_csv(text: &str) -> Result<Vec<usize>> {
    let mut refs = Vec::new();
    for (r, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r').trim();
        if line.is_empty() {
            continue;
        }
        let v: usize = line.parse().map_err(|_| Error::Parse {
            row: r,
            col: 0,
            message: format!("not a reference index: {line:?}"),
        })?;
        refs.push(v);
    }
    if refs.is_empty() {
        return Err(Error::Empty("ground-truth csv"));
    }
    Ok(refs)
}

pub fn encode_mask_csv(mask: &[bool]) -> String {
    let mut out = String::new();
    for &b in mask {
        out.push_str(if b { "1\n" } else { "0\n" });
    }
    out
}

pub fn decode_mask_csv(text: &str) -> Result<Vec<bool>> {
    let mut mask = Vec::new();
    for (r, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r').trim();
        if line.is_empty() {
            continue;
        }
        match line {
            "0" => mask.push(false),
            "1" => mask.push(true),
            other => {
                return Err(Error::Parse {
                    row: r,
                    col: 0,
                    message: format!("expected 0 or 1, found {other:?}"),
                })
            }
        }
    }
    if mask.is_empty() {
        return Err(Error::Empty("prediction csv"));
    }
    Ok(mask)
}

/// `query,reference,score,accepted` rows; `accepted` is the prediction mask
/// bit so that discarded candidates stay available for FN accounting.
pub fn encode_matches_csv(matches: &[MatchCandidate], accepted: &[bool]) -> String {
    debug_assert_eq!(matches.len(), accepted.len());
    let mut out = String::new();
    for (c, &a) in matches.iter().zip(accepted) {
        out.push_str(&format!(
            "{},{},{},{}\n",
            c.query,
            c.reference,
            c.score,
            if a { 1 } else { 0 }
        ));
    }
    out
}

pub fn decode_matches_csv(text: &str) -> Result<(Vec<MatchCandidate>, Vec<bool>)> {
    let mut matches = Vec::new();
    let mut accepted = Vec::new();
    for (r, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r').trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::Parse {
                row: r,
                col: fields.len(),
                message: format!("expected 4 fields, found {}", fields.len()),
            });
        }
        let query: usize = fields[0].trim().parse().map_err(|_| Error::Parse {
            row: r,
            col: 0,
            message: "bad query index".to_string(),
        })?;
        let reference: usize = fields[1].trim().parse().map_err(|_| Error::Parse {
            row: r,
            col: 1,
            message: "bad reference index".to_string(),
        })?;
        let score: f64 = fields[2].trim().parse().map_err(|_| Error::Parse {
            row: r,
            col: 2,
            message: "bad score".to_string(),
        })?;
        if !score.is_finite() {
            return Err(Error::Parse {
                row: r,
                col: 2,
                message: "non-finite score".to_string(),
            });
        }
        let a = match fields[3].trim() {
            "0" => false,
            "1" => true,
            other => {
                return Err(Error::Parse {
                    row: r,
                    col: 3,
                    message: format!("expected 0 or 1, found {other:?}"),
                })
            }
        };
        matches.push(MatchCandidate {
            query,
            reference,
            score,
        });
        accepted.push(a);
    }
    if matches.is_empty() {
        return Err(Error::Empty("matches csv"));
    }
    Ok((matches, accepted))
}
