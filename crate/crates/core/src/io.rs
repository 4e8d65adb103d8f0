//! Binary snapshots and CSV export.
//!
//! Snapshot layout (little endian): magic `MSK1`, `d: u32`, `N: u64`,
//! `L: f64`, 8 reserved zero bytes, then `N^d` samples as `f64` in row-major
//! order. Only the periodic part of a field is stored.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{MuskatError, Result};
use crate::field::InterfaceField;
use crate::grid::GridSpec;

pub const MAGIC: &[u8; 4] = b"MSK1";
pub const HEADER_LEN: usize = 32;

pub fn encode_snapshot(f: &InterfaceField) -> Vec<u8> {
    let g = f.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * g.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(g.dim() as u32).to_le_bytes());
    out.extend_from_slice(&(g.n() as u64).to_le_bytes());
    out.extend_from_slice(&g.period().to_le_bytes());
    out.extend_from_slice(&[0u8; 8]);
    for v in f.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_snapshot(bytes: &[u8]) -> Result<InterfaceField> {
    if bytes.len() < HEADER_LEN {
        return Err(MuskatError::Format(format!(
            "snapshot has {} bytes, header needs {HEADER_LEN}",
            bytes.len()
        )));
    }
    if &bytes[..4] != MAGIC {
        return Err(MuskatError::Format("bad magic".into()));
    }
    let word = |a: usize, b: usize| -> [u8; 8] { bytes[a..b].try_into().expect("8 bytes") };
    let dim = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes")) as usize;
    let n = u64::from_le_bytes(word(8, 16)) as usize;
    let period = f64::from_le_bytes(word(16, 24));
    let grid = GridSpec::new(dim, period, n).map_err(|e| MuskatError::Format(e.to_string()))?;
    let body = &bytes[HEADER_LEN..];
    if body.len() != 8 * grid.len() {
        return Err(MuskatError::Format(format!(
            "expected {} samples, found {} bytes",
            grid.len(),
            body.len()
        )));
    }
    let values = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    InterfaceField::new(grid, values)
}

pub fn write_snapshot(path: &Path, f: &InterfaceField) -> Result<()> {
    std::fs::write(path, encode_snapshot(f))?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<InterfaceField> {
    decode_snapshot(&std::fs::read(path)?)
}

/// Columns `index, x[, y], f`; `f` includes the affine part.
pub fn field_csv(f: &InterfaceField) -> String {
    let g = f.grid();
    let a = f.slope();
    let mut out = String::from(if g.dim() == 1 { "index,x,f\n" } else { "index,x,y,f\n" });
    for (i, v) in f.values().iter().enumerate() {
        let x = g.coords(i);
        let full = v + a[0] * x[0] + a[1] * x[1];
        if g.dim() == 1 {
            let _ = writeln!(out, "{i},{:?},{full:?}", x[0]);
        } else {
            let _ = writeln!(out, "{i},{:?},{:?},{full:?}", x[0], x[1]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshot_round_trip() {
        let g = GridSpec::new(2, 1.5, 8).unwrap();
        let f = InterfaceField::from_fn(g, |x| (x[0] * 3.0).sin() - x[1]).unwrap();
        let bytes = encode_snapshot(&f);
        assert_eq!(bytes.len(), 32 + 8 * 64);
        assert_eq!(decode_snapshot(&bytes).unwrap(), f);
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode_snapshot(&bad).is_err());
        assert!(decode_snapshot(&bytes[..40]).is_err());
    }

    #[test]
    fn csv_has_one_row_per_sample() {
        let g = GridSpec::new(1, 1.0, 8).unwrap();
        let csv = field_csv(&InterfaceField::zeros(g));
        assert_eq!(csv.lines().count(), 9);
        assert!(csv.starts_with("index,x,f"));
    }
}
