//! Grid file formats.
//!
//! Native binary layout (all integers and floats little-endian):
//!
//! ```text
//! b"MIFG"  0x01  k:u32  dims[k]:u32  values[prod(dims)]:f64   (row-major)
//! ```
//!
//! CSV holds 2D grids only: one row per line, comma-separated.

use std::fs;
use std::path::Path;

use super::GridSignal;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"MIFG";
const VERSION: u8 = 0x01;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridFormat {
    Native,
    Csv,
}

impl GridFormat {
    /// `.csv` selects CSV, anything else the native format.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => GridFormat::Csv,
            _ => GridFormat::Native,
        }
    }
}

pub fn load_grid(path: impl AsRef<Path>, format: GridFormat) -> Result<GridSignal> {
    let path = path.as_ref();
    match format {
        GridFormat::Native => decode_native(&fs::read(path)?),
        GridFormat::Csv => parse_csv(&fs::read_to_string(path)?),
    }
}

pub fn save_grid(signal: &GridSignal, path: impl AsRef<Path>, format: GridFormat) -> Result<()> {
    let bytes = match format {
        GridFormat::Native => encode_native(signal),
        GridFormat::Csv => to_csv(signal)?.into_bytes(),
    };
    fs::write(path, bytes)?;
    Ok(())
}

pub fn encode_native(signal: &GridSignal) -> Vec<u8> {
    let dims = signal.dims();
    let mut out = Vec::with_capacity(9 + 4 * dims.len() + 8 * signal.len());
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&(dims.len() as u32).to_le_bytes());
    for &d in dims {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for v in signal.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_native(bytes: &[u8]) -> Result<GridSignal> {
    let mut reader = ByteReader { bytes, pos: 0 };
    let magic = reader.take(4, "magic")?;
    if magic != MAGIC {
        return Err(Error::parse("byte 0", "bad magic, expected \"MIFG\""));
    }
    let version = reader.take(1, "version")?[0];
    if version != VERSION {
        return Err(Error::parse("byte 4", format!("unsupported version {version}")));
    }
    let k = reader.u32("rank")? as usize;
    if k == 0 {
        return Err(Error::parse("byte 5", "rank must be at least 1"));
    }
    let mut dims = Vec::with_capacity(k.min(64));
    for a in 0..k {
        let at = reader.pos;
        let d = reader.u32("dimension")? as usize;
        if d == 0 {
            return Err(Error::parse(format!("byte {at}"), format!("axis {a} has zero extent")));
        }
        dims.push(d);
    }
    let count = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| Error::parse(format!("byte {}", reader.pos), "dims overflow"))?;
    let payload_at = reader.pos;
    let remaining = bytes.len() - payload_at;
    if count.checked_mul(8) != Some(remaining) {
        return Err(Error::parse(
            format!("byte {payload_at}"),
            format!("payload holds {remaining} bytes, dims {dims:?} need {}", count.saturating_mul(8)),
        ));
    }
    let mut values = Vec::with_capacity(count);
    for i in 0..count {
        let at = reader.pos;
        let v = f64::from_le_bytes(reader.take(8, "value")?.try_into().expect("8 bytes"));
        if !v.is_finite() {
            return Err(Error::parse(format!("byte {at}"), format!("non-finite value at flat index {i}")));
        }
        values.push(v);
    }
    GridSignal::new(dims, values)
}

pub fn parse_csv(text: &str) -> Result<GridSignal> {
    let mut values = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (line_no, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let mut n = 0;
        for (col, field) in line.split(',').enumerate() {
            let at = format!("line {}:column {}", line_no + 1, col + 1);
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| Error::parse(&at, format!("not a number: {:?}", field.trim())))?;
            if !v.is_finite() {
                return Err(Error::parse(&at, "non-finite value"));
            }
            values.push(v);
            n += 1;
        }
        match cols {
            None => cols = Some(n),
            Some(c) if c != n => {
                return Err(Error::parse(
                    format!("line {}", line_no + 1),
                    format!("expected {c} fields, found {n}"),
                ))
            }
            _ => {}
        }
        rows += 1;
    }
    let cols = cols.ok_or_else(|| Error::parse("line 1", "empty CSV"))?;
    GridSignal::new(vec![rows, cols], values)
}

/// Shortest round-trip decimal representation, so CSV reloads exactly.
pub fn to_csv(signal: &GridSignal) -> Result<String> {
    let &[rows, cols] = signal.dims() else {
        return Err(Error::InvalidInput(format!(
            "CSV output needs a 2D grid, got {} axes",
            signal.ndim()
        )));
    };
    let mut out = String::with_capacity(rows * cols * 20);
    for r in 0..rows {
        let row = &signal.values()[r * cols..(r + 1) * cols];
        for (c, v) in row.iter().enumerate() {
            if c > 0 {
                out.push(',');
            }
            out.push_str(&format!("{v:?}"));
        }
        out.push('\n');
    }
    Ok(out)
}

struct ByteReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> ByteReader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::parse(
                format!("byte {}", self.pos),
                format!("truncated file while reading {what}"),
            ));
        }
        let out = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().expect("4 bytes")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn native_2x2() -> Vec<u8> {
        let mut b = b"MIFG\x01".to_vec();
        b.extend_from_slice(&2u32.to_le_bytes());
        b.extend_from_slice(&2u32.to_le_bytes());
        b.extend_from_slice(&2u32.to_le_bytes());
        for v in [1.0f64, 2.0, 3.0, 4.0] {
            b.extend_from_slice(&v.to_le_bytes());
        }
        b
    }

    #[test]
    fn decodes_handwritten_native_file() {
        let g = decode_native(&native_2x2()).unwrap();
        assert_eq!(g.dims(), &[2, 2]);
        assert_eq!(g.slice_1d(1, &[0]).unwrap(), vec![1.0, 2.0]);
        assert_eq!(g.slice_1d(1, &[1]).unwrap(), vec![3.0, 4.0]);
        assert_eq!(encode_native(&g), native_2x2());
    }

    #[test]
    fn parses_csv() {
        let g = parse_csv("1,2\n3,4").unwrap();
        assert_eq!(g, decode_native(&native_2x2()).unwrap());
        assert_eq!(to_csv(&g).unwrap().lines().count(), 2);
        assert!(to_csv(&g).unwrap().lines().all(|l| l.split(',').count() == 2));
    }

    #[test]
    fn native_header_for_1d() {
        let g = GridSignal::new(vec![5], vec![0.5; 5]).unwrap();
        let bytes = encode_native(&g);
        assert_eq!(&bytes[..5], b"MIFG\x01");
        assert_eq!(&bytes[5..9], &1u32.to_le_bytes());
        assert_eq!(&bytes[9..13], &5u32.to_le_bytes());
        assert_eq!(bytes.len(), 13 + 40);
    }

    #[test]
    fn native_errors_name_byte_offsets() {
        let mut bad = native_2x2();
        bad[0] = b'X';
        assert!(decode_native(&bad).unwrap_err().to_string().contains("byte 0"));

        let truncated = &native_2x2()[..20];
        let err = decode_native(truncated).unwrap_err().to_string();
        assert!(err.contains("byte 17"), "{err}");

        let mut nan = native_2x2();
        nan[17 + 8..17 + 16].copy_from_slice(&f64::NAN.to_le_bytes());
        let err = decode_native(&nan).unwrap_err().to_string();
        assert!(err.contains("byte 25") && err.contains("non-finite"), "{err}");

        let mut trailing = native_2x2();
        trailing.push(0);
        assert!(decode_native(&trailing).is_err());
    }

    #[test]
    fn csv_errors_name_cells() {
        let err = parse_csv("1,2\n3,x").unwrap_err().to_string();
        assert!(err.contains("line 2:column 2"), "{err}");
        let err = parse_csv("1,2\n3").unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
        assert!(parse_csv("1,inf").is_err());
        assert!(parse_csv("").is_err());
    }

    #[test]
    fn csv_requires_2d() {
        let g = GridSignal::zeros(vec![3]).unwrap();
        assert!(to_csv(&g).is_err());
    }

    #[test]
    fn file_round_trip_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let g = GridSignal::from_fn(vec![3, 4, 2], |i| (i[0] as f64).sin() + 0.1 * i[1] as f64 - i[2] as f64 / 3.0).unwrap();
        let a = dir.path().join("a.mifg");
        let b = dir.path().join("b.mifg");
        save_grid(&g, &a, GridFormat::Native).unwrap();
        let back = load_grid(&a, GridFormat::Native).unwrap();
        save_grid(&back, &b, GridFormat::Native).unwrap();
        assert_eq!(back, g);
        assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

        let c = dir.path().join("c.csv");
        let g2 = GridSignal::from_fn(vec![3, 4], |i| 1.0 / (1.0 + i[0] as f64 * 7.0 + i[1] as f64)).unwrap();
        save_grid(&g2, &c, GridFormat::from_path(&c)).unwrap();
        assert_eq!(load_grid(&c, GridFormat::Csv).unwrap(), g2);
    }

    proptest! {
        #[test]
        fn native_round_trip(
            dims in prop::collection::vec(1usize..5, 1..4),
            seed in prop::collection::vec(-1e300f64..1e300, 64),
        ) {
            let n: usize = dims.iter().product();
            let values: Vec<f64> = (0..n).map(|i| seed[i % seed.len()] * (i as f64 + 0.5)).collect();
            let g = GridSignal::new(dims, values).unwrap();
            prop_assert_eq!(decode_native(&encode_native(&g)).unwrap(), g);
        }

        #[test]
        fn csv_round_trip(rows in 1usize..5, cols in 1usize..5, seed in prop::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 25)) {
            let g = GridSignal::new(vec![rows, cols], seed[..rows * cols].to_vec()).unwrap();
            prop_assert_eq!(parse_csv(&to_csv(&g).unwrap()).unwrap(), g);
        }
    }
}
