//! Field persistence.
//!
//! CSV: header `x,re,im`, one row per node, floats printed with 17 significant digits.
//!
//! Binary (all little-endian):
//!
//! | offset | size | content                         |
//! |--------|------|---------------------------------|
//! | 0      | 8    | magic `GCLABWF1`                |
//! | 8      | 8    | `n_points` as u64               |
//! | 16     | 8    | half width `L` as f64           |
//! | 24     | 8    | time `t` as f64                 |
//! | 32     | 16n  | samples as interleaved `re, im` |

use std::io::{Read, Write};

use num_complex::Complex64;

use super::{Grid1D, WaveField};
use crate::error::{Error, Result};

pub const BINARY_MAGIC: &[u8; 8] = b"GCLABWF1";

pub fn write_csv<W: Write>(field: &WaveField, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["x", "re", "im"])?;
    for (j, v) in field.samples().iter().enumerate() {
        let x = field.grid().node(j);
        w.write_record([format!("{x:.16e}"), format!("{:.16e}", v.re), format!("{:.16e}", v.im)])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a CSV written by [`write_csv`]; the grid is reconstructed from the node column.
pub fn read_csv<R: Read>(reader: R, time: f64) -> Result<WaveField> {
    let mut r = csv::Reader::from_reader(reader);
    let mut xs = Vec::new();
    let mut samples = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let parse = |i: usize| -> Result<f64> {
            rec.get(i)
                .ok_or_else(|| Error::Format("short CSV row".into()))?
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Format(e.to_string()))
        };
        xs.push(parse(0)?);
        samples.push(Complex64::new(parse(1)?, parse(2)?));
    }
    if xs.len() < 2 {
        return Err(Error::Format("CSV field needs at least two rows".into()));
    }
    let half_width = -xs[0];
    let grid = Grid1D::new(xs.len(), half_width)?;
    let h = grid.spacing();
    if ((xs[1] - xs[0]) - h).abs() > 1e-9 * h {
        return Err(Error::Format("CSV nodes are not on the documented grid".into()));
    }
    WaveField::new(grid, samples, time)
}

pub fn write_binary<W: Write>(field: &WaveField, mut writer: W) -> Result<()> {
    let grid = field.grid();
    writer.write_all(BINARY_MAGIC)?;
    writer.write_all(&(grid.n_points() as u64).to_le_bytes())?;
    writer.write_all(&grid.half_width().to_le_bytes())?;
    writer.write_all(&field.time().to_le_bytes())?;
    let mut buf = Vec::with_capacity(16 * grid.n_points());
    for v in field.samples() {
        buf.extend_from_slice(&v.re.to_le_bytes());
        buf.extend_from_slice(&v.im.to_le_bytes());
    }
    writer.write_all(&buf)?;
    Ok(())
}

pub fn read_binary<R: Read>(mut reader: R) -> Result<WaveField> {
    let mut magic = [0u8; 8];
    reader.read_exact(&mut magic)?;
    if &magic != BINARY_MAGIC {
        return Err(Error::Format("bad field magic".into()));
    }
    let mut word = [0u8; 8];
    reader.read_exact(&mut word)?;
    let n = u64::from_le_bytes(word) as usize;
    reader.read_exact(&mut word)?;
    let half_width = f64::from_le_bytes(word);
    reader.read_exact(&mut word)?;
    let time = f64::from_le_bytes(word);
    let grid = Grid1D::new(n, half_width)?;
    let mut body = vec![0u8; 16 * n];
    reader.read_exact(&mut body)?;
    let samples = body
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            Complex64::new(re, im)
        })
        .collect();
    WaveField::new(grid, samples, time)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn binary_and_csv_round_trip(seed in proptest::collection::vec(-1e3f64..1e3, 32), t in -5.0f64..5.0) {
            let grid = Grid1D::new(16, 3.5).unwrap();
            let samples: Vec<Complex64> = seed.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect();
            let field = WaveField::new(grid, samples, t).unwrap();

            let mut bin = Vec::new();
            write_binary(&field, &mut bin).unwrap();
            prop_assert_eq!(bin.len(), 32 + 16 * 16);
            prop_assert_eq!(read_binary(bin.as_slice()).unwrap(), field.clone());

            let mut text = Vec::new();
            write_csv(&field, &mut text).unwrap();
            let back = read_csv(text.as_slice(), t).unwrap();
            prop_assert_eq!(back, field);
        }
    }

    #[test]
    fn bad_magic_rejected() {
        let bytes = vec![0u8; 64];
        assert!(read_binary(bytes.as_slice()).is_err());
    }
}
