//! Snapshot files.
//!
//! * CSV: header `x,re,im`, one row per grid point, 17 significant digits.
//! * Binary: 32-byte header (`GDNLS1\0`, `n` as u64, `L` as f64, zero padding)
//!   followed by little-endian `f64` triples `(x, re, im)`.

use std::io::{BufRead, Read, Write};

use num_complex::Complex64;

use super::{FieldState, Grid};
use crate::error::{Error, Result};

const MAGIC: &[u8; 7] = b"GDNLS1\0";
const HEADER_LEN: usize = 32;

pub fn write_csv<W: Write>(u: &FieldState, mut out: W) -> Result<()> {
    writeln!(out, "x,re,im")?;
    for (x, z) in u.grid().points().zip(u.values()) {
        writeln!(out, "{:.16e},{:.16e},{:.16e}", x, z.re, z.im)?;
    }
    Ok(())
}

/// Read a CSV snapshot; the grid is reconstructed from the `x` column.
pub fn read_csv<R: BufRead>(input: R) -> Result<FieldState> {
    let mut lines = input.lines();
    let header = lines.next().ok_or_else(|| Error::Format("empty file".into()))??;
    if header.trim() != "x,re,im" {
        return Err(Error::Format(format!("unexpected header {header:?}")));
    }
    let mut xs = Vec::new();
    let mut values = Vec::new();
    for (row, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<f64> = line
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Format(format!("row {}: {e}", row + 2)))?;
        if cols.len() != 3 {
            return Err(Error::Format(format!("row {}: expected 3 columns", row + 2)));
        }
        xs.push(cols[0]);
        values.push(Complex64::new(cols[1], cols[2]));
    }
    if xs.len() < 2 {
        return Err(Error::Format("too few rows".into()));
    }
    let n = xs.len();
    let length = -2.0 * xs[0];
    let grid = Grid::new(n, length)?;
    let dx = grid.dx();
    for (m, &x) in xs.iter().enumerate() {
        if (x - grid.point(m)).abs() > 1e-9 * dx.max(1.0) {
            return Err(Error::Format(format!("row {}: x = {x} is off the uniform grid", m + 2)));
        }
    }
    FieldState::new(&grid, values, 0.0)
}

pub fn write_binary<W: Write>(u: &FieldState, mut out: W) -> Result<()> {
    let mut header = [0u8; HEADER_LEN];
    header[..7].copy_from_slice(MAGIC);
    header[7..15].copy_from_slice(&(u.grid().n() as u64).to_le_bytes());
    header[15..23].copy_from_slice(&u.grid().length().to_le_bytes());
    out.write_all(&header)?;
    for (x, z) in u.grid().points().zip(u.values()) {
        for v in [x, z.re, z.im] {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_binary<R: Read>(mut input: R) -> Result<FieldState> {
    let mut header = [0u8; HEADER_LEN];
    input.read_exact(&mut header)?;
    if &header[..7] != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let n = u64::from_le_bytes(header[7..15].try_into().unwrap()) as usize;
    let length = f64::from_le_bytes(header[15..23].try_into().unwrap());
    let grid = Grid::new(n, length)?;
    let mut buf = vec![0u8; 24 * n];
    input.read_exact(&mut buf)?;
    let values = buf
        .chunks_exact(24)
        .map(|c| {
            let re = f64::from_le_bytes(c[8..16].try_into().unwrap());
            let im = f64::from_le_bytes(c[16..24].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect();
    FieldState::new(&grid, values, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample(n: usize, length: f64, a: f64, b: f64) -> FieldState {
        let g = Grid::new(n, length).unwrap();
        FieldState::from_fn(&g, 0.0, |x| {
            Complex64::new(a * (-x * x).exp(), b * (0.3 * x).sin() / 7.0)
        })
        .unwrap()
    }

    proptest! {
        #[test]
        fn csv_and_binary_round_trip_exactly(
            log_n in 4u32..9, length in 0.5f64..200.0, a in -5.0f64..5.0, b in -5.0f64..5.0
        ) {
            let u = sample(1 << log_n, length, a, b);
            let mut csv = Vec::new();
            write_csv(&u, &mut csv).unwrap();
            let back = read_csv(csv.as_slice()).unwrap();
            prop_assert_eq!(back.values(), u.values());
            prop_assert_eq!(back.grid().n(), u.grid().n());
            prop_assert!((back.grid().length() - length).abs() <= 1e-12 * length);

            let mut bin = Vec::new();
            write_binary(&u, &mut bin).unwrap();
            prop_assert_eq!(bin.len(), 32 + 24 * u.grid().n());
            let back = read_binary(bin.as_slice()).unwrap();
            prop_assert_eq!(back.values(), u.values());
            prop_assert_eq!(back.grid(), u.grid());
        }
    }

    #[test]
    fn rejects_garbage() {
        assert!(read_csv("a,b,c\n1,2,3\n".as_bytes()).is_err());
        assert!(read_binary(&b"NOPE"[..]).is_err());
        let mut bad = vec![0u8; 32];
        bad[..7].copy_from_slice(b"GDNLS2\0");
        assert!(read_binary(bad.as_slice()).is_err());
    }
}
