//! Binary dump of complex matrices.
//!
//! Layout: 8-byte magic `b"GBCDCMX\0"`, row count as little-endian `u32`,
//! column count as little-endian `u32`, then `rows * cols` entries in
//! row-major order, each as little-endian `f64` real part followed by
//! little-endian `f64` imaginary part.

use std::io::{Read, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::CMatrix;

pub const MAGIC: [u8; 8] = *b"GBCDCMX\0";

pub fn write_matrix<W: Write>(w: &mut W, m: &CMatrix) -> Result<()> {
    let rows = u32::try_from(m.nrows()).map_err(|_| Error::InvalidDimensions("rows".into()))?;
    let cols = u32::try_from(m.ncols()).map_err(|_| Error::InvalidDimensions("cols".into()))?;
    w.write_all(&MAGIC)?;
    w.write_all(&rows.to_le_bytes())?;
    w.write_all(&cols.to_le_bytes())?;
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let x = m[(r, c)];
            w.write_all(&x.re.to_le_bytes())?;
            w.write_all(&x.im.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_matrix<R: Read>(r: &mut R) -> Result<CMatrix> {
    let mut header = [0u8; 16];
    r.read_exact(&mut header)?;
    if header[..8] != MAGIC {
        return Err(Error::Io("bad matrix dump magic".into()));
    }
    let rows = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(header[12..16].try_into().unwrap()) as usize;
    let mut m = DMatrix::zeros(rows, cols);
    let mut buf = [0u8; 16];
    for i in 0..rows {
        for j in 0..cols {
            r.read_exact(&mut buf)?;
            m[(i, j)] = Complex64::new(
                f64::from_le_bytes(buf[..8].try_into().unwrap()),
                f64::from_le_bytes(buf[8..].try_into().unwrap()),
            );
        }
    }
    Ok(m)
}
