//! Matrix interchange formats.
//!
//! Binary layout (little endian): the 8-byte magic `EFIEMAT1`, `rows` and
//! `cols` as `u64`, then `rows * cols` entries in row-major order, each a
//! `(re, im)` pair of `f64`.
//!
//! CSV layout: header `row,col,re,im`, one line per entry, row-major.

use std::io::{self, Read, Write};

use faer::{c64, Mat};

use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"EFIEMAT1";

pub fn write_matrix_binary(m: &Mat<c64>, mut w: impl Write) -> io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&(m.nrows() as u64).to_le_bytes())?;
    w.write_all(&(m.ncols() as u64).to_le_bytes())?;
    let mut buf = Vec::with_capacity(m.ncols() * 16);
    for i in 0..m.nrows() {
        buf.clear();
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    Ok(())
}

pub fn read_matrix_binary(mut r: impl Read) -> Result<Mat<c64>> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::InvalidArgument("not an EFIEMAT1 stream".into()));
    }
    let mut word = [0u8; 8];
    r.read_exact(&mut word)?;
    let rows = u64::from_le_bytes(word) as usize;
    r.read_exact(&mut word)?;
    let cols = u64::from_le_bytes(word) as usize;
    let mut m = Mat::<c64>::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            r.read_exact(&mut word)?;
            let re = f64::from_le_bytes(word);
            r.read_exact(&mut word)?;
            let im = f64::from_le_bytes(word);
            m[(i, j)] = c64::new(re, im);
        }
    }
    Ok(m)
}

pub fn write_matrix_csv(m: &Mat<c64>, mut w: impl Write) -> io::Result<()> {
    writeln!(w, "row,col,re,im")?;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            writeln!(w, "{i},{j},{:e},{:e}", z.re, z.im)?;
        }
    }
    Ok(())
}
