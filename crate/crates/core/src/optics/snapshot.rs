//! Flat binary field snapshots.
//!
//! Layout, all little-endian: `b"OAMF"`, `u32 n`, `f64 pitch`,
//! `f64 wavelength`, then `n·n` interleaved `f64` (re, im) pairs in
//! row-major order.

use std::io::{Read, Write};

use ndarray::Array2;
use num_complex::Complex;

use super::{Field, GridSpec};
use crate::error::{Error, Result};
use crate::Real;

pub const FIELD_MAGIC: &[u8; 4] = b"OAMF";

pub fn write_field<T: Real, W: Write>(mut w: W, field: &Field<T>) -> Result<()> {
    let g = field.grid();
    w.write_all(FIELD_MAGIC)?;
    w.write_all(&(g.n() as u32).to_le_bytes())?;
    w.write_all(&g.pitch().as_f64().to_le_bytes())?;
    w.write_all(&g.wavelength().as_f64().to_le_bytes())?;
    let mut body = Vec::with_capacity(g.n() * g.n() * 16);
    for z in field.amplitudes().iter() {
        body.extend_from_slice(&z.re.as_f64().to_le_bytes());
        body.extend_from_slice(&z.im.as_f64().to_le_bytes());
    }
    w.write_all(&body)?;
    Ok(())
}

pub fn read_field<T: Real, R: Read>(mut r: R) -> Result<Field<T>> {
    let mut magic = [0u8; 4];
    read_exact(&mut r, &mut magic, "magic")?;
    if &magic != FIELD_MAGIC {
        return Err(Error::Format(format!("expected magic OAMF, found {magic:?}")));
    }
    let n = read_u32(&mut r, "n")? as usize;
    let pitch = read_f64(&mut r, "pitch")?;
    let wavelength = read_f64(&mut r, "wavelength")?;
    let grid = GridSpec::new(n, T::lit(pitch), T::lit(wavelength))?;
    let mut body = vec![0u8; n * n * 16];
    read_exact(&mut r, &mut body, "field samples")?;
    let samples: Vec<Complex<T>> = body
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            Complex::new(T::lit(re), T::lit(im))
        })
        .collect();
    let arr = Array2::from_shape_vec((n, n), samples).map_err(|e| Error::Format(e.to_string()))?;
    Field::from_array(grid, arr)
}

pub(crate) fn read_exact<R: Read>(r: &mut R, buf: &mut [u8], what: &str) -> Result<()> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => Error::Format(format!("truncated while reading {what}")),
        _ => Error::Io(e),
    })
}

pub(crate) fn read_u32<R: Read>(r: &mut R, what: &str) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b, what)?;
    Ok(u32::from_le_bytes(b))
}

pub(crate) fn read_f64<R: Read>(r: &mut R, what: &str) -> Result<f64> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b, what)?;
    Ok(f64::from_le_bytes(b))
}
