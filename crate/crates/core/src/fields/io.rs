//! `IAF1` binary field dumps and the `x,y,value` CSV alternative.
//!
//! Binary layout, all little-endian: magic `IAF1`, `nx` and `ny` as `u64`,
//! `x0`, `y0`, `h` as `f64`, then `nx * ny` `f64` values row-major with `y`
//! fastest.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{GridSpec, ScalarField};
use crate::error::{Error, Result};
use crate::real::Real;

pub const MAGIC: &[u8; 4] = b"IAF1";

pub fn write_iaf1<T: Real, W: Write>(field: &ScalarField<T>, mut out: W) -> Result<()> {
    let g = field.grid();
    out.write_all(MAGIC)?;
    out.write_all(&(g.nx as u64).to_le_bytes())?;
    out.write_all(&(g.ny as u64).to_le_bytes())?;
    for v in [g.x0, g.y0, g.h] {
        out.write_all(&v.as_f64().to_le_bytes())?;
    }
    for v in field.values() {
        out.write_all(&v.as_f64().to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(truncated)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(truncated)?;
    Ok(f64::from_le_bytes(b))
}

fn truncated(e: std::io::Error) -> Error {
    if e.kind() == std::io::ErrorKind::UnexpectedEof {
        Error::Format("truncated file".into())
    } else {
        Error::Io(e)
    }
}

pub fn read_iaf1<R: Read>(mut input: R) -> Result<ScalarField<f64>> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic).map_err(truncated)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let nx = read_u64(&mut input)? as usize;
    let ny = read_u64(&mut input)? as usize;
    let x0 = read_f64(&mut input)?;
    let y0 = read_f64(&mut input)?;
    let h = read_f64(&mut input)?;
    let grid = GridSpec::new(x0, y0, nx, ny, h).map_err(|e| Error::Format(e.to_string()))?;
    let mut values = Vec::with_capacity(grid.len());
    for _ in 0..grid.len() {
        values.push(read_f64(&mut input)?);
    }
    let mut rest = [0u8; 1];
    if input.read(&mut rest)? != 0 {
        return Err(Error::Format("trailing bytes after field data".into()));
    }
    ScalarField::from_values(&grid, values)
}

pub fn save_iaf1<T: Real>(field: &ScalarField<T>, path: impl AsRef<Path>) -> Result<()> {
    write_iaf1(field, BufWriter::new(File::create(path)?))
}

pub fn load_iaf1(path: impl AsRef<Path>) -> Result<ScalarField<f64>> {
    read_iaf1(BufReader::new(File::open(path)?))
}

/// CSV with header `x,y,value`, one node per line in storage order.
pub fn write_csv<T: Real, W: Write>(field: &ScalarField<T>, mut out: W) -> Result<()> {
    let g = field.grid();
    writeln!(out, "x,y,value")?;
    for i in 0..g.nx {
        for j in 0..g.ny {
            writeln!(out, "{:e},{:e},{:e}", g.x(i).as_f64(), g.y(j).as_f64(), field.at(i, j).as_f64())?;
        }
    }
    out.flush()?;
    Ok(())
}
