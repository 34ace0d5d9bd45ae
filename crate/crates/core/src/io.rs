//! The `VF01` binary field format.
//!
//! Layout: magic `VF01`, then little-endian `u32` kind (0 scalar, 1 vector),
//! `u32` nx, ny, nz, `f64` box length, then `f64` samples component by
//! component with x fastest.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::{Field, RealScalarField, RealVectorField};
use crate::grid::{Grid, GridSpec};

pub const MAGIC: &[u8; 4] = b"VF01";
const HEADER: usize = 4 + 4 * 4 + 8;

#[derive(Debug, Clone, PartialEq)]
pub enum StoredField {
    Scalar(RealScalarField),
    Vector(RealVectorField),
}

impl StoredField {
    pub fn grid(&self) -> &Grid {
        match self {
            StoredField::Scalar(f) => f.grid(),
            StoredField::Vector(f) => f.grid(),
        }
    }

    pub fn into_vector(self) -> Result<RealVectorField> {
        match self {
            StoredField::Vector(v) => Ok(v),
            StoredField::Scalar(_) => Err(Error::Format("expected a vector field, found a scalar field".into())),
        }
    }

    pub fn into_scalar(self) -> Result<RealScalarField> {
        match self {
            StoredField::Scalar(s) => Ok(s),
            StoredField::Vector(_) => Err(Error::Format("expected a scalar field, found a vector field".into())),
        }
    }
}

fn header(kind: u32, grid: &Grid, values: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER + 8 * values);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&kind.to_le_bytes());
    for n in grid.dims() {
        out.extend_from_slice(&(n as u32).to_le_bytes());
    }
    out.extend_from_slice(&grid.box_len().to_le_bytes());
    out
}

fn push_values(out: &mut Vec<u8>, values: &[f64]) {
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

pub fn encode_scalar(field: &RealScalarField) -> Vec<u8> {
    let grid = field.grid();
    let mut out = header(0, grid, grid.len());
    push_values(&mut out, field.data());
    out
}

pub fn encode_vector(field: &RealVectorField) -> Vec<u8> {
    let grid = field.grid();
    let mut out = header(1, grid, 3 * grid.len());
    for c in field.components() {
        push_values(&mut out, c);
    }
    out
}

fn u32_at(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().expect("four bytes"))
}

fn f64_at(bytes: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(bytes[at..at + 8].try_into().expect("eight bytes"))
}

/// Decodes a field; without a grid to match, the time step is set to half a cell.
pub fn decode(bytes: &[u8], grid: Option<&Grid>) -> Result<StoredField> {
    if bytes.len() < HEADER {
        return Err(Error::Format(format!("file has {} bytes, shorter than the {HEADER}-byte header", bytes.len())));
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::Format(format!("magic {:?} is not VF01", String::from_utf8_lossy(&bytes[..4]))));
    }
    let kind = u32_at(bytes, 4);
    let comps = match kind {
        0 => 1,
        1 => 3,
        k => return Err(Error::Format(format!("unknown kind {k}"))),
    };
    let dims = [u32_at(bytes, 8), u32_at(bytes, 12), u32_at(bytes, 16)].map(|n| n as usize);
    let box_len = f64_at(bytes, 20);
    let grid = match grid {
        Some(g) => {
            if g.dims() != dims || g.box_len() != box_len {
                return Err(Error::Format(format!(
                    "file grid {dims:?} with box {box_len} does not match {:?} with box {}",
                    g.dims(),
                    g.box_len()
                )));
            }
            g.clone()
        }
        None => {
            let max = dims.iter().copied().max().unwrap_or(0).max(1);
            let spec =
                GridSpec { nx: dims[0], ny: dims[1], nz: dims[2], box_len, dt: 0.5 * box_len / max as f64, nt: 1 };
            Grid::new(spec).map_err(|e| Error::Format(e.to_string()))?
        }
    };
    let n = grid.len();
    let expected = HEADER + 8 * comps * n;
    if bytes.len() != expected {
        return Err(Error::Format(format!("expected {expected} bytes for {dims:?}, found {}", bytes.len())));
    }
    let values: Vec<f64> = (0..comps * n).map(|i| f64_at(bytes, HEADER + 8 * i)).collect();
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::Format(format!("non-finite sample at position {i}")));
    }
    if kind == 0 {
        return Ok(StoredField::Scalar(RealScalarField::from_vec(&grid, values)?));
    }
    let mut it = values.chunks_exact(n).map(<[f64]>::to_vec);
    let data = std::array::from_fn(|_| it.next().expect("three components"));
    Ok(StoredField::Vector(RealVectorField::from_components(&grid, data)?))
}

pub fn write_scalar(path: impl AsRef<Path>, field: &RealScalarField) -> Result<()> {
    Ok(fs::write(path, encode_scalar(field))?)
}

pub fn write_vector(path: impl AsRef<Path>, field: &RealVectorField) -> Result<()> {
    Ok(fs::write(path, encode_vector(field))?)
}

pub fn read_field(path: impl AsRef<Path>) -> Result<StoredField> {
    decode(&fs::read(path)?, None)
}

/// Reads a field that must live on `grid`.
pub fn read_field_on(path: impl AsRef<Path>, grid: &Grid) -> Result<StoredField> {
    decode(&fs::read(path)?, Some(grid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::gen_random_smooth;

    fn grid() -> Grid {
        Grid::new(GridSpec { nx: 4, ny: 6, nz: 8, box_len: 3.0, dt: 0.1, nt: 1 }).unwrap()
    }

    #[test]
    fn vector_round_trip_is_bit_exact() {
        let g = grid();
        let f = gen_random_smooth(&g, 3, 1.0);
        let back = decode(&encode_vector(&f), Some(&g)).unwrap().into_vector().unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn scalar_round_trip_without_grid() {
        let g = grid();
        let f = RealScalarField::from_fn(&g, |i| (i as f64).sin() * 1e-300).unwrap();
        let back = decode(&encode_scalar(&f), None).unwrap().into_scalar().unwrap();
        assert_eq!(back.data(), f.data());
        assert_eq!(back.grid().dims(), g.dims());
    }

    #[test]
    fn malformed_files_are_format_errors() {
        let g = grid();
        let bytes = encode_vector(&RealVectorField::zeros(&g));
        assert!(matches!(decode(&bytes[..bytes.len() - 1], None), Err(Error::Format(_))));
        assert!(matches!(decode(&bytes[..10], None), Err(Error::Format(_))));
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(decode(&bad, None), Err(Error::Format(_))));
        let mut kind = bytes.clone();
        kind[4] = 7;
        assert!(matches!(decode(&kind, None), Err(Error::Format(_))));
        let other = Grid::new(GridSpec::cubic(4, 3.0, 0.1, 1)).unwrap();
        assert!(matches!(decode(&bytes, Some(&other)), Err(Error::Format(_))));
    }
}
