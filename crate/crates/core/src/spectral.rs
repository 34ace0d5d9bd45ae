//! Transforms and pointwise spectral calculus.
//!
//! Derivatives multiply by `i k` with the Nyquist component of `k` zeroed, so
//! odd derivatives stay real. Projectors and the Laplacian use the full signed
//! wavevector `p`. Every operator sends the DC mode where its formula says.

use rustfft::num_complex::Complex64;

use crate::field::{Field, RealScalarField, RealVectorField, SpectralScalarField, SpectralVectorField};
use crate::grid::Grid;
use crate::vec3::{self, CVec3, I};

fn to_complex(data: &[f64]) -> Vec<Complex64> {
    data.iter().map(|&v| Complex64::new(v, 0.0)).collect()
}

pub fn forward_scalar(f: &RealScalarField) -> SpectralScalarField {
    let grid = f.grid();
    let mut buf = to_complex(f.data());
    grid.fft().forward(&mut buf);
    SpectralScalarField::from_vec(grid, buf).expect("length preserved")
}

pub fn forward(f: &RealVectorField) -> SpectralVectorField {
    let grid = f.grid();
    let comps = [0, 1, 2].map(|a| {
        let mut buf = to_complex(f.component(a));
        grid.fft().forward(&mut buf);
        buf
    });
    SpectralVectorField::from_components(grid, comps).expect("length preserved")
}

/// Inverse transform without dropping the imaginary part.
pub fn inverse_complex(grid: &Grid, data: &[Complex64]) -> Vec<Complex64> {
    let mut buf = data.to_vec();
    grid.fft().inverse(&mut buf);
    buf
}

pub fn inverse_scalar(f: &SpectralScalarField) -> RealScalarField {
    let grid = f.grid();
    let buf = inverse_complex(grid, f.data());
    RealScalarField::from_vec(grid, buf.into_iter().map(|v| v.re).collect())
        .expect("finite spectral input gives finite output")
}

pub fn inverse(f: &SpectralVectorField) -> RealVectorField {
    let grid = f.grid();
    let comps = [0, 1, 2].map(|a| inverse_complex(grid, f.component(a)).into_iter().map(|v| v.re).collect());
    RealVectorField::from_components(grid, comps).expect("finite spectral input gives finite output")
}

/// Largest imaginary part of the inverse transform relative to the field's L-infinity size.
pub fn imaginary_residue(f: &SpectralVectorField) -> f64 {
    let grid = f.grid();
    let mut im = 0.0f64;
    let mut re = 0.0f64;
    for a in 0..3 {
        for v in inverse_complex(grid, f.component(a)) {
            im = im.max(v.im.abs());
            re = re.max(v.re.abs());
        }
    }
    crate::field::ratio(im, re)
}

pub fn gradient(f: &SpectralScalarField) -> SpectralVectorField {
    let grid = f.grid();
    SpectralVectorField::from_fn(grid, |i| vec3::scale_real(grid.deriv_wavevector(i), I * f.data()[i]))
}

pub fn divergence(a: &SpectralVectorField) -> SpectralScalarField {
    let grid = a.grid();
    SpectralScalarField::from_fn(grid, |i| I * vec3::dot(grid.deriv_wavevector(i), a.at(i)))
}

pub fn curl(a: &SpectralVectorField) -> SpectralVectorField {
    let grid = a.grid();
    a.map_modes(|i, v| vec3::scale(vec3::cross(grid.deriv_wavevector(i), v), I))
}

/// Multiplies each mode by `-|p|^2`.
pub fn laplacian_scalar(f: &SpectralScalarField) -> SpectralScalarField {
    let grid = f.grid();
    SpectralScalarField::from_fn(grid, |i| -f.data()[i] * vec3::norm_sq(grid.wavevector(i)))
}

pub fn laplacian(a: &SpectralVectorField) -> SpectralVectorField {
    let grid = a.grid();
    a.map_modes(|i, v| vec3::scale_by(v, -vec3::norm_sq(grid.wavevector(i))))
}

/// Divides each mode by `|p|^2`, the inverse of `-laplacian`; DC goes to zero.
pub fn inverse_laplacian_scalar(f: &SpectralScalarField) -> SpectralScalarField {
    let grid = f.grid();
    SpectralScalarField::from_fn(grid, |i| {
        let p2 = vec3::norm_sq(grid.wavevector(i));
        if p2 == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            f.data()[i] / p2
        }
    })
}

pub fn inverse_laplacian(a: &SpectralVectorField) -> SpectralVectorField {
    let grid = a.grid();
    a.map_modes(|i, v| {
        let p2 = vec3::norm_sq(grid.wavevector(i));
        if p2 == 0.0 {
            vec3::CZERO
        } else {
            vec3::scale_by(v, 1.0 / p2)
        }
    })
}

/// `p (p.a) / |p|^2` at every mode, DC to zero.
pub fn project_longitudinal(a: &SpectralVectorField) -> SpectralVectorField {
    let grid = a.grid();
    a.map_modes(|i, v| vec3::longitudinal(grid.wavevector(i), v))
}

/// `-p x (p x a) / |p|^2` at every mode, DC to zero.
pub fn project_transverse(a: &SpectralVectorField) -> SpectralVectorField {
    let grid = a.grid();
    a.map_modes(|i, v| vec3::transverse(grid.wavevector(i), v))
}

/// Largest `|v(p) - conj(v(-p))|` over modes, relative to the largest mode.
pub fn hermitian_defect(a: &SpectralVectorField) -> f64 {
    let grid = a.grid();
    let mut defect = 0.0f64;
    for i in 0..grid.len() {
        let j = grid.conjugate_index(i);
        let (u, w): (CVec3, CVec3) = (a.at(i), a.at(j));
        let d = vec3::abs_sq([u[0] - w[0].conj(), u[1] - w[1].conj(), u[2] - w[2].conj()]);
        defect = defect.max(d.sqrt());
    }
    crate::field::ratio(defect, a.linf_norm())
}
