//! Deterministic test fields.

use std::f64::consts::PI;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{FieldSeries, RealScalarField, RealVectorField, SpectralVectorField};
use crate::grid::Grid;
use crate::spectral;
use crate::vec3;

/// Largest ratio of blob value at the box boundary to its peak that counts as localized.
pub const BOUNDARY_RATIO: f64 = 1e-12;

/// Checks that a Gaussian of width `sigma` is resolved (at least two cells) and
/// negligible at distance `L/2` from its center.
pub fn check_blob(grid: &Grid, sigma: f64) -> Result<()> {
    let min = 2.0 * grid.spacing();
    if !(sigma >= min * (1.0 - 1e-12)) {
        return Err(Error::Precondition(format!("sigma = {sigma} is below two cells ({min})")));
    }
    let half = 0.5 * grid.box_len();
    let edge = (-(half * half) / (2.0 * sigma * sigma)).exp();
    if edge >= BOUNDARY_RATIO {
        return Err(Error::Precondition(format!("sigma = {sigma} leaves {edge:.3e} of the peak at the box boundary")));
    }
    Ok(())
}

/// Unit-mass Gaussian density at minimum-image displacement `d`.
pub fn gaussian_density(d: [f64; 3], sigma: f64) -> f64 {
    let norm = (2.0 * PI * sigma * sigma).powf(-1.5);
    norm * (-vec3::norm_sq(d) / (2.0 * sigma * sigma)).exp()
}

/// `amplitude (2 pi sigma^2)^(-3/2) exp(-|r - center|^2 / 2 sigma^2)` with periodic distance.
pub fn gen_gaussian_blob(grid: &Grid, center: [f64; 3], sigma: f64, amplitude: f64) -> Result<RealScalarField> {
    check_blob(grid, sigma)?;
    RealScalarField::from_fn(grid, |i| amplitude * gaussian_density(grid.min_image(i, center), sigma))
}

/// Random real vector field with Gaussian mode amplitudes for `0 < |p| <= cutoff_frac * max|p|`.
///
/// Modes on any Nyquist plane are left empty so the field has an exact
/// Hermitian partner for every mode. The same seed always gives the same bits.
pub fn gen_random_smooth(grid: &Grid, seed: u64, cutoff_frac: f64) -> RealVectorField {
    let spectrum = random_spectrum(grid, seed, cutoff_frac);
    spectral::inverse(&spectrum)
}

pub fn random_spectrum(grid: &Grid, seed: u64, cutoff_frac: f64) -> SpectralVectorField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pmax = vec3::norm_sq([0, 1, 2].map(|a| grid.wavenumbers(a).iter().fold(0.0f64, |m, v| m.max(v.abs())))).sqrt();
    let cutoff = cutoff_frac * pmax;
    let mut out = SpectralVectorField::zeros(grid);
    let n = grid.len() as f64;
    for idx in 0..grid.len() {
        let partner = grid.conjugate_index(idx);
        if partner <= idx || grid.is_nyquist(idx) {
            continue;
        }
        let mut draw = || {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im) * n
        };
        let v = [draw(), draw(), draw()];
        let p = vec3::norm_sq(grid.wavevector(idx)).sqrt();
        if p > cutoff {
            continue;
        }
        out.set(idx, v);
        out.set(partner, v.map(|c| c.conj()));
    }
    out
}

/// Time series of independent random smooth slices; slice seeds are drawn from `seed`.
pub fn gen_random_series(
    grid: &Grid,
    nt: usize,
    dt: f64,
    seed: u64,
    cutoff_frac: f64,
) -> Result<FieldSeries<RealVectorField>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let slices = (0..nt).map(|_| gen_random_smooth(grid, rng.next_u64(), cutoff_frac)).collect();
    FieldSeries::new(grid, dt, slices)
}

/// Shape of a localized vector field built from a Gaussian `g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalizedKind {
    /// `grad g`, purely longitudinal.
    Gradient,
    /// `curl(c g)`, purely transverse.
    Curl,
    /// Sum of a gradient and a curl with random weights.
    Mix,
}

impl LocalizedKind {
    pub fn name(&self) -> &'static str {
        match self {
            LocalizedKind::Gradient => "gradient",
            LocalizedKind::Curl => "curl",
            LocalizedKind::Mix => "mix",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [LocalizedKind::Gradient, LocalizedKind::Curl, LocalizedKind::Mix].into_iter().find(|k| k.name() == name)
    }
}

/// Localized field from a unit Gaussian of width `sigma` at `center`, evaluated in closed form.
/// The curl axis and the mixing weights come from `seed`.
pub fn gen_localized(
    grid: &Grid,
    kind: LocalizedKind,
    center: [f64; 3],
    sigma: f64,
    seed: u64,
) -> Result<RealVectorField> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::Precondition(format!("sigma = {sigma} must be positive")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };
    let axis = [normal(), normal(), normal()];
    let len = vec3::norm_sq(axis).sqrt();
    let axis = axis.map(|v| v / len);
    let (wg, wc) = match kind {
        LocalizedKind::Gradient => (1.0, 0.0),
        LocalizedKind::Curl => (0.0, 1.0),
        LocalizedKind::Mix => (1.0 + normal().abs(), 1.0 + normal().abs()),
    };
    let s2 = sigma * sigma;
    RealVectorField::from_fn(grid, |i| {
        let d = grid.min_image(i, center);
        let g = (-vec3::norm_sq(d) / (2.0 * s2)).exp() / s2;
        let cross = [d[1] * axis[2] - d[2] * axis[1], d[2] * axis[0] - d[0] * axis[2], d[0] * axis[1] - d[1] * axis[0]];
        [0, 1, 2].map(|a| -g * (wg * d[a] + wc * cross[a]))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;
    use crate::grid::GridSpec;

    #[test]
    fn blob_integral_and_peak() {
        let g = Grid::new(GridSpec::cubic(64, 10.0, 0.05, 1)).unwrap();
        let b = gen_gaussian_blob(&g, [5.0, 5.0, 5.0], 0.5, 1.0).unwrap();
        assert!((b.integral() - 1.0).abs() < 1e-10);
        let peak = (2.0 * PI * 0.25f64).powf(-1.5);
        assert!((peak - 0.50794).abs() < 1e-5);
        assert!((b.linf_norm() - peak).abs() < 1e-12);
        let zero = gen_gaussian_blob(&g, [5.0, 5.0, 5.0], 0.5, 0.0).unwrap();
        assert_eq!(zero.linf_norm(), 0.0);
    }

    #[test]
    fn blob_preconditions() {
        let g = Grid::new(GridSpec::cubic(16, 10.0, 0.05, 1)).unwrap();
        assert!(gen_gaussian_blob(&g, [5.0; 3], 0.5, 1.0).is_err());
        assert!(gen_gaussian_blob(&g, [5.0; 3], 2.0, 1.0).is_err());
    }

    #[test]
    fn random_field_is_deterministic_and_mean_free() {
        let g = Grid::new(GridSpec::cubic(16, 1.0, 0.01, 1)).unwrap();
        let a = gen_random_smooth(&g, 42, 0.3);
        let b = gen_random_smooth(&g, 42, 0.3);
        assert_eq!(a, b);
        for m in a.mean() {
            assert!(m.abs() < 1e-14);
        }
        assert!(a.l2_norm() > 0.0);
        assert_eq!(gen_random_smooth(&g, 42, 1e-9).linf_norm(), 0.0);
        assert_ne!(a, gen_random_smooth(&g, 43, 0.3));
    }

    #[test]
    fn random_spectrum_is_hermitian() {
        let g = Grid::new(GridSpec::cubic(8, 1.0, 0.01, 1)).unwrap();
        let s = random_spectrum(&g, 7, 1.0);
        assert!(spectral::hermitian_defect(&s) < 1e-15);
        assert!(spectral::imaginary_residue(&s) < 1e-13);
    }
}
