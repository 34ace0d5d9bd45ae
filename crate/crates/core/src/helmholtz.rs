//! Longitudinal/transverse splitting of real vector fields.

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::field::{ratio, Field, FieldSeries, RealVectorField, SpectralVectorField};
use crate::grid::{frequency_index, Grid, GridSpec};
use crate::spectral;
use crate::vec3;

/// Lattice constant of the punctured cubic sum of `1/|n|`: adding
/// `MADELUNG_CUBIC * h^2 * f(0)` to `h^3 * sum' f(x)/|x|` restores the
/// integral to `O(h^4)`.
pub const MADELUNG_CUBIC: f64 = 2.837_297_479_480_62;

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionResult {
    pub a_par: RealVectorField,
    pub a_perp: RealVectorField,
    /// Mean of the input, which neither part carries.
    pub dc: [f64; 3],
    /// `|a - dc - a_par - a_perp| / |a|`.
    pub residual: f64,
}

impl DecompositionResult {
    /// `|curl a_par| / (k_max |a_par|)`, evaluated spectrally.
    pub fn curl_par_rel(&self) -> f64 {
        let s = spectral::forward(&self.a_par);
        let kmax = max_wavenumber(s.grid());
        ratio(spectral::curl(&s).l2_norm() / kmax, self.a_par.l2_norm())
    }

    pub fn div_perp_rel(&self) -> f64 {
        let s = spectral::forward(&self.a_perp);
        let kmax = max_wavenumber(s.grid());
        ratio(spectral::divergence(&s).l2_norm() / kmax, self.a_perp.l2_norm())
    }
}

fn max_wavenumber(grid: &Grid) -> f64 {
    (0..3).map(|a| grid.wavenumbers(a).iter().fold(0.0f64, |m, v| m.max(v.abs()))).fold(0.0, f64::max)
}

pub fn decompose(a: &RealVectorField) -> DecompositionResult {
    let spec = spectral::forward(a);
    decompose_spectrum(a, &spec)
}

fn decompose_spectrum(a: &RealVectorField, spec: &SpectralVectorField) -> DecompositionResult {
    let a_par = spectral::inverse(&spectral::project_longitudinal(spec));
    let a_perp = spectral::inverse(&spectral::project_transverse(spec));
    let dc = a.mean();
    let rest = RealVectorField::from_fn(a.grid(), |i| {
        let v = a.at(i);
        let p = a_par.at(i);
        let q = a_perp.at(i);
        [0, 1, 2].map(|c| v[c] - dc[c] - p[c] - q[c])
    })
    .expect("finite");
    let residual = ratio(rest.l2_norm(), a.l2_norm());
    DecompositionResult { a_par, a_perp, dc, residual }
}

/// Decomposes every slice independently.
pub fn decompose_series(
    series: &FieldSeries<RealVectorField>,
) -> (FieldSeries<RealVectorField>, FieldSeries<RealVectorField>) {
    let parts: Vec<DecompositionResult> = series.iter().map(decompose).collect();
    let par = parts.iter().map(|d| d.a_par.clone()).collect();
    let perp = parts.into_iter().map(|d| d.a_perp).collect();
    (
        FieldSeries::new(series.grid(), series.dt(), par).expect("same grid"),
        FieldSeries::new(series.grid(), series.dt(), perp).expect("same grid"),
    )
}

/// Decomposition through the joint space-time transform.
///
/// The series is treated as periodic in time. Each spatial mode is
/// transformed along time, the spatial projector is applied at every
/// frequency, and both transforms are undone.
pub fn decompose_4d(
    series: &FieldSeries<RealVectorField>,
) -> (FieldSeries<RealVectorField>, FieldSeries<RealVectorField>) {
    let grid = series.grid();
    let nt = series.len();
    let n = grid.len();
    let spectra: Vec<SpectralVectorField> = series.iter().map(spectral::forward).collect();

    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(nt);
    let inv = planner.plan_fft_inverse(nt);
    let zero = Complex64::new(0.0, 0.0);
    let mut par = vec![[vec![zero; n], vec![zero; n], vec![zero; n]]; nt];
    let mut perp = par.clone();
    let mut line = [vec![zero; nt], vec![zero; nt], vec![zero; nt]];
    for idx in 0..n {
        let p = grid.wavevector(idx);
        for a in 0..3 {
            for t in 0..nt {
                line[a][t] = spectra[t].component(a)[idx];
            }
            fwd.process(&mut line[a]);
        }
        let mut lpar = line.clone();
        let mut lperp = line.clone();
        for f in 0..nt {
            let v = [line[0][f], line[1][f], line[2][f]];
            let vp = vec3::longitudinal(p, v);
            let vt = vec3::transverse(p, v);
            for a in 0..3 {
                lpar[a][f] = vp[a];
                lperp[a][f] = vt[a];
            }
        }
        let scale = 1.0 / nt as f64;
        for a in 0..3 {
            inv.process(&mut lpar[a]);
            inv.process(&mut lperp[a]);
            for t in 0..nt {
                par[t][a][idx] = lpar[a][t] * scale;
                perp[t][a][idx] = lperp[a][t] * scale;
            }
        }
    }
    let back = |comps: Vec<[Vec<Complex64>; 3]>| {
        let slices = comps
            .into_iter()
            .map(|c| spectral::inverse(&SpectralVectorField::from_components(grid, c).expect("length")))
            .collect();
        FieldSeries::new(grid, series.dt(), slices).expect("same grid")
    };
    (back(par), back(perp))
}

/// Largest value of `|a|` among cells within 10% of the box faces, relative to the peak.
pub fn boundary_fraction(a: &RealVectorField) -> f64 {
    let grid = a.grid();
    let l = grid.box_len();
    let mag = a.magnitude();
    let peak = mag.iter().cloned().fold(0.0, f64::max);
    let mut edge = 0.0f64;
    for (i, m) in mag.iter().enumerate() {
        let r = grid.position(i);
        if r.iter().any(|&x| x < 0.1 * l || x > 0.9 * l) {
            edge = edge.max(*m);
        }
    }
    ratio(edge, peak)
}

/// Free-space real-space longitudinal part, used as an independent check on [`decompose`].
///
/// Writes `a_par = -grad chi` with `chi = (1/4 pi) int div a(r') / |r - r'|`, so
/// `a_par(r) = (1/4 pi) int div a(r') (r - r') / |r - r'|^3`. The divergence is
/// band-limited and is resampled on a grid `refine` times finer before the
/// direct sum, which skips the singular cell and adds its lattice correction
/// `-(MADELUNG_CUBIC/3) h^2 grad div a / 4 pi`. The mean is removed to match
/// the DC convention of [`decompose`].
pub fn decompose_direct_integral(a: &RealVectorField, refine: usize) -> Result<RealVectorField> {
    let grid = a.grid();
    let edge = boundary_fraction(a);
    if edge > 1e-8 {
        return Err(Error::Precondition(format!(
            "field is not localized: {edge:.3e} of the peak within 10% of the boundary"
        )));
    }
    if refine == 0 {
        return Err(Error::Precondition("refine must be at least 1".into()));
    }
    let spec = spectral::forward(a);
    let div = spectral::divergence(&spec);
    let grad_div = spectral::inverse(&spectral::gradient(&div));

    let [nx, ny, nz] = grid.dims();
    let fine_spec = GridSpec {
        nx: nx * refine,
        ny: ny * refine,
        nz: nz * refine,
        box_len: grid.box_len(),
        dt: 0.5 * grid.spacing() / refine as f64,
        nt: 1,
    };
    let fine = Grid::new(fine_spec)?;
    let gain = (fine.len() / grid.len()) as f64;
    let mut fine_div = vec![Complex64::new(0.0, 0.0); fine.len()];
    let dims = grid.dims();
    let fdims = fine.dims();
    for idx in 0..grid.len() {
        if grid.is_nyquist(idx) {
            continue;
        }
        let c = grid.coords(idx);
        let m = [0, 1, 2].map(|ax| {
            let f = frequency_index(c[ax], dims[ax]);
            f.rem_euclid(fdims[ax] as i64) as usize
        });
        fine_div[fine.index(m[0], m[1], m[2])] = div.data()[idx] * gain;
    }
    let dens: Vec<f64> = spectral::inverse_complex(&fine, &fine_div).into_iter().map(|v| v.re).collect();
    let sources: Vec<([f64; 3], f64)> =
        (0..fine.len()).filter(|&s| dens[s] != 0.0).map(|s| (fine.position(s), dens[s])).collect();

    let hf = fine.spacing();
    let weight = fine.cell_volume() / (4.0 * std::f64::consts::PI);
    let self_term = MADELUNG_CUBIC / 3.0 * hf * hf / (4.0 * std::f64::consts::PI);
    let values: Vec<[f64; 3]> = (0..grid.len())
        .into_par_iter()
        .map(|t| {
            let r = grid.position(t);
            let mut acc = [0.0f64; 3];
            for (rs, d) in &sources {
                let dx = [r[0] - rs[0], r[1] - rs[1], r[2] - rs[2]];
                let r2 = vec3::norm_sq(dx);
                if r2 < 1e-24 * hf * hf {
                    continue;
                }
                let w = d / (r2 * r2.sqrt());
                acc[0] += w * dx[0];
                acc[1] += w * dx[1];
                acc[2] += w * dx[2];
            }
            let g = grad_div.at(t);
            [0, 1, 2].map(|c| weight * acc[c] - self_term * g[c])
        })
        .collect();
    let n = grid.len() as f64;
    let mean = [0, 1, 2].map(|c| values.iter().map(|v| v[c]).sum::<f64>() / n);
    RealVectorField::from_fn(grid, |i| [0, 1, 2].map(|c| values[i][c] - mean[c]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::gen_random_smooth;
    use std::f64::consts::PI;

    #[test]
    fn single_transverse_mode() {
        let g = Grid::new(GridSpec::cubic(8, 2.0 * PI, 0.1, 1)).unwrap();
        let a = RealVectorField::from_fn(&g, |i| [g.position(i)[2].cos(), 0.0, 0.0]).unwrap();
        let d = decompose(&a);
        assert!(d.a_par.l2_norm() < 1e-13 * a.l2_norm());
        assert!((&d.a_perp - &a).l2_norm() < 1e-13 * a.l2_norm());
        assert!(d.residual < 1e-13);
    }

    #[test]
    fn dc_is_reported_and_dropped() {
        let g = Grid::new(GridSpec::cubic(8, 1.0, 0.01, 1)).unwrap();
        let r = gen_random_smooth(&g, 1, 0.5);
        let a = RealVectorField::from_fn(&g, |i| {
            let v = r.at(i);
            [v[0] + 2.0, v[1], v[2] - 1.0]
        })
        .unwrap();
        let d = decompose(&a);
        assert!((d.dc[0] - 2.0).abs() < 1e-12 && (d.dc[2] + 1.0).abs() < 1e-12);
        assert!(d.residual < 1e-13);
        assert!(d.a_par.mean().iter().all(|m| m.abs() < 1e-13));
    }

    #[test]
    fn four_d_constant_series() {
        let g = Grid::new(GridSpec::cubic(8, 1.0, 0.01, 4)).unwrap();
        let a = gen_random_smooth(&g, 3, 0.6);
        let s = FieldSeries::new(&g, 0.01, vec![a.clone(); 4]).unwrap();
        let (par, perp) = decompose_4d(&s);
        let d = decompose(&a);
        for k in 0..4 {
            assert!((par.slice(k) - &d.a_par).l2_norm() < 1e-13 * a.l2_norm());
            assert!((perp.slice(k) - &d.a_perp).l2_norm() < 1e-13 * a.l2_norm());
        }
    }

    #[test]
    fn direct_integral_rejects_spread_fields_and_maps_zero() {
        let g = Grid::new(GridSpec::cubic(8, 1.0, 0.01, 1)).unwrap();
        let a = gen_random_smooth(&g, 1, 0.5);
        assert!(matches!(decompose_direct_integral(&a, 1), Err(Error::Precondition(_))));
        let z = RealVectorField::zeros(&g);
        assert_eq!(decompose_direct_integral(&z, 2).unwrap().linf_norm(), 0.0);
    }
}
