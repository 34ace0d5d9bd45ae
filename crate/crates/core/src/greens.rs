//! Space-time convolution kernels and the per-mode retarded propagator.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::field::{ratio, Field, FieldSeries, RealVectorField, SpectralVectorField};
use crate::grid::{frequency_index, Grid};
use crate::spectral;
use crate::vec3::{self, CVec3, CZERO};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpaceTimeKernel {
    /// Unit-mass Gaussian in space and time, applied as a circular convolution.
    Gaussian {
        space_sigma: f64,
        time_sigma: f64,
    },
    Delta,
    /// Retarded Green function of `d^2/dt^2 - laplacian`.
    Retarded,
}

impl SpaceTimeKernel {
    pub fn name(&self) -> &'static str {
        match self {
            SpaceTimeKernel::Gaussian { .. } => "gaussian",
            SpaceTimeKernel::Delta => "delta",
            SpaceTimeKernel::Retarded => "retarded",
        }
    }
}

/// Trigonometric state of one mode at one time level.
#[derive(Debug, Clone, Copy)]
pub struct Phase {
    cos: f64,
    sin: f64,
    t: f64,
}

impl Phase {
    pub fn at(omega: f64, t: f64) -> Self {
        let (sin, cos) = (omega * t).sin_cos();
        Phase { cos, sin, t }
    }

    /// The propagator kernel `sin(w t) / w` at this phase (`t` when `w = 0`).
    pub fn kernel(&self, omega: f64) -> f64 {
        if omega == 0.0 {
            self.t
        } else {
            self.sin / omega
        }
    }
}

/// Running evaluation of `u(t) = int_0^t sin(w (t - s)) / w  src(s) ds` for one mode,
/// fed one source sample per step.
///
/// The source is taken as linear between samples and each step is integrated exactly
/// against the kernel, so the only error is the interpolation of the source itself.
/// With `w = 0` the kernel becomes `t - s`.
#[derive(Debug, Clone)]
pub struct Duhamel {
    omega: f64,
    dt: f64,
    step: usize,
    /// `dt * int_0^1 e^{i w dt x} (1 - x) dx` and `dt * int_0^1 e^{i w dt x} x dx`.
    weights: [Complex64; 2],
    prev: Option<(Phase, CVec3)>,
    acc_c: CVec3,
    acc_s: CVec3,
}

/// `[int_0^1 e^{i theta x} (1 - x) dx, int_0^1 e^{i theta x} x dx]`.
fn linear_weights(theta: f64) -> [Complex64; 2] {
    if theta.abs() < 1.0 {
        let mut w = [Complex64::new(0.0, 0.0); 2];
        let mut term = Complex64::new(1.0, 0.0);
        for n in 0..30 {
            let nf = n as f64;
            w[0] += term / ((nf + 1.0) * (nf + 2.0));
            w[1] += term / (nf + 2.0);
            term *= Complex64::new(0.0, theta) / (nf + 1.0);
        }
        return w;
    }
    let e = Complex64::from_polar(1.0, theta);
    let i = Complex64::new(0.0, 1.0);
    let full = (e - 1.0) / (i * theta);
    let ramp = e * (Complex64::new(1.0 / (theta * theta), -1.0 / theta)) - 1.0 / (theta * theta);
    [full - ramp, ramp]
}

impl Duhamel {
    pub fn new(omega: f64, dt: f64) -> Self {
        let w = linear_weights(omega * dt);
        Duhamel { omega, dt, step: 0, weights: [w[0] * dt, w[1] * dt], prev: None, acc_c: CZERO, acc_s: CZERO }
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn phase(&self, step: usize) -> Phase {
        Phase::at(self.omega, step as f64 * self.dt)
    }

    /// Feeds the source at the next time level and returns `(u, du/dt)` there.
    /// `phase` must be `self.phase(step)` for the current step; passing it in lets
    /// several integrators of one mode share the trigonometry.
    pub fn push(&mut self, phase: Phase, src: CVec3) -> (CVec3, CVec3) {
        let dt = self.dt;
        self.step += 1;
        let Some((before, last)) = self.prev.replace((phase, src)) else {
            return (CZERO, CZERO);
        };
        if self.omega == 0.0 {
            let sum = vec3::add(last, src);
            self.acc_c = vec3::add(self.acc_c, vec3::scale_by(sum, 0.5 * dt));
            let moment = vec3::add(
                vec3::scale_by(sum, 0.5 * before.t),
                vec3::add(vec3::scale_by(last, dt / 6.0), vec3::scale_by(src, dt / 3.0)),
            );
            self.acc_s = vec3::add(self.acc_s, vec3::scale_by(moment, dt));
            let u = vec3::sub(vec3::scale_by(self.acc_c, phase.t), self.acc_s);
            return (u, self.acc_c);
        }
        let e = Complex64::new(before.cos, before.sin);
        let [a, b] = self.weights.map(|w| e * w);
        self.acc_c = vec3::add(self.acc_c, vec3::add(vec3::scale_by(last, a.re), vec3::scale_by(src, b.re)));
        self.acc_s = vec3::add(self.acc_s, vec3::add(vec3::scale_by(last, a.im), vec3::scale_by(src, b.im)));
        let (c, s) = (self.acc_c, self.acc_s);
        let u = vec3::scale_by(vec3::sub(vec3::scale_by(c, phase.sin), vec3::scale_by(s, phase.cos)), 1.0 / self.omega);
        let du = vec3::add(vec3::scale_by(c, phase.cos), vec3::scale_by(s, phase.sin));
        (u, du)
    }
}

/// Propagates one mode's source history; returns `u` and `du/dt` at every level.
pub fn propagate_mode(omega: f64, dt: f64, src: &[CVec3]) -> (Vec<CVec3>, Vec<CVec3>) {
    let mut d = Duhamel::new(omega, dt);
    let mut u = Vec::with_capacity(src.len());
    let mut du = Vec::with_capacity(src.len());
    for (n, s) in src.iter().enumerate() {
        let (a, b) = d.push(d.phase(n), *s);
        u.push(a);
        du.push(b);
    }
    (u, du)
}

/// Spectral slices in, spectral slices out; `(u, du/dt)`.
pub fn retarded_propagate_spectral(
    slices: &[SpectralVectorField],
    dt: f64,
) -> Result<(Vec<SpectralVectorField>, Vec<SpectralVectorField>)> {
    let Some(first) = slices.first() else {
        return Ok((Vec::new(), Vec::new()));
    };
    let grid = first.grid().clone();
    if slices.iter().any(|s| s.grid() != &grid) {
        return Err(Error::GridMismatch);
    }
    let nt = slices.len();
    let mut u = vec![SpectralVectorField::zeros(&grid); nt];
    let mut du = vec![SpectralVectorField::zeros(&grid); nt];
    let mut src = vec![CZERO; nt];
    for idx in 0..grid.len() {
        for (n, s) in slices.iter().enumerate() {
            src[n] = s.at(idx);
        }
        let omega = vec3::norm_sq(grid.wavevector(idx)).sqrt();
        let (a, b) = propagate_mode(omega, dt, &src);
        for n in 0..nt {
            u[n].set(idx, a[n]);
            du[n].set(idx, b[n]);
        }
    }
    Ok((u, du))
}

/// Retarded solution of `(d^2/dt^2 - laplacian) u = source` starting from rest at `t = 0`.
pub fn retarded_propagate(source: &FieldSeries<RealVectorField>) -> FieldSeries<RealVectorField> {
    let spectra: Vec<SpectralVectorField> = source.iter().map(spectral::forward).collect();
    let (u, _) = retarded_propagate_spectral(&spectra, source.dt()).expect("series shares one grid");
    FieldSeries::new(source.grid(), source.dt(), u.iter().map(spectral::inverse).collect()).expect("same grid")
}

/// Time derivative of [`retarded_propagate`] from the exact derivative of the quadrature.
pub fn retarded_propagate_rate(source: &FieldSeries<RealVectorField>) -> FieldSeries<RealVectorField> {
    let spectra: Vec<SpectralVectorField> = source.iter().map(spectral::forward).collect();
    let (_, du) = retarded_propagate_spectral(&spectra, source.dt()).expect("series shares one grid");
    FieldSeries::new(source.grid(), source.dt(), du.iter().map(spectral::inverse).collect()).expect("same grid")
}

fn gaussian_spectrum(grid: &Grid, nt: usize, dt: f64, space_sigma: f64, time_sigma: f64) -> (Vec<f64>, Vec<f64>) {
    let mut space: Vec<Complex64> = (0..grid.len())
        .map(|i| {
            let d = grid.min_image(i, [0.0; 3]);
            let g = (2.0 * PI * space_sigma * space_sigma).powf(-1.5)
                * (-vec3::norm_sq(d) / (2.0 * space_sigma * space_sigma)).exp();
            Complex64::new(g * grid.cell_volume(), 0.0)
        })
        .collect();
    grid.fft().forward(&mut space);
    let mut time: Vec<Complex64> = (0..nt)
        .map(|k| {
            let t = frequency_index(k, nt) as f64 * dt;
            let g =
                (2.0 * PI * time_sigma * time_sigma).powf(-0.5) * (-(t * t) / (2.0 * time_sigma * time_sigma)).exp();
            Complex64::new(g * dt, 0.0)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(nt).process(&mut time);
    (space.iter().map(|v| v.re).collect(), time.iter().map(|v| v.re).collect())
}

/// Space-time convolution `int f(x - x') j(x') d^4x'`.
pub fn convolve_kernel(
    kernel: &SpaceTimeKernel,
    j: &FieldSeries<RealVectorField>,
) -> Result<FieldSeries<RealVectorField>> {
    match *kernel {
        SpaceTimeKernel::Delta => Ok(j.clone()),
        SpaceTimeKernel::Retarded => Ok(retarded_propagate(j)),
        SpaceTimeKernel::Gaussian { space_sigma, time_sigma } => {
            let grid = j.grid();
            let dt = j.dt();
            if !(space_sigma >= 2.0 * grid.spacing() * (1.0 - 1e-12)) {
                return Err(Error::Precondition(format!("space_sigma = {space_sigma} is below two cells")));
            }
            if !(time_sigma >= 2.0 * dt * (1.0 - 1e-12)) {
                return Err(Error::Precondition(format!("time_sigma = {time_sigma} is below two steps")));
            }
            let nt = j.len();
            let (ks, kt) = gaussian_spectrum(grid, nt, dt, space_sigma, time_sigma);
            let spectra: Vec<SpectralVectorField> = j.iter().map(spectral::forward).collect();
            let mut planner = FftPlanner::new();
            let fwd = planner.plan_fft_forward(nt);
            let inv = planner.plan_fft_inverse(nt);
            let mut out = vec![SpectralVectorField::zeros(grid); nt];
            let mut line = vec![Complex64::new(0.0, 0.0); nt];
            for idx in 0..grid.len() {
                let mut v = vec![CZERO; nt];
                for a in 0..3 {
                    for t in 0..nt {
                        line[t] = spectra[t].component(a)[idx];
                    }
                    fwd.process(&mut line);
                    for (f, l) in line.iter_mut().enumerate() {
                        *l *= ks[idx] * kt[f] / nt as f64;
                    }
                    inv.process(&mut line);
                    for t in 0..nt {
                        v[t][a] = line[t];
                    }
                }
                for t in 0..nt {
                    out[t].set(idx, v[t]);
                }
            }
            FieldSeries::new(grid, dt, out.iter().map(spectral::inverse).collect())
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaReport {
    /// `|P(f * j) - f * P(j)| / |f * j|` over the whole series.
    pub residual_rel: f64,
    pub kernel: SpaceTimeKernel,
    pub dims: [usize; 3],
    pub nt: usize,
    pub seed: Option<u64>,
    pub norm_project_after: f64,
    pub norm_project_before: f64,
}

fn series_norm(s: &FieldSeries<RealVectorField>) -> f64 {
    s.iter().map(|f| f.l2_norm().powi(2)).sum::<f64>().sqrt()
}

fn project_series(s: &FieldSeries<RealVectorField>) -> FieldSeries<RealVectorField> {
    s.map(|f| spectral::inverse(&spectral::project_longitudinal(&spectral::forward(f))))
}

/// Compares projecting after the convolution with projecting before it.
pub fn lemma_check(kernel: &SpaceTimeKernel, j: &FieldSeries<RealVectorField>) -> Result<LemmaReport> {
    let conv = convolve_kernel(kernel, j)?;
    let after = project_series(&conv);
    let before = convolve_kernel(kernel, &project_series(j))?;
    let diff = after.iter().zip(before.iter()).map(|(a, b)| (a - b).l2_norm().powi(2)).sum::<f64>().sqrt();
    let total = series_norm(&conv);
    let residual_rel = if total < crate::field::NORM_FLOOR { diff } else { ratio(diff, total) };
    Ok(LemmaReport {
        residual_rel,
        kernel: *kernel,
        dims: j.grid().dims(),
        nt: j.len(),
        seed: None,
        norm_project_after: series_norm(&after),
        norm_project_before: series_norm(&before),
    })
}
