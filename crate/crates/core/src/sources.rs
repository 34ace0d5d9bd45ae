//! Regularized charge/current sources sampled so that discrete continuity holds exactly.

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{
    ratio, Field, FieldSeries, RealScalarField, RealVectorField, SpectralScalarField, SpectralVectorField,
};
use crate::generate::{check_blob, gaussian_density};
use crate::grid::Grid;
use crate::spectral;
use crate::stencil;
use crate::vec3::{self, CVec3, CZERO, I};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Trajectory {
    /// Charge at rest, no current.
    Static,
    /// The charge stays at rest; a current `current * envelope(t)` flows through an
    /// antiparallel pair of Gaussian current elements at `center +- separation/2 direction`,
    /// both pointing along `direction` with opposite signs, so the net current is zero.
    /// The envelope rises from 0 at `t_on` to 1 at `t_on + ramp` as a quintic smoothstep.
    SwitchOnCurrent { direction: [f64; 3], t_on: f64, ramp: f64, current: f64, separation: f64 },
    /// Rigid blob displaced by `amplitude (1 - cos(omega t)) direction`, starting at rest.
    Oscillating { direction: [f64; 3], amplitude: f64, omega: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceModel {
    pub q: f64,
    pub sigma: f64,
    pub center: [f64; 3],
    pub trajectory: Trajectory,
}

fn unit(d: [f64; 3]) -> Result<[f64; 3]> {
    let n = vec3::norm_sq(d).sqrt();
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::Precondition("direction must be a nonzero finite vector".into()));
    }
    Ok(d.map(|v| v / n))
}

/// Quintic smoothstep `6x^5 - 15x^4 + 10x^3` clamped to [0, 1].
pub fn smoothstep(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * x * (10.0 + x * (-15.0 + 6.0 * x))
}

/// `int_{t_on}^{t} smoothstep((s - t_on)/ramp) ds`.
pub fn envelope_integral(t: f64, t_on: f64, ramp: f64) -> f64 {
    let x = (t - t_on) / ramp;
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        0.5 * ramp + (t - t_on - ramp)
    } else {
        ramp * x.powi(4) * (2.5 + x * (-3.0 + x))
    }
}

impl SourceModel {
    pub fn static_charge(q: f64, sigma: f64, center: [f64; 3]) -> Self {
        SourceModel { q, sigma, center, trajectory: Trajectory::Static }
    }

    /// Distance from `center` beyond which the source density is below its Gaussian 4-sigma tail.
    pub fn support_radius(&self) -> f64 {
        let extent = match self.trajectory {
            Trajectory::Static => 0.0,
            Trajectory::SwitchOnCurrent { separation, .. } => 0.5 * separation,
            Trajectory::Oscillating { amplitude, .. } => 2.0 * amplitude.abs(),
        };
        4.0 * self.sigma + extent
    }

    /// Time at which sources begin to change.
    pub fn onset(&self) -> f64 {
        match self.trajectory {
            Trajectory::SwitchOnCurrent { t_on, .. } => t_on,
            _ => 0.0,
        }
    }

    pub fn validate(&self, grid: &Grid, dt: f64) -> Result<()> {
        if !(self.q.is_finite() && self.sigma.is_finite()) {
            return Err(Error::Precondition("charge and sigma must be finite".into()));
        }
        check_blob(grid, self.sigma)?;
        match self.trajectory {
            Trajectory::Static => {}
            Trajectory::SwitchOnCurrent { direction, t_on, ramp, current, separation } => {
                unit(direction)?;
                if !(ramp >= 4.0 * dt * (1.0 - 1e-12)) {
                    return Err(Error::Precondition(format!("ramp = {ramp} is shorter than four steps")));
                }
                if !(t_on >= 2.0 * dt * (1.0 - 1e-12)) {
                    return Err(Error::Precondition(format!("t_on = {t_on} must leave two quiet steps")));
                }
                if !current.is_finite() {
                    return Err(Error::Precondition("current must be finite".into()));
                }
                if !(separation >= self.sigma) {
                    return Err(Error::Precondition(format!("separation = {separation} must be at least sigma")));
                }
                if separation + 8.0 * self.sigma >= grid.box_len() {
                    return Err(Error::Precondition("current pair does not fit in the box".into()));
                }
            }
            Trajectory::Oscillating { direction, amplitude, omega } => {
                unit(direction)?;
                if !(amplitude.is_finite() && omega.is_finite() && omega >= 0.0) {
                    return Err(Error::Precondition("amplitude and omega must be finite".into()));
                }
                if 4.0 * amplitude.abs() + 8.0 * self.sigma >= grid.box_len() {
                    return Err(Error::Precondition("oscillation leaves the box".into()));
                }
            }
        }
        Ok(())
    }
}

/// Spectral evaluator of a source model at integer time levels `t = n dt`.
#[derive(Debug, Clone)]
pub struct SourceSpectra {
    model: SourceModel,
    grid: Grid,
    dt: f64,
    charge: Vec<Complex64>,
    pair: Option<[Vec<Complex64>; 3]>,
}

impl SourceSpectra {
    pub fn new(model: &SourceModel, grid: &Grid, dt: f64) -> Result<Self> {
        model.validate(grid, dt)?;
        let blob = |center: [f64; 3], weight: f64| -> Vec<Complex64> {
            let mut v: Vec<Complex64> = (0..grid.len())
                .map(|i| Complex64::new(weight * gaussian_density(grid.min_image(i, center), model.sigma), 0.0))
                .collect();
            grid.fft().forward(&mut v);
            for (i, c) in v.iter_mut().enumerate() {
                if grid.is_nyquist(i) {
                    *c = Complex64::new(0.0, 0.0);
                }
            }
            v
        };
        let charge = blob(model.center, model.q);
        let pair = match model.trajectory {
            Trajectory::SwitchOnCurrent { direction, current, separation, .. } => {
                let d = unit(direction)?;
                let h = 0.5 * separation;
                let plus = blob([0, 1, 2].map(|a| model.center[a] + h * d[a]), current);
                let minus = blob([0, 1, 2].map(|a| model.center[a] - h * d[a]), current);
                let diff: Vec<Complex64> = plus.iter().zip(&minus).map(|(a, b)| a - b).collect();
                Some([0, 1, 2].map(|a| diff.iter().map(|v| v * d[a]).collect()))
            }
            _ => None,
        };
        Ok(SourceSpectra { model: *model, grid: grid.clone(), dt, charge, pair })
    }

    pub fn model(&self) -> &SourceModel {
        &self.model
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn time(&self, n: i64) -> f64 {
        n as f64 * self.dt
    }

    fn displacement(&self, t: f64) -> [f64; 3] {
        match self.model.trajectory {
            Trajectory::Oscillating { direction, amplitude, omega } => {
                let d = unit(direction).expect("validated");
                let x = amplitude * (1.0 - (omega * t).cos());
                d.map(|v| v * x)
            }
            _ => [0.0; 3],
        }
    }

    fn velocity(&self, t: f64) -> [f64; 3] {
        match self.model.trajectory {
            Trajectory::Oscillating { direction, amplitude, omega } => {
                let d = unit(direction).expect("validated");
                let v = amplitude * omega * (omega * t).sin();
                d.map(|c| c * v)
            }
            _ => [0.0; 3],
        }
    }

    /// Charge density spectrum at mode `idx`, level `n` (levels before 0 are allowed).
    pub fn rho(&self, idx: usize, n: i64) -> Complex64 {
        let base = self.charge[idx];
        match self.model.trajectory {
            Trajectory::Static => base,
            Trajectory::SwitchOnCurrent { t_on, ramp, .. } => {
                let pair = self.pair.as_ref().expect("switch-on has a pair");
                let k = self.grid.deriv_wavevector(idx);
                let div = I * vec3::dot(k, [pair[0][idx], pair[1][idx], pair[2][idx]]);
                base - div * envelope_integral(self.time(n), t_on, ramp)
            }
            Trajectory::Oscillating { .. } => {
                let p = self.grid.wavevector(idx);
                let x = self.displacement(self.time(n));
                base * Complex64::from_polar(1.0, -vec3::rdot(p, x))
            }
        }
    }

    /// Current density spectrum at mode `idx`, level `n`.
    ///
    /// The current is built so that `(rho[n+1] - rho[n-1]) / 2dt + i k . J[n] = 0` mode by mode.
    pub fn current(&self, idx: usize, n: i64) -> CVec3 {
        match self.model.trajectory {
            Trajectory::Static => CZERO,
            Trajectory::SwitchOnCurrent { t_on, ramp, .. } => {
                let pair = self.pair.as_ref().expect("switch-on has a pair");
                let rate = (envelope_integral(self.time(n + 1), t_on, ramp)
                    - envelope_integral(self.time(n - 1), t_on, ramp))
                    / (2.0 * self.dt);
                [pair[0][idx] * rate, pair[1][idx] * rate, pair[2][idx] * rate]
            }
            Trajectory::Oscillating { .. } => {
                if idx == 0 {
                    return CZERO;
                }
                let p = self.grid.wavevector(idx);
                let k = self.grid.deriv_wavevector(idx);
                let rho = self.rho(idx, n);
                let v = self.velocity(self.time(n));
                let advected = vec3::scale_real(v, rho);
                let rate = (self.rho(idx, n + 1) - self.rho(idx, n - 1)) / (2.0 * self.dt);
                let kp = vec3::rdot(k, p);
                if kp.abs() < 1e-300 {
                    return advected;
                }
                let c = I * (rate + I * vec3::dot(k, advected)) / kp;
                vec3::add(advected, vec3::scale_real(p, c))
            }
        }
    }

    /// `(rho, J)` at one mode for levels `0..nt`.
    pub fn mode_history(&self, idx: usize, nt: usize) -> (Vec<Complex64>, Vec<CVec3>) {
        let rho = (0..nt as i64).map(|n| self.rho(idx, n)).collect();
        let cur = (0..nt as i64).map(|n| self.current(idx, n)).collect();
        (rho, cur)
    }

    pub fn rho_spectrum(&self, n: i64) -> SpectralScalarField {
        SpectralScalarField::from_fn(&self.grid, |i| self.rho(i, n))
    }

    pub fn current_spectrum(&self, n: i64) -> SpectralVectorField {
        SpectralVectorField::from_fn(&self.grid, |i| self.current(i, n))
    }
}

/// Real-space charge and current histories on levels `0..nt`.
pub fn sample_sources(
    model: &SourceModel,
    grid: &Grid,
    nt: usize,
    dt: f64,
) -> Result<(FieldSeries<RealScalarField>, FieldSeries<RealVectorField>)> {
    let src = SourceSpectra::new(model, grid, dt)?;
    let rho = (0..nt as i64).map(|n| spectral::inverse_scalar(&src.rho_spectrum(n))).collect();
    let cur = (0..nt as i64).map(|n| spectral::inverse(&src.current_spectrum(n))).collect();
    Ok((FieldSeries::new(grid, dt, rho)?, FieldSeries::new(grid, dt, cur)?))
}

/// Continuity defect `|d rho/dt + div J|` over the interior levels (centered differences in
/// time, spectral divergence), largest value relative to the largest of `|d rho/dt|` and `|div J|`.
pub fn continuity_residual(rho: &FieldSeries<RealScalarField>, j: &FieldSeries<RealVectorField>) -> f64 {
    let nt = rho.len();
    let dt = rho.dt();
    let (mut defect, mut scale) = (0.0f64, 0.0f64);
    for n in 1..nt.saturating_sub(1) {
        let w = stencil::ddt(n, nt);
        let rate = RealScalarField::from_fn(rho.grid(), |i| {
            stencil::apply(rho.slices(), dt, w, 0.0, |acc, a, x: &RealScalarField| acc + a * x.data()[i])
        })
        .expect("finite");
        let div = spectral::inverse_scalar(&spectral::divergence(&spectral::forward(j.slice(n))));
        let sum = &rate + &div;
        defect = defect.max(sum.l2_norm());
        scale = scale.max(rate.l2_norm()).max(div.l2_norm());
    }
    ratio(defect, scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    fn grid() -> Grid {
        Grid::new(GridSpec::cubic(32, 16.0, 0.1, 1)).unwrap()
    }

    #[test]
    fn envelope_integral_matches_quadrature() {
        let (t_on, ramp) = (0.3, 0.4);
        let mut acc = 0.0;
        let steps = 20000;
        let h = 1.0 / steps as f64;
        for k in 0..steps {
            let t = t_on + (k as f64 + 0.5) * h;
            acc += smoothstep((t - t_on) / ramp) * h;
        }
        assert!((envelope_integral(t_on + 1.0, t_on, ramp) - acc).abs() < 1e-9);
        assert_eq!(envelope_integral(0.1, t_on, ramp), 0.0);
    }

    #[test]
    fn static_source() {
        let g = grid();
        let m = SourceModel::static_charge(1.0, 1.0, [8.0; 3]);
        let (rho, j) = sample_sources(&m, &g, 3, 0.1).unwrap();
        assert!((rho.slice(2).integral() - 1.0).abs() < 1e-12);
        assert!(j.iter().all(|f| f.linf_norm() == 0.0));
        assert_eq!(rho.slice(0), rho.slice(2));
    }

    #[test]
    fn switch_on_continuity_and_charge() {
        let g = grid();
        let m = SourceModel {
            q: 1.0,
            sigma: 1.0,
            center: [8.0; 3],
            trajectory: Trajectory::SwitchOnCurrent {
                direction: [0.0, 0.0, 1.0],
                t_on: 0.3,
                ramp: 0.4,
                current: 0.5,
                separation: 1.5,
            },
        };
        let (rho, j) = sample_sources(&m, &g, 12, 0.1).unwrap();
        let c = continuity_residual(&rho, &j);
        assert!(c < 1e-10, "{c}");
        for s in rho.iter() {
            assert!((s.integral() - 1.0).abs() < 1e-12);
        }
        assert_eq!(j.slice(0).linf_norm(), 0.0);
        assert!(j.slice(8).linf_norm() > 0.0);
        for a in 0..3 {
            assert!(j.slice(8).component(a).iter().sum::<f64>().abs() < 1e-12);
        }
    }

    #[test]
    fn oscillating_continuity() {
        let g = grid();
        let m = SourceModel {
            q: 1.0,
            sigma: 1.0,
            center: [8.0; 3],
            trajectory: Trajectory::Oscillating { direction: [1.0, 1.0, 0.0], amplitude: 0.3, omega: 2.0 },
        };
        let (rho, j) = sample_sources(&m, &g, 10, 0.1).unwrap();
        let c = continuity_residual(&rho, &j);
        assert!(c < 1e-10, "{c}");
        assert!(j.slice(0).linf_norm() < 1e-14);
    }

    #[test]
    fn zero_charge_gives_zero_sources() {
        let g = grid();
        let m = SourceModel::static_charge(0.0, 1.0, [8.0; 3]);
        let (rho, _) = sample_sources(&m, &g, 2, 0.1).unwrap();
        assert_eq!(rho.slice(1).linf_norm(), 0.0);
    }

    #[test]
    fn rejects_short_ramp() {
        let g = grid();
        let m = SourceModel {
            q: 1.0,
            sigma: 1.0,
            center: [8.0; 3],
            trajectory: Trajectory::SwitchOnCurrent {
                direction: [0.0, 0.0, 1.0],
                t_on: 0.3,
                ramp: 0.2,
                current: 1.0,
                separation: 1.5,
            },
        };
        assert!(SourceSpectra::new(&m, &g, 0.1).is_err());
    }
}
