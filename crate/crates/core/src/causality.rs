//! Front arrival and light-cone diagnostics for switch-on runs.

use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{Field, FieldSeries, RealVectorField};
use crate::greens::Duhamel;
use crate::grid::Grid;
use crate::maxwell::{coulomb_mode, FOUR_PI};
use crate::sources::SourceSpectra;
use crate::stencil;
use crate::vec3::{self, CVec3, CZERO, I};

/// Cells binned into spherical shells of one cell width around a center.
#[derive(Debug, Clone)]
pub struct Shells {
    pub width: f64,
    distance: Vec<f64>,
    shell: Vec<usize>,
    count: usize,
}

impl Shells {
    pub fn new(grid: &Grid, center: [f64; 3]) -> Self {
        let width = grid.spacing();
        let distance: Vec<f64> = (0..grid.len()).map(|i| vec3::norm_sq(grid.min_image(i, center)).sqrt()).collect();
        let shell: Vec<usize> = distance.iter().map(|d| (d / width).floor() as usize).collect();
        let count = shell.iter().copied().max().map_or(0, |m| m + 1);
        Shells { width, distance, shell, count }
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// Mid radius of every shell.
    pub fn radii(&self) -> Vec<f64> {
        (0..self.count).map(|s| (s as f64 + 0.5) * self.width).collect()
    }

    pub fn shell_of_radius(&self, r: f64) -> usize {
        ((r / self.width).floor() as usize).min(self.count.saturating_sub(1))
    }

    /// Largest magnitude per shell.
    pub fn shell_max(&self, magnitude: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0f64; self.count];
        for (m, &s) in magnitude.iter().zip(&self.shell) {
            out[s] = out[s].max(*m);
        }
        out
    }

    /// Largest magnitude over cells strictly farther than `radius`.
    pub fn max_beyond(&self, magnitude: &[f64], radius: f64) -> f64 {
        magnitude.iter().zip(&self.distance).filter(|(_, d)| **d > radius).fold(0.0, |acc, (m, _)| acc.max(*m))
    }
}

/// Per-shell arrival times of one component; `None` means the threshold was never crossed.
#[derive(Debug, Clone, PartialEq)]
pub struct Arrivals {
    pub threshold: f64,
    pub peak: f64,
    pub times: Vec<Option<f64>>,
}

/// Arrival at each shell: the first time the shell maximum exceeds `threshold * peak`,
/// where `peak` is the largest shell maximum over the whole history.
pub fn arrivals(history: &[Vec<f64>], dt: f64, threshold: f64) -> Arrivals {
    let count = history.first().map_or(0, |h| h.len());
    let peak = history.iter().flat_map(|h| h.iter()).fold(0.0f64, |a, b| a.max(*b));
    let mut times = vec![None; count];
    if peak > 0.0 {
        let level = threshold * peak;
        for (n, h) in history.iter().enumerate() {
            for (s, v) in h.iter().enumerate() {
                if times[s].is_none() && *v > level {
                    times[s] = Some(n as f64 * dt);
                }
            }
        }
    }
    Arrivals { threshold, peak, times }
}

/// Least-squares line `t = intercept + r / speed` through the arrivals with radius in `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontFit {
    pub speed: f64,
    pub intercept: f64,
    pub points: usize,
    pub lo: f64,
    pub hi: f64,
}

pub fn fit_front(radii: &[f64], arrivals: &[Option<f64>], lo: f64, hi: f64) -> Option<FrontFit> {
    let pts: Vec<(f64, f64)> = radii
        .iter()
        .zip(arrivals)
        .filter(|(r, _)| **r >= lo && **r <= hi)
        .filter_map(|(r, t)| t.map(|t| (*r, t)))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mr = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mt = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let srr: f64 = pts.iter().map(|p| (p.0 - mr).powi(2)).sum();
    let srt: f64 = pts.iter().map(|p| (p.0 - mr) * (p.1 - mt)).sum();
    if srr == 0.0 || srt == 0.0 {
        return None;
    }
    let slope = srt / srr;
    Some(FrontFit { speed: 1.0 / slope, intercept: mt - slope * mr, points: pts.len(), lo, hi })
}

/// Front arrival table of a real-space series around `center`.
pub fn front_arrival(series: &FieldSeries<RealVectorField>, center: [f64; 3], threshold: f64) -> Result<Arrivals> {
    check_window(series.grid(), series.len(), series.dt())?;
    check_threshold(threshold)?;
    let shells = Shells::new(series.grid(), center);
    let history: Vec<Vec<f64>> = series.iter().map(|f| shells.shell_max(&f.magnitude())).collect();
    Ok(arrivals(&history, series.dt(), threshold))
}

fn check_window(grid: &Grid, nt: usize, dt: f64) -> Result<()> {
    let t_max = nt.saturating_sub(1) as f64 * dt;
    if t_max >= 0.5 * grid.box_len() {
        return Err(Error::Precondition(format!(
            "run ends at t = {t_max}, not before the wrap-around time L/2 = {}",
            0.5 * grid.box_len()
        )));
    }
    Ok(())
}

fn check_threshold(threshold: f64) -> Result<()> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::Precondition(format!("threshold {threshold} must lie in (0, 1)")));
    }
    Ok(())
}

/// One row of the outside-cone table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutsideRow {
    pub t: f64,
    pub par: f64,
    pub perp: f64,
    pub sum: f64,
    pub total: f64,
    /// `sum / par`, zero where `par` is below [`RATIO_FLOOR`] of its largest value in the run.
    pub ratio: f64,
}

/// Outside-cone levels of the longitudinal field below this fraction of its peak carry no ratio.
pub const RATIO_FLOOR: f64 = 1e-9;

fn apply_ratio_floor(rows: &mut [OutsideRow]) {
    let peak = rows.iter().map(|r| r.par).fold(0.0, f64::max);
    for r in rows.iter_mut() {
        if r.par <= RATIO_FLOOR * peak {
            r.ratio = 0.0;
        }
    }
}

/// Radius of the light cone plus margins at time `t`.
pub fn cone_radius(t: f64, t_on: f64, margin: f64, support: f64) -> f64 {
    (t - t_on).max(0.0) + margin + support
}

fn outside_row(shells: &Shells, t: f64, radius: f64, par: &[CVec3r], perp: &[CVec3r], total: &[CVec3r]) -> OutsideRow {
    let mag = |f: &[CVec3r]| f.iter().map(|v| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()).collect::<Vec<_>>();
    let sum: Vec<CVec3r> = par.iter().zip(perp).map(|(a, b)| [a[0] + b[0], a[1] + b[1], a[2] + b[2]]).collect();
    let p = shells.max_beyond(&mag(par), radius);
    let s = shells.max_beyond(&mag(&sum), radius);
    OutsideRow {
        t,
        par: p,
        perp: shells.max_beyond(&mag(perp), radius),
        sum: s,
        total: shells.max_beyond(&mag(total), radius),
        ratio: if p > 0.0 { s / p } else { 0.0 },
    }
}

type CVec3r = [f64; 3];

fn points(f: &RealVectorField) -> Vec<CVec3r> {
    (0..f.grid().len()).map(|i| f.at(i)).collect()
}

/// Outside-cone maxima of `e_par`, `e_perp`, their sum and `e_total` at every level.
///
/// Cells count as outside when `|r - center| > (t - t_on) + margin + support`.
pub fn cone_cancellation(
    e_par: &FieldSeries<RealVectorField>,
    e_perp: &FieldSeries<RealVectorField>,
    e_total: &FieldSeries<RealVectorField>,
    center: [f64; 3],
    t_on: f64,
    margin: f64,
    support: f64,
) -> Result<Vec<OutsideRow>> {
    check_window(e_par.grid(), e_par.len(), e_par.dt())?;
    let shells = Shells::new(e_par.grid(), center);
    let mut rows: Vec<OutsideRow> = (0..e_par.len())
        .map(|n| {
            let t = e_par.time(n);
            let r = cone_radius(t, t_on, margin, support);
            outside_row(&shells, t, r, &points(e_par.slice(n)), &points(e_perp.slice(n)), &points(e_total.slice(n)))
        })
        .collect();
    apply_ratio_floor(&mut rows);
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CausalityConfig {
    /// Relative threshold for front arrival.
    pub threshold: f64,
    /// Relative level for calling the dynamic longitudinal field nonzero.
    pub instant_threshold: f64,
    /// Extra cone margin in cells.
    pub margin_cells: f64,
}

impl Default for CausalityConfig {
    fn default() -> Self {
        CausalityConfig { threshold: 1e-6, instant_threshold: 1e-9, margin_cells: 2.0 }
    }
}

pub const COMPONENTS: [&str; 4] = ["e_total", "e_par", "e_perp", "e_par_instant"];

#[derive(Debug, Clone, PartialEq)]
pub struct FrontReport {
    pub shell_radii: Vec<f64>,
    /// Arrivals per entry of [`COMPONENTS`], all dynamic parts.
    pub arrivals: Vec<Arrivals>,
    pub fit: Option<FrontFit>,
    pub threshold: f64,
    pub outside: Vec<OutsideRow>,
    pub t_on: f64,
    pub dt: f64,
    /// First time the dynamic longitudinal field exceeds `instant_threshold` of its peak at radius `L/3`.
    pub par_at_third: Option<f64>,
    pub third_radius: f64,
    pub instant_threshold: f64,
    pub support_radius: f64,
    pub margin: f64,
}

impl FrontReport {
    pub fn max_ratio(&self) -> f64 {
        self.outside.iter().map(|r| r.ratio).fold(0.0, f64::max)
    }

    /// Arrival times of `e_total` never decrease outward across the fit window.
    pub fn monotone_total(&self) -> bool {
        let (lo, hi) = self.fit.map_or((0.0, f64::INFINITY), |f| (f.lo, f.hi));
        let mut last = f64::NEG_INFINITY;
        for (r, t) in self.shell_radii.iter().zip(&self.arrivals[0].times) {
            if *r < lo || *r > hi {
                continue;
            }
            if let Some(t) = t {
                if *t < last {
                    return false;
                }
                last = *t;
            }
        }
        true
    }

    /// Whether the dynamic longitudinal field is already nonzero at `L/3` within one step of onset.
    pub fn instantaneous(&self) -> bool {
        self.par_at_third.is_some_and(|t| t <= self.t_on + self.dt * (1.0 + 1e-9))
    }
}

struct ModeState {
    tot: Duhamel,
    par: Duhamel,
    perp: Duhamel,
}

/// Streams a switch-on run level by level and measures fronts and outside-cone cancellation.
///
/// Components are dynamic parts (field minus its value before onset): the total
/// retarded field, the retarded longitudinal field, the retarded transverse field
/// and the instantaneous Coulomb field of the present charge.
pub fn run_causality(source: &SourceSpectra, nt: usize, cfg: &CausalityConfig) -> Result<FrontReport> {
    let grid = source.grid().clone();
    let dt = source.dt();
    check_window(&grid, nt, dt)?;
    check_threshold(cfg.threshold)?;
    check_threshold(cfg.instant_threshold)?;
    let model = source.model();
    let t_on = model.onset();
    let support = model.support_radius();
    let margin = cfg.margin_cells * grid.spacing();
    let shells = Shells::new(&grid, model.center);
    let n = grid.len();

    let mut states: Vec<ModeState> = (0..n)
        .map(|idx| {
            let omega = vec3::norm_sq(grid.wavevector(idx)).sqrt();
            ModeState { tot: Duhamel::new(omega, dt), par: Duhamel::new(omega, dt), perp: Duhamel::new(omega, dt) }
        })
        .collect();
    let rho0: Vec<Complex64> = (0..n).map(|idx| source.rho(idx, 0)).collect();

    let mut history: Vec<Vec<Vec<f64>>> = vec![Vec::with_capacity(nt); COMPONENTS.len()];
    let mut outside = Vec::with_capacity(nt);
    let mut modes: Vec<[CVec3; 4]> = vec![[CZERO; 4]; n];
    for level in 0..nt {
        let w = stencil::ddt(level, nt);
        states.par_iter_mut().zip(modes.par_iter_mut()).enumerate().for_each(|(idx, (st, out))| {
            let p = grid.wavevector(idx);
            let k = grid.deriv_wavevector(idx);
            let dj = w.iter().fold(CZERO, |acc, &(lv, wt)| {
                if wt == 0.0 {
                    acc
                } else {
                    vec3::add(acc, vec3::scale_by(source.current(idx, lv as i64), wt / dt))
                }
            });
            let dev = source.rho(idx, level as i64) - rho0[idx];
            let g = vec3::scale_real(k, I * dev);
            let phase = st.tot.phase(level);
            let (u_tot, _) = st.tot.push(phase, vec3::add(dj, g));
            let (u_par, _) = st.par.push(phase, vec3::add(vec3::longitudinal(p, dj), g));
            let (u_perp, _) = st.perp.push(phase, vec3::transverse(p, dj));
            *out = [
                vec3::scale_by(u_tot, -FOUR_PI),
                vec3::scale_by(u_par, -FOUR_PI),
                vec3::scale_by(u_perp, -FOUR_PI),
                coulomb_mode(p, k, dev),
            ];
        });
        let fields: Vec<Vec<CVec3r>> = (0..COMPONENTS.len())
            .map(|c| {
                let comps: [Vec<f64>; 3] = std::array::from_fn(|a| {
                    let buf: Vec<Complex64> = modes.iter().map(|m| m[c][a]).collect();
                    crate::spectral::inverse_complex(&grid, &buf).into_iter().map(|v| v.re).collect()
                });
                (0..n).map(|i| [comps[0][i], comps[1][i], comps[2][i]]).collect()
            })
            .collect();
        for (c, f) in fields.iter().enumerate() {
            let mag: Vec<f64> = f.iter().map(|v| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()).collect();
            history[c].push(shells.shell_max(&mag));
        }
        let t = level as f64 * dt;
        let radius = cone_radius(t, t_on, margin, support);
        outside.push(outside_row(&shells, t, radius, &fields[1], &fields[2], &fields[0]));
    }

    apply_ratio_floor(&mut outside);
    let radii = shells.radii();
    let arr: Vec<Arrivals> = history.iter().map(|h| arrivals(h, dt, cfg.threshold)).collect();
    let third = grid.box_len() / 3.0;
    let fit = fit_front(&radii, &arr[0].times, support, third);
    let instant = arrivals(&history[1], dt, cfg.instant_threshold);
    let par_at_third = instant.times.get(shells.shell_of_radius(third)).copied().flatten();
    Ok(FrontReport {
        shell_radii: radii,
        arrivals: arr,
        fit,
        threshold: cfg.threshold,
        outside,
        t_on,
        dt,
        par_at_third,
        third_radius: third,
        instant_threshold: cfg.instant_threshold,
        support_radius: support,
        margin,
    })
}
