//! Retarded electric fields of a charge/current history and their components.
//!
//! Every construction is evaluated one Fourier mode at a time. Fields start
//! from the electrostatic solution of the level-0 charge, and the retarded
//! propagator acts on deviations from it, so a source at rest stays exactly
//! static. The mean of the charge is treated as a neutralizing background.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{Field, FieldSeries, RealScalarField, RealVectorField, SpectralVectorField};
use crate::greens::{Duhamel, Phase};
use crate::grid::Grid;
use crate::spectral;
use crate::stencil;
use crate::vec3::{self, CVec3, CZERO, I};

pub const FOUR_PI: f64 = 4.0 * PI;

fn axpy(acc: CVec3, a: f64, x: CVec3) -> CVec3 {
    vec3::add(acc, vec3::scale_by(x, a))
}

fn grad(k: [f64; 3], s: Complex64) -> CVec3 {
    vec3::scale_real(k, I * s)
}

fn curl(k: [f64; 3], v: CVec3) -> CVec3 {
    vec3::scale(vec3::cross(k, v), I)
}

/// First time derivative of a mode history with the shared stencil.
pub fn ddt(values: &[CVec3], dt: f64) -> Vec<CVec3> {
    let nt = values.len();
    (0..nt)
        .map(|n| stencil::apply(values, dt, stencil::ddt(n, nt), CZERO, |acc, a, x: &CVec3| axpy(acc, a, *x)))
        .collect()
}

/// Electrostatic field `-i k 4 pi rho / |p|^2` of one mode.
pub fn coulomb_mode(p: [f64; 3], k: [f64; 3], rho: Complex64) -> CVec3 {
    let p2 = vec3::norm_sq(p);
    if p2 == 0.0 {
        return CZERO;
    }
    grad(k, -rho * FOUR_PI / p2)
}

/// Faraday's law integrated by the trapezoid rule from `B = 0`.
pub fn b_mode(k: [f64; 3], e: &[CVec3], dt: f64) -> Vec<CVec3> {
    let mut b = Vec::with_capacity(e.len());
    let mut cur = CZERO;
    for (n, en) in e.iter().enumerate() {
        if n > 0 {
            let avg = vec3::add(e[n - 1], *en);
            cur = vec3::sub(cur, vec3::scale_by(curl(k, avg), 0.5 * dt));
        }
        b.push(cur);
    }
    b
}

/// Histories of every field construction for one mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeRecord {
    pub e_total: Vec<CVec3>,
    pub e_par_instant: Vec<CVec3>,
    pub e_par_rohrlich: Vec<CVec3>,
    pub e_perp: Vec<CVec3>,
    pub e_heras_par: Vec<CVec3>,
    pub e_heras_perp: Vec<CVec3>,
    pub e_tau: Vec<CVec3>,
    pub b: Vec<CVec3>,
    /// `-4 pi d/dt D_R[J_par]`, the longitudinal part that the temporal component carries.
    pub tau_par: Vec<CVec3>,
}

/// Retarded fields driven by `E = E_static - 4 pi D_R[dJ/dt + grad(rho - rho_0)]` and its
/// longitudinal and transverse restrictions.
pub struct Retarded {
    pub e_total: Vec<CVec3>,
    pub e_par_rohrlich: Vec<CVec3>,
    pub e_perp: Vec<CVec3>,
}

pub fn retarded_mode(p: [f64; 3], k: [f64; 3], dt: f64, rho: &[Complex64], j: &[CVec3]) -> Retarded {
    retarded_with(p, k, dt, rho, j, &phases(p, dt, rho.len()))
}

fn phases(p: [f64; 3], dt: f64, nt: usize) -> Vec<Phase> {
    let omega = vec3::norm_sq(p).sqrt();
    (0..nt).map(|n| Phase::at(omega, n as f64 * dt)).collect()
}

fn retarded_with(p: [f64; 3], k: [f64; 3], dt: f64, rho: &[Complex64], j: &[CVec3], phases: &[Phase]) -> Retarded {
    let nt = rho.len();
    let omega = vec3::norm_sq(p).sqrt();
    let e_static = coulomb_mode(p, k, rho.first().copied().unwrap_or_default());
    let dj = ddt(j, dt);
    let mut tot = Duhamel::new(omega, dt);
    let mut par = Duhamel::new(omega, dt);
    let mut perp = Duhamel::new(omega, dt);
    let mut out = Retarded {
        e_total: Vec::with_capacity(nt),
        e_par_rohrlich: Vec::with_capacity(nt),
        e_perp: Vec::with_capacity(nt),
    };
    for (n, &phase) in phases.iter().enumerate() {
        let g = grad(k, rho[n] - rho[0]);
        let s_tot = vec3::add(dj[n], g);
        let s_par = vec3::add(vec3::longitudinal(p, dj[n]), g);
        let s_perp = vec3::transverse(p, dj[n]);
        let (u_tot, _) = tot.push(phase, s_tot);
        let (u_par, _) = par.push(phase, s_par);
        let (u_perp, _) = perp.push(phase, s_perp);
        out.e_total.push(axpy(e_static, -FOUR_PI, u_tot));
        out.e_par_rohrlich.push(axpy(e_static, -FOUR_PI, u_par));
        out.e_perp.push(vec3::scale_by(u_perp, -FOUR_PI));
    }
    out
}

/// The three-way split `(E_par, E_perp, E_tau)` of one mode given `rho`, `J` and `B` histories.
pub fn heras_mode(
    p: [f64; 3],
    k: [f64; 3],
    dt: f64,
    rho: &[Complex64],
    j: &[CVec3],
    b: &[CVec3],
) -> (Vec<CVec3>, Vec<CVec3>, Vec<CVec3>) {
    heras_with(p, k, dt, rho, j, b, &phases(p, dt, rho.len()))
}

fn heras_with(
    p: [f64; 3],
    k: [f64; 3],
    dt: f64,
    rho: &[Complex64],
    j: &[CVec3],
    b: &[CVec3],
    phases: &[Phase],
) -> (Vec<CVec3>, Vec<CVec3>, Vec<CVec3>) {
    let nt = rho.len();
    let omega = vec3::norm_sq(p).sqrt();
    let e_static = coulomb_mode(p, k, rho.first().copied().unwrap_or_default());
    let db = ddt(b, dt);
    let dj = ddt(j, dt);
    let j0 = j.first().copied().unwrap_or(CZERO);
    let mut charge = Duhamel::new(omega, dt);
    let mut induction = Duhamel::new(omega, dt);
    let mut current = Duhamel::new(omega, dt);
    let mut e_par = Vec::with_capacity(nt);
    let mut e_perp = Vec::with_capacity(nt);
    let mut e_tau = Vec::with_capacity(nt);
    for (n, &phase) in phases.iter().enumerate() {
        let (u_rho, _) = charge.push(phase, grad(k, rho[n] - rho[0]));
        let (u_b, _) = induction.push(phase, db[n]);
        let (u_dj, _) = current.push(phase, dj[n]);
        let du_j = axpy(u_dj, phase.kernel(omega), j0);
        let c = curl(k, u_b);
        e_par.push(axpy(e_static, -FOUR_PI, u_rho));
        e_perp.push(vec3::scale_by(c, -1.0));
        e_tau.push(axpy(c, -FOUR_PI, du_j));
    }
    (e_par, e_perp, e_tau)
}

/// `-4 pi d/dt D_R[J_par]` for one mode, evaluated as `D_R[dJ_par/dt]` plus the free
/// response to the initial current.
pub fn tau_par_mode(p: [f64; 3], dt: f64, j: &[CVec3]) -> Vec<CVec3> {
    tau_par_with(p, dt, j, &phases(p, dt, j.len()))
}

fn tau_par_with(p: [f64; 3], dt: f64, j: &[CVec3], phases: &[Phase]) -> Vec<CVec3> {
    let omega = vec3::norm_sq(p).sqrt();
    let mut d = Duhamel::new(omega, dt);
    let dj = ddt(j, dt);
    let j0 = vec3::longitudinal(p, j.first().copied().unwrap_or(CZERO));
    (0..j.len())
        .map(|n| {
            let (u, _) = d.push(phases[n], vec3::longitudinal(p, dj[n]));
            vec3::scale_by(axpy(u, phases[n].kernel(omega), j0), -FOUR_PI)
        })
        .collect()
}

pub fn mode_record(p: [f64; 3], k: [f64; 3], dt: f64, rho: &[Complex64], j: &[CVec3]) -> ModeRecord {
    let clock = phases(p, dt, rho.len());
    let ret = retarded_with(p, k, dt, rho, j, &clock);
    let b = b_mode(k, &ret.e_total, dt);
    let (e_heras_par, e_heras_perp, e_tau) = heras_with(p, k, dt, rho, j, &b, &clock);
    ModeRecord {
        e_par_instant: rho.iter().map(|&r| coulomb_mode(p, k, r)).collect(),
        tau_par: tau_par_with(p, dt, j, &clock),
        e_total: ret.e_total,
        e_par_rohrlich: ret.e_par_rohrlich,
        e_perp: ret.e_perp,
        e_heras_par,
        e_heras_perp,
        e_tau,
        b,
    }
}

/// Named residual checks; see [`Check::id`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Check {
    Gauss,
    GaussPar,
    ContinuityPar,
    Identity29,
    WaveTotal,
    WavePar,
    WavePerp,
    PoissonPar,
    Split22,
    RohrlichEquality,
    TauPar26,
    Perp36VsComplement,
    HerasParGap,
}

impl Check {
    pub const ALL: [Check; 13] = [
        Check::Gauss,
        Check::GaussPar,
        Check::ContinuityPar,
        Check::Identity29,
        Check::WaveTotal,
        Check::WavePar,
        Check::WavePerp,
        Check::PoissonPar,
        Check::Split22,
        Check::RohrlichEquality,
        Check::TauPar26,
        Check::Perp36VsComplement,
        Check::HerasParGap,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            Check::Gauss => "gauss",
            Check::GaussPar => "gauss_par",
            Check::ContinuityPar => "continuity_par",
            Check::Identity29 => "identity_29",
            Check::WaveTotal => "wave_total",
            Check::WavePar => "wave_par",
            Check::WavePerp => "wave_perp",
            Check::PoissonPar => "poisson_par",
            Check::Split22 => "split_22",
            Check::RohrlichEquality => "rohrlich_equality",
            Check::TauPar26 => "tau_par_26",
            Check::Perp36VsComplement => "perp_36_vs_complement",
            Check::HerasParGap => "heras_par_gap",
        }
    }

    /// Checks comparing two electric fields, as opposed to their derivatives or sources.
    pub fn compares_fields(&self) -> bool {
        matches!(
            self,
            Check::Split22 | Check::RohrlichEquality | Check::TauPar26 | Check::Perp36VsComplement | Check::HerasParGap
        )
    }

    pub fn from_id(id: &str) -> Option<Check> {
        Check::ALL.iter().copied().find(|c| c.id() == id)
    }
}

const NCHECK: usize = Check::ALL.len();
/// Per (check, level): |lhs|^2, |rhs|^2, |lhs - rhs|^2, |lhs - lhs_1|^2, |rhs - rhs_1|^2.
const NSUM: usize = 5;

/// Mode-summed squares behind every residual; merge in a fixed order for reproducible totals.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualSums {
    nt: usize,
    sums: Vec<[f64; NSUM]>,
    field: Vec<f64>,
}

fn scalar(v: Complex64) -> CVec3 {
    [v, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)]
}

impl ResidualSums {
    pub fn new(nt: usize) -> Self {
        ResidualSums { nt, sums: vec![[0.0; NSUM]; NCHECK * nt], field: vec![0.0; nt] }
    }

    pub fn merge(&mut self, other: &ResidualSums) {
        for (a, b) in self.sums.iter_mut().zip(&other.sums) {
            for i in 0..NSUM {
                a[i] += b[i];
            }
        }
        for (a, b) in self.field.iter_mut().zip(&other.field) {
            *a += b;
        }
    }

    /// Adds one mode's contribution `weight` times; 2 stands for a mode and its conjugate partner.
    #[allow(clippy::too_many_arguments)]
    pub fn add_mode(
        &mut self,
        p: [f64; 3],
        k: [f64; 3],
        dt: f64,
        rho: &[Complex64],
        j: &[CVec3],
        rec: &ModeRecord,
        weight: f64,
    ) {
        let nt = self.nt;
        if nt < 3 {
            return;
        }
        let p2 = vec3::norm_sq(p);
        let dj = ddt(j, dt);
        let e_long: Vec<CVec3> = rec.e_total.iter().map(|&e| vec3::longitudinal(p, e)).collect();
        let wave = |e: &[CVec3], n: usize| -> CVec3 {
            let d2 = stencil::apply(e, dt * dt, stencil::d2dt2(n), CZERO, |acc, a, x: &CVec3| axpy(acc, a, *x));
            axpy(d2, p2, e[n])
        };
        let rho_neutral = |n: usize| if p2 == 0.0 { Complex64::new(0.0, 0.0) } else { rho[n] };
        let pairs = |n: usize| -> [(CVec3, CVec3); NCHECK] {
            let jp = vec3::longitudinal(p, j[n]);
            let djp = vec3::longitudinal(p, dj[n]);
            let djt = vec3::transverse(p, dj[n]);
            let g = grad(k, rho_neutral(n));
            let de_long = stencil::apply(&e_long, dt, stencil::ddt(n, nt), CZERO, |acc, a, x: &CVec3| axpy(acc, a, *x));
            let split = vec3::add(vec3::add(rec.e_heras_par[n], rec.e_heras_perp[n]), rec.e_tau[n]);
            [
                (scalar(I * vec3::dot(k, rec.e_total[n])), scalar(rho_neutral(n) * FOUR_PI)),
                (scalar(I * vec3::dot(k, rec.e_total[n])), scalar(I * vec3::dot(k, rec.e_par_rohrlich[n]))),
                (vec3::scale_by(jp, FOUR_PI), vec3::scale_by(de_long, -1.0)),
                (vec3::add(djp, g), vec3::scale_by(wave(&rec.e_par_rohrlich, n), -1.0 / FOUR_PI)),
                (wave(&rec.e_total, n), vec3::scale_by(vec3::add(dj[n], g), -FOUR_PI)),
                (wave(&e_long, n), vec3::scale_by(vec3::add(djp, g), -FOUR_PI)),
                (wave(&rec.e_perp, n), vec3::scale_by(djt, -FOUR_PI)),
                (vec3::scale_by(rec.e_par_rohrlich[n], -p2), vec3::scale_by(g, FOUR_PI)),
                (split, rec.e_total[n]),
                (rec.e_par_rohrlich[n], rec.e_par_instant[n]),
                (vec3::longitudinal(p, rec.e_tau[n]), rec.tau_par[n]),
                (rec.e_perp[n], vec3::sub(rec.e_total[n], rec.e_par_rohrlich[n])),
                (vec3::add(rec.e_heras_par[n], rec.tau_par[n]), e_long[n]),
            ]
        };
        let reference = pairs(1);
        for n in 1..nt - 1 {
            self.field[n] += weight * vec3::abs_sq(rec.e_total[n]);
            let cur = pairs(n);
            for c in 0..NCHECK {
                let (l, r) = cur[c];
                let (l1, r1) = reference[c];
                let s = &mut self.sums[c * nt + n];
                s[0] += weight * vec3::abs_sq(l);
                s[1] += weight * vec3::abs_sq(r);
                s[2] += weight * vec3::abs_sq(vec3::sub(l, r));
                s[3] += weight * vec3::abs_sq(vec3::sub(l, l1));
                s[4] += weight * vec3::abs_sq(vec3::sub(r, r1));
            }
        }
    }

    /// Converts the sums into relative residuals on the interior levels.
    ///
    /// Each check gets `|lhs - rhs|` over the largest `max(|lhs|, |rhs|)` seen in the run,
    /// and an `_dyn` companion that divides by the largest change of either side since
    /// level 1 instead, emitted when that change exceeds `1e-12` of the full size.
    /// Field comparisons whose sides both stay below `1e-13` of the total field are 0/0 and report 0.
    pub fn finish(&self, grid: &Grid) -> ResidualReport {
        let nt = self.nt;
        let scale = grid.volume().sqrt() / grid.len() as f64;
        let field = self.field.iter().fold(0.0f64, |m, v| m.max(v.sqrt() * scale));
        let mut series = Vec::new();
        for (c, check) in Check::ALL.iter().enumerate() {
            let levels: Vec<[f64; 5]> =
                (1..nt.saturating_sub(1)).map(|n| self.sums[c * nt + n].map(|v| v.sqrt() * scale)).collect();
            let size = levels.iter().fold(0.0f64, |m, s| m.max(s[0]).max(s[1]));
            let change = levels.iter().fold(0.0f64, |m, s| m.max(s[3]).max(s[4]));
            let vanishing = check.compares_fields() && size <= 1e-13 * field;
            let mut full = ResidualSeries { id: check.id().to_string(), time_index: vec![], values: vec![] };
            let mut dynamic = ResidualSeries { id: format!("{}_dyn", check.id()), time_index: vec![], values: vec![] };
            for (i, s) in levels.iter().enumerate() {
                full.time_index.push(i + 1);
                full.values.push(if vanishing { 0.0 } else { crate::field::ratio(s[2], size) });
                if !vanishing && change > 1e-12 * size {
                    dynamic.time_index.push(i + 1);
                    dynamic.values.push(crate::field::ratio(s[2], change));
                }
            }
            series.push(full);
            series.push(dynamic);
        }
        ResidualReport { series }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualSeries {
    pub id: String,
    pub time_index: Vec<usize>,
    pub values: Vec<f64>,
}

impl ResidualSeries {
    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

/// Residual per check and interior time level.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub series: Vec<ResidualSeries>,
}

impl ResidualReport {
    pub fn get(&self, id: &str) -> Option<&ResidualSeries> {
        self.series.iter().find(|s| s.id == id)
    }

    /// Largest residual of a check, `None` if the id is unknown.
    pub fn max(&self, id: &str) -> Option<f64> {
        self.get(id).map(|s| s.max())
    }

    /// Rows `(check_id, time_index, residual)` in report order.
    pub fn rows(&self) -> Vec<(&str, usize, f64)> {
        self.series
            .iter()
            .flat_map(|s| s.time_index.iter().zip(&s.values).map(move |(&n, &v)| (s.id.as_str(), n, v)))
            .collect()
    }
}

/// All field constructions of one run on real-space series.
#[derive(Debug, Clone, PartialEq)]
pub struct EMRecord {
    pub e_total: FieldSeries<RealVectorField>,
    pub e_par_instant: FieldSeries<RealVectorField>,
    pub e_par_rohrlich: FieldSeries<RealVectorField>,
    pub e_perp: FieldSeries<RealVectorField>,
    pub e_heras_par: FieldSeries<RealVectorField>,
    pub e_heras_perp: FieldSeries<RealVectorField>,
    pub e_tau: FieldSeries<RealVectorField>,
    pub b: FieldSeries<RealVectorField>,
}

impl EMRecord {
    pub const NAMES: [&'static str; 8] =
        ["e_total", "e_par_instant", "e_par_rohrlich", "e_perp", "e_heras_par", "e_heras_perp", "e_tau", "b"];

    pub fn named(&self) -> [(&'static str, &FieldSeries<RealVectorField>); 8] {
        [
            ("e_total", &self.e_total),
            ("e_par_instant", &self.e_par_instant),
            ("e_par_rohrlich", &self.e_par_rohrlich),
            ("e_perp", &self.e_perp),
            ("e_heras_par", &self.e_heras_par),
            ("e_heras_perp", &self.e_heras_perp),
            ("e_tau", &self.e_tau),
            ("b", &self.b),
        ]
    }
}

/// Mode-major spectral histories of a charge and current series.
pub struct SpectralHistory {
    grid: Grid,
    dt: f64,
    rho: Vec<Vec<Complex64>>,
    j: Vec<SpectralVectorField>,
}

impl SpectralHistory {
    pub fn new(rho: &FieldSeries<RealScalarField>, j: &FieldSeries<RealVectorField>) -> Result<Self> {
        if rho.grid() != j.grid() || rho.len() != j.len() {
            return Err(Error::GridMismatch);
        }
        if (rho.dt() - j.dt()).abs() > 1e-15 * rho.dt() {
            return Err(Error::Precondition("charge and current use different time steps".into()));
        }
        Ok(SpectralHistory {
            grid: rho.grid().clone(),
            dt: rho.dt(),
            rho: rho.iter().map(|r| spectral::forward_scalar(r).into_data()).collect(),
            j: j.iter().map(spectral::forward).collect(),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    pub fn mode_history(&self, idx: usize) -> (Vec<Complex64>, Vec<CVec3>) {
        (self.rho.iter().map(|r| r[idx]).collect(), self.j.iter().map(|s| s.at(idx)).collect())
    }
}

fn real_series(grid: &Grid, dt: f64, slices: Vec<SpectralVectorField>) -> FieldSeries<RealVectorField> {
    FieldSeries::new(grid, dt, slices.iter().map(spectral::inverse).collect()).expect("one grid")
}

fn per_mode(
    grid: &Grid,
    nt: usize,
    count: usize,
    mut f: impl FnMut(usize) -> Vec<Vec<CVec3>>,
) -> Vec<Vec<SpectralVectorField>> {
    let mut out = vec![vec![SpectralVectorField::zeros(grid); nt]; count];
    for idx in 0..grid.len() {
        let hist = f(idx);
        for (c, h) in hist.iter().enumerate() {
            for (n, v) in h.iter().enumerate() {
                out[c][n].set(idx, *v);
            }
        }
    }
    out
}

/// `phi` with `-laplacian(phi) = 4 pi rho`, neutralizing background applied.
pub fn phi_instantaneous(rho: &RealScalarField) -> RealScalarField {
    let s = spectral::inverse_laplacian_scalar(&spectral::forward_scalar(rho));
    spectral::inverse_scalar(&s).scaled(FOUR_PI)
}

/// `-grad(phi)` of the present charge.
pub fn e_par_instant(rho: &RealScalarField) -> RealVectorField {
    let s = spectral::forward_scalar(rho);
    let grid = rho.grid();
    let e =
        SpectralVectorField::from_fn(grid, |i| coulomb_mode(grid.wavevector(i), grid.deriv_wavevector(i), s.data()[i]));
    spectral::inverse(&e)
}

fn retarded_series(
    rho: &FieldSeries<RealScalarField>,
    j: &FieldSeries<RealVectorField>,
) -> Result<[FieldSeries<RealVectorField>; 3]> {
    let h = SpectralHistory::new(rho, j)?;
    let grid = h.grid().clone();
    let out = per_mode(&grid, h.len(), 3, |idx| {
        let (r, c) = h.mode_history(idx);
        let ret = retarded_mode(grid.wavevector(idx), grid.deriv_wavevector(idx), h.dt(), &r, &c);
        vec![ret.e_total, ret.e_par_rohrlich, ret.e_perp]
    });
    let mut it = out.into_iter().map(|s| real_series(&grid, h.dt(), s));
    Ok([it.next().unwrap(), it.next().unwrap(), it.next().unwrap()])
}

/// Total retarded field `E_static - 4 pi D_R[dJ/dt + grad(rho - rho_0)]`.
pub fn e_total_retarded(
    rho: &FieldSeries<RealScalarField>,
    j: &FieldSeries<RealVectorField>,
) -> Result<FieldSeries<RealVectorField>> {
    Ok(retarded_series(rho, j)?.into_iter().next().unwrap())
}

/// Longitudinal field from the retarded integral of `dJ_par/dt + grad(rho)`.
pub fn e_par_rohrlich(
    rho: &FieldSeries<RealScalarField>,
    j: &FieldSeries<RealVectorField>,
) -> Result<FieldSeries<RealVectorField>> {
    Ok(retarded_series(rho, j)?.into_iter().nth(1).unwrap())
}

/// Transverse field `-4 pi D_R[dJ_perp/dt]`.
pub fn e_perp_retarded(j: &FieldSeries<RealVectorField>) -> Result<FieldSeries<RealVectorField>> {
    let rho = j.map(|f| RealScalarField::zeros(f.grid()));
    Ok(retarded_series(&rho, j)?.into_iter().nth(2).unwrap())
}

/// Magnetic field from `dB/dt = -curl E`, starting at zero.
pub fn b_field(e: &FieldSeries<RealVectorField>) -> FieldSeries<RealVectorField> {
    let grid = e.grid().clone();
    let spectra: Vec<SpectralVectorField> = e.iter().map(spectral::forward).collect();
    let out = per_mode(&grid, e.len(), 1, |idx| {
        let hist: Vec<CVec3> = spectra.iter().map(|s| s.at(idx)).collect();
        vec![b_mode(grid.deriv_wavevector(idx), &hist, e.dt())]
    });
    real_series(&grid, e.dt(), out.into_iter().next().unwrap())
}

/// `(E_par, E_perp, E_tau)`: `-4 pi grad D_R[rho]`, `-curl D_R[dB/dt]`,
/// `curl D_R[dB/dt] - 4 pi d/dt D_R[J]`.
pub fn heras_components(
    rho: &FieldSeries<RealScalarField>,
    j: &FieldSeries<RealVectorField>,
    b: &FieldSeries<RealVectorField>,
) -> Result<[FieldSeries<RealVectorField>; 3]> {
    let h = SpectralHistory::new(rho, j)?;
    if b.grid() != h.grid() || b.len() != h.len() {
        return Err(Error::GridMismatch);
    }
    let grid = h.grid().clone();
    let bs: Vec<SpectralVectorField> = b.iter().map(spectral::forward).collect();
    let out = per_mode(&grid, h.len(), 3, |idx| {
        let (r, c) = h.mode_history(idx);
        let bh: Vec<CVec3> = bs.iter().map(|s| s.at(idx)).collect();
        let (a, p, t) = heras_mode(grid.wavevector(idx), grid.deriv_wavevector(idx), h.dt(), &r, &c, &bh);
        vec![a, p, t]
    });
    let mut it = out.into_iter().map(|s| real_series(&grid, h.dt(), s));
    Ok([it.next().unwrap(), it.next().unwrap(), it.next().unwrap()])
}

/// Every construction at once.
pub fn em_record(rho: &FieldSeries<RealScalarField>, j: &FieldSeries<RealVectorField>) -> Result<EMRecord> {
    let h = SpectralHistory::new(rho, j)?;
    let grid = h.grid().clone();
    let out = per_mode(&grid, h.len(), 8, |idx| {
        let (r, c) = h.mode_history(idx);
        let m = mode_record(grid.wavevector(idx), grid.deriv_wavevector(idx), h.dt(), &r, &c);
        vec![m.e_total, m.e_par_instant, m.e_par_rohrlich, m.e_perp, m.e_heras_par, m.e_heras_perp, m.e_tau, m.b]
    });
    let mut it = out.into_iter().map(|s| real_series(&grid, h.dt(), s));
    let mut next = || it.next().unwrap();
    Ok(EMRecord {
        e_total: next(),
        e_par_instant: next(),
        e_par_rohrlich: next(),
        e_perp: next(),
        e_heras_par: next(),
        e_heras_perp: next(),
        e_tau: next(),
        b: next(),
    })
}

/// Evaluates every residual check on a recorded run.
pub fn residual_suite(
    record: &EMRecord,
    rho: &FieldSeries<RealScalarField>,
    j: &FieldSeries<RealVectorField>,
) -> Result<ResidualReport> {
    let h = SpectralHistory::new(rho, j)?;
    let grid = h.grid().clone();
    let named = record.named();
    if named.iter().any(|(_, s)| s.grid() != &grid || s.len() != h.len()) {
        return Err(Error::GridMismatch);
    }
    let spectra: Vec<Vec<SpectralVectorField>> =
        named.iter().map(|(_, s)| s.iter().map(spectral::forward).collect()).collect();
    let mut sums = ResidualSums::new(h.len());
    for idx in 0..grid.len() {
        let (r, c) = h.mode_history(idx);
        let hist = |f: usize| -> Vec<CVec3> { spectra[f].iter().map(|s| s.at(idx)).collect() };
        let p = grid.wavevector(idx);
        let m = ModeRecord {
            e_total: hist(0),
            e_par_instant: hist(1),
            e_par_rohrlich: hist(2),
            e_perp: hist(3),
            e_heras_par: hist(4),
            e_heras_perp: hist(5),
            e_tau: hist(6),
            b: hist(7),
            tau_par: tau_par_mode(p, h.dt(), &c),
        };
        sums.add_mode(p, grid.deriv_wavevector(idx), h.dt(), &r, &c, &m, 1.0);
    }
    Ok(sums.finish(&grid))
}
