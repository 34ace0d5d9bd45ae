//! Mode-outer evaluation of a full run.
//!
//! Each Fourier mode's whole history is built, propagated and folded into the
//! residual sums before moving on, so memory stays at a few slices no matter
//! how long the run is. Modes are processed in fixed blocks and the partial
//! sums are merged in block order, which keeps results bit-identical across
//! thread counts. Sources are real, so only one mode of each conjugate pair is
//! evaluated and its partner is filled in by conjugation.

use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use crate::error::Result;
use crate::field::{FieldSeries, RealVectorField, SpectralVectorField};
use crate::grid::Grid;
use crate::maxwell::{mode_record, EMRecord, ModeRecord, ResidualReport, ResidualSums, SpectralHistory};
use crate::sources::SourceSpectra;
use crate::spectral;
use crate::vec3::CVec3;

const BLOCK: usize = 2048;
const BLOCKS_PER_ROUND: usize = 16;

/// Anything that yields a charge and current history for one mode.
pub trait ModeSource: Sync {
    fn grid(&self) -> &Grid;
    fn dt(&self) -> f64;
    fn history(&self, idx: usize, nt: usize) -> (Vec<Complex64>, Vec<CVec3>);
}

impl ModeSource for SourceSpectra {
    fn grid(&self) -> &Grid {
        SourceSpectra::grid(self)
    }
    fn dt(&self) -> f64 {
        SourceSpectra::dt(self)
    }
    fn history(&self, idx: usize, nt: usize) -> (Vec<Complex64>, Vec<CVec3>) {
        self.mode_history(idx, nt)
    }
}

impl ModeSource for SpectralHistory {
    fn grid(&self) -> &Grid {
        SpectralHistory::grid(self)
    }
    fn dt(&self) -> f64 {
        SpectralHistory::dt(self)
    }
    fn history(&self, idx: usize, nt: usize) -> (Vec<Complex64>, Vec<CVec3>) {
        let (r, j) = self.mode_history(idx);
        (r[..nt].to_vec(), j[..nt].to_vec())
    }
}

/// All eight fields at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub level: usize,
    pub fields: [RealVectorField; 8],
}

impl Snapshot {
    pub fn named(&self) -> impl Iterator<Item = (&'static str, &RealVectorField)> {
        EMRecord::NAMES.iter().copied().zip(self.fields.iter())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub report: ResidualReport,
    pub snapshots: Vec<Snapshot>,
}

fn record_at(m: &ModeRecord, n: usize) -> [CVec3; 8] {
    [
        m.e_total[n],
        m.e_par_instant[n],
        m.e_par_rohrlich[n],
        m.e_perp[n],
        m.e_heras_par[n],
        m.e_heras_perp[n],
        m.e_tau[n],
        m.b[n],
    ]
}

/// Runs every field construction for `nt` levels, returning residuals and the fields at `levels`.
pub fn run<S: ModeSource>(source: &S, nt: usize, levels: &[usize]) -> Result<RunOutput> {
    let grid = source.grid().clone();
    let dt = source.dt();
    let levels: Vec<usize> = levels.iter().copied().filter(|&n| n < nt).collect();
    let mut spectra = vec![vec![SpectralVectorField::zeros(&grid); 8]; levels.len()];
    let mut sums = ResidualSums::new(nt);
    let nblocks = grid.len().div_ceil(BLOCK);
    for round in (0..nblocks).step_by(BLOCKS_PER_ROUND) {
        let last = (round + BLOCKS_PER_ROUND).min(nblocks);
        let parts: Vec<(ResidualSums, Vec<(usize, Vec<[CVec3; 8]>)>)> = (round..last)
            .into_par_iter()
            .map(|b| {
                let mut local = ResidualSums::new(nt);
                let mut snaps = Vec::new();
                for idx in b * BLOCK..((b + 1) * BLOCK).min(grid.len()) {
                    let partner = grid.conjugate_index(idx);
                    if partner < idx {
                        continue;
                    }
                    let weight = if partner == idx { 1.0 } else { 2.0 };
                    let (rho, j) = source.history(idx, nt);
                    let p = grid.wavevector(idx);
                    let k = grid.deriv_wavevector(idx);
                    let rec = mode_record(p, k, dt, &rho, &j);
                    local.add_mode(p, k, dt, &rho, &j, &rec, weight);
                    if !levels.is_empty() {
                        snaps.push((idx, levels.iter().map(|&n| record_at(&rec, n)).collect()));
                    }
                }
                (local, snaps)
            })
            .collect();
        for (local, snaps) in parts {
            sums.merge(&local);
            for (idx, values) in snaps {
                for (s, v) in values.iter().enumerate() {
                    let partner = grid.conjugate_index(idx);
                    for f in 0..8 {
                        spectra[s][f].set(idx, v[f]);
                        if partner != idx {
                            spectra[s][f].set(partner, v[f].map(|c| c.conj()));
                        }
                    }
                }
            }
        }
    }
    let snapshots = levels
        .iter()
        .zip(spectra)
        .map(|(&level, fields)| {
            let mut it = fields.iter().map(spectral::inverse);
            let fields = std::array::from_fn(|_| it.next().unwrap());
            Snapshot { level, fields }
        })
        .collect();
    Ok(RunOutput { report: sums.finish(&grid), snapshots })
}

/// Converts snapshots covering every level into a record.
pub fn snapshots_to_record(grid: &Grid, dt: f64, snapshots: &[Snapshot]) -> Result<EMRecord> {
    let series = |f: usize| FieldSeries::new(grid, dt, snapshots.iter().map(|s| s.fields[f].clone()).collect());
    Ok(EMRecord {
        e_total: series(0)?,
        e_par_instant: series(1)?,
        e_par_rohrlich: series(2)?,
        e_perp: series(3)?,
        e_heras_par: series(4)?,
        e_heras_perp: series(5)?,
        e_tau: series(6)?,
        b: series(7)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::maxwell::{em_record, residual_suite};
    use crate::sources::{sample_sources, SourceModel, Trajectory};

    #[test]
    fn engine_matches_series_api() {
        let g = Grid::new(GridSpec::cubic(32, 16.0, 0.1, 12)).unwrap();
        let m = SourceModel {
            q: 1.0,
            sigma: 1.0,
            center: [8.0; 3],
            trajectory: Trajectory::SwitchOnCurrent {
                direction: [0.0, 1.0, 0.0],
                t_on: 0.2,
                ramp: 0.4,
                current: 0.3,
                separation: 2.0,
            },
        };
        let nt = 12;
        let (rho, j) = sample_sources(&m, &g, nt, 0.1).unwrap();
        let rec = em_record(&rho, &j).unwrap();
        let src = SourceSpectra::new(&m, &g, 0.1).unwrap();
        let levels: Vec<usize> = (0..nt).collect();
        let out = run(&src, nt, &levels).unwrap();
        let eng = snapshots_to_record(&g, 0.1, &out.snapshots).unwrap();
        for ((name, a), (_, b)) in rec.named().iter().zip(eng.named().iter()) {
            let d = a.max_relative_diff(b, a);
            assert!(d < 1e-10, "{name}: {d}");
        }
        let suite = residual_suite(&rec, &rho, &j).unwrap();
        for (s, e) in suite.series.iter().zip(&out.report.series) {
            assert_eq!(s.id, e.id);
            for (x, y) in s.values.iter().zip(&e.values) {
                assert!((x - y).abs() <= 1e-6 * x.abs() + 1e-12, "{}: {x} vs {y}", s.id);
            }
        }
    }
}
