use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Lattice description: cell counts per axis, cubic box length, time step and slice count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub box_len: f64,
    pub dt: f64,
    pub nt: usize,
}

impl GridSpec {
    pub fn cubic(n: usize, box_len: f64, dt: f64, nt: usize) -> Self {
        GridSpec { nx: n, ny: n, nz: n, box_len, dt, nt }
    }

    pub fn max_dim(&self) -> usize {
        self.nx.max(self.ny).max(self.nz)
    }

    /// Finest cell width, `box_len / max(n)`.
    pub fn spacing(&self) -> f64 {
        self.box_len / self.max_dim() as f64
    }

    pub fn validate(&self) -> Result<()> {
        for (axis, n) in [("x", self.nx), ("y", self.ny), ("z", self.nz)] {
            if n < 4 || n % 2 != 0 {
                return Err(Error::InvalidGrid(format!("n_{axis} = {n} must be even and at least 4")));
            }
        }
        if !(self.box_len.is_finite() && self.box_len > 0.0) {
            return Err(Error::InvalidGrid(format!("box_len = {} must be positive", self.box_len)));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidGrid(format!("dt = {} must be positive", self.dt)));
        }
        if self.nt == 0 {
            return Err(Error::InvalidGrid("n_t must be positive".into()));
        }
        let bound = 0.5 * self.spacing();
        if self.dt > bound * (1.0 + 1e-12) {
            return Err(Error::InvalidGrid(format!("dt = {} exceeds half a cell ({bound})", self.dt)));
        }
        Ok(())
    }
}

/// Signed FFT frequency index for position `i` on an axis of `n` points.
/// The Nyquist point maps to `-n/2`.
pub fn frequency_index(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Validated grid with wavenumber tables and cached FFT plans. Cheap to clone.
#[derive(Clone)]
pub struct Grid {
    inner: Arc<Inner>,
}

struct Inner {
    spec: GridSpec,
    wave: [Vec<f64>; 3],
    deriv: [Vec<f64>; 3],
    cell_volume: f64,
    fft: Fft3,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("spec", &self.inner.spec).finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.inner.spec == other.inner.spec
    }
}

impl Grid {
    pub fn new(spec: GridSpec) -> Result<Self> {
        spec.validate()?;
        let dims = [spec.nx, spec.ny, spec.nz];
        let wave =
            dims.map(|n| (0..n).map(|i| 2.0 * PI * frequency_index(i, n) as f64 / spec.box_len).collect::<Vec<_>>());
        let deriv = dims.map(|n| {
            (0..n)
                .map(|i| if i == n / 2 { 0.0 } else { 2.0 * PI * frequency_index(i, n) as f64 / spec.box_len })
                .collect::<Vec<_>>()
        });
        let cell_volume = spec.box_len.powi(3) / (spec.nx * spec.ny * spec.nz) as f64;
        Ok(Grid { inner: Arc::new(Inner { spec, wave, deriv, cell_volume, fft: Fft3::new(dims) }) })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.inner.spec
    }

    pub fn dims(&self) -> [usize; 3] {
        let s = &self.inner.spec;
        [s.nx, s.ny, s.nz]
    }

    /// Number of spatial cells.
    pub fn len(&self) -> usize {
        let [nx, ny, nz] = self.dims();
        nx * ny * nz
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn box_len(&self) -> f64 {
        self.inner.spec.box_len
    }

    pub fn volume(&self) -> f64 {
        self.box_len().powi(3)
    }

    pub fn cell_volume(&self) -> f64 {
        self.inner.cell_volume
    }

    pub fn spacing(&self) -> f64 {
        self.inner.spec.spacing()
    }

    pub fn axis_spacing(&self, axis: usize) -> f64 {
        self.box_len() / self.dims()[axis] as f64
    }

    /// Projector wavenumbers `2 pi m / L` per axis, Nyquist kept with its negative sign.
    pub fn wavenumbers(&self, axis: usize) -> &[f64] {
        &self.inner.wave[axis]
    }

    /// Derivative wavenumbers: as [`Grid::wavenumbers`] but zero at Nyquist.
    pub fn deriv_wavenumbers(&self, axis: usize) -> &[f64] {
        &self.inner.deriv[axis]
    }

    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        let [nx, ny, _] = self.dims();
        ix + nx * (iy + ny * iz)
    }

    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let [nx, ny, _] = self.dims();
        [idx % nx, (idx / nx) % ny, idx / (nx * ny)]
    }

    pub fn wavevector(&self, idx: usize) -> [f64; 3] {
        let [i, j, k] = self.coords(idx);
        let w = &self.inner.wave;
        [w[0][i], w[1][j], w[2][k]]
    }

    pub fn deriv_wavevector(&self, idx: usize) -> [f64; 3] {
        let [i, j, k] = self.coords(idx);
        let d = &self.inner.deriv;
        [d[0][i], d[1][j], d[2][k]]
    }

    /// Index of the mode at `-p`.
    pub fn conjugate_index(&self, idx: usize) -> usize {
        let [nx, ny, nz] = self.dims();
        let [i, j, k] = self.coords(idx);
        self.index((nx - i) % nx, (ny - j) % ny, (nz - k) % nz)
    }

    /// True when any axis sits on its Nyquist index.
    pub fn is_nyquist(&self, idx: usize) -> bool {
        let c = self.coords(idx);
        let d = self.dims();
        (0..3).any(|a| c[a] == d[a] / 2)
    }

    pub fn position(&self, idx: usize) -> [f64; 3] {
        let c = self.coords(idx);
        [0, 1, 2].map(|a| c[a] as f64 * self.axis_spacing(a))
    }

    /// Minimum-image displacement `r - center` on the torus.
    pub fn min_image(&self, idx: usize, center: [f64; 3]) -> [f64; 3] {
        let p = self.position(idx);
        let l = self.box_len();
        [0, 1, 2].map(|a| {
            let d = p[a] - center[a];
            d - l * (d / l).round()
        })
    }

    pub fn same(&self, other: &Grid) -> bool {
        self == other
    }

    pub(crate) fn fft(&self) -> &Fft3 {
        &self.inner.fft
    }
}

/// Three-dimensional complex FFT over the x-fastest layout.
pub(crate) struct Fft3 {
    dims: [usize; 3],
    forward: [Arc<dyn Fft<f64>>; 3],
    inverse: [Arc<dyn Fft<f64>>; 3],
}

impl Fft3 {
    fn new(dims: [usize; 3]) -> Self {
        let mut planner = FftPlanner::new();
        let forward = dims.map(|n| planner.plan_fft_forward(n));
        let inverse = dims.map(|n| planner.plan_fft_inverse(n));
        Fft3 { dims, forward, inverse }
    }

    pub(crate) fn forward(&self, data: &mut [Complex64]) {
        self.run(data, &self.forward);
    }

    pub(crate) fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, &self.inverse);
        let scale = 1.0 / data.len() as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }

    fn run(&self, data: &mut [Complex64], plans: &[Arc<dyn Fft<f64>>; 3]) {
        let [nx, ny, nz] = self.dims;
        assert_eq!(data.len(), nx * ny * nz);
        let scratch_len = plans.iter().map(|p| p.get_inplace_scratch_len()).max().unwrap_or(0);
        let mut scratch = vec![Complex64::new(0.0, 0.0); scratch_len];

        plans[0].process_with_scratch(data, &mut scratch);

        let mut lines = vec![Complex64::new(0.0, 0.0); nx * ny.max(nz)];
        for iz in 0..nz {
            let slab = &mut data[iz * nx * ny..(iz + 1) * nx * ny];
            for iy in 0..ny {
                for ix in 0..nx {
                    lines[ix * ny + iy] = slab[ix + nx * iy];
                }
            }
            plans[1].process_with_scratch(&mut lines[..nx * ny], &mut scratch);
            for iy in 0..ny {
                for ix in 0..nx {
                    slab[ix + nx * iy] = lines[ix * ny + iy];
                }
            }
        }

        for iy in 0..ny {
            for iz in 0..nz {
                for ix in 0..nx {
                    lines[ix * nz + iz] = data[ix + nx * (iy + ny * iz)];
                }
            }
            plans[2].process_with_scratch(&mut lines[..nx * nz], &mut scratch);
            for iz in 0..nz {
                for ix in 0..nx {
                    data[ix + nx * (iy + ny * iz)] = lines[ix * nz + iz];
                }
            }
        }
    }
}
