use std::ops::{Add, Sub};

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Denominator floor used by every relative residual.
pub const NORM_FLOOR: f64 = 1e-300;

/// `num / max(den, NORM_FLOOR)`.
pub fn ratio(num: f64, den: f64) -> f64 {
    num / den.max(NORM_FLOOR)
}

/// Anything sampled on a [`Grid`] with an L2 and max norm.
pub trait Field: Clone {
    fn grid(&self) -> &Grid;
    /// `sqrt(cell_volume * sum |v|^2)`; spectral fields use Parseval so both sides agree.
    fn l2_norm(&self) -> f64;
    fn linf_norm(&self) -> f64;
}

fn check_len(grid: &Grid, got: usize) -> Result<()> {
    if got != grid.len() {
        return Err(Error::Length { expected: grid.len(), got });
    }
    Ok(())
}

fn check_finite(data: &[f64]) -> Result<()> {
    match data.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::NonFinite(i)),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealScalarField {
    grid: Grid,
    data: Vec<f64>,
}

impl RealScalarField {
    pub fn zeros(grid: &Grid) -> Self {
        RealScalarField { grid: grid.clone(), data: vec![0.0; grid.len()] }
    }

    pub fn from_vec(grid: &Grid, data: Vec<f64>) -> Result<Self> {
        check_len(grid, data.len())?;
        check_finite(&data)?;
        Ok(RealScalarField { grid: grid.clone(), data })
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(usize) -> f64) -> Result<Self> {
        Self::from_vec(grid, (0..grid.len()).map(f).collect())
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.data.len() as f64
    }

    /// Discrete integral `sum * cell_volume`.
    pub fn integral(&self) -> f64 {
        self.sum() * self.grid.cell_volume()
    }

    pub fn scaled(&self, s: f64) -> Self {
        RealScalarField { grid: self.grid.clone(), data: self.data.iter().map(|v| v * s).collect() }
    }
}

impl Field for RealScalarField {
    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn l2_norm(&self) -> f64 {
        (self.grid.cell_volume() * self.data.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    fn linf_norm(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealVectorField {
    grid: Grid,
    data: [Vec<f64>; 3],
}

impl RealVectorField {
    pub fn zeros(grid: &Grid) -> Self {
        let n = grid.len();
        RealVectorField { grid: grid.clone(), data: [vec![0.0; n], vec![0.0; n], vec![0.0; n]] }
    }

    pub fn from_components(grid: &Grid, data: [Vec<f64>; 3]) -> Result<Self> {
        for c in &data {
            check_len(grid, c.len())?;
            check_finite(c)?;
        }
        Ok(RealVectorField { grid: grid.clone(), data })
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(usize) -> [f64; 3]) -> Result<Self> {
        let n = grid.len();
        let mut data = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for i in 0..n {
            let v = f(i);
            for a in 0..3 {
                data[a][i] = v[a];
            }
        }
        Self::from_components(grid, data)
    }

    pub fn component(&self, axis: usize) -> &[f64] {
        &self.data[axis]
    }

    pub fn components(&self) -> &[Vec<f64>; 3] {
        &self.data
    }

    pub fn into_components(self) -> [Vec<f64>; 3] {
        self.data
    }

    pub fn at(&self, idx: usize) -> [f64; 3] {
        [self.data[0][idx], self.data[1][idx], self.data[2][idx]]
    }

    pub fn mean(&self) -> [f64; 3] {
        let n = self.grid.len() as f64;
        [0, 1, 2].map(|a| self.data[a].iter().sum::<f64>() / n)
    }

    pub fn scaled(&self, s: f64) -> Self {
        RealVectorField {
            grid: self.grid.clone(),
            data: self.data.clone().map(|c| c.into_iter().map(|v| v * s).collect()),
        }
    }

    /// Pointwise Euclidean magnitude.
    pub fn magnitude(&self) -> Vec<f64> {
        (0..self.grid.len())
            .map(|i| {
                let v = self.at(i);
                (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
            })
            .collect()
    }
}

impl Field for RealVectorField {
    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn l2_norm(&self) -> f64 {
        let s: f64 = self.data.iter().flat_map(|c| c.iter()).map(|v| v * v).sum();
        (self.grid.cell_volume() * s).sqrt()
    }

    /// Maximum pointwise magnitude.
    fn linf_norm(&self) -> f64 {
        self.magnitude().into_iter().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralScalarField {
    grid: Grid,
    data: Vec<Complex64>,
}

impl SpectralScalarField {
    pub fn zeros(grid: &Grid) -> Self {
        SpectralScalarField { grid: grid.clone(), data: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    pub fn from_vec(grid: &Grid, data: Vec<Complex64>) -> Result<Self> {
        check_len(grid, data.len())?;
        Ok(SpectralScalarField { grid: grid.clone(), data })
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(usize) -> Complex64) -> Self {
        SpectralScalarField { grid: grid.clone(), data: (0..grid.len()).map(f).collect() }
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }
}

impl Field for SpectralScalarField {
    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn l2_norm(&self) -> f64 {
        let n = self.grid.len() as f64;
        let s: f64 = self.data.iter().map(|v| v.norm_sqr()).sum();
        (self.grid.volume() * s).sqrt() / n
    }

    fn linf_norm(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.norm()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralVectorField {
    grid: Grid,
    data: [Vec<Complex64>; 3],
}

impl SpectralVectorField {
    pub fn zeros(grid: &Grid) -> Self {
        let z = vec![Complex64::new(0.0, 0.0); grid.len()];
        SpectralVectorField { grid: grid.clone(), data: [z.clone(), z.clone(), z] }
    }

    pub fn from_components(grid: &Grid, data: [Vec<Complex64>; 3]) -> Result<Self> {
        for c in &data {
            check_len(grid, c.len())?;
        }
        Ok(SpectralVectorField { grid: grid.clone(), data })
    }

    /// Builds a field mode by mode.
    pub fn from_fn(grid: &Grid, f: impl Fn(usize) -> [Complex64; 3]) -> Self {
        let mut out = Self::zeros(grid);
        for i in 0..grid.len() {
            out.set(i, f(i));
        }
        out
    }

    pub fn component(&self, axis: usize) -> &[Complex64] {
        &self.data[axis]
    }

    pub fn components(&self) -> &[Vec<Complex64>; 3] {
        &self.data
    }

    pub fn into_components(self) -> [Vec<Complex64>; 3] {
        self.data
    }

    pub fn at(&self, idx: usize) -> [Complex64; 3] {
        [self.data[0][idx], self.data[1][idx], self.data[2][idx]]
    }

    pub fn set(&mut self, idx: usize, v: [Complex64; 3]) {
        for a in 0..3 {
            self.data[a][idx] = v[a];
        }
    }

    /// Applies `f(mode index, value)` to every mode.
    pub fn map_modes(&self, f: impl Fn(usize, [Complex64; 3]) -> [Complex64; 3]) -> Self {
        let mut out = Self::zeros(&self.grid);
        for i in 0..self.grid.len() {
            out.set(i, f(i, self.at(i)));
        }
        out
    }
}

impl Field for SpectralVectorField {
    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn l2_norm(&self) -> f64 {
        let n = self.grid.len() as f64;
        let s: f64 = self.data.iter().flat_map(|c| c.iter()).map(|v| v.norm_sqr()).sum();
        (self.grid.volume() * s).sqrt() / n
    }

    fn linf_norm(&self) -> f64 {
        (0..self.grid.len()).map(|i| crate::vec3::abs_sq(self.at(i)).sqrt()).fold(0.0, f64::max)
    }
}

macro_rules! impl_linear {
    ($ty:ident) => {
        impl Add for &$ty {
            type Output = $ty;
            /// Panics if the grids differ.
            fn add(self, rhs: &$ty) -> $ty {
                assert!(self.grid == rhs.grid, "fields live on different grids");
                let mut out = self.clone();
                out.zip_apply(rhs, |a, b| a + b);
                out
            }
        }

        impl Sub for &$ty {
            type Output = $ty;
            /// Panics if the grids differ.
            fn sub(self, rhs: &$ty) -> $ty {
                assert!(self.grid == rhs.grid, "fields live on different grids");
                let mut out = self.clone();
                out.zip_apply(rhs, |a, b| a - b);
                out
            }
        }
    };
}

impl RealScalarField {
    fn zip_apply(&mut self, rhs: &Self, f: impl Fn(f64, f64) -> f64) {
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a = f(*a, *b);
        }
    }
}

impl RealVectorField {
    fn zip_apply(&mut self, rhs: &Self, f: impl Fn(f64, f64) -> f64) {
        for (ca, cb) in self.data.iter_mut().zip(&rhs.data) {
            for (a, b) in ca.iter_mut().zip(cb) {
                *a = f(*a, *b);
            }
        }
    }
}

impl SpectralScalarField {
    fn zip_apply(&mut self, rhs: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) {
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a = f(*a, *b);
        }
    }
}

impl SpectralVectorField {
    fn zip_apply(&mut self, rhs: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) {
        for (ca, cb) in self.data.iter_mut().zip(&rhs.data) {
            for (a, b) in ca.iter_mut().zip(cb) {
                *a = f(*a, *b);
            }
        }
    }
}

impl_linear!(RealScalarField);
impl_linear!(RealVectorField);
impl_linear!(SpectralScalarField);
impl_linear!(SpectralVectorField);

/// Time-ordered slices on one grid; slice `k` sits at `t = k * dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSeries<T: Field> {
    grid: Grid,
    dt: f64,
    slices: Vec<T>,
}

impl<T: Field> FieldSeries<T> {
    pub fn new(grid: &Grid, dt: f64, slices: Vec<T>) -> Result<Self> {
        if slices.iter().any(|s| s.grid() != grid) {
            return Err(Error::GridMismatch);
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::Precondition(format!("dt = {dt} must be positive")));
        }
        Ok(FieldSeries { grid: grid.clone(), dt, slices })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.slices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slices.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn slice(&self, k: usize) -> &T {
        &self.slices[k]
    }

    pub fn slices(&self) -> &[T] {
        &self.slices
    }

    pub fn into_slices(self) -> Vec<T> {
        self.slices
    }

    pub fn iter(&self) -> std::slice::Iter<'_, T> {
        self.slices.iter()
    }

    pub fn map<U: Field>(&self, f: impl Fn(&T) -> U) -> FieldSeries<U> {
        FieldSeries { grid: self.grid.clone(), dt: self.dt, slices: self.slices.iter().map(f).collect() }
    }

    /// Largest slice-wise relative L2 difference `|a - b| / |reference|`.
    pub fn max_relative_diff(&self, other: &Self, reference: &Self) -> f64
    where
        for<'a> &'a T: Sub<&'a T, Output = T>,
    {
        self.slices
            .iter()
            .zip(&other.slices)
            .zip(&reference.slices)
            .map(|((a, b), r)| ratio((a - b).l2_norm(), r.l2_norm()))
            .fold(0.0, f64::max)
    }
}
