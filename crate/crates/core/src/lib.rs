//! Spectral Helmholtz decomposition on a periodic box, together with a
//! retarded Maxwell field laboratory built on per-mode Duhamel propagation.
//!
//! Units are Gaussian with `c = 1`. The forward transform uses `exp(-i p.r)`
//! without normalization and the inverse carries `1/N`.

pub mod causality;
pub mod engine;
pub mod error;
pub mod field;
pub mod generate;
pub mod greens;
pub mod grid;
pub mod helmholtz;
pub mod io;
pub mod maxwell;
pub mod sources;
pub mod spectral;
pub mod stencil;
pub mod vec3;

pub use error::{Error, Result};
pub use field::{FieldSeries, RealScalarField, RealVectorField, SpectralScalarField, SpectralVectorField};
pub use grid::{Grid, GridSpec};
pub use rustfft::num_complex::Complex64;
