//! Small helpers for 3-vectors of reals and complex mode amplitudes.

use rustfft::num_complex::Complex64;

pub type CVec3 = [Complex64; 3];

pub const CZERO: CVec3 = [Complex64::new(0.0, 0.0); 3];
pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn norm_sq(p: [f64; 3]) -> f64 {
    p[0] * p[0] + p[1] * p[1] + p[2] * p[2]
}

pub fn rdot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// `p . v` without conjugation.
pub fn dot(p: [f64; 3], v: CVec3) -> Complex64 {
    v[0] * p[0] + v[1] * p[1] + v[2] * p[2]
}

/// `p x v`.
pub fn cross(p: [f64; 3], v: CVec3) -> CVec3 {
    [v[2] * p[1] - v[1] * p[2], v[0] * p[2] - v[2] * p[0], v[1] * p[0] - v[0] * p[1]]
}

pub fn scale_real(p: [f64; 3], s: Complex64) -> CVec3 {
    [s * p[0], s * p[1], s * p[2]]
}

pub fn scale(v: CVec3, s: Complex64) -> CVec3 {
    [v[0] * s, v[1] * s, v[2] * s]
}

pub fn scale_by(v: CVec3, s: f64) -> CVec3 {
    [v[0] * s, v[1] * s, v[2] * s]
}

pub fn add(a: CVec3, b: CVec3) -> CVec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn sub(a: CVec3, b: CVec3) -> CVec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn abs_sq(v: CVec3) -> f64 {
    v[0].norm_sqr() + v[1].norm_sqr() + v[2].norm_sqr()
}

/// Longitudinal part `p (p.v) / |p|^2`; zero when `p = 0`.
pub fn longitudinal(p: [f64; 3], v: CVec3) -> CVec3 {
    let p2 = norm_sq(p);
    if p2 == 0.0 {
        return CZERO;
    }
    scale_real(p, dot(p, v) / p2)
}

/// Transverse part `-p x (p x v) / |p|^2`; zero when `p = 0`.
pub fn transverse(p: [f64; 3], v: CVec3) -> CVec3 {
    let p2 = norm_sq(p);
    if p2 == 0.0 {
        return CZERO;
    }
    let c = cross(p, cross(p, v));
    [-c[0] / p2, -c[1] / p2, -c[2] / p2]
}
