//! Finite-difference weights in time.

/// Three-point first-derivative stencil at level `n` of `nt`, as `(level, weight)` pairs
/// to be divided by `dt`: centered inside, one-sided second order at both ends.
pub fn ddt(n: usize, nt: usize) -> [(usize, f64); 3] {
    match nt {
        0 | 1 => [(0, 0.0); 3],
        2 => [(0, -1.0), (1, 1.0), (0, 0.0)],
        _ if n == 0 => [(0, -1.5), (1, 2.0), (2, -0.5)],
        _ if n == nt - 1 => [(nt - 1, 1.5), (nt - 2, -2.0), (nt - 3, 0.5)],
        _ => [(n - 1, -0.5), (n, 0.0), (n + 1, 0.5)],
    }
}

/// Centered second derivative weights (times `1/dt^2`); only for `0 < n < nt - 1`.
pub fn d2dt2(n: usize) -> [(usize, f64); 3] {
    [(n - 1, 1.0), (n, -2.0), (n + 1, 1.0)]
}

/// `sum w * values[k] / scale` over a stencil, with `axpy(acc, a, x) = acc + a x`.
pub fn apply<V, T>(values: &[V], scale: f64, weights: [(usize, f64); 3], zero: T, axpy: impl Fn(T, f64, &V) -> T) -> T {
    weights.iter().fold(zero, |acc, &(k, w)| if w == 0.0 { acc } else { axpy(acc, w / scale, &values[k]) })
}
