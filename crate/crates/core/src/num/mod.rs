//! Shared numerical utilities: quadrature, scalar minimization, least-squares
//! fits, seed derivation, small symmetric eigenproblems, sphere point sets.

pub mod fit;
pub mod jacobi;
pub mod optim;
pub mod quad;
pub mod rng;
pub mod sphere;

/// Default number of seeds for log-axis searches and sweep grids.
pub const LOG_GRID_POINTS: usize = 64;

/// Relative tolerance for monotone bisection (generalized inverses).
pub const BISECT_REL_TOL: f64 = 1e-10;

/// Relative increment threshold for improper-integral tail doubling.
pub const TAIL_REL_TOL: f64 = 1e-14;

/// Relative term threshold for series truncation.
pub const SERIES_REL_TOL: f64 = 1e-15;

/// Hard cap on series length.
pub const SERIES_MAX_INDEX: usize = 200;

/// Build a logarithmically spaced grid on [lo, hi] with n points.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2, "log_grid needs 0 < lo < hi, n >= 2");
    let (la, lb) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Build a uniformly spaced grid on [lo, hi] with n points.
pub fn lin_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && hi > lo);
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}
