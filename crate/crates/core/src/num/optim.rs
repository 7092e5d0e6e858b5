//! Scalar minimization on the positive half-line and bisection for monotone
//! functions. Objectives here are smooth with at most a few local minima, so
//! a coarse log-spaced scan seeding golden-section refinement is reliable.

use super::{log_grid, BISECT_REL_TOL, LOG_GRID_POINTS};

const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Minimize `f` over [lo, hi] (0 < lo < hi) by scanning a log-spaced grid and
/// refining around every local minimum of the scan. Returns (argmin, min).
/// Non-finite objective values are treated as +inf (excluded, never poison).
pub fn min_log_axis(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    let grid = log_grid(lo, hi, LOG_GRID_POINTS);
    let vals: Vec<f64> = grid
        .iter()
        .map(|&x| {
            let y = f(x);
            if y.is_finite() {
                y
            } else {
                f64::INFINITY
            }
        })
        .collect();

    let mut best = (grid[0], vals[0]);
    for i in 0..grid.len() {
        if vals[i] < best.1 {
            best = (grid[i], vals[i]);
        }
    }

    // Refine around every sample that beats both neighbours (and the ends).
    for i in 0..grid.len() {
        let left_up = i == 0 || vals[i] <= vals[i - 1];
        let right_up = i + 1 == grid.len() || vals[i] <= vals[i + 1];
        if !(left_up && right_up) || !vals[i].is_finite() {
            continue;
        }
        let a = if i == 0 { grid[0] } else { grid[i - 1] };
        let b = if i + 1 == grid.len() { grid[grid.len() - 1] } else { grid[i + 1] };
        let (x, y) = golden_section(f, a.ln(), b.ln());
        if y < best.1 {
            best = (x, y);
        }
    }
    best
}

/// Golden-section on the log axis: [la, lb] are log-coordinates.
fn golden_section(f: &dyn Fn(f64) -> f64, mut la: f64, mut lb: f64) -> (f64, f64) {
    let eval = |l: f64| {
        let y = f(l.exp());
        if y.is_finite() {
            y
        } else {
            f64::INFINITY
        }
    };
    let mut x1 = lb - GOLDEN * (lb - la);
    let mut x2 = la + GOLDEN * (lb - la);
    let mut f1 = eval(x1);
    let mut f2 = eval(x2);
    for _ in 0..200 {
        if (lb - la).abs() < 1e-13 {
            break;
        }
        if f1 < f2 {
            lb = x2;
            x2 = x1;
            f2 = f1;
            x1 = lb - GOLDEN * (lb - la);
            f1 = eval(x1);
        } else {
            la = x1;
            x1 = x2;
            f1 = f2;
            x2 = la + GOLDEN * (lb - la);
            f2 = eval(x2);
        }
    }
    let lm = 0.5 * (la + lb);
    (lm.exp(), eval(lm))
}

/// Smallest x in [lo, hi] with g(x) <= target, for non-increasing `g` with
/// g(lo) >= target >= g(hi). On a plateau sitting exactly at `target` the
/// left edge (the infimum) is returned. Relative tolerance on x.
pub fn bisect_decreasing(g: &dyn Fn(f64) -> f64, lo: f64, hi: f64, target: f64) -> f64 {
    debug_assert!(lo < hi);
    let mut a = lo;
    let mut b = hi;
    for _ in 0..200 {
        if (b - a) <= BISECT_REL_TOL * a.abs().max(b.abs()).max(1e-300) {
            break;
        }
        let m = 0.5 * (a + b);
        if g(m) <= target {
            b = m;
        } else {
            a = m;
        }
    }
    0.5 * (a + b)
}
