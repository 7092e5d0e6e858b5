//! Quadrature: adaptive Simpson on finite intervals and improper tails via a
//! logarithmic substitution with interval doubling.

use super::TAIL_REL_TOL;

/// Result of a quadrature with a crude error estimate and a convergence flag.
/// Divergence is flagged, never thrown: callers decide whether an infinite
/// tail is an error or a legitimate "no conclusion" outcome.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub abs_err: f64,
    pub converged: bool,
}

impl QuadResult {
    pub fn exact(value: f64) -> Self {
        QuadResult { value, abs_err: 0.0, converged: true }
    }
}

fn simpson(a: f64, fa: f64, b: f64, fb: f64, fm: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adapt(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    fm: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    err_acc: &mut f64,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, fa, m, fm, flm);
    let right = simpson(m, fm, b, fb, frm);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol || !delta.is_finite() {
        *err_acc += delta.abs() / 15.0;
        return left + right + delta / 15.0;
    }
    adapt(f, a, fa, m, fm, flm, left, 0.5 * tol, depth - 1, err_acc)
        + adapt(f, m, fm, b, fb, frm, right, 0.5 * tol, depth - 1, err_acc)
}

/// Adaptive Simpson on a finite interval. `rel_tol` is relative to the
/// running value with an absolute floor of 1e-300.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> QuadResult {
    if a == b {
        return QuadResult::exact(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, fa, b, fb, fm);
    let tol = rel_tol * whole.abs().max(1e-300);
    let mut err = 0.0;
    let value = adapt(f, a, fa, b, fb, fm, whole, tol, 48, &mut err);
    QuadResult { value, abs_err: err, converged: value.is_finite() }
}

/// Improper tail integral of `f` on [t0, +inf), t0 > 0.
///
/// Substitutes u = e^v so the tail becomes an integral of f(e^v) e^v over
/// [ln t0, +inf), then accumulates doubling windows until an increment falls
/// below `TAIL_REL_TOL` times the accumulated value (60 windows max). A tail
/// that never satisfies the criterion is returned with `converged: false`.
pub fn improper_tail(f: &dyn Fn(f64) -> f64, t0: f64, rel_tol: f64) -> QuadResult {
    assert!(t0 > 0.0, "improper_tail requires t0 > 0");
    let g = move |v: f64| {
        let u = v.exp();
        f(u) * u
    };
    let mut lo = t0.ln();
    let mut width = 1.0f64;
    let mut acc = 0.0;
    let mut err = 0.0;
    for k in 0..60 {
        let piece = adaptive_simpson(&g, lo, lo + width, rel_tol);
        if !piece.value.is_finite() {
            return QuadResult { value: f64::INFINITY, abs_err: f64::INFINITY, converged: false };
        }
        acc += piece.value;
        err += piece.abs_err;
        if k >= 2 && piece.value.abs() <= TAIL_REL_TOL * acc.abs().max(1e-300) {
            return QuadResult { value: acc, abs_err: err, converged: true };
        }
        lo += width;
        width *= 2.0;
    }
    QuadResult { value: acc, abs_err: err, converged: false }
}

/// Composite Simpson over an odd-length uniformly spaced sample of a curve.
/// Used for the decay-identity cross checks where the samples are the data.
pub fn composite_simpson_uniform(values: &[f64], h: f64) -> f64 {
    assert!(values.len() >= 3 && values.len() % 2 == 1, "need odd sample count >= 3");
    let n = values.len() - 1;
    let mut s = values[0] + values[n];
    for (i, v) in values.iter().enumerate().take(n).skip(1) {
        s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    s * h / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_polynomial_is_near_exact() {
        let r = adaptive_simpson(&|x| x * x * x - 2.0 * x + 1.0, 0.0, 2.0, 1e-12);
        // antiderivative x^4/4 - x^2 + x -> 4 - 4 + 2 = 2
        assert!((r.value - 2.0).abs() < 1e-12, "{}", r.value);
    }

    #[test]
    fn tail_of_exponential_matches_closed_form() {
        let r = improper_tail(&|t| (-4.0 * t).exp(), 2.0, 1e-12);
        assert!(r.converged);
        let exact = (-8.0f64).exp() / 4.0;
        assert!((r.value - exact).abs() < 1e-15 + 1e-10 * exact, "{} vs {exact}", r.value);
    }

    #[test]
    fn tail_of_power_law_matches_closed_form() {
        // integral of t^-3 from 5 to inf = 1/(2*25)
        let r = improper_tail(&|t| t.powi(-3), 5.0, 1e-12);
        assert!(r.converged);
        assert!((r.value - 0.02).abs() < 1e-12, "{}", r.value);
    }

    #[test]
    fn divergent_tail_is_flagged_not_thrown() {
        let r = improper_tail(&|t| 1.0 / t, 1.0, 1e-10);
        assert!(!r.converged);
    }

    #[test]
    fn composite_simpson_quadratic_exact() {
        let h = 0.25;
        let values: Vec<f64> = (0..9).map(|i| (i as f64 * h).powi(2)).collect();
        let v = composite_simpson_uniform(&values, h);
        assert!((v - 8.0 / 3.0).abs() < 1e-14);
    }
}
