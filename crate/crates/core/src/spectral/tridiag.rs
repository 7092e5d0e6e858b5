//! Symmetric tridiagonal eigensolver: implicit-shift QL sweeps for all
//! eigenvalues (eigenvalue-only, O(n²) total work), Sturm-sequence bisection
//! as an independent slow path for cross-checks, and shifted inverse
//! iteration with pivoted elimination for eigenvectors.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::num::rng::derive_seed;

/// Bisection iteration cap; reaching it without meeting the tolerance is a
/// numeric error (it cannot fire before the interval shrinks to a few ulp).
const BISECT_CAP: usize = 200;

/// QL sweep cap per eigenvalue; 4–5 is typical, double digits already rare.
const QL_CAP: usize = 60;

#[derive(Clone, Debug)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    /// off-diagonal entries, length n - 1
    pub off: Vec<f64>,
}

impl SymTridiag {
    pub fn n(&self) -> usize {
        self.diag.len()
    }

    /// Matrix-vector product, for residual checks.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n();
        (0..n)
            .map(|i| {
                let mut y = self.diag[i] * x[i];
                if i > 0 {
                    y += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    y += self.off[i] * x[i + 1];
                }
                y
            })
            .collect()
    }

    /// Number of eigenvalues strictly below x (Sturm sequence count).
    /// Overflow in the pivot recurrence propagates harmlessly through the
    /// division, so no scaling pass is needed.
    pub fn count_below(&self, x: f64) -> usize {
        let n = self.n();
        let mut count = 0usize;
        let mut q = self.diag[0] - x;
        if q < 0.0 {
            count += 1;
        }
        for i in 1..n {
            let mut qp = q;
            if qp.abs() < f64::MIN_POSITIVE {
                qp = if qp < 0.0 { -f64::MIN_POSITIVE } else { f64::MIN_POSITIVE };
            }
            q = (self.diag[i] - x) - self.off[i - 1] * self.off[i - 1] / qp;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Gershgorin interval containing the whole spectrum, slightly widened.
    pub fn bounds(&self) -> (f64, f64) {
        let n = self.n();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            if i > 0 {
                r += self.off[i - 1].abs();
            }
            if i + 1 < n {
                r += self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        let pad = 1e-12 * (hi - lo).abs().max(1.0);
        (lo - pad, hi + pad)
    }

    fn eigenvalue_in(&self, k: usize, mut lo: f64, mut hi: f64, scale: f64) -> Result<f64> {
        for _ in 0..BISECT_CAP {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                return Ok(mid.clamp(lo, hi)); // interval is a few ulp wide
            }
            if self.count_below(mid) >= k + 1 {
                hi = mid;
            } else {
                lo = mid;
            }
            let mid = 0.5 * (lo + hi);
            if hi - lo <= (1e-12 * mid.abs()).max(1e-15 * scale) {
                return Ok(mid);
            }
        }
        Err(Error::numeric(format!(
            "bisection for eigenvalue {k} did not converge within {BISECT_CAP} iterations"
        )))
    }

    /// All eigenvalues, ascending, by implicit-shift QL. Accuracy is a few
    /// ulp of the spectral scale (the limit any tridiagonal solver attains),
    /// which is relative accuracy 1e-12 or better away from the bottom of
    /// the scale.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let mut d = self.diag.clone();
        let mut e = self.off.clone();
        e.push(0.0);
        ql_all(&mut d, &mut e)?;
        d.sort_by(|a, b| a.partial_cmp(b).expect("eigenvalues are finite"));
        Ok(d)
    }

    /// All eigenvalues by Sturm bisection: much slower than `eigenvalues`
    /// but algorithmically independent, so the two can certify each other.
    pub fn eigenvalues_bisect(&self) -> Result<Vec<f64>> {
        let (lo, hi) = self.bounds();
        let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
        (0..self.n())
            .into_par_iter()
            .map(|k| self.eigenvalue_in(k, lo, hi, scale))
            .collect()
    }

    /// Eigenvector for an eigenvalue estimate, by inverse iteration from a
    /// deterministic pseudo-random start. Returned with unit Euclidean norm;
    /// callers re-orthogonalize within eigenvalue clusters.
    pub fn eigenvector(&self, lambda: f64, tag: u64) -> Vec<f64> {
        let n = self.n();
        let mut state = derive_seed(0x7a5c_9d13_e2b4_f681, tag);
        let mut x: Vec<f64> = (0..n)
            .map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                // map the top bits to (-1, 1)
                ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
            })
            .collect();
        normalize(&mut x);
        let lu = self.factor_shifted(lambda);
        for _ in 0..3 {
            let mut y = lu.solve(&x);
            normalize(&mut y);
            x = y;
        }
        x
    }

    /// LU factorization of (T - lambda I) with partial pivoting; zero
    /// pivots are replaced by a scaled epsilon so the factorization always
    /// exists (the standard inverse-iteration safeguard).
    fn factor_shifted(&self, lambda: f64) -> TriLu {
        let n = self.n();
        let mut d: Vec<f64> = self.diag.iter().map(|&v| v - lambda).collect();
        let mut du: Vec<f64> = self.off.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut dl: Vec<f64> = self.off.clone();
        let mut swapped = vec![false; n.saturating_sub(1)];
        let scale = self
            .diag
            .iter()
            .chain(self.off.iter())
            .fold(0.0f64, |m, &v| m.max(v.abs()))
            .max(f64::MIN_POSITIVE);
        let pivmin = f64::EPSILON * scale;
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                let piv = if d[i].abs() < pivmin {
                    if d[i] < 0.0 {
                        -pivmin
                    } else {
                        pivmin
                    }
                } else {
                    d[i]
                };
                d[i] = piv;
                let m = dl[i] / piv;
                dl[i] = m;
                d[i + 1] -= m * du[i];
            } else {
                let m = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = m;
                let t = du[i];
                du[i] = d[i + 1];
                d[i + 1] = t - m * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -m * du[i + 1];
                }
                swapped[i] = true;
            }
        }
        if let Some(last) = d.last_mut() {
            if last.abs() < pivmin {
                *last = if *last < 0.0 { -pivmin } else { pivmin };
            }
        }
        TriLu { d, du, du2, dl, swapped }
    }
}

/// Implicit-shift QL with Wilkinson shifts, eigenvalues only. `d` is the
/// diagonal; `e` holds the subdiagonal in its first n-1 slots (the last is
/// scratch). Converged eigenvalues accumulate in `d`, unsorted. The split
/// test |e| ≤ ε(|d_i| + |d_{i+1}|) is relative to the neighbors, so small
/// eigenvalues of graded matrices are not washed out early.
fn ql_all(d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    for l in 0..n {
        let mut sweeps = 0usize;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > QL_CAP {
                return Err(Error::numeric(format!(
                    "QL sweep for eigenvalue {l} did not converge within {QL_CAP} iterations"
                )));
            }
            // Wilkinson shift from the 2x2 block at the converging end
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c) = (1.0f64, 1.0f64);
            let mut p = 0.0f64;
            let mut deflated = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    // rotation annihilated mid-sweep: deflate and retry
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

struct TriLu {
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    dl: Vec<f64>,
    swapped: Vec<bool>,
}

impl TriLu {
    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.d.len();
        let mut x = b.to_vec();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                x.swap(i, i + 1);
            }
            let xi = x[i];
            x[i + 1] -= self.dl[i] * xi;
        }
        x[n - 1] /= self.d[n - 1];
        if n >= 2 {
            x[n - 2] = (x[n - 2] - self.du[n - 2] * x[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            x[i] = (x[i] - self.du[i] * x[i + 1] - self.du2[i] * x[i + 2]) / self.d[i];
        }
        x
    }
}

fn normalize(x: &mut [f64]) {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        x.iter_mut().for_each(|v| *v /= norm);
    }
}
