//! Deterministic low-discrepancy points on the unit sphere in R^n.
//!
//! A Kronecker sequence (irrational rotations from the generalized golden
//! ratio) is pushed through the standard normal quantile coordinate-wise and
//! normalized; the result is an equidistributed spherical point set that is
//! identical across runs, which keeps sup-over-direction scans reproducible
//! without burning the user's seed.

use statrs::distribution::{ContinuousCDF, Normal};

/// `count` quasi-uniform points on S^{n-1}. n >= 2.
pub fn sphere_points(n: usize, count: usize) -> Vec<Vec<f64>> {
    assert!(n >= 2);
    assert!(count >= 1);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");

    // Generalized golden ratio: unique real root > 1 of x^{n+1} = x + 1.
    let mut phi = 1.5f64;
    for _ in 0..64 {
        phi = (1.0 + phi).powf(1.0 / (n as f64 + 1.0));
    }
    let alphas: Vec<f64> = (1..=n).map(|k| (1.0 / phi.powi(k as i32)) % 1.0).collect();

    (0..count)
        .map(|i| {
            let mut v: Vec<f64> = alphas
                .iter()
                .map(|&a| {
                    let u = ((i as f64 + 1.0) * a + 0.5).fract();
                    // Clamp away from {0,1} so the quantile stays finite.
                    normal.inverse_cdf(u.clamp(1e-12, 1.0 - 1e-12))
                })
                .collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm < 1e-12 {
                v = vec![0.0; n];
                v[0] = 1.0;
            } else {
                for x in &mut v {
                    *x /= norm;
                }
            }
            v
        })
        .collect()
}
