//! Small least-squares helpers used by the slope-recovery checks.

/// Ordinary least squares for y = a + b x. Returns (a, b).
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2);
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    let b = (n * sxy - sx * sy) / denom;
    let a = (sy - b * sx) / n;
    (a, b)
}

/// Least squares for y = a + b u + q v (two regressors), solved through the
/// 3x3 normal equations. Returns (a, b, q).
///
/// Used to strip slowly varying log-log corrections: fitting ln y against
/// ln t and ln ln t recovers a power-law exponent that a plain slope misses
/// when the prefactor carries a polylogarithmic factor.
pub fn two_term_log_fit(us: &[f64], vs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    assert_eq!(us.len(), vs.len());
    assert_eq!(us.len(), ys.len());
    assert!(us.len() >= 3);
    let n = us.len() as f64;
    let su: f64 = us.iter().sum();
    let sv: f64 = vs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let suu: f64 = us.iter().map(|u| u * u).sum();
    let svv: f64 = vs.iter().map(|v| v * v).sum();
    let suv: f64 = us.iter().zip(vs).map(|(u, v)| u * v).sum();
    let suy: f64 = us.iter().zip(ys).map(|(u, y)| u * y).sum();
    let svy: f64 = vs.iter().zip(ys).map(|(v, y)| v * y).sum();

    // Normal equations: [n su sv; su suu suv; sv suv svv] [a b q]' = [sy suy svy]'
    let m = [[n, su, sv], [su, suu, suv], [sv, suv, svv]];
    let rhs = [sy, suy, svy];
    let sol = solve3(m, rhs);
    (sol[0], sol[1], sol[2])
}

fn solve3(mut m: [[f64; 3]; 3], mut b: [f64; 3]) -> [f64; 3] {
    // Gaussian elimination with partial pivoting; the systems here are tiny
    // and well scaled after centering is unnecessary thanks to pivoting.
    for col in 0..3 {
        let mut piv = col;
        for r in col + 1..3 {
            if m[r][col].abs() > m[piv][col].abs() {
                piv = r;
            }
        }
        m.swap(col, piv);
        b.swap(col, piv);
        let d = m[col][col];
        assert!(d.abs() > 1e-300, "singular normal equations");
        for r in col + 1..3 {
            let k = m[r][col] / d;
            for c in col..3 {
                m[r][c] -= k * m[col][c];
            }
            b[r] -= k * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let mut s = b[row];
        for c in row + 1..3 {
            s -= m[row][c] * x[c];
        }
        x[row] = s / m[row][row];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_fit_recovers_exact_line() {
        let xs: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.5 - 0.75 * x).collect();
        let (a, b) = linear_fit(&xs, &ys);
        assert!((a - 3.5).abs() < 1e-12);
        assert!((b + 0.75).abs() < 1e-12);
    }

    #[test]
    fn two_term_fit_separates_log_and_loglog() {
        // y = 1.0 - 2.0 ln t + 3.0 ln ln t sampled on t in [1e2, 1e6]
        let ts: Vec<f64> = (0..40).map(|i| 1e2 * 10f64.powf(i as f64 / 10.0)).collect();
        let us: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
        let vs: Vec<f64> = ts.iter().map(|t| t.ln().ln()).collect();
        let ys: Vec<f64> = us.iter().zip(&vs).map(|(u, v)| 1.0 - 2.0 * u + 3.0 * v).collect();
        let (a, b, q) = two_term_log_fit(&us, &vs, &ys);
        assert!((a - 1.0).abs() < 1e-8, "{a}");
        assert!((b + 2.0).abs() < 1e-10, "{b}");
        assert!((q - 3.0).abs() < 1e-9, "{q}");
    }
}
