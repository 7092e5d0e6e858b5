//! Weight/time-fraction schedules for the variance iteration.
//!
//! A schedule prescribes target variance factors `gamma_0 > gamma_1 > ...`
//! and the fractions `alpha_1, alpha_2, ...` of the time budget spent
//! reaching each factor. Validity of the iterated decay bound only needs the
//! fractions actually spent to fit in the budget, so completeness is checked
//! as an exact finite sum over the stored horizon.

use crate::error::{Error, Result};
use crate::num::{SERIES_MAX_INDEX, SERIES_REL_TOL};

#[derive(Clone, Debug)]
pub struct IterationSchedule {
    /// gamma_0 ..= gamma_L, strictly decreasing in (0, 1].
    gammas: Vec<f64>,
    /// alpha_1 ..= alpha_L stored at offsets 0 ..= L-1; partial sums <= 1.
    alphas: Vec<f64>,
}

impl IterationSchedule {
    /// Default schedule: gamma_i = 2^-i with alpha_i = (6/pi^2) i^-2, the
    /// inverse-square split whose full series exactly exhausts the budget.
    pub fn dyadic_inverse_square() -> Self {
        let len = SERIES_MAX_INDEX + 2;
        let gammas: Vec<f64> = (0..len).map(|i| 0.5f64.powi(i as i32)).collect();
        let c = 6.0 / (std::f64::consts::PI * std::f64::consts::PI);
        let alphas: Vec<f64> = (1..len).map(|i| c / (i as f64 * i as f64)).collect();
        IterationSchedule { gammas, alphas }
    }

    /// Custom schedule. `gammas` are gamma_0.. (gamma_0 <= 1, strictly
    /// decreasing, positive); `alphas` are alpha_1.. with one entry per
    /// gamma step and total at most 1.
    pub fn custom(gammas: Vec<f64>, alphas: Vec<f64>) -> Result<Self> {
        if gammas.len() < 2 {
            return Err(Error::config("schedule needs at least gamma_0 and gamma_1"));
        }
        if alphas.len() + 1 != gammas.len() {
            return Err(Error::config(format!(
                "schedule needs one alpha per gamma step: got {} gammas, {} alphas",
                gammas.len(),
                alphas.len()
            )));
        }
        if !(gammas[0] > 0.0 && gammas[0] <= 1.0) {
            return Err(Error::config("gamma_0 must lie in (0, 1]"));
        }
        for w in gammas.windows(2) {
            if !(w[1] > 0.0 && w[1] < w[0] && w[1].is_finite()) {
                return Err(Error::config("gammas must be strictly decreasing and positive"));
            }
        }
        let mut total = 0.0;
        for &a in &alphas {
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::config("alphas must be positive"));
            }
            total += a;
        }
        if total > 1.0 + 1e-9 {
            return Err(Error::config(format!(
                "alpha fractions sum to {total}: the time budget is exceeded"
            )));
        }
        Ok(IterationSchedule { gammas, alphas })
    }

    /// Number of usable iteration steps (step i consumes gamma_{i+1}/alpha_{i+1}).
    pub fn depth(&self) -> usize {
        self.gammas.len() - 1
    }

    pub fn gamma(&self, i: usize) -> f64 {
        self.gammas[i]
    }

    /// alpha_i, 1-based as in the iteration.
    pub fn alpha(&self, i: usize) -> f64 {
        assert!(i >= 1, "alpha indices start at 1");
        self.alphas[i - 1]
    }

    /// The schedule constant `sum_i gamma_i ln(1/gamma_{i+1}) / alpha_{i+1}`,
    /// the price of driving the iterated decay with this schedule.
    pub fn kappa(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.depth() {
            let term = self.gamma(i) * (1.0 / self.gamma(i + 1)).ln() / self.alpha(i + 1);
            acc += term;
            if term <= SERIES_REL_TOL * acc {
                break;
            }
        }
        acc
    }
}

impl Default for IterationSchedule {
    fn default() -> Self {
        Self::dyadic_inverse_square()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_schedule_constant_is_frozen() {
        // 2 sum_{k>=1} k^3 2^-k = 52, so kappa = 52 pi^2 ln 2 / 6.
        let kappa = IterationSchedule::default().kappa();
        let closed = 52.0 * std::f64::consts::PI.powi(2) * std::f64::consts::LN_2 / 6.0;
        assert!((kappa - closed).abs() < 1e-12 * closed, "{kappa} vs {closed}");
        assert!((kappa - 59.289433353428336).abs() < 1e-12 * kappa);
    }

    #[test]
    fn default_alpha_fractions_fit_budget() {
        let s = IterationSchedule::default();
        let total: f64 = (1..=s.depth()).map(|i| s.alpha(i)).sum();
        assert!(total <= 1.0, "{total}");
        assert!(total > 0.99);
    }

    #[test]
    fn custom_schedule_validation() {
        assert!(IterationSchedule::custom(vec![1.0, 0.5, 0.25], vec![0.5, 0.25]).is_ok());
        // non-decreasing gammas
        assert!(IterationSchedule::custom(vec![1.0, 1.0], vec![0.5]).is_err());
        // budget exceeded
        assert!(IterationSchedule::custom(vec![1.0, 0.5, 0.25], vec![0.7, 0.7]).is_err());
        // arity mismatch
        assert!(IterationSchedule::custom(vec![1.0, 0.5], vec![0.5, 0.1]).is_err());
        // gamma_0 above 1
        assert!(IterationSchedule::custom(vec![2.0, 0.5], vec![0.5]).is_err());
    }

    #[test]
    fn kappa_of_two_step_schedule_by_hand() {
        let s = IterationSchedule::custom(vec![1.0, 0.5, 0.125], vec![0.5, 0.5]).unwrap();
        let expect = 1.0 * (2.0f64).ln() / 0.5 + 0.5 * (8.0f64).ln() / 0.5;
        assert!((s.kappa() - expect).abs() < 1e-14);
    }
}
