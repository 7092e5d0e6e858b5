//! The transform calculus between weak inequality rates and semigroup decay.
//!
//! Directions implemented:
//!
//! * inequality rate -> decay rate: [`xi_from_beta_wp`] (variational form),
//!   [`xi_levelset_from_beta_wp`] (level-set form, a proven 2x bracket of the
//!   variational form), [`xi_iterated`] (schedule-driven iteration, strictly
//!   sharper for power rates), [`eta_from_beta`]/[`xi_from_eta`] (derivative
//!   route, with an integrability flag);
//! * decay rate -> inequality rate: [`beta_wp_from_xi`] (variational
//!   converse) and [`beta_wp_from_xi_simple`] (its r = s evaluation);
//! * rate -> rate: [`beta_from_beta_wp`] (variance form to oscillation form)
//!   and [`nash_exponent_improvement`].

use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::num::optim::{bisect_decreasing, min_log_axis};
use crate::num::quad::improper_tail;
use crate::num::SERIES_REL_TOL;

use super::schedule::IterationSchedule;
use super::RateFunction;

/// Envelope rate `1/(16 s)`: valid for every probability measure, with the
/// discrete derivation exact on grid generators (Cauchy-Schwarz on the
/// Dirichlet form plus `ab <= eps a^2 + b^2/(4 eps)`).
pub fn universal_beta() -> RateFunction {
    RateFunction::Power { c: 1.0 / 16.0, q: 1.0 }
}

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::numeric(format!("decay transform needs finite t > 0, got {t}")))
    }
}

fn check_slack(s: f64) -> Result<()> {
    if s > 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(Error::numeric(format!("rate transform needs finite s > 0, got {s}")))
    }
}

// Search window for the additive slack s. Values above 1 are useless (the
// oscillation term alone exceeds any variance) and below 1e-15 they drown in
// double-precision noise against the exponential term.
const S_LO: f64 = 1e-15;
const S_HI: f64 = 2.0;

// lim_{s -> 0+} e^{-expo / beta(s)}: the infimum over the open half-line
// includes the boundary, where the additive slack vanishes. Without it a
// bounded rate would inherit a spurious S_LO floor.
fn boundary_decay(beta: &RateFunction, expo: f64) -> f64 {
    (-expo / beta.eval_ext(1e-300).to_f64()).exp()
}

/// Decay rate from an inequality rate, variational form:
/// `xi(t) = inf_s ( s + e^{-2 t / beta(s)} )`.
pub fn xi_from_beta_wp(beta_wp: &RateFunction, t: f64) -> Result<f64> {
    check_time(t)?;
    let obj = |s: f64| s + (-2.0 * t / beta_wp.eval_ext(s).to_f64()).exp();
    let (_, interior) = min_log_axis(&obj, S_LO, S_HI);
    let xi = interior.min(boundary_decay(beta_wp, 2.0 * t));
    #[cfg(debug_assertions)]
    {
        let level = xi_levelset_from_beta_wp(beta_wp, t)?;
        if level > 1e-10 {
            debug_assert!(
                xi <= level * (1.0 + 1e-6) && xi >= 0.5 * level * (1.0 - 1e-6),
                "variational form {xi} escaped level-set bracket [{}, {level}]",
                0.5 * level
            );
        }
    }
    Ok(xi)
}

/// Decay rate from an inequality rate, level-set form:
/// `2 inf { s in (0,1) : beta(s) ln(1/s) <= 2t }`.
///
/// `h(s) = beta(s) ln(1/s)` is a product of non-negative non-increasing
/// factors on (0,1), so the level is found by bisection. At the crossing
/// `e^{-2t/beta(s*)} = s*`, which pins the variational form between `s*` and
/// `2 s*`.
pub fn xi_levelset_from_beta_wp(beta_wp: &RateFunction, t: f64) -> Result<f64> {
    check_time(t)?;
    let h = |s: f64| beta_wp.eval_ext(s).to_f64() * (1.0 / s).ln();
    let lo = 1e-15;
    let hi = 1.0 - 1e-12;
    let star = if h(lo) <= 2.0 * t {
        lo
    } else {
        bisect_decreasing(&h, lo, hi, 2.0 * t)
    };
    Ok(2.0 * star)
}

/// Variational converse, decay rate -> inequality rate:
/// `beta(s) = inf_{r>0} (2 s / r) xi^{-1}(r e^{1 - r/s})`.
///
/// `+inf` means the decay profile never certifies an inequality at slack `s`.
pub fn beta_wp_from_xi(xi: &RateFunction, s: f64) -> Result<ExtReal> {
    check_slack(s)?;
    let obj = |r: f64| {
        let y = r * (1.0 - r / s).exp();
        match xi.generalized_inverse(y) {
            ExtReal::Finite(v) => 2.0 * s / r * v,
            ExtReal::PosInf => f64::INFINITY,
        }
    };
    let (_, best) = min_log_axis(&obj, 1e-14, 1e3);
    Ok(ExtReal::from_f64(best))
}

/// The r = s evaluation of the variational converse: `2 xi^{-1}(s)`.
/// Always at least [`beta_wp_from_xi`], often by a useful margin.
pub fn beta_wp_from_xi_simple(xi: &RateFunction, s: f64) -> Result<ExtReal> {
    check_slack(s)?;
    Ok(match xi.generalized_inverse(s) {
        ExtReal::Finite(v) => ExtReal::finite(2.0 * v),
        ExtReal::PosInf => ExtReal::PosInf,
    })
}

/// Schedule-driven iterated decay:
/// `xi(t) = sum_{i < k} gamma_i s_{i+1}(t) + gamma_k / 4` where
/// `s_j(t) = geninv(beta, 2 t alpha_j / ln(1/gamma_j))`.
///
/// Each step spends the fraction `alpha_j` of the budget to shrink variance
/// by `gamma_j` at additive cost `s_j`; truncating at any depth stays valid
/// because the residual variance is at most `gamma_k Osc^2 / 4`. The sum is
/// cut at the first step whose slack is infinite (or once both the running
/// term and the residual are negligible), so the result is always finite.
pub fn xi_iterated(
    beta_wp: &RateFunction,
    sched: &IterationSchedule,
    t: f64,
) -> Result<f64> {
    check_time(t)?;
    let mut acc = 0.0;
    for i in 0..sched.depth() {
        let g_next = sched.gamma(i + 1);
        let threshold = 2.0 * t * sched.alpha(i + 1) / (1.0 / g_next).ln();
        match beta_wp.generalized_inverse(threshold) {
            ExtReal::PosInf => return Ok(acc + sched.gamma(i) / 4.0),
            ExtReal::Finite(slack) => {
                let term = sched.gamma(i) * slack;
                acc += term;
                if acc > 0.0
                    && term <= SERIES_REL_TOL * acc
                    && 0.25 * g_next <= SERIES_REL_TOL * acc
                {
                    return Ok(acc + 0.25 * g_next);
                }
            }
        }
    }
    Ok(acc + 0.25 * sched.gamma(sched.depth()))
}

/// Derivative-route decay rate at lag `a`:
/// `eta(t, a) = inf_s ( s + e^{-2 (t-a) / beta(s)} / (2 a) )`, `t > a > 0`.
pub fn eta_from_beta(beta: &RateFunction, t: f64, a: f64) -> Result<f64> {
    if !(t > a && a > 0.0 && t.is_finite()) {
        return Err(Error::numeric(format!("eta needs t > a > 0, got t = {t}, a = {a}")));
    }
    Ok(eta_value(beta, t, a))
}

fn eta_value(beta: &RateFunction, t: f64, a: f64) -> f64 {
    let obj = |s: f64| s + (-2.0 * (t - a) / beta.eval_ext(s).to_f64()).exp() / (2.0 * a);
    let interior = min_log_axis(&obj, S_LO, S_HI).1;
    interior.min(boundary_decay(beta, 2.0 * (t - a)) / (2.0 * a))
}

/// Tail integral of the derivative route, `xi(t) = 2 int_t^inf eta(u, u/2) du`.
#[derive(Debug, Clone, Copy)]
pub struct EtaTailIntegral {
    pub value: ExtReal,
    /// False when the tail fails its convergence criterion; the derivative
    /// route then yields no decay conclusion (the value is reported `+inf`).
    pub integrable: bool,
}

pub fn xi_from_eta(beta: &RateFunction, t: f64) -> Result<EtaTailIntegral> {
    check_time(t)?;
    let integrand = |u: f64| eta_value(beta, u, 0.5 * u);
    let tail = improper_tail(&integrand, t, 1e-10);
    if tail.converged {
        Ok(EtaTailIntegral { value: ExtReal::finite(2.0 * tail.value), integrable: true })
    } else {
        Ok(EtaTailIntegral { value: ExtReal::PosInf, integrable: false })
    }
}

/// Variance-form rate to oscillation-form rate:
/// `beta_osc(s) = min( 1/2 + beta(2s), 1/(16 s) )`.
/// The envelope keeps the conversion below the universal rate everywhere.
pub fn beta_from_beta_wp(beta_wp: &RateFunction, s: f64) -> Result<f64> {
    check_slack(s)?;
    let converted = 0.5 + beta_wp.eval_ext(2.0 * s).to_f64();
    Ok(converted.min(1.0 / (16.0 * s)))
}

/// Exponent improvement for power rates `beta(s) = c s^{-p}`: the moment
/// iteration flattens the exponent to `1/(p+1)`, at the price of an explicit
/// constant, and the universal envelope caps the result near s = 1:
/// returns `min( c(p) s^{-1/(p+1)}, 1/(16 s) )` with
/// `c(p) = C (p+1) (p+2)^{-(p+2)/(p+1)}`, `C = c^{p/(p+1)} p^{-p/(p+1)} (p+1)`.
pub fn nash_exponent_improvement(c: f64, p: f64) -> Result<RateFunction> {
    if !(c > 0.0 && c.is_finite() && p > 0.0 && p.is_finite()) {
        return Err(Error::model(format!("power rate needs c > 0, p > 0, got c = {c}, p = {p}")));
    }
    let big_c = c.powf(p / (p + 1.0)) * p.powf(-p / (p + 1.0)) * (p + 1.0);
    let cp = big_c * (p + 1.0) * (p + 2.0).powf(-(p + 2.0) / (p + 1.0));
    let improved = RateFunction::Power { c: cp, q: 1.0 / (p + 1.0) };
    Ok(RateFunction::min_of(improved, universal_beta()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::log_grid;
    use proptest::prelude::*;

    #[test]
    fn constant_rate_gives_pure_exponential_decay() {
        // beta = C: the slack is free to sit at 0+, so xi(t) = e^{-2t/C}.
        let beta = RateFunction::constant(3.0);
        for t in [0.5, 2.0, 5.0] {
            let xi = xi_from_beta_wp(&beta, t).unwrap();
            let exact = (-2.0 * t / 3.0).exp();
            assert!((xi - exact).abs() < 1e-6 * exact + 1e-12, "t={t}: {xi} vs {exact}");
        }
    }

    #[test]
    fn variational_form_sits_in_levelset_bracket() {
        let rates = [
            universal_beta(),
            RateFunction::power(0.5, 2.0),
            RateFunction::constant(2.0),
            RateFunction::LogPower { d0: 0.1, d: 1.0, r: 1.0 },
            RateFunction::min_of(RateFunction::power(0.3, 1.0), RateFunction::constant(1.0)),
        ];
        for beta in &rates {
            for t in log_grid(0.05, 50.0, 12) {
                let xi = xi_from_beta_wp(beta, t).unwrap();
                let level = xi_levelset_from_beta_wp(beta, t).unwrap();
                if level < 1e-9 {
                    continue;
                }
                assert!(
                    xi <= level * (1.0 + 1e-6),
                    "{beta}, t={t}: xi={xi} > levelset={level}"
                );
                assert!(
                    xi >= 0.5 * level * (1.0 - 1e-6),
                    "{beta}, t={t}: xi={xi} < half levelset {}",
                    0.5 * level
                );
            }
        }
    }

    #[test]
    fn converse_of_exponential_decay_is_affine() {
        // xi(t) = e^{-2t/C}: the infimum sits at r = 1 and equals C (1 - s).
        let c_big = 3.0;
        let xi = RateFunction::ExpDecay { c: 1.0, rate: 2.0 / c_big, q: 1.0 };
        for s in [0.05, 0.2, 0.5, 0.9] {
            let beta = beta_wp_from_xi(&xi, s).unwrap();
            let exact = c_big * (1.0 - s);
            match beta {
                ExtReal::Finite(v) => {
                    assert!((v - exact).abs() < 1e-5 * exact + 1e-9, "s={s}: {v} vs {exact}")
                }
                ExtReal::PosInf => panic!("finite expected at s={s}"),
            }
        }
    }

    #[test]
    fn converse_of_power_decay_matches_closed_form() {
        // xi(t) = c' t^{-p}: infimum at r = (p+1) s, value
        // 2 e c'^{1/p} (p+1)^{-(p+1)/p} s^{-1/p}.
        for (cp, p) in [(2.0, 1.5), (0.5, 1.0), (1.0, 3.0)] {
            let xi = RateFunction::Power { c: cp, q: p };
            for s in [0.02f64, 0.1, 0.4] {
                let exact = 2.0
                    * std::f64::consts::E
                    * cp.powf(1.0 / p)
                    * (p + 1.0).powf(-(p + 1.0) / p)
                    * s.powf(-1.0 / p);
                match beta_wp_from_xi(&xi, s).unwrap() {
                    ExtReal::Finite(v) => assert!(
                        (v - exact).abs() < 1e-5 * exact,
                        "c'={cp}, p={p}, s={s}: {v} vs {exact}"
                    ),
                    ExtReal::PosInf => panic!("finite expected"),
                }
            }
        }
    }

    #[test]
    fn simple_converse_doubles_the_inverse() {
        let c_big = 3.0;
        let xi = RateFunction::ExpDecay { c: 1.0, rate: 2.0 / c_big, q: 1.0 };
        for s in [0.05, 0.3, 0.7] {
            match beta_wp_from_xi_simple(&xi, s).unwrap() {
                ExtReal::Finite(v) => {
                    let exact = c_big * (1.0 / s).ln();
                    assert!((v - exact).abs() < 1e-9 * exact, "{v} vs {exact}");
                }
                ExtReal::PosInf => panic!("finite expected"),
            }
        }
    }

    #[test]
    fn iterated_decay_of_power_rate_is_an_exact_power_law() {
        // beta(s) = c s^{-1/p} turns into xi(t) = (c pi^2 ln2 / 12t)^p S_p,
        // S_p = sum_i 2^{-i} (i+1)^{3p}; S_1 = 52 and S_2 = 18732 exactly.
        let sched = IterationSchedule::default();
        let series = |threep: f64| -> f64 {
            (0..400).map(|i| 0.5f64.powi(i) * ((i + 1) as f64).powf(threep)).sum()
        };
        assert!((series(3.0) - 52.0).abs() < 1e-9);
        assert!((series(6.0) - 18732.0).abs() < 1e-6);

        let c = 0.8;
        for (p, s_p) in [(0.5, series(1.5)), (1.0, 52.0), (2.0, 18732.0)] {
            let beta = RateFunction::Power { c, q: 1.0 / p };
            for t in [5.0, 50.0] {
                let x_base = c * std::f64::consts::PI.powi(2) * std::f64::consts::LN_2 / (12.0 * t);
                let exact = x_base.powf(p) * s_p;
                let xi = xi_iterated(&beta, &sched, t).unwrap();
                assert!(
                    (xi - exact).abs() < 1e-10 * exact,
                    "p={p}, t={t}: {xi} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn iterated_decay_of_constant_rate_truncates_with_residual() {
        // beta = 5: steps succeed while (12 t / pi^2 ln2) j^-3 >= 5; at
        // t = 1000 that is j <= 7, so the value is the residual 2^-7 / 4.
        let xi = xi_iterated(&RateFunction::constant(5.0), &IterationSchedule::default(), 1000.0)
            .unwrap();
        assert_eq!(xi, 0.001953125);
    }

    #[test]
    fn iterated_decay_is_monotone_in_time() {
        let beta = RateFunction::power(0.25, 1.0);
        let sched = IterationSchedule::default();
        let mut prev = f64::INFINITY;
        for t in log_grid(0.1, 1e4, 40) {
            let xi = xi_iterated(&beta, &sched, t).unwrap();
            assert!(xi <= prev * (1.0 + 1e-12), "t={t}");
            prev = xi;
        }
    }

    #[test]
    fn eta_of_universal_rate_closed_form() {
        // beta(s) = 1/(16 s), a = t/2: stationarity gives e^{-16 t s} = 1/16,
        // so eta = (ln 16 + 1) / (16 t).
        let beta = universal_beta();
        for t in [0.5, 2.0, 10.0] {
            let eta = eta_from_beta(&beta, t, 0.5 * t).unwrap();
            let exact = (16.0f64.ln() + 1.0) / (16.0 * t);
            assert!((eta - exact).abs() < 1e-6 * exact, "t={t}: {eta} vs {exact}");
        }
        assert!(eta_from_beta(&beta, 1.0, 1.0).is_err());
        assert!(eta_from_beta(&beta, 1.0, 0.0).is_err());
    }

    #[test]
    fn eta_tail_flags_universal_rate_as_nonintegrable() {
        // eta ~ (ln16 + 1)/(16 u) is not integrable at infinity.
        let res = xi_from_eta(&universal_beta(), 1.0).unwrap();
        assert!(!res.integrable);
        assert_eq!(res.value, ExtReal::PosInf);
    }

    #[test]
    fn eta_tail_of_constant_rate_matches_exponential_integral() {
        // beta = 2, a = u/2: eta(u) = e^{-u/2}/u, so
        // xi(2) = 2 int_2^inf e^{-u/2}/u du = 2 E1(1) = 0.43876786879104054.
        let res = xi_from_eta(&RateFunction::constant(2.0), 2.0).unwrap();
        assert!(res.integrable);
        match res.value {
            ExtReal::Finite(v) => {
                let exact = 2.0 * 0.21938393439552027;
                assert!((v - exact).abs() < 1e-6 * exact, "{v} vs {exact}");
            }
            ExtReal::PosInf => panic!("finite expected"),
        }
    }

    #[test]
    fn oscillation_form_conversion_keeps_universal_envelope() {
        // beta(s) = 1/s: the converted branch 1/2 + 1/(2s) is never below
        // 1/(16 s), so the envelope wins everywhere.
        let beta = RateFunction::power(1.0, 1.0);
        for s in log_grid(1e-6, 1.0, 25) {
            let v = beta_from_beta_wp(&beta, s).unwrap();
            assert!((v - 1.0 / (16.0 * s)).abs() < 1e-12 / (16.0 * s), "s={s}");
        }
        // a small constant rate beats the envelope at moderate s
        let flat = RateFunction::constant(0.001);
        let v = beta_from_beta_wp(&flat, 0.01).unwrap();
        assert!((v - 0.501).abs() < 1e-12, "{v}");
    }

    #[test]
    fn nash_improvement_constant_and_envelope() {
        // c = 1, p = 1: C = 2, c(p) = 4 / 3^{3/2} = 0.769800358919501.
        let f = nash_exponent_improvement(1.0, 1.0).unwrap();
        let v1 = f.eval(1.0).unwrap();
        assert!((v1 - 1.0 / 16.0).abs() < 1e-15, "envelope must win at s = 1: {v1}");
        let v2 = f.eval(1e-4).unwrap();
        let expect = 0.769800358919501 * 1e-4f64.powf(-0.5);
        assert!((v2 - expect).abs() < 1e-9 * expect, "{v2} vs {expect}");
        assert!(nash_exponent_improvement(0.0, 1.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn bracket_holds_for_random_power_rates(
            c in 1e-3f64..5.0,
            q in 0.2f64..3.0,
            t in 0.05f64..50.0,
        ) {
            let beta = RateFunction::Power { c, q };
            let xi = xi_from_beta_wp(&beta, t).unwrap();
            let level = xi_levelset_from_beta_wp(&beta, t).unwrap();
            prop_assume!(level > 1e-9);
            prop_assert!(xi <= level * (1.0 + 1e-6));
            prop_assert!(xi >= 0.5 * level * (1.0 - 1e-6));
        }

        #[test]
        fn refined_converse_never_exceeds_simple(
            cp in 0.1f64..3.0,
            p in 0.5f64..3.0,
            s in 1e-3f64..0.9,
        ) {
            // r = s is feasible in the infimum, so refined <= simple always.
            let xi = RateFunction::Power { c: cp, q: p };
            let refined = beta_wp_from_xi(&xi, s).unwrap();
            let simple = beta_wp_from_xi_simple(&xi, s).unwrap();
            prop_assert!(refined.to_f64() <= simple.to_f64() * (1.0 + 1e-9) + 1e-12);
        }
    }
}
