//! Explicit Poincare-constant bounds for log-concave measures.
//!
//! Every bound here turns a certified weak inequality rate (or a moment of
//! the potential's curvature) into a single number `C` with `C_P <= C`,
//! packaged as a [`BoundReport`]. The pipelines are:
//!
//! * [`cp_bound_milman`] — universal iteration constant x the mass of the
//!   clipped inverse rate, `(1024/pi^2) * kappa * M_beta`;
//! * [`cp_bound_osc_schedule`] / [`cp_bound_grad_schedule`] — semigroup
//!   integration along a slack schedule `t -> s(t)`;
//! * [`cp_bound_brascamp_moment`] — the inverse-curvature moment
//!   `mu(||Hess^-1 V||_HS)` by grid quadrature (1D) or Monte Carlo (ND);
//! * [`cp_bound_log_moment`] / [`cp_bound_power_moment`] — bounds from
//!   exponential-log and power moments of the measure.
//!
//! Infeasible hypotheses and divergent integrals yield `+inf` reports with a
//! reason string; errors are reserved for malformed inputs.

use std::cell::Cell;
use std::f64::consts::{LN_2, PI};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::measure::hessian::HessianTarget;
use crate::measure::sample::{batch_means, sample};
use crate::measure::{build_grid, GridMeasure1D, Potential1D, TAIL_TOL};
use crate::num::quad::{adaptive_simpson, improper_tail, QuadResult};
use crate::ratefn::schedule::IterationSchedule;
use crate::ratefn::{MonotoneTable, RateFunction};
use crate::report::{BoundReport, HypothesisStatus};

/// Constant in front of `kappa * M_beta`: 1024 / pi^2.
pub const MILMAN_PREFACTOR: f64 = 1024.0 / (PI * PI);

/// Relative tolerance for the 1D quadratures in this module.
const QUAD_REL_TOL: f64 = 1e-12;

/// `kappa` for the universal dyadic / inverse-square iteration schedule
/// (halving targets, quadratically decaying step weights). Closed form
/// `52 pi^2 ln 2 / 6`; the series is what gets evaluated.
pub fn kappa_universal() -> f64 {
    IterationSchedule::dyadic_inverse_square().kappa()
}

/// Mass of the clipped inverse rate, `M_beta = integral_0^inf min(beta^{-1}(t), 1) dt`.
///
/// The clip at 1 is the normalization under which gradient-flavor
/// certificates are compared; `clipped` records whether it was ever active.
/// A divergent integral is `+inf` with `converged = false` on the tail.
#[derive(Clone, Copy, Debug)]
pub struct InverseMass {
    pub value: ExtReal,
    pub quad_error: f64,
    pub clipped: bool,
}

pub fn m_beta(beta: &RateFunction) -> InverseMass {
    let clipped = Cell::new(false);
    let integrand = |t: f64| -> f64 {
        match beta.generalized_inverse(t.max(0.0)) {
            ExtReal::Finite(v) if v <= 1.0 => v,
            _ => {
                clipped.set(true);
                1.0
            }
        }
    };
    let head = adaptive_simpson(&integrand, 0.0, 1.0, QUAD_REL_TOL);
    let tail = improper_tail(&integrand, 1.0, QUAD_REL_TOL);
    if !head.converged || !tail.converged {
        return InverseMass { value: ExtReal::PosInf, quad_error: f64::INFINITY, clipped: clipped.get() };
    }
    InverseMass {
        value: ExtReal::finite(head.value + tail.value),
        quad_error: head.abs_err + tail.abs_err,
        clipped: clipped.get(),
    }
}

/// Certified rate function from the curvature tail of a 1D grid measure:
/// the tail profile `t -> mu(1/V'' >= t)` is an inverse rate for the
/// measure, so its generalized inverse is a rate function. Nodes where the
/// curvature vanishes (or is negative) carry an effectively infinite level,
/// encoded as 1e300 so that downstream integrals diverge honestly.
pub fn beta_from_curvature_tail(m: &GridMeasure1D) -> Result<RateFunction> {
    const FLAT_LEVEL: f64 = 1e300;
    let pot = m.potential();
    let mut levels: Vec<(f64, f64)> = m
        .nodes()
        .iter()
        .zip(m.weights())
        .map(|(&x, &w)| {
            let d2 = pot.d2v(x);
            let c = if d2 > 0.0 { (1.0 / d2).min(FLAT_LEVEL) } else { FLAT_LEVEL };
            (c, w)
        })
        .collect();
    // Sort by level descending; cumulative mass is then the tail profile.
    levels.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite levels"));
    let mut knots: Vec<(f64, f64)> = Vec::new();
    let mut cum = 0.0;
    for (c, w) in levels {
        cum += w;
        match knots.last_mut() {
            Some(last) if last.1 == c => last.0 = cum,
            // Tail weights below one ulp of the total mass saturate `cum`;
            // keep the smaller (right-continuous) level at that mass.
            Some(last) if cum <= last.0 => last.1 = c,
            _ => knots.push((cum, c)),
        }
    }
    match knots.len() {
        0 => Err(Error::model("curvature certificate needs a nonempty grid")),
        1 => {
            // Single curvature level: an exact ramp-free certificate.
            let (mass, c) = knots[0];
            Ok(RateFunction::ZeroBeyond {
                s0: mass,
                inner: Box::new(RateFunction::constant(c)),
            })
        }
        _ => {
            // Thin to at most 257 knots, keeping the extremes.
            let stride = knots.len().div_ceil(256);
            let mut thin: Vec<(f64, f64)> =
                knots.iter().step_by(stride).copied().collect();
            if thin.last() != knots.last() {
                thin.push(*knots.last().expect("nonempty"));
            }
            Ok(RateFunction::Table { points: MonotoneTable::new(thin)? })
        }
    }
}

/// Slack schedule `t -> s(t)` driving the semigroup-integration bounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum ScheduleS {
    /// `(theta/16) * t` up to `t = 2`, then `(theta/16) * ln(t)^-(1+theta)`,
    /// `theta` in (0, 1].
    LogDecay { theta: f64 },
    /// Piecewise-linear table: `ss[0]` before the first knot, 0 beyond the
    /// last.
    Table { ts: Vec<f64>, ss: Vec<f64> },
}

impl ScheduleS {
    pub fn log_decay(theta: f64) -> Result<Self> {
        let s = ScheduleS::LogDecay { theta };
        s.validate()?;
        Ok(s)
    }

    pub fn table(ts: Vec<f64>, ss: Vec<f64>) -> Result<Self> {
        let s = ScheduleS::Table { ts, ss };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ScheduleS::LogDecay { theta } => {
                if !(theta.is_finite() && *theta > 0.0 && *theta <= 1.0) {
                    return Err(Error::model(format!(
                        "schedule exponent theta = {theta} must lie in (0, 1]"
                    )));
                }
                Ok(())
            }
            ScheduleS::Table { ts, ss } => {
                if ts.len() != ss.len() || ts.is_empty() {
                    return Err(Error::model("schedule table needs equal, nonzero knot counts"));
                }
                if ts[0] < 0.0 || ts.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::model(
                        "schedule times must be non-negative and strictly increasing",
                    ));
                }
                if ss.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
                    return Err(Error::model("schedule values must be finite and non-negative"));
                }
                Ok(())
            }
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            ScheduleS::LogDecay { theta } => {
                if t <= 0.0 {
                    0.0
                } else if t <= 2.0 {
                    theta / 16.0 * t
                } else {
                    theta / 16.0 * t.ln().powf(-(1.0 + theta))
                }
            }
            ScheduleS::Table { ts, ss } => {
                let n = ts.len();
                if t <= ts[0] {
                    return ss[0];
                }
                if t >= ts[n - 1] {
                    return 0.0;
                }
                let i = ts.partition_point(|&v| v <= t) - 1;
                let w = (t - ts[i]) / (ts[i + 1] - ts[i]);
                ss[i] + w * (ss[i + 1] - ss[i])
            }
        }
    }

    /// `integral_0^inf s(t) dt`; exact for tables, quadrature otherwise.
    /// The log-decay form always diverges here (its tail is not integrable),
    /// which the doubling-window quadrature reports as `converged: false`.
    pub fn mass(&self) -> QuadResult {
        match self {
            ScheduleS::LogDecay { .. } => {
                let head = adaptive_simpson(&|t| self.eval(t), 0.0, 2.0, QUAD_REL_TOL);
                let tail = improper_tail(&|t| self.eval(t), 2.0, QUAD_REL_TOL);
                QuadResult {
                    value: head.value + tail.value,
                    abs_err: head.abs_err + tail.abs_err,
                    converged: head.converged && tail.converged,
                }
            }
            ScheduleS::Table { ts, ss } => {
                let mut v = ts[0] * ss[0];
                for i in 0..ts.len() - 1 {
                    v += 0.5 * (ss[i] + ss[i + 1]) * (ts[i + 1] - ts[i]);
                }
                QuadResult::exact(v)
            }
        }
    }
}

impl fmt::Display for ScheduleS {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScheduleS::LogDecay { theta } => write!(f, "log_decay(theta = {theta})"),
            ScheduleS::Table { ts, .. } => {
                write!(f, "table({} knots on [{}, {}])", ts.len(), ts[0], ts[ts.len() - 1])
            }
        }
    }
}

/// `exp(-2 t / beta(s))` with the conventions shared by every semigroup
/// integral: rate 0 kills the integrand, an infinite rate freezes it at 1,
/// and `s` is floored just above 0 so that `s = 0` means the limit s -> 0+.
fn decay_integrand(beta: &RateFunction, s: f64, t: f64) -> f64 {
    match beta.eval_ext(s.max(1e-300)) {
        ExtReal::Finite(b) if b > 0.0 => (-2.0 * t / b).exp(),
        ExtReal::Finite(_) => 0.0,
        ExtReal::PosInf => 1.0,
    }
}

/// `C_P <= (1024/pi^2) * kappa * M_beta` for a gradient-flavor certificate
/// `beta` of a log-concave measure.
pub fn cp_bound_milman(beta: &RateFunction) -> BoundReport {
    let mut r = BoundReport::new("cp_bound_milman");
    r.input("beta", beta);
    let kappa = kappa_universal();
    r.intermediate("kappa", kappa);
    r.hypothesis("log_concave", HypothesisStatus::Attested);
    r.hypothesis("grad_flavor_certificate", HypothesisStatus::Attested);
    let mass = m_beta(beta);
    if mass.clipped {
        r.flag("clip: inverse rate capped at 1");
    }
    match mass.value {
        ExtReal::Finite(m) => {
            r.intermediate("m_beta", m);
            r.add_quad_error(MILMAN_PREFACTOR * kappa * mass.quad_error);
            r.set_finite(MILMAN_PREFACTOR * kappa * m);
        }
        ExtReal::PosInf => {
            r.set_infinite("M_beta = integral of the clipped inverse rate diverges");
        }
    }
    r
}

/// `C_P <= 64 ln2 * kappa / (1 - 6 s0)^2` with `s0 = 2 integral s(t) dt < 1/6`
/// and `kappa = 2 integral exp(-2t / beta(s(t))) dt`, for an
/// oscillation-flavor certificate `beta`.
pub fn cp_bound_osc_schedule(beta: &RateFunction, schedule: &ScheduleS) -> BoundReport {
    let mut r = BoundReport::new("cp_bound_osc_schedule");
    r.input("beta", beta);
    r.input("schedule", schedule);
    r.hypothesis("osc_flavor_certificate", HypothesisStatus::Attested);
    let mass = schedule.mass();
    if !mass.converged {
        r.hypothesis("schedule_mass_below_one_sixth", HypothesisStatus::Violated);
        r.set_infinite("schedule mass s0 = 2 integral s(t) dt diverges (needs s0 < 1/6)");
        return r;
    }
    let s0 = 2.0 * mass.value;
    r.intermediate("s0", s0);
    r.add_quad_error(2.0 * mass.abs_err);
    if s0 >= 1.0 / 6.0 {
        r.hypothesis("schedule_mass_below_one_sixth", HypothesisStatus::Violated);
        r.set_infinite(format!("schedule mass s0 = {s0:.6e} >= 1/6"));
        return r;
    }
    r.hypothesis("schedule_mass_below_one_sixth", HypothesisStatus::Verified);
    let f = |t: f64| decay_integrand(beta, schedule.eval(t), t);
    let head = adaptive_simpson(&f, 0.0, 2.0, QUAD_REL_TOL);
    let tail = improper_tail(&f, 2.0, QUAD_REL_TOL);
    if !head.converged || !tail.converged {
        r.set_infinite("semigroup decay integral along the schedule diverges");
        return r;
    }
    let kappa = 2.0 * (head.value + tail.value);
    r.intermediate("kappa", kappa);
    let scale = 64.0 * LN_2 / (1.0 - 6.0 * s0).powi(2);
    r.add_quad_error(scale * 2.0 * (head.abs_err + tail.abs_err));
    r.set_finite(scale * kappa);
    r
}

/// `C_P <= 256 ln2 * kappa` with `kappa = 4 (2 + integral_2^inf
/// exp(-2t / beta(s(t))) dt)`, for a gradient-flavor certificate and a slack
/// schedule of total heat mass `integral s(t) / (4 pi t) dt < 1/24`.
pub fn cp_bound_grad_schedule(beta: &RateFunction, schedule: &ScheduleS) -> BoundReport {
    let mut r = BoundReport::new("cp_bound_grad_schedule");
    r.input("beta", beta);
    r.input("schedule", schedule);
    r.hypothesis("grad_flavor_certificate", HypothesisStatus::Attested);
    // Heat mass of the schedule. The integrand s(t)/(4 pi t) is integrable
    // at 0 exactly when s vanishes there, so a table with positive slack at
    // t = 0+ is rejected structurally (a depth-capped quadrature would
    // otherwise truncate the logarithmic divergence into a finite number).
    let heat = |t: f64| {
        let s = schedule.eval(t);
        if s == 0.0 {
            0.0
        } else {
            s / (4.0 * PI * t)
        }
    };
    let (head, tail) = match schedule {
        // (theta/16) t / (4 pi t) is constant on [0, 2], and the tail
        // integrates ln^-(1+theta) against d(ln t) exactly. The closed form
        // matters: the tail decays like 1/ln(t), far too slowly for
        // window-doubling quadrature to certify.
        ScheduleS::LogDecay { theta } => (
            QuadResult::exact(theta / (32.0 * PI)),
            QuadResult::exact(LN_2.powf(-theta) / (64.0 * PI)),
        ),
        ScheduleS::Table { ts, ss } => {
            if ss[0] > 0.0 {
                let diverged =
                    QuadResult { value: f64::INFINITY, abs_err: f64::INFINITY, converged: false };
                (diverged, QuadResult::exact(0.0))
            } else {
                let last = ts[ts.len() - 1];
                (
                    adaptive_simpson(&heat, ts[0].min(2.0), 2.0, QUAD_REL_TOL),
                    adaptive_simpson(&heat, 2.0, last.max(2.0), QUAD_REL_TOL),
                )
            }
        }
    };
    let heat_mass = head.value + tail.value;
    if !(head.converged && tail.converged && heat_mass.is_finite()) {
        r.hypothesis("heat_mass_below_one_twentyfourth", HypothesisStatus::Violated);
        r.set_infinite("schedule heat mass integral s(t)/(4 pi t) dt diverges (needs < 1/24)");
        return r;
    }
    r.intermediate("heat_mass", heat_mass);
    if heat_mass >= 1.0 / 24.0 {
        r.hypothesis("heat_mass_below_one_twentyfourth", HypothesisStatus::Violated);
        r.set_infinite(format!("schedule heat mass {heat_mass:.6e} >= 1/24"));
        return r;
    }
    r.hypothesis("heat_mass_below_one_twentyfourth", HypothesisStatus::Verified);
    let f = |t: f64| decay_integrand(beta, schedule.eval(t), t);
    let int = improper_tail(&f, 2.0, QUAD_REL_TOL);
    if !int.converged {
        r.set_infinite("semigroup decay integral along the schedule diverges");
        return r;
    }
    let kappa = 4.0 * (2.0 + int.value);
    r.intermediate("kappa", kappa);
    r.add_quad_error(256.0 * LN_2 * 4.0 * int.abs_err);
    r.set_finite(256.0 * LN_2 * kappa);
    r
}

/// `C_P <= (1024/pi^2) * kappa * mu(||Hess^-1 V||_HS)` for a strictly convex
/// 1D potential, with the moment computed by grid quadrature. The moment is
/// declared divergent when curvature vanishes at a node or when halving the
/// resolution moves the moment by more than 2%.
pub fn cp_bound_brascamp_moment(m: &GridMeasure1D) -> Result<BoundReport> {
    let mut r = BoundReport::new("cp_bound_brascamp_moment");
    let pot = m.potential();
    r.input("potential", format!("{pot:?}"));
    r.input("resolution", m.len());
    let kappa = kappa_universal();
    r.intermediate("kappa", kappa);
    let convex_probe = pot.is_convex();
    let moment_at = |g: &GridMeasure1D| -> Option<f64> {
        let mut acc = 0.0;
        for (&x, &w) in g.nodes().iter().zip(g.weights()) {
            let d2 = g.potential().d2v(x);
            if !(d2 > 0.0) {
                return None;
            }
            acc += w / d2;
        }
        Some(acc)
    };
    let Some(moment) = moment_at(m) else {
        r.hypothesis("strict_convexity", HypothesisStatus::Violated);
        r.set_infinite(if convex_probe {
            "curvature vanishes at a grid node; the inverse-curvature moment diverges"
        } else {
            "potential is not strictly convex"
        });
        return Ok(r);
    };
    r.hypothesis(
        "strict_convexity",
        if convex_probe { HypothesisStatus::Verified } else { HypothesisStatus::Unverified },
    );
    if !convex_probe {
        r.flag("hypothesis unverified: potential fails the convexity probe");
    }
    let coarse = build_grid(pot, (m.len() / 2).max(16), TAIL_TOL)?;
    let coarse_moment = moment_at(&coarse);
    match coarse_moment {
        Some(cm) if (moment - cm).abs() <= 0.02 * moment.abs() => {
            r.hypothesis("moment_grid_converged", HypothesisStatus::Verified);
            r.intermediate("moment", moment);
            r.intermediate("moment_half_resolution", cm);
            r.add_quad_error(MILMAN_PREFACTOR * kappa * (moment - cm).abs());
            r.set_finite(MILMAN_PREFACTOR * kappa * moment);
        }
        _ => {
            r.hypothesis("moment_grid_converged", HypothesisStatus::Violated);
            r.set_infinite(
                "inverse-curvature moment does not converge under grid refinement",
            );
        }
    }
    Ok(r)
}

/// Monte Carlo version for n-dimensional models: moment and one-standard-
/// error bar from batch means. Convexity is attested by the caller.
pub fn cp_bound_brascamp_moment_mc<T: HessianTarget + ?Sized>(
    model: &T,
    seed: u64,
    size: usize,
) -> Result<BoundReport> {
    let mut r = BoundReport::new("cp_bound_brascamp_moment_mc");
    r.input("dim", model.dim());
    r.input("samples", size);
    r.input("seed", seed);
    r.hypothesis("strict_convexity", HypothesisStatus::Attested);
    r.flag("error bar: one standard error from batch means");
    let kappa = kappa_universal();
    r.intermediate("kappa", kappa);
    let n = model.dim();
    let batch = sample(model, seed, size)?;
    let mut hess = vec![vec![0.0; n]; n];
    let norms: Vec<f64> = batch
        .points
        .iter()
        .map(|x| {
            model.hessian(x, &mut hess);
            crate::measure::hessian::inv_hessian_hs_norm(&hess)
        })
        .collect();
    if norms.iter().any(|v| !v.is_finite()) {
        r.hypothesis("strict_convexity", HypothesisStatus::Violated);
        r.set_infinite("a sampled Hessian is singular; the inverse-curvature moment diverges");
        return Ok(r);
    }
    let (moment, se) = batch_means(&norms);
    r.intermediate("moment", moment);
    r.intermediate("moment_se", se);
    r.add_quad_error(MILMAN_PREFACTOR * kappa * se);
    r.set_finite(MILMAN_PREFACTOR * kappa * moment);
    Ok(r)
}

/// `C_P <= c + 4 max(2, exp([2^eps * 64 * M / theta]^{1/(eps - theta)}))`
/// from the exponential-log moment `M = mu(exp(ln^eps(1 + |x|)))`, with
/// `theta = 1` when `eps >= 2` and `theta = eps/2` otherwise. The additive
/// constant `c` is a configured input, not derived here.
pub fn cp_bound_log_moment(m_eps: f64, eps: f64, c: f64) -> Result<BoundReport> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::model(format!("log-moment exponent eps = {eps} must be > 0")));
    }
    if !(m_eps.is_finite() && m_eps > 0.0) {
        return Err(Error::model(format!("log-moment value M = {m_eps} must be finite and > 0")));
    }
    if !(c.is_finite() && c >= 0.0) {
        return Err(Error::model(format!("additive constant c = {c} must be finite and >= 0")));
    }
    let mut r = BoundReport::new("cp_bound_log_moment");
    r.input("m_eps", m_eps);
    r.input("eps", eps);
    r.input("c", c);
    r.flag("additive constant c is a configured input, not derived");
    let theta = if eps >= 2.0 { 1.0 } else { eps / 2.0 };
    r.intermediate("theta", theta);
    let exponent = (eps.exp2() * 64.0 * m_eps / theta).powf(1.0 / (eps - theta));
    r.intermediate("exponent", exponent);
    let grown = exponent.exp();
    if !grown.is_finite() {
        r.set_infinite(format!("exponential bound exp({exponent:.6e}) overflows f64"));
        return Ok(r);
    }
    r.set_finite(c + 4.0 * grown.max(2.0));
    Ok(r)
}

/// `C_P <= c + max(2, (1/2) M^{1/eps} ln^{2/eps}(M^{2/eps}))` from the power
/// moment `M = mu(|x|^eps)`; `M <= 1` floors the bound at `c + 2`.
pub fn cp_bound_power_moment(m_eps: f64, eps: f64, c: f64) -> Result<BoundReport> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::model(format!("power-moment exponent eps = {eps} must be > 0")));
    }
    if !(m_eps.is_finite() && m_eps > 0.0) {
        return Err(Error::model(format!("power moment M = {m_eps} must be finite and > 0")));
    }
    if !(c.is_finite() && c >= 0.0) {
        return Err(Error::model(format!("additive constant c = {c} must be finite and >= 0")));
    }
    let mut r = BoundReport::new("cp_bound_power_moment");
    r.input("m_eps", m_eps);
    r.input("eps", eps);
    r.input("c", c);
    r.flag("additive constant c is a configured input, not derived");
    let term = if m_eps <= 1.0 {
        0.0
    } else {
        0.5 * m_eps.powf(1.0 / eps) * (2.0 / eps * m_eps.ln()).powf(2.0 / eps)
    };
    r.intermediate("moment_term", term);
    r.set_finite(c + term.max(2.0));
    Ok(r)
}

/// Probe log-concavity of a 1D potential and record the outcome on a report
/// whose `log_concave` hypothesis was so far only attested.
pub fn probe_log_concavity(report: &mut BoundReport, pot: &Potential1D) {
    if pot.is_convex() {
        report.hypothesis("log_concave", HypothesisStatus::Verified);
    } else {
        report.hypothesis("log_concave", HypothesisStatus::Unverified);
        report.flag("hypothesis unverified: potential fails the convexity probe");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::nd::{PerturbationW, ProductPerturbedModel};
    use crate::spectral::discretize;
    use proptest::prelude::*;

    const KAPPA_CLOSED_FORM: f64 = 52.0 * PI * PI * LN_2 / 6.0;

    fn grid(pot: Potential1D, n: usize) -> GridMeasure1D {
        build_grid(&pot, n, TAIL_TOL).unwrap()
    }

    #[test]
    fn kappa_universal_matches_closed_form_and_direct_sum() {
        let k = kappa_universal();
        assert!((k - KAPPA_CLOSED_FORM).abs() < 1e-12 * KAPPA_CLOSED_FORM, "{k}");
        // Independent summation: sum_{i>=0} 2^-i (i+1)^3 * ln2 * pi^2/6.
        let direct: f64 =
            (0..80).map(|i| 0.5f64.powi(i) * ((i + 1) as f64).powi(3)).sum::<f64>()
                * LN_2
                * PI
                * PI
                / 6.0;
        assert!((k - direct).abs() < 1e-9, "{k} vs {direct}");
    }

    #[test]
    fn inverse_mass_closed_forms() {
        // Ramp: inverse is (1 - t)_+, mass 1/2, never clipped.
        let ramp = RateFunction::Hinge { c: 1.0, s0: 1.0 };
        let m = m_beta(&ramp);
        assert!((m.value.as_finite().unwrap() - 0.5).abs() < 1e-9);
        assert!(!m.clipped);

        // Unit step: inverse is 1_{t<1}, mass 1.
        let step = RateFunction::ZeroBeyond {
            s0: 1.0,
            inner: Box::new(RateFunction::constant(1.0)),
        };
        let m = m_beta(&step);
        assert!((m.value.as_finite().unwrap() - 1.0).abs() < 1e-9);

        // The universal envelope 1/(16 s): inverse 1/(16 t) has a divergent
        // tail, and the clip is active near 0.
        let m = m_beta(&RateFunction::power(1.0 / 16.0, 1.0));
        assert!(m.value.is_pos_inf());
        assert!(m.clipped);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn inverse_mass_of_subunit_powers_matches_closed_form(
            c in 0.05f64..2.0,
            q in 0.1f64..0.5,
        ) {
            // beta = c s^-q has clipped inverse min((c/t)^{1/q}, 1) with mass
            // c + c q/(1-q) = c/(1-q).
            let m = m_beta(&RateFunction::power(c, q));
            let exact = c / (1.0 - q);
            let got = m.value.as_finite().expect("finite for q < 1");
            prop_assert!((got - exact).abs() < 1e-6 * exact, "{got} vs {exact}");
            prop_assert!(m.clipped);
        }
    }

    #[test]
    fn milman_bound_on_unit_step_certificate_is_frozen() {
        let step = RateFunction::ZeroBeyond {
            s0: 1.0,
            inner: Box::new(RateFunction::constant(1.0)),
        };
        let r = cp_bound_milman(&step);
        let v = r.value.as_finite().unwrap();
        assert!((v - 6151.450178409327).abs() < 1e-6 * v, "{v}");
        assert!((v - MILMAN_PREFACTOR * kappa_universal()).abs() < 1e-6 * v);
        r.check().unwrap();

        // A constant rate never reaches any level below it, so its clipped
        // inverse is the same unit step; only the clip flag differs.
        let r2 = cp_bound_milman(&RateFunction::constant(1.0));
        let v2 = r2.value.as_finite().unwrap();
        assert!((v - v2).abs() < 1e-9 * v);
        assert!(r2.flags.iter().any(|f| f.contains("clip")));
    }

    #[test]
    fn milman_bound_is_monotone_and_dilation_consistent() {
        let small = cp_bound_milman(&RateFunction::constant(1.0));
        let large = cp_bound_milman(&RateFunction::constant(2.0));
        assert!(large.value.as_finite().unwrap() > small.value.as_finite().unwrap());

        // Scaling space by lambda sends beta to lambda^2 beta and must scale
        // the bound by lambda^2 = 4 exactly (up to quadrature).
        let base = cp_bound_milman(&RateFunction::power(0.3, 0.4));
        let scaled = cp_bound_milman(&RateFunction::power(1.2, 0.4));
        let ratio = scaled.value.as_finite().unwrap() / base.value.as_finite().unwrap();
        assert!((ratio - 4.0).abs() < 0.01 * 4.0, "{ratio}");
    }

    #[test]
    fn osc_schedule_bound_matches_exponential_table_oracle() {
        // s(t) = eps e^-t tabulated densely; beta constant C. Then
        // s0 = 2 eps, kappa = C, value = 64 ln2 C / (1 - 12 eps)^2.
        let eps = 0.05;
        let ts: Vec<f64> = (0..=4000).map(|i| i as f64 * 0.01).collect();
        let ss: Vec<f64> = ts.iter().map(|t| eps * (-t).exp()).collect();
        let schedule = ScheduleS::table(ts, ss).unwrap();
        let c = 2.0;
        let r = cp_bound_osc_schedule(&RateFunction::constant(c), &schedule);
        let exact = 64.0 * LN_2 * c / (1.0 - 12.0 * eps).powi(2);
        let v = r.value.as_finite().unwrap();
        assert!((v - exact).abs() < 1e-4 * exact, "{v} vs {exact}");
        assert_eq!(r.hypotheses["schedule_mass_below_one_sixth"], HypothesisStatus::Verified);
    }

    #[test]
    fn osc_schedule_rejects_heavy_schedules() {
        // The log-decay schedule has infinite mass: infeasible for the
        // oscillation route.
        let r = cp_bound_osc_schedule(
            &RateFunction::constant(1.0),
            &ScheduleS::log_decay(1.0).unwrap(),
        );
        assert!(r.value.is_pos_inf());
        assert!(r.reason.as_deref().unwrap().contains("s0"));
        r.check().unwrap();

        // A finite mass at or above 1/6 is also infeasible.
        let ts: Vec<f64> = (0..=4000).map(|i| i as f64 * 0.01).collect();
        let ss: Vec<f64> = ts.iter().map(|t| 0.1 * (-t).exp()).collect();
        let r = cp_bound_osc_schedule(
            &RateFunction::constant(1.0),
            &ScheduleS::table(ts, ss).unwrap(),
        );
        assert!(r.value.is_pos_inf());
        assert!(r.reason.as_deref().unwrap().contains(">= 1/6"));
    }

    #[test]
    fn grad_schedule_bound_matches_constant_beta_oracle() {
        // beta = Constant(C), theta = 1: kappa = 4 (2 + (C/2) e^{-4/C}).
        let c = 3.0;
        let r = cp_bound_grad_schedule(
            &RateFunction::constant(c),
            &ScheduleS::log_decay(1.0).unwrap(),
        );
        let kappa = 4.0 * (2.0 + 0.5 * c * (-4.0 / c).exp());
        let exact = 256.0 * LN_2 * kappa;
        let v = r.value.as_finite().unwrap();
        assert!((v - exact).abs() < 1e-8 * exact, "{v} vs {exact}");

        // Heat mass of the theta = 1 schedule: 1/(32 pi) + 1/(64 pi ln 2).
        let hm = r.intermediates["heat_mass"];
        let hm_exact = 1.0 / (32.0 * PI) + 1.0 / (64.0 * PI * LN_2);
        assert!((hm - hm_exact).abs() < 1e-6 * hm_exact, "{hm} vs {hm_exact}");
        assert_eq!(r.hypotheses["heat_mass_below_one_twentyfourth"], HypothesisStatus::Verified);
    }

    #[test]
    fn grad_schedule_rejects_invalid_theta() {
        assert!(matches!(ScheduleS::log_decay(0.0), Err(Error::Model(_))));
        assert!(matches!(ScheduleS::log_decay(1.2), Err(Error::Model(_))));
        assert!(matches!(ScheduleS::log_decay(f64::NAN), Err(Error::Model(_))));
    }

    #[test]
    fn grad_schedule_flags_divergent_heat_mass() {
        // A table with s(0) > 0 makes s(t)/t non-integrable at 0.
        let schedule = ScheduleS::table(vec![0.0, 1.0], vec![0.01, 0.0]).unwrap();
        let r = cp_bound_grad_schedule(&RateFunction::constant(1.0), &schedule);
        assert!(r.value.is_pos_inf());
        assert!(r.reason.as_deref().unwrap().contains("heat mass"));
    }

    #[test]
    fn curvature_certificate_of_the_gaussian_is_the_unit_step() {
        let m = grid(Potential1D::Gaussian, 257);
        let beta = beta_from_curvature_tail(&m).unwrap();
        assert!((beta.eval(0.5).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(beta.eval(1.5).unwrap(), 0.0);
        let mass = m_beta(&beta);
        assert!((mass.value.as_finite().unwrap() - 1.0).abs() < 1e-9);

        // Along the log-decay schedule the certified rate is 1, so the decay
        // integral is exactly the exponential tail.
        let r = cp_bound_grad_schedule(&beta, &ScheduleS::log_decay(1.0).unwrap());
        let exact = 256.0 * LN_2 * (8.0 + 2.0 * (-4.0f64).exp());
        let v = r.value.as_finite().unwrap();
        assert!((v - exact).abs() < 1e-8 * exact, "{v} vs {exact}");
    }

    #[test]
    fn curvature_certificate_mass_agrees_with_the_moment() {
        // Layer cake: integral of the curvature tail = mu(1/V''). The table
        // certificate must reproduce it within thinning error.
        let m = grid(Potential1D::Subbotin { p: 1.5 }, 2001);
        let beta = beta_from_curvature_tail(&m).unwrap();
        let mass = m_beta(&beta).value.as_finite().unwrap();
        let moment: f64 = m
            .nodes()
            .iter()
            .zip(m.weights())
            .map(|(&x, &w)| w / m.potential().d2v(x))
            .sum();
        assert!((mass - moment).abs() < 0.02 * moment, "{mass} vs {moment}");
    }

    #[test]
    fn brascamp_moment_gaussian_is_exact() {
        let r = cp_bound_brascamp_moment(&grid(Potential1D::Gaussian, 801)).unwrap();
        let v = r.value.as_finite().unwrap();
        assert!((r.intermediates["moment"] - 1.0).abs() < 1e-12);
        assert!((v - 6151.450178409327).abs() < 1e-6 * v, "{v}");
        assert_eq!(r.hypotheses["strict_convexity"], HypothesisStatus::Verified);
    }

    #[test]
    fn brascamp_moment_subbotin_matches_gamma_function_oracle() {
        // p = 3/2: mu(1/V'') = mu(|x|^{1/2}) / (p(p-1)) = (4/3) / Gamma(2/3).
        let r = cp_bound_brascamp_moment(&grid(Potential1D::Subbotin { p: 1.5 }, 2001)).unwrap();
        let exact = (4.0 / 3.0) / 1.3541179394264005;
        let got = r.intermediates["moment"];
        assert!((got - exact).abs() < 2e-3 * exact, "{got} vs {exact}");
    }

    #[test]
    fn brascamp_moment_detects_divergence_and_nonconvexity() {
        // Quartic: curvature vanishes at the origin node.
        let r = cp_bound_brascamp_moment(&grid(Potential1D::Subbotin { p: 4.0 }, 2001)).unwrap();
        assert!(r.value.is_pos_inf());
        assert!(r.reason.as_deref().unwrap().contains("curvature"));
        r.check().unwrap();

        // Flat potential: curvature vanishes everywhere.
        let r =
            cp_bound_brascamp_moment(&grid(Potential1D::Uniform { a: 0.0, b: 1.0 }, 801)).unwrap();
        assert!(r.value.is_pos_inf());

        // Double well: not convex.
        let r =
            cp_bound_brascamp_moment(&grid(Potential1D::DoubleWell { a: 1.5 }, 1201)).unwrap();
        assert!(r.value.is_pos_inf());
        assert!(r.reason.as_deref().unwrap().contains("convex"));

        // Cubic with an even grid (no node at 0): every node is strictly
        // convex but the moment diverges logarithmically, caught by the
        // refinement probe.
        let r = cp_bound_brascamp_moment(&grid(Potential1D::Subbotin { p: 3.0 }, 1600)).unwrap();
        assert!(r.value.is_pos_inf());
        assert!(r.reason.as_deref().unwrap().contains("refinement"));
    }

    #[test]
    fn brascamp_moment_mc_product_gaussian_is_sqrt_n() {
        let model =
            ProductPerturbedModel::new(vec![Potential1D::Gaussian; 4], PerturbationW::Zero)
                .unwrap();
        let r = cp_bound_brascamp_moment_mc(&model, 7, 2000).unwrap();
        let v = r.value.as_finite().unwrap();
        let exact = MILMAN_PREFACTOR * kappa_universal() * 2.0;
        assert!((v - exact).abs() < 1e-9 * exact, "{v} vs {exact}");
        assert!(r.intermediates["moment_se"].abs() < 1e-12);
    }

    #[test]
    fn log_moment_bound_closed_forms() {
        // eps = 2, M = 1: theta = 1, exponent 256, value 4 e^256.
        let r = cp_bound_log_moment(1.0, 2.0, 0.0).unwrap();
        let v = r.value.as_finite().unwrap();
        assert!(((v / 4.0).ln() - 256.0).abs() < 1e-9, "{v}");

        // Tiny moment floors at c + 8.
        let r = cp_bound_log_moment(1e-12, 2.0, 0.5).unwrap();
        assert!((r.value.as_finite().unwrap() - 8.5).abs() < 1e-12);

        // eps = 1: theta = 1/2, exponent (2 * 64 * M / 0.5)^2 = (256 M)^2.
        let r = cp_bound_log_moment(0.01, 1.0, 0.0).unwrap();
        let exact = 4.0 * (2.56f64 * 2.56).exp();
        assert!((r.value.as_finite().unwrap() - exact).abs() < 1e-9 * exact);

        // Large moments overflow the double exponential: honest +inf.
        let r = cp_bound_log_moment(10.0, 2.0, 0.0).unwrap();
        assert!(r.value.is_pos_inf());
        assert!(r.reason.as_deref().unwrap().contains("overflow"));

        assert!(matches!(cp_bound_log_moment(1.0, 0.0, 0.0), Err(Error::Model(_))));
        assert!(matches!(cp_bound_log_moment(-1.0, 2.0, 0.0), Err(Error::Model(_))));
    }

    #[test]
    fn power_moment_bound_closed_forms() {
        // eps = 1, M = e: (1/2) e ln^2(e^2) = 2e.
        let r = cp_bound_power_moment(std::f64::consts::E, 1.0, 0.25).unwrap();
        let exact = 0.25 + 2.0 * std::f64::consts::E;
        assert!((r.value.as_finite().unwrap() - exact).abs() < 1e-12 * exact);

        // M <= 1 floors at c + 2.
        let r = cp_bound_power_moment(0.5, 1.0, 0.1).unwrap();
        assert!((r.value.as_finite().unwrap() - 2.1).abs() < 1e-12);

        assert!(matches!(cp_bound_power_moment(1.0, -2.0, 0.0), Err(Error::Model(_))));
    }

    #[test]
    fn finite_bounds_dominate_the_spectral_constant_on_the_gaussian() {
        let m = grid(Potential1D::Gaussian, 401);
        let cp = discretize(m.clone()).unwrap().poincare_constant().unwrap();
        let beta = beta_from_curvature_tail(&m).unwrap();
        let mut reports = vec![
            cp_bound_milman(&beta),
            cp_bound_grad_schedule(&beta, &ScheduleS::log_decay(1.0).unwrap()),
            cp_bound_brascamp_moment(&m).unwrap(),
        ];
        for r in &mut reports {
            probe_log_concavity(r, m.potential());
            r.comparison("spectral_cp", cp);
            r.check().unwrap();
            match r.value_lower() {
                ExtReal::Finite(v) => {
                    assert!(v >= cp, "{} = {v} < C_P = {cp}", r.name);
                }
                ExtReal::PosInf => panic!("{} should be finite on the gaussian", r.name),
            }
        }
    }

    #[test]
    fn schedule_serialization_round_trips() {
        let s = ScheduleS::log_decay(0.7).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        assert!(text.contains("log_decay"));
        let back: ScheduleS = serde_json::from_str(&text).unwrap();
        assert_eq!(s, back);

        let t = ScheduleS::table(vec![0.0, 1.0, 2.0], vec![0.1, 0.05, 0.0]).unwrap();
        let text = serde_json::to_string(&t).unwrap();
        let back: ScheduleS = serde_json::from_str(&text).unwrap();
        assert_eq!(t, back);
        assert!(ScheduleS::table(vec![0.0, 0.0], vec![0.1, 0.1]).is_err());
        assert!(ScheduleS::table(vec![0.0], vec![]).is_err());
    }
}

