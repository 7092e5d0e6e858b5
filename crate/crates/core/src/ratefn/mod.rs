//! Rate functions: non-increasing, non-negative functions on the positive
//! half-line that quantify weak functional inequalities and semigroup decay.
//!
//! The same type plays both roles of the calculus:
//!
//! * an inequality rate `beta(s)` — the price attached to the additive
//!   `s * Osc^2` slack in a weak variance or integrated-curvature inequality;
//! * a decay rate `xi(t)` — a certified bound on `Var(P_t f) / Osc(f)^2`.
//!
//! Parameter validation makes every family non-increasing and non-negative by
//! construction, so the generalized inverse `inf { s : f(s) <= t }` is always
//! well defined; it is computed in closed form for each analytic family and
//! by bisection for tables.

pub mod schedule;
pub mod transforms;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ext::ExtReal;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum RateFunction {
    /// `c`
    Constant { c: f64 },
    /// `c * s^{-q}`
    Power { c: f64, q: f64 },
    /// `c * exp(delta * s^{-q})` — super-exponential growth near 0.
    ExpPower { c: f64, delta: f64, q: f64 },
    /// `c * exp(-rate * t^q)` — exponential decay profile.
    ExpDecay { c: f64, rate: f64, q: f64 },
    /// `d0 + d * ln(1/s)^r` below 1, `d0` from 1 on.
    LogPower { d0: f64, d: f64, r: f64 },
    /// `c * (1 - s/s0)_+` — affine ramp hitting 0 at `s0`.
    Hinge { c: f64, s0: f64 },
    /// `inner(s)` below `s0`, 0 from `s0` on.
    ZeroBeyond { s0: f64, inner: Box<RateFunction> },
    /// Pointwise minimum of two rate functions.
    Min { a: Box<RateFunction>, b: Box<RateFunction> },
    /// Tabulated function, log-log interpolated between knots.
    Table { points: MonotoneTable },
}

impl RateFunction {
    pub fn power(c: f64, q: f64) -> Self {
        RateFunction::Power { c, q }
    }

    pub fn constant(c: f64) -> Self {
        RateFunction::Constant { c }
    }

    pub fn min_of(a: RateFunction, b: RateFunction) -> Self {
        RateFunction::Min { a: Box::new(a), b: Box::new(b) }
    }

    /// Structural parameter validation (recursive). Families are chosen so
    /// that valid parameters imply monotonicity; no sampling is needed.
    pub fn validate(&self) -> Result<()> {
        let ok = |cond: bool, what: &str| {
            if cond {
                Ok(())
            } else {
                Err(Error::model(format!("invalid rate function: {what} in {self}")))
            }
        };
        match self {
            RateFunction::Constant { c } => ok(c.is_finite() && *c >= 0.0, "need c >= 0"),
            RateFunction::Power { c, q } => {
                ok(c.is_finite() && *c > 0.0 && q.is_finite() && *q > 0.0, "need c > 0, q > 0")
            }
            RateFunction::ExpPower { c, delta, q } => ok(
                c.is_finite()
                    && *c > 0.0
                    && delta.is_finite()
                    && *delta > 0.0
                    && q.is_finite()
                    && *q > 0.0,
                "need c > 0, delta > 0, q > 0",
            ),
            RateFunction::ExpDecay { c, rate, q } => ok(
                c.is_finite()
                    && *c > 0.0
                    && rate.is_finite()
                    && *rate > 0.0
                    && q.is_finite()
                    && *q > 0.0,
                "need c > 0, rate > 0, q > 0",
            ),
            RateFunction::LogPower { d0, d, r } => ok(
                d0.is_finite()
                    && *d0 >= 0.0
                    && d.is_finite()
                    && *d >= 0.0
                    && r.is_finite()
                    && *r > 0.0,
                "need d0 >= 0, d >= 0, r > 0",
            ),
            RateFunction::Hinge { c, s0 } => {
                ok(c.is_finite() && *c >= 0.0 && s0.is_finite() && *s0 > 0.0, "need c >= 0, s0 > 0")
            }
            RateFunction::ZeroBeyond { s0, inner } => {
                ok(s0.is_finite() && *s0 > 0.0, "need s0 > 0")?;
                inner.validate()
            }
            RateFunction::Min { a, b } => {
                a.validate()?;
                b.validate()
            }
            RateFunction::Table { .. } => Ok(()),
        }
    }

    /// Total evaluation. Defined for s > 0; s <= 0 (or NaN) returns the
    /// monotone extension `+inf`. Overflow maps to `+inf`.
    pub fn eval_ext(&self, s: f64) -> ExtReal {
        if !(s > 0.0) {
            return ExtReal::PosInf;
        }
        match self {
            RateFunction::Constant { c } => ExtReal::from_f64(*c),
            RateFunction::Power { c, q } => ExtReal::from_f64(c * s.powf(-q)),
            RateFunction::ExpPower { c, delta, q } => {
                ExtReal::from_f64(c * (delta * s.powf(-q)).exp())
            }
            RateFunction::ExpDecay { c, rate, q } => {
                ExtReal::from_f64(c * (-rate * s.powf(*q)).exp())
            }
            RateFunction::LogPower { d0, d, r } => {
                let l = (1.0 / s).ln().max(0.0);
                ExtReal::from_f64(d0 + d * l.powf(*r))
            }
            RateFunction::Hinge { c, s0 } => ExtReal::finite(c * (1.0 - s / s0).max(0.0)),
            RateFunction::ZeroBeyond { s0, inner } => {
                if s >= *s0 {
                    ExtReal::finite(0.0)
                } else {
                    inner.eval_ext(s)
                }
            }
            RateFunction::Min { a, b } => a.eval_ext(s).min(b.eval_ext(s)),
            RateFunction::Table { points } => ExtReal::finite(points.eval(s)),
        }
    }

    /// Checked evaluation: errors on s <= 0 and on infinite values.
    pub fn eval(&self, s: f64) -> Result<f64> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::numeric(format!("rate function evaluated at s = {s}")));
        }
        match self.eval_ext(s) {
            ExtReal::Finite(v) => Ok(v),
            ExtReal::PosInf => {
                Err(Error::numeric(format!("rate function {self} is infinite at s = {s}")))
            }
        }
    }

    /// Generalized inverse `inf { s > 0 : f(s) <= t }`. Returns `+inf` when
    /// the level is never reached and 0 when it is met arbitrarily close to 0.
    pub fn generalized_inverse(&self, t: f64) -> ExtReal {
        if t.is_nan() {
            return ExtReal::PosInf;
        }
        match self {
            RateFunction::Constant { c } => {
                if t >= *c {
                    ExtReal::finite(0.0)
                } else {
                    ExtReal::PosInf
                }
            }
            RateFunction::Power { c, q } => {
                if t > 0.0 {
                    ExtReal::from_f64((c / t).powf(1.0 / q))
                } else {
                    ExtReal::PosInf
                }
            }
            RateFunction::ExpPower { c, delta, q } => {
                // c e^{delta s^-q} <= t  <=>  s >= (delta / ln(t/c))^{1/q}
                if t > *c {
                    ExtReal::from_f64((delta / (t / c).ln()).powf(1.0 / q))
                } else {
                    ExtReal::PosInf
                }
            }
            RateFunction::ExpDecay { c, rate, q } => {
                if t >= *c {
                    ExtReal::finite(0.0)
                } else if t <= 0.0 {
                    ExtReal::PosInf
                } else {
                    ExtReal::from_f64(((c / t).ln() / rate).powf(1.0 / q))
                }
            }
            RateFunction::LogPower { d0, d, r } => {
                if t < *d0 {
                    ExtReal::PosInf
                } else if *d == 0.0 {
                    ExtReal::finite(0.0)
                } else {
                    ExtReal::from_f64((-((t - d0) / d).powf(1.0 / r)).exp())
                }
            }
            RateFunction::Hinge { c, s0 } => {
                if t >= *c {
                    ExtReal::finite(0.0)
                } else if t < 0.0 {
                    ExtReal::PosInf
                } else {
                    ExtReal::finite(s0 * (1.0 - t / c))
                }
            }
            RateFunction::ZeroBeyond { s0, inner } => {
                if t < 0.0 {
                    ExtReal::PosInf
                } else {
                    ExtReal::finite(*s0).min(inner.generalized_inverse(t))
                }
            }
            RateFunction::Min { a, b } => {
                // min(a,b)(s) <= t iff a(s) <= t or b(s) <= t; the inf of the
                // union is the smaller of the two infima.
                a.generalized_inverse(t).min(b.generalized_inverse(t))
            }
            RateFunction::Table { points } => points.generalized_inverse(t),
        }
    }

    /// Parse from JSON and validate.
    pub fn from_json(text: &str) -> Result<Self> {
        let f: RateFunction = serde_json::from_str(text)?;
        f.validate()?;
        Ok(f)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

impl std::fmt::Display for RateFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RateFunction::Constant { c } => write!(f, "constant({c})"),
            RateFunction::Power { c, q } => write!(f, "power(c={c}, q={q})"),
            RateFunction::ExpPower { c, delta, q } => {
                write!(f, "exp_power(c={c}, delta={delta}, q={q})")
            }
            RateFunction::ExpDecay { c, rate, q } => {
                write!(f, "exp_decay(c={c}, rate={rate}, q={q})")
            }
            RateFunction::LogPower { d0, d, r } => write!(f, "log_power(d0={d0}, d={d}, r={r})"),
            RateFunction::Hinge { c, s0 } => write!(f, "hinge(c={c}, s0={s0})"),
            RateFunction::ZeroBeyond { s0, inner } => write!(f, "zero_beyond(s0={s0}, {inner})"),
            RateFunction::Min { a, b } => write!(f, "min({a}, {b})"),
            RateFunction::Table { points } => write!(f, "table({} pts)", points.len()),
        }
    }
}

/// Strictly increasing abscissae with non-increasing values. Construction
/// repairs sub-tolerance monotonicity violations (running minimum) and
/// rejects anything worse. Interpolation is linear in log-log coordinates so
/// power laws are represented exactly; segments touching zero fall back to
/// linear interpolation. Evaluation holds the boundary values outside the
/// tabulated range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct MonotoneTable {
    s: Vec<f64>,
    y: Vec<f64>,
    repaired: bool,
}

const TABLE_REPAIR_REL: f64 = 1e-9;

impl MonotoneTable {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::model("table needs at least 2 points"));
        }
        let mut s = Vec::with_capacity(points.len());
        let mut y = Vec::with_capacity(points.len());
        for &(si, yi) in &points {
            if !(si.is_finite() && si > 0.0) {
                return Err(Error::model(format!("table abscissa {si} must be finite and > 0")));
            }
            if !(yi.is_finite() && yi >= 0.0) {
                return Err(Error::model(format!("table value {yi} must be finite and >= 0")));
            }
            if let Some(&prev) = s.last() {
                if si <= prev {
                    return Err(Error::model("table abscissae must be strictly increasing"));
                }
            }
            s.push(si);
            y.push(yi);
        }
        let mut repaired = false;
        let mut run = y[0];
        for v in y.iter_mut() {
            if *v > run {
                if *v - run > TABLE_REPAIR_REL * run.abs().max(1e-300) {
                    return Err(Error::model(format!(
                        "table values increase from {run} to {v}: not a rate function"
                    )));
                }
                *v = run;
                repaired = true;
            }
            run = *v;
        }
        Ok(MonotoneTable { s, y, repaired })
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Whether construction had to nudge values to restore monotonicity.
    pub fn was_repaired(&self) -> bool {
        self.repaired
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.s.len();
        if x <= self.s[0] {
            return self.y[0];
        }
        if x >= self.s[n - 1] {
            return self.y[n - 1];
        }
        let i = match self.s.binary_search_by(|v| v.partial_cmp(&x).expect("finite")) {
            Ok(k) => return self.y[k],
            Err(k) => k - 1,
        };
        let (s0, s1, y0, y1) = (self.s[i], self.s[i + 1], self.y[i], self.y[i + 1]);
        if y0 > 0.0 && y1 > 0.0 {
            let w = (x.ln() - s0.ln()) / (s1.ln() - s0.ln());
            (y0.ln() + w * (y1.ln() - y0.ln())).exp()
        } else {
            let w = (x - s0) / (s1 - s0);
            y0 + w * (y1 - y0)
        }
    }

    pub fn generalized_inverse(&self, t: f64) -> ExtReal {
        let n = self.s.len();
        if t >= self.y[0] {
            // Holding y[0] to the left means the level is met down to 0+.
            return ExtReal::finite(0.0);
        }
        if self.y[n - 1] > t {
            return ExtReal::PosInf;
        }
        // Segment with y[i] > t >= y[i+1]; invert the interpolation there in
        // closed form (exact, so integrating the inverse stays smooth).
        let i = self.y.partition_point(|&v| v > t);
        let (s0, s1, y0, y1) = (self.s[i - 1], self.s[i], self.y[i - 1], self.y[i]);
        if y0 > 0.0 && y1 > 0.0 {
            // Nearly flat segments can collide in log space (ln(y0) == ln(y1)
            // as floats even though y0 > y1), making w = 0/0; the linear form
            // below stays exact there.
            let w = (t.ln() - y0.ln()) / (y1.ln() - y0.ln());
            if w.is_finite() {
                return ExtReal::finite((s0.ln() + w * (s1.ln() - s0.ln())).exp());
            }
        }
        let w = (y0 - t) / (y0 - y1);
        ExtReal::finite(s0 + w * (s1 - s0))
    }
}

impl TryFrom<Vec<(f64, f64)>> for MonotoneTable {
    type Error = Error;

    fn try_from(points: Vec<(f64, f64)>) -> Result<Self> {
        MonotoneTable::new(points)
    }
}

impl From<MonotoneTable> for Vec<(f64, f64)> {
    fn from(t: MonotoneTable) -> Self {
        t.s.iter().copied().zip(t.y.iter().copied()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::log_grid;
    use proptest::prelude::*;

    #[test]
    fn generalized_inverse_of_reciprocal_envelope() {
        // inf { s : 1/(16 s) <= 2 } = 1/32.
        let f = RateFunction::power(1.0 / 16.0, 1.0);
        assert_eq!(f.generalized_inverse(2.0), ExtReal::finite(1.0 / 32.0));
        assert_eq!(f.generalized_inverse(-1.0), ExtReal::PosInf);
    }

    #[test]
    fn table_inverse_survives_log_collisions() {
        // Adjacent huge levels whose logs round to the same float: the
        // inverse must fall back to the exact linear form, not emit NaN.
        let y0 = 1e16 * (1.0 + 2.0 * f64::EPSILON);
        let t = MonotoneTable::new(vec![(1.0, y0), (2.0, 1e16), (3.0, 1.0)]).unwrap();
        assert_eq!(y0.ln(), 1e16f64.ln(), "collision premise");
        let inv = t.generalized_inverse(1e16).as_finite().unwrap();
        assert!((1.0..=2.0).contains(&inv), "{inv}");
        assert!((t.generalized_inverse(y0 * 0.9999).as_finite().unwrap() - 2.0).abs() <= 1.0);
    }

    #[test]
    fn generalized_inverse_closed_forms() {
        let c = RateFunction::constant(3.0);
        assert_eq!(c.generalized_inverse(3.0), ExtReal::finite(0.0));
        assert_eq!(c.generalized_inverse(2.9), ExtReal::PosInf);

        let e = RateFunction::ExpPower { c: 0.5, delta: 2.0, q: 1.5 };
        // 0.5 e^{2 s^-1.5} <= 4  =>  s = (2/ln 8)^{2/3}
        let expect = (2.0 / 8.0f64.ln()).powf(1.0 / 1.5);
        match e.generalized_inverse(4.0) {
            ExtReal::Finite(v) => assert!((v - expect).abs() < 1e-14),
            ExtReal::PosInf => panic!("finite expected"),
        }
        assert_eq!(e.generalized_inverse(0.5), ExtReal::PosInf);

        let d = RateFunction::ExpDecay { c: 1.0, rate: 2.0, q: 1.0 };
        // e^{-2 t} <= 0.1  =>  t = ln(10)/2
        match d.generalized_inverse(0.1) {
            ExtReal::Finite(v) => assert!((v - 10.0f64.ln() / 2.0).abs() < 1e-14),
            ExtReal::PosInf => panic!("finite expected"),
        }

        let l = RateFunction::LogPower { d0: 1.0, d: 2.0, r: 2.0 };
        // 1 + 2 ln(1/s)^2 <= 9  =>  s = e^-2
        match l.generalized_inverse(9.0) {
            ExtReal::Finite(v) => assert!((v - (-2.0f64).exp()).abs() < 1e-14),
            ExtReal::PosInf => panic!("finite expected"),
        }
        assert_eq!(l.generalized_inverse(0.5), ExtReal::PosInf);

        let h = RateFunction::Hinge { c: 1.0, s0: 1.0 };
        // (1-s)_+ <= t  =>  s = 1 - t
        assert_eq!(h.generalized_inverse(0.25), ExtReal::finite(0.75));
        assert_eq!(h.generalized_inverse(1.5), ExtReal::finite(0.0));
        assert_eq!(h.generalized_inverse(-0.1), ExtReal::PosInf);

        let z = RateFunction::ZeroBeyond {
            s0: 1.0,
            inner: Box::new(RateFunction::constant(1.0)),
        };
        assert_eq!(z.generalized_inverse(0.5), ExtReal::finite(1.0));
        assert_eq!(z.generalized_inverse(1.0), ExtReal::finite(0.0));
    }

    #[test]
    fn min_composite_inverse_takes_smaller_branch() {
        let f = RateFunction::min_of(
            RateFunction::power(1.0, 2.0),
            RateFunction::constant(0.5),
        );
        // constant branch reaches 0.5 everywhere -> inf is 0
        assert_eq!(f.generalized_inverse(0.6), ExtReal::finite(0.0));
        // below the constant, only the power branch counts: s = (1/0.1)^{1/2}... 1/s^2 <= 0.1 => s >= sqrt(10)
        match f.generalized_inverse(0.1) {
            ExtReal::Finite(v) => assert!((v - 10.0f64.sqrt()).abs() < 1e-12),
            ExtReal::PosInf => panic!("finite expected"),
        }
    }

    #[test]
    fn table_interpolates_power_laws_exactly() {
        let grid = log_grid(1e-3, 1e1, 9);
        let pts: Vec<(f64, f64)> = grid.iter().map(|&s| (s, 0.7 * s.powf(-1.3))).collect();
        let t = MonotoneTable::new(pts).unwrap();
        assert!(!t.was_repaired());
        for s in log_grid(2e-3, 5.0, 17) {
            let exact = 0.7 * s.powf(-1.3);
            assert!((t.eval(s) - exact).abs() < 1e-10 * exact, "s={s}");
        }
        // hold extrapolation
        assert_eq!(t.eval(grid[0] * 0.01), t.eval(grid[0]));
        assert_eq!(t.eval(grid[8] * 10.0), t.eval(grid[8]));
    }

    #[test]
    fn table_inverse_round_trip() {
        let pts: Vec<(f64, f64)> = log_grid(1e-3, 1e1, 33)
            .into_iter()
            .map(|s| (s, 2.0 * s.powf(-0.7)))
            .collect();
        let t = RateFunction::Table { points: MonotoneTable::new(pts).unwrap() };
        let target = 5.0;
        match t.generalized_inverse(target) {
            ExtReal::Finite(s) => {
                assert!((t.eval(s).unwrap() - target).abs() < 1e-6 * target);
            }
            ExtReal::PosInf => panic!("finite expected"),
        }
        // below the right-edge value the level is never met (hold semantics)
        assert_eq!(t.generalized_inverse(1e-9), ExtReal::PosInf);
        // above the left-edge value it is met immediately
        assert_eq!(t.generalized_inverse(1e9), ExtReal::finite(0.0));
    }

    #[test]
    fn table_repairs_small_wiggles_and_rejects_large_ones() {
        let wiggle = MonotoneTable::new(vec![
            (0.1, 1.0),
            (0.2, 1.0 + 1e-12),
            (0.4, 0.5),
        ])
        .unwrap();
        assert!(wiggle.was_repaired());
        assert!(wiggle.eval(0.2) <= 1.0);

        assert!(MonotoneTable::new(vec![(0.1, 1.0), (0.2, 1.1), (0.4, 0.5)]).is_err());
        assert!(MonotoneTable::new(vec![(0.1, 1.0)]).is_err());
        assert!(MonotoneTable::new(vec![(0.0, 1.0), (0.2, 0.5)]).is_err());
        assert!(MonotoneTable::new(vec![(0.3, 1.0), (0.2, 0.5)]).is_err());
    }

    #[test]
    fn table_with_zero_tail_uses_linear_segment() {
        let t = MonotoneTable::new(vec![(1.0, 2.0), (2.0, 0.0), (3.0, 0.0)]).unwrap();
        assert!((t.eval(1.5) - 1.0).abs() < 1e-14);
        assert_eq!(t.eval(2.5), 0.0);
    }

    #[test]
    fn validation_rejects_bad_parameters() {
        assert!(RateFunction::Power { c: -1.0, q: 1.0 }.validate().is_err());
        assert!(RateFunction::Power { c: 1.0, q: 0.0 }.validate().is_err());
        assert!(RateFunction::Constant { c: f64::NAN }.validate().is_err());
        assert!(RateFunction::Hinge { c: 1.0, s0: 0.0 }.validate().is_err());
        assert!(RateFunction::min_of(
            RateFunction::power(1.0, 1.0),
            RateFunction::Power { c: 0.0, q: 1.0 },
        )
        .validate()
        .is_err());
        assert!(RateFunction::power(0.25, 2.0).validate().is_ok());
    }

    #[test]
    fn eval_rejects_nonpositive_argument_and_infinite_value() {
        let f = RateFunction::ExpPower { c: 1.0, delta: 1.0, q: 1.0 };
        assert!(f.eval(0.0).is_err());
        assert!(f.eval(-1.0).is_err());
        assert!(f.eval(1e-300).is_err()); // overflows to +inf
        assert!(f.eval(1.0).is_ok());
        assert_eq!(f.eval_ext(1e-300), ExtReal::PosInf);
    }

    #[test]
    fn json_round_trip_composite() {
        let f = RateFunction::min_of(
            RateFunction::power(1.0 / 16.0, 1.0),
            RateFunction::ZeroBeyond {
                s0: 0.25,
                inner: Box::new(RateFunction::Hinge { c: 2.0, s0: 0.5 }),
            },
        );
        let js = f.to_json().unwrap();
        let back = RateFunction::from_json(&js).unwrap();
        assert_eq!(f, back);

        let table = RateFunction::Table {
            points: MonotoneTable::new(vec![(0.1, 3.0), (1.0, 1.0), (10.0, 0.2)]).unwrap(),
        };
        let js = table.to_json().unwrap();
        assert!(js.contains("\"family\":\"table\""));
        assert_eq!(RateFunction::from_json(&js).unwrap(), table);
    }

    #[test]
    fn from_json_validates() {
        let bad = r#"{"family":"power","c":-2.0,"q":1.0}"#;
        assert!(RateFunction::from_json(bad).is_err());
        let good = r#"{"family":"power","c":0.0625,"q":1.0}"#;
        let f = RateFunction::from_json(good).unwrap();
        assert_eq!(f, RateFunction::power(0.0625, 1.0));
    }

    fn arb_ratefn() -> impl Strategy<Value = RateFunction> {
        let leaf = prop_oneof![
            (0.0f64..5.0).prop_map(|c| RateFunction::Constant { c }),
            (1e-3f64..5.0, 0.1f64..3.0).prop_map(|(c, q)| RateFunction::Power { c, q }),
            (1e-2f64..2.0, 1e-2f64..2.0, 0.2f64..1.5)
                .prop_map(|(c, rate, q)| RateFunction::ExpDecay { c, rate, q }),
            (0.0f64..2.0, 0.0f64..3.0, 0.3f64..2.5)
                .prop_map(|(d0, d, r)| RateFunction::LogPower { d0, d, r }),
            (0.0f64..4.0, 1e-2f64..2.0).prop_map(|(c, s0)| RateFunction::Hinge { c, s0 }),
        ];
        leaf.prop_recursive(2, 8, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| RateFunction::min_of(a, b)),
                (1e-2f64..2.0, inner).prop_map(|(s0, f)| RateFunction::ZeroBeyond {
                    s0,
                    inner: Box::new(f),
                }),
            ]
        })
    }

    proptest! {
        #[test]
        fn families_are_nonincreasing(f in arb_ratefn(), lo in 1e-6f64..1e-2) {
            prop_assert!(f.validate().is_ok());
            let grid = log_grid(lo, lo * 1e4, 48);
            for w in grid.windows(2) {
                let a = f.eval_ext(w[0]);
                let b = f.eval_ext(w[1]);
                // b <= a up to relative slack
                let slack = 1e-9 * a.to_f64().min(1e300).max(1.0);
                prop_assert!(b.to_f64() <= a.to_f64() + slack, "{f} at {} -> {}", w[0], w[1]);
            }
        }

        #[test]
        fn generalized_inverse_galois(f in arb_ratefn(), t in 0.0f64..6.0, s in 1e-6f64..10.0) {
            // forward: beta(geninv(t) + eps) <= t
            if let ExtReal::Finite(star) = f.generalized_inverse(t) {
                if star > 0.0 {
                    let probe = f.eval_ext(star * (1.0 + 1e-6) + 1e-12);
                    prop_assert!(
                        probe.to_f64() <= t + 1e-6 * t.abs().max(1.0),
                        "{f}: geninv({t}) = {star}, eval = {probe:?}"
                    );
                }
            }
            // backward: geninv(beta(s)) <= s
            if let ExtReal::Finite(v) = f.eval_ext(s) {
                match f.generalized_inverse(v) {
                    ExtReal::Finite(back) => {
                        prop_assert!(back <= s * (1.0 + 1e-6) + 1e-12, "{f}: s={s}, v={v}, back={back}");
                    }
                    ExtReal::PosInf => prop_assert!(false, "{f}: level {v} attained at {s} but inverse is +inf"),
                }
            }
        }
    }
}
