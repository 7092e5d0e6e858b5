//! Bound reports: the common currency of every explicit Poincare-constant
//! pipeline. A report carries the bound value (possibly `+inf`), the named
//! intermediate quantities that produced it, quadrature / Monte Carlo error
//! estimates, the status of each hypothesis the bound rests on, and slots for
//! ground-truth comparisons. Reports serialize to JSON and to a one-row CSV.
//!
//! Two conventions keep reports honest:
//!
//! * an infeasible or divergent bound is `+inf` with a reason string, never a
//!   thrown error — errors are reserved for malformed inputs;
//! * validity comparisons use `value - quad_error`, so a bound is only
//!   claimed to dominate a reference when the quadrature slack cannot be
//!   responsible.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::ext::ExtReal;

/// Status of one hypothesis behind a bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HypothesisStatus {
    /// Checked numerically and found to hold.
    Verified,
    /// Claimed by the caller, not checked here.
    Attested,
    /// A numerical probe failed to confirm it; the bound is unsupported.
    Unverified,
    /// Checked and found to fail; the bound is reported as `+inf`.
    Violated,
}

impl fmt::Display for HypothesisStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            HypothesisStatus::Verified => "verified",
            HypothesisStatus::Attested => "attested",
            HypothesisStatus::Unverified => "unverified",
            HypothesisStatus::Violated => "violated",
        };
        f.write_str(s)
    }
}

/// One explicit bound together with everything needed to audit it.
///
/// Maps are `BTreeMap` so serialization order is deterministic.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundReport {
    /// Which bound this is (e.g. `cp_bound_milman`).
    pub name: String,
    /// The bound itself; `+inf` means "no conclusion under these inputs".
    pub value: ExtReal,
    /// Required whenever `value` is `+inf`: which hypothesis failed or which
    /// integral diverged.
    pub reason: Option<String>,
    /// Digest of the inputs the bound was computed from.
    pub inputs: BTreeMap<String, String>,
    /// Named intermediate quantities (schedule constants, integrals, ...).
    pub intermediates: BTreeMap<String, f64>,
    /// Accumulated quadrature / Monte Carlo error estimate for `value`.
    pub quad_error: f64,
    /// Reference values filled in by the caller (true spectral constant,
    /// competing bounds) for side-by-side tables.
    pub comparisons: BTreeMap<String, f64>,
    /// Hypotheses the bound rests on and how far each was checked.
    pub hypotheses: BTreeMap<String, HypothesisStatus>,
    /// Free-form caveats, e.g. a universal constant that is configured
    /// rather than derived.
    pub flags: Vec<String>,
}

impl BoundReport {
    pub fn new(name: impl Into<String>) -> Self {
        BoundReport {
            name: name.into(),
            value: ExtReal::PosInf,
            reason: Some("not computed".into()),
            inputs: BTreeMap::new(),
            intermediates: BTreeMap::new(),
            quad_error: 0.0,
            comparisons: BTreeMap::new(),
            hypotheses: BTreeMap::new(),
            flags: Vec::new(),
        }
    }

    /// Record a finite value and clear any previous failure reason.
    pub fn set_finite(&mut self, value: f64) {
        self.value = ExtReal::from_f64(value);
        match self.value {
            ExtReal::Finite(_) => self.reason = None,
            // from_f64 maps overflow to +inf; keep the invariant that +inf
            // always explains itself.
            ExtReal::PosInf => self.reason = Some("value overflowed f64".into()),
        }
    }

    /// Record an infeasible/divergent outcome with its reason.
    pub fn set_infinite(&mut self, reason: impl Into<String>) {
        self.value = ExtReal::PosInf;
        self.reason = Some(reason.into());
    }

    pub fn input(&mut self, key: &str, value: impl fmt::Display) {
        self.inputs.insert(key.into(), value.to_string());
    }

    pub fn intermediate(&mut self, key: &str, value: f64) {
        self.intermediates.insert(key.into(), value);
    }

    pub fn comparison(&mut self, key: &str, value: f64) {
        self.comparisons.insert(key.into(), value);
    }

    pub fn hypothesis(&mut self, name: &str, status: HypothesisStatus) {
        self.hypotheses.insert(name.into(), status);
    }

    pub fn flag(&mut self, note: impl Into<String>) {
        let note = note.into();
        if !self.flags.contains(&note) {
            self.flags.push(note);
        }
    }

    pub fn add_quad_error(&mut self, err: f64) {
        self.quad_error += err.abs();
    }

    /// True when the bound concluded something (finite value).
    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
    }

    /// Lower edge of the bound once quadrature error is surrendered; this is
    /// what validity comparisons against a reference constant must use.
    pub fn value_lower(&self) -> ExtReal {
        match self.value {
            ExtReal::Finite(v) => ExtReal::finite(v - self.quad_error),
            ExtReal::PosInf => ExtReal::PosInf,
        }
    }

    /// Structural invariant: `+inf` must carry a reason, and a violated
    /// hypothesis must not coexist with a finite value.
    pub fn check(&self) -> Result<()> {
        if self.value.is_pos_inf() && self.reason.is_none() {
            return Err(crate::error::Error::model(format!(
                "report {} is infinite without a reason",
                self.name
            )));
        }
        let violated = self.hypotheses.values().any(|s| *s == HypothesisStatus::Violated);
        if violated && self.value.is_finite() {
            return Err(crate::error::Error::model(format!(
                "report {} claims a finite bound under a violated hypothesis",
                self.name
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Header + one data row. Map-valued fields are packed `k=v;k=v` inside
    /// a single quoted cell so rows from different bounds can be stacked
    /// into one table.
    pub fn to_csv(&self) -> String {
        format!("{}\n{}\n", Self::csv_header(), self.csv_row())
    }

    pub fn csv_header() -> &'static str {
        "name,value,quad_error,reason,inputs,intermediates,comparisons,hypotheses,flags"
    }

    pub fn csv_row(&self) -> String {
        let value = match self.value {
            ExtReal::Finite(v) => format!("{v:.11e}"),
            ExtReal::PosInf => "+inf".into(),
        };
        let inter = self
            .intermediates
            .iter()
            .map(|(k, v)| format!("{k}={v:.11e}"))
            .collect::<Vec<_>>()
            .join(";");
        let comps = self
            .comparisons
            .iter()
            .map(|(k, v)| format!("{k}={v:.11e}"))
            .collect::<Vec<_>>()
            .join(";");
        let hyps = self
            .hypotheses
            .iter()
            .map(|(k, s)| format!("{k}={s}"))
            .collect::<Vec<_>>()
            .join(";");
        let inputs = self
            .inputs
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(";");
        [
            csv_quote(&self.name),
            value,
            format!("{:.11e}", self.quad_error),
            csv_quote(self.reason.as_deref().unwrap_or("")),
            csv_quote(&inputs),
            csv_quote(&inter),
            csv_quote(&comps),
            csv_quote(&hyps),
            csv_quote(&self.flags.join(";")),
        ]
        .join(",")
    }
}

/// Quote a CSV cell when it contains a delimiter, quote or newline.
fn csv_quote(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_report() -> BoundReport {
        let mut r = BoundReport::new("cp_bound_milman");
        r.set_finite(6150.9);
        r.input("beta", "Constant { c: 1 }");
        r.intermediate("kappa", 59.2894);
        r.intermediate("m_beta", 1.0);
        r.add_quad_error(1e-9);
        r.comparison("spectral_cp", 1.0);
        r.hypothesis("log_concave", HypothesisStatus::Attested);
        r.flag("clip: inverse rate capped at 1");
        r
    }

    #[test]
    fn json_round_trip_preserves_everything() {
        let r = sample_report();
        let text = r.to_json().unwrap();
        let back = BoundReport::from_json(&text).unwrap();
        assert_eq!(back.name, r.name);
        assert_eq!(back.value, r.value);
        assert_eq!(back.intermediates, r.intermediates);
        assert_eq!(back.hypotheses, r.hypotheses);
        assert_eq!(back.flags, r.flags);
    }

    #[test]
    fn infinite_value_requires_a_reason() {
        let mut r = BoundReport::new("cp_bound_osc_schedule");
        r.set_infinite("schedule mass s0 >= 1/6");
        assert!(r.check().is_ok());
        r.reason = None;
        assert!(r.check().is_err());
    }

    #[test]
    fn violated_hypothesis_forbids_a_finite_value() {
        let mut r = sample_report();
        r.hypothesis("strict_convexity", HypothesisStatus::Violated);
        assert!(r.check().is_err());
        r.set_infinite("potential is not strictly convex");
        assert!(r.check().is_ok());
    }

    #[test]
    fn csv_is_one_row_with_stable_header() {
        let r = sample_report();
        let text = r.to_csv();
        let lines: Vec<&str> = text.trim_end().lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], BoundReport::csv_header());
        assert!(lines[1].starts_with("cp_bound_milman,6.15"));
        assert!(lines[1].contains("kappa=5.92894"));
        assert!(lines[1].contains("log_concave=attested"));
    }

    #[test]
    fn csv_quotes_cells_containing_delimiters() {
        let mut r = BoundReport::new("name,with,commas");
        r.set_infinite("reason \"quoted\", with comma");
        let row = r.csv_row();
        assert!(row.starts_with("\"name,with,commas\",+inf"));
        assert!(row.contains("\"reason \"\"quoted\"\", with comma\""));
    }

    #[test]
    fn value_lower_subtracts_the_error_budget() {
        let r = sample_report();
        match r.value_lower() {
            ExtReal::Finite(v) => assert!((v - (6150.9 - 1e-9)).abs() < 1e-12),
            ExtReal::PosInf => panic!("finite expected"),
        }
        let mut inf = BoundReport::new("x");
        inf.set_infinite("diverged");
        assert!(inf.value_lower().is_pos_inf());
    }

    #[test]
    fn overflowed_finite_value_becomes_explained_infinity() {
        let mut r = BoundReport::new("cp_bound_log_moment");
        r.set_finite(f64::INFINITY);
        assert!(r.value.is_pos_inf());
        assert!(r.reason.is_some());
        assert!(r.check().is_ok());
    }
}
