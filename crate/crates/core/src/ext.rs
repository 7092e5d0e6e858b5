//! Extended non-negative reals: finite values plus an explicit `+inf` state.
//!
//! Generalized inverses of decreasing functions and truncated-series values
//! are honestly `+inf` on parts of their domain. The sentinel is an enum
//! variant rather than `f64::INFINITY` so that tables and serialized output
//! never carry float infinities.

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum ExtReal {
    Finite(f64),
    PosInf,
}

impl ExtReal {
    pub fn finite(v: f64) -> Self {
        debug_assert!(v.is_finite(), "ExtReal::finite given non-finite {v}");
        ExtReal::Finite(v)
    }

    /// Classify a raw float: finite -> Finite, positive infinity / overflow
    /// -> PosInf. NaN and negatives are the caller's bug.
    pub fn from_f64(v: f64) -> Self {
        if v.is_finite() {
            ExtReal::Finite(v)
        } else {
            debug_assert!(v == f64::INFINITY, "ExtReal::from_f64 given {v}");
            ExtReal::PosInf
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn is_pos_inf(self) -> bool {
        matches!(self, ExtReal::PosInf)
    }

    /// Finite value, if any.
    pub fn as_finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            ExtReal::PosInf => None,
        }
    }

    /// Collapse to a float, mapping the sentinel to `f64::INFINITY`.
    /// For arithmetic only; never store or serialize the result.
    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::Finite(v) => v,
            ExtReal::PosInf => f64::INFINITY,
        }
    }

    pub fn min(self, other: ExtReal) -> ExtReal {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a.min(b)),
            (ExtReal::PosInf, x) | (x, ExtReal::PosInf) => x,
        }
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (ExtReal::PosInf, ExtReal::PosInf) => Some(Ordering::Equal),
            (ExtReal::PosInf, ExtReal::Finite(_)) => Some(Ordering::Greater),
            (ExtReal::Finite(_), ExtReal::PosInf) => Some(Ordering::Less),
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a.partial_cmp(b),
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(v) => write!(f, "{v}"),
            ExtReal::PosInf => write!(f, "+inf"),
        }
    }
}

impl From<f64> for ExtReal {
    fn from(v: f64) -> Self {
        ExtReal::from_f64(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_and_min() {
        assert!(ExtReal::Finite(3.0) < ExtReal::PosInf);
        assert!(ExtReal::PosInf > ExtReal::Finite(1e308));
        assert_eq!(
            ExtReal::Finite(2.0).min(ExtReal::PosInf),
            ExtReal::Finite(2.0)
        );
        assert_eq!(ExtReal::PosInf.min(ExtReal::PosInf), ExtReal::PosInf);
        assert_eq!(
            ExtReal::Finite(2.0).min(ExtReal::Finite(1.0)),
            ExtReal::Finite(1.0)
        );
    }

    #[test]
    fn serde_roundtrip_has_no_float_infinity() {
        let s = serde_json::to_string(&ExtReal::PosInf).unwrap();
        assert!(!s.contains("inf") || s.contains("pos_inf"));
        let back: ExtReal = serde_json::from_str(&s).unwrap();
        assert_eq!(back, ExtReal::PosInf);
    }
}
