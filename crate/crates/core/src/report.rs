//! Named residual checks and the serializable verification report.

use std::fmt::Write as _;

use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

/// Floats are written with 17 significant digits so reports are
/// byte-stable across runs; non-finite values become `null`.
fn fixed_float<S: Serializer>(x: &f64, ser: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        let raw = RawValue::from_string(format!("{x:.16e}")).map_err(serde::ser::Error::custom)?;
        raw.serialize(ser)
    } else {
        ser.serialize_none()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// passes when `residual <= tol`
    AtMost,
    /// passes when `residual >= tol` (negative controls)
    AtLeast,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    #[serde(rename = "paper_label")]
    pub label: String,
    #[serde(serialize_with = "fixed_float")]
    pub residual: f64,
    #[serde(serialize_with = "fixed_float")]
    pub tol: f64,
    pub pass: bool,
    pub asserted: bool,
    #[serde(skip_serializing_if = "is_at_most")]
    pub relation: Relation,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

fn is_at_most(r: &Relation) -> bool {
    *r == Relation::AtMost
}

impl Check {
    pub fn at_most(name: impl Into<String>, label: impl Into<String>, residual: f64, tol: f64) -> Self {
        Check {
            name: name.into(),
            label: label.into(),
            residual,
            tol,
            pass: residual <= tol,
            asserted: true,
            relation: Relation::AtMost,
            note: None,
        }
    }

    pub fn at_least(name: impl Into<String>, label: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check {
            relation: Relation::AtLeast,
            pass: value >= threshold,
            ..Check::at_most(name, label, value, threshold)
        }
    }

    /// Recorded for inspection; never affects the overall verdict.
    pub fn report_only(name: impl Into<String>, label: impl Into<String>, value: f64, tol: f64) -> Self {
        Check {
            asserted: false,
            ..Check::at_most(name, label, value, tol)
        }
    }

    /// A check whose computation refused to run (e.g. an ill-conditioned solve).
    pub fn refused(name: impl Into<String>, label: impl Into<String>, tol: f64, why: impl Into<String>) -> Self {
        Check {
            pass: false,
            asserted: false,
            note: Some(why.into()),
            ..Check::at_most(name, label, f64::NAN, tol)
        }
    }

    /// An asserted check whose verdict is decided by the caller.
    pub fn verdict(name: impl Into<String>, label: impl Into<String>, residual: f64, tol: f64, pass: bool) -> Self {
        Check {
            pass,
            ..Check::at_most(name, label, residual, tol)
        }
    }

    /// An asserted check that could not be evaluated.
    pub fn failed(name: impl Into<String>, label: impl Into<String>, why: impl Into<String>) -> Self {
        Check {
            pass: false,
            note: Some(why.into()),
            ..Check::at_most(name, label, f64::NAN, f64::NAN)
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub config: serde_json::Value,
    pub checks: Vec<Check>,
    pub pass: bool,
    pub runtime_ms: u64,
}

impl Default for VerificationReport {
    fn default() -> Self {
        VerificationReport::new(serde_json::Value::Null)
    }
}

impl VerificationReport {
    pub fn new(config: serde_json::Value) -> Self {
        VerificationReport {
            config,
            checks: Vec::new(),
            pass: true,
            runtime_ms: 0,
        }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
        self.refresh();
    }

    pub fn extend(&mut self, other: VerificationReport) {
        self.checks.extend(other.checks);
        self.refresh();
    }

    fn refresh(&mut self) {
        self.pass = self.checks.iter().filter(|c| c.asserted).all(|c| c.pass);
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let verdict = match (c.asserted, c.pass) {
                (true, true) => "PASS",
                (true, false) => "FAIL",
                (false, _) => "INFO",
            };
            let op = match c.relation {
                Relation::AtMost => "<=",
                Relation::AtLeast => ">=",
            };
            let _ = write!(
                out,
                "[{verdict}] {:<44} {:>12.4e} {op} {:<9.1e} {}",
                c.name, c.residual, c.tol, c.label
            );
            if let Some(note) = &c.note {
                let _ = write!(out, "  ({note})");
            }
            out.push('\n');
        }
        let _ = writeln!(
            out,
            "overall: {} ({} checks, {} ms)",
            if self.pass { "PASS" } else { "FAIL" },
            self.checks.len(),
            self.runtime_ms
        );
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_only_checks_do_not_affect_verdict() {
        let mut r = VerificationReport::default();
        r.push(Check::at_most("ok", "x", 1e-13, 1e-12));
        r.push(Check::report_only("info", "y", 5.0, 1e-12));
        r.push(Check::refused("gram", "z", 1e-10, "ill-conditioned"));
        assert!(r.pass);
        r.push(Check::at_most("bad", "w", 1e-3, 1e-12));
        assert!(!r.pass);
    }

    #[test]
    fn negative_controls_pass_when_large() {
        assert!(Check::at_least("neg", "n", 0.5, 1e-6).pass);
        assert!(!Check::at_least("neg", "n", 1e-9, 1e-6).pass);
        assert!(!Check::at_most("nan", "n", f64::NAN, 1.0).pass);
    }

    #[test]
    fn floats_use_seventeen_digits_and_null_for_nan() {
        let mut r = VerificationReport::default();
        r.push(Check::at_most("a", "l", 0.1, 1e-10));
        r.push(Check::refused("b", "l", 1e-10, "why"));
        let json = r.to_json();
        assert!(json.contains("\"residual\": 1.0000000000000001e-1"), "{json}");
        assert!(json.contains("\"residual\": null"));
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["checks"][0]["paper_label"], "l");
        assert_eq!(v["checks"][0]["tol"].as_f64(), Some(1e-10));
    }
}
