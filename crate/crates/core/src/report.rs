//! Report type shared by quote validation, calendar checks and coupling
//! feasibility checks.

use serde::{Deserialize, Serialize};

/// Condition that a report entry refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ViolationKind {
    /// Call prices increase in strike.
    NotDecreasing,
    /// Successive slopes decrease (butterfly arbitrage).
    ConvexityViolation,
    /// A strike-0 quote differs from the spot price.
    SpotMismatch,
    /// The first slope is steeper than -1.
    SlopeBelowMinusOne,
    /// The curve does not reach zero at the declared terminal strike.
    NonZeroTail,
    /// The declared terminal strike lies inside the quoted range.
    InvalidTerminalStrike,
    /// A long-maturity strike is not quoted at the short maturity.
    StrikeSetMismatch,
    /// The short-maturity call price exceeds the long-maturity one.
    CalendarArbitrage,
    /// The implied means of two maturities differ.
    MeanMismatch,
    /// Row sums of a coupling differ from the first margin.
    FirstMarginMismatch,
    /// Column sums of a coupling differ from the second margin.
    SecondMarginMismatch,
    /// Conditional means of a coupling differ from the source atoms.
    MartingaleViolation,
}

/// Non-fatal observation attached to a report.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WarningKind {
    /// The implied mean differs from the spot price.
    MeanDiffersFromSpot,
    /// The last quote is nonzero and no terminal strike was given; the
    /// remaining mass is placed on the last quoted strike.
    NonZeroTail,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub condition: ViolationKind,
    /// Strike (or atom) where the condition fails.
    pub location: f64,
    pub measured: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Warning {
    pub condition: WarningKind,
    pub location: f64,
    pub measured: f64,
}

/// Outcome of a check. `passed` is true exactly when `violations` is empty.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub violations: Vec<Violation>,
    pub warnings: Vec<Warning>,
}

impl ValidationReport {
    pub fn new() -> Self {
        Self {
            passed: true,
            violations: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn violation(&mut self, condition: ViolationKind, location: f64, measured: f64) {
        self.violations.push(Violation {
            condition,
            location,
            measured,
        });
        self.passed = false;
    }

    pub fn warn(&mut self, condition: WarningKind, location: f64, measured: f64) {
        self.warnings.push(Warning {
            condition,
            location,
            measured,
        });
    }

    /// Sorts entries by location; called before a report is handed out.
    pub(crate) fn finish(mut self) -> Self {
        self.violations
            .sort_by(|a, b| a.location.total_cmp(&b.location));
        self.warnings.sort_by(|a, b| a.location.total_cmp(&b.location));
        self.passed = self.violations.is_empty();
        self
    }

    /// Merges another report into this one.
    pub fn absorb(&mut self, other: ValidationReport) {
        self.violations.extend(other.violations);
        self.warnings.extend(other.warnings);
        self.passed = self.violations.is_empty();
    }

    pub fn has(&self, condition: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.condition == condition)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn passed_tracks_violations() {
        let mut r = ValidationReport::new();
        assert!(r.passed);
        r.warn(WarningKind::MeanDiffersFromSpot, 0.0, 1.0);
        assert!(r.passed);
        r.violation(ViolationKind::ConvexityViolation, 95.0, -0.0025);
        r.violation(ViolationKind::NotDecreasing, 90.0, 0.1);
        let r = r.finish();
        assert!(!r.passed);
        assert_eq!(r.violations[0].location, 90.0);
    }

    #[test]
    fn json_field_names_are_stable() {
        let mut r = ValidationReport::new();
        r.violation(ViolationKind::ConvexityViolation, 95.0, -0.0025);
        let v: serde_json::Value = serde_json::from_str(&r.finish().to_json()).unwrap();
        assert_eq!(v["passed"], false);
        assert_eq!(v["violations"][0]["condition"], "ConvexityViolation");
        assert_eq!(v["violations"][0]["location"], 95.0);
    }
}
