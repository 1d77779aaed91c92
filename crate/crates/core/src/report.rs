//! Machine-readable verdict reports.
//!
//! The structured form is a JSON document; the CSV form has one row per
//! report with the header [`CSV_HEADER`].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a report's margin decides its verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// Strict: `margin > epsilon`.
    MarginPositive,
    /// `margin >= 0`.
    MarginNonNegative,
    /// `margin <= 0`.
    MarginNonPositive,
}

impl Rule {
    pub fn holds(self, margin: f64, strict_epsilon: f64) -> bool {
        match self {
            Rule::MarginPositive => margin > strict_epsilon,
            Rule::MarginNonNegative => margin >= 0.0,
            Rule::MarginNonPositive => margin <= 0.0,
        }
    }
}

/// Both sides of an inequality, its signed margin and the verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropositionReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub rule: Rule,
    pub verdict: bool,
    pub intermediates: BTreeMap<String, f64>,
}

impl PropositionReport {
    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64, margin: f64, rule: Rule, strict_epsilon: f64) -> Self {
        PropositionReport {
            name: name.into(),
            lhs,
            rhs,
            margin,
            rule,
            verdict: rule.holds(margin, strict_epsilon),
            intermediates: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.intermediates.insert(key.to_string(), value);
        self
    }

    /// Same report under another name.
    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// True when every numeric field and the verdict agree bit for bit.
    pub fn same_values(&self, other: &PropositionReport) -> bool {
        let bits = |r: &PropositionReport| {
            (
                r.lhs.to_bits(),
                r.rhs.to_bits(),
                r.margin.to_bits(),
                r.rule,
                r.verdict,
                r.intermediates.iter().map(|(k, v)| (k.clone(), v.to_bits())).collect::<Vec<_>>(),
            )
        };
        bits(self) == bits(other)
    }
}

pub const CSV_HEADER: &str = "name,lhs,rhs,margin,verdict";

/// One CSV line (no trailing newline) with 9 significant digits.
pub fn csv_row(r: &PropositionReport) -> String {
    format!(
        "{},{},{},{},{}",
        r.name,
        sig9(r.lhs),
        sig9(r.rhs),
        sig9(r.margin),
        r.verdict
    )
}

/// Formats with 9 significant digits in plain or scientific notation,
/// whichever the magnitude calls for.
pub fn sig9(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.8e}")
    }
}

pub fn to_structured<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))
}

pub fn from_structured<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        location: format!("line {}, column {}", e.line(), e.column()),
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rules() {
        assert!(!Rule::MarginPositive.holds(0.0, 0.0));
        assert!(Rule::MarginPositive.holds(1e-3, 0.0));
        assert!(!Rule::MarginPositive.holds(1e-3, 1e-2));
        assert!(Rule::MarginNonNegative.holds(0.0, 0.0));
        assert!(Rule::MarginNonPositive.holds(0.0, 0.0));
        assert!(!Rule::MarginNonPositive.holds(1e-12, 0.0));
    }

    #[test]
    fn sig9_formats() {
        assert_eq!(sig9(0.0), "0");
        assert_eq!(sig9(0.5), "0.500000000");
        assert_eq!(sig9(0.00476348202), "0.00476348202");
        assert_eq!(sig9(-0.0030896), "-0.00308960000");
        assert_eq!(sig9(1.0), "1.00000000");
        assert_eq!(sig9(1.234e-9), "1.23400000e-9");
    }

    #[test]
    fn structured_round_trip() {
        let r = PropositionReport::new("prop1", 0.78, 0.77, 0.01, Rule::MarginPositive, 0.0).with("beta", 0.28);
        let text = to_structured(&r).unwrap();
        let back: PropositionReport = from_structured(&text).unwrap();
        assert_eq!(back, r);
        assert!(back.same_values(&r.clone().renamed("prop4")));
    }
}
