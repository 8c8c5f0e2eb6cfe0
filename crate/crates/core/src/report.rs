//! Residual statistics for pointwise identity checks.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    /// Pass iff the largest residual is below the tolerance.
    Upper,
    /// Pass iff the smallest sampled value exceeds the tolerance.
    Lower,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check: String,
    pub regime_c: Option<f64>,
    pub samples: usize,
    pub max_residual: f64,
    pub mean_residual: f64,
    /// Smallest sampled value, meaningful for lower-bound checks.
    pub min_value: f64,
    pub tolerance: f64,
    pub bound: Bound,
    pub pass: bool,
    /// Named sub-statistics (for checks that aggregate several identities).
    pub details: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl VerificationReport {
    /// Builds an upper-bound report from per-sample residuals.
    pub fn from_residuals(check: &str, regime_c: Option<f64>, residuals: &[f64], tolerance: f64) -> Self {
        let (max, mean) = stats(residuals);
        let min = residuals.iter().copied().fold(f64::INFINITY, f64::min);
        VerificationReport {
            check: check.to_string(),
            regime_c,
            samples: residuals.len(),
            max_residual: max,
            mean_residual: mean,
            min_value: if residuals.is_empty() { 0.0 } else { min },
            tolerance,
            bound: Bound::Upper,
            pass: !residuals.is_empty() && max < tolerance,
            details: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    /// Builds a lower-bound report: pass iff every sampled value exceeds
    /// `threshold`.
    pub fn from_lower_bound(check: &str, regime_c: Option<f64>, values: &[f64], threshold: f64) -> Self {
        let (max, mean) = stats(values);
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        VerificationReport {
            check: check.to_string(),
            regime_c,
            samples: values.len(),
            max_residual: max,
            mean_residual: mean,
            min_value: min,
            tolerance: threshold,
            bound: Bound::Lower,
            pass: !values.is_empty() && min > threshold,
            details: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    /// The statistic compared against the tolerance.
    pub fn statistic(&self) -> f64 {
        match self.bound {
            Bound::Upper => self.max_residual,
            Bound::Lower => self.min_value,
        }
    }

    pub fn with_detail(mut self, key: &str, value: f64) -> Self {
        self.details.insert(key.to_string(), value);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    /// Merges several upper-bound sub-reports into one; the merged report
    /// passes iff every part passes.
    pub fn combine(check: &str, regime_c: Option<f64>, parts: &[VerificationReport]) -> Self {
        let mut details = BTreeMap::new();
        let mut notes = Vec::new();
        let mut max = 0.0f64;
        let mut mean = 0.0;
        let mut samples = 0;
        let mut tol = 0.0f64;
        for p in parts {
            details.insert(format!("{}.{}", p.check, "statistic"), p.statistic());
            for (k, v) in &p.details {
                details.insert(format!("{}.{}", p.check, k), *v);
            }
            notes.extend(p.notes.iter().cloned());
            if p.bound == Bound::Upper {
                max = max.max(p.max_residual);
                tol = tol.max(p.tolerance);
            }
            mean += p.mean_residual;
            samples = samples.max(p.samples);
        }
        if !parts.is_empty() {
            mean /= parts.len() as f64;
        }
        VerificationReport {
            check: check.to_string(),
            regime_c,
            samples,
            max_residual: max,
            mean_residual: mean,
            min_value: 0.0,
            tolerance: tol,
            bound: Bound::Upper,
            pass: !parts.is_empty() && parts.iter().all(|p| p.pass),
            details,
            notes,
        }
    }
}

fn stats(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (0.0, 0.0);
    }
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    (max, mean)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn upper_and_lower_bounds() {
        let r = VerificationReport::from_residuals("x", None, &[1e-12, 3e-10], 1e-9);
        assert!(r.pass);
        assert_eq!(r.statistic(), 3e-10);
        let r = VerificationReport::from_lower_bound("y", Some(0.3), &[0.5, 0.7], 0.6);
        assert!(!r.pass);
        assert_eq!(r.statistic(), 0.5);
        let empty = VerificationReport::from_residuals("z", None, &[], 1.0);
        assert!(!empty.pass);
    }
}
