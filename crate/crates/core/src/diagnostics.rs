//! Error norms, convergence monitoring and conservation audits.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnosticsError {
    #[error("field sizes differ: {0} vs {1}")]
    ShapeMismatch(usize, usize),
    #[error("nonpositive depth {value} at index {index}")]
    NonpositiveDepth { index: usize, value: f64 },
    #[error("reference field has zero norm")]
    ZeroReference,
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.add(other.comp);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

fn same_len(a: &[f64], b: &[f64]) -> Result<(), DiagnosticsError> {
    if a.len() == b.len() {
        Ok(())
    } else {
        Err(DiagnosticsError::ShapeMismatch(a.len(), b.len()))
    }
}

/// R = sqrt(Σ ((hⁿ − hⁿ⁻¹)/hⁿ)²). Not symmetric in its arguments: the
/// denominator is the newer depth.
pub fn global_relative_error(h_new: &[f64], h_old: &[f64]) -> Result<f64, DiagnosticsError> {
    same_len(h_new, h_old)?;
    let mut acc = CompensatedSum::new();
    for (index, (&n, &o)) in h_new.iter().zip(h_old).enumerate() {
        if !(n > 0.0) {
            return Err(DiagnosticsError::NonpositiveDepth { index, value: n });
        }
        let r = (n - o) / n;
        acc.add(r * r);
    }
    Ok(acc.value().sqrt())
}

/// Relative L² error sqrt(Σ|c − c̃|² / Σ|c̃|²).
pub fn l2_error(numeric: &[f64], analytic: &[f64]) -> Result<f64, DiagnosticsError> {
    same_len(numeric, analytic)?;
    let mut num = CompensatedSum::new();
    let mut den = CompensatedSum::new();
    for (&c, &a) in numeric.iter().zip(analytic) {
        num.add((c - a) * (c - a));
        den.add(a * a);
    }
    if den.value() <= 0.0 {
        return Err(DiagnosticsError::ZeroReference);
    }
    Ok((num.value() / den.value()).sqrt())
}

/// Width-averaged discharge per column and its deviation from `q_in`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DischargeProfile {
    pub x: Vec<f64>,
    pub q: Vec<f64>,
    pub q_in: f64,
    /// max |q(x) − q_in| / q_in
    pub max_deviation: f64,
    /// Relative L² deviation from a uniform q_in profile.
    pub l2_deviation: f64,
}

/// Discharge per unit width from depth and x-velocity rows.
///
/// `columns` yields, for each column, its x position and the (h, u₁) pairs of
/// the wet nodes in it. q(x) = Σ h u₁ Δy / (n Δy), i.e. the mean of h u₁.
pub fn discharge_profile<I, C>(columns: I, q_in: f64) -> DischargeProfile
where
    I: IntoIterator<Item = (f64, C)>,
    C: IntoIterator<Item = (f64, f64)>,
{
    let mut xs = Vec::new();
    let mut qs = Vec::new();
    for (x, col) in columns {
        let mut acc = CompensatedSum::new();
        let mut n = 0usize;
        for (h, u) in col {
            acc.add(h * u);
            n += 1;
        }
        if n > 0 {
            xs.push(x);
            qs.push(acc.value() / n as f64);
        }
    }
    let scale = if q_in != 0.0 { q_in.abs() } else { 1.0 };
    let max_deviation = qs
        .iter()
        .fold(0.0_f64, |m, q| m.max((q - q_in).abs() / scale));
    let reference = vec![q_in; qs.len()];
    let l2_deviation = l2_error(&qs, &reference).unwrap_or(max_deviation);
    DischargeProfile {
        x: xs,
        q: qs,
        q_in,
        max_deviation,
        l2_deviation,
    }
}

/// One row of error bookkeeping, appended to run manifests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct ErrorReport {
    pub step: u64,
    pub r_global: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l2_relative: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discharge_deviation: Option<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn r_of_identical_fields_is_zero() {
        let h = [1.0, 2.0, 3.0];
        assert_eq!(global_relative_error(&h, &h).unwrap(), 0.0);
    }

    #[test]
    fn r_single_node_change() {
        let new = [2.0, 1.0, 1.0];
        let old = [1.9, 1.0, 1.0];
        let r = global_relative_error(&new, &old).unwrap();
        assert!((r - 0.05).abs() < 1e-15);
        // denominator is the newer field
        let r_swapped = global_relative_error(&old, &new).unwrap();
        assert!((r_swapped - 0.1 / 1.9).abs() < 1e-15);
        assert!(r != r_swapped);
    }

    #[test]
    fn r_errors() {
        assert!(matches!(
            global_relative_error(&[1.0], &[1.0, 2.0]),
            Err(DiagnosticsError::ShapeMismatch(1, 2))
        ));
        assert!(matches!(
            global_relative_error(&[0.0], &[1.0]),
            Err(DiagnosticsError::NonpositiveDepth { index: 0, .. })
        ));
    }

    #[test]
    fn l2_basic_identities() {
        let a = [1.0, -2.0, 3.5];
        assert_eq!(l2_error(&a, &a).unwrap(), 0.0);
        let scaled: Vec<f64> = a.iter().map(|v| 1.01 * v).collect();
        assert!((l2_error(&scaled, &a).unwrap() - 0.01).abs() < 1e-14);
        assert_eq!(
            l2_error(&[1.0], &[0.0]),
            Err(DiagnosticsError::ZeroReference)
        );
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::new();
        s.add(1e16);
        for _ in 0..1000 {
            s.add(1.0);
        }
        s.add(-1e16);
        assert_eq!(s.value(), 1000.0);
    }

    #[test]
    fn uniform_and_still_discharge() {
        let cols = (0..5).map(|i| (i as f64, vec![(2.0, 2.21); 3]));
        let p = discharge_profile(cols, 4.42);
        assert!(p.q.iter().all(|q| (q - 4.42).abs() < 1e-14));
        assert!(p.max_deviation < 1e-14);
        let still = discharge_profile((0..5).map(|i| (i as f64, vec![(2.0, 0.0); 3])), 0.0);
        assert!(still.q.iter().all(|&q| q == 0.0));
    }
}
