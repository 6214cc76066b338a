//! Transport plans with prescribed marginals.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::simplex::Histogram;

/// Marginal sums must match the prescribed histograms within this l1 budget.
pub const MARGINAL_TOLERANCE: f64 = 1e-9;

/// Entries above `SUPPORT_RELATIVE_THRESHOLD * max(plan)` count as support.
/// Keeps the support graph robust to solver round-off.
pub const SUPPORT_RELATIVE_THRESHOLD: f64 = 1e-12;

/// A non-negative transport plan together with its support pattern.
#[derive(Debug, Clone)]
pub struct Coupling {
    plan: DMatrix<f64>,
    support: Vec<(usize, usize)>,
}

impl Coupling {
    /// Validates marginals (row sums = `a`, column sums = `b`, total mass 1,
    /// all within [`MARGINAL_TOLERANCE`] in l1) and extracts the support.
    pub fn new(plan: DMatrix<f64>, a: &Histogram, b: &Histogram) -> Result<Self> {
        if plan.nrows() != a.len() || plan.ncols() != b.len() {
            return Err(Error::DimensionMismatch {
                context: "coupling shape",
                left: plan.nrows() * plan.ncols(),
                right: a.len() * b.len(),
            });
        }
        for (k, &v) in plan.iter().enumerate() {
            if !(v >= 0.0) {
                return Err(Error::NegativeEntry { index: k, value: v });
            }
        }
        let mut row_violation = 0.0;
        for i in 0..plan.nrows() {
            row_violation += (plan.row(i).sum() - a.get(i)).abs();
        }
        if row_violation > MARGINAL_TOLERANCE {
            return Err(Error::MarginalViolation {
                which: "row",
                violation: row_violation,
                tolerance: MARGINAL_TOLERANCE,
            });
        }
        let mut col_violation = 0.0;
        for j in 0..plan.ncols() {
            col_violation += (plan.column(j).sum() - b.get(j)).abs();
        }
        if col_violation > MARGINAL_TOLERANCE {
            return Err(Error::MarginalViolation {
                which: "column",
                violation: col_violation,
                tolerance: MARGINAL_TOLERANCE,
            });
        }
        let mass: f64 = plan.iter().sum();
        if (mass - 1.0).abs() > MARGINAL_TOLERANCE {
            return Err(Error::MarginalViolation {
                which: "total mass",
                violation: (mass - 1.0).abs(),
                tolerance: MARGINAL_TOLERANCE,
            });
        }
        let support = extract_support(&plan);
        Ok(Self { plan, support })
    }

    pub fn plan(&self) -> &DMatrix<f64> {
        &self.plan
    }

    /// Index pairs carrying mass above the relative support threshold.
    pub fn support(&self) -> &[(usize, usize)] {
        &self.support
    }

    /// Transport cost `<C, P>` of this plan under a dense cost given
    /// row-major. Sums the full plan, not just the thresholded support, so
    /// the value stays exact even when tiny flows fall below the support
    /// cutoff.
    pub(crate) fn cost_against(&self, cost_row_major: &[f64], n_cols: usize) -> f64 {
        let mut total = 0.0;
        for i in 0..self.plan.nrows() {
            for j in 0..self.plan.ncols() {
                let mass = self.plan[(i, j)];
                if mass > 0.0 {
                    total += mass * cost_row_major[i * n_cols + j];
                }
            }
        }
        total
    }
}

fn extract_support(plan: &DMatrix<f64>) -> Vec<(usize, usize)> {
    let max = plan.iter().fold(0.0_f64, |acc, &v| acc.max(v));
    let threshold = SUPPORT_RELATIVE_THRESHOLD * max;
    let mut support = Vec::new();
    for i in 0..plan.nrows() {
        for j in 0..plan.ncols() {
            if plan[(i, j)] > threshold {
                support.push((i, j));
            }
        }
    }
    support
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn accepts_valid_plan_and_extracts_support() {
        let a = Histogram::new(vec![0.5, 0.5]).unwrap();
        let b = Histogram::new(vec![0.25, 0.75]).unwrap();
        let plan = dmatrix![0.25, 0.25; 0.0, 0.5];
        let c = Coupling::new(plan, &a, &b).unwrap();
        assert_eq!(c.support(), &[(0, 0), (0, 1), (1, 1)]);
    }

    #[test]
    fn rejects_perturbed_marginals() {
        let a = Histogram::new(vec![0.5, 0.5]).unwrap();
        let b = Histogram::new(vec![0.5, 0.5]).unwrap();
        let plan = dmatrix![0.5 + 2e-9, 0.0; 0.0, 0.5];
        assert!(matches!(
            Coupling::new(plan, &a, &b),
            Err(Error::MarginalViolation { .. })
        ));
    }

    #[test]
    fn support_threshold_is_relative_to_the_peak() {
        let a = Histogram::new(vec![0.5, 0.5]).unwrap();
        let tiny = 1e-13 * 0.5;
        let small = 1e-11 * 0.5;
        let plan = dmatrix![
            0.5 - tiny, tiny;
            small, 0.5 - small
        ];
        let c = Coupling::new(plan, &a, &a).unwrap();
        // 1e-13 of the peak is round-off, 1e-11 counts as mass.
        assert_eq!(c.support(), &[(0, 0), (1, 0), (1, 1)]);
    }

    #[test]
    fn rejects_negative_mass() {
        let a = Histogram::new(vec![0.5, 0.5]).unwrap();
        let b = Histogram::new(vec![0.5, 0.5]).unwrap();
        let plan = dmatrix![0.6, -0.1; -0.1, 0.6];
        assert!(matches!(
            Coupling::new(plan, &a, &b),
            Err(Error::NegativeEntry { .. })
        ));
    }
}
