//! Ground cost matrices: symmetric, zero diagonal, stored as one triangle.

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Symmetric cost matrix with zero diagonal.
///
/// Only the strict upper triangle is stored, so symmetry and the zero
/// diagonal hold by construction. Entries are non-negative for every cost
/// built through the validating constructors; [`CostMatrix::from_upper_signed`]
/// is the one escape hatch for images of linear maps that may leave the
/// non-negative cone (see the embedding module).
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    n: usize,
    upper: Vec<f64>,
}

#[inline]
fn upper_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

impl CostMatrix {
    /// Validates a dense matrix: symmetric, zero diagonal, non-negative.
    pub fn from_dense(m: &DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                context: "cost matrix",
                left: m.nrows(),
                right: m.ncols(),
            });
        }
        let n = m.nrows();
        for i in 0..n {
            if m[(i, i)] != 0.0 {
                return Err(Error::NonzeroDiagonal {
                    index: i,
                    value: m[(i, i)],
                });
            }
        }
        let mut upper = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in (i + 1)..n {
                if m[(i, j)] != m[(j, i)] {
                    return Err(Error::Asymmetric {
                        row: i,
                        col: j,
                        lower: m[(j, i)],
                        upper: m[(i, j)],
                    });
                }
                if !(m[(i, j)] >= 0.0) {
                    return Err(Error::NegativeEntry {
                        index: upper_index(n, i, j),
                        value: m[(i, j)],
                    });
                }
                upper.push(m[(i, j)]);
            }
        }
        Ok(Self { n, upper })
    }

    /// Builds from a packed strict upper triangle (row-major), validating
    /// non-negativity.
    pub fn from_upper(n: usize, upper: Vec<f64>) -> Result<Self> {
        let expected = n * (n - 1) / 2;
        if upper.len() != expected {
            return Err(Error::DimensionMismatch {
                context: "packed upper triangle",
                left: expected,
                right: upper.len(),
            });
        }
        for (k, &v) in upper.iter().enumerate() {
            if !(v >= 0.0) {
                return Err(Error::NegativeEntry { index: k, value: v });
            }
        }
        Ok(Self { n, upper })
    }

    /// Builds from a packed strict upper triangle without the non-negativity
    /// check. The result is still symmetric with zero diagonal. Callers that
    /// need cone membership should check [`CostMatrix::min_off_diagonal`].
    pub fn from_upper_signed(n: usize, upper: Vec<f64>) -> Result<Self> {
        let expected = n * (n - 1) / 2;
        if upper.len() != expected {
            return Err(Error::DimensionMismatch {
                context: "packed upper triangle",
                left: expected,
                right: upper.len(),
            });
        }
        for (k, &v) in upper.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NegativeEntry { index: k, value: v });
            }
        }
        Ok(Self { n, upper })
    }

    /// Builds entrywise from `f(i, j)` over the strict upper triangle.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut upper = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in (i + 1)..n {
                upper.push(f(i, j));
            }
        }
        Self::from_upper(n, upper)
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            upper: vec![0.0; n * (n - 1) / 2],
        }
    }

    /// Cost with off-diagonal entries drawn uniformly from (0.5, 1.5),
    /// deterministic in the seed.
    pub fn random_positive(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let upper = (0..n * (n - 1) / 2)
            .map(|_| rng.gen_range(0.5..1.5))
            .collect();
        Self { n, upper }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            0.0
        } else if i < j {
            self.upper[upper_index(self.n, i, j)]
        } else {
            self.upper[upper_index(self.n, j, i)]
        }
    }

    /// Packed strict upper triangle, row-major.
    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// Largest absolute entry.
    pub fn linf_norm(&self) -> f64 {
        self.upper.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// Smallest off-diagonal entry (+inf for n < 2).
    pub fn min_off_diagonal(&self) -> f64 {
        self.upper.iter().fold(f64::INFINITY, |acc, &v| acc.min(v))
    }

    /// Strictly positive off-diagonal entries everywhere.
    pub fn is_strictly_positive(&self) -> bool {
        self.n < 2 || self.min_off_diagonal() > 0.0
    }

    pub fn is_non_negative(&self) -> bool {
        self.n < 2 || self.min_off_diagonal() >= 0.0
    }

    /// Divides by the sup norm so the largest entry becomes exactly 1.
    /// Returns the normalized matrix and the norm itself.
    pub fn linf_normalized(&self) -> (Self, f64) {
        let norm = self.linf_norm();
        if norm == 0.0 {
            return (self.clone(), 0.0);
        }
        let normalized = Self {
            n: self.n,
            upper: self.upper.iter().map(|v| v / norm).collect(),
        };
        (normalized, norm)
    }

    /// Entrywise scaling by a non-negative factor.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            n: self.n,
            upper: self.upper.iter().map(|v| v * factor).collect(),
        }
    }

    /// `alpha * self + beta * other`.
    pub fn linear_combination(&self, alpha: f64, other: &Self, beta: f64) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                context: "cost linear combination",
                left: self.n,
                right: other.n,
            });
        }
        Ok(Self {
            n: self.n,
            upper: self
                .upper
                .iter()
                .zip(&other.upper)
                .map(|(a, b)| alpha * a + beta * b)
                .collect(),
        })
    }

    /// Largest absolute entrywise difference.
    pub fn linf_distance(&self, other: &Self) -> Result<f64> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                context: "cost comparison",
                left: self.n,
                right: other.n,
            });
        }
        Ok(self
            .upper
            .iter()
            .zip(&other.upper)
            .fold(0.0, |acc, (a, b)| acc.max((a - b).abs())))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let v = self.get(i, j);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    }

    /// Dense row-major copy, convenient for solver inner loops.
    pub(crate) fn to_row_major(&self) -> Vec<f64> {
        let n = self.n;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = self.get(i, j);
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        data
    }
}

/// Hilbert projective distance between two strictly positive costs:
/// spread of the entrywise log ratios over the off-diagonal.
pub fn hilbert_metric(c: &CostMatrix, c_prime: &CostMatrix) -> Result<f64> {
    if c.n() != c_prime.n() {
        return Err(Error::DimensionMismatch {
            context: "hilbert_metric",
            left: c.n(),
            right: c_prime.n(),
        });
    }
    require_strictly_positive(c)?;
    require_strictly_positive(c_prime)?;
    if c.n() < 2 {
        return Ok(0.0);
    }
    let mut max = f64::NEG_INFINITY;
    let mut min = f64::INFINITY;
    for (a, b) in c.upper().iter().zip(c_prime.upper()) {
        let r = (a / b).ln();
        max = max.max(r);
        min = min.min(r);
    }
    Ok(max - min)
}

fn require_strictly_positive(c: &CostMatrix) -> Result<()> {
    if c.is_strictly_positive() {
        return Ok(());
    }
    let n = c.n();
    for i in 0..n {
        for j in (i + 1)..n {
            if !(c.get(i, j) > 0.0) {
                return Err(Error::NotStrictlyPositive {
                    row: i,
                    col: j,
                    value: c.get(i, j),
                });
            }
        }
    }
    unreachable!("a non-positive entry must exist");
}
