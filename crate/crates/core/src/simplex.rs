//! Histograms (points of the probability simplex) and collections of them.

use nalgebra::DVector;

use crate::error::{Error, Result};

/// Inputs whose mass deviates from 1 by more than this are rejected instead
/// of being renormalized.
pub const MASS_TOLERANCE: f64 = 1e-6;

/// A probability vector: non-negative entries summing to 1.
///
/// Construction renormalizes small rounding drift (mass within
/// [`MASS_TOLERANCE`] of 1) so that ingestion from text files is painless;
/// anything further off is an error.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    weights: DVector<f64>,
}

impl Histogram {
    /// Validates non-negativity and unit mass (up to [`MASS_TOLERANCE`]),
    /// then renormalizes exactly.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        for (i, &w) in weights.iter().enumerate() {
            if !(w >= 0.0) {
                return Err(Error::NegativeEntry { index: i, value: w });
            }
        }
        let mass: f64 = weights.iter().sum();
        if (mass - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::MassDeviation {
                mass,
                tolerance: MASS_TOLERANCE,
            });
        }
        Ok(Self::renormalized(weights, mass))
    }

    /// Builds a histogram from any non-negative vector with positive mass,
    /// dividing by the total. Used by generators and file ingestion.
    pub fn normalized(raw: &[f64]) -> Result<Self> {
        for (i, &w) in raw.iter().enumerate() {
            if !(w >= 0.0) {
                return Err(Error::NegativeEntry { index: i, value: w });
            }
        }
        let mass: f64 = raw.iter().sum();
        if mass <= 0.0 {
            return Err(Error::MassDeviation {
                mass,
                tolerance: MASS_TOLERANCE,
            });
        }
        Ok(Self::renormalized(raw.to_vec(), mass))
    }

    fn renormalized(mut weights: Vec<f64>, mass: f64) -> Self {
        for w in &mut weights {
            *w /= mass;
        }
        // One corrective pass keeps the sum within 1e-12 even for long vectors.
        let second: f64 = weights.iter().sum();
        if second != 1.0 && second > 0.0 {
            for w in &mut weights {
                *w /= second;
            }
        }
        Self {
            weights: DVector::from_vec(weights),
        }
    }

    /// Uniform histogram on `n` bins.
    pub fn uniform(n: usize) -> Self {
        Self {
            weights: DVector::from_element(n, 1.0 / n as f64),
        }
    }

    /// Point mass on bin `index`.
    pub fn dirac(n: usize, index: usize) -> Self {
        let mut w = DVector::zeros(n);
        w[index] = 1.0;
        Self { weights: w }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn as_slice(&self) -> &[f64] {
        self.weights.as_slice()
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.weights
    }
}

/// Total variation distance between two histograms of equal length.
pub fn l1_distance(a: &Histogram, b: &Histogram) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            context: "l1_distance",
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y).abs())
        .sum())
}

/// A collection of histograms sharing a common length, with optional labels.
///
/// Records at construction whether all histograms are pairwise distinct;
/// the spectral iterations require distinctness and check the flag.
#[derive(Debug, Clone)]
pub struct Dataset {
    histograms: Vec<Histogram>,
    labels: Option<Vec<String>>,
    dim: usize,
    duplicate: Option<(usize, usize)>,
}

impl Dataset {
    pub fn new(histograms: Vec<Histogram>, labels: Option<Vec<String>>) -> Result<Self> {
        let dim = histograms.first().map_or(0, Histogram::len);
        for h in &histograms {
            if h.len() != dim {
                return Err(Error::DimensionMismatch {
                    context: "dataset histogram length",
                    left: dim,
                    right: h.len(),
                });
            }
        }
        if let Some(ref l) = labels {
            if l.len() != histograms.len() {
                return Err(Error::DimensionMismatch {
                    context: "dataset labels",
                    left: histograms.len(),
                    right: l.len(),
                });
            }
        }
        let duplicate = find_duplicate(&histograms);
        Ok(Self {
            histograms,
            labels,
            dim,
            duplicate,
        })
    }

    /// Number of histograms.
    pub fn len(&self) -> usize {
        self.histograms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.histograms.is_empty()
    }

    /// Common histogram length.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize) -> &Histogram {
        &self.histograms[i]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Histogram> {
        self.histograms.iter()
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn is_pairwise_distinct(&self) -> bool {
        self.duplicate.is_none()
    }

    /// Errors with the first offending pair when two histograms coincide.
    pub fn require_pairwise_distinct(&self) -> Result<()> {
        match self.duplicate {
            None => Ok(()),
            Some((i, j)) => Err(Error::DuplicateHistograms {
                first: i,
                second: j,
            }),
        }
    }

    /// Histograms as columns of a dense matrix (dim x len).
    pub fn to_matrix(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.dim, self.len());
        for (j, h) in self.histograms.iter().enumerate() {
            m.column_mut(j).copy_from(h.as_vector());
        }
        m
    }
}

fn find_duplicate(histograms: &[Histogram]) -> Option<(usize, usize)> {
    for i in 0..histograms.len() {
        for j in (i + 1)..histograms.len() {
            if histograms[i].as_slice() == histograms[j].as_slice() {
                return Some((i, j));
            }
        }
    }
    None
}
