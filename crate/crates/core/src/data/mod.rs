//! Data matrices, normalization pipelines, and dataset ingestion.

mod io;
mod synthetic;

pub use io::{read_csv, read_idx, write_csv, write_matrix_csv, CsvOptions};
pub use synthetic::{
    block_dataset, mean_scale_family, torus_dataset_1d, torus_dataset_2d, TorusTemplate,
};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::simplex::{Dataset, Histogram};

/// A non-negative data matrix with optional row and column identifiers.
/// Rows index features (pixels, genes); columns index samples.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: DMatrix<f64>,
    row_names: Option<Vec<String>>,
    col_names: Option<Vec<String>>,
}

impl DataMatrix {
    pub fn new(
        values: DMatrix<f64>,
        row_names: Option<Vec<String>>,
        col_names: Option<Vec<String>>,
    ) -> Result<Self> {
        for (k, &v) in values.iter().enumerate() {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::NegativeEntry { index: k, value: v });
            }
        }
        if let Some(ref names) = row_names {
            if names.len() != values.nrows() {
                return Err(Error::DimensionMismatch {
                    context: "row names",
                    left: values.nrows(),
                    right: names.len(),
                });
            }
        }
        if let Some(ref names) = col_names {
            if names.len() != values.ncols() {
                return Err(Error::DimensionMismatch {
                    context: "column names",
                    left: values.ncols(),
                    right: names.len(),
                });
            }
        }
        Ok(Self {
            values,
            row_names,
            col_names,
        })
    }

    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn row_names(&self) -> Option<&[String]> {
        self.row_names.as_deref()
    }

    pub fn col_names(&self) -> Option<&[String]> {
        self.col_names.as_deref()
    }

    pub fn transposed(&self) -> Self {
        Self {
            values: self.values.transpose(),
            row_names: self.col_names.clone(),
            col_names: self.row_names.clone(),
        }
    }

    /// Drops all-zero rows and columns, returning the retained indices.
    /// Empty lines are common in image data (blank border pixels) and break
    /// normalization.
    pub fn prune_zero_lines(&self) -> (Self, Vec<usize>, Vec<usize>) {
        let kept_rows: Vec<usize> = (0..self.nrows())
            .filter(|&i| self.values.row(i).iter().any(|&v| v > 0.0))
            .collect();
        let kept_cols: Vec<usize> = (0..self.ncols())
            .filter(|&j| self.values.column(j).iter().any(|&v| v > 0.0))
            .collect();
        let values = DMatrix::from_fn(kept_rows.len(), kept_cols.len(), |i, j| {
            self.values[(kept_rows[i], kept_cols[j])]
        });
        let pick = |names: &Option<Vec<String>>, kept: &[usize]| {
            names
                .as_ref()
                .map(|ns| kept.iter().map(|&k| ns[k].clone()).collect())
        };
        let pruned = Self {
            values,
            row_names: pick(&self.row_names, &kept_rows),
            col_names: pick(&self.col_names, &kept_cols),
        };
        (pruned, kept_rows, kept_cols)
    }
}

/// Column- and row-normalizes a data matrix into two datasets: the columns
/// as histograms over rows, and the rows as histograms over columns.
pub fn canonical_normalization(u: &DataMatrix) -> Result<(Dataset, Dataset)> {
    let values = u.values();
    for j in 0..values.ncols() {
        if values.column(j).sum() <= 0.0 {
            return Err(Error::ZeroMarginal {
                which: "column",
                index: j,
            });
        }
    }
    for i in 0..values.nrows() {
        if values.row(i).sum() <= 0.0 {
            return Err(Error::ZeroMarginal {
                which: "row",
                index: i,
            });
        }
    }
    let columns: Vec<Histogram> = (0..values.ncols())
        .map(|j| {
            let col: Vec<f64> = values.column(j).iter().copied().collect();
            Histogram::normalized(&col)
        })
        .collect::<Result<_>>()?;
    let rows: Vec<Histogram> = (0..values.nrows())
        .map(|i| {
            let row: Vec<f64> = values.row(i).iter().copied().collect();
            Histogram::normalized(&row)
        })
        .collect::<Result<_>>()?;
    let a = Dataset::new(columns, u.col_names().map(<[String]>::to_vec))?;
    let b = Dataset::new(rows, u.row_names().map(<[String]>::to_vec))?;
    Ok((a, b))
}

/// Count-matrix preprocessing: log1p transform, then keep the `top_k` most
/// variable genes (rows), ties broken by original index order. Row order is
/// preserved and names travel with their rows.
pub fn scrna_preprocess(u: &DataMatrix, top_k: usize) -> Result<DataMatrix> {
    let values = u.values();
    let genes = values.nrows();
    if top_k > genes {
        return Err(Error::TopKTooLarge { top_k, genes });
    }
    for i in 0..genes {
        for j in 0..values.ncols() {
            let v = values[(i, j)];
            if v.fract() != 0.0 {
                return Err(Error::NonIntegerCount {
                    row: i,
                    col: j,
                    value: v,
                });
            }
        }
    }
    let transformed = values.map(f64::ln_1p);
    let m = transformed.ncols() as f64;
    let mut variances: Vec<(usize, f64)> = (0..genes)
        .map(|i| {
            let row = transformed.row(i);
            let mean = row.sum() / m;
            let var = row.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / m;
            (i, var)
        })
        .collect();
    variances.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    let mut keep: Vec<usize> = variances.iter().take(top_k).map(|&(i, _)| i).collect();
    keep.sort_unstable();

    let out = DMatrix::from_fn(top_k, transformed.ncols(), |i, j| transformed[(keep[i], j)]);
    let row_names = u
        .row_names()
        .map(|ns| keep.iter().map(|&i| ns[i].clone()).collect());
    DataMatrix::new(out, row_names, u.col_names().map(<[String]>::to_vec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn rejects_negative_entries() {
        let m = dmatrix![1.0, -2.0; 0.0, 3.0];
        assert!(matches!(
            DataMatrix::new(m, None, None),
            Err(Error::NegativeEntry { .. })
        ));
    }

    #[test]
    fn canonical_normalization_hand_example() {
        let u = DataMatrix::new(dmatrix![1.0, 1.0; 1.0, 3.0], None, None).unwrap();
        let (a, b) = canonical_normalization(&u).unwrap();
        assert_eq!(a.get(0).as_slice(), &[0.5, 0.5]);
        assert_eq!(a.get(1).as_slice(), &[0.25, 0.75]);
        assert_eq!(b.get(0).as_slice(), &[0.5, 0.5]);
        assert_eq!(b.get(1).as_slice(), &[0.25, 0.75]);
        for hist in a.iter().chain(b.iter()) {
            let total: f64 = hist.as_slice().iter().sum();
            assert!((total - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn column_stochastic_input_is_a_fixed_point() {
        let u = DataMatrix::new(dmatrix![0.2, 0.7; 0.8, 0.3], None, None).unwrap();
        let (a, _) = canonical_normalization(&u).unwrap();
        assert_eq!(a.get(0).as_slice(), &[0.2, 0.8]);
        assert_eq!(a.get(1).as_slice(), &[0.7, 0.3]);
    }

    #[test]
    fn zero_column_is_rejected() {
        let u = DataMatrix::new(dmatrix![1.0, 0.0; 1.0, 0.0], None, None).unwrap();
        assert!(matches!(
            canonical_normalization(&u),
            Err(Error::ZeroMarginal { which: "column", index: 1 })
        ));
    }

    #[test]
    fn preprocess_applies_log1p_and_keeps_zero_counts_zero() {
        let u = DataMatrix::new(dmatrix![0.0, 3.0; 1.0, 1.0], None, None).unwrap();
        let out = scrna_preprocess(&u, 2).unwrap();
        assert_eq!(out.values()[(0, 0)], 0.0);
        assert!((out.values()[(0, 1)] - 4.0_f64.ln()).abs() <= 1e-15);
    }

    #[test]
    fn preprocess_drops_constant_genes_first() {
        let u = DataMatrix::new(
            dmatrix![5.0, 5.0, 5.0; 0.0, 2.0, 10.0; 1.0, 1.0, 2.0],
            Some(vec!["flat".into(), "wild".into(), "mild".into()]),
            None,
        )
        .unwrap();
        let out = scrna_preprocess(&u, 2).unwrap();
        assert_eq!(out.row_names().unwrap(), &["wild".to_string(), "mild".to_string()]);
    }

    #[test]
    fn preprocess_matches_variance_sort_oracle() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(61);
        let values = DMatrix::from_fn(10, 6, |_, _| f64::from(rng.gen_range(0u32..40)));
        let u = DataMatrix::new(values.clone(), None, None).unwrap();
        let out = scrna_preprocess(&u, 4).unwrap();

        // Independent oracle: recompute variances of log1p rows and sort.
        let logged = values.map(f64::ln_1p);
        let mut var: Vec<(usize, f64)> = (0..10)
            .map(|i| {
                let row = logged.row(i);
                let mean = row.sum() / 6.0;
                (i, row.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / 6.0)
            })
            .collect();
        var.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        let mut expected: Vec<usize> = var.iter().take(4).map(|&(i, _)| i).collect();
        expected.sort_unstable();
        let got: Vec<f64> = expected
            .iter()
            .flat_map(|&i| logged.row(i).iter().copied().collect::<Vec<f64>>())
            .collect();
        let have: Vec<f64> = (0..out.nrows())
            .flat_map(|i| out.values().row(i).iter().copied().collect::<Vec<f64>>())
            .collect();
        assert_eq!(got, have);
    }

    #[test]
    fn preprocess_rejects_fractional_counts() {
        let u = DataMatrix::new(dmatrix![1.0, 2.5; 0.0, 1.0], None, None).unwrap();
        assert!(matches!(
            scrna_preprocess(&u, 1),
            Err(Error::NonIntegerCount { row: 0, col: 1, .. })
        ));
    }

    #[test]
    fn preprocess_rejects_oversized_top_k() {
        let u = DataMatrix::new(dmatrix![1.0; 2.0], None, None).unwrap();
        assert!(matches!(
            scrna_preprocess(&u, 3),
            Err(Error::TopKTooLarge { top_k: 3, genes: 2 })
        ));
    }

    #[test]
    fn prune_drops_empty_lines_and_keeps_names() {
        let u = DataMatrix::new(
            dmatrix![1.0, 0.0, 2.0; 0.0, 0.0, 0.0; 3.0, 0.0, 4.0],
            Some(vec!["a".into(), "b".into(), "c".into()]),
            Some(vec!["x".into(), "y".into(), "z".into()]),
        )
        .unwrap();
        let (pruned, rows, cols) = u.prune_zero_lines();
        assert_eq!(rows, vec![0, 2]);
        assert_eq!(cols, vec![0, 2]);
        assert_eq!(pruned.row_names().unwrap(), &["a".to_string(), "c".to_string()]);
        assert_eq!(pruned.col_names().unwrap(), &["x".to_string(), "z".to_string()]);
        assert_eq!(pruned.values()[(1, 1)], 4.0);
    }
}
