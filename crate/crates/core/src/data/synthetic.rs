//! Synthetic dataset generators: periodic bump translations on 1-D and 2-D
//! grids, mean/scale families, and block-diagonal matrices.

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::DataMatrix;
use crate::error::{Error, Result};
use crate::simplex::{Dataset, Histogram};

/// Periodic template profiles on the unit torus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TorusTemplate {
    Gauss { sigma: f64 },
    Bimodal { sigma: f64, gap: f64 },
    Trimodal { sigma: f64, gap: f64 },
}

impl TorusTemplate {
    pub fn validate(&self) -> Result<()> {
        let (sigma, gap) = match *self {
            TorusTemplate::Gauss { sigma } => (sigma, 1.0),
            TorusTemplate::Bimodal { sigma, gap } | TorusTemplate::Trimodal { sigma, gap } => {
                (sigma, gap)
            }
        };
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidParameter {
                name: "sigma",
                value: sigma,
            });
        }
        if !(gap > 0.0) || !gap.is_finite() {
            return Err(Error::InvalidParameter {
                name: "gap",
                value: gap,
            });
        }
        Ok(())
    }

    /// Template value at torus coordinate `x`.
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            TorusTemplate::Gauss { sigma } => wrapped_gauss(x, sigma),
            TorusTemplate::Bimodal { sigma, gap } => {
                wrapped_gauss(x, sigma) + wrapped_gauss(x - gap, sigma)
            }
            TorusTemplate::Trimodal { sigma, gap } => {
                wrapped_gauss(x, sigma)
                    + wrapped_gauss(x - gap, sigma)
                    + wrapped_gauss(x - 2.0 * gap, sigma)
            }
        }
    }

    fn eval_2d(&self, x: f64, y: f64) -> f64 {
        match *self {
            TorusTemplate::Gauss { sigma } => wrapped_gauss(x, sigma) * wrapped_gauss(y, sigma),
            TorusTemplate::Bimodal { sigma, gap } => {
                let g = |dx: f64, dy: f64| wrapped_gauss(dx, sigma) * wrapped_gauss(dy, sigma);
                g(x, y) + g(x - gap, y)
            }
            TorusTemplate::Trimodal { sigma, gap } => {
                let g = |dx: f64, dy: f64| wrapped_gauss(dx, sigma) * wrapped_gauss(dy, sigma);
                g(x, y) + g(x - gap, y) + g(x, y - gap)
            }
        }
    }
}

/// Gaussian bump wrapped onto the unit torus. Three wraps reach machine
/// precision for widths up to about 0.3.
fn wrapped_gauss(x: f64, sigma: f64) -> f64 {
    let frac = x - x.floor();
    let mut total = 0.0;
    for k in [-1.0, 0.0, 1.0] {
        let d = frac + k;
        total += (-d * d / (2.0 * sigma * sigma)).exp();
    }
    total
}

const DEGENERATE_RELATIVE_SPREAD: f64 = 1e-12;

/// All cyclic translations of a periodic template on `n` grid points, each
/// normalized to the simplex. The resulting histogram matrix is circulant.
pub fn torus_dataset_1d(template: TorusTemplate, n: usize) -> Result<Dataset> {
    template.validate()?;
    if n < 3 {
        return Err(Error::InvalidParameter {
            name: "n",
            value: n as f64,
        });
    }
    let base: Vec<f64> = (0..n).map(|i| template.eval(i as f64 / n as f64)).collect();
    require_varying(&base)?;
    let histograms: Vec<Histogram> = (0..n)
        .map(|shift| {
            let column: Vec<f64> = (0..n).map(|i| base[(n + i - shift) % n]).collect();
            Histogram::normalized(&column)
        })
        .collect::<Result<_>>()?;
    Dataset::new(histograms, None)
}

/// All 2-D cyclic translations of a periodic template on a `side x side`
/// grid; histograms are the flattened (row-major) shifted images.
pub fn torus_dataset_2d(template: TorusTemplate, side: usize) -> Result<Dataset> {
    template.validate()?;
    if side < 2 {
        return Err(Error::InvalidParameter {
            name: "side",
            value: side as f64,
        });
    }
    let base: Vec<f64> = (0..side * side)
        .map(|idx| {
            let (i, j) = (idx / side, idx % side);
            template.eval_2d(i as f64 / side as f64, j as f64 / side as f64)
        })
        .collect();
    require_varying(&base)?;
    let histograms: Vec<Histogram> = (0..side * side)
        .map(|shift_idx| {
            let (p, q) = (shift_idx / side, shift_idx % side);
            let column: Vec<f64> = (0..side * side)
                .map(|idx| {
                    let (i, j) = (idx / side, idx % side);
                    base[((side + i - p) % side) * side + (side + j - q) % side]
                })
                .collect();
            Histogram::normalized(&column)
        })
        .collect::<Result<_>>()?;
    Dataset::new(histograms, None)
}

fn require_varying(values: &[f64]) -> Result<()> {
    let max = values.iter().cloned().fold(f64::MIN, f64::max);
    let min = values.iter().cloned().fold(f64::MAX, f64::min);
    if max <= 0.0 || (max - min) <= DEGENERATE_RELATIVE_SPREAD * max {
        return Err(Error::DegenerateTemplate);
    }
    Ok(())
}

/// Periodic bumps indexed by a mean/scale grid: column `(mu, sigma)` holds
/// the bump of width `sigma` centered at `mu`, sampled on `n` grid points.
/// Columns iterate means outer, scales inner.
pub fn mean_scale_family(n: usize, means: &[f64], scales: &[f64]) -> Result<DataMatrix> {
    if n < 2 {
        return Err(Error::InvalidParameter {
            name: "n",
            value: n as f64,
        });
    }
    if means.is_empty() || scales.is_empty() {
        return Err(Error::InvalidConfig(
            "mean/scale grids must be non-empty".into(),
        ));
    }
    for &s in scales {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::InvalidParameter {
                name: "scale",
                value: s,
            });
        }
    }
    let mut values = DMatrix::zeros(n, means.len() * scales.len());
    let mut col_names = Vec::with_capacity(values.ncols());
    for (a, &mu) in means.iter().enumerate() {
        for (b, &sigma) in scales.iter().enumerate() {
            let col = a * scales.len() + b;
            col_names.push(format!("mu{mu:.4}_sd{sigma:.4}"));
            for i in 0..n {
                let x = i as f64 / n as f64;
                // Wrap in x so every bump is periodic regardless of width.
                let frac = (x - mu) - (x - mu).floor();
                let mut total = 0.0;
                for k in [-1.0, 0.0, 1.0] {
                    let d = (frac + k) / sigma;
                    total += (-0.5 * d * d).exp();
                }
                values[(i, col)] = total;
            }
        }
    }
    DataMatrix::new(values, None, Some(col_names))
}

/// Block-diagonal matrix with strictly positive random entries inside each
/// `(rows, cols)` block and zeros elsewhere. Deterministic in the seed.
pub fn block_dataset(block_sizes: &[(usize, usize)], seed: u64) -> Result<DataMatrix> {
    if block_sizes.len() < 2 {
        return Err(Error::InvalidConfig(
            "block datasets need at least two blocks".into(),
        ));
    }
    let n: usize = block_sizes.iter().map(|&(r, _)| r).sum();
    let m: usize = block_sizes.iter().map(|&(_, c)| c).sum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = DMatrix::zeros(n, m);
    let mut row0 = 0;
    let mut col0 = 0;
    for &(rows, cols) in block_sizes {
        for i in 0..rows {
            for j in 0..cols {
                values[(row0 + i, col0 + j)] = rng.gen_range(0.5..1.5);
            }
        }
        row0 += rows;
        col0 += cols;
    }
    DataMatrix::new(values, None, None)
}
