//! The cost-to-distance maps: given a ground cost, produce the matrix of
//! pairwise regularized transport distances between dataset histograms.
//!
//! All entries share the form `W(a_i, a_j) + tau * ||C||_inf * ||a_i - a_j||_1`
//! where `W` is exact transport, the debiased entropic divergence, or its
//! large-regularization quadratic limit. The unordered pairs are independent
//! solves and run in parallel; assembly is position-indexed, so results do
//! not depend on the degree of parallelism.

use rayon::prelude::*;

use crate::coupling::Coupling;
use crate::cost::CostMatrix;
use crate::entropic::{self, SinkhornConfig, SinkhornKernel, NEGATIVE_DIVERGENCE_WARN};
use crate::error::{Error, Result};
use crate::exact::solve_exact;
use crate::simplex::{l1_distance, Dataset};

#[derive(Debug, Clone)]
pub enum Backend {
    Exact,
    Entropic(SinkhornConfig),
    MmdLimit,
}

#[derive(Debug, Clone)]
pub struct PhiConfig {
    /// Weight of the total-variation regularization term.
    pub tau: f64,
    pub backend: Backend,
    /// Keep the optimal vertex couplings (exact backend only); the
    /// uniqueness certificate consumes them.
    pub store_couplings: bool,
    /// Record the smallest eigenvalue of the Gibbs kernel (entropic backend
    /// only). Diagnostic, never enforced.
    pub check_kernel: bool,
}

impl PhiConfig {
    pub fn exact(tau: f64) -> Self {
        Self {
            tau,
            backend: Backend::Exact,
            store_couplings: false,
            check_kernel: false,
        }
    }

    pub fn entropic(tau: f64, sinkhorn: SinkhornConfig) -> Self {
        Self {
            tau,
            backend: Backend::Entropic(sinkhorn),
            store_couplings: false,
            check_kernel: false,
        }
    }

    pub fn mmd_limit(tau: f64) -> Self {
        Self {
            tau,
            backend: Backend::MmdLimit,
            store_couplings: false,
            check_kernel: false,
        }
    }

    pub fn with_couplings(mut self) -> Self {
        self.store_couplings = true;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.tau >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "tau",
                value: self.tau,
            });
        }
        if self.store_couplings && !matches!(self.backend, Backend::Exact) {
            return Err(Error::InvalidConfig(
                "couplings are only available from the exact backend".into(),
            ));
        }
        Ok(())
    }
}

/// Optimal couplings for every unordered histogram pair, indexed `i < j`.
#[derive(Debug, Clone)]
pub struct CouplingTable {
    m: usize,
    pairs: Vec<Coupling>,
}

impl CouplingTable {
    pub fn m(&self) -> usize {
        self.m
    }

    /// Coupling for the ordered pair `(i, j)` with `i < j`.
    pub fn get(&self, i: usize, j: usize) -> &Coupling {
        assert!(i < j && j < self.m, "pair index out of range");
        &self.pairs[pair_index(self.m, i, j)]
    }
}

#[inline]
pub(crate) fn pair_index(m: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < m);
    i * (2 * m - i - 1) / 2 + (j - i - 1)
}

#[derive(Debug, Clone)]
pub struct PhiOutput {
    /// Pairwise distance matrix; lives in the cost cone for the exact and
    /// entropic backends, and may carry signed entries for the linear limit
    /// map when the input cost is not conditionally negative.
    pub distances: CostMatrix,
    pub couplings: Option<CouplingTable>,
    /// Smallest Gibbs-kernel eigenvalue, when requested.
    pub kernel_min_eigenvalue: Option<f64>,
    /// Entropic entries whose raw divergence fell below the warning level
    /// before clamping.
    pub clamped_negative: usize,
}

/// Pairwise distance matrix between the histograms of `a` under ground cost `c`.
pub fn phi(a: &Dataset, c: &CostMatrix, cfg: &PhiConfig) -> Result<PhiOutput> {
    cfg.validate()?;
    if c.n() != a.dim() {
        return Err(Error::DimensionMismatch {
            context: "phi ground cost",
            left: c.n(),
            right: a.dim(),
        });
    }
    let m = a.len();
    let linf = c.linf_norm();
    let pairs: Vec<(usize, usize)> = (0..m)
        .flat_map(|i| ((i + 1)..m).map(move |j| (i, j)))
        .collect();
    let tau_term = |i: usize, j: usize| {
        let tv = l1_distance(a.get(i), a.get(j)).expect("dataset lengths agree");
        cfg.tau * linf * tv
    };

    match &cfg.backend {
        Backend::Exact => {
            let solved: Result<Vec<(f64, Coupling)>> = pairs
                .par_iter()
                .map(|&(i, j)| {
                    let sol = solve_exact(c, a.get(i), a.get(j))?;
                    Ok((sol.value, sol.coupling))
                })
                .collect();
            let solved = solved?;
            let upper: Vec<f64> = pairs
                .iter()
                .zip(&solved)
                .map(|(&(i, j), (value, _))| value + tau_term(i, j))
                .collect();
            let couplings = cfg.store_couplings.then(|| CouplingTable {
                m,
                pairs: solved.into_iter().map(|(_, coupling)| coupling).collect(),
            });
            Ok(PhiOutput {
                distances: CostMatrix::from_upper(m, upper)?,
                couplings,
                kernel_min_eigenvalue: None,
                clamped_negative: 0,
            })
        }
        Backend::Entropic(sinkhorn) => {
            let kernel = SinkhornKernel::new(c, sinkhorn)?;
            let self_costs: Result<Vec<f64>> = (0..m)
                .into_par_iter()
                .map(|i| kernel.cost(a.get(i), a.get(i)))
                .collect();
            let self_costs = self_costs?;
            let raw: Result<Vec<f64>> = pairs
                .par_iter()
                .map(|&(i, j)| {
                    let cross = kernel.cost(a.get(i), a.get(j))?;
                    Ok(cross - 0.5 * (self_costs[i] + self_costs[j]))
                })
                .collect();
            let raw = raw?;
            let clamped_negative = raw.iter().filter(|&&v| v < NEGATIVE_DIVERGENCE_WARN).count();
            let upper: Vec<f64> = pairs
                .iter()
                .zip(&raw)
                .map(|(&(i, j), &value)| value.max(0.0) + tau_term(i, j))
                .collect();
            let kernel_min_eigenvalue = cfg
                .check_kernel
                .then(|| entropic::kernel_min_eigenvalue(c, sinkhorn.epsilon));
            Ok(PhiOutput {
                distances: CostMatrix::from_upper(m, upper)?,
                couplings: None,
                kernel_min_eigenvalue,
                clamped_negative,
            })
        }
        Backend::MmdLimit => {
            // Entry (i, j) is the quadratic form -(a_i - a_j)^T C (a_i - a_j) / 2,
            // evaluated through the Gram matrix of the dataset against C.
            let amat = a.to_matrix();
            let gram = amat.transpose() * c.to_dense() * &amat;
            let upper: Vec<f64> = pairs
                .iter()
                .map(|&(i, j)| {
                    gram[(i, j)] - 0.5 * (gram[(i, i)] + gram[(j, j)]) + tau_term(i, j)
                })
                .collect();
            Ok(PhiOutput {
                distances: CostMatrix::from_upper_signed(m, upper)?,
                couplings: None,
                kernel_min_eigenvalue: None,
                clamped_negative: 0,
            })
        }
    }
}

/// Matrix of pairwise total-variation distances between dataset histograms.
pub fn l1_matrix(a: &Dataset) -> CostMatrix {
    let m = a.len();
    CostMatrix::from_fn(m, |i, j| {
        l1_distance(a.get(i), a.get(j)).expect("dataset lengths agree")
    })
    .expect("total variation is non-negative")
}
