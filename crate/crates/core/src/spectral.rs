//! Power iterations extracting fixed points of the distance maps, together
//! with convergence diagnostics and the coupling-support uniqueness
//! certificate.

use serde::{Deserialize, Serialize};

use crate::cost::{hilbert_metric, CostMatrix};
use crate::distance_map::{pair_index, phi, CouplingTable, PhiConfig};
use crate::error::{Error, Result};
use crate::simplex::Dataset;

/// Choice of starting cost for the iterations.
#[derive(Debug, Clone)]
pub enum InitialCost {
    /// Matrix of pairwise total-variation distances. Deterministic, and
    /// strictly positive whenever the histograms are pairwise distinct.
    L1Matrix,
    RandomPositive { seed: u64 },
    UserSupplied(CostMatrix),
}

#[derive(Debug, Clone)]
pub struct IterationConfig {
    pub initial_cost: InitialCost,
    pub tolerance_hilbert: f64,
    pub tolerance_residual: f64,
    pub max_iterations: usize,
}

impl Default for IterationConfig {
    fn default() -> Self {
        Self {
            initial_cost: InitialCost::L1Matrix,
            tolerance_hilbert: 1e-8,
            tolerance_residual: 1e-8,
            max_iterations: 200,
        }
    }
}

impl IterationConfig {
    fn validate(&self) -> Result<()> {
        if !(self.tolerance_hilbert > 0.0) {
            return Err(Error::InvalidParameter {
                name: "tolerance_hilbert",
                value: self.tolerance_hilbert,
            });
        }
        if !(self.tolerance_residual > 0.0) {
            return Err(Error::InvalidParameter {
                name: "tolerance_residual",
                value: self.tolerance_residual,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergenceStatus {
    /// The projective distance between iterates reached its tolerance.
    Converged,
    /// Iteration budget exhausted first.
    MaxIterations,
    /// An iterate left the positive cone (an off-diagonal entry hit zero or
    /// went negative); expected for tau = 0 on degenerate data.
    DegenerateCollapse,
}

/// One row of the convergence trace.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    /// Hilbert projective distance to the previous iterate (infinite when an
    /// iterate leaves the positive cone).
    pub hilbert_delta: f64,
    /// Sup-norm residual of the eigen relation at this step.
    pub residual: f64,
    /// Current eigenvalue estimate (the pre-normalization sup norm).
    pub lambda: f64,
}

#[derive(Debug, Clone)]
pub struct SpectralResult {
    /// Converged cost, sup-normalized to 1.
    pub cost: CostMatrix,
    /// Second cost of the singular pair, when applicable.
    pub cost_d: Option<CostMatrix>,
    pub lambda: f64,
    pub mu: Option<f64>,
    pub trace: Vec<TraceRecord>,
    pub converged: bool,
    pub status: ConvergenceStatus,
    /// `||Phi(C*) - lambda C*||_inf` from one extra evaluation at the end.
    pub final_residual: f64,
    pub iterations: usize,
    /// Per-iteration smallest Gibbs-kernel eigenvalue when kernel checking
    /// is enabled on the entropic backend.
    pub kernel_min_eigenvalues: Vec<f64>,
    /// Entropic entries whose raw divergence dipped below the warning level
    /// before clamping, summed over all evaluations.
    pub clamped_negative_entries: usize,
}

fn initial_cost(
    init: &InitialCost,
    n: usize,
    fallback_dataset: &Dataset,
) -> Result<CostMatrix> {
    let c0 = match init {
        InitialCost::L1Matrix => crate::distance_map::l1_matrix(fallback_dataset),
        InitialCost::RandomPositive { seed } => CostMatrix::random_positive(n, *seed),
        InitialCost::UserSupplied(c) => c.clone(),
    };
    if c0.n() != n {
        return Err(Error::DimensionMismatch {
            context: "initial cost",
            left: c0.n(),
            right: n,
        });
    }
    if !c0.is_strictly_positive() {
        return Err(Error::InvalidConfig(
            "initial cost must have strictly positive off-diagonal entries".into(),
        ));
    }
    Ok(c0.linf_normalized().0)
}

/// Leading eigenvector of the distance map on a square dataset:
/// iterate `C <- Phi(C) / ||Phi(C)||_inf` until the projective distance
/// between successive iterates falls below tolerance.
pub fn power_eigen(
    a: &Dataset,
    phi_cfg: &PhiConfig,
    iter_cfg: &IterationConfig,
) -> Result<SpectralResult> {
    iter_cfg.validate()?;
    if a.len() != a.dim() {
        return Err(Error::DimensionMismatch {
            context: "power_eigen requires a square dataset",
            left: a.dim(),
            right: a.len(),
        });
    }
    a.require_pairwise_distinct()?;
    let n = a.dim();
    let mut current = initial_cost(&iter_cfg.initial_cost, n, a)?;

    let mut trace = Vec::new();
    let mut kernel_eigs = Vec::new();
    let mut clamped = 0usize;
    let mut status = ConvergenceStatus::MaxIterations;
    let mut lambda = 0.0;

    for k in 0..iter_cfg.max_iterations {
        let out = phi(a, &current, phi_cfg)?;
        clamped += out.clamped_negative;
        if let Some(e) = out.kernel_min_eigenvalue {
            kernel_eigs.push(e);
        }
        let image = out.distances;
        let (next, norm) = image.linf_normalized();
        lambda = norm;
        if lambda <= 0.0 {
            status = ConvergenceStatus::DegenerateCollapse;
            trace.push(TraceRecord {
                iteration: k,
                hilbert_delta: f64::INFINITY,
                residual: lambda,
                lambda,
            });
            break;
        }
        let residual = image.linf_distance(&current.scaled(lambda)).expect("same size");
        if !next.is_strictly_positive() {
            status = ConvergenceStatus::DegenerateCollapse;
            trace.push(TraceRecord {
                iteration: k,
                hilbert_delta: f64::INFINITY,
                residual,
                lambda,
            });
            current = next;
            break;
        }
        let delta = hilbert_metric(&next, &current)?;
        trace.push(TraceRecord {
            iteration: k,
            hilbert_delta: delta,
            residual,
            lambda,
        });
        current = next;
        if delta <= iter_cfg.tolerance_hilbert || residual <= iter_cfg.tolerance_residual {
            status = ConvergenceStatus::Converged;
            break;
        }
    }

    let final_residual = match status {
        ConvergenceStatus::DegenerateCollapse => f64::INFINITY,
        _ => {
            let image = phi(a, &current, phi_cfg)?.distances;
            image.linf_distance(&current.scaled(lambda)).expect("same size")
        }
    };
    Ok(SpectralResult {
        cost: current,
        cost_d: None,
        lambda,
        mu: None,
        converged: status == ConvergenceStatus::Converged,
        status,
        final_residual,
        iterations: trace.len(),
        trace,
        kernel_min_eigenvalues: kernel_eigs,
        clamped_negative_entries: clamped,
    })
}

/// Leading singular pair for two datasets: alternate
/// `D <- Phi_A(C)/||.||` and `C <- Phi_B(D)/||.||`.
/// `a` holds histograms of length n, `b` histograms of length m = a.len().
pub fn power_singular(
    a: &Dataset,
    b: &Dataset,
    phi_cfg: &PhiConfig,
    iter_cfg: &IterationConfig,
) -> Result<SpectralResult> {
    iter_cfg.validate()?;
    if a.dim() != b.len() || b.dim() != a.len() {
        return Err(Error::DimensionMismatch {
            context: "singular datasets must have transposed shapes",
            left: a.dim(),
            right: b.len(),
        });
    }
    a.require_pairwise_distinct()?;
    b.require_pairwise_distinct()?;
    let n = a.dim();

    // The iterate C lives on the bins of `a`, which index the histograms
    // of `b`, so the deterministic init uses the distances within `b`.
    let mut current = initial_cost(&iter_cfg.initial_cost, n, b)?;
    let mut previous_d: Option<CostMatrix> = None;

    let mut trace = Vec::new();
    let mut kernel_eigs = Vec::new();
    let mut clamped = 0usize;
    let mut status = ConvergenceStatus::MaxIterations;
    let mut lambda = 0.0;
    let mut mu = 0.0;
    let mut current_d = CostMatrix::zeros(a.len());

    for k in 0..iter_cfg.max_iterations {
        let out_a = phi(a, &current, phi_cfg)?;
        clamped += out_a.clamped_negative;
        if let Some(e) = out_a.kernel_min_eigenvalue {
            kernel_eigs.push(e);
        }
        let (next_d, norm_a) = out_a.distances.linf_normalized();
        lambda = norm_a;
        if lambda <= 0.0 {
            status = ConvergenceStatus::DegenerateCollapse;
            trace.push(TraceRecord {
                iteration: k,
                hilbert_delta: f64::INFINITY,
                residual: lambda,
                lambda,
            });
            break;
        }

        if !next_d.is_strictly_positive() {
            status = ConvergenceStatus::DegenerateCollapse;
            trace.push(TraceRecord {
                iteration: k,
                hilbert_delta: f64::INFINITY,
                residual: f64::INFINITY,
                lambda,
            });
            current_d = next_d;
            break;
        }

        let out_b = phi(b, &next_d, phi_cfg)?;
        clamped += out_b.clamped_negative;
        let (next_c, norm_b) = out_b.distances.linf_normalized();
        mu = norm_b;
        if mu <= 0.0 || !next_c.is_strictly_positive() {
            status = ConvergenceStatus::DegenerateCollapse;
            trace.push(TraceRecord {
                iteration: k,
                hilbert_delta: f64::INFINITY,
                residual: f64::INFINITY,
                lambda,
            });
            current_d = next_d;
            break;
        }

        let delta_c = hilbert_metric(&next_c, &current)?;
        let delta = match &previous_d {
            Some(prev) => delta_c.max(hilbert_metric(&next_d, prev)?),
            None => delta_c,
        };
        // Residual estimate from successive normalized iterates.
        let residual = {
            let r_c = next_c.linf_distance(&current).expect("same size") * mu;
            match &previous_d {
                Some(prev) => {
                    r_c.max(next_d.linf_distance(prev).expect("same size") * lambda)
                }
                None => r_c,
            }
        };
        trace.push(TraceRecord {
            iteration: k,
            hilbert_delta: delta,
            residual,
            lambda,
        });
        previous_d = Some(next_d.clone());
        current_d = next_d;
        current = next_c;
        if delta <= iter_cfg.tolerance_hilbert {
            status = ConvergenceStatus::Converged;
            break;
        }
    }

    let final_residual = match status {
        ConvergenceStatus::DegenerateCollapse => f64::INFINITY,
        _ => {
            let image_a = phi(a, &current, phi_cfg)?.distances;
            let r_a = image_a
                .linf_distance(&current_d.scaled(lambda))
                .expect("same size");
            let image_b = phi(b, &current_d, phi_cfg)?.distances;
            let r_b = image_b
                .linf_distance(&current.scaled(mu))
                .expect("same size");
            r_a.max(r_b)
        }
    };
    Ok(SpectralResult {
        cost: current,
        cost_d: Some(current_d),
        lambda,
        mu: Some(mu),
        converged: status == ConvergenceStatus::Converged,
        status,
        final_residual,
        iterations: trace.len(),
        trace,
        kernel_min_eigenvalues: kernel_eigs,
        clamped_negative_entries: clamped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateStatus {
    /// The coupling-support graph is strongly connected; the eigenvector is
    /// the unique one in the cone.
    CertifiedUnique,
    /// Not a proof of non-uniqueness: the check quantifies over one choice
    /// of optimal coupling per pair.
    Inconclusive,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateReport {
    pub status: CertificateStatus,
    pub node_count: usize,
    pub component_count: usize,
    /// Strongly connected components as lists of unordered index pairs.
    pub components: Vec<Vec<(usize, usize)>>,
}

/// Uniqueness certificate for an eigenvector from its optimal couplings:
/// the pair `{i, j}` is tied to the pair `{k, l}` whenever the optimal plan
/// between histograms i and j carries mass at `(k, l)` or `(l, k)`. The
/// relation is symmetric (edges run both ways), and the eigenvector is
/// certified unique when the resulting graph is strongly connected.
pub fn uniqueness_certificate(a: &Dataset, couplings: &CouplingTable) -> Result<CertificateReport> {
    let m = a.len();
    if couplings.m() != m {
        return Err(Error::DimensionMismatch {
            context: "coupling table size",
            left: couplings.m(),
            right: m,
        });
    }
    if m < 2 {
        return Err(Error::InvalidConfig(
            "the certificate needs at least two histograms".into(),
        ));
    }
    let node_count = m * (m - 1) / 2;
    let mut graph: Vec<Vec<usize>> = vec![Vec::new(); node_count];
    for i in 0..m {
        for j in (i + 1)..m {
            let node = pair_index(m, i, j);
            for &(k, l) in couplings.get(i, j).support() {
                if k == l {
                    continue;
                }
                let target = pair_index(m, k.min(l), k.max(l));
                graph[node].push(target);
                graph[target].push(node);
            }
        }
    }
    for targets in &mut graph {
        targets.sort_unstable();
        targets.dedup();
    }
    let components = tarjan_scc(&graph);
    let status = if components.len() == 1 {
        CertificateStatus::CertifiedUnique
    } else {
        CertificateStatus::Inconclusive
    };
    let unpack = |node: usize| -> (usize, usize) {
        for i in 0..m {
            for j in (i + 1)..m {
                if pair_index(m, i, j) == node {
                    return (i, j);
                }
            }
        }
        unreachable!("node index within range")
    };
    let mut named: Vec<Vec<(usize, usize)>> = components
        .iter()
        .map(|comp| {
            let mut pairs: Vec<(usize, usize)> = comp.iter().map(|&n| unpack(n)).collect();
            pairs.sort_unstable();
            pairs
        })
        .collect();
    named.sort();
    Ok(CertificateReport {
        status,
        node_count,
        component_count: named.len(),
        components: named,
    })
}

/// Iterative Tarjan decomposition (explicit stack, no recursion depth limit).
fn tarjan_scc(graph: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = graph.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut components = Vec::new();
    let mut counter = 0usize;
    // (node, next edge offset)
    let mut call_stack: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        call_stack.push((root, 0));
        while let Some(&mut (v, ref mut edge)) = call_stack.last_mut() {
            if *edge == 0 {
                index[v] = counter;
                low[v] = counter;
                counter += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            if let Some(&w) = graph[v].get(*edge) {
                *edge += 1;
                if index[w] == usize::MAX {
                    call_stack.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call_stack.pop();
                if let Some(&mut (parent, _)) = call_stack.last_mut() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut component = Vec::new();
                    loop {
                        let w = stack.pop().expect("scc stack underflow");
                        on_stack[w] = false;
                        component.push(w);
                        if w == v {
                            break;
                        }
                    }
                    components.push(component);
                }
            }
        }
    }
    components
}

#[derive(Debug, Clone)]
pub struct ConsistencyReport {
    pub lambdas: Vec<f64>,
    pub lambda_spread: f64,
    /// Largest pairwise projective distance between converged costs.
    pub max_pairwise_hilbert: f64,
    pub all_converged: bool,
}

/// Runs the eigen iteration from several random starting costs and reports
/// the spread of the resulting eigenvalues and eigenvectors.
pub fn eigenvalue_consistency(
    a: &Dataset,
    phi_cfg: &PhiConfig,
    iter_cfg: &IterationConfig,
    trials: usize,
    seed: u64,
) -> Result<ConsistencyReport> {
    let mut lambdas = Vec::with_capacity(trials);
    let mut costs = Vec::with_capacity(trials);
    let mut all_converged = true;
    for t in 0..trials {
        let cfg = IterationConfig {
            initial_cost: InitialCost::RandomPositive {
                seed: seed.wrapping_add(t as u64),
            },
            ..iter_cfg.clone()
        };
        let result = power_eigen(a, phi_cfg, &cfg)?;
        all_converged &= result.converged;
        lambdas.push(result.lambda);
        costs.push(result.cost);
    }
    let lambda_spread = match lambdas.len() {
        0 => 0.0,
        _ => {
            let max = lambdas.iter().cloned().fold(f64::MIN, f64::max);
            let min = lambdas.iter().cloned().fold(f64::MAX, f64::min);
            max - min
        }
    };
    let mut max_pairwise_hilbert = 0.0_f64;
    for i in 0..costs.len() {
        for j in (i + 1)..costs.len() {
            if costs[i].is_strictly_positive() && costs[j].is_strictly_positive() {
                max_pairwise_hilbert =
                    max_pairwise_hilbert.max(hilbert_metric(&costs[i], &costs[j])?);
            } else {
                max_pairwise_hilbert = f64::INFINITY;
            }
        }
    }
    Ok(ConsistencyReport {
        lambdas,
        lambda_spread,
        max_pairwise_hilbert,
        all_converged,
    })
}
