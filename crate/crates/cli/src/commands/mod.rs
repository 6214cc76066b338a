//! Command implementations. Each returns the process exit code on success;
//! errors bubble up and are mapped to exit codes in `main`.

pub mod check;
pub mod eigen;
pub mod gen;
pub mod singular;

use std::path::{Path, PathBuf};

use groundmetric::{
    read_csv, CostMatrix, CsvOptions, DataMatrix, Dataset, Histogram, PhiConfig, SinkhornConfig,
    SpectralResult, TraceRecord,
};

use crate::cli::{BackendArg, CsvArgs, InitArg, SolveArgs};
use crate::report::{ConfigEcho, Results};

pub fn load_matrix(path: &Path, csv: &CsvArgs) -> groundmetric::Result<DataMatrix> {
    read_csv(
        path,
        &CsvOptions {
            header: csv.header,
            row_names: csv.row_names,
        },
    )
}

/// Columns of a data matrix as histograms, with or without renormalization.
pub fn dataset_from_columns(u: &DataMatrix, normalize: bool) -> groundmetric::Result<Dataset> {
    let values = u.values();
    let histograms: Vec<Histogram> = (0..values.ncols())
        .map(|j| {
            let column: Vec<f64> = values.column(j).iter().copied().collect();
            if normalize {
                Histogram::normalized(&column)
            } else {
                Histogram::new(column)
            }
        })
        .collect::<groundmetric::Result<_>>()?;
    Dataset::new(histograms, u.col_names().map(<[String]>::to_vec))
}

pub fn load_cost(path: &Path, csv: &CsvArgs) -> groundmetric::Result<CostMatrix> {
    let matrix = load_matrix(path, csv)?;
    CostMatrix::from_dense(matrix.values())
}

pub fn sinkhorn_from_args(solve: &SolveArgs) -> SinkhornConfig {
    let mut cfg = SinkhornConfig::new(solve.eps);
    cfg.marginal_tolerance = solve.marginal_tol;
    cfg.max_iterations = solve.sinkhorn_max_iter;
    if let Some(log_domain) = solve.log_domain {
        cfg.log_domain = log_domain;
    }
    cfg
}

pub fn phi_config(solve: &SolveArgs) -> PhiConfig {
    let mut cfg = match solve.backend {
        BackendArg::Exact => PhiConfig::exact(solve.tau),
        BackendArg::Entropic => PhiConfig::entropic(solve.tau, sinkhorn_from_args(solve)),
        BackendArg::Mmd => PhiConfig::mmd_limit(solve.tau),
    };
    cfg.check_kernel = solve.check_kernel;
    cfg
}

pub fn iteration_config(solve: &SolveArgs) -> groundmetric::IterationConfig {
    groundmetric::IterationConfig {
        initial_cost: match solve.init {
            InitArg::L1 => groundmetric::InitialCost::L1Matrix,
            InitArg::Random => groundmetric::InitialCost::RandomPositive { seed: solve.seed },
        },
        tolerance_hilbert: solve.tol_hilbert,
        tolerance_residual: solve.tol_residual,
        max_iterations: solve.max_iter,
    }
}

pub fn solve_config_echo(solve: &SolveArgs) -> ConfigEcho {
    let sinkhorn = matches!(solve.backend, BackendArg::Entropic).then(|| sinkhorn_from_args(solve));
    ConfigEcho {
        tau: Some(solve.tau),
        backend: Some(solve.backend.to_string()),
        epsilon: sinkhorn.as_ref().map(|s| s.epsilon),
        marginal_tolerance: sinkhorn.as_ref().map(|s| s.marginal_tolerance),
        sinkhorn_max_iterations: sinkhorn.as_ref().map(|s| s.max_iterations),
        log_domain: sinkhorn.as_ref().map(|s| s.log_domain),
        tolerance_hilbert: Some(solve.tol_hilbert),
        tolerance_residual: Some(solve.tol_residual),
        max_iterations: Some(solve.max_iter),
        init: Some(solve.init.to_string()),
        seed: Some(solve.seed),
        check_kernel: Some(solve.check_kernel),
        ..ConfigEcho::default()
    }
}

pub fn spectral_results(result: &SpectralResult) -> Results {
    Results {
        converged: Some(result.converged),
        status: Some(status_name(result.status).to_string()),
        lambda: Some(result.lambda),
        mu: result.mu,
        iterations: Some(result.iterations),
        final_residual: Some(result.final_residual),
        final_hilbert_delta: result.trace.last().map(|r| r.hilbert_delta),
        kernel_min_eigenvalues: (!result.kernel_min_eigenvalues.is_empty())
            .then(|| result.kernel_min_eigenvalues.clone()),
        clamped_negative_entries: Some(result.clamped_negative_entries),
        ..Results::default()
    }
}

pub fn status_name(status: groundmetric::ConvergenceStatus) -> &'static str {
    match status {
        groundmetric::ConvergenceStatus::Converged => "converged",
        groundmetric::ConvergenceStatus::MaxIterations => "max_iterations",
        groundmetric::ConvergenceStatus::DegenerateCollapse => "degenerate_collapse",
    }
}

pub fn write_trace_csv(path: &Path, trace: &[TraceRecord]) -> anyhow::Result<()> {
    let mut out = String::from("iteration,hilbert_delta,residual,lambda\n");
    for record in trace {
        out.push_str(&format!(
            "{},{},{},{}\n",
            record.iteration, record.hilbert_delta, record.residual, record.lambda
        ));
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Records written artifacts and verifies their existence at report time.
pub struct Artifacts {
    out_dir: PathBuf,
    written: Vec<String>,
}

impl Artifacts {
    pub fn new(out_dir: &Path) -> anyhow::Result<Self> {
        std::fs::create_dir_all(out_dir)?;
        Ok(Self {
            out_dir: out_dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn path(&mut self, name: &str) -> PathBuf {
        let path = self.out_dir.join(name);
        self.written.push(path.display().to_string());
        path
    }

    pub fn into_list(self) -> Vec<String> {
        self.written
    }
}

/// Successful runs must leave every listed artifact on disk.
pub fn verify_artifacts(paths: &[String]) -> anyhow::Result<()> {
    for name in paths {
        if !Path::new(name).exists() {
            anyhow::bail!("artifact {name} was not written");
        }
    }
    Ok(())
}

/// Maps distinct labels (sorted) to palette class indices for scatter plots.
pub fn label_classes(labels: Option<&[String]>, count: usize) -> Vec<usize> {
    match labels {
        None => vec![0; count],
        Some(names) => {
            let mut distinct: Vec<&String> = names.iter().collect();
            distinct.sort();
            distinct.dedup();
            names
                .iter()
                .map(|n| distinct.binary_search(&n).unwrap_or(0))
                .collect()
        }
    }
}
