//! Eigenvector learning on a square dataset.

use anyhow::bail;
use groundmetric::{phi, power_eigen, uniqueness_certificate, write_matrix_csv, CertificateStatus};

use crate::cli::{BackendArg, EigenArgs};
use crate::commands::{
    dataset_from_columns, iteration_config, load_matrix, phi_config, solve_config_echo,
    spectral_results, write_trace_csv, Artifacts,
};
use crate::plot;
use crate::report::{Phases, RunReport, UniquenessSummary};

pub fn run(args: &EigenArgs) -> anyhow::Result<i32> {
    let mut phases = Phases::new();
    phases.start("load");
    let matrix = load_matrix(&args.input, &args.csv)?;
    let dataset = dataset_from_columns(&matrix, args.normalize)?;
    if dataset.len() != dataset.dim() {
        bail!(
            "eigen mode needs a square dataset; got {} histograms of length {}",
            dataset.len(),
            dataset.dim()
        );
    }

    phases.start("solve");
    let phi_cfg = phi_config(&args.solve);
    let iter_cfg = iteration_config(&args.solve);
    let result = power_eigen(&dataset, &phi_cfg, &iter_cfg)?;

    let mut results = spectral_results(&result);

    if args.certify {
        if args.solve.backend != BackendArg::Exact {
            bail!("--certify needs the exact backend (optimal vertex couplings)");
        }
        phases.start("certify");
        let mut certify_cfg = phi_cfg.clone();
        certify_cfg.store_couplings = true;
        let out = phi(&dataset, &result.cost, &certify_cfg)?;
        let report = uniqueness_certificate(&dataset, &out.couplings.expect("requested"))?;
        results.uniqueness = Some(UniquenessSummary {
            status: match report.status {
                CertificateStatus::CertifiedUnique => "certified_unique".into(),
                CertificateStatus::Inconclusive => "inconclusive".into(),
            },
            node_count: report.node_count,
            component_count: report.component_count,
        });
    }

    phases.start("write");
    let mut artifacts = Artifacts::new(&args.out_dir)?;
    let cost_path = artifacts.path("Cstar.csv");
    write_matrix_csv(&cost_path, &result.cost.to_dense(), None, None)?;
    let trace_path = artifacts.path("trace.csv");
    write_trace_csv(&trace_path, &result.trace)?;
    let svg_path = artifacts.path("convergence.svg");
    let points: Vec<(f64, f64)> = result
        .trace
        .iter()
        .map(|r| (r.iteration as f64, r.hilbert_delta))
        .collect();
    std::fs::write(&svg_path, plot::convergence_svg(&points))?;

    let report_path = artifacts.path("report.json");
    let report = RunReport {
        command: "eigen".into(),
        config: {
            let mut echo = solve_config_echo(&args.solve);
            echo.input = Some(args.input.display().to_string());
            echo.out_dir = Some(args.out_dir.display().to_string());
            echo.normalize = Some(args.normalize);
            echo.certify = Some(args.certify);
            echo
        },
        results,
        artifacts: artifacts.into_list(),
        timings: phases.into_records(),
    };
    crate::report::write_report(&report_path, &report)?;
    crate::commands::verify_artifacts(&report.artifacts)?;

    eprintln!(
        "eigen: status {}, lambda {:.6}, {} iterations, residual {:.3e}",
        report.results.status.as_deref().unwrap_or("?"),
        result.lambda,
        result.iterations,
        result.final_residual
    );
    Ok(if result.converged { 0 } else { 3 })
}
