//! Diagnostic checks with pass/fail reporting.

use anyhow::bail;
use groundmetric::{
    cone_membership, pca_eigencosts, phi, phi_infty, uniqueness_certificate, CertificateStatus,
    ConeMembership, PhiConfig, SinkhornConfig,
};

use crate::cli::{CheckKind, CsvArgs};
use crate::commands::{dataset_from_columns, load_cost, load_matrix, Artifacts};
use crate::report::{
    ConeSummary, ConfigEcho, PcaPairSummary, PcaSummary, Phases, Results, RunReport,
    UniquenessSummary,
};

pub fn run(kind: &CheckKind) -> anyhow::Result<i32> {
    match kind {
        CheckKind::Uniqueness {
            data,
            csv,
            normalize,
            cost,
            tau,
            out_dir,
        } => {
            let mut phases = Phases::new();
            phases.start("load");
            let dataset = dataset_from_columns(&load_matrix(data, csv)?, *normalize)?;
            let cost = load_cost(cost, csv)?;
            phases.start("solve");
            let mut cfg = PhiConfig::exact(*tau);
            cfg.store_couplings = true;
            let out = phi(&dataset, &cost, &cfg)?;
            let report = uniqueness_certificate(&dataset, &out.couplings.expect("requested"))?;
            let certified = report.status == CertificateStatus::CertifiedUnique;
            println!(
                "uniqueness: {} ({} nodes, {} components)",
                if certified { "certified_unique" } else { "inconclusive" },
                report.node_count,
                report.component_count
            );
            let results = Results {
                uniqueness: Some(UniquenessSummary {
                    status: if certified {
                        "certified_unique".into()
                    } else {
                        "inconclusive".into()
                    },
                    node_count: report.node_count,
                    component_count: report.component_count,
                }),
                passed: Some(certified),
                ..Results::default()
            };
            write_check_report(out_dir, "uniqueness", data_echo(csv, *tau), results, phases)
        }
        CheckKind::Cone { cost, csv, out_dir } => {
            let mut phases = Phases::new();
            phases.start("load");
            let cost = load_cost(cost, csv)?;
            phases.start("solve");
            let summary = match cone_membership(&cost) {
                ConeMembership::InCone { dim } => {
                    println!("cone: member, embedding dimension {dim}");
                    ConeSummary {
                        in_cone: true,
                        dim: Some(dim),
                        quadratic_form: None,
                    }
                }
                ConeMembership::NotInCone { quadratic_form, .. } => {
                    println!("cone: not a member (witness quadratic form {quadratic_form:.3e})");
                    ConeSummary {
                        in_cone: false,
                        dim: None,
                        quadratic_form: Some(quadratic_form),
                    }
                }
            };
            let passed = summary.in_cone;
            let results = Results {
                cone: Some(summary),
                passed: Some(passed),
                ..Results::default()
            };
            write_check_report(out_dir, "cone", ConfigEcho::default(), results, phases)
        }
        CheckKind::Pca {
            data,
            csv,
            normalize,
            k,
            out_dir,
        } => {
            let mut phases = Phases::new();
            phases.start("load");
            let dataset = dataset_from_columns(&load_matrix(data, csv)?, *normalize)?;
            phases.start("solve");
            let pairs = pca_eigencosts(&dataset, *k)?;
            let mut summaries = Vec::with_capacity(pairs.len());
            let mut max_residual = 0.0_f64;
            for pair in &pairs {
                max_residual = max_residual.max(pair.phi_residual);
                let dim = match cone_membership(&pair.induced_cost) {
                    ConeMembership::InCone { dim } => Some(dim),
                    ConeMembership::NotInCone { .. } => None,
                };
                summaries.push(PcaPairSummary {
                    lambda_re: pair.lambda.re,
                    lambda_im: pair.lambda.im,
                    phi_eigenvalue: pair.phi_eigenvalue(),
                    residual: pair.phi_residual,
                    embedding_dim: dim,
                });
            }
            let scale = pairs
                .iter()
                .map(|p| p.induced_cost.linf_norm())
                .fold(0.0_f64, f64::max);
            let passed = max_residual <= (1e-8 * scale).max(1e-13);
            println!(
                "pca: {} eigencosts, max fixed-point residual {max_residual:.3e} ({})",
                pairs.len(),
                if passed { "pass" } else { "fail" }
            );
            let results = Results {
                pca: Some(PcaSummary {
                    max_residual,
                    pairs: summaries,
                }),
                passed: Some(passed),
                ..Results::default()
            };
            let echo = ConfigEcho {
                k: Some(*k),
                ..ConfigEcho::default()
            };
            write_check_report(out_dir, "pca", echo, results, phases)
        }
        CheckKind::MmdLimit {
            data,
            csv,
            normalize,
            cost,
            eps,
            tau,
            threshold,
            out_dir,
        } => {
            let mut phases = Phases::new();
            phases.start("load");
            let dataset = dataset_from_columns(&load_matrix(data, csv)?, *normalize)?;
            let cost = load_cost(cost, csv)?;
            phases.start("solve");
            if *tau != 0.0 {
                bail!("the limit comparison is defined for tau = 0");
            }
            let limit = phi_infty(&dataset, &cost)?;
            let entropic = phi(
                &dataset,
                &cost,
                &PhiConfig::entropic(0.0, SinkhornConfig::new(*eps)),
            )?
            .distances;
            let gap = limit.linf_distance(&entropic)? / limit.linf_norm().max(1e-300);
            let passed = gap <= *threshold;
            println!(
                "mmd-limit: relative gap {gap:.3e} at eps {eps} ({})",
                if passed { "pass" } else { "fail" }
            );
            let results = Results {
                mmd_relative_gap: Some(gap),
                passed: Some(passed),
                ..Results::default()
            };
            let echo = ConfigEcho {
                epsilon: Some(*eps),
                threshold: Some(*threshold),
                tau: Some(*tau),
                ..ConfigEcho::default()
            };
            write_check_report(out_dir, "mmd-limit", echo, results, phases)
        }
    }
}

fn data_echo(_csv: &CsvArgs, tau: f64) -> ConfigEcho {
    ConfigEcho {
        tau: Some(tau),
        ..ConfigEcho::default()
    }
}

fn write_check_report(
    out_dir: &std::path::Path,
    check: &str,
    mut echo: ConfigEcho,
    results: Results,
    phases: Phases,
) -> anyhow::Result<i32> {
    echo.check = Some(check.to_string());
    echo.out_dir = Some(out_dir.display().to_string());
    let mut artifacts = Artifacts::new(out_dir)?;
    let report_path = artifacts.path("report.json");
    let report = RunReport {
        command: "check".into(),
        config: echo,
        results,
        artifacts: artifacts.into_list(),
        timings: phases.into_records(),
    };
    crate::report::write_report(&report_path, &report)?;
    crate::commands::verify_artifacts(&report.artifacts)?;
    Ok(0)
}
