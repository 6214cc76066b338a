//! Singular-pair learning on a rectangular data matrix, with optional idx
//! ingestion, class filtering, subsampling and count preprocessing.

use anyhow::{bail, Context};
use groundmetric::{
    bistochastic_scaling, canonical_normalization, classical_mds, power_singular, read_idx,
    scrna_preprocess, write_matrix_csv, DataMatrix,
};
use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cli::{NormalizationArg, SingularArgs};
use crate::commands::{
    iteration_config, label_classes, load_matrix, phi_config, sinkhorn_from_args,
    solve_config_echo, spectral_results, write_trace_csv, Artifacts,
};
use crate::plot;
use crate::report::{Phases, RunReport};

pub fn run(args: &SingularArgs) -> anyhow::Result<i32> {
    let mut phases = Phases::new();
    phases.start("load");
    let mut matrix = ingest(args)?;

    if let Some(recipe) = &args.preprocess {
        phases.start("preprocess");
        matrix = preprocess(&matrix, recipe)?;
    }

    // Blank features or samples (common in image data) break normalization.
    let (pruned, kept_rows, kept_cols) = matrix.prune_zero_lines();
    let pruned_rows = matrix.nrows() - kept_rows.len();
    let pruned_cols = matrix.ncols() - kept_cols.len();
    let matrix = pruned;

    phases.start("normalize");
    let normalized = match args.normalization {
        NormalizationArg::Canonical => matrix.clone(),
        NormalizationArg::Bistochastic => {
            let scaled = bistochastic_scaling(matrix.values(), &sinkhorn_from_args(&args.solve))?;
            DataMatrix::new(
                scaled,
                matrix.row_names().map(<[String]>::to_vec),
                matrix.col_names().map(<[String]>::to_vec),
            )?
        }
    };
    let (a, b) = canonical_normalization(&normalized)?;

    phases.start("solve");
    let phi_cfg = phi_config(&args.solve);
    let iter_cfg = iteration_config(&args.solve);
    let result = power_singular(&a, &b, &phi_cfg, &iter_cfg)?;
    let cost_c = result.cost.clone();
    let cost_d = result.cost_d.clone().expect("singular runs produce a pair");

    phases.start("analyze");
    let mds_cols = classical_mds(&cost_d, 2)?;
    let mds_rows = classical_mds(&cost_c, 2)?;

    phases.start("write");
    let mut artifacts = Artifacts::new(&args.out_dir)?;
    let c_path = artifacts.path("Cstar.csv");
    write_matrix_csv(&c_path, &cost_c.to_dense(), None, None)?;
    let d_path = artifacts.path("Dstar.csv");
    write_matrix_csv(&d_path, &cost_d.to_dense(), None, None)?;
    let trace_path = artifacts.path("trace.csv");
    write_trace_csv(&trace_path, &result.trace)?;

    let svg_path = artifacts.path("convergence.svg");
    let points: Vec<(f64, f64)> = result
        .trace
        .iter()
        .map(|r| (r.iteration as f64, r.hilbert_delta))
        .collect();
    std::fs::write(&svg_path, plot::convergence_svg(&points))?;

    // Heatmaps of the learned costs, optionally ordered by clustering.
    let heat = |cost: &groundmetric::CostMatrix, sort: bool, title: &str| {
        let dense = cost.to_dense();
        let shown = if sort {
            let order = plot::clustering_order(&dense);
            DMatrix::from_fn(dense.nrows(), dense.ncols(), |i, j| {
                dense[(order[i], order[j])]
            })
        } else {
            dense
        };
        plot::heatmap(&shown, title)
    };
    let heat_c_path = artifacts.path("heatmap_C.svg");
    std::fs::write(&heat_c_path, heat(&cost_c, args.sort_heatmaps, "learned cost C"))?;
    let heat_d_path = artifacts.path("heatmap_D.svg");
    std::fs::write(&heat_d_path, heat(&cost_d, args.sort_heatmaps, "learned cost D"))?;

    // MDS embeddings: columns of the data under D, rows under C.
    let col_ids: Vec<String> = match matrix.col_names() {
        Some(names) => names.to_vec(),
        None => (0..matrix.ncols()).map(|j| format!("c{j}")).collect(),
    };
    let row_ids: Vec<String> = match matrix.row_names() {
        Some(names) => names.to_vec(),
        None => (0..matrix.nrows()).map(|i| format!("r{i}")).collect(),
    };
    let mds_cols_path = artifacts.path("mds_cols.csv");
    write_matrix_csv(
        &mds_cols_path,
        &mds_cols.coordinates,
        Some(&col_ids),
        Some(&["x".into(), "y".into()]),
    )?;
    let mds_rows_path = artifacts.path("mds_rows.csv");
    write_matrix_csv(
        &mds_rows_path,
        &mds_rows.coordinates,
        Some(&row_ids),
        Some(&["x".into(), "y".into()]),
    )?;
    let scatter_points = |coords: &DMatrix<f64>| -> Vec<(f64, f64)> {
        (0..coords.nrows())
            .map(|i| (coords[(i, 0)], coords[(i, 1)]))
            .collect()
    };
    let mds_cols_svg = artifacts.path("mds_cols.svg");
    std::fs::write(
        &mds_cols_svg,
        plot::scatter(
            &scatter_points(&mds_cols.coordinates),
            &label_classes(matrix.col_names(), matrix.ncols()),
            "samples under learned cost D",
        ),
    )?;
    let mds_rows_svg = artifacts.path("mds_rows.svg");
    std::fs::write(
        &mds_rows_svg,
        plot::scatter(
            &scatter_points(&mds_rows.coordinates),
            &label_classes(matrix.row_names(), matrix.nrows()),
            "features under learned cost C",
        ),
    )?;

    let mut results = spectral_results(&result);
    results.rows = Some(matrix.nrows());
    results.cols = Some(matrix.ncols());
    results.pruned_rows = Some(pruned_rows);
    results.pruned_cols = Some(pruned_cols);

    let report_path = artifacts.path("report.json");
    let report = RunReport {
        command: "singular".into(),
        config: {
            let mut echo = solve_config_echo(&args.solve);
            echo.input = args.input.as_ref().map(|p| p.display().to_string());
            echo.idx_images = args.idx_images.as_ref().map(|p| p.display().to_string());
            echo.idx_labels = args.idx_labels.as_ref().map(|p| p.display().to_string());
            echo.out_dir = Some(args.out_dir.display().to_string());
            echo.normalization = Some(args.normalization.to_string());
            echo.preprocess = args.preprocess.clone();
            echo.classes = parse_classes(args.classes.as_deref()).ok().flatten();
            echo.samples = args.samples;
            echo.sample_seed = Some(args.sample_seed);
            echo.sort_heatmaps = Some(args.sort_heatmaps);
            echo
        },
        results,
        artifacts: artifacts.into_list(),
        timings: phases.into_records(),
    };
    crate::report::write_report(&report_path, &report)?;
    crate::commands::verify_artifacts(&report.artifacts)?;

    eprintln!(
        "singular: status {}, lambda {:.6}, mu {:.6}, {} iterations",
        report.results.status.as_deref().unwrap_or("?"),
        result.lambda,
        result.mu.unwrap_or(f64::NAN),
        result.iterations
    );
    Ok(if result.converged { 0 } else { 3 })
}

fn ingest(args: &SingularArgs) -> anyhow::Result<DataMatrix> {
    let matrix = match (&args.input, &args.idx_images) {
        (Some(path), None) => load_matrix(path, &args.csv)?,
        (None, Some(images)) => {
            let labels_path = args
                .idx_labels
                .as_ref()
                .expect("clap enforces idx-labels with idx-images");
            let images = read_idx(images)?;
            let labels = read_idx(labels_path)?;
            if labels.ncols() != images.ncols() {
                bail!(
                    "label count {} does not match image count {}",
                    labels.ncols(),
                    images.ncols()
                );
            }
            let names: Vec<String> = (0..labels.ncols())
                .map(|j| format!("{}", labels.values()[(0, j)] as u8))
                .collect();
            DataMatrix::new(images.values().clone(), None, Some(names))?
        }
        (None, None) => bail!("one of --input or --idx-images is required"),
        (Some(_), Some(_)) => unreachable!("clap marks the inputs as conflicting"),
    };

    let matrix = match parse_classes(args.classes.as_deref())? {
        None => matrix,
        Some(classes) => {
            let Some(names) = matrix.col_names() else {
                bail!("--classes needs labeled columns (idx labels or a CSV header)");
            };
            let keep: Vec<usize> = (0..matrix.ncols())
                .filter(|&j| {
                    names[j]
                        .parse::<u8>()
                        .map(|v| classes.contains(&v))
                        .unwrap_or(false)
                })
                .collect();
            if keep.is_empty() {
                bail!("no columns match --classes {:?}", classes);
            }
            select_columns(&matrix, &keep)?
        }
    };

    match args.samples {
        None => Ok(matrix),
        Some(k) => {
            if k > matrix.ncols() {
                bail!(
                    "--samples {k} exceeds the {} available columns",
                    matrix.ncols()
                );
            }
            let mut indices: Vec<usize> = (0..matrix.ncols()).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(args.sample_seed);
            indices.shuffle(&mut rng);
            let mut keep: Vec<usize> = indices.into_iter().take(k).collect();
            keep.sort_unstable();
            select_columns(&matrix, &keep)
        }
    }
}

fn select_columns(matrix: &DataMatrix, keep: &[usize]) -> anyhow::Result<DataMatrix> {
    let values = DMatrix::from_fn(matrix.nrows(), keep.len(), |i, j| {
        matrix.values()[(i, keep[j])]
    });
    let col_names = matrix
        .col_names()
        .map(|names| keep.iter().map(|&j| names[j].clone()).collect());
    Ok(DataMatrix::new(
        values,
        matrix.row_names().map(<[String]>::to_vec),
        col_names,
    )?)
}

fn preprocess(matrix: &DataMatrix, recipe: &str) -> anyhow::Result<DataMatrix> {
    match recipe.split_once(':') {
        Some(("scrna", top_k)) => {
            let top_k: usize = top_k
                .parse()
                .with_context(|| format!("bad gene count in --preprocess {recipe:?}"))?;
            Ok(scrna_preprocess(matrix, top_k)?)
        }
        _ => bail!("unknown preprocessing {recipe:?}; expected scrna:TOP_K"),
    }
}

fn parse_classes(text: Option<&str>) -> anyhow::Result<Option<Vec<u8>>> {
    match text {
        None => Ok(None),
        Some(list) => {
            let classes: Vec<u8> = list
                .split(',')
                .map(|c| c.trim().parse().context("bad class label"))
                .collect::<anyhow::Result<_>>()?;
            Ok(Some(classes))
        }
    }
}
