//! Synthetic dataset generation to CSV.

use anyhow::{bail, Context};
use groundmetric::{write_csv, write_matrix_csv, TorusTemplate};

use crate::cli::GenKind;

pub fn run(kind: &GenKind) -> anyhow::Result<i32> {
    match kind {
        GenKind::Torus1d { n, template, out } => {
            let template = parse_template(template)?;
            let dataset = groundmetric::torus_dataset_1d(template, *n)?;
            write_matrix_csv(out, &dataset.to_matrix(), None, None)?;
            eprintln!(
                "wrote {} ({} histograms of length {})",
                out.display(),
                dataset.len(),
                dataset.dim()
            );
        }
        GenKind::Torus2d {
            side,
            template,
            out,
        } => {
            let template = parse_template(template)?;
            let dataset = groundmetric::torus_dataset_2d(template, *side)?;
            write_matrix_csv(out, &dataset.to_matrix(), None, None)?;
            eprintln!(
                "wrote {} ({} histograms of length {})",
                out.display(),
                dataset.len(),
                dataset.dim()
            );
        }
        GenKind::Meanscale {
            n,
            means,
            scales,
            scale_min,
            scale_max,
            out,
        } => {
            let mean_grid: Vec<f64> = (0..*means).map(|i| i as f64 / *means as f64).collect();
            let scale_grid: Vec<f64> = (0..*scales)
                .map(|i| {
                    if *scales == 1 {
                        *scale_min
                    } else {
                        scale_min + (scale_max - scale_min) * i as f64 / (*scales - 1) as f64
                    }
                })
                .collect();
            let matrix = groundmetric::mean_scale_family(*n, &mean_grid, &scale_grid)?;
            write_csv(out, &matrix)?;
            eprintln!(
                "wrote {} ({}x{})",
                out.display(),
                matrix.nrows(),
                matrix.ncols()
            );
        }
        GenKind::Blocks { sizes, seed, out } => {
            let parsed = parse_sizes(sizes)?;
            let matrix = groundmetric::block_dataset(&parsed, *seed)?;
            write_csv(out, &matrix)?;
            eprintln!(
                "wrote {} ({}x{})",
                out.display(),
                matrix.nrows(),
                matrix.ncols()
            );
        }
    }
    Ok(0)
}

pub fn parse_template(text: &str) -> anyhow::Result<TorusTemplate> {
    let parts: Vec<&str> = text.split(':').collect();
    let parse = |s: &str| -> anyhow::Result<f64> {
        s.parse().with_context(|| format!("bad number {s:?} in template {text:?}"))
    };
    let template = match parts.as_slice() {
        ["gauss", sigma] => TorusTemplate::Gauss {
            sigma: parse(sigma)?,
        },
        ["bimodal", sigma, gap] => TorusTemplate::Bimodal {
            sigma: parse(sigma)?,
            gap: parse(gap)?,
        },
        ["trimodal", sigma, gap] => TorusTemplate::Trimodal {
            sigma: parse(sigma)?,
            gap: parse(gap)?,
        },
        _ => bail!(
            "unknown template {text:?}; expected gauss:SIGMA, bimodal:SIGMA:GAP or trimodal:SIGMA:GAP"
        ),
    };
    template.validate()?;
    Ok(template)
}

pub fn parse_sizes(text: &str) -> anyhow::Result<Vec<(usize, usize)>> {
    text.split(',')
        .map(|block| {
            let (rows, cols) = block
                .split_once('x')
                .with_context(|| format!("block {block:?} is not ROWSxCOLS"))?;
            Ok((
                rows.trim().parse().context("bad block rows")?,
                cols.trim().parse().context("bad block cols")?,
            ))
        })
        .collect()
}
