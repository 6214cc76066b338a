//! Run reports: a single JSON document echoing the configuration, the
//! numerical results, the files written, and per-phase timings. The schema
//! shipped in `schemas/report.schema.json` describes the format.

use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub const REPORT_SCHEMA: &str = include_str!("../../../schemas/report.schema.json");

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub config: ConfigEcho,
    pub results: Results,
    pub artifacts: Vec<String>,
    pub timings: Vec<PhaseTiming>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ConfigEcho {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub idx_images: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub idx_labels: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub backend: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub marginal_tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sinkhorn_max_iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub log_domain: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance_hilbert: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub init: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normalization: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normalize: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preprocess: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classes: Option<Vec<u8>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub check: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub template: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub side: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sizes: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certify: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub check_kernel: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sort_heatmaps: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Results {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub status: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_hilbert_delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clamped_negative_entries: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel_min_eigenvalues: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rows: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cols: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pruned_rows: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pruned_cols: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uniqueness: Option<UniquenessSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cone: Option<ConeSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pca: Option<PcaSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mmd_relative_gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub passed: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniquenessSummary {
    pub status: String,
    pub node_count: usize,
    pub component_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeSummary {
    pub in_cone: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quadratic_form: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaSummary {
    pub max_residual: f64,
    pub pairs: Vec<PcaPairSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaPairSummary {
    pub lambda_re: f64,
    pub lambda_im: f64,
    pub phi_eigenvalue: f64,
    pub residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub embedding_dim: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseTiming {
    pub phase: String,
    pub seconds: f64,
}

/// Wall-clock phase tracker feeding `RunReport.timings`.
pub struct Phases {
    records: Vec<PhaseTiming>,
    current: Option<(String, Instant)>,
}

impl Phases {
    pub fn new() -> Self {
        Self {
            records: Vec::new(),
            current: None,
        }
    }

    pub fn start(&mut self, phase: &str) {
        self.finish();
        self.current = Some((phase.to_string(), Instant::now()));
    }

    pub fn finish(&mut self) {
        if let Some((phase, started)) = self.current.take() {
            self.records.push(PhaseTiming {
                phase,
                seconds: started.elapsed().as_secs_f64(),
            });
        }
    }

    pub fn into_records(mut self) -> Vec<PhaseTiming> {
        self.finish();
        self.records
    }
}

impl Default for Phases {
    fn default() -> Self {
        Self::new()
    }
}

pub fn write_report(path: &Path, report: &RunReport) -> anyhow::Result<()> {
    let body = serde_json::to_string_pretty(report)?;
    std::fs::write(path, body)?;
    Ok(())
}

/// Minimal structural validation of a JSON value against the subset of
/// JSON Schema the shipped schema uses: `type`, `properties`, `required`,
/// `items`. Returns the first violation found.
pub fn validate_against_schema(
    value: &serde_json::Value,
    schema: &serde_json::Value,
    path: &str,
) -> Result<(), String> {
    if let Some(expected) = schema.get("type").and_then(|t| t.as_str()) {
        let ok = match expected {
            "object" => value.is_object(),
            "array" => value.is_array(),
            "string" => value.is_string(),
            "number" => value.is_number(),
            "integer" => value.as_i64().is_some() || value.as_u64().is_some(),
            "boolean" => value.is_boolean(),
            "null" => value.is_null(),
            other => return Err(format!("{path}: unknown schema type {other}")),
        };
        if !ok {
            return Err(format!("{path}: expected {expected}, got {value}"));
        }
    }
    if let Some(required) = schema.get("required").and_then(|r| r.as_array()) {
        for key in required {
            let key = key.as_str().unwrap_or_default();
            if value.get(key).is_none() {
                return Err(format!("{path}: missing required field {key}"));
            }
        }
    }
    if let Some(props) = schema.get("properties").and_then(|p| p.as_object()) {
        if let Some(object) = value.as_object() {
            for (key, subschema) in props {
                if let Some(subvalue) = object.get(key) {
                    validate_against_schema(subvalue, subschema, &format!("{path}.{key}"))?;
                }
            }
        }
    }
    if let Some(items) = schema.get("items") {
        if let Some(array) = value.as_array() {
            for (idx, item) in array.iter().enumerate() {
                validate_against_schema(item, items, &format!("{path}[{idx}]"))?;
            }
        }
    }
    Ok(())
}
