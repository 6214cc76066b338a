//! File ingestion: a fixed CSV dialect and the big-endian idx container
//! used by common image benchmarks.
//!
//! CSV dialect: comma separator, `.` decimal point, `#` comment lines,
//! optional header row and leading row-name column. No quoting.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use nalgebra::DMatrix;

use super::DataMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default)]
pub struct CsvOptions {
    /// First non-comment line holds column names.
    pub header: bool,
    /// First field of each data line is a row name.
    pub row_names: bool,
}

pub fn read_csv(path: impl AsRef<Path>, options: &CsvOptions) -> Result<DataMatrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_csv(&text, options, &path.display().to_string())
}

fn parse_csv(text: &str, options: &CsvOptions, path: &str) -> Result<DataMatrix> {
    let mut col_names: Option<Vec<String>> = None;
    let mut row_names: Option<Vec<String>> = options.row_names.then(Vec::new);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width: Option<usize> = None;
    let mut saw_header = !options.header;

    for (line_idx, raw_line) in text.lines().enumerate() {
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if !saw_header {
            saw_header = true;
            if options.row_names && !fields.is_empty() {
                fields.remove(0);
            }
            col_names = Some(fields.iter().map(|s| s.to_string()).collect());
            continue;
        }
        if options.row_names {
            if fields.is_empty() {
                return Err(Error::CsvParse {
                    path: path.to_string(),
                    line: line_idx + 1,
                    column: 1,
                    message: "missing row name".into(),
                });
            }
            row_names
                .as_mut()
                .expect("row name storage exists")
                .push(fields.remove(0).to_string());
        }
        let mut row = Vec::with_capacity(fields.len());
        for (col_idx, field) in fields.iter().enumerate() {
            let value: f64 = field.parse().map_err(|_| Error::CsvParse {
                path: path.to_string(),
                line: line_idx + 1,
                column: col_idx + 1 + usize::from(options.row_names),
                message: format!("not a number: {field:?}"),
            })?;
            row.push(value);
        }
        if let Some(w) = width {
            if row.len() != w {
                return Err(Error::CsvParse {
                    path: path.to_string(),
                    line: line_idx + 1,
                    column: 1,
                    message: format!("expected {w} fields, found {}", row.len()),
                });
            }
        } else {
            width = Some(row.len());
        }
        rows.push(row);
    }
    let width = width.unwrap_or(0);
    if rows.is_empty() {
        return Err(Error::CsvParse {
            path: path.to_string(),
            line: 0,
            column: 0,
            message: "no data rows".into(),
        });
    }
    if let Some(ref names) = col_names {
        if names.len() != width {
            return Err(Error::CsvParse {
                path: path.to_string(),
                line: 1,
                column: 1,
                message: format!("header has {} names for {width} columns", names.len()),
            });
        }
    }
    let values = DMatrix::from_fn(rows.len(), width, |i, j| rows[i][j]);
    DataMatrix::new(values, row_names, col_names)
}

/// Writes a matrix in the same dialect `read_csv` accepts. Floats use the
/// shortest representation that parses back to the identical value.
pub fn write_csv(path: impl AsRef<Path>, matrix: &DataMatrix) -> Result<()> {
    write_matrix_csv(
        path,
        matrix.values(),
        matrix.row_names(),
        matrix.col_names(),
    )
}

/// Raw variant of [`write_csv`] for matrices that may carry signed entries
/// (learned costs from the linear limit map, embeddings).
pub fn write_matrix_csv(
    path: impl AsRef<Path>,
    values: &DMatrix<f64>,
    row_names: Option<&[String]>,
    col_names: Option<&[String]>,
) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    if let Some(cols) = col_names {
        if row_names.is_some() {
            out.push_str("id,");
        }
        out.push_str(&cols.join(","));
        out.push('\n');
    }
    for i in 0..values.nrows() {
        let mut fields: Vec<String> = Vec::with_capacity(values.ncols() + 1);
        if let Some(rows) = row_names {
            fields.push(rows[i].clone());
        }
        for j in 0..values.ncols() {
            fields.push(format!("{}", values[(i, j)]));
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    let mut file = fs::File::create(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    file.write_all(out.as_bytes()).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

/// Reads an idx container. Image tensors (magic 0x00000803) become one
/// flattened column per image with raw 0..=255 intensities; label vectors
/// (magic 0x00000801) become a single `label` row.
pub fn read_idx(path: impl AsRef<Path>) -> Result<DataMatrix> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let display = path.display().to_string();
    parse_idx(&bytes, &display)
}

fn parse_idx(bytes: &[u8], path: &str) -> Result<DataMatrix> {
    if bytes.len() < 4 {
        return Err(Error::IdxTruncated {
            path: path.to_string(),
            offset: 0,
            expected: 4,
            actual: bytes.len(),
        });
    }
    let magic = u32::from_be_bytes([bytes[0], bytes[1], bytes[2], bytes[3]]);
    match magic {
        IDX_IMAGES_MAGIC => {
            let header = 16;
            if bytes.len() < header {
                return Err(Error::IdxTruncated {
                    path: path.to_string(),
                    offset: 4,
                    expected: header,
                    actual: bytes.len(),
                });
            }
            let dim = |k: usize| {
                u32::from_be_bytes([
                    bytes[4 + 4 * k],
                    bytes[5 + 4 * k],
                    bytes[6 + 4 * k],
                    bytes[7 + 4 * k],
                ]) as usize
            };
            let (count, rows, cols) = (dim(0), dim(1), dim(2));
            let expected = header + count * rows * cols;
            if bytes.len() != expected {
                return Err(Error::IdxTruncated {
                    path: path.to_string(),
                    offset: header,
                    expected,
                    actual: bytes.len(),
                });
            }
            let pixels = rows * cols;
            let values = DMatrix::from_fn(pixels, count, |p, k| {
                f64::from(bytes[header + k * pixels + p])
            });
            DataMatrix::new(values, None, None)
        }
        IDX_LABELS_MAGIC => {
            let header = 8;
            if bytes.len() < header {
                return Err(Error::IdxTruncated {
                    path: path.to_string(),
                    offset: 4,
                    expected: header,
                    actual: bytes.len(),
                });
            }
            let count =
                u32::from_be_bytes([bytes[4], bytes[5], bytes[6], bytes[7]]) as usize;
            let expected = header + count;
            if bytes.len() != expected {
                return Err(Error::IdxTruncated {
                    path: path.to_string(),
                    offset: header,
                    expected,
                    actual: bytes.len(),
                });
            }
            let values = DMatrix::from_fn(1, count, |_, k| f64::from(bytes[header + k]));
            DataMatrix::new(values, Some(vec!["label".into()]), None)
        }
        other => Err(Error::IdxMagic {
            path: path.to_string(),
            found: other,
        }),
    }
}
