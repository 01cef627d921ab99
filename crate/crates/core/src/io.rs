//! File formats for matrices, masks and feature tables.
//!
//! Numbers are written with Rust's shortest round-trip formatting (CSV) or
//! `serde_json` (JSON), so every value parses back to the same `f64`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::connectome::{ConnectivityKind, FeatureColumn, SignificanceMask, SubjectFeatureTable};
use crate::error::{Error, Result};
use crate::featmap::FeatureMapSpec;
use crate::gc::GcMatrix;
use crate::tsio::parse_csv;

/// Writes `contents`, creating missing parent directories.
pub fn write_text(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_text(path, &to_json(value)?)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&read_text(path)?)?)
}

/// `stem` with `ext` appended (`out/ec` -> `out/ec.csv`).
pub fn with_ext(stem: &Path, ext: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

pub fn csv_row<T: std::fmt::Display>(values: impl IntoIterator<Item = T>) -> String {
    let mut line = String::new();
    for (k, v) in values.into_iter().enumerate() {
        if k > 0 {
            line.push(',');
        }
        let _ = write!(line, "{v}");
    }
    line.push('\n');
    line
}

pub fn matrix_to_csv<T: nalgebra::Scalar + std::fmt::Display>(m: &DMatrix<T>) -> String {
    (0..m.nrows()).map(|i| csv_row(m.row(i).iter())).collect()
}

pub fn parse_matrix_csv(text: &str) -> Result<DMatrix<f64>> {
    Ok(parse_csv(text, false)?.data().clone())
}

pub fn read_matrix_csv(path: &Path) -> Result<DMatrix<f64>> {
    parse_matrix_csv(&read_text(path)?)
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if let Some((k, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != m) {
        return Err(Error::Ragged {
            row: k + 1,
            expected: m,
            found: r.len(),
        });
    }
    Ok(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

/// JSON layout of a causality matrix; `values[source][target]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GcMatrixFile {
    pub channels: Vec<String>,
    pub lag: usize,
    pub spec: FeatureMapSpec,
    pub values: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lag_per_channel: Option<Vec<usize>>,
}

impl GcMatrixFile {
    pub fn new(m: &GcMatrix, lag_per_channel: Option<Vec<usize>>) -> Self {
        Self {
            channels: m.channels.clone(),
            lag: m.lag,
            spec: m.spec,
            values: rows_of(&m.values),
            lag_per_channel,
        }
    }

    pub fn into_matrix(self) -> Result<GcMatrix> {
        let values = from_rows(&self.values)?;
        if !values.is_square() || values.nrows() != self.channels.len() {
            return Err(Error::Dimension(format!(
                "{} channels but a {}x{} matrix",
                self.channels.len(),
                values.nrows(),
                values.ncols()
            )));
        }
        Ok(GcMatrix {
            values,
            lag: self.lag,
            spec: self.spec,
            channels: self.channels,
        })
    }
}

/// Writes `<stem>.csv` (values) and `<stem>.json` (values plus metadata).
pub fn write_gc(stem: &Path, m: &GcMatrix, lag_per_channel: Option<Vec<usize>>) -> Result<()> {
    write_text(&with_ext(stem, "csv"), &matrix_to_csv(&m.values))?;
    write_json(&with_ext(stem, "json"), &GcMatrixFile::new(m, lag_per_channel))
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

/// A square matrix from either a plain CSV or a causality-matrix JSON file.
pub fn read_square_matrix(path: &Path) -> Result<DMatrix<f64>> {
    let m = if is_json(path) {
        read_json::<GcMatrixFile>(path)?.into_matrix()?.values
    } else {
        read_matrix_csv(path)?
    };
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "{}: expected a square matrix, found {}x{}",
            path.display(),
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskFile {
    pub dim: usize,
    pub n_selected: usize,
    pub alpha: f64,
    pub q: f64,
    /// Selected `(row, column)` cells in row-major order.
    pub cells: Vec<(usize, usize)>,
}

impl MaskFile {
    pub fn new(m: &SignificanceMask) -> Self {
        Self {
            dim: m.dim(),
            n_selected: m.n_selected,
            alpha: m.alpha,
            q: m.q,
            cells: m.cells(),
        }
    }

    pub fn into_mask(self) -> Result<SignificanceMask> {
        if let Some(&(i, j)) = self.cells.iter().find(|(i, j)| *i >= self.dim || *j >= self.dim) {
            return Err(Error::Dimension(format!("cell ({i}, {j}) outside a {0}x{0} mask", self.dim)));
        }
        Ok(SignificanceMask::from_cells(self.dim, self.cells, self.alpha, self.q))
    }
}

/// Writes `<stem>.csv` (0/1 grid) and `<stem>.json` (counts and cells).
pub fn write_mask(stem: &Path, m: &SignificanceMask) -> Result<()> {
    write_text(&with_ext(stem, "csv"), &matrix_to_csv(&m.mask))?;
    write_json(&with_ext(stem, "json"), &MaskFile::new(m))
}

pub fn read_mask(path: &Path) -> Result<SignificanceMask> {
    if is_json(path) {
        return read_json::<MaskFile>(path)?.into_mask();
    }
    let m = read_square_matrix(path)?;
    if m.iter().any(|&v| v != 0.0 && v != 1.0) {
        return Err(Error::InvalidArgument(format!("{}: mask entries must be 0 or 1", path.display())));
    }
    Ok(SignificanceMask::from_matrix(m.map(|v| v as u8), f64::NAN, f64::NAN))
}

pub fn feature_name(c: &FeatureColumn) -> String {
    match c.kind {
        ConnectivityKind::Ec => format!("EC:{}->{}", c.source, c.target),
        ConnectivityKind::Fc => format!("FC:{}-{}", c.source, c.target),
    }
}

/// Writes `<stem>.csv` (one row per subject, named columns),
/// `<stem>_labels.csv` and the sidecar index `<stem>.json`.
pub fn write_feature_table(stem: &Path, t: &SubjectFeatureTable) -> Result<()> {
    let mut text = csv_row(t.feature_index.iter().map(feature_name));
    for i in 0..t.features.nrows() {
        text.push_str(&csv_row(t.features.row(i).iter()));
    }
    write_text(&with_ext(stem, "csv"), &text)?;
    let mut labels = String::from("label\n");
    for l in &t.labels {
        let _ = writeln!(labels, "{l}");
    }
    let mut label_path = stem.as_os_str().to_owned();
    label_path.push("_labels.csv");
    write_text(Path::new(&label_path), &labels)?;
    write_json(&with_ext(stem, "json"), &t.feature_index)
}

/// Features CSV with a header row; returns the matrix and column names.
pub fn read_features_csv(path: &Path) -> Result<(DMatrix<f64>, Vec<String>)> {
    let text = read_text(path)?;
    let header = text
        .lines()
        .find(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .unwrap_or_default();
    let names: Vec<String> = header.split(',').map(|s| s.trim().to_owned()).collect();
    let ts = parse_csv(&text, true)?;
    Ok((ts.data().clone(), names))
}

/// One 0/1 label per line, with an optional header line.
pub fn read_labels(path: &Path) -> Result<Vec<u8>> {
    let text = read_text(path)?;
    let mut labels = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let v = line.trim();
        if v.is_empty() || v.starts_with('#') || (labels.is_empty() && v.parse::<f64>().is_err() && k == 0) {
            continue;
        }
        match v {
            "0" => labels.push(0),
            "1" => labels.push(1),
            _ => {
                return Err(Error::Parse {
                    row: k + 1,
                    column: 1,
                    value: v.to_owned(),
                })
            }
        }
    }
    Ok(labels)
}
