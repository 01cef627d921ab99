//! Functional connectivity, group-difference masks and EC/FC feature fusion.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{bh_fdr, welch_ttest};
use crate::tsio::TimeSeriesMatrix;

/// Pearson correlation between channels. Constant channels correlate 0 with
/// everything else; the diagonal is always 1.
pub fn pearson_fc(ts: &TimeSeriesMatrix) -> Result<DMatrix<f64>> {
    let len = ts.len();
    if len < 3 {
        return Err(Error::TooFewSamples {
            required: 3,
            found: len,
        });
    }
    let d = ts.channels();
    let centered: Vec<Vec<f64>> = (0..d)
        .map(|c| {
            let col = ts.column(c);
            let mean = col.iter().sum::<f64>() / len as f64;
            col.into_iter().map(|v| v - mean).collect()
        })
        .collect();
    let norms: Vec<f64> = centered
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    let mut fc = DMatrix::identity(d, d);
    for a in 0..d {
        for b in a + 1..d {
            let r = if norms[a] > 0.0 && norms[b] > 0.0 {
                let dot: f64 = centered[a].iter().zip(&centered[b]).map(|(x, y)| x * y).sum();
                (dot / (norms[a] * norms[b])).clamp(-1.0, 1.0)
            } else {
                0.0
            };
            fc[(a, b)] = r;
            fc[(b, a)] = r;
        }
    }
    Ok(fc)
}

/// Fisher z-transform `atanh(r)` applied entrywise, with `|r|` capped just
/// below one so the diagonal stays finite.
pub fn fisher_z(m: &DMatrix<f64>) -> DMatrix<f64> {
    let cap = 1.0 - 1e-15;
    m.map(|r| r.clamp(-cap, cap).atanh())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VectorizeMode {
    /// All `d^2` entries, row-major.
    Full,
    /// Strict upper triangle, row-major, `d(d-1)/2` entries.
    Upper,
}

pub fn vectorize(m: &DMatrix<f64>, mode: VectorizeMode) -> Vec<f64> {
    let (rows, cols) = m.shape();
    match mode {
        VectorizeMode::Full => (0..rows)
            .flat_map(|i| (0..cols).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)])
            .collect(),
        VectorizeMode::Upper => (0..rows)
            .flat_map(|i| (i + 1..cols).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)])
            .collect(),
    }
}

/// Binary selection over the cells of a `d x d` connectivity matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SignificanceMask {
    pub mask: DMatrix<u8>,
    pub alpha: f64,
    pub q: f64,
    pub n_selected: usize,
}

impl SignificanceMask {
    /// Builds a mask from selected cells; the diagonal is always cleared.
    pub fn from_cells(d: usize, cells: impl IntoIterator<Item = (usize, usize)>, alpha: f64, q: f64) -> Self {
        let mut mask = DMatrix::zeros(d, d);
        for (i, j) in cells {
            if i != j {
                mask[(i, j)] = 1;
            }
        }
        Self::from_matrix(mask, alpha, q)
    }

    pub fn from_matrix(mut mask: DMatrix<u8>, alpha: f64, q: f64) -> Self {
        let d = mask.nrows().min(mask.ncols());
        for i in 0..d {
            mask[(i, i)] = 0;
        }
        mask.apply(|v| *v = u8::from(*v != 0));
        let n_selected = mask.iter().filter(|&&v| v == 1).count();
        Self {
            mask,
            alpha,
            q,
            n_selected,
        }
    }

    /// Every off-diagonal cell selected.
    pub fn all(d: usize) -> Self {
        Self::from_matrix(DMatrix::from_element(d, d, 1), 1.0, 1.0)
    }

    pub fn dim(&self) -> usize {
        self.mask.nrows()
    }

    pub fn is_set(&self, i: usize, j: usize) -> bool {
        self.mask[(i, j)] == 1
    }

    pub fn cells(&self) -> Vec<(usize, usize)> {
        let d = self.dim();
        (0..d)
            .flat_map(|i| (0..d).map(move |j| (i, j)))
            .filter(|&(i, j)| self.is_set(i, j))
            .collect()
    }
}

/// Whether a cell test treats `(i, j)` and `(j, i)` as one hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellSet {
    /// Every off-diagonal cell is its own hypothesis (EC).
    Directed,
    /// Only `i < j` is tested and the result mirrored (FC).
    Undirected,
}

/// Per-cell Welch tests; the diagonal (and the lower triangle for
/// `Undirected`, before mirroring) carries `t = 0, p = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct CellTests {
    pub t: DMatrix<f64>,
    pub p: DMatrix<f64>,
    pub cells: CellSet,
}

fn check_groups(a: &[DMatrix<f64>], b: &[DMatrix<f64>], min: usize) -> Result<usize> {
    let smaller = a.len().min(b.len());
    if smaller < min {
        return Err(Error::GroupSize {
            required: min,
            found: smaller,
        });
    }
    let d = a[0].nrows();
    if let Some(m) = a.iter().chain(b).find(|m| m.shape() != (d, d)) {
        return Err(Error::Dimension(format!(
            "expected {d}x{d} matrices, found {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(d)
}

fn tested_cells(d: usize, cells: CellSet) -> Vec<(usize, usize)> {
    (0..d)
        .flat_map(|i| (0..d).map(move |j| (i, j)))
        .filter(|&(i, j)| match cells {
            CellSet::Directed => i != j,
            CellSet::Undirected => i < j,
        })
        .collect()
}

pub fn cell_tests(a: &[DMatrix<f64>], b: &[DMatrix<f64>], cells: CellSet) -> Result<CellTests> {
    let d = check_groups(a, b, 2)?;
    let list = tested_cells(d, cells);
    let results: Vec<(f64, f64)> = list
        .par_iter()
        .map(|&(i, j)| {
            let xa: Vec<f64> = a.iter().map(|m| m[(i, j)]).collect();
            let xb: Vec<f64> = b.iter().map(|m| m[(i, j)]).collect();
            welch_ttest(&xa, &xb).map(|r| (r.t, r.p))
        })
        .collect::<Result<_>>()?;
    let mut t = DMatrix::zeros(d, d);
    let mut p = DMatrix::from_element(d, d, 1.0);
    for (&(i, j), (tv, pv)) in list.iter().zip(results) {
        t[(i, j)] = tv;
        p[(i, j)] = pv;
        if cells == CellSet::Undirected {
            t[(j, i)] = tv;
            p[(j, i)] = pv;
        }
    }
    Ok(CellTests { t, p, cells })
}

/// Selects cells with `p <= alpha`, and, when `q` is given, that also
/// survive Benjamini-Hochberg at level `q` over all tested cells.
pub fn mask_from_tests(tests: &CellTests, alpha: f64, q: Option<f64>) -> SignificanceMask {
    let d = tests.p.nrows();
    let list = tested_cells(d, tests.cells);
    let pvals: Vec<f64> = list.iter().map(|&(i, j)| tests.p[(i, j)]).collect();
    let fdr = match q {
        Some(q) => bh_fdr(&pvals, q),
        None => vec![true; pvals.len()],
    };
    let selected = list
        .iter()
        .zip(pvals.iter().zip(fdr))
        .filter(|(_, (&p, pass))| p <= alpha && *pass)
        .flat_map(|(&(i, j), _)| {
            let mirror = (tests.cells == CellSet::Undirected).then_some((j, i));
            std::iter::once((i, j)).chain(mirror)
        });
    SignificanceMask::from_cells(d, selected, alpha, q.unwrap_or(1.0))
}

/// Cells whose group difference passes both the `alpha` gate and BH-FDR at
/// level `q`.
pub fn group_difference_mask(
    a: &[DMatrix<f64>],
    b: &[DMatrix<f64>],
    alpha: f64,
    q: f64,
    cells: CellSet,
) -> Result<SignificanceMask> {
    Ok(mask_from_tests(&cell_tests(a, b, cells)?, alpha, Some(q)))
}

/// Number of tested cells with `p <= threshold`, for each threshold.
pub fn threshold_sweep(tests: &CellTests, thresholds: &[f64]) -> Vec<(f64, usize)> {
    let list = tested_cells(tests.p.nrows(), tests.cells);
    thresholds
        .iter()
        .map(|&thr| (thr, list.iter().filter(|&&(i, j)| tests.p[(i, j)] <= thr).count()))
        .collect()
}

/// Clears every pair selected in both directions.
pub fn prune_bidirectional(mask: &SignificanceMask) -> SignificanceMask {
    let d = mask.dim();
    let pruned = DMatrix::from_fn(d, d, |i, j| {
        u8::from(mask.is_set(i, j) && !mask.is_set(j, i))
    });
    SignificanceMask::from_matrix(pruned, mask.alpha, mask.q)
}

/// Element-wise AND of two masks.
pub fn fuse_masks(ec: &SignificanceMask, fc: &SignificanceMask) -> Result<SignificanceMask> {
    if ec.mask.shape() != fc.mask.shape() {
        return Err(Error::Dimension(format!(
            "EC mask is {}x{}, FC mask is {}x{}",
            ec.dim(),
            ec.mask.ncols(),
            fc.dim(),
            fc.mask.ncols()
        )));
    }
    let fused = ec.mask.zip_map(&fc.mask, |a, b| a & b);
    Ok(SignificanceMask::from_matrix(fused, ec.alpha, ec.q))
}

/// Entrywise `mean(high) - mean(low)`.
pub fn group_mean_diff(high: &[DMatrix<f64>], low: &[DMatrix<f64>]) -> Result<DMatrix<f64>> {
    let d = check_groups(high, low, 1)?;
    let mean = |g: &[DMatrix<f64>]| {
        g.iter()
            .fold(DMatrix::zeros(d, d), |acc, m| acc + m)
            / g.len() as f64
    };
    Ok(mean(high) - mean(low))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConnectivityKind {
    #[serde(rename = "EC")]
    Ec,
    #[serde(rename = "FC")]
    Fc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeatureMode {
    #[serde(rename = "EC")]
    Ec,
    #[serde(rename = "FC")]
    Fc,
    #[serde(rename = "EC+FC")]
    EcFc,
}

impl FeatureMode {
    fn includes(self, kind: ConnectivityKind) -> bool {
        matches!(
            (self, kind),
            (Self::EcFc, _) | (Self::Ec, ConnectivityKind::Ec) | (Self::Fc, ConnectivityKind::Fc)
        )
    }
}

impl FromStr for FeatureMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().replace(['_', ' '], "").as_str() {
            "EC" => Ok(Self::Ec),
            "FC" => Ok(Self::Fc),
            "EC+FC" | "FC+EC" | "ECFC" => Ok(Self::EcFc),
            _ => Err(Error::InvalidArgument(format!("unknown feature mode `{s}`"))),
        }
    }
}

impl fmt::Display for FeatureMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Ec => "EC",
            Self::Fc => "FC",
            Self::EcFc => "EC+FC",
        })
    }
}

/// Provenance of one feature column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeatureColumn {
    pub source: usize,
    pub target: usize,
    pub kind: ConnectivityKind,
}

/// One subject's connectivity matrices and group label (1 = older group).
#[derive(Debug, Clone, PartialEq)]
pub struct SubjectConnectivity {
    pub ec: DMatrix<f64>,
    pub fc: DMatrix<f64>,
    pub label: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubjectFeatureTable {
    pub features: DMatrix<f64>,
    pub labels: Vec<u8>,
    pub feature_index: Vec<FeatureColumn>,
}

impl SubjectFeatureTable {
    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    /// Column indices whose `(source, target)` cell is set in `mask`, for the
    /// given kind (or any kind when `None`). FC columns match either
    /// orientation of the cell.
    pub fn columns_in_mask(&self, mask: &SignificanceMask, kind: Option<ConnectivityKind>) -> Vec<usize> {
        self.feature_index
            .iter()
            .enumerate()
            .filter(|(_, c)| kind.is_none_or(|k| k == c.kind))
            .filter(|(_, c)| {
                mask.is_set(c.source, c.target)
                    || (c.kind == ConnectivityKind::Fc && mask.is_set(c.target, c.source))
            })
            .map(|(i, _)| i)
            .collect()
    }

    /// A copy keeping only `columns`, in the given order.
    pub fn select_columns(&self, columns: &[usize]) -> Self {
        let n = self.features.nrows();
        Self {
            features: DMatrix::from_fn(n, columns.len(), |r, c| self.features[(r, columns[c])]),
            labels: self.labels.clone(),
            feature_index: columns.iter().map(|&c| self.feature_index[c]).collect(),
        }
    }
}

/// How FC matrices are vectorized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FcLayout {
    /// Strict upper triangle (no duplicated cells).
    #[default]
    Upper,
    /// Every cell, like the EC layout.
    Full,
}

/// Concatenates, per subject, the masked EC entries (all `d^2` cells in
/// row-major order when `mask_ec` is `None`) and/or the masked FC entries
/// (upper triangle or full, per `fc_layout`).
pub fn assemble_features(
    subjects: &[SubjectConnectivity],
    mask_ec: Option<&SignificanceMask>,
    mask_fc: Option<&SignificanceMask>,
    mode: FeatureMode,
    fc_layout: FcLayout,
) -> Result<SubjectFeatureTable> {
    let first = subjects
        .first()
        .ok_or_else(|| Error::InvalidArgument("no subjects".into()))?;
    let d = first.ec.nrows();
    for (k, s) in subjects.iter().enumerate() {
        if s.ec.shape() != (d, d) || s.fc.shape() != (d, d) {
            return Err(Error::Dimension(format!(
                "subject {k}: EC {}x{}, FC {}x{}, expected {d}x{d}",
                s.ec.nrows(),
                s.ec.ncols(),
                s.fc.nrows(),
                s.fc.ncols()
            )));
        }
    }
    for m in mask_ec.iter().chain(mask_fc.iter()) {
        if m.dim() != d {
            return Err(Error::Dimension(format!("mask is {0}x{0}, data is {d}x{d}", m.dim())));
        }
    }

    let mut index = Vec::new();
    if mode.includes(ConnectivityKind::Ec) {
        for i in 0..d {
            for j in 0..d {
                if mask_ec.is_none_or(|m| m.is_set(i, j)) {
                    index.push(FeatureColumn {
                        source: i,
                        target: j,
                        kind: ConnectivityKind::Ec,
                    });
                }
            }
        }
    }
    if mode.includes(ConnectivityKind::Fc) {
        for i in 0..d {
            let start = match fc_layout {
                FcLayout::Upper => i + 1,
                FcLayout::Full => 0,
            };
            for j in start..d {
                if mask_fc.is_none_or(|m| m.is_set(i, j)) {
                    index.push(FeatureColumn {
                        source: i,
                        target: j,
                        kind: ConnectivityKind::Fc,
                    });
                }
            }
        }
    }

    let features = DMatrix::from_fn(subjects.len(), index.len(), |r, c| {
        let col = index[c];
        let m = match col.kind {
            ConnectivityKind::Ec => &subjects[r].ec,
            ConnectivityKind::Fc => &subjects[r].fc,
        };
        m[(col.source, col.target)]
    });
    if features.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite connectivity value".into()));
    }
    Ok(SubjectFeatureTable {
        features,
        labels: subjects.iter().map(|s| s.label).collect(),
        feature_index: index,
    })
}
