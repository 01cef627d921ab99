//! Multivariate time series ingestion, standardization and lagged designs.
//!
//! A [`TimeSeriesMatrix`] stores samples time-major: row `t` is the time point,
//! column `c` the channel. Lagged designs are stacked in ascending time order
//! (the first target row is sample `p`, zero-based), which leaves every
//! residual variance, and therefore every causality index, unchanged relative
//! to any other fixed row order.

use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesMatrix {
    data: DMatrix<f64>,
    channel_names: Option<Vec<String>>,
}

impl TimeSeriesMatrix {
    /// Wraps a `T x d` matrix. Requires `T >= 2`, `d >= 1` and finite entries.
    pub fn new(data: DMatrix<f64>) -> Result<Self> {
        if data.nrows() < 2 {
            return Err(Error::TooFewSamples {
                required: 2,
                found: data.nrows(),
            });
        }
        if data.ncols() == 0 {
            return Err(Error::Dimension("time series needs at least one channel".into()));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            // column-major storage
            let (row, column) = (pos % data.nrows(), pos / data.nrows());
            return Err(Error::Parse {
                row: row + 1,
                column: column + 1,
                value: data[(row, column)].to_string(),
            });
        }
        Ok(Self {
            data,
            channel_names: None,
        })
    }

    /// Builds a series from per-channel columns of equal length.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let len = columns.first().map_or(0, Vec::len);
        if let Some(bad) = columns.iter().find(|c| c.len() != len) {
            return Err(Error::Dimension(format!(
                "channel lengths differ ({} vs {len})",
                bad.len()
            )));
        }
        Self::new(DMatrix::from_fn(len, columns.len(), |t, c| columns[c][t]))
    }

    pub fn with_channel_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.channels() {
            return Err(Error::Dimension(format!(
                "{} channel names for {} channels",
                names.len(),
                self.channels()
            )));
        }
        self.channel_names = Some(names);
        Ok(self)
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn channel_names(&self) -> Option<&[String]> {
        self.channel_names.as_deref()
    }

    /// Channel names, falling back to `ch0`, `ch1`, ...
    pub fn channel_labels(&self) -> Vec<String> {
        match &self.channel_names {
            Some(names) => names.clone(),
            None => (0..self.channels()).map(|c| format!("ch{c}")).collect(),
        }
    }

    /// Number of time points `T`.
    pub fn len(&self) -> usize {
        self.data.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.data.nrows() == 0
    }

    /// Number of channels `d`.
    pub fn channels(&self) -> usize {
        self.data.ncols()
    }

    pub fn column(&self, channel: usize) -> Vec<f64> {
        self.data.column(channel).iter().copied().collect()
    }

    /// Zero-mean, unit sample standard deviation per channel; constant
    /// channels become all zeros.
    pub fn standardize(&self) -> Self {
        let mut data = self.data.clone();
        let n = data.nrows() as f64;
        for mut col in data.column_iter_mut() {
            let mean = col.iter().sum::<f64>() / n;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
            let sd = var.sqrt();
            if sd > 0.0 && sd.is_finite() && sd > f64::EPSILON * mean.abs() {
                col.iter_mut().for_each(|v| *v = (*v - mean) / sd);
            } else {
                col.fill(0.0);
            }
        }
        Self {
            data,
            channel_names: self.channel_names.clone(),
        }
    }
}

/// Reads a comma-separated time series, one time point per line.
pub fn load_csv(path: impl AsRef<Path>, has_header: bool) -> Result<TimeSeriesMatrix> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text, has_header)
}

pub fn parse_csv(text: &str, has_header: bool) -> Result<TimeSeriesMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());

    let header: Option<Vec<String>> = if has_header {
        let h = reader
            .headers()
            .map_err(|e| Error::Dimension(format!("unreadable header: {e}")))?;
        Some(h.iter().map(str::to_owned).collect())
    } else {
        None
    };

    let mut expected = header.as_ref().map(Vec::len);
    let mut values = Vec::new();
    let mut rows = 0usize;
    for (idx, record) in reader.records().enumerate() {
        // 1-based file line, counting the header
        let line = idx + 1 + usize::from(has_header);
        let record = record.map_err(|e| Error::Dimension(format!("line {line}: {e}")))?;
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let width = *expected.get_or_insert(record.len());
        if record.len() != width {
            return Err(Error::Ragged {
                row: line,
                expected: width,
                found: record.len(),
            });
        }
        for (col, cell) in record.iter().enumerate() {
            let v: f64 = cell
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| Error::Parse {
                    row: line,
                    column: col + 1,
                    value: cell.to_owned(),
                })?;
            values.push(v);
        }
        rows += 1;
    }
    if rows < 2 {
        return Err(Error::TooFewSamples {
            required: 2,
            found: rows,
        });
    }
    let width = expected.unwrap_or(0);
    let ts = TimeSeriesMatrix::new(DMatrix::from_row_slice(rows, width, &values))?;
    match header {
        Some(names) => ts.with_channel_names(names),
        None => Ok(ts),
    }
}

/// Regression design for one target channel.
///
/// Row `r` of `x` holds, for lag `k = 1..=p` in order, the value of each
/// source channel at `t - k`, where `t` is the time index of `y[r]`. With
/// sources `[i, j]` a row reads `[i(t-1), j(t-1), i(t-2), j(t-2), ...]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaggedDesign {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    pub lag: usize,
    pub source_channels: Vec<usize>,
}

impl LaggedDesign {
    pub fn rows(&self) -> usize {
        self.y.len()
    }
}

pub fn build_lagged_design(
    ts: &TimeSeriesMatrix,
    target: usize,
    sources: &[usize],
    p: usize,
) -> Result<LaggedDesign> {
    build_lagged_design_from(ts, target, sources, p, p)
}

/// Like [`build_lagged_design`] but the first target sample is `first`
/// (zero-based, `first >= p`). Used to evaluate several lag orders on a
/// common estimation sample.
pub fn build_lagged_design_from(
    ts: &TimeSeriesMatrix,
    target: usize,
    sources: &[usize],
    p: usize,
    first: usize,
) -> Result<LaggedDesign> {
    let len = ts.len();
    if p == 0 || p >= len || first < p || first >= len {
        return Err(Error::InvalidLag { lag: p, len });
    }
    let channels = ts.channels();
    if let Some(&bad) = std::iter::once(&target)
        .chain(sources)
        .find(|&&c| c >= channels)
    {
        return Err(Error::InvalidChannel {
            index: bad,
            channels,
        });
    }
    let data = ts.data();
    let n = len - first;
    let width = sources.len();
    let x = DMatrix::from_fn(n, p * width, |r, c| {
        let (k, s) = (c / width + 1, c % width);
        data[(first + r - k, sources[s])]
    });
    let y = DVector::from_fn(n, |r, _| data[(first + r, target)]);
    Ok(LaggedDesign {
        x,
        y,
        lag: p,
        source_channels: sources.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(cols: &[&[f64]]) -> TimeSeriesMatrix {
        TimeSeriesMatrix::from_columns(&cols.iter().map(|c| c.to_vec()).collect::<Vec<_>>())
            .unwrap()
    }

    #[test]
    fn parses_plain_csv() {
        let ts = parse_csv("1,2,3\n4,5,6\n7,8,9\n1e-3,-2.5E2,0\n", false).unwrap();
        assert_eq!((ts.len(), ts.channels()), (4, 3));
        assert_eq!(ts.data()[(3, 1)], -250.0);
        assert!(ts.channel_names().is_none());
    }

    #[test]
    fn header_becomes_channel_names() {
        let ts = parse_csv("a,b\n1,2\n3,4\n", true).unwrap();
        assert_eq!(ts.channel_names().unwrap(), ["a", "b"]);
        assert_eq!(ts.len(), 2);
    }

    #[test]
    fn non_numeric_cell_reports_position() {
        let err = parse_csv("1,2\n3,abc\n5,6\n", false).unwrap_err();
        match err {
            Error::Parse { row, column, value } => {
                assert_eq!((row, column, value.as_str()), (2, 2, "abc"));
            }
            other => panic!("unexpected error {other:?}"),
        }
        let msg = parse_csv("x,y\n1,2\nabc,3\n", true).unwrap_err().to_string();
        assert!(msg.contains("row 3") && msg.contains("column 1"), "{msg}");
    }

    #[test]
    fn rejects_ragged_short_and_nonfinite() {
        assert!(matches!(
            parse_csv("1,2\n3\n", false),
            Err(Error::Ragged { row: 2, .. })
        ));
        assert!(matches!(
            parse_csv("1,2\n", false),
            Err(Error::TooFewSamples { .. })
        ));
        assert!(matches!(parse_csv("1,2\nNaN,3\n", false), Err(Error::Parse { .. })));
        assert!(matches!(parse_csv("1,2\ninf,3\n", false), Err(Error::Parse { .. })));
    }

    #[test]
    fn load_csv_missing_file_is_io_error() {
        assert!(matches!(
            load_csv("/definitely/not/here.csv", false),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn standardize_examples() {
        let ts = series(&[&[1.0, 2.0, 3.0], &[5.0, 5.0, 5.0]]).standardize();
        assert_eq!(ts.column(0), vec![-1.0, 0.0, 1.0]);
        assert_eq!(ts.column(1), vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn standardize_is_idempotent() {
        let ts = series(&[&[0.3, -1.2, 4.4, 2.0, 0.0], &[1.0, 1.5, -0.5, 9.0, 3.0]]);
        let once = ts.standardize();
        let twice = once.standardize();
        for (a, b) in once.data().iter().zip(twice.data().iter()) {
            assert!((a - b).abs() < 1e-12);
        }
        for c in 0..2 {
            let col = once.column(c);
            let mean = col.iter().sum::<f64>() / 5.0;
            let sd = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 4.0).sqrt();
            assert!(mean.abs() < 1e-9 && (sd - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn lag_one_design() {
        let ts = series(&[&[1.0, 2.0, 3.0, 4.0]]);
        let d = build_lagged_design(&ts, 0, &[0], 1).unwrap();
        assert_eq!(d.y.as_slice(), &[2.0, 3.0, 4.0]);
        assert_eq!(d.x, DMatrix::from_row_slice(3, 1, &[1.0, 2.0, 3.0]));
    }

    #[test]
    fn lag_two_design() {
        let ts = series(&[&[1.0, 2.0, 3.0, 4.0]]);
        let d = build_lagged_design(&ts, 0, &[0], 2).unwrap();
        assert_eq!(d.y.as_slice(), &[3.0, 4.0]);
        assert_eq!(d.x, DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 3.0, 2.0]));
    }

    #[test]
    fn two_source_layout_interleaves_by_lag() {
        let ts = series(&[&[1.0, 2.0, 3.0, 4.0], &[10.0, 20.0, 30.0, 40.0]]);
        let d = build_lagged_design(&ts, 0, &[0, 1], 1).unwrap();
        assert_eq!(d.x.ncols(), 2);
        assert_eq!(
            d.x,
            DMatrix::from_row_slice(3, 2, &[1.0, 10.0, 2.0, 20.0, 3.0, 30.0])
        );
        let d2 = build_lagged_design(&ts, 0, &[0, 1], 2).unwrap();
        assert_eq!(d2.x.row(0).iter().copied().collect::<Vec<_>>(), [2.0, 20.0, 1.0, 10.0]);
    }

    #[test]
    fn design_errors() {
        let ts = series(&[&[1.0, 2.0, 3.0]]);
        assert!(matches!(
            build_lagged_design(&ts, 0, &[0], 3),
            Err(Error::InvalidLag { .. })
        ));
        assert!(matches!(
            build_lagged_design(&ts, 0, &[0], 0),
            Err(Error::InvalidLag { .. })
        ));
        assert!(matches!(
            build_lagged_design(&ts, 1, &[0], 1),
            Err(Error::InvalidChannel { index: 1, .. })
        ));
    }
}
