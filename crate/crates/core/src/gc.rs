//! Pairwise Granger causality in a chosen feature space.
//!
//! For a target channel `i` and a source channel `j`, the restricted model
//! regresses `i(t)` on the expanded lags of `i` alone and the full model on
//! the expanded lags of `i` and `j`. The causality index is
//! `F(j -> i) = ln(var_restricted / var_full)`, clamped at zero, with both
//! residual variances floored at [`VARIANCE_FLOOR`].

use std::str::FromStr;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::featmap::FeatureMapSpec;
use crate::regression::fit_least_squares;
use crate::tsio::{build_lagged_design, build_lagged_design_from, TimeSeriesMatrix};

pub const VARIANCE_FLOOR: f64 = 1e-12;

/// Causality indices for every ordered channel pair.
///
/// `values[(j, i)]` is the causality of channel `j` (row, source) onto
/// channel `i` (column, target).
#[derive(Debug, Clone, PartialEq)]
pub struct GcMatrix {
    pub values: DMatrix<f64>,
    pub lag: usize,
    pub spec: FeatureMapSpec,
    pub channels: Vec<String>,
}

impl GcMatrix {
    pub fn dim(&self) -> usize {
        self.values.nrows()
    }

    pub fn get(&self, source: usize, target: usize) -> f64 {
        self.values[(source, target)]
    }
}

/// Residual variances of the restricted and full models for one pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairVariances {
    pub restricted: f64,
    pub full: f64,
}

impl PairVariances {
    pub fn gci(&self) -> f64 {
        gci_from_variances(self.restricted, self.full)
    }
}

pub fn gci_from_variances(restricted: f64, full: f64) -> f64 {
    if restricted < VARIANCE_FLOOR && full < VARIANCE_FLOOR {
        return 0.0;
    }
    let r = restricted.max(VARIANCE_FLOOR);
    let f = full.max(VARIANCE_FLOOR);
    (r / f).ln().max(0.0)
}

fn model_variance(
    ts: &TimeSeriesMatrix,
    target: usize,
    sources: &[usize],
    p: usize,
    first: usize,
    spec: &FeatureMapSpec,
    ridge: f64,
) -> Result<f64> {
    let design = build_lagged_design_from(ts, target, sources, p, first)?;
    let q = spec.expand_rows(&design.x)?;
    Ok(fit_least_squares(&q, &design.y, ridge)?.residual_variance)
}

pub fn pair_variances(
    ts: &TimeSeriesMatrix,
    target: usize,
    source: usize,
    p: usize,
    spec: &FeatureMapSpec,
    ridge: f64,
) -> Result<PairVariances> {
    if target == source {
        return Err(Error::InvalidArgument(format!(
            "source and target are both channel {target}"
        )));
    }
    spec.validate()?;
    Ok(PairVariances {
        restricted: model_variance(ts, target, &[target], p, p, spec, ridge)?,
        full: model_variance(ts, target, &[target, source], p, p, spec, ridge)?,
    })
}

/// Causality index `F(source -> target)`.
pub fn gci_pair(
    ts: &TimeSeriesMatrix,
    target: usize,
    source: usize,
    p: usize,
    spec: &FeatureMapSpec,
    ridge: f64,
) -> Result<f64> {
    Ok(pair_variances(ts, target, source, p, spec, ridge)?.gci())
}

/// Computes every off-diagonal entry. Pairs are evaluated in parallel on the
/// current rayon pool; each result lands in its own `(source, target)` slot.
pub fn gc_matrix(
    ts: &TimeSeriesMatrix,
    p: usize,
    spec: &FeatureMapSpec,
    ridge: f64,
) -> Result<GcMatrix> {
    let d = ts.channels();
    if d < 2 {
        return Err(Error::Dimension(format!("need at least 2 channels, got {d}")));
    }
    spec.validate()?;
    // validates lag and channel bounds once, up front
    build_lagged_design(ts, 0, &[0], p)?;

    let restricted: Vec<f64> = (0..d)
        .into_par_iter()
        .map(|i| model_variance(ts, i, &[i], p, p, spec, ridge))
        .collect::<Result<_>>()?;

    let pairs: Vec<(usize, usize)> = (0..d)
        .flat_map(|j| (0..d).filter(move |&i| i != j).map(move |i| (j, i)))
        .collect();
    let entries: Vec<f64> = pairs
        .par_iter()
        .map(|&(j, i)| {
            model_variance(ts, i, &[i, j], p, p, spec, ridge)
                .map(|full| gci_from_variances(restricted[i], full))
                .map_err(|e| Error::Pair {
                    source_channel: j,
                    target_channel: i,
                    inner: Box::new(e),
                })
        })
        .collect::<Result<_>>()?;

    let mut values = DMatrix::zeros(d, d);
    for (&(j, i), v) in pairs.iter().zip(entries) {
        values[(j, i)] = v;
    }
    Ok(GcMatrix {
        values,
        lag: p,
        spec: *spec,
        channels: ts.channel_labels(),
    })
}

/// Bayesian information criterion of the restricted model at each lag
/// `1..=p_max`, all evaluated on the common sample `t >= p_max`.
pub fn bic_curve(
    ts: &TimeSeriesMatrix,
    target: usize,
    p_max: usize,
    spec: &FeatureMapSpec,
) -> Result<Vec<(usize, f64, f64)>> {
    let len = ts.len();
    if p_max == 0 || 2 * p_max >= len {
        return Err(Error::InvalidArgument(format!(
            "p_max must satisfy 1 <= p_max < T/2 (p_max = {p_max}, T = {len})"
        )));
    }
    spec.validate()?;
    let n = (len - p_max) as f64;
    (1..=p_max)
        .map(|p| {
            let var = model_variance(ts, target, &[target], p, p_max, spec, 0.0)?;
            let k = spec.expanded_dim(p) as f64;
            Ok((p, var, n * var.max(VARIANCE_FLOOR).ln() + k * n.ln()))
        })
        .collect()
}

/// Lag order minimizing the BIC for one target channel; ties go to the
/// smaller lag.
pub fn select_lag_bic(
    ts: &TimeSeriesMatrix,
    target: usize,
    p_max: usize,
    spec: &FeatureMapSpec,
) -> Result<usize> {
    let curve = bic_curve(ts, target, p_max, spec)?;
    if curve.iter().all(|&(_, var, _)| var < VARIANCE_FLOOR) {
        return Ok(1);
    }
    let mut best = curve[0];
    for &point in &curve[1..] {
        if point.2 < best.2 {
            best = point;
        }
    }
    Ok(best.0)
}

/// Per-channel lag selections and their mode (ties to the smaller lag).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LagSelection {
    pub per_channel: Vec<usize>,
    pub selected: usize,
}

pub fn select_lag_bic_all(
    ts: &TimeSeriesMatrix,
    p_max: usize,
    spec: &FeatureMapSpec,
) -> Result<LagSelection> {
    let per_channel: Vec<usize> = (0..ts.channels())
        .into_par_iter()
        .map(|c| select_lag_bic(ts, c, p_max, spec))
        .collect::<Result<_>>()?;
    let mut counts = vec![0usize; p_max + 1];
    for &p in &per_channel {
        counts[p] += 1;
    }
    let selected = (1..=p_max)
        .fold(1, |best, p| if counts[p] > counts[best] { p } else { best });
    Ok(LagSelection {
        per_channel,
        selected,
    })
}

/// Sum of all entries.
pub fn accumulated_gci(m: &GcMatrix) -> f64 {
    m.values.iter().sum()
}

/// Fixed lag, or per-channel BIC up to `p_max` with the mode taken as the lag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LagChoice {
    Fixed(usize),
    Bic { p_max: usize },
}

impl FromStr for LagChoice {
    type Err = Error;
    /// `"3"` or `"bic"` (p_max 5) or `"bic:8"`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("bic") {
            let p_max = match rest.strip_prefix(':') {
                Some(v) => v.parse().map_err(|_| Error::InvalidArgument(format!("bad lag `{s}`")))?,
                None if rest.is_empty() => 5,
                None => return Err(Error::InvalidArgument(format!("bad lag `{s}`"))),
            };
            return Ok(Self::Bic { p_max });
        }
        match s.parse() {
            Ok(p) if p >= 1 => Ok(Self::Fixed(p)),
            _ => Err(Error::InvalidArgument(format!("bad lag `{s}`"))),
        }
    }
}

/// Causality matrix at a fixed lag or at the BIC-selected lag; the
/// per-channel BIC choices are returned alongside when BIC was used.
pub fn gc_matrix_with(
    ts: &TimeSeriesMatrix,
    lag: LagChoice,
    spec: &FeatureMapSpec,
    ridge: f64,
) -> Result<(GcMatrix, Option<Vec<usize>>)> {
    match lag {
        LagChoice::Fixed(p) => Ok((gc_matrix(ts, p, spec, ridge)?, None)),
        LagChoice::Bic { p_max } => {
            let sel = select_lag_bic_all(ts, p_max, spec)?;
            Ok((gc_matrix(ts, sel.selected, spec, ridge)?, Some(sel.per_channel)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn noise(seed: u64, len: usize, channels: usize) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..channels)
            .map(|_| (0..len).map(|_| StandardNormal.sample(&mut rng)).collect())
            .collect()
    }

    #[test]
    fn independent_noise_has_small_index() {
        let mut worst: f64 = 0.0;
        for seed in 0..50 {
            let ts = TimeSeriesMatrix::from_columns(&noise(seed, 1000, 2)).unwrap();
            worst = worst.max(gci_pair(&ts, 0, 1, 1, &FeatureMapSpec::LIN, 0.0).unwrap());
        }
        assert!(worst < 0.02, "max null GCI {worst}");
    }

    #[test]
    fn deterministic_copy_hits_the_floor() {
        let cols = noise(3, 500, 1);
        let j = cols[0].clone();
        let mut i = vec![0.0; 500];
        i[1..].copy_from_slice(&j[..499]);
        let ts = TimeSeriesMatrix::from_columns(&[i, j]).unwrap();
        let v = pair_variances(&ts, 0, 1, 1, &FeatureMapSpec::LIN, 0.0).unwrap();
        assert!(v.full < VARIANCE_FLOOR);
        let expected = (v.restricted / VARIANCE_FLOOR).ln();
        let got = gci_pair(&ts, 0, 1, 1, &FeatureMapSpec::LIN, 0.0).unwrap();
        assert_eq!(got, expected);
    }

    #[test]
    fn both_variances_at_floor_is_zero() {
        assert_eq!(gci_from_variances(0.0, 0.0), 0.0);
        assert_eq!(gci_from_variances(1e-13, 1e-20), 0.0);
        assert_eq!(gci_from_variances(0.5, 0.6), 0.0);
        assert!((gci_from_variances(2.0, 1.0) - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn two_channel_matrix_shape() {
        let ts = TimeSeriesMatrix::from_columns(&noise(5, 200, 2)).unwrap();
        let m = gc_matrix(&ts, 1, &FeatureMapSpec::mp(2), 0.0).unwrap();
        assert_eq!(m.dim(), 2);
        assert_eq!(m.values[(0, 0)], 0.0);
        assert_eq!(m.values[(1, 1)], 0.0);
        assert_eq!(m.values[(0, 1)], gci_pair(&ts, 1, 0, 1, &FeatureMapSpec::mp(2), 0.0).unwrap());
        assert_eq!(m.values[(1, 0)], gci_pair(&ts, 0, 1, 1, &FeatureMapSpec::mp(2), 0.0).unwrap());
    }

    #[test]
    fn rejects_degenerate_requests() {
        let ts = TimeSeriesMatrix::from_columns(&noise(1, 50, 1)).unwrap();
        assert!(gc_matrix(&ts, 1, &FeatureMapSpec::LIN, 0.0).is_err());
        let ts = TimeSeriesMatrix::from_columns(&noise(1, 50, 2)).unwrap();
        assert!(gci_pair(&ts, 1, 1, 1, &FeatureMapSpec::LIN, 0.0).is_err());
        assert!(gc_matrix(&ts, 50, &FeatureMapSpec::LIN, 0.0).is_err());
        assert!(select_lag_bic(&ts, 0, 25, &FeatureMapSpec::LIN).is_err());
    }

    #[test]
    fn accumulated_sum() {
        let mut m = GcMatrix {
            values: DMatrix::zeros(3, 3),
            lag: 1,
            spec: FeatureMapSpec::LIN,
            channels: vec![],
        };
        assert_eq!(accumulated_gci(&m), 0.0);
        m.values[(0, 1)] = 0.5;
        m.values[(0, 2)] = 0.7;
        assert!((accumulated_gci(&m) - 1.2).abs() < 1e-15);
    }

    #[test]
    fn bic_picks_one_for_white_noise() {
        let ts = TimeSeriesMatrix::from_columns(&noise(9, 1000, 1)).unwrap();
        assert_eq!(select_lag_bic(&ts, 0, 5, &FeatureMapSpec::LIN).unwrap(), 1);
    }

    #[test]
    fn bic_constant_series_returns_one() {
        let ts = TimeSeriesMatrix::from_columns(&[vec![2.0; 40]]).unwrap();
        assert_eq!(select_lag_bic(&ts, 0, 5, &FeatureMapSpec::LIN).unwrap(), 1);
    }

    #[test]
    fn bic_recovers_ar1() {
        let mut hits = 0;
        for seed in 0..100u64 {
            let e = &noise(1000 + seed, 1000, 1)[0];
            let mut x = vec![0.0; 1000];
            for t in 1..1000 {
                x[t] = 0.8 * x[t - 1] + e[t];
            }
            let ts = TimeSeriesMatrix::from_columns(&[x]).unwrap();
            // closed-form check of the curve against direct enumeration
            let curve = bic_curve(&ts, 0, 5, &FeatureMapSpec::LIN).unwrap();
            let n = 995.0;
            for &(p, var, bic) in &curve {
                assert_eq!(bic, n * var.ln() + (p as f64 + 1.0) * n.ln());
            }
            if select_lag_bic(&ts, 0, 5, &FeatureMapSpec::LIN).unwrap() == 1 {
                hits += 1;
            }
        }
        assert!(hits >= 90, "p=1 in {hits}/100 runs");
    }

    #[test]
    fn bic_finds_ar2() {
        let e = &noise(77, 2000, 1)[0];
        let mut x = vec![0.0; 2000];
        for t in 2..2000 {
            x[t] = 0.5 * x[t - 1] - 0.4 * x[t - 2] + e[t];
        }
        let ts = TimeSeriesMatrix::from_columns(&[x]).unwrap();
        assert_eq!(select_lag_bic(&ts, 0, 6, &FeatureMapSpec::LIN).unwrap(), 2);
    }

    #[test]
    fn lag_mode_prefers_smaller_on_ties() {
        let cols = noise(4, 400, 2);
        let ts = TimeSeriesMatrix::from_columns(&cols).unwrap();
        let sel = select_lag_bic_all(&ts, 4, &FeatureMapSpec::LIN).unwrap();
        assert_eq!(sel.per_channel.len(), 2);
        assert_eq!(sel.selected, 1);
    }
}
