//! Linear SVM classification of subjects, cross-validation, hyperparameter
//! grid search and the feature-removal ablation.
//!
//! The SVM minimizes `1/2 ||w||^2 + C sum_i hinge(y_i (w.x_i + b))` with a
//! Pegasos-style primal subgradient method: `lambda = 1 / (C N)`, step size
//! `1 / (lambda t)`, projection onto the ball of radius `1 / sqrt(lambda)`,
//! one shuffled pass over the data per epoch, and the returned parameters are
//! the average of the iterates over the second half of the epochs. The bias
//! is handled as an extra constant feature and is therefore regularized too.
//! Features are standardized with training-set statistics only, and the
//! scaling is folded back so the model acts on raw features.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::featmap::{FeatureKind, FeatureMapSpec};

pub const DEFAULT_EPOCHS: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub c: f64,
}

impl LinearModel {
    pub fn decision(&self, x: &[f64]) -> f64 {
        self.bias + self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
    }

    /// Predicted label, 1 when the decision value is positive.
    pub fn predict(&self, x: &[f64]) -> u8 {
        u8::from(self.decision(x) > 0.0)
    }
}

fn check_labels(y: &[u8]) -> Result<()> {
    if let Some(bad) = y.iter().find(|&&v| v > 1) {
        return Err(Error::InvalidArgument(format!("labels must be 0 or 1, found {bad}")));
    }
    Ok(())
}

fn row(x: &DMatrix<f64>, i: usize) -> Vec<f64> {
    x.row(i).iter().copied().collect()
}

pub fn train_linear_svm(x: &DMatrix<f64>, y: &[u8], c: f64, epochs: usize, seed: u64) -> Result<LinearModel> {
    let rows: Vec<usize> = (0..x.nrows()).collect();
    train_on_rows(x, y, &rows, c, epochs, seed)
}

fn train_on_rows(x: &DMatrix<f64>, y: &[u8], rows: &[usize], c: f64, epochs: usize, seed: u64) -> Result<LinearModel> {
    if x.nrows() != y.len() {
        return Err(Error::Dimension(format!("{} feature rows but {} labels", x.nrows(), y.len())));
    }
    check_labels(y)?;
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidArgument(format!("C must be positive, got {c}")));
    }
    if epochs == 0 {
        return Err(Error::InvalidArgument("epochs must be >= 1".into()));
    }
    let n = rows.len();
    let positives = rows.iter().filter(|&&i| y[i] == 1).count();
    if n < 2 || positives == 0 || positives == n {
        return Err(Error::SingleClass);
    }
    let f = x.ncols();
    if rows.iter().any(|&i| x.row(i).iter().any(|v| !v.is_finite())) {
        return Err(Error::InvalidArgument("non-finite feature value".into()));
    }

    let mut mean = vec![0.0; f];
    let mut scale = vec![0.0; f];
    for j in 0..f {
        mean[j] = rows.iter().map(|&i| x[(i, j)]).sum::<f64>() / n as f64;
        scale[j] = (rows.iter().map(|&i| (x[(i, j)] - mean[j]).powi(2)).sum::<f64>() / n as f64).sqrt();
    }
    // standardized rows with a trailing constant for the bias
    let z: Vec<Vec<f64>> = rows
        .iter()
        .map(|&i| {
            let mut v: Vec<f64> = (0..f)
                .map(|j| if scale[j] > 0.0 { (x[(i, j)] - mean[j]) / scale[j] } else { 0.0 })
                .collect();
            v.push(1.0);
            v
        })
        .collect();
    let target: Vec<f64> = rows.iter().map(|&i| if y[i] == 1 { 1.0 } else { -1.0 }).collect();

    let lambda = 1.0 / (c * n as f64);
    let radius = 1.0 / lambda.sqrt();
    let mut w = vec![0.0; f + 1];
    let mut avg = vec![0.0; f + 1];
    let mut averaged = 0usize;
    let avg_from = epochs / 2;
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = 0usize;
    for epoch in 0..epochs {
        order.shuffle(&mut rng);
        for &k in &order {
            t += 1;
            let eta = 1.0 / (lambda * t as f64);
            let margin = target[k] * w.iter().zip(&z[k]).map(|(a, b)| a * b).sum::<f64>();
            let shrink = 1.0 - eta * lambda;
            w.iter_mut().for_each(|v| *v *= shrink);
            if margin < 1.0 {
                let g = eta * target[k];
                w.iter_mut().zip(&z[k]).for_each(|(v, zk)| *v += g * zk);
            }
            let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > radius {
                let s = radius / norm;
                w.iter_mut().for_each(|v| *v *= s);
            }
            if epoch >= avg_from {
                averaged += 1;
                let a = 1.0 / averaged as f64;
                avg.iter_mut().zip(&w).for_each(|(m, v)| *m += a * (v - *m));
            }
        }
    }

    let bias_z = avg[f];
    let weights: Vec<f64> = (0..f)
        .map(|j| if scale[j] > 0.0 { avg[j] / scale[j] } else { 0.0 })
        .collect();
    let bias = bias_z - weights.iter().zip(&mean).map(|(w, m)| w * m).sum::<f64>();
    Ok(LinearModel { weights, bias, c })
}

/// Cross-validation settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CvSettings {
    pub folds: usize,
    pub repeats: usize,
    pub c: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for CvSettings {
    fn default() -> Self {
        Self {
            folds: 10,
            repeats: 100,
            c: 1.0,
            epochs: DEFAULT_EPOCHS,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub mean_accuracy: f64,
    /// Sample standard deviation over repeats (0 for a single repeat).
    pub std_accuracy: f64,
    pub accuracies: Vec<f64>,
    pub folds: usize,
    pub repeats: usize,
    pub seed: u64,
}

impl EvalReport {
    pub fn from_accuracies(accuracies: Vec<f64>, folds: usize, seed: u64) -> Self {
        let n = accuracies.len() as f64;
        let mean = accuracies.iter().sum::<f64>() / n;
        let std = if accuracies.len() > 1 {
            (accuracies.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Self {
            mean_accuracy: mean,
            std_accuracy: std,
            repeats: accuracies.len(),
            accuracies,
            folds,
            seed,
        }
    }
}

/// Stratified fold index for every row: each class is shuffled and dealt
/// round-robin over the folds, continuing where the previous class stopped.
pub fn stratified_folds(y: &[u8], k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut fold = vec![0; y.len()];
    let mut next = 0;
    for class in [0u8, 1] {
        let mut members: Vec<usize> = (0..y.len()).filter(|&i| y[i] == class).collect();
        members.shuffle(rng);
        for i in members {
            fold[i] = next % k;
            next += 1;
        }
    }
    fold
}

fn repeat_accuracy(x: &DMatrix<f64>, y: &[u8], cv: &CvSettings, repeat: usize) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(cv.seed.wrapping_add(repeat as u64));
    let folds = stratified_folds(y, cv.folds, &mut rng);
    let mut correct = 0usize;
    for f in 0..cv.folds {
        let train: Vec<usize> = (0..y.len()).filter(|&i| folds[i] != f).collect();
        let model = train_on_rows(x, y, &train, cv.c, cv.epochs, rand::Rng::random(&mut rng))?;
        correct += (0..y.len())
            .filter(|&i| folds[i] == f && model.predict(&row(x, i)) == y[i])
            .count();
    }
    Ok(correct as f64 / y.len() as f64)
}

/// Repeated stratified k-fold accuracy. Repeats run in parallel; each is
/// seeded from `cv.seed + repeat`, so results do not depend on scheduling.
pub fn cross_validate(x: &DMatrix<f64>, y: &[u8], cv: &CvSettings) -> Result<EvalReport> {
    if x.nrows() != y.len() {
        return Err(Error::Dimension(format!("{} feature rows but {} labels", x.nrows(), y.len())));
    }
    check_labels(y)?;
    if cv.folds < 2 || cv.repeats == 0 {
        return Err(Error::InvalidArgument("need folds >= 2 and repeats >= 1".into()));
    }
    for class in [0u8, 1] {
        let count = y.iter().filter(|&&v| v == class).count();
        if count < cv.folds {
            return Err(Error::ClassTooSmall {
                class,
                count,
                folds: cv.folds,
            });
        }
    }
    let accuracies = (0..cv.repeats)
        .into_par_iter()
        .map(|r| repeat_accuracy(x, y, cv, r))
        .collect::<Result<Vec<_>>>()?;
    Ok(EvalReport::from_accuracies(accuracies, cv.folds, cv.seed))
}

/// Candidate values for the order and the sinh parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpecGrid {
    pub kind: FeatureKind,
    pub orders: Vec<usize>,
    pub etas: Vec<f64>,
    pub sigmas: Vec<f64>,
}

impl SpecGrid {
    /// `r` in 1..=5 and `eta`, `sigma` in 0.1, 0.2, ..., 1.0.
    pub fn rsp_default() -> Self {
        let tenths: Vec<f64> = (1..=10).map(|k| k as f64 / 10.0).collect();
        Self {
            kind: FeatureKind::Rsp,
            orders: (1..=5).collect(),
            etas: tenths.clone(),
            sigmas: tenths,
        }
    }

    /// Grid points in evaluation order. Kinds without sinh parameters get a
    /// single `eta = sigma = 1` point per order.
    pub fn points(&self) -> Vec<FeatureMapSpec> {
        let (etas, sigmas) = match self.kind {
            FeatureKind::Rsp => (self.etas.clone(), self.sigmas.clone()),
            _ => (vec![1.0], vec![1.0]),
        };
        let mut out = Vec::new();
        for &r in &self.orders {
            for &sigma in &sigmas {
                for &eta in &etas {
                    let r = if self.kind == FeatureKind::Lin { 1 } else { r };
                    let spec = FeatureMapSpec {
                        kind: self.kind,
                        r,
                        eta,
                        sigma,
                    };
                    if !out.contains(&spec) {
                        out.push(spec);
                    }
                }
            }
        }
        out
    }
}

impl Default for SpecGrid {
    fn default() -> Self {
        Self::rsp_default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub spec: FeatureMapSpec,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub best: FeatureMapSpec,
    pub report: EvalReport,
    pub points: Vec<GridPoint>,
}

/// Cross-validates the data produced by `build` at every grid point and
/// keeps the most accurate spec. Ties go to the smaller `r`, then the smaller
/// `sigma`, then the smaller `eta`.
pub fn grid_search<F>(grid: &SpecGrid, cv: &CvSettings, build: F) -> Result<GridResult>
where
    F: Fn(&FeatureMapSpec) -> Result<(DMatrix<f64>, Vec<u8>)> + Sync,
{
    let points = grid.points();
    if points.is_empty() {
        return Err(Error::InvalidArgument("empty grid".into()));
    }
    let reports: Vec<EvalReport> = points
        .par_iter()
        .map(|spec| {
            build(spec)
                .and_then(|(x, y)| cross_validate(&x, &y, cv))
                .map_err(|e| Error::Grid {
                    r: spec.r,
                    eta: spec.eta,
                    sigma: spec.sigma,
                    inner: Box::new(e),
                })
        })
        .collect::<Result<_>>()?;
    let better = |a: usize, b: usize| {
        let (sa, sb) = (&points[a], &points[b]);
        let (ma, mb) = (reports[a].mean_accuracy, reports[b].mean_accuracy);
        ma > mb
            || (ma == mb
                && (sa.r, sa.sigma, sa.eta)
                    .partial_cmp(&(sb.r, sb.sigma, sb.eta))
                    .is_some_and(|o| o.is_lt()))
    };
    let mut best = 0;
    for k in 1..points.len() {
        if better(k, best) {
            best = k;
        }
    }
    Ok(GridResult {
        best: points[best],
        report: reports[best].clone(),
        points: points
            .iter()
            .zip(&reports)
            .map(|(spec, r)| GridPoint {
                spec: *spec,
                mean_accuracy: r.mean_accuracy,
                std_accuracy: r.std_accuracy,
            })
            .collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AblationPoint {
    /// Fraction of the removal set taken out so far.
    pub fraction: f64,
    pub removed: usize,
    pub accuracy: f64,
    pub baseline_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationCurve {
    pub points: Vec<AblationPoint>,
    pub baseline_draws: usize,
}

impl AblationCurve {
    /// Steps after the first (nothing removed) where the ranked curve is
    /// strictly below the random baseline, and the number of such steps.
    pub fn steps_below_baseline(&self) -> (usize, usize) {
        let steps = &self.points[1..];
        (steps.iter().filter(|p| p.accuracy < p.baseline_accuracy).count(), steps.len())
    }
}

fn without_columns(x: &DMatrix<f64>, removed: &[usize]) -> DMatrix<f64> {
    let keep: Vec<usize> = (0..x.ncols()).filter(|c| !removed.contains(c)).collect();
    DMatrix::from_fn(x.nrows(), keep.len(), |r, c| x[(r, keep[c])])
}

/// Removes the ranked columns `removal` in tranches of `step_fraction` of the
/// set and cross-validates after each step. The baseline removes the same
/// number of columns drawn uniformly from all columns, averaged over
/// `baseline_draws` independent draws. Every evaluation uses the same CV
/// seed, so the two curves are paired.
pub fn ablation(
    x: &DMatrix<f64>,
    y: &[u8],
    removal: &[usize],
    step_fraction: f64,
    cv: &CvSettings,
    baseline_draws: usize,
    seed: u64,
) -> Result<AblationCurve> {
    let f = x.ncols();
    if let Some(&bad) = removal.iter().find(|&&c| c >= f) {
        return Err(Error::InvalidArgument(format!("removal column {bad} out of range for {f} features")));
    }
    let mut seen = removal.to_vec();
    seen.sort_unstable();
    seen.dedup();
    if seen.len() != removal.len() {
        return Err(Error::InvalidArgument("duplicate removal column".into()));
    }
    if !(step_fraction > 0.0 && step_fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!("step fraction must be in (0, 1], got {step_fraction}")));
    }
    if baseline_draws == 0 {
        return Err(Error::InvalidArgument("need at least one baseline draw".into()));
    }
    let steps = (1.0 / step_fraction).ceil() as usize;
    let counts: Vec<(f64, usize)> = (0..=steps)
        .map(|s| {
            let fraction = (s as f64 * step_fraction).min(1.0);
            let n = ((fraction * removal.len() as f64) - 1e-9).ceil().max(0.0) as usize;
            (fraction, n.min(removal.len()))
        })
        .collect();
    let draws: Vec<Vec<usize>> = (0..baseline_draws)
        .map(|b| {
            let mut perm: Vec<usize> = (0..f).collect();
            perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed.wrapping_add(b as u64)));
            perm
        })
        .collect();

    let points = counts
        .par_iter()
        .map(|&(fraction, n)| {
            let accuracy = cross_validate(&without_columns(x, &removal[..n]), y, cv)?.mean_accuracy;
            let mut baseline = 0.0;
            for perm in &draws {
                baseline += cross_validate(&without_columns(x, &perm[..n]), y, cv)?.mean_accuracy;
            }
            Ok(AblationPoint {
                fraction,
                removed: n,
                accuracy,
                baseline_accuracy: baseline / baseline_draws as f64,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AblationCurve {
        points,
        baseline_draws,
    })
}
