//! Synthetic causal systems with known ground truth, and the detection
//! benchmark built on them.
//!
//! Randomness comes from ChaCha8 seeded through `seed_from_u64`, and normal
//! variates from the ziggurat sampler of `rand_distr::StandardNormal`; both are
//! platform independent, so a seed fully determines every series.
//!
//! Channel indices are zero-based throughout: the linear system's edges
//! `x1 -> x2`, `x1 -> x3` are `(0, 1)` and `(0, 2)`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::featmap::FeatureMapSpec;
use crate::gc::{accumulated_gci, gc_matrix, select_lag_bic_all, GcMatrix};
pub use crate::gc::LagChoice;
use crate::tsio::TimeSeriesMatrix;

pub const BURN_IN: usize = 100;
/// Magnitude beyond which a nonlinear trajectory counts as divergent.
pub const DIVERGENCE_LIMIT: f64 = 1e6;
const MAX_RESAMPLES: usize = 1000;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Directed edges `(source, target)` of a simulated system.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruthGraph {
    pub channels: usize,
    pub edges: Vec<(usize, usize)>,
}

impl GroundTruthGraph {
    pub fn new(channels: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if let Some(&(s, t)) = edges.iter().find(|&&(s, t)| s == t || s >= channels || t >= channels) {
            return Err(Error::InvalidArgument(format!(
                "edge {s}->{t} is a self-loop or out of range"
            )));
        }
        Ok(Self { channels, edges })
    }

    pub fn contains(&self, source: usize, target: usize) -> bool {
        self.edges.contains(&(source, target))
    }

    /// True when every true edge scores strictly above every non-edge.
    pub fn detected_by(&self, m: &GcMatrix) -> bool {
        let (mut min_true, mut max_false) = (f64::INFINITY, f64::NEG_INFINITY);
        for j in 0..self.channels {
            for i in 0..self.channels {
                if i == j {
                    continue;
                }
                let v = m.get(j, i);
                if self.contains(j, i) {
                    min_true = min_true.min(v);
                } else {
                    max_false = max_false.max(v);
                }
            }
        }
        min_true > max_false
    }
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub series: TimeSeriesMatrix,
    pub truth: GroundTruthGraph,
    /// Seed that produced `series` (differs from the request after resampling).
    pub seed_used: u64,
    pub resamples: usize,
}

fn check_length(len: usize) -> Result<()> {
    if len < 10 {
        return Err(Error::InvalidArgument(format!("length must be >= 10, got {len}")));
    }
    Ok(())
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Linear system
///
/// ```text
/// x1(t) = 0.441 x1(t-1) + 0.02 e1(t)
/// x2(t) = 0.8   x1(t-1) + 0.02 e2(t)
/// x3(t) = -0.7  x1(t-1) + 0.02 e3(t)
/// ```
///
/// started from `0.02 * N(0, 1)` and run for `BURN_IN + len` steps.
pub fn gen_linear(len: usize, seed: u64) -> Result<Simulation> {
    check_length(len)?;
    let mut rng = rng(seed);
    let mut x = [0.0f64; 3];
    x.iter_mut().for_each(|v| *v = 0.02 * normal(&mut rng));
    let mut cols: Vec<Vec<f64>> = (0..3).map(|_| Vec::with_capacity(len)).collect();
    for step in 0..BURN_IN + len {
        let e = [normal(&mut rng), normal(&mut rng), normal(&mut rng)];
        let prev = x;
        x[0] = 0.441 * prev[0] + 0.02 * e[0];
        x[1] = 0.8 * prev[0] + 0.02 * e[1];
        x[2] = -0.7 * prev[0] + 0.02 * e[2];
        if step >= BURN_IN {
            cols.iter_mut().zip(x).for_each(|(c, v)| c.push(v));
        }
    }
    Ok(Simulation {
        series: TimeSeriesMatrix::from_columns(&cols)?,
        truth: GroundTruthGraph::new(3, vec![(0, 1), (0, 2)])?,
        seed_used: seed,
        resamples: 0,
    })
}

/// Parameters of the coupled quadratic maps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonlinearParams {
    pub a: f64,
    pub s: f64,
    pub e: f64,
}

impl Default for NonlinearParams {
    fn default() -> Self {
        Self { a: 1.8, s: 0.02, e: 0.2 }
    }
}

/// Coupled quadratic maps
///
/// ```text
/// x1(t) = (1-e)(1 - a x1(t-1)^2) + e (1 - a x2(t-1)^2) + s e1(t)
/// x2(t) = 1 - a x2(t-1)^2 + s e2(t)
/// x3(t) = (1-e)(1 - a x3(t-1)^2) + e (1 - a x1(t-1)^2) + s e3(t)
/// ```
///
/// started uniformly in `[-0.5, 0.5]`. A trajectory leaving
/// `|x| <= DIVERGENCE_LIMIT` is discarded and regenerated from `seed + 1`,
/// `seed + 2`, ...; the number of discards is reported.
pub fn gen_nonlinear(len: usize, seed: u64, params: NonlinearParams) -> Result<Simulation> {
    check_length(len)?;
    for attempt in 0..=MAX_RESAMPLES {
        let s = seed.wrapping_add(attempt as u64);
        if let Some(cols) = nonlinear_trajectory(len, s, params) {
            return Ok(Simulation {
                series: TimeSeriesMatrix::from_columns(&cols)?,
                truth: GroundTruthGraph::new(3, vec![(1, 0), (0, 2)])?,
                seed_used: s,
                resamples: attempt,
            });
        }
    }
    Err(Error::InvalidArgument(format!(
        "nonlinear map diverged for {MAX_RESAMPLES} consecutive seeds from {seed}"
    )))
}

fn nonlinear_trajectory(len: usize, seed: u64, p: NonlinearParams) -> Option<Vec<Vec<f64>>> {
    let mut rng = rng(seed);
    let mut x = [0.0f64; 3];
    x.iter_mut().for_each(|v| *v = rng.random_range(-0.5..=0.5));
    let mut cols: Vec<Vec<f64>> = (0..3).map(|_| Vec::with_capacity(len)).collect();
    let quad = |v: f64| 1.0 - p.a * v * v;
    for step in 0..BURN_IN + len {
        let e = [normal(&mut rng), normal(&mut rng), normal(&mut rng)];
        let prev = x;
        x[0] = (1.0 - p.e) * quad(prev[0]) + p.e * quad(prev[1]) + p.s * e[0];
        x[1] = quad(prev[1]) + p.s * e[1];
        x[2] = (1.0 - p.e) * quad(prev[2]) + p.e * quad(prev[0]) + p.s * e[2];
        if x.iter().any(|v| !(v.abs() <= DIVERGENCE_LIMIT)) {
            return None;
        }
        if step >= BURN_IN {
            cols.iter_mut().zip(x).for_each(|(c, v)| c.push(v));
        }
    }
    Some(cols)
}

/// Subject-level system for synthetic cohorts, built from the linear
/// system's coefficients: channel 0 drives channel 1,
///
/// ```text
/// x0(t) = 0.441 x0(t-1) + 0.02 e0(t)
/// x1(t) = coupling x0(t-1) + 0.02 e1(t)
/// xk(t) = 0.441 xk(t-1) + 0.02 ek(t)      k >= 2
/// ```
///
/// so channels `2..` are independent background with the driver's dynamics.
pub fn gen_cohort_subject(channels: usize, coupling: f64, len: usize, seed: u64) -> Result<Simulation> {
    check_length(len)?;
    if channels < 2 {
        return Err(Error::InvalidArgument("cohort system needs >= 2 channels".into()));
    }
    let mut rng = rng(seed);
    let mut x: Vec<f64> = (0..channels).map(|_| 0.02 * normal(&mut rng)).collect();
    let mut cols = vec![Vec::with_capacity(len); channels];
    for step in 0..BURN_IN + len {
        let prev = x.clone();
        for (k, v) in x.iter_mut().enumerate() {
            let e = normal(&mut rng);
            *v = match k {
                1 => coupling * prev[0] + 0.02 * e,
                _ => 0.441 * prev[k] + 0.02 * e,
            };
        }
        if step >= BURN_IN {
            cols.iter_mut().zip(&x).for_each(|(c, &v)| c.push(v));
        }
    }
    Ok(Simulation {
        series: TimeSeriesMatrix::from_columns(&cols)?,
        truth: GroundTruthGraph::new(channels, vec![(0, 1)])?,
        seed_used: seed,
        resamples: 0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchmarkModel {
    Linear,
    Nonlinear,
}

impl FromStr for BenchmarkModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "linear" => Ok(Self::Linear),
            "nonlinear" => Ok(Self::Nonlinear),
            _ => Err(Error::InvalidArgument(format!("unknown model `{s}`"))),
        }
    }
}

impl fmt::Display for BenchmarkModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Linear => "linear",
            Self::Nonlinear => "nonlinear",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    pub model: BenchmarkModel,
    pub length: usize,
    pub runs: usize,
    pub methods: Vec<FeatureMapSpec>,
    pub lag: LagChoice,
    pub seed: u64,
    pub standardize: bool,
    pub ridge: f64,
}

impl BenchmarkConfig {
    pub fn new(model: BenchmarkModel, methods: Vec<FeatureMapSpec>) -> Self {
        Self {
            model,
            length: 1000,
            runs: 50,
            methods,
            lag: LagChoice::Fixed(1),
            seed: 0,
            standardize: false,
            ridge: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub spec: FeatureMapSpec,
    pub detection_rate: f64,
    pub true_edge_mean: f64,
    pub true_edge_sd: f64,
    pub non_edge_mean: f64,
    pub non_edge_sd: f64,
    pub accumulated_gci: Vec<f64>,
    pub detected: Vec<bool>,
    pub lags: Vec<usize>,
    /// Mean causality matrix over runs, row = source, column = target.
    pub mean_matrix: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub config: BenchmarkConfig,
    pub truth: GroundTruthGraph,
    pub run_seeds: Vec<u64>,
    pub resamples: Vec<usize>,
    pub methods: Vec<MethodSummary>,
}

/// One simulated run and its causality matrices, one per method.
#[derive(Debug, Clone)]
pub struct BenchmarkRun {
    pub simulation: Simulation,
    pub matrices: Vec<GcMatrix>,
}

pub fn simulate(model: BenchmarkModel, len: usize, seed: u64) -> Result<Simulation> {
    match model {
        BenchmarkModel::Linear => gen_linear(len, seed),
        BenchmarkModel::Nonlinear => gen_nonlinear(len, seed, NonlinearParams::default()),
    }
}

fn run_once(cfg: &BenchmarkConfig, run: usize) -> Result<BenchmarkRun> {
    let simulation = simulate(cfg.model, cfg.length, cfg.seed.wrapping_add(run as u64))?;
    let ts = if cfg.standardize {
        simulation.series.standardize()
    } else {
        simulation.series.clone()
    };
    let matrices = cfg
        .methods
        .iter()
        .map(|spec| {
            let p = match cfg.lag {
                LagChoice::Fixed(p) => p,
                LagChoice::Bic { p_max } => select_lag_bic_all(&ts, p_max, spec)?.selected,
            };
            gc_matrix(&ts, p, spec, cfg.ridge)
        })
        .collect::<Result<_>>()?;
    Ok(BenchmarkRun {
        simulation,
        matrices,
    })
}

/// Runs every replicate (in parallel on the current rayon pool) and returns
/// the individual runs in run order.
pub fn benchmark_runs(cfg: &BenchmarkConfig) -> Result<Vec<BenchmarkRun>> {
    if cfg.runs == 0 {
        return Err(Error::InvalidArgument("runs must be >= 1".into()));
    }
    if cfg.methods.is_empty() {
        return Err(Error::InvalidArgument("no methods given".into()));
    }
    (0..cfg.runs)
        .into_par_iter()
        .map(|run| {
            run_once(cfg, run).map_err(|e| Error::Run {
                run,
                inner: Box::new(e),
            })
        })
        .collect()
}

pub fn run_benchmark(cfg: &BenchmarkConfig) -> Result<BenchmarkReport> {
    let runs = benchmark_runs(cfg)?;
    Ok(summarize(cfg, &runs))
}

/// Seed offset separating order-tuning pilot runs from evaluation runs.
pub const PILOT_SEED_OFFSET: u64 = 1_000_000;

/// Mean accumulated causality per candidate order, and the winner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderTuning {
    pub order: usize,
    pub scores: Vec<(usize, f64)>,
}

/// Picks the expansion order of `template` that maximizes the mean
/// accumulated causality over `pilot_runs` replicates of `cfg`'s system.
/// Pilot seeds start at `cfg.seed + PILOT_SEED_OFFSET`, so they never
/// overlap the evaluation runs. Ties go to the smaller order.
pub fn tune_order(
    cfg: &BenchmarkConfig,
    template: FeatureMapSpec,
    orders: std::ops::RangeInclusive<usize>,
    pilot_runs: usize,
) -> Result<OrderTuning> {
    let methods: Vec<FeatureMapSpec> = orders
        .map(|r| FeatureMapSpec { r, ..template })
        .collect();
    if methods.is_empty() {
        return Err(Error::InvalidArgument("empty order range".into()));
    }
    let pilot = BenchmarkConfig {
        runs: pilot_runs,
        seed: cfg.seed.wrapping_add(PILOT_SEED_OFFSET),
        methods,
        ..cfg.clone()
    };
    let report = run_benchmark(&pilot)?;
    let scores: Vec<(usize, f64)> = report
        .methods
        .iter()
        .map(|m| (m.spec.r, mean_sd(&m.accumulated_gci).0))
        .collect();
    let mut best = scores[0];
    for &s in &scores[1..] {
        if s.1 > best.1 {
            best = s;
        }
    }
    Ok(OrderTuning {
        order: best.0,
        scores,
    })
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / n;
    let sd = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, sd)
}

pub fn summarize(cfg: &BenchmarkConfig, runs: &[BenchmarkRun]) -> BenchmarkReport {
    let truth = runs[0].simulation.truth.clone();
    let d = truth.channels;
    let methods = cfg
        .methods
        .iter()
        .enumerate()
        .map(|(k, spec)| {
            let mut on_edge = Vec::new();
            let mut off_edge = Vec::new();
            let mut mean_matrix = vec![vec![0.0; d]; d];
            for run in runs {
                let m = &run.matrices[k];
                for j in 0..d {
                    for i in 0..d {
                        if i == j {
                            continue;
                        }
                        let v = m.get(j, i);
                        mean_matrix[j][i] += v / runs.len() as f64;
                        if truth.contains(j, i) {
                            on_edge.push(v);
                        } else {
                            off_edge.push(v);
                        }
                    }
                }
            }
            let detected: Vec<bool> = runs.iter().map(|r| truth.detected_by(&r.matrices[k])).collect();
            let (true_edge_mean, true_edge_sd) = mean_sd(&on_edge);
            let (non_edge_mean, non_edge_sd) = mean_sd(&off_edge);
            MethodSummary {
                spec: *spec,
                detection_rate: detected.iter().filter(|&&b| b).count() as f64 / runs.len() as f64,
                true_edge_mean,
                true_edge_sd,
                non_edge_mean,
                non_edge_sd,
                accumulated_gci: runs.iter().map(|r| accumulated_gci(&r.matrices[k])).collect(),
                detected,
                lags: runs.iter().map(|r| r.matrices[k].lag).collect(),
                mean_matrix,
            }
        })
        .collect();
    BenchmarkReport {
        config: cfg.clone(),
        truth,
        run_seeds: runs.iter().map(|r| r.simulation.seed_used).collect(),
        resamples: runs.iter().map(|r| r.simulation.resamples).collect(),
        methods,
    }
}
