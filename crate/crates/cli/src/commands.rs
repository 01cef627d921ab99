//! Subcommand definitions and their implementations.

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use polygc::connectome::{
    cell_tests, fisher_z, fuse_masks, group_mean_diff, mask_from_tests, pearson_fc,
    prune_bidirectional, threshold_sweep, CellSet, FcLayout, FeatureColumn, FeatureMode,
    SubjectConnectivity, SubjectFeatureTable,
};
use polygc::featmap::parse_method_list;
use polygc::gc::{gc_matrix_with, LagChoice};
use polygc::io;
use polygc::mlpipe::{ablation, cross_validate, grid_search, CvSettings};
use polygc::netmetrics::{summarize_network, WeightedDigraph};
use polygc::pipeline::{self, PipelineConfig};
use polygc::simgen::{benchmark_runs, summarize, tune_order, BenchmarkConfig, BenchmarkModel};
use polygc::tsio::load_csv;
use polygc::{FeatureKind, FeatureMapSpec};

use crate::manifest::RunManifest;

/// Bad flags or inputs detected by the CLI itself (exit code 2).
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Debug, Parser)]
#[command(name = "polygc", version, about = "Linear and polynomial-kernel Granger causality toolkit")]
pub struct Cli {
    /// Worker threads; defaults to the number of available cores.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Benchmark causality methods on a synthetic system with known edges.
    Simulate(SimulateArgs),
    /// Causality matrix for each time-series CSV.
    Gc(GcArgs),
    /// Pearson correlation matrix for each time-series CSV.
    Fc(FcArgs),
    /// Cells that differ between two groups of matrices.
    Mask(MaskArgs),
    /// Intersection of an EC mask and an FC mask.
    Fuse(FuseArgs),
    /// Subject-by-feature table from EC/FC matrices.
    Assemble(AssembleArgs),
    /// Cross-validated linear SVM accuracy.
    Classify(ClassifyArgs),
    /// Feature-map hyperparameter search driven by a pipeline config.
    Grid(ConfigArgs),
    /// Accuracy as ranked mask features are removed, against random removal.
    Ablate(AblateArgs),
    /// Efficiency, degrees and hubs of a weighted network.
    Metrics(MetricsArgs),
    /// Run every stage from a pipeline config.
    Pipeline(ConfigArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    /// `linear` or `nonlinear`.
    #[arg(long, default_value = "linear")]
    model: String,
    #[arg(long, default_value_t = 50)]
    runs: usize,
    #[arg(long, default_value_t = 1000)]
    length: usize,
    /// Comma-separated feature maps, e.g. `lin,mp:r=2,rsp:r=2,eta=1,sigma=1`.
    #[arg(long, default_value = "lin,mp:r=2,rp:r=2,rspf:r=2")]
    methods: String,
    /// Lag order, `bic` or `bic:N`.
    #[arg(long, default_value = "1")]
    lag: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Standardize each simulated channel before fitting.
    #[arg(long)]
    standardize: bool,
    #[arg(long, default_value_t = 0.0)]
    ridge: f64,
    /// Choose the order of every `rsp` method (1..=5) by mean accumulated
    /// causality over pilot runs.
    #[arg(long)]
    tune_order: bool,
    #[arg(long, default_value_t = 10)]
    pilot_runs: usize,
    /// Also write every simulated series.
    #[arg(long)]
    write_series: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct SeriesInput {
    /// CSV files or directories of CSV files (time in rows, channels in columns).
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// First row of each CSV holds channel names.
    #[arg(long)]
    header: bool,
    /// Skip per-channel standardization.
    #[arg(long)]
    raw: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct GcArgs {
    #[command(flatten)]
    input: SeriesInput,
    #[arg(long, default_value = "lin")]
    spec: String,
    #[arg(long, default_value_t = 1)]
    lag: usize,
    /// Select the lag by BIC (per channel, mode across channels).
    #[arg(long)]
    bic: bool,
    #[arg(long, default_value_t = 5)]
    p_max: usize,
    #[arg(long, default_value_t = 0.0)]
    ridge: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct FcArgs {
    #[command(flatten)]
    input: SeriesInput,
    /// Write Fisher z values instead of correlations.
    #[arg(long)]
    fisher_z: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum MatrixKind {
    Ec,
    Fc,
}

#[derive(Debug, Args, Serialize)]
pub struct MaskArgs {
    /// Matrices of the group labelled 1 (CSV or JSON).
    #[arg(long, num_args = 1.., required = true)]
    high: Vec<PathBuf>,
    /// Matrices of the group labelled 0.
    #[arg(long, num_args = 1.., required = true)]
    low: Vec<PathBuf>,
    /// `ec` tests every directed cell, `fc` the upper triangle (mirrored).
    #[arg(long, value_enum, default_value = "ec")]
    kind: MatrixKind,
    #[arg(long, default_value_t = 0.01)]
    alpha: f64,
    #[arg(long, default_value_t = 0.05)]
    q: f64,
    /// Apply only the alpha threshold, without FDR control.
    #[arg(long)]
    no_fdr: bool,
    /// Drop cells selected in both directions.
    #[arg(long)]
    prune: bool,
    /// Test Fisher z values instead of the raw matrix entries.
    #[arg(long)]
    fisher_z: bool,
    /// Raw p-value thresholds for the sweep table.
    #[arg(long, value_delimiter = ',', default_value = "0.001,0.005,0.01,0.05,0.1")]
    sweep: Vec<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct FuseArgs {
    #[arg(long)]
    ec: PathBuf,
    #[arg(long)]
    fc: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct AssembleArgs {
    /// CSV with columns `subject,label,ec,fc`; paths relative to the file.
    #[arg(long)]
    subjects: PathBuf,
    #[arg(long)]
    mask_ec: Option<PathBuf>,
    #[arg(long)]
    mask_fc: Option<PathBuf>,
    /// `EC`, `FC` or `EC+FC`.
    #[arg(long, default_value = "EC+FC")]
    mode: String,
    /// Vectorize FC over all cells instead of the upper triangle.
    #[arg(long)]
    fc_full: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct CvArgs {
    #[arg(long, default_value_t = 10)]
    folds: usize,
    #[arg(long, default_value_t = 100)]
    repeats: usize,
    /// SVM regularization constant.
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value_t = polygc::mlpipe::DEFAULT_EPOCHS)]
    epochs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl CvArgs {
    fn settings(&self) -> CvSettings {
        CvSettings {
            folds: self.folds,
            repeats: self.repeats,
            c: self.c,
            epochs: self.epochs,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct ClassifyArgs {
    /// Feature CSV with a header row.
    #[arg(long)]
    features: PathBuf,
    /// One 0/1 label per subject.
    #[arg(long)]
    labels: PathBuf,
    #[command(flatten)]
    cv: CvArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ConfigArgs {
    /// TOML pipeline configuration.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct AblateArgs {
    #[arg(long)]
    features: PathBuf,
    #[arg(long)]
    labels: PathBuf,
    /// Feature index JSON written next to the feature table.
    #[arg(long)]
    index: PathBuf,
    /// Mask whose cells form the removal set.
    #[arg(long)]
    mask: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    step: f64,
    #[arg(long, default_value_t = 10)]
    draws: usize,
    #[command(flatten)]
    cv: CvArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct MetricsArgs {
    /// Weighted matrix (CSV or causality JSON); row = source, column = target.
    #[arg(long)]
    input: PathBuf,
    /// Edges for degrees and hubs are weights strictly above this value.
    #[arg(long, default_value_t = 0.0)]
    binarize_threshold: f64,
    #[arg(long)]
    out: PathBuf,
}

pub fn run(cli: Cli) -> Result<()> {
    let jobs = match cli.jobs {
        Some(0) => return Err(usage("--jobs must be at least 1")),
        Some(j) => j,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .context("starting worker threads")?;
    pool.install(|| match cli.command {
        Command::Simulate(a) => simulate(a, jobs),
        Command::Gc(a) => gc(a, jobs),
        Command::Fc(a) => fc(a, jobs),
        Command::Mask(a) => mask(a, jobs),
        Command::Fuse(a) => fuse(a, jobs),
        Command::Assemble(a) => assemble(a, jobs),
        Command::Classify(a) => classify(a, jobs),
        Command::Grid(a) => grid(a, jobs),
        Command::Ablate(a) => ablate(a, jobs),
        Command::Metrics(a) => metrics(a, jobs),
        Command::Pipeline(a) => run_pipeline(a, jobs),
    })
}

fn manifest_for<T: Serialize>(command: &str, args: &T, seed: Option<u64>, jobs: usize) -> Result<RunManifest> {
    Ok(RunManifest::new(command, serde_json::to_value(args)?, seed, jobs))
}

fn finish(mut m: RunManifest, out: &Path) -> Result<()> {
    m.add_output_dir(out)?;
    m.write(&out.join("manifest.json"))
}

#[derive(Serialize)]
struct TunedOrder {
    method: String,
    tuning: polygc::simgen::OrderTuning,
}

#[derive(Serialize)]
struct SimulateOutput {
    order_tuning: Vec<TunedOrder>,
    report: polygc::simgen::BenchmarkReport,
}

fn simulate(a: SimulateArgs, jobs: usize) -> Result<()> {
    let model: BenchmarkModel = a.model.parse()?;
    let mut cfg = BenchmarkConfig::new(model, parse_method_list(&a.methods)?);
    cfg.length = a.length;
    cfg.runs = a.runs;
    cfg.lag = a.lag.parse()?;
    cfg.seed = a.seed;
    cfg.standardize = a.standardize;
    cfg.ridge = a.ridge;

    let mut order_tuning = Vec::new();
    if a.tune_order {
        for k in 0..cfg.methods.len() {
            let spec = cfg.methods[k];
            if spec.kind == FeatureKind::Rsp {
                let tuning = tune_order(&cfg, spec, 1..=5, a.pilot_runs)?;
                cfg.methods[k].r = tuning.order;
                order_tuning.push(TunedOrder {
                    method: spec.to_string(),
                    tuning,
                });
            }
        }
    }

    let runs = benchmark_runs(&cfg)?;
    let report = summarize(&cfg, &runs);
    if a.write_series {
        for (k, run) in runs.iter().enumerate() {
            let path = a.out.join("series").join(format!("run_{k:03}.csv"));
            let ts = &run.simulation.series;
            let text = io::csv_row(ts.channel_labels()) + &io::matrix_to_csv(ts.data());
            io::write_text(&path, &text)?;
        }
    }
    let mut bars = String::from("method,detection_rate,true_edge_mean,true_edge_sd,non_edge_mean,non_edge_sd\n");
    for m in &report.methods {
        bars.push_str(&io::csv_row([
            m.spec.to_string().replace(',', ";"),
            m.detection_rate.to_string(),
            m.true_edge_mean.to_string(),
            m.true_edge_sd.to_string(),
            m.non_edge_mean.to_string(),
            m.non_edge_sd.to_string(),
        ]));
    }
    io::write_text(&a.out.join("gci.csv"), &bars)?;
    io::write_json(&a.out.join("report.json"), &SimulateOutput { order_tuning, report })?;
    finish(manifest_for("simulate", &a, Some(a.seed), jobs)?, &a.out)
}

/// Input files in order: files as given, directories expanded to their
/// `.csv` entries sorted by name.
fn expand_inputs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(p)
                .with_context(|| format!("listing {}", p.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.is_file() && f.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")))
                .collect();
            found.sort();
            files.extend(found);
        } else if p.is_file() {
            files.push(p.clone());
        } else {
            return Err(usage(format!("input not found: {}", p.display())));
        }
    }
    if files.is_empty() {
        return Err(usage("no input files"));
    }
    Ok(files)
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "input".into(), |s| s.to_string_lossy().into_owned())
}

/// Runs `job` on every input in parallel, writes successes in input order,
/// and turns failures into one error naming every failed file.
fn per_file<T: Send>(
    files: &[PathBuf],
    job: impl Fn(&Path) -> polygc::Result<T> + Sync,
    mut write: impl FnMut(&Path, T) -> Result<()>,
) -> Result<()> {
    let results: Vec<polygc::Result<T>> = files.par_iter().map(|f| job(f)).collect();
    let mut failures = Vec::new();
    for (f, r) in files.iter().zip(results) {
        match r {
            Ok(v) => write(f, v)?,
            Err(e) => failures.push((f, e)),
        }
    }
    if failures.is_empty() {
        return Ok(());
    }
    let all_validation = failures.iter().all(|(_, e)| e.is_validation());
    let msg = failures
        .iter()
        .map(|(f, e)| format!("{}: {e}", f.display()))
        .collect::<Vec<_>>()
        .join("; ");
    let msg = format!("{} of {} inputs failed: {msg}", failures.len(), files.len());
    Err(if all_validation { usage(msg) } else { anyhow!(msg) })
}

fn load_series(input: &SeriesInput, path: &Path) -> polygc::Result<polygc::TimeSeriesMatrix> {
    let ts = load_csv(path, input.header)?;
    Ok(if input.raw { ts } else { ts.standardize() })
}

fn gc(a: GcArgs, jobs: usize) -> Result<()> {
    let spec: FeatureMapSpec = a.spec.parse()?;
    spec.validate()?;
    let lag = if a.bic {
        LagChoice::Bic { p_max: a.p_max }
    } else {
        LagChoice::Fixed(a.lag)
    };
    let files = expand_inputs(&a.input.inputs)?;
    let mut m = manifest_for("gc", &a, None, jobs)?;
    m.add_inputs(&files)?;
    let result = per_file(
        &files,
        |f| gc_matrix_with(&load_series(&a.input, f)?, lag, &spec, a.ridge),
        |f, (gcm, lags)| Ok(io::write_gc(&a.out.join(stem(f)), &gcm, lags)?),
    );
    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    finish(m, &a.out)?;
    result
}

fn fc(a: FcArgs, jobs: usize) -> Result<()> {
    let files = expand_inputs(&a.input.inputs)?;
    let mut m = manifest_for("fc", &a, None, jobs)?;
    m.add_inputs(&files)?;
    let result = per_file(
        &files,
        |f| {
            let r = pearson_fc(&load_series(&a.input, f)?)?;
            Ok(if a.fisher_z { fisher_z(&r) } else { r })
        },
        |f, r| Ok(io::write_text(&a.out.join(format!("{}.csv", stem(f))), &io::matrix_to_csv(&r))?),
    );
    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    finish(m, &a.out)?;
    result
}

fn read_matrices(paths: &[PathBuf]) -> Result<Vec<polygc::nalgebra::DMatrix<f64>>> {
    paths
        .iter()
        .map(|p| io::read_square_matrix(p).with_context(|| format!("reading {}", p.display())))
        .collect()
}

fn mask(a: MaskArgs, jobs: usize) -> Result<()> {
    let mut high = read_matrices(&a.high)?;
    let mut low = read_matrices(&a.low)?;
    if a.fisher_z {
        high = high.iter().map(fisher_z).collect();
        low = low.iter().map(fisher_z).collect();
    }
    let cells = match a.kind {
        MatrixKind::Ec => CellSet::Directed,
        MatrixKind::Fc => CellSet::Undirected,
    };
    let tests = cell_tests(&high, &low, cells)?;
    let mut selected = mask_from_tests(&tests, a.alpha, (!a.no_fdr).then_some(a.q));
    if a.prune {
        selected = prune_bidirectional(&selected);
    }
    io::write_mask(&a.out.join("mask"), &selected)?;
    io::write_text(&a.out.join("p_values.csv"), &io::matrix_to_csv(&tests.p))?;
    io::write_text(&a.out.join("t_values.csv"), &io::matrix_to_csv(&tests.t))?;
    io::write_text(&a.out.join("mean_diff.csv"), &io::matrix_to_csv(&group_mean_diff(&high, &low)?))?;
    let mut sweep = String::from("threshold,selected\n");
    for (t, n) in threshold_sweep(&tests, &a.sweep) {
        sweep.push_str(&io::csv_row([t.to_string(), n.to_string()]));
    }
    io::write_text(&a.out.join("sweep.csv"), &sweep)?;
    let mut m = manifest_for("mask", &a, None, jobs)?;
    m.add_inputs(a.high.iter().chain(&a.low))?;
    finish(m, &a.out)
}

fn fuse(a: FuseArgs, jobs: usize) -> Result<()> {
    let fused = fuse_masks(&io::read_mask(&a.ec)?, &io::read_mask(&a.fc)?)?;
    io::write_mask(&a.out.join("fused"), &fused)?;
    let mut m = manifest_for("fuse", &a, None, jobs)?;
    m.add_inputs([&a.ec, &a.fc])?;
    finish(m, &a.out)
}

fn assemble(a: AssembleArgs, jobs: usize) -> Result<()> {
    let text = io::read_text(&a.subjects)?;
    let base = a.subjects.parent().unwrap_or(Path::new(""));
    let mut subjects = Vec::new();
    let mut inputs = vec![a.subjects.clone()];
    for (k, line) in text.lines().enumerate() {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if line.trim().is_empty() || (k == 0 && fields.first() == Some(&"subject")) {
            continue;
        }
        let [_, label, ec, fc] = fields[..] else {
            return Err(usage(format!("{} line {}: expected subject,label,ec,fc", a.subjects.display(), k + 1)));
        };
        let label = match label {
            "0" => 0,
            "1" => 1,
            other => return Err(usage(format!("{} line {}: bad label `{other}`", a.subjects.display(), k + 1))),
        };
        let (ec, fc) = (base.join(ec), base.join(fc));
        subjects.push(SubjectConnectivity {
            ec: io::read_square_matrix(&ec)?,
            fc: io::read_square_matrix(&fc)?,
            label,
        });
        inputs.extend([ec, fc]);
    }
    let mask_ec = a.mask_ec.as_deref().map(io::read_mask).transpose()?;
    let mask_fc = a.mask_fc.as_deref().map(io::read_mask).transpose()?;
    let mode: FeatureMode = a.mode.parse()?;
    let layout = if a.fc_full { FcLayout::Full } else { FcLayout::Upper };
    let table = polygc::connectome::assemble_features(&subjects, mask_ec.as_ref(), mask_fc.as_ref(), mode, layout)?;
    io::write_feature_table(&a.out.join("features"), &table)?;
    inputs.extend(a.mask_ec.iter().chain(&a.mask_fc).cloned());
    let mut m = manifest_for("assemble", &a, None, jobs)?;
    m.add_inputs(&inputs)?;
    finish(m, &a.out)
}

fn read_table(features: &Path, labels: &Path) -> Result<(polygc::nalgebra::DMatrix<f64>, Vec<u8>)> {
    let (x, _) = io::read_features_csv(features)?;
    let y = io::read_labels(labels)?;
    if x.nrows() != y.len() {
        return Err(usage(format!("{} feature rows but {} labels", x.nrows(), y.len())));
    }
    Ok((x, y))
}

fn classify(a: ClassifyArgs, jobs: usize) -> Result<()> {
    let (x, y) = read_table(&a.features, &a.labels)?;
    let report = cross_validate(&x, &y, &a.cv.settings())?;
    io::write_json(&a.out.join("eval.json"), &report)?;
    let mut m = manifest_for("classify", &a, Some(a.cv.seed), jobs)?;
    m.add_inputs([&a.features, &a.labels])?;
    finish(m, &a.out)
}

fn grid(a: ConfigArgs, jobs: usize) -> Result<()> {
    let cfg = PipelineConfig::from_file(&a.config)?;
    let lag = cfg.lag()?;
    let subjects = pipeline::load_subjects(&cfg)?;
    let fc: Vec<_> = subjects
        .par_iter()
        .map(|s| pearson_fc(&s.series))
        .collect::<polygc::Result<_>>()?;
    let result = grid_search(&cfg.grid, &cfg.cv, |spec| {
        let conn: Vec<SubjectConnectivity> = pipeline::subject_gc(&subjects, lag, spec, cfg.gc.ridge)?
            .into_iter()
            .zip(&fc)
            .zip(&subjects)
            .map(|(((ec, _), fc), s)| SubjectConnectivity {
                ec: ec.values,
                fc: fc.clone(),
                label: s.label,
            })
            .collect();
        let t = polygc::connectome::assemble_features(&conn, None, None, cfg.features.mode, cfg.features.fc_layout)?;
        Ok((t.features, t.labels))
    })?;
    io::write_json(&a.out.join("grid.json"), &result)?;
    io::write_json(&a.out.join("eval.json"), &result.report)?;
    let mut m = manifest_for("grid", &a, Some(cfg.cv.seed), jobs)?;
    m.add_inputs(std::iter::once(&a.config).chain(cfg.groups.iter().flat_map(|g| g.high.iter().chain(&g.low))))?;
    finish(m, &a.out)
}

fn ablate(a: AblateArgs, jobs: usize) -> Result<()> {
    let (x, y) = read_table(&a.features, &a.labels)?;
    let index: Vec<FeatureColumn> = io::read_json(&a.index)?;
    if index.len() != x.ncols() {
        return Err(usage(format!("index lists {} columns, table has {}", index.len(), x.ncols())));
    }
    let table = SubjectFeatureTable {
        features: x,
        labels: y,
        feature_index: index,
    };
    let removal = pipeline::ranked_mask_columns(&table, &io::read_mask(&a.mask)?)?;
    let curve = ablation(&table.features, &table.labels, &removal, a.step, &a.cv.settings(), a.draws, a.cv.seed)?;
    let mut text = String::from("fraction,removed,accuracy,baseline_accuracy\n");
    for p in &curve.points {
        text.push_str(&io::csv_row([
            p.fraction.to_string(),
            p.removed.to_string(),
            p.accuracy.to_string(),
            p.baseline_accuracy.to_string(),
        ]));
    }
    io::write_text(&a.out.join("ablation.csv"), &text)?;
    let mut m = manifest_for("ablate", &a, Some(a.cv.seed), jobs)?;
    m.add_inputs([&a.features, &a.labels, &a.index, &a.mask])?;
    finish(m, &a.out)
}

fn metrics(a: MetricsArgs, jobs: usize) -> Result<()> {
    let g = WeightedDigraph::new(io::read_square_matrix(&a.input)?)?;
    let summary = summarize_network(&g, a.binarize_threshold)?;
    io::write_json(&a.out.join("metrics.json"), &summary)?;
    let mut m = manifest_for("metrics", &a, None, jobs)?;
    m.add_inputs([&a.input])?;
    finish(m, &a.out)
}

fn run_pipeline(a: ConfigArgs, jobs: usize) -> Result<()> {
    let cfg = PipelineConfig::from_file(&a.config)?;
    let mut m = manifest_for("pipeline", &a, Some(cfg.cv.seed), jobs)?;
    m.add_inputs(std::iter::once(&a.config).chain(cfg.groups.iter().flat_map(|g| g.high.iter().chain(&g.low))))?;
    let result = pipeline::run_pipeline(&cfg, &a.out);
    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    finish(m, &a.out)?;
    result.map(|_| ()).map_err(Into::into)
}
