//! End-to-end driver: time series -> causality and correlation matrices ->
//! group masks -> feature table -> grid-searched classifier -> ablation and
//! network metrics.
//!
//! Configuration is TOML. Subject files may be listed per group or a
//! synthetic cohort may be requested instead:
//!
//! ```toml
//! [groups]
//! high = ["subjects/a01.csv", "subjects/a02.csv"]   # label 1
//! low = ["subjects/b01.csv", "subjects/b02.csv"]    # label 0
//!
//! [gc]
//! lag = "bic:3"
//!
//! [grid]
//! kind = "rsp"
//! orders = [1, 2, 3]
//! etas = [0.5, 1.0]
//! sigmas = [0.5, 1.0]
//!
//! [cv]
//! folds = 10
//! repeats = 100
//! seed = 7
//! ```
//!
//! Every stage writes its artifacts before the next one starts, so a failed
//! run keeps the outputs of the stages that completed.

use std::cmp::Ordering;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::connectome::{
    assemble_features, cell_tests, fisher_z, fuse_masks, group_mean_diff, mask_from_tests,
    pearson_fc, prune_bidirectional, threshold_sweep, CellSet, FcLayout, FeatureMode,
    SignificanceMask, SubjectConnectivity, SubjectFeatureTable,
};
use crate::error::{Error, Result};
use crate::featmap::{FeatureKind, FeatureMapSpec};
use crate::gc::{gc_matrix_with, GcMatrix, LagChoice};
use crate::io;
use crate::mlpipe::{ablation, grid_search, AblationCurve, CvSettings, EvalReport, GridResult, SpecGrid};
use crate::netmetrics::{compare_group_efficiency, detect_hubs, node_degrees, EfficiencyComparison, Hub, WeightedDigraph};
use crate::simgen::gen_cohort_subject;
use crate::stats::welch_ttest;
use crate::tsio::{load_csv, TimeSeriesMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    pub standardize: bool,
    pub has_header: bool,
}

impl Default for DataSection {
    fn default() -> Self {
        Self {
            standardize: true,
            has_header: false,
        }
    }
}

/// Subject files; `high` is labelled 1 and `low` 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupsSection {
    pub high: Vec<PathBuf>,
    pub low: Vec<PathBuf>,
}

/// Two cohorts from [`gen_cohort_subject`] differing only in coupling.
/// Subject `k` of the run uses seed `seed + k`, high group first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSection {
    pub subjects_per_group: usize,
    pub channels: usize,
    pub length: usize,
    pub coupling_high: f64,
    pub coupling_low: f64,
    pub seed: u64,
}

impl Default for SyntheticSection {
    fn default() -> Self {
        Self {
            subjects_per_group: 50,
            channels: 6,
            length: 200,
            coupling_high: 0.8,
            coupling_low: 0.2,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GcSection {
    /// `"1"`, `"bic"` or `"bic:N"`.
    pub lag: String,
    pub ridge: f64,
}

impl Default for GcSection {
    fn default() -> Self {
        Self {
            lag: "1".into(),
            ridge: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaskSection {
    pub alpha: f64,
    pub q: f64,
    /// Test FC differences on Fisher z values instead of raw correlations.
    pub fisher_z: bool,
    pub prune_bidirectional: bool,
    /// Raw p-value thresholds for the EC sweep table.
    pub sweep: Vec<f64>,
}

impl Default for MaskSection {
    fn default() -> Self {
        Self {
            alpha: 0.01,
            q: 0.05,
            fisher_z: false,
            prune_bidirectional: true,
            sweep: vec![0.001, 0.005, 0.01, 0.05, 0.1],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureSection {
    pub mode: FeatureMode,
    pub fc_layout: FcLayout,
    /// Restrict classifier features to the EC/FC masks instead of all cells.
    pub masked: bool,
}

impl Default for FeatureSection {
    fn default() -> Self {
        Self {
            mode: FeatureMode::EcFc,
            fc_layout: FcLayout::Upper,
            masked: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AblationSection {
    pub enabled: bool,
    pub step_fraction: f64,
    pub baseline_draws: usize,
    pub seed: u64,
}

impl Default for AblationSection {
    fn default() -> Self {
        Self {
            enabled: true,
            step_fraction: 0.1,
            baseline_draws: 10,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsSection {
    pub alpha: f64,
}

impl Default for MetricsSection {
    fn default() -> Self {
        Self { alpha: 0.01 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub data: DataSection,
    pub groups: Option<GroupsSection>,
    pub synthetic: Option<SyntheticSection>,
    pub gc: GcSection,
    pub grid: SpecGrid,
    pub masks: MaskSection,
    pub features: FeatureSection,
    pub cv: CvSettings,
    pub ablation: AblationSection,
    pub metrics: MetricsSection,
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; relative subject paths are resolved against the
    /// file's directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let mut cfg = Self::from_toml(&io::read_text(path)?)?;
        let base = path.parent().unwrap_or(Path::new(""));
        if let Some(g) = cfg.groups.as_mut() {
            for p in g.high.iter_mut().chain(g.low.iter_mut()) {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn lag(&self) -> Result<LagChoice> {
        self.gc.lag.parse()
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.groups, &self.synthetic) {
            (Some(_), Some(_)) => return Err(Error::Config("give either [groups] or [synthetic], not both".into())),
            (None, None) => return Err(Error::Config("one of [groups] or [synthetic] is required".into())),
            _ => {}
        }
        self.lag()?;
        if self.grid.orders.is_empty()
            || (self.grid.kind == FeatureKind::Rsp && (self.grid.etas.is_empty() || self.grid.sigmas.is_empty()))
        {
            return Err(Error::Config("grid is empty".into()));
        }
        for spec in self.grid.points() {
            spec.validate()?;
        }
        Ok(())
    }
}

pub struct Subject {
    pub name: String,
    pub label: u8,
    pub series: TimeSeriesMatrix,
}

fn stage<T>(name: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Stage {
        stage: name,
        inner: Box::new(e),
    })
}

pub fn load_subjects(cfg: &PipelineConfig) -> Result<Vec<Subject>> {
    let mut subjects = if let Some(g) = &cfg.groups {
        let listed: Vec<(u8, &PathBuf)> = g
            .high
            .iter()
            .map(|p| (1, p))
            .chain(g.low.iter().map(|p| (0, p)))
            .collect();
        listed
            .par_iter()
            .map(|&(label, path)| {
                Ok(Subject {
                    name: path
                        .file_stem()
                        .map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned()),
                    label,
                    series: load_csv(path, cfg.data.has_header)?,
                })
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        let s = cfg.synthetic.clone().unwrap_or_default();
        let n = s.subjects_per_group;
        (0..2 * n)
            .into_par_iter()
            .map(|k| {
                let (label, coupling, name) = if k < n {
                    (1, s.coupling_high, format!("high_{k:03}"))
                } else {
                    (0, s.coupling_low, format!("low_{:03}", k - n))
                };
                let sim = gen_cohort_subject(s.channels, coupling, s.length, s.seed.wrapping_add(k as u64))?;
                Ok(Subject {
                    name,
                    label,
                    series: sim.series,
                })
            })
            .collect::<Result<Vec<_>>>()?
    };
    if cfg.data.standardize {
        subjects.iter_mut().for_each(|s| s.series = s.series.standardize());
    }
    let d = subjects.first().map_or(0, |s| s.series.channels());
    if let Some(s) = subjects.iter().find(|s| s.series.channels() != d) {
        return Err(Error::Dimension(format!(
            "subject {} has {} channels, expected {d}",
            s.name,
            s.series.channels()
        )));
    }
    Ok(subjects)
}

/// Causality matrices of every subject for one spec, with BIC lags if used.
pub fn subject_gc(
    subjects: &[Subject],
    lag: LagChoice,
    spec: &FeatureMapSpec,
    ridge: f64,
) -> Result<Vec<(GcMatrix, Option<Vec<usize>>)>> {
    subjects
        .par_iter()
        .map(|s| {
            gc_matrix_with(&s.series, lag, spec, ridge).map_err(|e| Error::InvalidArgument(format!("{}: {e}", s.name)))
        })
        .collect()
}

fn split<T: Clone>(items: &[T], labels: &[u8]) -> (Vec<T>, Vec<T>) {
    let pick = |l: u8| items.iter().zip(labels).filter(|(_, &x)| x == l).map(|(m, _)| m.clone()).collect();
    (pick(1), pick(0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Masks {
    pub ec_unpruned: SignificanceMask,
    pub ec: SignificanceMask,
    pub fc: SignificanceMask,
    pub fused: SignificanceMask,
}

pub fn compute_masks(ec: &[DMatrix<f64>], fc: &[DMatrix<f64>], labels: &[u8], m: &MaskSection) -> Result<(Masks, Vec<(f64, usize)>)> {
    let (ec_high, ec_low) = split(ec, labels);
    let ec_tests = cell_tests(&ec_high, &ec_low, CellSet::Directed)?;
    let ec_unpruned = mask_from_tests(&ec_tests, m.alpha, Some(m.q));
    let ec_mask = if m.prune_bidirectional {
        prune_bidirectional(&ec_unpruned)
    } else {
        ec_unpruned.clone()
    };
    let fc_values: Vec<DMatrix<f64>> = if m.fisher_z {
        fc.iter().map(fisher_z).collect()
    } else {
        fc.to_vec()
    };
    let (fc_high, fc_low) = split(&fc_values, labels);
    let fc_mask = mask_from_tests(&cell_tests(&fc_high, &fc_low, CellSet::Undirected)?, m.alpha, Some(m.q));
    let fused = fuse_masks(&ec_mask, &fc_mask)?;
    Ok((
        Masks {
            ec_unpruned,
            ec: ec_mask,
            fc: fc_mask,
            fused,
        },
        threshold_sweep(&ec_tests, &m.sweep),
    ))
}

fn connectivity(ec: &[GcMatrix], fc: &[DMatrix<f64>], subjects: &[Subject]) -> Vec<SubjectConnectivity> {
    ec.iter()
        .zip(fc)
        .zip(subjects)
        .map(|((e, f), s)| SubjectConnectivity {
            ec: e.values.clone(),
            fc: f.clone(),
            label: s.label,
        })
        .collect()
}

fn build_table(cfg: &PipelineConfig, conn: &[SubjectConnectivity]) -> Result<SubjectFeatureTable> {
    let masks = if cfg.features.masked {
        let ec: Vec<_> = conn.iter().map(|c| c.ec.clone()).collect();
        let fc: Vec<_> = conn.iter().map(|c| c.fc.clone()).collect();
        let labels: Vec<u8> = conn.iter().map(|c| c.label).collect();
        Some(compute_masks(&ec, &fc, &labels, &cfg.masks)?.0)
    } else {
        None
    };
    assemble_features(
        conn,
        masks.as_ref().map(|m| &m.ec),
        masks.as_ref().map(|m| &m.fc),
        cfg.features.mode,
        cfg.features.fc_layout,
    )
}

/// Columns of `table` in `mask`, ordered by decreasing absolute Welch `t`
/// between the groups (column index breaks ties).
pub fn ranked_mask_columns(table: &SubjectFeatureTable, mask: &SignificanceMask) -> Result<Vec<usize>> {
    let mut scored = Vec::new();
    for c in table.columns_in_mask(mask, None) {
        let col: Vec<f64> = table.features.column(c).iter().copied().collect();
        let (high, low) = split(&col, &table.labels);
        scored.push((c, welch_ttest(&high, &low)?.t.abs()));
    }
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal).then(a.0.cmp(&b.0)));
    Ok(scored.into_iter().map(|(c, _)| c).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub efficiency: EfficiencyComparison,
    /// Degrees in the (pruned) EC mask network.
    pub degrees: Vec<usize>,
    pub hubs: Vec<Hub>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub subjects: usize,
    pub channels: usize,
    pub best_spec: FeatureMapSpec,
    pub evaluation: EvalReport,
    pub n_features: usize,
    pub ec_mask_unpruned: usize,
    pub ec_mask: usize,
    pub fc_mask: usize,
    pub fused_mask: usize,
    pub ablation: Option<AblationCurve>,
    pub metrics: MetricsReport,
}

/// Runs every stage and writes the artifacts under `out`.
pub fn run_pipeline(cfg: &PipelineConfig, out: &Path) -> Result<PipelineReport> {
    cfg.validate()?;
    let lag = cfg.lag()?;

    let subjects = stage("load", load_subjects(cfg))?;
    let labels: Vec<u8> = subjects.iter().map(|s| s.label).collect();
    stage("load", {
        let mut text = String::from("subject,label\n");
        for s in &subjects {
            text.push_str(&format!("{},{}\n", s.name, s.label));
        }
        io::write_text(&out.join("subjects.csv"), &text)
    })?;

    let fc = stage(
        "fc",
        subjects.par_iter().map(|s| pearson_fc(&s.series)).collect::<Result<Vec<_>>>(),
    )?;
    stage(
        "fc",
        subjects
            .iter()
            .zip(&fc)
            .try_for_each(|(s, m)| io::write_text(&out.join("fc").join(format!("{}.csv", s.name)), &io::matrix_to_csv(m))),
    )?;

    let grid: GridResult = stage(
        "grid",
        grid_search(&cfg.grid, &cfg.cv, |spec| {
            let ec: Vec<GcMatrix> = subject_gc(&subjects, lag, spec, cfg.gc.ridge)?.into_iter().map(|(m, _)| m).collect();
            let table = build_table(cfg, &connectivity(&ec, &fc, &subjects))?;
            Ok((table.features, table.labels))
        }),
    )?;
    stage("grid", io::write_json(&out.join("grid.json"), &grid))?;
    stage("grid", io::write_json(&out.join("eval.json"), &grid.report))?;

    let best = stage("gc", subject_gc(&subjects, lag, &grid.best, cfg.gc.ridge))?;
    stage(
        "gc",
        subjects
            .iter()
            .zip(&best)
            .try_for_each(|(s, (m, lags))| io::write_gc(&out.join("ec").join(&s.name), m, lags.clone())),
    )?;
    let ec: Vec<GcMatrix> = best.into_iter().map(|(m, _)| m).collect();
    let ec_values: Vec<DMatrix<f64>> = ec.iter().map(|m| m.values.clone()).collect();

    let (masks, sweep) = stage("masks", compute_masks(&ec_values, &fc, &labels, &cfg.masks))?;
    stage("masks", {
        let dir = out.join("masks");
        io::write_mask(&dir.join("ec_unpruned"), &masks.ec_unpruned)?;
        io::write_mask(&dir.join("ec"), &masks.ec)?;
        io::write_mask(&dir.join("fc"), &masks.fc)?;
        io::write_mask(&dir.join("fused"), &masks.fused)?;
        let mut text = String::from("threshold,selected\n");
        for (t, n) in &sweep {
            text.push_str(&io::csv_row([t.to_string(), n.to_string()]));
        }
        io::write_text(&dir.join("ec_threshold_sweep.csv"), &text)?;
        let (high, low) = split(&ec_values, &labels);
        io::write_text(&dir.join("ec_mean_diff.csv"), &io::matrix_to_csv(&group_mean_diff(&high, &low)?))
    })?;

    let table = stage("features", build_table(cfg, &connectivity(&ec, &fc, &subjects)))?;
    stage("features", io::write_feature_table(&out.join("features"), &table))?;

    let curve = if cfg.ablation.enabled {
        let curve = stage("ablation", {
            ranked_mask_columns(&table, &masks.fused).and_then(|removal| {
                ablation(
                    &table.features,
                    &table.labels,
                    &removal,
                    cfg.ablation.step_fraction,
                    &cfg.cv,
                    cfg.ablation.baseline_draws,
                    cfg.ablation.seed,
                )
            })
        })?;
        stage("ablation", {
            let mut text = String::from("fraction,removed,accuracy,baseline_accuracy\n");
            for p in &curve.points {
                text.push_str(&io::csv_row([
                    p.fraction.to_string(),
                    p.removed.to_string(),
                    p.accuracy.to_string(),
                    p.baseline_accuracy.to_string(),
                ]));
            }
            io::write_text(&out.join("ablation.csv"), &text)
        })?;
        Some(curve)
    } else {
        None
    };

    let metrics = stage("metrics", {
        let graphs = ec.iter().map(WeightedDigraph::from_gc).collect::<Result<Vec<_>>>()?;
        let (high, low) = split(&graphs, &labels);
        let efficiency = compare_group_efficiency(&high, &low, cfg.metrics.alpha)?;
        let degrees = node_degrees(&masks.ec.mask);
        Ok(MetricsReport {
            efficiency,
            hubs: detect_hubs(&degrees),
            degrees,
        })
    })?;
    stage("metrics", io::write_json(&out.join("metrics.json"), &metrics))?;

    let report = PipelineReport {
        subjects: subjects.len(),
        channels: ec.first().map_or(0, GcMatrix::dim),
        best_spec: grid.best,
        evaluation: grid.report,
        n_features: table.n_features(),
        ec_mask_unpruned: masks.ec_unpruned.n_selected,
        ec_mask: masks.ec.n_selected,
        fc_mask: masks.fc.n_selected,
        fused_mask: masks.fused.n_selected,
        ablation: curve,
        metrics,
    };
    stage("report", io::write_json(&out.join("report.json"), &report))?;
    Ok(report)
}
