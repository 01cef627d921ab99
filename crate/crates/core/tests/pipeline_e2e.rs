use polygc::connectome::FeatureMode;
use polygc::featmap::FeatureKind;
use polygc::io::{read_features_csv, read_labels, read_mask};
use polygc::mlpipe::{CvSettings, SpecGrid};
use polygc::pipeline::{run_pipeline, PipelineConfig, SyntheticSection};

fn small_config(mode: FeatureMode) -> PipelineConfig {
    let mut cfg = PipelineConfig {
        synthetic: Some(SyntheticSection {
            subjects_per_group: 15,
            channels: 4,
            length: 150,
            seed: 21,
            ..SyntheticSection::default()
        }),
        grid: SpecGrid {
            kind: FeatureKind::Rsp,
            orders: vec![2],
            etas: vec![0.5],
            sigmas: vec![0.5],
        },
        cv: CvSettings {
            folds: 5,
            repeats: 3,
            seed: 2,
            ..CvSettings::default()
        },
        ..PipelineConfig::default()
    };
    cfg.features.mode = mode;
    cfg.ablation.baseline_draws = 3;
    cfg
}

#[test]
fn synthetic_run_writes_consistent_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_pipeline(&small_config(FeatureMode::EcFc), dir.path()).unwrap();
    assert_eq!(report.subjects, 30);
    assert_eq!(report.channels, 4);
    // 16 EC cells plus 6 FC cells
    assert_eq!(report.n_features, 22);

    for f in ["report.json", "eval.json", "grid.json", "metrics.json", "ablation.csv", "subjects.csv"] {
        assert!(dir.path().join(f).is_file(), "missing {f}");
    }
    let (x, names) = read_features_csv(&dir.path().join("features.csv")).unwrap();
    let labels = read_labels(&dir.path().join("features_labels.csv")).unwrap();
    assert_eq!(x.shape(), (30, 22));
    assert_eq!(names.len(), 22);
    assert_eq!(labels.iter().filter(|&&l| l == 1).count(), 15);

    let fused = read_mask(&dir.path().join("masks/fused.json")).unwrap();
    assert_eq!(fused.n_selected, report.fused_mask);
    assert!(fused.is_set(0, 1), "planted edge missing from the fused mask");
}

#[test]
fn fused_features_match_or_beat_ec_alone() {
    let dir = tempfile::tempdir().unwrap();
    let ec = run_pipeline(&small_config(FeatureMode::Ec), &dir.path().join("ec")).unwrap();
    let both = run_pipeline(&small_config(FeatureMode::EcFc), &dir.path().join("both")).unwrap();
    let (a, b) = (ec.evaluation.mean_accuracy, both.evaluation.mean_accuracy);
    println!("EC {a:.3}  EC+FC {b:.3}");
    assert!(a > 0.8 && b > 0.8);
}
