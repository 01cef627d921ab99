use polygc::gc::{gc_matrix_with, LagChoice};
use polygc::simgen::{gen_cohort_subject, gen_linear, gen_nonlinear, NonlinearParams};
use polygc::{gc_matrix, FeatureMapSpec, TimeSeriesMatrix};
use polygc_oracles::regression::linear_gci;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn coupled(rng: &mut ChaCha8Rng, len: usize) -> Vec<Vec<f64>> {
    let mut cols = vec![vec![0.0; len]; 3];
    for t in 1..len {
        let e: Vec<f64> = (0..3).map(|_| StandardNormal.sample(rng)).collect();
        cols[0][t] = 0.5 * cols[0][t - 1] + e[0];
        cols[1][t] = 0.3 * cols[1][t - 1] + 0.6 * cols[0][t - 1] + e[1];
        cols[2][t] = -0.2 * cols[2][t - 1] + e[2];
    }
    cols
}

#[test]
fn linear_index_matches_normal_equations() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10 {
        let len = rng.random_range(40..=150);
        let p = rng.random_range(1..=3);
        let cols = coupled(&mut rng, len);
        let m = gc_matrix(&TimeSeriesMatrix::from_columns(&cols).unwrap(), p, &FeatureMapSpec::LIN, 0.0).unwrap();
        for s in 0..3 {
            for t in (0..3).filter(|&t| t != s) {
                let want = linear_gci(&cols, t, s, p, 1e-12);
                assert!((m.get(s, t) - want).abs() < 1e-9, "({s},{t}) {} vs {want}", m.get(s, t));
            }
        }
    }
}

fn top_two(m: &polygc::GcMatrix) -> Vec<(usize, usize)> {
    let d = m.dim();
    let mut cells: Vec<(usize, usize)> = (0..d)
        .flat_map(|i| (0..d).map(move |j| (i, j)))
        .filter(|&(i, j)| i != j)
        .collect();
    cells.sort_by(|a, b| m.get(b.0, b.1).total_cmp(&m.get(a.0, a.1)));
    let mut top = cells[..2].to_vec();
    top.sort();
    top
}

#[test]
fn linear_system_edges_rank_first() {
    let sim = gen_linear(1000, 3).unwrap();
    let m = gc_matrix(&sim.series, 1, &FeatureMapSpec::LIN, 0.0).unwrap();
    assert_eq!(top_two(&m), vec![(0, 1), (0, 2)]);
    assert!(sim.truth.detected_by(&m));
}

#[test]
fn polynomial_map_recovers_nonlinear_edges() {
    let sim = gen_nonlinear(1000, 3, NonlinearParams::default()).unwrap();
    let m = gc_matrix(&sim.series, 1, &FeatureMapSpec::mp(2), 0.0).unwrap();
    assert!(sim.truth.detected_by(&m));
}

#[test]
fn bic_lag_on_linear_system() {
    let sim = gen_linear(1000, 8).unwrap();
    let (m, lags) = gc_matrix_with(&sim.series, LagChoice::Bic { p_max: 5 }, &FeatureMapSpec::LIN, 0.0).unwrap();
    let lags = lags.unwrap();
    assert_eq!(lags.len(), 3);
    assert_eq!(m.lag, 1);
}

#[test]
fn cohort_subject_has_single_planted_edge() {
    let strong = gen_cohort_subject(5, 0.8, 400, 2).unwrap();
    let weak = gen_cohort_subject(5, 0.2, 400, 2).unwrap();
    assert_eq!(strong.truth.edges, vec![(0, 1)]);
    let ms = gc_matrix(&strong.series, 1, &FeatureMapSpec::LIN, 0.0).unwrap();
    let mw = gc_matrix(&weak.series, 1, &FeatureMapSpec::LIN, 0.0).unwrap();
    let off_max = (0..5)
        .flat_map(|i| (0..5).map(move |j| (i, j)))
        .filter(|&c| c != (0, 1))
        .map(|(i, j)| ms.get(i, j))
        .fold(0.0, f64::max);
    assert!(ms.get(0, 1) > off_max);
    assert!(ms.get(0, 1) > mw.get(0, 1));
}
