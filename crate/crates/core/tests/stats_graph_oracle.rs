use nalgebra::DMatrix;
use polygc::netmetrics::{global_efficiency, local_efficiency, shortest_paths, WeightedDigraph};
use polygc::stats::{bh_fdr, welch_ttest};
use polygc_oracles::{graph, stats};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn welch_p_matches_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let a: Vec<f64> = (0..rng.random_range(2..30)).map(|_| rng.random_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..rng.random_range(2..30)).map(|_| rng.random_range(-0.5..2.0)).collect();
        let got = welch_ttest(&a, &b).unwrap();
        let (t, df, p) = stats::welch(&a, &b);
        assert!((got.t - t).abs() < 1e-10);
        assert!((got.df - df).abs() < 1e-8);
        assert!((got.p - p).abs() < 1e-8, "{} vs {p}", got.p);
    }
}

#[test]
fn bh_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..200 {
        let p: Vec<f64> = (0..rng.random_range(1..40)).map(|_| rng.random::<f64>().powi(3)).collect();
        assert_eq!(bh_fdr(&p, 0.05), stats::bh_reject(&p, 0.05));
    }
}

#[test]
fn efficiency_matches_path_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let n = rng.random_range(2..=7);
        let w = DMatrix::from_fn(n, n, |i, j| {
            if i != j && rng.random_bool(0.4) { rng.random_range(0.1..2.0) } else { 0.0 }
        });
        let flat: Vec<f64> = (0..n * n).map(|k| w[(k / n, k % n)]).collect();
        let g = WeightedDigraph::new(w).unwrap();
        let dist = shortest_paths(&g);
        for (k, want) in graph::all_pairs_by_enumeration(&flat, n).into_iter().enumerate() {
            let got = dist[(k / n, k % n)];
            assert!(got == want || (got - want).abs() < 1e-10);
        }
        assert!((global_efficiency(&g).unwrap() - graph::global_efficiency(&flat, n)).abs() < 1e-10);
        let local = local_efficiency(&g).unwrap();
        for (a, b) in local.per_node.iter().zip(graph::local_efficiency(&flat, n)) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}
