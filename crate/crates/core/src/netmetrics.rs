//! Degrees, hubs and efficiency of weighted directed networks.
//!
//! Edge lengths are `1 / weight`; shortest paths use Dijkstra from every
//! source, `O(n (m + n log n))` overall.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gc::GcMatrix;
use crate::stats::welch_ttest;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedDigraph {
    weights: DMatrix<f64>,
}

impl WeightedDigraph {
    /// Weights must be square, finite, non-negative, with a zero diagonal.
    pub fn new(weights: DMatrix<f64>) -> Result<Self> {
        if !weights.is_square() {
            return Err(Error::Dimension(format!(
                "weight matrix is {}x{}",
                weights.nrows(),
                weights.ncols()
            )));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidArgument("weights must be finite and non-negative".into()));
        }
        if (0..weights.nrows()).any(|i| weights[(i, i)] != 0.0) {
            return Err(Error::InvalidArgument("weight matrix has a non-zero diagonal".into()));
        }
        Ok(Self { weights })
    }

    /// Causality values as edge weights, `values[(source, target)]`.
    pub fn from_gc(m: &GcMatrix) -> Result<Self> {
        Self::new(m.values.clone())
    }

    pub fn n(&self) -> usize {
        self.weights.nrows()
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    /// Adjacency with an edge wherever the weight exceeds `threshold`.
    pub fn binarize(&self, threshold: f64) -> DMatrix<u8> {
        self.weights.map(|w| u8::from(w > threshold))
    }

    /// Subgraph induced by `nodes`, in the given order.
    pub fn induced(&self, nodes: &[usize]) -> Self {
        let k = nodes.len();
        Self {
            weights: DMatrix::from_fn(k, k, |a, b| self.weights[(nodes[a], nodes[b])]),
        }
    }
}

/// In-degree plus out-degree of every node.
pub fn node_degrees(adj: &DMatrix<u8>) -> Vec<usize> {
    let n = adj.nrows();
    (0..n)
        .map(|v| (0..n).filter(|&u| u != v).map(|u| (adj[(u, v)] + adj[(v, u)]) as usize).sum())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hub {
    pub node: usize,
    pub degree: usize,
}

/// Nodes with degree at least two sample standard deviations above the mean,
/// sorted by degree (descending) then node. All-equal degrees give no hubs.
pub fn detect_hubs(degrees: &[usize]) -> Vec<Hub> {
    let n = degrees.len();
    if n < 2 {
        return Vec::new();
    }
    let mean = degrees.iter().sum::<usize>() as f64 / n as f64;
    let var = degrees.iter().map(|&d| (d as f64 - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    if var == 0.0 {
        return Vec::new();
    }
    let threshold = mean + 2.0 * var.sqrt();
    let mut hubs: Vec<Hub> = degrees
        .iter()
        .enumerate()
        .filter(|(_, &d)| d as f64 >= threshold)
        .map(|(node, &degree)| Hub { node, degree })
        .collect();
    hubs.sort_by(|a, b| b.degree.cmp(&a.degree).then(a.node.cmp(&b.node)));
    hubs
}

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn dijkstra(g: &WeightedDigraph, source: usize) -> Vec<f64> {
    let n = g.n();
    let mut dist = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Entry(0.0, source));
    while let Some(Entry(d, u)) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        for v in 0..n {
            let w = g.weights[(u, v)];
            if w > 0.0 && !done[v] {
                let cand = d + 1.0 / w;
                if cand < dist[v] {
                    dist[v] = cand;
                    heap.push(Entry(cand, v));
                }
            }
        }
    }
    dist
}

/// Shortest directed path lengths; unreachable pairs are infinite.
pub fn shortest_paths(g: &WeightedDigraph) -> DMatrix<f64> {
    let n = g.n();
    let rows: Vec<Vec<f64>> = (0..n).into_par_iter().map(|s| dijkstra(g, s)).collect();
    DMatrix::from_fn(n, n, |i, j| rows[i][j])
}

fn efficiency_of(g: &WeightedDigraph) -> f64 {
    let n = g.n();
    if n < 2 {
        return 0.0;
    }
    let d = shortest_paths(g);
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j && d[(i, j)].is_finite() {
                total += 1.0 / d[(i, j)];
            }
        }
    }
    total / (n * (n - 1)) as f64
}

fn require_two(g: &WeightedDigraph) -> Result<()> {
    if g.n() < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 nodes, found {}", g.n())));
    }
    Ok(())
}

/// Mean inverse shortest-path length over ordered pairs of distinct nodes.
pub fn global_efficiency(g: &WeightedDigraph) -> Result<f64> {
    require_two(g)?;
    Ok(efficiency_of(g))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalEfficiency {
    pub per_node: Vec<f64>,
    pub mean: f64,
}

/// Global efficiency of the subgraph induced by each node's in- and
/// out-neighbours; nodes with fewer than two neighbours score 0.
pub fn local_efficiency(g: &WeightedDigraph) -> Result<LocalEfficiency> {
    require_two(g)?;
    let n = g.n();
    let per_node: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|v| {
            let nbrs: Vec<usize> = (0..n)
                .filter(|&u| u != v && (g.weights[(u, v)] > 0.0 || g.weights[(v, u)] > 0.0))
                .collect();
            if nbrs.len() < 2 {
                0.0
            } else {
                efficiency_of(&g.induced(&nbrs))
            }
        })
        .collect();
    let mean = per_node.iter().sum::<f64>() / n as f64;
    Ok(LocalEfficiency { per_node, mean })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyComparison {
    pub efficiency_a: Vec<f64>,
    pub efficiency_b: Vec<f64>,
    pub mean_a: f64,
    pub mean_b: f64,
    pub t: f64,
    pub p: f64,
    pub alpha: f64,
    pub significant: bool,
}

/// Welch test on the per-graph global efficiencies of two groups.
pub fn compare_group_efficiency(a: &[WeightedDigraph], b: &[WeightedDigraph], alpha: f64) -> Result<EfficiencyComparison> {
    let smaller = a.len().min(b.len());
    if smaller < 2 {
        return Err(Error::GroupSize {
            required: 2,
            found: smaller,
        });
    }
    let eff = |gs: &[WeightedDigraph]| gs.iter().map(global_efficiency).collect::<Result<Vec<f64>>>();
    let (ea, eb) = (eff(a)?, eff(b)?);
    let test = welch_ttest(&ea, &eb)?;
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    Ok(EfficiencyComparison {
        mean_a: mean(&ea),
        mean_b: mean(&eb),
        efficiency_a: ea,
        efficiency_b: eb,
        t: test.t,
        p: test.p,
        alpha,
        significant: test.p <= alpha,
    })
}

/// Everything the `metrics` command reports for one network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSummary {
    pub global_efficiency: f64,
    pub local_efficiency: LocalEfficiency,
    pub degrees: Vec<usize>,
    pub hubs: Vec<Hub>,
}

/// Efficiencies on the weighted graph; degrees and hubs on the adjacency
/// `weight > threshold`.
pub fn summarize_network(g: &WeightedDigraph, threshold: f64) -> Result<NetworkSummary> {
    let degrees = node_degrees(&g.binarize(threshold));
    Ok(NetworkSummary {
        global_efficiency: global_efficiency(g)?,
        local_efficiency: local_efficiency(g)?,
        hubs: detect_hubs(&degrees),
        degrees,
    })
}
