//! Efficiency by exhaustive simple-path enumeration.

/// Shortest directed distances under lengths `1/w`, found by enumerating
/// every simple path. `w` is row-major `n x n`; `w[i*n+j] > 0` is an edge
/// `i -> j`.
pub fn all_pairs_by_enumeration(w: &[f64], n: usize) -> Vec<f64> {
    let mut best = vec![f64::INFINITY; n * n];
    for s in 0..n {
        best[s * n + s] = 0.0;
        let mut visited = vec![false; n];
        visited[s] = true;
        walk(w, n, s, s, 0.0, &mut visited, &mut best);
    }
    best
}

fn walk(w: &[f64], n: usize, s: usize, at: usize, len: f64, visited: &mut [bool], best: &mut [f64]) {
    for next in 0..n {
        let wt = w[at * n + next];
        if wt > 0.0 && !visited[next] {
            let l = len + 1.0 / wt;
            if l < best[s * n + next] {
                best[s * n + next] = l;
            }
            visited[next] = true;
            walk(w, n, s, next, l, visited, best);
            visited[next] = false;
        }
    }
}

pub fn global_efficiency(w: &[f64], n: usize) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let dist = all_pairs_by_enumeration(w, n);
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j && dist[i * n + j].is_finite() {
                total += 1.0 / dist[i * n + j];
            }
        }
    }
    total / (n * (n - 1)) as f64
}

/// Global efficiency of each node's in/out-neighbour subgraph.
pub fn local_efficiency(w: &[f64], n: usize) -> Vec<f64> {
    (0..n)
        .map(|v| {
            let nbrs: Vec<usize> = (0..n)
                .filter(|&u| u != v && (w[u * n + v] > 0.0 || w[v * n + u] > 0.0))
                .collect();
            let k = nbrs.len();
            if k < 2 {
                return 0.0;
            }
            let mut sub = vec![0.0; k * k];
            for (a, &u) in nbrs.iter().enumerate() {
                for (b, &x) in nbrs.iter().enumerate() {
                    sub[a * k + b] = w[u * n + x];
                }
            }
            global_efficiency(&sub, k)
        })
        .collect()
}
