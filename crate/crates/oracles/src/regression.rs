//! Normal-equation least squares and a direct bivariate Granger causality.

use crate::dd::Dd;

/// Solves `(Q^T Q) w = Q^T y` by Gauss-Jordan elimination with partial
/// pivoting, accumulating everything in double-double precision. `q` is
/// row-major with `cols` columns.
pub fn normal_equations(q: &[f64], cols: usize, y: &[f64]) -> Vec<f64> {
    let rows = y.len();
    assert_eq!(q.len(), rows * cols);
    let mut a = vec![vec![Dd::ZERO; cols + 1]; cols];
    for r in 0..rows {
        let row = &q[r * cols..(r + 1) * cols];
        for i in 0..cols {
            let xi = Dd::new(row[i]);
            for j in 0..cols {
                a[i][j] = a[i][j] + xi * Dd::new(row[j]);
            }
            a[i][cols] = a[i][cols] + xi * Dd::new(y[r]);
        }
    }
    for col in 0..cols {
        let pivot = (col..cols)
            .max_by(|&x, &y| a[x][col].abs().partial_cmp(&a[y][col].abs()).unwrap())
            .unwrap();
        a.swap(col, pivot);
        let p = a[col][col];
        assert!(p.hi != 0.0, "singular normal equations");
        for j in col..=cols {
            a[col][j] = a[col][j] / p;
        }
        for i in 0..cols {
            if i != col {
                let f = a[i][col];
                for j in col..=cols {
                    a[i][j] = a[i][j] - f * a[col][j];
                }
            }
        }
    }
    a.iter().map(|row| row[cols].to_f64()).collect()
}

/// Mean squared residual of `y - Q w`, in double-double.
pub fn residual_variance(q: &[f64], cols: usize, y: &[f64], w: &[f64]) -> f64 {
    let mut sse = Dd::ZERO;
    for (r, &yr) in y.iter().enumerate() {
        let mut fit = Dd::ZERO;
        for c in 0..cols {
            fit = fit + Dd::new(q[r * cols + c]) * Dd::new(w[c]);
        }
        let e = Dd::new(yr) - fit;
        sse = sse + e * e;
    }
    sse.to_f64() / y.len() as f64
}

/// Linear Granger causality of `source` onto `target` at lag `p`, with an
/// intercept, built exactly as the stacked regression
///
/// ```text
/// [ B_i(n)   ]   [ 1 B_i(n-1) B_j(n-1) ... B_i(n-p) B_j(n-p) ]
/// [ ...      ] = [ ...                                       ] a + e
/// [ B_i(p+1) ]   [ 1 B_i(p)   B_j(p)   ... B_i(1)   B_j(1)   ]
/// ```
///
/// (rows in descending time). Variances use the `1/N` convention, are floored
/// at `floor`, and the log ratio is clamped at zero.
pub fn linear_gci(series: &[Vec<f64>], target: usize, source: usize, p: usize, floor: f64) -> f64 {
    let n = series[target].len();
    let bi = &series[target];
    let bj = &series[source];
    let mut y = Vec::new();
    let mut restricted = Vec::new();
    let mut full = Vec::new();
    for t in (p..n).rev() {
        y.push(bi[t]);
        restricted.push(1.0);
        full.push(1.0);
        for k in 1..=p {
            restricted.push(bi[t - k]);
            full.push(bi[t - k]);
            full.push(bj[t - k]);
        }
    }
    let var = |q: &[f64], cols: usize| {
        let w = normal_equations(q, cols, &y);
        residual_variance(q, cols, &y, &w)
    };
    let vr = var(&restricted, p + 1);
    let vf = var(&full, 2 * p + 1);
    if vr < floor && vf < floor {
        return 0.0;
    }
    (vr.max(floor) / vf.max(floor)).ln().max(0.0)
}
