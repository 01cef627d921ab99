//! Least-squares fitting used by every causality model.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionFit {
    pub weights: DVector<f64>,
    /// `SSE / n_obs`, evaluated on the fitted data without the ridge term.
    pub residual_variance: f64,
    pub n_obs: usize,
    pub ridge: f64,
    /// Numerical rank of the (possibly ridge-augmented) system.
    pub rank: usize,
    /// Set when the unpenalized system is rank deficient; `weights` is then
    /// the minimum-norm solution.
    pub rank_deficient: bool,
}

/// Minimizes `||y - Q w||^2 + ridge * ||w||^2`.
///
/// Columns of `q` that are identically one are treated as intercepts and left
/// out of the penalty. The problem is solved through a Householder QR
/// reduction followed by an SVD of the triangular factor, so the normal
/// equations are never formed; singular values below
/// `max(N, D) * eps * s_max` are dropped, which yields the minimum-norm
/// solution for rank-deficient systems.
pub fn fit_least_squares(q: &DMatrix<f64>, y: &DVector<f64>, ridge: f64) -> Result<RegressionFit> {
    let (n, d) = q.shape();
    if n == 0 || d == 0 {
        return Err(Error::Dimension(format!("empty design {n}x{d}")));
    }
    if y.len() != n {
        return Err(Error::Dimension(format!(
            "design has {n} rows but target has {}",
            y.len()
        )));
    }
    if !(ridge >= 0.0 && ridge.is_finite()) {
        return Err(Error::InvalidArgument(format!("ridge must be >= 0, got {ridge}")));
    }

    let (a, b) = if ridge > 0.0 {
        let penalized: Vec<usize> = (0..d)
            .filter(|&c| !q.column(c).iter().all(|&v| v == 1.0))
            .collect();
        let extra = penalized.len();
        let mut a = q.clone().resize_vertically(n + extra, 0.0);
        let root = ridge.sqrt();
        for (row, &c) in penalized.iter().enumerate() {
            a[(n + row, c)] = root;
        }
        (a, y.clone().resize_vertically(n + extra, 0.0))
    } else {
        (q.clone(), y.clone())
    };

    let (weights, rank) = min_norm_solve(a, b);
    let residual = y - q * &weights;
    let sse = residual.norm_squared();
    Ok(RegressionFit {
        rank_deficient: ridge == 0.0 && rank < d,
        weights,
        residual_variance: sse / n as f64,
        n_obs: n,
        ridge,
        rank,
    })
}

fn min_norm_solve(a: DMatrix<f64>, mut b: DVector<f64>) -> (DVector<f64>, usize) {
    let (rows, cols) = a.shape();
    let (core, rhs) = if rows > cols {
        let qr = a.qr();
        qr.q_tr_mul(&mut b);
        (qr.unpack_r(), b.rows(0, cols).into_owned())
    } else {
        (a, b)
    };
    let svd = core.svd(true, true);
    let s_max = svd.singular_values.max();
    let tol = rows.max(cols) as f64 * f64::EPSILON * s_max;
    let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
    let weights = if rank == 0 {
        DVector::zeros(cols)
    } else {
        svd.solve(&rhs, tol).expect("U and V were computed")
    };
    (weights, rank)
}
