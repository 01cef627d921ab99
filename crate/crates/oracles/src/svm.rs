//! Linear SVM by projected gradient ascent on the box-constrained dual.

/// Solves `min 1/2 ||v||^2 + C sum_i max(0, 1 - y_i v.(x_i, 1))` where the
/// bias is the last coordinate of `v`. Features are first standardized with
/// the population mean and standard deviation. Returns `(weights, bias)` in
/// the standardized space together with the standardization used.
pub struct DualSolution {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl DualSolution {
    pub fn decision(&self, x: &[f64]) -> f64 {
        self.bias
            + x.iter()
                .enumerate()
                .map(|(j, v)| {
                    if self.scale[j] > 0.0 {
                        self.weights[j] * (v - self.mean[j]) / self.scale[j]
                    } else {
                        0.0
                    }
                })
                .sum::<f64>()
    }
}

pub fn solve_dual(x: &[Vec<f64>], y: &[f64], c: f64, iterations: usize) -> DualSolution {
    let n = x.len();
    let f = x[0].len();
    let mean: Vec<f64> = (0..f).map(|j| x.iter().map(|r| r[j]).sum::<f64>() / n as f64).collect();
    let scale: Vec<f64> = (0..f)
        .map(|j| (x.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n as f64).sqrt())
        .collect();
    let z: Vec<Vec<f64>> = x
        .iter()
        .map(|r| {
            let mut v: Vec<f64> = (0..f)
                .map(|j| if scale[j] > 0.0 { (r[j] - mean[j]) / scale[j] } else { 0.0 })
                .collect();
            v.push(1.0);
            v
        })
        .collect();
    let q: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|k| y[i] * y[k] * z[i].iter().zip(&z[k]).map(|(a, b)| a * b).sum::<f64>())
                .collect()
        })
        .collect();
    // trace bounds the largest eigenvalue of the PSD matrix
    let lipschitz: f64 = (0..n).map(|i| q[i][i]).sum();
    let step = 1.0 / lipschitz;
    let mut alpha = vec![0.0; n];
    let mut prev = alpha.clone();
    let mut momentum = 1.0f64;
    for _ in 0..iterations {
        // FISTA extrapolation
        let next_m = (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt()) / 2.0;
        let beta = (momentum - 1.0) / next_m;
        let look: Vec<f64> = alpha.iter().zip(&prev).map(|(a, p)| a + beta * (a - p)).collect();
        prev = alpha.clone();
        for i in 0..n {
            let grad = 1.0 - q[i].iter().zip(&look).map(|(a, b)| a * b).sum::<f64>();
            alpha[i] = (look[i] + step * grad).clamp(0.0, c);
        }
        momentum = next_m;
    }
    let mut v = vec![0.0; f + 1];
    for i in 0..n {
        for j in 0..=f {
            v[j] += alpha[i] * y[i] * z[i][j];
        }
    }
    let bias = v.pop().unwrap();
    DualSolution {
        weights: v,
        bias,
        mean,
        scale,
    }
}
