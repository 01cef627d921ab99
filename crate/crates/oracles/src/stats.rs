//! Reference statistics: Welch p-values by quadrature and BH by counting.

/// Two-sided p-value of Student's t with `df` degrees of freedom, computed as
/// the ratio of two integrals of the unnormalized density
/// `(1 + x^2/df)^(-(df+1)/2)` after the substitution `x = tan(theta)`, so no
/// gamma or beta function is involved.
pub fn t_two_sided_p(t: f64, df: f64) -> f64 {
    let g = |theta: f64| {
        let x = theta.tan();
        let c = theta.cos();
        (1.0 + x * x / df).powf(-(df + 1.0) / 2.0) / (c * c)
    };
    let half_pi = std::f64::consts::FRAC_PI_2;
    let total = 2.0 * adaptive_simpson(&g, 0.0, half_pi, 1e-15);
    let tail = adaptive_simpson(&g, t.abs().atan(), half_pi, 1e-15);
    (2.0 * tail / total).min(1.0)
}

/// Welch statistic, Welch-Satterthwaite degrees of freedom and the
/// quadrature p-value.
pub fn welch(a: &[f64], b: &[f64]) -> (f64, f64, f64) {
    let stats = |s: &[f64]| {
        let n = s.len() as f64;
        let m = s.iter().sum::<f64>() / n;
        let v = s.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
        (n, m, v)
    };
    let (na, ma, va) = stats(a);
    let (nb, mb, vb) = stats(b);
    let (sa, sb) = (va / na, vb / nb);
    let t = (ma - mb) / (sa + sb).sqrt();
    let df = (sa + sb).powi(2) / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    (t, df, t_two_sided_p(t, df))
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, eps: f64) -> f64 {
    // guard the endpoint pi/2 where cos underflows the substitution
    let fb_at = |x: f64| {
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f(x - 1e-9)
        }
    };
    let (fa, fb) = (fb_at(a), fb_at(b));
    let m = 0.5 * (a + b);
    let fm = fb_at(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    recurse(&fb_at, a, b, fa, fm, fb, whole, eps, 60)
}

#[allow(clippy::too_many_arguments)]
fn recurse(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * eps {
        return left + right + delta / 15.0;
    }
    recurse(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1)
        + recurse(f, m, b, fm, frm, fb, right, eps / 2.0, depth - 1)
}

/// Benjamini-Hochberg rejections without sorting: the cut-off is the largest
/// `k` such that at least `k` p-values are `<= k q / m`.
pub fn bh_reject(pvals: &[f64], q: f64) -> Vec<bool> {
    let m = pvals.len();
    let mut cutoff = None;
    for k in (1..=m).rev() {
        let thr = k as f64 * q / m as f64;
        if pvals.iter().filter(|&&p| p <= thr).count() >= k {
            cutoff = Some(thr);
            break;
        }
    }
    match cutoff {
        Some(thr) => pvals.iter().map(|&p| p <= thr).collect(),
        None => vec![false; m],
    }
}
