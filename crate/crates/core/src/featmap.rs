//! Polynomial feature maps applied to lagged regressor vectors.
//!
//! Four maps are supported:
//!
//! * `lin`: `[1, x]`, the full polynomial of order one.
//! * `mp`: every monomial of total degree `<= r` (`C(d + r, r)` features),
//!   constant first, then graded lexicographic order.
//! * `rp`: the reduced polynomial with `1 + r + d(2r - 1)` features:
//!   `[1]`, element powers `x_j^k` (k outer, j inner), sum powers `S^k` and
//!   cross terms `x_j S^(k-1)` for `k >= 2`, where `S = sum_j x_j`.
//! * `rsp`: the reduced polynomial evaluated on `u_j = eta * sinh(sigma * x_j)`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `|sigma * x|` accepted before `sinh` is considered saturated.
pub const SINH_ARG_LIMIT: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Lin,
    Mp,
    Rp,
    Rsp,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct FeatureMapSpec {
    pub kind: FeatureKind,
    pub r: usize,
    pub eta: f64,
    pub sigma: f64,
}

impl FeatureMapSpec {
    pub const LIN: Self = Self {
        kind: FeatureKind::Lin,
        r: 1,
        eta: 1.0,
        sigma: 1.0,
    };

    pub fn mp(r: usize) -> Self {
        Self {
            kind: FeatureKind::Mp,
            r,
            ..Self::LIN
        }
    }

    pub fn rp(r: usize) -> Self {
        Self {
            kind: FeatureKind::Rp,
            r,
            ..Self::LIN
        }
    }

    pub fn rsp(r: usize, eta: f64, sigma: f64) -> Self {
        Self {
            kind: FeatureKind::Rsp,
            r,
            eta,
            sigma,
        }
    }

    /// RSP with `eta = sigma = 1`.
    pub fn rspf(r: usize) -> Self {
        Self::rsp(r, 1.0, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |reason: &str| {
            Err(Error::InvalidSpec {
                token: self.to_string(),
                reason: reason.to_owned(),
            })
        };
        if self.r == 0 {
            return bad("order r must be at least 1");
        }
        if self.kind == FeatureKind::Lin && self.r != 1 {
            return bad("lin has order 1");
        }
        if self.kind == FeatureKind::Rsp
            && !(self.eta > 0.0 && self.eta.is_finite() && self.sigma > 0.0 && self.sigma.is_finite())
        {
            return bad("eta and sigma must be positive");
        }
        Ok(())
    }

    /// Number of features produced for a `d`-dimensional input, bias included.
    pub fn expanded_dim(&self, d: usize) -> usize {
        expanded_dim(self, d)
    }

    pub fn expand(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.expanded_dim(x.len()));
        self.expand_into(x, &mut out)?;
        Ok(out)
    }

    /// Appends the expansion of `x` to `out`.
    pub fn expand_into(&self, x: &[f64], out: &mut Vec<f64>) -> Result<()> {
        match self.kind {
            FeatureKind::Lin => mp_into(x, 1, out),
            FeatureKind::Mp => mp_into(x, self.r, out),
            FeatureKind::Rp => rp_into(x, self.r, out),
            FeatureKind::Rsp => {
                let u = sinh_substitute(x, self.eta, self.sigma)?;
                rp_into(&u, self.r, out);
            }
        }
        Ok(())
    }

    /// Expands every row of `x` into a new design matrix.
    pub fn expand_rows(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let (n, d) = x.shape();
        let width = self.expanded_dim(d);
        let mut buf = Vec::with_capacity(n * width);
        let mut row = vec![0.0; d];
        for r in 0..n {
            row.iter_mut()
                .zip(x.row(r).iter())
                .for_each(|(dst, src)| *dst = *src);
            self.expand_into(&row, &mut buf)?;
        }
        Ok(DMatrix::from_row_slice(n, width, &buf))
    }
}

impl fmt::Display for FeatureMapSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            FeatureKind::Lin => write!(f, "lin"),
            FeatureKind::Mp => write!(f, "mp:r={}", self.r),
            FeatureKind::Rp => write!(f, "rp:r={}", self.r),
            FeatureKind::Rsp => write!(f, "rsp:r={},eta={},sigma={}", self.r, self.eta, self.sigma),
        }
    }
}

impl FromStr for FeatureMapSpec {
    type Err = Error;

    /// Parses `lin`, `mp:r=2`, `rp:r=3`, `rsp:r=2,eta=0.5,sigma=0.3` and
    /// `rspf:r=2`. Omitted orders default to 2, omitted `eta`/`sigma` to 1.
    fn from_str(s: &str) -> Result<Self> {
        let token = s.trim();
        let invalid = |reason: String| Error::InvalidSpec {
            token: token.to_owned(),
            reason,
        };
        let (name, params) = match token.split_once(':') {
            Some((n, p)) => (n.trim(), p.trim()),
            None => (token, ""),
        };
        let mut spec = match name.to_ascii_lowercase().as_str() {
            "lin" => Self::LIN,
            "mp" => Self::mp(2),
            "rp" => Self::rp(2),
            "rsp" | "rspf" => Self::rspf(2),
            other => return Err(invalid(format!("unknown kind `{other}`"))),
        };
        let fixed_params = name.eq_ignore_ascii_case("rspf");
        for param in params.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = param
                .split_once('=')
                .ok_or_else(|| invalid(format!("expected key=value, got `{param}`")))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "r" if spec.kind != FeatureKind::Lin => {
                    spec.r = value
                        .parse()
                        .map_err(|_| invalid(format!("bad order `{value}`")))?;
                }
                "eta" | "sigma" if spec.kind == FeatureKind::Rsp && !fixed_params => {
                    let v: f64 = value
                        .parse()
                        .map_err(|_| invalid(format!("bad {key} `{value}`")))?;
                    if key == "eta" {
                        spec.eta = v;
                    } else {
                        spec.sigma = v;
                    }
                }
                _ => return Err(invalid(format!("unexpected parameter `{key}`"))),
            }
        }
        spec.validate().map_err(|_| invalid("parameters out of range".into()))?;
        Ok(spec)
    }
}

impl TryFrom<String> for FeatureMapSpec {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<FeatureMapSpec> for String {
    fn from(spec: FeatureMapSpec) -> Self {
        spec.to_string()
    }
}

/// Splits a comma-separated method list such as
/// `lin,mp:r=2,rsp:r=2,eta=1,sigma=1`; `key=value` tokens without a kind
/// prefix continue the preceding method.
pub fn parse_method_list(s: &str) -> Result<Vec<FeatureMapSpec>> {
    let mut groups: Vec<String> = Vec::new();
    for token in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let continues = !token.contains(':') && token.contains('=');
        match groups.last_mut() {
            Some(last) if continues => {
                last.push(if last.contains(':') { ',' } else { ':' });
                last.push_str(token);
            }
            _ if continues => {
                return Err(Error::InvalidSpec {
                    token: token.to_owned(),
                    reason: "parameter without a preceding method".into(),
                })
            }
            _ => groups.push(token.to_owned()),
        }
    }
    if groups.is_empty() {
        return Err(Error::InvalidSpec {
            token: s.to_owned(),
            reason: "empty method list".into(),
        });
    }
    groups.iter().map(|g| g.parse()).collect()
}

fn binomial(n: usize, k: usize) -> usize {
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

pub fn expanded_dim(spec: &FeatureMapSpec, d: usize) -> usize {
    match spec.kind {
        FeatureKind::Lin => d + 1,
        FeatureKind::Mp => binomial(d + spec.r, spec.r),
        FeatureKind::Rp | FeatureKind::Rsp => 1 + spec.r + d * (2 * spec.r - 1),
    }
}

/// All monomials of total degree `<= r` in graded lexicographic order.
pub fn expand_mp(x: &[f64], r: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(binomial(x.len() + r, r));
    mp_into(x, r, &mut out);
    out
}

/// Reduced polynomial of order `r`.
pub fn expand_rp(x: &[f64], r: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(1 + r + x.len() * (2 * r - 1));
    rp_into(x, r, &mut out);
    out
}

/// Reduced polynomial of order `r` over `eta * sinh(sigma * x_j)`.
pub fn expand_rsp(x: &[f64], r: usize, eta: f64, sigma: f64) -> Result<Vec<f64>> {
    let u = sinh_substitute(x, eta, sigma)?;
    Ok(expand_rp(&u, r))
}

fn sinh_substitute(x: &[f64], eta: f64, sigma: f64) -> Result<Vec<f64>> {
    x.iter()
        .enumerate()
        .map(|(j, &v)| {
            let arg = sigma * v;
            if arg.abs() > SINH_ARG_LIMIT {
                Err(Error::SinhOverflow {
                    coordinate: j,
                    magnitude: arg.abs(),
                    limit: SINH_ARG_LIMIT,
                })
            } else {
                Ok(eta * arg.sinh())
            }
        })
        .collect()
}

fn mp_into(x: &[f64], r: usize, out: &mut Vec<f64>) {
    let start = out.len();
    out.push(1.0);
    // (offset into `out`, count) of the previous degree block, and for each of
    // its monomials the smallest variable index that may multiply it next.
    let mut prev_start = start;
    let mut prev_min: Vec<usize> = vec![0];
    for _ in 0..r {
        let block_start = out.len();
        let mut next_min = Vec::new();
        for (m, &lo) in prev_min.iter().enumerate() {
            let base = out[prev_start + m];
            for (j, &xj) in x.iter().enumerate().skip(lo) {
                out.push(base * xj);
                next_min.push(j);
            }
        }
        prev_start = block_start;
        prev_min = next_min;
    }
}

fn rp_into(x: &[f64], r: usize, out: &mut Vec<f64>) {
    out.push(1.0);
    for k in 1..=r {
        let k = k as i32;
        out.extend(x.iter().map(|v| v.powi(k)));
    }
    let sum: f64 = x.iter().sum();
    for k in 1..=r {
        out.push(sum.powi(k as i32));
    }
    for k in 2..=r {
        let s = sum.powi(k as i32 - 1);
        out.extend(x.iter().map(|v| v * s));
    }
}
