//! Linear-transformation (LT) baseline.
//!
//! Column `i` of the transform maximizes the squared directional derivative
//! of the smooth inner function `h` at an expansion point, subject to being a
//! unit vector orthogonal to the earlier columns. The maximizer is the
//! normalized projection of `∇h` onto the orthogonal complement of those
//! columns. The first `k` columns are then completed with one reflection
//! each, so applying the transform costs `O(nk)`.

use crate::error::{Error, Result};
use crate::linalg::{dot, norm};
use crate::regression::LogExpPayoffSpec;
use crate::transforms::{complete_first_k_columns, TransformChain};

/// Differentiable inner function `h`, in the input coordinates of the base
/// construction.
pub trait SmoothPayoff {
    fn dim(&self) -> usize;
    fn gradient(&self, x: &[f64]) -> Vec<f64>;
}

impl SmoothPayoff for LogExpPayoffSpec {
    fn dim(&self) -> usize {
        LogExpPayoffSpec::dim(self)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        LogExpPayoffSpec::gradient(self, x)
    }
}

/// Arithmetic average `(S_0/n) Σ_k exp(c Σ_{j ≤ k} x_j + d k)` of a forward
/// constructed path, with `O(n)` gradients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsianSmooth {
    pub steps: usize,
    pub spot: f64,
    /// `σ sqrt(T/n)`.
    pub scale: f64,
    /// `(r − σ²/2) T/n`.
    pub drift: f64,
}

impl AsianSmooth {
    pub fn new(steps: usize, spot: f64, rate: f64, sigma: f64, maturity: f64) -> Self {
        let dt = maturity / steps as f64;
        Self { steps, spot, scale: sigma * dt.sqrt(), drift: (rate - 0.5 * sigma * sigma) * dt }
    }
}

impl SmoothPayoff for AsianSmooth {
    fn dim(&self) -> usize {
        self.steps
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let n = self.steps;
        let w = self.spot / n as f64;
        let mut cum = 0.0;
        let terms: Vec<f64> = x
            .iter()
            .enumerate()
            .map(|(k, xk)| {
                cum += xk;
                w * (self.scale * cum + self.drift * (k + 1) as f64).exp()
            })
            .collect();
        let mut out = vec![0.0; n];
        let mut suffix = 0.0;
        for i in (0..n).rev() {
            suffix += terms[i];
            out[i] = self.scale * suffix;
        }
        out
    }
}

/// Number of optimized columns and their expansion points.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LtConfig {
    pub columns: usize,
    /// `expansion[i][j]` is the coordinate of the point for column `i`
    /// along the already chosen column `j < i`. Missing entries are zero.
    pub expansion: Vec<Vec<f64>>,
}

impl LtConfig {
    pub fn new(columns: usize) -> Self {
        Self { columns, expansion: Vec::new() }
    }
}

/// LT transform with one flag per optimized column, set when the projected
/// gradient vanished and a canonical direction was used instead.
#[derive(Debug, Clone)]
pub struct LtTransform {
    pub chain: TransformChain,
    pub columns: Vec<Vec<f64>>,
    pub degenerate: Vec<bool>,
}

/// Relative size under which a projected gradient counts as zero.
const DEGENERATE_TOL: f64 = 1e-10;

fn project_out(v: &mut [f64], basis: &[Vec<f64>]) {
    // two passes of modified Gram-Schmidt keep the result orthogonal to 1e-15
    for _ in 0..2 {
        for b in basis {
            let c = dot(v, b);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
    }
}

/// First canonical vector with at least half of its squared norm outside
/// `span(basis)`, else the one with the largest such part.
fn canonical_fallback(n: usize, basis: &[Vec<f64>]) -> Vec<f64> {
    let residual = |j: usize| 1.0 - basis.iter().map(|b| b[j] * b[j]).sum::<f64>();
    let j = (0..n).find(|&j| residual(j) >= 0.5).unwrap_or_else(|| {
        (0..n).max_by(|&p, &q| residual(p).total_cmp(&residual(q)).then(q.cmp(&p))).unwrap_or(0)
    });
    let mut e = vec![0.0; n];
    e[j] = 1.0;
    project_out(&mut e, basis);
    e
}

pub fn lt_transform(smooth: &dyn SmoothPayoff, cfg: &LtConfig) -> Result<LtTransform> {
    let n = smooth.dim();
    if cfg.columns > n {
        return Err(Error::InvalidParameter(format!("{} columns exceed dimension {n}", cfg.columns)));
    }
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(cfg.columns);
    let mut degenerate = Vec::with_capacity(cfg.columns);
    for i in 0..cfg.columns {
        let mut point = vec![0.0; n];
        if let Some(coords) = cfg.expansion.get(i) {
            for (c, col) in coords.iter().zip(&columns) {
                point.iter_mut().zip(col).for_each(|(p, v)| *p += c * v);
            }
        }
        let grad = smooth.gradient(&point);
        let scale = norm(&grad);
        let mut v = grad;
        project_out(&mut v, &columns);
        let len = norm(&v);
        let flat = scale.is_nan() || scale <= 0.0 || len <= DEGENERATE_TOL * scale;
        if flat {
            v = canonical_fallback(n, &columns);
        }
        let len = norm(&v);
        v.iter_mut().for_each(|x| *x /= len);
        columns.push(v);
        degenerate.push(flat);
    }
    let chain = if columns.is_empty() { TransformChain::identity(n) } else { complete_first_k_columns(&columns)? };
    Ok(LtTransform { chain, columns, degenerate })
}
