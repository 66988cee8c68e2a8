//! Discrete Brownian path constructions `B = A x` with `A Aᵀ = Σ`,
//! `Σ_jk = (T/n) min(j, k)`.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::chain::TransformChain;
use crate::error::{check_dim, Error, Result};
use crate::linalg::DenseMatrix;
use crate::rng_qmc::NormalVector;

/// Which construction a [`PathConstruction`] uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstructionKind {
    Forward,
    BrownianBridge,
    Pca,
    /// Forward construction applied to `U x` for a reflection chain `U`.
    Chain,
}

#[derive(Debug, Clone)]
struct BridgeStep {
    target: usize,
    left: Option<usize>,
    right: usize,
    left_weight: f64,
    right_weight: f64,
    sigma: f64,
}

#[derive(Clone)]
struct SineTransform {
    fft: Arc<dyn Fft<f64>>,
    len: usize,
}

impl std::fmt::Debug for SineTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SineTransform").field("len", &self.len).finish()
    }
}

#[derive(Debug, Clone)]
enum Kind {
    Forward,
    Bridge(Vec<BridgeStep>),
    PcaDense(DenseMatrix),
    PcaFast { scales: Vec<f64>, sine: SineTransform },
    Chain(TransformChain),
}

/// A linear map from normal vectors to discrete Brownian paths
/// `(B_{T/n}, ..., B_T)`.
#[derive(Debug, Clone)]
pub struct PathConstruction {
    n: usize,
    maturity: f64,
    sqrt_dt: f64,
    kind: Kind,
}

fn validate(n: usize, maturity: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("number of steps must be positive".into()));
    }
    if !(maturity > 0.0 && maturity.is_finite()) {
        return Err(Error::InvalidParameter(format!("maturity must be positive, got {maturity}")));
    }
    Ok(())
}

/// `Σ_jk = (T/n) min(j, k)`, one-based `j, k`.
pub fn brownian_covariance(n: usize, maturity: f64) -> DenseMatrix {
    let dt = maturity / n as f64;
    DenseMatrix::from_fn(n, n, |j, k| dt * (j.min(k) + 1) as f64)
}

/// Eigenpairs of the Brownian covariance in descending order:
/// `λ_k = (T/n) / (4 sin²((2k-1)π / (2(2n+1))))` with eigenvectors
/// proportional to `sin((2k-1) j π / (2n+1))`.
pub fn pca_eigenpairs(n: usize, maturity: f64) -> (Vec<f64>, DenseMatrix) {
    let dt = maturity / n as f64;
    let denom = (2 * n + 1) as f64;
    let pi = std::f64::consts::PI;
    let values = (1..=n)
        .map(|k| {
            let s = ((2 * k - 1) as f64 * pi / (2.0 * denom)).sin();
            dt / (4.0 * s * s)
        })
        .collect();
    let mut vectors = DenseMatrix::from_fn(n, n, |j, k| {
        ((2 * k + 1) as f64 * (j + 1) as f64 * pi / denom).sin()
    });
    for k in 0..n {
        let norm = vectors.column(k).iter().map(|x| x * x).sum::<f64>().sqrt();
        for j in 0..n {
            vectors[(j, k)] /= norm;
        }
    }
    (values, vectors)
}

fn sine_norms(n: usize) -> Vec<f64> {
    let denom = (2 * n + 1) as f64;
    let pi = std::f64::consts::PI;
    (0..n)
        .map(|k| {
            (1..=n)
                .map(|j| ((2 * k + 1) as f64 * j as f64 * pi / denom).sin().powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .collect()
}

impl PathConstruction {
    /// Cumulative sums scaled by `sqrt(T/n)`.
    pub fn forward(n: usize, maturity: f64) -> Result<Self> {
        validate(n, maturity)?;
        Ok(Self::with_kind(n, maturity, Kind::Forward))
    }

    /// Breadth-first bisection on index intervals with midpoint
    /// `⌊(l + r) / 2⌋`; works for any `n`.
    pub fn brownian_bridge(n: usize, maturity: f64) -> Result<Self> {
        validate(n, maturity)?;
        let dt = maturity / n as f64;
        let mut steps = Vec::with_capacity(n.saturating_sub(1));
        let mut queue = std::collections::VecDeque::from([(0usize, n)]);
        while let Some((l, r)) = queue.pop_front() {
            if r - l < 2 {
                continue;
            }
            let m = (l + r) / 2;
            let span = (r - l) as f64;
            steps.push(BridgeStep {
                target: m,
                left: (l > 0).then_some(l),
                right: r,
                left_weight: (r - m) as f64 / span,
                right_weight: (m - l) as f64 / span,
                sigma: (dt * (m - l) as f64 * (r - m) as f64 / span).sqrt(),
            });
            queue.push_back((l, m));
            queue.push_back((m, r));
        }
        Ok(Self::with_kind(n, maturity, Kind::Bridge(steps)))
    }

    /// Dense `V D` from the covariance eigendecomposition, `O(n²)` per path.
    pub fn pca(n: usize, maturity: f64) -> Result<Self> {
        validate(n, maturity)?;
        let (values, vectors) = pca_eigenpairs(n, maturity);
        let vd = DenseMatrix::from_fn(n, n, |j, k| vectors[(j, k)] * values[k].sqrt());
        Ok(Self::with_kind(n, maturity, Kind::PcaDense(vd)))
    }

    /// Same map as [`Self::pca`], evaluated with an FFT of length `4n + 2`
    /// in `O(n log n)`.
    pub fn pca_fast(n: usize, maturity: f64) -> Result<Self> {
        validate(n, maturity)?;
        let (values, _) = pca_eigenpairs(n, maturity);
        let scales = values.iter().zip(sine_norms(n)).map(|(l, s)| l.sqrt() / s).collect();
        let len = 4 * n + 2;
        let fft = FftPlanner::new().plan_fft_inverse(len);
        Ok(Self::with_kind(n, maturity, Kind::PcaFast { scales, sine: SineTransform { fft, len } }))
    }

    /// Forward construction of `U x`.
    pub fn chain(chain: TransformChain, maturity: f64) -> Result<Self> {
        let n = chain.dim();
        validate(n, maturity)?;
        Ok(Self::with_kind(n, maturity, Kind::Chain(chain)))
    }

    fn with_kind(n: usize, maturity: f64, kind: Kind) -> Self {
        Self { n, maturity, sqrt_dt: (maturity / n as f64).sqrt(), kind }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn maturity(&self) -> f64 {
        self.maturity
    }

    pub fn kind(&self) -> ConstructionKind {
        match self.kind {
            Kind::Forward => ConstructionKind::Forward,
            Kind::Bridge(_) => ConstructionKind::BrownianBridge,
            Kind::PcaDense(_) | Kind::PcaFast { .. } => ConstructionKind::Pca,
            Kind::Chain(_) => ConstructionKind::Chain,
        }
    }

    pub fn transform_chain(&self) -> Option<&TransformChain> {
        match &self.kind {
            Kind::Chain(c) => Some(c),
            _ => None,
        }
    }

    fn cumulate(&self, x: &[f64], out: &mut [f64]) {
        let mut acc = 0.0;
        for (o, &xi) in out.iter_mut().zip(x) {
            acc += xi;
            *o = self.sqrt_dt * acc;
        }
    }

    /// Writes the path for `x` into `out`. `x` is used as scratch space
    /// and may be overwritten.
    pub fn construct_in_place(&self, x: &mut [f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(out.len(), self.n);
        match &self.kind {
            Kind::Forward => self.cumulate(x, out),
            Kind::Chain(chain) => {
                chain.apply_in_place(x);
                self.cumulate(x, out);
            }
            Kind::Bridge(steps) => {
                out[self.n - 1] = self.maturity.sqrt() * x[0];
                for (step, &z) in steps.iter().zip(&x[1..]) {
                    let left = step.left.map_or(0.0, |l| out[l - 1]);
                    out[step.target - 1] =
                        step.left_weight * left + step.right_weight * out[step.right - 1] + step.sigma * z;
                }
            }
            Kind::PcaDense(vd) => vd.mul_vec_into(x, out),
            Kind::PcaFast { scales, sine } => {
                // y_j = Σ_k s_k x_k sin(2π (2k+1)(j+1) / (4n+2)) = Im of an inverse DFT
                let mut buf = vec![Complex::new(0.0, 0.0); sine.len];
                for (k, (&xk, &sk)) in x.iter().zip(scales).enumerate() {
                    buf[2 * k + 1] = Complex::new(xk * sk, 0.0);
                }
                sine.fft.process(&mut buf);
                for (j, o) in out.iter_mut().enumerate() {
                    *o = buf[j + 1].im;
                }
            }
        }
    }

    pub fn construct(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.n, x.len())?;
        let mut scratch = x.to_vec();
        let mut out = vec![0.0; self.n];
        self.construct_in_place(&mut scratch, &mut out);
        Ok(out)
    }

    /// Materialized `A` (columns are images of the basis vectors).
    pub fn matrix(&self) -> DenseMatrix {
        let mut a = DenseMatrix::zeros(self.n, self.n);
        let mut e = vec![0.0; self.n];
        let mut col = vec![0.0; self.n];
        for k in 0..self.n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[k] = 1.0;
            self.construct_in_place(&mut e, &mut col);
            for (j, &c) in col.iter().enumerate() {
                a[(j, k)] = c;
            }
        }
        a
    }
}

/// Brownian path `(B_{T/n}, ..., B_T)` for the normal vector `x`.
pub fn construct_path(method: &PathConstruction, x: &NormalVector) -> Result<Vec<f64>> {
    method.construct(&x.values)
}
