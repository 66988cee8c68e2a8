//! Correlated multi-asset Brownian paths.
//!
//! Outputs are laid out asset-major: entry `i * n + k` is
//! `σ_i B^(i)` at time `(k + 1) T / n`, so the covariance of the output is
//! `R ⊗ Σ` with `R_ij = ρ_ij σ_i σ_j`.

use super::chain::TransformChain;
use super::construction::{brownian_covariance, pca_eigenpairs};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{cholesky, jacobi_eigen, DenseMatrix};

/// Volatilities and correlations of a basket.
#[derive(Debug, Clone, PartialEq)]
pub struct BasketCovSpec {
    pub steps: usize,
    pub maturity: f64,
    pub vols: Vec<f64>,
    pub correlation: DenseMatrix,
}

impl BasketCovSpec {
    pub fn new(steps: usize, maturity: f64, vols: Vec<f64>, correlation: DenseMatrix) -> Result<Self> {
        let m = vols.len();
        if m == 0 || steps == 0 {
            return Err(Error::InvalidParameter("basket needs at least one asset and one step".into()));
        }
        if maturity.is_nan() || maturity <= 0.0 {
            return Err(Error::InvalidParameter(format!("maturity must be positive, got {maturity}")));
        }
        if vols.iter().any(|v| v.is_nan() || *v < 0.0) {
            return Err(Error::InvalidParameter("volatilities must be nonnegative".into()));
        }
        check_dim(m, correlation.rows())?;
        check_dim(m, correlation.cols())?;
        for i in 0..m {
            if correlation[(i, i)] != 1.0 {
                return Err(Error::InvalidParameter("correlation diagonal must be 1".into()));
            }
            for j in 0..i {
                let rho = correlation[(i, j)];
                if rho != correlation[(j, i)] || !(-1.0..=1.0).contains(&rho) {
                    return Err(Error::InvalidParameter(format!("invalid correlation entry ({i}, {j})")));
                }
            }
        }
        Ok(Self { steps, maturity, vols, correlation })
    }

    /// Constant pairwise correlation `rho`.
    pub fn equicorrelated(steps: usize, maturity: f64, vols: Vec<f64>, rho: f64) -> Result<Self> {
        let m = vols.len();
        let corr = DenseMatrix::from_fn(m, m, |i, j| if i == j { 1.0 } else { rho });
        Self::new(steps, maturity, vols, corr)
    }

    pub fn assets(&self) -> usize {
        self.vols.len()
    }

    /// Total number of normal inputs, `m · n`.
    pub fn dim(&self) -> usize {
        self.assets() * self.steps
    }

    pub fn dt(&self) -> f64 {
        self.maturity / self.steps as f64
    }

    /// `R_ij = ρ_ij σ_i σ_j`.
    pub fn asset_covariance(&self) -> DenseMatrix {
        let m = self.assets();
        DenseMatrix::from_fn(m, m, |i, j| self.correlation[(i, j)] * self.vols[i] * self.vols[j])
    }

    /// `R ⊗ Σ`.
    pub fn full_covariance(&self) -> DenseMatrix {
        self.asset_covariance().kron(&brownian_covariance(self.steps, self.maturity))
    }
}

/// Kronecker PCA: `C = (V_1 D_1) ⊗ (V_2 D_2)` with `V_1 D_1² V_1ᵀ = R` and
/// `V_2 D_2² V_2ᵀ = Σ`.
#[derive(Debug, Clone)]
pub struct BasketPca {
    m: usize,
    n: usize,
    asset_factor: DenseMatrix,
    time_factor: DenseMatrix,
    /// Kronecker column fed by input coordinate `q`, sorted by decreasing
    /// variance `λ_i μ_k`.
    order: Vec<usize>,
}

impl BasketPca {
    pub fn new(spec: &BasketCovSpec) -> Result<Self> {
        let r = spec.asset_covariance();
        let (rv, rvec) = jacobi_eigen(&r);
        let scale = rv.first().copied().unwrap_or(0.0).abs().max(f64::MIN_POSITIVE);
        let min = rv.last().copied().unwrap_or(0.0);
        if min < -1e-12 * scale {
            return Err(Error::NotPositiveSemidefinite { min_eigenvalue: min });
        }
        let (m, n) = (spec.assets(), spec.steps);
        let asset_factor = DenseMatrix::from_fn(m, m, |i, j| rvec[(i, j)] * rv[j].max(0.0).sqrt());
        let (tv, tvec) = pca_eigenpairs(n, spec.maturity);
        let time_factor = DenseMatrix::from_fn(n, n, |i, j| tvec[(i, j)] * tv[j].sqrt());
        let mut order: Vec<usize> = (0..m * n).collect();
        order.sort_by(|&p, &q| {
            let vp = rv[p / n].max(0.0) * tv[p % n];
            let vq = rv[q / n].max(0.0) * tv[q % n];
            vq.total_cmp(&vp).then(p.cmp(&q))
        });
        Ok(Self { m, n, asset_factor, time_factor, order })
    }

    pub fn dim(&self) -> usize {
        self.m * self.n
    }

    /// `C x` with `X` reshaped asset-major: `A X Bᵀ` in `O(mn(m + n))`.
    fn kron_apply(&self, xmat: &[f64], out: &mut [f64]) {
        let (m, n) = (self.m, self.n);
        let mut tmp = vec![0.0; m * n];
        for i in 0..m {
            for j in 0..m {
                let a = self.asset_factor[(i, j)];
                if a != 0.0 {
                    for (t, &x) in tmp[i * n..(i + 1) * n].iter_mut().zip(&xmat[j * n..(j + 1) * n]) {
                        *t += a * x;
                    }
                }
            }
        }
        for i in 0..m {
            self.time_factor.mul_vec_into(&tmp[i * n..(i + 1) * n], &mut out[i * n..(i + 1) * n]);
        }
    }

    /// `C x` in plain Kronecker ordering.
    pub fn apply_kronecker(&self, x: &[f64], out: &mut [f64]) {
        self.kron_apply(x, out);
    }

    /// `C P x`, the input permuted so leading coordinates carry the most
    /// variance.
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        let mut xmat = vec![0.0; x.len()];
        for (&col, &xq) in self.order.iter().zip(x) {
            xmat[col] = xq;
        }
        self.kron_apply(&xmat, out);
    }
}

/// `C x` for the Kronecker PCA factor of `spec`.
pub fn basket_construct(spec: &BasketCovSpec, x: &[f64]) -> Result<Vec<f64>> {
    check_dim(spec.dim(), x.len())?;
    let pca = BasketPca::new(spec)?;
    let mut out = vec![0.0; x.len()];
    pca.apply_kronecker(x, &mut out);
    Ok(out)
}

/// Time-stepping construction: step `k` consumes inputs `k m .. (k+1) m`
/// and adds `sqrt(dt) L x_k`, where `L Lᵀ = R`.
#[derive(Debug, Clone)]
pub struct BasketForward {
    m: usize,
    n: usize,
    factor: DenseMatrix,
}

impl BasketForward {
    pub fn new(spec: &BasketCovSpec) -> Result<Self> {
        let mut factor = cholesky(&spec.asset_covariance())?;
        let sqrt_dt = spec.dt().sqrt();
        for i in 0..spec.assets() {
            for j in 0..=i {
                factor[(i, j)] *= sqrt_dt;
            }
        }
        Ok(Self { m: spec.assets(), n: spec.steps, factor })
    }

    pub fn dim(&self) -> usize {
        self.m * self.n
    }

    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        let (m, n) = (self.m, self.n);
        let mut acc = vec![0.0; m];
        for k in 0..n {
            let xk = &x[k * m..(k + 1) * m];
            for i in 0..m {
                acc[i] += crate::linalg::dot(&self.factor.row(i)[..=i], &xk[..=i]);
                out[i * n + k] = acc[i];
            }
        }
    }

    /// `Cᵀ y` for the forward matrix `C`.
    pub fn apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        let (m, n) = (self.m, self.n);
        let mut out = vec![0.0; m * n];
        // suffix sums over time for each asset
        let mut suffix = vec![0.0; m];
        for k in (0..n).rev() {
            for (i, s) in suffix.iter_mut().enumerate() {
                *s += y[i * n + k];
            }
            let xk = &mut out[k * m..(k + 1) * m];
            for (i, s) in suffix.iter().enumerate() {
                for (j, x) in xk.iter_mut().enumerate().take(i + 1) {
                    *x += self.factor[(i, j)] * s;
                }
            }
        }
        out
    }
}

/// Basket path constructions used by the pricer.
#[derive(Debug, Clone)]
pub enum BasketConstruction {
    Forward(BasketForward),
    Pca(BasketPca),
    /// Forward construction of `U x`.
    Chain(BasketForward, TransformChain),
}

impl BasketConstruction {
    pub fn dim(&self) -> usize {
        match self {
            Self::Forward(f) | Self::Chain(f, _) => f.dim(),
            Self::Pca(p) => p.dim(),
        }
    }

    /// `x` may be overwritten.
    pub fn construct_in_place(&self, x: &mut [f64], out: &mut [f64]) {
        match self {
            Self::Forward(f) => f.apply(x, out),
            Self::Pca(p) => p.apply(x, out),
            Self::Chain(f, chain) => {
                chain.apply_in_place(x);
                f.apply(x, out);
            }
        }
    }

    pub fn matrix(&self) -> DenseMatrix {
        let d = self.dim();
        let mut a = DenseMatrix::zeros(d, d);
        let mut e = vec![0.0; d];
        let mut col = vec![0.0; d];
        for k in 0..d {
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transforms::construction::PathConstruction;

    fn kron_matrix(spec: &BasketCovSpec) -> DenseMatrix {
        let pca = BasketPca::new(spec).unwrap();
        let d = spec.dim();
        let cols: Vec<Vec<f64>> = (0..d)
            .map(|k| {
                let mut e = vec![0.0; d];
                e[k] = 1.0;
                let mut out = vec![0.0; d];
                pca.apply_kronecker(&e, &mut out);
                out
            })
            .collect();
        DenseMatrix::from_columns(&cols)
    }

    #[test]
    fn single_asset_reduces_to_pca() {
        let spec = BasketCovSpec::equicorrelated(6, 1.0, vec![1.0], 0.0).unwrap();
        let x: Vec<f64> = (0..6).map(|i| i as f64 * 0.3 - 0.8).collect();
        let b = basket_construct(&spec, &x).unwrap();
        let p = PathConstruction::pca(6, 1.0).unwrap().construct(&x).unwrap();
        assert!(b.iter().zip(&p).all(|(a, c)| (a - c).abs() < 1e-14));
    }

    #[test]
    fn uncorrelated_pair_is_block_diagonal() {
        let spec = BasketCovSpec::equicorrelated(2, 1.0, vec![0.1, 0.3], 0.0).unwrap();
        let cov = kron_matrix(&spec).gram_outer();
        let sigma = brownian_covariance(2, 1.0);
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i / 2 == j / 2 {
                    [0.01, 0.09][i / 2] * sigma[(i % 2, j % 2)]
                } else {
                    0.0
                };
                assert!((cov[(i, j)] - expected).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn correlated_pair_matches_kronecker_covariance() {
        let spec = BasketCovSpec::equicorrelated(2, 1.0, vec![0.1, 0.3], 0.05).unwrap();
        let dev = kron_matrix(&spec).gram_outer().max_abs_diff(&spec.full_covariance());
        assert!(dev < 1e-10, "{dev:e}");
    }

    #[test]
    fn all_basket_constructions_reproduce_covariance() {
        let spec = BasketCovSpec::equicorrelated(8, 2.0, vec![0.1, 0.2, 0.25, 0.3], 0.4).unwrap();
        let fwd = BasketForward::new(&spec).unwrap();
        let a: Vec<f64> = (0..spec.dim()).map(|i| (i as f64).cos()).collect();
        let mut chain = TransformChain::identity(spec.dim());
        chain
            .push(crate::transforms::householder::householder_from_target(&a, 0).unwrap())
            .unwrap();
        let target = spec.full_covariance();
        for c in [
            BasketConstruction::Forward(fwd.clone()),
            BasketConstruction::Pca(BasketPca::new(&spec).unwrap()),
            BasketConstruction::Chain(fwd, chain),
        ] {
            assert!(c.matrix().gram_outer().max_abs_diff(&target) < 1e-8);
        }
    }

    #[test]
    fn forward_transpose_is_adjoint() {
        let spec = BasketCovSpec::equicorrelated(5, 1.0, vec![0.1, 0.2, 0.3], 0.05).unwrap();
        let f = BasketForward::new(&spec).unwrap();
        let c = BasketConstruction::Forward(f.clone()).matrix();
        let y: Vec<f64> = (0..15).map(|i| (i as f64 * 0.37).sin()).collect();
        let direct = c.tr_mul_vec(&y);
        let fast = f.apply_transpose(&y);
        assert!(direct.iter().zip(&fast).all(|(a, b)| (a - b).abs() < 1e-14));
    }

    #[test]
    fn pca_ordering_puts_variance_first() {
        let spec = BasketCovSpec::equicorrelated(4, 1.0, vec![0.1, 0.2, 0.3], 0.05).unwrap();
        let pca = BasketPca::new(&spec).unwrap();
        let d = spec.dim();
        let col_var = |q: usize| {
            let mut e = vec![0.0; d];
            e[q] = 1.0;
            let mut out = vec![0.0; d];
            pca.apply(&e, &mut out);
            out.iter().map(|v| v * v).sum::<f64>()
        };
        let vars: Vec<f64> = (0..d).map(col_var).collect();
        assert!(vars.windows(2).all(|w| w[0] >= w[1] - 1e-15));
    }

    #[test]
    fn rejects_invalid_correlation() {
        let bad = DenseMatrix::from_fn(3, 3, |i, j| if i == j { 1.0 } else if i + j == 3 { -0.9 } else { 0.9 });
        let spec = BasketCovSpec::new(2, 1.0, vec![0.2; 3], bad).unwrap();
        assert!(matches!(BasketPca::new(&spec), Err(Error::NotPositiveSemidefinite { .. })));
        assert!(BasketCovSpec::equicorrelated(2, 1.0, vec![0.2; 2], 1.5).is_err());
    }
}
