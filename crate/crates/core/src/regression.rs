//! Regression coefficients `a_j = E(X_j h(X))` and the reflections built
//! from them.
//!
//! For integrands of the form `f = g ∘ h`, the single reflection mapping
//! `e_1` to `a / |a|` puts the best linear approximation of `h` on the
//! first coordinate. [`regression_chain`] repeats this for several inner
//! functions, each reflection acting on the coordinates not yet used.

use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, norm, DenseMatrix};
use crate::transforms::{householder_from_target, TransformChain};

/// `h(X) = Σ_k w_k exp(Σ_j c_kj X_j + d_kj)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogExpPayoffSpec {
    weights: Vec<f64>,
    coeffs: DenseMatrix,
    drifts: DenseMatrix,
}

impl LogExpPayoffSpec {
    pub fn new(weights: Vec<f64>, coeffs: DenseMatrix, drifts: DenseMatrix) -> Result<Self> {
        let m = weights.len();
        check_dim(m, coeffs.rows())?;
        check_dim(m, drifts.rows())?;
        check_dim(coeffs.cols(), drifts.cols())?;
        let finite = weights.iter().all(|w| w.is_finite())
            && (0..m).all(|k| coeffs.row(k).iter().chain(drifts.row(k)).all(|v| v.is_finite()));
        if !finite {
            return Err(Error::InvalidParameter("log-exp specification has non-finite entries".into()));
        }
        Ok(Self { weights, coeffs, drifts })
    }

    /// Arithmetic average of a discretely sampled Black–Scholes path:
    /// `w_k = S_0 / n`, `c_kj = σ sqrt(T/n) 1{j ≤ k}`,
    /// `d_kj = (r - σ²/2)(T/n) 1{j ≤ k}`.
    pub fn asian(steps: usize, spot: f64, rate: f64, sigma: f64, maturity: f64) -> Self {
        let n = steps;
        let dt = maturity / n as f64;
        let c = sigma * dt.sqrt();
        let d = (rate - 0.5 * sigma * sigma) * dt;
        Self {
            weights: vec![spot / n as f64; n],
            coeffs: DenseMatrix::from_fn(n, n, |k, j| if j <= k { c } else { 0.0 }),
            drifts: DenseMatrix::from_fn(n, n, |k, j| if j <= k { d } else { 0.0 }),
        }
    }

    pub fn terms(&self) -> usize {
        self.weights.len()
    }

    pub fn dim(&self) -> usize {
        self.coeffs.cols()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn coeffs(&self) -> &DenseMatrix {
        &self.coeffs
    }

    /// `w̄_k = w_k exp(Σ_j c_kj²/2 + d_kj)`, so that `E h(X) = Σ_k w̄_k`.
    pub fn mean_weights(&self) -> Vec<f64> {
        (0..self.terms())
            .map(|k| {
                let e: f64 = self
                    .coeffs
                    .row(k)
                    .iter()
                    .zip(self.drifts.row(k))
                    .map(|(c, d)| 0.5 * c * c + d)
                    .sum();
                self.weights[k] * e.exp()
            })
            .collect()
    }

    fn term_values(&self, x: &[f64]) -> impl Iterator<Item = f64> + '_ {
        let x = x.to_vec();
        (0..self.terms()).map(move |k| {
            let drift: f64 = self.drifts.row(k).iter().sum();
            self.weights[k] * (dot(self.coeffs.row(k), &x) + drift).exp()
        })
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.term_values(x).sum()
    }

    /// `∇h(x)`.
    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let terms: Vec<f64> = self.term_values(x).collect();
        self.coeffs.tr_mul_vec(&terms)
    }
}

/// Regression vector `a` with its Euclidean norm.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionVector {
    pub a: Vec<f64>,
    pub norm: f64,
}

impl RegressionVector {
    pub fn new(a: Vec<f64>) -> Self {
        let norm = norm(&a);
        Self { a, norm }
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }
}

/// Split of `V(h(X))` into the part captured by the linear approximation
/// and the remainder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceReport {
    /// `|a|²`.
    pub captured: f64,
    /// `V(h(X))`.
    pub total: f64,
    /// `(V - |a|²) / V`, or 0 when `V = 0`.
    pub residual_fraction: f64,
}

impl VarianceReport {
    pub fn new(captured: f64, total: f64) -> Self {
        let residual_fraction = if total == 0.0 { 0.0 } else { (total - captured) / total };
        Self { captured, total, residual_fraction }
    }
}

/// Closed form `a_i = Σ_k c_ki w̄_k`.
pub fn logexp_coefficients(spec: &LogExpPayoffSpec) -> RegressionVector {
    RegressionVector::new(spec.coeffs.tr_mul_vec(&spec.mean_weights()))
}

/// Asian-average coefficients
/// `a_i = (S_0/n) Σ_{k ≥ i} σ sqrt(T/n) e^{r k T/n}`, in `O(n)`.
pub fn asian_coefficients(steps: usize, spot: f64, rate: f64, sigma: f64, maturity: f64) -> RegressionVector {
    let n = steps as f64;
    let dt = maturity / n;
    let scale = spot / n * sigma * dt.sqrt();
    let mut a = vec![0.0; steps];
    let mut acc = 0.0;
    for i in (0..steps).rev() {
        acc += (rate * (i + 1) as f64 * dt).exp();
        a[i] = scale * acc;
    }
    RegressionVector::new(a)
}

/// `|a|² = Σ w̄_k1 w̄_k2 c̄_k1k2` and `V = Σ w̄_k1 w̄_k2 (e^{c̄_k1k2} - 1)`
/// with `c̄ = c cᵀ`. Costs `O(m² n)`.
pub fn variance_report(spec: &LogExpPayoffSpec) -> VarianceReport {
    let wbar = spec.mean_weights();
    let cbar = spec.coeffs.gram_outer();
    let mut captured = 0.0;
    let mut total = 0.0;
    for (k1, &w1) in wbar.iter().enumerate() {
        for (k2, &w2) in wbar.iter().enumerate() {
            let c = cbar[(k1, k2)];
            captured += w1 * w2 * c;
            total += w1 * w2 * c.exp_m1();
        }
    }
    VarianceReport::new(captured, total)
}

/// [`variance_report`] for [`LogExpPayoffSpec::asian`] with `S_0 = 1`,
/// using `w̄_k = e^{rTk/n}/n` and `c̄_k1k2 = σ² T min(k1, k2)/n` in `O(n²)`.
pub fn asian_variance_report(steps: usize, rate: f64, sigma: f64, maturity: f64) -> VarianceReport {
    let n = steps as f64;
    let wbar: Vec<f64> = (1..=steps).map(|k| (rate * maturity * k as f64 / n).exp() / n).collect();
    let cbar: Vec<f64> = (1..=steps).map(|j| sigma * sigma * maturity * j as f64 / n).collect();
    let ebar: Vec<f64> = cbar.iter().map(|c| c.exp_m1()).collect();
    let mut captured = 0.0;
    let mut total = 0.0;
    for k1 in 0..steps {
        let mut row_c = 0.0;
        let mut row_v = 0.0;
        for (k2, w2) in wbar.iter().enumerate() {
            let j = k1.min(k2);
            row_c += w2 * cbar[j];
            row_v += w2 * ebar[j];
        }
        captured += wbar[k1] * row_c;
        total += wbar[k1] * row_v;
    }
    VarianceReport::new(captured, total)
}

/// Large-`n` limit of [`asian_variance_report`], from the double integrals
/// of `e^{rTx} e^{rTy} min(x, y)` and `e^{rTx} e^{rTy} (e^{σ²T min(x,y)} - 1)`
/// over the unit square.
pub fn variance_report_continuum(rate: f64, sigma: f64, maturity: f64) -> Result<VarianceReport> {
    if !(sigma > 0.0 && maturity > 0.0) {
        return Err(Error::InvalidParameter("sigma and maturity must be positive".into()));
    }
    if rate.is_nan() || rate * maturity < 1e-3 {
        return Err(Error::UseDiscreteForm(rate));
    }
    let (r, t, s2) = (rate, maturity, sigma * sigma);
    let e1 = (r * t).exp();
    let e2 = (2.0 * r * t).exp();
    let captured = s2 * (4.0 * e1 + 2.0 * e2 * r * t - (3.0 * e2 + 1.0)) / (2.0 * r.powi(3) * t * t);
    let num = 2.0 * e1 * (2.0 * r * s2 + s2 * s2) + 2.0 * (t * (2.0 * r + s2)).exp() * r * r
        - (e2 * (2.0 * r * r + 3.0 * r * s2 + s2 * s2) + r * s2 + s2 * s2);
    let total = num / (r * r * t * t * (r + s2) * (2.0 * r + s2));
    Ok(VarianceReport::new(captured, total))
}

/// The identity for `a = 0`, otherwise the reflection mapping `e_1` to
/// `a / |a|`.
pub fn regression_transform(a: &RegressionVector) -> TransformChain {
    let mut chain = TransformChain::identity(a.dim());
    if a.norm > 0.0 && a.dim() > 0 {
        let u = householder_from_target(&a.a, 0).expect("first-coordinate target has no leading entries");
        chain.push(u).expect("dimensions agree");
    }
    chain
}

/// Supplies `a^(k)` under the chain built so far.
pub type CoefficientProvider<'a> = dyn Fn(&TransformChain) -> Vec<f64> + 'a;

/// Provider for a coefficient vector `a = E(X h(X))` known in the original
/// coordinates: under `U`, `E(X h(U X)) = Uᵀ a`.
pub fn in_original_coordinates(a: Vec<f64>) -> impl Fn(&TransformChain) -> Vec<f64> {
    move |chain| chain.apply_transpose(&a).expect("coefficient vector has the chain dimension")
}

/// Multi-function regression chain. For `k = 1..m`: take `a^(k)` from the
/// `k`-th provider under the current `U`, zero its first `k - 1` entries,
/// stop if it vanishes, else append the reflection on coordinates `k..n`
/// mapping `e_k` to `a^(k) / |a^(k)|`.
pub fn regression_chain(n: usize, providers: &[&CoefficientProvider<'_>]) -> Result<TransformChain> {
    let mut chain = TransformChain::identity(n);
    for (k, provider) in providers.iter().enumerate() {
        if k >= n {
            break;
        }
        let mut a = provider(&chain);
        check_dim(n, a.len())?;
        a[..k].iter_mut().for_each(|v| *v = 0.0);
        if norm(&a) == 0.0 {
            break;
        }
        chain.push(householder_from_target(&a, k)?)?;
    }
    Ok(chain)
}

/// Chain making `x ↦ (w_1ᵀ U x, ..., w_mᵀ U x)` depend on `x_1..x_rank` only.
#[derive(Debug, Clone)]
pub struct ExactLinearChain {
    pub chain: TransformChain,
    pub rank: usize,
}

/// Relative size below which a projected `w_k` counts as zero.
const DEPENDENCE_TOL: f64 = 1e-12;

/// Reduction of `g(w_1ᵀX, ..., w_mᵀX)` to at most `m` variables using one
/// reflection per linearly independent `w_k`.
pub fn exact_linear_chain(ws: &[Vec<f64>]) -> Result<ExactLinearChain> {
    let Some(first) = ws.first() else {
        return Err(Error::InvalidParameter("no vectors supplied".into()));
    };
    let n = first.len();
    let mut chain = TransformChain::identity(n);
    for w in ws {
        check_dim(n, w.len())?;
        let j = chain.len();
        if j == n {
            break;
        }
        let mut wbar = chain.apply_transpose(w)?;
        wbar[..j].iter_mut().for_each(|v| *v = 0.0);
        if norm(&wbar) <= DEPENDENCE_TOL * norm(w) || norm(w) == 0.0 {
            continue;
        }
        chain.push(householder_from_target(&wbar, j)?)?;
    }
    let rank = chain.len();
    Ok(ExactLinearChain { chain, rank })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn single_step_asian_coefficient() {
        let a = logexp_coefficients(&LogExpPayoffSpec::asian(1, 1.0, 0.04, 0.2, 1.0));
        assert!(close(a.a[0], 0.2 * 0.04f64.exp(), 1e-15));
        assert!(close(a.a[0], 0.208162, 1e-6));
    }

    #[test]
    fn two_step_asian_coefficients() {
        let a = logexp_coefficients(&LogExpPayoffSpec::asian(2, 1.0, 0.0, 0.2, 1.0));
        // (1/2)·0.2·sqrt(1/2)·(2, 1)
        assert!(close(a.a[0], 0.141421, 1e-6) && close(a.a[1], 0.070711, 1e-6));
    }

    #[test]
    fn zero_vol_gives_zero_coefficients() {
        let spec = LogExpPayoffSpec::asian(5, 100.0, 0.05, 0.0, 1.0);
        assert!(logexp_coefficients(&spec).a.iter().all(|&v| v == 0.0));
        let rep = variance_report(&spec);
        assert_eq!((rep.captured, rep.total, rep.residual_fraction), (0.0, 0.0, 0.0));
    }

    #[test]
    fn structured_asian_routes_match_generic() {
        for n in [1, 3, 17, 64] {
            let spec = LogExpPayoffSpec::asian(n, 1.0, 0.07, 0.3, 1.5);
            let generic = logexp_coefficients(&spec);
            let fast = asian_coefficients(n, 1.0, 0.07, 0.3, 1.5);
            for (g, f) in generic.a.iter().zip(&fast.a) {
                assert!(close(*g, *f, 1e-14));
            }
            let rg = variance_report(&spec);
            let rf = asian_variance_report(n, 0.07, 0.3, 1.5);
            assert!(close(rg.captured, rf.captured, 1e-13));
            assert!(close(rg.total, rf.total, 1e-13));
            // |a|² by the double sum equals Σ a_i²
            assert!(close(rg.captured, generic.norm * generic.norm, 1e-13));
        }
    }

    #[test]
    fn residual_fractions_against_reference_table() {
        let expect = [(0.1, 0.01, 0.0025), (0.3, 0.04, 0.0104), (0.2, 0.02, 0.0051)];
        for (r, s2, frac) in expect {
            let d = asian_variance_report(4096, r, f64::sqrt(s2), 1.0).residual_fraction;
            assert!(close(d, frac, 2e-4), "discrete r={r} s2={s2}: {d}");
        }
        let c = variance_report_continuum(0.1, 0.1, 1.0).unwrap().residual_fraction;
        assert!(close(c, 0.0025, 1e-4));
        let c = variance_report_continuum(0.2, 0.02f64.sqrt(), 1.0).unwrap().residual_fraction;
        assert!(close(c, 0.0051, 2e-4));
    }

    #[test]
    fn continuum_agrees_with_fine_discrete_sums() {
        for r in [0.1, 0.2, 0.3] {
            for s2 in [0.01, 0.02, 0.03, 0.04] {
                let d = asian_variance_report(1 << 14, r, f64::sqrt(s2), 1.0).residual_fraction;
                let c = variance_report_continuum(r, f64::sqrt(s2), 1.0).unwrap().residual_fraction;
                assert!(close(d, c, 1e-4));
            }
        }
    }

    #[test]
    fn continuum_rejects_vanishing_rate() {
        assert!(matches!(variance_report_continuum(0.0, 0.2, 1.0), Err(Error::UseDiscreteForm(_))));
        assert!(variance_report_continuum(0.1, 0.0, 1.0).is_err());
    }

    #[test]
    fn regression_transform_maps_e1_to_direction() {
        let a = RegressionVector::new(vec![0.0; 4]);
        assert!(regression_transform(&a).is_empty());

        let a = asian_coefficients(250, 100.0, 0.04, 0.2, 1.0);
        let u = regression_transform(&a);
        let mut e1 = vec![0.0; 250];
        e1[0] = 1.0;
        let img = u.apply(&e1).unwrap();
        for (x, y) in img.iter().zip(&a.a) {
            assert!(close(*x, y / a.norm, 1e-12));
        }
        let scaled = RegressionVector::new(a.a.iter().map(|v| 7.0 * v).collect());
        let u7 = regression_transform(&scaled);
        assert!(u7.to_matrix().max_abs_diff(&u.to_matrix()) < 1e-14);
    }

    #[test]
    fn chain_with_one_provider_is_regression_transform() {
        let a = asian_coefficients(10, 1.0, 0.05, 0.25, 1.0);
        let p = in_original_coordinates(a.a.clone());
        let chain = regression_chain(10, &[&p]).unwrap();
        assert_eq!(chain, regression_transform(&a));
    }

    #[test]
    fn two_provider_chain_is_orthogonal_and_zeroes_leading_entry() {
        let n = 12;
        let a1: Vec<f64> = (0..n).map(|i| (i as f64 * 0.4).cos() + 0.2).collect();
        let a2 = asian_coefficients(n, 1.0, 0.04, 0.2, 1.0).a;
        let p1 = in_original_coordinates(a1.clone());
        let seen = std::cell::RefCell::new(Vec::new());
        let p2 = |c: &TransformChain| {
            let v = c.apply_transpose(&a2).unwrap();
            seen.borrow_mut().push(v.clone());
            v
        };
        let chain = regression_chain(n, &[&p1, &p2]).unwrap();
        assert_eq!(chain.len(), 2);
        let m = chain.to_matrix();
        assert!(m.transpose().matmul(&m).max_abs_diff(&DenseMatrix::identity(n)) < 1e-10);
        // first column points along a1
        let na1 = norm(&a1);
        assert!(m.column(0).iter().zip(&a1).all(|(x, y)| close(*x, y / na1, 1e-12)));
        // second column spans the part of a2 orthogonal to a1
        let col2 = m.column(1);
        assert!(close(dot(&col2, &a1), 0.0, 1e-12));
        let w = &seen.borrow()[0];
        let mut projected = w.clone();
        projected[0] = 0.0;
        let pn = norm(&projected);
        let target = chain.reflections()[0].to_matrix().mul_vec(&projected);
        assert!(col2.iter().zip(&target).all(|(x, y)| close(*x, y / pn, 1e-12)));
    }

    #[test]
    fn chain_stops_on_vanishing_coefficients() {
        let p1 = in_original_coordinates(vec![1.0, 1.0, 0.0]);
        let zero = |_: &TransformChain| vec![0.0; 3];
        let p3 = in_original_coordinates(vec![0.0, 0.0, 1.0]);
        let chain = regression_chain(3, &[&p1, &zero, &p3]).unwrap();
        assert_eq!(chain.len(), 1);
    }

    #[test]
    fn exact_linear_single_vector() {
        let mut w = vec![0.0; 5];
        w[2] = 1.0;
        let r = exact_linear_chain(&[w.clone()]).unwrap();
        assert_eq!(r.rank, 1);
        let x = [0.3, -1.0, 2.0, 0.5, 4.0];
        let ux = r.chain.apply(&x).unwrap();
        assert!(close(dot(&w, &ux), x[0], 1e-15));
    }

    #[test]
    fn exact_linear_all_zero() {
        let r = exact_linear_chain(&[vec![0.0; 4], vec![0.0; 4]]).unwrap();
        assert_eq!(r.rank, 0);
        assert!(r.chain.is_empty());
    }

    #[test]
    fn exact_linear_skips_dependent_vectors() {
        let w1 = vec![1.0, 2.0, 3.0, 4.0];
        let w2: Vec<f64> = w1.iter().map(|v| -2.0 * v).collect();
        let w3 = vec![0.0, 1.0, 0.0, 0.0];
        let r = exact_linear_chain(&[w1, w2, w3]).unwrap();
        assert_eq!(r.rank, 2);
    }

    proptest! {
        #[test]
        fn exact_linear_random_vectors(seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let ws: Vec<Vec<f64>> = (0..2).map(|_| (0..8).map(|_| rng.random::<f64>() - 0.5).collect()).collect();
            let r = exact_linear_chain(&ws).unwrap();
            prop_assert_eq!(r.rank, 2);
            let m = r.chain.to_matrix();
            for w in &ws {
                for j in 2..8 {
                    prop_assert!(dot(w, &m.column(j)).abs() <= 1e-12);
                }
            }
        }

        #[test]
        fn captured_never_exceeds_total(seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let m = rng.random_range(1..5);
            let n = rng.random_range(1..6);
            let spec = LogExpPayoffSpec::new(
                (0..m).map(|_| rng.random_range(-2.0..2.0)).collect(),
                DenseMatrix::from_fn(m, n, |_, _| rng.random_range(-0.8..0.8)),
                DenseMatrix::from_fn(m, n, |_, _| rng.random_range(-0.5..0.5)),
            ).unwrap();
            let rep = variance_report(&spec);
            prop_assert!(rep.captured >= -1e-12);
            prop_assert!(rep.captured <= rep.total * (1.0 + 1e-10) + 1e-12);
            prop_assert!((-1e-9..=1.0 + 1e-9).contains(&rep.residual_fraction));
        }
    }
}
