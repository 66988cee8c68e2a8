//! Expectations involving the running maximum of Brownian motion with drift,
//! `B^ν_t = B_t + ν t` and `M^ν_{t,T} = max_{t ≤ s ≤ T} B^ν_s`.
//!
//! Everything is built from the reflection principle combined with a
//! Girsanov change of measure. For an interior time `t < T` the Markov
//! property splits the event `{M^ν_T ≥ u}` at `t`, and the conditional
//! probability of crossing on `[t, T]` is integrated numerically against
//! the Gaussian density of `B^ν_t`.

use std::cell::RefCell;

use crate::error::{Error, Result};
use crate::quadrature::adaptive_simpson_panels;
use crate::rng_qmc::{norm_cdf, norm_pdf};

/// Absolute tolerance of the inner Gaussian integrals.
pub const INNER_TOL: f64 = 1e-9;
/// Absolute tolerance of the outer integral in [`weighted_max_expectation`].
pub const OUTER_TOL: f64 = 1e-7;
/// Half-width of the truncated Gaussian domain, in standard deviations.
const TRUNCATION: f64 = 8.0;

/// Test function `f` applied to `B^ν_t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FTag {
    One,
    Identity,
}

impl FTag {
    #[inline]
    fn eval(self, x: f64) -> f64 {
        match self {
            FTag::One => 1.0,
            FTag::Identity => x,
        }
    }
}

/// Drifted Brownian motion observed at `t` with barrier `u` on `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftedBMParams {
    pub nu: f64,
    pub t: f64,
    pub horizon: f64,
    pub barrier: f64,
}

impl DriftedBMParams {
    pub fn new(nu: f64, t: f64, horizon: f64, barrier: f64) -> Result<Self> {
        check_times(t, horizon)?;
        if !nu.is_finite() || barrier.is_nan() {
            return Err(Error::InvalidParameter("drift and barrier must be finite".into()));
        }
        Ok(Self { nu, t, horizon, barrier })
    }

    /// `E(1{M^ν_T ≥ u} f(B^ν_t))`.
    pub fn indicator_moment(&self, tag: FTag) -> Result<f64> {
        indicator_moment(self.barrier, self.nu, self.t, self.horizon, tag)
    }
}

/// Reflection coefficients for the digital barrier payoff
/// `1{max_k B^ν_{kT/n} ≥ ũ}` in the coordinates `X` of the forward
/// construction.
#[derive(Debug, Clone, PartialEq)]
pub struct BarrierCoefficients {
    /// `a_i ≈ E(h X_i)`.
    pub a: Vec<f64>,
    /// `β_i = E(1{M^ν_T ≥ ũ} B^ν_{iT/n})`.
    pub beta: Vec<f64>,
    /// `P(M^ν_T ≥ ũ)`.
    pub gamma: f64,
    pub nu: f64,
    pub log_barrier: f64,
}

fn check_times(t: f64, horizon: f64) -> Result<()> {
    if !(t > 0.0 && horizon.is_finite() && t <= horizon) {
        return Err(Error::InvalidParameter(format!("need 0 < t <= T, got t = {t}, T = {horizon}")));
    }
    Ok(())
}

/// `e^{2uν} Φ(z)` without overflow when `Φ(z)` underflows.
fn weighted_tail(two_u_nu: f64, z: f64) -> f64 {
    let p = norm_cdf(z);
    if p == 0.0 {
        0.0
    } else {
        (two_u_nu + p.ln()).exp()
    }
}

fn max_exceeds(u: f64, nu: f64, t: f64) -> f64 {
    if u <= 0.0 {
        return 1.0;
    }
    let s = t.sqrt();
    let p = norm_cdf((nu * t - u) / s) + weighted_tail(2.0 * u * nu, (-u - nu * t) / s);
    p.clamp(0.0, 1.0)
}

/// `P(M^ν_t ≥ u) = Φ((νt − u)/√t) + e^{2uν} Φ((−u − νt)/√t)`; 1 for `u ≤ 0`.
pub fn prob_max_exceeds(u: f64, nu: f64, t: f64) -> Result<f64> {
    if t.is_nan() || t <= 0.0 {
        return Err(Error::InvalidParameter(format!("time must be positive, got {t}")));
    }
    Ok(max_exceeds(u, nu, t))
}

/// Probability that `B^ν` started at `x` reaches `u` within `remaining`.
pub fn conditional_exceed_prob(u: f64, x: f64, nu: f64, remaining: f64) -> Result<f64> {
    prob_max_exceeds(u - x, nu, remaining)
}

/// Gaussian `B^ν_t ~ N(mean, sd²)` with the closed-form partial moments
/// the reflection formulas need.
#[derive(Clone, Copy)]
struct Gauss {
    mean: f64,
    sd: f64,
}

impl Gauss {
    fn density(self, x: f64) -> f64 {
        norm_pdf((x - self.mean) / self.sd) / self.sd
    }

    fn lo(self) -> f64 {
        self.mean - TRUNCATION * self.sd
    }

    fn hi(self) -> f64 {
        self.mean + TRUNCATION * self.sd
    }

    /// `E(f(B))`.
    fn full(self, tag: FTag) -> f64 {
        match tag {
            FTag::One => 1.0,
            FTag::Identity => self.mean,
        }
    }

    /// `E(1{B ≥ u} f(B))`.
    fn upper(self, u: f64, tag: FTag) -> f64 {
        let z = (self.mean - u) / self.sd;
        match tag {
            FTag::One => norm_cdf(z),
            FTag::Identity => self.mean * norm_cdf(z) + self.sd * norm_pdf(z),
        }
    }

    /// `e^{2uν} E(1{B ≤ −u} f(2u + B))`.
    fn reflected(self, u: f64, nu: f64, tag: FTag) -> f64 {
        let z = (-u - self.mean) / self.sd;
        let w = 2.0 * u * nu;
        match tag {
            FTag::One => weighted_tail(w, z),
            FTag::Identity => {
                (2.0 * u + self.mean) * weighted_tail(w, z) - self.sd * (w + norm_pdf(z).ln()).exp()
            }
        }
    }
}

/// Panel breakpoints on `[lo, hi]`, refined near `edge` where the crossing
/// probability over the remaining time `tau` changes on the scale `√tau`.
fn panels(lo: f64, hi: f64, edge: f64, tau: f64) -> Vec<f64> {
    let w = tau.sqrt();
    let mut pts = vec![lo];
    for k in [8.0, 3.0, 1.0] {
        let p = edge - k * w;
        if p > lo && p < hi {
            pts.push(p);
        }
    }
    pts.push(hi);
    pts
}

/// `∫_{lo}^{min(hi, end)} F(x) φ(x) dx` with `F` sharp near `end`.
fn integrate_below(g: Gauss, end: f64, tau: f64, f: &dyn Fn(f64) -> f64) -> Result<f64> {
    let hi = end.min(g.hi());
    if hi <= g.lo() {
        return Ok(0.0);
    }
    let integrand = |x: f64| f(x) * g.density(x);
    adaptive_simpson_panels(&integrand, &panels(g.lo(), hi, end, tau), INNER_TOL)
}

/// `E(1{M^ν_T ≥ u} f(B^ν_t))` for `0 < t ≤ T`.
///
/// With `g(u, x) = P(x + max_{s ≤ T−t}(B^ν_s) ≥ u)`, which is 1 for
/// `x ≥ u`, the expectation equals
/// `E(f g) + E(1{B ≥ u} f (1 − g)) + e^{2uν} E(1{B ≤ −u} f(2u + B)(1 − g(u, 2u + B)))`.
/// The middle term vanishes identically; the other two are integrated over
/// `x < u` and `x ≤ −u` respectively.
pub fn indicator_moment(u: f64, nu: f64, t: f64, horizon: f64, tag: FTag) -> Result<f64> {
    check_times(t, horizon)?;
    let g = Gauss { mean: nu * t, sd: t.sqrt() };
    if u <= 0.0 {
        return Ok(g.full(tag));
    }
    let tau = horizon - t;
    if tau <= 1e-14 * horizon {
        return Ok(g.upper(u, tag) + g.reflected(u, nu, tag));
    }
    let cross = |x: f64| max_exceeds(u - x, nu, tau);
    let direct = g.upper(u, tag) + integrate_below(g, u, tau, &|x| tag.eval(x) * cross(x))?;
    let body = integrate_below(g, -u, tau, &|x| tag.eval(2.0 * u + x) * (1.0 - cross(2.0 * u + x)))?;
    let mirrored = if body == 0.0 { 0.0 } else { (2.0 * u * nu).exp() * body };
    Ok(direct + mirrored)
}

/// The two terms of the split at time `t`: `E(f(B^ν_t) 1{M^ν_t ≥ u})` and
/// `E(1{M^ν_t < u} f(B^ν_t) g(u, B^ν_t))`. Their sum is
/// [`indicator_moment`].
pub fn markov_split(u: f64, nu: f64, t: f64, horizon: f64, tag: FTag) -> Result<(f64, f64)> {
    check_times(t, horizon)?;
    let g = Gauss { mean: nu * t, sd: t.sqrt() };
    if u <= 0.0 {
        return Ok((g.full(tag), 0.0));
    }
    let hit_by_t = g.upper(u, tag) + g.reflected(u, nu, tag);
    let tau = horizon - t;
    if tau <= 1e-14 * horizon {
        return Ok((hit_by_t, 0.0));
    }
    let cross = |x: f64| max_exceeds(u - x, nu, tau);
    // E(f g) over {B < u} minus its part on {M_t ≥ u, B < u}, by reflection.
    let all = integrate_below(g, u, tau, &|x| tag.eval(x) * cross(x))?;
    let reflected = integrate_below(g, -u, tau, &|x| tag.eval(2.0 * u + x) * cross(2.0 * u + x))?;
    let later = all - if reflected == 0.0 { 0.0 } else { (2.0 * u * nu).exp() * reflected };
    Ok((hit_by_t, later))
}

/// `E(h(M^ν_T) f(B^ν_t)) = ∫_0^∞ h'(u) E(1{M^ν_T ≥ u} f(B^ν_t)) du` for
/// `h(0) = 0`, truncated at `|ν| T + 10 √T`.
pub fn weighted_max_expectation(
    h_prime: &dyn Fn(f64) -> f64,
    nu: f64,
    t: f64,
    horizon: f64,
    tag: FTag,
) -> Result<f64> {
    check_times(t, horizon)?;
    let u_max = nu.abs() * horizon + 10.0 * horizon.sqrt();
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let integrand = |u: f64| {
        let d = h_prime(u);
        if d == 0.0 {
            return 0.0;
        }
        match indicator_moment(u, nu, t, horizon, tag) {
            Ok(m) => d * m,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    };
    let pts: Vec<f64> = (0..=4).map(|k| u_max * k as f64 / 4.0).collect();
    let result = adaptive_simpson_panels(&integrand, &pts, OUTER_TOL);
    match failure.into_inner() {
        Some(e) => Err(e),
        None => result,
    }
}

/// Regression coefficients of the digital barrier indicator
/// `1{max_k S_{kT/n} ≥ u_S}` with `S_t = S_0 exp((r − σ²/2)t + σ B_t)`.
///
/// Uses `ν = (r − σ²/2)/σ`, `ũ = ln(u_S/S_0)/σ` and
/// `a_i = (β_i − β_{i−1})/√(T/n) − ν √(T/n) γ` with `β_0 = 0`. The maximum
/// is taken over continuous time, which approximates the discretely
/// monitored payoff.
pub fn barrier_coefficients(
    spot: f64,
    rate: f64,
    sigma: f64,
    maturity: f64,
    steps: usize,
    barrier: f64,
) -> Result<BarrierCoefficients> {
    if !(spot > 0.0 && sigma > 0.0 && maturity > 0.0 && barrier > 0.0 && steps > 0) {
        return Err(Error::InvalidParameter(
            "spot, sigma, maturity, barrier and steps must be positive".into(),
        ));
    }
    let nu = (rate - 0.5 * sigma * sigma) / sigma;
    let log_barrier = (barrier / spot).ln() / sigma;
    let dt = maturity / steps as f64;
    let times = (1..=steps).map(|i| i as f64 * dt);
    if log_barrier <= 0.0 {
        return Ok(BarrierCoefficients {
            a: vec![0.0; steps],
            beta: times.map(|t| nu * t).collect(),
            gamma: 1.0,
            nu,
            log_barrier,
        });
    }
    let beta = times
        .map(|t| indicator_moment(log_barrier, nu, t, maturity, FTag::Identity))
        .collect::<Result<Vec<f64>>>()?;
    let gamma = max_exceeds(log_barrier, nu, maturity);
    let sq = dt.sqrt();
    let a = (0..steps)
        .map(|i| {
            let prev = if i == 0 { 0.0 } else { beta[i - 1] };
            (beta[i] - prev) / sq - nu * sq * gamma
        })
        .collect();
    Ok(BarrierCoefficients { a, beta, gamma, nu, log_barrier })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn reference_probabilities() {
        assert_eq!(prob_max_exceeds(0.0, 0.3, 2.0).unwrap(), 1.0);
        assert_eq!(prob_max_exceeds(-1.0, -0.3, 2.0).unwrap(), 1.0);
        let p = prob_max_exceeds(1.0, 0.0, 1.0).unwrap();
        assert!(close(p, 2.0 * norm_cdf(-1.0), 1e-15));
        assert!(close(p, 0.317311, 1e-6));
        assert!(close(prob_max_exceeds(1.0, 0.1, 1.0).unwrap(), 0.349763, 1e-6));
        assert!(prob_max_exceeds(1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn no_overflow_for_large_barriers() {
        let p = prob_max_exceeds(400.0, 3.0, 1.0).unwrap();
        assert!(p.is_finite() && p < 1e-100);
    }

    #[test]
    fn conditional_probability_edges() {
        assert_eq!(conditional_exceed_prob(1.0, 1.0, 0.2, 0.5).unwrap(), 1.0);
        assert!(conditional_exceed_prob(1.0, -60.0, 0.0, 1.0).unwrap() < 1e-300);
        assert!(close(conditional_exceed_prob(1.0, 0.0, 0.0, 1.0).unwrap(), 0.317311, 1e-6));
        assert!(conditional_exceed_prob(1.0, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn indicator_moment_reductions() {
        for nu in [-0.4, 0.0, 0.3] {
            let p = indicator_moment(0.7, nu, 1.5, 1.5, FTag::One).unwrap();
            assert!(close(p, prob_max_exceeds(0.7, nu, 1.5).unwrap(), 1e-15));
            assert_eq!(indicator_moment(0.0, nu, 0.5, 1.5, FTag::One).unwrap(), 1.0);
            assert!(close(indicator_moment(0.0, nu, 0.5, 1.5, FTag::Identity).unwrap(), nu * 0.5, 1e-15));
        }
        let m = indicator_moment(1.0, 0.0, 1.0, 1.0, FTag::Identity).unwrap();
        assert!(close(m, 0.317310, 2e-6));
        assert!(close(m, 2.0 * norm_cdf(-1.0), 1e-14));
    }

    #[test]
    fn interior_time_one_tag_is_horizon_probability() {
        // P(M_T ≥ u) does not depend on where f ≡ 1 is evaluated.
        for (u, nu) in [(0.5, 0.0), (1.0, 0.2), (0.3, -0.5)] {
            let expect = prob_max_exceeds(u, nu, 1.0).unwrap();
            for t in [0.01, 0.3, 0.9, 0.999] {
                let got = indicator_moment(u, nu, t, 1.0, FTag::One).unwrap();
                assert!(close(got, expect, 1e-8), "u={u} nu={nu} t={t}: {got} vs {expect}");
            }
        }
    }

    #[test]
    fn identity_moment_continuous_at_horizon() {
        let at_t = indicator_moment(1.0, 0.0, 1.0, 1.0, FTag::Identity).unwrap();
        let interior = indicator_moment(1.0, 0.0, 0.999_999, 1.0, FTag::Identity).unwrap();
        assert!(close(at_t, interior, 1e-5));
    }

    #[test]
    fn markov_split_sums_to_moment() {
        for (u, nu, t) in [(0.6, 0.1, 0.4), (1.2, -0.2, 0.8), (0.2, 0.5, 0.1)] {
            for tag in [FTag::One, FTag::Identity] {
                let (a, b) = markov_split(u, nu, t, 1.0, tag).unwrap();
                let total = indicator_moment(u, nu, t, 1.0, tag).unwrap();
                assert!(close(a + b, total, 1e-8));
                assert!(close(a, indicator_moment(u, nu, t, t, tag).unwrap(), 1e-14));
                if tag == FTag::One {
                    assert!((0.0..=1.0).contains(&a) && (-1e-9..=1.0).contains(&b));
                }
            }
        }
    }

    #[test]
    fn weighted_expectations() {
        assert_eq!(weighted_max_expectation(&|_| 0.0, 0.1, 1.0, 1.0, FTag::One).unwrap(), 0.0);
        let m1 = weighted_max_expectation(&|_| 1.0, 0.0, 1.0, 1.0, FTag::One).unwrap();
        assert!(close(m1, (2.0 / std::f64::consts::PI).sqrt(), 1e-6));
        let m2 = weighted_max_expectation(&|u| 2.0 * u, 0.0, 1.0, 1.0, FTag::One).unwrap();
        assert!(close(m2, 1.0, 1e-6));
    }

    #[test]
    fn barrier_below_spot_is_constant() {
        let c = barrier_coefficients(100.0, 0.04, 0.2, 1.0, 8, 95.0).unwrap();
        assert!(c.a.iter().all(|&v| v == 0.0));
        assert_eq!(c.gamma, 1.0);
        let c = barrier_coefficients(100.0, 0.04, 0.2, 1.0, 8, 100.0).unwrap();
        assert!(c.a.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn zero_drift_coefficients_are_differences() {
        let sigma = 0.2;
        let c = barrier_coefficients(100.0, 0.5 * sigma * sigma, sigma, 1.0, 16, 110.0).unwrap();
        assert_eq!(c.nu, 0.0);
        let sq = (1.0f64 / 16.0).sqrt();
        for i in 0..16 {
            let prev = if i == 0 { 0.0 } else { c.beta[i - 1] };
            assert!(close(c.a[i], (c.beta[i] - prev) / sq, 1e-15));
        }
    }

    #[test]
    fn barrier_coefficients_are_positive_and_finite() {
        let c = barrier_coefficients(100.0, 0.04, 0.2, 1.0, 16, 110.0).unwrap();
        assert!(c.gamma > 0.0 && c.gamma < 1.0);
        assert!(c.a.iter().all(|v| v.is_finite() && *v > 0.0));
        // earlier increments matter more for reaching the barrier
        assert!(c.a[0] > c.a[15]);
        assert!(barrier_coefficients(100.0, 0.04, 0.2, 1.0, 16, 0.0).is_err());
    }

    #[test]
    fn monotonicity_grid() {
        let us: Vec<f64> = (0..50).map(|i| i as f64 * 0.08).collect();
        let ts: Vec<f64> = (1..=50).map(|i| i as f64 * 0.04).collect();
        for nu in [-0.5, 0.0, 0.5] {
            for &t in &ts {
                let mut prev = f64::INFINITY;
                for &u in &us {
                    let p = prob_max_exceeds(u, nu, t).unwrap();
                    assert!(p <= prev + 1e-15);
                    assert!(p + 1e-15 >= norm_cdf((nu * t - u) / t.sqrt()));
                    prev = p;
                }
            }
            for &u in &us {
                let mut prev = -1.0;
                for &t in &ts {
                    let p = prob_max_exceeds(u, nu, t).unwrap();
                    assert!(p + 1e-15 >= prev);
                    prev = p;
                }
            }
        }
    }

    #[test]
    fn beta_is_continuous_in_barrier() {
        for u in [0.05, 0.3, 0.5, 1.0] {
            for t in [0.25, 0.75] {
                let b0 = indicator_moment(u, 0.1, t, 1.0, FTag::Identity).unwrap();
                let b1 = indicator_moment(u + 1e-6, 0.1, t, 1.0, FTag::Identity).unwrap();
                assert!((b0 - b1).abs() <= 1e-4);
            }
        }
    }

    #[test]
    fn one_tag_stays_in_unit_interval() {
        for u in [0.01, 0.5, 2.0] {
            for nu in [-1.0, 0.0, 1.0] {
                for t in [0.1, 0.5, 1.0] {
                    let p = indicator_moment(u, nu, t, 1.0, FTag::One).unwrap();
                    assert!((-1e-9..=1.0 + 1e-9).contains(&p));
                }
            }
        }
    }
}
