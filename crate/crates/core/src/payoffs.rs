//! Black–Scholes asset paths and the discounted payoffs priced by the
//! harness.

use crate::error::{check_dim, Error, Result};
use crate::transforms::BasketCovSpec;

/// Single-asset Black–Scholes model sampled at `kT/n`, `k = 1..n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GbmParams {
    pub spot: f64,
    pub rate: f64,
    pub sigma: f64,
    pub maturity: f64,
    pub steps: usize,
}

impl GbmParams {
    pub fn new(spot: f64, rate: f64, sigma: f64, maturity: f64, steps: usize) -> Result<Self> {
        let positive = |v: f64| v > 0.0;
        if !positive(spot) || sigma.is_nan() || sigma < 0.0 || !positive(maturity) || steps == 0 || !rate.is_finite() {
            return Err(Error::InvalidParameter(
                "need spot > 0, sigma >= 0, maturity > 0, steps >= 1 and a finite rate".into(),
            ));
        }
        Ok(Self { spot, rate, sigma, maturity, steps })
    }

    pub fn dt(&self) -> f64 {
        self.maturity / self.steps as f64
    }

    /// `e^{-rT}`.
    pub fn discount(&self) -> f64 {
        (-self.rate * self.maturity).exp()
    }
}

/// Payoff functionals. Every variant is discounted by `e^{-rT}`.
#[derive(Debug, Clone, PartialEq)]
pub enum PayoffSpec {
    /// `max(mean_k S_k − K, 0)`.
    AsianCall { strike: f64 },
    /// `max(mean_{i,k} S^(i)_k − K, 0)`.
    BasketAsianCall { strike: f64, basket: BasketCovSpec, spots: Vec<f64> },
    /// `1{max_k S_k ≥ u}`.
    DigitalUpIn { barrier: f64 },
    /// `1{max_k S_k ≥ u} max(mean_k S_k − K, 0)`.
    AsianUpIn { barrier: f64, strike: f64 },
}

impl PayoffSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            Self::AsianCall { strike } => *strike >= 0.0,
            Self::BasketAsianCall { strike, basket, spots } => {
                check_dim(basket.assets(), spots.len())?;
                *strike >= 0.0 && spots.iter().all(|s| *s > 0.0)
            }
            Self::DigitalUpIn { barrier } => *barrier > 0.0,
            Self::AsianUpIn { barrier, strike } => *barrier > 0.0 && *strike >= 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid payoff parameters: {self:?}")))
        }
    }

    /// Short name used in CSV output.
    pub fn name(&self) -> &'static str {
        match self {
            Self::AsianCall { .. } => "asian",
            Self::BasketAsianCall { .. } => "basket",
            Self::DigitalUpIn { .. } => "digital-barrier",
            Self::AsianUpIn { .. } => "asian-barrier",
        }
    }

    /// Number of normal inputs for `steps` time points.
    pub fn dim(&self, steps: usize) -> usize {
        match self {
            Self::BasketAsianCall { basket, .. } => basket.dim(),
            _ => steps,
        }
    }

    pub fn has_barrier(&self) -> bool {
        matches!(self, Self::DigitalUpIn { .. } | Self::AsianUpIn { .. })
    }
}

/// `S_k = S_0 exp((r − σ²/2) kT/n + σ B_{kT/n})`, written into `out`.
pub fn gbm_path_into(params: &GbmParams, brownian: &[f64], out: &mut [f64]) {
    let drift = (params.rate - 0.5 * params.sigma * params.sigma) * params.dt();
    for (k, (s, b)) in out.iter_mut().zip(brownian).enumerate() {
        *s = params.spot * (drift * (k + 1) as f64 + params.sigma * b).exp();
    }
}

pub fn gbm_path(params: &GbmParams, brownian: &[f64]) -> Result<Vec<f64>> {
    check_dim(params.steps, brownian.len())?;
    let mut out = vec![0.0; params.steps];
    gbm_path_into(params, brownian, &mut out);
    Ok(out)
}

/// Basket asset paths from asset-major `σ_i B^(i)` values:
/// `S^(i)_k = S^(i)_0 exp((r − σ_i²/2) kT/n + σ_i B^(i)_{kT/n})`.
pub fn basket_paths_into(rate: f64, basket: &BasketCovSpec, spots: &[f64], scaled: &[f64], out: &mut [f64]) {
    let n = basket.steps;
    let dt = basket.dt();
    for (i, (&s0, &vol)) in spots.iter().zip(&basket.vols).enumerate() {
        let drift = (rate - 0.5 * vol * vol) * dt;
        let row = i * n..(i + 1) * n;
        for (k, (s, y)) in out[row.clone()].iter_mut().zip(&scaled[row]).enumerate() {
            *s = s0 * (drift * (k + 1) as f64 + y).exp();
        }
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn hits(path: &[f64], barrier: f64) -> bool {
    path.iter().any(|&s| s >= barrier)
}

/// Discounted payoff of `spec` on asset `paths` (asset-major for baskets).
pub fn payoff(spec: &PayoffSpec, params: &GbmParams, paths: &[f64]) -> f64 {
    let undiscounted = match spec {
        PayoffSpec::AsianCall { strike } | PayoffSpec::BasketAsianCall { strike, .. } => {
            (mean(paths) - strike).max(0.0)
        }
        PayoffSpec::DigitalUpIn { barrier } => {
            if hits(paths, *barrier) {
                1.0
            } else {
                0.0
            }
        }
        PayoffSpec::AsianUpIn { barrier, strike } => {
            if hits(paths, *barrier) {
                (mean(paths) - strike).max(0.0)
            } else {
                0.0
            }
        }
    };
    params.discount() * undiscounted
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng_qmc::{normal_vector, ShiftVector};
    use crate::transforms::PathConstruction;
    use proptest::prelude::*;

    fn params() -> GbmParams {
        GbmParams::new(100.0, 0.04, 0.2, 1.0, 8).unwrap()
    }

    #[test]
    fn zero_brownian_gives_drift_path() {
        let p = params();
        let s = gbm_path(&p, &[0.0; 8]).unwrap();
        for (k, v) in s.iter().enumerate() {
            let expect = 100.0 * ((0.04 - 0.02) * (k + 1) as f64 / 8.0).exp();
            assert!((v - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_vol_ignores_brownian() {
        let p = GbmParams::new(50.0, 0.03, 0.0, 2.0, 4).unwrap();
        let a = gbm_path(&p, &[1.0, -3.0, 2.0, 7.0]).unwrap();
        let b = gbm_path(&p, &[0.0; 4]).unwrap();
        assert_eq!(a, b);
        assert!((a[3] - 50.0 * 0.06f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn invalid_params() {
        assert!(GbmParams::new(0.0, 0.0, 0.2, 1.0, 1).is_err());
        assert!(GbmParams::new(1.0, 0.0, -0.2, 1.0, 1).is_err());
        assert!(GbmParams::new(1.0, 0.0, 0.2, 1.0, 0).is_err());
        assert!(gbm_path(&params(), &[0.0; 3]).is_err());
        assert!(PayoffSpec::DigitalUpIn { barrier: 0.0 }.validate().is_err());
    }

    #[test]
    fn discounted_terminal_price_is_martingale() {
        let p = GbmParams::new(100.0, 0.04, 0.2, 1.0, 16).unwrap();
        let cons = PathConstruction::forward(16, 1.0).unwrap();
        let shift = ShiftVector::from_seed(7, 0, 16);
        let m = 1 << 16;
        let (mut s1, mut s2) = (0.0, 0.0);
        for i in 0..m {
            let x = normal_vector(i, &shift, 16).unwrap();
            let b = cons.construct(&x.values).unwrap();
            let v = p.discount() * gbm_path(&p, &b).unwrap()[15];
            s1 += v;
            s2 += v * v;
        }
        let mean = s1 / m as f64;
        let se = ((s2 / m as f64 - mean * mean) / m as f64).sqrt();
        assert!((mean - 100.0).abs() <= 3.0 * se + 1e-9, "{mean} ± {se}");
    }

    #[test]
    fn zero_strike_asian_is_discounted_average() {
        let p = params();
        let path = [90.0, 100.0, 110.0, 120.0, 80.0, 100.0, 100.0, 100.0];
        let v = payoff(&PayoffSpec::AsianCall { strike: 0.0 }, &p, &path);
        assert!((v - p.discount() * 100.0).abs() < 1e-12);
    }

    #[test]
    fn low_barrier_pays_immediately() {
        let p = params();
        let dt: f64 = p.dt();
        let safe = p.spot * ((p.rate - 0.5 * p.sigma * p.sigma) * dt - 6.0 * p.sigma * dt.sqrt()).exp();
        let path = gbm_path(&p, &[-0.1, 0.3, 0.0, -0.2, 0.1, 0.4, 0.2, 0.0]).unwrap();
        let d = payoff(&PayoffSpec::DigitalUpIn { barrier: safe }, &p, &path);
        assert_eq!(d, p.discount());
        let a = payoff(&PayoffSpec::AsianUpIn { barrier: safe, strike: 95.0 }, &p, &path);
        assert_eq!(a, payoff(&PayoffSpec::AsianCall { strike: 95.0 }, &p, &path));
    }

    #[test]
    fn basket_zero_brownian_gives_drift_paths() {
        let basket = BasketCovSpec::equicorrelated(3, 1.0, vec![0.1, 0.3], 0.05).unwrap();
        let mut out = vec![0.0; 6];
        basket_paths_into(0.04, &basket, &[100.0, 50.0], &[0.0; 6], &mut out);
        assert!((out[2] - 100.0 * (0.04f64 - 0.005).exp()).abs() < 1e-12);
        assert!((out[5] - 50.0 * (0.04f64 - 0.045).exp()).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn barrier_payoffs_are_bounded(
            b in proptest::collection::vec(-3.0f64..3.0, 8),
            u in 80.0f64..140.0,
            du in 0.0f64..20.0,
            k in 60.0f64..140.0,
        ) {
            let p = params();
            let path = gbm_path(&p, &b).unwrap();
            let up_in = payoff(&PayoffSpec::AsianUpIn { barrier: u, strike: k }, &p, &path);
            let call = payoff(&PayoffSpec::AsianCall { strike: k }, &p, &path);
            prop_assert!(up_in <= call);
            let d_low = payoff(&PayoffSpec::DigitalUpIn { barrier: u }, &p, &path);
            let d_high = payoff(&PayoffSpec::DigitalUpIn { barrier: u + du }, &p, &path);
            prop_assert!(d_high <= d_low);
            prop_assert!(d_low == 0.0 || d_low == p.discount());
        }
    }
}
