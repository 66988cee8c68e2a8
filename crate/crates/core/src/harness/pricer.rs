use std::fmt;
use std::str::FromStr;

use crate::brownian_max::barrier_coefficients;
use crate::error::{check_dim, Error, Result};
use crate::linalg::DenseMatrix;
use crate::lt_method::{lt_transform, AsianSmooth, LtConfig, SmoothPayoff};
use crate::payoffs::{basket_paths_into, gbm_path_into, payoff, GbmParams, PayoffSpec};
use crate::regression::{
    asian_coefficients, in_original_coordinates, regression_chain, regression_transform, RegressionVector,
};
use crate::transforms::{BasketConstruction, BasketCovSpec, BasketForward, BasketPca, PathConstruction, TransformChain};

/// Path-construction method compared by the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Forward,
    BrownianBridge,
    Pca,
    Regression,
    Lt,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Forward, Method::BrownianBridge, Method::Pca, Method::Regression, Method::Lt];

    pub fn name(self) -> &'static str {
        match self {
            Method::Forward => "forward",
            Method::BrownianBridge => "bb",
            Method::Pca => "pca",
            Method::Regression => "regression",
            Method::Lt => "lt",
        }
    }

    pub fn supports(self, payoff: &PayoffSpec) -> bool {
        match self {
            Method::Lt => !payoff.has_barrier(),
            Method::BrownianBridge => !matches!(payoff, PayoffSpec::BasketAsianCall { .. }),
            _ => true,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown method '{s}'")))
    }
}

/// Knobs that change how a method is realized but not what it computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PricerOptions {
    /// PCA through an `O(n log n)` sine transform instead of a dense product.
    pub fast_pca: bool,
    /// Optimized LT columns, capped at the dimension.
    pub lt_columns: usize,
}

impl Default for PricerOptions {
    fn default() -> Self {
        Self { fast_pca: false, lt_columns: 25 }
    }
}

/// `h(x) = Σ_{i,k} w_ik exp(Y_ik)` with `Y = C x` the forward basket
/// construction and `w_ik = S^(i)_0/(mn) exp((r − σ_i²/2) t_k)`.
pub struct BasketSmooth {
    forward: BasketForward,
    weights: Vec<f64>,
}

impl BasketSmooth {
    pub fn new(basket: &BasketCovSpec, spots: &[f64], rate: f64) -> Result<Self> {
        let forward = BasketForward::new(basket)?;
        let (m, n) = (basket.assets(), basket.steps);
        let dt = basket.dt();
        let weights = (0..m * n)
            .map(|q| {
                let (i, k) = (q / n, q % n);
                let vol = basket.vols[i];
                spots[i] / (m * n) as f64 * ((rate - 0.5 * vol * vol) * (k + 1) as f64 * dt).exp()
            })
            .collect();
        Ok(Self { forward, weights })
    }
}

impl SmoothPayoff for BasketSmooth {
    fn dim(&self) -> usize {
        self.forward.dim()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        self.forward.apply(x, &mut y);
        y.iter_mut().zip(&self.weights).for_each(|(v, w)| *v = w * v.exp());
        self.forward.apply_transpose(&y)
    }
}

/// Regression vectors `a^(k)` in the coordinates of the forward
/// construction, one per inner function of the payoff.
pub fn regression_coefficients(spec: &PayoffSpec, params: &GbmParams) -> Result<Vec<RegressionVector>> {
    let GbmParams { spot, rate, sigma, maturity, steps } = *params;
    if sigma == 0.0 && spec.has_barrier() {
        // the payoff does not depend on X
        let count = if matches!(spec, PayoffSpec::AsianUpIn { .. }) { 2 } else { 1 };
        return Ok(vec![RegressionVector::new(vec![0.0; steps]); count]);
    }
    Ok(match spec {
        PayoffSpec::AsianCall { .. } => vec![asian_coefficients(steps, spot, rate, sigma, maturity)],
        PayoffSpec::DigitalUpIn { barrier } => {
            vec![RegressionVector::new(barrier_coefficients(spot, rate, sigma, maturity, steps, *barrier)?.a)]
        }
        PayoffSpec::AsianUpIn { barrier, .. } => vec![
            RegressionVector::new(barrier_coefficients(spot, rate, sigma, maturity, steps, *barrier)?.a),
            asian_coefficients(steps, spot, rate, sigma, maturity),
        ],
        PayoffSpec::BasketAsianCall { basket, spots, .. } => {
            let forward = BasketForward::new(basket)?;
            let (m, n) = (basket.assets(), basket.steps);
            let dt = basket.dt();
            // w̄_ik = S^(i)_0/(mn) e^{r t_k}: the variance term cancels the Itô drift
            let wbar: Vec<f64> = (0..m * n)
                .map(|q| spots[q / n] / (m * n) as f64 * (rate * ((q % n) + 1) as f64 * dt).exp())
                .collect();
            vec![RegressionVector::new(forward.apply_transpose(&wbar))]
        }
    })
}

fn regression_for(spec: &PayoffSpec, params: &GbmParams) -> Result<TransformChain> {
    let vectors = regression_coefficients(spec, params)?;
    if let [single] = vectors.as_slice() {
        return Ok(regression_transform(single));
    }
    let n = vectors[0].dim();
    let providers: Vec<_> = vectors.into_iter().map(|v| in_original_coordinates(v.a)).collect();
    let refs: Vec<&crate::regression::CoefficientProvider<'_>> =
        providers.iter().map(|p| p as &crate::regression::CoefficientProvider<'_>).collect();
    regression_chain(n, &refs)
}

#[derive(Debug, Clone)]
enum Engine {
    Single(PathConstruction),
    Basket(BasketConstruction),
}

/// Discounted payoff as a function of a normal vector, for one payoff and
/// one construction method.
#[derive(Debug, Clone)]
pub struct Pricer {
    spec: PayoffSpec,
    params: GbmParams,
    method: Method,
    engine: Engine,
}

/// Per-thread buffers for [`Pricer::evaluate`].
#[derive(Debug, Clone)]
pub struct Scratch {
    path: Vec<f64>,
    assets: Vec<f64>,
}

impl Pricer {
    /// For baskets, `params` supplies the rate, maturity and steps; the
    /// per-asset spots and vols come from `spec`.
    pub fn new(spec: &PayoffSpec, params: &GbmParams, method: Method, options: PricerOptions) -> Result<Self> {
        spec.validate()?;
        if !method.supports(spec) {
            return Err(Error::UnsupportedMethod { payoff: spec.name().into(), method: method.name().into() });
        }
        let (n, t) = (params.steps, params.maturity);
        let engine = match spec {
            PayoffSpec::BasketAsianCall { basket, spots, .. } => {
                if basket.steps != n || basket.maturity != t {
                    return Err(Error::InvalidParameter("basket grid differs from model grid".into()));
                }
                Engine::Basket(match method {
                    Method::Forward => BasketConstruction::Forward(BasketForward::new(basket)?),
                    Method::Pca => BasketConstruction::Pca(BasketPca::new(basket)?),
                    Method::Regression => {
                        BasketConstruction::Chain(BasketForward::new(basket)?, regression_for(spec, params)?)
                    }
                    Method::Lt => {
                        let smooth = BasketSmooth::new(basket, spots, params.rate)?;
                        let cfg = LtConfig::new(options.lt_columns.min(basket.dim()));
                        BasketConstruction::Chain(BasketForward::new(basket)?, lt_transform(&smooth, &cfg)?.chain)
                    }
                    Method::BrownianBridge => unreachable!("rejected by Method::supports"),
                })
            }
            _ => Engine::Single(match method {
                Method::Forward => PathConstruction::forward(n, t)?,
                Method::BrownianBridge => PathConstruction::brownian_bridge(n, t)?,
                Method::Pca if options.fast_pca => PathConstruction::pca_fast(n, t)?,
                Method::Pca => PathConstruction::pca(n, t)?,
                Method::Regression => PathConstruction::chain(regression_for(spec, params)?, t)?,
                Method::Lt => {
                    let smooth = AsianSmooth::new(n, params.spot, params.rate, params.sigma, t);
                    let cfg = LtConfig::new(options.lt_columns.min(n));
                    PathConstruction::chain(lt_transform(&smooth, &cfg)?.chain, t)?
                }
            }),
        };
        Ok(Self { spec: spec.clone(), params: *params, method, engine })
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn spec(&self) -> &PayoffSpec {
        &self.spec
    }

    /// Number of normal inputs per path.
    pub fn dim(&self) -> usize {
        match &self.engine {
            Engine::Single(c) => c.dim(),
            Engine::Basket(c) => c.dim(),
        }
    }

    pub fn scratch(&self) -> Scratch {
        let d = self.dim();
        Scratch { path: vec![0.0; d], assets: vec![0.0; d] }
    }

    /// Discounted payoff for the normal vector `x`, which is overwritten.
    #[inline]
    pub fn evaluate(&self, x: &mut [f64], scratch: &mut Scratch) -> f64 {
        match (&self.engine, &self.spec) {
            (Engine::Single(c), _) => {
                c.construct_in_place(x, &mut scratch.path);
                gbm_path_into(&self.params, &scratch.path, &mut scratch.assets);
            }
            (Engine::Basket(c), PayoffSpec::BasketAsianCall { basket, spots, .. }) => {
                c.construct_in_place(x, &mut scratch.path);
                basket_paths_into(self.params.rate, basket, spots, &scratch.path, &mut scratch.assets);
            }
            (Engine::Basket(_), _) => unreachable!("basket engine is only built for basket payoffs"),
        }
        payoff(&self.spec, &self.params, &scratch.assets)
    }

    /// Checked variant of [`Self::evaluate`].
    pub fn price_path(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        let mut buf = x.to_vec();
        let mut scratch = self.scratch();
        Ok(self.evaluate(&mut buf, &mut scratch))
    }

    /// Materialized linear map from normals to the (scaled) Brownian values.
    pub fn construction_matrix(&self) -> DenseMatrix {
        match &self.engine {
            Engine::Single(c) => c.matrix(),
            Engine::Basket(c) => c.matrix(),
        }
    }
}
