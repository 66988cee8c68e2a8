use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pricer::{Method, Pricer, PricerOptions};
use crate::error::{Error, Result};
use crate::payoffs::{GbmParams, PayoffSpec};
use crate::rng_qmc::{normals_from_bits, ShiftVector, Sobol};

/// One randomized-QMC convergence study.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub payoff: PayoffSpec,
    pub params: GbmParams,
    pub method: Method,
    pub batches: usize,
    pub log2_min: u32,
    pub log2_max: u32,
    pub seed: u64,
    pub options: PricerOptions,
    /// Run batches on the rayon pool.
    pub parallel: bool,
    /// Store wall-clock times; when false every `runtime_ms` is 0 so that
    /// output files are byte-for-byte reproducible.
    pub record_timing: bool,
}

impl ExperimentConfig {
    pub fn new(payoff: PayoffSpec, params: GbmParams, method: Method) -> Self {
        Self {
            payoff,
            params,
            method,
            batches: 32,
            log2_min: 1,
            log2_max: 14,
            seed: 0,
            options: PricerOptions::default(),
            parallel: true,
            record_timing: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.batches < 2 {
            return Err(Error::InvalidParameter("at least two batches are needed".into()));
        }
        if self.log2_min > self.log2_max || self.log2_max > 31 {
            return Err(Error::InvalidParameter(format!(
                "invalid path range 2^{}..2^{}",
                self.log2_min, self.log2_max
            )));
        }
        Ok(())
    }
}

/// Estimate of one batch from its first `paths` points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchEstimate {
    pub payoff: String,
    pub method: String,
    pub n: usize,
    #[serde(rename = "N")]
    pub paths: u64,
    pub batch: usize,
    pub estimate: f64,
    pub runtime_ms: f64,
}

/// Aggregate over batches for one path count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchStats {
    pub payoff: String,
    pub method: String,
    pub n: usize,
    #[serde(rename = "N")]
    pub paths: u64,
    pub mean: f64,
    /// Sample standard deviation of the batch estimates (divisor `b − 1`).
    pub stddev: f64,
    pub batches: usize,
}

impl BatchStats {
    /// Standard error of `mean`.
    pub fn std_error(&self) -> f64 {
        self.stddev / (self.batches as f64).sqrt()
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub rows: Vec<BatchEstimate>,
    pub stats: Vec<BatchStats>,
    /// Time spent building the transform.
    pub setup_ms: f64,
}

/// Estimates of one batch at `N = 2^log2_min .. 2^log2_max`, as prefix means
/// of a single pass over `2^log2_max` shifted Sobol points.
fn run_batch(pricer: &Pricer, sobol: &Sobol, cfg: &ExperimentConfig, batch: usize) -> Vec<(u64, f64, f64)> {
    let d = pricer.dim();
    let shift = ShiftVector::from_seed(cfg.seed, batch as u64, d);
    let mut x = vec![0.0; d];
    let mut scratch = pricer.scratch();
    let mut points = sobol.points();
    let total = 1u64 << cfg.log2_max;
    let start = Instant::now();
    let mut sum = 0.0;
    let mut out = Vec::with_capacity((cfg.log2_max - cfg.log2_min + 1) as usize);
    for i in 1..=total {
        let bits = points.next_bits().expect("path count is within the sequence length");
        normals_from_bits(bits, &shift.coords, &mut x);
        sum += pricer.evaluate(&mut x, &mut scratch);
        if i.is_power_of_two() && i >= 1 << cfg.log2_min {
            let ms = if cfg.record_timing { start.elapsed().as_secs_f64() * 1e3 } else { 0.0 };
            out.push((i, sum / i as f64, ms));
        }
    }
    out
}

/// Mean and sample standard deviation.
pub fn mean_stddev(xs: &[f64]) -> (f64, f64) {
    let k = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / k;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, (ss / (k - 1.0)).sqrt())
}

/// Groups rows by `(payoff, method, n, N)` and aggregates each group.
pub fn summarize(rows: &[BatchEstimate]) -> Vec<BatchStats> {
    let mut sorted: Vec<&BatchEstimate> = rows.iter().collect();
    sorted.sort_by(|a, b| {
        (&a.payoff, &a.method, a.n, a.paths, a.batch).cmp(&(&b.payoff, &b.method, b.n, b.paths, b.batch))
    });
    sorted
        .chunk_by(|a, b| (&a.payoff, &a.method, a.n, a.paths) == (&b.payoff, &b.method, b.n, b.paths))
        .map(|group| {
            let values: Vec<f64> = group.iter().map(|r| r.estimate).collect();
            let (mean, stddev) = mean_stddev(&values);
            let r = group[0];
            BatchStats {
                payoff: r.payoff.clone(),
                method: r.method.clone(),
                n: r.n,
                paths: r.paths,
                mean,
                stddev,
                batches: group.len(),
            }
        })
        .collect()
}

/// Sorts rows by `(payoff, method, N, batch)`.
pub fn sort_rows(rows: &mut [BatchEstimate]) {
    rows.sort_by(|a, b| (&a.payoff, &a.method, a.paths, a.batch).cmp(&(&b.payoff, &b.method, b.paths, b.batch)));
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let setup = Instant::now();
    let pricer = Pricer::new(&cfg.payoff, &cfg.params, cfg.method, cfg.options)?;
    let setup_ms = if cfg.record_timing { setup.elapsed().as_secs_f64() * 1e3 } else { 0.0 };
    let sobol = Sobol::new(pricer.dim())?;
    let per_batch: Vec<Vec<(u64, f64, f64)>> = if cfg.parallel {
        (0..cfg.batches).into_par_iter().map(|b| run_batch(&pricer, &sobol, cfg, b)).collect()
    } else {
        (0..cfg.batches).map(|b| run_batch(&pricer, &sobol, cfg, b)).collect()
    };
    let mut rows: Vec<BatchEstimate> = per_batch
        .into_iter()
        .enumerate()
        .flat_map(|(batch, points)| {
            points.into_iter().map(move |(paths, estimate, runtime_ms)| BatchEstimate {
                payoff: cfg.payoff.name().to_string(),
                method: cfg.method.name().to_string(),
                n: cfg.params.steps,
                paths,
                batch,
                estimate,
                runtime_ms,
            })
        })
        .collect();
    sort_rows(&mut rows);
    let stats = summarize(&rows);
    Ok(ExperimentResult { rows, stats, setup_ms })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_vol_batches_are_exact() {
        let params = GbmParams::new(100.0, 0.04, 0.0, 1.0, 4).unwrap();
        let mut cfg = ExperimentConfig::new(PayoffSpec::AsianCall { strike: 90.0 }, params, Method::Forward);
        cfg.batches = 2;
        cfg.log2_min = 1;
        cfg.log2_max = 1;
        let res = run_experiment(&cfg).unwrap();
        assert_eq!(res.rows.len(), 2);
        let path_mean: f64 = (1..=4).map(|k| 100.0 * (0.04 * k as f64 / 4.0).exp()).sum::<f64>() / 4.0;
        let expect = (-0.04f64).exp() * (path_mean - 90.0);
        for r in &res.rows {
            assert!((r.estimate - expect).abs() < 1e-10);
        }
        assert_eq!(res.stats.len(), 1);
        assert_eq!(res.stats[0].stddev, 0.0);
    }

    #[test]
    fn rejects_bad_configs() {
        let params = GbmParams::new(100.0, 0.04, 0.2, 1.0, 4).unwrap();
        let mut cfg = ExperimentConfig::new(PayoffSpec::AsianCall { strike: 90.0 }, params, Method::Forward);
        cfg.batches = 1;
        assert!(run_experiment(&cfg).is_err());
        cfg.batches = 2;
        cfg.log2_min = 5;
        cfg.log2_max = 4;
        assert!(run_experiment(&cfg).is_err());
    }

    #[test]
    fn prefix_estimates_cover_the_grid() {
        let params = GbmParams::new(100.0, 0.04, 0.2, 1.0, 8).unwrap();
        let mut cfg = ExperimentConfig::new(PayoffSpec::AsianCall { strike: 100.0 }, params, Method::Pca);
        cfg.batches = 3;
        cfg.log2_min = 2;
        cfg.log2_max = 6;
        let res = run_experiment(&cfg).unwrap();
        assert_eq!(res.rows.len(), 15);
        let ns: Vec<u64> = res.stats.iter().map(|s| s.paths).collect();
        assert_eq!(ns, vec![4, 8, 16, 32, 64]);
        assert!(res.stats.iter().all(|s| s.batches == 3 && s.stddev >= 0.0));
    }

    #[test]
    fn sample_stddev_uses_unbiased_divisor() {
        let (m, s) = mean_stddev(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }
}
