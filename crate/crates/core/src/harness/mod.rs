//! Experiment runner: batched randomized-QMC pricing, CSV output, the
//! residual-variance table and timing reports.

mod csv_io;
mod experiment;
mod pricer;
mod timing;

pub use csv_io::{
    read_csv, read_summary_csv, write_csv, write_rows, write_summary, write_summary_csv, RAW_HEADER, SUMMARY_HEADER,
};
pub use experiment::{
    mean_stddev, run_experiment, sort_rows, summarize, BatchEstimate, BatchStats, ExperimentConfig, ExperimentResult,
};
pub use pricer::{regression_coefficients, BasketSmooth, Method, Pricer, PricerOptions, Scratch};
pub use timing::{apply_time_per_path, timing_report, TimingEntry};

use crate::error::Result;
use crate::regression::{asian_variance_report, variance_report_continuum};
use crate::transforms::BasketCovSpec;

/// Rates and squared volatilities of the residual-variance grid.
pub const GRID_RATES: [f64; 3] = [0.1, 0.2, 0.3];
pub const GRID_VARIANCES: [f64; 4] = [0.01, 0.02, 0.03, 0.04];

/// Share of the variance of the Asian average left after removing its best
/// linear approximation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualGridEntry {
    pub rate: f64,
    pub sigma2: f64,
    pub discrete: f64,
    pub continuum: f64,
}

/// Residual fractions at `T = 1` by exact sums over `steps` time points and
/// by the continuum formulas.
pub fn residual_grid(steps: usize) -> Result<Vec<ResidualGridEntry>> {
    let mut out = Vec::with_capacity(GRID_RATES.len() * GRID_VARIANCES.len());
    for rate in GRID_RATES {
        for sigma2 in GRID_VARIANCES {
            let sigma = sigma2.sqrt();
            out.push(ResidualGridEntry {
                rate,
                sigma2,
                discrete: asian_variance_report(steps, rate, sigma, 1.0).residual_fraction,
                continuum: variance_report_continuum(rate, sigma, 1.0)?.residual_fraction,
            });
        }
    }
    Ok(out)
}

/// `count` volatilities equally spaced on `[low, high]`.
pub fn spaced_vols(count: usize, low: f64, high: f64) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![low],
        _ => (0..count).map(|i| low + (high - low) * i as f64 / (count - 1) as f64).collect(),
    }
}

/// Equicorrelated basket with equally spaced volatilities.
pub fn default_basket(steps: usize, maturity: f64, assets: usize, low: f64, high: f64, rho: f64) -> Result<BasketCovSpec> {
    BasketCovSpec::equicorrelated(steps, maturity, spaced_vols(assets, low, high), rho)
}
