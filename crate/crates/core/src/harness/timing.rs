use std::time::Instant;

use serde::Serialize;

use super::pricer::{Method, Pricer, PricerOptions};
use crate::error::Result;
use crate::payoffs::{GbmParams, PayoffSpec};
use crate::rng_qmc::{normals_from_bits, ShiftVector, Sobol};
use crate::transforms::PathConstruction;

/// Median wall time of pricing with one method, setup included.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingEntry {
    pub method: String,
    pub paths: u64,
    pub median_ms: f64,
    /// Median time spent building the transform, part of `median_ms`.
    pub setup_ms: f64,
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let k = xs.len();
    if k % 2 == 1 {
        xs[k / 2]
    } else {
        0.5 * (xs[k / 2 - 1] + xs[k / 2])
    }
}

/// Builds the pricer and prices `paths` shifted Sobol points once;
/// returns `(total_ms, setup_ms, estimate)`.
fn timed_run(spec: &PayoffSpec, params: &GbmParams, method: Method, paths: u64, options: PricerOptions) -> Result<(f64, f64, f64)> {
    let start = Instant::now();
    let pricer = Pricer::new(spec, params, method, options)?;
    let setup = start.elapsed().as_secs_f64() * 1e3;
    let d = pricer.dim();
    let sobol = Sobol::new(d)?;
    let shift = ShiftVector::from_seed(0, 0, d);
    let mut points = sobol.points();
    let mut x = vec![0.0; d];
    let mut scratch = pricer.scratch();
    let mut sum = 0.0;
    for _ in 0..paths {
        let bits = points.next_bits().expect("path count is within the sequence length");
        normals_from_bits(bits, &shift.coords, &mut x);
        sum += pricer.evaluate(&mut x, &mut scratch);
    }
    Ok((start.elapsed().as_secs_f64() * 1e3, setup, sum / paths as f64))
}

/// Median of `repeats` timed runs per method. Repeats are interleaved
/// across methods so that drifting machine load affects all of them alike.
pub fn timing_report(
    spec: &PayoffSpec,
    params: &GbmParams,
    methods: &[Method],
    paths: u64,
    repeats: usize,
    options: PricerOptions,
) -> Result<Vec<TimingEntry>> {
    let mut totals = vec![Vec::with_capacity(repeats); methods.len()];
    let mut setups = vec![Vec::with_capacity(repeats); methods.len()];
    for _ in 0..repeats.max(1) {
        for (k, &m) in methods.iter().enumerate() {
            let (total, setup, estimate) = timed_run(spec, params, m, paths, options)?;
            std::hint::black_box(estimate);
            totals[k].push(total);
            setups[k].push(setup);
        }
    }
    Ok(methods
        .iter()
        .zip(totals.into_iter().zip(setups))
        .map(|(m, (t, s))| TimingEntry { method: m.name().into(), paths, median_ms: median(t), setup_ms: median(s) })
        .collect())
}

/// Median per-path time, in nanoseconds, of applying `construction` to a
/// fixed set of normal vectors.
pub fn apply_time_per_path(construction: &PathConstruction, vectors: usize, repeats: usize) -> Result<f64> {
    let n = construction.dim();
    let sobol = Sobol::new(n)?;
    let shift = ShiftVector::from_seed(1, 0, n);
    let mut inputs = vec![0.0; n * vectors];
    let mut points = sobol.points();
    for chunk in inputs.chunks_mut(n) {
        normals_from_bits(points.next_bits().expect("within sequence length"), &shift.coords, chunk);
    }
    let mut x = vec![0.0; n];
    let mut out = vec![0.0; n];
    let mut times = Vec::with_capacity(repeats);
    for _ in 0..repeats.max(1) {
        let start = Instant::now();
        for chunk in inputs.chunks(n) {
            x.copy_from_slice(chunk);
            construction.construct_in_place(&mut x, &mut out);
            std::hint::black_box(&out);
        }
        times.push(start.elapsed().as_secs_f64() * 1e9 / vectors as f64);
    }
    Ok(median(times))
}
