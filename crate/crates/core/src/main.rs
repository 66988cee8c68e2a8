use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use orthoqmc::harness::{
    apply_time_per_path, default_basket, regression_coefficients, run_experiment, residual_grid, timing_report, write_csv,
    write_summary, write_summary_csv, ExperimentConfig, Method, PricerOptions,
};
use orthoqmc::payoffs::{GbmParams, PayoffSpec};
use orthoqmc::regression::regression_transform;
use orthoqmc::transforms::PathConstruction;
use orthoqmc::{Error, Result};

#[derive(Parser)]
#[command(name = "orthoqmc", version, about = "Quasi-Monte Carlo option pricing with fast orthogonal transforms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Price one payoff at a single path count.
    Price(PriceArgs),
    /// Batch standard deviations over a grid of path counts.
    Convergence(ConvergenceArgs),
    /// Residual variance fractions of the Asian average.
    Table1(ResidualGridArgs),
    /// Wall times per construction method.
    Timing(TimingArgs),
    /// Print the regression vectors of a payoff.
    Coeffs(ModelArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PayoffArg {
    Asian,
    Basket,
    DigitalBarrier,
    AsianBarrier,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Forward,
    Bb,
    Pca,
    Regression,
    Lt,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Forward => Method::Forward,
            MethodArg::Bb => Method::BrownianBridge,
            MethodArg::Pca => Method::Pca,
            MethodArg::Regression => Method::Regression,
            MethodArg::Lt => Method::Lt,
        }
    }
}

#[derive(Args, Clone)]
struct ModelArgs {
    #[arg(long, value_enum)]
    payoff: PayoffArg,
    /// Time steps per asset [default: 64, or the full-size value with --full-scale].
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 100.0)]
    s0: f64,
    #[arg(long, default_value_t = 100.0)]
    strike: f64,
    #[arg(long, default_value_t = 0.04)]
    rate: f64,
    #[arg(long, default_value_t = 0.2)]
    sigma: f64,
    #[arg(long, default_value_t = 1.0)]
    maturity: f64,
    #[arg(long, default_value_t = 110.0)]
    barrier: f64,
    #[arg(long, default_value_t = 10)]
    assets: usize,
    #[arg(long, default_value_t = 0.05)]
    rho: f64,
    #[arg(long, default_value_t = 0.1)]
    sigma_min: f64,
    #[arg(long, default_value_t = 0.3)]
    sigma_max: f64,
    /// Full-size dimensions (250, 250 x 10 assets, 2000, 1000) and sine-transform PCA.
    #[arg(long)]
    full_scale: bool,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_enum)]
    method: MethodArg,
    #[arg(long, default_value_t = 32)]
    batches: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Raw per-batch CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Summary CSV; printed to stdout when neither output path is given.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Write 0 in runtime_ms so that output is reproducible byte for byte.
    #[arg(long)]
    no_timing: bool,
    /// Run batches one after another instead of on the thread pool.
    #[arg(long)]
    sequential: bool,
    /// PCA through a sine transform instead of a dense product.
    #[arg(long)]
    fast_pca: bool,
    #[arg(long, default_value_t = 25)]
    lt_columns: usize,
}

#[derive(Args)]
struct PriceArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Number of paths per batch, a power of two.
    #[arg(long, default_value_t = 4096)]
    paths: u64,
}

#[derive(Args)]
struct ConvergenceArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, default_value_t = 1)]
    log2_min: u32,
    #[arg(long, default_value_t = 14)]
    log2_max: u32,
}

#[derive(Args)]
struct ResidualGridArgs {
    /// Time steps of the exact sums.
    #[arg(long, default_value_t = 4096)]
    n: usize,
}

#[derive(Args)]
struct TimingArgs {
    #[arg(long, default_value_t = 250)]
    n: usize,
    #[arg(long, default_value_t = 16384)]
    paths: u64,
    #[arg(long, default_value_t = 5)]
    repeats: usize,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "forward,regression,pca,lt")]
    methods: Vec<MethodArg>,
    #[arg(long, default_value_t = 25)]
    lt_columns: usize,
    /// Also report the per-path cost ratio of the regression construction
    /// between this many steps and twice as many.
    #[arg(long)]
    doubling_from: Option<usize>,
}

fn build_model(m: &ModelArgs) -> Result<(PayoffSpec, GbmParams)> {
    let full_n = match m.payoff {
        PayoffArg::Asian | PayoffArg::Basket => 250,
        PayoffArg::DigitalBarrier => 2000,
        PayoffArg::AsianBarrier => 1000,
    };
    let n = m.n.unwrap_or(if m.full_scale { full_n } else { 64 });
    let params = GbmParams::new(m.s0, m.rate, m.sigma, m.maturity, n)?;
    let spec = match m.payoff {
        PayoffArg::Asian => PayoffSpec::AsianCall { strike: m.strike },
        PayoffArg::DigitalBarrier => PayoffSpec::DigitalUpIn { barrier: m.barrier },
        PayoffArg::AsianBarrier => PayoffSpec::AsianUpIn { barrier: m.barrier, strike: m.strike },
        PayoffArg::Basket => PayoffSpec::BasketAsianCall {
            strike: m.strike,
            basket: default_basket(n, m.maturity, m.assets, m.sigma_min, m.sigma_max, m.rho)?,
            spots: vec![m.s0; m.assets],
        },
    };
    spec.validate()?;
    Ok((spec, params))
}

fn run(args: &RunArgs, log2_min: u32, log2_max: u32) -> Result<()> {
    let (payoff, params) = build_model(&args.model)?;
    let mut cfg = ExperimentConfig::new(payoff, params, args.method.into());
    cfg.batches = args.batches;
    cfg.log2_min = log2_min;
    cfg.log2_max = log2_max;
    cfg.seed = args.seed;
    cfg.parallel = !args.sequential;
    cfg.record_timing = !args.no_timing;
    cfg.options = PricerOptions { fast_pca: args.fast_pca || args.model.full_scale, lt_columns: args.lt_columns };
    let result = run_experiment(&cfg)?;
    if let Some(path) = &args.out {
        write_csv(&result.rows, path)?;
    }
    if let Some(path) = &args.summary {
        write_summary_csv(&result.stats, path)?;
    }
    if args.out.is_none() && args.summary.is_none() {
        write_summary(io::stdout().lock(), &result.stats)?;
    }
    if cfg.record_timing {
        eprintln!("setup_ms={:.3}", result.setup_ms);
    }
    Ok(())
}

fn print_residual_grid(args: &ResidualGridArgs) -> Result<()> {
    let mut out = io::stdout().lock();
    writeln!(out, "r,sigma2,discrete,continuum")?;
    for e in residual_grid(args.n)? {
        writeln!(out, "{},{},{:.4},{:.4}", e.rate, e.sigma2, e.discrete, e.continuum)?;
    }
    Ok(())
}

fn print_timing(args: &TimingArgs) -> Result<()> {
    let params = GbmParams::new(100.0, 0.04, 0.2, 1.0, args.n)?;
    let spec = PayoffSpec::AsianCall { strike: 100.0 };
    let methods: Vec<Method> = args.methods.iter().map(|&m| m.into()).collect();
    let options = PricerOptions { fast_pca: false, lt_columns: args.lt_columns };
    let report = timing_report(&spec, &params, &methods, args.paths, args.repeats, options)?;
    let mut out = io::stdout().lock();
    writeln!(out, "method,n,N,median_ms,setup_ms")?;
    for e in &report {
        writeln!(out, "{},{},{},{:.3},{:.3}", e.method, args.n, e.paths, e.median_ms, e.setup_ms)?;
    }
    if let Some(n) = args.doubling_from {
        let per_path = |steps: usize| -> Result<f64> {
            let p = GbmParams::new(100.0, 0.04, 0.2, 1.0, steps)?;
            let a = &regression_coefficients(&spec, &p)?[0];
            let construction = PathConstruction::chain(regression_transform(a), 1.0)?;
            apply_time_per_path(&construction, 256, args.repeats)
        };
        let (t1, t2) = (per_path(n)?, per_path(2 * n)?);
        writeln!(out, "regression apply ns/path: n={n} {t1:.1}, n={} {t2:.1}, ratio {:.3}", 2 * n, t2 / t1)?;
    }
    Ok(())
}

fn print_coeffs(m: &ModelArgs) -> Result<()> {
    let (spec, params) = build_model(m)?;
    let mut out = io::stdout().lock();
    writeln!(out, "vector,index,a")?;
    for (k, v) in regression_coefficients(&spec, &params)?.iter().enumerate() {
        for (i, a) in v.a.iter().enumerate() {
            writeln!(out, "{},{},{:e}", k + 1, i + 1, a)?;
        }
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidParameter(_) | Error::DimensionMismatch { .. } | Error::UnsupportedDimension { .. } => 2,
        Error::UnsupportedMethod { .. } => 3,
        Error::Io(_) | Error::Csv(_) => 1,
        _ => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Price(a) => {
            if !a.paths.is_power_of_two() {
                Err(Error::InvalidParameter(format!("--paths must be a power of two, got {}", a.paths)))
            } else {
                let k = a.paths.trailing_zeros();
                run(&a.run, k, k)
            }
        }
        Command::Convergence(a) => run(&a.run, a.log2_min, a.log2_max),
        Command::Table1(a) => print_residual_grid(a),
        Command::Timing(a) => print_timing(a),
        Command::Coeffs(m) => print_coeffs(m),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
