//! `rffd` command-line front end.
//!
//! Every subcommand wraps one library operation: quick estimator and oracle
//! queries print plain `name value` lines, report-shaped results print as
//! pretty JSON, and the study runners write `BASE.json` + `BASE.csv`
//! atomically and print a summary table. Output is byte-identical for
//! identical argv and seeds.
//!
//! Exit codes: 0 success, 2 usage (bad flags, inconsistent dimensions,
//! unsupported measure/operation combinations), 1 runtime failure (I/O,
//! quadrature breakdown). Failures print `{"error":{"kind":...,
//! "message":...}}` on stderr.

use clap::{Args, Parser, Subcommand, ValueEnum};
use rffd::bounds::{lr_bound, required_m, uniform_bound, BoundInputs};
use rffd::harness::{
    atomic_write, save_json, DiameterStudyConfig, RateStudyConfig, ValidationConfig,
};
use rffd::{
    appendix_k, approx_derivative_at_difference, diameter_study, rate_study, validate_bound,
    GridSpec, KernelOracle, Method, MultiIndex, SpectralMeasure,
};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "rffd",
    version,
    about = "Random Fourier feature approximation of kernel derivatives",
    propagate_version = true
)]
struct Cli {
    /// Worker threads for study trials (default: RFFD_THREADS, then all
    /// cores). Thread count never changes results, only wall time.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte-Carlo estimate of a kernel derivative at a point pair
    Approx(ApproxArgs),
    /// Exact kernel derivative from the oracle
    Exact(ExactArgs),
    /// Check the moment-growth condition for a candidate constant K
    Bernstein(BernsteinArgs),
    /// Certified moment-growth constant for a generalized Gaussian marginal
    AppendixK(AppendixKArgs),
    /// Evaluate the finite-sample uniform error bound
    Bound(BoundArgs),
    /// Sweep the feature count m and fit the error decay rate
    RateStudy(RateStudyArgs),
    /// Sweep the evaluation-domain diameter at fixed m
    DiameterStudy(DiameterStudyArgs),
    /// Empirically validate the bound's failure probability
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MeasureKind {
    /// Product of Gaussian marginals with bandwidth --sigma
    Gaussian,
    /// Product of generalized Gaussian marginals with exponent --ell
    Gengauss,
}

#[derive(Args)]
struct MeasureArgs {
    /// Marginal family for an iid product measure
    #[arg(long, value_enum, default_value = "gaussian")]
    measure: MeasureKind,

    /// Gaussian marginal bandwidth
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,

    /// Generalized Gaussian exponent (density proportional to
    /// exp(-w^(2 ell)))
    #[arg(long, default_value_t = 1)]
    ell: u32,

    /// Number of coordinates
    #[arg(long = "d", default_value_t = 1)]
    d: usize,

    /// JSON measure descriptor file; overrides the inline measure flags
    #[arg(long, conflicts_with_all = ["measure", "sigma", "ell", "d"])]
    measure_file: Option<PathBuf>,
}

impl MeasureArgs {
    fn build(&self) -> rffd::Result<SpectralMeasure> {
        if let Some(path) = &self.measure_file {
            let text = std::fs::read_to_string(path)?;
            return SpectralMeasure::from_descriptor_json(&text);
        }
        match self.measure {
            MeasureKind::Gaussian => SpectralMeasure::gaussian(self.sigma, self.d),
            MeasureKind::Gengauss => SpectralMeasure::generalized_gaussian(self.ell, self.d),
        }
    }
}

fn parse_multi_index(s: &str) -> Result<MultiIndex, String> {
    s.parse().map_err(|e: rffd::Error| e.to_string())
}

#[derive(Args)]
struct ApproxArgs {
    #[command(flatten)]
    measure: MeasureArgs,
    /// Derivative orders toward x, as a comma list (e.g. 1,0)
    #[arg(long, value_parser = parse_multi_index)]
    p: MultiIndex,
    /// Derivative orders toward y
    #[arg(long, value_parser = parse_multi_index)]
    q: MultiIndex,
    /// First point, comma-separated coordinates
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    x: Vec<f64>,
    /// Second point
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    y: Vec<f64>,
    /// Number of random frequencies
    #[arg(long)]
    m: usize,
    /// Sampling seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    /// Closed form when every marginal admits one, else quadrature
    Auto,
    /// Analytic closed form (Gaussian marginals only)
    ClosedForm,
    /// Adaptive numerical integration
    Quadrature,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Auto => Method::Auto,
            MethodArg::ClosedForm => Method::ClosedForm,
            MethodArg::Quadrature => Method::Quadrature,
        }
    }
}

#[derive(Args)]
struct ExactArgs {
    #[command(flatten)]
    measure: MeasureArgs,
    #[arg(long, value_parser = parse_multi_index)]
    p: MultiIndex,
    #[arg(long, value_parser = parse_multi_index)]
    q: MultiIndex,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    x: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    y: Vec<f64>,
    /// Oracle backend
    #[arg(long, value_enum, default_value = "auto")]
    method: MethodArg,
}

#[derive(Args)]
struct BernsteinArgs {
    #[command(flatten)]
    measure: MeasureArgs,
    /// Derivative order whose moment sequence is checked
    #[arg(long)]
    r: u32,
    /// Candidate growth constant (must be >= 1)
    #[arg(long = "K")]
    k: f64,
    /// Largest moment order checked
    #[arg(long, default_value_t = 30)]
    n_max: u32,
}

#[derive(Args)]
struct AppendixKArgs {
    /// Generalized Gaussian exponent
    #[arg(long)]
    ell: u32,
    /// Derivative order (must satisfy r <= 2 ell)
    #[arg(long)]
    r: u32,
}

#[derive(Args)]
struct BoundArgs {
    #[command(flatten)]
    measure: MeasureArgs,
    #[arg(long, value_parser = parse_multi_index)]
    p: MultiIndex,
    #[arg(long, value_parser = parse_multi_index)]
    q: MultiIndex,
    /// Number of random frequencies
    #[arg(long)]
    m: u64,
    /// Diameter of the evaluation domain
    #[arg(long)]
    diam: f64,
    /// Confidence parameter; the bound fails with probability 2 exp(-t)
    #[arg(long)]
    t: f64,
    /// Moment-growth constant override (default: certified from the
    /// measure and orders)
    #[arg(long = "K")]
    k: Option<f64>,
    /// Report the L^r-norm variant instead of the sup-norm bound
    #[arg(long)]
    lr: Option<f64>,
    /// Also print the smallest m whose bound meets this target error
    #[arg(long)]
    target: Option<f64>,
}

#[derive(Args)]
struct RateStudyArgs {
    #[command(flatten)]
    measure: MeasureArgs,
    #[arg(long, value_parser = parse_multi_index)]
    p: MultiIndex,
    #[arg(long, value_parser = parse_multi_index)]
    q: MultiIndex,
    /// Evaluation-domain diameter
    #[arg(long, default_value_t = 1.0)]
    diam: f64,
    /// Grid points per axis (odd; default 2001 for d=1, 101 for d=2)
    #[arg(long)]
    points: Option<usize>,
    /// Feature counts to sweep, comma-separated
    #[arg(long, value_delimiter = ',', required = true)]
    m_values: Vec<u64>,
    #[arg(long, default_value_t = 50)]
    trials: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output base path; writes BASE.json and BASE.csv
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DiameterStudyArgs {
    #[command(flatten)]
    measure: MeasureArgs,
    #[arg(long, value_parser = parse_multi_index)]
    p: MultiIndex,
    #[arg(long, value_parser = parse_multi_index)]
    q: MultiIndex,
    /// Number of random frequencies per trial
    #[arg(long)]
    m: u64,
    /// Diameters to sweep, comma-separated and strictly increasing
    #[arg(long, value_delimiter = ',', required = true)]
    diameters: Vec<f64>,
    #[arg(long, default_value_t = 30)]
    trials: u32,
    /// Grid points per axis (odd; default 2001 for d=1, 101 for d=2)
    #[arg(long)]
    points: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output base path; writes BASE.json and BASE.csv
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    measure: MeasureArgs,
    #[arg(long, value_parser = parse_multi_index)]
    p: MultiIndex,
    #[arg(long, value_parser = parse_multi_index)]
    q: MultiIndex,
    #[arg(long, default_value_t = 1.0)]
    diam: f64,
    /// Grid points per axis (odd; default 2001 for d=1, 101 for d=2)
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    m: u64,
    /// Confidence parameter; nominal failure probability is 2 exp(-t)
    #[arg(long, default_value_t = 3.0)]
    t: f64,
    #[arg(long, default_value_t = 200)]
    trials: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output base path; writes BASE.json and BASE.csv
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_threads(cli.threads);
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!(
                "{}",
                serde_json::json!({ "error": { "kind": kind(&e), "message": e.to_string() } })
            );
            ExitCode::from(exit_code(&e))
        }
    }
}

fn init_threads(flag: Option<usize>) {
    let n = flag.or_else(|| {
        std::env::var("RFFD_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = n.filter(|&n| n > 0) {
        // Only fails if a global pool already exists, in which case that
        // pool's size wins; results are identical either way.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn kind(e: &rffd::Error) -> &'static str {
    use rffd::Error::*;
    match e {
        InvalidArgument(_) => "invalid_argument",
        DimensionMismatch { .. } => "dimension_mismatch",
        UnsupportedDimension(_) => "unsupported_dimension",
        OutOfScopeOrder { .. } => "out_of_scope_order",
        NoCertifiedConstant(_) => "no_certified_constant",
        NumericFailure(_) => "numeric_failure",
        Unreachable(_) => "unreachable",
        Parse(_) => "parse",
        SchemaVersion { .. } => "schema_version",
        Io(_) => "io",
    }
}

/// Usage-class errors (rejected inputs) exit 2 like flag parse errors;
/// runtime failures (I/O, numerics) exit 1.
fn exit_code(e: &rffd::Error) -> u8 {
    use rffd::Error::*;
    match e {
        InvalidArgument(_) | DimensionMismatch { .. } | UnsupportedDimension(_)
        | OutOfScopeOrder { .. } | NoCertifiedConstant(_) | Parse(_) => 2,
        NumericFailure(_) | Unreachable(_) | SchemaVersion { .. } | Io(_) => 1,
    }
}

fn run(command: Command) -> rffd::Result<()> {
    match command {
        Command::Approx(args) => cmd_approx(args),
        Command::Exact(args) => cmd_exact(args),
        Command::Bernstein(args) => cmd_bernstein(args),
        Command::AppendixK(args) => cmd_appendix_k(args),
        Command::Bound(args) => cmd_bound(args),
        Command::RateStudy(args) => cmd_rate_study(args),
        Command::DiameterStudy(args) => cmd_diameter_study(args),
        Command::Validate(args) => cmd_validate(args),
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> rffd::Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| rffd::Error::Parse(format!("serialize: {e}")))?;
    println!("{text}");
    Ok(())
}

fn cmd_approx(args: ApproxArgs) -> rffd::Result<()> {
    let measure = args.measure.build()?;
    let sample = measure.sample(args.m, args.seed);
    if args.x.len() != args.y.len() {
        return Err(rffd::Error::DimensionMismatch {
            expected: args.x.len(),
            got: args.y.len(),
        });
    }
    // The estimator depends on x - y only; the single-phase form avoids the
    // extra rounding of materializing both feature vectors.
    let z: Vec<f64> = args.x.iter().zip(&args.y).map(|(a, b)| a - b).collect();
    let estimate = approx_derivative_at_difference(&sample, &args.p, &args.q, &z)?;
    println!("estimate {estimate:?}");
    match KernelOracle::new(measure).exact_derivative(&args.p, &args.q, &args.x, &args.y) {
        Ok(exact) => {
            println!("exact {exact:?}");
            println!("abs_error {:?}", (estimate - exact).abs());
        }
        Err(e) => eprintln!("note: oracle unavailable ({e})"),
    }
    Ok(())
}

fn cmd_exact(args: ExactArgs) -> rffd::Result<()> {
    let oracle = KernelOracle::with_method(args.measure.build()?, args.method.into());
    let value = oracle.exact_derivative(&args.p, &args.q, &args.x, &args.y)?;
    println!("exact {value:?}");
    Ok(())
}

fn cmd_bernstein(args: BernsteinArgs) -> rffd::Result<()> {
    let measure = args.measure.build()?;
    print_json(&measure.bernstein_check(args.r, args.k, args.n_max)?)
}

fn cmd_appendix_k(args: AppendixKArgs) -> rffd::Result<()> {
    print_json(&appendix_k(args.ell, args.r)?)
}

fn cmd_bound(args: BoundArgs) -> rffd::Result<()> {
    let measure = args.measure.build()?;
    let k = match args.k {
        Some(k) => k,
        None => measure.certified_k(&args.p, &args.q)?,
    };
    let inputs = BoundInputs {
        m: args.m,
        diameter: args.diam,
        d: measure.d(),
        sigma_pq: measure.sigma_pq(&args.p, &args.q)?,
        c_pq: measure.c_pq(&args.p, &args.q)?,
        k,
        t: args.t,
    };
    let report = match args.lr {
        Some(r) => lr_bound(&inputs, r)?,
        None => uniform_bound(&inputs)?,
    };
    print_json(&report)?;
    if let Some(target) = args.target {
        println!("required_m {}", required_m(&inputs, target)?);
    }
    Ok(())
}

/// Grid resolution: the explicit --points flag, else the per-dimension
/// default.
fn make_grid(diam: f64, points: Option<usize>, d: usize) -> rffd::Result<GridSpec> {
    match points {
        Some(n) => GridSpec::new(diam, n, d),
        None => GridSpec::default_for(diam, d),
    }
}

fn default_points(d: usize) -> rffd::Result<usize> {
    // Same table as the grid defaults; diameter-study builds one grid per
    // diameter so only the count is needed here.
    Ok(GridSpec::default_for(1.0, d)?.points_per_axis())
}

/// Writes BASE.json and BASE.csv next to each other, both atomically.
fn emit<T: serde::Serialize>(out: Option<&Path>, record: &T, csv: &str) -> rffd::Result<()> {
    let Some(base) = out else { return Ok(()) };
    let json_path = PathBuf::from(format!("{}.json", base.display()));
    let csv_path = PathBuf::from(format!("{}.csv", base.display()));
    save_json(&json_path, record)?;
    atomic_write(&csv_path, csv.as_bytes())?;
    println!("wrote {} and {}", json_path.display(), csv_path.display());
    Ok(())
}

fn cmd_rate_study(args: RateStudyArgs) -> rffd::Result<()> {
    let measure = args.measure.build()?;
    let grid = make_grid(args.diam, args.points, measure.d())?;
    let config = RateStudyConfig {
        measure,
        p: args.p,
        q: args.q,
        grid,
        m_values: args.m_values,
        trials: args.trials,
        base_seed: args.seed,
    };
    let study = rate_study(&config)?;
    println!("{:>10} {:>24} {:>24} {:>24}", "m", "median", "q25", "q75");
    for s in &study.summary {
        println!(
            "{:>10} {:>24} {:>24} {:>24}",
            s.m,
            format!("{:?}", s.median),
            format!("{:?}", s.q25),
            format!("{:?}", s.q75)
        );
    }
    println!("fitted_rate {:?}", study.fitted_rate);
    println!("fitted_rate_stderr {:?}", study.fitted_rate_stderr);
    emit(args.out.as_deref(), &study, &study.to_csv())
}

fn cmd_diameter_study(args: DiameterStudyArgs) -> rffd::Result<()> {
    let measure = args.measure.build()?;
    let points_per_axis = match args.points {
        Some(n) => n,
        None => default_points(measure.d())?,
    };
    let config = DiameterStudyConfig {
        measure,
        p: args.p,
        q: args.q,
        m: args.m,
        diameters: args.diameters,
        trials: args.trials,
        base_seed: args.seed,
        points_per_axis,
    };
    let study = diameter_study(&config)?;
    println!("{:>12} {:>24}", "diameter", "median");
    for level in &study.medians {
        println!(
            "{:>12} {:>24}",
            format!("{:?}", level.diameter),
            format!("{:?}", level.median)
        );
    }
    match &study.regression {
        Some(fit) => {
            println!("regression_slope {:?}", fit.slope);
            println!("regression_intercept {:?}", fit.intercept);
        }
        None => println!("regression n/a (needs two positive diameters)"),
    }
    emit(args.out.as_deref(), &study, &study.to_csv())
}

fn cmd_validate(args: ValidateArgs) -> rffd::Result<()> {
    let measure = args.measure.build()?;
    let grid = make_grid(args.diam, args.points, measure.d())?;
    let config = ValidationConfig {
        measure,
        p: args.p,
        q: args.q,
        grid,
        m: args.m,
        t: args.t,
        trials: args.trials,
        base_seed: args.seed,
    };
    let record = validate_bound(&config)?;
    println!("K {:?}", record.k);
    println!("sigma_pq {:?}", record.sigma_pq);
    println!("c_pq {:?}", record.c_pq);
    println!("bound_total {:?}", record.bound.total);
    println!("violation_fraction {:?}", record.violation_fraction);
    println!("allowed_fraction {:?}", record.allowed_fraction);
    println!("binomial_slack {:?}", record.binomial_slack);
    println!("within_tolerance {}", record.within_tolerance);
    emit(args.out.as_deref(), &record, &record.to_csv())
}
