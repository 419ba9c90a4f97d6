//! `maxvol`: command-line front end.
//!
//! Exit codes: 0 success, 1 invalid input or domain error, 2 I/O error.

use std::fs::{self, File};
use std::io::{self, BufReader, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use maxvol_rank1::bounds::{bound_report, coherent_inf_bound, BoundInputs};
use maxvol_rank1::experiments::{
    format_summary_table, parse_config_text, run_experiment_with_threads, ExperimentConfig, Variant, FIXED_STEPS,
};
use maxvol_rank1::matrix::read_matrix;
use maxvol_rank1::maxvol::{
    cross_residual_norm, maxvol, maxvol_fixed_steps, maxvol_max_among_viewed, scan_start_column,
};
use maxvol_rank1::oracle::{
    best_cross_residual, chi2_tail_exact, coherence_failure_mc, global_argmax, sphere_tail_mc, TailEstimate,
};
use maxvol_rank1::scalar::{format_f64, Field};
use maxvol_rank1::selftest::{run_selftest, SelftestOptions};
use maxvol_rank1::{AnyMatrix, DenseMatrix, Error, PivotTrace, Scalar};
use num_complex::Complex64;

#[derive(Parser)]
#[command(name = "maxvol", version, about = "Rank-1 maxvol cross approximation, bounds and experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the search on a matrix file and print the pivot and residual.
    Approx(ApproxArgs),
    /// Evaluate every constant and error bound at the given parameters.
    Bounds(BoundsArgs),
    /// Run a seeded Monte Carlo sweep and write trials.csv and summary.csv.
    Experiment(ExperimentArgs),
    /// Reference computations: exact tails, Monte Carlo estimates, exhaustive search.
    #[command(subcommand)]
    Oracle(OracleCommand),
    /// Run the oracle-versus-bound checks; nonzero exit if any fails.
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct ApproxArgs {
    /// Matrix file: `m n field` header, then one row per line.
    matrix: PathBuf,
    #[arg(long, default_value_t = 0)]
    start_col: usize,
    /// Pick the start column as the best of columns 0..K instead.
    #[arg(long, value_name = "K", conflicts_with = "start_col")]
    scan_k: Option<usize>,
    /// converge, fixed4 or max-among-viewed.
    #[arg(long, default_value = "converge")]
    variant: String,
    /// Minimum steps for max-among-viewed.
    #[arg(long, default_value_t = 4)]
    k: usize,
    /// Print every visited pivot.
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct BoundsArgs {
    /// Column dimension.
    #[arg(long, default_value_t = 100)]
    n: usize,
    /// Row dimension (defaults to n).
    #[arg(long)]
    m: Option<usize>,
    /// Tail exponent.
    #[arg(long, default_value_t = 2.0)]
    c: f64,
    /// Constant of the scan-k bound.
    #[arg(long, default_value_t = 2.0)]
    c0: f64,
    /// Noise-to-signal ratio, at most 1/8.
    #[arg(long)]
    eps: f64,
    /// Chebyshev norm of the noise.
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    /// Defaults to sqrt(2 c ln m / m).
    #[arg(long)]
    u_inf: Option<f64>,
    /// Defaults to sqrt(2 c ln n / n).
    #[arg(long)]
    v_inf: Option<f64>,
    /// Columns scanned / coordinates in the sphere tail.
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Sphere-coordinate threshold.
    #[arg(long, default_value_t = 0.02)]
    tau: f64,
}

#[derive(Args)]
struct ExperimentArgs {
    /// `key = value` file; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated ratio grid.
    #[arg(long)]
    ratios: Option<String>,
    /// Rows (default 100).
    #[arg(long)]
    m: Option<usize>,
    /// Columns (default 100).
    #[arg(long)]
    n: Option<usize>,
    /// Trials per ratio (default 1000).
    #[arg(long)]
    trials: Option<usize>,
    /// converge, fixed4 or max-among-viewed (default converge).
    #[arg(long)]
    variant: Option<String>,
    /// random-column, verified-good or scan-k (default verified-good).
    #[arg(long)]
    start_policy: Option<String>,
    /// Columns for scan-k, minimum steps for max-among-viewed (default 4).
    #[arg(long)]
    k: Option<usize>,
    /// real or complex (default real).
    #[arg(long)]
    field: Option<String>,
    /// Required unless the config file sets master_seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Exact chi-square upper tail P(chi2_n > threshold).
    Chi2 {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        threshold: f64,
    },
    /// Monte Carlo P(|v_i| < tau, i = 1..k) for v uniform on the sphere.
    SphereTail {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        tau: f64,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value = "real")]
        field: String,
    },
    /// Monte Carlo probability that a sphere vector is not mu-coherent.
    Coherence {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        mu: f64,
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value = "real")]
        field: String,
    },
    /// Largest entry and best rank-1 cross of a matrix file, by exhaustive search.
    BestCross { matrix: PathBuf },
}

#[derive(Args)]
struct SelftestArgs {
    #[arg(long)]
    seed: u64,
    /// Draws per Monte Carlo check.
    #[arg(long, default_value_t = 20_000)]
    mc_trials: usize,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Io(_) => 2,
                _ => 1,
            })
        }
    }
}

fn run(command: Command) -> Result<ExitCode, Error> {
    match command {
        Command::Approx(args) => approx(&args),
        Command::Bounds(args) => bounds(&args),
        Command::Experiment(args) => experiment(&args),
        Command::Oracle(cmd) => oracle(&cmd),
        Command::Selftest(args) => selftest(&args),
    }
}

fn load_matrix(path: &PathBuf) -> Result<AnyMatrix, Error> {
    let file = File::open(path)?;
    read_matrix(BufReader::new(file))
}

fn approx(args: &ApproxArgs) -> Result<ExitCode, Error> {
    let variant = args.variant.parse()?;
    match load_matrix(&args.matrix)? {
        AnyMatrix::Real(a) => approx_typed(&a, args, variant),
        AnyMatrix::Complex(a) => approx_typed(&a, args, variant),
    }
}

fn approx_typed<T: Scalar>(
    a: &DenseMatrix<T>,
    args: &ApproxArgs,
    variant: Variant,
) -> Result<ExitCode, Error> {
    let start = match args.scan_k {
        Some(k) => scan_start_column(a, k)?,
        None => args.start_col,
    };
    let trace: PivotTrace<T> = match variant {
        Variant::Converge => maxvol(a, start)?,
        Variant::Fixed4 => maxvol_fixed_steps(a, start, FIXED_STEPS)?,
        Variant::MaxAmongViewed => maxvol_max_among_viewed(a, start, args.k)?,
    };
    let mut out = io::stdout().lock();
    if args.trace {
        for (idx, p) in trace.visited.iter().enumerate() {
            let mark = if trace.restarts.contains(&idx) { " (restart)" } else { "" };
            writeln!(out, "visit {idx}: ({}, {}) = {}{mark}", p.row, p.col, p.value.format_token())?;
        }
    }
    let p = &trace.pivot;
    writeln!(out, "pivot = ({}, {}) = {}", p.row, p.col, p.value.format_token())?;
    writeln!(out, "start_col = {}", trace.start_col)?;
    writeln!(out, "steps = {}", trace.steps)?;
    writeln!(out, "converged = {}", trace.converged)?;
    writeln!(out, "elements_examined = {}", trace.elements_examined)?;
    let residual = cross_residual_norm(a, p)?;
    writeln!(out, "residual_cnorm = {}", format_f64(residual))?;
    Ok(ExitCode::SUCCESS)
}

fn bounds(args: &BoundsArgs) -> Result<ExitCode, Error> {
    let m = args.m.unwrap_or(args.n);
    let inputs = BoundInputs {
        n: args.n,
        m,
        c: args.c,
        c0: args.c0,
        eps: args.eps,
        delta: args.delta,
        u_inf: match args.u_inf {
            Some(x) => x,
            None => coherent_inf_bound(m, args.c)?,
        },
        v_inf: match args.v_inf {
            Some(x) => x,
            None => coherent_inf_bound(args.n, args.c)?,
        },
        k: args.k,
        tau: args.tau,
    };
    let report = bound_report(&inputs)?;
    print!("{report}");
    Ok(ExitCode::SUCCESS)
}

fn experiment(args: &ExperimentArgs) -> Result<ExitCode, Error> {
    let mut config = ExperimentConfig::default();
    let mut seeded = false;
    if let Some(path) = &args.config {
        let text = fs::read_to_string(path)?;
        for (key, value) in parse_config_text(&text)? {
            seeded |= key == "master_seed";
            config.apply(&key, &value)?;
        }
    }
    let overrides = [
        ("ratios", args.ratios.clone()),
        ("m", args.m.map(|x| x.to_string())),
        ("n", args.n.map(|x| x.to_string())),
        ("trials", args.trials.map(|x| x.to_string())),
        ("variant", args.variant.clone()),
        ("start_policy", args.start_policy.clone()),
        ("k", args.k.map(|x| x.to_string())),
        ("field", args.field.clone()),
        ("master_seed", args.seed.map(|x| x.to_string())),
    ];
    for (key, value) in overrides {
        if let Some(value) = value {
            seeded |= key == "master_seed";
            config.apply(key, &value)?;
        }
    }
    if let Some(out) = &args.output {
        config.output_path = out.clone();
    }
    if !seeded {
        return Err(Error::InvalidParameter {
            name: "seed",
            reason: "pass --seed or set master_seed in the config file".into(),
        });
    }
    for w in config.validate()? {
        eprintln!("warning: {w}");
    }
    let result = run_experiment_with_threads(&config, args.threads)?;
    let mut out = io::stdout().lock();
    write!(out, "{}", format_summary_table(&result.summary))?;
    let degenerate: usize = result.summary.iter().map(|r| r.degenerate).sum();
    writeln!(out, "degenerate trials: {degenerate}")?;
    writeln!(out, "wrote {}", result.trials_path.display())?;
    writeln!(out, "wrote {}", result.summary_path.display())?;
    Ok(ExitCode::SUCCESS)
}

fn print_tail(est: &TailEstimate) -> io::Result<()> {
    let mut out = io::stdout().lock();
    writeln!(out, "value = {}", format_f64(est.value))?;
    writeln!(out, "method = {:?}", est.method)?;
    writeln!(out, "samples_or_nodes = {}", est.samples_or_nodes)?;
    if let Some(se) = est.std_error {
        writeln!(out, "std_error = {}", format_f64(se))?;
        writeln!(out, "upper_3sigma = {}", format_f64(est.upper_3sigma()))?;
    }
    Ok(())
}

fn oracle(cmd: &OracleCommand) -> Result<ExitCode, Error> {
    match cmd {
        OracleCommand::Chi2 { n, threshold } => print_tail(&chi2_tail_exact(*n, *threshold)?)?,
        OracleCommand::SphereTail {
            n,
            tau,
            k,
            trials,
            seed,
            field,
        } => {
            let est = match field.parse()? {
                Field::Real => sphere_tail_mc::<f64>(*n, *tau, *k, *trials, *seed)?,
                Field::Complex => sphere_tail_mc::<Complex64>(*n, *tau, *k, *trials, *seed)?,
            };
            print_tail(&est)?;
        }
        OracleCommand::Coherence {
            n,
            mu,
            trials,
            seed,
            field,
        } => {
            let est = match field.parse()? {
                Field::Real => coherence_failure_mc::<f64>(*n, *mu, *trials, *seed)?,
                Field::Complex => coherence_failure_mc::<Complex64>(*n, *mu, *trials, *seed)?,
            };
            print_tail(&est)?;
        }
        OracleCommand::BestCross { matrix } => match load_matrix(matrix)? {
            AnyMatrix::Real(a) => best_cross(&a)?,
            AnyMatrix::Complex(a) => best_cross(&a)?,
        },
    }
    Ok(ExitCode::SUCCESS)
}

fn best_cross<T: Scalar>(a: &DenseMatrix<T>) -> Result<(), Error> {
    let max = global_argmax(a);
    let (pivot, norm) = best_cross_residual(a)?;
    let mut out = io::stdout().lock();
    writeln!(out, "max_entry = ({}, {}) = {}", max.row, max.col, max.value.format_token())?;
    writeln!(out, "best_pivot = ({}, {}) = {}", pivot.row, pivot.col, pivot.value.format_token())?;
    writeln!(out, "best_residual_cnorm = {}", format_f64(norm))?;
    Ok(())
}

fn selftest(args: &SelftestArgs) -> Result<ExitCode, Error> {
    let opts = SelftestOptions {
        seed: args.seed,
        mc_trials: args.mc_trials,
        ..SelftestOptions::default()
    };
    let checks = run_selftest(&opts);
    let mut out = io::stdout().lock();
    for c in &checks {
        writeln!(out, "{c}")?;
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    writeln!(out, "{} checks, {failed} failed", checks.len())?;
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
