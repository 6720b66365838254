//! `sobolev-dfo solve | bench | profile`.
//!
//! Exit codes: 0 on success, 2 for usage errors (bad flags, unknown problem or solver,
//! out-of-range values), 1 for runtime failures such as unreadable files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use sobolev_dfo::bench::{
    emit_csv, emit_profile_csv, parse_csv, profile_from_records, render_svg, run_suite, Metric, SolverKind,
    SuiteSpec,
};
use sobolev_dfo::problems::{instantiate, SUITE};
use sobolev_dfo::{minimize, Error, SolverConfig};

#[derive(Debug, Parser)]
#[command(name = "sobolev-dfo", version, about = "Derivative-free minimization with least-norm quadratic models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Minimize one test problem and print a one-line summary.
    Solve(SolveArgs),
    /// Run every solver on permuted copies of the test problems and write the records CSV.
    Bench(BenchArgs),
    /// Turn a records CSV into performance profiles.
    Profile(ProfileArgs),
}

#[derive(Debug, Args)]
struct SolverFlags {
    /// Initial trust-region radius.
    #[arg(long, default_value_t = 0.5)]
    rhobeg: f64,
    /// Maximum number of function evaluations.
    #[arg(long, default_value_t = 1000)]
    maxfun: usize,
    /// Number of interpolation points [default: 2n+1].
    #[arg(long)]
    npt: Option<usize>,
    /// Ball-size multiplier of the geometric weight rule (esymbs).
    #[arg(long = "M", default_value_t = 10.0)]
    multiplier: f64,
    /// Base seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct SolveArgs {
    /// Test problem name.
    #[arg(long)]
    problem: String,
    /// Dimension.
    #[arg(long)]
    n: usize,
    /// esymbs, esymbp or symb.
    #[arg(long, default_value = "esymbs")]
    solver: String,
    /// Final trust-region radius.
    #[arg(long, default_value_t = 1e-6)]
    rhoend: f64,
    #[command(flatten)]
    flags: SolverFlags,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Comma-separated problem names [default: the whole suite].
    #[arg(long, value_delimiter = ',')]
    problems: Vec<String>,
    /// Comma-separated dimensions.
    #[arg(long, value_delimiter = ',', default_value = "6,8,10")]
    dims: Vec<usize>,
    /// Comma-separated solver names.
    #[arg(long, value_delimiter = ',', default_value = "esymbs,esymbp,symb")]
    solvers: Vec<String>,
    /// Comma-separated final trust-region radii.
    #[arg(long, value_delimiter = ',', default_value = "1e-6")]
    rhoend: Vec<f64>,
    /// Permuted copies of each problem.
    #[arg(long, default_value_t = 10)]
    perms: usize,
    /// Output CSV [default: stdout].
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    flags: SolverFlags,
}

#[derive(Debug, Args)]
struct ProfileArgs {
    /// Records CSV written by `bench`.
    #[arg(long = "in")]
    input: PathBuf,
    /// Cost per instance: mean or rstd of the evaluation counts.
    #[arg(long, default_value = "mean")]
    metric: String,
    /// Profile CSV [default: stdout].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also render the curves as SVG.
    #[arg(long)]
    svg: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::UnknownProblem(_) | Error::UnknownSolver(_) | Error::InvalidArgument(_) => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

/// Runs the command line `argv` (program name first) and returns the exit code.
pub fn run_cli(argv: &[String], stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                2
            } else {
                let _ = write!(stdout, "{text}");
                0
            };
        }
    };
    let outcome = match cli.command {
        Command::Solve(args) => solve(args, stdout),
        Command::Bench(args) => bench(args, stdout),
        Command::Profile(args) => profile(args, stdout),
    };
    match outcome {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            2
        }
        Err(Failure::Runtime(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            1
        }
    }
}

fn base_config(flags: &SolverFlags, rhoend: f64) -> SolverConfig {
    SolverConfig {
        rhobeg: flags.rhobeg,
        rhoend,
        maxfun: flags.maxfun,
        npt: flags.npt,
        seed: flags.seed,
        ..Default::default()
    }
}

fn solve(args: SolveArgs, stdout: &mut dyn Write) -> Outcome {
    let kind: SolverKind = args.solver.parse()?;
    let problem = instantiate(&args.problem, args.n)?;
    let config = SolverConfig {
        sigma_rule: kind.sigma_rule(args.flags.multiplier)?,
        ..base_config(&args.flags, args.rhoend)
    };
    config.validate(args.n)?;
    let report = minimize(|x| problem.eval(x), &problem.start, &config)?;

    const SHOWN: usize = 4;
    let mut x: Vec<String> = report.best_point.iter().take(SHOWN).map(|v| format!("{v:.6e}")).collect();
    if report.best_point.len() > SHOWN {
        x.push("...".into());
    }
    let line = format!(
        "problem={} n={} solver={} fbest={:.6e} nf={} status={} x_best=[{}]",
        args.problem,
        args.n,
        kind,
        report.best_value,
        report.nf,
        report.status,
        x.join(",")
    );
    writeln!(stdout, "{line}").map_err(|e| Failure::Runtime(e.to_string()))
}

fn bench(args: BenchArgs, stdout: &mut dyn Write) -> Outcome {
    let solvers = args
        .solvers
        .iter()
        .map(|s| s.parse::<SolverKind>())
        .collect::<sobolev_dfo::Result<Vec<_>>>()?;
    let problems = if args.problems.is_empty() {
        SUITE.iter().map(|s| s.to_string()).collect()
    } else {
        args.problems
    };
    let spec = SuiteSpec {
        solvers,
        problems,
        dims: args.dims,
        rhoends: args.rhoend,
        perms: args.perms,
        base_seed: args.flags.seed,
        base: base_config(&args.flags, 1e-6),
        multiplier: args.flags.multiplier,
    };
    spec.validate()?;
    let records = run_suite(&spec)?;
    write_output(args.out.as_deref(), &emit_csv(&records)?, stdout)
}

fn profile(args: ProfileArgs, stdout: &mut dyn Write) -> Outcome {
    let metric: Metric = args.metric.parse()?;
    let bytes = fs::read(&args.input)
        .map_err(|e| Failure::Runtime(format!("cannot read {}: {e}", args.input.display())))?;
    let records = parse_csv(&bytes).map_err(|e| Failure::Runtime(format!("{}: {e}", args.input.display())))?;
    let curves = profile_from_records(&records, metric)?;
    if let Some(path) = &args.svg {
        let title = format!("performance profile, {} #F", metric.as_str());
        write_file(path, render_svg(&curves, &title).as_bytes())?;
    }
    write_output(args.out.as_deref(), &emit_profile_csv(&curves)?, stdout)
}

fn write_file(path: &Path, bytes: &[u8]) -> Outcome {
    fs::write(path, bytes).map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display())))
}

fn write_output(path: Option<&Path>, bytes: &[u8], stdout: &mut dyn Write) -> Outcome {
    match path {
        Some(path) => write_file(path, bytes),
        None => stdout.write_all(bytes).map_err(|e| Failure::Runtime(e.to_string())),
    }
}
