use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use varsmooth::experiment::{
    emit, grid_search, render_grid, render_report, run_method, write_grid_csv, ExperimentConfig, Format, GridPoint,
};
use varsmooth::penalties::SCAD_DEFAULT_A;
use varsmooth::solver::{self, SolverConfig};
use varsmooth::toy::PenalizedQuadratic;
use varsmooth::{verify, Error, PenaltySpec, Result};

#[derive(Parser)]
#[command(name = "varsmooth", version, about = "Variable smoothing solver and sparse spectral clustering experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a built-in toy problem and print the result.
    Solve(SolveArgs),
    /// Run one clustering method at one hyperparameter setting.
    Ssc(SscArgs),
    /// Grid search over the configured hyperparameters.
    Grid(GridArgs),
    /// Run the randomized gradient, adjoint and prox checks.
    Check(CheckArgs),
}

#[derive(Args)]
struct ExperimentArgs {
    /// Flat key=value config file.
    #[arg(long)]
    config: PathBuf,
    /// Override a config key, e.g. `--set method=ssc_mcp`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// k-means seed (overrides `kmeans.seed`).
    #[arg(long)]
    seed: Option<u64>,
    /// Report destination; stdout if absent and `output.report` is unset.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "json", value_parser = parse_format)]
    format: Format,
    /// Solver trace CSV destination (sparse methods only).
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Include wall-clock time in the report.
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct SscArgs {
    #[command(flatten)]
    common: ExperimentArgs,
    /// Penalty weight; defaults to the first entry of the λ grid.
    #[arg(long)]
    lambda: Option<f64>,
    /// MCP β or SCAD a; defaults to the first entry of the shape grid.
    #[arg(long)]
    shape: Option<f64>,
}

#[derive(Args)]
struct GridArgs {
    #[command(flatten)]
    common: ExperimentArgs,
    /// Grid table CSV destination.
    #[arg(long)]
    grid_csv: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ToyProblem {
    /// `λ|y|` started from `y = 2`.
    Abs,
    /// Penalized least squares `½‖Ay − c‖² + λ Σ r(yᵢ)` with random data.
    LeastSquares,
}

#[derive(Clone, Copy, ValueEnum)]
enum ToyPenalty {
    L1,
    Mcp,
    Scad,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, value_enum, default_value = "least-squares")]
    problem: ToyProblem,
    #[arg(long, value_enum, default_value = "l1")]
    penalty: ToyPenalty,
    #[arg(long, default_value_t = 0.1)]
    lambda: f64,
    /// MCP β or SCAD a.
    #[arg(long)]
    shape: Option<f64>,
    #[arg(long, default_value_t = 500)]
    max_iters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn parse_format(s: &str) -> std::result::Result<Format, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn load_config(args: &ExperimentArgs) -> Result<ExperimentConfig> {
    let mut overrides = args.overrides.clone();
    if let Some(seed) = args.seed {
        overrides.push(format!("kmeans.seed={seed}"));
    }
    ExperimentConfig::from_file(&args.config, &overrides)
}

fn write_trace(trace: Option<&varsmooth::SscTrace64>, path: Option<&Path>) -> Result<()> {
    if let (Some(trace), Some(path)) = (trace, path) {
        let file = std::fs::File::create(path)?;
        trace.write_csv(file)?;
    }
    Ok(())
}

fn cmd_ssc(args: SscArgs) -> Result<()> {
    let cfg = load_config(&args.common)?;
    let data = cfg.dataset.load().map_err(|e| e.at_stage("dataset"))?;
    let point = if cfg.method.is_sparse() {
        GridPoint {
            lambda: args.lambda.or(cfg.lambda_grid.first().copied()),
            shape: args.shape.or(cfg.shape_grid.first().copied()),
        }
    } else {
        GridPoint { lambda: None, shape: None }
    };
    let mut run = run_method(&cfg, &data, point)?;
    if !args.common.timing {
        run.report.wall_clock_secs = None;
    }
    let out = args.common.out.as_deref().or(cfg.output.report.as_deref());
    emit(&render_report(&run.report, args.common.format)?, out)?;
    write_trace(run.trace.as_ref(), args.common.trace.as_deref().or(cfg.output.trace.as_deref()))
}

fn cmd_grid(args: GridArgs) -> Result<()> {
    let cfg = load_config(&args.common)?;
    let data = cfg.dataset.load().map_err(|e| e.at_stage("dataset"))?;
    let mut outcome = grid_search(&cfg, &data)?;
    if !args.common.timing {
        outcome.report.best.wall_clock_secs = None;
    }
    let out = args.common.out.as_deref().or(cfg.output.report.as_deref());
    emit(&render_grid(&outcome.report, args.common.format)?, out)?;
    if let Some(path) = args.grid_csv.as_deref().or(cfg.output.grid.as_deref()) {
        write_grid_csv(&outcome.report, std::fs::File::create(path)?)?;
    }
    write_trace(
        outcome.best_run.trace.as_ref(),
        args.common.trace.as_deref().or(cfg.output.trace.as_deref()),
    )
}

fn cmd_solve(args: SolveArgs) -> Result<()> {
    let penalty = match args.penalty {
        ToyPenalty::L1 => PenaltySpec::l1(args.lambda)?,
        ToyPenalty::Mcp => PenaltySpec::mcp(args.lambda, args.shape.unwrap_or(1.0))?,
        ToyPenalty::Scad => PenaltySpec::scad(args.lambda, args.shape.unwrap_or(SCAD_DEFAULT_A))?,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let (problem, y1) = match args.problem {
        ToyProblem::Abs => (PenalizedQuadratic::new(DMatrix::zeros(1, 1), DVector::zeros(1), Some(penalty))?, DVector::from_element(1, 2.0)),
        ToyProblem::LeastSquares => {
            let a = DMatrix::from_fn(30, 10, |_, _| rng.random_range(-1.0..1.0));
            let c = DVector::from_fn(30, |_, _| rng.random_range(-1.0..1.0));
            (PenalizedQuadratic::least_squares(&a, &c, penalty)?, DVector::zeros(10))
        }
    };
    let cfg = SolverConfig {
        max_iters: args.max_iters,
        ..SolverConfig::default()
    };
    let trace = solver::run(&problem, y1, &cfg)?;
    let first = &trace.records[0];
    let last = trace.records.last().expect("nonempty trace");
    println!("iterations       {}", trace.records.len());
    println!("grad norm        {:.3e} -> {:.3e} (min {:.3e})", first.grad_norm, last.grad_norm, trace.min_grad_norm().unwrap());
    println!("objective        {:.6e} -> {:.6e}", first.unsmoothed_value, last.unsmoothed_value);
    let y: Vec<String> = trace.final_point.iter().map(|x| format!("{x:.4}")).collect();
    println!("final point      [{}]", y.join(", "));
    if let Some(path) = args.trace {
        trace.write_csv(std::fs::File::create(path)?)?;
    }
    Ok(())
}

fn cmd_check(args: CheckArgs) -> Result<bool> {
    let results = verify::run_all(args.seed)?;
    for r in &results {
        println!("{}", r.line());
    }
    Ok(results.iter().all(|r| r.passed))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Solve(a) => cmd_solve(a).map(|_| true),
        Command::Ssc(a) => cmd_ssc(a).map(|_| true),
        Command::Grid(a) => cmd_grid(a).map(|_| true),
        Command::Check(a) => cmd_check(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
