//! `cra`: generate instances, run the annealed solver and its baselines, and
//! drive benchmark suites.

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cra_core::model::{Architecture, Precision};
use cra_core::problems::ProblemKind;

#[derive(Debug, Parser)]
#[command(name = "cra", version, about = "Penalty-annealed relaxation solver for combinatorial optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a random instance file.
    Generate {
        #[command(subcommand)]
        kind: GenerateKind,
    },
    /// Solve one instance with the annealed solver (or the plain loop with --no-anneal).
    Solve(SolveArgs),
    /// Run a classical comparator on one instance.
    Baseline(BaselineArgs),
    /// Run a benchmark suite file.
    Bench(SuiteArgs),
    /// Run a schedule sweep file.
    Sweep(SuiteArgs),
    /// Solve a small instance exactly by enumeration.
    Exact(ExactArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GraphFormat {
    /// Edge list with a `# nodes: N` header.
    Edges,
    Gset,
}

#[derive(Debug, Subcommand)]
enum GenerateKind {
    /// Uniform random d-regular graph.
    Rrg {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; a `.manifest.json` is written next to it.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = GraphFormat::Edges)]
        format: GraphFormat,
    },
    /// Erdős–Rényi graph G(n, p).
    Erg {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = GraphFormat::Edges)]
        format: GraphFormat,
    },
    /// Bipartite matching instance with random likelihoods and fields (JSON).
    Dbm {
        #[arg(long)]
        n1: usize,
        #[arg(long)]
        n2: usize,
        /// Minimum same-field and cross-field fraction (p = q).
        #[arg(long, default_value_t = 0.25)]
        frac: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProblemArg {
    Mis,
    Maxcut,
    Dbm,
    Coloring,
}

impl ProblemArg {
    fn kind(self) -> ProblemKind {
        match self {
            ProblemArg::Mis => ProblemKind::Mis,
            ProblemArg::Maxcut => ProblemKind::MaxCut,
            ProblemArg::Dbm => ProblemKind::Dbm,
            ProblemArg::Coloring => ProblemKind::Coloring,
        }
    }
}

#[derive(Debug, Args)]
struct ProblemArgs {
    /// Instance file: Gset, edge list, or matching JSON. Relative paths also
    /// resolve against $CRA_SOLVE_DATA.
    instance: PathBuf,
    #[arg(long, value_enum)]
    problem: ProblemArg,
    /// MIS penalty weight (default 2).
    #[arg(long)]
    lambda: Option<f64>,
    /// Number of colors for --problem coloring.
    #[arg(long)]
    colors: Option<usize>,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Settings file (TOML or JSON); flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Parametrization: direct, gcn or sage.
    #[arg(long)]
    arch: Option<Architecture>,
    /// f64 or f32 model arithmetic.
    #[arg(long)]
    precision: Option<Precision>,
    /// Keep the penalty weight at zero (the plain PI-GNN loop).
    #[arg(long)]
    no_anneal: bool,
    /// Initial penalty weight γ(0).
    #[arg(long, allow_hyphen_values = true)]
    gamma0: Option<f64>,
    /// Per-epoch increase ε of the penalty weight.
    #[arg(long)]
    rate: Option<f64>,
    /// Even curve exponent of the penalty.
    #[arg(long)]
    alpha: Option<u32>,
    /// Upper limit of the penalty weight.
    #[arg(long)]
    gamma_cap: Option<f64>,
    /// Use the entropy penalty instead of the power penalty.
    #[arg(long)]
    entropy: bool,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    weight_decay: Option<f64>,
    /// Minimum improvement that resets the patience counter.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Epochs without improvement before stopping.
    #[arg(long)]
    patience: Option<u64>,
    #[arg(long)]
    max_epochs: Option<u64>,
    /// Number of restarts, seeded 0..SEEDS.
    #[arg(long)]
    seeds: Option<u64>,
    /// Rounding threshold.
    #[arg(long)]
    threshold: Option<f64>,
    /// Record every k-th epoch in the traces.
    #[arg(long)]
    trace_every: Option<u64>,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    jobs: Option<usize>,
    /// Record wall-clock time in the result (outputs are then not byte-reproducible).
    #[arg(long)]
    timing: bool,
    /// Output directory (default: runs/solve-<unix time>).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BaselineKind {
    Dga,
    Rga,
    GreedyMaxcut,
    Exact,
}

#[derive(Debug, Args)]
struct BaselineArgs {
    #[arg(value_enum)]
    algorithm: BaselineKind,
    /// Instance file.
    instance: PathBuf,
    /// Problem for `exact` (implied by the other algorithms).
    #[arg(long, value_enum)]
    problem: Option<ProblemArg>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    colors: Option<usize>,
    /// Runs with seeds 0..SEEDS.
    #[arg(long, default_value_t = 5)]
    seeds: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExactArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Largest instance to enumerate.
    #[arg(long, default_value_t = 20)]
    max_nodes: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SuiteArgs {
    /// Suite file (TOML or JSON).
    spec: PathBuf,
    #[arg(long)]
    jobs: Option<usize>,
    /// Record wall-clock times (outputs are then not byte-reproducible).
    #[arg(long)]
    timing: bool,
    /// Output directory (default: runs/<command>-<unix time>).
    #[arg(long)]
    out: Option<PathBuf>,
}

/// How a command failed; decides the exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad arguments, config or instance.
    Validation(anyhow::Error),
    Runtime(anyhow::Error),
    /// A benchmark finished with some failed cells.
    Partial(usize),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 2,
            Failure::Runtime(_) => 3,
            Failure::Partial(_) => 4,
        }
    }
}

pub trait FailureExt<T> {
    fn invalid(self) -> Result<T, Failure>;
    fn runtime(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> FailureExt<T> for Result<T, E> {
    fn invalid(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Validation(e.into()))
    }

    fn runtime(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Runtime(e.into()))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate { kind } => commands::generate(kind),
        Command::Solve(args) => commands::solve(args),
        Command::Baseline(args) => commands::baseline(args),
        Command::Bench(args) => commands::bench(args),
        Command::Sweep(args) => commands::sweep(args),
        Command::Exact(args) => commands::exact(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            match &failure {
                Failure::Validation(e) => eprintln!("error: {e:#}"),
                Failure::Runtime(e) => eprintln!("error: {e:#}"),
                Failure::Partial(n) => eprintln!("error: {n} benchmark cell(s) failed"),
            }
            ExitCode::from(failure.code())
        }
    }
}
