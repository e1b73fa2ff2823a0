//! Benchmark suites: instance grids, solver line-ups, and aggregation.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    apr, config_hash, cut_ratio, gset_best_known, is_density, load_mis_theory, maxcut_upper_bound,
    mean_std, BenchError, ReferenceKind, CODE_VERSION, MIS_THEORY_FILE,
};
use crate::baselines::{brute_force, dga_mis, greedy_maxcut, rga_mis, OracleBudget};
use crate::formats::{detect_format, parse_edge_list, parse_gset, InstanceFormat};
use crate::generate::{generate_erg, generate_rrg};
use crate::graph::{Graph, RngSeed};
use crate::model::Architecture;
use crate::penalty::Alpha;
use crate::problems::{MaxCutProblem, MisProblem, ProblemKind};
use crate::solver::{solve_with_timing, SolveConfig, SolveOverrides, Trace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchProblem {
    Mis,
    #[serde(alias = "max_cut")]
    MaxCut,
}

impl BenchProblem {
    pub fn kind(self) -> ProblemKind {
        match self {
            BenchProblem::Mis => ProblemKind::Mis,
            BenchProblem::MaxCut => ProblemKind::MaxCut,
        }
    }

    pub fn metric_name(self) -> &'static str {
        match self {
            BenchProblem::Mis => "is_density",
            BenchProblem::MaxCut => "cut_ratio",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphFamily {
    /// Random `d`-regular graphs; `degrees` lists `d`.
    Rrg,
    /// Erdős–Rényi graphs; `degrees` lists the edge probability.
    Erg,
    /// Instances read from `files`.
    Files,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolverKind {
    /// Annealed training with the given parametrization.
    Cra(Architecture),
    /// The same loop with `γ ≡ 0`.
    Pi(Architecture),
    Dga,
    Rga,
    GreedyMaxcut,
    Exact,
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolverKind::Cra(a) => write!(f, "cra-{a}"),
            SolverKind::Pi(a) => write!(f, "pi-{a}"),
            SolverKind::Dga => f.write_str("dga"),
            SolverKind::Rga => f.write_str("rga"),
            SolverKind::GreedyMaxcut => f.write_str("greedy-maxcut"),
            SolverKind::Exact => f.write_str("exact"),
        }
    }
}

impl FromStr for SolverKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.to_ascii_lowercase();
        if let Some(arch) = s.strip_prefix("cra-") {
            return arch.parse().map(SolverKind::Cra);
        }
        if let Some(arch) = s.strip_prefix("pi-") {
            return arch.parse().map(SolverKind::Pi);
        }
        match s.as_str() {
            "cra" => Ok(SolverKind::Cra(Architecture::Sage)),
            "pi" => Ok(SolverKind::Pi(Architecture::Gcn)),
            "dga" => Ok(SolverKind::Dga),
            "rga" => Ok(SolverKind::Rga),
            "greedy-maxcut" | "greedy" => Ok(SolverKind::GreedyMaxcut),
            "exact" => Ok(SolverKind::Exact),
            other => Err(format!(
                "unknown solver `{other}` (cra-<arch>, pi-<arch>, dga, rga, greedy-maxcut, exact)"
            )),
        }
    }
}

impl Serialize for SolverKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SolverKind {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl SolverKind {
    fn is_trained(self) -> bool {
        matches!(self, SolverKind::Cra(_) | SolverKind::Pi(_))
    }
}

fn one() -> usize {
    1
}

/// A benchmark description, read from TOML or JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteSpec {
    pub name: String,
    pub problem: BenchProblem,
    pub graph: GraphFamily,
    #[serde(default)]
    pub sizes: Vec<usize>,
    /// Degrees for random regular graphs, edge probabilities for Erdős–Rényi graphs.
    #[serde(default)]
    pub degrees: Vec<f64>,
    #[serde(default)]
    pub files: Vec<PathBuf>,
    /// Random instances per (size, degree) cell.
    #[serde(default = "one")]
    pub instances: usize,
    /// Instance `i` of every cell is generated from `instance_seed + i`.
    #[serde(default)]
    pub instance_seed: u64,
    pub solvers: Vec<SolverKind>,
    #[serde(default)]
    pub reference: ReferenceKind,
    /// MIS penalty weight.
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub solve: SolveOverrides,
    /// Also emit per-epoch traces of trained solvers.
    #[serde(default)]
    pub trace: bool,
}

impl SuiteSpec {
    pub fn from_toml(text: &str) -> Result<Self, BenchError> {
        toml::from_str(text).map_err(|e| BenchError::Spec(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self, BenchError> {
        serde_json::from_str(text).map_err(|e| BenchError::Spec(e.to_string()))
    }

    /// Reads a `.json` or `.toml` suite file.
    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        if path.extension().is_some_and(|e| e == "json") {
            Self::from_json(&text)
        } else {
            Self::from_toml(&text)
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |m: String| Err(BenchError::Spec(m));
        if self.name.trim().is_empty() {
            return bad("suite name is empty".into());
        }
        if self.solvers.is_empty() {
            return bad("no solvers listed".into());
        }
        if self.instances == 0 {
            return bad("instances must be at least 1".into());
        }
        match self.graph {
            GraphFamily::Files => {
                if self.files.is_empty() {
                    return bad("graph = \"files\" needs a nonempty `files` list".into());
                }
            }
            GraphFamily::Rrg | GraphFamily::Erg => {
                if self.sizes.is_empty() || self.degrees.is_empty() {
                    return bad("random graph suites need nonempty `sizes` and `degrees`".into());
                }
            }
        }
        for &d in &self.degrees {
            match self.graph {
                GraphFamily::Rrg if d < 0.0 || d.fract() != 0.0 => {
                    return bad(format!("regular degree {d} is not a nonnegative integer"));
                }
                GraphFamily::Erg if !(0.0..=1.0).contains(&d) => {
                    return bad(format!("edge probability {d} outside [0, 1]"));
                }
                _ => {}
            }
        }
        if self.graph == GraphFamily::Rrg {
            for &n in &self.sizes {
                for &d in &self.degrees {
                    let d = d as usize;
                    if d >= n.max(1) || (n * d) % 2 == 1 {
                        return bad(format!("no {d}-regular graph on {n} nodes"));
                    }
                }
            }
        }
        for s in &self.solvers {
            match (s, self.problem) {
                (SolverKind::Dga | SolverKind::Rga, BenchProblem::MaxCut) => {
                    return bad(format!("{s} solves MIS only"));
                }
                (SolverKind::GreedyMaxcut, BenchProblem::Mis) => {
                    return bad(format!("{s} solves MaxCut only"));
                }
                _ => {}
            }
        }
        if let Some(a) = self.solve.alpha {
            Alpha::new(a)?;
        }
        self.solve_config(Architecture::Sage, true)?;
        Ok(())
    }

    /// Solver configuration of a trained solver in this suite.
    pub fn solve_config(&self, arch: Architecture, anneal: bool) -> Result<SolveConfig, BenchError> {
        let mut cfg = SolveConfig::for_problem(self.problem.kind(), arch);
        if !anneal {
            cfg.schedule = None;
        }
        self.solve.apply(&mut cfg)?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Default)]
pub struct BenchOptions {
    /// Worker threads; `None` uses the available parallelism.
    pub jobs: Option<usize>,
    /// Record wall-clock times (outputs are then no longer byte-reproducible).
    pub timing: bool,
    /// Directory with reference tables (and instance files referenced relatively).
    pub data_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceOutcome {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instance_seed: Option<u64>,
    /// IS density or cut ratio; infeasible MIS solutions score 0.
    pub value: f64,
    pub feasible: bool,
    pub reference_value: Option<f64>,
    pub apr: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

/// One (cell, solver) row of a benchmark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub suite: String,
    pub problem: BenchProblem,
    pub n: usize,
    pub d_or_p: String,
    pub solver: String,
    pub seed_count: usize,
    pub metric_name: String,
    pub mean: f64,
    /// Sample standard deviation across instances.
    pub std: f64,
    pub reference: ReferenceKind,
    /// Mean reference value, present when every instance has one.
    pub reference_value: Option<f64>,
    pub apr: Option<f64>,
    pub apr_std: Option<f64>,
    pub feasible_fraction: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instance_seed: Option<u64>,
    pub config_hash: String,
    pub code_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<SolveConfig>,
    pub instances: Vec<InstanceOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub suite: String,
    pub problem: BenchProblem,
    pub n: usize,
    pub d_or_p: String,
    pub solver: String,
    pub instance: String,
    pub seed: RngSeed,
    pub trace: Trace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub n: usize,
    pub d_or_p: String,
    pub instance: String,
    pub solver: String,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BenchOutcome {
    pub reports: Vec<MetricReport>,
    pub traces: Vec<TraceRecord>,
    pub failures: Vec<CellFailure>,
}

#[derive(Debug, Clone)]
enum CellSource {
    Random { n: usize, param: f64 },
    File(PathBuf),
}

#[derive(Debug, Clone)]
struct Cell {
    source: CellSource,
    label: String,
}

struct Task {
    cell: usize,
    instance: usize,
}

struct SolverRun {
    value: f64,
    feasible: bool,
    wall_time_s: Option<f64>,
    traces: Vec<(RngSeed, Trace)>,
}

struct TaskOutput {
    n: usize,
    name: String,
    instance_seed: Option<u64>,
    reference: (ReferenceKind, Option<f64>),
    runs: Vec<Result<SolverRun, String>>,
}

fn format_param(family: GraphFamily, param: f64) -> String {
    match family {
        GraphFamily::Rrg => format!("{}", param as u64),
        _ => format!("{param}"),
    }
}

fn cells(spec: &SuiteSpec) -> Vec<Cell> {
    match spec.graph {
        GraphFamily::Files => spec
            .files
            .iter()
            .map(|f| Cell {
                label: f
                    .file_stem()
                    .and_then(|s| s.to_str())
                    .unwrap_or("instance")
                    .to_string(),
                source: CellSource::File(f.clone()),
            })
            .collect(),
        family => spec
            .sizes
            .iter()
            .flat_map(|&n| {
                spec.degrees.iter().map(move |&param| Cell {
                    label: format_param(family, param),
                    source: CellSource::Random { n, param },
                })
            })
            .collect(),
    }
}

/// Reads a Gset or edge-list file.
pub fn read_graph(path: &Path) -> Result<Graph, BenchError> {
    let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
    let parsed = match detect_format(path) {
        InstanceFormat::Gset => parse_gset(&text),
        InstanceFormat::EdgeList => parse_edge_list(&text),
        InstanceFormat::Dbm => {
            return Err(BenchError::Spec(format!(
                "{} is a matching instance, not a graph",
                path.display()
            )))
        }
    };
    parsed.map_err(|source| BenchError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

fn resolve(path: &Path, data_dir: Option<&Path>) -> PathBuf {
    match data_dir {
        Some(dir) if path.is_relative() && !path.exists() => dir.join(path),
        _ => path.to_path_buf(),
    }
}

/// Exact optimum of the metric, when the instance is small enough.
fn exact_value(problem: BenchProblem, graph: &Graph, lambda: f64) -> Result<f64, String> {
    let n = graph.num_nodes().max(1) as f64;
    let budget = OracleBudget::default();
    let solution = match problem {
        BenchProblem::Mis => {
            brute_force(&MisProblem::new(graph.clone(), lambda).map_err(|e| e.to_string())?, budget)
        }
        BenchProblem::MaxCut => brute_force(&MaxCutProblem::new(graph.clone()), budget),
    }
    .map_err(|e| e.to_string())?;
    let (_, cost) = solution.feasible.ok_or("no feasible state")?;
    Ok(-cost / n)
}

fn reference_for(
    spec: &SuiteSpec,
    cell: &Cell,
    graph: &Graph,
    theory: Option<&BTreeMap<u64, f64>>,
    lambda: f64,
) -> (ReferenceKind, Option<f64>) {
    let n = graph.num_nodes().max(1) as f64;
    let theory_value = match (&cell.source, spec.graph, spec.problem) {
        (CellSource::Random { param, .. }, GraphFamily::Rrg, BenchProblem::Mis) => {
            theory.and_then(|t| t.get(&(*param as u64)).copied())
        }
        (CellSource::Random { param, .. }, GraphFamily::Rrg, BenchProblem::MaxCut) => {
            Some(maxcut_upper_bound(*param))
        }
        _ => None,
    };
    let best_known = match (&cell.source, spec.problem) {
        (CellSource::File(_), BenchProblem::MaxCut) => gset_best_known(&cell.label).map(|c| c / n),
        _ => None,
    };
    let exact = || exact_value(spec.problem, graph, lambda).ok();
    let small = graph.num_nodes() <= OracleBudget::default().max_nodes;
    match spec.reference {
        ReferenceKind::Theory => (ReferenceKind::Theory, theory_value),
        ReferenceKind::BestKnown => (ReferenceKind::BestKnown, best_known),
        ReferenceKind::Exact => (ReferenceKind::Exact, exact()),
        ReferenceKind::None => (ReferenceKind::None, None),
        ReferenceKind::Auto => {
            if small {
                (ReferenceKind::Exact, exact())
            } else if best_known.is_some() {
                (ReferenceKind::BestKnown, best_known)
            } else if theory_value.is_some() {
                (ReferenceKind::Theory, theory_value)
            } else {
                (ReferenceKind::None, None)
            }
        }
    }
}

fn run_solver(
    spec: &SuiteSpec,
    solver: SolverKind,
    graph: &Graph,
    lambda: f64,
    timing: bool,
) -> Result<SolverRun, String> {
    let start = Instant::now();
    let n = graph.num_nodes().max(1) as f64;
    let seeds = spec.solve.seeds.unwrap_or(5).max(1);
    let mut traces = Vec::new();
    let metric = |x: &[u8]| match spec.problem {
        BenchProblem::Mis => is_density(x),
        BenchProblem::MaxCut => cut_ratio(graph, x),
    };
    let (value, feasible) = match solver {
        SolverKind::Cra(arch) | SolverKind::Pi(arch) => {
            let cfg = spec
                .solve_config(arch, matches!(solver, SolverKind::Cra(_)))
                .map_err(|e| e.to_string())?;
            let result = match spec.problem {
                BenchProblem::Mis => {
                    let p = MisProblem::new(graph.clone(), lambda).map_err(|e| e.to_string())?;
                    solve_with_timing(&p, &cfg, false)
                }
                BenchProblem::MaxCut => solve_with_timing(&MaxCutProblem::new(graph.clone()), &cfg, false),
            }
            .map_err(|e| e.to_string())?;
            if spec.trace {
                traces = result.per_seed.iter().map(|r| (r.seed, r.trace.clone())).collect();
            }
            let value = if result.feasible { -result.best_cost / n } else { 0.0 };
            (value, result.feasible)
        }
        SolverKind::Dga | SolverKind::Rga | SolverKind::GreedyMaxcut => {
            // mean over seeds, each a single greedy construction
            let f = match solver {
                SolverKind::Dga => dga_mis,
                SolverKind::Rga => rga_mis,
                _ => greedy_maxcut,
            };
            let total: f64 = (0..seeds).map(|s| metric(&f(graph, RngSeed(s)))).sum();
            (total / seeds as f64, true)
        }
        SolverKind::Exact => (exact_value(spec.problem, graph, lambda)?, true),
    };
    Ok(SolverRun {
        value,
        feasible,
        wall_time_s: timing.then(|| start.elapsed().as_secs_f64()),
        traces,
    })
}

fn run_task(
    spec: &SuiteSpec,
    cells: &[Cell],
    task: &Task,
    theory: Option<&BTreeMap<u64, f64>>,
    options: &BenchOptions,
) -> Result<TaskOutput, String> {
    let cell = &cells[task.cell];
    let lambda = spec.lambda.unwrap_or(MisProblem::DEFAULT_LAMBDA);
    let (graph, name, instance_seed) = match &cell.source {
        CellSource::Random { n, param } => {
            let seed = spec.instance_seed + task.instance as u64;
            let g = match spec.graph {
                GraphFamily::Rrg => generate_rrg(*n, *param as usize, RngSeed(seed)),
                _ => generate_erg(*n, *param, RngSeed(seed)),
            }
            .map_err(|e| e.to_string())?;
            (g, format!("{}-{}-{}-{}", spec.graph_label(), n, cell.label, seed), Some(seed))
        }
        CellSource::File(path) => {
            let path = resolve(path, options.data_dir.as_deref());
            (read_graph(&path).map_err(|e| e.to_string())?, cell.label.clone(), None)
        }
    };
    let reference = reference_for(spec, cell, &graph, theory, lambda);
    let runs = spec
        .solvers
        .iter()
        .map(|&s| run_solver(spec, s, &graph, lambda, options.timing))
        .collect();
    Ok(TaskOutput {
        n: graph.num_nodes(),
        name,
        instance_seed,
        reference,
        runs,
    })
}

impl SuiteSpec {
    fn graph_label(&self) -> &'static str {
        match self.graph {
            GraphFamily::Rrg => "rrg",
            GraphFamily::Erg => "erg",
            GraphFamily::Files => "file",
        }
    }
}

fn load_theory(spec: &SuiteSpec, options: &BenchOptions) -> Result<Option<BTreeMap<u64, f64>>, BenchError> {
    let wants = spec.problem == BenchProblem::Mis
        && matches!(spec.reference, ReferenceKind::Theory | ReferenceKind::Auto);
    match (&options.data_dir, wants) {
        (Some(dir), true) => {
            let path = dir.join(MIS_THEORY_FILE);
            if path.exists() {
                load_mis_theory(&path).map(Some)
            } else {
                Ok(None)
            }
        }
        _ => Ok(None),
    }
}

/// Runs every (cell, instance, solver) combination and aggregates per (cell, solver).
///
/// Validation problems are errors; failures inside a cell are collected in
/// [`BenchOutcome::failures`] and the remaining cells still run.
pub fn run_benchmark(spec: &SuiteSpec, options: &BenchOptions) -> Result<BenchOutcome, BenchError> {
    spec.validate()?;
    let theory = load_theory(spec, options)?;
    let cells = cells(spec);
    let per_cell = if spec.graph == GraphFamily::Files { 1 } else { spec.instances };
    let tasks: Vec<Task> = (0..cells.len())
        .flat_map(|cell| (0..per_cell).map(move |instance| Task { cell, instance }))
        .collect();

    let work = || -> Vec<Result<TaskOutput, String>> {
        tasks
            .par_iter()
            .map(|t| run_task(spec, &cells, t, theory.as_ref(), options))
            .collect()
    };
    let outputs = match options.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build()
            .map_err(|e| BenchError::Spec(format!("cannot start worker pool: {e}")))?
            .install(work),
        None => work(),
    };

    let mut outcome = BenchOutcome::default();
    for (c, cell) in cells.iter().enumerate() {
        let cell_outputs: Vec<(usize, &Result<TaskOutput, String>)> = tasks
            .iter()
            .zip(&outputs)
            .filter(|(t, _)| t.cell == c)
            .map(|(t, o)| (t.instance, o))
            .collect();
        let nominal_n = match &cell.source {
            CellSource::Random { n, .. } => *n,
            CellSource::File(_) => 0,
        };
        for (si, &solver) in spec.solvers.iter().enumerate() {
            let mut instances = Vec::new();
            let mut n = nominal_n;
            let mut reference_kind = ReferenceKind::None;
            for (instance, output) in &cell_outputs {
                let out = match output {
                    Ok(out) => out,
                    Err(error) => {
                        outcome.failures.push(CellFailure {
                            n,
                            d_or_p: cell.label.clone(),
                            instance: instance.to_string(),
                            solver: solver.to_string(),
                            error: error.clone(),
                        });
                        continue;
                    }
                };
                n = out.n;
                reference_kind = out.reference.0;
                match &out.runs[si] {
                    Ok(run) => {
                        let reference_value = out.reference.1;
                        instances.push(InstanceOutcome {
                            name: out.name.clone(),
                            instance_seed: out.instance_seed,
                            value: run.value,
                            feasible: run.feasible,
                            reference_value,
                            apr: apr(run.value, reference_value),
                            wall_time_s: run.wall_time_s,
                        });
                        for (seed, trace) in &run.traces {
                            outcome.traces.push(TraceRecord {
                                suite: spec.name.clone(),
                                problem: spec.problem,
                                n: out.n,
                                d_or_p: cell.label.clone(),
                                solver: solver.to_string(),
                                instance: out.name.clone(),
                                seed: *seed,
                                trace: trace.clone(),
                            });
                        }
                    }
                    Err(error) => outcome.failures.push(CellFailure {
                        n: out.n,
                        d_or_p: cell.label.clone(),
                        instance: out.name.clone(),
                        solver: solver.to_string(),
                        error: error.clone(),
                    }),
                }
            }
            if instances.is_empty() {
                continue;
            }
            outcome.reports.push(aggregate(spec, cell, solver, n, reference_kind, instances)?);
        }
    }
    Ok(outcome)
}

fn aggregate(
    spec: &SuiteSpec,
    cell: &Cell,
    solver: SolverKind,
    n: usize,
    reference: ReferenceKind,
    instances: Vec<InstanceOutcome>,
) -> Result<MetricReport, BenchError> {
    let values: Vec<f64> = instances.iter().map(|i| i.value).collect();
    let (mean, std) = mean_std(&values);
    let aprs: Option<Vec<f64>> = instances.iter().map(|i| i.apr).collect();
    let (apr_mean, apr_std) = match aprs {
        Some(a) => {
            let (m, s) = mean_std(&a);
            (Some(m), Some(s))
        }
        None => (None, None),
    };
    let refs: Option<Vec<f64>> = instances.iter().map(|i| i.reference_value).collect();
    let feasible = instances.iter().filter(|i| i.feasible).count() as f64 / instances.len() as f64;
    let config = match solver {
        SolverKind::Cra(a) => Some(spec.solve_config(a, true)?),
        SolverKind::Pi(a) => Some(spec.solve_config(a, false)?),
        _ => None,
    };
    let seed_count = match (&config, solver) {
        (Some(c), _) => c.seeds.len(),
        (None, SolverKind::Exact) => 1,
        _ => spec.solve.seeds.unwrap_or(5).max(1) as usize,
    };
    let config_hash = match &config {
        Some(c) => config_hash(&(solver.to_string(), c, spec.lambda)),
        None => config_hash(&(solver.to_string(), seed_count, spec.lambda)),
    };
    let times: Option<Vec<f64>> = instances.iter().map(|i| i.wall_time_s).collect();
    Ok(MetricReport {
        suite: spec.name.clone(),
        problem: spec.problem,
        n,
        d_or_p: cell.label.clone(),
        solver: solver.to_string(),
        seed_count,
        metric_name: spec.problem.metric_name().to_string(),
        mean,
        std,
        reference,
        reference_value: refs.map(|r| mean_std(&r).0),
        apr: apr_mean,
        apr_std,
        feasible_fraction: feasible,
        instance_seed: match cell.source {
            CellSource::Random { .. } => Some(spec.instance_seed),
            CellSource::File(_) => None,
        },
        config_hash,
        code_version: CODE_VERSION.to_string(),
        wall_time_s: times.map(|t| t.iter().sum()),
        config: if solver.is_trained() { config } else { None },
        instances,
    })
}

/// Grid over the annealing schedule of the trained solvers in `suite`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default)]
    pub gamma0: Vec<f64>,
    #[serde(default)]
    pub rate: Vec<f64>,
    #[serde(default)]
    pub alpha: Vec<u32>,
    pub suite: SuiteSpec,
}

impl SweepSpec {
    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| BenchError::Spec(e.to_string()))
        } else {
            toml::from_str(&text).map_err(|e| BenchError::Spec(e.to_string()))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub gamma0: f64,
    pub rate: f64,
    pub alpha: u32,
    pub report: MetricReport,
}

/// Runs the suite once per grid point; empty axes keep the suite's value.
/// Only annealed solvers are swept.
pub fn run_sweep(spec: &SweepSpec, options: &BenchOptions) -> Result<(Vec<SweepRow>, Vec<CellFailure>), BenchError> {
    for &a in &spec.alpha {
        Alpha::new(a)?;
    }
    let mut suite = spec.suite.clone();
    suite.solvers.retain(|s| matches!(s, SolverKind::Cra(_)));
    if suite.solvers.is_empty() {
        return Err(BenchError::Spec("a sweep needs at least one cra-* solver".into()));
    }
    suite.validate()?;
    let base = suite.solve_config(Architecture::Sage, true)?;
    let base_schedule = base.schedule.expect("annealed config has a schedule");
    let axis = |v: &[f64], default: f64| if v.is_empty() { vec![default] } else { v.to_vec() };
    let gammas = axis(&spec.gamma0, base_schedule.gamma0);
    let rates = axis(&spec.rate, base_schedule.rate);
    let alphas = if spec.alpha.is_empty() {
        vec![base_schedule.alpha.get()]
    } else {
        spec.alpha.clone()
    };

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for &gamma0 in &gammas {
        for &rate in &rates {
            for &alpha in &alphas {
                let mut point = suite.clone();
                point.solve.gamma0 = Some(gamma0);
                point.solve.rate = Some(rate);
                point.solve.alpha = Some(alpha);
                let outcome = run_benchmark(&point, options)?;
                failures.extend(outcome.failures);
                rows.extend(outcome.reports.into_iter().map(|report| SweepRow {
                    gamma0,
                    rate,
                    alpha,
                    report,
                }));
            }
        }
    }
    Ok((rows, failures))
}

/// Sweep over the curve rate only, defaulting to `α ∈ {2, 4, 6, 8}`.
pub fn sweep_alpha(
    suite: &SuiteSpec,
    alphas: &[u32],
    options: &BenchOptions,
) -> Result<(Vec<SweepRow>, Vec<CellFailure>), BenchError> {
    let alpha = if alphas.is_empty() { vec![2, 4, 6, 8] } else { alphas.to_vec() };
    run_sweep(
        &SweepSpec {
            gamma0: Vec::new(),
            rate: Vec::new(),
            alpha,
            suite: suite.clone(),
        },
        options,
    )
}
