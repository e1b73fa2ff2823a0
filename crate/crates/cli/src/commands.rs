use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use cra_core::baselines::{brute_force, dga_mis, greedy_maxcut, rga_mis, OracleBudget};
use cra_core::bench::{
    self, cut_ratio, gset_best_known, is_density, mean_std, run_benchmark, run_sweep,
    write_outputs, write_summary_json, write_sweep_csv, BenchError, BenchOptions, SuiteSpec,
    SweepSpec,
};
use cra_core::formats::{detect_format, parse_edge_list, parse_gset, write_edge_list, write_gset, InstanceFormat};
use cra_core::generate::{generate_erg, generate_rrg};
use cra_core::model::Architecture;
use cra_core::problems::{
    ColoringProblem, DbmInstance, DbmProblem, MaxCutProblem, MisProblem, Objective, ProblemKind,
};
use cra_core::solver::{diagnose_plateau, solve_with_timing, SolveConfig, SolveOverrides, SolveResult};
use cra_core::{Graph, RngSeed};
use serde::Serialize;

use crate::config::{layer, merge_overrides, ConfigFile};
use crate::manifest::{output_dir, RunManifest, RunStatus};
use crate::{
    BaselineArgs, BaselineKind, ExactArgs, Failure, FailureExt, GenerateKind, GraphFormat,
    ProblemArg, ProblemArgs, SolveArgs, SuiteArgs,
};

/// Environment variable naming the data directory (instances and reference tables).
pub const DATA_ENV: &str = "CRA_SOLVE_DATA";

fn data_dir() -> Option<PathBuf> {
    std::env::var_os(DATA_ENV).map(PathBuf::from)
}

/// `path` as given, or under the data directory when it only exists there.
fn resolve_instance(path: &Path) -> PathBuf {
    if path.exists() || path.is_absolute() {
        return path.to_path_buf();
    }
    match data_dir() {
        Some(dir) if dir.join(path).exists() => dir.join(path),
        _ => path.to_path_buf(),
    }
}

enum Instance {
    Graph(Graph),
    Dbm(DbmInstance),
}

fn load_instance(path: &Path) -> anyhow::Result<Instance> {
    let path = resolve_instance(path);
    let text = std::fs::read_to_string(&path)
        .with_context(|| format!("cannot read instance {}", path.display()))?;
    let context = || format!("invalid instance {}", path.display());
    Ok(match detect_format(&path) {
        InstanceFormat::Gset => Instance::Graph(parse_gset(&text).with_context(context)?),
        InstanceFormat::EdgeList => Instance::Graph(parse_edge_list(&text).with_context(context)?),
        InstanceFormat::Dbm => {
            let inst: DbmInstance = serde_json::from_str(&text).with_context(context)?;
            inst.validate().with_context(context)?;
            Instance::Dbm(inst)
        }
    })
}

fn build_problem(
    kind: ProblemArg,
    instance: Instance,
    lambda: Option<f64>,
    colors: Option<usize>,
) -> anyhow::Result<Box<dyn Objective>> {
    if lambda.is_some() && kind != ProblemArg::Mis {
        bail!("--lambda applies to --problem mis only");
    }
    if colors.is_some() && kind != ProblemArg::Coloring {
        bail!("--colors applies to --problem coloring only");
    }
    Ok(match (kind, instance) {
        (ProblemArg::Dbm, Instance::Dbm(inst)) => Box::new(DbmProblem::new(inst)?),
        (ProblemArg::Dbm, Instance::Graph(_)) => bail!("--problem dbm needs a matching JSON instance"),
        (_, Instance::Dbm(_)) => bail!("a matching JSON instance needs --problem dbm"),
        (ProblemArg::Mis, Instance::Graph(g)) => {
            Box::new(MisProblem::new(g, lambda.unwrap_or(MisProblem::DEFAULT_LAMBDA))?)
        }
        (ProblemArg::Maxcut, Instance::Graph(g)) => Box::new(MaxCutProblem::new(g)),
        (ProblemArg::Coloring, Instance::Graph(g)) => {
            let k = colors.ok_or_else(|| anyhow!("--problem coloring needs --colors"))?;
            Box::new(ColoringProblem::new(g, k)?)
        }
    })
}

fn instance_name(path: &Path) -> String {
    path.file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("instance")
        .to_string()
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    write_summary_json(path, value).map_err(anyhow::Error::from)
}

fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> anyhow::Result<T> {
    match jobs {
        Some(j) => Ok(rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build()
            .context("cannot start worker pool")?
            .install(f)),
        None => Ok(f()),
    }
}

pub fn generate(kind: GenerateKind) -> Result<(), Failure> {
    let (out, text, config, seed) = match kind {
        GenerateKind::Rrg { n, d, seed, out, format } => {
            let g = generate_rrg(n, d, RngSeed(seed)).invalid()?;
            let config = serde_json::json!({"kind": "rrg", "n": n, "d": d, "seed": seed});
            (out, graph_text(&g, format), config, seed)
        }
        GenerateKind::Erg { n, p, seed, out, format } => {
            let g = generate_erg(n, p, RngSeed(seed)).invalid()?;
            let config = serde_json::json!({"kind": "erg", "n": n, "p": p, "seed": seed});
            (out, graph_text(&g, format), config, seed)
        }
        GenerateKind::Dbm { n1, n2, frac, seed, out } => {
            if n1 == 0 || n2 == 0 {
                return Err(Failure::Validation(anyhow!("--n1 and --n2 must be positive")));
            }
            if !(0.0..=1.0).contains(&frac) {
                return Err(Failure::Validation(anyhow!("--frac {frac} outside [0, 1]")));
            }
            let inst = DbmInstance::generate(n1, n2, frac, RngSeed(seed));
            let config = serde_json::json!({"kind": "dbm", "n1": n1, "n2": n2, "frac": frac, "seed": seed});
            let mut text = serde_json::to_string_pretty(&inst).runtime()?;
            text.push('\n');
            (out, text, config, seed)
        }
    };
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)
            .with_context(|| format!("cannot create {}", parent.display()))
            .runtime()?;
    }
    let manifest_path = PathBuf::from(format!("{}.manifest.json", out.display()));
    let mut manifest = RunManifest::start(manifest_path, "generate", config, vec![seed]).runtime()?;
    std::fs::write(&out, text)
        .with_context(|| format!("cannot write {}", out.display()))
        .runtime()?;
    manifest.finish(RunStatus::Ok, vec![out.clone()]).runtime()?;
    println!("wrote {}", out.display());
    Ok(())
}

fn graph_text(g: &Graph, format: GraphFormat) -> String {
    match format {
        GraphFormat::Edges => write_edge_list(g),
        GraphFormat::Gset => write_gset(g),
    }
}

/// Everything `solve` runs with after layering flags over the config file.
#[derive(Debug, Serialize)]
struct ResolvedSolve {
    instance: PathBuf,
    problem: ProblemKind,
    lambda: Option<f64>,
    colors: Option<usize>,
    solver: SolveConfig,
}

fn resolve_solve(args: &SolveArgs) -> anyhow::Result<ResolvedSolve> {
    let file = match &args.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let mut conflicts = Vec::new();
    let flags = SolveOverrides {
        gamma0: args.gamma0,
        rate: args.rate,
        alpha: args.alpha,
        gamma_cap: args.gamma_cap,
        lr: args.lr,
        weight_decay: args.weight_decay,
        tolerance: args.tolerance,
        patience: args.patience,
        max_epochs: args.max_epochs,
        seeds: args.seeds,
        trace_every: args.trace_every,
        threshold: args.threshold,
        precision: args.precision,
        embedding: None,
        entropy_penalty: args.entropy.then_some(true),
    };
    let overrides = merge_overrides(&flags, &file.solve, &mut conflicts)?;
    let arch = layer("arch", args.arch, file.arch, &mut conflicts).unwrap_or(Architecture::Sage);
    let lambda = layer("lambda", args.problem.lambda, file.lambda, &mut conflicts);
    let colors = layer("colors", args.problem.colors, file.colors, &mut conflicts);
    let anneal = layer("anneal", args.no_anneal.then_some(false), file.anneal, &mut conflicts)
        .unwrap_or(true);
    for c in &conflicts {
        eprintln!("note: {c}");
    }
    if !anneal {
        let schedule_keys = [
            ("gamma0", overrides.gamma0.is_some()),
            ("rate", overrides.rate.is_some()),
            ("gamma-cap", overrides.gamma_cap.is_some()),
        ];
        if let Some((key, _)) = schedule_keys.iter().find(|(_, set)| *set) {
            bail!("--{key} conflicts with --no-anneal (no schedule is used)");
        }
    }
    let problem = args.problem.problem.kind();
    let mut solver = SolveConfig::for_problem(problem, arch);
    if !anneal {
        solver.schedule = None;
    }
    overrides.apply(&mut solver)?;
    Ok(ResolvedSolve {
        instance: resolve_instance(&args.problem.instance),
        problem,
        lambda,
        colors,
        solver,
    })
}

pub fn solve(args: SolveArgs) -> Result<(), Failure> {
    let resolved = resolve_solve(&args).invalid()?;
    let instance = load_instance(&resolved.instance).invalid()?;
    let problem = build_problem(args.problem.problem, instance, resolved.lambda, resolved.colors).invalid()?;
    let dir = output_dir(args.out.as_deref(), "solve").runtime()?;
    let seeds = resolved.solver.seeds.iter().map(|s| s.0).collect();
    let config = serde_json::to_value(&resolved).runtime()?;
    let mut manifest = RunManifest::start(dir.join("manifest.json"), "solve", config, seeds).runtime()?;

    let outcome = with_pool(args.jobs, || solve_with_timing(problem.as_ref(), &resolved.solver, args.timing))
        .runtime()
        .and_then(|r| r.runtime());
    let result = match outcome {
        Ok(r) => r,
        Err(e) => {
            manifest.finish(RunStatus::Failed, Vec::new()).runtime()?;
            return Err(e);
        }
    };
    let path = dir.join("result.json");
    write_json(&path, &result).runtime()?;
    manifest.finish(RunStatus::Ok, vec![path.clone()]).runtime()?;
    print_solve_summary(&result, &args.problem.instance);
    println!("result: {}", path.display());
    Ok(())
}

fn print_solve_summary(result: &SolveResult, instance: &Path) {
    for run in &result.per_seed {
        println!(
            "seed {:>3}: epochs {:>6}  stop {:<12} cost {:>12}  feasible {}",
            run.seed.0,
            run.epochs,
            serde_json::to_value(run.stop_reason)
                .ok()
                .and_then(|v| v.as_str().map(str::to_string))
                .unwrap_or_default(),
            run.evaluation.objective,
            run.evaluation.feasible,
        );
    }
    let best = result.best();
    println!(
        "best: seed {}  cost {}  feasible {}",
        best.seed.0, result.best_cost, result.feasible
    );
    let n = result.num_vars;
    match result.problem {
        ProblemKind::Mis => println!(
            "independent set: {} nodes, density {:.4}",
            result.best_x.iter().filter(|&&b| b == 1).count(),
            is_density(&result.best_x)
        ),
        ProblemKind::MaxCut => {
            let cut = -result.best_cost;
            println!("cut: {cut}, ratio {:.4}", cut / n.max(1) as f64);
            if let Some(bk) = gset_best_known(&instance_name(instance)) {
                println!("best-known: {bk}, ApR {:.4}", cut / bk);
            }
        }
        _ => {}
    }
    let plateau = diagnose_plateau(result);
    if plateau.any() {
        for s in plateau.per_seed.iter().filter(|s| s.longest_epochs > 0) {
            println!(
                "plateau: seed {} stuck at p ≈ 0 for {} epochs{}",
                s.seed.0,
                s.longest_epochs,
                if s.ends_on_plateau { " (until the end)" } else { "" }
            );
        }
    } else {
        println!("plateau: none detected");
    }
}

#[derive(Debug, Serialize)]
struct BaselineRun {
    seed: u64,
    /// IS density or cut ratio.
    value: f64,
    cost: f64,
    feasible: bool,
    x: Vec<u8>,
}

#[derive(Debug, Serialize)]
struct BaselineResult {
    algorithm: String,
    problem: ProblemKind,
    num_nodes: usize,
    metric_name: &'static str,
    mean: f64,
    std: f64,
    best_seed: u64,
    best_value: f64,
    runs: Vec<BaselineRun>,
}

pub fn baseline(args: BaselineArgs) -> Result<(), Failure> {
    let problem_arg = match (args.algorithm, args.problem) {
        (BaselineKind::Dga | BaselineKind::Rga, None | Some(ProblemArg::Mis)) => ProblemArg::Mis,
        (BaselineKind::GreedyMaxcut, None | Some(ProblemArg::Maxcut)) => ProblemArg::Maxcut,
        (BaselineKind::Exact, Some(p)) => p,
        (BaselineKind::Exact, None) => {
            return Err(Failure::Validation(anyhow!("baseline exact needs --problem")))
        }
        (alg, Some(p)) => {
            return Err(Failure::Validation(anyhow!("{alg:?} does not solve {p:?}")))
        }
    };
    if args.algorithm == BaselineKind::Exact {
        return exact(ExactArgs {
            problem: ProblemArgs {
                instance: args.instance,
                problem: problem_arg,
                lambda: args.lambda,
                colors: args.colors,
            },
            max_nodes: OracleBudget::default().max_nodes,
            out: args.out,
        });
    }
    if args.seeds == 0 {
        return Err(Failure::Validation(anyhow!("--seeds must be at least 1")));
    }
    let instance = load_instance(&args.instance).invalid()?;
    let Instance::Graph(graph) = instance else {
        return Err(Failure::Validation(anyhow!("greedy baselines need a graph instance")));
    };
    let problem = build_problem(problem_arg, Instance::Graph(graph.clone()), args.lambda, args.colors).invalid()?;
    let algorithm = match args.algorithm {
        BaselineKind::Dga => "dga",
        BaselineKind::Rga => "rga",
        _ => "greedy-maxcut",
    };
    let dir = output_dir(args.out.as_deref(), "baseline").runtime()?;
    let config = serde_json::json!({
        "algorithm": algorithm,
        "instance": resolve_instance(&args.instance),
        "problem": problem_arg.kind(),
        "lambda": args.lambda,
        "seeds": args.seeds,
    });
    let mut manifest = RunManifest::start(
        dir.join("manifest.json"),
        "baseline",
        config,
        (0..args.seeds).collect(),
    )
    .runtime()?;

    let mut runs = Vec::new();
    for seed in 0..args.seeds {
        let x = match args.algorithm {
            BaselineKind::Dga => dga_mis(&graph, RngSeed(seed)),
            BaselineKind::Rga => rga_mis(&graph, RngSeed(seed)),
            _ => greedy_maxcut(&graph, RngSeed(seed)),
        };
        let eval = problem.evaluate(&x).runtime()?;
        let value = match problem_arg {
            ProblemArg::Mis => is_density(&x),
            _ => cut_ratio(&graph, &x),
        };
        runs.push(BaselineRun {
            seed,
            value,
            cost: eval.objective,
            feasible: eval.feasible,
            x,
        });
    }
    let values: Vec<f64> = runs.iter().map(|r| r.value).collect();
    let (mean, std) = mean_std(&values);
    let best = runs
        .iter()
        .fold(&runs[0], |b, r| if r.value > b.value { r } else { b });
    let result = BaselineResult {
        algorithm: algorithm.to_string(),
        problem: problem_arg.kind(),
        num_nodes: graph.num_nodes(),
        metric_name: if problem_arg == ProblemArg::Mis { "is_density" } else { "cut_ratio" },
        mean,
        std,
        best_seed: best.seed,
        best_value: best.value,
        runs,
    };
    let path = dir.join("baseline.json");
    write_json(&path, &result).runtime()?;
    manifest.finish(RunStatus::Ok, vec![path.clone()]).runtime()?;
    println!(
        "{algorithm}: {} mean {mean:.4} ± {std:.4} over {} seed(s), best {:.4} (seed {})",
        result.metric_name, args.seeds, result.best_value, result.best_seed
    );
    if problem_arg == ProblemArg::Maxcut {
        if let Some(bk) = gset_best_known(&instance_name(&args.instance)) {
            let cut = result.best_value * graph.num_nodes() as f64;
            println!("best-known: {bk}, ApR {:.4}", cut / bk);
        }
    }
    println!("result: {}", path.display());
    Ok(())
}

pub fn exact(args: ExactArgs) -> Result<(), Failure> {
    let instance = load_instance(&args.problem.instance).invalid()?;
    let problem = build_problem(args.problem.problem, instance, args.problem.lambda, args.problem.colors).invalid()?;
    let budget = OracleBudget {
        max_nodes: args.max_nodes,
        ..OracleBudget::default()
    };
    let dir = output_dir(args.out.as_deref(), "exact").runtime()?;
    let config = serde_json::json!({
        "instance": resolve_instance(&args.problem.instance),
        "problem": args.problem.problem.kind(),
        "lambda": args.problem.lambda,
        "colors": args.problem.colors,
        "budget": budget,
    });
    let mut manifest = RunManifest::start(dir.join("manifest.json"), "exact", config, Vec::new()).runtime()?;
    let solution = match brute_force(problem.as_ref(), budget) {
        Ok(s) => s,
        Err(e) => {
            manifest.finish(RunStatus::Failed, Vec::new()).runtime()?;
            return Err(Failure::Validation(e.into()));
        }
    };
    let path = dir.join("exact.json");
    write_json(
        &path,
        &serde_json::json!({"problem": args.problem.problem.kind(), "solution": solution}),
    )
    .runtime()?;
    manifest.finish(RunStatus::Ok, vec![path.clone()]).runtime()?;
    println!("states enumerated: {}", solution.states);
    println!("penalized optimum: {}", solution.penalized_cost);
    match &solution.feasible {
        Some((_, cost)) => println!("feasible optimum: {cost}"),
        None => println!("feasible optimum: none"),
    }
    println!("result: {}", path.display());
    Ok(())
}

fn bench_failure(e: BenchError) -> Failure {
    match e {
        BenchError::Io { .. } | BenchError::Csv(_) | BenchError::Json(_) => Failure::Runtime(e.into()),
        _ => Failure::Validation(e.into()),
    }
}

/// Relative instance paths in a suite resolve against the suite's directory first.
fn anchor_files(spec: &mut SuiteSpec, suite_path: &Path) {
    let base = suite_path.parent().unwrap_or(Path::new(""));
    for f in &mut spec.files {
        if f.is_relative() && !f.exists() && base.join(&*f).exists() {
            *f = base.join(&*f);
        }
    }
}

fn bench_options(args: &SuiteArgs) -> BenchOptions {
    BenchOptions {
        jobs: args.jobs,
        timing: args.timing,
        data_dir: data_dir(),
    }
}

fn report_failures(failures: &[bench::CellFailure]) -> Result<(), Failure> {
    for f in failures {
        eprintln!(
            "failed: n={} {} instance {} solver {}: {}",
            f.n, f.d_or_p, f.instance, f.solver, f.error
        );
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Partial(failures.len()))
    }
}

fn seed_list(overrides: &SolveOverrides) -> Vec<u64> {
    (0..overrides.seeds.unwrap_or(5)).collect()
}

pub fn bench(args: SuiteArgs) -> Result<(), Failure> {
    let mut spec = SuiteSpec::load(&args.spec).map_err(bench_failure)?;
    anchor_files(&mut spec, &args.spec);
    spec.validate().map_err(bench_failure)?;
    let dir = output_dir(args.out.as_deref(), "bench").runtime()?;
    let config = serde_json::to_value(&spec).runtime()?;
    let mut manifest =
        RunManifest::start(dir.join("manifest.json"), "bench", config, seed_list(&spec.solve)).runtime()?;
    let outcome = match run_benchmark(&spec, &bench_options(&args)) {
        Ok(o) => o,
        Err(e) => {
            manifest.finish(RunStatus::Failed, Vec::new()).runtime()?;
            return Err(bench_failure(e));
        }
    };
    let written = write_outputs(&outcome, &dir).map_err(bench_failure)?;
    let status = if outcome.failures.is_empty() { RunStatus::Ok } else { RunStatus::Partial };
    manifest.finish(status, written).runtime()?;
    for r in &outcome.reports {
        let apr = r.apr.map(|a| format!("{a:.4}")).unwrap_or_else(|| "-".into());
        println!(
            "n={:<6} {:<6} {:<14} {} {:.4} ± {:.4}  ApR {apr} ({})",
            r.n, r.d_or_p, r.solver, r.metric_name, r.mean, r.std, r.reference
        );
    }
    println!("outputs: {}", dir.display());
    report_failures(&outcome.failures)
}

pub fn sweep(args: SuiteArgs) -> Result<(), Failure> {
    let mut spec = SweepSpec::load(&args.spec).map_err(bench_failure)?;
    anchor_files(&mut spec.suite, &args.spec);
    spec.suite.validate().map_err(bench_failure)?;
    let dir = output_dir(args.out.as_deref(), "sweep").runtime()?;
    let config = serde_json::to_value(&spec).runtime()?;
    let mut manifest =
        RunManifest::start(dir.join("manifest.json"), "sweep", config, seed_list(&spec.suite.solve)).runtime()?;
    let (rows, failures) = match run_sweep(&spec, &bench_options(&args)) {
        Ok(r) => r,
        Err(e) => {
            manifest.finish(RunStatus::Failed, Vec::new()).runtime()?;
            return Err(bench_failure(e));
        }
    };
    let csv = dir.join("sweep.csv");
    write_sweep_csv(&csv, &rows).map_err(bench_failure)?;
    let summary = dir.join("summary.json");
    write_json(&summary, &serde_json::json!({"rows": rows, "failures": failures})).runtime()?;
    let status = if failures.is_empty() { RunStatus::Ok } else { RunStatus::Partial };
    manifest.finish(status, vec![csv, summary]).runtime()?;
    for r in &rows {
        println!(
            "gamma0 {:<6} rate {:<8} alpha {}  {} n={} {}: {:.4}",
            r.gamma0, r.rate, r.alpha, r.report.solver, r.report.n, r.report.metric_name, r.report.mean
        );
    }
    println!("outputs: {}", dir.display());
    report_failures(&failures)
}
