//! Acceptance criteria. Each test prints one `criterion N ...: PASS|FAIL` line
//! before asserting. Criterion 7 needs `G14` under `$CRA_SOLVE_DATA` and is
//! `#[ignore]`d as part of the slow suite.

use std::path::{Path, PathBuf};
use std::process::Command;

use cra_core::baselines::{brute_force, dga_mis, greedy_maxcut, rga_mis, OracleBudget};
use cra_core::bench::{gset_best_known, is_density};
use cra_core::formats::parse_gset;
use cra_core::generate::{generate_erg, generate_rrg};
use cra_core::model::{Architecture, EmbeddingMode, Model, ModelConfig, Precision};
use cra_core::penalty::{annealed_loss, phi, phi_potts, Alpha, Penalty, PottsVariant, StopReason};
use cra_core::problems::{
    ColoringProblem, DbmInstance, DbmProblem, Layout, MaxCutProblem, MisProblem, Objective,
    ProblemKind, MATCHING_1,
};
use cra_core::solver::{round_solution, solve, SolveConfig, SolveResult};
use cra_core::{Graph, RngSeed};
use rand::Rng;

fn report(id: u32, name: &str, pass: bool, detail: &str) {
    println!(
        "criterion {id} ({name}): {} | {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
}

// ---- criterion 1 --------------------------------------------------------

/// Relative error with the scale floored at `floor`.
fn rel_err(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

fn central(mut f: impl FnMut(&[f64]) -> f64, x: &[f64], i: usize, h: f64) -> f64 {
    let mut y = x.to_vec();
    y[i] = x[i] + h;
    let up = f(&y);
    y[i] = x[i] - h;
    (up - f(&y)) / (2.0 * h)
}

/// Worst relative error of a problem's relaxed-loss gradient.
fn problem_error(problem: &dyn Objective, p: &[f64]) -> f64 {
    let (_, grad) = problem.relaxed_loss(p).unwrap();
    (0..p.len())
        .map(|i| {
            let num = central(|q| problem.relaxed_loss(q).unwrap().0, p, i, 1e-6);
            rel_err(grad[i], num, 1.0)
        })
        .fold(0.0, f64::max)
}

/// Worst relative error of parameter gradients under a linear upstream loss.
fn model_error(cfg: &ModelConfig, layout: Layout, graph: &Graph, seed: u64) -> f64 {
    let mut model = Model::<f64>::new(cfg, layout, graph, RngSeed(seed)).unwrap();
    let mut rng = RngSeed(seed ^ 0xACCE).rng();
    let c: Vec<f64> = (0..layout.num_vars()).map(|_| rng.random_range(-1.0..1.0)).collect();
    model.forward().unwrap();
    model.backward(&c).unwrap();
    let analytic = model.grads().to_vec();
    let theta = model.params().to_vec();
    let mut probe = model.clone();
    let mut loss = |t: &[f64]| {
        probe.params_mut().copy_from_slice(t);
        probe.forward().unwrap().iter().zip(&c).map(|(p, c)| p * c).sum::<f64>()
    };
    (0..theta.len())
        .map(|i| rel_err(analytic[i], central(&mut loss, &theta, i, 1e-6), 1e-6))
        .fold(0.0, f64::max)
}

#[test]
fn criterion_01_gradients() {
    const REL: f64 = 1e-5;
    const REL_GNN: f64 = 1e-4;
    let mut rng = RngSeed(101).rng();
    let mut worst = [0.0f64; 9];
    let names = ["mis", "maxcut", "coloring", "dbm", "phi", "phi-potts", "gcn", "sage", "direct"];
    for seed in 0..20 {
        let g = generate_erg(9, 0.4, RngSeed(seed)).unwrap();
        let p: Vec<f64> = (0..9).map(|_| rng.random_range(0.05..0.95)).collect();
        worst[0] = worst[0].max(problem_error(&MisProblem::new(g.clone(), 2.0).unwrap(), &p));
        worst[1] = worst[1].max(problem_error(&MaxCutProblem::new(g.clone()), &p));
        let pk: Vec<f64> = (0..27).map(|_| rng.random::<f64>()).collect();
        worst[2] = worst[2].max(problem_error(&ColoringProblem::new(g.clone(), 3).unwrap(), &pk));

        let alpha = Alpha::new(2 * (1 + seed as u32 % 4)).unwrap();
        let (_, grad) = phi(&p, alpha);
        let (_, grad_k) = phi_potts(&pk, 3, alpha, PottsVariant::Shifted).unwrap();
        for i in 0..p.len() {
            let num = central(|q| phi(q, alpha).0, &p, i, 1e-6);
            worst[4] = worst[4].max(rel_err(grad[i], num, 1.0));
        }
        for i in 0..pk.len() {
            let num = central(|q| phi_potts(q, 3, alpha, PottsVariant::Shifted).unwrap().0, &pk, i, 1e-6);
            worst[5] = worst[5].max(rel_err(grad_k[i], num, 1.0));
        }

        let rrg = generate_rrg(6, 3, RngSeed(seed)).unwrap();
        for (slot, arch) in [(6, Architecture::Gcn), (7, Architecture::Sage)] {
            for embedding in [EmbeddingMode::Trainable, EmbeddingMode::Fixed] {
                let cfg = ModelConfig {
                    arch,
                    embedding,
                    hidden: Some((4, 3)),
                    init_scale: 1.0,
                };
                worst[slot] = worst[slot].max(model_error(&cfg, Layout::Binary { len: 6 }, &rrg, seed));
                let layout = Layout::OneHot { rows: 6, classes: 3 };
                worst[slot] = worst[slot].max(model_error(&cfg, layout, &rrg, seed));
            }
        }
        let direct = ModelConfig {
            arch: Architecture::Direct,
            ..ModelConfig::default()
        };
        worst[8] = worst[8].max(model_error(&direct, Layout::Binary { len: 7 }, &Graph::empty(7), seed));
    }
    // matching penalties have relu kinks; only check points away from them
    let mut dbm_checked = 0;
    for seed in 0..200 {
        if dbm_checked == 20 {
            break;
        }
        let dbm = DbmProblem::new(DbmInstance::generate(3, 4, MATCHING_1, RngSeed(seed))).unwrap();
        let p: Vec<f64> = (0..12).map(|_| rng.random_range(0.0..0.7)).collect();
        let base = dbm.relaxed_loss(&p).unwrap().1;
        let smooth = (0..12).all(|i| {
            [1e-5, -1e-5].iter().all(|h| {
                let mut q = p.clone();
                q[i] += h;
                dbm.relaxed_loss(&q).unwrap().1 == base
            })
        });
        if smooth {
            worst[3] = worst[3].max(problem_error(&dbm, &p));
            dbm_checked += 1;
        }
    }
    let pass = dbm_checked == 20
        && worst[..6].iter().all(|&e| e <= REL)
        && worst[6] <= REL_GNN
        && worst[7] <= REL_GNN
        && worst[8] <= REL;
    let detail = names
        .iter()
        .zip(worst)
        .map(|(n, e)| format!("{n} {e:.1e}"))
        .collect::<Vec<_>>()
        .join(", ");
    report(1, "gradient correctness, 20 instances each, rel tol 1e-5 / 1e-4 GNN", pass, &detail);
    assert!(pass);
}

// ---- criterion 2 --------------------------------------------------------

const GRID: usize = 21;

fn annealed_value(problem: &dyn Objective, p: &[f64], gamma: f64) -> (f64, Vec<f64>) {
    let a = annealed_loss(problem, p, gamma, &Penalty::power(Alpha::TWO)).unwrap();
    (a.value, a.grad)
}

/// Exhaustive search over the 21-point grid per coordinate.
fn grid_minimizer(problem: &dyn Objective, n: usize, gamma: f64) -> Vec<f64> {
    let mut idx = vec![0usize; n];
    let mut p = vec![0.0; n];
    let mut best = (f64::INFINITY, p.clone());
    loop {
        for (pi, &k) in p.iter_mut().zip(&idx) {
            *pi = k as f64 / (GRID - 1) as f64;
        }
        let (v, _) = annealed_value(problem, &p, gamma);
        if v < best.0 {
            best = (v, p.clone());
        }
        let mut carry = true;
        for k in idx.iter_mut() {
            *k += 1;
            if *k < GRID {
                carry = false;
                break;
            }
            *k = 0;
        }
        if carry {
            return best.1;
        }
    }
}

/// Projected gradient descent from many random starts; returns the best end point.
fn multistart_minimizer(problem: &dyn Objective, n: usize, gamma: f64, starts: usize, seed: u64) -> Vec<f64> {
    let mut rng = RngSeed(seed).rng();
    let step = 1e-3;
    let mut best = (f64::INFINITY, Vec::new());
    for _ in 0..starts {
        let mut p: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        for _ in 0..5000 {
            let (_, g) = annealed_value(problem, &p, gamma);
            let mut moved = 0.0f64;
            for (pi, gi) in p.iter_mut().zip(&g) {
                let next = (*pi - step * gi).clamp(0.0, 1.0);
                moved = moved.max((next - *pi).abs());
                *pi = next;
            }
            if moved < 1e-12 {
                break;
            }
        }
        let (v, _) = annealed_value(problem, &p, gamma);
        if v < best.0 {
            best = (v, p);
        }
    }
    best.1
}

#[test]
fn criterion_02_vertex_minimizers() {
    let sizes = [4, 5, 5, 6, 7, 8, 8, 9, 10, 10];
    let mut failures = Vec::new();
    let mut grid_cases = 0;
    for (k, &n) in sizes.iter().enumerate() {
        let g = generate_erg(n, 0.4, RngSeed(200 + k as u64)).unwrap();
        let problems: [Box<dyn Objective>; 2] = [
            Box::new(MisProblem::new(g.clone(), 2.0).unwrap()),
            Box::new(MaxCutProblem::new(g)),
        ];
        for problem in &problems {
            let exact = brute_force(problem.as_ref(), OracleBudget::default()).unwrap();
            let use_grid = n <= 5;
            grid_cases += use_grid as usize;
            let search = |gamma: f64| {
                if use_grid {
                    grid_minimizer(problem.as_ref(), n, gamma)
                } else {
                    multistart_minimizer(problem.as_ref(), n, gamma, 8 << n, k as u64)
                }
            };
            let high = search(50.0);
            let integral = high.iter().all(|&v| v.min(1.0 - v) <= 0.05);
            let x = round_solution(&high, 0.5);
            let cost = problem.evaluate(&x).unwrap().penalized();
            if !integral || cost != exact.penalized_cost {
                failures.push(format!("{:?} n={n} γ=+50: cost {cost} vs {}", problem.kind(), exact.penalized_cost));
            }
            let low = search(-50.0);
            let cell = 1.0 / (GRID - 1) as f64;
            if low.iter().any(|&v| (v - 0.5).abs() > cell + 1e-12) {
                failures.push(format!("{:?} n={n} γ=-50: {low:?}", problem.kind()));
            }
        }
    }
    let pass = failures.is_empty();
    report(
        2,
        "vertex minimizers at γ=+50, centre at γ=-50",
        pass,
        &format!("20 problems on 10 graphs ({grid_cases} by grid, rest multi-start); failures: {failures:?}"),
    );
    assert!(pass);
}

// ---- criterion 3 --------------------------------------------------------

#[test]
fn criterion_03_penalty_gradient_bound() {
    let mut rng = RngSeed(303).rng();
    let mut worst_ratio = 0.0f64;
    let mut within = true;
    for s in 0..100_000 {
        let alpha = Alpha::new(2 * (1 + s % 4)).unwrap();
        let p = [rng.random::<f64>()];
        let (_, g) = phi(&p, alpha);
        let bound = 2.0 * alpha.get() as f64;
        within &= g[0].abs() <= bound;
        worst_ratio = worst_ratio.max(g[0].abs() / bound);
    }
    let mut attained = true;
    for a in [2, 4, 6, 8] {
        let alpha = Alpha::new(a).unwrap();
        let (_, g) = phi(&[0.0, 1.0], alpha);
        let bound = 2.0 * a as f64;
        attained &= g.iter().all(|v| (v.abs() - bound).abs() <= 1e-12);
    }
    let pass = within && attained;
    report(
        3,
        "|dΦ/dp| <= 2α over 1e5 samples, equality at 0 and 1",
        pass,
        &format!("max |g|/2α sampled {worst_ratio:.6}, endpoints attain bound: {attained}"),
    );
    assert!(pass);
}

// ---- criterion 4 --------------------------------------------------------

fn direct_config(kind: ProblemKind) -> SolveConfig {
    let mut cfg = SolveConfig::for_problem(kind, Architecture::Direct);
    let schedule = cfg.schedule.as_mut().unwrap();
    schedule.gamma0 = -5.0;
    schedule.rate = 1e-2;
    cfg.trace_every = 100;
    cfg
}

#[test]
fn criterion_04_oracle_equivalence() {
    let mut lines = Vec::new();
    let mut pass = true;
    for kind in [ProblemKind::Mis, ProblemKind::MaxCut] {
        let mut exact_hits = 0;
        let mut min_apr = f64::INFINITY;
        for k in 0..30u64 {
            let n = 8 + (k % 7) as usize;
            let g = generate_erg(n, 0.35, RngSeed(400 + k)).unwrap();
            let problem: Box<dyn Objective> = match kind {
                ProblemKind::Mis => Box::new(MisProblem::new(g, 2.0).unwrap()),
                _ => Box::new(MaxCutProblem::new(g)),
            };
            let (_, optimum) = brute_force(problem.as_ref(), OracleBudget::default())
                .unwrap()
                .feasible
                .unwrap();
            let result = solve(problem.as_ref(), &direct_config(kind)).unwrap();
            let apr = if result.feasible && optimum != 0.0 { result.best_cost / optimum } else { 0.0 };
            exact_hits += (result.feasible && result.best_cost == optimum) as usize;
            min_apr = min_apr.min(apr);
        }
        let ok = exact_hits * 10 >= 30 * 8 && min_apr >= 0.9;
        pass &= ok;
        lines.push(format!("{kind}: exact {exact_hits}/30, min ApR {min_apr:.3}"));
    }
    report(4, "direct CRA vs brute force, 30 instances, N<=14", pass, &lines.join("; "));
    assert!(pass);
}

// ---- criterion 5 --------------------------------------------------------

fn density(result: &SolveResult) -> f64 {
    if result.feasible { is_density(&result.best_x) } else { 0.0 }
}

#[test]
fn criterion_05_plateau_reproduction() {
    let (n, d) = (1000, 30);
    let mut rows = Vec::new();
    let mut pi_stuck = 0;
    let mut beats = true;
    let mut min_apr = f64::INFINITY;
    for inst in 1..=5u64 {
        let g = generate_rrg(n, d, RngSeed(inst)).unwrap();
        let mean = |f: fn(&Graph, RngSeed) -> Vec<u8>| {
            (0..5).map(|s| is_density(&f(&g, RngSeed(s)))).sum::<f64>() / 5.0
        };
        let (dga, rga) = (mean(dga_mis), mean(rga_mis));
        let problem = MisProblem::new(g.clone(), 2.0).unwrap();
        let run = |arch: Architecture, anneal: bool| {
            let mut cfg = SolveConfig::for_problem(ProblemKind::Mis, arch);
            if !anneal {
                cfg.schedule = None;
            }
            cfg.precision = Precision::F32;
            cfg.seeds = vec![RngSeed(0)];
            cfg.trace_every = 500;
            solve(&problem, &cfg).unwrap()
        };
        let pi = density(&run(Architecture::Gcn, false));
        let cra = density(&run(Architecture::Sage, true));
        pi_stuck += (pi < 0.05) as usize;
        beats &= cra > pi && cra > rga;
        min_apr = min_apr.min(cra / dga);
        rows.push(format!("#{inst} pi {pi:.3} cra {cra:.3} dga {dga:.3} rga {rga:.3}"));
    }
    let pass = pi_stuck >= 4 && beats && min_apr >= 0.85;
    report(
        5,
        "plain loop stuck, annealed escapes, RRG(1000, 30)",
        pass,
        &format!("pi<0.05 on {pi_stuck}/5, cra beats pi and rga: {beats}, min ApR vs dga {min_apr:.3}; {}", rows.join("; ")),
    );
    assert!(pass);
}

// ---- criterion 6 --------------------------------------------------------

#[test]
fn criterion_06_discreteness() {
    let (mut total, mut stopped, mut variant) = (0, 0, 0);
    let mut worst_frac = 0.0f64;
    for k in 0..6u64 {
        let g = generate_rrg(100, 3 + (k % 3) as usize, RngSeed(600 + k)).unwrap();
        let problems: [Box<dyn Objective>; 2] = [
            Box::new(MisProblem::new(g.clone(), 2.0).unwrap()),
            Box::new(MaxCutProblem::new(g)),
        ];
        for problem in &problems {
            let mut sage = SolveConfig::for_problem(problem.kind(), Architecture::Sage);
            sage.seeds = vec![RngSeed(k)];
            sage.trace_every = 1000;
            for mut cfg in [sage, direct_config(problem.kind())] {
                // default patience usually fires first on these small graphs
                cfg.stop.patience = 10_000;
                let result = solve(problem.as_ref(), &cfg).unwrap();
                for run in &result.per_seed {
                    total += 1;
                    if run.stop_reason != StopReason::Discreteness {
                        continue;
                    }
                    stopped += 1;
                    worst_frac = worst_frac.max(run.max_fractionality);
                    let cost = |t: f64| problem.evaluate(&round_solution(&run.final_p, t)).unwrap().penalized();
                    let base = cost(0.5);
                    variant += (0..=8).filter(|i| cost(0.3 + 0.05 * *i as f64) != base).count();
                }
            }
        }
    }
    let pass = stopped > 0 && worst_frac < 1e-3 && variant == 0;
    report(
        6,
        "discreteness at termination, threshold invariance on [0.3, 0.7]",
        pass,
        &format!(
            "{stopped}/{total} runs stopped by discreteness, max fractionality {worst_frac:.1e}, threshold-dependent roundings {variant}"
        ),
    );
    assert!(pass);
}

// ---- criterion 7 --------------------------------------------------------

#[test]
#[ignore = "slow suite: needs G14 under $CRA_SOLVE_DATA and up to an hour of CPU"]
fn criterion_07_gset_g14() {
    let dir = std::env::var_os("CRA_SOLVE_DATA").map(PathBuf::from);
    let path = dir
        .iter()
        .flat_map(|d| ["G14", "G14.gset", "G14.txt", "g14.gset"].map(|f| d.join(f)))
        .find(|p| p.exists());
    let Some(path) = path else {
        report(7, "G14 regression", false, "G14 not found under $CRA_SOLVE_DATA");
        panic!("G14 not found under $CRA_SOLVE_DATA");
    };
    let g = parse_gset(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let best_known = gset_best_known("G14").unwrap();
    let problem = MaxCutProblem::new(g.clone());
    let mut cfg = SolveConfig::for_problem(ProblemKind::MaxCut, Architecture::Sage);
    cfg.precision = Precision::F32;
    cfg.trace_every = 1000;
    let result = solve(&problem, &cfg).unwrap();
    let cra = -result.best_cost / best_known;
    let greedy = (0..5)
        .map(|s| problem.cut_weight(&greedy_maxcut(&g, RngSeed(s))))
        .fold(0.0, f64::max)
        / best_known;
    let pass = cra >= 0.97 && cra > greedy;
    report(7, "G14 regression", pass, &format!("cra ApR {cra:.4}, greedy ApR {greedy:.4}"));
    assert!(pass);
}

// ---- criterion 8 --------------------------------------------------------

#[test]
fn criterion_08_dga_beats_rga() {
    let (mut dga, mut rga) = (0.0, 0.0);
    for inst in 0..5u64 {
        let g = generate_rrg(1000, 20, RngSeed(800 + inst)).unwrap();
        dga += is_density(&dga_mis(&g, RngSeed(inst))) / 5.0;
        rga += is_density(&rga_mis(&g, RngSeed(inst))) / 5.0;
    }
    let pass = dga >= rga;
    report(8, "DGA >= RGA on RRG(1000, 20)", pass, &format!("dga {dga:.4}, rga {rga:.4}"));
    assert!(pass);
}

// ---- criterion 9 --------------------------------------------------------

fn cra(args: &[&str]) {
    let o = Command::new(env!("CARGO_BIN_EXE_cra"))
        .args(args)
        .env_remove("CRA_SOLVE_DATA")
        .output()
        .unwrap();
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
}

fn same_bytes(a: &Path, b: &Path) -> bool {
    std::fs::read(a).unwrap() == std::fs::read(b).unwrap()
}

#[test]
fn criterion_09_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let p = |s: &str| root.join(s).to_str().unwrap().to_string();
    std::fs::write(
        root.join("suite.toml"),
        "name = \"det\"\nproblem = \"mis\"\ngraph = \"rrg\"\nsizes = [14, 18]\ndegrees = [3]\ninstances = 2\n\
         solvers = [\"cra-sage\", \"cra-direct\", \"pi-gcn\", \"dga\", \"rga\", \"exact\"]\ntrace = true\n\
         [solve]\nseeds = 2\nmax_epochs = 1500\ngamma0 = -2.0\nrate = 0.005\n",
    )
    .unwrap();
    std::fs::write(
        root.join("sweep.toml"),
        "gamma0 = [-3.0, -1.0]\nalpha = [2, 4]\n[suite]\nname = \"sw\"\nproblem = \"maxcut\"\ngraph = \"rrg\"\n\
         sizes = [12]\ndegrees = [3]\nsolvers = [\"cra-direct\"]\n[suite.solve]\nseeds = 2\nmax_epochs = 600\n",
    )
    .unwrap();
    let mut checked = Vec::new();
    for round in ["a", "b"] {
        cra(&["generate", "rrg", "--n", "40", "--d", "3", "--seed", "9", "--out", &p(&format!("g{round}.edges"))]);
        cra(&["generate", "dbm", "--n1", "4", "--n2", "5", "--seed", "9", "--out", &p(&format!("m{round}.json"))]);
        let g = p("ga.edges");
        cra(&["solve", &g, "--problem", "mis", "--max-epochs", "800", "--seeds", "3", "--out", &p(&format!("solve-{round}"))]);
        cra(&["solve", &g, "--problem", "maxcut", "--arch", "direct", "--precision", "f32", "--out", &p(&format!("solve32-{round}"))]);
        cra(&["solve", &p("ma.json"), "--problem", "dbm", "--arch", "direct", "--seeds", "2", "--out", &p(&format!("dbm-{round}"))]);
        cra(&["baseline", "rga", &g, "--out", &p(&format!("rga-{round}"))]);
        cra(&["baseline", "greedy-maxcut", &g, "--out", &p(&format!("greedy-{round}"))]);
        cra(&["exact", &p("ma.json"), "--problem", "dbm", "--out", &p(&format!("exact-{round}"))]);
        cra(&["bench", &p("suite.toml"), "--out", &p(&format!("bench-{round}"))]);
        cra(&["sweep", &p("sweep.toml"), "--jobs", "2", "--out", &p(&format!("sweep-{round}"))]);
    }
    let pairs = [
        ("ga.edges", "gb.edges"),
        ("ma.json", "mb.json"),
        ("solve-a/result.json", "solve-b/result.json"),
        ("solve32-a/result.json", "solve32-b/result.json"),
        ("dbm-a/result.json", "dbm-b/result.json"),
        ("rga-a/baseline.json", "rga-b/baseline.json"),
        ("greedy-a/baseline.json", "greedy-b/baseline.json"),
        ("exact-a/exact.json", "exact-b/exact.json"),
        ("bench-a/metrics.csv", "bench-b/metrics.csv"),
        ("bench-a/summary.json", "bench-b/summary.json"),
        ("bench-a/trace.csv", "bench-b/trace.csv"),
        ("sweep-a/sweep.csv", "sweep-b/sweep.csv"),
        ("sweep-a/summary.json", "sweep-b/summary.json"),
    ];
    let mut differing = Vec::new();
    for (a, b) in pairs {
        checked.push(a);
        if !same_bytes(&root.join(a), &root.join(b)) {
            differing.push(a);
        }
    }
    let pass = differing.is_empty();
    report(
        9,
        "byte-identical outputs for identical runs",
        pass,
        &format!("{} output files compared, differing: {differing:?}", checked.len()),
    );
    assert!(pass);
}

// ---- criterion 10 -------------------------------------------------------

#[test]
fn criterion_10_potts_coloring() {
    let solve_cycle = |n: usize| {
        let problem = ColoringProblem::new(Graph::cycle(n), 2).unwrap();
        let exact = brute_force(&problem, OracleBudget::default()).unwrap().penalized_cost;
        let mut cfg = SolveConfig::for_problem(ProblemKind::Coloring, Architecture::Direct);
        cfg.trace_every = 100;
        let result = solve(&problem, &cfg).unwrap();
        (result.best_cost, exact)
    };
    let (even, even_exact) = solve_cycle(6);
    let (odd, odd_exact) = solve_cycle(5);
    let pass = even == 0.0 && odd == 1.0 && even_exact == 0.0 && odd_exact == 1.0;
    report(
        10,
        "Potts 2-coloring of C6 and C5",
        pass,
        &format!("C6 {even} (exact {even_exact}), C5 {odd} (exact {odd_exact}) monochromatic edges"),
    );
    assert!(pass);
}
