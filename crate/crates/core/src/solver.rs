//! The annealed training loop, rounding, and restart selection.
//!
//! With `schedule: None` the loop runs with `γ ≡ 0`, which is the plain
//! physics-inspired GNN baseline on identical code.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::RngSeed;
use crate::model::{Architecture, EmbeddingMode, Model, ModelConfig, ModelError, Precision, Real};
use crate::optimizer::{AdamW, AdamWConfig, OptimError};
use crate::penalty::{
    Alpha, AnnealSchedule, Penalty, PenaltyError, PenaltyKind, PottsVariant, StopPolicy, StopReason,
    Stopper,
};
use crate::problems::{Evaluation, Layout, Objective, ProblemError, ProblemKind};

pub const RESULT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Penalty(#[from] PenaltyError),
    #[error(transparent)]
    Optim(#[from] OptimError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub model: ModelConfig,
    #[serde(default)]
    pub precision: Precision,
    /// `None` keeps `γ ≡ 0`.
    pub schedule: Option<AnnealSchedule>,
    /// Use the entropy penalty instead of the power penalty.
    #[serde(default)]
    pub entropy_penalty: bool,
    #[serde(default)]
    pub potts: PottsVariant,
    pub stop: StopPolicy,
    pub optimizer: AdamWConfig,
    pub max_epochs: u64,
    pub seeds: Vec<RngSeed>,
    pub threshold: f64,
    /// Record every `trace_every`-th epoch (the last epoch is always kept).
    pub trace_every: u64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            model: ModelConfig::default(),
            precision: Precision::F64,
            schedule: Some(AnnealSchedule::default()),
            entropy_penalty: false,
            potts: PottsVariant::default(),
            stop: StopPolicy::default(),
            optimizer: AdamWConfig::default(),
            max_epochs: 50_000,
            seeds: (0..5).map(RngSeed).collect(),
            threshold: 0.5,
            trace_every: 1,
        }
    }
}

impl SolveConfig {
    /// Initial penalty weight that suits each problem family.
    pub fn default_gamma0(kind: ProblemKind) -> f64 {
        match kind {
            ProblemKind::Mis | ProblemKind::Dbm => -20.0,
            ProblemKind::MaxCut | ProblemKind::Coloring => -6.0,
        }
    }

    /// Learning rate that suits each architecture; free logits need far larger steps.
    pub fn default_lr(arch: Architecture) -> f64 {
        match arch {
            Architecture::Direct => 0.1,
            Architecture::Gcn | Architecture::Sage => AdamWConfig::default().lr,
        }
    }

    /// Defaults for `kind` solved with `arch`.
    pub fn for_problem(kind: ProblemKind, arch: Architecture) -> Self {
        let mut cfg = SolveConfig::default();
        cfg.model.arch = arch;
        cfg.optimizer.lr = Self::default_lr(arch);
        if let Some(s) = &mut cfg.schedule {
            s.gamma0 = Self::default_gamma0(kind);
        }
        cfg
    }

    pub fn penalty(&self) -> Penalty {
        let kind = if self.entropy_penalty {
            PenaltyKind::Entropy
        } else {
            PenaltyKind::Power {
                alpha: self.schedule.map(|s| s.alpha).unwrap_or_default(),
            }
        };
        Penalty {
            kind,
            potts: self.potts,
        }
    }

    pub fn validate(&self) -> Result<(), SolveError> {
        if self.max_epochs == 0 {
            return Err(SolveError::Config("max_epochs must be at least 1".into()));
        }
        if self.seeds.is_empty() {
            return Err(SolveError::Config("at least one seed is required".into()));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(SolveError::Config(format!(
                "threshold {} outside [0, 1]",
                self.threshold
            )));
        }
        if self.trace_every == 0 {
            return Err(SolveError::Config("trace_every must be at least 1".into()));
        }
        if let Some(s) = &self.schedule {
            s.validate()?;
        }
        self.stop.validate()?;
        self.optimizer.validate()?;
        Ok(())
    }
}

/// Optional settings layered over [`SolveConfig::for_problem`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveOverrides {
    pub gamma0: Option<f64>,
    pub rate: Option<f64>,
    pub alpha: Option<u32>,
    pub gamma_cap: Option<f64>,
    pub lr: Option<f64>,
    pub weight_decay: Option<f64>,
    pub tolerance: Option<f64>,
    pub patience: Option<u64>,
    pub max_epochs: Option<u64>,
    /// Number of restarts, seeded `0..seeds`.
    pub seeds: Option<u64>,
    pub trace_every: Option<u64>,
    pub threshold: Option<f64>,
    pub precision: Option<Precision>,
    pub embedding: Option<EmbeddingMode>,
    pub entropy_penalty: Option<bool>,
}

impl SolveOverrides {
    pub fn apply(&self, cfg: &mut SolveConfig) -> Result<(), SolveError> {
        if let Some(s) = &mut cfg.schedule {
            if let Some(v) = self.gamma0 {
                s.gamma0 = v;
            }
            if let Some(v) = self.rate {
                s.rate = v;
            }
            if let Some(v) = self.alpha {
                s.alpha = Alpha::new(v)?;
            }
            if let Some(v) = self.gamma_cap {
                s.gamma_cap = Some(v);
            }
        } else if let Some(v) = self.alpha {
            Alpha::new(v)?;
        }
        if let Some(v) = self.lr {
            cfg.optimizer.lr = v;
        }
        if let Some(v) = self.weight_decay {
            cfg.optimizer.weight_decay = v;
        }
        if let Some(v) = self.tolerance {
            cfg.stop.tolerance = v;
        }
        if let Some(v) = self.patience {
            cfg.stop.patience = v;
        }
        if let Some(v) = self.max_epochs {
            cfg.max_epochs = v;
        }
        if let Some(v) = self.seeds {
            cfg.seeds = (0..v).map(RngSeed).collect();
        }
        if let Some(v) = self.trace_every {
            cfg.trace_every = v;
        }
        if let Some(v) = self.threshold {
            cfg.threshold = v;
        }
        if let Some(v) = self.precision {
            cfg.precision = v;
        }
        if let Some(v) = self.embedding {
            cfg.model.embedding = v;
        }
        if let Some(v) = self.entropy_penalty {
            cfg.entropy_penalty = v;
        }
        cfg.validate()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub epoch: Vec<u64>,
    /// Relaxed loss `l̂(p)` without the penalty term.
    pub loss: Vec<f64>,
    /// Nonnegative discreteness measure (the penalty, shifted to vanish on vertices).
    pub phi: Vec<f64>,
    pub gamma: Vec<f64>,
    pub mean_p: Vec<f64>,
}

impl Trace {
    fn push(&mut self, epoch: u64, loss: f64, phi: f64, gamma: f64, mean_p: f64) {
        self.epoch.push(epoch);
        self.loss.push(loss);
        self.phi.push(phi);
        self.gamma.push(gamma);
        self.mean_p.push(mean_p);
    }

    pub fn len(&self) -> usize {
        self.epoch.len()
    }

    pub fn is_empty(&self) -> bool {
        self.epoch.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedRun {
    pub seed: RngSeed,
    /// Forward passes performed.
    pub epochs: u64,
    pub stop_reason: StopReason,
    /// Largest distance of any relaxed variable from its rounded value.
    pub max_fractionality: f64,
    pub x: Vec<u8>,
    pub evaluation: Evaluation,
    pub trace: Trace,
    /// Relaxed state at termination; kept in memory only.
    #[serde(skip)]
    pub final_p: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub schema_version: u32,
    pub problem: ProblemKind,
    pub num_vars: usize,
    pub config: SolveConfig,
    /// Index into `per_seed` of the selected run.
    pub best_seed: usize,
    pub best_x: Vec<u8>,
    /// Unpenalized cost of `best_x`.
    pub best_cost: f64,
    pub feasible: bool,
    pub per_seed: Vec<SeedRun>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl SolveResult {
    pub fn best(&self) -> &SeedRun {
        &self.per_seed[self.best_seed]
    }
}

/// `x_i = 0` iff `p_i ≤ threshold`.
pub fn round_solution(p: &[f64], threshold: f64) -> Vec<u8> {
    p.iter().map(|&v| (v > threshold) as u8).collect()
}

/// One-hot rows from the row argmax, ties to the lowest index.
pub fn round_potts(p: &[f64], classes: usize) -> Vec<u8> {
    let mut x = vec![0u8; p.len()];
    for (row, out) in p.chunks_exact(classes).zip(x.chunks_exact_mut(classes)) {
        let mut best = 0;
        for k in 1..classes {
            if row[k] > row[best] {
                best = k;
            }
        }
        out[best] = 1;
    }
    x
}

/// Rounds according to the layout; `threshold` applies to binary layouts only.
pub fn round_layout(layout: Layout, p: &[f64], threshold: f64) -> Vec<u8> {
    match layout {
        Layout::Binary { .. } => round_solution(p, threshold),
        Layout::OneHot { classes, .. } => round_potts(p, classes),
    }
}

/// `max_i min(p_i, 1 − p_i)` for binary layouts, `max_row 1 − max_k P_rk` for one-hot.
pub fn max_fractionality(layout: Layout, p: &[f64]) -> f64 {
    match layout {
        Layout::Binary { .. } => p.iter().map(|&v| v.min(1.0 - v)).fold(0.0, f64::max),
        Layout::OneHot { classes, .. } => p
            .chunks_exact(classes)
            .map(|r| 1.0 - r.iter().copied().fold(f64::NEG_INFINITY, f64::max))
            .fold(0.0, f64::max),
    }
}

pub fn solve(problem: &dyn Objective, config: &SolveConfig) -> Result<SolveResult, SolveError> {
    solve_with_timing(problem, config, false)
}

/// Like [`solve`], optionally recording wall time (which breaks byte-identical output).
pub fn solve_with_timing(
    problem: &dyn Objective,
    config: &SolveConfig,
    timing: bool,
) -> Result<SolveResult, SolveError> {
    config.validate()?;
    let start = Instant::now();
    let runs: Vec<SeedRun> = config
        .seeds
        .par_iter()
        .map(|&seed| match config.precision {
            Precision::F64 => run_seed::<f64>(problem, config, seed),
            Precision::F32 => run_seed::<f32>(problem, config, seed),
        })
        .collect::<Result<_, _>>()?;
    let best_seed = select_best(&runs);
    let best = &runs[best_seed];
    Ok(SolveResult {
        schema_version: RESULT_SCHEMA_VERSION,
        problem: problem.kind(),
        num_vars: problem.num_vars(),
        config: config.clone(),
        best_seed,
        best_x: best.x.clone(),
        best_cost: best.evaluation.objective,
        feasible: best.evaluation.feasible,
        wall_time_s: timing.then(|| start.elapsed().as_secs_f64()),
        per_seed: runs,
    })
}

/// Feasible minimum cost; otherwise minimum penalty, then minimum cost. Earlier seeds win ties.
fn select_best(runs: &[SeedRun]) -> usize {
    let key = |r: &SeedRun| {
        let e = &r.evaluation;
        (!e.feasible, if e.feasible { 0.0 } else { e.penalty }, e.objective)
    };
    let mut best = 0;
    for i in 1..runs.len() {
        if key(&runs[i]).partial_cmp(&key(&runs[best])) == Some(std::cmp::Ordering::Less) {
            best = i;
        }
    }
    best
}

/// Runs one restart to termination.
pub fn run_seed<F: Real>(
    problem: &dyn Objective,
    config: &SolveConfig,
    seed: RngSeed,
) -> Result<SeedRun, SolveError> {
    let layout = problem.layout();
    let n = layout.num_vars();
    let penalty = config.penalty();
    let mut model = Model::<F>::new(&config.model, layout, problem.interaction_graph(), seed)?;
    let mut opt = AdamW::<F>::new(config.optimizer, model.num_params())?;
    let mut stopper = Stopper::new(config.stop, n);

    let mut p = vec![0.0; n];
    let mut last_good = vec![0.5; n];
    let mut grad = vec![0.0; n];
    let mut pgrad = vec![0.0; n];
    let mut trace = Trace::default();
    let mut stop_reason = StopReason::MaxEpochs;
    let mut epochs = 0;
    let mut last_traced = None;

    for tau in 0..config.max_epochs {
        let gamma = config.schedule.map_or(0.0, |s| s.gamma_at(tau));
        model.forward_into(&mut p)?;
        epochs = tau + 1;
        let loss = problem.relaxed_into(&p, &mut grad)?;
        let pen = penalty.eval_into(layout, &p, &mut pgrad)?;
        let total = loss + gamma * pen.value;
        let mean_p = if n == 0 { 0.0 } else { p.iter().sum::<f64>() / n as f64 };
        if !total.is_finite() || !mean_p.is_finite() {
            trace.push(tau, loss, pen.discreteness, gamma, mean_p);
            stop_reason = StopReason::NonFinite;
            break;
        }
        last_good.copy_from_slice(&p);
        if tau % config.trace_every == 0 {
            trace.push(tau, loss, pen.discreteness, gamma, mean_p);
            last_traced = Some(tau);
        }
        if let Some(reason) = stopper.observe(loss, pen.discreteness, gamma) {
            stop_reason = reason;
            if last_traced != Some(tau) {
                trace.push(tau, loss, pen.discreteness, gamma, mean_p);
            }
            break;
        }
        if tau + 1 == config.max_epochs {
            if last_traced != Some(tau) {
                trace.push(tau, loss, pen.discreteness, gamma, mean_p);
            }
            break;
        }
        for (g, pg) in grad.iter_mut().zip(&pgrad) {
            *g += gamma * pg;
        }
        model.backward(&grad)?;
        match model.step(&mut opt) {
            Ok(()) => {}
            Err(ModelError::Optim(OptimError::NonFiniteGradient { .. })) => {
                stop_reason = StopReason::NonFinite;
                break;
            }
            Err(e) => return Err(e.into()),
        }
    }

    let x = round_layout(layout, &last_good, config.threshold);
    let evaluation = problem.evaluate(&x)?;
    Ok(SeedRun {
        seed,
        epochs,
        stop_reason,
        max_fractionality: max_fractionality(layout, &last_good),
        x,
        evaluation,
        trace,
        final_p: last_good,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedPlateau {
    pub seed: RngSeed,
    /// Longest run of consecutive plateau epochs.
    pub longest_epochs: u64,
    /// Total plateau epochs among the traced ones, scaled by the trace stride.
    pub total_epochs: u64,
    /// Whether the last traced epoch is on the plateau.
    pub ends_on_plateau: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlateauReport {
    pub per_seed: Vec<SeedPlateau>,
}

impl PlateauReport {
    pub fn any(&self) -> bool {
        self.per_seed.iter().any(|s| s.longest_epochs > 0)
    }
}

/// Mean relaxed value below which the state counts as collapsed to zero.
pub const PLATEAU_MEAN_P: f64 = 0.01;
/// Per-variable loss magnitude below which the loss counts as zero.
pub const PLATEAU_LOSS: f64 = 0.01;

/// Finds epochs stuck at the trivial stationary point `p ≈ 0`, `l̂ ≈ 0`.
pub fn diagnose_plateau(result: &SolveResult) -> PlateauReport {
    let n = result.num_vars.max(1) as f64;
    let stride = result.config.trace_every;
    let per_seed = result
        .per_seed
        .iter()
        .map(|run| {
            let t = &run.trace;
            let flat: Vec<bool> = (0..t.len())
                .map(|i| t.mean_p[i] < PLATEAU_MEAN_P && (t.loss[i] / n).abs() < PLATEAU_LOSS)
                .collect();
            let mut longest = 0;
            let mut start = None;
            for i in 0..flat.len() {
                match (flat[i], start) {
                    (true, None) => start = Some(i),
                    (false, Some(s)) => {
                        longest = longest.max(t.epoch[i - 1] - t.epoch[s] + 1);
                        start = None;
                    }
                    _ => {}
                }
            }
            if let Some(s) = start {
                longest = longest.max(t.epoch[flat.len() - 1] - t.epoch[s] + 1);
            }
            SeedPlateau {
                seed: run.seed,
                longest_epochs: longest,
                total_epochs: flat.iter().filter(|&&f| f).count() as u64 * stride,
                ends_on_plateau: flat.last().copied().unwrap_or(false),
            }
        })
        .collect();
    PlateauReport { per_seed }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::problems::{MaxCutProblem, MisProblem};

    fn direct(kind: ProblemKind) -> SolveConfig {
        let mut cfg = SolveConfig::for_problem(kind, Architecture::Direct);
        cfg.max_epochs = 5000;
        cfg.seeds = (0..3).map(RngSeed).collect();
        cfg.schedule = Some(AnnealSchedule::new(-2.0, 1e-2, crate::penalty::Alpha::TWO).unwrap());
        cfg
    }

    #[test]
    fn rounding_boundary() {
        assert_eq!(round_solution(&[0.5, 0.500001], 0.5), vec![0, 1]);
        assert_eq!(round_solution(&[0.0, 1.0, 1.0], 0.5), vec![0, 1, 1]);
        assert_eq!(round_potts(&[0.3, 0.3, 0.4, 0.5, 0.5, 0.0], 3), vec![0, 0, 1, 1, 0, 0]);
    }

    #[test]
    fn mis_on_k4() {
        let problem = MisProblem::new(Graph::complete(4), 2.0).unwrap();
        let r = solve(&problem, &direct(ProblemKind::Mis)).unwrap();
        assert!(r.feasible);
        assert_eq!(r.best_cost, -1.0);
        assert_eq!(r.best_x.iter().filter(|&&b| b == 1).count(), 1);
    }

    #[test]
    fn maxcut_on_four_cycle() {
        let problem = MaxCutProblem::new(Graph::cycle(4));
        let r = solve(&problem, &direct(ProblemKind::MaxCut)).unwrap();
        assert_eq!(r.best_cost, -4.0);
    }

    #[test]
    fn traces_are_reproducible_and_gamma_monotone() {
        let problem = MisProblem::new(Graph::petersen(), 2.0).unwrap();
        let mut cfg = direct(ProblemKind::Mis);
        cfg.trace_every = 7;
        let a = solve(&problem, &cfg).unwrap();
        let b = solve(&problem, &cfg).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        for run in &a.per_seed {
            assert!(run.trace.gamma.windows(2).all(|w| w[0] <= w[1]));
            assert_eq!(*run.trace.epoch.last().unwrap() + 1, run.epochs);
        }
    }

    #[test]
    fn plateau_detection() {
        let mut cfg = SolveConfig::default();
        cfg.trace_every = 1;
        let flat = Trace {
            epoch: (0..5000).collect(),
            loss: vec![0.0; 5000],
            phi: vec![0.0; 5000],
            gamma: vec![0.0; 5000],
            mean_p: vec![1e-4; 5000],
        };
        let mut falling = flat.clone();
        falling.loss = (0..5000).map(|i| -(i as f64)).collect();
        falling.mean_p = vec![0.3; 5000];
        let run = |trace: Trace| SeedRun {
            seed: RngSeed(0),
            epochs: 5000,
            stop_reason: StopReason::Patience,
            max_fractionality: 0.0,
            x: vec![0; 10],
            evaluation: Evaluation {
                objective: 0.0,
                penalty: 0.0,
                feasible: true,
                violations: vec![],
            },
            trace,
            final_p: vec![],
        };
        let result = SolveResult {
            schema_version: RESULT_SCHEMA_VERSION,
            problem: ProblemKind::Mis,
            num_vars: 10,
            config: cfg,
            best_seed: 0,
            best_x: vec![0; 10],
            best_cost: 0.0,
            feasible: true,
            per_seed: vec![run(flat), run(falling)],
            wall_time_s: None,
        };
        let report = diagnose_plateau(&result);
        assert_eq!(report.per_seed[0].longest_epochs, 5000);
        assert!(report.per_seed[0].ends_on_plateau);
        assert_eq!(report.per_seed[1].longest_epochs, 0);
    }

    #[test]
    fn config_validation() {
        let mut cfg = SolveConfig::default();
        cfg.seeds.clear();
        assert!(cfg.validate().is_err());
        let mut cfg = SolveConfig::default();
        cfg.max_epochs = 0;
        assert!(cfg.validate().is_err());
    }
}
