//! Discreteness penalty, its annealing schedule and the early-stopping rule.
//!
//! The penalty `Φ(p) = Σ_i 1 − (2p_i − 1)^α` (even `α`) is `N` at `p = ½·1`
//! and zero at every binary point. Adding `γΦ` to a relaxed loss convexifies
//! it for `γ < 0` and pushes the state onto the hypercube vertices for
//! `γ > 0`; [`AnnealSchedule`] raises `γ` linearly once per update.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::problems::{Layout, Objective, ProblemError};

#[derive(Debug, Error, PartialEq)]
pub enum PenaltyError {
    #[error("curve rate must be an even integer >= 2, got {0}")]
    OddAlpha(u32),
    #[error("expected {expected} entries, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid schedule: {0}")]
    Schedule(String),
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

/// Even curve rate `α ≥ 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Alpha(u32);

impl Alpha {
    pub const TWO: Alpha = Alpha(2);

    pub fn new(alpha: u32) -> Result<Self, PenaltyError> {
        if alpha >= 2 && alpha % 2 == 0 {
            Ok(Alpha(alpha))
        } else {
            Err(PenaltyError::OddAlpha(alpha))
        }
    }

    pub fn get(self) -> u32 {
        self.0
    }
}

impl TryFrom<u32> for Alpha {
    type Error = PenaltyError;
    fn try_from(value: u32) -> Result<Self, Self::Error> {
        Alpha::new(value)
    }
}

impl From<Alpha> for u32 {
    fn from(a: Alpha) -> u32 {
        a.0
    }
}

impl Default for Alpha {
    fn default() -> Self {
        Alpha::TWO
    }
}

impl std::fmt::Display for Alpha {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Binary penalty; writes `∂Φ/∂p` into `grad`.
pub fn phi_into(p: &[f64], alpha: Alpha, grad: &mut [f64]) -> f64 {
    let a = alpha.0 as i32;
    let mut value = 0.0;
    for (g, &x) in grad.iter_mut().zip(p) {
        let s = 2.0 * x - 1.0;
        let s_pow = s.powi(a - 1);
        value += 1.0 - s_pow * s;
        *g = -2.0 * a as f64 * s_pow;
    }
    value
}

pub fn phi(p: &[f64], alpha: Alpha) -> (f64, Vec<f64>) {
    let mut grad = vec![0.0; p.len()];
    let value = phi_into(p, alpha, &mut grad);
    (value, grad)
}

/// Which constant the one-hot penalty is measured against.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PottsVariant {
    /// `Σ_i 1 − Σ_k (K P_ik − 1)^α` exactly; negative at one-hot rows.
    Verbatim,
    /// The same expression shifted per row so one-hot rows score 0.
    #[default]
    Shifted,
}

/// Per-row value of the verbatim Potts penalty at a one-hot row.
pub fn potts_one_hot_value(classes: usize, alpha: Alpha) -> f64 {
    let k = classes as f64;
    1.0 - (k - 1.0).powi(alpha.0 as i32) - (k - 1.0)
}

/// Potts penalty over a row-major `rows × classes` matrix.
pub fn phi_potts_into(
    p: &[f64],
    classes: usize,
    alpha: Alpha,
    variant: PottsVariant,
    grad: &mut [f64],
) -> Result<f64, PenaltyError> {
    if classes == 0 || p.len() % classes != 0 || grad.len() != p.len() {
        return Err(PenaltyError::DimensionMismatch {
            expected: p.len().next_multiple_of(classes.max(1)),
            found: grad.len(),
        });
    }
    let a = alpha.0 as i32;
    let k = classes as f64;
    let rows = p.len() / classes;
    let mut value = 0.0;
    for (row, g) in p.chunks_exact(classes).zip(grad.chunks_exact_mut(classes)) {
        let mut sum = 0.0;
        for (gc, &x) in g.iter_mut().zip(row) {
            let s = k * x - 1.0;
            let s_pow = s.powi(a - 1);
            sum += s_pow * s;
            *gc = -(a as f64) * k * s_pow;
        }
        value += 1.0 - sum;
    }
    if variant == PottsVariant::Shifted {
        value -= rows as f64 * potts_one_hot_value(classes, alpha);
    }
    Ok(value)
}

pub fn phi_potts(
    p: &[f64],
    classes: usize,
    alpha: Alpha,
    variant: PottsVariant,
) -> Result<(f64, Vec<f64>), PenaltyError> {
    let mut grad = vec![0.0; p.len()];
    let value = phi_potts_into(p, classes, alpha, variant, &mut grad)?;
    Ok((value, grad))
}

/// Smallest probability fed to a logarithm.
pub const ENTROPY_CLAMP: f64 = 1e-12;

/// Binary entropy `−Σ p ln p + (1−p) ln(1−p)`: maximal at `½`, zero on vertices.
///
/// Its gradient `ln((1−p)/p)` is unbounded near 0 and 1; it exists to show
/// that failure mode next to the bounded power penalty.
pub fn entropy_into(p: &[f64], grad: &mut [f64]) -> f64 {
    let mut value = 0.0;
    for (g, &x) in grad.iter_mut().zip(p) {
        let a = x.clamp(ENTROPY_CLAMP, 1.0 - ENTROPY_CLAMP);
        let b = 1.0 - a;
        value -= a * a.ln() + b * b.ln();
        *g = b.ln() - a.ln();
    }
    value
}

/// Row-wise categorical entropy over a `rows × classes` matrix.
fn categorical_entropy_into(p: &[f64], grad: &mut [f64]) -> f64 {
    let mut value = 0.0;
    for (g, &x) in grad.iter_mut().zip(p) {
        let a = x.max(ENTROPY_CLAMP);
        value -= a * a.ln();
        *g = -(a.ln() + 1.0);
    }
    value
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum PenaltyKind {
    /// The bounded power penalty with curve rate `α`.
    Power { alpha: Alpha },
    /// Entropy penalty; opt-in only.
    Entropy,
}

impl Default for PenaltyKind {
    fn default() -> Self {
        PenaltyKind::Power { alpha: Alpha::TWO }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Penalty {
    pub kind: PenaltyKind,
    #[serde(default)]
    pub potts: PottsVariant,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyValue {
    /// Value that enters the annealed loss.
    pub value: f64,
    /// Nonnegative distance-from-discrete measure, zero exactly on discrete points.
    pub discreteness: f64,
}

impl Penalty {
    pub fn power(alpha: Alpha) -> Self {
        Penalty {
            kind: PenaltyKind::Power { alpha },
            potts: PottsVariant::default(),
        }
    }

    pub fn eval_into(
        &self,
        layout: Layout,
        p: &[f64],
        grad: &mut [f64],
    ) -> Result<PenaltyValue, PenaltyError> {
        let n = layout.num_vars();
        for found in [p.len(), grad.len()] {
            if found != n {
                return Err(PenaltyError::DimensionMismatch { expected: n, found });
            }
        }
        Ok(match (self.kind, layout) {
            (PenaltyKind::Power { alpha }, Layout::Binary { .. }) => {
                let v = phi_into(p, alpha, grad);
                PenaltyValue {
                    value: v,
                    discreteness: v,
                }
            }
            (PenaltyKind::Power { alpha }, Layout::OneHot { rows, classes }) => {
                let v = phi_potts_into(p, classes, alpha, self.potts, grad)?;
                let shift = match self.potts {
                    PottsVariant::Verbatim => rows as f64 * potts_one_hot_value(classes, alpha),
                    PottsVariant::Shifted => 0.0,
                };
                PenaltyValue {
                    value: v,
                    discreteness: v - shift,
                }
            }
            (PenaltyKind::Entropy, Layout::Binary { .. }) => {
                let v = entropy_into(p, grad);
                PenaltyValue {
                    value: v,
                    discreteness: v,
                }
            }
            (PenaltyKind::Entropy, Layout::OneHot { .. }) => {
                let v = categorical_entropy_into(p, grad);
                PenaltyValue {
                    value: v,
                    discreteness: v,
                }
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnealedLoss {
    /// `l̂(p) + γ Φ(p)`.
    pub value: f64,
    pub grad: Vec<f64>,
    /// `l̂(p)` alone.
    pub loss: f64,
    pub penalty: PenaltyValue,
}

/// Relaxed loss plus `gamma` times the penalty, with the summed gradient.
pub fn annealed_loss(
    problem: &dyn Objective,
    p: &[f64],
    gamma: f64,
    penalty: &Penalty,
) -> Result<AnnealedLoss, PenaltyError> {
    let mut grad = vec![0.0; p.len()];
    let mut scratch = vec![0.0; p.len()];
    let loss = problem.relaxed_into(p, &mut grad)?;
    let pv = penalty.eval_into(problem.layout(), p, &mut scratch)?;
    for (g, s) in grad.iter_mut().zip(&scratch) {
        *g += gamma * s;
    }
    Ok(AnnealedLoss {
        value: loss + gamma * pv.value,
        grad,
        loss,
        penalty: pv,
    })
}

/// Linear schedule `γ(τ) = γ(0) + ε τ`, optionally capped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnealSchedule {
    pub gamma0: f64,
    pub rate: f64,
    pub alpha: Alpha,
    #[serde(default)]
    pub gamma_cap: Option<f64>,
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        AnnealSchedule {
            gamma0: -20.0,
            rate: 1e-3,
            alpha: Alpha::TWO,
            gamma_cap: Some(10.0),
        }
    }
}

impl AnnealSchedule {
    pub fn new(gamma0: f64, rate: f64, alpha: Alpha) -> Result<Self, PenaltyError> {
        let s = AnnealSchedule {
            gamma0,
            rate,
            alpha,
            ..AnnealSchedule::default()
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_cap(mut self, cap: Option<f64>) -> Self {
        self.gamma_cap = cap;
        self
    }

    pub fn validate(&self) -> Result<(), PenaltyError> {
        if !(self.rate > 0.0 && self.rate.is_finite()) {
            return Err(PenaltyError::Schedule(format!(
                "rate must be positive, got {}",
                self.rate
            )));
        }
        if !self.gamma0.is_finite() {
            return Err(PenaltyError::Schedule("initial gamma must be finite".into()));
        }
        if self.gamma_cap.is_some_and(|c| c.is_nan()) {
            return Err(PenaltyError::Schedule("gamma cap is NaN".into()));
        }
        Ok(())
    }

    pub fn gamma_at(&self, tau: u64) -> f64 {
        let g = self.gamma0 + self.rate * tau as f64;
        match self.gamma_cap {
            Some(cap) => g.min(cap),
            None => g,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StopPolicy {
    /// Minimum decrease that counts as an improvement.
    pub tolerance: f64,
    /// Consecutive non-improving epochs before stopping.
    pub patience: u64,
    /// Per-variable penalty below which the state counts as discrete.
    pub phi_threshold: f64,
}

impl Default for StopPolicy {
    fn default() -> Self {
        StopPolicy {
            tolerance: 1e-5,
            patience: 1000,
            phi_threshold: 1e-6,
        }
    }
}

impl StopPolicy {
    pub fn validate(&self) -> Result<(), PenaltyError> {
        if !(self.tolerance > 0.0) || self.patience == 0 || !(self.phi_threshold >= 0.0) {
            return Err(PenaltyError::Schedule(format!(
                "invalid stop policy: {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// Penalty reached zero while `γ > 0`.
    Discreteness,
    /// Neither the loss nor the penalty improved for `patience` epochs at `γ ≥ 0`.
    Patience,
    MaxEpochs,
    /// The loss became NaN or infinite and the run was aborted.
    NonFinite,
}

/// Incremental early-stopping monitor. Discreteness takes priority over patience.
#[derive(Debug, Clone)]
pub struct Stopper {
    policy: StopPolicy,
    num_vars: usize,
    best_loss: f64,
    best_phi: f64,
    stale: u64,
}

impl Stopper {
    pub fn new(policy: StopPolicy, num_vars: usize) -> Self {
        Stopper {
            policy,
            num_vars: num_vars.max(1),
            best_loss: f64::INFINITY,
            best_phi: f64::INFINITY,
            stale: 0,
        }
    }

    pub fn observe(&mut self, loss: f64, phi: f64, gamma: f64) -> Option<StopReason> {
        if gamma > 0.0 && phi / (self.num_vars as f64) < self.policy.phi_threshold {
            return Some(StopReason::Discreteness);
        }
        // an epoch counts as progress only if it beats the best value so far by
        // more than `tolerance`; slow drift below that rate is stagnation
        let first = self.best_loss.is_infinite();
        let improved = self.best_loss - loss > self.policy.tolerance
            || self.best_phi - phi > self.policy.tolerance;
        self.best_loss = self.best_loss.min(loss);
        self.best_phi = self.best_phi.min(phi);
        // while gamma < 0 the schedule is still reshaping the objective, so
        // stagnation there is not convergence
        if improved || first || gamma < 0.0 {
            self.stale = 0;
            None
        } else {
            self.stale += 1;
            (self.stale >= self.policy.patience).then_some(StopReason::Patience)
        }
    }
}

/// Replays `loss` and `phi` traces recorded at penalty weight `gamma` and
/// reports whether the last entry stops the run.
pub fn should_stop(
    loss: &[f64],
    phi: &[f64],
    num_vars: usize,
    policy: &StopPolicy,
    gamma: f64,
) -> Option<StopReason> {
    let mut stopper = Stopper::new(*policy, num_vars);
    let mut decision = None;
    let last = loss.len().min(phi.len());
    for i in 0..last {
        decision = stopper.observe(loss[i], phi[i], gamma);
    }
    decision
}
