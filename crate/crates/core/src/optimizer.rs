//! AdamW with decoupled weight decay.

use num_traits::Float;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum OptimError {
    #[error("gradient entry {index} is not finite")]
    NonFiniteGradient { index: usize },
    #[error("expected {expected} parameters, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid optimizer setting: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamWConfig {
    pub lr: f64,
    pub weight_decay: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamWConfig {
    fn default() -> Self {
        AdamWConfig {
            lr: 1e-4,
            weight_decay: 1e-2,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

impl AdamWConfig {
    pub fn validate(&self) -> Result<(), OptimError> {
        let bad = |m: String| Err(OptimError::InvalidConfig(m));
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad(format!("learning rate must be positive, got {}", self.lr));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return bad(format!("weight decay must be nonnegative, got {}", self.weight_decay));
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&b) {
                return bad(format!("{name} must lie in [0, 1), got {b}"));
            }
        }
        if !(self.eps > 0.0) {
            return bad(format!("eps must be positive, got {}", self.eps));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct AdamW<F> {
    config: AdamWConfig,
    m: Vec<F>,
    v: Vec<F>,
    t: u64,
}

impl<F: Float> AdamW<F> {
    pub fn new(config: AdamWConfig, num_params: usize) -> Result<Self, OptimError> {
        config.validate()?;
        Ok(AdamW {
            config,
            m: vec![F::zero(); num_params],
            v: vec![F::zero(); num_params],
            t: 0,
        })
    }

    pub fn config(&self) -> &AdamWConfig {
        &self.config
    }

    /// Number of updates applied so far.
    pub fn steps(&self) -> u64 {
        self.t
    }

    /// One update. A non-finite gradient leaves parameters and moments untouched.
    pub fn step(&mut self, params: &mut [F], grads: &[F]) -> Result<(), OptimError> {
        for found in [params.len(), grads.len()] {
            if found != self.m.len() {
                return Err(OptimError::DimensionMismatch {
                    expected: self.m.len(),
                    found,
                });
            }
        }
        if let Some(index) = grads.iter().position(|g| !g.is_finite()) {
            return Err(OptimError::NonFiniteGradient { index });
        }
        self.t += 1;
        let c = &self.config;
        let cast = |x: f64| F::from(x).expect("representable");
        let (b1, b2) = (cast(c.beta1), cast(c.beta2));
        let one = F::one();
        let bc1 = cast(1.0 - c.beta1.powf(self.t as f64));
        let bc2 = cast(1.0 - c.beta2.powf(self.t as f64));
        let lr = cast(c.lr);
        let eps = cast(c.eps);
        let decay = cast(1.0 - c.lr * c.weight_decay);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = b1 * self.m[i] + (one - b1) * g;
            self.v[i] = b2 * self.v[i] + (one - b2) * g * g;
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] = params[i] * decay - lr * m_hat / (v_hat.sqrt() + eps);
        }
        Ok(())
    }
}
