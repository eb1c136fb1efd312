use crate::error::{AimeError, Result};

use super::{Gradients, Network};

/// Optimiser and loop settings. Defaults: Adam(1e-3, 0.9, 0.999, 1e-8),
/// 200 epochs, minibatches of 32, seed 0.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            epochs: 200,
            batch_size: 32,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(AimeError::Domain(format!(
                "learning_rate must be > 0, got {}",
                self.learning_rate
            )));
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&b) {
                return Err(AimeError::Domain(format!("{name} must be in [0, 1), got {b}")));
            }
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(AimeError::Domain(format!("epsilon must be > 0, got {}", self.epsilon)));
        }
        if self.batch_size == 0 {
            return Err(AimeError::Domain("batch_size must be >= 1".into()));
        }
        Ok(())
    }
}

/// First/second moment accumulators over the flattened parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub first_moment: Vec<f64>,
    pub second_moment: Vec<f64>,
    pub timestep: u64,
}

impl AdamState {
    pub fn new(net: &Network) -> Self {
        let n = net.parameter_count();
        Self {
            first_moment: vec![0.0; n],
            second_moment: vec![0.0; n],
            timestep: 0,
        }
    }
}

/// One bias-corrected Adam update of every weight and bias.
pub fn adam_step(
    net: &mut Network,
    grads: &Gradients,
    state: &mut AdamState,
    cfg: &TrainConfig,
) -> Result<()> {
    if grads.layers.len() != net.layers.len() {
        return Err(AimeError::shape(
            "adam_step",
            (net.layers.len(), 0),
            (grads.layers.len(), 0),
        ));
    }
    for (l, g) in net.layers.iter().zip(&grads.layers) {
        if l.weights.shape() != g.weights.shape() || l.bias.len() != g.bias.len() {
            return Err(AimeError::shape("adam_step", l.weights.shape(), g.weights.shape()));
        }
    }
    if state.first_moment.len() != net.parameter_count() {
        return Err(AimeError::shape(
            "adam_step",
            (net.parameter_count(), 1),
            (state.first_moment.len(), 1),
        ));
    }

    state.timestep += 1;
    let t = state.timestep as i32;
    let c1 = 1.0 - cfg.beta1.powi(t);
    let c2 = 1.0 - cfg.beta2.powi(t);

    let mut k = 0;
    let mut update = |p: &mut f64, g: f64| {
        let m = &mut state.first_moment[k];
        let v = &mut state.second_moment[k];
        *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
        *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
        let m_hat = *m / c1;
        let v_hat = *v / c2;
        *p -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon);
        k += 1;
    };
    for (l, g) in net.layers.iter_mut().zip(&grads.layers) {
        for (p, gv) in l.weights.as_mut_slice().iter_mut().zip(g.weights.as_slice()) {
            update(p, *gv);
        }
        for (p, gv) in l.bias.iter_mut().zip(&g.bias) {
            update(p, *gv);
        }
    }
    if !net.is_finite() {
        return Err(AimeError::Numerical("non-finite parameter after Adam step".into()));
    }
    Ok(())
}
