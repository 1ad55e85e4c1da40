use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hyperparameters of the learning agent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentConfig {
    pub gamma: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Policy updates over which epsilon decays linearly.
    pub epsilon_decay_steps: u64,
    /// Polyak rate for the target network.
    pub soft_update_rate: f64,
    /// Upper bound on prunes per episode.
    pub max_episode_steps: usize,
    /// Candidate edges sampled per step during training.
    pub subgraph_len: usize,
    pub learning_rate: f64,
    pub buffer_capacity: usize,
    pub batch_size: usize,
    pub priority_alpha: f64,
    pub priority_beta: f64,
    pub priority_floor: f64,
    pub embedding_dim: usize,
    pub hidden: usize,
    pub seed: u64,
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig {
            gamma: 0.95,
            epsilon_start: 0.99,
            epsilon_end: 0.05,
            epsilon_decay_steps: 10_000,
            soft_update_rate: 0.001,
            max_episode_steps: 8,
            subgraph_len: 32,
            learning_rate: 2e-4,
            buffer_capacity: 100_000,
            batch_size: 32,
            priority_alpha: 0.6,
            priority_beta: 0.4,
            priority_floor: 1e-3,
            embedding_dim: 64,
            hidden: 128,
            seed: 0,
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        let unit_open = |x: f64| x > 0.0 && x < 1.0;
        let unit_closed = |x: f64| (0.0..=1.0).contains(&x);
        if !unit_closed(self.gamma) {
            return bad("gamma must lie in [0, 1]");
        }
        if !unit_closed(self.epsilon_start) || !unit_closed(self.epsilon_end) {
            return bad("epsilon bounds must lie in [0, 1]");
        }
        if !unit_closed(self.soft_update_rate) {
            return bad("soft_update_rate must lie in [0, 1]");
        }
        if !unit_open(self.learning_rate) {
            return bad("learning_rate must lie in (0, 1)");
        }
        if !unit_closed(self.priority_alpha) || !unit_closed(self.priority_beta) {
            return bad("priority exponents must lie in [0, 1]");
        }
        if self.priority_floor <= 0.0 {
            return bad("priority_floor must be positive");
        }
        if self.max_episode_steps == 0 || self.subgraph_len == 0 || self.batch_size == 0 {
            return bad("max_episode_steps, subgraph_len and batch_size must be at least 1");
        }
        if self.buffer_capacity < self.batch_size {
            return bad("buffer_capacity must be at least batch_size");
        }
        if self.embedding_dim == 0 || self.hidden == 0 {
            return bad("layer widths must be positive");
        }
        Ok(())
    }

    /// Exploration rate after `updates` policy updates.
    pub fn epsilon(&self, updates: u64) -> f64 {
        if updates >= self.epsilon_decay_steps {
            return self.epsilon_end;
        }
        let frac = updates as f64 / self.epsilon_decay_steps as f64;
        self.epsilon_start + (self.epsilon_end - self.epsilon_start) * frac
    }
}
