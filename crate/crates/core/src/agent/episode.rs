use rand::Rng;

use super::learn::select_action;
use super::replay::Transition;
use super::{sample_state, Agent};
use crate::error::{Error, Result};
use crate::graph::{EdgeRef, Graph};
use crate::rewards::RewardFn;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    pub edge: EdgeRef,
    pub action: usize,
    pub candidates: usize,
    pub reward: f64,
    pub raw_reward: f64,
    pub epsilon: f64,
    /// Loss of the update that followed the step, if one ran.
    pub loss: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    /// Prunes the episode was allowed.
    pub horizon: usize,
    /// Random prunes applied before the first step.
    pub preprune: usize,
    pub steps: Vec<StepRecord>,
    /// True when the episode stopped because no live edges remained.
    pub exhausted: bool,
}

impl Trajectory {
    pub fn mean_reward(&self) -> f64 {
        if self.steps.is_empty() {
            return 0.0;
        }
        self.steps.iter().map(|s| s.reward).sum::<f64>() / self.steps.len() as f64
    }

    pub fn mean_loss(&self) -> Option<f64> {
        let losses: Vec<f64> = self.steps.iter().filter_map(|s| s.loss).collect();
        (!losses.is_empty()).then(|| losses.iter().sum::<f64>() / losses.len() as f64)
    }
}

impl<T: Scalar> Agent<T> {
    /// One training episode on a copy of `graph`: draw a horizon `T` in
    /// `1..=max_episode_steps`, randomly prune `T_p` in `1..=|E| - T` edges,
    /// then take up to `T` epsilon-greedy prune actions, storing each
    /// transition and training once the buffer holds a batch.
    pub fn run_episode(&mut self, graph: &Graph, reward: &mut RewardFn) -> Result<Trajectory> {
        let m = graph.edge_count();
        let t_max = self.config.max_episode_steps;
        if m <= t_max {
            return Err(Error::InsufficientEdges {
                requested: t_max + 1,
                available: m,
            });
        }
        let horizon = self.streams.sampling.gen_range(1..=t_max);
        let preprune = self.streams.sampling.gen_range(1..=m - horizon);
        let louvain_seed = self.streams.louvain.gen::<u64>();
        reward.begin_episode(graph, louvain_seed)?;

        let mut g = graph.clone();
        g.random_prune(preprune, &mut self.streams.sampling)?;
        let len = self.config.subgraph_len;
        let mut state = sample_state(&g, len, &mut self.streams.sampling)?.expect("at least T live edges");
        let mut steps = Vec::with_capacity(horizon);
        let mut exhausted = false;
        for _ in 0..horizon {
            let epsilon = self.epsilon();
            let q = self.policy.q_values(&state)?;
            let action = select_action(&q, epsilon, &mut self.streams.exploration);
            let edge = state.edges[action];
            let r = reward.prune_and_score(&mut g, edge, &mut self.streams.queries)?;
            let next = sample_state(&g, len, &mut self.streams.sampling)?;
            self.replay.push(Transition {
                state: state.clone(),
                action,
                reward: r.value,
                next_state: next.clone(),
            });
            self.counters.env_steps += 1;
            let loss = if self.replay.len() >= self.config.batch_size {
                Some(self.train_step()?.loss)
            } else {
                None
            };
            steps.push(StepRecord {
                edge,
                action,
                candidates: state.len(),
                reward: r.value,
                raw_reward: r.raw,
                epsilon,
                loss,
            });
            match next {
                Some(s) => state = s,
                None => {
                    exhausted = true;
                    break;
                }
            }
        }
        self.counters.episodes += 1;
        Ok(Trajectory {
            horizon,
            preprune,
            steps,
            exhausted,
        })
    }
}
