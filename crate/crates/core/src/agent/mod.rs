//! Edge-pruning agent: Double DQN over candidate-edge subgraphs with
//! prioritized replay and a soft-updated target network.

mod config;
mod episode;
mod learn;
mod persist;
mod qnet;
mod replay;

use std::sync::Arc;

use rand::Rng;

pub use config::AgentConfig;
pub use episode::{StepRecord, Trajectory};
pub use learn::{argmax, double_dqn_targets, select_action, weighted_td_loss, LossEval};
pub use qnet::{QNetwork, Selection};
pub use replay::{ReplayBuffer, SampledBatch, SumTree, Transition};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::nn::{Adam, Optimizer};
use crate::rng::{stream, Rng as StreamRng, Stream};
use crate::scalar::Scalar;

/// Progress counters; all monotone.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counters {
    /// Gradient updates of the policy network.
    pub updates: u64,
    /// Edges pruned during training.
    pub env_steps: u64,
    pub episodes: u64,
}

/// The agent's private random streams.
#[derive(Clone, Debug)]
pub struct Streams {
    pub sampling: StreamRng,
    pub exploration: StreamRng,
    pub replay: StreamRng,
    pub louvain: StreamRng,
    pub queries: StreamRng,
}

impl Streams {
    fn new(seed: u64) -> Self {
        Streams {
            sampling: stream(seed, Stream::GraphSampling),
            exploration: stream(seed, Stream::Exploration),
            replay: stream(seed, Stream::Replay),
            louvain: stream(seed, Stream::Louvain),
            queries: stream(seed, Stream::Queries),
        }
    }

    fn all_mut(&mut self) -> [(&'static str, &mut StreamRng); 5] {
        [
            ("sampling", &mut self.sampling),
            ("exploration", &mut self.exploration),
            ("replay", &mut self.replay),
            ("louvain", &mut self.louvain),
            ("queries", &mut self.queries),
        ]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainStats {
    pub loss: f64,
    pub mean_abs_td: f64,
}

#[derive(Clone, Debug)]
pub struct Agent<T> {
    config: AgentConfig,
    policy: QNetwork<T>,
    target: QNetwork<T>,
    optimizer: Adam<T>,
    replay: ReplayBuffer,
    counters: Counters,
    streams: Streams,
}

impl<T: Scalar> Agent<T> {
    /// Fresh agent with embeddings for every node of `graph`.
    pub fn new(config: AgentConfig, graph: &Graph) -> Result<Self> {
        config.validate()?;
        let mut init = stream(config.seed, Stream::Init);
        let policy = QNetwork::new(
            graph.node_count(),
            graph.is_directed(),
            config.embedding_dim,
            config.hidden,
            &mut init,
        );
        Ok(Self::assemble(config, policy.clone(), policy))
    }

    fn assemble(config: AgentConfig, policy: QNetwork<T>, target: QNetwork<T>) -> Self {
        Agent {
            optimizer: Adam::new(config.learning_rate),
            replay: ReplayBuffer::new(
                config.buffer_capacity,
                config.priority_alpha,
                config.priority_beta,
                config.priority_floor,
            ),
            counters: Counters::default(),
            streams: Streams::new(config.seed),
            policy,
            target,
            config,
        }
    }

    pub fn config(&self) -> &AgentConfig {
        &self.config
    }

    pub fn policy(&self) -> &QNetwork<T> {
        &self.policy
    }

    pub fn target(&self) -> &QNetwork<T> {
        &self.target
    }

    pub fn policy_mut(&mut self) -> &mut QNetwork<T> {
        &mut self.policy
    }

    pub fn replay(&self) -> &ReplayBuffer {
        &self.replay
    }

    pub fn replay_mut(&mut self) -> &mut ReplayBuffer {
        &mut self.replay
    }

    pub fn counters(&self) -> Counters {
        self.counters
    }

    pub fn streams_mut(&mut self) -> &mut Streams {
        &mut self.streams
    }

    pub fn epsilon(&self) -> f64 {
        self.config.epsilon(self.counters.updates)
    }

    /// Stores a transition at maximal priority.
    pub fn remember(&mut self, t: Transition) {
        self.replay.push(t);
    }

    /// One prioritized Double DQN update followed by the soft target update.
    pub fn train_step(&mut self) -> Result<TrainStats> {
        let batch = self.replay.sample(self.config.batch_size, &mut self.streams.replay)?;
        let transitions: Vec<&Transition> = batch.indices.iter().map(|&i| self.replay.get(i)).collect();
        let targets = double_dqn_targets(&self.policy, &self.target, &transitions, self.config.gamma)?;
        let items: Vec<_> = transitions.iter().map(|t| (&*t.state, t.action)).collect();
        let eval = weighted_td_loss(&self.policy, self.policy.params(), &items, &targets, &batch.weights, true)?;
        let grads = eval.gradients.expect("requested");
        grads.check_finite()?;
        grads.apply_to(self.policy.params_mut())?;
        self.optimizer.step(self.policy.params_mut())?;
        self.replay.update_priorities(&batch.indices, &eval.td_errors);
        let rate = T::from_f64_lossy(self.config.soft_update_rate);
        self.target.params_mut().blend_toward(self.policy.params(), rate)?;
        self.counters.updates += 1;
        let mean_abs_td = eval.td_errors.iter().map(|d| d.abs()).sum::<f64>() / eval.td_errors.len() as f64;
        Ok(TrainStats {
            loss: eval.loss,
            mean_abs_td,
        })
    }

    /// Greedy pruning down to `round(target_ratio · |E|)` live edges, where
    /// `|E|` counts the original edges. Each step scores `subgraph_len`
    /// sampled candidates and removes the highest-valued one.
    pub fn sparsify<R: Rng + ?Sized>(
        &self,
        graph: &Graph,
        target_ratio: f64,
        subgraph_len: usize,
        rng: &mut R,
    ) -> Result<Graph> {
        greedy_sparsify(&self.policy, graph, target_ratio, subgraph_len, rng)
    }
}

/// See [`Agent::sparsify`].
pub fn greedy_sparsify<T: Scalar, R: Rng + ?Sized>(
    net: &QNetwork<T>,
    graph: &Graph,
    target_ratio: f64,
    subgraph_len: usize,
    rng: &mut R,
) -> Result<Graph> {
    if !(target_ratio > 0.0 && target_ratio <= 1.0) {
        return Err(Error::InvalidParameter(format!("target ratio {target_ratio} outside (0, 1]")));
    }
    if net.node_count() != graph.node_count() {
        return Err(Error::LengthMismatch(net.node_count(), graph.node_count()));
    }
    let required = (target_ratio * graph.original_edge_count() as f64).round() as usize;
    let live = graph.edge_count();
    if required > live {
        return Err(Error::UnattainableRatio {
            target: target_ratio,
            required,
            live,
        });
    }
    let mut g = graph.clone();
    for _ in 0..live - required {
        let sub = g.sample_subgraph(subgraph_len, rng)?;
        let q = net.q_values(&sub)?;
        let a = argmax(&q).expect("nonempty subgraph");
        g.prune_edge(sub.edges[a].id)?;
    }
    Ok(g)
}

/// Shares a freshly sampled state between consecutive transitions.
fn sample_state<R: Rng + ?Sized>(g: &Graph, len: usize, rng: &mut R) -> Result<Option<Arc<crate::graph::CandidateSubgraph>>> {
    if g.edge_count() == 0 {
        return Ok(None);
    }
    g.sample_subgraph(len, rng).map(|s| Some(Arc::new(s)))
}
