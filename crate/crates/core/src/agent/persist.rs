use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Agent, AgentConfig, Counters, QNetwork};
use crate::error::{Error, Result};
use crate::nn::{Checkpoint, Tensor};
use crate::rng::seeded;
use crate::scalar::Scalar;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Meta {
    config: AgentConfig,
    node_count: usize,
    directed: bool,
    updates: u64,
    env_steps: u64,
    episodes: u64,
    optimizer_steps: u64,
    /// Word positions of the named random streams, as decimal strings.
    rng_positions: Vec<(String, String)>,
}

impl<T: Scalar> Agent<T> {
    /// Networks, optimizer moments, counters and random-stream positions.
    /// The replay buffer is not included.
    pub fn to_checkpoint(&mut self) -> Checkpoint<T> {
        let rng_positions = self
            .streams
            .all_mut()
            .into_iter()
            .map(|(name, rng)| (name.to_string(), rng.get_word_pos().to_string()))
            .collect();
        let meta = Meta {
            config: self.config.clone(),
            node_count: self.policy.node_count(),
            directed: self.policy.is_directed(),
            updates: self.counters.updates,
            env_steps: self.counters.env_steps,
            episodes: self.counters.episodes,
            optimizer_steps: crate::nn::Optimizer::<T>::steps(&self.optimizer),
            rng_positions,
        };
        let mut ckpt = Checkpoint::new(serde_json::to_value(meta).expect("serializable"));
        ckpt.push_params("policy", self.policy.params());
        ckpt.push_params("target", self.target.params());
        let (first, second) = self.optimizer.moments();
        for ((_, name, _), (m, v)) in self.policy.params().iter().zip(first.iter().zip(second)) {
            ckpt.push(format!("adam.m/{name}"), m.clone());
            ckpt.push(format!("adam.v/{name}"), v.clone());
        }
        ckpt
    }

    pub fn from_checkpoint(ckpt: &Checkpoint<T>) -> Result<Self> {
        let meta: Meta = serde_json::from_value(ckpt.meta.clone())
            .map_err(|e| Error::Checkpoint(format!("meta: {e}")))?;
        meta.config.validate()?;
        let c = &meta.config;
        let shell = QNetwork::new(meta.node_count, meta.directed, c.embedding_dim, c.hidden, &mut seeded(0));
        let mut agent = Agent::assemble(meta.config.clone(), shell.clone(), shell);
        ckpt.load_params("policy", agent.policy.params_mut())?;
        ckpt.load_params("target", agent.target.params_mut())?;
        let names: Vec<String> = agent.policy.params().iter().map(|(_, n, _)| n.to_string()).collect();
        let first: Vec<Tensor<T>> = ckpt.with_prefix("adam.m").map(|(_, t)| t.clone()).collect();
        let second: Vec<Tensor<T>> = ckpt.with_prefix("adam.v").map(|(_, t)| t.clone()).collect();
        if !first.is_empty() {
            let ordered = ckpt.with_prefix("adam.m").map(|(n, _)| n.to_string()).collect::<Vec<_>>();
            if ordered != names {
                return Err(Error::Checkpoint("optimizer state does not match parameters".into()));
            }
        }
        agent.optimizer.restore(meta.optimizer_steps, first, second)?;
        agent.counters = Counters {
            updates: meta.updates,
            env_steps: meta.env_steps,
            episodes: meta.episodes,
        };
        for (name, rng) in agent.streams.all_mut() {
            let pos = meta
                .rng_positions
                .iter()
                .find(|(n, _)| n == name)
                .ok_or_else(|| Error::Checkpoint(format!("missing stream {name}")))?;
            let pos: u128 = pos
                .1
                .parse()
                .map_err(|_| Error::Checkpoint(format!("bad position for stream {name}")))?;
            rng.set_word_pos(pos);
        }
        Ok(agent)
    }

    pub fn save(&mut self, path: &Path) -> Result<()> {
        self.to_checkpoint().save(path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_checkpoint(&Checkpoint::load(path)?)
    }
}
