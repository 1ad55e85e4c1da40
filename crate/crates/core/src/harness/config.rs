use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agent::AgentConfig;
use crate::error::{Error, Result};
use crate::rewards::Objective;

pub const SCHEMA_VERSION: u32 = 1;

/// Structural quantity compared between a graph and its sparsification.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Spearman correlation of PageRank scores.
    Pagerank,
    /// Louvain ARI against ground-truth communities.
    Ari,
    /// Mean shortest-path increase over fixed query pairs.
    Spsp,
    /// Louvain modularity of the sparsified graph.
    Modularity,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Pagerank => "pagerank",
            Metric::Ari => "ari",
            Metric::Spsp => "spsp",
            Metric::Modularity => "modularity",
        }
    }

    pub fn from_name(name: &str) -> Option<Metric> {
        Some(match name {
            "pagerank" | "pr" => Metric::Pagerank,
            "ari" | "community" => Metric::Ari,
            "spsp" => Metric::Spsp,
            "modularity" => Metric::Modularity,
            _ => return None,
        })
    }

    /// Whether larger values mean better preservation.
    /// Evaluation metric that measures what `objective` rewards.
    pub fn for_objective(objective: &Objective) -> Metric {
        match objective {
            Objective::Pagerank => Metric::Pagerank,
            Objective::Community { .. } => Metric::Ari,
            Objective::Spsp { .. } => Metric::Spsp,
            Objective::Modularity => Metric::Modularity,
        }
    }

    pub fn higher_is_better(self) -> bool {
        !matches!(self, Metric::Spsp)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub path: PathBuf,
    #[serde(default)]
    pub directed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<PathBuf>,
    /// Defaults to the file stem of `path`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl DatasetConfig {
    pub fn display_name(&self) -> String {
        self.name.clone().unwrap_or_else(|| {
            self.path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "graph".into())
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub episodes: usize,
    /// Episodes per reward window for early stopping.
    pub window: usize,
    /// Windows without a new best mean reward before stopping; 0 disables.
    pub patience: usize,
    /// Episodes between checkpoints; 0 writes only the final one.
    pub checkpoint_every: usize,
    /// Episodes between validation passes; 0 disables validation. Each pass
    /// scores the greedy policy on the training objective's metric and keeps
    /// the best-scoring agent in `best.ckpt`.
    pub validate_every: usize,
    /// Kept-edge ratio used for validation.
    pub validate_ratio: f64,
    /// Sparsification seeds averaged per validation pass.
    pub validate_seeds: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            episodes: 2000,
            window: 50,
            patience: 0,
            checkpoint_every: 500,
            validate_every: 0,
            validate_ratio: 0.9,
            validate_seeds: 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub ratios: Vec<f64>,
    pub seeds: usize,
    pub methods: Vec<String>,
    pub metrics: Vec<Metric>,
    /// Candidate edges per greedy prune of the learned method.
    pub subgraph_len: usize,
    /// Subgraph lengths visited by the h-sweep.
    pub sweep_lens: Vec<usize>,
    pub louvain_seeds: usize,
    pub spsp_queries: usize,
    /// Spanner stretches for the spanner comparison.
    pub stretches: Vec<usize>,
    pub spanner_runs: usize,
    pub workers: usize,
    /// Defaults to `agent.ckpt` in the output directory.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checkpoint: Option<PathBuf>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            ratios: vec![0.2, 0.4, 0.6, 0.8],
            seeds: 8,
            methods: ["rl", "re", "ld", "eff", "lspar"].map(String::from).to_vec(),
            metrics: vec![Metric::Pagerank],
            subgraph_len: 32,
            sweep_lens: vec![8, 16, 32, 64],
            louvain_seeds: 8,
            spsp_queries: crate::metrics::MAX_EVAL_QUERIES,
            stretches: vec![3, 5, 7],
            spanner_runs: 16,
            workers: 1,
            checkpoint: None,
        }
    }
}

/// Everything a run needs, read from a TOML file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub dataset: DatasetConfig,
    pub reward: Objective,
    #[serde(default)]
    pub agent: AgentConfig,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub evaluation: EvalConfig,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

impl RunConfig {
    pub fn new(dataset: DatasetConfig, reward: Objective) -> Self {
        RunConfig {
            schema_version: SCHEMA_VERSION,
            dataset,
            reward,
            agent: AgentConfig::default(),
            train: TrainConfig::default(),
            evaluation: EvalConfig::default(),
            output_dir: default_output(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        check_reward_keys(text, &cfg.reward)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a config file; relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        rebase(&mut cfg.dataset.path);
        if let Some(l) = cfg.dataset.labels.as_mut() {
            rebase(l);
        }
        if let Some(c) = cfg.evaluation.checkpoint.as_mut() {
            rebase(c);
        }
        rebase(&mut cfg.output_dir);
        Ok(cfg)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml()?).map_err(|e| Error::io(path, e))
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.agent.validate()?;
        let e = &self.evaluation;
        if let Some(r) = e.ratios.iter().find(|&&r| !(r > 0.0 && r <= 1.0)) {
            return Err(Error::Config(format!("ratio {r} outside (0, 1]")));
        }
        if e.seeds == 0 || e.louvain_seeds == 0 || e.spanner_runs == 0 {
            return Err(Error::Config("seed counts must be at least 1".into()));
        }
        if e.workers == 0 || e.subgraph_len == 0 || e.sweep_lens.contains(&0) {
            return Err(Error::Config("workers and subgraph lengths must be at least 1".into()));
        }
        if self.train.window == 0 {
            return Err(Error::Config("train.window must be at least 1".into()));
        }
        let t = &self.train;
        if t.validate_every > 0 && (!(t.validate_ratio > 0.0 && t.validate_ratio < 1.0) || t.validate_seeds == 0) {
            return Err(Error::Config(
                "validation needs validate_ratio in (0, 1) and at least one seed".into(),
            ));
        }
        for m in &e.methods {
            if m != "rl" && crate::baselines::Baseline::from_name(m).is_none() {
                return Err(Error::Config(format!("unknown method {m:?}")));
            }
        }
        Ok(())
    }

    pub fn checkpoint_path(&self) -> PathBuf {
        self.evaluation
            .checkpoint
            .clone()
            .unwrap_or_else(|| self.output_dir.join("agent.ckpt"))
    }
}

/// serde lets unit variants of a tagged enum swallow stray keys, so the
/// reward table is checked by hand.
fn check_reward_keys(text: &str, reward: &Objective) -> Result<()> {
    let table: toml::Table = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    let Some(toml::Value::Table(r)) = table.get("reward") else {
        return Ok(());
    };
    let allowed: &[&str] = match reward {
        Objective::Pagerank | Objective::Modularity => &["objective"],
        Objective::Community { .. } => &["objective", "label_sign"],
        Objective::Spsp { .. } => &["objective", "pairs_per_endpoint"],
    };
    match r.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(Error::Config(format!(
            "unknown key `{k}` in [reward] for objective {}",
            reward.name()
        ))),
        None => Ok(()),
    }
}
