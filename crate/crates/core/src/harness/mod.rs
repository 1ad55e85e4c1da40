//! Run pipeline behind the command-line tool: training, sparsification,
//! evaluation grids and their CSV outputs.

mod config;
mod eval;
mod report;

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub use config::{DatasetConfig, EvalConfig, Metric, RunConfig, TrainConfig, SCHEMA_VERSION};
pub use eval::{evaluate, EvalContext};
pub use report::{append_csv, read_csv, write_csv, CompareRow, MetricRow, SpannerRow, SweepRow, TrainLogRow};

use crate::agent::greedy_sparsify;
use crate::baselines::{self, Baseline, SparsifyRequest};
use crate::error::{Error, Result};
use crate::graph::{load_communities, load_edge_list, write_edge_list, Graph};
use crate::rewards::RewardFn;
use crate::rng::{stream, Stream};
use crate::{Agent, QNetwork};

/// Name under which the learned pruning policy appears in outputs.
pub const LEARNED_METHOD: &str = "rl";

#[derive(Clone, Debug)]
pub struct Dataset {
    pub name: String,
    pub graph: Graph,
    pub labels: Option<Vec<Option<usize>>>,
}

pub fn load_dataset(cfg: &DatasetConfig) -> Result<Dataset> {
    let (graph, report) = load_edge_list(&cfg.path, cfg.directed)?;
    if report.dropped() > 0 {
        log::warn!(
            "{}: dropped {} self-loops and {} duplicate edges",
            cfg.path.display(),
            report.self_loops,
            report.duplicates
        );
    }
    let labels = cfg
        .labels
        .as_ref()
        .map(|p| load_communities(p, &graph))
        .transpose()?;
    Ok(Dataset {
        name: cfg.display_name(),
        graph,
        labels,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum Method {
    Learned,
    Baseline(Baseline),
}

impl Method {
    pub fn from_name(name: &str) -> Result<Method> {
        if name == LEARNED_METHOD {
            return Ok(Method::Learned);
        }
        Baseline::from_name(name)
            .map(Method::Baseline)
            .ok_or_else(|| Error::Config(format!("unknown method {name:?}")))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Method::Learned => LEARNED_METHOD,
            Method::Baseline(b) => b.name(),
        }
    }
}

/// Result of one sparsification with the parameters that reproduce it.
#[derive(Clone, Debug)]
pub struct Sparsification {
    pub graph: Graph,
    pub params: String,
}

/// Runs `method` at `ratio`. The learned method needs `policy`.
pub fn sparsify_with(
    graph: &Graph,
    method: &Method,
    policy: Option<&QNetwork>,
    ratio: f64,
    seed: u64,
    subgraph_len: usize,
) -> Result<Sparsification> {
    match method {
        Method::Learned => {
            let net = policy.ok_or_else(|| Error::Config("the learned method needs a checkpoint".into()))?;
            let mut rng = stream(seed, Stream::GraphSampling);
            let graph = greedy_sparsify(net, graph, ratio, subgraph_len, &mut rng)?;
            Ok(Sparsification {
                graph,
                params: format!("h={subgraph_len}"),
            })
        }
        Method::Baseline(b) => {
            let out = baselines::sparsify(
                graph,
                &SparsifyRequest {
                    ratio,
                    method: b.clone(),
                    seed,
                },
            )?;
            let mut params = match b {
                Baseline::ForestFire { burn_probability } => format!("p={burn_probability}"),
                Baseline::Spanner { .. } => format!("t={}", out.parameter.unwrap_or_default()),
                _ => out.parameter.map(|p| format!("exponent={p}")).unwrap_or_default(),
            };
            if let Some(w) = out.warning {
                log::warn!("{}: {w}", b.name());
                params.push_str(&format!(";warning={w}"));
            }
            Ok(Sparsification {
                graph: out.graph,
                params,
            })
        }
    }
}

/// Policy network stored in a training checkpoint, checked against `graph`.
pub fn load_policy(path: &Path, graph: &Graph) -> Result<QNetwork> {
    let agent = Agent::load(path)?;
    let net = agent.policy().clone();
    if net.node_count() != graph.node_count() || net.is_directed() != graph.is_directed() {
        return Err(Error::Checkpoint(format!(
            "{} was trained on a graph with {} nodes, dataset has {}",
            path.display(),
            net.node_count(),
            graph.node_count()
        )));
    }
    Ok(net)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainSummary {
    pub episodes_run: usize,
    pub total_episodes: u64,
    pub updates: u64,
    pub stopped_early: bool,
    pub checkpoint: PathBuf,
    pub log: PathBuf,
    /// Best validated agent, when validation is enabled.
    pub best: Option<BestCheckpoint>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BestCheckpoint {
    pub path: PathBuf,
    pub score: f64,
    /// Total episodes the agent had trained when it was validated.
    pub episode: u64,
}

/// Seeds for validation sparsifications, disjoint from evaluation seeds.
const VALIDATION_SEED_BASE: u64 = 1 << 40;

/// Mean score of the greedy policy on `cfg`'s objective metric at the
/// validation ratio, oriented so that higher is better.
fn validation_score(cfg: &RunConfig, data: &Dataset, ctx: &EvalContext, policy: &QNetwork) -> Result<f64> {
    let metric = Metric::for_objective(&cfg.reward);
    let t = &cfg.train;
    let mut total = 0.0;
    for i in 0..t.validate_seeds as u64 {
        let seed = VALIDATION_SEED_BASE + i;
        let s = sparsify_with(
            &data.graph,
            &Method::Learned,
            Some(policy),
            t.validate_ratio,
            seed,
            cfg.evaluation.subgraph_len,
        )?;
        total += evaluate(&data.graph, &s.graph, metric, ctx, seed)?;
    }
    let mean = total / t.validate_seeds as f64;
    Ok(if metric.higher_is_better() { mean } else { -mean })
}

/// Trains for `train.episodes` episodes (or until patience runs out),
/// appending one log row per episode and checkpointing periodically.
/// With `resume`, continues from the existing checkpoint and log.
pub fn train(cfg: &RunConfig, resume: bool) -> Result<TrainSummary> {
    let data = load_dataset(&cfg.dataset)?;
    let mut reward = RewardFn::new(cfg.reward.clone(), &data.graph, data.labels.clone())?;
    let dir = &cfg.output_dir;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let ckpt = cfg.checkpoint_path();
    let log_path = dir.join("train_log.csv");
    let mut agent = if resume {
        let a = Agent::load(&ckpt)?;
        if a.policy().node_count() != data.graph.node_count() {
            return Err(Error::Checkpoint("checkpoint does not match the dataset".into()));
        }
        a
    } else {
        if log_path.exists() {
            std::fs::remove_file(&log_path).map_err(|e| Error::io(&log_path, e))?;
        }
        Agent::new(cfg.agent.clone(), &data.graph)?
    };

    let t = &cfg.train;
    let best_path = dir.join("best.ckpt");
    let mut validation = if t.validate_every > 0 {
        let e = &cfg.evaluation;
        let ctx = EvalContext::new(
            &data.graph,
            data.labels.clone(),
            e.louvain_seeds,
            e.spsp_queries,
            VALIDATION_SEED_BASE,
        )?;
        let best = if resume && best_path.exists() {
            let a = Agent::load(&best_path)?;
            Some(BestCheckpoint {
                path: best_path.clone(),
                score: validation_score(cfg, &data, &ctx, a.policy())?,
                episode: a.counters().episodes,
            })
        } else {
            None
        };
        Some((ctx, best))
    } else {
        None
    };
    let mut pending = Vec::new();
    let mut window = Vec::with_capacity(t.window);
    let mut best = f64::NEG_INFINITY;
    let mut stale = 0;
    let mut stopped_early = false;
    let mut run = 0;
    while run < t.episodes {
        let traj = agent.run_episode(&data.graph, &mut reward)?;
        run += 1;
        pending.push(TrainLogRow {
            step: agent.counters().updates,
            epsilon: agent.epsilon(),
            loss: traj.mean_loss(),
            mean_reward: traj.mean_reward(),
            buffer_size: agent.replay().len(),
        });
        window.push(traj.mean_reward());
        if window.len() == t.window {
            let mean = window.iter().sum::<f64>() / window.len() as f64;
            window.clear();
            if mean > best {
                best = mean;
                stale = 0;
            } else {
                stale += 1;
            }
            log::info!(
                "episode {}: window reward {mean:.4}, epsilon {:.3}",
                agent.counters().episodes,
                agent.epsilon()
            );
            if t.patience > 0 && stale >= t.patience {
                stopped_early = true;
                break;
            }
        }
        if t.checkpoint_every > 0 && run % t.checkpoint_every == 0 {
            append_csv(&log_path, &pending)?;
            pending.clear();
            agent.save(&ckpt)?;
        }
        if let Some((ctx, best)) = validation.as_mut() {
            if run % t.validate_every == 0 {
                let score = validation_score(cfg, &data, ctx, agent.policy())?;
                let episode = agent.counters().episodes;
                log::info!("episode {episode}: validation score {score:.4}");
                if best.as_ref().is_none_or(|b| score > b.score) {
                    agent.save(&best_path)?;
                    *best = Some(BestCheckpoint {
                        path: best_path.clone(),
                        score,
                        episode,
                    });
                }
            }
        }
    }
    append_csv(&log_path, &pending)?;
    agent.save(&ckpt)?;
    Ok(TrainSummary {
        episodes_run: run,
        total_episodes: agent.counters().episodes,
        updates: agent.counters().updates,
        stopped_early,
        checkpoint: ckpt,
        log: log_path,
        best: validation.and_then(|v| v.1),
    })
}

/// Sparsifies and writes the edge list with a provenance header.
pub fn sparsify_to_file(
    data: &Dataset,
    method: &Method,
    policy: Option<&QNetwork>,
    ratio: f64,
    seed: u64,
    subgraph_len: usize,
    out: &Path,
) -> Result<Sparsification> {
    let s = sparsify_with(&data.graph, method, policy, ratio, seed, subgraph_len)?;
    let header = vec![
        format!("dataset={}", data.name),
        format!("method={}", method.name()),
        format!("ratio={ratio}"),
        format!("seed={seed}"),
        format!("params={}", s.params),
        format!("edges={}/{}", s.graph.edge_count(), data.graph.original_edge_count()),
    ];
    write_edge_list(&s.graph, out, &header)?;
    Ok(s)
}

fn metric_rows(
    data: &Dataset,
    ctx: &EvalContext,
    metrics: &[Metric],
    method: &str,
    ratio: f64,
    seed: u64,
    outcome: Result<Sparsification>,
) -> Vec<MetricRow> {
    metrics
        .iter()
        .map(|&m| {
            let (value, params, error) = match &outcome {
                Ok(s) => match evaluate(&data.graph, &s.graph, m, ctx, seed) {
                    Ok(v) => (Some(v), s.params.clone(), None),
                    Err(e) => (None, s.params.clone(), Some(e.to_string())),
                },
                Err(e) => (None, String::new(), Some(e.to_string())),
            };
            MetricRow {
                dataset: data.name.clone(),
                method: method.to_string(),
                edge_kept_ratio: ratio,
                metric: m.name().to_string(),
                seed,
                value,
                params,
                error,
            }
        })
        .collect()
}

/// Evaluates an already sparsified graph.
pub fn evaluate_rows(
    data: &Dataset,
    sparsified: &Graph,
    metrics: &[Metric],
    cfg: &EvalConfig,
    method: &str,
    seed: u64,
) -> Result<Vec<MetricRow>> {
    let ctx = EvalContext::new(&data.graph, data.labels.clone(), cfg.louvain_seeds, cfg.spsp_queries, seed)?;
    let ratio = sparsified.edge_count() as f64 / data.graph.original_edge_count() as f64;
    let rows = metric_rows(
        data,
        &ctx,
        metrics,
        method,
        ratio,
        seed,
        Ok(Sparsification {
            graph: sparsified.clone(),
            params: String::new(),
        }),
    );
    if let Some(err) = rows.iter().find_map(|r| r.error.clone()) {
        return Err(Error::Config(err));
    }
    Ok(rows)
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))
}

fn seeds(cfg: &RunConfig, count: usize) -> impl Iterator<Item = u64> {
    let base = cfg.agent.seed;
    (0..count as u64).map(move |i| base + i)
}

/// Full method × ratio × seed grid. Failed cells become error rows.
/// Writes `compare_rows.csv` and `compare.csv` to the output directory.
pub fn compare(cfg: &RunConfig) -> Result<(Vec<MetricRow>, Vec<CompareRow>)> {
    use rayon::prelude::*;

    let data = load_dataset(&cfg.dataset)?;
    let e = &cfg.evaluation;
    let ctx = EvalContext::new(&data.graph, data.labels.clone(), e.louvain_seeds, e.spsp_queries, cfg.agent.seed)?;
    let methods: Vec<Method> = e.methods.iter().map(|m| Method::from_name(m)).collect::<Result<_>>()?;
    let policy = if methods.contains(&Method::Learned) {
        match load_policy(&cfg.checkpoint_path(), &data.graph) {
            Ok(p) => Ok(p),
            Err(err) => Err(err.to_string()),
        }
    } else {
        Err(String::new())
    };
    let mut jobs = Vec::new();
    for m in &methods {
        for &r in &e.ratios {
            for s in seeds(cfg, e.seeds) {
                jobs.push((m, r, s));
            }
        }
    }
    let rows: Vec<MetricRow> = pool(e.workers)?.install(|| {
        jobs.par_iter()
            .flat_map_iter(|&(m, ratio, seed)| {
                let outcome = match (m, &policy) {
                    (Method::Learned, Err(msg)) => Err(Error::Checkpoint(msg.clone())),
                    _ => sparsify_with(&data.graph, m, policy.as_ref().ok(), ratio, seed, e.subgraph_len),
                };
                metric_rows(&data, &ctx, &e.metrics, m.name(), ratio, seed, outcome)
            })
            .collect()
    });
    let summary = aggregate(&rows);
    write_csv(&cfg.output_dir.join("compare_rows.csv"), &rows)?;
    write_csv(&cfg.output_dir.join("compare.csv"), &summary)?;
    Ok((rows, summary))
}

/// Mean per (dataset, method, ratio, metric) over successful rows, with the
/// best mean of each (ratio, metric) column flagged.
pub fn aggregate(rows: &[MetricRow]) -> Vec<CompareRow> {
    let mut order: Vec<(String, String, u64, String)> = Vec::new();
    let mut cells: HashMap<(String, String, u64, String), (f64, usize)> = HashMap::new();
    for r in rows {
        let key = (r.dataset.clone(), r.method.clone(), r.edge_kept_ratio.to_bits(), r.metric.clone());
        let cell = cells.entry(key.clone()).or_insert_with(|| {
            order.push(key);
            (0.0, 0)
        });
        if let Some(v) = r.value {
            cell.0 += v;
            cell.1 += 1;
        }
    }
    let mut out: Vec<CompareRow> = order
        .into_iter()
        .filter_map(|key| {
            let (sum, n) = cells[&key];
            (n > 0).then(|| CompareRow {
                dataset: key.0,
                method: key.1,
                ratio: f64::from_bits(key.2),
                metric: key.3,
                mean: sum / n as f64,
                n_seeds: n,
                best: false,
            })
        })
        .collect();
    let mut best: HashMap<(String, u64, String), f64> = HashMap::new();
    for r in &out {
        let higher = Metric::from_name(&r.metric).is_none_or(Metric::higher_is_better);
        let score = if higher { r.mean } else { -r.mean };
        let entry = best
            .entry((r.dataset.clone(), r.ratio.to_bits(), r.metric.clone()))
            .or_insert(f64::NEG_INFINITY);
        *entry = entry.max(score);
    }
    for r in &mut out {
        let higher = Metric::from_name(&r.metric).is_none_or(Metric::higher_is_better);
        let score = if higher { r.mean } else { -r.mean };
        r.best = score == best[&(r.dataset.clone(), r.ratio.to_bits(), r.metric.clone())];
    }
    out
}

/// For each stretch `t`: `spanner_runs` Baswana–Sen spanners, their mean
/// edge-kept ratio and shortest-path penalty, and the learned method's
/// penalty over as many runs at that same ratio. Writes `spanner.csv`.
pub fn spanner_compare(cfg: &RunConfig) -> Result<Vec<SpannerRow>> {
    let data = load_dataset(&cfg.dataset)?;
    let e = &cfg.evaluation;
    let ctx = EvalContext::new(&data.graph, None, 1, e.spsp_queries, cfg.agent.seed)?;
    let policy = load_policy(&cfg.checkpoint_path(), &data.graph)?;
    let m = data.graph.original_edge_count() as f64;
    let mut rows = Vec::new();
    for &t in &e.stretches {
        let effective = baselines::effective_stretch(t)?;
        if effective != t {
            log::warn!("stretch {t} is not of the form 2k-1; running t={effective}");
        }
        let mut ratio_sum = 0.0;
        let mut penalty_sum = 0.0;
        for seed in seeds(cfg, e.spanner_runs) {
            let mut rng = stream(seed, Stream::Baseline);
            let s = baselines::baswana_sen_spanner(&data.graph, effective, &mut rng)?;
            ratio_sum += s.edge_count() as f64 / m;
            penalty_sum += evaluate(&data.graph, &s, Metric::Spsp, &ctx, seed)?;
        }
        let runs = e.spanner_runs as f64;
        let mean_ratio = ratio_sum / runs;
        let mut rl_sum = 0.0;
        for seed in seeds(cfg, e.spanner_runs) {
            let mut rng = stream(seed, Stream::GraphSampling);
            let g = greedy_sparsify(&policy, &data.graph, mean_ratio, e.subgraph_len, &mut rng)?;
            rl_sum += evaluate(&data.graph, &g, Metric::Spsp, &ctx, seed)?;
        }
        rows.push(SpannerRow {
            t: effective,
            mean_ratio,
            spanner_rspsp: penalty_sum / runs,
            rl_rspsp: rl_sum / runs,
        });
    }
    write_csv(&cfg.output_dir.join("spanner.csv"), &rows)?;
    Ok(rows)
}

/// Learned-method sparsification at every subgraph length in `sweep_lens`,
/// timed. Writes `h_sweep.csv`.
pub fn h_sweep(cfg: &RunConfig) -> Result<Vec<SweepRow>> {
    let data = load_dataset(&cfg.dataset)?;
    let e = &cfg.evaluation;
    let ctx = EvalContext::new(&data.graph, data.labels.clone(), e.louvain_seeds, e.spsp_queries, cfg.agent.seed)?;
    let policy = load_policy(&cfg.checkpoint_path(), &data.graph)?;
    let mut rows = Vec::new();
    for &h in &e.sweep_lens {
        for &ratio in &e.ratios {
            for seed in seeds(cfg, e.seeds) {
                let start = Instant::now();
                let mut rng = stream(seed, Stream::GraphSampling);
                let g = greedy_sparsify(&policy, &data.graph, ratio, h, &mut rng)?;
                let seconds = start.elapsed().as_secs_f64();
                for &metric in &e.metrics {
                    rows.push(SweepRow {
                        dataset: data.name.clone(),
                        subgraph_len: h,
                        edge_kept_ratio: ratio,
                        metric: metric.name().to_string(),
                        seed,
                        value: evaluate(&data.graph, &g, metric, &ctx, seed)?,
                        seconds,
                    });
                }
            }
        }
    }
    write_csv(&cfg.output_dir.join("h_sweep.csv"), &rows)?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(method: &str, ratio: f64, metric: &str, seed: u64, value: Option<f64>) -> MetricRow {
        MetricRow {
            dataset: "d".into(),
            method: method.into(),
            edge_kept_ratio: ratio,
            metric: metric.into(),
            seed,
            value,
            params: String::new(),
            error: value.is_none().then(|| "failed".into()),
        }
    }

    #[test]
    fn aggregate_means_and_flags_best() {
        let rows = vec![
            row("re", 0.5, "pagerank", 0, Some(0.5)),
            row("re", 0.5, "pagerank", 1, Some(0.7)),
            row("ld", 0.5, "pagerank", 0, Some(0.9)),
            row("ld", 0.5, "pagerank", 1, None),
            row("re", 0.5, "spsp", 0, Some(2.0)),
            row("ld", 0.5, "spsp", 0, Some(1.0)),
        ];
        let agg = aggregate(&rows);
        assert_eq!(agg.len(), 4);
        assert!((agg[0].mean - 0.6).abs() < 1e-12);
        assert_eq!(agg[0].n_seeds, 2);
        assert!(!agg[0].best);
        assert_eq!(agg[1].n_seeds, 1);
        assert!(agg[1].best);
        // lower is better for shortest paths
        assert!(!agg[2].best && agg[3].best);
    }

    #[test]
    fn method_names() {
        assert_eq!(Method::from_name("rl").unwrap(), Method::Learned);
        assert_eq!(Method::from_name("re").unwrap().name(), "re");
        assert!(Method::from_name("magic").is_err());
    }
}
