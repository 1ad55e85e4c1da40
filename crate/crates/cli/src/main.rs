use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use edgeprune::harness::{self, DatasetConfig, Method, Metric, RunConfig};
use edgeprune::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(name = "edgeprune", version, about = "Edge sparsification with a learned pruning policy and classical baselines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train the pruning agent described by a run config.
    Train {
        #[command(flatten)]
        run: RunArgs,
        /// Continue from the checkpoint in the output directory.
        #[arg(long)]
        resume: bool,
    },
    /// Sparsify one graph with one method and write the edge list.
    Sparsify(SparsifyArgs),
    /// Compare a sparsified edge list against its original.
    Evaluate(EvaluateArgs),
    /// Evaluate the full method x ratio x seed grid of a run config.
    Compare(RunArgs),
    /// Baswana-Sen spanners against the learned policy at matched edge counts.
    SpannerCompare(RunArgs),
    /// Learned-policy sparsification across candidate subgraph lengths.
    HSweep(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the evaluation subgraph length.
    #[arg(long = "eval-subgraph-len")]
    eval_subgraph_len: Option<usize>,
}

#[derive(Args)]
struct DatasetArgs {
    /// Edge list, one `u v` pair per line.
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    directed: bool,
    /// Community file, one community per line.
    #[arg(long)]
    labels: Option<PathBuf>,
}

#[derive(Args)]
struct SparsifyArgs {
    #[command(flatten)]
    data: DatasetArgs,
    /// rl, re, ld, eff, lspar or spanner.
    #[arg(long, value_parser = parse_method)]
    method: Method,
    /// Fraction of edges to keep.
    #[arg(long)]
    ratio: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output edge list.
    #[arg(long)]
    out: PathBuf,
    #[arg(long = "eval-subgraph-len", default_value_t = 32)]
    eval_subgraph_len: usize,
    /// Training checkpoint for the learned method.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Run config whose checkpoint location is used when --checkpoint is absent.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    data: DatasetArgs,
    /// Sparsified edge list using the original node ids.
    #[arg(long)]
    sparsified: PathBuf,
    /// pagerank, ari, spsp or modularity; repeatable.
    #[arg(long, value_parser = parse_metric, required = true)]
    metric: Vec<Metric>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Label for the method column.
    #[arg(long, default_value = "input")]
    method: String,
    /// CSV output; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_method(s: &str) -> Result<Method, String> {
    Method::from_name(s).map_err(|e| e.to_string())
}

fn parse_metric(s: &str) -> Result<Metric, String> {
    Metric::from_name(s).ok_or_else(|| format!("unknown metric {s:?}"))
}

fn load_run(args: &RunArgs) -> anyhow::Result<RunConfig> {
    let mut cfg = RunConfig::load(&args.config).with_context(|| format!("reading {}", args.config.display()))?;
    if let Some(seed) = args.seed {
        cfg.agent.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.output_dir = out.clone();
    }
    if let Some(h) = args.eval_subgraph_len {
        cfg.evaluation.subgraph_len = h;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn dataset_config(a: &DatasetArgs) -> DatasetConfig {
    DatasetConfig {
        path: a.dataset.clone(),
        directed: a.directed,
        labels: a.labels.clone(),
        name: None,
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Train { run, resume } => {
            let cfg = load_run(&run)?;
            let s = harness::train(&cfg, resume)?;
            println!(
                "trained {} episodes ({} total, {} updates{}); checkpoint {}",
                s.episodes_run,
                s.total_episodes,
                s.updates,
                if s.stopped_early { ", stopped early" } else { "" },
                s.checkpoint.display()
            );
            if let Some(b) = &s.best {
                println!("best validation score {:.4} at episode {}; checkpoint {}", b.score, b.episode, b.path.display());
            }
        }
        Command::Sparsify(a) => {
            let data = harness::load_dataset(&dataset_config(&a.data))?;
            let policy = if a.method == Method::Learned {
                let path = match (&a.checkpoint, &a.config) {
                    (Some(p), _) => p.clone(),
                    (None, Some(c)) => RunConfig::load(c)?.checkpoint_path(),
                    (None, None) => anyhow::bail!(Error::Config("--method rl needs --checkpoint or --config".into())),
                };
                Some(harness::load_policy(&path, &data.graph)?)
            } else {
                None
            };
            let s = harness::sparsify_to_file(
                &data,
                &a.method,
                policy.as_ref(),
                a.ratio,
                a.seed,
                a.eval_subgraph_len,
                &a.out,
            )?;
            println!(
                "kept {} of {} edges; wrote {}",
                s.graph.edge_count(),
                data.graph.original_edge_count(),
                a.out.display()
            );
        }
        Command::Evaluate(a) => {
            let data = harness::load_dataset(&dataset_config(&a.data))?;
            let sparsified = data.graph.load_subgraph(&a.sparsified)?;
            let rows = harness::evaluate_rows(
                &data,
                &sparsified,
                &a.metric,
                &Default::default(),
                &a.method,
                a.seed,
            )?;
            match &a.out {
                Some(p) => harness::write_csv(p, &rows)?,
                None => {
                    for r in &rows {
                        println!("{}\t{}\t{:.6}", r.metric, r.edge_kept_ratio, r.value.unwrap_or(f64::NAN));
                    }
                }
            }
        }
        Command::Compare(args) => {
            let cfg = load_run(&args)?;
            let (rows, summary) = harness::compare(&cfg)?;
            let failed = rows.iter().filter(|r| r.error.is_some()).count();
            for r in &summary {
                println!(
                    "{}\t{}\t{}\t{:.4}{}",
                    r.method,
                    r.ratio,
                    r.metric,
                    r.mean,
                    if r.best { " *" } else { "" }
                );
            }
            if failed > 0 {
                log::warn!("{failed} rows failed; see compare_rows.csv");
            }
        }
        Command::SpannerCompare(args) => {
            let cfg = load_run(&args)?;
            for r in harness::spanner_compare(&cfg)? {
                println!("t={}\tratio={:.4}\tspanner={:.4}\trl={:.4}", r.t, r.mean_ratio, r.spanner_rspsp, r.rl_rspsp);
            }
        }
        Command::HSweep(args) => {
            let cfg = load_run(&args)?;
            let rows = harness::h_sweep(&cfg)?;
            println!("wrote {} rows to {}", rows.len(), cfg.output_dir.join("h_sweep.csv").display());
        }
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(e) if e.is_data_error() => EXIT_DATA,
        _ => EXIT_RUNTIME,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
