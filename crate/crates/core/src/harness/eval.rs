//! Metric evaluation of a sparsified graph against its original.

use super::config::Metric;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::metrics::{louvain, pagerank_default, spearman_rho, PathQuerySet};
use crate::rewards::{community_ari, spsp_penalty};
use crate::rng::{seeded, stream, Stream};

/// Inputs shared by every evaluation on one original graph.
#[derive(Clone, Debug)]
pub struct EvalContext {
    pub labels: Option<Vec<Option<usize>>>,
    pub louvain_seeds: usize,
    /// Fixed query pairs with baselines on the original graph.
    pub queries: Option<PathQuerySet>,
}

impl EvalContext {
    /// Samples `min(spsp_queries, |V|(|V|-1)/2)` pairs from `seed`.
    pub fn new(
        original: &Graph,
        labels: Option<Vec<Option<usize>>>,
        louvain_seeds: usize,
        spsp_queries: usize,
        seed: u64,
    ) -> Result<Self> {
        let queries = if spsp_queries > 0 {
            Some(PathQuerySet::sample(original, spsp_queries, &mut stream(seed, Stream::Queries))?)
        } else {
            None
        };
        Ok(EvalContext {
            labels,
            louvain_seeds,
            queries,
        })
    }
}

/// Value of `metric` for `sparsified`; Louvain-based metrics average over
/// `louvain_seeds` seeds derived from `seed`.
pub fn evaluate(original: &Graph, sparsified: &Graph, metric: Metric, ctx: &EvalContext, seed: u64) -> Result<f64> {
    if !original.shares_topology(sparsified) && original.node_count() != sparsified.node_count() {
        return Err(Error::LengthMismatch(original.node_count(), sparsified.node_count()));
    }
    let louvain_seed = |i: usize| seed.wrapping_mul(1_000_003).wrapping_add(i as u64);
    match metric {
        Metric::Pagerank => spearman_rho(&pagerank_default(original)?, &pagerank_default(sparsified)?),
        Metric::Ari => {
            let labels = ctx
                .labels
                .as_deref()
                .ok_or_else(|| Error::Config("the ari metric needs ground-truth labels".into()))?;
            let mut total = 0.0;
            for i in 0..ctx.louvain_seeds {
                total += community_ari(sparsified, labels, louvain_seed(i))?;
            }
            Ok(total / ctx.louvain_seeds as f64)
        }
        Metric::Spsp => {
            let q = ctx
                .queries
                .as_ref()
                .ok_or_else(|| Error::Config("the spsp metric needs query pairs".into()))?;
            spsp_penalty(sparsified, q)
        }
        Metric::Modularity => {
            let total: f64 = (0..ctx.louvain_seeds)
                .map(|i| louvain(sparsified, &mut seeded(louvain_seed(i))).modularity)
                .sum();
            Ok(total / ctx.louvain_seeds as f64)
        }
    }
}
