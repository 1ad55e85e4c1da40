//! Reward functions binding a preservation objective to the pruning agent.
//!
//! Every objective compares the sparsified graph `G'` against the original
//! `G`. Metrics of `G` are computed once and cached.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EdgeRef, Graph, NodeId};
use crate::metrics::{
    adjusted_rand_index, batch_spsp, bfs_distances, louvain, pagerank_default, spearman_rho, Distance, PathQuerySet,
    RankVector,
};
use crate::rng::seeded;

/// Sign of the same-community term of the community reward.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelSign {
    /// `+1` when the pruned edge joins two nodes of the same community.
    #[default]
    SameCommunityPositive,
    /// `-1` when the pruned edge joins two nodes of the same community.
    SameCommunityNegative,
}

pub const DEFAULT_PAIRS_PER_ENDPOINT: usize = 16;

fn default_pairs() -> usize {
    DEFAULT_PAIRS_PER_ENDPOINT
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "objective", rename_all = "snake_case", deny_unknown_fields)]
pub enum Objective {
    /// Spearman correlation of PageRank scores.
    Pagerank,
    /// Louvain agreement with ground-truth communities plus a label term.
    Community {
        #[serde(default)]
        label_sign: LabelSign,
    },
    /// Shortest-path growth around the pruned edge.
    Spsp {
        #[serde(default = "default_pairs")]
        pairs_per_endpoint: usize,
    },
    /// Louvain modularity of the pruned graph.
    Modularity,
}

impl Objective {
    pub fn name(&self) -> &'static str {
        match self {
            Objective::Pagerank => "pagerank",
            Objective::Community { .. } => "community",
            Objective::Spsp { .. } => "spsp",
            Objective::Modularity => "modularity",
        }
    }

    pub fn spsp() -> Self {
        Objective::Spsp {
            pairs_per_endpoint: DEFAULT_PAIRS_PER_ENDPOINT,
        }
    }

    pub fn community() -> Self {
        Objective::Community {
            label_sign: LabelSign::default(),
        }
    }
}

/// Reward for one prune.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Reward {
    /// What the agent maximizes.
    pub value: f64,
    /// The objective's own reading; for shortest paths this is the
    /// distance-increase penalty before negation.
    pub raw: f64,
}

/// `ρ(PR(G), PR(G')) - 1`.
pub fn reward_pagerank(original: &RankVector, pruned: &Graph) -> Result<f64> {
    let pr = pagerank_default(pruned)?;
    Ok(spearman_rho(original, &pr)? - 1.0)
}

/// Louvain partition of `g` (seeded) scored by ARI against the labeled nodes.
pub fn community_ari(g: &Graph, labels: &[Option<usize>], louvain_seed: u64) -> Result<f64> {
    if labels.len() != g.node_count() {
        return Err(Error::LengthMismatch(labels.len(), g.node_count()));
    }
    let found = louvain(g, &mut seeded(louvain_seed)).labels;
    let (truth, pred): (Vec<usize>, Vec<usize>) = labels
        .iter()
        .zip(found)
        .filter_map(|(t, p)| t.map(|t| (t, p)))
        .unzip();
    adjusted_rand_index(&truth, &pred)
}

/// `±1` depending on whether the pruned edge's endpoints share a label.
pub fn label_term(labels: &[Option<usize>], edge: EdgeRef, sign: LabelSign) -> Result<f64> {
    let label = |v: NodeId| labels.get(v).copied().flatten().ok_or(Error::UnlabeledNode(v));
    let same = label(edge.source)? == label(edge.destination)?;
    let s = if same { 1.0 } else { -1.0 };
    Ok(match sign {
        LabelSign::SameCommunityPositive => s,
        LabelSign::SameCommunityNegative => -s,
    })
}

/// `ARI(G') - ARI(G) ± 1`, with `ARI(G)` supplied from cache.
pub fn reward_community(
    original_ari: f64,
    pruned: &Graph,
    labels: &[Option<usize>],
    edge: EdgeRef,
    sign: LabelSign,
    louvain_seed: u64,
) -> Result<f64> {
    let term = label_term(labels, edge, sign)?;
    Ok(community_ari(pruned, labels, louvain_seed)? - original_ari + term)
}

/// Mean distance increase over the query pairs, measured against their
/// baselines. A pair that became unreachable contributes `|V|`; a pair that
/// was already unreachable contributes 0. This is a penalty: the agent is
/// rewarded with its negation.
pub fn spsp_penalty(pruned: &Graph, pairs: &PathQuerySet) -> Result<f64> {
    let n = pruned.node_count();
    if let Some(&(u, v)) = pairs.pairs().iter().find(|&&(u, v)| u >= n || v >= n) {
        return Err(Error::UnknownNode(u.max(v) as u64));
    }
    if pairs.is_empty() {
        return Ok(0.0);
    }
    let now = batch_spsp(pruned, pairs.pairs());
    let total: f64 = now
        .iter()
        .zip(pairs.baseline())
        .map(|(after, before)| match (before, after) {
            (Distance::Finite(b), Distance::Finite(a)) => *a as f64 - *b as f64,
            (Distance::Finite(_), Distance::Unreachable) => n as f64,
            (Distance::Unreachable, _) => 0.0,
        })
        .sum();
    Ok(total / pairs.len() as f64)
}

/// Pairs `(u, x)` and `(v, x)` for up to `k` random nodes `x` outside the
/// edge, with baselines from one BFS per endpoint on `g` (before the prune).
pub fn sample_training_pairs<R: Rng + ?Sized>(
    g: &Graph,
    edge: EdgeRef,
    k: usize,
    rng: &mut R,
) -> Result<PathQuerySet> {
    let (u, v) = (edge.source, edge.destination);
    let n = g.node_count();
    let others = n.saturating_sub(2);
    let picks = sample(rng, others, k.min(others));
    // map 0..n-2 onto V \ {u, v}
    let (lo, hi) = (u.min(v), u.max(v));
    let nodes: Vec<NodeId> = picks
        .into_iter()
        .map(|i| {
            let mut x = i;
            if x >= lo {
                x += 1;
            }
            if x >= hi {
                x += 1;
            }
            x
        })
        .collect();
    let du = bfs_distances(g, u);
    let dv = bfs_distances(g, v);
    let mut pairs = Vec::with_capacity(2 * nodes.len());
    let mut baseline = Vec::with_capacity(2 * nodes.len());
    for &x in &nodes {
        pairs.push((u, x));
        baseline.push(du[x]);
        pairs.push((v, x));
        baseline.push(dv[x]);
    }
    PathQuerySet::with_baseline(pairs, baseline)
}

/// `Q(G', louvain(G')) - Q(G, louvain(G))` with the second term supplied.
pub fn reward_modularity(original_modularity: f64, pruned: &Graph, louvain_seed: u64) -> f64 {
    louvain(pruned, &mut seeded(louvain_seed)).modularity - original_modularity
}

/// An objective bound to one original graph, with its cached metrics.
#[derive(Clone, Debug)]
pub struct RewardFn {
    objective: Objective,
    labels: Option<Vec<Option<usize>>>,
    pagerank: Option<RankVector>,
    // per-episode louvain seed and the matching metric of G
    episode: Option<(u64, f64)>,
}

impl RewardFn {
    /// Checks that the objective has the context it needs.
    pub fn new(objective: Objective, original: &Graph, labels: Option<Vec<Option<usize>>>) -> Result<Self> {
        let mut pagerank = None;
        match &objective {
            Objective::Community { .. } => {
                let l = labels
                    .as_ref()
                    .ok_or_else(|| Error::Config("community objective needs ground-truth labels".into()))?;
                if l.len() != original.node_count() {
                    return Err(Error::LengthMismatch(l.len(), original.node_count()));
                }
                if l.iter().flatten().count() < 2 {
                    return Err(Error::Config("community labels cover fewer than two nodes".into()));
                }
            }
            Objective::Spsp { pairs_per_endpoint } if *pairs_per_endpoint == 0 => {
                return Err(Error::Config("pairs_per_endpoint must be at least 1".into()));
            }
            Objective::Pagerank => pagerank = Some(pagerank_default(original)?),
            Objective::Modularity if original.is_directed() => {
                return Err(Error::Config("modularity objective needs an undirected graph".into()));
            }
            _ => {}
        }
        Ok(RewardFn {
            objective,
            labels,
            pagerank,
            episode: None,
        })
    }

    pub fn objective(&self) -> &Objective {
        &self.objective
    }

    /// Fixes the Louvain seed for the coming episode and caches the
    /// original graph's score under it.
    pub fn begin_episode(&mut self, original: &Graph, louvain_seed: u64) -> Result<()> {
        let base = match &self.objective {
            Objective::Community { .. } => community_ari(original, self.labels.as_deref().expect("checked"), louvain_seed)?,
            Objective::Modularity => louvain(original, &mut seeded(louvain_seed)).modularity,
            _ => 0.0,
        };
        self.episode = Some((louvain_seed, base));
        Ok(())
    }

    /// Prunes `edge` from `g` and scores the result.
    pub fn prune_and_score<R: Rng + ?Sized>(&self, g: &mut Graph, edge: EdgeRef, rng: &mut R) -> Result<Reward> {
        let (seed, base) = self.episode.unwrap_or((0, 0.0));
        let needs_episode = matches!(self.objective, Objective::Community { .. } | Objective::Modularity);
        if needs_episode && self.episode.is_none() {
            return Err(Error::InvalidParameter("begin_episode must precede scoring".into()));
        }
        match &self.objective {
            Objective::Spsp { pairs_per_endpoint } => {
                let pairs = sample_training_pairs(g, edge, *pairs_per_endpoint, rng)?;
                g.prune_edge(edge.id)?;
                let raw = spsp_penalty(g, &pairs)?;
                Ok(Reward { value: -raw, raw })
            }
            Objective::Pagerank => {
                g.prune_edge(edge.id)?;
                let value = reward_pagerank(self.pagerank.as_ref().expect("cached"), g)?;
                Ok(Reward { value, raw: value })
            }
            Objective::Community { label_sign } => {
                let labels = self.labels.as_deref().expect("checked");
                label_term(labels, edge, *label_sign)?;
                g.prune_edge(edge.id)?;
                let value = reward_community(base, g, labels, edge, *label_sign, seed)?;
                Ok(Reward { value, raw: value })
            }
            Objective::Modularity => {
                g.prune_edge(edge.id)?;
                let value = reward_modularity(base, g, seed);
                Ok(Reward { value, raw: value })
            }
        }
    }
}
