//! Classical sparsifiers used as comparison baselines.
//!
//! Every baseline is a pure function of the input graph, its request and a
//! seed, and returns a subgraph of its input: edges are only ever pruned.

mod forest_fire;
mod local_degree;
mod lspar;
mod random_edge;
mod spanner;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, NodeId};
use crate::rng;

pub use forest_fire::{edge_forest_fire, forest_fire_visits, DEFAULT_BURN_BUDGET, DEFAULT_BURN_PROBABILITY};
pub use local_degree::{local_degree, local_degree_keep};
pub use lspar::{jaccard_scores, l_spar, l_spar_keep};
pub use random_edge::random_edge;
pub use spanner::{baswana_sen_spanner, effective_stretch};

/// Sparsification method and its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Baseline {
    RandomEdge,
    /// Exponent searched to meet the ratio.
    LocalDegree,
    ForestFire {
        burn_probability: f64,
    },
    /// Exponent searched to meet the ratio.
    LSpar,
    /// Ignores the ratio; the stretch fixes the output size.
    Spanner {
        stretch: usize,
    },
}

impl Baseline {
    pub fn name(&self) -> &'static str {
        match self {
            Baseline::RandomEdge => "re",
            Baseline::LocalDegree => "ld",
            Baseline::ForestFire { .. } => "eff",
            Baseline::LSpar => "lspar",
            Baseline::Spanner { .. } => "spanner",
        }
    }

    /// Parses a method name as used on the command line.
    pub fn from_name(name: &str) -> Option<Baseline> {
        Some(match name {
            "re" | "random" | "random_edge" => Baseline::RandomEdge,
            "ld" | "local_degree" => Baseline::LocalDegree,
            "eff" | "forest_fire" => Baseline::ForestFire {
                burn_probability: DEFAULT_BURN_PROBABILITY,
            },
            "lspar" | "ls" | "l_spar" => Baseline::LSpar,
            "spanner" => Baseline::Spanner { stretch: 3 },
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparsifyRequest {
    /// Edge-kept ratio in (0, 1].
    pub ratio: f64,
    pub method: Baseline,
    pub seed: u64,
}

/// A baseline's output together with what it chose internally.
#[derive(Clone, Debug)]
pub struct Sparsified {
    pub graph: Graph,
    /// Searched exponent (LD, L-Spar) or effective stretch (spanner).
    pub parameter: Option<f64>,
    pub warning: Option<String>,
}

/// `round(ratio * edges)` after checking `ratio` lies in (0, 1].
pub fn target_edge_count(edges: usize, ratio: f64) -> Result<usize> {
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(Error::InvalidParameter(format!("edge-kept ratio {ratio} outside (0, 1]")));
    }
    Ok((ratio * edges as f64).round() as usize)
}

pub fn sparsify(g: &Graph, request: &SparsifyRequest) -> Result<Sparsified> {
    let mut rng = rng::seeded(request.seed);
    let plain = |graph| Sparsified {
        graph,
        parameter: None,
        warning: None,
    };
    match &request.method {
        Baseline::RandomEdge => random_edge(g, request.ratio, &mut rng).map(plain),
        Baseline::LocalDegree => local_degree(g, request.ratio),
        Baseline::ForestFire { burn_probability } => {
            edge_forest_fire(g, request.ratio, *burn_probability, &mut rng).map(plain)
        }
        Baseline::LSpar => l_spar(g, request.ratio),
        Baseline::Spanner { stretch } => {
            let effective = effective_stretch(*stretch)?;
            let warning = (effective != *stretch)
                .then(|| format!("stretch {stretch} mapped to {effective} (odd stretches only)"));
            Ok(Sparsified {
                graph: baswana_sen_spanner(g, effective, &mut rng)?,
                parameter: Some(effective as f64),
                warning,
            })
        }
    }
}

/// Keeps, at every node, the top `keep(deg)` incident live edges by
/// `score(node, edge)` (descending, ties by edge id); an edge survives when
/// either endpoint keeps it. Returns the surviving edge ids.
pub(crate) fn local_keep_rule(
    g: &Graph,
    score: impl Fn(NodeId, EdgeId) -> f64,
    keep: impl Fn(usize) -> usize,
) -> Vec<EdgeId> {
    let mut kept = vec![false; g.original_edge_count()];
    let mut incident: Vec<(f64, EdgeId)> = Vec::new();
    for v in 0..g.node_count() {
        incident.clear();
        incident.extend(g.incident(v).map(|(_, e)| (score(v, e), e)));
        let k = keep(incident.len()).min(incident.len());
        incident.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        for &(_, e) in &incident[..k] {
            kept[e.0] = true;
        }
    }
    kept.iter()
        .enumerate()
        .filter(|(_, &k)| k)
        .map(|(i, _)| EdgeId(i))
        .collect()
}

/// Bisects a keep exponent in `[lo, hi]` so the surviving count is as close
/// as possible to `target`; survivor counts must be monotone in the exponent.
pub(crate) fn search_exponent(
    g: &Graph,
    target: usize,
    lo: f64,
    hi: f64,
    survivors: impl Fn(f64) -> Vec<EdgeId>,
) -> Result<Sparsified> {
    let (mut lo, mut hi) = (lo, hi);
    let mut lo_set = survivors(lo);
    let mut hi_set = survivors(hi);
    if lo_set.len() < target {
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            let set = survivors(mid);
            if set.len() >= target {
                hi = mid;
                hi_set = set;
            } else {
                lo = mid;
                lo_set = set;
            }
        }
    } else {
        hi = lo;
        hi_set = lo_set.clone();
    }
    let (exponent, keep) = if target.abs_diff(lo_set.len()) < target.abs_diff(hi_set.len()) {
        (lo, lo_set)
    } else {
        (hi, hi_set)
    };
    let warning = (target.abs_diff(keep.len()) > 1).then(|| {
        format!(
            "no exponent reaches {target} edges; nearest achievable keeps {}",
            keep.len()
        )
    });
    if let Some(w) = &warning {
        log::warn!("{w}");
    }
    Ok(Sparsified {
        graph: subgraph_of(g, &keep)?,
        parameter: Some(exponent),
        warning,
    })
}

/// Clone of `g` where only `keep` (a subset of its live edges) stays live.
pub(crate) fn subgraph_of(g: &Graph, keep: &[EdgeId]) -> Result<Graph> {
    let mut out = g.clone();
    let mut mask = vec![false; g.original_edge_count()];
    for e in keep {
        mask[e.0] = true;
    }
    let drop: Vec<EdgeId> = g.live_edges().map(|e| e.id).filter(|e| !mask[e.0]).collect();
    for e in drop {
        out.prune_edge(e)?;
    }
    Ok(out)
}
