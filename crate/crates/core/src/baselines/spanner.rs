use std::collections::{BTreeMap, HashSet};

use rand::Rng;

use super::subgraph_of;
use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, NodeId};

/// Largest valid stretch `2k - 1` not exceeding `t`; even `t` maps to `t - 1`.
pub fn effective_stretch(t: usize) -> Result<usize> {
    if t == 0 {
        return Err(Error::InvalidParameter("stretch must be at least 1".into()));
    }
    Ok(if t.is_multiple_of(2) { t - 1 } else { t })
}

/// Lightest residual edge from `v` into each adjacent cluster, keyed by
/// cluster center. Unit weights; edge ids break ties.
fn lightest_edges(
    residual: &[BTreeMap<NodeId, EdgeId>],
    clustering: &[Option<NodeId>],
    v: NodeId,
) -> BTreeMap<NodeId, (EdgeId, NodeId)> {
    let mut best: BTreeMap<NodeId, (EdgeId, NodeId)> = BTreeMap::new();
    for (&u, &e) in &residual[v] {
        if let Some(c) = clustering[u] {
            best.entry(c)
                .and_modify(|cur| {
                    if e < cur.0 {
                        *cur = (e, u);
                    }
                })
                .or_insert((e, u));
        }
    }
    best
}

/// Randomized Baswana–Sen `(2k - 1)`-spanner of an unweighted graph.
///
/// `stretch` must be odd. The k - 1 clustering rounds sample each cluster
/// with probability `n^(-1/k)`; a vertex outside the sampled clusters either
/// joins its nearest sampled neighbor cluster or, if none is adjacent, keeps
/// one edge to every adjacent cluster and leaves the clustering. The final
/// round keeps one edge from every vertex to each adjacent cluster.
pub fn baswana_sen_spanner<R: Rng + ?Sized>(g: &Graph, stretch: usize, rng: &mut R) -> Result<Graph> {
    if stretch == 0 || stretch.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "stretch {stretch} is not of the form 2k-1; use {} or {}",
            stretch.saturating_sub(1).max(1),
            stretch + 1
        )));
    }
    let k = stretch.div_ceil(2);
    let n = g.node_count();
    let mut residual: Vec<BTreeMap<NodeId, EdgeId>> = vec![BTreeMap::new(); n];
    for e in g.live_edges() {
        residual[e.source].insert(e.destination, e.id);
        residual[e.destination].insert(e.source, e.id);
    }
    let mut clustering: Vec<Option<NodeId>> = (0..n).map(Some).collect();
    let mut spanner: HashSet<EdgeId> = HashSet::new();
    let sample_prob = (n as f64).powf(-1.0 / k as f64);

    for _ in 0..k.saturating_sub(1) {
        let mut centers: Vec<NodeId> = clustering.iter().flatten().copied().collect();
        centers.sort_unstable();
        centers.dedup();
        let sampled: HashSet<NodeId> = centers.into_iter().filter(|_| rng.gen_bool(sample_prob)).collect();
        let mut next: Vec<Option<NodeId>> = vec![None; n];
        let mut removals: Vec<(NodeId, NodeId)> = Vec::new();
        for v in 0..n {
            let Some(own) = clustering[v] else { continue };
            if sampled.contains(&own) {
                next[v] = Some(own);
                continue;
            }
            let lightest = lightest_edges(&residual, &clustering, v);
            let nearest_sampled = lightest
                .iter()
                .filter(|(c, _)| sampled.contains(c))
                .min_by_key(|(_, (e, _))| *e)
                .map(|(&c, &(e, _))| (c, e));
            match nearest_sampled {
                None => {
                    for &(e, _) in lightest.values() {
                        spanner.insert(e);
                    }
                    removals.extend(residual[v].keys().map(|&u| (v, u)));
                }
                Some((center, edge)) => {
                    spanner.insert(edge);
                    next[v] = Some(center);
                    for (&c, &(e, _)) in &lightest {
                        if e < edge {
                            spanner.insert(e);
                            removals.extend(
                                residual[v]
                                    .keys()
                                    .filter(|&&u| clustering[u] == Some(c))
                                    .map(|&u| (v, u)),
                            );
                        }
                    }
                }
            }
        }
        for (u, v) in removals {
            residual[u].remove(&v);
            residual[v].remove(&u);
        }
        clustering = next;
        for v in 0..n {
            let drop: Vec<NodeId> = residual[v]
                .keys()
                .copied()
                .filter(|&u| clustering[v].is_none() || clustering[u].is_none() || clustering[u] == clustering[v])
                .collect();
            for u in drop {
                residual[v].remove(&u);
                residual[u].remove(&v);
            }
        }
    }

    for v in 0..n {
        for (e, _) in lightest_edges(&residual, &clustering, v).into_values() {
            spanner.insert(e);
        }
    }
    let mut keep: Vec<EdgeId> = spanner.into_iter().collect();
    keep.sort_unstable();
    subgraph_of(g, &keep)
}
