use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Geometric};

use super::target_edge_count;
use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph};

pub const DEFAULT_BURN_PROBABILITY: f64 = 0.95;
/// Total burns requested, as a multiple of the live edge count.
pub const DEFAULT_BURN_BUDGET: f64 = 5.0;

/// Per-edge visit counts from repeated forest fires.
///
/// Each fire starts at a uniformly random node. A burning node draws a
/// geometric count with mean `p / (1 - p)` and burns that many of its
/// not-yet-burnt neighbors (this fire only), counting a visit on each edge it
/// traverses. Fires repeat until `budget` burns have happened; the number of
/// fires is also capped at `budget` so a tiny `p` still terminates.
pub fn forest_fire_visits<R: Rng + ?Sized>(g: &Graph, p: f64, budget: usize, rng: &mut R) -> Result<Vec<u64>> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!("burn probability {p} outside (0, 1)")));
    }
    let n = g.node_count();
    let mut visits = vec![0u64; g.original_edge_count()];
    let geometric = Geometric::new(1.0 - p).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut burnt_in_fire = vec![usize::MAX; n];
    let mut burns = 0usize;
    let mut fires = 0usize;
    let mut candidates: Vec<(usize, EdgeId)> = Vec::new();
    while burns < budget && fires < budget.max(1) {
        let start = rng.gen_range(0..n);
        burnt_in_fire[start] = fires;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            let want = geometric.sample(rng) as usize;
            if want == 0 {
                continue;
            }
            candidates.clear();
            candidates.extend(g.incident(v).filter(|(w, _)| burnt_in_fire[*w] != fires));
            candidates.sort_unstable_by_key(|c| c.1);
            candidates.dedup_by_key(|c| c.0);
            let take = want.min(candidates.len());
            let (chosen, _) = candidates.partial_shuffle(rng, take);
            for &(w, e) in chosen.iter() {
                visits[e.0] += 1;
                burns += 1;
                burnt_in_fire[w] = fires;
                queue.push_back(w);
            }
        }
        fires += 1;
    }
    Ok(visits)
}

/// Edge Forest Fire: prune the `|E| - round(r |E|)` least-visited edges,
/// ties broken at random.
pub fn edge_forest_fire<R: Rng + ?Sized>(g: &Graph, ratio: f64, p: f64, rng: &mut R) -> Result<Graph> {
    let keep = target_edge_count(g.edge_count(), ratio)?;
    let budget = (DEFAULT_BURN_BUDGET * g.edge_count() as f64).ceil() as usize;
    let visits = forest_fire_visits(g, p, budget, rng)?;
    let mut order: Vec<EdgeId> = g.live_edges().map(|e| e.id).collect();
    order.shuffle(rng);
    order.sort_by_key(|e| visits[e.0]);
    let mut out = g.clone();
    for &e in &order[..g.edge_count() - keep] {
        out.prune_edge(e)?;
    }
    Ok(out)
}
