use rand::Rng;

use super::target_edge_count;
use crate::error::Result;
use crate::graph::Graph;

/// Prunes exactly `|E| - round(r |E|)` live edges chosen uniformly.
pub fn random_edge<R: Rng + ?Sized>(g: &Graph, ratio: f64, rng: &mut R) -> Result<Graph> {
    let keep = target_edge_count(g.edge_count(), ratio)?;
    let mut out = g.clone();
    out.random_prune(g.edge_count() - keep, rng)?;
    Ok(out)
}
