use super::{local_keep_rule, search_exponent, target_edge_count, Sparsified};
use crate::error::Result;
use crate::graph::{EdgeId, Graph};

fn keep_count(deg: usize, alpha: f64) -> usize {
    ((deg as f64).powf(alpha) + 1e-9).floor() as usize
}

/// Surviving edges for a fixed exponent: every node keeps its
/// `floor(deg^alpha)` incident edges leading to the highest-degree neighbors.
pub fn local_degree_keep(g: &Graph, alpha: f64) -> Vec<EdgeId> {
    local_keep_rule(
        g,
        |v, e| {
            let edge = g.edge(e);
            let other = if edge.source == v { edge.destination } else { edge.source };
            g.degree(other) as f64
        },
        |deg| keep_count(deg, alpha),
    )
}

/// Local Degree sparsifier with `alpha` searched in `[0, 1]`.
pub fn local_degree(g: &Graph, ratio: f64) -> Result<Sparsified> {
    let target = target_edge_count(g.edge_count(), ratio)?;
    search_exponent(g, target, 0.0, 1.0, |alpha| local_degree_keep(g, alpha))
}
