use super::{local_keep_rule, search_exponent, target_edge_count, Sparsified};
use crate::error::Result;
use crate::graph::{EdgeId, Graph};

/// Jaccard similarity of the closed neighborhoods of each live edge's
/// endpoints, indexed by edge id (dead edges score 0).
pub fn jaccard_scores(g: &Graph) -> Vec<f64> {
    let closed: Vec<Vec<usize>> = (0..g.node_count())
        .map(|v| {
            let mut n = g.neighborhood(v);
            let at = n.binary_search(&v).unwrap_err();
            n.insert(at, v);
            n
        })
        .collect();
    let mut scores = vec![0.0; g.original_edge_count()];
    for e in g.live_edges() {
        let (a, b) = (&closed[e.source], &closed[e.destination]);
        let (mut i, mut j, mut common) = (0, 0, 0usize);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    common += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        let union = a.len() + b.len() - common;
        scores[e.id.0] = common as f64 / union as f64;
    }
    scores
}

fn keep_count(deg: usize, exponent: f64) -> usize {
    ((deg as f64).powf(exponent) - 1e-9).ceil() as usize
}

/// Surviving edges when every node keeps its `ceil(deg^e)` most similar edges.
pub fn l_spar_keep(g: &Graph, scores: &[f64], exponent: f64) -> Vec<EdgeId> {
    local_keep_rule(g, |_, e| scores[e.0], |deg| keep_count(deg, exponent))
}

/// L-Spar with the exponent searched in `(0, 1]`.
pub fn l_spar(g: &Graph, ratio: f64) -> Result<Sparsified> {
    let target = target_edge_count(g.edge_count(), ratio)?;
    let scores = jaccard_scores(g);
    search_exponent(g, target, 1e-9, 1.0, |e| l_spar_keep(g, &scores, e))
}
