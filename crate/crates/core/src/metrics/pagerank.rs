use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::metrics::rank::average_ranks;
use crate::scalar::Scalar;

pub const PAGERANK_DAMPING: f64 = 0.85;
pub const PAGERANK_TOL: f64 = 1e-10;
pub const PAGERANK_MAX_ITER: usize = 200;

/// Per-node scores with their average ranks (ties share the mean rank).
#[derive(Clone, Debug, PartialEq)]
pub struct RankVector<T = f64> {
    pub scores: Vec<T>,
    pub ranks: Vec<f64>,
}

impl<T: Scalar> RankVector<T> {
    pub fn from_scores(scores: Vec<T>) -> Self {
        let as_f64: Vec<f64> = scores.iter().map(|s| s.as_f64()).collect();
        let ranks = average_ranks(&as_f64);
        RankVector { scores, ranks }
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

/// PageRank by power iteration over live edges. Undirected edges count in
/// both directions; the mass of dangling nodes is spread uniformly. Stops
/// when the L1 change between iterates drops below `tol`.
pub fn pagerank<T: Scalar>(g: &Graph, damping: T, tol: T, max_iter: usize) -> Result<RankVector<T>> {
    let n = g.node_count();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    let nf = T::from_usize(n).expect("node count fits in scalar");
    let out_deg: Vec<usize> = (0..n).map(|v| g.out_degree(v)).collect();
    let mut x = vec![T::one() / nf; n];
    let mut next = vec![T::zero(); n];
    let teleport = (T::one() - damping) / nf;
    let mut change = T::infinity();
    for _ in 0..max_iter {
        let dangling: T = (0..n).filter(|&v| out_deg[v] == 0).map(|v| x[v]).sum();
        let base = teleport + damping * dangling / nf;
        next.iter_mut().for_each(|s| *s = base);
        for (u, &xu) in x.iter().enumerate() {
            if out_deg[u] == 0 {
                continue;
            }
            let share = damping * xu / T::from_usize(out_deg[u]).unwrap();
            for w in g.neighbors(u) {
                next[w] = next[w] + share;
            }
        }
        change = x.iter().zip(&next).map(|(&a, &b)| (a - b).abs()).sum();
        std::mem::swap(&mut x, &mut next);
        if change < tol {
            let total: T = x.iter().copied().sum();
            x.iter_mut().for_each(|s| *s = *s / total);
            return Ok(RankVector::from_scores(x));
        }
    }
    Err(Error::NonConvergence {
        iterations: max_iter,
        last_change: change.as_f64(),
        last: x.iter().map(|s| s.as_f64()).collect(),
    })
}

/// PageRank with damping 0.85, tolerance 1e-10 and 200 iterations.
pub fn pagerank_default(g: &Graph) -> Result<RankVector<f64>> {
    pagerank(g, PAGERANK_DAMPING, PAGERANK_TOL, PAGERANK_MAX_ITER)
}
