use std::collections::{HashMap, HashSet, VecDeque};

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};

/// Cap on fixed evaluation queries per graph.
pub const MAX_EVAL_QUERIES: usize = 8196;

/// Hop distance. Unreachability is its own value, never an integer sentinel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Distance {
    Finite(usize),
    Unreachable,
}

impl Distance {
    pub fn finite(self) -> Option<usize> {
        match self {
            Distance::Finite(d) => Some(d),
            Distance::Unreachable => None,
        }
    }

    pub fn is_reachable(self) -> bool {
        matches!(self, Distance::Finite(_))
    }
}

/// BFS hop counts from `src` along live (out-)edges.
pub fn bfs_distances(g: &Graph, src: NodeId) -> Vec<Distance> {
    let mut dist = vec![Distance::Unreachable; g.node_count()];
    dist[src] = Distance::Finite(0);
    let mut queue = VecDeque::from([src]);
    while let Some(u) = queue.pop_front() {
        let du = dist[u].finite().expect("queued nodes are reached");
        for w in g.neighbors(u) {
            if dist[w] == Distance::Unreachable {
                dist[w] = Distance::Finite(du + 1);
                queue.push_back(w);
            }
        }
    }
    dist
}

/// Single-pair BFS with early exit.
pub fn shortest_path_distance(g: &Graph, u: NodeId, v: NodeId) -> Distance {
    if u == v {
        return Distance::Finite(0);
    }
    let mut seen = vec![false; g.node_count()];
    seen[u] = true;
    let mut frontier = vec![u];
    let mut depth = 0;
    while !frontier.is_empty() {
        depth += 1;
        let mut next = Vec::new();
        for &x in &frontier {
            for w in g.neighbors(x) {
                if w == v {
                    return Distance::Finite(depth);
                }
                if !seen[w] {
                    seen[w] = true;
                    next.push(w);
                }
            }
        }
        frontier = next;
    }
    Distance::Unreachable
}

/// Distances for a list of pairs; one BFS per distinct source.
pub fn batch_spsp(g: &Graph, pairs: &[(NodeId, NodeId)]) -> Vec<Distance> {
    let mut by_source: HashMap<NodeId, Vec<Distance>> = HashMap::new();
    pairs
        .iter()
        .map(|&(u, v)| by_source.entry(u).or_insert_with(|| bfs_distances(g, u))[v])
        .collect()
}

/// Query pairs together with their baseline distances on a reference graph.
#[derive(Clone, Debug, PartialEq)]
pub struct PathQuerySet {
    pairs: Vec<(NodeId, NodeId)>,
    baseline: Vec<Distance>,
}

impl PathQuerySet {
    /// Pairs must be distinct nodes of `reference`; baselines are computed on it.
    pub fn new(reference: &Graph, pairs: Vec<(NodeId, NodeId)>) -> Result<Self> {
        let n = reference.node_count();
        for &(u, v) in &pairs {
            if u >= n || v >= n {
                return Err(Error::UnknownNode(u.max(v) as u64));
            }
            if u == v {
                return Err(Error::InvalidParameter(format!("query pair ({u}, {u}) has equal endpoints")));
            }
        }
        let baseline = batch_spsp(reference, &pairs);
        Ok(PathQuerySet { pairs, baseline })
    }

    /// Builds a set from precomputed baselines.
    pub fn with_baseline(pairs: Vec<(NodeId, NodeId)>, baseline: Vec<Distance>) -> Result<Self> {
        if pairs.len() != baseline.len() {
            return Err(Error::LengthMismatch(pairs.len(), baseline.len()));
        }
        if let Some(&(u, _)) = pairs.iter().find(|(u, v)| u == v) {
            return Err(Error::InvalidParameter(format!("query pair ({u}, {u}) has equal endpoints")));
        }
        Ok(PathQuerySet { pairs, baseline })
    }

    /// `min(count, |V|(|V|-1)/2)` distinct unordered pairs drawn uniformly.
    pub fn sample<R: Rng + ?Sized>(reference: &Graph, count: usize, rng: &mut R) -> Result<Self> {
        let n = reference.node_count();
        let all = n * n.saturating_sub(1) / 2;
        let pairs = if count >= all {
            (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect()
        } else {
            let mut seen = HashSet::with_capacity(count);
            let mut pairs = Vec::with_capacity(count);
            while pairs.len() < count {
                let u = rng.gen_range(0..n);
                let v = rng.gen_range(0..n);
                if u == v {
                    continue;
                }
                let key = (u.min(v), u.max(v));
                if seen.insert(key) {
                    pairs.push(key);
                }
            }
            pairs
        };
        PathQuerySet::new(reference, pairs)
    }

    pub fn pairs(&self) -> &[(NodeId, NodeId)] {
        &self.pairs
    }

    pub fn baseline(&self) -> &[Distance] {
        &self.baseline
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    /// All-pairs hop distances by Floyd-Warshall over live edges.
    fn floyd_warshall(g: &Graph) -> Vec<Vec<Option<usize>>> {
        let n = g.node_count();
        let mut d = vec![vec![None; n]; n];
        for (i, row) in d.iter_mut().enumerate() {
            row[i] = Some(0);
            for j in g.neighbors(i) {
                row[j] = Some(1);
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if let (Some(a), Some(b)) = (d[i][k], d[k][j]) {
                        if d[i][j].is_none_or(|c| a + b < c) {
                            d[i][j] = Some(a + b);
                        }
                    }
                }
            }
        }
        d
    }

    fn random_graph(seed: u64, n: usize, p: f64, directed: bool) -> Graph {
        let mut rng = seeded(seed);
        let mut edges = Vec::new();
        for u in 0..n {
            for v in 0..n {
                if (directed || u < v) && u != v && rng.gen_bool(p) {
                    edges.push((u, v));
                }
            }
        }
        Graph::from_edges(n, &edges, directed).unwrap()
    }

    #[test]
    fn trivial_distances() {
        let g = Graph::undirected(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        assert_eq!(shortest_path_distance(&g, 2, 2), Distance::Finite(0));
        assert_eq!(shortest_path_distance(&g, 0, 3), Distance::Finite(3));
    }

    #[test]
    fn bfs_matches_floyd_warshall() {
        for seed in 0..50 {
            let g = random_graph(seed, 12, 0.2, seed % 5 == 0);
            let fw = floyd_warshall(&g);
            for u in 0..12 {
                let bfs = bfs_distances(&g, u);
                for v in 0..12 {
                    assert_eq!(bfs[v].finite(), fw[u][v]);
                    assert_eq!(shortest_path_distance(&g, u, v).finite(), fw[u][v]);
                }
            }
        }
    }

    #[test]
    fn batch_matches_single_pair_calls() {
        let g = random_graph(3, 20, 0.15, false);
        let mut rng = seeded(8);
        let pairs: Vec<_> = (0..20).map(|_| (rng.gen_range(0..20), rng.gen_range(0..20))).collect();
        let batch = batch_spsp(&g, &pairs);
        for (&(u, v), d) in pairs.iter().zip(&batch) {
            assert_eq!(*d, shortest_path_distance(&g, u, v));
        }
        assert!(batch_spsp(&g, &[]).is_empty());
        let dup = batch_spsp(&g, &[(1, 5), (1, 5)]);
        assert_eq!(dup[0], dup[1]);
    }

    #[test]
    fn query_sampling_caps_at_all_pairs() {
        let g = random_graph(1, 34, 0.1, false);
        let q = PathQuerySet::sample(&g, MAX_EVAL_QUERIES, &mut seeded(0)).unwrap();
        assert_eq!(q.len(), 561);
        let q = PathQuerySet::sample(&g, 40, &mut seeded(0)).unwrap();
        assert_eq!(q.len(), 40);
        assert!(q.pairs().iter().all(|(u, v)| u < v));
    }

    #[test]
    fn equal_endpoints_rejected() {
        let g = random_graph(1, 5, 0.5, false);
        assert!(PathQuerySet::new(&g, vec![(1, 1)]).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn triangle_inequality(seed in any::<u64>(), p in 0.05f64..0.5) {
                let g = random_graph(seed, 10, p, false);
                let all: Vec<Vec<Distance>> = (0..10).map(|u| bfs_distances(&g, u)).collect();
                for u in 0..10 { for v in 0..10 { for w in 0..10 {
                    if let (Some(uv), Some(vw), Some(uw)) = (all[u][v].finite(), all[v][w].finite(), all[u][w].finite()) {
                        prop_assert!(uw <= uv + vw);
                    }
                }}}
            }
        }
    }
}
