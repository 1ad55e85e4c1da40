//! Graph representation and pruning mechanics.
//!
//! A [`Graph`] is a mutable live-edge view over an immutable topology that is
//! shared between clones. Edges are never physically removed: pruning flips a
//! per-edge liveness flag, so an [`EdgeId`] stays meaningful for the lifetime
//! of the original graph (replayed transitions rely on this).

mod io;
mod sample;

use std::collections::HashMap;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};

pub use io::{load_communities, load_edge_list, write_edge_list, write_id_map, IngestReport};
pub use sample::{CandidateSubgraph, NodeDegree};

pub type NodeId = usize;

/// Stable edge identifier, unique over the original graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct EdgeRef {
    pub source: NodeId,
    pub destination: NodeId,
    pub id: EdgeId,
}

/// Per-node degrees. Directed graphs track in- and out-degree separately.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DegreeVector {
    Undirected(Vec<usize>),
    Directed { in_degree: Vec<usize>, out_degree: Vec<usize> },
}

#[derive(Debug)]
struct Topology {
    directed: bool,
    labels: Vec<u64>,
    label_index: HashMap<u64, NodeId>,
    endpoints: Vec<(NodeId, NodeId)>,
    // Undirected: every incident edge. Directed: outgoing edges.
    out_adj: Vec<Vec<(NodeId, EdgeId)>>,
    // Directed only.
    in_adj: Vec<Vec<(NodeId, EdgeId)>>,
    lookup: HashMap<(NodeId, NodeId), EdgeId>,
}

#[derive(Clone, Debug)]
pub struct Graph {
    topo: Arc<Topology>,
    live: Vec<bool>,
    live_list: Vec<EdgeId>,
    live_pos: Vec<usize>,
    out_deg: Vec<usize>,
    in_deg: Vec<usize>,
}

impl Graph {
    /// Builds a graph over nodes `0..node_count` whose original ids are the
    /// node indices themselves. Self-loops and duplicates are dropped.
    pub fn from_edges(node_count: usize, edges: &[(NodeId, NodeId)], directed: bool) -> Result<Self> {
        let labels = (0..node_count as u64).collect();
        Self::build(labels, edges.iter().copied(), directed).map(|(g, _)| g)
    }

    /// Convenience constructor for undirected test and fixture graphs.
    pub fn undirected(node_count: usize, edges: &[(NodeId, NodeId)]) -> Result<Self> {
        Self::from_edges(node_count, edges, false)
    }

    pub(crate) fn build(
        labels: Vec<u64>,
        edges: impl IntoIterator<Item = (NodeId, NodeId)>,
        directed: bool,
    ) -> Result<(Self, IngestReport)> {
        let n = labels.len();
        let mut report = IngestReport::default();
        let mut endpoints = Vec::new();
        let mut lookup = HashMap::new();
        let mut out_adj = vec![Vec::new(); n];
        let mut in_adj = if directed { vec![Vec::new(); n] } else { Vec::new() };
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::UnknownNode(u.max(v) as u64));
            }
            if u == v {
                report.self_loops += 1;
                continue;
            }
            let key = if directed { (u, v) } else { (u.min(v), u.max(v)) };
            if lookup.contains_key(&key) {
                report.duplicates += 1;
                continue;
            }
            let id = EdgeId(endpoints.len());
            lookup.insert(key, id);
            endpoints.push((u, v));
            out_adj[u].push((v, id));
            if directed {
                in_adj[v].push((u, id));
            } else {
                out_adj[v].push((u, id));
            }
        }
        let label_index = labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
        let topo = Topology {
            directed,
            labels,
            label_index,
            endpoints,
            out_adj,
            in_adj,
            lookup,
        };
        let graph = Graph::fresh(Arc::new(topo));
        Ok((graph, report))
    }

    pub fn node_count(&self) -> usize {
        self.topo.labels.len()
    }

    /// Number of live edges.
    pub fn edge_count(&self) -> usize {
        self.live_list.len()
    }

    /// Number of edges at load time.
    pub fn original_edge_count(&self) -> usize {
        self.topo.endpoints.len()
    }

    pub fn is_directed(&self) -> bool {
        self.topo.directed
    }

    /// Fraction of the original edges that are still live.
    pub fn edge_kept_ratio(&self) -> f64 {
        let total = self.original_edge_count();
        if total == 0 {
            return 0.0;
        }
        self.edge_count() as f64 / total as f64
    }

    /// Original (file) id of a compact node id.
    pub fn label(&self, v: NodeId) -> u64 {
        self.topo.labels[v]
    }

    pub fn labels(&self) -> &[u64] {
        &self.topo.labels
    }

    pub fn node_for_label(&self, label: u64) -> Option<NodeId> {
        self.topo.label_index.get(&label).copied()
    }

    pub fn edge(&self, id: EdgeId) -> EdgeRef {
        let (source, destination) = self.topo.endpoints[id.0];
        EdgeRef {
            source,
            destination,
            id,
        }
    }

    /// Stable id of the edge joining `u` and `v`, live or not.
    pub fn edge_id(&self, u: NodeId, v: NodeId) -> Option<EdgeId> {
        let key = if self.topo.directed { (u, v) } else { (u.min(v), u.max(v)) };
        self.topo.lookup.get(&key).copied()
    }

    pub fn is_live(&self, id: EdgeId) -> bool {
        self.live.get(id.0).copied().unwrap_or(false)
    }

    /// Live edges in stable id order.
    pub fn live_edges(&self) -> impl Iterator<Item = EdgeRef> + '_ {
        self.live
            .iter()
            .enumerate()
            .filter(|(_, &l)| l)
            .map(move |(i, _)| self.edge(EdgeId(i)))
    }

    /// Live edge ids in unspecified (but deterministic) order.
    pub fn live_edge_ids(&self) -> &[EdgeId] {
        &self.live_list
    }

    /// Live successors of `v` (all live neighbors when undirected).
    pub fn neighbors(&self, v: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.topo.out_adj[v]
            .iter()
            .filter(move |(_, e)| self.live[e.0])
            .map(|&(w, _)| w)
    }

    /// Live predecessors of `v` (all live neighbors when undirected).
    pub fn predecessors(&self, v: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        let adj = if self.topo.directed {
            &self.topo.in_adj[v]
        } else {
            &self.topo.out_adj[v]
        };
        adj.iter().filter(move |(_, e)| self.live[e.0]).map(|&(w, _)| w)
    }

    /// Live incident edges of `v` with the opposite endpoint, in both directions.
    pub fn incident(&self, v: NodeId) -> impl Iterator<Item = (NodeId, EdgeId)> + '_ {
        let ins: &[(NodeId, EdgeId)] = if self.topo.directed {
            &self.topo.in_adj[v]
        } else {
            &[]
        };
        self.topo.out_adj[v]
            .iter()
            .chain(ins.iter())
            .filter(move |(_, e)| self.live[e.0])
            .copied()
    }

    /// Sorted, deduplicated live neighbors of `v` ignoring direction.
    pub fn neighborhood(&self, v: NodeId) -> Vec<NodeId> {
        let mut out: Vec<NodeId> = self.incident(v).map(|(w, _)| w).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Undirected degree, or out-degree plus in-degree when directed.
    pub fn degree(&self, v: NodeId) -> usize {
        if self.topo.directed {
            self.out_deg[v] + self.in_deg[v]
        } else {
            self.out_deg[v]
        }
    }

    pub fn out_degree(&self, v: NodeId) -> usize {
        self.out_deg[v]
    }

    pub fn in_degree(&self, v: NodeId) -> usize {
        self.in_deg[v]
    }

    /// Incrementally maintained degrees.
    pub fn degrees(&self) -> DegreeVector {
        if self.topo.directed {
            DegreeVector::Directed {
                in_degree: self.in_deg.clone(),
                out_degree: self.out_deg.clone(),
            }
        } else {
            DegreeVector::Undirected(self.out_deg.clone())
        }
    }

    /// Degrees recounted from the live adjacency.
    pub fn recompute_degrees(&self) -> DegreeVector {
        let n = self.node_count();
        if self.topo.directed {
            let out_degree = (0..n).map(|v| self.neighbors(v).count()).collect();
            let in_degree = (0..n).map(|v| self.predecessors(v).count()).collect();
            DegreeVector::Directed { in_degree, out_degree }
        } else {
            DegreeVector::Undirected((0..n).map(|v| self.neighbors(v).count()).collect())
        }
    }

    /// Removes a live edge. Pruning a dead edge is a bookkeeping bug and is
    /// reported as [`Error::DeadEdge`].
    pub fn prune_edge(&mut self, id: EdgeId) -> Result<()> {
        if !self.is_live(id) {
            return Err(Error::DeadEdge(id));
        }
        self.live[id.0] = false;
        let pos = self.live_pos[id.0];
        let last = *self.live_list.last().expect("live edge implies nonempty list");
        self.live_list.swap_remove(pos);
        if last != id {
            self.live_pos[last.0] = pos;
        }
        self.live_pos[id.0] = usize::MAX;
        let (u, v) = self.topo.endpoints[id.0];
        self.out_deg[u] -= 1;
        if self.topo.directed {
            self.in_deg[v] -= 1;
        } else {
            self.out_deg[v] -= 1;
            self.in_deg[u] -= 1;
            self.in_deg[v] -= 1;
        }
        Ok(())
    }

    /// Prunes `count` distinct live edges chosen uniformly at random and
    /// returns their ids.
    pub fn random_prune<R: Rng + ?Sized>(&mut self, count: usize, rng: &mut R) -> Result<Vec<EdgeId>> {
        let available = self.edge_count();
        if count > available {
            return Err(Error::InsufficientEdges {
                requested: count,
                available,
            });
        }
        let chosen: Vec<EdgeId> = rand::seq::index::sample(rng, available, count)
            .into_iter()
            .map(|i| self.live_list[i])
            .collect();
        for &id in &chosen {
            self.prune_edge(id)?;
        }
        Ok(chosen)
    }

    /// Copy of the original graph (all edges live) restricted to `keep`.
    pub fn restricted_to(&self, keep: impl IntoIterator<Item = EdgeId>) -> Result<Graph> {
        let mut out = self.pristine();
        let mut mask = vec![false; self.original_edge_count()];
        for id in keep {
            if id.0 >= mask.len() {
                return Err(Error::DeadEdge(id));
            }
            mask[id.0] = true;
        }
        for (i, keep) in mask.into_iter().enumerate() {
            if !keep {
                out.prune_edge(EdgeId(i))?;
            }
        }
        Ok(out)
    }

    /// Fresh view of the original graph with every edge live.
    pub fn pristine(&self) -> Graph {
        Graph::fresh(Arc::clone(&self.topo))
    }

    fn fresh(topo: Arc<Topology>) -> Graph {
        let n = topo.labels.len();
        let m = topo.endpoints.len();
        let mut out_deg = vec![0; n];
        let mut in_deg = vec![0; n];
        for &(u, v) in &topo.endpoints {
            out_deg[u] += 1;
            in_deg[v] += 1;
            if !topo.directed {
                out_deg[v] += 1;
                in_deg[u] += 1;
            }
        }
        Graph {
            topo,
            live: vec![true; m],
            live_list: (0..m).map(EdgeId).collect(),
            live_pos: (0..m).collect(),
            out_deg,
            in_deg,
        }
    }

    /// True when `other` is a view over the same original topology.
    pub fn shares_topology(&self, other: &Graph) -> bool {
        Arc::ptr_eq(&self.topo, &other.topo)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn triangle() -> Graph {
        Graph::undirected(3, &[(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    #[test]
    fn prune_updates_degrees() {
        let mut g = triangle();
        let e = g.edge_id(0, 1).unwrap();
        g.prune_edge(e).unwrap();
        assert_eq!(g.degrees(), DegreeVector::Undirected(vec![1, 1, 2]));
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.original_edge_count(), 3);
    }

    #[test]
    fn double_prune_is_an_error() {
        let mut g = triangle();
        let e = g.edge_id(1, 0).unwrap();
        g.prune_edge(e).unwrap();
        assert!(matches!(g.prune_edge(e), Err(Error::DeadEdge(id)) if id == e));
    }

    #[test]
    fn reversed_pair_resolves_to_same_id() {
        let g = triangle();
        assert_eq!(g.edge_id(2, 1), g.edge_id(1, 2));
        let d = Graph::from_edges(2, &[(0, 1), (1, 0)], true).unwrap();
        assert_ne!(d.edge_id(0, 1), d.edge_id(1, 0));
        assert_eq!(d.edge_count(), 2);
    }

    #[test]
    fn path_prune_isolates_node() {
        let mut g = Graph::undirected(3, &[(0, 1), (1, 2)]).unwrap();
        g.prune_edge(g.edge_id(0, 1).unwrap()).unwrap();
        assert_eq!(g.neighbors(0).count(), 0);
        assert_eq!(crate::metrics::shortest_path_distance(&g, 0, 2), crate::metrics::Distance::Unreachable);
    }

    #[test]
    fn edge_kept_ratio_examples() {
        let k4 = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3), (0, 4), (1, 4)];
        let mut g = Graph::undirected(5, &k4).unwrap();
        assert_eq!(g.edge_kept_ratio(), 1.0);
        g.prune_edge(EdgeId(0)).unwrap();
        g.prune_edge(EdgeId(5)).unwrap();
        assert_eq!(g.edge_kept_ratio(), 0.75);
        let mut rng = seeded(1);
        g.random_prune(6, &mut rng).unwrap();
        assert_eq!(g.edge_kept_ratio(), 0.0);
    }

    #[test]
    fn random_prune_bounds() {
        let mut g = triangle();
        let mut rng = seeded(3);
        assert!(g.random_prune(0, &mut rng).unwrap().is_empty());
        assert_eq!(g.edge_count(), 3);
        assert!(matches!(
            g.random_prune(4, &mut rng),
            Err(Error::InsufficientEdges { requested: 4, available: 3 })
        ));
        g.random_prune(3, &mut rng).unwrap();
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn random_prune_is_uniform_on_k4() {
        let k4 = Graph::undirected(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        let mut rng = seeded(11);
        let mut counts = [0usize; 6];
        let trials = 10_000;
        for _ in 0..trials {
            let mut g = k4.clone();
            let pruned = g.random_prune(1, &mut rng).unwrap();
            counts[pruned[0].0] += 1;
        }
        for c in counts {
            let freq = c as f64 / trials as f64;
            assert!((freq - 1.0 / 6.0).abs() < 0.02, "frequency {freq}");
        }
    }

    #[test]
    fn directed_degrees() {
        let mut g = Graph::from_edges(3, &[(0, 1), (0, 2), (2, 1)], true).unwrap();
        assert_eq!(
            g.degrees(),
            DegreeVector::Directed {
                in_degree: vec![0, 2, 1],
                out_degree: vec![2, 0, 1]
            }
        );
        g.prune_edge(g.edge_id(2, 1).unwrap()).unwrap();
        assert_eq!(g.degrees(), g.recompute_degrees());
        assert_eq!(g.neighborhood(2), vec![0]);
    }

    #[test]
    fn restricted_view_keeps_selection() {
        let g = triangle();
        let r = g.restricted_to([EdgeId(1)]).unwrap();
        assert_eq!(r.edge_count(), 1);
        assert!(r.is_live(EdgeId(1)));
        assert!(r.shares_topology(&g));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn incremental_degrees_match_recount(
                edges in proptest::collection::vec((0usize..8, 0usize..8), 1..30),
                directed in any::<bool>(),
                order in proptest::collection::vec(any::<prop::sample::Index>(), 0..30),
            ) {
                let mut g = Graph::from_edges(8, &edges, directed).unwrap();
                for idx in order {
                    if g.edge_count() == 0 { break; }
                    let id = g.live_edge_ids()[idx.index(g.edge_count())];
                    g.prune_edge(id).unwrap();
                    prop_assert_eq!(g.degrees(), g.recompute_degrees());
                }
                let live: usize = (0..g.original_edge_count()).filter(|&i| g.is_live(EdgeId(i))).count();
                prop_assert_eq!(live, g.edge_count());
            }
        }
    }
}
