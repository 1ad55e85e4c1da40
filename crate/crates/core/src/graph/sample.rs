use rand::Rng;

use super::{EdgeRef, Graph, NodeId};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NodeDegree {
    pub in_degree: u32,
    pub out_degree: u32,
}

/// A batch of live edges sampled from a graph, frozen together with
/// everything the Q-network reads: endpoint degrees, the edge-kept ratio and
/// the live 1-hop neighborhood of every endpoint at snapshot time.
#[derive(Clone, Debug, PartialEq)]
pub struct CandidateSubgraph {
    pub edges: Vec<EdgeRef>,
    /// `(source, destination)` degrees per edge.
    pub degrees: Vec<(NodeDegree, NodeDegree)>,
    pub edge_ratio: f64,
    pub directed: bool,
    /// Sorted by node id; neighbor lists sorted and deduplicated.
    neighborhoods: Vec<(NodeId, Vec<NodeId>)>,
}

impl CandidateSubgraph {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Live neighbors of an endpoint at snapshot time.
    pub fn neighborhood(&self, v: NodeId) -> Option<&[NodeId]> {
        self.neighborhoods
            .binary_search_by_key(&v, |(n, _)| *n)
            .ok()
            .map(|i| self.neighborhoods[i].1.as_slice())
    }

    /// Endpoints appearing in the subgraph, sorted.
    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.neighborhoods.iter().map(|(n, _)| *n)
    }

    /// Degree of an endpoint at snapshot time.
    pub fn node_degree(&self, v: NodeId) -> Option<NodeDegree> {
        self.edges.iter().zip(&self.degrees).find_map(|(e, d)| {
            if e.source == v {
                Some(d.0)
            } else if e.destination == v {
                Some(d.1)
            } else {
                None
            }
        })
    }

    /// Snapshot of an explicit edge list.
    pub fn from_edges(graph: &Graph, edges: Vec<EdgeRef>) -> Result<Self> {
        for e in &edges {
            if !graph.is_live(e.id) {
                return Err(Error::DeadEdge(e.id));
            }
        }
        let node_degree = |v: NodeId| NodeDegree {
            in_degree: graph.in_degree(v) as u32,
            out_degree: graph.out_degree(v) as u32,
        };
        let degrees = edges
            .iter()
            .map(|e| (node_degree(e.source), node_degree(e.destination)))
            .collect();
        let mut nodes: Vec<NodeId> = edges.iter().flat_map(|e| [e.source, e.destination]).collect();
        nodes.sort_unstable();
        nodes.dedup();
        let neighborhoods = nodes.into_iter().map(|v| (v, graph.neighborhood(v))).collect();
        Ok(CandidateSubgraph {
            edges,
            degrees,
            edge_ratio: graph.edge_kept_ratio(),
            directed: graph.is_directed(),
            neighborhoods,
        })
    }

    /// Fails with [`Error::DeadEdge`] if any edge was pruned since the snapshot.
    pub fn check_live(&self, graph: &Graph) -> Result<()> {
        match self.edges.iter().find(|e| !graph.is_live(e.id)) {
            Some(e) => Err(Error::DeadEdge(e.id)),
            None => Ok(()),
        }
    }
}

impl Graph {
    /// Samples `min(size, |E'|)` distinct live edges uniformly without
    /// replacement and snapshots them.
    pub fn sample_subgraph<R: Rng + ?Sized>(&self, size: usize, rng: &mut R) -> Result<CandidateSubgraph> {
        if size == 0 {
            return Err(Error::InvalidParameter("subgraph size must be at least 1".into()));
        }
        let live = self.live_edge_ids();
        if live.is_empty() {
            return Err(Error::NoLiveEdges);
        }
        let k = size.min(live.len());
        let edges = rand::seq::index::sample(rng, live.len(), k)
            .into_iter()
            .map(|i| self.edge(live[i]))
            .collect();
        CandidateSubgraph::from_edges(self, edges)
    }
}
