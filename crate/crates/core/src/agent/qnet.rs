//! Edge-scoring Q-network: attention node encoder, node MLP, edge MLP and a
//! scalar value head.

use std::collections::HashMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{CandidateSubgraph, NodeDegree, NodeId};
use crate::nn::{GatLayer, ParamId, ParamSet, Tape, Tensor, Var, HIDDEN_SLOPE};
use crate::scalar::Scalar;

/// Which edges of a candidate subgraph to score.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Selection {
    All,
    One(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Dense {
    weight: ParamId,
    bias: ParamId,
}

impl Dense {
    fn register<T: Scalar, R: Rng + ?Sized>(
        params: &mut ParamSet<T>,
        name: &str,
        fan_in: usize,
        fan_out: usize,
        rng: &mut R,
    ) -> Self {
        let bound = 1.0 / (fan_in as f64).sqrt();
        Dense {
            weight: params.add(format!("{name}.weight"), Tensor::uniform(fan_in, fan_out, bound, rng)),
            bias: params.add(format!("{name}.bias"), Tensor::uniform(1, fan_out, bound, rng)),
        }
    }

    fn apply<T: Scalar>(&self, tape: &mut Tape<'_, T>, x: Var) -> Result<Var> {
        let w = tape.param(self.weight);
        let b = tape.param(self.bias);
        tape.linear(x, w, b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Layout {
    embedding: ParamId,
    gat: GatLayer,
    node: [Dense; 2],
    edge: [Dense; 2],
    head: Dense,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QNetwork<T> {
    params: ParamSet<T>,
    layout: Layout,
    directed: bool,
    node_count: usize,
    dim: usize,
    hidden: usize,
}

impl<T: Scalar> QNetwork<T> {
    pub fn new<R: Rng + ?Sized>(node_count: usize, directed: bool, dim: usize, hidden: usize, rng: &mut R) -> Self {
        let mut params = ParamSet::new();
        let embedding = params.add("embedding", Tensor::uniform(node_count, dim, 0.1, rng));
        let gat = GatLayer::register(&mut params, dim, rng);
        let node_in = dim + Self::feature_width(directed);
        let node = [
            Dense::register(&mut params, "node.0", node_in, hidden, rng),
            Dense::register(&mut params, "node.1", hidden, hidden, rng),
        ];
        let edge_in = if directed { 2 * hidden } else { hidden };
        let edge = [
            Dense::register(&mut params, "edge.0", edge_in, hidden, rng),
            Dense::register(&mut params, "edge.1", hidden, hidden, rng),
        ];
        let head = Dense::register(&mut params, "head", hidden, 1, rng);
        QNetwork {
            params,
            layout: Layout {
                embedding,
                gat,
                node,
                edge,
                head,
            },
            directed,
            node_count,
            dim,
            hidden,
        }
    }

    /// Degree columns plus the edge-ratio column.
    fn feature_width(directed: bool) -> usize {
        if directed {
            3
        } else {
            2
        }
    }

    /// Number of scalar parameters for the given shape.
    pub fn parameter_count(node_count: usize, directed: bool, dim: usize, hidden: usize) -> usize {
        let dense = |i: usize, o: usize| i * o + o;
        let edge_in = if directed { 2 * hidden } else { hidden };
        node_count * dim
            + dim * dim
            + 2 * dim
            + 1
            + dense(dim + Self::feature_width(directed), hidden)
            + dense(hidden, hidden)
            + dense(edge_in, hidden)
            + dense(hidden, hidden)
            + dense(hidden, 1)
    }

    pub fn params(&self) -> &ParamSet<T> {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamSet<T> {
        &mut self.params
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.dim, self.hidden)
    }

    /// Same architecture and values at another precision.
    pub fn cast<U: Scalar>(&self) -> QNetwork<U> {
        QNetwork {
            params: self.params.cast(),
            layout: self.layout,
            directed: self.directed,
            node_count: self.node_count,
            dim: self.dim,
            hidden: self.hidden,
        }
    }

    fn degree_features(&self, d: NodeDegree, ratio: T, out: &mut Vec<T>) {
        if self.directed {
            out.push(T::from_f64_lossy(d.in_degree as f64));
        }
        out.push(T::from_f64_lossy(d.out_degree as f64));
        out.push(ratio);
    }

    /// Records the network on `tape` (whose parameter set must share this
    /// network's layout) and returns a column with one Q-value per selected
    /// edge, items in order.
    pub fn forward(&self, tape: &mut Tape<'_, T>, items: &[(&CandidateSubgraph, Selection)]) -> Result<Var> {
        let mut union: Vec<NodeId> = Vec::new();
        let mut row_of: HashMap<NodeId, usize> = HashMap::new();
        let mut selected = Vec::with_capacity(items.len());
        for &(sub, sel) in items {
            if sub.is_empty() {
                return Err(Error::InvalidParameter("empty candidate subgraph".into()));
            }
            if sub.directed != self.directed {
                return Err(Error::InvalidParameter("subgraph directedness differs from the network".into()));
            }
            let range = match sel {
                Selection::All => 0..sub.len(),
                Selection::One(i) if i < sub.len() => i..i + 1,
                Selection::One(i) => {
                    return Err(Error::InvalidParameter(format!(
                        "action {i} out of range for {} candidates",
                        sub.len()
                    )))
                }
            };
            for e in &sub.edges[range.clone()] {
                for v in [e.source, e.destination] {
                    if v >= self.node_count {
                        return Err(Error::UnknownNode(v as u64));
                    }
                    let hood = sub.neighborhood(v).unwrap_or(&[]);
                    for &w in std::iter::once(&v).chain(hood) {
                        row_of.entry(w).or_insert_with(|| {
                            union.push(w);
                            union.len() - 1
                        });
                    }
                }
            }
            selected.push(range);
        }

        let table = tape.param(self.layout.embedding);
        let rows = tape.embed_lookup(table, &union)?;
        let proj = self.layout.gat.project(tape, rows)?;

        let mut encoded = Vec::new();
        let mut features = Vec::new();
        let mut src_rows = Vec::new();
        let mut dst_rows = Vec::new();
        for (&(sub, _), range) in items.iter().zip(selected) {
            let ratio = T::from_f64_lossy(sub.edge_ratio);
            let mut local: HashMap<NodeId, usize> = HashMap::new();
            for k in range {
                let e = sub.edges[k];
                let (ds, dd) = sub.degrees[k];
                for (v, deg, out) in [(e.source, ds, &mut src_rows), (e.destination, dd, &mut dst_rows)] {
                    let idx = match local.get(&v) {
                        Some(&i) => i,
                        None => {
                            let target = row_of[&v];
                            let mut hood: Vec<usize> =
                                sub.neighborhood(v).unwrap_or(&[]).iter().map(|w| row_of[w]).collect();
                            hood.push(target);
                            let (h, _) = self.layout.gat.attend(tape, &proj, target, &hood)?;
                            encoded.push(h);
                            self.degree_features(deg, ratio, &mut features);
                            local.insert(v, encoded.len() - 1);
                            encoded.len() - 1
                        }
                    };
                    out.push(idx);
                }
            }
        }

        let n = encoded.len();
        let nodes = tape.concat_rows(&encoded)?;
        let feats = tape.input(n, Self::feature_width(self.directed), features)?;
        let mut h = tape.concat_cols(&[nodes, feats])?;
        for layer in &self.layout.node {
            h = layer.apply(tape, h)?;
            h = tape.leaky_relu(h, HIDDEN_SLOPE);
        }
        let src = tape.embed_lookup(h, &src_rows)?;
        let dst = tape.embed_lookup(h, &dst_rows)?;
        let mut e = if self.directed {
            tape.concat_cols(&[src, dst])?
        } else {
            tape.add(src, dst)?
        };
        for layer in &self.layout.edge {
            e = layer.apply(tape, e)?;
            e = tape.leaky_relu(e, HIDDEN_SLOPE);
        }
        self.layout.head.apply(tape, e)
    }

    /// Q-value of every edge in `sub`.
    pub fn q_values(&self, sub: &CandidateSubgraph) -> Result<Vec<T>> {
        let mut tape = Tape::new(&self.params);
        let q = self.forward(&mut tape, &[(sub, Selection::All)])?;
        Ok(tape.value(q).to_vec())
    }

    /// Q-values for many items in one pass.
    pub fn q_values_batch(&self, items: &[(&CandidateSubgraph, Selection)]) -> Result<Vec<T>> {
        let mut tape = Tape::new(&self.params);
        let q = self.forward(&mut tape, items)?;
        Ok(tape.value(q).to_vec())
    }
}
