//! Edge sparsification of simple graphs.
//!
//! The crate prunes edges from a graph down to a requested edge-kept ratio
//! while trying to preserve a structural objective (PageRank ordering,
//! community structure, shortest-path distances or modularity). Two families
//! of sparsifiers are provided:
//!
//! * a learned pruning agent ([`agent`]): Double DQN with prioritized replay
//!   whose Q-network scores candidate edges with a graph-attention node
//!   encoder ([`nn`]);
//! * classical baselines ([`baselines`]): random edge, local degree, edge
//!   forest fire, L-Spar and the Baswana–Sen spanner.
//!
//! Neural code is generic over the scalar type ([`Scalar`], implemented for
//! `f32` and `f64`). The aliases below fix the precision used by the
//! command-line harness (`f32`) and by gradient checking (`f64`).

pub mod agent;
pub mod baselines;
pub mod error;
pub mod graph;
pub mod harness;
pub mod metrics;
pub mod nn;
pub mod rewards;
pub mod rng;
pub mod scalar;

pub use error::{Error, Result};
pub use graph::{CandidateSubgraph, DegreeVector, EdgeId, EdgeRef, Graph, NodeId};
pub use scalar::Scalar;

/// Precision used for training and evaluation runs.
pub type Real = f32;

/// Training agent at run precision.
pub type Agent = agent::Agent<Real>;
/// Q-network at run precision.
pub type QNetwork = agent::QNetwork<Real>;
/// Q-network in double precision, used by gradient checks.
pub type QNetwork64 = agent::QNetwork<f64>;
/// Parameter set at run precision.
pub type ParamSet = nn::ParamSet<Real>;
