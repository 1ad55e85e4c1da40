use std::path::PathBuf;

use thiserror::Error;

use crate::graph::EdgeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("edge list contains no edges")]
    EmptyGraph,
    #[error("node id {0} is not present in the graph")]
    UnknownNode(u64),
    #[error("node {0} appears in more than one community")]
    OverlappingCommunity(u64),
    #[error("node {0} has no community label")]
    UnlabeledNode(usize),
    #[error("edge {0:?} is not live")]
    DeadEdge(EdgeId),
    #[error("no edge between nodes {0} and {1}")]
    NoSuchEdge(usize, usize),
    #[error("requested {requested} edges but only {available} are live")]
    InsufficientEdges { requested: usize, available: usize },
    #[error("graph has no live edges")]
    NoLiveEdges,
    #[error("power iteration did not converge in {iterations} iterations (last change {last_change:e})")]
    NonConvergence {
        iterations: usize,
        last_change: f64,
        last: Vec<f64>,
    },
    #[error("rank correlation undefined: zero rank variance")]
    ZeroVariance,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("shape mismatch: {left:?} vs {right:?} in {op}")]
    ShapeMismatch {
        op: &'static str,
        left: [usize; 2],
        right: [usize; 2],
    },
    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),
    #[error("parameter {0} has no gradient")]
    MissingGradient(String),
    #[error("gradient check failed at {param}[{index}]: analytic {analytic:e}, numeric {numeric:e}, relative error {relative:e}")]
    GradientMismatch {
        param: String,
        index: usize,
        analytic: f64,
        numeric: f64,
        relative: f64,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("target ratio {target} needs {required} live edges but only {live} remain")]
    UnattainableRatio {
        target: f64,
        required: usize,
        live: usize,
    },
    #[error("replay buffer holds {held} transitions, {requested} requested")]
    ReplayUnderflow { held: usize, requested: usize },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("config: {0}")]
    Config(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by input data rather than by the run itself.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Io { .. }
                | Error::Parse { .. }
                | Error::EmptyGraph
                | Error::UnknownNode(_)
                | Error::OverlappingCommunity(_)
                | Error::UnlabeledNode(_)
                | Error::Checkpoint(_)
                | Error::Config(_)
        )
    }
}
