//! Structural metrics shared by evaluation and the reward functions.

mod ari;
mod louvain;
mod pagerank;
mod paths;
mod rank;

pub use ari::adjusted_rand_index;
pub use louvain::{louvain, modularity, Partition};
pub use pagerank::{pagerank, pagerank_default, RankVector, PAGERANK_DAMPING, PAGERANK_MAX_ITER, PAGERANK_TOL};
pub use paths::{batch_spsp, bfs_distances, shortest_path_distance, Distance, PathQuerySet, MAX_EVAL_QUERIES};
pub use rank::{average_ranks, spearman, spearman_rho};
