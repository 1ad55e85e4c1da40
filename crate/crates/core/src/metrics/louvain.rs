use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph::Graph;

/// Minimum modularity gain for another aggregation level.
const LEVEL_TOLERANCE: f64 = 1e-7;

/// A community assignment for every node.
#[derive(Clone, Debug, PartialEq)]
pub struct Partition {
    pub labels: Vec<usize>,
    pub modularity: f64,
}

impl Partition {
    pub fn community_count(&self) -> usize {
        let mut seen: Vec<usize> = self.labels.clone();
        seen.sort_unstable();
        seen.dedup();
        seen.len()
    }
}

/// Newman modularity `Q = sum_c [ m_c / m - (d_c / 2m)^2 ]` over live edges,
/// ignoring direction. An edgeless graph scores 0.
pub fn modularity(g: &Graph, labels: &[usize]) -> f64 {
    let m = g.edge_count() as f64;
    if m == 0.0 {
        return 0.0;
    }
    let k = labels.iter().copied().max().map_or(0, |c| c + 1);
    let mut internal = vec![0.0; k];
    let mut degree = vec![0.0; k];
    for e in g.live_edges() {
        let (cu, cv) = (labels[e.source], labels[e.destination]);
        if cu == cv {
            internal[cu] += 1.0;
        }
        degree[cu] += 1.0;
        degree[cv] += 1.0;
    }
    internal
        .iter()
        .zip(&degree)
        .map(|(mc, dc)| mc / m - (dc / (2.0 * m)).powi(2))
        .sum()
}

/// Weighted graph used between aggregation levels.
struct Level {
    adj: Vec<Vec<(usize, f64)>>,
    loops: Vec<f64>,
    strength: Vec<f64>,
}

impl Level {
    fn from_graph(g: &Graph) -> Level {
        let n = g.node_count();
        let mut maps: Vec<HashMap<usize, f64>> = vec![HashMap::new(); n];
        for e in g.live_edges() {
            *maps[e.source].entry(e.destination).or_default() += 1.0;
            *maps[e.destination].entry(e.source).or_default() += 1.0;
        }
        Level::from_maps(maps, vec![0.0; n])
    }

    fn from_maps(maps: Vec<HashMap<usize, f64>>, loops: Vec<f64>) -> Level {
        let adj: Vec<Vec<(usize, f64)>> = maps
            .into_iter()
            .map(|m| {
                let mut v: Vec<(usize, f64)> = m.into_iter().collect();
                v.sort_unstable_by_key(|p| p.0);
                v
            })
            .collect();
        let strength = adj
            .iter()
            .zip(&loops)
            .map(|(nb, l)| 2.0 * l + nb.iter().map(|p| p.1).sum::<f64>())
            .collect();
        Level { adj, loops, strength }
    }

    fn len(&self) -> usize {
        self.adj.len()
    }

    /// Greedy local moves until a full pass moves nothing. Returns the
    /// community of each node and whether anything moved.
    fn local_moves<R: Rng + ?Sized>(&self, m: f64, rng: &mut R) -> (Vec<usize>, bool) {
        let n = self.len();
        let mut comm: Vec<usize> = (0..n).collect();
        let mut tot = self.strength.clone();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        let mut weights: Vec<f64> = vec![0.0; n];
        let mut touched: Vec<usize> = Vec::new();
        let mut moved_any = false;
        loop {
            let mut moved = false;
            for &i in &order {
                let ki = self.strength[i];
                let old = comm[i];
                for &(j, w) in &self.adj[i] {
                    let c = comm[j];
                    if weights[c] == 0.0 {
                        touched.push(c);
                    }
                    weights[c] += w;
                }
                tot[old] -= ki;
                let gain = |c: usize, w: f64| w - tot[c] * ki / (2.0 * m);
                let mut best = old;
                let mut best_gain = gain(old, weights[old]);
                for &c in &touched {
                    let g = gain(c, weights[c]);
                    if g > best_gain + 1e-12 {
                        best = c;
                        best_gain = g;
                    }
                }
                tot[best] += ki;
                comm[i] = best;
                if best != old {
                    moved = true;
                    moved_any = true;
                }
                for &c in &touched {
                    weights[c] = 0.0;
                }
                touched.clear();
            }
            if !moved {
                break;
            }
        }
        (comm, moved_any)
    }

    fn aggregate(&self, comm: &[usize]) -> Level {
        let k = comm.iter().copied().max().map_or(0, |c| c + 1);
        let mut maps: Vec<HashMap<usize, f64>> = vec![HashMap::new(); k];
        let mut loops = vec![0.0; k];
        for i in 0..self.len() {
            let ci = comm[i];
            loops[ci] += self.loops[i];
            for &(j, w) in &self.adj[i] {
                let cj = comm[j];
                if ci == cj {
                    // each internal edge is seen from both endpoints
                    loops[ci] += w / 2.0;
                } else {
                    *maps[ci].entry(cj).or_default() += w;
                }
            }
        }
        Level::from_maps(maps, loops)
    }
}

fn compact(labels: &mut [usize]) {
    let mut map = HashMap::new();
    for l in labels.iter_mut() {
        let next = map.len();
        *l = *map.entry(*l).or_insert(next);
    }
}

/// Louvain modularity maximisation (resolution 1). Node visit order is
/// shuffled with `rng`; isolated nodes end up as singleton communities.
/// Edge direction is ignored.
pub fn louvain<R: Rng + ?Sized>(g: &Graph, rng: &mut R) -> Partition {
    let n = g.node_count();
    let m = g.edge_count() as f64;
    let mut labels: Vec<usize> = (0..n).collect();
    if m == 0.0 {
        return Partition { labels, modularity: 0.0 };
    }
    let mut level = Level::from_graph(g);
    let mut best_q = modularity(g, &labels);
    loop {
        let (mut comm, moved) = level.local_moves(m, rng);
        if !moved {
            break;
        }
        compact(&mut comm);
        let candidate: Vec<usize> = labels.iter().map(|&c| comm[c]).collect();
        let q = modularity(g, &candidate);
        if q - best_q <= LEVEL_TOLERANCE {
            if q > best_q {
                labels = candidate;
            }
            break;
        }
        labels = candidate;
        best_q = q;
        level = level.aggregate(&comm);
    }
    compact(&mut labels);
    Partition {
        modularity: modularity(g, &labels),
        labels,
    }
}
