//! Proportional prioritized replay over a fixed-capacity ring.

use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::CandidateSubgraph;

#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub state: Arc<CandidateSubgraph>,
    pub action: usize,
    pub reward: f64,
    /// `None` when the episode ended because no live edges remained.
    pub next_state: Option<Arc<CandidateSubgraph>>,
}

/// Binary tree of partial sums and minima over leaf priorities.
#[derive(Clone, Debug)]
pub struct SumTree {
    leaves: usize,
    sum: Vec<f64>,
    min: Vec<f64>,
}

impl SumTree {
    pub fn new(capacity: usize) -> Self {
        let leaves = capacity.max(1).next_power_of_two();
        SumTree {
            leaves,
            sum: vec![0.0; 2 * leaves],
            min: vec![f64::INFINITY; 2 * leaves],
        }
    }

    pub fn set(&mut self, index: usize, value: f64) {
        let mut i = index + self.leaves;
        self.sum[i] = value;
        self.min[i] = value;
        while i > 1 {
            i /= 2;
            self.sum[i] = self.sum[2 * i] + self.sum[2 * i + 1];
            self.min[i] = self.min[2 * i].min(self.min[2 * i + 1]);
        }
    }

    pub fn get(&self, index: usize) -> f64 {
        self.sum[index + self.leaves]
    }

    pub fn total(&self) -> f64 {
        self.sum[1]
    }

    /// Smallest value among the leaves that have been set.
    pub fn min(&self) -> f64 {
        self.min[1]
    }

    /// Leaf whose cumulative range contains `mass` (clamped to the total).
    pub fn find(&self, mut mass: f64) -> usize {
        let mut i = 1;
        while i < self.leaves {
            let left = 2 * i;
            if mass < self.sum[left] || self.sum[left + 1] == 0.0 {
                i = left;
            } else {
                mass -= self.sum[left];
                i = left + 1;
            }
        }
        i - self.leaves
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampledBatch {
    pub indices: Vec<usize>,
    /// Importance weights `(N·P(i))^-β`, divided by the largest weight any
    /// stored transition could receive.
    pub weights: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct ReplayBuffer {
    capacity: usize,
    items: Vec<Transition>,
    next: usize,
    tree: SumTree,
    alpha: f64,
    beta: f64,
    floor: f64,
    max_priority: f64,
}

impl ReplayBuffer {
    pub fn new(capacity: usize, alpha: f64, beta: f64, floor: f64) -> Self {
        ReplayBuffer {
            capacity,
            items: Vec::with_capacity(capacity.min(1 << 16)),
            next: 0,
            tree: SumTree::new(capacity),
            alpha,
            beta,
            floor,
            max_priority: 1.0,
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn get(&self, index: usize) -> &Transition {
        &self.items[index]
    }

    /// Stores a transition at the current maximum priority, overwriting the
    /// oldest one when full. Returns its slot.
    pub fn push(&mut self, t: Transition) -> usize {
        let slot = self.next;
        if self.items.len() < self.capacity {
            self.items.push(t);
        } else {
            self.items[slot] = t;
        }
        self.tree.set(slot, self.max_priority.powf(self.alpha));
        self.next = (self.next + 1) % self.capacity;
        slot
    }

    /// Raw priority (before the α exponent) of a slot.
    pub fn priority(&self, index: usize) -> f64 {
        self.tree.get(index).powf(1.0 / self.alpha)
    }

    /// Sampling probability of a slot.
    pub fn probability(&self, index: usize) -> f64 {
        self.tree.get(index) / self.tree.total()
    }

    /// Draws `count` slots independently with probability `p_i^α / Σ p_j^α`.
    pub fn sample<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Result<SampledBatch> {
        if self.items.len() < count || self.items.is_empty() {
            return Err(Error::ReplayUnderflow {
                held: self.items.len(),
                requested: count,
            });
        }
        let total = self.tree.total();
        let n = self.items.len() as f64;
        let max_weight = (n * self.tree.min() / total).powf(-self.beta);
        let mut indices = Vec::with_capacity(count);
        let mut weights = Vec::with_capacity(count);
        for _ in 0..count {
            let i = self.tree.find(rng.gen::<f64>() * total).min(self.items.len() - 1);
            let p = self.tree.get(i) / total;
            indices.push(i);
            weights.push((n * p).powf(-self.beta) / max_weight);
        }
        Ok(SampledBatch { indices, weights })
    }

    /// Sets priorities to `|δ| + floor`.
    pub fn update_priorities(&mut self, indices: &[usize], td_errors: &[f64]) {
        for (&i, &d) in indices.iter().zip(td_errors) {
            let p = d.abs() + self.floor;
            self.max_priority = self.max_priority.max(p);
            self.tree.set(i, p.powf(self.alpha));
        }
    }
}
