use rand::Rng;

use super::qnet::{QNetwork, Selection};
use super::replay::Transition;
use crate::error::{Error, Result};
use crate::graph::CandidateSubgraph;
use crate::nn::{Gradients, ParamSet, Tape};
use crate::scalar::Scalar;

/// Index of the largest value; the lowest index wins exact ties.
pub fn argmax<T: Scalar>(values: &[T]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        match best {
            Some(b) if v <= values[b] => {}
            _ => best = Some(i),
        }
    }
    best
}

/// Epsilon-greedy choice over Q-values.
pub fn select_action<T: Scalar, R: Rng + ?Sized>(qvals: &[T], epsilon: f64, rng: &mut R) -> usize {
    assert!(!qvals.is_empty(), "no actions to choose from");
    if rng.gen::<f64>() < epsilon {
        rng.gen_range(0..qvals.len())
    } else {
        argmax(qvals).expect("nonempty")
    }
}

/// `r` for terminal transitions, otherwise
/// `r + γ · Q_target(s', argmax_a Q_policy(s', a))`.
pub fn double_dqn_targets<T: Scalar>(
    policy: &QNetwork<T>,
    target: &QNetwork<T>,
    batch: &[&Transition],
    gamma: f64,
) -> Result<Vec<f64>> {
    let mut ys: Vec<f64> = batch.iter().map(|t| t.reward).collect();
    let live: Vec<(usize, &CandidateSubgraph)> = batch
        .iter()
        .enumerate()
        .filter_map(|(i, t)| t.next_state.as_deref().map(|s| (i, s)))
        .collect();
    if live.is_empty() || gamma == 0.0 {
        return Ok(ys);
    }
    let all: Vec<(&CandidateSubgraph, Selection)> = live.iter().map(|&(_, s)| (s, Selection::All)).collect();
    let q_policy = policy.q_values_batch(&all)?;
    let mut chosen = Vec::with_capacity(live.len());
    let mut offset = 0;
    for &(_, s) in &live {
        let a = argmax(&q_policy[offset..offset + s.len()]).expect("nonempty subgraph");
        chosen.push((s, Selection::One(a)));
        offset += s.len();
    }
    let q_target = target.q_values_batch(&chosen)?;
    for (&(i, _), q) in live.iter().zip(q_target) {
        ys[i] += gamma * q.as_f64();
    }
    Ok(ys)
}

pub struct LossEval<T> {
    pub loss: f64,
    /// `Q(s, a) - y` per item.
    pub td_errors: Vec<f64>,
    pub gradients: Option<Gradients<T>>,
    /// See [`Tape::activation_pattern`].
    pub pattern: u64,
}

/// `Σ w_i (Q(s_i, a_i) - y_i)² / B` evaluated with `params` in `net`'s layout.
pub fn weighted_td_loss<T: Scalar>(
    net: &QNetwork<T>,
    params: &ParamSet<T>,
    items: &[(&CandidateSubgraph, usize)],
    targets: &[f64],
    weights: &[f64],
    with_gradients: bool,
) -> Result<LossEval<T>> {
    if items.len() != targets.len() || items.len() != weights.len() {
        return Err(Error::LengthMismatch(items.len(), targets.len().min(weights.len())));
    }
    let b = items.len() as f64;
    let sel: Vec<(&CandidateSubgraph, Selection)> = items.iter().map(|&(s, a)| (s, Selection::One(a))).collect();
    let mut tape = Tape::new(params);
    let q = net.forward(&mut tape, &sel)?;
    let td_errors: Vec<f64> = tape.value(q).iter().zip(targets).map(|(q, y)| q.as_f64() - y).collect();
    let loss = td_errors.iter().zip(weights).map(|(d, w)| w * d * d).sum::<f64>() / b;
    if !loss.is_finite() {
        return Err(Error::NonFinite("td loss"));
    }
    let gradients = if with_gradients {
        let seed: Vec<T> = td_errors
            .iter()
            .zip(weights)
            .map(|(d, w)| T::from_f64_lossy(2.0 * w * d / b))
            .collect();
        Some(tape.backward(q, &seed)?)
    } else {
        None
    };
    Ok(LossEval {
        loss,
        td_errors,
        gradients,
        pattern: tape.activation_pattern(),
    })
}
