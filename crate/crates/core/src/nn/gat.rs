//! Single-head graph attention over 1-hop neighborhoods.

use rand::Rng;

use super::tape::{Tape, Var};
use super::tensor::{ParamId, ParamSet, Tensor};
use crate::error::Result;
use crate::scalar::Scalar;

/// Negative slope of the LeakyReLU applied to attention scores.
pub const ATTENTION_SLOPE: f64 = 0.2;

/// Parameters of one attention layer.
///
/// The 1-unit coefficient layer on `[p_i | p_j]` is stored as two `d × 1`
/// halves so per-node scores can be computed once and reused by every
/// neighborhood that contains the node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GatLayer {
    pub weight: ParamId,
    pub attn_self: ParamId,
    pub attn_neighbor: ParamId,
    pub attn_bias: ParamId,
    dim: usize,
}

/// Per-batch projections shared by every target node.
#[derive(Clone, Copy, Debug)]
pub struct Projection {
    pub rows: Var,
    self_score: Var,
    neighbor_score: Var,
}

impl GatLayer {
    pub fn register<T: Scalar, R: Rng + ?Sized>(params: &mut ParamSet<T>, dim: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (dim as f64).sqrt();
        let attn_bound = 1.0 / ((2 * dim) as f64).sqrt();
        GatLayer {
            weight: params.add("gat.weight", Tensor::uniform(dim, dim, bound, rng)),
            attn_self: params.add("gat.attn_self", Tensor::uniform(dim, 1, attn_bound, rng)),
            attn_neighbor: params.add("gat.attn_neighbor", Tensor::uniform(dim, 1, attn_bound, rng)),
            attn_bias: params.add("gat.attn_bias", Tensor::uniform(1, 1, attn_bound, rng)),
            dim,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Projects embedding rows (`n × d`) and scores each row in both roles.
    pub fn project<T: Scalar>(&self, tape: &mut Tape<'_, T>, embeddings: Var) -> Result<Projection> {
        let w = tape.param(self.weight);
        let rows = tape.matmul(embeddings, w)?;
        let a_self = tape.param(self.attn_self);
        let a_neighbor = tape.param(self.attn_neighbor);
        Ok(Projection {
            rows,
            self_score: tape.matmul(rows, a_self)?,
            neighbor_score: tape.matmul(rows, a_neighbor)?,
        })
    }

    /// Attention output (`1 × d`) for the row `target`, attending over the
    /// rows in `neighborhood` (which should contain `target`). Also returns
    /// the attention weights as a `k × 1` column.
    pub fn attend<T: Scalar>(
        &self,
        tape: &mut Tape<'_, T>,
        proj: &Projection,
        target: usize,
        neighborhood: &[usize],
    ) -> Result<(Var, Var)> {
        let k = neighborhood.len();
        let own = tape.embed_lookup(proj.self_score, &vec![target; k])?;
        let other = tape.embed_lookup(proj.neighbor_score, neighborhood)?;
        let scores = tape.add(own, other)?;
        let bias = tape.param(self.attn_bias);
        let scores = tape.add_bias(scores, bias)?;
        let scores = tape.leaky_relu(scores, ATTENTION_SLOPE);
        let weights = tape.softmax(scores);
        let row = tape.transpose(weights);
        let values = tape.embed_lookup(proj.rows, neighborhood)?;
        Ok((tape.matmul(row, values)?, weights))
    }

    /// Encodes `targets` given their neighborhoods, all expressed as row
    /// indices into `embeddings`. Each target is added to its own
    /// neighborhood. Returns a `targets.len() × d` matrix.
    pub fn encode<T: Scalar>(
        &self,
        tape: &mut Tape<'_, T>,
        embeddings: Var,
        targets: &[usize],
        neighborhoods: &[Vec<usize>],
    ) -> Result<Var> {
        let proj = self.project(tape, embeddings)?;
        let mut outs = Vec::with_capacity(targets.len());
        for (&t, hood) in targets.iter().zip(neighborhoods) {
            let mut with_self = hood.clone();
            if !with_self.contains(&t) {
                with_self.push(t);
            }
            outs.push(self.attend(tape, &proj, t, &with_self)?.0);
        }
        tape.concat_rows(&outs)
    }
}
