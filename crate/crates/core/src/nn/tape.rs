//! Tape of matrix operations recorded during a forward pass.
//!
//! Every operation appends a node holding its output; [`Tape::backward`]
//! walks the nodes in reverse and accumulates parameter gradients. Parameter
//! values are read in place from the borrowed [`ParamSet`] and never copied.

use std::collections::HashMap;
use std::hash::{Hash, Hasher};

use super::tensor::{ParamId, ParamSet};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Handle to a node on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Var(usize);

#[derive(Debug)]
enum Op {
    Param(ParamId),
    Input,
    Gather { src: Var, rows: Vec<usize> },
    MatMul { a: Var, b: Var },
    AddBias { x: Var, bias: Var },
    Add { a: Var, b: Var },
    LeakyRelu { x: Var, slope: f64 },
    ConcatCols(Vec<Var>),
    ConcatRows(Vec<Var>),
    Softmax { x: Var },
    Transpose { x: Var },
}

struct Node<T> {
    rows: usize,
    cols: usize,
    // empty for parameter nodes
    value: Vec<T>,
    op: Op,
}

/// Per-parameter gradients produced by a backward pass.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients<T> {
    grads: Vec<Option<Vec<T>>>,
}

impl<T: Scalar> Gradients<T> {
    pub fn get(&self, id: ParamId) -> Option<&[T]> {
        self.grads.get(id.0).and_then(|g| g.as_deref())
    }

    pub fn get_mut(&mut self, id: ParamId) -> Option<&mut [T]> {
        self.grads.get_mut(id.0).and_then(|g| g.as_deref_mut())
    }

    /// Stores the gradients on the parameters; parameters untouched by the
    /// pass get zero gradients.
    pub fn apply_to(self, params: &mut ParamSet<T>) -> Result<()> {
        let mut grads = self.grads;
        grads.resize(params.len(), None);
        for (t, g) in params.tensors_mut().zip(grads) {
            let g = g.unwrap_or_else(|| vec![T::zero(); t.len()]);
            t.set_grad(g)?;
        }
        Ok(())
    }

    pub fn check_finite(&self) -> Result<()> {
        let ok = self.grads.iter().flatten().flat_map(|g| g.iter()).all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::NonFinite("backward"))
        }
    }
}

pub struct Tape<'p, T> {
    params: &'p ParamSet<T>,
    nodes: Vec<Node<T>>,
    param_vars: HashMap<ParamId, Var>,
}

impl<'p, T: Scalar> Tape<'p, T> {
    pub fn new(params: &'p ParamSet<T>) -> Self {
        Tape {
            params,
            nodes: Vec::new(),
            param_vars: HashMap::new(),
        }
    }

    fn push(&mut self, rows: usize, cols: usize, value: Vec<T>, op: Op) -> Var {
        debug_assert!(matches!(op, Op::Param(_)) || value.len() == rows * cols);
        self.nodes.push(Node { rows, cols, value, op });
        Var(self.nodes.len() - 1)
    }

    pub fn shape(&self, v: Var) -> [usize; 2] {
        let n = &self.nodes[v.0];
        [n.rows, n.cols]
    }

    /// Output values of a node.
    pub fn value(&self, v: Var) -> &[T] {
        match self.nodes[v.0].op {
            Op::Param(id) => self.params.get(id).data(),
            _ => &self.nodes[v.0].value,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Leaf for a learnable tensor. Repeated calls return the same node.
    pub fn param(&mut self, id: ParamId) -> Var {
        if let Some(&v) = self.param_vars.get(&id) {
            return v;
        }
        let [rows, cols] = self.params.get(id).shape();
        let v = self.push(rows, cols, Vec::new(), Op::Param(id));
        self.param_vars.insert(id, v);
        v
    }

    /// Constant leaf.
    pub fn input(&mut self, rows: usize, cols: usize, data: Vec<T>) -> Result<Var> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch {
                op: "input",
                left: [rows, cols],
                right: [data.len(), 1],
            });
        }
        Ok(self.push(rows, cols, data, Op::Input))
    }

    /// Rows of `table` selected by index (embedding lookup).
    pub fn embed_lookup(&mut self, table: Var, rows: &[usize]) -> Result<Var> {
        let [n, cols] = self.shape(table);
        if let Some(&bad) = rows.iter().find(|&&r| r >= n) {
            return Err(Error::ShapeMismatch {
                op: "embed_lookup",
                left: [n, cols],
                right: [bad, cols],
            });
        }
        let src = self.value(table);
        let mut out = Vec::with_capacity(rows.len() * cols);
        for &r in rows {
            out.extend_from_slice(&src[r * cols..(r + 1) * cols]);
        }
        Ok(self.push(
            rows.len(),
            cols,
            out,
            Op::Gather {
                src: table,
                rows: rows.to_vec(),
            },
        ))
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let [n, k] = self.shape(a);
        let [k2, m] = self.shape(b);
        if k != k2 {
            return Err(Error::ShapeMismatch {
                op: "matmul",
                left: [n, k],
                right: [k2, m],
            });
        }
        let mut out = vec![T::zero(); n * m];
        gemm_acc(n, k, m, self.value(a), self.value(b), &mut out);
        Ok(self.push(n, m, out, Op::MatMul { a, b }))
    }

    /// `x (n×k) · w (k×m) + bias (1×m)`.
    pub fn linear(&mut self, x: Var, w: Var, bias: Var) -> Result<Var> {
        let xw = self.matmul(x, w)?;
        self.add_bias(xw, bias)
    }

    pub fn add_bias(&mut self, x: Var, bias: Var) -> Result<Var> {
        let [n, m] = self.shape(x);
        let bshape = self.shape(bias);
        if bshape != [1, m] {
            return Err(Error::ShapeMismatch {
                op: "add_bias",
                left: [n, m],
                right: bshape,
            });
        }
        let b = self.value(bias);
        let out = self
            .value(x)
            .chunks_exact(m.max(1))
            .flat_map(|row| row.iter().zip(b).map(|(&v, &c)| v + c))
            .collect::<Vec<_>>();
        Ok(self.push(n, m, out, Op::AddBias { x, bias }))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let (sa, sb) = (self.shape(a), self.shape(b));
        if sa != sb {
            return Err(Error::ShapeMismatch {
                op: "add",
                left: sa,
                right: sb,
            });
        }
        let out = self.value(a).iter().zip(self.value(b)).map(|(&x, &y)| x + y).collect();
        Ok(self.push(sa[0], sa[1], out, Op::Add { a, b }))
    }

    pub fn leaky_relu(&mut self, x: Var, slope: f64) -> Var {
        let [n, m] = self.shape(x);
        let s = T::from_f64_lossy(slope);
        let out = self
            .value(x)
            .iter()
            .map(|&v| if v > T::zero() { v } else { v * s })
            .collect();
        self.push(n, m, out, Op::LeakyRelu { x, slope })
    }

    /// Softmax over all entries of `x` (a row or column vector).
    pub fn softmax(&mut self, x: Var) -> Var {
        let [n, m] = self.shape(x);
        let vals = self.value(x);
        let max = vals.iter().copied().fold(T::neg_infinity(), T::max);
        let exps: Vec<T> = vals.iter().map(|&v| (v - max).exp()).collect();
        let total: T = exps.iter().copied().sum();
        let out = exps.into_iter().map(|e| e / total).collect();
        self.push(n, m, out, Op::Softmax { x })
    }

    pub fn transpose(&mut self, x: Var) -> Var {
        let [n, m] = self.shape(x);
        let v = self.value(x);
        let mut out = vec![T::zero(); n * m];
        for i in 0..n {
            for j in 0..m {
                out[j * n + i] = v[i * m + j];
            }
        }
        self.push(m, n, out, Op::Transpose { x })
    }

    pub fn concat_cols(&mut self, parts: &[Var]) -> Result<Var> {
        let rows = self.shape(parts[0])[0];
        for &p in parts {
            if self.shape(p)[0] != rows {
                return Err(Error::ShapeMismatch {
                    op: "concat_cols",
                    left: self.shape(parts[0]),
                    right: self.shape(p),
                });
            }
        }
        let cols: usize = parts.iter().map(|&p| self.shape(p)[1]).sum();
        let mut out = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for &p in parts {
                let c = self.shape(p)[1];
                out.extend_from_slice(&self.value(p)[r * c..(r + 1) * c]);
            }
        }
        Ok(self.push(rows, cols, out, Op::ConcatCols(parts.to_vec())))
    }

    pub fn concat_rows(&mut self, parts: &[Var]) -> Result<Var> {
        let cols = self.shape(parts[0])[1];
        for &p in parts {
            if self.shape(p)[1] != cols {
                return Err(Error::ShapeMismatch {
                    op: "concat_rows",
                    left: self.shape(parts[0]),
                    right: self.shape(p),
                });
            }
        }
        let rows: usize = parts.iter().map(|&p| self.shape(p)[0]).sum();
        let mut out = Vec::with_capacity(rows * cols);
        for &p in parts {
            out.extend_from_slice(self.value(p));
        }
        Ok(self.push(rows, cols, out, Op::ConcatRows(parts.to_vec())))
    }

    /// Hash of the sign pattern of every LeakyReLU input on the tape.
    /// Two evaluations with equal patterns lie on the same linear piece.
    pub fn activation_pattern(&self) -> u64 {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        for node in &self.nodes {
            if let Op::LeakyRelu { x, .. } = node.op {
                for &v in self.value(x) {
                    (v > T::zero()).hash(&mut h);
                }
            }
        }
        h.finish()
    }

    /// Reverse pass from `out`, seeded with `dL/d out`.
    pub fn backward(&self, out: Var, seed: &[T]) -> Result<Gradients<T>> {
        let [r, c] = self.shape(out);
        if seed.len() != r * c {
            return Err(Error::ShapeMismatch {
                op: "backward",
                left: [r, c],
                right: [seed.len(), 1],
            });
        }
        let mut grads: Vec<Option<Vec<T>>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[out.0] = Some(seed.to_vec());
        let mut param_grads: Vec<Option<Vec<T>>> = vec![None; self.params.len()];

        fn acc<T: Scalar>(grads: &mut [Option<Vec<T>>], v: Var, len: usize) -> &mut Vec<T> {
            grads[v.0].get_or_insert_with(|| vec![T::zero(); len])
        }

        for idx in (0..=out.0).rev() {
            let Some(g) = grads[idx].take() else { continue };
            let node = &self.nodes[idx];
            match &node.op {
                Op::Input => {}
                Op::Param(id) => param_grads[id.0] = Some(g),
                Op::Gather { src, rows } => {
                    let [n, cols] = self.shape(*src);
                    let dst = acc(&mut grads, *src, n * cols);
                    for (i, &row) in rows.iter().enumerate() {
                        let d = &mut dst[row * cols..(row + 1) * cols];
                        for (x, &y) in d.iter_mut().zip(&g[i * cols..(i + 1) * cols]) {
                            *x = *x + y;
                        }
                    }
                }
                Op::MatMul { a, b } => {
                    let [n, k] = self.shape(*a);
                    let m = self.shape(*b)[1];
                    if needs_grad(&self.nodes, *a) {
                        let bv = self.value(*b);
                        let da = acc(&mut grads, *a, n * k);
                        gemm_bt_acc(n, k, m, &g, bv, da);
                    }
                    if needs_grad(&self.nodes, *b) {
                        let av = self.value(*a);
                        let db = acc(&mut grads, *b, k * m);
                        gemm_at_acc(n, k, m, av, &g, db);
                    }
                }
                Op::AddBias { x, bias } => {
                    let m = node.cols;
                    add_into(acc(&mut grads, *x, g.len()), &g);
                    let db = acc(&mut grads, *bias, m);
                    for row in g.chunks_exact(m.max(1)) {
                        add_into(db, row);
                    }
                }
                Op::Add { a, b } => {
                    add_into(acc(&mut grads, *a, g.len()), &g);
                    add_into(acc(&mut grads, *b, g.len()), &g);
                }
                Op::LeakyRelu { x, slope } => {
                    let s = T::from_f64_lossy(*slope);
                    let xv = self.value(*x);
                    let dx = acc(&mut grads, *x, g.len());
                    for ((d, &gi), &xi) in dx.iter_mut().zip(&g).zip(xv) {
                        *d = *d + if xi > T::zero() { gi } else { gi * s };
                    }
                }
                Op::ConcatCols(parts) => {
                    let rows = node.rows;
                    let total = node.cols;
                    let mut offset = 0;
                    for &p in parts {
                        let c = self.shape(p)[1];
                        let dp = acc(&mut grads, p, rows * c);
                        for r in 0..rows {
                            add_into(
                                &mut dp[r * c..(r + 1) * c],
                                &g[r * total + offset..r * total + offset + c],
                            );
                        }
                        offset += c;
                    }
                }
                Op::ConcatRows(parts) => {
                    let mut offset = 0;
                    for &p in parts {
                        let len = self.value(p).len();
                        add_into(acc(&mut grads, p, len), &g[offset..offset + len]);
                        offset += len;
                    }
                }
                Op::Softmax { x } => {
                    let y = &node.value;
                    let dot: T = g.iter().zip(y).map(|(&a, &b)| a * b).sum();
                    let dx = acc(&mut grads, *x, g.len());
                    for ((d, &gi), &yi) in dx.iter_mut().zip(&g).zip(y) {
                        *d = *d + yi * (gi - dot);
                    }
                }
                Op::Transpose { x } => {
                    let [n, m] = self.shape(*x);
                    let dx = acc(&mut grads, *x, n * m);
                    for i in 0..n {
                        for j in 0..m {
                            dx[i * m + j] = dx[i * m + j] + g[j * n + i];
                        }
                    }
                }
            }
        }
        Ok(Gradients { grads: param_grads })
    }
}

fn needs_grad<T>(nodes: &[Node<T>], v: Var) -> bool {
    !matches!(nodes[v.0].op, Op::Input)
}

fn add_into<T: Scalar>(dst: &mut [T], src: &[T]) {
    for (d, &s) in dst.iter_mut().zip(src) {
        *d = *d + s;
    }
}

/// `out (n×m) += a (n×k) · b (k×m)`
fn gemm_acc<T: Scalar>(n: usize, k: usize, m: usize, a: &[T], b: &[T], out: &mut [T]) {
    for i in 0..n {
        let row = &mut out[i * m..(i + 1) * m];
        for p in 0..k {
            let aip = a[i * k + p];
            if aip == T::zero() {
                continue;
            }
            for (o, &bv) in row.iter_mut().zip(&b[p * m..(p + 1) * m]) {
                *o = *o + aip * bv;
            }
        }
    }
}

/// `da (n×k) += g (n×m) · bᵀ` for `b (k×m)`
fn gemm_bt_acc<T: Scalar>(n: usize, k: usize, m: usize, g: &[T], b: &[T], da: &mut [T]) {
    for i in 0..n {
        let gi = &g[i * m..(i + 1) * m];
        for p in 0..k {
            let bp = &b[p * m..(p + 1) * m];
            let dot: T = gi.iter().zip(bp).fold(T::zero(), |s, (&x, &y)| s + x * y);
            da[i * k + p] = da[i * k + p] + dot;
        }
    }
}

/// `db (k×m) += aᵀ · g` for `a (n×k)`, `g (n×m)`
fn gemm_at_acc<T: Scalar>(n: usize, k: usize, m: usize, a: &[T], g: &[T], db: &mut [T]) {
    for i in 0..n {
        let gi = &g[i * m..(i + 1) * m];
        for p in 0..k {
            let aip = a[i * k + p];
            if aip == T::zero() {
                continue;
            }
            for (d, &gv) in db[p * m..(p + 1) * m].iter_mut().zip(gi) {
                *d = *d + aip * gv;
            }
        }
    }
}
