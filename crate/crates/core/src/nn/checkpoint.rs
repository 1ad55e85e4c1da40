//! Text dump of named tensors that round-trips bit-exactly.
//!
//! ```text
//! edgeprune-checkpoint 1
//! scalar f32
//! meta {"steps":10}
//! tensor policy/gat.weight 64 64
//! 3c23d70a bd4ccccd ...
//! end
//! ```
//! Values are the IEEE-754 bit patterns in hex.

use std::fmt::Write as _;
use std::path::Path;

use super::tensor::{ParamSet, Tensor};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const MAGIC: &str = "edgeprune-checkpoint";
const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint<T> {
    pub meta: serde_json::Value,
    pub tensors: Vec<(String, Tensor<T>)>,
}

impl<T: Scalar> Checkpoint<T> {
    pub fn new(meta: serde_json::Value) -> Self {
        Checkpoint {
            meta,
            tensors: Vec::new(),
        }
    }

    pub fn push(&mut self, name: impl Into<String>, tensor: Tensor<T>) {
        self.tensors.push((name.into(), tensor));
    }

    pub fn push_params(&mut self, prefix: &str, params: &ParamSet<T>) {
        for (_, name, t) in params.iter() {
            let mut t = t.clone();
            t.take_grad();
            self.push(format!("{prefix}/{name}"), t);
        }
    }

    pub fn tensor(&self, name: &str) -> Result<&Tensor<T>> {
        self.tensors
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, t)| t)
            .ok_or_else(|| Error::Checkpoint(format!("missing tensor {name}")))
    }

    /// Overwrites every tensor of `params` with `prefix/<name>`; shapes must match.
    pub fn load_params(&self, prefix: &str, params: &mut ParamSet<T>) -> Result<()> {
        let names: Vec<String> = params.iter().map(|(_, n, _)| n.to_string()).collect();
        for (t, name) in params.tensors_mut().zip(names) {
            let src = self.tensor(&format!("{prefix}/{name}"))?;
            if src.shape() != t.shape() {
                return Err(Error::ShapeMismatch {
                    op: "checkpoint",
                    left: t.shape(),
                    right: src.shape(),
                });
            }
            t.data_mut().copy_from_slice(src.data());
            t.take_grad();
        }
        Ok(())
    }

    /// Tensors whose names start with `prefix/`, in file order.
    pub fn with_prefix<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = (&'a str, &'a Tensor<T>)> + 'a {
        self.tensors.iter().filter_map(move |(n, t)| {
            n.strip_prefix(prefix)
                .and_then(|rest| rest.strip_prefix('/'))
                .map(|rest| (rest, t))
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{MAGIC} {VERSION}\nscalar {}\nmeta {}\n", T::NAME, self.meta);
        for (name, t) in &self.tensors {
            let _ = writeln!(out, "tensor {name} {} {}", t.rows(), t.cols());
            let words: Vec<String> = t.data().iter().map(|v| format!("{:x}", v.to_bits_u64())).collect();
            out.push_str(&words.join(" "));
            out.push('\n');
        }
        out.push_str("end\n");
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let bad = |m: String| Error::Checkpoint(m);
        let mut lines = text.lines();
        let header = lines.next().unwrap_or_default();
        match header.split_once(' ') {
            Some((MAGIC, v)) if v.parse() == Ok(VERSION) => {}
            Some((MAGIC, v)) => return Err(bad(format!("unsupported version {v}"))),
            _ => return Err(bad("not a checkpoint file".into())),
        }
        let scalar = lines.next().and_then(|l| l.strip_prefix("scalar ")).unwrap_or_default();
        if scalar != T::NAME {
            return Err(bad(format!("stored as {scalar:?}, loading as {}", T::NAME)));
        }
        let meta = lines
            .next()
            .and_then(|l| l.strip_prefix("meta "))
            .ok_or_else(|| bad("missing meta line".into()))?;
        let meta = serde_json::from_str(meta).map_err(|e| bad(format!("meta: {e}")))?;
        let mut ckpt = Checkpoint::new(meta);
        loop {
            let line = lines.next().ok_or_else(|| bad("truncated file".into()))?;
            if line == "end" {
                break;
            }
            let fields: Vec<&str> = line.split(' ').collect();
            let ["tensor", name, rows, cols] = fields[..] else {
                return Err(bad(format!("unexpected line {line:?}")));
            };
            let dim = |s: &str| s.parse::<usize>().map_err(|_| bad(format!("bad shape in {line:?}")));
            let (rows, cols) = (dim(rows)?, dim(cols)?);
            let body = lines.next().ok_or_else(|| bad(format!("tensor {name} has no data")))?;
            let data = body
                .split_ascii_whitespace()
                .map(|w| u64::from_str_radix(w, 16).map(T::from_bits_u64))
                .collect::<std::result::Result<Vec<T>, _>>()
                .map_err(|e| bad(format!("tensor {name}: {e}")))?;
            let t = Tensor::new(rows, cols, data).map_err(|_| bad(format!("tensor {name}: wrong length")))?;
            ckpt.push(name, t);
        }
        Ok(ckpt)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }
}
