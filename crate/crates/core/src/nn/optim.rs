use super::tensor::{ParamSet, Tensor};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub trait Optimizer<T: Scalar> {
    /// Applies one update from the gradients stored on `params`, then clears
    /// them. Fails without touching anything if a gradient is missing.
    fn step(&mut self, params: &mut ParamSet<T>) -> Result<()>;

    fn steps(&self) -> u64;
}

fn check_grads<T: Scalar>(params: &ParamSet<T>) -> Result<()> {
    for (_, name, t) in params.iter() {
        match t.grad() {
            None => return Err(Error::MissingGradient(name.to_string())),
            Some(g) if g.iter().any(|v| !v.is_finite()) => return Err(Error::NonFinite("gradient")),
            Some(_) => {}
        }
    }
    Ok(())
}

/// Plain gradient descent.
#[derive(Clone, Debug)]
pub struct Sgd {
    pub lr: f64,
    steps: u64,
}

impl Sgd {
    pub fn new(lr: f64) -> Self {
        Sgd { lr, steps: 0 }
    }
}

impl<T: Scalar> Optimizer<T> for Sgd {
    fn step(&mut self, params: &mut ParamSet<T>) -> Result<()> {
        check_grads(params)?;
        let lr = T::from_f64_lossy(self.lr);
        for t in params.tensors_mut() {
            let g = t.take_grad().expect("checked");
            for (w, d) in t.data_mut().iter_mut().zip(g) {
                *w = *w - lr * d;
            }
        }
        self.steps += 1;
        Ok(())
    }

    fn steps(&self) -> u64 {
        self.steps
    }
}

/// Adaptive moment estimation with bias correction.
#[derive(Clone, Debug, PartialEq)]
pub struct Adam<T> {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    steps: u64,
    first: Vec<Tensor<T>>,
    second: Vec<Tensor<T>>,
}

impl<T: Scalar> Adam<T> {
    pub fn new(lr: f64) -> Self {
        Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            steps: 0,
            first: Vec::new(),
            second: Vec::new(),
        }
    }

    /// Moment tensors, empty until the first step.
    pub fn moments(&self) -> (&[Tensor<T>], &[Tensor<T>]) {
        (&self.first, &self.second)
    }

    pub fn restore(&mut self, steps: u64, first: Vec<Tensor<T>>, second: Vec<Tensor<T>>) -> Result<()> {
        if first.len() != second.len() {
            return Err(Error::LengthMismatch(first.len(), second.len()));
        }
        for (a, b) in first.iter().zip(&second) {
            if a.shape() != b.shape() {
                return Err(Error::ShapeMismatch {
                    op: "adam restore",
                    left: a.shape(),
                    right: b.shape(),
                });
            }
        }
        self.steps = steps;
        self.first = first;
        self.second = second;
        Ok(())
    }
}

impl<T: Scalar> Optimizer<T> for Adam<T> {
    fn step(&mut self, params: &mut ParamSet<T>) -> Result<()> {
        check_grads(params)?;
        if self.first.is_empty() {
            self.first = params.iter().map(|(_, _, t)| Tensor::zeros(t.rows(), t.cols())).collect();
            self.second = self.first.clone();
        }
        if self.first.len() != params.len() {
            return Err(Error::LengthMismatch(self.first.len(), params.len()));
        }
        self.steps += 1;
        let t = self.steps as i32;
        let b1 = T::from_f64_lossy(self.beta1);
        let b2 = T::from_f64_lossy(self.beta2);
        let one = T::one();
        let step = T::from_f64_lossy(self.lr * (1.0 - self.beta2.powi(t)).sqrt() / (1.0 - self.beta1.powi(t)));
        let eps = T::from_f64_lossy(self.eps);
        for ((p, m), v) in params.tensors_mut().zip(&mut self.first).zip(&mut self.second) {
            let g = p.take_grad().expect("checked");
            for (((w, m), v), g) in p
                .data_mut()
                .iter_mut()
                .zip(m.data_mut())
                .zip(v.data_mut())
                .zip(g)
            {
                *m = b1 * *m + (one - b1) * g;
                *v = b2 * *v + (one - b2) * g * g;
                *w = *w - step * *m / (v.sqrt() + eps);
            }
        }
        Ok(())
    }

    fn steps(&self) -> u64 {
        self.steps
    }
}
