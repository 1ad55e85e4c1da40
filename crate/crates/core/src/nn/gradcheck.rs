//! Finite-difference verification of analytic gradients.

use rand::seq::index::sample;

use super::tape::Gradients;
use super::tensor::{ParamId, ParamSet};
use crate::error::{Error, Result};
use crate::rng::seeded;
use crate::scalar::Scalar;

/// One evaluation of a scalar model.
pub struct Probe<T> {
    pub value: f64,
    /// Identifies the piecewise-linear region the evaluation landed in; see
    /// [`super::Tape::activation_pattern`].
    pub pattern: u64,
    pub gradients: Option<Gradients<T>>,
}

#[derive(Clone, Debug)]
pub struct GradCheckOptions {
    pub step: f64,
    pub tolerance: f64,
    /// Coordinates checked per parameter tensor; `None` checks all.
    pub per_tensor: Option<usize>,
    pub seed: u64,
}

impl Default for GradCheckOptions {
    fn default() -> Self {
        GradCheckOptions {
            step: 1e-5,
            tolerance: 1e-4,
            per_tensor: Some(16),
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradCheckReport {
    pub max_relative_error: f64,
    /// Parameter name and flat index of the largest error.
    pub worst: Option<(String, usize)>,
    pub checked: usize,
    /// Coordinates where every step size straddled an activation kink.
    pub skipped: usize,
}

/// `|a - n| / max(|a|, |n|, 1e-6)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6)
}

/// Compares `model`'s analytic gradients against central differences.
///
/// `model(params, want_gradients)` must be deterministic. When a stencil
/// point changes the activation pattern the step is shrunk tenfold, up to
/// three times, before the coordinate is skipped.
pub fn grad_check<T, F>(model: F, params: &ParamSet<T>, opts: &GradCheckOptions) -> Result<GradCheckReport>
where
    T: Scalar,
    F: Fn(&ParamSet<T>, bool) -> Result<Probe<T>>,
{
    let base = model(params, true)?;
    let grads = base
        .gradients
        .ok_or_else(|| Error::InvalidParameter("model returned no gradients".into()))?;
    let mut rng = seeded(opts.seed);
    let mut report = GradCheckReport {
        max_relative_error: 0.0,
        worst: None,
        checked: 0,
        skipped: 0,
    };
    let mut worst_detail = (0.0, 0.0);
    let mut scratch = params.clone();
    for (id, name, tensor) in params.iter() {
        let n = tensor.len();
        let coords: Vec<usize> = match opts.per_tensor {
            Some(k) if k < n => sample(&mut rng, n, k).into_vec(),
            _ => (0..n).collect(),
        };
        for i in coords {
            let analytic = grads.get(id).map_or(0.0, |g| g[i].as_f64());
            let Some(numeric) = central_difference(&model, &mut scratch, id, i, base.pattern, opts.step)? else {
                report.skipped += 1;
                continue;
            };
            report.checked += 1;
            let rel = relative_error(analytic, numeric);
            if rel > report.max_relative_error || report.worst.is_none() {
                report.max_relative_error = rel;
                report.worst = Some((name.to_string(), i));
                worst_detail = (analytic, numeric);
            }
        }
    }
    if report.max_relative_error > opts.tolerance {
        let (param, index) = report.worst.clone().expect("set with error");
        return Err(Error::GradientMismatch {
            param,
            index,
            analytic: worst_detail.0,
            numeric: worst_detail.1,
            relative: report.max_relative_error,
        });
    }
    Ok(report)
}

fn central_difference<T, F>(
    model: &F,
    scratch: &mut ParamSet<T>,
    id: ParamId,
    i: usize,
    pattern: u64,
    step: f64,
) -> Result<Option<f64>>
where
    T: Scalar,
    F: Fn(&ParamSet<T>, bool) -> Result<Probe<T>>,
{
    let original = scratch.get(id).data()[i];
    let mut h = step;
    let mut result = None;
    for _ in 0..4 {
        scratch.get_mut(id).data_mut()[i] = T::from_f64_lossy(original.as_f64() + h);
        let plus = model(scratch, false)?;
        scratch.get_mut(id).data_mut()[i] = T::from_f64_lossy(original.as_f64() - h);
        let minus = model(scratch, false)?;
        if plus.pattern == pattern && minus.pattern == pattern {
            result = Some((plus.value - minus.value) / (2.0 * h));
            break;
        }
        h /= 10.0;
    }
    scratch.get_mut(id).data_mut()[i] = original;
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{Tape, Tensor};

    fn affine_params() -> ParamSet<f64> {
        let mut rng = seeded(9);
        let mut p = ParamSet::new();
        p.add("w", Tensor::uniform(3, 2, 1.0, &mut rng));
        p.add("b", Tensor::uniform(1, 2, 1.0, &mut rng));
        p
    }

    fn affine(p: &ParamSet<f64>, _: bool, corrupt: bool) -> Result<Probe<f64>> {
        let mut tape = Tape::new(p);
        let x = tape.input(2, 3, vec![0.5, -1.0, 2.0, 1.5, 0.25, -0.75])?;
        let (w, b) = (tape.param(ParamId(0)), tape.param(ParamId(1)));
        let y = tape.linear(x, w, b)?;
        let seed = [1.0, -2.0, 0.5, 3.0];
        let value = tape.value(y).iter().zip(&seed).map(|(a, b)| a * b).sum();
        let mut grads = tape.backward(y, &seed)?;
        if corrupt {
            grads.get_mut(ParamId(0)).unwrap()[0] += 0.5;
        }
        Ok(Probe {
            value,
            pattern: tape.activation_pattern(),
            gradients: Some(grads),
        })
    }

    #[test]
    fn affine_model_is_exact() {
        let p = affine_params();
        let opts = GradCheckOptions {
            per_tensor: None,
            ..Default::default()
        };
        let report = grad_check(|p, g| affine(p, g, false), &p, &opts).unwrap();
        assert!(report.max_relative_error < 1e-9, "{report:?}");
        assert_eq!(report.checked, 8);
    }

    #[test]
    fn corrupted_gradient_fails_and_names_parameter() {
        let p = affine_params();
        let opts = GradCheckOptions {
            per_tensor: None,
            ..Default::default()
        };
        let err = grad_check(|p, g| affine(p, g, true), &p, &opts).unwrap_err();
        match err {
            Error::GradientMismatch { param, index, .. } => {
                assert_eq!(param, "w");
                assert_eq!(index, 0);
            }
            other => panic!("unexpected {other}"),
        }
    }
}
