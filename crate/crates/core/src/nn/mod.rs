//! Minimal dense/convolutional layer kit with hand-written backprop.
//!
//! All math is f64 and all accumulation is serial, so forward passes,
//! gradients, and therefore whole training runs are bit-reproducible for a
//! fixed seed. Layers cache nothing; callers keep the activations they need
//! for the backward pass.

mod adam;
mod conv;
mod dense;

pub use adam::Adam;
pub use conv::{Conv2d, Upsample2x};
pub use dense::Dense;

use serde::{Deserialize, Serialize};

/// Pointwise nonlinearity applied between layers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Identity,
    Relu,
    Tanh,
    Silu,
}

impl Activation {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            Activation::Identity => x,
            Activation::Relu => x.max(0.0),
            Activation::Tanh => x.tanh(),
            Activation::Silu => x * sigmoid(x),
        }
    }

    /// Derivative at pre-activation `x`.
    pub fn grad(self, x: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => {
                let t = x.tanh();
                1.0 - t * t
            }
            Activation::Silu => {
                let s = sigmoid(x);
                s * (1.0 + x * (1.0 - s))
            }
        }
    }

    pub fn forward(self, x: &[f64]) -> Vec<f64> {
        x.iter().map(|&v| self.eval(v)).collect()
    }

    /// dL/dx from dL/dy given the cached pre-activations.
    pub fn backward(self, pre: &[f64], dy: &[f64]) -> Vec<f64> {
        pre.iter().zip(dy).map(|(&x, &g)| g * self.grad(x)).collect()
    }
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub fn sigmoid_vec(x: &[f64]) -> Vec<f64> {
    x.iter().map(|&v| sigmoid(v)).collect()
}

/// dL/dx for y = sigmoid(x), given y and dL/dy.
pub fn sigmoid_backward(y: &[f64], dy: &[f64]) -> Vec<f64> {
    y.iter().zip(dy).map(|(&s, &g)| g * s * (1.0 - s)).collect()
}

pub fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = logits.iter().map(|&v| (v - m).exp()).sum::<f64>().ln() + m;
    logits.iter().map(|&v| v - lse).collect()
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    log_softmax(logits).iter().map(|&v| v.exp()).collect()
}

/// A named, mutable view of one parameter tensor and its gradient buffer.
pub struct ParamMut<'a> {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: &'a mut Vec<f64>,
    pub grad: &'a mut Vec<f64>,
}

/// Anything that owns trainable parameters.
pub trait Network {
    /// Visit every parameter tensor, depth-first, with `prefix` prepended to
    /// each name. Visit order must be deterministic; optimizers and
    /// checkpoints key off the names.
    fn visit(&mut self, prefix: &str, f: &mut dyn FnMut(ParamMut<'_>));

    fn zero_grads(&mut self) {
        self.visit("", &mut |p| p.grad.iter_mut().for_each(|g| *g = 0.0));
    }

    fn param_count(&mut self) -> usize {
        let mut n = 0;
        self.visit("", &mut |p| n += p.data.len());
        n
    }

    /// Clone out all parameters as (name, shape, data) triples.
    fn export_params(&mut self) -> Vec<(String, Vec<usize>, Vec<f64>)> {
        let mut out = Vec::new();
        self.visit("", &mut |p| out.push((p.name.clone(), p.shape.clone(), p.data.clone())));
        out
    }

    /// Load parameters exported by [`Network::export_params`]. Name set and
    /// lengths must match exactly.
    fn import_params(&mut self, params: &[(String, Vec<usize>, Vec<f64>)]) -> crate::Result<()> {
        use std::collections::BTreeMap;
        let map: BTreeMap<&str, &(String, Vec<usize>, Vec<f64>)> =
            params.iter().map(|p| (p.0.as_str(), p)).collect();
        let mut missing = Vec::new();
        let mut seen = 0usize;
        let mut err = None;
        self.visit("", &mut |p| {
            if let Some((_, _, data)) = map.get(p.name.as_str()) {
                seen += 1;
                if data.len() != p.data.len() {
                    err = Some(crate::Error::ShapeMismatch(format!(
                        "parameter {}: expected {} values, found {}",
                        p.name,
                        p.data.len(),
                        data.len()
                    )));
                } else {
                    p.data.copy_from_slice(data);
                }
            } else {
                missing.push(p.name.clone());
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        if !missing.is_empty() {
            return Err(crate::Error::Checkpoint(format!("missing parameters: {missing:?}")));
        }
        if seen != params.len() {
            return Err(crate::Error::Checkpoint(format!(
                "checkpoint has {} parameters, model expects {seen}",
                params.len()
            )));
        }
        Ok(())
    }
}

/// Report from [`grad_check`].
#[derive(Debug)]
pub struct GradCheck {
    pub max_rel_err: f64,
    pub worst: String,
    pub checked: usize,
}

/// Compare analytic gradients against central finite differences.
///
/// The caller must have already run a backward pass so `grad` buffers hold
/// the analytic gradients of the same loss that `loss` evaluates. Intended
/// for micro-nets; cost is O(params * forward).
pub fn grad_check<N: Network>(net: &mut N, mut loss: impl FnMut(&mut N) -> f64, eps: f64) -> GradCheck {
    let mut entries: Vec<(String, usize, f64)> = Vec::new();
    net.visit("", &mut |p| {
        for (i, g) in p.grad.iter().enumerate() {
            entries.push((p.name.clone(), i, *g));
        }
    });
    let mut report = GradCheck { max_rel_err: 0.0, worst: String::new(), checked: entries.len() };
    for (name, idx, analytic) in entries {
        let nudge = |net: &mut N, delta: f64| {
            net.visit("", &mut |p| {
                if p.name == name {
                    p.data[idx] += delta;
                }
            });
        };
        nudge(net, eps);
        let plus = loss(net);
        nudge(net, -2.0 * eps);
        let minus = loss(net);
        nudge(net, eps);
        let fd = (plus - minus) / (2.0 * eps);
        let rel = (analytic - fd).abs() / (analytic.abs() + fd.abs()).max(1e-8);
        if rel > report.max_rel_err {
            report.max_rel_err = rel;
            report.worst = format!("{name}[{idx}] analytic={analytic:.3e} fd={fd:.3e}");
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softmax_sums_to_one() {
        let p = softmax(&[0.3, -1.2, 2.0, 0.0]);
        let s: f64 = p.iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn silu_grad_matches_fd() {
        for &x in &[-2.0, -0.5, 0.0, 0.7, 3.0] {
            let e = 1e-6;
            let fd = (Activation::Silu.eval(x + e) - Activation::Silu.eval(x - e)) / (2.0 * e);
            assert!((Activation::Silu.grad(x) - fd).abs() < 1e-8);
        }
    }
}
