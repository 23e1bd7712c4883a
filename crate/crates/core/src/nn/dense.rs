use rand::Rng;

use super::{Network, ParamMut};

/// Fully connected layer, y = W x + b.
#[derive(Clone, Debug)]
pub struct Dense {
    pub in_dim: usize,
    pub out_dim: usize,
    w: Vec<f64>,
    b: Vec<f64>,
    gw: Vec<f64>,
    gb: Vec<f64>,
}

impl Dense {
    /// Initialize with N(0, gain/in_dim) weights and zero bias.
    pub fn new(in_dim: usize, out_dim: usize, gain: f64, rng: &mut impl Rng) -> Self {
        let std = (gain / in_dim.max(1) as f64).sqrt();
        let w = (0..in_dim * out_dim).map(|_| crate::rng::normal(rng) * std).collect();
        Dense {
            in_dim,
            out_dim,
            w,
            b: vec![0.0; out_dim],
            gw: vec![0.0; in_dim * out_dim],
            gb: vec![0.0; out_dim],
        }
    }

    /// All-zero layer; useful where the initial output must be exactly zero.
    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Dense {
            in_dim,
            out_dim,
            w: vec![0.0; in_dim * out_dim],
            b: vec![0.0; out_dim],
            gw: vec![0.0; in_dim * out_dim],
            gb: vec![0.0; out_dim],
        }
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.in_dim);
        let mut y = self.b.clone();
        for (o, yo) in y.iter_mut().enumerate() {
            let row = &self.w[o * self.in_dim..(o + 1) * self.in_dim];
            let mut acc = 0.0;
            for (wi, xi) in row.iter().zip(x) {
                acc += wi * xi;
            }
            *yo += acc;
        }
        y
    }

    /// Accumulates weight/bias gradients and returns dL/dx.
    pub fn backward(&mut self, x: &[f64], dy: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.in_dim);
        debug_assert_eq!(dy.len(), self.out_dim);
        let mut dx = vec![0.0; self.in_dim];
        for (o, &g) in dy.iter().enumerate() {
            self.gb[o] += g;
            let row = &self.w[o * self.in_dim..(o + 1) * self.in_dim];
            let grow = &mut self.gw[o * self.in_dim..(o + 1) * self.in_dim];
            for i in 0..self.in_dim {
                grow[i] += g * x[i];
                dx[i] += g * row[i];
            }
        }
        dx
    }
}

impl Network for Dense {
    fn visit(&mut self, prefix: &str, f: &mut dyn FnMut(ParamMut<'_>)) {
        f(ParamMut {
            name: format!("{prefix}w"),
            shape: vec![self.out_dim, self.in_dim],
            data: &mut self.w,
            grad: &mut self.gw,
        });
        f(ParamMut {
            name: format!("{prefix}b"),
            shape: vec![self.out_dim],
            data: &mut self.b,
            grad: &mut self.gb,
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::grad_check;
    use crate::rng::stream;

    #[test]
    fn forward_matches_manual() {
        let mut d = Dense::zeros(2, 2);
        d.visit("", &mut |p| {
            if p.name == "w" {
                p.data.copy_from_slice(&[1.0, 2.0, 3.0, 4.0]);
            } else {
                p.data.copy_from_slice(&[0.5, -0.5]);
            }
        });
        let y = d.forward(&[1.0, 1.0]);
        assert_eq!(y, vec![3.5, 6.5]);
    }

    #[test]
    fn backward_matches_finite_difference() {
        let mut rng = stream(3, "dense-test");
        let mut d = Dense::new(3, 2, 1.0, &mut rng);
        let x = [0.3, -0.7, 1.1];
        // loss = sum(y^2)
        let y = d.forward(&x);
        let dy: Vec<f64> = y.iter().map(|v| 2.0 * v).collect();
        d.zero_grads();
        d.backward(&x, &dy);
        let report = grad_check(
            &mut d,
            |n| n.forward(&x).iter().map(|v| v * v).sum::<f64>(),
            1e-6,
        );
        assert!(report.max_rel_err < 1e-7, "{report:?}");
    }
}
