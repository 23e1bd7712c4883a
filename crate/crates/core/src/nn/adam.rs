use std::collections::BTreeMap;

use super::Network;

/// Adam optimizer with bias correction. State is keyed by parameter name so
/// it survives across calls as long as the network's visit order is stable.
#[derive(Clone, Debug)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    t: u64,
    state: BTreeMap<String, (Vec<f64>, Vec<f64>)>,
}

impl Adam {
    pub fn new(lr: f64) -> Self {
        Adam { lr, beta1: 0.9, beta2: 0.999, eps: 1e-8, t: 0, state: BTreeMap::new() }
    }

    /// Apply one update from the gradients currently stored in `net`.
    pub fn step(&mut self, net: &mut dyn Network) {
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        let (lr, b1, b2, eps) = (self.lr, self.beta1, self.beta2, self.eps);
        let state = &mut self.state;
        net.visit("", &mut |p| {
            let (m, v) = state
                .entry(p.name.clone())
                .or_insert_with(|| (vec![0.0; p.data.len()], vec![0.0; p.data.len()]));
            for i in 0..p.data.len() {
                let g = p.grad[i];
                m[i] = b1 * m[i] + (1.0 - b1) * g;
                v[i] = b2 * v[i] + (1.0 - b2) * g * g;
                let mhat = m[i] / bc1;
                let vhat = v[i] / bc2;
                p.data[i] -= lr * mhat / (vhat.sqrt() + eps);
            }
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Dense;
    use crate::rng::stream;

    #[test]
    fn adam_descends_a_quadratic() {
        let mut rng = stream(11, "adam");
        let mut d = Dense::new(1, 1, 1.0, &mut rng);
        let mut opt = Adam::new(0.05);
        // minimize (y(1) - 3)^2
        let mut last = f64::INFINITY;
        for _ in 0..400 {
            let y = d.forward(&[1.0])[0];
            let loss = (y - 3.0).powi(2);
            d.zero_grads();
            d.backward(&[1.0], &[2.0 * (y - 3.0)]);
            opt.step(&mut d);
            last = loss;
        }
        assert!(last < 1e-6, "loss stayed at {last}");
    }
}
