//! Linear-Gaussian multimodal family with a closed-form posterior.
//!
//! Observations are x_i = A_i z + s_i eps with z ~ N(0, I). Conjugacy gives
//! the exact joint posterior p(z|X) = N(mu*, Sigma*) with
//! Sigma*^{-1} = I + sum_i A_i^T A_i / s_i^2 and
//! mu* = Sigma* sum_i A_i^T x_i / s_i^2, which downstream modules use as an
//! inference oracle.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::{Dataset, DatasetSpec, LinearGaussianSpec, MatrixSpec, ModalityShape, MultimodalSample};
use crate::rng::{indexed_stream, normal_vec};
use crate::{Error, Result};

/// Exact Gaussian posterior for a [`LinearGaussianSpec`] model.
#[derive(Clone, Debug)]
pub struct AnalyticPosterior {
    matrices: Vec<DMatrix<f64>>,
    noise_scales: Vec<f64>,
    precision: DMatrix<f64>,
    covariance: DMatrix<f64>,
}

impl AnalyticPosterior {
    pub fn new(spec: &LinearGaussianSpec) -> Result<Self> {
        let d = spec.latent_dim;
        let matrices: Vec<DMatrix<f64>> = spec
            .observation_matrices
            .iter()
            .map(|m| DMatrix::from_row_slice(m.rows, m.cols, &m.data))
            .collect();
        let mut precision = DMatrix::identity(d, d);
        for (a, &s) in matrices.iter().zip(&spec.noise_scales) {
            precision += a.transpose() * a / (s * s);
        }
        let covariance = precision
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidSpec("posterior precision not invertible".into()))?;
        Ok(AnalyticPosterior { matrices, noise_scales: spec.noise_scales.clone(), precision, covariance })
    }

    pub fn latent_dim(&self) -> usize {
        self.covariance.nrows()
    }

    /// Posterior covariance; independent of the observation.
    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn precision(&self) -> &DMatrix<f64> {
        &self.precision
    }

    /// Posterior mean given all modality observations.
    pub fn mean(&self, modalities: &[Vec<f64>]) -> DVector<f64> {
        let d = self.latent_dim();
        let mut info = DVector::zeros(d);
        for ((a, &s), x) in self.matrices.iter().zip(&self.noise_scales).zip(modalities) {
            info += a.transpose() * DVector::from_column_slice(x) / (s * s);
        }
        &self.covariance * info
    }

    /// Log marginal likelihood log p(X) of the stacked observation under the
    /// model; the modalities are jointly Gaussian through the shared latent.
    pub fn log_marginal(&self, modalities: &[Vec<f64>]) -> f64 {
        let total: usize = self.matrices.iter().map(|a| a.nrows()).sum();
        let mut stacked_a = DMatrix::zeros(total, self.latent_dim());
        let mut x = DVector::zeros(total);
        let mut noise = DVector::zeros(total);
        let mut row = 0;
        for ((a, &s), xi) in self.matrices.iter().zip(&self.noise_scales).zip(modalities) {
            for r in 0..a.nrows() {
                for c in 0..a.ncols() {
                    stacked_a[(row + r, c)] = a[(r, c)];
                }
                x[row + r] = xi[r];
                noise[row + r] = s * s;
            }
            row += a.nrows();
        }
        let mut cov = &stacked_a * stacked_a.transpose();
        for i in 0..total {
            cov[(i, i)] += noise[i];
        }
        let chol = cov.cholesky().expect("observation covariance is PD");
        let logdet = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
        let alpha = chol.solve(&x);
        -0.5 * (total as f64 * (2.0 * std::f64::consts::PI).ln() + logdet + x.dot(&alpha))
    }
}

impl LinearGaussianSpec {
    pub fn validate(&self) -> Result<()> {
        if self.latent_dim == 0 || self.n_samples == 0 {
            return Err(Error::InvalidSpec("latent_dim and n_samples must be positive".into()));
        }
        if self.observation_matrices.is_empty()
            || self.observation_matrices.len() != self.noise_scales.len()
        {
            return Err(Error::InvalidSpec(
                "need one observation matrix and one noise scale per modality".into(),
            ));
        }
        for (i, m) in self.observation_matrices.iter().enumerate() {
            if m.data.len() != m.rows * m.cols || m.cols != self.latent_dim {
                return Err(Error::InvalidSpec(format!("observation matrix {i} has bad dimensions")));
            }
            let a = DMatrix::from_row_slice(m.rows, m.cols, &m.data);
            let rank = a.svd(false, false).rank(1e-10);
            if rank < self.latent_dim {
                return Err(Error::InvalidSpec(format!(
                    "observation matrix {i} is rank-deficient ({rank} < {})",
                    self.latent_dim
                )));
            }
        }
        if self.noise_scales.iter().any(|&s| s <= 0.0) {
            return Err(Error::InvalidSpec("noise scales must be positive".into()));
        }
        Ok(())
    }

    /// Random spec whose observation matrices have orthonormal columns, so
    /// the exact posterior stays близко to diagonal.
    pub fn random_orthogonal(
        latent_dim: usize,
        obs_dims: &[usize],
        noise_scales: &[f64],
        n_samples: usize,
        seed: u64,
    ) -> Self {
        let mut rng = indexed_stream(seed, "lg-spec", 0);
        let observation_matrices = obs_dims
            .iter()
            .map(|&rows| {
                let raw = DMatrix::from_fn(rows, latent_dim, |_, _| crate::rng::normal(&mut rng));
                let qr = raw.qr();
                let q = qr.q();
                let mut data = Vec::with_capacity(rows * latent_dim);
                for r in 0..rows {
                    for c in 0..latent_dim {
                        data.push(q[(r, c)]);
                    }
                }
                MatrixSpec { rows, cols: latent_dim, data }
            })
            .collect();
        LinearGaussianSpec {
            latent_dim,
            observation_matrices,
            noise_scales: noise_scales.to_vec(),
            n_samples,
            seed,
        }
    }
}

/// Generate samples x_i = A_i z + s_i eps together with the exact posterior.
pub fn make_linear_gaussian_dataset(
    spec: &LinearGaussianSpec,
) -> Result<(Dataset, AnalyticPosterior)> {
    spec.validate()?;
    let posterior = AnalyticPosterior::new(spec)?;
    let shapes: Vec<ModalityShape> = spec
        .observation_matrices
        .iter()
        .map(|m| ModalityShape::Vector { dim: m.rows })
        .collect();
    let d = spec.latent_dim;
    let samples = (0..spec.n_samples)
        .map(|i| {
            let mut rng = indexed_stream(spec.seed, "lg-sample", i as u64);
            let z = DVector::from_vec(normal_vec(&mut rng, d));
            let modalities = spec
                .observation_matrices
                .iter()
                .zip(&spec.noise_scales)
                .map(|(m, &s)| {
                    let a = DMatrix::from_row_slice(m.rows, m.cols, &m.data);
                    let mean = &a * &z;
                    (0..m.rows).map(|r| mean[r] + s * crate::rng::normal(&mut rng)).collect()
                })
                .collect();
            MultimodalSample {
                modalities,
                label: 0,
                presence: vec![true; spec.observation_matrices.len()],
            }
        })
        .collect();
    let dataset = Dataset {
        spec: DatasetSpec::LinearGaussian(spec.clone()),
        shapes,
        n_classes: 1,
        samples,
    };
    Ok((dataset, posterior))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_spec(n_modalities: usize) -> LinearGaussianSpec {
        LinearGaussianSpec {
            latent_dim: 1,
            observation_matrices: (0..n_modalities)
                .map(|_| MatrixSpec { rows: 1, cols: 1, data: vec![1.0] })
                .collect(),
            noise_scales: vec![1.0; n_modalities],
            n_samples: 1,
            seed: 0,
        }
    }

    #[test]
    fn single_scalar_modality_posterior_matches_conjugate_formula() {
        let spec = scalar_spec(1);
        let post = AnalyticPosterior::new(&spec).unwrap();
        // prior N(0,1), likelihood N(z,1), x=0 -> posterior N(0, 0.5)
        assert!((post.covariance()[(0, 0)] - 0.5).abs() < 1e-12);
        let mean = post.mean(&[vec![0.0]]);
        assert!(mean[0].abs() < 1e-12);
    }

    #[test]
    fn two_modalities_precision_weighted_mean() {
        let spec = scalar_spec(2);
        let post = AnalyticPosterior::new(&spec).unwrap();
        let mean = post.mean(&[vec![2.0], vec![2.0]]);
        assert!((mean[0] - 4.0 / 3.0).abs() < 1e-12);
        assert!((post.covariance()[(0, 0)] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn analytic_mean_matches_least_squares_oracle() {
        // Independent route: solve the stacked ridge system
        // [I; A_i/s_i] z ~ [0; x_i/s_i] by SVD least squares.
        let spec = LinearGaussianSpec::random_orthogonal(2, &[3, 2], &[0.7, 1.3], 4, 21);
        let (ds, post) = make_linear_gaussian_dataset(&spec).unwrap();
        for sample in &ds.samples {
            let total: usize = 2 + 3 + 2;
            let mut a = DMatrix::zeros(total, 2);
            let mut b = DVector::zeros(total);
            a[(0, 0)] = 1.0;
            a[(1, 1)] = 1.0;
            let mut row = 2;
            for (mi, m) in spec.observation_matrices.iter().enumerate() {
                let s = spec.noise_scales[mi];
                for r in 0..m.rows {
                    for c in 0..m.cols {
                        a[(row, c)] = m.data[r * m.cols + c] / s;
                    }
                    b[row] = sample.modalities[mi][r] / s;
                    row += 1;
                }
            }
            let solved = a.svd(true, true).solve(&b, 1e-14).unwrap();
            let mean = post.mean(&sample.modalities);
            for i in 0..2 {
                assert!(
                    (solved[i] - mean[i]).abs() < 1e-8,
                    "component {i}: {} vs {}",
                    solved[i],
                    mean[i]
                );
            }
        }
    }

    #[test]
    fn precision_identity_holds() {
        let spec = LinearGaussianSpec::random_orthogonal(3, &[4, 3], &[0.5, 2.0], 1, 5);
        let post = AnalyticPosterior::new(&spec).unwrap();
        let mut expected = DMatrix::identity(3, 3);
        for (m, &s) in spec.observation_matrices.iter().zip(&spec.noise_scales) {
            let a = DMatrix::from_row_slice(m.rows, m.cols, &m.data);
            expected += a.transpose() * a / (s * s);
        }
        let diff = (post.precision() - expected).abs().max();
        assert!(diff < 1e-10);
    }

    #[test]
    fn rejects_rank_deficient_matrix() {
        let spec = LinearGaussianSpec {
            latent_dim: 2,
            observation_matrices: vec![MatrixSpec {
                rows: 2,
                cols: 2,
                data: vec![1.0, 1.0, 1.0, 1.0],
            }],
            noise_scales: vec![1.0],
            n_samples: 1,
            seed: 0,
        };
        assert!(make_linear_gaussian_dataset(&spec).is_err());
    }
}
