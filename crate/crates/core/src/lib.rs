//! Multimodal shared-latent generative modeling.
//!
//! The library couples a factorized multimodal VAE with a conditional
//! diffusion prior over the shared latent space:
//!
//! * [`datagen`] builds fully procedural multimodal datasets, including a
//!   linear-Gaussian family with a closed-form posterior used as an oracle.
//! * [`posterior`] implements the architectural joint-inference model
//!   (deterministic per-modality embeddings fused into one Gaussian) plus
//!   product/mixture-of-experts baselines.
//! * [`generator`] holds the per-modality decoders, the ELBO, and the
//!   stage-1 trainer.
//! * [`diffusion`] holds the noise schedule, the conditional denoiser, the
//!   surrogate loss, the guided sampler, and the stage-2 trainer.
//! * [`workflows`] composes the trained stages into joint, cross-modal,
//!   corrective, and style-transfer generation pipelines.
//! * [`eval`] provides coherence, Fréchet feature distance, PSNR/SSIM, and
//!   posterior-oracle metrics.
//! * [`cli`] wires everything into commands; see the `mmlatent` binary.

pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod datagen;
pub mod diffusion;
mod error;
pub mod eval;
pub mod generator;
pub mod nn;
pub mod posterior;
pub mod rng;
pub mod suites;
pub mod workflows;

pub use error::{Error, Result};
