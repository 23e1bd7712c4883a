//! Procedural multimodal datasets.
//!
//! Three generator families keep every experiment self-contained: styled
//! glyph images (one style per modality, shared label), a linear-Gaussian
//! family whose exact posterior is available in closed form, and multi-view
//! renderings of irregular polygons. All generators are pure functions of
//! (spec, seed).

mod archive;
mod corrupt;
mod glyph;
mod linear_gaussian;
mod polygon;

pub use archive::{load_dataset, persist_dataset, regenerate_from_manifest};
pub use corrupt::{corrupt_modalities, CorruptionMode};
pub use glyph::make_glyph_dataset;
pub use linear_gaussian::{make_linear_gaussian_dataset, AnalyticPosterior};
pub use polygon::make_polygon_views_dataset;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Shape of one modality's observation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModalityShape {
    Image { height: usize, width: usize, channels: usize },
    Vector { dim: usize },
}

impl ModalityShape {
    pub fn len(&self) -> usize {
        match *self {
            ModalityShape::Image { height, width, channels } => height * width * channels,
            ModalityShape::Vector { dim } => dim,
        }
    }

    pub fn is_image(&self) -> bool {
        matches!(self, ModalityShape::Image { .. })
    }

    pub fn dims(&self) -> Vec<usize> {
        match *self {
            ModalityShape::Image { height, width, channels } => vec![height, width, channels],
            ModalityShape::Vector { dim } => vec![dim],
        }
    }
}

/// One observation: M coupled modalities plus its semantic label and a
/// presence mask. Presence marks availability, not cleanliness; corrupted
/// modalities stay present.
#[derive(Clone, Debug, PartialEq)]
pub struct MultimodalSample {
    pub modalities: Vec<Vec<f64>>,
    pub label: usize,
    pub presence: Vec<bool>,
}

impl MultimodalSample {
    pub fn n_modalities(&self) -> usize {
        self.modalities.len()
    }

    pub fn present_indices(&self) -> Vec<usize> {
        self.presence
            .iter()
            .enumerate()
            .filter_map(|(i, &p)| if p { Some(i) } else { None })
            .collect()
    }

    pub fn validate(&self, shapes: &[ModalityShape]) -> Result<()> {
        if self.modalities.len() != shapes.len() || self.presence.len() != shapes.len() {
            return Err(Error::ShapeMismatch(format!(
                "sample has {} modalities / {} presence flags, dataset has {}",
                self.modalities.len(),
                self.presence.len(),
                shapes.len()
            )));
        }
        if !self.presence.iter().any(|&p| p) {
            return Err(Error::InvalidSpec("sample has no present modality".into()));
        }
        for (i, (m, s)) in self.modalities.iter().zip(shapes).enumerate() {
            if m.len() != s.len() {
                return Err(Error::ShapeMismatch(format!(
                    "modality {i}: expected {} values, found {}",
                    s.len(),
                    m.len()
                )));
            }
            if s.is_image() && m.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
                return Err(Error::InvalidSpec(format!("modality {i}: pixel outside [0,1]")));
            }
        }
        Ok(())
    }
}

/// Style of a single glyph modality.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlyphStyle {
    pub rotation_deg: f64,
    pub fg_color: [f64; 3],
    pub bg_texture: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlyphDatasetSpec {
    pub n_samples: usize,
    #[serde(default = "default_classes")]
    pub n_classes: usize,
    pub modalities: Vec<GlyphStyle>,
    #[serde(default = "default_side")]
    pub image_side: usize,
    pub seed: u64,
}

fn default_classes() -> usize {
    10
}

fn default_side() -> usize {
    16
}

impl GlyphDatasetSpec {
    /// Style palette with distinct rotation/color/texture per modality.
    pub fn with_default_styles(n_samples: usize, n_modalities: usize, seed: u64) -> Self {
        let palette: [[f64; 3]; 6] = [
            [1.0, 0.85, 0.2],
            [0.3, 0.9, 1.0],
            [1.0, 0.4, 0.4],
            [0.5, 1.0, 0.5],
            [0.9, 0.6, 1.0],
            [1.0, 1.0, 1.0],
        ];
        let modalities = (0..n_modalities)
            .map(|i| GlyphStyle {
                rotation_deg: (i as f64) * 25.0,
                fg_color: palette[i % palette.len()],
                bg_texture: i % glyph::N_TEXTURES,
            })
            .collect();
        GlyphDatasetSpec { n_samples, n_classes: 10, modalities, image_side: 16, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.modalities.is_empty() {
            return Err(Error::InvalidSpec("glyph spec needs at least one modality".into()));
        }
        if self.n_samples == 0 || self.image_side < 8 {
            return Err(Error::InvalidSpec("glyph spec needs n_samples > 0 and image_side >= 8".into()));
        }
        if self.n_classes == 0 || self.n_classes > glyph::N_GLYPHS {
            return Err(Error::InvalidSpec(format!(
                "n_classes must be in 1..={}",
                glyph::N_GLYPHS
            )));
        }
        for (i, m) in self.modalities.iter().enumerate() {
            if m.bg_texture >= glyph::N_TEXTURES {
                return Err(Error::InvalidSpec(format!(
                    "modality {i}: bg_texture must be < {}",
                    glyph::N_TEXTURES
                )));
            }
        }
        Ok(())
    }
}

/// Row-major matrix payload inside specs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixSpec {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearGaussianSpec {
    pub latent_dim: usize,
    pub observation_matrices: Vec<MatrixSpec>,
    pub noise_scales: Vec<f64>,
    pub n_samples: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolygonViewsSpec {
    #[serde(default = "default_views")]
    pub n_views: usize,
    pub n_shape_classes: usize,
    #[serde(default = "default_side")]
    pub image_side: usize,
    pub n_samples: usize,
    pub seed: u64,
}

fn default_views() -> usize {
    16
}

/// Spec for any of the procedural generators; this is what dataset manifests
/// and experiment configs embed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DatasetSpec {
    Glyph(GlyphDatasetSpec),
    LinearGaussian(LinearGaussianSpec),
    PolygonViews(PolygonViewsSpec),
    /// Output of a generation pipeline; not regenerable from the manifest.
    Derived,
}

impl DatasetSpec {
    pub fn generate(&self) -> Result<Dataset> {
        match self {
            DatasetSpec::Glyph(s) => make_glyph_dataset(s),
            DatasetSpec::LinearGaussian(s) => Ok(make_linear_gaussian_dataset(s)?.0),
            DatasetSpec::PolygonViews(s) => make_polygon_views_dataset(s),
            DatasetSpec::Derived => {
                Err(Error::InvalidSpec("derived datasets cannot be regenerated".into()))
            }
        }
    }
}

/// An immutable, fully materialized multimodal dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub spec: DatasetSpec,
    pub shapes: Vec<ModalityShape>,
    pub n_classes: usize,
    pub samples: Vec<MultimodalSample>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn n_modalities(&self) -> usize {
        self.shapes.len()
    }

    pub fn validate(&self) -> Result<()> {
        for s in &self.samples {
            s.validate(&self.shapes)?;
        }
        Ok(())
    }

    /// Deterministic index split into (train, held-out) parts.
    pub fn split(&self, held_out: usize) -> (Vec<usize>, Vec<usize>) {
        let n = self.len();
        let k = held_out.min(n);
        ((0..n - k).collect(), (n - k..n).collect())
    }
}

/// Balanced label sequence: round-robin over classes, order shuffled by rng.
pub(crate) fn balanced_labels(n: usize, n_classes: usize, rng: &mut impl rand::Rng) -> Vec<usize> {
    let mut labels: Vec<usize> = (0..n).map(|i| i % n_classes).collect();
    // Fisher-Yates
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        labels.swap(i, j);
    }
    labels
}
