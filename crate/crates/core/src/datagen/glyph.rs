//! Seven-segment glyph renderer.
//!
//! Ten glyph classes drawn from a fixed vector-stroke alphabet, rasterized
//! without anti-aliasing so rendering is bit-deterministic. Each modality
//! applies its own style (rotation, foreground color, background texture) to
//! the same label; per-sample jitter varies translation and scale only.

use rand::Rng;

use super::{balanced_labels, Dataset, DatasetSpec, GlyphDatasetSpec, GlyphStyle, ModalityShape, MultimodalSample};
use crate::rng::indexed_stream;
use crate::Result;

pub const N_GLYPHS: usize = 10;
pub const N_TEXTURES: usize = 6;

/// Segment endpoints in unit coordinates, y growing downward.
const SEGMENTS: [[f64; 4]; 7] = [
    [0.30, 0.18, 0.70, 0.18], // A top
    [0.70, 0.18, 0.70, 0.50], // B upper right
    [0.70, 0.50, 0.70, 0.82], // C lower right
    [0.30, 0.82, 0.70, 0.82], // D bottom
    [0.30, 0.50, 0.30, 0.82], // E lower left
    [0.30, 0.18, 0.30, 0.50], // F upper left
    [0.30, 0.50, 0.70, 0.50], // G middle
];

const GLYPH_SEGMENTS: [&[usize]; N_GLYPHS] = [
    &[0, 1, 2, 3, 4, 5],    // 0
    &[1, 2],                // 1
    &[0, 1, 6, 4, 3],       // 2
    &[0, 1, 6, 2, 3],       // 3
    &[5, 6, 1, 2],          // 4
    &[0, 5, 6, 2, 3],       // 5
    &[0, 5, 6, 4, 3, 2],    // 6
    &[0, 1, 2],             // 7
    &[0, 1, 2, 3, 4, 5, 6], // 8
    &[0, 1, 2, 3, 5, 6],    // 9
];

const STROKE_HALF_WIDTH: f64 = 0.055;
const JITTER_SHIFT: f64 = 0.06;
const JITTER_SCALE: (f64, f64) = (0.85, 1.15);

/// Per-sample geometric jitter shared across modalities of one sample, so
/// modality differences come from style alone.
#[derive(Clone, Copy, Debug)]
pub(crate) struct GlyphJitter {
    pub dx: f64,
    pub dy: f64,
    pub scale: f64,
}

impl GlyphJitter {
    fn sample(rng: &mut impl Rng) -> Self {
        GlyphJitter {
            dx: rng.gen_range(-JITTER_SHIFT..JITTER_SHIFT),
            dy: rng.gen_range(-JITTER_SHIFT..JITTER_SHIFT),
            scale: rng.gen_range(JITTER_SCALE.0..JITTER_SCALE.1),
        }
    }
}

fn background(texture: usize, ix: usize, iy: usize) -> f64 {
    match texture {
        0 => 0.08,
        1 => {
            if (iy / 2) % 2 == 0 {
                0.05
            } else {
                0.25
            }
        }
        2 => {
            if ((ix / 2) + (iy / 2)) % 2 == 0 {
                0.06
            } else {
                0.22
            }
        }
        3 => {
            if (ix / 2) % 2 == 0 {
                0.24
            } else {
                0.04
            }
        }
        4 => {
            if ((ix + iy) / 3) % 2 == 0 {
                0.20
            } else {
                0.06
            }
        }
        _ => {
            if ix % 4 == 1 && iy % 4 == 1 {
                0.30
            } else {
                0.07
            }
        }
    }
}

fn dist_to_segment(px: f64, py: f64, seg: &[f64; 4]) -> f64 {
    let (x1, y1, x2, y2) = (seg[0], seg[1], seg[2], seg[3]);
    let (vx, vy) = (x2 - x1, y2 - y1);
    let (wx, wy) = (px - x1, py - y1);
    let len2 = vx * vx + vy * vy;
    let t = if len2 > 0.0 { ((wx * vx + wy * vy) / len2).clamp(0.0, 1.0) } else { 0.0 };
    let (cx, cy) = (x1 + t * vx, y1 + t * vy);
    ((px - cx).powi(2) + (py - cy).powi(2)).sqrt()
}

/// Rasterize one glyph under a style and jitter into an HxWx3 buffer.
pub(crate) fn render_glyph(
    label: usize,
    style: &GlyphStyle,
    jitter: GlyphJitter,
    side: usize,
) -> Vec<f64> {
    let theta = style.rotation_deg.to_radians();
    let (sin_t, cos_t) = theta.sin_cos();
    // Transform the strokes once: scale+rotate about the glyph center, then shift.
    let segs: Vec<[f64; 4]> = GLYPH_SEGMENTS[label]
        .iter()
        .map(|&si| {
            let s = SEGMENTS[si];
            let mut out = [0.0; 4];
            for e in 0..2 {
                let (x, y) = (s[2 * e] - 0.5, s[2 * e + 1] - 0.5);
                let (x, y) = (x * jitter.scale, y * jitter.scale);
                out[2 * e] = 0.5 + x * cos_t - y * sin_t + jitter.dx;
                out[2 * e + 1] = 0.5 + x * sin_t + y * cos_t + jitter.dy;
            }
            out
        })
        .collect();
    let mut img = vec![0.0; side * side * 3];
    for iy in 0..side {
        for ix in 0..side {
            let px = (ix as f64 + 0.5) / side as f64;
            let py = (iy as f64 + 0.5) / side as f64;
            let on = segs.iter().any(|s| dist_to_segment(px, py, s) <= STROKE_HALF_WIDTH);
            let base = (iy * side + ix) * 3;
            if on {
                img[base..base + 3].copy_from_slice(&style.fg_color);
            } else {
                let bg = background(style.bg_texture, ix, iy);
                img[base] = bg;
                img[base + 1] = bg;
                img[base + 2] = bg;
            }
        }
    }
    img
}

/// Generate a styled glyph dataset: same label across modalities, one style
/// per modality, balanced classes, deterministic under the spec seed.
pub fn make_glyph_dataset(spec: &GlyphDatasetSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut label_rng = indexed_stream(spec.seed, "glyph-labels", 0);
    let labels = balanced_labels(spec.n_samples, spec.n_classes, &mut label_rng);
    let shapes: Vec<ModalityShape> = spec
        .modalities
        .iter()
        .map(|_| ModalityShape::Image { height: spec.image_side, width: spec.image_side, channels: 3 })
        .collect();
    let samples = labels
        .iter()
        .enumerate()
        .map(|(i, &label)| {
            let mut rng = indexed_stream(spec.seed, "glyph-sample", i as u64);
            let jitter = GlyphJitter::sample(&mut rng);
            let modalities = spec
                .modalities
                .iter()
                .map(|style| render_glyph(label, style, jitter, spec.image_side))
                .collect();
            MultimodalSample { modalities, label, presence: vec![true; spec.modalities.len()] }
        })
        .collect();
    Ok(Dataset {
        spec: DatasetSpec::Glyph(spec.clone()),
        shapes,
        n_classes: spec.n_classes,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_spec_and_seed_give_identical_datasets() {
        let spec = GlyphDatasetSpec::with_default_styles(10, 3, 7);
        let a = make_glyph_dataset(&spec).unwrap();
        let b = make_glyph_dataset(&spec).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unimodal_spec_is_valid() {
        let spec = GlyphDatasetSpec::with_default_styles(5, 1, 3);
        let ds = make_glyph_dataset(&spec).unwrap();
        assert_eq!(ds.n_modalities(), 1);
        ds.validate().unwrap();
    }

    #[test]
    fn class_histogram_is_uniform_within_five_percent() {
        let spec = GlyphDatasetSpec::with_default_styles(5000, 3, 11);
        let ds = make_glyph_dataset(&spec).unwrap();
        let mut counts = vec![0usize; ds.n_classes];
        for s in &ds.samples {
            counts[s.label] += 1;
        }
        let expected = 5000.0 / ds.n_classes as f64;
        for (c, &n) in counts.iter().enumerate() {
            let rel = (n as f64 - expected).abs() / expected;
            assert!(rel <= 0.05, "class {c} count {n} deviates {rel:.3} from uniform");
        }
    }

    #[test]
    fn labels_agree_across_modalities_and_pixels_in_range() {
        let spec = GlyphDatasetSpec::with_default_styles(50, 3, 5);
        let ds = make_glyph_dataset(&spec).unwrap();
        ds.validate().unwrap();
        // Styles differ per modality: image bytes must differ between modalities.
        let s = &ds.samples[0];
        assert_ne!(s.modalities[0], s.modalities[1]);
    }

    #[test]
    fn rejects_invalid_specs() {
        let mut spec = GlyphDatasetSpec::with_default_styles(10, 3, 7);
        spec.modalities.clear();
        assert!(make_glyph_dataset(&spec).is_err());
        let mut spec = GlyphDatasetSpec::with_default_styles(10, 3, 7);
        spec.n_samples = 0;
        assert!(make_glyph_dataset(&spec).is_err());
        let mut spec = GlyphDatasetSpec::with_default_styles(10, 3, 7);
        spec.n_classes = 11;
        assert!(make_glyph_dataset(&spec).is_err());
    }
}
