//! Image embedding providers standing in for the penultimate layer of a
//! pre-trained CNN, and the per-trial statistics built on them.
//!
//! Any type implementing [`EmbeddingProvider`] can be plugged into the
//! pipeline. [`PseudoEmbedder`] is a seeded deterministic stand-in;
//! [`FileEmbedder`] serves vectors computed elsewhere.

pub mod crop;
pub mod file;
pub mod pseudo;

pub use crop::render_face_crop;
pub use file::FileEmbedder;
pub use pseudo::PseudoEmbedder;

use crate::error::{Error, Result};
use crate::image::RgbImage;
use crate::stats;

pub const EMBEDDING_DIM: usize = 4096;

pub trait EmbeddingProvider: Send + Sync {
    fn provider_id(&self) -> &str;

    /// True when the same image always yields the same vector.
    fn deterministic(&self) -> bool;

    /// Embeds a 224x224x3 image into [`EMBEDDING_DIM`] values.
    fn embed(&self, image: &RgbImage) -> Result<Vec<f32>>;

    /// Embeds with a caller-supplied lookup key (`<trial_id>/topomap`,
    /// `<trial_id>/face/<frame>`). Only table-backed providers use the key.
    fn embed_keyed(&self, image: &RgbImage, _key: &str) -> Result<Vec<f32>> {
        self.embed(image)
    }
}

pub(crate) fn check_output(v: &[f32]) -> Result<()> {
    if v.len() != EMBEDDING_DIM {
        return Err(Error::Shape {
            expected: format!("{EMBEDDING_DIM} embedding values"),
            found: v.len().to_string(),
        });
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Format("embedding contains non-finite values".into()));
    }
    Ok(())
}

/// Statistic-major block layout: all means, then all 95th percentiles,
/// then all population standard deviations.
pub fn embedding_statistics(vectors: &[Vec<f32>]) -> Result<Vec<f64>> {
    if vectors.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: vectors.len(),
        });
    }
    let dim = vectors[0].len();
    if let Some(v) = vectors.iter().find(|v| v.len() != dim) {
        return Err(Error::LengthMismatch {
            left: dim,
            right: v.len(),
        });
    }
    let mut out = vec![0.0; 3 * dim];
    let mut column = vec![0.0; vectors.len()];
    for d in 0..dim {
        for (c, v) in column.iter_mut().zip(vectors) {
            *c = v[d] as f64;
        }
        let [m, p, s] = stats::mean_p95_std(&column);
        out[d] = m;
        out[dim + d] = p;
        out[2 * dim + d] = s;
    }
    Ok(out)
}

/// Embeds each image and reduces the sequence: one image passes its vector
/// through, two or more yield [`embedding_statistics`].
pub fn embed_trial_frames(
    images: &[(RgbImage, String)],
    provider: &dyn EmbeddingProvider,
) -> Result<Vec<f64>> {
    match images.len() {
        0 => Err(Error::TooShort { needed: 1, got: 0 }),
        1 => Ok(provider
            .embed_keyed(&images[0].0, &images[0].1)?
            .into_iter()
            .map(f64::from)
            .collect()),
        _ => {
            let vs = images
                .iter()
                .map(|(img, key)| provider.embed_keyed(img, key))
                .collect::<Result<Vec<_>>>()?;
            embedding_statistics(&vs)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::IMAGE_SIDE;

    #[test]
    fn repeated_frames_have_zero_spread() {
        let p = PseudoEmbedder::new(3);
        let img = RgbImage::filled(IMAGE_SIDE, IMAGE_SIDE, [90, 10, 200]);
        let frames = vec![(img.clone(), "a".to_string()), (img, "b".to_string())];
        let s = embed_trial_frames(&frames, &p).unwrap();
        assert_eq!(s.len(), 3 * EMBEDDING_DIM);
        assert!(s[2 * EMBEDDING_DIM..].iter().all(|v| *v == 0.0));
        assert_eq!(&s[..EMBEDDING_DIM], &s[EMBEDDING_DIM..2 * EMBEDDING_DIM]);
    }

    #[test]
    fn single_image_passes_through() {
        let p = PseudoEmbedder::new(3);
        let img = RgbImage::filled(IMAGE_SIDE, IMAGE_SIDE, [1, 2, 3]);
        let direct: Vec<f64> = p.embed(&img).unwrap().into_iter().map(f64::from).collect();
        assert_eq!(embed_trial_frames(&[(img, "k".into())], &p).unwrap(), direct);
    }

    #[test]
    fn two_frame_statistics() {
        let a = vec![1.0f32, -2.0];
        let b = vec![3.0f32, 2.0];
        let s = embedding_statistics(&[a, b]).unwrap();
        // p95 of two points: 1 + 0.95 * 2
        let want = [2.0, 0.0, 2.9, 1.8, 1.0, 2.0];
        for (a, b) in s.iter().zip(want) {
            assert!((a - b).abs() < 1e-12, "{s:?}");
        }
    }

    #[test]
    fn empty_sequence_rejected() {
        assert!(embed_trial_frames(&[], &PseudoEmbedder::new(0)).is_err());
        assert!(embedding_statistics(&[vec![0.0; 3]]).is_err());
    }
}
