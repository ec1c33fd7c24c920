//! Seeded test double for CNN features: 4x4 mean pooling to 56x56x3, a
//! fixed sparse random linear map to 4096 outputs, then rectification.
//!
//! Each output reads [`FAN_IN`] pooled inputs with weights of magnitude
//! `1/sqrt(FAN_IN)`. Input slots are drawn from back-to-back random
//! permutations of all pooled inputs, so every input pixel feeds about 28
//! outputs and the map stays Lipschitz with a small constant.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{EmbeddingProvider, EMBEDDING_DIM};
use crate::error::Result;
use crate::image::{RgbImage, IMAGE_SIDE};
use crate::stats;

pub const POOL: usize = 4;
pub const POOLED_SIDE: usize = IMAGE_SIDE / POOL;
pub const POOLED_LEN: usize = POOLED_SIDE * POOLED_SIDE * 3;
pub const FAN_IN: usize = 64;

#[derive(Debug, Clone)]
pub struct PseudoEmbedder {
    seed: u64,
    id: String,
    index: Vec<u32>,
    weight: Vec<f32>,
}

impl PseudoEmbedder {
    pub fn new(seed: u64) -> Self {
        let mut rng = stats::rng_stream(seed, &[stats::str_hash("pseudo-embedder")]);
        let slots = EMBEDDING_DIM * FAN_IN;
        let mut index = Vec::with_capacity(slots);
        let mut perm: Vec<u32> = (0..POOLED_LEN as u32).collect();
        while index.len() < slots {
            perm.shuffle(&mut rng);
            let take = (slots - index.len()).min(perm.len());
            index.extend_from_slice(&perm[..take]);
        }
        let w = 1.0 / (FAN_IN as f32).sqrt();
        let weight = (0..slots).map(|_| if rng.random::<bool>() { w } else { -w }).collect();
        Self {
            seed,
            id: format!("pseudo-v1/seed={seed}"),
            index,
            weight,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Mean of each 4x4 block, scaled to [0, 1]; layout `(row, col, channel)`.
    pub fn pool(image: &RgbImage) -> Vec<f32> {
        let mut out = vec![0.0f32; POOLED_LEN];
        for r in 0..IMAGE_SIDE {
            for c in 0..IMAGE_SIDE {
                let o = ((r / POOL) * POOLED_SIDE + c / POOL) * 3;
                let i = (r * IMAGE_SIDE + c) * 3;
                for ch in 0..3 {
                    out[o + ch] += image.pixels[i + ch] as f32;
                }
            }
        }
        let scale = 1.0 / (255.0 * (POOL * POOL) as f32);
        out.iter_mut().for_each(|v| *v *= scale);
        out
    }
}

impl EmbeddingProvider for PseudoEmbedder {
    fn provider_id(&self) -> &str {
        &self.id
    }

    fn deterministic(&self) -> bool {
        true
    }

    fn embed(&self, image: &RgbImage) -> Result<Vec<f32>> {
        image.check_network_input()?;
        let x = Self::pool(image);
        Ok(self
            .index
            .chunks_exact(FAN_IN)
            .zip(self.weight.chunks_exact(FAN_IN))
            .map(|(idx, w)| {
                let s: f32 = idx.iter().zip(w).map(|(&i, &w)| x[i as usize] * w).sum();
                s.max(0.0)
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn random_image(seed: u64) -> RgbImage {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut img = RgbImage::new(IMAGE_SIDE, IMAGE_SIDE);
        rng.fill(&mut img.pixels[..]);
        img
    }

    #[test]
    fn output_shape_and_determinism() {
        let img = random_image(1);
        let a = PseudoEmbedder::new(7).embed(&img).unwrap();
        let b = PseudoEmbedder::new(7).embed(&img).unwrap();
        assert_eq!(a.len(), EMBEDDING_DIM);
        assert_eq!(a, b);
        assert!(a.iter().all(|v| v.is_finite() && *v >= 0.0));
        assert_ne!(a, PseudoEmbedder::new(8).embed(&img).unwrap());
    }

    #[test]
    fn every_pooled_input_is_read() {
        let e = PseudoEmbedder::new(0);
        let mut seen = vec![false; POOLED_LEN];
        e.index.iter().for_each(|&i| seen[i as usize] = true);
        assert!(seen.iter().all(|s| *s));
    }

    #[test]
    fn one_pixel_change_moves_the_vector() {
        let e = PseudoEmbedder::new(11);
        for seed in 0..20 {
            let a = random_image(seed);
            let mut b = a.clone();
            let k = (seed as usize * 7919) % b.pixels.len();
            b.pixels[k] = b.pixels[k].wrapping_add(128);
            assert_ne!(e.embed(&a).unwrap(), e.embed(&b).unwrap(), "seed {seed}");
        }
    }

    #[test]
    fn wrong_shape_rejected() {
        assert!(PseudoEmbedder::new(0).embed(&RgbImage::new(100, 100)).is_err());
    }
}
