//! Robust amplitude-threshold artifact masking.
//!
//! Each channel is scored with a robust z (median / scaled MAD). A sample
//! row is masked when any channel exceeds the threshold; the mask is then
//! dilated by [`GUARD_SAMPLES`] on each side. A channel with zero MAD
//! (flat-lined or saturated) masks every row.

use crate::error::{Error, Result};
use crate::session::eeg::EegTrial;
use crate::stats;

pub const DEFAULT_Z_THRESH: f64 = 5.0;

/// Rows masked on each side of an exceedance.
pub const GUARD_SAMPLES: usize = 4;

/// Scale factor making the MAD a consistent sigma estimate for Gaussian data.
const MAD_TO_SIGMA: f64 = 1.482_602_218_505_602;

/// Trials above this rejection ratio are unusable.
pub const MAX_REJECTION: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct CleanTrial {
    pub trial: EegTrial,
    pub rejected_mask: Vec<bool>,
    pub rejection_ratio: f64,
}

impl CleanTrial {
    /// Wraps a trial with nothing masked.
    pub fn unmasked(trial: EegTrial) -> Self {
        let n = trial.n_samples();
        Self {
            trial,
            rejected_mask: vec![false; n],
            rejection_ratio: 0.0,
        }
    }

    pub fn from_mask(trial: EegTrial, rejected_mask: Vec<bool>) -> Self {
        assert_eq!(rejected_mask.len(), trial.n_samples());
        let rejection_ratio = if rejected_mask.is_empty() {
            0.0
        } else {
            rejected_mask.iter().filter(|m| **m).count() as f64 / rejected_mask.len() as f64
        };
        Self {
            trial,
            rejected_mask,
            rejection_ratio,
        }
    }

    pub fn is_usable(&self) -> bool {
        self.rejection_ratio <= MAX_REJECTION
    }

    /// Unmasked samples of one channel.
    pub fn kept(&self, channel: usize) -> Vec<f64> {
        self.trial.channels[channel]
            .iter()
            .zip(&self.rejected_mask)
            .filter(|(_, m)| !**m)
            .map(|(v, _)| *v)
            .collect()
    }
}

pub fn reject_artifacts(trial: &EegTrial, z_thresh: f64) -> Result<CleanTrial> {
    let n = trial.n_samples();
    let mut hit = vec![false; n];
    for ch in &trial.channels {
        let med = stats::median(ch);
        let dev: Vec<f64> = ch.iter().map(|v| (v - med).abs()).collect();
        let sigma = stats::median(&dev) * MAD_TO_SIGMA;
        if sigma == 0.0 {
            hit.iter_mut().for_each(|h| *h = true);
            continue;
        }
        for (h, d) in hit.iter_mut().zip(&dev) {
            if d / sigma > z_thresh {
                *h = true;
            }
        }
    }
    let mut mask = vec![false; n];
    for (i, _) in hit.iter().enumerate().filter(|(_, h)| **h) {
        let lo = i.saturating_sub(GUARD_SAMPLES);
        let hi = (i + GUARD_SAMPLES).min(n - 1);
        mask[lo..=hi].iter_mut().for_each(|m| *m = true);
    }
    let clean = CleanTrial::from_mask(trial.clone(), mask);
    if !clean.is_usable() {
        return Err(Error::Unusable {
            ratio: clean.rejection_ratio,
        });
    }
    Ok(clean)
}
