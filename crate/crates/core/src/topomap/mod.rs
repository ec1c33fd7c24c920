//! Band power and the three-band RGB scalp raster.

pub mod interp;
pub mod raster;
pub mod welch;

pub use interp::{interpolate_scalp_map, Grid, ScalpInterpolator};
pub use raster::{compose_rgb_topomap, render_png, ScalpImage};
pub use welch::{band_power, welch_psd, Psd, Welch, DEFAULT_SEGMENT};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::preproc::CleanTrial;
use crate::session::layout::N_CHANNELS;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandSpec {
    pub theta: (f64, f64),
    pub alpha: (f64, f64),
    pub beta: (f64, f64),
}

impl Default for BandSpec {
    fn default() -> Self {
        Self {
            theta: (4.0, 7.0),
            alpha: (7.0, 13.0),
            beta: (13.0, 30.0),
        }
    }
}

impl BandSpec {
    pub fn bands(&self) -> [(f64, f64); 3] {
        [self.theta, self.alpha, self.beta]
    }

    /// Ordered, non-overlapping, inside `[pass_lo, pass_hi]`.
    pub fn validate(&self, pass_lo: f64, pass_hi: f64) -> Result<()> {
        let b = self.bands();
        let ok = b.iter().all(|(lo, hi)| lo < hi)
            && b[0].1 <= b[1].0
            && b[1].1 <= b[2].0
            && b[0].0 >= pass_lo
            && b[2].1 <= pass_hi;
        if !ok {
            return Err(Error::Config(format!("invalid band layout {b:?} for passband [{pass_lo}, {pass_hi}]")));
        }
        Ok(())
    }
}

/// Per-channel `[theta, alpha, beta]` band power in squared microvolts.
#[derive(Debug, Clone, PartialEq)]
pub struct BandPowerMap {
    pub power: Vec<[f64; 3]>,
    pub segment_len: usize,
    /// Welch segments averaged, per channel.
    pub n_windows: Vec<usize>,
}

impl BandPowerMap {
    pub fn band(&self, b: usize) -> Vec<f64> {
        self.power.iter().map(|p| p[b]).collect()
    }
}

/// Welch band powers over the unmasked parts of a trial.
pub fn band_power_map(trial: &CleanTrial, bands: &BandSpec, welch: &Welch) -> Result<BandPowerMap> {
    let mut power = Vec::with_capacity(N_CHANNELS);
    let mut n_windows = Vec::with_capacity(N_CHANNELS);
    for ch in &trial.trial.channels {
        let psd = welch.psd_masked(ch, Some(&trial.rejected_mask))?;
        let mut p = [0.0; 3];
        for (slot, (lo, hi)) in p.iter_mut().zip(bands.bands()) {
            *slot = band_power(&psd, lo, hi)?;
        }
        power.push(p);
        n_windows.push(psd.n_windows);
    }
    Ok(BandPowerMap {
        power,
        segment_len: welch.nperseg(),
        n_windows,
    })
}

/// The three interpolated band grids of a band-power map.
pub fn band_grids(map: &BandPowerMap, interp: &ScalpInterpolator) -> Result<[Grid; 3]> {
    Ok([
        interp.interpolate(&map.band(0))?,
        interp.interpolate(&map.band(1))?,
        interp.interpolate(&map.band(2))?,
    ])
}

pub fn scalp_image(map: &BandPowerMap, interp: &ScalpInterpolator) -> Result<ScalpImage> {
    let [t, a, b] = band_grids(map, interp)?;
    compose_rgb_topomap([&t, &a, &b])
}

/// Segment length used for a trial or interval of `n_samples`: one second
/// when at least two seconds are available, otherwise half the span
/// (rounded down to even) so that three half-overlapping windows fit and a
/// masked stretch does not discard the whole span.
pub fn segment_len_for(n_samples: usize, sample_rate: f64) -> usize {
    let one_second = sample_rate.round() as usize;
    if n_samples >= 2 * one_second {
        one_second
    } else {
        let half = n_samples / 2;
        half - half % 2
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::session::eeg::EegTrial;
    use crate::session::layout::ChannelLayout;
    use std::f64::consts::PI;

    #[test]
    fn default_bands_valid() {
        BandSpec::default().validate(4.0, 45.0).unwrap();
        let bad = BandSpec {
            alpha: (6.0, 13.0),
            ..BandSpec::default()
        };
        assert!(bad.validate(4.0, 45.0).is_err());
    }

    #[test]
    fn alpha_trial_renders_green() {
        let channels: Vec<Vec<f64>> = (0..14)
            .map(|c| (0..256).map(|i| (1.0 + c as f64 * 0.1) * (2.0 * PI * 10.0 * i as f64 / 128.0).sin()).collect())
            .collect();
        let trial = CleanTrial::unmasked(EegTrial::new("s", "t", channels, 2.0).unwrap());
        let map = band_power_map(&trial, &BandSpec::default(), &Welch::new(128, 128.0).unwrap()).unwrap();
        let it = ScalpInterpolator::new(&ChannelLayout::standard()).unwrap();
        let img = scalp_image(&map, &it).unwrap();
        let mut green = 0;
        let mut total = 0;
        for r in 0..224 {
            for c in 0..224 {
                if interp::in_disk(r, c, 224) {
                    total += 1;
                    let [rd, g, b] = img.get(r, c);
                    if g > rd && g > b {
                        green += 1;
                    }
                }
            }
        }
        assert!(green as f64 >= 0.99 * total as f64, "{green}/{total}");
    }

    #[test]
    fn segment_length_choice() {
        assert_eq!(segment_len_for(256, 128.0), 128);
        assert_eq!(segment_len_for(128, 128.0), 64);
        assert_eq!(segment_len_for(64, 128.0), 32);
    }
}
