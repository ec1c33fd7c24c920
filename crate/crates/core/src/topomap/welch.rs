//! Welch power spectral density: Hann windows, 50% overlap, per-segment
//! mean removal, one-sided density scaling (units squared per Hz).

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Default segment length: one second at 128 Hz.
pub const DEFAULT_SEGMENT: usize = 128;

#[derive(Debug, Clone, PartialEq)]
pub struct Psd {
    pub freqs: Vec<f64>,
    pub power: Vec<f64>,
    /// Bin spacing in Hz.
    pub df: f64,
    /// Number of segments averaged.
    pub n_windows: usize,
}

impl Psd {
    /// Integral of the density, `sum(power) * df`.
    pub fn total_power(&self) -> f64 {
        self.power.iter().sum::<f64>() * self.df
    }
}

/// Reusable estimator for one segment length and sample rate.
pub struct Welch {
    nperseg: usize,
    sample_rate: f64,
    window: Vec<f64>,
    scale: f64,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Welch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Welch")
            .field("nperseg", &self.nperseg)
            .field("sample_rate", &self.sample_rate)
            .finish()
    }
}

impl Welch {
    pub fn new(nperseg: usize, sample_rate: f64) -> Result<Self> {
        if nperseg < 4 || !nperseg.is_multiple_of(2) {
            return Err(Error::Config(format!("Welch segment length must be even and >= 4, got {nperseg}")));
        }
        // periodic Hann
        let window: Vec<f64> = (0..nperseg)
            .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / nperseg as f64).cos())
            .collect();
        let scale = 1.0 / (sample_rate * window.iter().map(|w| w * w).sum::<f64>());
        let fft = FftPlanner::new().plan_fft_forward(nperseg);
        Ok(Self {
            nperseg,
            sample_rate,
            window,
            scale,
            fft,
        })
    }

    pub fn nperseg(&self) -> usize {
        self.nperseg
    }

    /// PSD over all segments; errors when `x` is shorter than one segment.
    pub fn psd(&self, x: &[f64]) -> Result<Psd> {
        self.psd_masked(x, None)
    }

    /// Like [`Welch::psd`], dropping every segment that overlaps a masked
    /// sample.
    pub fn psd_masked(&self, x: &[f64], mask: Option<&[bool]>) -> Result<Psd> {
        let n = x.len();
        if n < self.nperseg {
            return Err(Error::TooShort {
                needed: self.nperseg,
                got: n,
            });
        }
        if let Some(m) = mask {
            if m.len() != n {
                return Err(Error::LengthMismatch { left: n, right: m.len() });
            }
        }
        let step = self.nperseg / 2;
        let n_bins = self.nperseg / 2 + 1;
        let mut acc = vec![0.0; n_bins];
        let mut used = 0;
        let mut buf = vec![Complex64::new(0.0, 0.0); self.nperseg];
        let mut start = 0;
        while start + self.nperseg <= n {
            let seg = &x[start..start + self.nperseg];
            let clean = mask.is_none_or(|m| !m[start..start + self.nperseg].iter().any(|&b| b));
            if clean {
                let mean = seg.iter().sum::<f64>() / self.nperseg as f64;
                for ((b, v), w) in buf.iter_mut().zip(seg).zip(&self.window) {
                    *b = Complex64::new((v - mean) * w, 0.0);
                }
                self.fft.process(&mut buf);
                for (a, b) in acc.iter_mut().zip(&buf) {
                    *a += b.norm_sqr();
                }
                used += 1;
            }
            start += step;
        }
        if used == 0 {
            return Err(Error::TooShort {
                needed: self.nperseg,
                got: longest_clean_run(mask.unwrap_or(&[])),
            });
        }
        let last = n_bins - 1;
        let power = acc
            .iter()
            .enumerate()
            .map(|(k, a)| {
                let one_sided = if k == 0 || k == last { 1.0 } else { 2.0 };
                a * self.scale * one_sided / used as f64
            })
            .collect();
        let df = self.sample_rate / self.nperseg as f64;
        Ok(Psd {
            freqs: (0..n_bins).map(|k| k as f64 * df).collect(),
            power,
            df,
            n_windows: used,
        })
    }
}

fn longest_clean_run(mask: &[bool]) -> usize {
    let (mut best, mut cur) = (0, 0);
    for &m in mask {
        cur = if m { 0 } else { cur + 1 };
        best = best.max(cur);
    }
    best
}

/// One-second-segment Welch PSD; needs at least one second of samples.
pub fn welch_psd(x: &[f64], sample_rate: f64) -> Result<Psd> {
    Welch::new(sample_rate.round() as usize, sample_rate)?.psd(x)
}

/// Sum of bins whose center lies in `[lo, hi)`, times the bin width.
pub fn band_power(psd: &Psd, lo: f64, hi: f64) -> Result<f64> {
    let mut any = false;
    let mut s = 0.0;
    for (f, p) in psd.freqs.iter().zip(&psd.power) {
        if *f >= lo && *f < hi {
            any = true;
            s += p;
        }
    }
    if !any {
        return Err(Error::EmptyBand { lo, hi });
    }
    Ok(s * psd.df)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sine(f: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| (2.0 * PI * f * i as f64 / 128.0).sin()).collect()
    }

    #[test]
    fn sinusoid_peak_and_power() {
        let psd = welch_psd(&sine(10.0, 1024), 128.0).unwrap();
        let peak = psd.power.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        assert_eq!(psd.freqs[peak], 10.0);
        assert!((psd.total_power() - 0.5).abs() < 0.025);
        let alpha = band_power(&psd, 7.0, 13.0).unwrap();
        let rest = band_power(&psd, 4.0, 7.0).unwrap() + band_power(&psd, 13.0, 30.0).unwrap();
        assert!(alpha / (alpha + rest) >= 0.95);
    }

    #[test]
    fn zero_signal() {
        let psd = welch_psd(&[0.0; 256], 128.0).unwrap();
        assert!(psd.power.iter().all(|p| *p == 0.0));
        assert_eq!(band_power(&psd, 7.0, 13.0).unwrap(), 0.0);
    }

    #[test]
    fn short_input_and_empty_band() {
        assert!(matches!(welch_psd(&[0.0; 100], 128.0), Err(Error::TooShort { .. })));
        let psd = welch_psd(&[0.0; 128], 128.0).unwrap();
        assert!(matches!(band_power(&psd, 7.2, 7.8), Err(Error::EmptyBand { .. })));
    }

    #[test]
    fn masked_segments_dropped() {
        let x = sine(10.0, 512);
        let w = Welch::new(128, 128.0).unwrap();
        let full = w.psd(&x).unwrap();
        assert_eq!(full.n_windows, 7);
        let mut mask = vec![false; 512];
        mask[200] = true;
        // segments starting at 128 and 192 touch row 200
        assert_eq!(w.psd_masked(&x, Some(&mask)).unwrap().n_windows, 5);
        let all = vec![true; 512];
        assert!(w.psd_masked(&x, Some(&all)).is_err());
    }

    #[test]
    fn half_second_segments() {
        let w = Welch::new(64, 128.0).unwrap();
        let psd = w.psd(&sine(10.0, 64)).unwrap();
        assert_eq!(psd.df, 2.0);
        assert_eq!(psd.n_windows, 1);
    }
}
