//! Butterworth band-pass design (bilinear transform of the analog
//! prototype, realized as second-order sections) and forward-backward
//! zero-phase application.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::session::eeg::EegTrial;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    pub low_hz: f64,
    pub high_hz: f64,
    /// Band-pass order; even. A band-pass of order `2n` comes from an
    /// order-`n` low-pass prototype.
    pub order: usize,
}

impl Default for FilterSpec {
    fn default() -> Self {
        Self {
            low_hz: 4.0,
            high_hz: 45.0,
            order: 4,
        }
    }
}

impl FilterSpec {
    pub fn validate(&self, sample_rate: f64) -> Result<()> {
        if !(0.0 < self.low_hz && self.low_hz < self.high_hz && self.high_hz < sample_rate / 2.0) {
            return Err(Error::Config(format!(
                "band edges must satisfy 0 < {} < {} < {}",
                self.low_hz,
                self.high_hz,
                sample_rate / 2.0
            )));
        }
        if self.order == 0 || !self.order.is_multiple_of(2) {
            return Err(Error::Config(format!("filter order must be even and positive, got {}", self.order)));
        }
        Ok(())
    }

    /// Minimum trial length accepted by [`bandpass_filter`].
    pub fn min_samples(&self) -> usize {
        6 * self.order + 1
    }

    /// Reflection padding for a trial of `n` samples: two periods of the
    /// low cutoff, at least `3 * order`, at most `n - 1`.
    pub fn pad_len(&self, n: usize, sample_rate: f64) -> usize {
        let settle = (2.0 * sample_rate / self.low_hz).ceil() as usize;
        settle.max(3 * self.order).min(n.saturating_sub(1))
    }
}

/// One biquad, `a[0] == 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Section {
    pub b: [f64; 3],
    pub a: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandPass {
    pub sections: Vec<Section>,
    pub sample_rate: f64,
}

impl BandPass {
    pub fn design(spec: &FilterSpec, sample_rate: f64) -> Result<Self> {
        spec.validate(sample_rate)?;
        let n = spec.order / 2;
        // normalized frequencies (Nyquist = 1) with a nominal rate of 2
        let fs = 2.0;
        let fs2 = 2.0 * fs;
        let warp = |f: f64| fs2 * (PI * (2.0 * f / sample_rate) / fs).tan();
        let (lo, hi) = (warp(spec.low_hz), warp(spec.high_hz));
        let bw = hi - lo;
        let wo = (lo * hi).sqrt();

        // analog low-pass prototype poles on the unit circle
        let proto: Vec<Complex64> = (0..n)
            .map(|k| {
                let m = -(n as f64) + 1.0 + 2.0 * k as f64;
                -(Complex64::new(0.0, PI * m / (2.0 * n as f64))).exp()
            })
            .collect();

        // low-pass -> band-pass: each pole splits in two, n zeros at origin
        let mut poles = Vec::with_capacity(2 * n);
        for p in &proto {
            let pl = p * (bw / 2.0);
            let disc = (pl * pl - wo * wo).sqrt();
            poles.push(pl + disc);
            poles.push(pl - disc);
        }
        let gain_analog = bw.powi(n as i32);

        // bilinear: zeros at origin -> z = +1, zeros at infinity -> z = -1
        let zpole: Vec<Complex64> = poles.iter().map(|p| (fs2 + p) / (fs2 - p)).collect();
        let num: Complex64 = Complex64::new(fs2, 0.0).powu(n as u32);
        let den: Complex64 = poles.iter().map(|p| fs2 - p).product();
        let gain = gain_analog * (num / den).re;

        let pairs = pair_poles(&zpole);
        let mut sections: Vec<Section> = pairs
            .into_iter()
            .map(|(p1, p2)| Section {
                b: [1.0, 0.0, -1.0],
                a: [1.0, -(p1 + p2).re, (p1 * p2).re],
            })
            .collect();
        for c in sections[0].b.iter_mut() {
            *c *= gain;
        }
        Ok(Self {
            sections,
            sample_rate,
        })
    }

    /// Complex frequency response at `freq_hz`.
    pub fn response(&self, freq_hz: f64) -> Complex64 {
        let w = 2.0 * PI * freq_hz / self.sample_rate;
        let z1 = Complex64::new(0.0, -w).exp();
        let z2 = z1 * z1;
        self.sections
            .iter()
            .map(|s| (s.b[0] + s.b[1] * z1 + s.b[2] * z2) / (s.a[0] + s.a[1] * z1 + s.a[2] * z2))
            .product()
    }

    /// Steady-state section states for a unit step input.
    fn step_states(&self) -> Vec<[f64; 2]> {
        let mut scale = 1.0;
        self.sections
            .iter()
            .map(|s| {
                let g = (s.b[0] + s.b[1] + s.b[2]) / (s.a[0] + s.a[1] + s.a[2]);
                let z2 = s.b[2] - s.a[2] * g;
                let z1 = s.b[1] - s.a[1] * g + z2;
                let out = [z1 * scale, z2 * scale];
                scale *= g;
                out
            })
            .collect()
    }

    fn run(&self, x: &mut [f64], init: f64, zi: &[[f64; 2]]) {
        for (s, z0) in self.sections.iter().zip(zi) {
            let (mut z1, mut z2) = (z0[0] * init, z0[1] * init);
            for v in x.iter_mut() {
                let xin = *v;
                let y = s.b[0] * xin + z1;
                z1 = s.b[1] * xin - s.a[1] * y + z2;
                z2 = s.b[2] * xin - s.a[2] * y;
                *v = y;
            }
        }
    }

    /// Zero-phase filtering of one channel with odd reflection padding of
    /// `pad` samples at both ends.
    pub fn filtfilt(&self, x: &[f64], pad: usize) -> Vec<f64> {
        let n = x.len();
        assert!(n > pad, "signal shorter than padding");
        let mut ext = Vec::with_capacity(n + 2 * pad);
        for i in (1..=pad).rev() {
            ext.push(2.0 * x[0] - x[i]);
        }
        ext.extend_from_slice(x);
        for i in 1..=pad {
            ext.push(2.0 * x[n - 1] - x[n - 1 - i]);
        }
        let zi = self.step_states();
        let first = ext[0];
        self.run(&mut ext, first, &zi);
        ext.reverse();
        let first = ext[0];
        self.run(&mut ext, first, &zi);
        ext.reverse();
        ext[pad..pad + n].to_vec()
    }
}

/// Groups poles into conjugate pairs (and leftover reals into pairs).
fn pair_poles(poles: &[Complex64]) -> Vec<(Complex64, Complex64)> {
    let tol = 1e-12;
    let mut out = Vec::new();
    let mut reals = Vec::new();
    for p in poles {
        if p.im > tol {
            out.push((*p, p.conj()));
        } else if p.im.abs() <= tol {
            reals.push(Complex64::new(p.re, 0.0));
        }
    }
    reals.sort_by(|a, b| a.re.total_cmp(&b.re));
    for ch in reals.chunks(2) {
        out.push((ch[0], ch[1]));
    }
    out
}

/// Band-pass filters every channel independently with a zero-phase
/// forward-backward pass.
pub fn bandpass_filter(trial: &EegTrial, spec: &FilterSpec) -> Result<EegTrial> {
    let filter = BandPass::design(spec, trial.sample_rate)?;
    let n = trial.n_samples();
    if n < spec.min_samples() {
        return Err(Error::TooShort {
            needed: spec.min_samples(),
            got: n,
        });
    }
    let channels = trial
        .channels
        .iter()
        .map(|ch| filter.filtfilt(ch, spec.pad_len(n, trial.sample_rate)))
        .collect();
    Ok(trial.with_channels(channels))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn design() -> BandPass {
        BandPass::design(&FilterSpec::default(), 128.0).unwrap()
    }

    #[test]
    fn cutoffs_are_half_power() {
        let f = design();
        for fc in [4.0, 45.0] {
            let g = f.response(fc).norm();
            assert!((g - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9, "{fc}: {g}");
        }
    }

    #[test]
    fn passband_and_stopband_magnitudes() {
        let f = design();
        assert!((f.response(10.0).norm() - 1.0).abs() < 0.01);
        assert!(f.response(0.0).norm() < 1e-12);
        assert!(f.response(64.0).norm() < 1e-9);
        // forward-backward squares the magnitude
        assert!(f.response(1.0).norm().powi(2) < 0.1);
        assert!(f.response(60.0).norm().powi(2) < 0.1);
    }

    #[test]
    fn sections_are_stable() {
        for s in design().sections {
            // |poles| < 1 for a monic quadratic: |a2| < 1 and |a1| < 1 + a2
            assert!(s.a[2].abs() < 1.0 && s.a[1].abs() < 1.0 + s.a[2]);
        }
    }

    #[test]
    fn sixth_order_design_has_three_sections() {
        let spec = FilterSpec { order: 6, ..FilterSpec::default() };
        let f = BandPass::design(&spec, 128.0).unwrap();
        assert_eq!(f.sections.len(), 3);
        assert!((f.response(4.0).norm() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9);
    }

    #[test]
    fn invalid_specs() {
        assert!(FilterSpec { order: 3, ..FilterSpec::default() }.validate(128.0).is_err());
        assert!(FilterSpec { high_hz: 70.0, ..FilterSpec::default() }.validate(128.0).is_err());
        assert!(FilterSpec { low_hz: 0.0, ..FilterSpec::default() }.validate(128.0).is_err());
    }

    #[test]
    fn too_short_trial_rejected() {
        let trial = EegTrial::from_parts("s".into(), "t".into(), vec![vec![0.0; 20]; 14], 20.0 / 128.0).unwrap();
        assert!(matches!(bandpass_filter(&trial, &FilterSpec::default()), Err(Error::TooShort { .. })));
    }
}
