//! Seeded synthetic sessions.
//!
//! Every random draw comes from a stream keyed by (seed, subject, trial,
//! purpose) and none depends on the label; the class enters only through
//! terms multiplied by `class_separation`, so a separation of 0 produces
//! data that is independent of the labels.
//!
//! Class signal, with `s = +1` for class 1 and `-1` for class 0:
//!
//! - occipital/parietal alpha amplitude `a0 * exp(0.35 * sep * s * r(t) + jitter)`
//! - shared-source coupling within the frontal pairs AF3/AF4, F3/F4, F7/F8,
//!   FC5/FC6: correlation `c0 + 0.1 * sep * s * r(t) + jitter`
//! - eyebrow lift relative to the eyes `4 px * sep * s * q(t)`
//!
//! In [`SignalMode::Static`] `r(t) = 1` and `q(t) = t / T`; in
//! [`SignalMode::Drift`] `r(t) = t/T - 1/2` and `q(t) = 2t/T - 1`, mean-zero
//! ramps which leave whole-trial statistics nearly class-free while the
//! temporal order carries the label. The EEG ramp is kept to half amplitude
//! so the loud end of a trial stays within the artifact threshold.

use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::eeg::{quantize, write_eeg_csv, EegTrial, SAMPLE_RATE};
use super::landmarks::{write_landmarks_csv, FaceBox, LandmarkFrame, LandmarkTrack, N_LANDMARKS};
use super::layout::{channel_index, N_CHANNELS};
use super::manifest::{Dataset, SessionManifest, Task, TrialData, TrialEntry, TrialLabel, HAZARD_DURATION_S};
use crate::error::{Error, Result};
use crate::face::scheme::{L_BROW, R_BROW, TEMPLATE};
use crate::stats::{rng_stream, str_hash};

/// Landmark frame rate.
pub const FRAME_RATE: f64 = 10.0;

/// A separation giving partially overlapping classes.
pub const SEPARATION_MID: f64 = 1.0;

/// A separation at which the generating latents are cleanly separable
/// across subjects.
pub const SEPARATION_HIGH: f64 = 4.0;

/// Fraction of landmark frames emitted as failed detections.
const INVALID_FRAME_RATE: f64 = 0.02;

const ALPHA_GAIN: f64 = 0.35;
const COUPLING_GAIN: f64 = 0.1;
const BROW_GAIN_PX: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalMode {
    #[default]
    Static,
    Drift,
}

impl std::str::FromStr for SignalMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "static" => Ok(Self::Static),
            "drift" => Ok(Self::Drift),
            other => Err(Error::Config(format!("unknown signal mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_subjects: usize,
    pub trials_per_subject: usize,
    pub task: Task,
    pub class_separation: f64,
    pub seed: u64,
    /// Fixed trial length; `None` gives 2 s hazard trials and attention
    /// trials of 14 to 105 whole seconds.
    #[serde(default)]
    pub duration_s: Option<f64>,
    #[serde(default)]
    pub signal: SignalMode,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_subjects: 12,
            trials_per_subject: 15,
            task: Task::Attention,
            class_separation: SEPARATION_HIGH,
            seed: 0,
            duration_s: None,
            signal: SignalMode::Static,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_subjects < 2 {
            return Err(Error::Config("synthetic sessions need at least 2 subjects".into()));
        }
        if self.trials_per_subject < 2 {
            return Err(Error::Config("need at least 2 trials per subject".into()));
        }
        if !(self.class_separation >= 0.0) || !self.class_separation.is_finite() {
            return Err(Error::Config("class_separation must be finite and >= 0".into()));
        }
        if let Some(d) = self.duration_s {
            if !(d >= 1.0) || (d * SAMPLE_RATE).fract() != 0.0 {
                return Err(Error::Config(format!("duration {d} s must be >= 1 and a whole number of samples")));
            }
            if self.task == Task::Hazard && d != HAZARD_DURATION_S {
                return Err(Error::Config("hazard trials last exactly 2.0 s".into()));
            }
        }
        Ok(())
    }
}

/// Per-subject variability.
#[derive(Debug, Clone)]
struct Subject {
    gains: [f64; N_CHANNELS],
    alpha_base: f64,
    alpha_freq: f64,
    coupling_base: f64,
    theta_amp: f64,
    beta_amp: f64,
    beta_freq: f64,
    face_box: FaceBox,
    shape: Vec<(f64, f64)>,
    brow_offset_px: f64,
}

impl Subject {
    fn draw(rng: &mut ChaCha8Rng) -> Self {
        let mut gains = [0.0; N_CHANNELS];
        gains.iter_mut().for_each(|g| *g = rng.random_range(0.8..1.25));
        let shape_noise = Normal::new(0.0, 0.008).expect("valid sigma");
        let w = rng.random_range(120.0..180.0);
        Self {
            gains,
            alpha_base: rng.random_range(4.0..8.0),
            alpha_freq: rng.random_range(9.0..11.0),
            coupling_base: rng.random_range(0.2..0.6),
            theta_amp: rng.random_range(2.0..4.0),
            beta_amp: rng.random_range(1.0..3.0),
            beta_freq: rng.random_range(16.0..22.0),
            face_box: FaceBox {
                x: rng.random_range(400.0..700.0),
                y: rng.random_range(60.0..140.0),
                w,
                h: w * rng.random_range(1.15..1.3),
            },
            shape: (0..N_LANDMARKS)
                .map(|_| (shape_noise.sample(rng), shape_noise.sample(rng)))
                .collect(),
            brow_offset_px: Normal::new(0.0, 2.0).expect("valid sigma").sample(rng),
        }
    }
}

/// Generating quantities of one trial, for oracle checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthLatent {
    /// Log of the trial's mean-level alpha amplitude.
    pub log_alpha: f64,
    /// Frontal coupling at the reference level.
    pub coupling: f64,
    /// Brow lift at the end of the trial, pixels.
    pub brow_end_px: f64,
}

impl SynthLatent {
    pub fn as_vec(&self) -> Vec<f64> {
        vec![self.log_alpha, self.coupling, self.brow_end_px]
    }
}

#[derive(Debug, Clone)]
pub struct SynthTrial {
    pub entry: TrialEntry,
    pub eeg: EegTrial,
    pub landmarks: LandmarkTrack,
    pub latent: SynthLatent,
}

#[derive(Debug, Clone)]
pub struct SynthSession {
    pub manifest: SessionManifest,
    pub trials: Vec<SynthTrial>,
}

impl SynthSession {
    /// The in-memory dataset; equal to what loading the written files gives.
    pub fn dataset(&self) -> Dataset {
        Dataset {
            trials: self
                .trials
                .iter()
                .map(|t| TrialData {
                    entry: t.entry.clone(),
                    eeg: t.eeg.clone(),
                    landmarks: t.landmarks.clone(),
                    embeddings: None,
                })
                .collect(),
        }
    }
}

const FRONTAL_PAIRS: [(&str, &str); 4] = [("AF3", "AF4"), ("F3", "F4"), ("F7", "F8"), ("FC5", "FC6")];
const ALPHA_WEIGHTS: [(&str, f64); 6] = [("O1", 1.0), ("O2", 1.0), ("P7", 0.6), ("P8", 0.6), ("T7", 0.2), ("T8", 0.2)];

fn ramp(mode: SignalMode, t: f64, dur: f64) -> f64 {
    match mode {
        SignalMode::Static => 1.0,
        SignalMode::Drift => t / dur - 0.5,
    }
}

fn brow_profile(mode: SignalMode, t: f64, dur: f64) -> f64 {
    match mode {
        SignalMode::Static => t / dur,
        SignalMode::Drift => 2.0 * t / dur - 1.0,
    }
}

/// Balanced labels for one subject, shuffled by a label-only stream.
fn subject_labels(cfg: &SynthConfig, subject: usize) -> Vec<u8> {
    let n = cfg.trials_per_subject;
    let ones = match cfg.task {
        Task::Hazard => n / 2,
        Task::Attention if n % 2 == 1 => n / 2 + subject % 2,
        Task::Attention => n / 2,
    };
    let mut labels: Vec<u8> = (0..n).map(|i| u8::from(i < ones)).collect();
    let mut rng = rng_stream(cfg.seed, &[str_hash("labels"), subject as u64]);
    labels.shuffle(&mut rng);
    labels
}

fn trial_duration(cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> f64 {
    match (cfg.duration_s, cfg.task) {
        (Some(d), _) => d,
        (None, Task::Hazard) => HAZARD_DURATION_S,
        (None, Task::Attention) => rng.random_range(14..=105) as f64,
    }
}

fn gen_eeg(subj: &Subject, cfg: &SynthConfig, sign: f64, dur: f64, rng: &mut ChaCha8Rng) -> (Vec<Vec<f64>>, SynthLatent) {
    let n = (dur * SAMPLE_RATE).round() as usize;
    let sep = cfg.class_separation;
    let white = Normal::new(0.0, 6.0).expect("valid sigma");
    let frontal_noise = Normal::new(0.0, 8.0).expect("valid sigma");
    let jitter = Normal::new(0.0, 1.0).expect("valid sigma");
    let two_pi = 2.0 * std::f64::consts::PI;

    let alpha_jitter = 0.1 * jitter.sample(rng);
    let alpha_phase = rng.random_range(0.0..two_pi);
    let coupling_jitter = 0.05 * jitter.sample(rng);
    let slow_phase = rng.random_range(0.0..two_pi);
    let phases: Vec<(f64, f64)> = (0..N_CHANNELS)
        .map(|_| (rng.random_range(0.0..two_pi), rng.random_range(0.0..two_pi)))
        .collect();

    let mut ch = vec![vec![0.0; n]; N_CHANNELS];
    for (c, samples) in ch.iter_mut().enumerate() {
        let (pt, pb) = phases[c];
        for (i, v) in samples.iter_mut().enumerate() {
            let t = i as f64 / SAMPLE_RATE;
            *v = white.sample(rng)
                + subj.theta_amp * (two_pi * 6.0 * t + pt).sin()
                + subj.beta_amp * (two_pi * subj.beta_freq * t + pb).sin()
                + 10.0 * (two_pi * 0.3 * t + slow_phase).sin();
        }
    }

    for (a, b) in FRONTAL_PAIRS {
        let (ia, ib) = (channel_index(a), channel_index(b));
        for i in 0..n {
            let t = i as f64 / SAMPLE_RATE;
            let rho = (subj.coupling_base + coupling_jitter + COUPLING_GAIN * sep * sign * ramp(cfg.signal, t, dur))
                .clamp(0.02, 0.95);
            let shared = frontal_noise.sample(rng);
            let (na, nb) = (frontal_noise.sample(rng), frontal_noise.sample(rng));
            // the pair model dominates the background of these channels
            ch[ia][i] = 0.25 * ch[ia][i] + rho.sqrt() * shared + (1.0 - rho).sqrt() * na;
            ch[ib][i] = 0.25 * ch[ib][i] + rho.sqrt() * shared + (1.0 - rho).sqrt() * nb;
        }
    }

    for (name, w) in ALPHA_WEIGHTS {
        let c = channel_index(name);
        for i in 0..n {
            let t = i as f64 / SAMPLE_RATE;
            let amp = subj.alpha_base * (ALPHA_GAIN * sep * sign * ramp(cfg.signal, t, dur) + alpha_jitter).exp();
            ch[c][i] += w * amp * (two_pi * subj.alpha_freq * t + alpha_phase).sin();
        }
    }

    for (c, samples) in ch.iter_mut().enumerate() {
        samples.iter_mut().for_each(|v| *v = quantize(*v * subj.gains[c]));
    }
    let latent = SynthLatent {
        log_alpha: subj.alpha_base.ln() + alpha_jitter + ALPHA_GAIN * sep * sign,
        coupling: subj.coupling_base + coupling_jitter + COUPLING_GAIN * sep * sign,
        brow_end_px: subj.brow_offset_px + BROW_GAIN_PX * sep * sign,
    };
    (ch, latent)
}

fn gen_landmarks(subj: &Subject, cfg: &SynthConfig, sign: f64, dur: f64, rng: &mut ChaCha8Rng) -> Result<LandmarkTrack> {
    let n_frames = (dur * FRAME_RATE).round() as usize;
    let point_noise = Normal::new(0.0, 0.7).expect("valid sigma");
    let box_noise = Normal::new(0.0, 1.0).expect("valid sigma");
    let mut frames = Vec::with_capacity(n_frames);
    for k in 0..n_frames {
        let t = k as f64 / FRAME_RATE;
        let invalid = rng.random::<f64>() < INVALID_FRAME_RATE;
        let b = FaceBox {
            x: subj.face_box.x + box_noise.sample(rng),
            y: subj.face_box.y + box_noise.sample(rng),
            w: subj.face_box.w,
            h: subj.face_box.h,
        };
        let lift = subj.brow_offset_px + BROW_GAIN_PX * cfg.class_separation * sign * brow_profile(cfg.signal, t, dur);
        let mut points = Vec::with_capacity(N_LANDMARKS);
        for (i, (&(u, v), &(du, dv))) in TEMPLATE.iter().zip(&subj.shape).enumerate() {
            let mut x = b.x + (u + du) * b.w + point_noise.sample(rng);
            let mut y = b.y + (v + dv) * b.h + point_noise.sample(rng);
            if R_BROW.contains(&i) || L_BROW.contains(&i) {
                y -= lift;
            }
            x = quantize(x);
            y = quantize(y);
            points.push((x, y));
        }
        frames.push(LandmarkFrame {
            timestamp_s: quantize(t),
            face_box: FaceBox {
                x: quantize(b.x),
                y: quantize(b.y),
                w: quantize(b.w),
                h: quantize(b.h),
            },
            points: if invalid { Vec::new() } else { points },
            valid: !invalid,
        });
    }
    LandmarkTrack::new(frames)
}

fn task_letter(task: Task) -> char {
    match task {
        Task::Attention => 'a',
        Task::Hazard => 'h',
    }
}

/// Generates a session in memory. Manifest paths point at the locations
/// [`synth_dataset`] writes to.
pub fn synth_session(cfg: &SynthConfig) -> Result<SynthSession> {
    cfg.validate()?;
    let subjects: Vec<String> = (0..cfg.n_subjects).map(|s| format!("s{:02}", s + 1)).collect();
    let mut trials = Vec::with_capacity(cfg.n_subjects * cfg.trials_per_subject);
    for (si, sid) in subjects.iter().enumerate() {
        let mut srng = rng_stream(cfg.seed, &[str_hash("subject"), si as u64]);
        let subj = Subject::draw(&mut srng);
        let labels = subject_labels(cfg, si);
        for (ti, &class) in labels.iter().enumerate() {
            let tid = format!("{sid}_{}{:02}", task_letter(cfg.task), ti + 1);
            let mut rng = rng_stream(cfg.seed, &[str_hash("trial"), si as u64, ti as u64]);
            let dur = trial_duration(cfg, &mut rng);
            let sign = if class == 1 { 1.0 } else { -1.0 };
            let (channels, latent) = gen_eeg(&subj, cfg, sign, dur, &mut rng);
            let mut lrng = rng_stream(cfg.seed, &[str_hash("landmarks"), si as u64, ti as u64]);
            let landmarks = gen_landmarks(&subj, cfg, sign, dur, &mut lrng)?;
            let entry = TrialEntry {
                subject_id: sid.clone(),
                trial_id: tid.clone(),
                eeg_path: PathBuf::from(format!("eeg/{tid}.csv")),
                landmarks_path: PathBuf::from(format!("landmarks/{tid}.csv")),
                embeddings_path: None,
                label: TrialLabel::new(cfg.task, class),
                duration_s: dur,
            };
            let eeg = EegTrial::new(sid.clone(), tid, channels, dur)?;
            trials.push(SynthTrial {
                entry,
                eeg,
                landmarks,
                latent,
            });
        }
    }
    let manifest = SessionManifest {
        base_dir: PathBuf::new(),
        subjects,
        trials: trials.iter().map(|t| t.entry.clone()).collect(),
        dataset_seed: Some(cfg.seed),
    };
    manifest.validate_structure()?;
    Ok(SynthSession { manifest, trials })
}

/// Generates a session and writes `manifest.json`, `eeg/<trial>.csv` and
/// `landmarks/<trial>.csv` under `out_dir`.
pub fn synth_dataset(cfg: &SynthConfig, out_dir: &Path) -> Result<SessionManifest> {
    let mut session = synth_session(cfg)?;
    for sub in ["eeg", "landmarks"] {
        let d = out_dir.join(sub);
        std::fs::create_dir_all(&d).map_err(|e| Error::io(&d, e))?;
    }
    for t in &session.trials {
        write_eeg_csv(&out_dir.join(&t.entry.eeg_path), &t.eeg)?;
        write_landmarks_csv(&out_dir.join(&t.entry.landmarks_path), &t.landmarks)?;
    }
    session.manifest.base_dir = out_dir.to_path_buf();
    session.manifest.write(&out_dir.join("manifest.json"))?;
    Ok(session.manifest)
}
