//! Per-trial feature blocks and their assembly into flat vectors and
//! per-interval sequences.
//!
//! Block layouts:
//!
//! - EEG (4187): 91 pairwise channel features, then the 4096-dim embedding
//!   of the trial's scalp topomap.
//! - Face (12378): 90 landmark-geometry statistics (catalog-major: mean,
//!   p95, std per entry), then the 3 x 4096 embedding statistics of the face
//!   crops (all means, all p95s, all stds).
//! - Fused: EEG block followed by face block.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{EvalConfig, Modality};
use crate::embed::{embedding_statistics, render_face_crop, EmbeddingProvider, EMBEDDING_DIM};
use crate::error::{Error, Result};
use crate::face::{self, CATALOG_VERSION, N_TRIAL_FEATURES};
use crate::image::RgbImage;
use crate::info::{pairwise_features, N_PAIRS};
use crate::preproc::{bandpass_filter, reject_artifacts, segment_clean, CleanTrial};
use crate::session::landmarks::LandmarkFrame;
use crate::session::layout::ChannelLayout;
use crate::session::manifest::{Dataset, Task, TrialData, HAZARD_DURATION_S};
use crate::topomap::{band_power_map, scalp_image, segment_len_for, ScalpImage, ScalpInterpolator, Welch};

pub const EEG_DIM: usize = N_PAIRS + EMBEDDING_DIM;
pub const FACE_DIM: usize = N_TRIAL_FEATURES + 3 * EMBEDDING_DIM;
pub const FUSED_DIM: usize = EEG_DIM + FACE_DIM;

pub fn modality_dim(m: Modality) -> usize {
    match m {
        Modality::Eeg => EEG_DIM,
        Modality::Face => FACE_DIM,
        Modality::Fused => FUSED_DIM,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub trial_id: String,
    pub subject_id: String,
    pub label: u8,
    pub modality: Modality,
    pub values: Vec<f64>,
    /// (module, version) pairs describing how the values were produced.
    pub provenance: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Exclusion {
    pub trial_id: String,
    pub subject_id: String,
    pub modality: Modality,
    pub reason: String,
}

/// Flat vectors of one modality plus the trials that had to be dropped.
#[derive(Debug, Clone, Default)]
pub struct FeatureSet {
    pub vectors: Vec<FeatureVector>,
    pub excluded: Vec<Exclusion>,
}

/// Interval feature rows of one trial before any reduction.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSequence {
    pub trial_id: String,
    pub subject_id: String,
    pub label: u8,
    pub steps: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Default)]
pub struct SequenceSet {
    pub sequences: Vec<RawSequence>,
    pub excluded: Vec<Exclusion>,
    pub interval_s: f64,
}

/// Shared state for feature extraction: the scalp interpolator and the
/// embedding provider.
pub struct Extractor {
    cfg: EvalConfig,
    interp: ScalpInterpolator,
    provider: Arc<dyn EmbeddingProvider>,
}

impl std::fmt::Debug for Extractor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Extractor")
            .field("provider", &self.provider.provider_id())
            .finish()
    }
}

impl Extractor {
    pub fn new(cfg: &EvalConfig) -> Result<Self> {
        Self::with_provider(cfg, cfg.embedder.build()?)
    }

    pub fn with_provider(cfg: &EvalConfig, provider: Arc<dyn EmbeddingProvider>) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg: cfg.clone(),
            interp: ScalpInterpolator::new(&ChannelLayout::standard())?,
            provider,
        })
    }

    pub fn provider_id(&self) -> &str {
        self.provider.provider_id()
    }

    fn provider_for<'a>(&'a self, trial: &'a TrialData) -> &'a dyn EmbeddingProvider {
        match &trial.embeddings {
            Some(fe) => fe.as_ref(),
            None => self.provider.as_ref(),
        }
    }

    pub fn provenance(&self, modality: Modality) -> Vec<(String, String)> {
        let mut p = Vec::new();
        if modality.needs_eeg() {
            p.push((
                "mi-features".to_string(),
                format!(
                    "equal-width/{}-bins/{}",
                    self.cfg.discretization.n_bins,
                    serde_json::to_value(self.cfg.pair_measure).expect("enum serializes").as_str().unwrap_or("")
                ),
            ));
            p.push(("psd-topomap".to_string(), "welch-hann-50/tps-224/joint-max".to_string()));
        }
        if modality.needs_face() {
            p.push(("face-geometry".to_string(), CATALOG_VERSION.to_string()));
        }
        p.push(("embeddings".to_string(), self.provider.provider_id().to_string()));
        p
    }

    pub fn clean(&self, trial: &TrialData) -> Result<CleanTrial> {
        let filtered = bandpass_filter(&trial.eeg, &self.cfg.filter)?;
        reject_artifacts(&filtered, self.cfg.z_thresh)
    }

    pub fn topomap(&self, clean: &CleanTrial) -> Result<ScalpImage> {
        let welch = Welch::new(segment_len_for(clean.trial.n_samples(), clean.trial.sample_rate), clean.trial.sample_rate)?;
        let map = band_power_map(clean, &self.cfg.bands, &welch)?;
        scalp_image(&map, &self.interp)
    }

    /// Topomap of a whole trial, as rendered for inspection.
    pub fn trial_topomap(&self, trial: &TrialData) -> Result<ScalpImage> {
        self.topomap(&self.clean(trial)?)
    }

    fn eeg_block_clean(&self, clean: &CleanTrial, key: &str, provider: &dyn EmbeddingProvider) -> Result<Vec<f64>> {
        let mut v = pairwise_features(clean, &self.cfg.discretization, self.cfg.pair_measure)?.values;
        let img = self.topomap(clean)?;
        v.extend(provider.embed_keyed(&img, key)?.into_iter().map(f64::from));
        Ok(v)
    }

    pub fn eeg_block(&self, trial: &TrialData) -> Result<Vec<f64>> {
        let clean = self.clean(trial)?;
        self.eeg_block_clean(&clean, &format!("{}/topomap", trial.entry.trial_id), self.provider_for(trial))
    }

    fn face_block_frames(
        &self,
        trial_id: &str,
        frames: &[(usize, &LandmarkFrame)],
        provider: &dyn EmbeddingProvider,
    ) -> Result<Vec<f64>> {
        let usable: Vec<(usize, &LandmarkFrame)> = frames.iter().copied().filter(|(_, f)| f.is_usable()).collect();
        let rows: Vec<[f64; face::N_GEOMETRY]> = usable.iter().filter_map(|(_, f)| face::frame_features(f)).collect();
        let geometry = face::trial_statistics(&rows).map_err(|_| Error::FeatureMissing {
            trial_id: trial_id.to_string(),
            reason: format!("{} usable face frames, need 2", rows.len()),
        })?;
        let embeddings = usable
            .iter()
            .map(|(i, f)| {
                let crop = render_face_crop(f).expect("usable frame renders");
                provider.embed_keyed(&crop, &format!("{trial_id}/face/{i}"))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut v = geometry.values;
        v.extend(embedding_statistics(&embeddings)?);
        Ok(v)
    }

    pub fn face_block(&self, trial: &TrialData) -> Result<Vec<f64>> {
        let frames: Vec<(usize, &LandmarkFrame)> = trial.landmarks.frames.iter().enumerate().collect();
        self.face_block_frames(&trial.entry.trial_id, &frames, self.provider_for(trial))
    }

    /// Usable face crops of a trial with their lookup keys, for export to
    /// external embedding tools.
    pub fn face_crops(&self, trial: &TrialData) -> Vec<(RgbImage, String)> {
        trial
            .landmarks
            .frames
            .iter()
            .enumerate()
            .filter_map(|(i, f)| render_face_crop(f).map(|img| (img, format!("{}/face/{i}", trial.entry.trial_id))))
            .collect()
    }

    /// Every image the pipeline would embed for a trial (whole-trial
    /// topomap, face crops and, for hazard trials, interval topomaps) with
    /// lookup keys.
    pub fn trial_images(&self, trial: &TrialData, interval_s: Option<f64>) -> Result<Vec<(RgbImage, String)>> {
        let clean = self.clean(trial)?;
        let mut out = vec![(self.topomap(&clean)?, format!("{}/topomap", trial.entry.trial_id))];
        if let Some(iv) = interval_s {
            for (k, seg) in segment_clean(&clean, iv)?.iter().enumerate() {
                if let Ok(img) = self.topomap(seg) {
                    out.push((img, format!("{}#{k}/topomap", trial.entry.trial_id)));
                }
            }
        }
        out.extend(self.face_crops(trial));
        Ok(out)
    }

    /// Interval feature rows of one trial for the requested modality.
    pub fn interval_rows(&self, trial: &TrialData, modality: Modality, interval_s: f64) -> Result<Vec<Vec<f64>>> {
        let provider = self.provider_for(trial);
        let id = &trial.entry.trial_id;
        let eeg_rows = if modality.needs_eeg() {
            let clean = self.clean(trial)?;
            let segs = segment_clean(&clean, interval_s)?;
            Some(
                segs.iter()
                    .enumerate()
                    .map(|(k, s)| self.eeg_block_clean(s, &format!("{id}#{k}/topomap"), provider))
                    .collect::<Result<Vec<_>>>()?,
            )
        } else {
            None
        };
        let n_steps = crate::preproc::segment::samples_per_interval(trial.eeg.n_samples(), trial.eeg.sample_rate, interval_s)
            .map(|per| trial.eeg.n_samples() / per)?;
        let face_rows = if modality.needs_face() {
            let mut rows = Vec::with_capacity(n_steps);
            for k in 0..n_steps {
                let (lo, hi) = (k as f64 * interval_s, (k + 1) as f64 * interval_s);
                let frames: Vec<(usize, &LandmarkFrame)> = trial
                    .landmarks
                    .frames
                    .iter()
                    .enumerate()
                    .filter(|(_, f)| f.timestamp_s >= lo && f.timestamp_s < hi)
                    .collect();
                rows.push(self.face_block_frames(id, &frames, provider)?);
            }
            Some(rows)
        } else {
            None
        };
        Ok(match (eeg_rows, face_rows) {
            (Some(e), None) => e,
            (None, Some(f)) => f,
            (Some(e), Some(f)) => e.into_iter().zip(f).map(|(mut a, b)| {
                a.extend(b);
                a
            }).collect(),
            (None, None) => unreachable!("every modality needs a block"),
        })
    }
}

/// Widths of the feature blocks making up a vector of `m`.
pub fn modality_blocks(m: Modality) -> Vec<usize> {
    let eeg = [N_PAIRS, EMBEDDING_DIM];
    let face = [N_TRIAL_FEATURES, 3 * EMBEDDING_DIM];
    match m {
        Modality::Eeg => eeg.to_vec(),
        Modality::Face => face.to_vec(),
        Modality::Fused => [eeg, face].concat(),
    }
}

/// Both blocks of one trial, each either values or the reason it failed.
#[derive(Debug, Clone)]
pub struct TrialBlocks {
    pub trial_id: String,
    pub subject_id: String,
    pub label: u8,
    pub eeg: Option<std::result::Result<Vec<f64>, String>>,
    pub face: Option<std::result::Result<Vec<f64>, String>>,
}

/// Extracts the blocks `modality` needs for every trial, in dataset order.
pub fn extract_blocks(dataset: &Dataset, modality: Modality, ex: &Extractor) -> Vec<TrialBlocks> {
    dataset
        .trials
        .par_iter()
        .map(|t| TrialBlocks {
            trial_id: t.entry.trial_id.clone(),
            subject_id: t.entry.subject_id.clone(),
            label: t.entry.label.class,
            eeg: modality.needs_eeg().then(|| ex.eeg_block(t).map_err(|e| e.to_string())),
            face: modality.needs_face().then(|| ex.face_block(t).map_err(|e| e.to_string())),
        })
        .collect()
}

/// Builds vectors of `modality` from extracted blocks. A trial missing any
/// required block is excluded and listed with the reason.
pub fn assemble(blocks: &[TrialBlocks], modality: Modality, provenance: &[(String, String)]) -> FeatureSet {
    let mut set = FeatureSet::default();
    for b in blocks {
        let mut values = Vec::with_capacity(modality_dim(modality));
        let mut reasons = Vec::new();
        for (needed, block, name) in [
            (modality.needs_eeg(), &b.eeg, "eeg"),
            (modality.needs_face(), &b.face, "face"),
        ] {
            if !needed {
                continue;
            }
            match block {
                Some(Ok(v)) => values.extend_from_slice(v),
                Some(Err(e)) => reasons.push(format!("{name}: {e}")),
                None => reasons.push(format!("{name}: block not extracted")),
            }
        }
        if reasons.is_empty() {
            debug_assert_eq!(values.len(), modality_dim(modality));
            set.vectors.push(FeatureVector {
                trial_id: b.trial_id.clone(),
                subject_id: b.subject_id.clone(),
                label: b.label,
                modality,
                values,
                provenance: provenance.to_vec(),
            });
        } else {
            set.excluded.push(Exclusion {
                trial_id: b.trial_id.clone(),
                subject_id: b.subject_id.clone(),
                modality,
                reason: reasons.join("; "),
            });
        }
    }
    set
}

/// Flat per-trial vectors for every trial of `task`.
pub fn assemble_flat_features(dataset: &Dataset, task: Task, modality: Modality, ex: &Extractor) -> FeatureSet {
    let blocks = extract_blocks(&dataset.for_task(task), modality, ex);
    assemble(&blocks, modality, &ex.provenance(modality))
}

pub fn assemble_attention_features(dataset: &Dataset, modality: Modality, ex: &Extractor) -> FeatureSet {
    assemble_flat_features(dataset, Task::Attention, modality, ex)
}

/// Per-interval rows for every hazard trial. Trials whose intervals cannot
/// all be extracted are excluded.
pub fn assemble_hazard_sequences(
    dataset: &Dataset,
    modality: Modality,
    interval_s: f64,
    ex: &Extractor,
) -> Result<SequenceSet> {
    let hazard = dataset.for_task(Task::Hazard);
    if let Some(t) = hazard.trials.iter().find(|t| t.entry.duration_s != HAZARD_DURATION_S) {
        return Err(Error::manifest(&t.entry.trial_id, "duration_s", "hazard trials must last 2.0 s"));
    }
    crate::preproc::segment::samples_per_interval(
        crate::session::eeg::expected_samples(HAZARD_DURATION_S),
        crate::session::SAMPLE_RATE,
        interval_s,
    )?;
    let results: Vec<(usize, Result<Vec<Vec<f64>>>)> = hazard
        .trials
        .par_iter()
        .enumerate()
        .map(|(i, t)| (i, ex.interval_rows(t, modality, interval_s)))
        .collect();
    let mut set = SequenceSet {
        interval_s,
        ..SequenceSet::default()
    };
    for (i, r) in results {
        let t = &hazard.trials[i];
        match r {
            Ok(steps) => set.sequences.push(RawSequence {
                trial_id: t.entry.trial_id.clone(),
                subject_id: t.entry.subject_id.clone(),
                label: t.entry.label.class,
                steps,
            }),
            Err(e) => set.excluded.push(Exclusion {
                trial_id: t.entry.trial_id.clone(),
                subject_id: t.entry.subject_id.clone(),
                modality,
                reason: e.to_string(),
            }),
        }
    }
    Ok(set)
}
