//! Evaluation configuration and its fingerprint.
//!
//! Every field has a default, so a config file only needs the values it
//! changes. The fingerprint is the SHA-256 of the canonical JSON form
//! (object keys sorted, no whitespace).

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::embed::{EmbeddingProvider, FileEmbedder, PseudoEmbedder};
use crate::error::{Error, Result};
use crate::info::{DiscretizationSpec, PairMeasure};
use crate::learn::{ElmConfig, SgdmConfig};
use crate::preproc::{FilterSpec, DEFAULT_Z_THRESH};
use crate::session::Task;
use crate::topomap::BandSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modality {
    Eeg,
    Face,
    Fused,
}

impl Modality {
    pub const ALL: [Modality; 3] = [Modality::Eeg, Modality::Face, Modality::Fused];

    pub fn needs_eeg(self) -> bool {
        matches!(self, Modality::Eeg | Modality::Fused)
    }

    pub fn needs_face(self) -> bool {
        matches!(self, Modality::Face | Modality::Fused)
    }
}

impl std::fmt::Display for Modality {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Modality::Eeg => "eeg",
            Modality::Face => "face",
            Modality::Fused => "fused",
        })
    }
}

impl std::str::FromStr for Modality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eeg" => Ok(Modality::Eeg),
            "face" => Ok(Modality::Face),
            "fused" => Ok(Modality::Fused),
            other => Err(Error::Config(format!("unknown modality `{other}` (eeg, face, fused)"))),
        }
    }
}

/// Flat: one vector per trial, PCA then ELM. Trend: one vector per
/// interval, PCA then LSTM over the interval sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pipeline {
    Flat,
    Trend,
}

impl std::fmt::Display for Pipeline {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Pipeline::Flat => "flat",
            Pipeline::Trend => "trend",
        })
    }
}

impl std::str::FromStr for Pipeline {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "flat" => Ok(Pipeline::Flat),
            "trend" => Ok(Pipeline::Trend),
            other => Err(Error::Config(format!("unknown pipeline `{other}` (flat, trend)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EmbedderSpec {
    Pseudo { seed: u64 },
    /// One embedding file serving every trial, unless a trial's manifest
    /// entry names its own file.
    File { path: PathBuf },
}

impl Default for EmbedderSpec {
    fn default() -> Self {
        EmbedderSpec::Pseudo { seed: 0 }
    }
}

impl EmbedderSpec {
    pub fn build(&self) -> Result<Arc<dyn EmbeddingProvider>> {
        Ok(match self {
            EmbedderSpec::Pseudo { seed } => Arc::new(PseudoEmbedder::new(*seed)),
            EmbedderSpec::File { path } => Arc::new(FileEmbedder::load(path)?),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrendConfig {
    pub interval_s: f64,
    pub pca_components: usize,
    pub hidden: Vec<usize>,
    pub sgdm: SgdmConfig,
}

impl Default for TrendConfig {
    fn default() -> Self {
        Self {
            interval_s: 0.5,
            pca_components: 60,
            hidden: vec![200, 100],
            sgdm: SgdmConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub task: Task,
    pub modality: Modality,
    pub pipeline: Pipeline,
    pub filter: FilterSpec,
    pub z_thresh: f64,
    pub discretization: DiscretizationSpec,
    pub pair_measure: PairMeasure,
    pub bands: BandSpec,
    pub embedder: EmbedderSpec,
    pub pca_components: usize,
    pub elm: ElmConfig,
    pub trend: TrendConfig,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            task: Task::Attention,
            modality: Modality::Eeg,
            pipeline: Pipeline::Flat,
            filter: FilterSpec::default(),
            z_thresh: DEFAULT_Z_THRESH,
            discretization: DiscretizationSpec::default(),
            pair_measure: PairMeasure::default(),
            bands: BandSpec::default(),
            embedder: EmbedderSpec::default(),
            pca_components: 30,
            elm: ElmConfig::default(),
            trend: TrendConfig::default(),
        }
    }
}

impl EvalConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.filter.validate(crate::session::SAMPLE_RATE)?;
        self.discretization.validate()?;
        self.bands.validate(self.filter.low_hz, self.filter.high_hz)?;
        if !(self.z_thresh > 0.0) {
            return Err(Error::Config("z_thresh must be positive".into()));
        }
        if self.pca_components == 0 || self.trend.pca_components == 0 {
            return Err(Error::Config("PCA dimension must be positive".into()));
        }
        if self.trend.hidden.is_empty() || self.trend.hidden.contains(&0) {
            return Err(Error::Config("LSTM layers must be non-empty".into()));
        }
        if self.pipeline == Pipeline::Trend && self.task != Task::Hazard {
            return Err(Error::Config("the trend pipeline needs fixed-length hazard trials".into()));
        }
        self.trend.sgdm.validate()
    }

    /// Sorted-key compact JSON.
    pub fn canonical_json(&self) -> String {
        // serde_json's default map is ordered by key
        let v = serde_json::to_value(self).expect("config serializes");
        serde_json::to_string(&v).expect("value serializes")
    }

    pub fn fingerprint(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }
}
