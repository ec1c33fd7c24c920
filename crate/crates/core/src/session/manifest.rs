//! Dataset manifest: a JSON document listing subjects and trials with
//! their labels and file paths (relative to the manifest's directory).
//!
//! See `docs/formats.md` for the schema.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::embed::FileEmbedder;
use crate::error::{Error, Result};
use crate::session::eeg::{read_eeg_csv, EegTrial, SAMPLE_RATE};
use crate::session::landmarks::{read_landmarks_csv, LandmarkTrack};

pub const MANIFEST_FORMAT: &str = "driveaware-manifest/1";

/// Fixed length of hazard incidents.
pub const HAZARD_DURATION_S: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Attention,
    Hazard,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Attention => "attention",
            Task::Hazard => "hazard",
        })
    }
}

impl std::str::FromStr for Task {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "attention" => Ok(Task::Attention),
            "hazard" => Ok(Task::Hazard),
            other => Err(Error::Config(format!("unknown task `{other}`"))),
        }
    }
}

impl Task {
    /// Value names for class 0 and class 1.
    pub fn class_names(self) -> [&'static str; 2] {
        match self {
            Task::Attention => ["low", "high"],
            Task::Hazard => ["non_hazardous", "hazardous"],
        }
    }
}

/// A binary label bound to its task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawLabel", into = "RawLabel")]
pub struct TrialLabel {
    pub task: Task,
    /// 0 = low attention / non-hazardous, 1 = high attention / hazardous.
    pub class: u8,
}

impl TrialLabel {
    pub fn new(task: Task, class: u8) -> Self {
        assert!(class < 2);
        Self { task, class }
    }

    pub fn value_name(&self) -> &'static str {
        self.task.class_names()[self.class as usize]
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawLabel {
    task: Task,
    value: String,
}

impl TryFrom<RawLabel> for TrialLabel {
    type Error = String;
    fn try_from(raw: RawLabel) -> std::result::Result<Self, String> {
        let names = raw.task.class_names();
        match names.iter().position(|n| *n == raw.value) {
            Some(class) => Ok(TrialLabel {
                task: raw.task,
                class: class as u8,
            }),
            None => Err(format!(
                "label value `{}` is not valid for task `{}` (expected one of {:?})",
                raw.value, raw.task, names
            )),
        }
    }
}

impl From<TrialLabel> for RawLabel {
    fn from(l: TrialLabel) -> Self {
        RawLabel {
            task: l.task,
            value: l.value_name().to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialEntry {
    pub subject_id: String,
    pub trial_id: String,
    pub eeg_path: PathBuf,
    pub landmarks_path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embeddings_path: Option<PathBuf>,
    pub label: TrialLabel,
    pub duration_s: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawManifest {
    format: String,
    sample_rate_hz: f64,
    #[serde(default)]
    dataset_seed: Option<u64>,
    subjects: Vec<String>,
    trials: Vec<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionManifest {
    /// Directory the relative paths resolve against.
    pub base_dir: PathBuf,
    pub subjects: Vec<String>,
    pub trials: Vec<TrialEntry>,
    pub dataset_seed: Option<u64>,
}

/// Parsed content of one trial's files.
#[derive(Debug, Clone)]
pub struct TrialData {
    pub entry: TrialEntry,
    pub eeg: EegTrial,
    pub landmarks: LandmarkTrack,
    pub embeddings: Option<std::sync::Arc<FileEmbedder>>,
}

/// All trials of a session, loaded into memory.
#[derive(Debug, Clone, Default)]
pub struct Dataset {
    pub trials: Vec<TrialData>,
}

impl Dataset {
    pub fn subjects(&self) -> Vec<String> {
        let set: BTreeSet<&str> = self.trials.iter().map(|t| t.entry.subject_id.as_str()).collect();
        set.into_iter().map(String::from).collect()
    }

    pub fn for_task(&self, task: Task) -> Dataset {
        Dataset {
            trials: self
                .trials
                .iter()
                .filter(|t| t.entry.label.task == task)
                .cloned()
                .collect(),
        }
    }
}

impl SessionManifest {
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    /// Trials per subject, in subject-list order.
    pub fn per_subject_counts(&self) -> BTreeMap<String, usize> {
        let mut m: BTreeMap<String, usize> = self.subjects.iter().map(|s| (s.clone(), 0)).collect();
        for t in &self.trials {
            *m.entry(t.subject_id.clone()).or_default() += 1;
        }
        m
    }

    pub fn tasks(&self) -> BTreeSet<Task> {
        self.trials.iter().map(|t| t.label.task).collect()
    }

    pub fn to_json(&self) -> String {
        let raw = RawManifest {
            format: MANIFEST_FORMAT.to_string(),
            sample_rate_hz: SAMPLE_RATE,
            dataset_seed: self.dataset_seed,
            subjects: self.subjects.clone(),
            trials: self
                .trials
                .iter()
                .map(|t| serde_json::to_value(t).expect("trial entry serializes"))
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&raw).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    /// Checks structural invariants that do not need file access.
    pub fn validate_structure(&self) -> Result<()> {
        if self.subjects.is_empty() {
            return Err(Error::manifest("-", "subjects", "subject list is empty"));
        }
        let mut subjects = BTreeSet::new();
        for s in &self.subjects {
            if s.is_empty() {
                return Err(Error::manifest("-", "subjects", "empty subject id"));
            }
            if !subjects.insert(s.as_str()) {
                return Err(Error::manifest("-", "subjects", format!("duplicate subject `{s}`")));
            }
        }
        let mut ids = BTreeSet::new();
        for t in &self.trials {
            if t.trial_id.is_empty() {
                return Err(Error::manifest("-", "trial_id", "empty trial id"));
            }
            if !ids.insert(t.trial_id.as_str()) {
                return Err(Error::manifest(&t.trial_id, "trial_id", "duplicate trial id"));
            }
            if t.subject_id.is_empty() || !subjects.contains(t.subject_id.as_str()) {
                return Err(Error::manifest(
                    &t.trial_id,
                    "subject_id",
                    format!("subject `{}` is not declared", t.subject_id),
                ));
            }
            if !(t.duration_s >= 1.0) || !t.duration_s.is_finite() {
                return Err(Error::manifest(&t.trial_id, "duration_s", "duration must be >= 1 s"));
            }
            if t.label.task == Task::Hazard && t.duration_s != HAZARD_DURATION_S {
                return Err(Error::manifest(
                    &t.trial_id,
                    "duration_s",
                    format!("hazard trials must last exactly 2.0 s, got {}", t.duration_s),
                ));
            }
        }
        Ok(())
    }
}

fn parse_manifest(path: &Path) -> Result<SessionManifest> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let raw: RawManifest =
        serde_json::from_str(&text).map_err(|e| Error::manifest("-", "-", format!("schema violation: {e}")))?;
    if raw.format != MANIFEST_FORMAT {
        return Err(Error::manifest(
            "-",
            "format",
            format!("expected `{MANIFEST_FORMAT}`, got `{}`", raw.format),
        ));
    }
    if raw.sample_rate_hz != SAMPLE_RATE {
        return Err(Error::manifest(
            "-",
            "sample_rate_hz",
            format!("sample rate must be {SAMPLE_RATE}, got {}", raw.sample_rate_hz),
        ));
    }
    let mut trials = Vec::with_capacity(raw.trials.len());
    for (i, v) in raw.trials.into_iter().enumerate() {
        let id = v
            .get("trial_id")
            .and_then(|x| x.as_str())
            .map(String::from)
            .unwrap_or_else(|| format!("#{i}"));
        let entry: TrialEntry = serde_json::from_value(v).map_err(|e| {
            let msg = e.to_string();
            Error::manifest(id.clone(), field_of_serde_error(&msg), msg)
        })?;
        trials.push(entry);
    }
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(SessionManifest {
        base_dir,
        subjects: raw.subjects,
        trials,
        dataset_seed: raw.dataset_seed,
    })
}

// serde_json reports e.g. "missing field `eeg_path`"; label conversion
// failures come from `TrialLabel::try_from`.
fn field_of_serde_error(msg: &str) -> String {
    if msg.contains("label value") {
        return "label".into();
    }
    if let Some(rest) = msg.split_once("field `").map(|(_, r)| r) {
        if let Some((name, _)) = rest.split_once('`') {
            return name.to_string();
        }
    }
    "-".into()
}

/// Loads the manifest and every referenced file, validating all invariants.
pub fn load_session(path: &Path) -> Result<(SessionManifest, Dataset)> {
    let manifest = parse_manifest(path)?;
    manifest.validate_structure()?;
    let mut trials = Vec::with_capacity(manifest.trials.len());
    for entry in &manifest.trials {
        trials.push(load_trial_data(&manifest, entry)?);
    }
    Ok((manifest, Dataset { trials }))
}

/// Loads and fully validates a manifest (all referenced files are parsed).
pub fn load_manifest(path: &Path) -> Result<SessionManifest> {
    load_session(path).map(|(m, _)| m)
}

fn file_field(manifest: &SessionManifest, entry: &TrialEntry, field: &str, p: &Path) -> Result<PathBuf> {
    let full = manifest.resolve(p);
    if !full.is_file() {
        return Err(Error::manifest(
            &entry.trial_id,
            field,
            format!("file not found: {}", full.display()),
        ));
    }
    Ok(full)
}

/// Reads the EEG file of one manifest entry.
pub fn load_eeg_trial(manifest: &SessionManifest, entry: &TrialEntry) -> Result<EegTrial> {
    let p = file_field(manifest, entry, "eeg_path", &entry.eeg_path)?;
    read_eeg_csv(&p, &entry.subject_id, &entry.trial_id, entry.duration_s)
        .map_err(|e| Error::manifest(&entry.trial_id, "eeg_path", e.to_string()))
}

fn load_trial_data(manifest: &SessionManifest, entry: &TrialEntry) -> Result<TrialData> {
    let eeg = load_eeg_trial(manifest, entry)?;
    let lp = file_field(manifest, entry, "landmarks_path", &entry.landmarks_path)?;
    let landmarks =
        read_landmarks_csv(&lp).map_err(|e| Error::manifest(&entry.trial_id, "landmarks_path", e.to_string()))?;
    let embeddings = match &entry.embeddings_path {
        Some(p) => {
            let ep = file_field(manifest, entry, "embeddings_path", p)?;
            let emb = FileEmbedder::load(&ep)
                .map_err(|e| Error::manifest(&entry.trial_id, "embeddings_path", e.to_string()))?;
            Some(std::sync::Arc::new(emb))
        }
        None => None,
    };
    Ok(TrialData {
        entry: entry.clone(),
        eeg,
        landmarks,
        embeddings,
    })
}
