//! Results files and per-subject accuracy charts.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{EvalConfig, Modality, Pipeline};
use super::loso::LosoReport;
use crate::error::{Error, Result};
use crate::image::RgbImage;
use crate::session::manifest::Task;

pub const RESULTS_FORMAT: &str = "driveaware-results/1";

/// Accuracies published for the original recordings. They were measured on
/// human-subject data and are kept only for orientation; synthetic runs are
/// not comparable to them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PublishedReference {
    pub comparable: bool,
    pub note: String,
    pub task: Task,
    pub pipeline: Pipeline,
    pub modality: Modality,
    /// Percent, or `None` where no figure was published for this setting.
    pub accuracy: Option<f64>,
}

pub fn published_accuracy(task: Task, pipeline: Pipeline, modality: Modality) -> Option<f64> {
    match (task, pipeline, modality) {
        (Task::Attention, Pipeline::Flat, Modality::Eeg) => Some(93.33),
        (Task::Attention, Pipeline::Flat, Modality::Face) => Some(81.67),
        (Task::Attention, Pipeline::Flat, Modality::Fused) => Some(92.78),
        (Task::Hazard, Pipeline::Flat, Modality::Eeg) => Some(88.41),
        (Task::Hazard, Pipeline::Flat, Modality::Face) => Some(82.93),
        (Task::Hazard, Pipeline::Flat, Modality::Fused) => Some(90.24),
        // The trend figure was published without naming its modality.
        (Task::Hazard, Pipeline::Trend, _) => Some(96.34),
        _ => None,
    }
}

impl PublishedReference {
    pub fn for_setting(task: Task, pipeline: Pipeline, modality: Modality) -> Self {
        let mut note = "published for human-subject recordings; not comparable to this run".to_string();
        if pipeline == Pipeline::Trend {
            note.push_str("; the published trend figure does not state its modality");
        }
        Self {
            comparable: false,
            note,
            task,
            pipeline,
            modality,
            accuracy: published_accuracy(task, pipeline, modality),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub n_trials: usize,
    pub subjects: Vec<String>,
    pub dataset_seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResults {
    pub format: String,
    pub config_fingerprint: String,
    pub config: EvalConfig,
    pub dataset: DatasetSummary,
    pub embedder: String,
    pub report: LosoReport,
    pub reference: PublishedReference,
}

impl EvalResults {
    pub fn new(config: &EvalConfig, dataset: DatasetSummary, embedder: String, report: LosoReport) -> Self {
        Self {
            format: RESULTS_FORMAT.to_string(),
            config_fingerprint: config.fingerprint(),
            reference: PublishedReference::for_setting(report.task, report.pipeline, report.modality),
            config: config.clone(),
            dataset,
            embedder,
            report,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("results serialize")
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let r: Self = serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        if r.format != RESULTS_FORMAT {
            return Err(Error::Format(format!("{}: unknown results format {:?}", path.display(), r.format)));
        }
        Ok(r)
    }

    pub fn label(&self) -> String {
        format!("{}/{}/{}", self.report.task_name(), self.report.pipeline, self.report.modality)
    }
}

impl LosoReport {
    pub fn task_name(&self) -> &'static str {
        match self.task {
            Task::Attention => "attention",
            Task::Hazard => "hazard",
        }
    }
}

const CHART_HEIGHT: usize = 200;
const BAR_WIDTH: usize = 24;
const GAP: usize = 8;
const MARGIN: usize = 16;

/// Bar chart of per-subject accuracy: one bar per fold on a 0-100% axis
/// with grid lines every 25%, the chance level dashed and the mean in red.
pub fn accuracy_chart(report: &LosoReport) -> RgbImage {
    let n = report.folds.len().max(1);
    let width = 2 * MARGIN + n * BAR_WIDTH + (n - 1) * GAP;
    let height = CHART_HEIGHT + 2 * MARGIN;
    let mut img = RgbImage::filled(width, height, [255, 255, 255]);
    let row_of = |pct: f64| MARGIN + CHART_HEIGHT - ((pct.clamp(0.0, 100.0) / 100.0) * CHART_HEIGHT as f64).round() as usize;
    for q in [0.0, 25.0, 75.0, 100.0] {
        let r = row_of(q);
        for c in MARGIN..width - MARGIN {
            img.put(r, c, [210, 210, 210]);
        }
    }
    for (i, f) in report.folds.iter().enumerate() {
        let x0 = MARGIN + i * (BAR_WIDTH + GAP);
        let top = row_of(f.accuracy);
        for r in top..=row_of(0.0) {
            for c in x0..x0 + BAR_WIDTH {
                img.put(r, c, [60, 110, 180]);
            }
        }
    }
    let chance = row_of(50.0);
    for c in (MARGIN..width - MARGIN).filter(|c| (c / 4) % 2 == 0) {
        img.put(chance, c, [90, 90, 90]);
    }
    let mean = row_of(report.mean_accuracy);
    for c in MARGIN..width - MARGIN {
        img.put(mean, c, [200, 40, 40]);
    }
    img
}

/// Markdown summary of one or more results files.
pub fn markdown_summary(results: &[EvalResults]) -> String {
    let mut s = String::new();
    s.push_str("| setting | subjects | trials | excluded | mean acc. % | pooled acc. % | published % (not comparable) | config |\n");
    s.push_str("|---|---|---|---|---|---|---|---|\n");
    for r in results {
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} | {:.2} | {:.2} | {} | {} |",
            r.label(),
            r.report.n_subjects,
            r.report.n_trials,
            r.report.excluded.len(),
            r.report.mean_accuracy,
            r.report.pooled_accuracy,
            r.reference.accuracy.map_or("n/a".to_string(), |a| format!("{a:.2}")),
            &r.config_fingerprint[..12],
        );
    }
    for r in results {
        let _ = writeln!(s, "\n## {}\n", r.label());
        s.push_str("| subject | n test | correct | accuracy % |\n|---|---|---|---|\n");
        for f in &r.report.folds {
            let _ = writeln!(s, "| {} | {} | {} | {:.2} |", f.test_subject, f.n_test, f.n_correct, f.accuracy);
        }
        if !r.report.excluded.is_empty() {
            s.push_str("\nExcluded trials:\n\n");
            for e in &r.report.excluded {
                let _ = writeln!(s, "- {} ({}): {}", e.trial_id, e.subject_id, e.reason);
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::loso::FoldResult;

    fn report(accs: &[f64]) -> LosoReport {
        let folds = accs
            .iter()
            .enumerate()
            .map(|(i, &a)| FoldResult {
                test_subject: format!("s{i}"),
                n_train: 10,
                n_test: 4,
                n_correct: (a / 25.0) as usize,
                accuracy: a,
                pca_components: 3,
                seed: 0,
                train_fingerprint: String::new(),
                predictions: Vec::new(),
            })
            .collect();
        LosoReport::from_folds(Task::Attention, Modality::Eeg, Pipeline::Flat, 5, folds, Vec::new(), Vec::new())
    }

    #[test]
    fn chart_has_one_bar_per_subject() {
        let img = accuracy_chart(&report(&[100.0, 50.0, 75.0]));
        assert_eq!(img.width, 2 * MARGIN + 3 * BAR_WIDTH + 2 * GAP);
        let bottom = MARGIN + CHART_HEIGHT - 1;
        let blue = (0..img.width).filter(|&c| img.get(bottom, c) == [60, 110, 180]).count();
        assert_eq!(blue, 3 * BAR_WIDTH);
    }

    #[test]
    fn reference_is_marked_not_comparable() {
        let r = PublishedReference::for_setting(Task::Hazard, Pipeline::Trend, Modality::Face);
        assert!(!r.comparable);
        assert_eq!(r.accuracy, Some(96.34));
        assert!(r.note.contains("modality"));
    }

    #[test]
    fn summary_lists_every_subject() {
        let res = EvalResults::new(
            &EvalConfig::default(),
            DatasetSummary {
                n_trials: 12,
                subjects: vec!["s0".into(), "s1".into()],
                dataset_seed: Some(1),
            },
            "pseudo".into(),
            report(&[100.0, 50.0]),
        );
        let md = markdown_summary(&[res]);
        assert!(md.contains("| s0 | 4 | 4 | 100.00 |"));
        assert!(md.contains("| s1 | 4 | 2 | 50.00 |"));
    }
}
