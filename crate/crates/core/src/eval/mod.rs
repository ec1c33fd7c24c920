//! Feature assembly, leave-one-subject-out evaluation and results files.

pub mod config;
pub mod features;
pub mod loso;
pub mod model;
pub mod normalize;
pub mod report;
pub mod trend;

pub use config::{EmbedderSpec, EvalConfig, Modality, Pipeline, TrendConfig};
pub use features::{
    assemble, assemble_attention_features, assemble_flat_features, assemble_hazard_sequences, extract_blocks,
    modality_blocks, modality_dim, Exclusion, Extractor, FeatureSet, FeatureVector, RawSequence, SequenceSet, TrialBlocks, EEG_DIM,
    FACE_DIM, FUSED_DIM,
};
pub use loso::{check_fold, fit_flat, loso_evaluate, loso_folds, train_fingerprint, FlatFit, Fold, FoldResult, LosoReport};
pub use model::{load_flat_fit, load_trend_fit, save_flat_fit, save_trend_fit, PipelineInfo};
pub use normalize::MinMaxScaler;
pub use report::{accuracy_chart, markdown_summary, DatasetSummary, EvalResults, PublishedReference};
pub use trend::{fit_trend, loso_evaluate_trend, TrendFit};

use crate::error::{Error, Result};
use crate::session::manifest::Dataset;

/// Runs the configured pipeline on `dataset` and packages the results.
pub fn evaluate(dataset: &Dataset, cfg: &EvalConfig, extractor: &Extractor, dataset_seed: Option<u64>) -> Result<EvalResults> {
    cfg.validate()?;
    let task_data = dataset.for_task(cfg.task);
    if task_data.trials.is_empty() {
        return Err(Error::Config(format!("dataset holds no {:?} trials", cfg.task)));
    }
    let report = match cfg.pipeline {
        Pipeline::Flat => {
            let set = assemble_flat_features(&task_data, cfg.task, cfg.modality, extractor);
            loso_evaluate(&set, cfg.task, cfg)?
        }
        Pipeline::Trend => {
            let set = assemble_hazard_sequences(&task_data, cfg.modality, cfg.trend.interval_s, extractor)?;
            let mut r = loso_evaluate_trend(&set, cfg)?;
            r.provenance = extractor.provenance(cfg.modality);
            r
        }
    };
    let summary = DatasetSummary {
        n_trials: task_data.trials.len(),
        subjects: task_data.subjects(),
        dataset_seed,
    };
    Ok(EvalResults::new(cfg, summary, extractor.provider_id().to_string(), report))
}
