//! Leave-one-subject-out evaluation of the interval-sequence pipeline.

use rayon::prelude::*;

use super::config::{EvalConfig, Pipeline};
use super::features::{modality_blocks, SequenceSet};
use super::loso::{check_fold, effective_components, fold_result, fold_seed, loso_folds, Fold, FoldResult, LosoReport};
use super::normalize::MinMaxScaler;
use crate::error::{Error, Result};
use crate::learn::{lstm_train, pca_fit, LstmModel, PcaModel, SgdmConfig};
use crate::session::manifest::Task;

/// Everything fit on the training side of one trend fold.
#[derive(Debug, Clone)]
pub struct TrendFit {
    pub raw_scaler: MinMaxScaler,
    pub pca: PcaModel,
    pub score_scaler: MinMaxScaler,
    pub model: LstmModel,
}

impl TrendFit {
    pub fn reduce(&self, steps: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        steps
            .iter()
            .map(|s| Ok(self.score_scaler.transform(&self.pca.transform(&self.raw_scaler.transform(s))?)))
            .collect()
    }

    pub fn predict(&self, steps: &[Vec<f64>]) -> Result<u8> {
        self.model.predict(&self.reduce(steps)?)
    }
}

/// Fits scaling and PCA on every interval row of the training sequences,
/// then trains the LSTM on the reduced sequences.
pub fn fit_trend(
    seqs: &[&[Vec<f64>]],
    labels: &[u8],
    k: usize,
    hidden: &[usize],
    sgdm: &SgdmConfig,
    blocks: &[usize],
) -> Result<TrendFit> {
    if labels.iter().collect::<std::collections::BTreeSet<_>>().len() < 2 {
        return Err(Error::SingleClass);
    }
    let n_steps = seqs.first().map_or(0, |s| s.len());
    if let Some(bad) = seqs.iter().find(|s| s.len() != n_steps) {
        return Err(Error::InconsistentSequenceLength {
            first: n_steps,
            other: bad.len(),
        });
    }
    let rows: Vec<Vec<f64>> = seqs.iter().flat_map(|s| s.iter().cloned()).collect();
    let raw_scaler = MinMaxScaler::fit_blocks(&rows, blocks)?;
    let scaled = raw_scaler.transform_rows(&rows);
    let pca = pca_fit(&scaled, effective_components(k, rows.len(), raw_scaler.dim()))?;
    let scores = pca.transform_rows(&scaled)?;
    let score_scaler = MinMaxScaler::fit(&scores);
    let reduced = score_scaler.transform_rows(&scores);
    let train: Vec<Vec<Vec<f64>>> = reduced.chunks(n_steps.max(1)).map(|c| c.to_vec()).collect();
    let model = LstmModel::new(pca.k(), hidden, sgdm.seed);
    let (model, _) = lstm_train(model, &train, labels, sgdm)?;
    Ok(TrendFit {
        raw_scaler,
        pca,
        score_scaler,
        model,
    })
}

fn run_trend_fold(set: &SequenceSet, fold: &Fold, cfg: &EvalConfig, fingerprint: String) -> Result<FoldResult> {
    let s = &set.sequences;
    let seqs: Vec<&[Vec<f64>]> = fold.train.iter().map(|&i| s[i].steps.as_slice()).collect();
    let labels: Vec<u8> = fold.train.iter().map(|&i| s[i].label).collect();
    let seed = fold_seed(cfg.trend.sgdm.seed, &fold.test_subject);
    let sgdm = SgdmConfig { seed, ..cfg.trend.sgdm };
    let fit = fit_trend(
        &seqs,
        &labels,
        cfg.trend.pca_components,
        &cfg.trend.hidden,
        &sgdm,
        &modality_blocks(cfg.modality),
    )?;
    let predictions = fold
        .test
        .iter()
        .map(|&i| Ok((s[i].trial_id.clone(), s[i].label, fit.predict(&s[i].steps)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(fold_result(fold, fit.pca.k(), seed, fingerprint, predictions))
}

/// Leave-one-subject-out accuracy of the sequence pipeline on `set`.
pub fn loso_evaluate_trend(set: &SequenceSet, cfg: &EvalConfig) -> Result<LosoReport> {
    let subjects: Vec<&str> = set.sequences.iter().map(|v| v.subject_id.as_str()).collect();
    let ids: Vec<&str> = set.sequences.iter().map(|v| v.trial_id.as_str()).collect();
    let folds = loso_folds(&subjects);
    if folds.len() < 2 {
        return Err(Error::Config(format!(
            "leave-one-subject-out needs at least 2 subjects, found {}",
            folds.len()
        )));
    }
    let checked = folds
        .iter()
        .map(|f| check_fold(f, &ids, &subjects))
        .collect::<Result<Vec<_>>>()?;
    let results = folds
        .par_iter()
        .zip(checked)
        .map(|(f, fp)| run_trend_fold(set, f, cfg, fp))
        .collect::<Result<Vec<_>>>()?;
    let dim = set.sequences.first().and_then(|s| s.steps.first()).map_or(0, |r| r.len());
    Ok(LosoReport::from_folds(
        Task::Hazard,
        cfg.modality,
        Pipeline::Trend,
        dim,
        results,
        set.excluded.clone(),
        Vec::new(),
    ))
}
