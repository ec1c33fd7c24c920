//! Leave-one-subject-out evaluation of the flat per-trial pipeline.

use std::collections::BTreeSet;

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{EvalConfig, Modality, Pipeline};
use super::features::{modality_blocks, Exclusion, FeatureSet};
use super::normalize::MinMaxScaler;
use crate::error::{Error, Result};
use crate::learn::{elm_train, pca_fit, ElmConfig};
use crate::session::manifest::Task;
use crate::stats::{rng_stream, str_hash};

/// Train/test split holding out one subject. Indices refer to the sample
/// list the folds were built from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub test_subject: String,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// One fold per subject, in sorted subject order.
pub fn loso_folds<S: AsRef<str>>(subjects: &[S]) -> Vec<Fold> {
    let unique: BTreeSet<&str> = subjects.iter().map(|s| s.as_ref()).collect();
    unique
        .into_iter()
        .map(|held| {
            let (test, train): (Vec<usize>, Vec<usize>) =
                (0..subjects.len()).partition(|&i| subjects[i].as_ref() == held);
            Fold {
                test_subject: held.to_string(),
                train,
                test,
            }
        })
        .collect()
}

/// SHA-256 over the sorted training trial ids.
pub fn train_fingerprint<S: AsRef<str>>(ids: &[S]) -> String {
    let mut sorted: Vec<&str> = ids.iter().map(|s| s.as_ref()).collect();
    sorted.sort_unstable();
    let mut h = Sha256::new();
    for id in sorted {
        h.update(id.as_bytes());
        h.update(b"\n");
    }
    hex::encode(h.finalize())
}

/// Refuses a fold whose training side shares a subject or a trial with its
/// test side. Returns the fingerprint of the training trial ids.
pub fn check_fold<S: AsRef<str>, T: AsRef<str>>(fold: &Fold, trial_ids: &[S], subjects: &[T]) -> Result<String> {
    let test_subjects: BTreeSet<&str> = fold.test.iter().map(|&i| subjects[i].as_ref()).collect();
    let test_ids: BTreeSet<&str> = fold.test.iter().map(|&i| trial_ids[i].as_ref()).collect();
    if test_subjects.len() != 1 || !test_subjects.contains(fold.test_subject.as_str()) {
        return Err(Error::Leakage {
            subject: fold.test_subject.clone(),
            detail: format!("test side holds subjects {test_subjects:?}"),
        });
    }
    for &i in &fold.train {
        let (s, id) = (subjects[i].as_ref(), trial_ids[i].as_ref());
        if test_subjects.contains(s) {
            return Err(Error::Leakage {
                subject: fold.test_subject.clone(),
                detail: format!("training trial {id} belongs to the held-out subject"),
            });
        }
        if test_ids.contains(id) {
            return Err(Error::Leakage {
                subject: fold.test_subject.clone(),
                detail: format!("trial {id} is on both sides"),
            });
        }
    }
    let train_ids: Vec<&str> = fold.train.iter().map(|&i| trial_ids[i].as_ref()).collect();
    Ok(train_fingerprint(&train_ids))
}

/// Seed for the learner of one fold, derived from the base seed and the
/// held-out subject.
pub fn fold_seed(base: u64, subject: &str) -> u64 {
    rng_stream(base, &[str_hash("fold"), str_hash(subject)]).next_u64()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub test_subject: String,
    pub n_train: usize,
    pub n_test: usize,
    pub n_correct: usize,
    pub accuracy: f64,
    pub pca_components: usize,
    pub seed: u64,
    pub train_fingerprint: String,
    /// (trial id, true label, predicted label) for every test trial.
    pub predictions: Vec<(String, u8, u8)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LosoReport {
    pub task: Task,
    pub modality: Modality,
    pub pipeline: Pipeline,
    pub feature_dim: usize,
    pub n_subjects: usize,
    pub n_trials: usize,
    /// Mean of per-subject accuracies, in percent.
    pub mean_accuracy: f64,
    /// Correct test trials over all test trials, in percent.
    pub pooled_accuracy: f64,
    pub folds: Vec<FoldResult>,
    pub excluded: Vec<Exclusion>,
    pub provenance: Vec<(String, String)>,
}

impl LosoReport {
    pub fn from_folds(
        task: Task,
        modality: Modality,
        pipeline: Pipeline,
        feature_dim: usize,
        folds: Vec<FoldResult>,
        excluded: Vec<Exclusion>,
        provenance: Vec<(String, String)>,
    ) -> Self {
        let n_trials: usize = folds.iter().map(|f| f.n_test).sum();
        let n_correct: usize = folds.iter().map(|f| f.n_correct).sum();
        let mean = if folds.is_empty() {
            0.0
        } else {
            folds.iter().map(|f| f.accuracy).sum::<f64>() / folds.len() as f64
        };
        Self {
            task,
            modality,
            pipeline,
            feature_dim,
            n_subjects: folds.len(),
            n_trials,
            mean_accuracy: mean,
            pooled_accuracy: if n_trials == 0 { 0.0 } else { 100.0 * n_correct as f64 / n_trials as f64 },
            folds,
            excluded,
            provenance,
        }
    }
}

/// Everything fit on the training side of one flat fold.
#[derive(Debug, Clone)]
pub struct FlatFit {
    pub raw_scaler: MinMaxScaler,
    pub pca: crate::learn::PcaModel,
    pub score_scaler: MinMaxScaler,
    pub elm: crate::learn::ElmModel,
}

impl FlatFit {
    pub fn reduce(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.score_scaler.transform(&self.pca.transform(&self.raw_scaler.transform(x))?))
    }

    pub fn predict(&self, x: &[f64]) -> Result<u8> {
        Ok(self.elm.predict(&self.reduce(x)?)?.0)
    }
}

/// Number of components actually used: the requested count capped by what
/// `n_train` centered rows can support.
pub fn effective_components(requested: usize, n_train: usize, dim: usize) -> usize {
    requested.min(n_train.saturating_sub(1)).min(dim).max(1)
}

/// Scale, reduce, rescale and train the classifier on training rows.
/// `blocks` gives the widths of the feature blocks making up a row; each
/// block is weighted to the same total range before the PCA.
pub fn fit_flat(rows: &[Vec<f64>], labels: &[u8], k: usize, elm: &ElmConfig, blocks: &[usize]) -> Result<FlatFit> {
    if labels.iter().collect::<BTreeSet<_>>().len() < 2 {
        return Err(Error::SingleClass);
    }
    let raw_scaler = MinMaxScaler::fit_blocks(rows, blocks)?;
    let scaled = raw_scaler.transform_rows(rows);
    let pca = pca_fit(&scaled, effective_components(k, rows.len(), raw_scaler.dim()))?;
    let scores = pca.transform_rows(&scaled)?;
    let score_scaler = MinMaxScaler::fit(&scores);
    let elm = elm_train(&score_scaler.transform_rows(&scores), labels, elm)?;
    Ok(FlatFit {
        raw_scaler,
        pca,
        score_scaler,
        elm,
    })
}

fn run_flat_fold(set: &FeatureSet, fold: &Fold, cfg: &EvalConfig, fingerprint: String) -> Result<FoldResult> {
    let v = &set.vectors;
    let rows: Vec<Vec<f64>> = fold.train.iter().map(|&i| v[i].values.clone()).collect();
    let labels: Vec<u8> = fold.train.iter().map(|&i| v[i].label).collect();
    let seed = fold_seed(cfg.elm.seed, &fold.test_subject);
    let elm = ElmConfig { seed, ..cfg.elm };
    let fit = fit_flat(&rows, &labels, cfg.pca_components, &elm, &modality_blocks(cfg.modality))?;
    let predictions = fold
        .test
        .iter()
        .map(|&i| Ok((v[i].trial_id.clone(), v[i].label, fit.predict(&v[i].values)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(fold_result(fold, fit.pca.k(), seed, fingerprint, predictions))
}

pub(crate) fn fold_result(
    fold: &Fold,
    pca_components: usize,
    seed: u64,
    train_fingerprint: String,
    predictions: Vec<(String, u8, u8)>,
) -> FoldResult {
    let n_correct = predictions.iter().filter(|(_, y, p)| y == p).count();
    FoldResult {
        test_subject: fold.test_subject.clone(),
        n_train: fold.train.len(),
        n_test: fold.test.len(),
        n_correct,
        accuracy: 100.0 * n_correct as f64 / fold.test.len().max(1) as f64,
        pca_components,
        seed,
        train_fingerprint,
        predictions,
    }
}

/// Leave-one-subject-out accuracy of the flat pipeline on `set`.
pub fn loso_evaluate(set: &FeatureSet, task: Task, cfg: &EvalConfig) -> Result<LosoReport> {
    let subjects: Vec<&str> = set.vectors.iter().map(|v| v.subject_id.as_str()).collect();
    let ids: Vec<&str> = set.vectors.iter().map(|v| v.trial_id.as_str()).collect();
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
        .map(|(f, fp)| run_flat_fold(set, f, cfg, fp))
        .collect::<Result<Vec<_>>>()?;
    let dim = set.vectors.first().map_or(0, |v| v.values.len());
    let provenance = set.vectors.first().map(|v| v.provenance.clone()).unwrap_or_default();
    Ok(LosoReport::from_folds(
        task,
        cfg.modality,
        Pipeline::Flat,
        dim,
        results,
        set.excluded.clone(),
        provenance,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folds_partition_by_subject() {
        let subjects = ["b", "a", "b", "c", "a"];
        let folds = loso_folds(&subjects);
        assert_eq!(folds.len(), 3);
        assert_eq!(folds[0].test_subject, "a");
        assert_eq!(folds[0].test, vec![1, 4]);
        assert_eq!(folds[0].train, vec![0, 2, 3]);
    }

    #[test]
    fn guard_rejects_shared_subject() {
        let subjects = ["a", "a", "b"];
        let ids = ["a1", "a2", "b1"];
        let bad = Fold {
            test_subject: "a".into(),
            train: vec![1, 2],
            test: vec![0],
        };
        assert!(matches!(check_fold(&bad, &ids, &subjects), Err(Error::Leakage { .. })));
        let dup_ids = ["a1", "b1", "b1"];
        let dup = Fold {
            test_subject: "b".into(),
            train: vec![0, 1],
            test: vec![2],
        };
        let subj2 = ["a", "c", "b"];
        assert!(matches!(check_fold(&dup, &dup_ids, &subj2), Err(Error::Leakage { .. })));
    }

    #[test]
    fn fingerprint_ignores_order() {
        assert_eq!(train_fingerprint(&["x", "y"]), train_fingerprint(&["y", "x"]));
        assert_ne!(train_fingerprint(&["x", "y"]), train_fingerprint(&["x"]));
    }

    #[test]
    fn single_class_training_is_refused() {
        let rows = vec![vec![0.0, 1.0], vec![1.0, 0.0], vec![0.5, 0.5]];
        assert!(matches!(
            fit_flat(&rows, &[1, 1, 1], 2, &ElmConfig::default(), &[2]),
            Err(Error::SingleClass)
        ));
    }
}
