//! Model files for fitted pipelines: scalers, PCA and learner together.

use std::path::Path;

use serde_json::{json, Value};

use super::config::{Modality, Pipeline};
use super::loso::FlatFit;
use super::normalize::MinMaxScaler;
use super::trend::TrendFit;
use crate::error::{Error, Result};
use crate::learn::{ElmModel, LstmModel, ModelFile, PcaModel, ToModelBlocks};
use crate::session::manifest::Task;

pub const FLAT_KIND: &str = "flat-pipeline";
pub const TREND_KIND: &str = "trend-pipeline";

impl ToModelBlocks for MinMaxScaler {
    fn write_blocks(&self, file: &mut ModelFile, prefix: &str) -> Value {
        file.push(format!("{prefix}min"), vec![self.dim()], self.min.iter().copied());
        file.push(format!("{prefix}max"), vec![self.dim()], self.max.iter().copied());
        file.push(format!("{prefix}weight"), vec![self.weight.len()], self.weight.iter().copied());
        json!({ "dim": self.dim() })
    }

    fn read_blocks(file: &ModelFile, prefix: &str, _meta: &Value) -> Result<Self> {
        Ok(Self {
            min: file.vector(&format!("{prefix}min"))?,
            max: file.vector(&format!("{prefix}max"))?,
            weight: file.vector(&format!("{prefix}weight"))?,
        })
    }
}

/// What a pipeline file was trained for.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineInfo {
    pub task: Task,
    pub modality: Modality,
    pub pipeline: Pipeline,
    pub config_fingerprint: String,
    pub train_fingerprint: String,
}

fn info_json(info: &PipelineInfo) -> Value {
    json!({
        "task": info.task,
        "modality": info.modality,
        "pipeline": info.pipeline,
        "config_fingerprint": info.config_fingerprint,
        "train_fingerprint": info.train_fingerprint,
    })
}

fn info_from(meta: &Value) -> Result<PipelineInfo> {
    fn field<T: serde::de::DeserializeOwned>(meta: &Value, k: &str) -> Result<T> {
        let v = meta.get(k).ok_or_else(|| Error::Format(format!("model header lacks `{k}`")))?;
        serde_json::from_value(v.clone()).map_err(|e| Error::Format(format!("`{k}`: {e}")))
    }
    Ok(PipelineInfo {
        task: field(meta, "task")?,
        modality: field(meta, "modality")?,
        pipeline: field(meta, "pipeline")?,
        config_fingerprint: field(meta, "config_fingerprint")?,
        train_fingerprint: field(meta, "train_fingerprint")?,
    })
}

fn write_common(file: &mut ModelFile, raw: &MinMaxScaler, pca: &PcaModel, score: &MinMaxScaler) -> Value {
    json!({
        "raw_scaler": raw.write_blocks(file, "raw_scaler."),
        "pca": pca.write_blocks(file, "pca."),
        "score_scaler": score.write_blocks(file, "score_scaler."),
    })
}

pub fn save_flat_fit(fit: &FlatFit, info: &PipelineInfo, path: &Path) -> Result<()> {
    let mut f = ModelFile::new(FLAT_KIND, Value::Null);
    let mut meta = write_common(&mut f, &fit.raw_scaler, &fit.pca, &fit.score_scaler);
    meta["elm"] = fit.elm.write_blocks(&mut f, "elm.");
    meta["info"] = info_json(info);
    f.meta = meta;
    f.save(path)
}

pub fn load_flat_fit(path: &Path) -> Result<(FlatFit, PipelineInfo)> {
    let f = ModelFile::load(path)?;
    f.expect_kind(FLAT_KIND)?;
    let m = &f.meta;
    Ok((
        FlatFit {
            raw_scaler: MinMaxScaler::read_blocks(&f, "raw_scaler.", &m["raw_scaler"])?,
            pca: PcaModel::read_blocks(&f, "pca.", &m["pca"])?,
            score_scaler: MinMaxScaler::read_blocks(&f, "score_scaler.", &m["score_scaler"])?,
            elm: ElmModel::read_blocks(&f, "elm.", &m["elm"])?,
        },
        info_from(&m["info"])?,
    ))
}

pub fn save_trend_fit(fit: &TrendFit, info: &PipelineInfo, path: &Path) -> Result<()> {
    let mut f = ModelFile::new(TREND_KIND, Value::Null);
    let mut meta = write_common(&mut f, &fit.raw_scaler, &fit.pca, &fit.score_scaler);
    meta["lstm"] = fit.model.write_blocks(&mut f, "lstm.");
    meta["info"] = info_json(info);
    f.meta = meta;
    f.save(path)
}

pub fn load_trend_fit(path: &Path) -> Result<(TrendFit, PipelineInfo)> {
    let f = ModelFile::load(path)?;
    f.expect_kind(TREND_KIND)?;
    let m = &f.meta;
    Ok((
        TrendFit {
            raw_scaler: MinMaxScaler::read_blocks(&f, "raw_scaler.", &m["raw_scaler"])?,
            pca: PcaModel::read_blocks(&f, "pca.", &m["pca"])?,
            score_scaler: MinMaxScaler::read_blocks(&f, "score_scaler.", &m["score_scaler"])?,
            model: LstmModel::read_blocks(&f, "lstm.", &m["lstm"])?,
        },
        info_from(&m["info"])?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::loso::fit_flat;
    use crate::learn::ElmConfig;

    #[test]
    fn flat_fit_round_trips() {
        let rows: Vec<Vec<f64>> = (0..12)
            .map(|i| vec![i as f64, (i * i) as f64 * 0.1, ((i * 7) % 5) as f64, 1.0])
            .collect();
        let labels: Vec<u8> = (0..12).map(|i| (i % 2) as u8).collect();
        let cfg = ElmConfig { hidden: 20, ..ElmConfig::default() };
        let fit = fit_flat(&rows, &labels, 3, &cfg, &[1, 3]).unwrap();
        let info = PipelineInfo {
            task: Task::Attention,
            modality: Modality::Eeg,
            pipeline: Pipeline::Flat,
            config_fingerprint: "c".into(),
            train_fingerprint: "t".into(),
        };
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.damd");
        save_flat_fit(&fit, &info, &p).unwrap();
        let (back, info2) = load_flat_fit(&p).unwrap();
        assert_eq!(info2, info);
        for r in &rows {
            assert_eq!(back.predict(r).unwrap(), fit.predict(r).unwrap());
        }
    }
}
