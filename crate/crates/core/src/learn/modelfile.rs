//! Self-describing binary container for trained models.
//!
//! ```text
//! magic   "DAMD"
//! version u32 (= 1)
//! header  u32 length + UTF-8 JSON
//! blocks  little-endian f32 values, concatenated in header order
//! ```
//!
//! The JSON header carries `kind`, free-form `meta` (seeds, hyperparameters,
//! catalog and config versions) and `blocks`, a list of `{name, shape}`
//! whose element counts give the byte layout of the payload.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::elm::{ElmConfig, ElmModel};
use super::lstm::{LstmLayer, LstmModel};
use super::pca::PcaModel;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"DAMD";
const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockInfo {
    pub name: String,
    pub shape: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Header {
    kind: String,
    meta: Value,
    blocks: Vec<BlockInfo>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub kind: String,
    pub meta: Value,
    pub blocks: Vec<(BlockInfo, Vec<f32>)>,
}

impl ModelFile {
    pub fn new(kind: impl Into<String>, meta: Value) -> Self {
        Self {
            kind: kind.into(),
            meta,
            blocks: Vec::new(),
        }
    }

    pub fn push(&mut self, name: impl Into<String>, shape: Vec<usize>, values: impl IntoIterator<Item = f64>) {
        let v: Vec<f32> = values.into_iter().map(|x| x as f32).collect();
        debug_assert_eq!(v.len(), shape.iter().product::<usize>());
        self.blocks.push((
            BlockInfo {
                name: name.into(),
                shape,
            },
            v,
        ));
    }

    pub fn push_matrix(&mut self, name: &str, m: &DMatrix<f64>) {
        // row-major on disk
        let (r, c) = m.shape();
        self.push(name, vec![r, c], (0..r).flat_map(|i| (0..c).map(move |j| m[(i, j)])));
    }

    pub fn block(&self, name: &str) -> Result<&(BlockInfo, Vec<f32>)> {
        self.blocks
            .iter()
            .find(|(b, _)| b.name == name)
            .ok_or_else(|| Error::Format(format!("model file has no block `{name}`")))
    }

    pub fn vector(&self, name: &str) -> Result<Vec<f64>> {
        Ok(self.block(name)?.1.iter().map(|&v| v as f64).collect())
    }

    pub fn matrix(&self, name: &str) -> Result<DMatrix<f64>> {
        let (info, v) = self.block(name)?;
        if info.shape.len() != 2 {
            return Err(Error::Format(format!("block `{name}` is not a matrix")));
        }
        let (r, c) = (info.shape[0], info.shape[1]);
        Ok(DMatrix::from_fn(r, c, |i, j| v[i * c + j] as f64))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let header = Header {
            kind: self.kind.clone(),
            meta: self.meta.clone(),
            blocks: self.blocks.iter().map(|(b, _)| b.clone()).collect(),
        };
        let h = serde_json::to_vec(&header).expect("header serializes");
        let mut out = Vec::with_capacity(12 + h.len() + self.blocks.iter().map(|b| b.1.len() * 4).sum::<usize>());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(h.len() as u32).to_le_bytes());
        out.extend_from_slice(&h);
        for (_, v) in &self.blocks {
            for x in v {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |m: &str| Error::Format(m.to_string());
        if bytes.len() < 12 || &bytes[..4] != MAGIC {
            return Err(bad("not a model file (bad magic)"));
        }
        let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
        if version != VERSION {
            return Err(Error::Format(format!("unsupported model file version {version}")));
        }
        let hlen = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes")) as usize;
        let body = bytes.get(12..12 + hlen).ok_or_else(|| bad("truncated header"))?;
        let header: Header = serde_json::from_slice(body).map_err(|e| Error::Format(format!("header: {e}")))?;
        let mut pos = 12 + hlen;
        let mut blocks = Vec::with_capacity(header.blocks.len());
        for info in header.blocks {
            let n: usize = info.shape.iter().product();
            let raw = bytes.get(pos..pos + 4 * n).ok_or_else(|| bad("truncated payload"))?;
            let v = raw
                .chunks_exact(4)
                .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
                .collect();
            pos += 4 * n;
            blocks.push((info, v));
        }
        if pos != bytes.len() {
            return Err(bad("trailing bytes after payload"));
        }
        Ok(Self {
            kind: header.kind,
            meta: header.meta,
            blocks,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }

    pub fn expect_kind(&self, kind: &str) -> Result<()> {
        if self.kind != kind {
            return Err(Error::Format(format!("expected a `{kind}` model, found `{}`", self.kind)));
        }
        Ok(())
    }
}

/// Block names are prefixed so several models can share one file.
pub trait ToModelBlocks: Sized {
    fn write_blocks(&self, file: &mut ModelFile, prefix: &str) -> Value;
    fn read_blocks(file: &ModelFile, prefix: &str, meta: &Value) -> Result<Self>;
}

fn meta_u64(meta: &Value, key: &str) -> Result<u64> {
    meta.get(key)
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::Format(format!("model header lacks `{key}`")))
}

impl ToModelBlocks for PcaModel {
    fn write_blocks(&self, file: &mut ModelFile, prefix: &str) -> Value {
        file.push(format!("{prefix}mean"), vec![self.dim()], self.mean.iter().copied());
        file.push_matrix(&format!("{prefix}components"), &self.components);
        file.push(
            format!("{prefix}explained_variance"),
            vec![self.k()],
            self.explained_variance.iter().copied(),
        );
        json!({ "k": self.k(), "dim": self.dim(), "total_variance": self.total_variance, "fitted_on": self.fitted_on })
    }

    fn read_blocks(file: &ModelFile, prefix: &str, meta: &Value) -> Result<Self> {
        Ok(Self {
            mean: file.vector(&format!("{prefix}mean"))?,
            components: file.matrix(&format!("{prefix}components"))?,
            explained_variance: file.vector(&format!("{prefix}explained_variance"))?,
            total_variance: meta.get("total_variance").and_then(Value::as_f64).unwrap_or(f64::NAN),
            fitted_on: meta.get("fitted_on").and_then(Value::as_str).unwrap_or("").to_string(),
        })
    }
}

impl ToModelBlocks for ElmModel {
    fn write_blocks(&self, file: &mut ModelFile, prefix: &str) -> Value {
        file.push_matrix(&format!("{prefix}input_weights"), &self.input_weights);
        file.push(format!("{prefix}biases"), vec![self.biases.len()], self.biases.iter().copied());
        file.push_matrix(&format!("{prefix}output_weights"), &self.output_weights);
        json!({
            "hidden": self.config.hidden,
            "ridge": self.config.ridge,
            "seed": self.config.seed,
            "activation": "tribas",
        })
    }

    fn read_blocks(file: &ModelFile, prefix: &str, meta: &Value) -> Result<Self> {
        let config = ElmConfig {
            hidden: meta_u64(meta, "hidden")? as usize,
            ridge: meta.get("ridge").and_then(Value::as_f64).unwrap_or(1e-6),
            seed: meta_u64(meta, "seed")?,
        };
        Ok(Self {
            input_weights: file.matrix(&format!("{prefix}input_weights"))?,
            biases: file.vector(&format!("{prefix}biases"))?,
            output_weights: file.matrix(&format!("{prefix}output_weights"))?,
            config,
        })
    }
}

impl ToModelBlocks for LstmModel {
    fn write_blocks(&self, file: &mut ModelFile, prefix: &str) -> Value {
        for (i, l) in self.layers.iter().enumerate() {
            file.push_matrix(&format!("{prefix}layer{i}.w"), &l.w);
            file.push_matrix(&format!("{prefix}layer{i}.u"), &l.u);
            file.push(format!("{prefix}layer{i}.b"), vec![l.b.len()], l.b.iter().copied());
        }
        file.push_matrix(&format!("{prefix}readout.w"), &self.readout_w);
        file.push(format!("{prefix}readout.b"), vec![2], self.readout_b.iter().copied());
        json!({
            "input_dim": self.input_dim(),
            "hidden": self.hidden_sizes(),
            "gate_order": "i,f,g,o",
            "seed": self.seed,
        })
    }

    fn read_blocks(file: &ModelFile, prefix: &str, meta: &Value) -> Result<Self> {
        let hidden = meta
            .get("hidden")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Format("model header lacks `hidden`".into()))?;
        let layers = (0..hidden.len())
            .map(|i| {
                Ok(LstmLayer {
                    w: file.matrix(&format!("{prefix}layer{i}.w"))?,
                    u: file.matrix(&format!("{prefix}layer{i}.u"))?,
                    b: DVector::from_vec(file.vector(&format!("{prefix}layer{i}.b"))?),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            layers,
            readout_w: file.matrix(&format!("{prefix}readout.w"))?,
            readout_b: DVector::from_vec(file.vector(&format!("{prefix}readout.b"))?),
            seed: meta_u64(meta, "seed")?,
        })
    }
}

/// Writes a single model as its own file.
pub fn save_model<M: ToModelBlocks>(model: &M, kind: &str, extra: Value, path: &Path) -> Result<()> {
    let mut f = ModelFile::new(kind, Value::Null);
    let meta = model.write_blocks(&mut f, "");
    f.meta = json!({ "model": meta, "extra": extra });
    f.save(path)
}

pub fn load_model<M: ToModelBlocks>(kind: &str, path: &Path) -> Result<M> {
    let f = ModelFile::load(path)?;
    f.expect_kind(kind)?;
    M::read_blocks(&f, "", &f.meta["model"])
}
