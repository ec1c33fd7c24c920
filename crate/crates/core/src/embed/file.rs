//! Table-backed provider reading vectors computed by an external tool.
//!
//! Binary layout, all integers little-endian:
//!
//! ```text
//! magic    "EMBV"
//! version  u32 (= 1)
//! provider u32 length + UTF-8 bytes
//! metadata u32 length + UTF-8 bytes (free-form JSON, e.g. resize policy)
//! dim      u32
//! count    u64
//! count x { key: u32 length + UTF-8 bytes, dim x f32 }
//! ```

use std::collections::BTreeMap;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{check_output, EmbeddingProvider, EMBEDDING_DIM};
use crate::error::{Error, Result};
use crate::image::RgbImage;

const MAGIC: &[u8; 4] = b"EMBV";
const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FileEmbedder {
    pub provider_id: String,
    pub metadata: String,
    pub dim: usize,
    table: BTreeMap<String, Vec<f32>>,
}

impl FileEmbedder {
    pub fn new(provider_id: impl Into<String>, metadata: impl Into<String>) -> Self {
        Self {
            provider_id: provider_id.into(),
            metadata: metadata.into(),
            dim: EMBEDDING_DIM,
            table: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, key: impl Into<String>, vector: Vec<f32>) -> Result<()> {
        if vector.len() != self.dim {
            return Err(Error::LengthMismatch {
                left: self.dim,
                right: vector.len(),
            });
        }
        self.table.insert(key.into(), vector);
        Ok(())
    }

    pub fn get(&self, key: &str) -> Result<&[f32]> {
        self.table
            .get(key)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::MissingEmbedding { key: key.to_string() })
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.table.keys().map(String::as_str)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(f);
        self.write_to(&mut w).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    fn write_to(&self, w: &mut impl Write) -> std::io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        write_str(w, &self.provider_id)?;
        write_str(w, &self.metadata)?;
        w.write_all(&(self.dim as u32).to_le_bytes())?;
        w.write_all(&(self.table.len() as u64).to_le_bytes())?;
        for (k, v) in &self.table {
            write_str(w, k)?;
            for x in v {
                w.write_all(&x.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut r = BufReader::new(f);
        Self::read_from(&mut r).map_err(|e| match e {
            Error::Format(msg) => Error::Format(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    fn read_from(r: &mut impl Read) -> Result<Self> {
        let mut magic = [0u8; 4];
        read_exact(r, &mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("not an embedding file (bad magic)".into()));
        }
        let version = read_u32(r)?;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported embedding file version {version}")));
        }
        let provider_id = read_str(r)?;
        let metadata = read_str(r)?;
        let dim = read_u32(r)? as usize;
        if dim != EMBEDDING_DIM {
            return Err(Error::Format(format!("embedding dim {dim}, expected {EMBEDDING_DIM}")));
        }
        let mut count = [0u8; 8];
        read_exact(r, &mut count)?;
        let count = u64::from_le_bytes(count);
        let mut table = BTreeMap::new();
        let mut buf = vec![0u8; dim * 4];
        for _ in 0..count {
            let key = read_str(r)?;
            read_exact(r, &mut buf)?;
            let v: Vec<f32> = buf
                .chunks_exact(4)
                .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
                .collect();
            check_output(&v)?;
            table.insert(key, v);
        }
        Ok(Self {
            provider_id,
            metadata,
            dim,
            table,
        })
    }
}

fn write_str(w: &mut impl Write, s: &str) -> std::io::Result<()> {
    w.write_all(&(s.len() as u32).to_le_bytes())?;
    w.write_all(s.as_bytes())
}

fn read_exact(r: &mut impl Read, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf).map_err(|_| Error::Format("truncated file".into()))
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_str(r: &mut impl Read) -> Result<String> {
    let n = read_u32(r)? as usize;
    if n > 1 << 20 {
        return Err(Error::Format(format!("string length {n} is implausible")));
    }
    let mut b = vec![0u8; n];
    read_exact(r, &mut b)?;
    String::from_utf8(b).map_err(|_| Error::Format("string is not UTF-8".into()))
}

impl EmbeddingProvider for FileEmbedder {
    fn provider_id(&self) -> &str {
        &self.provider_id
    }

    fn deterministic(&self) -> bool {
        true
    }

    /// Looks up the image by content key.
    fn embed(&self, image: &RgbImage) -> Result<Vec<f32>> {
        image.check_network_input()?;
        Ok(self.get(&image.content_key())?.to_vec())
    }

    /// Content key first, then the caller's key.
    fn embed_keyed(&self, image: &RgbImage, key: &str) -> Result<Vec<f32>> {
        image.check_network_input()?;
        match self.get(&image.content_key()) {
            Ok(v) => Ok(v.to_vec()),
            Err(_) => Ok(self.get(key)?.to_vec()),
        }
    }
}
