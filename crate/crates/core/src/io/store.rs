use std::collections::HashMap;
use std::fs;
use std::path::Path;

use super::{FormatError, Reader};
use crate::model::EmbeddingVector;
use crate::sampler::EmbeddingLookup;

const MAGIC: [u8; 4] = *b"LCPE";
const VERSION: u16 = 1;

/// Id-keyed embeddings of one dimension, in insertion order.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingStore {
    dim: usize,
    ids: Vec<String>,
    vectors: Vec<EmbeddingVector>,
    index: HashMap<String, usize>,
}

impl EmbeddingStore {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            ids: Vec::new(),
            vectors: Vec::new(),
            index: HashMap::new(),
        }
    }

    pub fn insert(&mut self, id: impl Into<String>, vector: EmbeddingVector) -> Result<(), FormatError> {
        let id = id.into();
        if vector.dim() != self.dim {
            return Err(FormatError::DimensionMismatch {
                id,
                expected: self.dim,
                found: vector.dim(),
            });
        }
        if id.len() > usize::from(u16::MAX) {
            return Err(FormatError::CorruptRecord {
                offset: 0,
                reason: format!("id of {} bytes exceeds the u16 length field", id.len()),
            });
        }
        if self.index.contains_key(&id) {
            return Err(FormatError::DuplicateId(id));
        }
        self.index.insert(id.clone(), self.ids.len());
        self.ids.push(id);
        self.vectors.push(vector);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&EmbeddingVector> {
        self.index.get(id).map(|&i| &self.vectors[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &EmbeddingVector)> {
        self.ids.iter().map(String::as_str).zip(&self.vectors)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(18 + self.len() * (2 + 16 + 4 * self.dim));
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(self.dim as u32).to_le_bytes());
        out.extend_from_slice(&(self.len() as u64).to_le_bytes());
        for (id, v) in self.iter() {
            out.extend_from_slice(&(id.len() as u16).to_le_bytes());
            out.extend_from_slice(id.as_bytes());
            for x in v.as_slice() {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, FormatError> {
        let mut r = Reader::new(bytes);
        r.magic(MAGIC)?;
        let version = r.u16(0, "header")?;
        if version != VERSION {
            return Err(FormatError::UnsupportedVersion(version));
        }
        let dim = r.u32(0, "header")? as usize;
        let count = r.u64(0, "header")?;
        if dim == 0 && count > 0 {
            return Err(FormatError::CorruptRecord {
                offset: 6,
                reason: "zero dimension with records present".into(),
            });
        }
        let mut store = Self::new(dim);
        for _ in 0..count {
            let start = r.pos;
            let len = usize::from(r.u16(start, "record id length")?);
            let id = std::str::from_utf8(r.take(len, start, "record id")?)
                .map_err(|_| FormatError::CorruptRecord {
                    offset: start as u64,
                    reason: "id is not UTF-8".into(),
                })?
                .to_owned();
            let values = r.f32s(dim, start, "record values")?;
            let vector =
                EmbeddingVector::new(values).map_err(|_| FormatError::NonFiniteValue(id.clone()))?;
            store.insert(id, vector)?;
        }
        r.finish()?;
        Ok(store)
    }
}

impl EmbeddingLookup for EmbeddingStore {
    fn embedding(&self, id: &str) -> Option<&EmbeddingVector> {
        self.get(id)
    }
}

pub fn write_store(store: &EmbeddingStore, path: impl AsRef<Path>) -> Result<(), FormatError> {
    fs::write(path, store.to_bytes())?;
    Ok(())
}

pub fn read_store(path: impl AsRef<Path>) -> Result<EmbeddingStore, FormatError> {
    EmbeddingStore::from_bytes(&fs::read(path)?)
}
