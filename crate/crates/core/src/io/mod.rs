//! On-disk formats and the synthetic dataset generator.
//!
//! * Embedding store (`.lcpe`): magic `LCPE`, `u16` version, `u32` dim,
//!   `u64` count, then per record a `u16` id length, the UTF-8 id, and `dim`
//!   little-endian `f32` values.
//! * Vocabulary: one label per line; the line number is the label id.
//! * Manifest: one JSON object per line, `{"id", "split", "labels"}`.
//! * Probe parameters (`.lcpp`): magic `LCPP`, `u16` version, `u32` input
//!   dim, hidden width and label count, then `w1`, `b1`, `w2`, `b2` as
//!   little-endian `f32`, row-major.

mod manifest;
mod params;
mod store;
mod synthetic;

use thiserror::Error;

use crate::labels::LabelError;
use crate::sampler::SampleError;

pub use manifest::{
    manifest_from_str, manifest_to_string, read_manifest, read_vocabulary, vocabulary_from_str,
    vocabulary_to_string, write_manifest, write_vocabulary,
};
pub use params::{params_from_bytes, params_to_bytes, read_params, write_params};
pub use store::{read_store, write_store, EmbeddingStore};
pub use synthetic::{generate_synthetic, SyntheticDataset, SyntheticSpec};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: [u8; 4], found: Vec<u8> },
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u16),
    #[error("corrupt record at byte {offset}: {reason}")]
    CorruptRecord { offset: u64, reason: String },
    #[error("non-finite value in {0}")]
    NonFiniteValue(String),
    #[error("duplicate id {0}")]
    DuplicateId(String),
    #[error("embedding for {id} has dim {found}, store dim is {expected}")]
    DimensionMismatch {
        id: String,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: unknown label {label:?}")]
    UnknownLabel { line: usize, label: String },
    #[error("line {line}: unknown split {split:?}")]
    UnknownSplit { line: usize, split: String },
    #[error("vocabulary: {0}")]
    Vocabulary(#[from] LabelError),
    #[error("manifest: {0}")]
    Manifest(#[from] SampleError),
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
    #[error("synthetic spec infeasible: {0}")]
    SpecInfeasible(String),
}

/// Cursor over a byte buffer reporting offsets on truncation.
struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    fn take(&mut self, n: usize, start: usize, what: &str) -> Result<&'a [u8], FormatError> {
        if self.bytes.len() - self.pos < n {
            return Err(FormatError::CorruptRecord {
                offset: start as u64,
                reason: format!("truncated {what}"),
            });
        }
        let out = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u16(&mut self, start: usize, what: &str) -> Result<u16, FormatError> {
        Ok(u16::from_le_bytes(self.take(2, start, what)?.try_into().unwrap()))
    }

    fn u32(&mut self, start: usize, what: &str) -> Result<u32, FormatError> {
        Ok(u32::from_le_bytes(self.take(4, start, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, start: usize, what: &str) -> Result<u64, FormatError> {
        Ok(u64::from_le_bytes(self.take(8, start, what)?.try_into().unwrap()))
    }

    fn f32s(&mut self, n: usize, start: usize, what: &str) -> Result<Vec<f32>, FormatError> {
        let raw = self.take(n.checked_mul(4).ok_or_else(|| FormatError::CorruptRecord {
            offset: start as u64,
            reason: format!("{what} length overflows"),
        })?, start, what)?;
        Ok(raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }

    fn magic(&mut self, expected: [u8; 4]) -> Result<(), FormatError> {
        let found = &self.bytes[..self.bytes.len().min(4)];
        if found != expected {
            return Err(FormatError::BadMagic {
                expected,
                found: found.to_vec(),
            });
        }
        self.pos = 4;
        Ok(())
    }

    fn finish(&self) -> Result<(), FormatError> {
        if self.pos != self.bytes.len() {
            return Err(FormatError::CorruptRecord {
                offset: self.pos as u64,
                reason: format!("{} trailing bytes", self.bytes.len() - self.pos),
            });
        }
        Ok(())
    }
}
