use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::FormatError;
use crate::labels::{LabelSet, LabelVocabulary};
use crate::sampler::{DatasetManifest, ManifestItem, Split};

#[derive(Serialize, Deserialize)]
struct Record {
    id: String,
    split: String,
    labels: Vec<String>,
}

pub fn vocabulary_to_string(vocab: &LabelVocabulary) -> String {
    let mut out = String::new();
    for name in vocab.names() {
        out.push_str(name);
        out.push('\n');
    }
    out
}

pub fn vocabulary_from_str(text: &str) -> Result<LabelVocabulary, FormatError> {
    let names: Vec<&str> = text.lines().map(|l| l.trim_end_matches('\r')).collect();
    for (i, name) in names.iter().enumerate() {
        if name.contains('\n') || name.trim() != *name {
            return Err(FormatError::Parse {
                line: i + 1,
                message: "label names may not carry surrounding whitespace".into(),
            });
        }
    }
    Ok(LabelVocabulary::new(names)?)
}

/// One JSON record per line, labels in vocabulary order.
pub fn manifest_to_string(manifest: &DatasetManifest) -> String {
    let vocab = manifest.vocabulary();
    let mut out = String::new();
    for item in manifest.items() {
        let record = Record {
            id: item.id.clone(),
            split: item.split.as_str().to_owned(),
            labels: item
                .labels
                .iter()
                .map(|l| vocab.names()[l].clone())
                .collect(),
        };
        out.push_str(&serde_json::to_string(&record).expect("record serializes"));
        out.push('\n');
    }
    out
}

pub fn manifest_from_str(text: &str, vocab: LabelVocabulary) -> Result<DatasetManifest, FormatError> {
    let mut items = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let record: Record = serde_json::from_str(line).map_err(|e| FormatError::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        let split: Split = record.split.parse().map_err(|_| FormatError::UnknownSplit {
            line: line_no,
            split: record.split.clone(),
        })?;
        let mut labels = LabelSet::empty();
        for name in &record.labels {
            let id = vocab.id_of(name).ok_or_else(|| FormatError::UnknownLabel {
                line: line_no,
                label: name.clone(),
            })?;
            labels.insert(id);
        }
        items.push(ManifestItem {
            id: record.id,
            split,
            labels,
        });
    }
    Ok(DatasetManifest::new(vocab, items)?)
}

pub fn write_vocabulary(vocab: &LabelVocabulary, path: impl AsRef<Path>) -> Result<(), FormatError> {
    fs::write(path, vocabulary_to_string(vocab))?;
    Ok(())
}

pub fn read_vocabulary(path: impl AsRef<Path>) -> Result<LabelVocabulary, FormatError> {
    vocabulary_from_str(&fs::read_to_string(path)?)
}

pub fn write_manifest(manifest: &DatasetManifest, path: impl AsRef<Path>) -> Result<(), FormatError> {
    fs::write(path, manifest_to_string(manifest))?;
    Ok(())
}

pub fn read_manifest(
    path: impl AsRef<Path>,
    vocab: LabelVocabulary,
) -> Result<DatasetManifest, FormatError> {
    manifest_from_str(&fs::read_to_string(path)?, vocab)
}
