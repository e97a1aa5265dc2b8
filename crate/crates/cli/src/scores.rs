//! Prediction and score files read by `lcp metrics`.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use lcp_core::metrics::ScoreMatrix;
use lcp_core::sampler::DatasetManifest;
use lcp_core::LabelSet;
use serde::Deserialize;

#[derive(Deserialize)]
struct PredictionLine {
    id: String,
    labels: Vec<String>,
}

fn truth_by_id(manifest: &DatasetManifest) -> HashMap<&str, LabelSet> {
    manifest.items().iter().map(|i| (i.id.as_str(), i.labels)).collect()
}

/// `(predicted, truth)` pairs, truth taken from the manifest.
pub fn read_predictions(path: &Path, manifest: &DatasetManifest) -> Result<Vec<(LabelSet, LabelSet)>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let truth = truth_by_id(manifest);
    let vocab = manifest.vocabulary();
    let mut seen = HashSet::new();
    let mut pairs = Vec::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let at = || format!("{} line {}", path.display(), i + 1);
        let p: PredictionLine = serde_json::from_str(line).with_context(at)?;
        let t = *truth.get(p.id.as_str()).ok_or_else(|| anyhow!("{}: id {} not in manifest", at(), p.id))?;
        if !seen.insert(p.id.clone()) {
            bail!("{}: duplicate id {}", at(), p.id);
        }
        let mut predicted = LabelSet::empty();
        for name in &p.labels {
            let id = vocab.id_of(name).ok_or_else(|| anyhow!("{}: unknown label {name:?}", at()))?;
            predicted.insert(id);
        }
        pairs.push((predicted, t));
    }
    if pairs.is_empty() {
        bail!("{}: no predictions", path.display());
    }
    Ok(pairs)
}

/// CSV with header `id,<label names in vocabulary order>`.
pub fn scores_to_csv(ids: &[&str], names: &[String], rows: &[Vec<f64>]) -> String {
    let mut out = format!("id,{}\n", names.join(","));
    for (id, row) in ids.iter().zip(rows) {
        out.push_str(id);
        for v in row {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    out
}

pub fn read_scores(path: &Path, manifest: &DatasetManifest) -> Result<ScoreMatrix> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let truth = truth_by_id(manifest);
    let names = manifest.vocabulary().names();
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| anyhow!("{}: empty file", path.display()))?;
    let expected = format!("id,{}", names.join(","));
    if header != expected {
        bail!("{}: header must be {expected:?}", path.display());
    }
    let mut scores = Vec::new();
    let mut truths = Vec::new();
    for (i, line) in lines.enumerate().filter(|(_, l)| !l.is_empty()) {
        let at = || format!("{} line {}", path.display(), i + 2);
        let mut fields = line.split(',');
        let id = fields.next().unwrap_or_default();
        let row: Vec<f64> = fields
            .map(|f| f.parse::<f64>().with_context(|| format!("{}: bad score {f:?}", at())))
            .collect::<Result<_>>()?;
        if row.len() != names.len() {
            bail!("{}: {} scores, expected {}", at(), row.len(), names.len());
        }
        scores.push(row);
        truths.push(*truth.get(id).ok_or_else(|| anyhow!("{}: id {id} not in manifest", at()))?);
    }
    Ok(ScoreMatrix::from_rows(&scores, &truths, names.len())?)
}
