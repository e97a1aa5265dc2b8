//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use lcp_core::evaluation::{probe_dataset, probe_feature_store, run_fsl, FslConfig};
use lcp_core::io::{
    generate_synthetic, manifest_from_str, manifest_to_string, params_from_bytes, params_to_bytes,
    vocabulary_from_str, vocabulary_to_string, EmbeddingStore, FormatError, SyntheticSpec,
};
use lcp_core::metrics::{f1_scores, mean_average_precision, roc_auc, ScoreMatrix};
use lcp_core::probe::{train_probe, TrainConfig};
use lcp_core::probe::{batch_loss, probe_gradient, probe_scores, ProbeParams};
use lcp_core::sampler::Split;
use lcp_core::scalability::{run_benchmark, BenchConfig};
use lcp_core::{
    build_prototype_index, build_prototypes_original, classify, classify_original, EmbeddingVector,
    LabelSet, QueryItem, SupportItem,
};
use ndarray::Array2;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// ---------------------------------------------------------------- 1

fn random_support(rng: &mut ChaCha8Rng, vocab: usize, n: usize, grid: bool) -> Vec<SupportItem> {
    (0..n)
        .map(|i| {
            let count = rng.random_range(1..=vocab.min(4));
            let labels: LabelSet = index::sample(rng, vocab, count).into_iter().collect();
            SupportItem::new(format!("s{i}"), random_vector(rng, grid), labels)
        })
        .collect()
}

fn random_vector(rng: &mut ChaCha8Rng, grid: bool) -> EmbeddingVector {
    loop {
        let v: Vec<f32> = (0..8)
            .map(|_| {
                if grid {
                    // Coarse values make exact distance ties common.
                    rng.random_range(-1i8..=1) as f32
                } else {
                    rng.sample::<f32, _>(StandardNormal)
                }
            })
            .collect();
        if v.iter().any(|&x| x != 0.0) {
            return EmbeddingVector::new(v).unwrap();
        }
    }
}

/// Minimum cosine distance over one prototype per non-empty subset of
/// every support item's labels, with the extent found by a direct scan.
fn oracle_min_distance(support: &[SupportItem], query: &EmbeddingVector) -> f64 {
    let mut classes = std::collections::BTreeSet::new();
    for item in support {
        let ids = item.labels.to_vec();
        for mask in 1u32..(1 << ids.len()) {
            let class: Vec<usize> = (0..ids.len()).filter(|b| mask >> b & 1 == 1).map(|b| ids[b]).collect();
            classes.insert(class);
        }
    }
    let mut best = f64::INFINITY;
    for class in classes {
        let members: Vec<&SupportItem> = support
            .iter()
            .filter(|s| class.iter().all(|&l| s.labels.contains(l)))
            .collect();
        let mut mean = [0f64; 8];
        for m in &members {
            for (a, &v) in mean.iter_mut().zip(m.embedding.as_slice()) {
                *a += f64::from(v);
            }
        }
        let proto: Vec<f64> = mean.iter().map(|a| f64::from((a / members.len() as f64) as f32)).collect();
        let q: Vec<f64> = query.as_slice().iter().map(|&v| f64::from(v)).collect();
        let dot: f64 = proto.iter().zip(&q).map(|(a, b)| a * b).sum();
        let np = proto.iter().map(|a| a * a).sum::<f64>().sqrt();
        let nq = q.iter().map(|a| a * a).sum::<f64>().sqrt();
        best = best.min(1.0 - dot / (np * nq));
    }
    best
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut queries, mut mismatches, mut distance_errors) = (0usize, 0usize, 0usize);
    let episodes = 240;
    for e in 0..episodes {
        let grid = e % 2 == 1;
        let vocab = rng.random_range(1..=12);
        let n = rng.random_range(1..=60);
        let support = random_support(&mut rng, vocab, n, grid);
        let index = build_prototype_index(&support, 20).map_err(|e| e.to_string())?;
        let original = build_prototypes_original(&support, 20).map_err(|e| e.to_string())?;
        let mut probes: Vec<EmbeddingVector> = (0..20).map(|_| random_vector(&mut rng, grid)).collect();
        probes.extend(support.iter().take(5).map(|s| s.embedding.clone()));
        for (i, v) in probes.into_iter().enumerate() {
            let q = QueryItem::new(format!("q{i}"), v);
            let a = classify(&q, &index).map_err(|e| e.to_string())?;
            let b = classify_original(&q, &original).map_err(|e| e.to_string())?;
            queries += 1;
            if a.labels != b.labels {
                mismatches += 1;
            }
            if (a.distance - oracle_min_distance(&support, &q.embedding)).abs() > 1e-9 {
                distance_errors += 1;
            }
        }
    }
    check(
        mismatches == 0 && distance_errors == 0,
        format!("{episodes} episodes, {queries} queries, {mismatches} label mismatches, {distance_errors} distance disagreements with the brute-force oracle"),
    )
}

// ---------------------------------------------------------------- 2

fn criterion_2() -> Outcome {
    let (a, b, c) = (0, 1, 2);
    let support = vec![
        SupportItem::new("e1", EmbeddingVector::new(vec![1.0, 0.0]).unwrap(), [a, b, c].into_iter().collect()),
        SupportItem::new("e2", EmbeddingVector::new(vec![0.0, 1.0]).unwrap(), [b, c].into_iter().collect()),
    ];
    let index = build_prototype_index(&support, 20).map_err(|e| e.to_string())?;
    let mut sizes: Vec<usize> = index.prototypes().iter().map(|p| p.classes().len()).collect();
    sizes.sort_unstable();
    let mut vectors: Vec<Vec<f32>> = index.prototypes().iter().map(|p| p.vector().as_slice().to_vec()).collect();
    vectors.sort_by(|x, y| y[0].total_cmp(&x[0]));
    let ok = index.total_classes() == 7
        && index.len() == 2
        && sizes == [3, 4]
        && vectors == [vec![1.0, 0.0], vec![0.5, 0.5]];
    check(
        ok,
        format!("|L| = {}, M = {}, group sizes {:?}, prototypes {:?}", index.total_classes(), index.len(), sizes, vectors),
    )
}

// ---------------------------------------------------------------- 3

fn criterion_3() -> Outcome {
    let rows = run_benchmark(&BenchConfig::default()).map_err(|e| e.to_string())?;
    for r in &rows {
        println!(
            "    labels {:>2}: |L| {:>8.1}  M {:>7.1}  M/|L| {:.4}  orig {:.4} ms  opt {:.4} ms  speedup {:.2}",
            r.num_labels,
            r.classes,
            r.prototypes,
            r.prototypes / r.classes,
            r.t_orig_ms,
            r.t_opt_ms,
            r.speedup
        );
    }
    let growing = rows.windows(2).all(|w| w[1].classes > w[0].classes);
    let growth = rows.last().unwrap().classes / rows[0].classes;
    let ratio_falls = rows
        .windows(2)
        .all(|w| w[1].prototypes / w[1].classes < w[0].prototypes / w[0].classes);
    let last = rows.last().unwrap();
    let speed_ok = last.classes < 5000.0 || last.speedup >= 10.0;
    check(
        growing && growth >= 5.0 && ratio_falls && speed_ok,
        format!(
            "|L| grows {growth:.1}x (strictly: {growing}), M/|L| strictly falls: {ratio_falls}, largest-point speedup {:.2} at |L| {:.0} (bound applies from 5000)",
            last.speedup, last.classes
        ),
    )
}

// ---------------------------------------------------------------- 4

/// Plain-loop loss used as the finite-difference oracle.
fn oracle_loss(x: &Array2<f64>, t: &Array2<f64>, p: &ProbeParams) -> f64 {
    let mut total = 0.0;
    for i in 0..x.nrows() {
        let hidden: Vec<f64> = (0..p.hidden_dim())
            .map(|h| {
                let z: f64 = p.b1[h] + (0..x.ncols()).map(|d| p.w1[(h, d)] * x[(i, d)]).sum::<f64>();
                z.max(0.0)
            })
            .collect();
        for l in 0..p.num_labels() {
            let z = p.b2[l] + (0..hidden.len()).map(|h| p.w2[(l, h)] * hidden[h]).sum::<f64>();
            let s = 1.0 / (1.0 + (-z).exp());
            total -= t[(i, l)] * s.ln() + (1.0 - t[(i, l)]) * (1.0 - s).ln();
        }
    }
    total / (x.nrows() * p.num_labels()) as f64
}

fn min_pre_activation(x: &Array2<f64>, p: &ProbeParams) -> f64 {
    let z = x.dot(&p.w1.t()) + &p.b1;
    z.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()))
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let h = 1e-4;
    let mut worst = 0f64;
    let mut instances = 0;
    let mut loss_gap = 0f64;
    while instances < 50 {
        let dim = rng.random_range(1..=8);
        let labels = rng.random_range(1..=4);
        let hidden = rng.random_range(2..=32);
        let batch = rng.random_range(1..=8);
        let mut p = ProbeParams::init(dim, hidden, labels, rng.random());
        for b in p.b1.iter_mut().chain(p.b2.iter_mut()) {
            *b = rng.random_range(-0.5..0.5);
        }
        let x = Array2::from_shape_fn((batch, dim), |_| rng.sample::<f64, _>(StandardNormal));
        let t = Array2::from_shape_fn((batch, labels), |_| f64::from(u8::from(rng.random_bool(0.5))));
        // Central differences straddling a ReLU kink are not derivatives.
        if min_pre_activation(&x, &p) < 1e-3 {
            continue;
        }
        instances += 1;
        loss_gap = loss_gap.max((batch_loss(x.view(), t.view(), &p).unwrap() - oracle_loss(&x, &t, &p)).abs());
        let grads = probe_gradient(x.view(), t.view(), &p).map_err(|e| e.to_string())?;
        let analytic: Vec<f64> = grads.tensors().iter().flat_map(|s| s.iter().copied()).collect();
        let mut k = 0;
        for tensor in 0..4 {
            let len = p.tensors()[tensor].len();
            for j in 0..len {
                let orig = p.tensors()[tensor][j];
                p.tensors_mut()[tensor][j] = orig + h;
                let up = oracle_loss(&x, &t, &p);
                p.tensors_mut()[tensor][j] = orig - h;
                let down = oracle_loss(&x, &t, &p);
                p.tensors_mut()[tensor][j] = orig;
                let numeric = (up - down) / (2.0 * h);
                let a = analytic[k];
                let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6);
                worst = worst.max(rel);
                k += 1;
            }
        }
    }
    check(
        worst <= 1e-4 && loss_gap <= 1e-12,
        format!("50 instances, max relative error {worst:.3e}, loss agrees with loop oracle to {loss_gap:.1e}"),
    )
}

// ---------------------------------------------------------------- 5

fn f1_oracle(pairs: &[(LabelSet, LabelSet)], labels: usize) -> (f64, f64) {
    let (mut tps, mut fps, mut fns) = (0usize, 0usize, 0usize);
    let mut per = Vec::new();
    for l in 0..labels {
        let tp = pairs.iter().filter(|(p, t)| p.contains(l) && t.contains(l)).count();
        let fp = pairs.iter().filter(|(p, t)| p.contains(l) && !t.contains(l)).count();
        let fn_ = pairs.iter().filter(|(p, t)| !p.contains(l) && t.contains(l)).count();
        tps += tp;
        fps += fp;
        fns += fn_;
        if tp + fn_ > 0 {
            per.push(2.0 * tp as f64 / (2 * tp + fp + fn_) as f64);
        }
    }
    let micro = if 2 * tps + fps + fns == 0 { 0.0 } else { 2.0 * tps as f64 / (2 * tps + fps + fns) as f64 };
    (per.iter().sum::<f64>() / per.len() as f64, micro)
}

fn auc_oracle(scores: &[f64], truth: &[bool]) -> Option<f64> {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for (i, &ti) in truth.iter().enumerate() {
        for (j, &tj) in truth.iter().enumerate() {
            if ti && !tj {
                pairs += 1.0;
                if scores[i] > scores[j] {
                    wins += 1.0;
                } else if scores[i] == scores[j] {
                    wins += 0.5;
                }
            }
        }
    }
    (pairs > 0.0).then(|| wins / pairs)
}

fn ap_oracle(scores: &[f64], truth: &[bool]) -> Option<f64> {
    // Rank of item i: items strictly above it, plus tied items with smaller index.
    let above = |i: usize, j: usize| scores[j] > scores[i] || (scores[j] == scores[i] && j < i);
    let positives: Vec<usize> = (0..truth.len()).filter(|&i| truth[i]).collect();
    if positives.is_empty() {
        return None;
    }
    let total: f64 = positives
        .iter()
        .map(|&i| {
            let rank = 1 + (0..truth.len()).filter(|&j| above(i, j)).count();
            let hits = 1 + positives.iter().filter(|&&j| above(i, j)).count();
            hits as f64 / rank as f64
        })
        .sum();
    Some(total / positives.len() as f64)
}

fn macro_of(values: Vec<Option<f64>>) -> f64 {
    let v: Vec<f64> = values.into_iter().flatten().collect();
    v.iter().sum::<f64>() / v.len() as f64
}

fn criterion_5() -> Outcome {
    let mut worst = 0f64;
    let mut track = |a: f64, b: f64| worst = worst.max((a - b).abs());

    // Worked examples.
    let ls = |ids: &[usize]| ids.iter().copied().collect::<LabelSet>();
    let pairs = vec![(ls(&[0]), ls(&[0, 1])), (ls(&[0, 1]), ls(&[0])), (ls(&[1]), ls(&[1]))];
    let r = f1_scores(&pairs, 2).map_err(|e| e.to_string())?;
    track(r.macro_f1, 0.75);
    track(r.micro_f1, 0.75);
    let auc = roc_auc(&ScoreMatrix::new(3, 1, vec![0.9, 0.4, 0.6], vec![true, false, true]).unwrap()).unwrap();
    track(auc.mean, 1.0);
    let ap = mean_average_precision(
        &ScoreMatrix::new(4, 1, vec![0.9, 0.8, 0.7, 0.1], vec![true, false, true, false]).unwrap(),
    )
    .unwrap();
    track(ap.mean, 5.0 / 6.0);
    let last = mean_average_precision(&ScoreMatrix::new(4, 1, vec![0.4, 0.3, 0.2, 0.1], vec![false, false, false, true]).unwrap()).unwrap();
    track(last.mean, 0.25);
    let flat = roc_auc(&ScoreMatrix::new(4, 1, vec![0.5; 4], vec![true, false, true, false]).unwrap()).unwrap();
    track(flat.mean, 0.5);

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let rows = rng.random_range(1..=200);
        let cols = rng.random_range(1..=10);
        let pairs: Vec<(LabelSet, LabelSet)> = (0..rows)
            .map(|_| {
                let p = (0..cols).filter(|_| rng.random_bool(0.3)).collect();
                let t = (0..cols).filter(|_| rng.random_bool(0.3)).collect();
                (p, t)
            })
            .collect();
        if pairs.iter().any(|(_, t)| !t.is_empty()) {
            let r = f1_scores(&pairs, cols).map_err(|e| e.to_string())?;
            let (m, u) = f1_oracle(&pairs, cols);
            track(r.macro_f1, m);
            track(r.micro_f1, u);
        }

        // Scores on a coarse grid produce ties.
        let scores: Vec<f64> = (0..rows * cols).map(|_| f64::from(rng.random_range(0..20u8)) / 19.0).collect();
        let truth: Vec<bool> = (0..rows * cols).map(|_| rng.random_bool(0.3)).collect();
        let matrix = ScoreMatrix::new(rows, cols, scores.clone(), truth.clone()).unwrap();
        let column = |c: usize| -> (Vec<f64>, Vec<bool>) {
            ((0..rows).map(|r| scores[r * cols + c]).collect(), (0..rows).map(|r| truth[r * cols + c]).collect())
        };
        let aucs: Vec<Option<f64>> = (0..cols).map(|c| { let (s, t) = column(c); auc_oracle(&s, &t) }).collect();
        let aps: Vec<Option<f64>> = (0..cols).map(|c| { let (s, t) = column(c); ap_oracle(&s, &t) }).collect();
        if aucs.iter().any(Option::is_some) {
            let r = roc_auc(&matrix).map_err(|e| e.to_string())?;
            track(r.mean, macro_of(aucs.clone()));
            for (got, want) in r.per_label.iter().zip(&aucs) {
                if got.is_some() != want.is_some() {
                    return Err("AUC skip list differs from oracle".into());
                }
            }
        }
        if aps.iter().any(Option::is_some) {
            let r = mean_average_precision(&matrix).map_err(|e| e.to_string())?;
            track(r.mean, macro_of(aps));
        }
    }
    check(worst <= 1e-12, format!("worked examples + 100 random instances, max deviation {worst:.1e}"))
}

// ---------------------------------------------------------------- 6

fn validation_auc(params: &ProbeParams, valid: &lcp_core::probe::ProbeDataset) -> f64 {
    let scores = probe_scores(valid.inputs(), params).unwrap();
    let truth: Vec<bool> = valid.targets().iter().map(|&t| t > 0.5).collect();
    let m = ScoreMatrix::new(scores.nrows(), scores.ncols(), scores.iter().copied().collect(), truth).unwrap();
    roc_auc(&m).unwrap().mean
}

fn criterion_6() -> Outcome {
    let data = generate_synthetic(&SyntheticSpec { seed: 6, ..SyntheticSpec::default() }).map_err(|e| e.to_string())?;
    let train = probe_dataset(&data.manifest, &data.store, Split::Train).map_err(|e| e.to_string())?;
    let valid = probe_dataset(&data.manifest, &data.store, Split::Valid).map_err(|e| e.to_string())?;
    let config = TrainConfig { seed: 6, ..TrainConfig::default() };
    let a = train_probe(&train, &valid, &config).map_err(|e| e.to_string())?;
    let b = train_probe(&train, &valid, &config).map_err(|e| e.to_string())?;
    let bits = |p: &ProbeParams| -> Vec<u64> { p.tensors().iter().flat_map(|t| t.iter().map(|v| v.to_bits())).collect() };
    let identical = bits(&a.params) == bits(&b.params);
    let auc = validation_auc(&a.params, &valid);
    check(
        auc >= 0.95 && identical && a.history.len() <= 200,
        format!(
            "20 labels, dim 32: validation ROC-AUC {auc:.4} after {} epochs (best {}), repeat run bit-identical: {identical}",
            a.history.len(),
            a.best_epoch
        ),
    )
}

// ---------------------------------------------------------------- 7

fn criterion_7() -> Outcome {
    let data = generate_synthetic(&SyntheticSpec::default()).map_err(|e| e.to_string())?;
    let train = probe_dataset(&data.manifest, &data.store, Split::Train).map_err(|e| e.to_string())?;
    let valid = probe_dataset(&data.manifest, &data.store, Split::Valid).map_err(|e| e.to_string())?;
    let probe = train_probe(&train, &valid, &TrainConfig::default()).map_err(|e| e.to_string())?;
    let features = probe_feature_store(&data.store, &probe.params).map_err(|e| e.to_string())?;
    let seeds = [0, 1, 2, 3, 4];
    let config = FslConfig::default();
    let pt = run_fsl(&data.manifest, &data.store, &config, &seeds).map_err(|e| e.to_string())?;
    let prob = run_fsl(&data.manifest, &features, &config, &seeds).map_err(|e| e.to_string())?;
    let mean = |runs: &[lcp_core::evaluation::RunMetrics]| runs.iter().map(|r| r.micro_f1).sum::<f64>() / runs.len() as f64;
    let (m_pt, m_prob) = (mean(&pt), mean(&prob));
    check(
        m_prob >= m_pt,
        format!("mean micro-F1 over seeds 0-4: PT {m_pt:.4}, Prob. {m_prob:.4}"),
    )
}

// ---------------------------------------------------------------- 8

fn expect<T: std::fmt::Debug>(r: Result<T, FormatError>, want: fn(&FormatError) -> bool, what: &str) -> Result<(), String> {
    match r {
        Err(e) if want(&e) => Ok(()),
        other => Err(format!("{what}: got {other:?}")),
    }
}

fn criterion_8() -> Outcome {
    let data = generate_synthetic(&SyntheticSpec { items_per_split: 60, ..SyntheticSpec::default() }).map_err(|e| e.to_string())?;
    let bytes = data.store.to_bytes();
    let store = EmbeddingStore::from_bytes(&bytes).map_err(|e| e.to_string())?;
    let vocab_text = vocabulary_to_string(data.manifest.vocabulary());
    let manifest_text = manifest_to_string(&data.manifest);
    let manifest = manifest_from_str(&manifest_text, vocabulary_from_str(&vocab_text).unwrap()).map_err(|e| e.to_string())?;
    let params = ProbeParams::init(32, 64, 20, 8);
    let pbytes = params_to_bytes(&params);
    let reparsed = params_from_bytes(&pbytes).map_err(|e| e.to_string())?;
    let round_trips = store.to_bytes() == bytes
        && manifest_to_string(&manifest) == manifest_text
        && params_to_bytes(&reparsed) == pbytes;
    if !round_trips {
        return Err("a round trip changed bytes".into());
    }

    // Every truncation of a store and a params file.
    for cut in 0..bytes.len().min(4096) {
        let r = EmbeddingStore::from_bytes(&bytes[..cut]);
        expect(r, |e| matches!(e, FormatError::CorruptRecord { .. } | FormatError::BadMagic { .. }), "store truncation")?;
    }
    for cut in 0..pbytes.len().min(4096) {
        let r = params_from_bytes(&pbytes[..cut]);
        expect(r, |e| matches!(e, FormatError::CorruptRecord { .. } | FormatError::BadMagic { .. }), "params truncation")?;
    }
    let mut bad = bytes.clone();
    bad[0] = b'X';
    expect(EmbeddingStore::from_bytes(&bad), |e| matches!(e, FormatError::BadMagic { .. }), "store magic")?;
    let mut bad = bytes.clone();
    bad[4] = 9;
    expect(EmbeddingStore::from_bytes(&bad), |e| matches!(e, FormatError::UnsupportedVersion(9)), "store version")?;
    let mut bad = bytes.clone();
    let first_id_len = u16::from_le_bytes([bad[18], bad[19]]) as usize;
    let first_float = 20 + first_id_len;
    bad[first_float..first_float + 4].copy_from_slice(&f32::NAN.to_le_bytes());
    expect(EmbeddingStore::from_bytes(&bad), |e| matches!(e, FormatError::NonFiniteValue(id) if id == "train-00000"), "store NaN")?;
    let mut bad = pbytes.clone();
    bad[18..22].copy_from_slice(&f32::INFINITY.to_le_bytes());
    expect(params_from_bytes(&bad), |e| matches!(e, FormatError::NonFiniteValue(t) if t == "w1"), "params Inf")?;
    let vocab = vocabulary_from_str(&vocab_text).unwrap();
    let unknown = manifest_text.replacen("label_", "nolabel_", 1);
    expect(manifest_from_str(&unknown, vocab.clone()), |e| matches!(e, FormatError::UnknownLabel { line: 1, .. }), "manifest label")?;
    let split = manifest_text.replacen("\"train\"", "\"dev\"", 1);
    expect(manifest_from_str(&split, vocab.clone()), |e| matches!(e, FormatError::UnknownSplit { line: 1, .. }), "manifest split")?;
    expect(manifest_from_str("{\"id\":", vocab), |e| matches!(e, FormatError::Parse { line: 1, .. }), "manifest syntax")?;

    // Random byte corruption must never panic.
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut rejected = 0;
    for _ in 0..2000 {
        let mut b = bytes.clone();
        for _ in 0..rng.random_range(1..4) {
            let at = rng.random_range(0..b.len());
            b[at] = rng.random();
        }
        if EmbeddingStore::from_bytes(&b).is_err() {
            rejected += 1;
        }
        let mut p = pbytes.clone();
        let at = rng.random_range(0..p.len());
        p[at] = rng.random();
        let _ = params_from_bytes(&p);
    }
    Ok(format!(
        "store/manifest/params round-trip byte-exact; truncations, bad magic/version, NaN/Inf, unknown label/split all give the expected errors; 2000 random corruptions handled ({rejected} rejected)"
    ))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("oracle equivalence", criterion_1),
        ("dedup arithmetic", criterion_2),
        ("scalability shape", criterion_3),
        ("gradient correctness", criterion_4),
        ("metric oracles", criterion_5),
        ("probe training sanity", criterion_6),
        ("feature-context ordering", criterion_7),
        ("format integrity", criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} {name}: PASS ({secs:.1}s) {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({secs:.1}s) {detail}", i + 1);
            }
        }
    }
    if failed == 0 {
        println!("acceptance: all 8 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} of 8 criteria failed");
        ExitCode::FAILURE
    }
}
