//! Synthetic ranking data drawn from the model itself, for verification
//! without the LETOR files.
//!
//! Draw order (all from one ChaCha8 stream seeded by `seed`):
//! 1. `w*`, components uniform in `[-1, 1]`;
//! 2. intercepts per query in id order: `Θ` uniform in `[-spread, spread]`,
//!    or for three-level kinds `Θ^L` uniform in `[-spread, spread]` and
//!    `Θ^H = Θ^L + gap` with gap uniform in `[0.5, 1.5]`. The shared baseline
//!    draws a single `Θ`;
//! 3. with a non-zero `query_shift`, one direction `d` uniform in `[-1, 1]^k`;
//! 4. per query, per result: features uniform in `[-1, 1]` (plus the query
//!    offset), then the label by inverting the model's label distribution
//!    with one uniform draw.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::letor::format_record;
use crate::model::{dot, label_probs, ModelKind};
use crate::train::{SavedModel, TrainConfig};
use crate::types::{validate_dataset, Dataset, Intercept, Intercepts, ModelParams, Record};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub n_queries: usize,
    pub results_per_query: usize,
    pub k: usize,
    pub kind: ModelKind,
    pub seed: u64,
    /// Half-width of the intercept distribution.
    pub intercept_spread: f64,
    /// Offsets every feature of query `i` by `query_shift · Θ_i · d` for a
    /// random unit direction `d`, so a query's feature level tracks its
    /// benchmark. Zero leaves features centered. Three-level kinds use `Θ^L`.
    pub query_shift: f64,
}

impl SynthConfig {
    pub fn new(n_queries: usize, results_per_query: usize, k: usize, kind: ModelKind, seed: u64) -> Self {
        SynthConfig {
            n_queries,
            results_per_query,
            k,
            kind,
            seed,
            intercept_spread: 1.0,
            query_shift: 0.0,
        }
    }
}

/// Query ids `"1"..="n"`.
pub fn query_ids(n_queries: usize) -> Vec<String> {
    (1..=n_queries).map(|i| i.to_string()).collect()
}

/// Draws `(dataset, true parameters)` with intercepts in `[-1, 1]`.
pub fn generate_synthetic(
    n_queries: usize,
    results_per_query: usize,
    k: usize,
    kind: ModelKind,
    seed: u64,
) -> Result<(Dataset, ModelParams)> {
    generate(&SynthConfig::new(n_queries, results_per_query, k, kind, seed))
}

pub fn generate(config: &SynthConfig) -> Result<(Dataset, ModelParams)> {
    if config.n_queries == 0 || config.results_per_query == 0 {
        return Err(Error::Config("synthetic sizes must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let spread = config.intercept_spread;
    let w: Vec<f64> = (0..config.k).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let ids = query_ids(config.n_queries);
    let draw_theta = |rng: &mut ChaCha8Rng| {
        if spread > 0.0 {
            rng.gen_range(-spread..=spread)
        } else {
            0.0
        }
    };
    let intercepts = if config.kind.per_query() {
        let mut map = BTreeMap::new();
        for id in &ids {
            let intercept = if config.kind.is_trinary() {
                let low = draw_theta(&mut rng);
                let gap = rng.gen_range(0.5..=1.5);
                Intercept::Pair(low + gap, low)
            } else {
                Intercept::Single(draw_theta(&mut rng))
            };
            map.insert(id.clone(), intercept);
        }
        Intercepts::PerQuery(map)
    } else {
        Intercepts::Shared(draw_theta(&mut rng))
    };
    let truth = ModelParams { w, intercepts };
    let offsets = if config.query_shift != 0.0 {
        let d: Vec<f64> = (0..config.k).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let norm = d.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
        let level = |qid: &str| match truth.intercept(qid) {
            Some(Intercept::Single(t) | Intercept::Pair(_, t)) => t,
            None => 0.0,
        };
        ids.iter()
            .map(|q| d.iter().map(|x| config.query_shift * level(q) * x / norm).collect())
            .collect()
    } else {
        Vec::new()
    };
    let dataset = sample_with(&truth, config.kind, &ids, config.results_per_query, &offsets, &mut rng)?;
    Ok((dataset, truth))
}

/// Draws features and labels for `query_ids` under fixed parameters.
pub fn sample_dataset(
    truth: &ModelParams,
    kind: ModelKind,
    query_ids: &[String],
    results_per_query: usize,
    seed: u64,
) -> Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_with(truth, kind, query_ids, results_per_query, &[], &mut rng)
}

fn sample_with(
    truth: &ModelParams,
    kind: ModelKind,
    query_ids: &[String],
    results_per_query: usize,
    offsets: &[Vec<f64>],
    rng: &mut ChaCha8Rng,
) -> Result<Dataset> {
    let mut records = Vec::with_capacity(query_ids.len() * results_per_query);
    for (qi, qid) in query_ids.iter().enumerate() {
        let intercept = truth.intercept(qid).ok_or_else(|| Error::UnknownQuery(qid.clone()))?;
        if !kind.accepts(intercept) {
            return Err(Error::InterceptShape(qid.clone()));
        }
        for j in 0..results_per_query {
            let mut features: Vec<f64> = (0..truth.k()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            if let Some(offset) = offsets.get(qi) {
                for (f, o) in features.iter_mut().zip(offset) {
                    *f += o;
                }
            }
            let probs = label_probs(kind, dot(&truth.w, &features), intercept);
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            let mut label = probs.len() - 1;
            for (l, p) in probs.iter().enumerate() {
                acc += p;
                if u < acc {
                    label = l;
                    break;
                }
            }
            let mut record = Record::new(qid.clone(), label as u8, features);
            record.meta = format!("docid = {qid}-{j}");
            records.push(record);
        }
    }
    validate_dataset(records, Some(kind.scale()))
}

/// Writes `Fold1`..`Fold5` under `root` in LETOR layout plus `truth.json`.
///
/// Queries are cut into five consecutive blocks; fold `f` tests on block
/// `f`, validates on block `f+1` (cyclically) and trains on the rest.
pub fn write_fold_tree(root: &Path, config: &SynthConfig) -> Result<ModelParams> {
    if config.n_queries < 5 {
        return Err(Error::Config("need at least 5 queries for 5 folds".into()));
    }
    let (dataset, truth) = generate(config)?;
    let block_of = |group_index: usize| group_index * 5 / dataset.n_queries();
    let mut blocks: Vec<String> = vec![String::new(); 5];
    for (gi, group) in dataset.groups().iter().enumerate() {
        let text = &mut blocks[block_of(gi)];
        for record in dataset.group_records(group) {
            text.push_str(&format_record(record));
            text.push('\n');
        }
    }
    for fold in 0..5 {
        let dir = root.join(format!("Fold{}", fold + 1));
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let vali = (fold + 1) % 5;
        let train: String = (0..5)
            .filter(|&b| b != fold && b != vali)
            .map(|b| blocks[b].as_str())
            .collect();
        for (name, text) in [("train.txt", train.as_str()), ("vali.txt", &blocks[vali]), ("test.txt", &blocks[fold])] {
            let path = dir.join(name);
            fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        }
    }
    SavedModel {
        kind: config.kind,
        params: truth.clone(),
        config: TrainConfig::default(),
    }
    .save(&root.join("truth.json"))?;
    Ok(truth)
}
