//! Five-fold protocol: fit on each fold's training file, rank its test file
//! by `w·Φ` alone, average metrics over test queries, then report
//! mean ± sample stdev across folds next to the published baselines.
//!
//! Validation files are located but never read.

pub mod baselines;
mod report;
pub mod synth;

pub use baselines::Collection;
pub use report::{emit_report, ReportFormat};

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::letor::{self, FileSource, Filesystem, FoldSpec};
use crate::metrics::{evaluate_query, MetricConfig, QueryMetrics, Scoring};
use crate::model::{score, ModelKind};
use crate::train::{fit, TrainConfig};
use crate::types::{validate_dataset, Dataset, ModelParams, Record};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dataset_root: PathBuf,
    /// Overrides the `Fold1`..`Fold5` layout under `dataset_root`.
    pub folds: Option<Vec<FoldSpec>>,
    pub model_kind: ModelKind,
    pub train_config: TrainConfig,
    pub metric_config: MetricConfig,
    /// Per-query min-max scaling of every feature.
    pub normalize_features: bool,
    /// Where per-fold score files go; none are written when unset.
    pub score_dir: Option<PathBuf>,
    /// Selects the published baseline rows attached to the report.
    pub collection: Option<Collection>,
}

impl ExperimentConfig {
    pub fn new(dataset_root: impl Into<PathBuf>, model_kind: ModelKind) -> Self {
        ExperimentConfig {
            dataset_root: dataset_root.into(),
            folds: None,
            model_kind,
            train_config: TrainConfig::default(),
            metric_config: MetricConfig::default(),
            normalize_features: false,
            score_dir: None,
            collection: None,
        }
    }

    pub fn resolve_folds(&self) -> Result<Vec<FoldSpec>> {
        match &self.folds {
            Some(folds) if folds.len() == 5 => Ok(folds.clone()),
            Some(folds) => Err(Error::FoldCount(folds.len())),
            None => letor::locate_folds(&self.dataset_root),
        }
    }
}

/// Min-max scales each feature within each query group; constant features
/// become 0.
pub fn normalize_per_query(dataset: &Dataset) -> Result<Dataset> {
    let mut records = dataset.records().to_vec();
    for group in dataset.groups() {
        for f in 0..dataset.k() {
            let values = group.positions.iter().map(|&p| records[p].features[f]);
            let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
            let range = hi - lo;
            for &p in &group.positions {
                let v = &mut records[p].features[f];
                *v = if range > 0.0 { (*v - lo) / range } else { 0.0 };
            }
        }
    }
    validate_dataset(records, Some(dataset.scale()))
}

/// `w·Φ` for every record, in record order.
pub fn score_records(params: &ModelParams, records: &[Record]) -> Result<Vec<f64>> {
    records.iter().map(|r| score(&params.w, &r.features)).collect()
}

/// Metrics for every query of `dataset` given aligned scores.
pub fn evaluate_dataset(
    dataset: &Dataset,
    scores: &[f64],
    config: &MetricConfig,
) -> Result<Vec<(String, QueryMetrics)>> {
    if scores.len() != dataset.len() {
        return Err(Error::LengthMismatch {
            what: "scores vs records",
            left: scores.len(),
            right: dataset.len(),
        });
    }
    dataset
        .groups()
        .iter()
        .map(|group| {
            let records: Vec<Record> = dataset.group_records(group).cloned().collect();
            let group_scores: Vec<f64> = group.positions.iter().map(|&p| scores[p]).collect();
            let metrics = evaluate_query(Scoring::Scores(&group_scores), &records, config)?;
            Ok((group.query_id.clone(), metrics))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldOutcome {
    pub fold_id: u32,
    pub per_query: Vec<(String, QueryMetrics)>,
    /// Unweighted mean over test queries.
    pub average: QueryMetrics,
    pub params: ModelParams,
    pub converged: bool,
    pub iterations: usize,
    pub final_nll: f64,
    pub score_path: Option<PathBuf>,
}

fn load_split(source: &dyn FileSource, path: &Path, config: &ExperimentConfig) -> Result<Dataset> {
    let records = letor::parse_file_from(source, path)?;
    let dataset = validate_dataset(records, Some(config.model_kind.scale()))?;
    if config.normalize_features {
        normalize_per_query(&dataset)
    } else {
        Ok(dataset)
    }
}

pub fn run_fold(fold: &FoldSpec, config: &ExperimentConfig) -> Result<FoldOutcome> {
    run_fold_with(fold, config, &Filesystem)
}

/// [`run_fold`] reading input files through `source`.
pub fn run_fold_with(fold: &FoldSpec, config: &ExperimentConfig, source: &dyn FileSource) -> Result<FoldOutcome> {
    fold.check()?;
    config.metric_config.validate(config.model_kind.scale())?;

    let train = load_split(source, &fold.train_path, config)?;
    let fitted = fit(&train, config.model_kind, &config.train_config)?;
    drop(train);

    let test = load_split(source, &fold.test_path, config)?;
    let scores = score_records(&fitted.params, test.records())?;

    let score_path = match &config.score_dir {
        Some(dir) => {
            let path = dir.join(format!("fold{}.scores", fold.fold_id));
            letor::write_scores(test.records(), &scores, &path)?;
            Some(path)
        }
        None => None,
    };

    let per_query = evaluate_dataset(&test, &scores, &config.metric_config)?;
    let metrics: Vec<QueryMetrics> = per_query.iter().map(|(_, m)| m.clone()).collect();
    let average = QueryMetrics::mean(&metrics).ok_or(Error::EmptyGroup)?;

    Ok(FoldOutcome {
        fold_id: fold.fold_id,
        per_query,
        average,
        params: fitted.params,
        converged: fitted.converged,
        iterations: fitted.iterations,
        final_nll: fitted.final_nll,
        score_path,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanStd {
    pub mean: f64,
    pub stdev: f64,
}

/// Mean and sample (n−1) standard deviation; stdev is 0 for fewer than two
/// values.
pub fn mean_and_sample_stdev(values: &[f64]) -> MeanStd {
    let n = values.len() as f64;
    if values.is_empty() {
        return MeanStd { mean: 0.0, stdev: 0.0 };
    }
    let mean = values.iter().sum::<f64>() / n;
    let stdev = if values.len() < 2 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    MeanStd { mean, stdev }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FoldSummary {
    pub fold_id: u32,
    pub average: QueryMetrics,
    pub test_queries: usize,
    pub converged: bool,
    pub iterations: usize,
    pub final_nll: f64,
}

impl From<&FoldOutcome> for FoldSummary {
    fn from(outcome: &FoldOutcome) -> Self {
        FoldSummary {
            fold_id: outcome.fold_id,
            average: outcome.average.clone(),
            test_queries: outcome.per_query.len(),
            converged: outcome.converged,
            iterations: outcome.iterations,
            final_nll: outcome.final_nll,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateReport {
    pub model_kind: ModelKind,
    pub cutoffs: Vec<usize>,
    pub folds: Vec<FoldSummary>,
    pub ndcg: Vec<MeanStd>,
    pub precision: Vec<MeanStd>,
    pub map: MeanStd,
    pub collection: Option<Collection>,
    pub warnings: Vec<String>,
}

impl AggregateReport {
    /// Aggregates fold summaries (in the given order) across folds.
    pub fn from_folds(
        model_kind: ModelKind,
        cutoffs: Vec<usize>,
        folds: Vec<FoldSummary>,
        collection: Option<Collection>,
    ) -> Self {
        let column = |pick: &dyn Fn(&QueryMetrics) -> f64| -> MeanStd {
            let values: Vec<f64> = folds.iter().map(|f| pick(&f.average)).collect();
            mean_and_sample_stdev(&values)
        };
        let ndcg = (0..cutoffs.len()).map(|i| column(&|m| m.ndcg_at[i])).collect();
        let precision = (0..cutoffs.len()).map(|i| column(&|m| m.precision_at[i])).collect();
        let map = column(&|m| m.average_precision);
        let warnings = folds
            .iter()
            .filter(|f| !f.converged)
            .map(|f| format!("fold {}: fit stopped after {} iterations without converging", f.fold_id, f.iterations))
            .collect();
        AggregateReport {
            model_kind,
            cutoffs,
            folds,
            ndcg,
            precision,
            map,
            collection,
            warnings,
        }
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<AggregateReport> {
    run_experiment_with(config, &Filesystem)
}

/// Runs all five folds concurrently; results are assembled in fold order.
pub fn run_experiment_with(config: &ExperimentConfig, source: &dyn FileSource) -> Result<AggregateReport> {
    let folds = config.resolve_folds()?;
    config.metric_config.validate(config.model_kind.scale())?;
    let outcomes: Vec<Result<FoldOutcome>> = std::thread::scope(|scope| {
        let handles: Vec<_> = folds
            .iter()
            .map(|fold| scope.spawn(move || run_fold_with(fold, config, source)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("fold worker panicked"))
            .collect()
    });
    let mut summaries = Vec::with_capacity(folds.len());
    for (fold, outcome) in folds.iter().zip(outcomes) {
        let outcome = outcome.map_err(|e| Error::Fold {
            fold: fold.fold_id,
            source: Box::new(e),
        })?;
        summaries.push(FoldSummary::from(&outcome));
    }
    Ok(AggregateReport::from_folds(
        config.model_kind,
        config.metric_config.cutoffs.clone(),
        summaries,
        config.collection,
    ))
}
