//! NDCG@n, precision@n and average precision over score-ranked results.
//!
//! Conventions: NDCG uses gain `2^label − 1` and discount `1/log2(j+1)` at
//! every rank `j` (rank 1 included), normalized by the ideal ordering and
//! defined as 0 when the ideal DCG is 0. For precision and AP a result is
//! relevant when `label >= relevance_threshold`; P@n always divides by `n`,
//! and AP is 0 for a query with no relevant results.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{rank_by_scores, score};
use crate::types::{ModelParams, OrdinalScale, Record};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricConfig {
    /// Strictly ascending, each at least 1.
    pub cutoffs: Vec<usize>,
    pub relevance_threshold: u8,
}

impl Default for MetricConfig {
    fn default() -> Self {
        MetricConfig {
            cutoffs: (1..=10).collect(),
            relevance_threshold: 1,
        }
    }
}

impl MetricConfig {
    pub fn validate(&self, scale: OrdinalScale) -> Result<()> {
        if self.cutoffs.is_empty() {
            return Err(Error::Config("at least one cutoff is required".into()));
        }
        if self.cutoffs.contains(&0) {
            return Err(Error::InvalidCutoff);
        }
        if self.cutoffs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("cutoffs must be strictly ascending".into()));
        }
        if self.relevance_threshold == 0 || !scale.contains(self.relevance_threshold) {
            return Err(Error::Config(format!(
                "relevance threshold {} outside 1..{}",
                self.relevance_threshold,
                scale.levels()
            )));
        }
        Ok(())
    }
}

/// Metrics for one query, `ndcg_at[i]` and `precision_at[i]` matching
/// `MetricConfig::cutoffs[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryMetrics {
    pub ndcg_at: Vec<f64>,
    pub precision_at: Vec<f64>,
    pub average_precision: f64,
}

impl QueryMetrics {
    /// Unweighted mean; `None` for an empty slice.
    pub fn mean(items: &[QueryMetrics]) -> Option<QueryMetrics> {
        let first = items.first()?;
        let n = items.len() as f64;
        let avg = |pick: &dyn Fn(&QueryMetrics) -> &Vec<f64>| -> Vec<f64> {
            (0..pick(first).len())
                .map(|i| items.iter().map(|m| pick(m)[i]).sum::<f64>() / n)
                .collect()
        };
        Some(QueryMetrics {
            ndcg_at: avg(&|m| &m.ndcg_at),
            precision_at: avg(&|m| &m.precision_at),
            average_precision: items.iter().map(|m| m.average_precision).sum::<f64>() / n,
        })
    }
}

fn gain(label: u8) -> f64 {
    2f64.powi(label as i32) - 1.0
}

fn dcg(labels: &[u8], n: usize) -> f64 {
    labels
        .iter()
        .take(n)
        .enumerate()
        .map(|(i, &l)| gain(l) / ((i + 2) as f64).log2())
        .sum()
}

pub fn ndcg_at_n(ranked_labels: &[u8], n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidCutoff);
    }
    let mut ideal = ranked_labels.to_vec();
    ideal.sort_unstable_by(|a, b| b.cmp(a));
    let ideal_dcg = dcg(&ideal, n);
    if ideal_dcg == 0.0 {
        return Ok(0.0);
    }
    Ok(dcg(ranked_labels, n) / ideal_dcg)
}

pub fn precision_at_n(ranked_labels: &[u8], n: usize, threshold: u8) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidCutoff);
    }
    let hits = ranked_labels.iter().take(n).filter(|&&l| l >= threshold).count();
    Ok(hits as f64 / n as f64)
}

pub fn average_precision(ranked_labels: &[u8], threshold: u8) -> f64 {
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (i, &label) in ranked_labels.iter().enumerate() {
        if label >= threshold {
            hits += 1;
            sum += hits as f64 / (i + 1) as f64;
        }
    }
    if hits == 0 {
        0.0
    } else {
        sum / hits as f64
    }
}

/// All metrics for labels already in ranked order.
pub fn evaluate_ranked(ranked_labels: &[u8], config: &MetricConfig) -> Result<QueryMetrics> {
    if ranked_labels.is_empty() {
        return Err(Error::EmptyGroup);
    }
    Ok(QueryMetrics {
        ndcg_at: config
            .cutoffs
            .iter()
            .map(|&n| ndcg_at_n(ranked_labels, n))
            .collect::<Result<_>>()?,
        precision_at: config
            .cutoffs
            .iter()
            .map(|&n| precision_at_n(ranked_labels, n, config.relevance_threshold))
            .collect::<Result<_>>()?,
        average_precision: average_precision(ranked_labels, config.relevance_threshold),
    })
}

/// Ranks `labels` by descending `scores` (ties in original order), then
/// evaluates.
pub fn evaluate_scores(scores: &[f64], labels: &[u8], config: &MetricConfig) -> Result<QueryMetrics> {
    if scores.len() != labels.len() {
        return Err(Error::LengthMismatch {
            what: "scores vs labels",
            left: scores.len(),
            right: labels.len(),
        });
    }
    let ranked: Vec<u8> = rank_by_scores(scores).into_iter().map(|i| labels[i]).collect();
    evaluate_ranked(&ranked, config)
}

/// Source of ranking scores for [`evaluate_query`].
#[derive(Debug, Clone, Copy)]
pub enum Scoring<'a> {
    /// Score each record by `w·Φ`.
    Model(&'a ModelParams),
    /// Precomputed scores aligned with the group.
    Scores(&'a [f64]),
}

pub fn evaluate_query(scoring: Scoring<'_>, group: &[Record], config: &MetricConfig) -> Result<QueryMetrics> {
    if group.is_empty() {
        return Err(Error::EmptyGroup);
    }
    let labels: Vec<u8> = group.iter().map(|r| r.label).collect();
    match scoring {
        Scoring::Scores(scores) => evaluate_scores(scores, &labels, config),
        Scoring::Model(params) => {
            let scores = group
                .iter()
                .map(|r| score(&params.w, &r.features))
                .collect::<Result<Vec<_>>>()?;
            evaluate_scores(&scores, &labels, config)
        }
    }
}
