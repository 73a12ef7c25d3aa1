//! Logit-link probability models for a result's label given its linear
//! score `w·Φ` and the query's benchmark(s).
//!
//! Every label probability is a product of sigmoids of signed differences
//! `±(w·Φ − θ)`, so the models are described once as tables of
//! [`Comparison`]s and evaluated in log space.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{Intercept, ModelParams, OrdinalScale, Record};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// Binary labels, one intercept per query.
    Binary,
    /// Three labels: compare against the high benchmark first (label 2),
    /// otherwise against the low one (1 or 0).
    TrinaryCascade,
    /// Three labels: compare against the low benchmark first (label 0),
    /// otherwise against the high one (1 or 2).
    TrinaryCascadeAlt,
    /// Binary labels, one intercept shared by all queries.
    NoInterceptBaseline,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::Binary,
        ModelKind::TrinaryCascade,
        ModelKind::TrinaryCascadeAlt,
        ModelKind::NoInterceptBaseline,
    ];

    pub fn scale(self) -> OrdinalScale {
        match self {
            ModelKind::Binary | ModelKind::NoInterceptBaseline => OrdinalScale::BINARY,
            ModelKind::TrinaryCascade | ModelKind::TrinaryCascadeAlt => OrdinalScale::TRINARY,
        }
    }

    pub fn is_trinary(self) -> bool {
        self.scale() == OrdinalScale::TRINARY
    }

    pub fn per_query(self) -> bool {
        self != ModelKind::NoInterceptBaseline
    }

    /// Intercept parameters per query (1 or 2).
    pub fn thresholds_per_query(self) -> usize {
        if self.is_trinary() {
            2
        } else {
            1
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Binary => "binary",
            ModelKind::TrinaryCascade => "trinary-cascade",
            ModelKind::TrinaryCascadeAlt => "trinary-cascade-alt",
            ModelKind::NoInterceptBaseline => "no-intercept-baseline",
        }
    }

    /// Checks the intercept variant against the kind.
    pub fn accepts(self, intercept: Intercept) -> bool {
        matches!(
            (self.is_trinary(), intercept),
            (false, Intercept::Single(_)) | (true, Intercept::Pair(..))
        )
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary" => Ok(ModelKind::Binary),
            "trinary" | "trinary-cascade" => Ok(ModelKind::TrinaryCascade),
            "trinary-alt" | "trinary-cascade-alt" => Ok(ModelKind::TrinaryCascadeAlt),
            "no-intercept" | "no-intercept-baseline" | "baseline" => Ok(ModelKind::NoInterceptBaseline),
            other => Err(Error::Config(format!("unknown model kind '{other}'"))),
        }
    }
}

/// Which benchmark a comparison uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Threshold {
    Single,
    High,
    Low,
}

/// One factor `σ(sign · (score − θ))` of a label probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparison {
    pub sign: f64,
    pub threshold: Threshold,
}

const fn cmp(sign: f64, threshold: Threshold) -> Comparison {
    Comparison { sign, threshold }
}

use Threshold::{High, Low, Single};

const BINARY: [&[Comparison]; 2] = [&[cmp(-1.0, Single)], &[cmp(1.0, Single)]];

const CASCADE: [&[Comparison]; 3] = [
    &[cmp(-1.0, High), cmp(-1.0, Low)],
    &[cmp(-1.0, High), cmp(1.0, Low)],
    &[cmp(1.0, High)],
];

const CASCADE_ALT: [&[Comparison]; 3] = [
    &[cmp(-1.0, Low)],
    &[cmp(1.0, Low), cmp(-1.0, High)],
    &[cmp(1.0, Low), cmp(1.0, High)],
];

/// The sigmoid factors whose product is `P(label)`.
///
/// Panics if `label` is outside the kind's scale.
pub fn comparisons(kind: ModelKind, label: u8) -> &'static [Comparison] {
    let table: &[&[Comparison]] = match kind {
        ModelKind::Binary | ModelKind::NoInterceptBaseline => &BINARY,
        ModelKind::TrinaryCascade => &CASCADE,
        ModelKind::TrinaryCascadeAlt => &CASCADE_ALT,
    };
    table[label as usize]
}

/// Logistic function, exponentiating only non-positive arguments.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln σ(x) = −softplus(−x)`.
pub fn log_sigmoid(x: f64) -> f64 {
    -softplus(-x)
}

/// `ln(1 + eˣ)`.
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Linear ranking score `w·Φ`.
pub fn score(w: &[f64], features: &[f64]) -> Result<f64> {
    if w.len() != features.len() {
        return Err(Error::LengthMismatch {
            what: "weights vs features",
            left: w.len(),
            right: features.len(),
        });
    }
    Ok(dot(w, features))
}

fn threshold_value(intercept: Intercept, threshold: Threshold) -> f64 {
    match (intercept, threshold) {
        (Intercept::Single(t), _) => t,
        (Intercept::Pair(h, _), High) => h,
        (Intercept::Pair(_, l), Low) => l,
        (Intercept::Pair(h, _), Single) => h,
    }
}

/// `ln P(label | score, intercept)`.
pub fn log_prob(kind: ModelKind, score: f64, intercept: Intercept, label: u8) -> f64 {
    comparisons(kind, label)
        .iter()
        .map(|c| log_sigmoid(c.sign * (score - threshold_value(intercept, c.threshold))))
        .sum()
}

fn probs<const N: usize>(kind: ModelKind, score: f64, intercept: Intercept) -> [f64; N] {
    std::array::from_fn(|label| log_prob(kind, score, intercept, label as u8).exp())
}

/// `(P(0), P(1))` for the binary model.
pub fn prob_binary(w: &[f64], theta: f64, features: &[f64]) -> Result<[f64; 2]> {
    let s = score(w, features)?;
    Ok(probs(ModelKind::Binary, s, Intercept::Single(theta)))
}

/// `(P(0), P(1), P(2))` for the high-first cascade.
pub fn prob_trinary(w: &[f64], theta_high: f64, theta_low: f64, features: &[f64]) -> Result<[f64; 3]> {
    let s = score(w, features)?;
    Ok(probs(ModelKind::TrinaryCascade, s, Intercept::Pair(theta_high, theta_low)))
}

/// `(P(0), P(1), P(2))` for the low-first cascade.
pub fn prob_trinary_alt(w: &[f64], theta_high: f64, theta_low: f64, features: &[f64]) -> Result<[f64; 3]> {
    let s = score(w, features)?;
    Ok(probs(ModelKind::TrinaryCascadeAlt, s, Intercept::Pair(theta_high, theta_low)))
}

/// Label probabilities for any kind, indexed by label.
pub fn label_probs(kind: ModelKind, score: f64, intercept: Intercept) -> Vec<f64> {
    (0..kind.scale().levels())
        .map(|label| log_prob(kind, score, intercept, label).exp())
        .collect()
}

/// Indices ordered by descending score; equal scores keep their original
/// order.
pub fn rank_by_scores(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    order
}

/// Ranks one query's records by `w·Φ`. Intercepts are not read.
pub fn rank_query(params: &ModelParams, group: &[Record]) -> Result<Vec<usize>> {
    let scores = group
        .iter()
        .map(|r| score(&params.w, &r.features))
        .collect::<Result<Vec<_>>>()?;
    Ok(rank_by_scores(&scores))
}
