//! Maximum-likelihood fitting of the weight vector and per-query
//! intercepts.
//!
//! The objective is the ridge-penalized negative log-likelihood
//! `−Σ ln P(L | Q, R) + (l2/2)·‖θ‖²` over all parameters. Parameters are laid
//! out as `[w (k entries), intercepts in ascending query id]`, with the high
//! threshold before the low one for three-level kinds and a single slot for
//! the shared-intercept baseline.

mod lbfgs;
mod model_file;

pub use model_file::SavedModel;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{comparisons, dot, sigmoid, softplus, ModelKind, Threshold};
use crate::types::{Dataset, Intercept, Intercepts, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub l2_penalty: f64,
    /// Stop once the gradient's infinity norm is below this.
    pub grad_tolerance: f64,
    pub max_iterations: usize,
    /// Number of (s, y) pairs kept by the quasi-Newton update.
    pub history_size: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            l2_penalty: 1e-6,
            grad_tolerance: 1e-8,
            max_iterations: 500,
            history_size: 10,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.l2_penalty >= 0.0 && self.l2_penalty.is_finite()) {
            return Err(Error::Config("l2_penalty must be a finite non-negative number".into()));
        }
        if self.grad_tolerance.is_nan() || self.grad_tolerance <= 0.0 {
            return Err(Error::Config("grad_tolerance must be positive".into()));
        }
        if self.max_iterations == 0 || self.history_size == 0 {
            return Err(Error::Config("max_iterations and history_size must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub params: ModelParams,
    /// Penalized objective at `params`.
    pub final_nll: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective at the zero start, then after each accepted step.
    pub nll_trace: Vec<f64>,
}

/// Maps [`ModelParams`] to and from the flat optimizer vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamLayout {
    kind: ModelKind,
    k: usize,
    query_ids: Vec<String>,
}

impl ParamLayout {
    /// Layout covering every query of `dataset`.
    pub fn for_dataset(kind: ModelKind, dataset: &Dataset) -> Self {
        let query_ids = if kind.per_query() {
            dataset.sorted_query_ids()
        } else {
            Vec::new()
        };
        ParamLayout {
            kind,
            k: dataset.k(),
            query_ids,
        }
    }

    /// Layout covering the queries present in `params`.
    pub fn for_params(kind: ModelKind, params: &ModelParams) -> Result<Self> {
        let query_ids = match (&params.intercepts, kind.per_query()) {
            (Intercepts::PerQuery(map), true) => {
                for (qid, intercept) in map {
                    if !kind.accepts(*intercept) {
                        return Err(Error::InterceptShape(qid.clone()));
                    }
                }
                map.keys().cloned().collect()
            }
            (Intercepts::Shared(_), false) => Vec::new(),
            _ => {
                return Err(Error::Config(format!(
                    "intercept layout does not match model kind {kind}"
                )))
            }
        };
        Ok(ParamLayout {
            kind,
            k: params.k(),
            query_ids,
        })
    }

    pub fn len(&self) -> usize {
        self.k
            + if self.kind.per_query() {
                self.query_ids.len() * self.kind.thresholds_per_query()
            } else {
                1
            }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn query_ids(&self) -> &[String] {
        &self.query_ids
    }

    /// Flat index of a query's first threshold.
    fn query_slot(&self, query_id: &str) -> Option<usize> {
        if !self.kind.per_query() {
            return Some(self.k);
        }
        self.query_ids
            .binary_search_by(|q| q.as_str().cmp(query_id))
            .ok()
            .map(|i| self.k + i * self.kind.thresholds_per_query())
    }

    pub fn flatten(&self, params: &ModelParams) -> Result<Vec<f64>> {
        if params.k() != self.k {
            return Err(Error::LengthMismatch {
                what: "weights vs dataset features",
                left: params.k(),
                right: self.k,
            });
        }
        let mut x = params.w.clone();
        match &params.intercepts {
            Intercepts::Shared(t) => x.push(*t),
            Intercepts::PerQuery(map) => {
                for qid in &self.query_ids {
                    match map.get(qid) {
                        Some(Intercept::Single(t)) => x.push(*t),
                        Some(Intercept::Pair(h, l)) => x.extend([*h, *l]),
                        None => return Err(Error::UnknownQuery(qid.clone())),
                    }
                }
            }
        }
        debug_assert_eq!(x.len(), self.len());
        Ok(x)
    }

    pub fn unflatten(&self, x: &[f64]) -> ModelParams {
        let w = x[..self.k].to_vec();
        let rest = &x[self.k..];
        let intercepts = if self.kind.per_query() {
            let map: BTreeMap<String, Intercept> = if self.kind.is_trinary() {
                self.query_ids
                    .iter()
                    .zip(rest.chunks_exact(2))
                    .map(|(q, c)| (q.clone(), Intercept::Pair(c[0], c[1])))
                    .collect()
            } else {
                self.query_ids
                    .iter()
                    .zip(rest)
                    .map(|(q, t)| (q.clone(), Intercept::Single(*t)))
                    .collect()
            };
            Intercepts::PerQuery(map)
        } else {
            Intercepts::Shared(rest[0])
        };
        ModelParams { w, intercepts }
    }
}

/// Compensated summation; keeps the objective accurate to a few ulps so
/// the line search can resolve small decreases.
#[derive(Default)]
struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Penalized NLL and its gradient over a dataset, for a fixed layout.
struct Objective<'a> {
    dataset: &'a Dataset,
    kind: ModelKind,
    k: usize,
    l2: f64,
    /// Flat index of each record's first threshold.
    slots: Vec<usize>,
}

impl<'a> Objective<'a> {
    fn new(dataset: &'a Dataset, kind: ModelKind, layout: &ParamLayout, l2: f64) -> Result<Self> {
        if dataset.scale() != kind.scale() {
            return Err(Error::IncompatibleScale {
                kind: kind.to_string(),
                required: kind.scale().levels(),
                found: dataset.scale().levels(),
            });
        }
        if dataset.k() != layout.k {
            return Err(Error::LengthMismatch {
                what: "weights vs dataset features",
                left: layout.k,
                right: dataset.k(),
            });
        }
        let mut slot_of_group = Vec::with_capacity(dataset.n_queries());
        for group in dataset.groups() {
            let slot = layout
                .query_slot(&group.query_id)
                .ok_or_else(|| Error::UnknownQuery(group.query_id.clone()))?;
            slot_of_group.push(slot);
        }
        let mut slots = vec![0; dataset.len()];
        for (group, &slot) in dataset.groups().iter().zip(&slot_of_group) {
            for &p in &group.positions {
                slots[p] = slot;
            }
        }
        Ok(Objective {
            dataset,
            kind,
            k: layout.k,
            l2,
            slots,
        })
    }

    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        grad.fill(0.0);
        let w = &x[..self.k];
        let mut value = NeumaierSum::default();
        for (record, &slot) in self.dataset.records().iter().zip(&self.slots) {
            let s = dot(w, &record.features);
            let mut d_score = 0.0;
            for c in comparisons(self.kind, record.label) {
                let t = match c.threshold {
                    Threshold::Single | Threshold::High => slot,
                    Threshold::Low => slot + 1,
                };
                let a = c.sign * (s - x[t]);
                value.add(softplus(-a));
                let g = -c.sign * sigmoid(-a);
                d_score += g;
                grad[t] -= g;
            }
            for (gj, fj) in grad[..self.k].iter_mut().zip(&record.features) {
                *gj += d_score * fj;
            }
        }
        if self.l2 > 0.0 {
            value.add(0.5 * self.l2 * dot(x, x));
            for (gj, xj) in grad.iter_mut().zip(x) {
                *gj += self.l2 * xj;
            }
        }
        value.total()
    }
}

/// Penalized negative log-likelihood of `dataset` under `params`.
pub fn negative_log_likelihood(params: &ModelParams, dataset: &Dataset, kind: ModelKind, l2: f64) -> Result<f64> {
    let layout = ParamLayout::for_params(kind, params)?;
    let objective = Objective::new(dataset, kind, &layout, l2)?;
    let x = layout.flatten(params)?;
    let mut grad = vec![0.0; x.len()];
    Ok(objective.value_and_gradient(&x, &mut grad))
}

/// Analytic gradient of [`negative_log_likelihood`] in the flat layout of
/// `params` (see [`ParamLayout`]).
pub fn gradient(params: &ModelParams, dataset: &Dataset, kind: ModelKind, l2: f64) -> Result<Vec<f64>> {
    let layout = ParamLayout::for_params(kind, params)?;
    let objective = Objective::new(dataset, kind, &layout, l2)?;
    let x = layout.flatten(params)?;
    let mut grad = vec![0.0; x.len()];
    objective.value_and_gradient(&x, &mut grad);
    Ok(grad)
}

/// Fits `w` and the intercepts from an all-zero start.
pub fn fit(dataset: &Dataset, kind: ModelKind, config: &TrainConfig) -> Result<FitResult> {
    config.validate()?;
    let layout = ParamLayout::for_dataset(kind, dataset);
    let objective = Objective::new(dataset, kind, &layout, config.l2_penalty)?;
    let outcome = lbfgs::minimize(
        |x, g| objective.value_and_gradient(x, g),
        vec![0.0; layout.len()],
        lbfgs::LbfgsOptions {
            grad_tolerance: config.grad_tolerance,
            max_iterations: config.max_iterations,
            history_size: config.history_size,
        },
    )?;
    Ok(FitResult {
        params: layout.unflatten(&outcome.x),
        final_nll: outcome.value,
        iterations: outcome.iterations,
        converged: outcome.converged,
        nll_trace: outcome.trace,
    })
}
