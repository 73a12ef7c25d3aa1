//! Linear learning-to-rank with per-query intercept ("benchmark") variables.
//!
//! Each result's relevance label is modelled as a logistic comparison of its
//! linear score `w·Φ` against a free threshold for its query. The thresholds
//! are nuisance parameters: they are fitted by maximum likelihood together
//! with `w`, but ranking at test time uses `w·Φ` alone.
//!
//! - [`types`]: records, query-grouped datasets, parameters
//! - [`letor`]: LETOR 2.0 text format and fold layout
//! - [`model`]: binary and three-level probability models, ranking
//! - [`train`]: penalized likelihood, analytic gradient, L-BFGS fitting
//! - [`metrics`]: NDCG@n, P@n, average precision
//! - [`experiment`]: five-fold protocol, synthetic data, reports

pub mod error;
pub mod experiment;
pub mod letor;
pub mod metrics;
pub mod model;
pub mod train;
pub mod types;

pub use error::{Error, Result};
pub use model::ModelKind;
pub use types::{validate_dataset, Dataset, Intercept, Intercepts, ModelParams, OrdinalScale, Record};
