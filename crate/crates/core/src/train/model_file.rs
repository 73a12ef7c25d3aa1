//! JSON model files:
//! `{kind, k, w: [...], intercepts: {query_id: number | [high, low]}, config}`.
//!
//! The shared baseline intercept is stored under the key `"*"`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::TrainConfig;
use crate::error::{Error, Result};
use crate::model::ModelKind;
use crate::types::{Intercept, Intercepts, ModelParams};

const SHARED_KEY: &str = "*";

#[derive(Debug, Clone, PartialEq)]
pub struct SavedModel {
    pub kind: ModelKind,
    pub params: ModelParams,
    pub config: TrainConfig,
}

#[derive(Serialize, Deserialize)]
struct ModelDocument {
    kind: ModelKind,
    k: usize,
    w: Vec<f64>,
    intercepts: BTreeMap<String, Intercept>,
    config: TrainConfig,
}

impl SavedModel {
    pub fn to_json(&self) -> Result<String> {
        let intercepts = match &self.params.intercepts {
            Intercepts::PerQuery(map) => map.clone(),
            Intercepts::Shared(t) => BTreeMap::from([(SHARED_KEY.to_string(), Intercept::Single(*t))]),
        };
        let doc = ModelDocument {
            kind: self.kind,
            k: self.params.k(),
            w: self.params.w.clone(),
            intercepts,
            config: self.config,
        };
        let mut text = serde_json::to_string_pretty(&doc).map_err(|e| Error::ModelFile(e.to_string()))?;
        text.push('\n');
        Ok(text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(text).map_err(|e| Error::ModelFile(e.to_string()))?;
        if doc.w.len() != doc.k {
            return Err(Error::ModelFile(format!("k = {} but w has {} entries", doc.k, doc.w.len())));
        }
        let intercepts = if doc.kind.per_query() {
            for (qid, intercept) in &doc.intercepts {
                if !doc.kind.accepts(*intercept) {
                    return Err(Error::InterceptShape(qid.clone()));
                }
            }
            Intercepts::PerQuery(doc.intercepts)
        } else {
            match (doc.intercepts.len(), doc.intercepts.get(SHARED_KEY)) {
                (1, Some(Intercept::Single(t))) => Intercepts::Shared(*t),
                _ => {
                    return Err(Error::ModelFile(format!(
                        "{} expects a single intercept under \"{SHARED_KEY}\"",
                        doc.kind
                    )))
                }
            }
        };
        Ok(SavedModel {
            kind: doc.kind,
            params: ModelParams { w: doc.w, intercepts },
            config: doc.config,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}
