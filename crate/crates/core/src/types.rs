//! Shared data model: records, query-grouped datasets, ordinal scales and
//! fitted parameters.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordinal relevance scale. Labels are `0..levels`, higher is more relevant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OrdinalScale {
    levels: u8,
}

impl OrdinalScale {
    pub const BINARY: OrdinalScale = OrdinalScale { levels: 2 };
    pub const TRINARY: OrdinalScale = OrdinalScale { levels: 3 };

    pub fn new(levels: u8) -> Result<Self> {
        match levels {
            2 | 3 => Ok(OrdinalScale { levels }),
            other => Err(Error::UnsupportedScale(other as i64)),
        }
    }

    pub fn levels(self) -> u8 {
        self.levels
    }

    /// Highest (most relevant) label.
    pub fn top_label(self) -> u8 {
        self.levels - 1
    }

    pub fn contains(self, label: u8) -> bool {
        label < self.levels
    }
}

/// One query-result row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub query_id: String,
    pub label: u8,
    pub features: Vec<f64>,
    /// Trailing comment text identifying the result, e.g. `docid = ...`.
    pub meta: String,
}

impl Record {
    pub fn new(query_id: impl Into<String>, label: u8, features: Vec<f64>) -> Self {
        Record {
            query_id: query_id.into(),
            label,
            features,
            meta: String::new(),
        }
    }
}

/// The records of one query, as positions into [`Dataset::records`] in
/// original order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryGroup {
    pub query_id: String,
    pub positions: Vec<usize>,
}

/// Records grouped by query with a fixed dimensionality and ordinal scale.
///
/// Groups are ordered by first appearance of their query id; within a group
/// the file order is kept, which is the tie-break key for ranking.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    records: Vec<Record>,
    groups: Vec<QueryGroup>,
    index: HashMap<String, usize>,
    k: usize,
    scale: OrdinalScale,
}

impl Dataset {
    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn into_records(self) -> Vec<Record> {
        self.records
    }

    pub fn groups(&self) -> &[QueryGroup] {
        &self.groups
    }

    pub fn group(&self, query_id: &str) -> Option<&QueryGroup> {
        self.index.get(query_id).map(|&i| &self.groups[i])
    }

    pub fn group_records<'a>(&'a self, group: &'a QueryGroup) -> impl Iterator<Item = &'a Record> + 'a {
        group.positions.iter().map(move |&p| &self.records[p])
    }

    /// Number of distinct queries.
    pub fn n_queries(&self) -> usize {
        self.groups.len()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Feature dimensionality.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn scale(&self) -> OrdinalScale {
        self.scale
    }

    /// Query ids in ascending order, the order used for parameter layout.
    pub fn sorted_query_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.groups.iter().map(|g| g.query_id.clone()).collect();
        ids.sort();
        ids
    }
}

/// Checks records and groups them by query.
///
/// When `scale` is `None` the number of levels is inferred as
/// `max(label) + 1`, at least 2; a label of 3 or more is rejected.
pub fn validate_dataset(records: Vec<Record>, scale: Option<OrdinalScale>) -> Result<Dataset> {
    let first = records.first().ok_or(Error::EmptyDataset)?;
    let k = first.features.len();

    for (index, record) in records.iter().enumerate() {
        if record.features.len() != k {
            return Err(Error::InconsistentDimensionality {
                index,
                expected: k,
                found: record.features.len(),
            });
        }
        if let Some(feature) = record.features.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteFeature { index, feature });
        }
    }

    let scale = match scale {
        Some(scale) => scale,
        None => {
            let max_label = records.iter().map(|r| r.label).max().unwrap_or(0);
            if max_label >= 3 {
                let index = records.iter().position(|r| r.label == max_label).unwrap_or(0);
                return Err(Error::LabelOutOfScale {
                    index,
                    label: max_label as i64,
                    levels: 3,
                });
            }
            OrdinalScale::new((max_label + 1).max(2))?
        }
    };
    if let Some(index) = records.iter().position(|r| !scale.contains(r.label)) {
        return Err(Error::LabelOutOfScale {
            index,
            label: records[index].label as i64,
            levels: scale.levels(),
        });
    }

    let mut groups: Vec<QueryGroup> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    for (pos, record) in records.iter().enumerate() {
        match index.get(&record.query_id) {
            Some(&g) => groups[g].positions.push(pos),
            None => {
                index.insert(record.query_id.clone(), groups.len());
                groups.push(QueryGroup {
                    query_id: record.query_id.clone(),
                    positions: vec![pos],
                });
            }
        }
    }

    Ok(Dataset {
        records,
        groups,
        index,
        k,
        scale,
    })
}

/// Per-query benchmark: one threshold for binary labels, a high/low pair
/// for three-level labels.
///
/// Serialized as a bare number or a `[high, low]` array. The ordering
/// `high > low` is not enforced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Intercept {
    Single(f64),
    Pair(f64, f64),
}

impl Intercept {
    pub fn is_finite(&self) -> bool {
        match *self {
            Intercept::Single(t) => t.is_finite(),
            Intercept::Pair(h, l) => h.is_finite() && l.is_finite(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Intercepts {
    /// One intercept per query id, keyed in ascending order.
    PerQuery(BTreeMap<String, Intercept>),
    /// A single intercept shared by every query (plain logistic regression).
    Shared(f64),
}

/// Global weight vector plus the intercepts fitted alongside it.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub w: Vec<f64>,
    pub intercepts: Intercepts,
}

impl ModelParams {
    pub fn k(&self) -> usize {
        self.w.len()
    }

    pub fn is_finite(&self) -> bool {
        self.w.iter().all(|v| v.is_finite())
            && match &self.intercepts {
                Intercepts::PerQuery(map) => map.values().all(Intercept::is_finite),
                Intercepts::Shared(t) => t.is_finite(),
            }
    }

    pub fn intercept(&self, query_id: &str) -> Option<Intercept> {
        match &self.intercepts {
            Intercepts::PerQuery(map) => map.get(query_id).copied(),
            Intercepts::Shared(t) => Some(Intercept::Single(*t)),
        }
    }
}
