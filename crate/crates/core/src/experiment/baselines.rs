//! Published LETOR 2.0 results (mean, stdev over 5 folds) for the
//! competitor methods, and for the per-query-intercept logistic model as
//! originally reported. Competitors are never recomputed here.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cutoffs at which NDCG and precision were published.
pub const PUBLISHED_CUTOFFS: [usize; 5] = [2, 4, 6, 8, 10];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Collection {
    Ohsumed,
    Td2003,
    Td2004,
}

impl Collection {
    pub const ALL: [Collection; 3] = [Collection::Ohsumed, Collection::Td2003, Collection::Td2004];

    pub fn name(self) -> &'static str {
        match self {
            Collection::Ohsumed => "OHSUMED",
            Collection::Td2003 => "TD2003",
            Collection::Td2004 => "TD2004",
        }
    }

    /// Guesses the collection from any path component naming it.
    pub fn infer_from_path(path: &Path) -> Option<Collection> {
        path.components().rev().find_map(|c| {
            let name = c.as_os_str().to_str()?.to_ascii_uppercase();
            Collection::ALL.into_iter().find(|col| name.contains(col.name()))
        })
    }
}

impl fmt::Display for Collection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Collection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Collection::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown collection '{s}'")))
    }
}

/// One method's row: NDCG and precision at [`PUBLISHED_CUTOFFS`], and MAP.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodRow {
    pub method: &'static str,
    pub ndcg: [(f64, f64); 5],
    pub precision: [(f64, f64); 5],
    pub map: (f64, f64),
}

impl MethodRow {
    pub fn ndcg_at(&self, cutoff: usize) -> Option<(f64, f64)> {
        PUBLISHED_CUTOFFS.iter().position(|&c| c == cutoff).map(|i| self.ndcg[i])
    }

    pub fn precision_at(&self, cutoff: usize) -> Option<(f64, f64)> {
        PUBLISHED_CUTOFFS.iter().position(|&c| c == cutoff).map(|i| self.precision[i])
    }
}

pub fn competitor_rows(collection: Collection) -> &'static [MethodRow; 6] {
    match collection {
        Collection::Ohsumed => &OHSUMED,
        Collection::Td2003 => &TD2003,
        Collection::Td2004 => &TD2004,
    }
}

/// The per-query-intercept model's originally reported numbers.
pub fn published_intercept_row(collection: Collection) -> &'static MethodRow {
    match collection {
        Collection::Ohsumed => &OHSUMED_THIS,
        Collection::Td2003 => &TD2003_THIS,
        Collection::Td2004 => &TD2004_THIS,
    }
}

const OHSUMED_THIS: MethodRow = MethodRow {
    method: "This",
    ndcg: [(0.491, 0.086), (0.480, 0.058), (0.458, 0.055), (0.448, 0.054), (0.447, 0.047)],
    precision: [(0.610, 0.092), (0.598, 0.082), (0.560, 0.090), (0.526, 0.092), (0.511, 0.081)],
    map: (0.445, 0.065),
};

const OHSUMED: [MethodRow; 6] = [
    MethodRow {
        method: "RankBoost",
        ndcg: [(0.483, 0.079), (0.461, 0.063), (0.442, 0.058), (0.436, 0.044), (0.436, 0.042)],
        precision: [(0.595, 0.090), (0.562, 0.081), (0.525, 0.093), (0.505, 0.072), (0.495, 0.081)],
        map: (0.440, 0.062),
    },
    MethodRow {
        method: "RankSVM",
        ndcg: [(0.476, 0.091), (0.459, 0.059), (0.455, 0.054), (0.445, 0.057), (0.441, 0.055)],
        precision: [(0.619, 0.096), (0.579, 0.072), (0.558, 0.077), (0.525, 0.088), (0.507, 0.096)],
        map: (0.447, 0.067),
    },
    MethodRow {
        method: "FRank",
        ndcg: [(0.510, 0.074), (0.478, 0.060), (0.457, 0.062), (0.445, 0.054), (0.442, 0.055)],
        precision: [(0.619, 0.051), (0.581, 0.079), (0.534, 0.098), (0.501, 0.091), (0.485, 0.097)],
        map: (0.446, 0.062),
    },
    MethodRow {
        method: "ListNet",
        ndcg: [(0.497, 0.062), (0.468, 0.065), (0.451, 0.056), (0.451, 0.050), (0.449, 0.040)],
        precision: [(0.629, 0.080), (0.577, 0.097), (0.544, 0.098), (0.520, 0.098), (0.510, 0.085)],
        map: (0.450, 0.063),
    },
    MethodRow {
        method: "AdaRank.MAP",
        ndcg: [(0.496, 0.100), (0.471, 0.075), (0.448, 0.070), (0.443, 0.058), (0.438, 0.057)],
        precision: [(0.605, 0.102), (0.567, 0.087), (0.528, 0.102), (0.502, 0.087), (0.491, 0.091)],
        map: (0.442, 0.061),
    },
    MethodRow {
        method: "AdaRank.NDCG",
        ndcg: [(0.474, 0.091), (0.456, 0.057), (0.442, 0.055), (0.441, 0.048), (0.437, 0.046)],
        precision: [(0.605, 0.099), (0.562, 0.063), (0.529, 0.073), (0.506, 0.073), (0.491, 0.082)],
        map: (0.442, 0.058),
    },
];

const TD2003_THIS: MethodRow = MethodRow {
    method: "This",
    ndcg: [(0.430, 0.179), (0.398, 0.146), (0.375, 0.125), (0.369, 0.113), (0.360, 0.105)],
    precision: [(0.420, 0.192), (0.340, 0.161), (0.283, 0.131), (0.253, 0.115), (0.222, 0.106)],
    map: (0.248, 0.075),
};

const TD2003: [MethodRow; 6] = [
    MethodRow {
        method: "RankBoost",
        ndcg: [(0.280, 0.097), (0.272, 0.086), (0.280, 0.071), (0.282, 0.074), (0.285, 0.064)],
        precision: [(0.270, 0.104), (0.230, 0.112), (0.210, 0.080), (0.193, 0.071), (0.178, 0.053)],
        map: (0.212, 0.047),
    },
    MethodRow {
        method: "RankSVM",
        ndcg: [(0.370, 0.130), (0.363, 0.132), (0.341, 0.118), (0.345, 0.117), (0.341, 0.115)],
        precision: [(0.350, 0.132), (0.300, 0.137), (0.243, 0.100), (0.233, 0.091), (0.206, 0.082)],
        map: (0.256, 0.083),
    },
    MethodRow {
        method: "FRank",
        ndcg: [(0.390, 0.143), (0.342, 0.107), (0.330, 0.087), (0.332, 0.079), (0.336, 0.074)],
        precision: [(0.370, 0.148), (0.260, 0.082), (0.223, 0.043), (0.210, 0.045), (0.186, 0.049)],
        map: (0.245, 0.065),
    },
    MethodRow {
        method: "ListNet",
        ndcg: [(0.430, 0.160), (0.386, 0.125), (0.386, 0.106), (0.373, 0.104), (0.374, 0.094)],
        precision: [(0.420, 0.164), (0.310, 0.129), (0.283, 0.090), (0.240, 0.075), (0.222, 0.061)],
        map: (0.273, 0.068),
    },
    MethodRow {
        method: "AdaRank.MAP",
        ndcg: [(0.320, 0.104), (0.268, 0.120), (0.229, 0.104), (0.206, 0.093), (0.194, 0.086)],
        precision: [(0.310, 0.096), (0.230, 0.105), (0.163, 0.081), (0.125, 0.064), (0.102, 0.050)],
        map: (0.137, 0.063),
    },
    MethodRow {
        method: "AdaRank.NDCG",
        ndcg: [(0.410, 0.207), (0.347, 0.195), (0.309, 0.181), (0.286, 0.171), (0.270, 0.161)],
        precision: [(0.400, 0.203), (0.305, 0.183), (0.237, 0.161), (0.190, 0.140), (0.156, 0.120)],
        map: (0.185, 0.105),
    },
];

const TD2004_THIS: MethodRow = MethodRow {
    method: "This",
    ndcg: [(0.473, 0.132), (0.454, 0.075), (0.450, 0.059), (0.459, 0.050), (0.472, 0.043)],
    precision: [(0.447, 0.146), (0.370, 0.095), (0.316, 0.076), (0.288, 0.076), (0.264, 0.062)],
    map: (0.379, 0.051),
};

const TD2004: [MethodRow; 6] = [
    MethodRow {
        method: "RankBoost",
        ndcg: [(0.473, 0.055), (0.439, 0.057), (0.448, 0.052), (0.461, 0.036), (0.472, 0.034)],
        precision: [(0.447, 0.056), (0.347, 0.083), (0.304, 0.079), (0.277, 0.070), (0.253, 0.067)],
        map: (0.384, 0.043),
    },
    MethodRow {
        method: "RankSVM",
        ndcg: [(0.433, 0.094), (0.406, 0.086), (0.397, 0.082), (0.410, 0.074), (0.420, 0.067)],
        precision: [(0.407, 0.098), (0.327, 0.089), (0.273, 0.083), (0.247, 0.082), (0.225, 0.072)],
        map: (0.350, 0.072),
    },
    MethodRow {
        method: "FRank",
        ndcg: [(0.467, 0.113), (0.435, 0.088), (0.445, 0.078), (0.455, 0.055), (0.471, 0.057)],
        precision: [(0.433, 0.115), (0.340, 0.098), (0.311, 0.082), (0.273, 0.071), (0.256, 0.071)],
        map: (0.381, 0.069),
    },
    MethodRow {
        method: "ListNet",
        ndcg: [(0.427, 0.080), (0.422, 0.049), (0.418, 0.057), (0.449, 0.041), (0.458, 0.036)],
        precision: [(0.407, 0.086), (0.357, 0.087), (0.307, 0.084), (0.287, 0.069), (0.257, 0.059)],
        map: (0.372, 0.046),
    },
    MethodRow {
        method: "AdaRank.MAP",
        ndcg: [(0.393, 0.060), (0.387, 0.086), (0.399, 0.085), (0.400, 0.086), (0.406, 0.083)],
        precision: [(0.353, 0.045), (0.300, 0.086), (0.282, 0.068), (0.242, 0.063), (0.216, 0.064)],
        map: (0.331, 0.089),
    },
    MethodRow {
        method: "AdaRank.NDCG",
        ndcg: [(0.360, 0.161), (0.377, 0.123), (0.378, 0.117), (0.380, 0.102), (0.388, 0.093)],
        precision: [(0.320, 0.139), (0.300, 0.082), (0.262, 0.092), (0.232, 0.086), (0.207, 0.082)],
        map: (0.299, 0.088),
    },
];
