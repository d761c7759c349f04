//! Ground-truth robustness by attack simulation.

mod attack;
mod betweenness;
mod components;
mod curves;
mod matching;
mod metrics;
mod record;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use attack::{plan_attack, AttackTrace};
pub use betweenness::betweenness;
pub use components::{lcc_size, UnionFind};
pub use curves::{batch_curve, batch_size, connectivity_curve, controllability_curve, simulate};
pub use matching::{max_bipartite_matching, nd_exact, nd_structural, Matching};
pub use metrics::{error_report, overall_rc, rank_list_error, ranks, ErrorReport, OverallRobustness};
pub use record::{curve_csv, DatasetRecord};

use crate::error::OracleError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AttackKind {
    #[serde(rename = "RA")]
    Random,
    #[serde(rename = "TDA")]
    TargetedDegree,
    #[serde(rename = "TBA")]
    TargetedBetweenness,
}

impl AttackKind {
    pub fn label(self) -> &'static str {
        match self {
            AttackKind::Random => "RA",
            AttackKind::TargetedDegree => "TDA",
            AttackKind::TargetedBetweenness => "TBA",
        }
    }
}

impl fmt::Display for AttackKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for AttackKind {
    type Err = OracleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "RA" => Ok(AttackKind::Random),
            "TDA" => Ok(AttackKind::TargetedDegree),
            "TBA" => Ok(AttackKind::TargetedBetweenness),
            other => Err(OracleError::MalformedRecord(format!("unknown attack {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttackStrategy {
    pub kind: AttackKind,
    /// Shuffle seed; only random attacks use it.
    pub seed: u64,
    /// Re-rank the remnant after every removal (targeted attacks only).
    pub recompute: bool,
}

impl AttackStrategy {
    pub fn random(seed: u64) -> Self {
        AttackStrategy {
            kind: AttackKind::Random,
            seed,
            recompute: true,
        }
    }

    pub fn degree() -> Self {
        AttackStrategy {
            kind: AttackKind::TargetedDegree,
            seed: 0,
            recompute: true,
        }
    }

    pub fn betweenness() -> Self {
        AttackStrategy {
            kind: AttackKind::TargetedBetweenness,
            seed: 0,
            recompute: true,
        }
    }

    pub fn non_adaptive(mut self) -> Self {
        self.recompute = false;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveKind {
    Controllability,
    Connectivity,
}

impl fmt::Display for CurveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CurveKind::Controllability => "controllability",
            CurveKind::Connectivity => "connectivity",
        })
    }
}

impl FromStr for CurveKind {
    type Err = OracleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "controllability" => Ok(CurveKind::Controllability),
            "connectivity" => Ok(CurveKind::Connectivity),
            other => Err(OracleError::MalformedRecord(format!("unknown curve kind {other:?}"))),
        }
    }
}

/// How the driver-node count is obtained.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ControllabilityMode {
    /// Maximum matching (minimum input theorem).
    #[default]
    Structural,
    /// Rank of the weighted adjacency matrix.
    Exact,
}

/// Robustness value after each removal; entry `i - 1` holds the value after
/// `i` removals.
#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessCurve {
    pub kind: CurveKind,
    pub values: Vec<f64>,
}

impl RobustnessCurve {
    pub fn new(kind: CurveKind, values: Vec<f64>) -> Self {
        RobustnessCurve { kind, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Lower feasibility bound `1 / (n - i)` for a per-node curve on `n` nodes.
    pub fn lower_bounds(n: usize) -> Vec<f64> {
        (1..n).map(|i| 1.0 / (n - i) as f64).collect()
    }
}
