//! Exhaustive exact solver and the coreset-enumeration approximation.

mod approx;
mod enumerate;
mod exact;

use serde::{Deserialize, Serialize};

pub use approx::{approx_solve, PtasConfig};
pub use enumerate::{check_budget, enumerate_partitions, partition_count, PartitionIter, RgsIter, MAX_ENUM_PARTS, MAX_ENUM_POINTS};
pub use exact::{best_partition, exact_solve};

use crate::geometry::CenterSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exact,
    Ptas,
    Bicriteria,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveResult {
    pub centers: CenterSet,
    pub cost: f64,
    pub method: Method,
    /// Partitions or candidate tuples examined.
    pub enumeration_stats: u64,
    /// Set when the requested method ran out of budget and fell back.
    pub downgraded: bool,
}
