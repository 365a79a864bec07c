//! Deterministic bicriteria solver: constant-factor baseline, candidate
//! centers, greedy augmentation and a seeded projection path for high
//! dimensions.

mod candidates;
mod greedy;
mod local_search;
mod projection;

use serde::{Deserialize, Serialize};

pub use candidates::{candidate_centers, CandidateCenters, Provenance};
pub(crate) use candidates::{coord_scale, Quantizer};
pub use greedy::greedy_augment;
pub use local_search::{constant_factor_approx, gonzalez, polish, ConstantFactorSolution};
pub use projection::{project_and_lift, seeded_projection_family};

use crate::error::{input, Result};
use crate::geometry::{CenterSet, ClusteringParams, Points, SolverConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    NoImprovingCenter,
    LowCost,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BicriteriaResult {
    pub centers: CenterSet,
    pub cost: f64,
    pub stopped_reason: StopReason,
    pub alpha_used: f64,
    /// Cost after each accepted center, starting with the baseline.
    pub cost_history: Vec<f64>,
    pub candidate_count: usize,
    /// Projection seed that won, when the high-dimensional path ran.
    pub projection_seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BicriteriaConfig {
    /// Upper clamp for the measured baseline ratio.
    pub alpha_default: f64,
    pub dim_threshold: usize,
    pub candidate_budget: usize,
    pub local_search_max_passes: usize,
    pub projection_seed_bits: u32,
    /// Target dimension of the projection path; derived from k and epsilon when unset.
    pub projection_dim: Option<usize>,
    pub solver: SolverConfig,
}

impl Default for BicriteriaConfig {
    fn default() -> Self {
        Self {
            alpha_default: 50.0,
            dim_threshold: 20,
            candidate_budget: 1 << 16,
            local_search_max_passes: 200,
            projection_seed_bits: 4,
            projection_dim: None,
            solver: SolverConfig::default(),
        }
    }
}

impl BicriteriaConfig {
    pub fn projection_dim_for(&self, params: &ClusteringParams) -> usize {
        self.projection_dim.unwrap_or_else(|| {
            let e = params.epsilon;
            let jl = ((params.k as f64 / e).log2().max(1.0) / (e * e)).ceil() as usize;
            jl.clamp(1, self.dim_threshold.max(1))
        })
    }
}

pub(crate) fn low_dim<P: Points + ?Sized>(p: &P, params: &ClusteringParams, cfg: &BicriteriaConfig) -> Result<BicriteriaResult> {
    let cf = constant_factor_approx(p, params, cfg)?;
    let cands = candidate_centers(p, params, &cf.centers, cf.alpha, cfg.candidate_budget)?;
    greedy_augment(p, &cf.centers, params, cf.alpha, &cands)
}

/// Near-optimal solution with more than `k` centers.
pub fn bicriteria<P: Points + ?Sized>(p: &P, params: &ClusteringParams, cfg: &BicriteriaConfig) -> Result<BicriteriaResult> {
    params.validate()?;
    if !(p.total_weight() > 0.0) {
        return input("bicriteria needs positive total weight");
    }
    if p.dim() <= cfg.dim_threshold {
        low_dim(p, params, cfg)
    } else {
        project_and_lift(p, params, cfg)
    }
}
