use serde::{Deserialize, Serialize};

use crate::bicriteria::{candidate_centers, constant_factor_approx, greedy_augment, BicriteriaConfig, StopReason};
use crate::error::{input, Result};
use crate::geometry::{CenterSet, ClusteringParams, Points};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeedingStatus {
    LowCost,
    LocallyStable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedingResult {
    pub g: CenterSet,
    pub status: SeedingStatus,
    /// Approximation factor of the baseline.
    pub c_a: f64,
    pub cost_g: f64,
    pub cost_a: f64,
    pub baseline: CenterSet,
    pub candidate_count: usize,
    pub cost_history: Vec<f64>,
}

/// Baseline solution, then greedy growth over candidate centers while each
/// new center cuts the cost by the factor `1 - eps/(k c_A)` and the cost is
/// still at least `eps cost(A) / c_A`. `c_A` is the certified ratio of the
/// baseline unless `baseline_factor` fixes it.
pub fn greedy_seeding<P: Points + ?Sized>(
    p: &P,
    params: &ClusteringParams,
    cfg: &BicriteriaConfig,
    baseline_factor: Option<f64>,
) -> Result<SeedingResult> {
    params.validate()?;
    let a = constant_factor_approx(p, params, cfg)?;
    let c_a = match baseline_factor {
        Some(f) if f >= 1.0 && f.is_finite() => f,
        Some(_) => return input("baseline factor must be finite and at least 1"),
        None => a.alpha,
    };
    let cands = candidate_centers(p, params, &a.centers, c_a, cfg.candidate_budget)?;
    let res = greedy_augment(p, &a.centers, params, c_a, &cands)?;
    let status = match res.stopped_reason {
        StopReason::LowCost => SeedingStatus::LowCost,
        StopReason::NoImprovingCenter => SeedingStatus::LocallyStable,
    };
    Ok(SeedingResult {
        g: res.centers,
        status,
        c_a,
        cost_g: res.cost,
        cost_a: a.cost,
        baseline: a.centers,
        candidate_count: cands.len(),
        cost_history: res.cost_history,
    })
}
