use serde::{Deserialize, Serialize};

use super::RingCoresetOutput;
use crate::error::{input, Result};
use crate::geometry::{nearest, CenterSet, ClusteringParams, Points};
use crate::sum::pairwise_sum_iter;

/// Range-class bookkeeping of one ring against one solution `S`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RingClassReport {
    pub cluster: usize,
    pub j: i32,
    pub ring_cost_g: f64,
    /// Cost to `S` of the ring points in tiny groups.
    pub tiny_mass: f64,
    /// Same for the weighted sample.
    pub tiny_mass_sample: f64,
    pub tiny_ok: bool,
    pub huge_present: bool,
    /// `|cost(R, S) - cost(Omega, S)| / cost(R, S)` when a huge group is non-empty.
    pub huge_relative_error: Option<f64>,
    pub huge_ok: bool,
}

/// Groups ring points by `(1 + eps/10)^l <= cost(p, S) < (1 + eps/10)^(l+1)`.
/// Tiny groups lie entirely below `eps 2^j Delta`; huge groups start at or
/// above `(4z/eps)^z 2^(j+1) Delta`. Checks that tiny mass stays within
/// `eps cost(R, G)` and that a non-empty huge group forces the sample cost
/// within `3 eps` of the ring cost.
pub fn range_class_report<P: Points + ?Sized>(
    p: &P,
    out: &RingCoresetOutput,
    s: &CenterSet,
    params: &ClusteringParams,
) -> Result<Vec<RingClassReport>> {
    let Some(rings) = &out.rings else {
        return Ok(Vec::new());
    };
    if s.dim() != p.dim() {
        return input("solution dimension differs from the points");
    }
    let z = params.z;
    let eps = params.epsilon;
    let base = 1.0 + eps / 10.0;
    let group = |c: f64| if c > 0.0 { Some((c.ln() / base.ln()).floor() as i64) } else { None };
    let mut reports = Vec::with_capacity(out.samples.len());
    for smp in &out.samples {
        let delta = rings.clusters[smp.cluster].delta;
        let lo = 2f64.powi(smp.j) * delta;
        let tiny_top = eps * lo;
        let huge_floor = (4.0 * z as f64 / eps).powi(z as i32) * 2.0 * lo;
        let cost_s = |i: usize| nearest(p, i, s, z).1;
        let is_tiny = |c: f64| match group(c) {
            None => true,
            Some(l) => base.powi((l + 1) as i32) <= tiny_top,
        };
        let is_huge = |c: f64| group(c).is_some_and(|l| base.powi(l as i32) >= huge_floor);
        let rc: Vec<f64> = smp.ground.iter().map(|&i| cost_s(i)).collect();
        let w = smp.approx.weight();
        let sc: Vec<f64> = smp.approx.indices.iter().map(|&i| cost_s(i)).collect();
        let ring_cost_g = pairwise_sum_iter(smp.ground.iter().map(|&i| rings.point_cost[i]));
        let tiny_mass = pairwise_sum_iter(rc.iter().copied().filter(|&c| is_tiny(c)));
        let tiny_mass_sample = w * pairwise_sum_iter(sc.iter().copied().filter(|&c| is_tiny(c)));
        let slack = 1e-12 * ring_cost_g;
        let tiny_ok = tiny_mass <= eps * ring_cost_g + slack && tiny_mass_sample <= eps * ring_cost_g + slack;
        let huge_present = rc.iter().chain(&sc).any(|&c| is_huge(c));
        let huge_relative_error = huge_present.then(|| {
            let full = pairwise_sum_iter(rc.iter().copied());
            let approx = w * pairwise_sum_iter(sc.iter().copied());
            (approx - full).abs() / full
        });
        reports.push(RingClassReport {
            cluster: smp.cluster,
            j: smp.j,
            ring_cost_g,
            tiny_mass,
            tiny_mass_sample,
            tiny_ok,
            huge_present,
            huge_ok: huge_relative_error.map_or(true, |e| e <= 3.0 * eps),
            huge_relative_error,
        });
    }
    Ok(reports)
}
