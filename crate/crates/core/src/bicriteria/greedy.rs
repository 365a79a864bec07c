use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use super::candidates::CandidateCenters;
use super::{BicriteriaResult, StopReason};
use crate::error::{input, Result};
use crate::geometry::{check_dims, nearest, point_cost, power_cost, CenterSet, ClusteringParams, Points};
use crate::par;
use crate::sum::canonical_sum;

#[derive(PartialEq)]
struct Gain(f64);

impl Eq for Gain {}

impl PartialOrd for Gain {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Gain {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

fn gain<P: Points + ?Sized>(p: &P, cur: &[f64], c: &[f64], z: u32) -> f64 {
    let mut g = 0.0;
    for (i, &ci) in cur.iter().enumerate() {
        let w = p.weight(i);
        if w == 0.0 || ci == 0.0 {
            continue;
        }
        let v = w * point_cost(p, i, c, z);
        if v < ci {
            g += ci - v;
        }
    }
    g
}

/// Adds the candidate with the largest cost decrease while it shrinks the
/// cost by the factor `1 - eps/(alpha k)`, until the cost drops to
/// `eps/alpha` of the starting cost. Gains only shrink as centers are added,
/// so stale heap keys are upper bounds and lazy re-evaluation finds the same
/// arg-max (largest gain, then lowest index) as a full scan.
pub fn greedy_augment<P: Points + ?Sized>(
    p: &P,
    s0: &CenterSet,
    params: &ClusteringParams,
    alpha: f64,
    cands: &CandidateCenters,
) -> Result<BicriteriaResult> {
    check_dims(p, s0)?;
    if cands.dim != p.dim() {
        return input("candidate dimension differs from point dimension");
    }
    if !(alpha > 0.0) {
        return input("alpha must be positive");
    }
    let z = params.z;
    let eps = params.epsilon;
    let shrink = 1.0 - eps / (alpha * params.k as f64);
    let mut centers = s0.clone();
    let mut cur: Vec<f64> = par::map_range(p.len(), |i| {
        let w = p.weight(i);
        if w == 0.0 {
            0.0
        } else {
            w * nearest(p, i, s0, z).1
        }
    });
    let mut cost = canonical_sum(cur.clone());
    let cost0 = cost;
    let mut history = vec![cost];
    let mut stopped = StopReason::NoImprovingCenter;
    if cost0 > 0.0 {
        let init = par::map_range(cands.len(), |ci| gain(p, &cur, cands.point(ci), z));
        let mut heap: BinaryHeap<(Gain, Reverse<usize>, usize)> =
            init.into_iter().enumerate().map(|(ci, g)| (Gain(g), Reverse(ci), 0)).collect();
        let mut round = 0usize;
        loop {
            if cost <= eps / alpha * cost0 {
                stopped = StopReason::LowCost;
                break;
            }
            let pick = loop {
                let Some((g, Reverse(ci), stamp)) = heap.pop() else {
                    break None;
                };
                if stamp == round {
                    break Some((g.0, ci));
                }
                let fresh = gain(p, &cur, cands.point(ci), z);
                heap.push((Gain(fresh), Reverse(ci), round));
            };
            let Some((g, ci)) = pick else {
                break;
            };
            if !(g > 0.0) {
                break;
            }
            let c = cands.point(ci);
            let next: Vec<f64> = cur
                .iter()
                .enumerate()
                .map(|(i, &v)| {
                    let w = p.weight(i);
                    if w == 0.0 {
                        0.0
                    } else {
                        v.min(w * point_cost(p, i, c, z))
                    }
                })
                .collect();
            let next_cost = canonical_sum(next.clone());
            if !(next_cost <= shrink * cost && next_cost < cost) {
                break;
            }
            centers.push(c);
            cur = next;
            cost = next_cost;
            history.push(cost);
            round += 1;
        }
    } else {
        stopped = StopReason::LowCost;
    }
    let cost = power_cost(p, &centers, z)?;
    Ok(BicriteriaResult {
        centers,
        cost,
        stopped_reason: stopped,
        alpha_used: alpha,
        cost_history: history,
        candidate_count: cands.len(),
        projection_seed: None,
    })
}
