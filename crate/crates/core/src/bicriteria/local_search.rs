use std::collections::HashSet;

use super::candidates::{candidate_centers, coord_scale, Quantizer};
use super::BicriteriaConfig;
use crate::error::{input, Result};
use crate::geometry::{assign, one_center, point_cost, power_cost_unchecked, sq_dist, CenterSet, ClusteringParams, IndexView, Points};
use crate::par;

#[derive(Clone, Debug)]
pub struct ConstantFactorSolution {
    pub centers: CenterSet,
    pub cost: f64,
    /// Measured ratio of cost to a certified lower bound, clamped to the default.
    pub alpha: f64,
    pub lower_bound: f64,
    pub swaps: usize,
}

/// Farthest-point traversal over positive-weight points, starting at the
/// lowest such index; ties go to the lowest index. Returns the picked
/// indices and, for each pick after the first, its distance to earlier picks.
pub fn gonzalez<P: Points + ?Sized>(p: &P, count: usize) -> (Vec<usize>, Vec<f64>) {
    let act: Vec<usize> = (0..p.len()).filter(|&i| p.weight(i) > 0.0).collect();
    let mut picks = Vec::new();
    let mut radii = Vec::new();
    let Some(&first) = act.first() else {
        return (picks, radii);
    };
    picks.push(first);
    let mut best: Vec<f64> = act.iter().map(|&i| sq_dist(p.coords(i), p.coords(first))).collect();
    while picks.len() < count {
        let mut far = (0usize, -1.0);
        for (a, &b) in best.iter().enumerate() {
            if b > far.1 {
                far = (a, b);
            }
        }
        if far.1 <= 0.0 {
            break;
        }
        let idx = act[far.0];
        picks.push(idx);
        radii.push(far.1.sqrt());
        for (a, &i) in act.iter().enumerate() {
            let d = sq_dist(p.coords(i), p.coords(idx));
            if d < best[a] {
                best[a] = d;
            }
        }
    }
    (picks, radii)
}

/// Lower bound on the optimal `k`-clustering cost from a farthest-point
/// traversal: `radii[t - 2]` separates the first `t` picks pairwise, any `k`
/// centers can lie within half of it of at most `k` of them, and with
/// `t = k + 1` two picks sharing a center pay at least `2 (r/2)^z` together.
pub(crate) fn packing_lower_bound(radii: &[f64], k: usize, z: u32, wmin: f64) -> f64 {
    let mut lb: f64 = 0.0;
    for (i, &r) in radii.iter().enumerate() {
        let t = i + 2;
        if t <= k {
            continue;
        }
        let half = (r / 2.0).powi(z as i32);
        let v = if t == k + 1 { 2.0 * half } else { (t - k) as f64 * half };
        lb = lb.max(v);
    }
    wmin * lb
}

fn distinct_positive<P: Points + ?Sized>(p: &P) -> Vec<usize> {
    let q = Quantizer::for_scale(coord_scale(p));
    let mut seen = HashSet::new();
    (0..p.len())
        .filter(|&i| p.weight(i) > 0.0 && seen.insert(q.key(p.coords(i))))
        .collect()
}

fn centers_from<P: Points + ?Sized>(p: &P, idx: &[usize]) -> CenterSet {
    let mut data = Vec::with_capacity(idx.len() * p.dim());
    for &i in idx {
        data.extend_from_slice(p.coords(i));
    }
    CenterSet::new(p.dim(), data).expect("nonempty")
}

/// Alternates nearest-center assignment with per-cluster 1-center solves and
/// keeps only strict improvements.
pub fn polish<P: Points + ?Sized>(p: &P, centers: CenterSet, z: u32, cfg: &BicriteriaConfig, rounds: usize) -> Result<(CenterSet, f64)> {
    let mut best = centers;
    let mut best_cost = power_cost_unchecked(p, &best, z);
    for _ in 0..rounds {
        let a = assign(p, &best, z);
        let mut members = vec![Vec::new(); best.len()];
        for (i, &(j, _)) in a.iter().enumerate() {
            if p.weight(i) > 0.0 {
                members[j].push(i);
            }
        }
        let solved = par::map_slice(&members, |m| {
            if m.is_empty() {
                return Ok(None);
            }
            one_center(&IndexView::new(p, m), z, &cfg.solver).map(|s| Some(s.center))
        });
        let mut rows = Vec::with_capacity(best.len());
        for (j, s) in solved.into_iter().enumerate() {
            rows.push(s?.unwrap_or_else(|| best.center(j).to_vec()));
        }
        let next = CenterSet::from_rows(&rows)?;
        let c = power_cost_unchecked(p, &next, z);
        if c < best_cost * (1.0 - 1e-12) {
            best = next;
            best_cost = c;
        } else {
            break;
        }
    }
    Ok((best, best_cost))
}

/// Best single swap of a current center for a candidate; returns
/// (new cost, center slot, candidate index).
fn best_swap<P: Points + ?Sized>(p: &P, centers: &CenterSet, cands: &[f64], d: usize, z: u32) -> Option<(f64, usize, usize)> {
    let k = centers.len();
    let n = p.len();
    let mut first = Vec::with_capacity(n);
    let mut second = Vec::with_capacity(n);
    for i in 0..n {
        let mut a = (usize::MAX, f64::INFINITY);
        let mut b = f64::INFINITY;
        for (j, c) in centers.iter().enumerate() {
            let v = point_cost(p, i, c, z);
            if v < a.1 {
                b = a.1;
                a = (j, v);
            } else if v < b {
                b = v;
            }
        }
        first.push(a);
        second.push(b);
    }
    let count = cands.len() / d;
    let per = par::map_range(count, |ci| {
        let c = &cands[ci * d..(ci + 1) * d];
        let mut base = 0.0;
        let mut loss = vec![0.0; k];
        for i in 0..n {
            let w = p.weight(i);
            if w == 0.0 {
                continue;
            }
            let dc = point_cost(p, i, c, z);
            let (j, f1) = first[i];
            let m1 = dc.min(f1);
            base += w * m1;
            loss[j] += w * (dc.min(second[i]) - m1);
        }
        let mut best = (f64::INFINITY, 0usize);
        for (j, l) in loss.iter().enumerate() {
            let v = base + l;
            if v < best.0 {
                best = (v, j);
            }
        }
        best
    });
    let mut out: Option<(f64, usize, usize)> = None;
    for (ci, (v, j)) in per.into_iter().enumerate() {
        if out.map_or(true, |(b, _, _)| v < b) {
            out = Some((v, j, ci));
        }
    }
    out
}

/// Farthest-point seeding followed by single-swap local search over the
/// candidate centers.
pub fn constant_factor_approx<P: Points + ?Sized>(
    p: &P,
    params: &ClusteringParams,
    cfg: &BicriteriaConfig,
) -> Result<ConstantFactorSolution> {
    params.validate()?;
    let k = params.k;
    let z = params.z;
    let distinct = distinct_positive(p);
    if distinct.is_empty() {
        return input("constant-factor baseline needs a positive-weight point");
    }
    let ext_floor: f64 = crate::sum::pairwise_sum_iter((0..p.len()).map(|i| p.weight(i) * p.ext(i).abs().powi(z as i32)));
    if distinct.len() <= k {
        let centers = centers_from(p, &distinct);
        let cost = power_cost_unchecked(p, &centers, z);
        return Ok(ConstantFactorSolution {
            centers,
            cost,
            alpha: 1.0,
            lower_bound: cost,
            swaps: 0,
        });
    }
    let (picks, radii) = gonzalez(p, 64 * k + 1);
    let seed = centers_from(p, &picks[..k.min(picks.len())]);
    let wmin = distinct.iter().map(|&i| p.weight(i)).fold(f64::INFINITY, f64::min);
    let lower_bound = packing_lower_bound(&radii, k, z, wmin).max(ext_floor);
    let cands = candidate_centers(p, params, &seed, cfg.alpha_default, cfg.candidate_budget)?;
    let (mut centers, mut cost) = polish(p, seed, z, cfg, 50)?;
    let factor = 1.0 - 1.0 / (100.0 * k as f64);
    let mut swaps = 0;
    for _ in 0..cfg.local_search_max_passes {
        if cost == 0.0 {
            break;
        }
        let Some((v, slot, ci)) = best_swap(p, &centers, &cands.points, cands.dim, z) else {
            break;
        };
        if !(v < factor * cost) {
            break;
        }
        let mut rows = centers.to_rows();
        rows[slot] = cands.point(ci).to_vec();
        let next = CenterSet::from_rows(&rows)?;
        let exact = power_cost_unchecked(p, &next, z);
        if !(exact < cost) {
            break;
        }
        centers = next;
        cost = exact;
        swaps += 1;
    }
    let (centers, cost) = polish(p, centers, z, cfg, 50)?;
    let alpha = if cost == 0.0 {
        1.0
    } else if lower_bound > 0.0 {
        (cost / lower_bound).clamp(1.0, cfg.alpha_default)
    } else {
        cfg.alpha_default
    };
    Ok(ConstantFactorSolution {
        centers,
        cost,
        alpha,
        lower_bound,
        swaps,
    })
}
