use super::enumerate::{check_budget, RgsIter};
use super::{Method, SolveResult};
use crate::error::{input, Result};
use crate::geometry::{one_center, power_cost, CenterSet, ClusteringParams, IndexView, Points, SolverConfig};
use crate::par;
use crate::sum::pairwise_sum;

const BATCH: usize = 4096;

fn evaluate<P: Points + ?Sized>(p: &P, rgs: &[usize], k: usize, z: u32, cfg: &SolverConfig) -> Result<f64> {
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (i, &a) in rgs.iter().enumerate() {
        members[a].push(i);
    }
    let mut parts = Vec::with_capacity(k);
    for m in &members {
        let view = IndexView::new(p, m);
        if m.is_empty() || !(view.total_weight() > 0.0) {
            continue;
        }
        parts.push(one_center(&view, z, cfg)?.objective);
    }
    Ok(pairwise_sum(&parts))
}

/// Minimum-cost partition into at most `k` parts with per-part optimal
/// centers (extension 0). Ties go to the earliest partition in
/// restricted-growth order. Returns (assignment, cost, partitions examined).
pub fn best_partition<P: Points + ?Sized>(p: &P, k: usize, z: u32, cfg: &SolverConfig) -> Result<(Vec<usize>, f64, u64)> {
    let n = p.len();
    if n == 0 {
        return input("cannot partition an empty set");
    }
    check_budget(n, k)?;
    let mut it = RgsIter::new(n, k);
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut examined = 0u64;
    let mut batch: Vec<usize> = Vec::with_capacity(BATCH * n);
    loop {
        batch.clear();
        while batch.len() < BATCH * n {
            match it.next_rgs() {
                Some(a) => batch.extend_from_slice(a),
                None => break,
            }
        }
        let count = batch.len() / n;
        if count == 0 {
            break;
        }
        let costs = par::map_range(count, |b| evaluate(p, &batch[b * n..(b + 1) * n], k, z, cfg));
        for (b, c) in costs.into_iter().enumerate() {
            let c = c?;
            if best.as_ref().map_or(true, |(v, _)| c < *v) {
                best = Some((c, batch[b * n..(b + 1) * n].to_vec()));
            }
        }
        examined += count as u64;
        if count < BATCH {
            break;
        }
    }
    let (cost, a) = best.expect("at least one partition");
    Ok((a, cost, examined))
}

pub(crate) fn centers_for<P: Points + ?Sized>(p: &P, assignment: &[usize], k: usize, z: u32, cfg: &SolverConfig) -> Result<CenterSet> {
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (i, &a) in assignment.iter().enumerate() {
        members[a].push(i);
    }
    let mut rows = Vec::new();
    for m in &members {
        let view = IndexView::new(p, m);
        if m.is_empty() || !(view.total_weight() > 0.0) {
            continue;
        }
        rows.push(one_center(&view, z, cfg)?.center);
    }
    CenterSet::from_rows(&rows)
}

/// Brute-force optimum over all partitions into at most `k` parts.
pub fn exact_solve<P: Points + ?Sized>(p: &P, params: &ClusteringParams, cfg: &SolverConfig) -> Result<SolveResult> {
    params.validate()?;
    let n = p.len();
    if n == 0 || !(p.total_weight() > 0.0) {
        return input("exact solve needs a positive-weight point");
    }
    if params.k >= n {
        let mut data = Vec::new();
        for i in (0..n).filter(|&i| p.weight(i) > 0.0) {
            data.extend_from_slice(p.coords(i));
        }
        let centers = CenterSet::new(p.dim(), data)?;
        let cost = power_cost(p, &centers, params.z)?;
        return Ok(SolveResult {
            centers,
            cost,
            method: Method::Exact,
            enumeration_stats: 1,
            downgraded: false,
        });
    }
    let (a, _, examined) = best_partition(p, params.k, params.z, cfg)?;
    let centers = centers_for(p, &a, params.k, params.z, cfg)?;
    let cost = power_cost(p, &centers, params.z)?;
    Ok(SolveResult {
        centers,
        cost,
        method: Method::Exact,
        enumeration_stats: examined,
        downgraded: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::WeightedPointSet;

    #[test]
    fn line_example() {
        let p = WeightedPointSet::from_rows(&[vec![0.0], vec![1.0], vec![10.0], vec![11.0]]).unwrap();
        let params = ClusteringParams::new(2, 2, 0.3).unwrap();
        let r = exact_solve(&p, &params, &SolverConfig::default()).unwrap();
        assert_eq!(r.cost, 1.0);
        assert_eq!(r.enumeration_stats, 8);
        let mut c: Vec<f64> = r.centers.iter().map(|c| c[0]).collect();
        c.sort_by(f64::total_cmp);
        assert_eq!(c, vec![0.5, 10.5]);
    }

    #[test]
    fn k_at_least_n() {
        let p = WeightedPointSet::from_rows(&[vec![0.0, 1.0], vec![3.0, 2.0]]).unwrap();
        let params = ClusteringParams::new(3, 1, 0.3).unwrap();
        let r = exact_solve(&p, &params, &SolverConfig::default()).unwrap();
        assert_eq!(r.cost, 0.0);
        assert_eq!(r.centers.len(), 2);
    }

    #[test]
    fn budget() {
        let rows: Vec<Vec<f64>> = (0..15).map(|i| vec![i as f64]).collect();
        let p = WeightedPointSet::from_rows(&rows).unwrap();
        let params = ClusteringParams::new(2, 2, 0.3).unwrap();
        assert!(matches!(exact_solve(&p, &params, &SolverConfig::default()), Err(crate::Error::Budget { .. })));
    }
}
