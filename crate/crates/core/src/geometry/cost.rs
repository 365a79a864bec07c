use super::center::{one_center, SolverConfig};
use super::types::{CenterSet, IndexView, Partition, Points};
use crate::error::{input, Result};
use crate::par;
use crate::sum::{canonical_sum, pairwise_sum};

#[inline]
pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        s += d * d;
    }
    s
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    sq_dist(a, b).sqrt()
}

/// `sq^(z/2)`.
#[inline]
pub fn pow_half(sq: f64, z: u32) -> f64 {
    match z {
        1 => sq.sqrt(),
        2 => sq,
        _ if z % 2 == 0 => sq.powi((z / 2) as i32),
        _ => sq.sqrt().powi(z as i32),
    }
}

/// Unweighted cost of point `i` against center `c` (extension included).
#[inline]
pub fn point_cost<P: Points + ?Sized>(p: &P, i: usize, c: &[f64], z: u32) -> f64 {
    let e = p.ext(i);
    pow_half(sq_dist(p.coords(i), c) + e * e, z)
}

/// Nearest center and its unweighted cost; ties go to the lowest center index.
#[inline]
pub fn nearest<P: Points + ?Sized>(p: &P, i: usize, s: &CenterSet, z: u32) -> (usize, f64) {
    let e = p.ext(i);
    let x = p.coords(i);
    let mut best = (0, f64::INFINITY);
    for (j, c) in s.iter().enumerate() {
        let sq = sq_dist(x, c);
        if sq < best.1 {
            best = (j, sq);
        }
    }
    (best.0, pow_half(best.1 + e * e, z))
}

pub fn check_dims<P: Points + ?Sized>(p: &P, s: &CenterSet) -> Result<()> {
    if p.dim() != s.dim() {
        return input(format!("point dimension {} differs from center dimension {}", p.dim(), s.dim()));
    }
    Ok(())
}

/// Per-point nearest center index and unweighted cost.
pub fn assign<P: Points + ?Sized>(p: &P, s: &CenterSet, z: u32) -> Vec<(usize, f64)> {
    par::map_range(p.len(), |i| nearest(p, i, s, z))
}

/// Weighted cost `sum w(p) min_s dist(p,s)^z`. Terms are summed in sorted
/// order with a pairwise tree, so the value is invariant under permutations
/// of the points and of the centers.
pub fn power_cost<P: Points + ?Sized>(p: &P, s: &CenterSet, z: u32) -> Result<f64> {
    check_dims(p, s)?;
    if z == 0 {
        return input("z must be at least 1");
    }
    Ok(power_cost_unchecked(p, s, z))
}

pub(crate) fn power_cost_unchecked<P: Points + ?Sized>(p: &P, s: &CenterSet, z: u32) -> f64 {
    let terms = par::map_range(p.len(), |i| {
        let w = p.weight(i);
        if w == 0.0 {
            0.0
        } else {
            w * nearest(p, i, s, z).1
        }
    });
    canonical_sum(terms)
}

/// Weighted cost of all points against a single center.
pub fn cost_to_center<P: Points + ?Sized>(p: &P, c: &[f64], z: u32) -> f64 {
    let terms: Vec<f64> = (0..p.len())
        .map(|i| {
            let w = p.weight(i);
            if w == 0.0 {
                0.0
            } else {
                w * point_cost(p, i, c, z)
            }
        })
        .collect();
    pairwise_sum(&terms)
}

#[derive(Clone, Debug)]
pub struct PartitionCost {
    pub value: f64,
    /// Per-part center; `None` for parts without positive weight.
    pub centers: Vec<Option<Vec<f64>>>,
    pub part_costs: Vec<f64>,
    pub converged: bool,
    /// Largest final step of a non-converged solve, relative to the data diameter.
    pub residual: f64,
}

impl PartitionCost {
    pub fn center_set(&self) -> Option<CenterSet> {
        let rows: Vec<Vec<f64>> = self.centers.iter().flatten().cloned().collect();
        CenterSet::from_rows(&rows).ok()
    }
}

/// Sum over parts of the cost of each part against its own optimal center.
pub fn partition_cost<P: Points + ?Sized>(p: &P, c: &Partition, z: u32, cfg: &SolverConfig) -> Result<PartitionCost> {
    if c.assignment.len() != p.len() {
        return input("partition does not cover the point set");
    }
    let members = c.members();
    partition_cost_members(p, &members, z, cfg)
}

pub(crate) fn partition_cost_members<P: Points + ?Sized>(
    p: &P,
    members: &[Vec<usize>],
    z: u32,
    cfg: &SolverConfig,
) -> Result<PartitionCost> {
    let mut out = PartitionCost {
        value: 0.0,
        centers: Vec::with_capacity(members.len()),
        part_costs: Vec::with_capacity(members.len()),
        converged: true,
        residual: 0.0,
    };
    for m in members {
        let view = IndexView::new(p, m);
        if !(view.total_weight() > 0.0) {
            out.centers.push(None);
            out.part_costs.push(0.0);
            continue;
        }
        let sol = one_center(&view, z, cfg)?;
        if !sol.converged {
            out.converged = false;
            out.residual = out.residual.max(sol.residual);
        }
        out.part_costs.push(sol.objective);
        out.centers.push(Some(sol.center));
    }
    out.value = pairwise_sum(&out.part_costs);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::types::WeightedPointSet;

    #[test]
    fn pythagoras_and_coincident() {
        let p = WeightedPointSet::from_rows(&[vec![0.0, 0.0]]).unwrap();
        let s = CenterSet::from_rows(&[vec![3.0, 4.0]]).unwrap();
        assert_eq!(power_cost(&p, &s, 2).unwrap(), 25.0);
        let p = WeightedPointSet::from_rows(&[vec![0.0, 0.0], vec![2.0, 0.0]]).unwrap();
        let s = CenterSet::from_rows(&[vec![0.0, 0.0], vec![2.0, 0.0]]).unwrap();
        assert_eq!(power_cost(&p, &s, 1).unwrap(), 0.0);
    }

    #[test]
    fn grid_matches_naive_loop() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64 / 9.0]).collect();
        let p = WeightedPointSet::from_rows(&rows).unwrap();
        let s = CenterSet::from_rows(&[vec![0.5]]).unwrap();
        let mut naive = 0.0;
        for r in &rows {
            naive += (r[0] - 0.5) * (r[0] - 0.5);
        }
        let got = power_cost(&p, &s, 2).unwrap();
        assert!((got - naive).abs() <= 1e-12 * naive);
    }

    #[test]
    fn errors() {
        let p = WeightedPointSet::from_rows(&[vec![0.0, 0.0]]).unwrap();
        let s = CenterSet::from_rows(&[vec![0.0]]).unwrap();
        assert!(power_cost(&p, &s, 2).is_err());
    }

    #[test]
    fn partition_examples() {
        let p = WeightedPointSet::from_rows(&[vec![0.0, 0.0], vec![2.0, 0.0]]).unwrap();
        let cfg = SolverConfig::default();
        let one = partition_cost(&p, &Partition::new(vec![0, 0], 1).unwrap(), 2, &cfg).unwrap();
        assert_eq!(one.value, 2.0);
        assert_eq!(one.centers[0].as_deref(), Some(&[1.0, 0.0][..]));
        for z in 1..=4 {
            let two = partition_cost(&p, &Partition::new(vec![0, 1], 2).unwrap(), z, &cfg).unwrap();
            assert_eq!(two.value, 0.0);
        }
        let empty = partition_cost(&p, &Partition::new(vec![0, 0], 3).unwrap(), 2, &cfg).unwrap();
        assert_eq!(empty.value, 2.0);
        assert!(empty.centers[1].is_none());
    }
}
