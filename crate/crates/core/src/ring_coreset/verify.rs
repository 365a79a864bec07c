use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::OffsetCoreset;
use crate::epsilon_approx::{binomial, combinations};
use crate::error::{input, Error, Result};
use crate::geometry::{point_cost, CenterSet, ClusteringParams, Points};
use crate::par;
use crate::sum::pairwise_sum_iter;
use crate::verify::VerifyMode;

/// Largest number of center tuples an exhaustive check will visit.
pub const TUPLE_BUDGET: u128 = 1 << 24;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OffsetVerifyReport {
    pub max_relative_error: f64,
    /// Grid indices of the worst tuple.
    pub witness: Option<Vec<usize>>,
    pub tuples_checked: u64,
}

/// Point-by-grid cost matrix, row-major by point.
fn cost_matrix<P: Points + ?Sized>(p: &P, grid: &CenterSet, z: u32) -> Vec<f64> {
    let g = grid.len();
    let rows = par::map_range(p.len(), |i| (0..g).map(|c| point_cost(p, i, grid.center(c), z)).collect::<Vec<_>>());
    rows.concat()
}

fn tuple_cost<P: Points + ?Sized>(p: &P, m: &[f64], g: usize, t: &[usize]) -> f64 {
    pairwise_sum_iter((0..p.len()).map(|i| {
        let row = &m[i * g..(i + 1) * g];
        p.weight(i) * t.iter().map(|&c| row[c]).fold(f64::INFINITY, f64::min)
    }))
}

/// `max_S |cost(core, S) + F - cost(P, S)| / cost(P, S)` over `k`-subsets `S`
/// of `grid`, skipping sets with `cost(P, S) = 0`.
pub fn verify_offset_coreset<P: Points + ?Sized>(
    p: &P,
    core: &OffsetCoreset,
    params: &ClusteringParams,
    grid: &CenterSet,
    mode: VerifyMode,
) -> Result<OffsetVerifyReport> {
    if grid.dim() != p.dim() || core.dim() != p.dim() {
        return input("grid, coreset and points must share a dimension");
    }
    let k = params.k.min(grid.len());
    if k == 0 {
        return input("empty center grid");
    }
    let g = grid.len();
    let tuples: Vec<Vec<usize>> = match mode {
        VerifyMode::Exhaustive => {
            let total = binomial(g, k);
            if total > TUPLE_BUDGET {
                return Err(Error::Budget {
                    what: "center tuples",
                    required: total,
                    allowed: TUPLE_BUDGET,
                });
            }
            combinations(g, k).collect()
        }
        VerifyMode::Sampled { samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..samples)
                .map(|_| {
                    let mut t = sample(&mut rng, g, k).into_vec();
                    t.sort_unstable();
                    t
                })
                .collect()
        }
    };
    let z = params.z;
    let mp = cost_matrix(p, grid, z);
    let mc = cost_matrix(&core.points, grid, z);
    let errs = par::map_slice(&tuples, |t| {
        let full = tuple_cost(p, &mp, g, t);
        if full == 0.0 {
            return None;
        }
        let approx = tuple_cost(&core.points, &mc, g, t) + core.offset;
        Some((approx - full).abs() / full)
    });
    let mut best = 0.0;
    let mut witness = None;
    for (t, e) in tuples.iter().zip(&errs) {
        if let Some(e) = *e {
            if e > best || witness.is_none() {
                best = best.max(e);
                witness = Some(t.clone());
            }
        }
    }
    Ok(OffsetVerifyReport {
        max_relative_error: best,
        witness,
        tuples_checked: tuples.len() as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ExtendedPointSet, WeightedPointSet};
    use crate::ring_coreset::CoresetSource;
    use crate::verify::center_grid;
    use num_rational::Ratio;

    #[test]
    fn identity_coreset_has_no_error() {
        let rows: Vec<Vec<f64>> = (0..9).map(|i| vec![i as f64 * 0.7, (i * i % 5) as f64]).collect();
        let p = WeightedPointSet::from_rows(&rows).unwrap();
        let core = OffsetCoreset::new(
            ExtendedPointSet::zero_extension(p.clone()),
            vec![Ratio::from_integer(1); 9],
            0.0,
            (0..9).map(|c| CoresetSource::SeedingCenter { center: c }).collect(),
        )
        .unwrap();
        let grid = center_grid(&p, 5, 0.1).unwrap();
        let params = ClusteringParams::new(2, 2, 0.3).unwrap();
        let r = verify_offset_coreset(&p, &core, &params, &grid, VerifyMode::Exhaustive).unwrap();
        assert_eq!(r.max_relative_error, 0.0);
        assert_eq!(r.tuples_checked, 300);
    }
}
