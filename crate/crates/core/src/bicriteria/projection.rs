use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{low_dim, BicriteriaConfig, BicriteriaResult};
use crate::error::{input, Result};
use crate::geometry::{assign, one_center, power_cost, CenterSet, ClusteringParams, IndexView, Points};
use crate::linear_map::LinearMap;
use crate::par;

/// Rademacher sign matrix scaled by `1/sqrt(m)`, with signs read from a
/// ChaCha stream keyed by `seed` (row-major, 32 signs per output word).
pub fn seeded_projection_family(d: usize, m: usize, seed: u64) -> Result<LinearMap> {
    if m == 0 || d == 0 {
        return input("projection dimensions must be positive");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = 1.0 / (m as f64).sqrt();
    let mut matrix = Vec::with_capacity(m * d);
    let mut word = 0u32;
    for t in 0..m * d {
        if t % 32 == 0 {
            word = rng.next_u32();
        }
        let bit = (word >> (t % 32)) & 1;
        matrix.push(if bit == 1 { scale } else { -scale });
    }
    LinearMap::new(m, d, matrix)
}

/// Solves in each projected space, lifts every clustering back with
/// per-part 1-center solves and keeps the cheapest lift; ties go to the
/// lowest seed.
pub fn project_and_lift<P: Points + ?Sized>(p: &P, params: &ClusteringParams, cfg: &BicriteriaConfig) -> Result<BicriteriaResult> {
    let d = p.dim();
    let m = cfg.projection_dim_for(params).min(d);
    let seeds: Vec<u64> = (0..1u64 << cfg.projection_seed_bits).collect();
    let runs = par::map_slice(&seeds, |&seed| -> Result<(f64, BicriteriaResult)> {
        let map = seeded_projection_family(d, m, seed)?;
        let proj = map.apply_points(p);
        let sol = low_dim(&proj, params, cfg)?;
        let a = assign(&proj, &sol.centers, params.z);
        let mut members = vec![Vec::new(); sol.centers.len()];
        for (i, &(j, _)) in a.iter().enumerate() {
            if p.weight(i) > 0.0 {
                members[j].push(i);
            }
        }
        let mut rows = Vec::new();
        for mem in members.iter().filter(|m| !m.is_empty()) {
            rows.push(one_center(&IndexView::new(p, mem), params.z, &cfg.solver)?.center);
        }
        let centers = CenterSet::from_rows(&rows)?;
        let cost = power_cost(p, &centers, params.z)?;
        Ok((
            cost,
            BicriteriaResult {
                centers,
                cost,
                projection_seed: Some(seed),
                ..sol
            },
        ))
    });
    let mut best: Option<(f64, BicriteriaResult)> = None;
    for r in runs {
        let (c, res) = r?;
        if best.as_ref().map_or(true, |(b, _)| c < *b) {
            best = Some((c, res));
        }
    }
    Ok(best.expect("at least one seed").1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_matrix() {
        let a = seeded_projection_family(30, 12, 5).unwrap();
        let b = seeded_projection_family(30, 12, 5).unwrap();
        assert_eq!(a, b);
        let c = seeded_projection_family(30, 12, 6).unwrap();
        assert_ne!(a, c);
        let s = 1.0 / 12f64.sqrt();
        assert!(a.matrix.iter().all(|&v| v == s || v == -s));
    }
}
