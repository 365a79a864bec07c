use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::bicriteria::Quantizer;
use crate::epsilon_approx::{binomial, combinations};
use crate::error::{input, Error, Result};
use crate::geometry::dist;
use crate::par;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessParams {
    /// Diameter ratio `D` of witness subsets.
    pub d_ratio: f64,
    /// Largest subset size `R`.
    pub r: usize,
    pub base_eps: f64,
    pub z: u32,
    pub max_subsets: u128,
    pub max_points: u128,
}

impl WitnessParams {
    pub fn defaults(z: u32, eps: f64) -> Self {
        Self {
            d_ratio: 4.0 * z as f64 / eps,
            r: ((4.0 / (eps * eps)).ceil() as usize).min(4),
            base_eps: eps,
            z,
            max_subsets: 1 << 20,
            max_points: 1 << 16,
        }
    }

    /// Cover spacing parameter `eps' = eps / (4 D z)`.
    pub fn spacing_param(&self) -> f64 {
        self.base_eps / (4.0 * self.d_ratio * self.z as f64)
    }

    pub fn validate(&self) -> Result<()> {
        if self.r < 2 {
            return input("witness subset size R must be at least 2");
        }
        if !(self.d_ratio > 0.0 && self.base_eps > 0.0) || self.z == 0 {
            return input("witness parameters must be positive");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NetKind {
    Cover,
    Basis,
    Origin,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetSource {
    /// Rank of the generating subset in (size, lexicographic) order.
    pub subset: usize,
    pub kind: NetKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessNet {
    pub dim: usize,
    pub points: Vec<f64>,
    pub sources: Vec<NetSource>,
    pub subset_size: usize,
    pub spacing_param: f64,
    /// Orthonormal basis vectors per subset, in subset order.
    pub bases: Vec<Vec<Vec<f64>>>,
}

impl WitnessNet {
    pub fn len(&self) -> usize {
        self.sources.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sources.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.points.chunks_exact(self.dim).map(|r| r.to_vec()).collect()
    }
}

fn diameter(s: &[Vec<f64>]) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..s.len() {
        for j in i + 1..s.len() {
            d = d.max(dist(&s[i], &s[j]));
        }
    }
    d
}

/// Number of points `hull_cover` emits for `s` points with positive diameter.
pub fn hull_cover_count(s: usize, steps: usize) -> u128 {
    binomial(steps + s - 1, s - 1)
}

/// Barycentric lattice with `N` steps, `N = ceil(|S| diam(S) / spacing)`.
/// Any convex combination of `S` is within `|S| diam(S) / N <= spacing` of
/// a lattice point.
pub fn hull_cover(s: &[Vec<f64>], spacing: f64) -> Result<Vec<Vec<f64>>> {
    if s.is_empty() || !(spacing > 0.0) {
        return input("hull cover needs points and positive spacing");
    }
    let d = s[0].len();
    if s.iter().any(|p| p.len() != d) {
        return input("mixed dimensions");
    }
    let diam = diameter(s);
    if s.len() == 1 || diam == 0.0 {
        return Ok(vec![s[0].clone()]);
    }
    let steps = (s.len() as f64 * diam / spacing).ceil() as usize;
    let mut out = Vec::new();
    let mut counts = vec![0usize; s.len()];
    // Compositions of `steps` into |S| nonnegative parts, lexicographic.
    fn rec(s: &[Vec<f64>], i: usize, left: usize, steps: usize, counts: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if i == s.len() - 1 {
            counts[i] = left;
            let d = s[0].len();
            let mut p = vec![0.0; d];
            for (c, v) in counts.iter().zip(s) {
                if *c > 0 {
                    let w = *c as f64 / steps as f64;
                    for (pj, vj) in p.iter_mut().zip(v) {
                        *pj += w * vj;
                    }
                }
            }
            out.push(p);
            return;
        }
        for c in (0..=left).rev() {
            counts[i] = c;
            rec(s, i + 1, left - c, steps, counts, out);
        }
    }
    rec(s, 0, steps, steps, &mut counts, &mut out);
    Ok(out)
}

/// Orthonormal basis of `span(S)` by Gram-Schmidt, pivoting on the largest
/// remaining residual (ties to the lowest index).
pub fn orthonormal_basis(s: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut res: Vec<Vec<f64>> = s.to_vec();
    let scale = s.iter().map(|v| v.iter().map(|x| x * x).sum::<f64>().sqrt()).fold(0.0, f64::max);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut used = vec![false; s.len()];
    loop {
        let mut best = (usize::MAX, 0.0);
        for (i, r) in res.iter().enumerate() {
            if used[i] {
                continue;
            }
            let n = r.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n > best.1 {
                best = (i, n);
            }
        }
        if best.0 == usize::MAX || best.1 <= 1e-12 * scale {
            break;
        }
        used[best.0] = true;
        let q: Vec<f64> = res[best.0].iter().map(|x| x / best.1).collect();
        for (i, r) in res.iter_mut().enumerate() {
            if used[i] {
                continue;
            }
            let dot: f64 = r.iter().zip(&q).map(|(a, b)| a * b).sum();
            for (rj, qj) in r.iter_mut().zip(&q) {
                *rj -= dot * qj;
            }
        }
        basis.push(q);
    }
    basis
}

/// Upper bound on the net size before deduplication.
pub fn net_size_bound(reps: usize, witness: &WitnessParams) -> u128 {
    let steps_for = |s: usize| (s as f64 / witness.spacing_param()).ceil() as usize;
    let mut total: u128 = 1;
    for s in 1..=witness.r.min(reps) {
        let subsets = binomial(reps, s);
        let per = if s == 1 { 2 } else { hull_cover_count(s, steps_for(s)).saturating_add(s as u128) };
        total = total.saturating_add(subsets.saturating_mul(per));
    }
    total
}

pub fn subset_count(reps: usize, r: usize) -> u128 {
    (1..=r.min(reps)).map(|s| binomial(reps, s)).sum()
}

/// Origin, then for every subset of at most `R` representatives its
/// orthonormal basis and a hull cover at spacing `eps' diam(S)`.
pub fn build_net(reps: &[Vec<f64>], witness: &WitnessParams) -> Result<WitnessNet> {
    witness.validate()?;
    let Some(first) = reps.first() else {
        return input("net needs at least one representative");
    };
    let d = first.len();
    if reps.iter().any(|r| r.len() != d) {
        return input("mixed dimensions");
    }
    let subsets = subset_count(reps.len(), witness.r);
    if subsets > witness.max_subsets {
        return Err(Error::Budget {
            what: "witness net subsets",
            required: subsets,
            allowed: witness.max_subsets,
        });
    }
    let bound = net_size_bound(reps.len(), witness);
    if bound > witness.max_points {
        return Err(Error::Budget {
            what: "witness net points",
            required: bound,
            allowed: witness.max_points,
        });
    }
    let eps_prime = witness.spacing_param();
    let mut all_subsets: Vec<Vec<usize>> = Vec::new();
    for s in 1..=witness.r.min(reps.len()) {
        all_subsets.extend(combinations(reps.len(), s));
    }
    let parts = par::map_slice(&all_subsets, |sub| -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
        let pts: Vec<Vec<f64>> = sub.iter().map(|&i| reps[i].clone()).collect();
        let basis = orthonormal_basis(&pts);
        let diam = diameter(&pts);
        let cover = if diam == 0.0 { vec![pts[0].clone()] } else { hull_cover(&pts, eps_prime * diam)? };
        Ok((basis, cover))
    });
    let scale = reps.iter().flatten().fold(1.0f64, |a, x| a.max(x.abs()));
    let q = Quantizer::for_scale(scale);
    let mut seen = HashSet::new();
    let mut points = Vec::new();
    let mut sources = Vec::new();
    let mut bases = Vec::with_capacity(all_subsets.len());
    let origin = vec![0.0; d];
    seen.insert(q.key(&origin));
    points.extend_from_slice(&origin);
    sources.push(NetSource {
        subset: usize::MAX,
        kind: NetKind::Origin,
    });
    for (rank, part) in parts.into_iter().enumerate() {
        let (basis, cover) = part?;
        for (list, kind) in [(&basis, NetKind::Basis), (&cover, NetKind::Cover)] {
            for v in list.iter() {
                if seen.insert(q.key(v)) {
                    points.extend_from_slice(v);
                    sources.push(NetSource { subset: rank, kind });
                }
            }
        }
        bases.push(basis);
    }
    Ok(WitnessNet {
        dim: d,
        points,
        sources,
        subset_size: witness.r,
        spacing_param: eps_prime,
        bases,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_cover() {
        let c = hull_cover(&[vec![0.0], vec![1.0]], 0.25).unwrap();
        let mut xs: Vec<f64> = c.iter().map(|p| p[0]).collect();
        xs.sort_by(f64::total_cmp);
        assert_eq!(xs.len(), 9);
        for q in [0.0, 0.25, 0.5, 0.75, 1.0] {
            assert!(xs.contains(&q));
        }
        assert_eq!(hull_cover(&[vec![2.0, 2.0], vec![2.0, 2.0]], 0.1).unwrap(), vec![vec![2.0, 2.0]]);
    }

    #[test]
    fn basis_is_orthonormal() {
        let b = orthonormal_basis(&[vec![1.0, 1.0, 0.0], vec![2.0, 2.0, 0.0], vec![0.0, 1.0, 3.0]]);
        assert_eq!(b.len(), 2);
        for i in 0..2 {
            for j in 0..2 {
                let dot: f64 = b[i].iter().zip(&b[j]).map(|(x, y)| x * y).sum();
                assert!((dot - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn single_representative() {
        let w = WitnessParams { r: 2, ..WitnessParams::defaults(1, 0.5) };
        let net = build_net(&[vec![3.0, 4.0]], &w).unwrap();
        // origin, unit basis vector, the point itself
        assert_eq!(net.len(), 3);
        assert_eq!(net.point(0), &[0.0, 0.0]);
        assert_eq!(net.point(1), &[0.6, 0.8]);
        assert_eq!(net.point(2), &[3.0, 4.0]);
    }
}
