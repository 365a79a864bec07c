use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{check_dims, power_cost, CenterSet, ClusteringParams, Points};
use crate::par;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub anchor: usize,
    /// Radius level; `None` for the anchor point itself.
    pub level: Option<i32>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CandidateCenters {
    pub dim: usize,
    pub points: Vec<f64>,
    pub provenance: Vec<Provenance>,
    /// Average anchor cost used for the radii.
    pub delta: f64,
    pub levels: Option<(i32, i32)>,
    /// Multiplier applied to the lattice spacing to respect the budget;
    /// 1 means the full cover was built, infinity means no lattice at all.
    pub spacing_factor: f64,
}

impl CandidateCenters {
    pub fn len(&self) -> usize {
        self.provenance.len()
    }

    pub fn is_empty(&self) -> bool {
        self.provenance.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks_exact(self.dim)
    }

    pub fn as_center_set(&self) -> CenterSet {
        CenterSet::new(self.dim, self.points.clone()).expect("nonempty candidates")
    }

    /// Full cover: lattice spacing was not coarsened.
    pub fn is_full_cover(&self) -> bool {
        self.spacing_factor == 1.0
    }
}

/// Quantized coordinates used for deduplication.
pub(crate) struct Quantizer {
    quantum: f64,
}

impl Quantizer {
    pub(crate) fn for_scale(scale: f64) -> Self {
        Self {
            quantum: 1e-12 * scale.max(1.0),
        }
    }

    pub(crate) fn key(&self, x: &[f64]) -> Vec<i64> {
        x.iter().map(|v| (v / self.quantum).round() as i64).collect()
    }
}

pub(crate) fn coord_scale<P: Points + ?Sized>(p: &P) -> f64 {
    let mut s: f64 = 0.0;
    for i in 0..p.len() {
        for &x in p.coords(i) {
            s = s.max(x.abs());
        }
    }
    s
}

struct Level {
    index: i32,
    radius: f64,
}

fn axis_range(x: f64, reach: f64, spacing: f64) -> (i64, i64) {
    (((x - reach) / spacing).ceil() as i64, ((x + reach) / spacing).floor() as i64)
}

fn box_count(x: &[f64], reach: f64, spacing: f64) -> f64 {
    let mut c = 1.0;
    for &v in x {
        let (lo, hi) = axis_range(v, reach, spacing);
        if hi < lo {
            return 0.0;
        }
        c *= (hi - lo + 1) as f64;
    }
    c
}

fn lattice_in_ball(x: &[f64], reach: f64, spacing: f64, out: &mut Vec<f64>) {
    fn rec(x: &[f64], axis: usize, reach_sq: f64, acc: f64, spacing: f64, cur: &mut Vec<f64>, reach: f64, out: &mut Vec<f64>) {
        if axis == x.len() {
            out.extend_from_slice(cur);
            return;
        }
        let (lo, hi) = axis_range(x[axis], reach, spacing);
        for u in lo..=hi {
            let v = u as f64 * spacing;
            let d = v - x[axis];
            let s = acc + d * d;
            if s <= reach_sq {
                cur.push(v);
                rec(x, axis + 1, reach_sq, s, spacing, cur, reach, out);
                cur.pop();
            }
        }
    }
    let mut cur = Vec::with_capacity(x.len());
    rec(x, 0, reach * reach, 0.0, spacing, &mut cur, reach, out);
}

/// Input points followed by lattice covers of the balls `B(p, (2^i Delta)^(1/z))`.
pub fn candidate_centers<P: Points + ?Sized>(
    p: &P,
    params: &ClusteringParams,
    anchor: &CenterSet,
    alpha: f64,
    budget: usize,
) -> Result<CandidateCenters> {
    check_dims(p, anchor)?;
    let d = p.dim();
    let n = p.len();
    let q = Quantizer::for_scale(coord_scale(p));
    let mut seen: HashSet<Vec<i64>> = HashSet::new();
    let mut points = Vec::new();
    let mut provenance = Vec::new();
    for i in 0..n {
        if seen.insert(q.key(p.coords(i))) {
            points.extend_from_slice(p.coords(i));
            provenance.push(Provenance { anchor: i, level: None });
        }
    }
    let tw = p.total_weight();
    let delta = if tw > 0.0 { power_cost(p, anchor, params.z)? / tw } else { 0.0 };
    if !(delta > 0.0) || n == 0 {
        return Ok(CandidateCenters {
            dim: d,
            points,
            provenance,
            delta,
            levels: None,
            spacing_factor: 1.0,
        });
    }
    let zf = params.z as f64;
    let lo = (params.epsilon / (alpha * zf)).log2().floor() as i32;
    let hi = ((n as f64) / alpha).log2().ceil() as i32;
    let hi = hi.max(lo);
    let levels: Vec<Level> = (lo..=hi)
        .map(|i| Level {
            index: i,
            radius: (2f64.powi(i) * delta).powf(1.0 / zf),
        })
        .collect();
    let sqrt_d = (d as f64).sqrt();
    let base_spacing = |r: f64| params.epsilon / zf * r / sqrt_d;
    // Reach includes half a cell diagonal only for the full cover.
    let reach = |r: f64, f: f64| if f == 1.0 { r + base_spacing(r) * sqrt_d / 2.0 } else { r };
    let count = |f: f64| -> f64 {
        let mut total = 0.0;
        for lv in &levels {
            let s = base_spacing(lv.radius) * f;
            for i in 0..n {
                total += box_count(p.coords(i), reach(lv.radius, f), s);
            }
        }
        total
    };
    let mut factor = 1.0;
    while count(factor) > budget as f64 {
        factor *= 2.0;
        if factor > 2f64.powi(60) {
            factor = f64::INFINITY;
            break;
        }
    }
    if factor.is_finite() {
        let jobs: Vec<(usize, usize)> = (0..levels.len()).flat_map(|l| (0..n).map(move |i| (l, i))).collect();
        let chunks = par::map_slice(&jobs, |&(l, i)| {
            let lv = &levels[l];
            let s = base_spacing(lv.radius) * factor;
            let mut out = Vec::new();
            lattice_in_ball(p.coords(i), reach(lv.radius, factor), s, &mut out);
            out
        });
        for (&(l, i), chunk) in jobs.iter().zip(chunks) {
            for c in chunk.chunks_exact(d) {
                if seen.insert(q.key(c)) {
                    points.extend_from_slice(c);
                    provenance.push(Provenance {
                        anchor: i,
                        level: Some(levels[l].index),
                    });
                }
            }
        }
    }
    Ok(CandidateCenters {
        dim: d,
        points,
        provenance,
        delta,
        levels: Some((lo, hi)),
        spacing_factor: factor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_lattice() {
        let mut out = Vec::new();
        let r = 1.0;
        let s = 0.5;
        lattice_in_ball(&[0.0], r + s / 2.0, s, &mut out);
        assert_eq!(out, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
    }

    #[test]
    fn box_count_bounds_enumeration() {
        let x = [0.3, -1.7, 2.2];
        let mut out = Vec::new();
        lattice_in_ball(&x, 1.3, 0.4, &mut out);
        assert!((out.len() / 3) as f64 <= box_count(&x, 1.3, 0.4));
        for c in out.chunks_exact(3) {
            let sq: f64 = c.iter().zip(&x).map(|(a, b)| (a - b) * (a - b)).sum();
            assert!(sq <= 1.3 * 1.3);
        }
    }
}
