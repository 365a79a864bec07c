use serde::{Deserialize, Serialize};

use super::seeding::SeedingResult;
use crate::error::Result;
use crate::geometry::{assign, check_dims, ClusteringParams, ExtendedPointSet, Points, WeightedPointSet};
use crate::sum::{canonical_sum, pairwise_sum_iter};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointClass {
    Inner,
    Main,
    Outer,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ring {
    pub j: i32,
    pub points: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterRings {
    pub members: Vec<usize>,
    /// Average cost of the cluster.
    pub delta: f64,
    pub inner: Vec<usize>,
    pub outer: Vec<usize>,
    /// Main-class points bucketed by `2^j Delta <= cost < 2^(j+1) Delta`, ascending `j`.
    pub rings: Vec<Ring>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RingDecomposition {
    pub cluster_of: Vec<usize>,
    pub point_cost: Vec<f64>,
    pub class: Vec<PointClass>,
    /// Bucket index of every point with positive cost in a cluster with positive average cost.
    pub bucket: Vec<Option<i32>>,
    pub clusters: Vec<ClusterRings>,
    pub inner_threshold: f64,
    pub outer_threshold: f64,
}

/// `j` with `2^j <= ratio < 2^(j+1)`, for `ratio > 0`.
pub fn bucket_index(ratio: f64) -> i32 {
    let mut j = ratio.log2().floor() as i32;
    while 2f64.powi(j) > ratio {
        j -= 1;
    }
    while 2f64.powi(j + 1) <= ratio {
        j += 1;
    }
    j
}

/// Inner threshold factor `(eps/z)^z` and outer factor `(z/eps)^(2z)`.
pub fn thresholds(z: u32, eps: f64) -> (f64, f64) {
    let r = eps / z as f64;
    (r.powi(z as i32), (1.0 / r).powi(2 * z as i32))
}

/// Clusters the points by nearest seeding center (ties to the lowest index)
/// and classifies them by cost relative to the cluster average.
pub fn ring_decompose<P: Points + ?Sized>(p: &P, seeding: &SeedingResult, params: &ClusteringParams) -> Result<RingDecomposition> {
    check_dims(p, &seeding.g)?;
    let z = params.z;
    let a = assign(p, &seeding.g, z);
    let g = seeding.g.len();
    let mut members = vec![Vec::new(); g];
    for (i, &(c, _)) in a.iter().enumerate() {
        members[c].push(i);
    }
    let (fin, fout) = thresholds(z, params.epsilon);
    let n = p.len();
    let mut class = vec![PointClass::Inner; n];
    let mut bucket = vec![None; n];
    let point_cost: Vec<f64> = a.iter().map(|x| x.1).collect();
    let mut clusters = Vec::with_capacity(g);
    for mem in members {
        let w = pairwise_sum_iter(mem.iter().map(|&i| p.weight(i)));
        let delta = if w > 0.0 { pairwise_sum_iter(mem.iter().map(|&i| p.weight(i) * point_cost[i])) / w } else { 0.0 };
        let mut inner = Vec::new();
        let mut outer = Vec::new();
        let mut by_j: std::collections::BTreeMap<i32, Vec<usize>> = Default::default();
        for &i in &mem {
            let c = point_cost[i];
            if delta > 0.0 && c > 0.0 {
                bucket[i] = Some(bucket_index(c / delta));
            }
            if !(delta > 0.0) || c <= fin * delta {
                inner.push(i);
                class[i] = PointClass::Inner;
            } else if c >= fout * delta {
                outer.push(i);
                class[i] = PointClass::Outer;
            } else {
                class[i] = PointClass::Main;
                by_j.entry(bucket[i].expect("positive cost")).or_default().push(i);
            }
        }
        clusters.push(ClusterRings {
            members: mem,
            delta,
            inner,
            outer,
            rings: by_j.into_iter().map(|(j, points)| Ring { j, points }).collect(),
        });
    }
    Ok(RingDecomposition {
        cluster_of: a.iter().map(|x| x.0).collect(),
        point_cost,
        class,
        bucket,
        clusters,
        inner_threshold: fin,
        outer_threshold: fout,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct IgInstance {
    /// Seeding centers first (weight = removed points of their cluster),
    /// then the main-class points with their own weights.
    pub instance: ExtendedPointSet,
    pub offset: f64,
    pub center_weights: Vec<u64>,
    pub main_points: Vec<usize>,
}

/// Moves outer points into the offset `F = cost(R_O, G)` and collapses
/// inner and outer points onto their seeding center.
pub fn build_instance_ig<P: Points + ?Sized>(p: &P, rings: &RingDecomposition, seeding: &SeedingResult) -> IgInstance {
    let offset = canonical_sum(
        rings
            .clusters
            .iter()
            .flat_map(|c| c.outer.iter())
            .map(|&i| p.weight(i) * rings.point_cost[i])
            .collect(),
    );
    let center_weights: Vec<u64> = rings.clusters.iter().map(|c| (c.inner.len() + c.outer.len()) as u64).collect();
    let mut main_points: Vec<usize> = rings.clusters.iter().flat_map(|c| c.rings.iter().flat_map(|r| r.points.iter().copied())).collect();
    main_points.sort_unstable();
    let d = p.dim();
    let mut data = Vec::with_capacity((seeding.g.len() + main_points.len()) * d);
    let mut weights = Vec::new();
    let mut ext = Vec::new();
    for (c, &w) in seeding.g.iter().zip(&center_weights) {
        data.extend_from_slice(c);
        weights.push(w as f64);
        ext.push(0.0);
    }
    for &i in &main_points {
        data.extend_from_slice(p.coords(i));
        weights.push(p.weight(i));
        ext.push(p.ext(i));
    }
    let base = WeightedPointSet::new(d, data, weights).expect("finite instance");
    IgInstance {
        instance: ExtendedPointSet::new(base, ext).expect("finite extensions"),
        offset,
        center_weights,
        main_points,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn buckets_are_half_open() {
        assert_eq!(bucket_index(5.0), 2);
        assert_eq!(bucket_index(4.0), 2);
        assert_eq!(bucket_index(8.0), 3);
        assert_eq!(bucket_index(0.75), -1);
        assert_eq!(bucket_index(1.0), 0);
    }

    #[test]
    fn outer_threshold_example() {
        let (_, out) = thresholds(1, 0.5);
        assert_eq!(out, 4.0);
    }
}
