use serde::{Deserialize, Serialize};

use super::jl::{certify, derandomized_jl, start_dim, JlConfig, JlStrategy};
use super::net::{build_net, net_size_bound, WitnessNet, WitnessParams};
use crate::error::{input, Error, Result};
use crate::geometry::{dist, partition_cost, CenterSet, ClusteringParams, ExtendedPointSet, Partition, Points, SolverConfig};
use crate::par;
use crate::ptas::{check_budget, RgsIter};
use crate::verify::VerifyMode;
use crate::linear_map::LinearMap;
use crate::partition_coreset::{build, PartitionCoresetParams, PartitionCoresetResult};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SketchConfig {
    pub strategy: JlStrategy,
    pub jl: JlConfig,
}

impl Default for SketchConfig {
    fn default() -> Self {
        Self {
            strategy: JlStrategy::SeedScan,
            jl: JlConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostPreservingSketch {
    pub map: LinearMap,
    pub coreset: PartitionCoresetResult,
    /// `m + 1`: projected coordinates plus the extension.
    pub target_dim: usize,
    /// Absent when the identity map was chosen without building the net.
    pub net: Option<WitnessNet>,
    pub net_size_bound: u128,
}

impl CostPreservingSketch {
    /// `f(p) = (Pi g(p), g(p)')` for input point `i`.
    pub fn evaluate(&self, i: usize) -> Vec<f64> {
        let (r, e) = self.coreset.mapping[i];
        let mut v = self.map.apply(self.coreset.representative(r));
        v.push(e);
        v
    }

    /// Image of a center, with extension 0.
    pub fn center_embed(&self, c: &[f64]) -> Vec<f64> {
        let mut v = self.map.apply(c);
        v.push(0.0);
        v
    }

    /// All sketched points as an extended set in `R^m`, carrying the input weights.
    pub fn sketched<P: Points + ?Sized>(&self, p: &P) -> ExtendedPointSet {
        self.map.apply_points(&self.coreset.extended(p))
    }

    pub fn map_centers(&self, s: &CenterSet) -> Result<CenterSet> {
        if s.dim() != self.map.cols {
            return input("center dimension differs from the sketch input dimension");
        }
        let rows: Vec<Vec<f64>> = s.iter().map(|c| self.map.apply(c)).collect();
        CenterSet::from_rows(&rows)
    }
}

/// Partition coreset, witness net on its representatives and a map that
/// preserves net distances within `1 +- eps/z`.
pub fn cost_preserving_sketch<P: Points + ?Sized>(
    p: &P,
    params: &ClusteringParams,
    pc: &PartitionCoresetParams,
    witness: &WitnessParams,
    cfg: &SketchConfig,
) -> Result<CostPreservingSketch> {
    let coreset = build(p, params, pc)?;
    let reps = coreset.representative_rows();
    let d = p.dim();
    let target = params.epsilon / params.z as f64;
    let bound = net_size_bound(reps.len(), witness);
    let n_est = usize::try_from(bound).unwrap_or(usize::MAX);
    let (map, net) = if start_dim(n_est, target, cfg.jl.c) >= d {
        let mut m = LinearMap::identity(d);
        m.certificate = Some(certify(&m, &reps, target));
        (m, None)
    } else {
        let net = build_net(&reps, witness)?;
        let map = derandomized_jl(&net.rows(), target, cfg.strategy, &cfg.jl)?;
        (map, Some(net))
    };
    Ok(CostPreservingSketch {
        target_dim: map.rows + 1,
        map,
        coreset,
        net,
        net_size_bound: bound,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SketchVerifyReport {
    /// `max |P-cost(sketch) - P-cost(P)| / P-cost(P)` over checked partitions.
    pub max_relative_error: f64,
    pub witness: Option<Vec<usize>>,
    pub partitions_checked: u64,
    /// `1 + max |ratio - 1|` of mapped to original distances, recounted.
    pub distortion: f64,
    pub distortion_pairs: u64,
}

/// Distance ratios over all pairs of the net points (or the representatives
/// when no net was built), computed from the matrix directly.
fn recount_distortion(sketch: &CostPreservingSketch) -> (f64, u64) {
    let rows: Vec<Vec<f64>> = match &sketch.net {
        Some(net) => net.rows(),
        None => sketch.coreset.representative_rows(),
    };
    let imgs: Vec<Vec<f64>> = rows.iter().map(|r| sketch.map.apply(r)).collect();
    let n = rows.len();
    let worst = par::map_range(n, |i| {
        let mut w: f64 = 0.0;
        let mut pairs = 0u64;
        for j in i + 1..n {
            let d = dist(&rows[i], &rows[j]);
            if d == 0.0 {
                continue;
            }
            w = w.max((dist(&imgs[i], &imgs[j]) / d - 1.0).abs());
            pairs += 1;
        }
        (w, pairs)
    });
    let max = worst.iter().map(|x| x.0).fold(0.0, f64::max);
    (1.0 + max, worst.iter().map(|x| x.1).sum())
}

/// Compares partition costs (each part against its own optimal center, with
/// extension 0 in the sketch) of the input and its sketched image.
pub fn verify_sketch<P: Points + ?Sized>(
    p: &P,
    sketch: &CostPreservingSketch,
    params: &ClusteringParams,
    solver: &SolverConfig,
    mode: VerifyMode,
) -> Result<SketchVerifyReport> {
    let n = p.len();
    let k = params.k;
    if sketch.coreset.mapping.len() != n || sketch.map.cols != p.dim() {
        return input("sketch was built for a different point set");
    }
    let image = sketch.sketched(p);
    let partitions: Vec<Vec<usize>> = match mode {
        VerifyMode::Exhaustive => {
            if n > 12 {
                return Err(Error::Budget {
                    what: "exhaustive sketch verification",
                    required: n as u128,
                    allowed: 12,
                });
            }
            check_budget(n, k)?;
            let mut it = RgsIter::new(n, k);
            let mut all = Vec::new();
            while let Some(a) = it.next_rgs() {
                all.push(a.to_vec());
            }
            all
        }
        VerifyMode::Sampled { samples, seed } => {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            (0..samples).map(|_| (0..n).map(|_| rng.gen_range(0..k)).collect()).collect()
        }
    };
    let errs = par::map_slice(&partitions, |a| -> Result<f64> {
        let part = Partition::new(a.clone(), k)?;
        let o = partition_cost(p, &part, params.z, solver)?.value;
        let s = partition_cost(&image, &part, params.z, solver)?.value;
        Ok(if o == 0.0 {
            if s == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (s - o).abs() / o
        })
    });
    let mut best = 0.0;
    let mut witness = None;
    for (a, e) in partitions.iter().zip(errs) {
        let e = e?;
        if e > best || witness.is_none() {
            best = best.max(e);
            witness = Some(a.clone());
        }
    }
    let (distortion, distortion_pairs) = recount_distortion(sketch);
    Ok(SketchVerifyReport {
        max_relative_error: best,
        witness,
        partitions_checked: partitions.len() as u64,
        distortion,
        distortion_pairs,
    })
}
