//! Coresets with offset: greedy seeding, ring decomposition, outer points
//! folded into a scalar offset, and per-ring set approximations.

mod classes;
mod pipeline;
mod rings;
mod seeding;
mod verify;

pub use classes::{range_class_report, RingClassReport};
pub use pipeline::{euclidean_pipeline, PipelineConfig, PipelineResult};
pub use rings::{bucket_index, build_instance_ig, ring_decompose, thresholds, ClusterRings, IgInstance, PointClass, Ring, RingDecomposition};
pub use seeding::{greedy_seeding, SeedingResult, SeedingStatus};
pub use verify::{verify_offset_coreset, OffsetVerifyReport};

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use serde::{Deserialize, Serialize};

use crate::bicriteria::BicriteriaConfig;
use crate::epsilon_approx::{default_vc_dim_hint, halving_approx, uniform_sample_approx, RangeTestFamily, SetApproximation};
use crate::error::{input, Result};
use crate::geometry::{CenterSet, ClusteringParams, ExtendedPointSet, Points, WeightedPointSet};
use crate::par;

/// `min(eps, 20 8^z eps^2 / ln(4z/eps))`.
pub fn epsilon_prime(z: u32, eps: f64) -> f64 {
    epsilon_prime_raw(z, eps).min(eps)
}

pub fn epsilon_prime_raw(z: u32, eps: f64) -> f64 {
    20.0 * 8f64.powi(z as i32) * eps * eps / (4.0 * z as f64 / eps).ln()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SetApproxMode {
    Deterministic,
    Randomized { seed: u64, delta: f64, c: f64 },
}

impl SetApproxMode {
    pub fn randomized(seed: u64) -> Self {
        Self::Randomized { seed, delta: 0.1, c: 2.0 }
    }
}

/// How the finite range families for the halving step are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RangeTestConfig {
    /// Center tuples come from the seeding centers plus a lattice of this many points per axis.
    pub grid_per_axis: usize,
    pub radii_per_tuple: usize,
    pub max_ranges: usize,
}

impl Default for RangeTestConfig {
    fn default() -> Self {
        Self {
            grid_per_axis: 6,
            radii_per_tuple: 4,
            max_ranges: 256,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RingCoresetConfig {
    pub mode: SetApproxMode,
    pub tests: RangeTestConfig,
    pub bicriteria: BicriteriaConfig,
    /// Overrides the per-ring approximation parameter.
    pub eps_prime: Option<f64>,
    /// Fixes the baseline factor instead of the certified ratio.
    pub baseline_factor: Option<f64>,
}

impl Default for RingCoresetConfig {
    fn default() -> Self {
        Self {
            mode: SetApproxMode::Deterministic,
            tests: RangeTestConfig::default(),
            bicriteria: BicriteriaConfig::default(),
            eps_prime: None,
            baseline_factor: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum CoresetSource {
    SeedingCenter { center: usize },
    Ring { cluster: usize, j: i32, point: usize },
}

/// Weighted points plus a scalar offset. Weights are exact ratios of counts;
/// the base weights of `points` hold their floating-point values.
#[derive(Clone, Debug, PartialEq)]
pub struct OffsetCoreset {
    pub points: ExtendedPointSet,
    pub weights: Vec<Ratio<u64>>,
    pub offset: f64,
    pub provenance: Vec<CoresetSource>,
}

impl OffsetCoreset {
    pub fn new(points: ExtendedPointSet, weights: Vec<Ratio<u64>>, offset: f64, provenance: Vec<CoresetSource>) -> Result<Self> {
        if weights.len() != points.len() || provenance.len() != points.len() {
            return input("weights and provenance must match the point count");
        }
        if !(offset >= 0.0 && offset.is_finite()) {
            return input("offset must be finite and nonnegative");
        }
        for (i, w) in weights.iter().enumerate() {
            if *w.denom() == 0 || ratio_f64(w) != points.weight(i) {
                return input(format!("weight {i} disagrees with its ratio"));
            }
        }
        Ok(Self {
            points,
            weights,
            offset,
            provenance,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.points.dim()
    }

    /// Sum of the exact weights.
    pub fn total_weight_exact(&self) -> BigRational {
        self.weights
            .iter()
            .fold(BigRational::from_integer(BigInt::from(0)), |acc, w| acc + BigRational::new(BigInt::from(*w.numer()), BigInt::from(*w.denom())))
    }

    pub fn cost(&self, s: &CenterSet, z: u32) -> Result<f64> {
        Ok(crate::geometry::power_cost(&self.points, s, z)? + self.offset)
    }
}

pub(crate) fn ratio_f64(w: &Ratio<u64>) -> f64 {
    *w.numer() as f64 / *w.denom() as f64
}

#[derive(Clone, Debug, PartialEq)]
pub struct RingSample {
    pub cluster: usize,
    pub j: i32,
    pub ground: Vec<usize>,
    pub approx: SetApproximation,
    /// Deviation on the range family used to build it (zero for samples).
    pub deviation: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RingCoresetOutput {
    pub coreset: OffsetCoreset,
    pub seeding: SeedingResult,
    pub rings: Option<RingDecomposition>,
    pub samples: Vec<RingSample>,
    pub eps_prime: f64,
}

fn unit_weights<P: Points + ?Sized>(p: &P) -> Result<()> {
    if (0..p.len()).any(|i| p.weight(i) != 1.0) {
        return input("ring coreset expects unit weights");
    }
    Ok(())
}

/// Centers of `tuple pool` for the range families: seeding centers, then a
/// lattice over the data.
fn test_pool<P: Points + ?Sized>(p: &P, g: &CenterSet, cfg: &RangeTestConfig) -> Result<CenterSet> {
    let mut rows = g.to_rows();
    let d = p.dim();
    let per = (cfg.grid_per_axis as f64).powi(d as i32);
    if cfg.grid_per_axis > 0 && per <= crate::verify::GRID_BUDGET as f64 {
        rows.extend(crate::verify::center_grid(p, cfg.grid_per_axis, 0.1)?.to_rows());
    }
    CenterSet::from_rows(&rows)
}

pub fn ring_coreset<P: Points + ?Sized>(p: &P, params: &ClusteringParams, cfg: &RingCoresetConfig) -> Result<RingCoresetOutput> {
    params.validate()?;
    if p.is_empty() {
        return input("empty point set");
    }
    unit_weights(p)?;
    let seeding = greedy_seeding(p, params, &cfg.bicriteria, cfg.baseline_factor)?;
    let eps_prime = cfg.eps_prime.unwrap_or_else(|| epsilon_prime(params.z, params.epsilon));
    let d = p.dim();

    if seeding.status == SeedingStatus::LowCost {
        // Every point collapses onto its nearest seeding center.
        let a = crate::geometry::assign(p, &seeding.g, params.z);
        let mut counts = vec![0u64; seeding.g.len()];
        for (c, _) in &a {
            counts[*c] += 1;
        }
        let mut data = Vec::new();
        let mut weights = Vec::new();
        let mut prov = Vec::new();
        for (c, &cnt) in counts.iter().enumerate() {
            if cnt > 0 {
                data.extend_from_slice(seeding.g.center(c));
                weights.push(Ratio::from_integer(cnt));
                prov.push(CoresetSource::SeedingCenter { center: c });
            }
        }
        let coreset = assemble(d, data, weights, 0.0, prov)?;
        return Ok(RingCoresetOutput {
            coreset,
            seeding,
            rings: None,
            samples: Vec::new(),
            eps_prime,
        });
    }

    let rings = ring_decompose(p, &seeding, params)?;
    let ig = build_instance_ig(p, &rings, &seeding);
    let pool = test_pool(p, &seeding.g, &cfg.tests)?;
    let jobs: Vec<(usize, i32, &Vec<usize>)> = rings
        .clusters
        .iter()
        .enumerate()
        .flat_map(|(ci, c)| c.rings.iter().map(move |r| (ci, r.j, &r.points)))
        .collect();
    let vc = default_vc_dim_hint(params.k, d);
    let built: Vec<Result<RingSample>> = par::map_slice(&jobs, |&(cluster, j, ground)| {
        let (approx, deviation) = match cfg.mode {
            SetApproxMode::Deterministic => {
                let tests = RangeTestFamily::from_data_distances(p, ground, &pool, params.k, cfg.tests.radii_per_tuple, cfg.tests.max_ranges);
                let a = halving_approx(p, ground, eps_prime, &tests)?;
                let dev = crate::epsilon_approx::verify_set_approx(p, ground, &a, &tests)?;
                (a, Some(dev))
            }
            SetApproxMode::Randomized { seed, delta, c } => {
                let ring_seed = seed ^ ((cluster as u64) << 32) ^ (j as i64 as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
                (uniform_sample_approx(ground, eps_prime.min(0.999), delta, vc, ring_seed, c)?, None)
            }
        };
        Ok(RingSample {
            cluster,
            j,
            ground: ground.clone(),
            approx,
            deviation,
        })
    });
    let samples = built.into_iter().collect::<Result<Vec<_>>>()?;

    let mut data = Vec::new();
    let mut weights = Vec::new();
    let mut ext = Vec::new();
    let mut prov = Vec::new();
    for (c, &w) in ig.center_weights.iter().enumerate() {
        if w > 0 {
            data.extend_from_slice(seeding.g.center(c));
            weights.push(Ratio::from_integer(w));
            ext.push(0.0);
            prov.push(CoresetSource::SeedingCenter { center: c });
        }
    }
    for s in &samples {
        let w = Ratio::new(s.ground.len() as u64, s.approx.indices.len() as u64);
        for &i in &s.approx.indices {
            data.extend_from_slice(p.coords(i));
            weights.push(w);
            ext.push(p.ext(i));
            prov.push(CoresetSource::Ring {
                cluster: s.cluster,
                j: s.j,
                point: i,
            });
        }
    }
    let base = WeightedPointSet::new(d, data, weights.iter().map(ratio_f64).collect())?;
    let coreset = OffsetCoreset::new(ExtendedPointSet::new(base, ext)?, weights, ig.offset, prov)?;
    Ok(RingCoresetOutput {
        coreset,
        seeding,
        rings: Some(rings),
        samples,
        eps_prime,
    })
}

fn assemble(d: usize, data: Vec<f64>, weights: Vec<Ratio<u64>>, offset: f64, prov: Vec<CoresetSource>) -> Result<OffsetCoreset> {
    let base = WeightedPointSet::new(d, data, weights.iter().map(ratio_f64).collect())?;
    OffsetCoreset::new(ExtendedPointSet::zero_extension(base), weights, offset, prov)
}
