//! Seeded synthetic instances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::geometry::WeightedPointSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Generator {
    GaussianBlobs,
    Rings,
    FarPoint,
}

impl std::str::FromStr for Generator {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian-blobs" => Ok(Self::GaussianBlobs),
            "rings" => Ok(Self::Rings),
            "far-point" => Ok(Self::FarPoint),
            _ => input(format!("unknown generator {s:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub n: usize,
    pub d: usize,
    /// Number of blobs or rings.
    pub clusters: usize,
    pub seed: u64,
}

fn check(cfg: &GenConfig) -> Result<()> {
    if cfg.n == 0 || cfg.d == 0 || cfg.clusters == 0 {
        return input("n, d and cluster count must be positive");
    }
    Ok(())
}

/// Unit-variance blobs around centers drawn from `N(0, 100 I)`, assigned round robin.
pub fn gaussian_blobs(cfg: &GenConfig) -> Result<WeightedPointSet> {
    check(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let wide = Normal::new(0.0, 10.0).expect("valid normal");
    let unit = Normal::new(0.0, 1.0).expect("valid normal");
    let centers: Vec<Vec<f64>> = (0..cfg.clusters).map(|_| (0..cfg.d).map(|_| wide.sample(&mut rng)).collect()).collect();
    let rows: Vec<Vec<f64>> = (0..cfg.n)
        .map(|i| centers[i % cfg.clusters].iter().map(|&c| c + unit.sample(&mut rng)).collect())
        .collect();
    WeightedPointSet::from_rows(&rows)
}

/// Concentric spherical shells of radius `1, 2, 4, ...` around the origin,
/// with small radial noise and uniform directions.
pub fn rings(cfg: &GenConfig) -> Result<WeightedPointSet> {
    check(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let noise = Normal::new(0.0, 0.02).expect("valid normal");
    let unit = Normal::new(0.0, 1.0).expect("valid normal");
    let rows: Vec<Vec<f64>> = (0..cfg.n)
        .map(|i| {
            let r = 2f64.powi((i % cfg.clusters) as i32) * (1.0 + noise.sample(&mut rng));
            if cfg.d == 1 {
                vec![if rng.gen::<bool>() { r } else { -r }]
            } else {
                let mut dir: Vec<f64> = (0..cfg.d).map(|_| unit.sample(&mut rng)).collect();
                let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm == 0.0 {
                    dir = vec![0.0; cfg.d];
                    dir[0] = 1.0;
                } else {
                    dir.iter_mut().for_each(|x| *x /= norm);
                }
                dir.into_iter().map(|x| x * r).collect()
            }
        })
        .collect();
    WeightedPointSet::from_rows(&rows)
}

/// Tight unit-variance blobs plus one point far from all of them, the
/// usual trap for sampling-based constructions.
pub fn far_point(cfg: &GenConfig) -> Result<WeightedPointSet> {
    check(cfg)?;
    if cfg.n < 2 {
        return input("far-point instances need at least two points");
    }
    let mut blobs = gaussian_blobs(&GenConfig { n: cfg.n - 1, ..*cfg })?.rows().map(<[f64]>::to_vec).collect::<Vec<_>>();
    let mut far = vec![0.0; cfg.d];
    far[0] = 1e4;
    blobs.push(far);
    WeightedPointSet::from_rows(&blobs)
}

pub fn generate(kind: Generator, cfg: &GenConfig) -> Result<WeightedPointSet> {
    match kind {
        Generator::GaussianBlobs => gaussian_blobs(cfg),
        Generator::Rings => rings(cfg),
        Generator::FarPoint => far_point(cfg),
    }
}
