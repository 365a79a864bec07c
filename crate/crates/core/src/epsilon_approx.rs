//! Set approximations for the range space of complements of unions of
//! `k` balls: membership, deterministic halving, uniform sampling and a
//! deviation verifier over a finite test family.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::geometry::{dist, CenterSet, Points};
use crate::par;

/// `{p : min_c dist(p, c) >= radius}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallRange {
    pub centers: CenterSet,
    pub radius: f64,
}

impl BallRange {
    pub fn contains(&self, p: &[f64]) -> bool {
        range_membership(p, self)
    }
}

pub fn range_membership(p: &[f64], range: &BallRange) -> bool {
    range.centers.iter().all(|c| dist(p, c) >= range.radius)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Generation {
    FromGrid,
    FromDataDistances,
    Explicit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RangeTestFamily {
    pub ranges: Vec<BallRange>,
    pub generation: Generation,
}

/// Lexicographic `k`-combinations of `0..n`.
pub(crate) fn combinations(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut cur: Option<Vec<usize>> = if k <= n && k > 0 { Some((0..k).collect()) } else { None };
    std::iter::from_fn(move || {
        let out = cur.clone()?;
        let c = cur.as_mut().unwrap();
        let mut i = k;
        loop {
            if i == 0 {
                cur = None;
                break;
            }
            i -= 1;
            if c[i] < n - k + i {
                c[i] += 1;
                for j in i + 1..k {
                    c[j] = c[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    })
}

pub(crate) fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r
}

/// Up to `max` tuples of `k` distinct pool indices, evenly strided through
/// the lexicographic order.
fn strided_tuples(pool: usize, k: usize, max: usize) -> Vec<Vec<usize>> {
    let k = k.min(pool);
    let total = binomial(pool, k);
    if total == 0 || max == 0 {
        return Vec::new();
    }
    if total <= max as u128 {
        return combinations(pool, k).collect();
    }
    let mut want: Vec<u128> = (0..max as u128).map(|j| j * total / max as u128).collect();
    want.dedup();
    let mut out = Vec::with_capacity(want.len());
    let mut w = 0;
    for (idx, c) in combinations(pool, k).enumerate() {
        if w < want.len() && want[w] == idx as u128 {
            out.push(c);
            w += 1;
            if w == want.len() {
                break;
            }
        }
    }
    out
}

impl RangeTestFamily {
    pub fn explicit(ranges: Vec<BallRange>) -> Self {
        Self {
            ranges,
            generation: Generation::Explicit,
        }
    }

    /// Every `k`-tuple of grid centers (strided down to `max_ranges`
    /// tuple-radius pairs) combined with each radius.
    pub fn from_grid(grid: &CenterSet, k: usize, radii: &[f64], max_ranges: usize) -> Self {
        let per = radii.len().max(1);
        let tuples = strided_tuples(grid.len(), k, (max_ranges / per).max(1));
        let mut ranges = Vec::new();
        for t in tuples {
            let centers = grid.select(&t);
            for &r in radii {
                ranges.push(BallRange {
                    centers: centers.clone(),
                    radius: r,
                });
            }
        }
        Self {
            ranges,
            generation: Generation::FromGrid,
        }
    }

    /// Tuples from `pool` with radii at evenly spaced quantiles of the
    /// distances from the ground points to the tuple.
    pub fn from_data_distances<P: Points + ?Sized>(
        points: &P,
        ground: &[usize],
        pool: &CenterSet,
        k: usize,
        radii_per_tuple: usize,
        max_ranges: usize,
    ) -> Self {
        let per = radii_per_tuple.max(1);
        let tuples = strided_tuples(pool.len(), k, (max_ranges / per).max(1));
        let built = par::map_slice(&tuples, |t| {
            let centers = pool.select(t);
            let mut ds: Vec<f64> = ground
                .iter()
                .map(|&g| centers.iter().map(|c| dist(points.coords(g), c)).fold(f64::INFINITY, f64::min))
                .collect();
            ds.sort_by(f64::total_cmp);
            let mut out = Vec::with_capacity(per);
            if ds.is_empty() {
                return out;
            }
            for j in 0..per {
                let pos = (((j as f64 + 0.5) / per as f64) * ds.len() as f64) as usize;
                out.push(BallRange {
                    centers: centers.clone(),
                    radius: ds[pos.min(ds.len() - 1)],
                });
            }
            out.dedup_by(|a, b| a.radius == b.radius);
            out
        });
        Self {
            ranges: built.into_iter().flatten().collect(),
            generation: Generation::FromDataDistances,
        }
    }

    pub fn len(&self) -> usize {
        self.ranges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranges.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetApproximation {
    /// Sorted indices into the underlying point set.
    pub indices: Vec<usize>,
    pub ground_size: usize,
}

impl SetApproximation {
    pub fn weight(&self) -> f64 {
        self.ground_size as f64 / self.indices.len() as f64
    }
}

/// Membership of each ground point (by position) in each range.
struct Table {
    rows: Vec<Vec<bool>>,
}

impl Table {
    fn new<P: Points + ?Sized>(points: &P, ground: &[usize], tests: &RangeTestFamily) -> Self {
        let rows = par::map_slice(&tests.ranges, |r| ground.iter().map(|&g| r.contains(points.coords(g))).collect());
        Self { rows }
    }

    /// Deviation of a subset given by positions into the ground set.
    fn deviation(&self, subset: &[usize]) -> f64 {
        let n = self.rows.first().map_or(0, |r| r.len());
        let mut worst: f64 = 0.0;
        for row in &self.rows {
            let full = row.iter().filter(|&&b| b).count() as f64 / n as f64;
            let part = subset.iter().filter(|&&s| row[s]).count() as f64 / subset.len() as f64;
            worst = worst.max((full - part).abs());
        }
        worst
    }

    /// Low-discrepancy coloring by sequential sign choice against the
    /// estimator `sum_r cosh(lambda D_r)`; a full range keeps the halves
    /// balanced. Returns the +1 class.
    fn halve(&self, current: &[usize]) -> Vec<usize> {
        let t = self.rows.len() + 1;
        let lambda = (2.0 * (2.0 * t as f64).ln() / current.len() as f64).sqrt();
        let mut disc = vec![0i64; t];
        let mut keep = Vec::with_capacity(current.len() / 2 + 1);
        for &s in current {
            // cosh(l(D+1)) - cosh(l(D-1)) = 2 sinh(l D) sinh(l), so the
            // estimator grows less under +1 exactly when sum sinh(l D) < 0.
            let mut drift = 0.0;
            for (r, d) in disc.iter().enumerate() {
                if r == self.rows.len() || self.rows[r][s] {
                    drift += (lambda * *d as f64).sinh();
                }
            }
            let sign: i64 = if drift <= 0.0 { 1 } else { -1 };
            for (r, d) in disc.iter_mut().enumerate() {
                if r == self.rows.len() || self.rows[r][s] {
                    *d += sign;
                }
            }
            if sign == 1 {
                keep.push(s);
            }
        }
        keep
    }
}

/// Repeated halving while the verified deviation stays within `eps_prime`.
pub fn halving_approx<P: Points + ?Sized>(points: &P, ground: &[usize], eps_prime: f64, tests: &RangeTestFamily) -> Result<SetApproximation> {
    if !(eps_prime > 0.0 && eps_prime <= 1.0) {
        return input("eps_prime must lie in (0, 1]");
    }
    if tests.is_empty() {
        return input("halving needs at least one test range");
    }
    if ground.is_empty() {
        return input("empty ground set");
    }
    let table = Table::new(points, ground, tests);
    let mut current: Vec<usize> = (0..ground.len()).collect();
    while current.len() > 1 {
        let half = table.halve(&current);
        if half.is_empty() || half.len() == current.len() {
            break;
        }
        if table.deviation(&half) > eps_prime {
            break;
        }
        current = half;
        if current.len() <= 8 {
            break;
        }
    }
    let mut indices: Vec<usize> = current.into_iter().map(|s| ground[s]).collect();
    indices.sort_unstable();
    Ok(SetApproximation {
        indices,
        ground_size: ground.len(),
    })
}

pub fn default_vc_dim_hint(k: usize, d: usize) -> usize {
    (3.0 * k as f64 * d as f64 * ((k + 1) as f64).log2()).ceil() as usize
}

pub fn uniform_sample_size(ground: usize, eps_prime: f64, delta: f64, vc_dim_hint: usize, c: f64) -> usize {
    let v = vc_dim_hint.max(1) as f64;
    let m = (c / (eps_prime * eps_prime) * (v * (v / eps_prime).ln() + (1.0 / delta).ln())).ceil();
    if m >= ground as f64 {
        ground
    } else {
        (m as usize).max(1)
    }
}

/// Uniform sample without replacement, replayable from `seed`.
pub fn uniform_sample_approx(ground: &[usize], eps_prime: f64, delta: f64, vc_dim_hint: usize, seed: u64, c: f64) -> Result<SetApproximation> {
    if !(eps_prime > 0.0 && eps_prime < 1.0 && delta > 0.0 && delta < 1.0) {
        return input("eps_prime and delta must lie in (0, 1)");
    }
    if ground.is_empty() {
        return input("empty ground set");
    }
    let size = uniform_sample_size(ground.len(), eps_prime, delta, vc_dim_hint, c);
    let mut indices: Vec<usize> = if size == ground.len() {
        ground.to_vec()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rand::seq::index::sample(&mut rng, ground.len(), size).into_iter().map(|s| ground[s]).collect()
    };
    indices.sort_unstable();
    Ok(SetApproximation {
        indices,
        ground_size: ground.len(),
    })
}

/// `max_R | |R ∩ ground|/|ground| - |R ∩ A|/|A| |` over the test family.
pub fn verify_set_approx<P: Points + ?Sized>(points: &P, ground: &[usize], a: &SetApproximation, tests: &RangeTestFamily) -> Result<f64> {
    if a.indices.is_empty() || ground.is_empty() {
        return input("empty set approximation");
    }
    let mut pos = std::collections::HashMap::with_capacity(ground.len());
    for (s, &g) in ground.iter().enumerate() {
        pos.entry(g).or_insert(s);
    }
    let mut subset = Vec::with_capacity(a.indices.len());
    for i in &a.indices {
        match pos.get(i) {
            Some(&s) => subset.push(s),
            None => return input(format!("index {i} is not in the ground set")),
        }
    }
    Ok(Table::new(points, ground, tests).deviation(&subset))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::WeightedPointSet;

    #[test]
    fn membership_basics() {
        let c = CenterSet::from_rows(&[vec![0.0, 0.0]]).unwrap();
        let r0 = BallRange { centers: c.clone(), radius: 0.0 };
        assert!(range_membership(&[0.0, 0.0], &r0));
        let r1 = BallRange { centers: c, radius: 1.0 };
        assert!(!range_membership(&[0.0, 0.0], &r1));
        assert!(range_membership(&[1.0, 0.0], &r1));
    }

    #[test]
    fn combinations_in_order() {
        let all: Vec<Vec<usize>> = combinations(4, 2).collect();
        assert_eq!(all, vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
        assert_eq!(binomial(96, 2), 4560);
        assert_eq!(strided_tuples(10, 2, 5).len(), 5);
    }

    #[test]
    fn two_identical_points_halve_to_one() {
        let p = WeightedPointSet::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let tests = RangeTestFamily::explicit(vec![BallRange {
            centers: CenterSet::from_rows(&[vec![0.0, 0.0]]).unwrap(),
            radius: 0.5,
        }]);
        let a = halving_approx(&p, &[0, 1], 0.1, &tests).unwrap();
        assert_eq!(a.indices.len(), 1);
        assert_eq!(verify_set_approx(&p, &[0, 1], &a, &tests).unwrap(), 0.0);
    }

    #[test]
    fn single_point_deviation() {
        let rows: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64]).collect();
        let p = WeightedPointSet::from_rows(&rows).unwrap();
        let ground: Vec<usize> = (0..5).collect();
        // Range containing only point 4.
        let tests = RangeTestFamily::explicit(vec![BallRange {
            centers: CenterSet::from_rows(&[vec![0.0]]).unwrap(),
            radius: 3.5,
        }]);
        let a = SetApproximation { indices: vec![4], ground_size: 5 };
        let dev = verify_set_approx(&p, &ground, &a, &tests).unwrap();
        assert!((dev - (1.0 - 1.0 / 5.0)).abs() < 1e-15);
    }

    #[test]
    fn sample_replays() {
        let ground: Vec<usize> = (0..1000).collect();
        let a = uniform_sample_approx(&ground, 0.3, 0.1, 6, 9, 2.0).unwrap();
        let b = uniform_sample_approx(&ground, 0.3, 0.1, 6, 9, 2.0).unwrap();
        assert_eq!(a, b);
        let small: Vec<usize> = (0..10).collect();
        assert_eq!(uniform_sample_approx(&small, 0.3, 0.1, 6, 1, 2.0).unwrap().indices, small);
    }
}
