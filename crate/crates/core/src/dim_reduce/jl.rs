use serde::{Deserialize, Serialize};

use crate::bicriteria::seeded_projection_family;
use crate::error::{input, Error, Result};
use crate::geometry::sq_dist;
use crate::linear_map::{Certificate, LinearMap};
use crate::par;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JlStrategy {
    SeedScan,
    Conditional,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JlConfig {
    /// Constant in the starting dimension `ceil(c eps^-2 ln(#pairs))`.
    pub c: f64,
    pub seed_bits: u32,
    /// Budget on `pairs * m * d` sign-selection work for the conditional strategy.
    pub conditional_budget: u128,
}

impl Default for JlConfig {
    fn default() -> Self {
        Self {
            c: 0.25,
            seed_bits: 16,
            conditional_budget: 1 << 34,
        }
    }
}

/// Exhaustive pair check; distortion is `1 + max |ratio - 1|` over pairs
/// with positive distance.
pub fn certify(map: &LinearMap, vectors: &[Vec<f64>], eps: f64) -> Certificate {
    let images: Vec<Vec<f64>> = par::map_slice(vectors, |v| map.apply(v));
    let n = vectors.len();
    let worst = par::map_range(n, |i| {
        let mut w: f64 = 0.0;
        let mut checked = 0u64;
        for j in i + 1..n {
            let o = sq_dist(&vectors[i], &vectors[j]);
            if o == 0.0 {
                continue;
            }
            checked += 1;
            let r = (sq_dist(&images[i], &images[j]) / o).sqrt();
            w = w.max((r - 1.0).abs());
        }
        (w, checked)
    });
    let dev = worst.iter().fold(0.0f64, |a, b| a.max(b.0));
    let checked = worst.iter().map(|w| w.1).sum();
    Certificate {
        checked_pairs: checked,
        max_distortion: 1.0 + dev,
        epsilon_target: eps,
        valid: dev <= eps,
    }
}

fn pair_count(n: usize) -> f64 {
    (n as f64 * (n as f64 - 1.0) / 2.0).max(2.0)
}

pub fn start_dim(n: usize, eps: f64, c: f64) -> usize {
    ((c / (eps * eps) * pair_count(n).ln()).ceil() as usize).max(1)
}

fn identity(d: usize, vectors: &[Vec<f64>], eps: f64) -> LinearMap {
    let mut m = LinearMap::identity(d);
    m.certificate = Some(certify(&m, vectors, eps));
    m
}

/// Linear map preserving all pairwise distances of `vectors` within
/// `1 +- eps`, certified by an exhaustive pair check. Falls back to the
/// identity when no map with fewer rows than the dimension is found.
pub fn derandomized_jl(vectors: &[Vec<f64>], eps: f64, strategy: JlStrategy, cfg: &JlConfig) -> Result<LinearMap> {
    if vectors.is_empty() {
        return input("no vectors to embed");
    }
    if !(eps > 0.0 && eps < 1.0) {
        return input("eps must lie in (0, 1)");
    }
    let d = vectors[0].len();
    if vectors.iter().any(|v| v.len() != d) {
        return input("mixed dimensions");
    }
    let mut m = start_dim(vectors.len(), eps, cfg.c);
    loop {
        if m >= d {
            return Ok(identity(d, vectors, eps));
        }
        let found = match strategy {
            JlStrategy::SeedScan => seed_scan(vectors, d, m, eps, cfg.seed_bits)?,
            JlStrategy::Conditional => conditional(vectors, d, m, eps, cfg)?,
        };
        if let Some(map) = found {
            return Ok(map);
        }
        m *= 2;
    }
}

fn seed_scan(vectors: &[Vec<f64>], d: usize, m: usize, eps: f64, bits: u32) -> Result<Option<LinearMap>> {
    let total = 1u64 << bits;
    let chunk = 64u64;
    let mut start = 0u64;
    while start < total {
        let seeds: Vec<u64> = (start..(start + chunk).min(total)).collect();
        let hits = par::map_slice(&seeds, |&s| -> Result<Option<LinearMap>> {
            let mut map = seeded_projection_family(d, m, s)?;
            let cert = certify(&map, vectors, eps);
            if cert.valid {
                map.certificate = Some(cert);
                Ok(Some(map))
            } else {
                Ok(None)
            }
        });
        for h in hits {
            if let Some(map) = h? {
                return Ok(Some(map));
            }
        }
        start += chunk;
    }
    Ok(None)
}

fn minimize(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let (mut a, mut b) = (lo, hi);
    for _ in 0..200 {
        let m1 = a + (b - a) / 3.0;
        let m2 = b - (b - a) / 3.0;
        if f(m1) < f(m2) {
            b = m2;
        } else {
            a = m1;
        }
    }
    (a + b) / 2.0
}

/// Per-row state of one unit pair vector under partially fixed signs.
#[derive(Clone)]
struct RowState {
    fixed: f64,
    free_sq: f64,
    free_quad: f64,
}

/// Pessimistic estimator pieces for one row, `t = lambda m`:
/// upper tail via `E exp(t Y^2) <= (1 - 2 t s^2)^-1/2 exp(t a^2 / (1 - 2 t s^2))`
/// and lower tail via the exact conditional mean of `1 - tY^2 + t^2 Y^4 / 2`.
fn row_terms(r: &RowState, m: f64, lu: f64, ll: f64) -> (f64, f64) {
    let a2 = r.fixed * r.fixed / m;
    let s2 = r.free_sq / m;
    let tu = lu * m;
    let den = 1.0 - 2.0 * tu * s2;
    let up = -0.5 * den.ln() + tu * a2 / den;
    let tl = ll * m;
    let ey2 = a2 + s2;
    let a = r.fixed;
    let ey4 = (a.powi(4) + 6.0 * a * a * r.free_sq + 3.0 * r.free_sq * r.free_sq - 2.0 * r.free_quad) / (m * m);
    let lo = (1.0 - tl * ey2 + 0.5 * tl * tl * ey4).ln();
    (up, lo)
}

fn conditional(vectors: &[Vec<f64>], d: usize, m: usize, eps: f64, cfg: &JlConfig) -> Result<Option<LinearMap>> {
    let n = vectors.len();
    let mut units: Vec<Vec<f64>> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let diff: Vec<f64> = vectors[i].iter().zip(&vectors[j]).map(|(a, b)| a - b).collect();
            let norm = diff.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                units.push(diff.into_iter().map(|x| x / norm).collect());
            }
        }
    }
    if units.is_empty() {
        let mut map = seeded_projection_family(d, m, 0)?;
        map.certificate = Some(certify(&map, vectors, eps));
        return Ok(Some(map));
    }
    let work = units.len() as u128 * m as u128 * d as u128;
    if work > cfg.conditional_budget {
        return Err(Error::Budget {
            what: "conditional sign selection",
            required: work,
            allowed: cfg.conditional_budget,
        });
    }
    let hi = (1.0 + eps) * (1.0 + eps);
    let lo = (1.0 - eps) * (1.0 - eps);
    let lu = minimize(|l| -0.5 * (1.0 - 2.0 * l).ln() - l * hi, 1e-9, 0.5 - 1e-9);
    let ll = minimize(|l| (1.0 - l + 1.5 * l * l).ln() + l * lo, 1e-9, 1.0 / 3.0);
    let mf = m as f64;
    let sums4: Vec<f64> = units.iter().map(|u| u.iter().map(|x| x.powi(4)).sum()).collect();
    let mut rows: Vec<Vec<RowState>> = sums4
        .iter()
        .map(|&q| {
            vec![
                RowState {
                    fixed: 0.0,
                    free_sq: 1.0,
                    free_quad: q,
                };
                m
            ]
        })
        .collect();
    // Log of each pair's upper and lower product terms.
    let mut log_up: Vec<f64> = Vec::with_capacity(units.len());
    let mut log_lo: Vec<f64> = Vec::with_capacity(units.len());
    for r in &rows {
        let (u, l) = row_terms(&r[0], mf, lu, ll);
        log_up.push(mf * u - lu * mf * hi);
        log_lo.push(mf * l + ll * mf * lo);
    }
    let estimate = |lu_: &[f64], ll_: &[f64]| -> f64 { lu_.iter().chain(ll_).map(|v| v.exp()).sum() };
    if estimate(&log_up, &log_lo) >= 1.0 {
        return Ok(None);
    }
    let mut matrix = vec![0.0; m * d];
    let scale = 1.0 / mf.sqrt();
    for row in 0..m {
        for col in 0..d {
            let mut best: Option<(f64, f64, Vec<(f64, f64, RowState)>)> = None;
            for sign in [1.0, -1.0] {
                let trial = par::map_range(units.len(), |p| {
                    let cur = &rows[p][row];
                    let u = units[p][col];
                    let next = RowState {
                        fixed: cur.fixed + sign * u,
                        free_sq: (cur.free_sq - u * u).max(0.0),
                        free_quad: (cur.free_quad - u.powi(4)).max(0.0),
                    };
                    let (ou, ol) = row_terms(cur, mf, lu, ll);
                    let (nu, nl) = row_terms(&next, mf, lu, ll);
                    (log_up[p] - ou + nu, log_lo[p] - ol + nl, next)
                });
                let phi: f64 = trial.iter().map(|t| t.0.exp() + t.1.exp()).sum();
                if best.as_ref().map_or(true, |b| phi < b.0) {
                    best = Some((phi, sign, trial));
                }
            }
            let (_, sign, trial) = best.expect("two signs tried");
            matrix[row * d + col] = sign * scale;
            for (p, (u, l, st)) in trial.into_iter().enumerate() {
                log_up[p] = u;
                log_lo[p] = l;
                rows[p][row] = st;
            }
        }
    }
    let mut map = LinearMap::new(m, d, matrix)?;
    let cert = certify(&map, vectors, eps);
    let ok = cert.valid;
    map.certificate = Some(cert);
    Ok(if ok { Some(map) } else { None })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_fallback_has_unit_distortion() {
        let v = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]];
        let map = derandomized_jl(&v, 0.1, JlStrategy::SeedScan, &JlConfig::default()).unwrap();
        assert!(map.is_identity());
        assert_eq!(map.certificate.unwrap().max_distortion, 1.0);
    }
}
