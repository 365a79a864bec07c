use serde::{Deserialize, Serialize};

use super::cost::{point_cost, pow_half, sq_dist};
use super::types::{ExtendedPointSet, Points, WeightedPointSet};
use crate::error::{input, Result};
use crate::sum::{pairwise_sum, PairwiseSum};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 10_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OneCenter {
    pub center: Vec<f64>,
    pub objective: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Final step length relative to the data diameter.
    pub residual: f64,
}

pub fn solve_1center(p: &WeightedPointSet, z: u32, cfg: &SolverConfig) -> Result<OneCenter> {
    one_center(p, z, cfg)
}

/// Optimal center with extension 0 for an extended set.
pub fn solve_1center_constrained(p: &ExtendedPointSet, z: u32, cfg: &SolverConfig) -> Result<OneCenter> {
    one_center(p, z, cfg)
}

fn objective<P: Points + ?Sized>(p: &P, c: &[f64], z: u32) -> f64 {
    let mut acc = PairwiseSum::new();
    for i in 0..p.len() {
        let w = p.weight(i);
        if w > 0.0 {
            acc.push(w * point_cost(p, i, c, z));
        }
    }
    acc.total()
}

pub fn weighted_mean<P: Points + ?Sized>(p: &P) -> Vec<f64> {
    let d = p.dim();
    let tw = p.total_weight();
    let mut out = vec![0.0; d];
    let mut col = Vec::with_capacity(p.len());
    for (j, o) in out.iter_mut().enumerate() {
        col.clear();
        col.extend((0..p.len()).map(|i| p.weight(i) * p.coords(i)[j]));
        *o = pairwise_sum(&col) / tw;
    }
    out
}

fn bbox_diagonal<P: Points + ?Sized>(p: &P) -> f64 {
    let d = p.dim();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for i in 0..p.len() {
        if p.weight(i) > 0.0 {
            for (j, &x) in p.coords(i).iter().enumerate() {
                lo[j] = lo[j].min(x);
                hi[j] = hi[j].max(x);
            }
        }
    }
    sq_dist(&lo, &hi).sqrt()
}

/// Minimizes `sum w (|x - c|^2 + e^2)^(z/2)` over centers `c` with extension 0.
pub fn one_center<P: Points + ?Sized>(p: &P, z: u32, cfg: &SolverConfig) -> Result<OneCenter> {
    if z == 0 {
        return input("z must be at least 1");
    }
    let tw = p.total_weight();
    if !(tw > 0.0) {
        return input("1-center needs positive total weight");
    }
    let diam = bbox_diagonal(p);
    if diam == 0.0 {
        let first = (0..p.len()).find(|&i| p.weight(i) > 0.0).unwrap();
        let c = p.coords(first).to_vec();
        let objective = objective(p, &c, z);
        return Ok(OneCenter {
            center: c,
            objective,
            converged: true,
            iterations: 0,
            residual: 0.0,
        });
    }
    let mean = weighted_mean(p);
    if z == 2 {
        let objective = objective(p, &mean, z);
        return Ok(OneCenter {
            center: mean,
            objective,
            converged: true,
            iterations: 0,
            residual: 0.0,
        });
    }
    if z == 1 {
        Ok(weiszfeld(p, mean, diam, cfg))
    } else {
        Ok(gradient_descent(p, z, mean, diam, cfg))
    }
}

/// Checks whether data point `j` (extension 0) satisfies the subgradient
/// optimality condition of the 1-median objective.
fn data_point_optimal<P: Points + ?Sized>(p: &P, x: &[f64], tiny: f64) -> bool {
    let d = p.dim();
    let mut r = vec![0.0; d];
    let mut w_here = 0.0;
    for i in 0..p.len() {
        let w = p.weight(i);
        if w == 0.0 {
            continue;
        }
        let e = p.ext(i);
        let sq = sq_dist(p.coords(i), x) + e * e;
        if sq.sqrt() <= tiny {
            w_here += w;
            continue;
        }
        let di = sq.sqrt();
        for (rj, (&xi, &xj)) in r.iter_mut().zip(p.coords(i).iter().zip(x)) {
            *rj += w * (xi - xj) / di;
        }
    }
    w_here > 0.0 && sq_dist(&r, &vec![0.0; d]).sqrt() <= w_here
}

fn weiszfeld<P: Points + ?Sized>(p: &P, start: Vec<f64>, diam: f64, cfg: &SolverConfig) -> OneCenter {
    let d = p.dim();
    let tiny = 1e-12 * diam;
    let mut y = start;
    let mut best_c = y.clone();
    let mut best_f = objective(p, &y, 1);
    let mut residual = f64::INFINITY;
    let mut num = vec![0.0; d];
    let mut grad = vec![0.0; d];
    for it in 1..=cfg.max_iter {
        num.iter_mut().for_each(|v| *v = 0.0);
        grad.iter_mut().for_each(|v| *v = 0.0);
        let mut den = 0.0;
        let mut w_sing = 0.0;
        let mut nearest = (f64::INFINITY, usize::MAX);
        for i in 0..p.len() {
            let w = p.weight(i);
            if w == 0.0 {
                continue;
            }
            let e = p.ext(i);
            let x = p.coords(i);
            let sq = sq_dist(x, &y);
            if e == 0.0 && sq < nearest.0 {
                nearest = (sq, i);
            }
            let di = (sq + e * e).sqrt();
            if di <= tiny {
                w_sing += w;
                continue;
            }
            den += w / di;
            for j in 0..d {
                num[j] += w * x[j] / di;
                grad[j] += w * (x[j] - y[j]) / di;
            }
        }
        if den == 0.0 {
            // Every positive-weight point coincides with the iterate.
            return OneCenter {
                objective: objective(p, &y, 1),
                center: y,
                converged: true,
                iterations: it,
                residual: 0.0,
            };
        }
        let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if w_sing > 0.0 && gnorm <= w_sing {
            return OneCenter {
                objective: objective(p, &y, 1),
                center: y,
                converged: true,
                iterations: it,
                residual: 0.0,
            };
        }
        // Approaching a data point slowly: test it directly.
        if nearest.1 != usize::MAX && nearest.0.sqrt() < 1e-3 * diam && w_sing == 0.0 {
            let x = p.coords(nearest.1).to_vec();
            if data_point_optimal(p, &x, tiny) {
                return OneCenter {
                    objective: objective(p, &x, 1),
                    center: x,
                    converged: true,
                    iterations: it,
                    residual: 0.0,
                };
            }
        }
        let t: Vec<f64> = num.iter().map(|v| v / den).collect();
        let next: Vec<f64> = if w_sing > 0.0 {
            let lam = (w_sing / gnorm).min(1.0);
            t.iter().zip(&y).map(|(ti, yi)| (1.0 - lam) * ti + lam * yi).collect()
        } else {
            t
        };
        let step = sq_dist(&next, &y).sqrt();
        y = next;
        let f = objective(p, &y, 1);
        if f < best_f {
            best_f = f;
            best_c.clone_from(&y);
        }
        residual = step / diam;
        if step < cfg.tol * diam {
            return OneCenter {
                center: best_c,
                objective: best_f,
                converged: true,
                iterations: it,
                residual,
            };
        }
    }
    OneCenter {
        center: best_c,
        objective: best_f,
        converged: false,
        iterations: cfg.max_iter,
        residual,
    }
}

fn gradient<P: Points + ?Sized>(p: &P, z: u32, c: &[f64]) -> Vec<f64> {
    let d = p.dim();
    let mut g = vec![0.0; d];
    for i in 0..p.len() {
        let w = p.weight(i);
        if w == 0.0 {
            continue;
        }
        let e = p.ext(i);
        let x = p.coords(i);
        let sq = sq_dist(x, c) + e * e;
        // d/dc (sq)^(z/2) = z (sq)^(z/2 - 1) (c - x)
        let f = w * z as f64 * pow_half(sq, z - 2);
        for j in 0..d {
            g[j] += f * (c[j] - x[j]);
        }
    }
    g
}

fn gradient_descent<P: Points + ?Sized>(p: &P, z: u32, start: Vec<f64>, diam: f64, cfg: &SolverConfig) -> OneCenter {
    let mut y = start;
    let mut fy = objective(p, &y, z);
    let tw = p.total_weight();
    // Curvature scale of the objective near the data.
    let mut t = 1.0 / (tw * z as f64 * (z as f64 - 1.0).max(1.0) * pow_half(diam * diam, z - 2)).max(f64::MIN_POSITIVE);
    let mut residual = f64::INFINITY;
    for it in 1..=cfg.max_iter {
        let g = gradient(p, z, &y);
        let gsq: f64 = g.iter().map(|v| v * v).sum();
        if gsq == 0.0 {
            return OneCenter {
                center: y,
                objective: fy,
                converged: true,
                iterations: it,
                residual: 0.0,
            };
        }
        t *= 2.0;
        let (next, fnext) = loop {
            let cand: Vec<f64> = y.iter().zip(&g).map(|(a, b)| a - t * b).collect();
            let fc = objective(p, &cand, z);
            if fc <= fy - 0.5 * t * gsq || t * gsq.sqrt() < 1e-3 * cfg.tol * diam {
                break (cand, fc);
            }
            t *= 0.5;
        };
        let step = t * gsq.sqrt();
        residual = step / diam;
        if fnext <= fy {
            y = next;
            fy = fnext;
        }
        if step < cfg.tol * diam {
            return OneCenter {
                center: y,
                objective: fy,
                converged: true,
                iterations: it,
                residual,
            };
        }
    }
    OneCenter {
        center: y,
        objective: fy,
        converged: false,
        iterations: cfg.max_iter,
        residual,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(rows: &[Vec<f64>]) -> WeightedPointSet {
        WeightedPointSet::from_rows(rows).unwrap()
    }

    #[test]
    fn mean_and_majority() {
        let cfg = SolverConfig::default();
        let r = solve_1center(&set(&[vec![0.0, 0.0], vec![2.0, 0.0]]), 2, &cfg).unwrap();
        assert_eq!(r.center, vec![1.0, 0.0]);
        let r = solve_1center(&set(&[vec![0.0, 0.0], vec![0.0, 0.0], vec![10.0, 0.0]]), 1, &cfg).unwrap();
        assert_eq!(r.center, vec![0.0, 0.0]);
        assert!(r.converged);
    }

    #[test]
    fn constrained_examples() {
        let cfg = SolverConfig::default();
        let base = set(&[vec![0.0], vec![0.0]]);
        let e = ExtendedPointSet::new(base, vec![1.0, 1.0]).unwrap();
        let r = solve_1center_constrained(&e, 2, &cfg).unwrap();
        assert_eq!(r.center, vec![0.0]);
        assert_eq!(r.objective, 2.0);

        let base = set(&[vec![-1.0], vec![1.0]]);
        let e = ExtendedPointSet::new(base, vec![1.0, 1.0]).unwrap();
        let r = solve_1center_constrained(&e, 1, &cfg).unwrap();
        assert!(r.center[0].abs() < 1e-9);
        assert!((r.objective - 2.0 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn zero_extension_reduces_to_plain() {
        let cfg = SolverConfig::default();
        let base = set(&[vec![0.0, 1.0], vec![3.0, -1.0], vec![2.0, 5.0], vec![-4.0, 0.5]]);
        for z in 1..=3 {
            let a = solve_1center(&base, z, &cfg).unwrap();
            let b = solve_1center_constrained(&ExtendedPointSet::zero_extension(base.clone()), z, &cfg).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn all_coincident() {
        let cfg = SolverConfig::default();
        for z in 1..=4 {
            let r = solve_1center(&set(&vec![vec![1.5, 2.0]; 4]), z, &cfg).unwrap();
            assert_eq!(r.center, vec![1.5, 2.0]);
            assert_eq!(r.objective, 0.0);
        }
    }

    #[test]
    fn higher_z_is_stationary() {
        let cfg = SolverConfig::default();
        let p = set(&[vec![0.0, 0.0], vec![4.0, 0.0], vec![0.0, 3.0], vec![1.0, 1.0]]);
        for z in 3..=4 {
            let r = solve_1center(&p, z, &cfg).unwrap();
            let f0 = r.objective;
            for dx in [-1e-4, 1e-4] {
                for dy in [-1e-4, 1e-4] {
                    let c = [r.center[0] + dx, r.center[1] + dy];
                    assert!(objective(&p, &c, z) >= f0 * (1.0 - 1e-12));
                }
            }
        }
    }
}
