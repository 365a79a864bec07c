//! Finite center families used by the brute-force verifiers.

use crate::error::{input, Error, Result};
use crate::geometry::{CenterSet, Points};

pub const GRID_BUDGET: usize = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum VerifyMode {
    /// Every partition (or tuple) is checked.
    Exhaustive,
    /// A seeded random sample of the given size.
    Sampled { samples: usize, seed: u64 },
}

/// Axis-aligned lattice with `per_axis` values per coordinate over the
/// bounding box of `p`, widened by `margin` times its extent on every side.
pub fn center_grid<P: Points + ?Sized>(p: &P, per_axis: usize, margin: f64) -> Result<CenterSet> {
    if p.is_empty() || per_axis == 0 {
        return input("grid needs points and at least one value per axis");
    }
    let d = p.dim();
    let total = (per_axis as f64).powi(d as i32);
    if total > GRID_BUDGET as f64 {
        return Err(Error::Budget {
            what: "center grid size",
            required: total.min(u128::MAX as f64) as u128,
            allowed: GRID_BUDGET as u128,
        });
    }
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for i in 0..p.len() {
        for (j, &x) in p.coords(i).iter().enumerate() {
            lo[j] = lo[j].min(x);
            hi[j] = hi[j].max(x);
        }
    }
    let axes: Vec<Vec<f64>> = (0..d)
        .map(|j| {
            let ext = (hi[j] - lo[j]).max(1e-9);
            let a = lo[j] - margin * ext;
            let b = hi[j] + margin * ext;
            if per_axis == 1 {
                vec![(a + b) / 2.0]
            } else {
                (0..per_axis).map(|t| a + (b - a) * t as f64 / (per_axis - 1) as f64).collect()
            }
        })
        .collect();
    let mut data = Vec::with_capacity(total as usize * d);
    let mut idx = vec![0usize; d];
    loop {
        for (j, &t) in idx.iter().enumerate() {
            data.push(axes[j][t]);
        }
        let mut j = d;
        loop {
            if j == 0 {
                return CenterSet::new(d, data);
            }
            j -= 1;
            idx[j] += 1;
            if idx[j] < per_axis {
                break;
            }
            idx[j] = 0;
        }
    }
}

/// Ordered `k`-tuples with repetition over `0..g`, in lexicographic order.
pub(crate) fn tuples_with_repetition(g: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut cur = if g == 0 { None } else { Some(vec![0usize; k]) };
    std::iter::from_fn(move || {
        let out = cur.clone()?;
        let c = cur.as_mut().unwrap();
        let mut j = k;
        loop {
            if j == 0 {
                cur = None;
                break;
            }
            j -= 1;
            c[j] += 1;
            if c[j] < g {
                break;
            }
            c[j] = 0;
        }
        Some(out)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::WeightedPointSet;

    #[test]
    fn grid_shape() {
        let p = WeightedPointSet::from_rows(&[vec![0.0, 0.0], vec![1.0, 2.0]]).unwrap();
        let g = center_grid(&p, 3, 0.0).unwrap();
        assert_eq!(g.len(), 9);
        assert_eq!(g.center(0), &[0.0, 0.0]);
        assert_eq!(g.center(8), &[1.0, 2.0]);
        assert_eq!(tuples_with_repetition(3, 2).count(), 9);
    }
}
