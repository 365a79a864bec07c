use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::geometry::{ExtendedPointSet, Points, WeightedPointSet};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub checked_pairs: u64,
    /// `1 + max |ratio - 1|` over all checked pairs, ratios of distances.
    pub max_distortion: f64,
    pub epsilon_target: f64,
    pub valid: bool,
}

/// Dense row-major `rows x cols` matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearMap {
    pub rows: usize,
    pub cols: usize,
    pub matrix: Vec<f64>,
    pub certificate: Option<Certificate>,
}

impl LinearMap {
    pub fn new(rows: usize, cols: usize, matrix: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || matrix.len() != rows * cols {
            return input("matrix shape mismatch");
        }
        Ok(Self {
            rows,
            cols,
            matrix,
            certificate: None,
        })
    }

    pub fn identity(d: usize) -> Self {
        let mut matrix = vec![0.0; d * d];
        for i in 0..d {
            matrix[i * d + i] = 1.0;
        }
        Self {
            rows: d,
            cols: d,
            matrix,
            certificate: None,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && self
                .matrix
                .iter()
                .enumerate()
                .all(|(k, &v)| v == if k / self.cols == k % self.cols { 1.0 } else { 0.0 })
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.matrix[i * self.cols..(i + 1) * self.cols]
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "map input dimension");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn apply_weighted(&self, p: &WeightedPointSet) -> WeightedPointSet {
        let mut data = Vec::with_capacity(p.len() * self.rows);
        for x in p.rows() {
            data.extend(self.apply(x));
        }
        WeightedPointSet::new(self.rows, data, p.weights().to_vec()).expect("finite image")
    }

    /// Maps the base coordinates and keeps weights and extensions.
    pub fn apply_points<P: Points + ?Sized>(&self, p: &P) -> ExtendedPointSet {
        let mut data = Vec::with_capacity(p.len() * self.rows);
        for i in 0..p.len() {
            data.extend(self.apply(p.coords(i)));
        }
        let w = (0..p.len()).map(|i| p.weight(i)).collect();
        let base = WeightedPointSet::new(self.rows, data, w).expect("finite image");
        ExtendedPointSet::new(base, (0..p.len()).map(|i| p.ext(i)).collect()).expect("extensions")
    }
}
