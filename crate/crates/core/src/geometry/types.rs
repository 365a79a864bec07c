use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::sum::pairwise_sum_iter;

/// Read access shared by plain and extended point sets.
pub trait Points: Sync {
    fn dim(&self) -> usize;
    fn len(&self) -> usize;
    fn coords(&self, i: usize) -> &[f64];
    fn weight(&self, i: usize) -> f64;
    /// Extension coordinate; centers always carry extension 0.
    fn ext(&self, _i: usize) -> f64 {
        0.0
    }
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
    fn total_weight(&self) -> f64 {
        pairwise_sum_iter((0..self.len()).map(|i| self.weight(i)))
    }
}

impl<P: Points + ?Sized> Points for &P {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn len(&self) -> usize {
        (**self).len()
    }
    fn coords(&self, i: usize) -> &[f64] {
        (**self).coords(i)
    }
    fn weight(&self, i: usize) -> f64 {
        (**self).weight(i)
    }
    fn ext(&self, i: usize) -> f64 {
        (**self).ext(i)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedPointSet {
    dim: usize,
    data: Vec<f64>,
    weights: Vec<f64>,
}

impl WeightedPointSet {
    pub fn new(dim: usize, data: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return input("dimension must be positive");
        }
        if data.len() != dim * weights.len() {
            return input(format!(
                "coordinate count {} does not match {} points of dimension {dim}",
                data.len(),
                weights.len()
            ));
        }
        if let Some(i) = data.iter().position(|x| !x.is_finite()) {
            return input(format!("non-finite coordinate in point {}", i / dim));
        }
        if let Some(i) = weights.iter().position(|w| !(w.is_finite() && *w >= 0.0)) {
            return input(format!("weight of point {i} must be finite and nonnegative"));
        }
        Ok(Self { dim, data, weights })
    }

    pub fn unweighted(dim: usize, data: Vec<f64>) -> Result<Self> {
        let n = if dim == 0 { 0 } else { data.len() / dim };
        Self::new(dim, data, vec![1.0; n])
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let w = vec![1.0; rows.len()];
        Self::from_weighted_rows(rows, w)
    }

    pub fn from_weighted_rows(rows: &[Vec<f64>], weights: Vec<f64>) -> Result<Self> {
        let Some(first) = rows.first() else {
            return input("empty point list");
        };
        let dim = first.len();
        if let Some(i) = rows.iter().position(|r| r.len() != dim) {
            return input(format!("point {i} has wrong dimension"));
        }
        Self::new(dim, rows.concat(), weights)
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn subset(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(idx.len() * self.dim);
        for &i in idx {
            data.extend_from_slice(self.point(i));
        }
        Self {
            dim: self.dim,
            data,
            weights: idx.iter().map(|&i| self.weights[i]).collect(),
        }
    }

    pub fn with_unit_weights(&self) -> Self {
        Self {
            dim: self.dim,
            data: self.data.clone(),
            weights: vec![1.0; self.weights.len()],
        }
    }
}

impl Points for WeightedPointSet {
    fn dim(&self) -> usize {
        self.dim
    }
    fn len(&self) -> usize {
        self.weights.len()
    }
    fn coords(&self, i: usize) -> &[f64] {
        self.point(i)
    }
    fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }
}

/// Points in `dim + 1` dimensions whose last coordinate is the extension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtendedPointSet {
    pub base: WeightedPointSet,
    pub extensions: Vec<f64>,
}

impl ExtendedPointSet {
    pub fn new(base: WeightedPointSet, extensions: Vec<f64>) -> Result<Self> {
        if extensions.len() != base.len() {
            return input("extension count does not match point count");
        }
        if extensions.iter().any(|e| !e.is_finite()) {
            return input("non-finite extension");
        }
        Ok(Self { base, extensions })
    }

    pub fn zero_extension(base: WeightedPointSet) -> Self {
        let n = base.len();
        Self {
            base,
            extensions: vec![0.0; n],
        }
    }

    pub fn is_zero_extension(&self) -> bool {
        self.extensions.iter().all(|&e| e == 0.0)
    }
}

impl Points for ExtendedPointSet {
    fn dim(&self) -> usize {
        self.base.dim
    }
    fn len(&self) -> usize {
        self.base.len()
    }
    fn coords(&self, i: usize) -> &[f64] {
        self.base.point(i)
    }
    fn weight(&self, i: usize) -> f64 {
        self.base.weights[i]
    }
    fn ext(&self, i: usize) -> f64 {
        self.extensions[i]
    }
}

/// A view of selected points of another set.
#[derive(Clone, Copy)]
pub struct IndexView<'a, P: Points + ?Sized> {
    pub base: &'a P,
    pub idx: &'a [usize],
}

impl<'a, P: Points + ?Sized> IndexView<'a, P> {
    pub fn new(base: &'a P, idx: &'a [usize]) -> Self {
        Self { base, idx }
    }
}

impl<P: Points + ?Sized> Points for IndexView<'_, P> {
    fn dim(&self) -> usize {
        self.base.dim()
    }
    fn len(&self) -> usize {
        self.idx.len()
    }
    fn coords(&self, i: usize) -> &[f64] {
        self.base.coords(self.idx[i])
    }
    fn weight(&self, i: usize) -> f64 {
        self.base.weight(self.idx[i])
    }
    fn ext(&self, i: usize) -> f64 {
        self.base.ext(self.idx[i])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CenterSet {
    dim: usize,
    data: Vec<f64>,
}

impl CenterSet {
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return input("dimension must be positive");
        }
        if data.is_empty() || data.len() % dim != 0 {
            return input("center set must hold at least one full center");
        }
        if data.iter().any(|x| !x.is_finite()) {
            return input("non-finite center coordinate");
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let Some(first) = rows.first() else {
            return input("empty center set");
        };
        let dim = first.len();
        if rows.iter().any(|r| r.len() != dim) {
            return input("centers have mixed dimensions");
        }
        Self::new(dim, rows.concat())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn center(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn push(&mut self, c: &[f64]) {
        assert_eq!(c.len(), self.dim, "center dimension");
        self.data.extend_from_slice(c);
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.iter().map(|c| c.to_vec()).collect()
    }

    pub fn select(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(idx.len() * self.dim);
        for &i in idx {
            data.extend_from_slice(self.center(i));
        }
        Self { dim: self.dim, data }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub assignment: Vec<usize>,
    pub parts: usize,
}

impl Partition {
    pub fn new(assignment: Vec<usize>, parts: usize) -> Result<Self> {
        if let Some(i) = assignment.iter().position(|&a| a >= parts) {
            return input(format!("point {i} assigned to part out of range"));
        }
        Ok(Self { assignment, parts })
    }

    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.parts];
        for (i, &a) in self.assignment.iter().enumerate() {
            out[a].push(i);
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusteringParams {
    pub k: usize,
    pub z: u32,
    pub epsilon: f64,
}

impl ClusteringParams {
    pub fn new(k: usize, z: u32, epsilon: f64) -> Result<Self> {
        let p = Self { k, z, epsilon };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return input("k must be at least 1");
        }
        if self.z == 0 {
            return input("z must be at least 1");
        }
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0 / 3.0) {
            return input(format!("epsilon {} outside (0, 1/3]", self.epsilon));
        }
        Ok(())
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        Self { epsilon, ..*self }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_inputs() {
        assert!(WeightedPointSet::new(2, vec![1.0, f64::NAN], vec![1.0]).is_err());
        assert!(WeightedPointSet::new(2, vec![1.0, 2.0], vec![-1.0]).is_err());
        assert!(WeightedPointSet::new(2, vec![1.0, 2.0, 3.0], vec![1.0]).is_err());
        assert!(CenterSet::new(2, vec![]).is_err());
        assert!(Partition::new(vec![0, 2], 2).is_err());
        assert!(ClusteringParams::new(1, 1, 0.5).is_err());
        assert!(ClusteringParams::new(0, 1, 0.1).is_err());
        assert!(ClusteringParams::new(2, 2, 1.0 / 3.0).is_ok());
    }

    #[test]
    fn views_follow_indices() {
        let p = WeightedPointSet::from_weighted_rows(&[vec![0.0], vec![1.0], vec![2.0]], vec![1.0, 2.0, 3.0]).unwrap();
        let idx = [2, 0];
        let v = IndexView::new(&p, &idx);
        assert_eq!(v.coords(0), &[2.0]);
        assert_eq!(v.weight(1), 1.0);
        assert_eq!(v.total_weight(), 4.0);
    }
}
