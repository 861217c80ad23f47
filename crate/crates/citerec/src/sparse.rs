//! Sparse vectors over a fixed dimension, stored as sorted (index, weight)
//! pairs with no zero weights. Dot products merge-join in index order so that
//! results are reproducible term for term.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    dims: usize,
    pairs: Vec<(u32, f64)>,
}

impl SparseVector {
    pub fn empty(dims: usize) -> Self {
        SparseVector { dims, pairs: Vec::new() }
    }

    /// Builds from (index, weight) pairs. Pairs are sorted, duplicate indices
    /// summed, and zero/negative-or-non-finite weights rejected.
    pub fn from_pairs(dims: usize, mut pairs: Vec<(u32, f64)>) -> Result<Self> {
        pairs.sort_by_key(|&(i, _)| i);
        let mut merged: Vec<(u32, f64)> = Vec::with_capacity(pairs.len());
        for (i, w) in pairs {
            if !w.is_finite() {
                return Err(Error::invalid("sparse vector", "non-finite weight"));
            }
            if (i as usize) >= dims {
                return Err(Error::invalid(
                    "sparse vector",
                    format!("index {i} out of bounds for dims {dims}"),
                ));
            }
            match merged.last_mut() {
                Some(last) if last.0 == i => last.1 += w,
                _ => merged.push((i, w)),
            }
        }
        merged.retain(|&(_, w)| w != 0.0);
        if merged.iter().any(|&(_, w)| w < 0.0) {
            return Err(Error::invalid("sparse vector", "negative weight"));
        }
        Ok(SparseVector { dims, pairs: merged })
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn pairs(&self) -> &[(u32, f64)] {
        &self.pairs
    }

    pub fn is_zero(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn dot(&self, other: &SparseVector) -> Result<f64> {
        if self.dims != other.dims {
            return Err(Error::DimMismatch {
                left: self.dims,
                right: other.dims,
            });
        }
        let (mut i, mut j) = (0usize, 0usize);
        let mut sum = 0.0;
        while i < self.pairs.len() && j < other.pairs.len() {
            match self.pairs[i].0.cmp(&other.pairs[j].0) {
                std::cmp::Ordering::Equal => {
                    sum += self.pairs[i].1 * other.pairs[j].1;
                    i += 1;
                    j += 1;
                }
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
            }
        }
        Ok(sum)
    }

    pub fn norm(&self) -> f64 {
        self.pairs.iter().map(|&(_, w)| w * w).sum::<f64>().sqrt()
    }

    /// Cosine similarity in [0, 1]; zero when either vector is zero.
    pub fn cosine(&self, other: &SparseVector) -> Result<f64> {
        let dot = self.dot(other)?;
        let denom = self.norm() * other.norm();
        if denom == 0.0 {
            Ok(0.0)
        } else {
            Ok(dot / denom)
        }
    }

    /// Scales to unit L2 norm; a zero vector stays zero.
    pub fn normalized(mut self) -> Self {
        let norm = self.norm();
        if norm > 0.0 {
            for pair in &mut self.pairs {
                pair.1 /= norm;
            }
        }
        self
    }
}
