//! Deterministic train/validation/test splitting with round-robin test folds.
//!
//! The shuffle keys on document id content, so the split is stable under
//! reordering of the input list. Slice sizes use largest-remainder rounding.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hash::derive_seed;

pub const TEST_FOLDS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRatios {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        SplitRatios {
            train: 0.72,
            validation: 0.18,
            test: 0.10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSplit {
    pub train: Vec<String>,
    pub validation: Vec<String>,
    pub test: Vec<String>,
    pub test_folds: Vec<Vec<String>>,
}

impl CorpusSplit {
    /// Fold id of a test document, if it is one.
    pub fn fold_of(&self, id: &str) -> Option<usize> {
        self.test_folds
            .iter()
            .position(|fold| fold.iter().any(|d| d == id))
    }
}

pub fn split_corpus(ids: &[String], ratios: SplitRatios, seed: u64) -> Result<CorpusSplit> {
    let sum = ratios.train + ratios.validation + ratios.test;
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::invalid("split ratios", format!("sum {sum}, expected 1")));
    }
    if ratios.train < 0.0 || ratios.validation < 0.0 || ratios.test < 0.0 {
        return Err(Error::invalid("split ratios", "negative ratio"));
    }
    {
        let mut sorted: Vec<&String> = ids.iter().collect();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != ids.len() {
            return Err(Error::invalid("corpus ids", "duplicate document id"));
        }
    }

    // Shuffle keyed on id content: order by (hash(seed, id), id).
    let mut shuffled: Vec<&String> = ids.iter().collect();
    shuffled.sort_by_key(|id| (derive_seed(seed, &[id.as_bytes()]), (*id).clone()));

    let sizes = largest_remainder(
        ids.len(),
        &[ratios.train, ratios.validation, ratios.test],
    );
    let (n_train, n_val, n_test) = (sizes[0], sizes[1], sizes[2]);
    if n_test < TEST_FOLDS {
        return Err(Error::invalid(
            "split",
            format!("test set has {n_test} documents, need at least {TEST_FOLDS} to form folds"),
        ));
    }

    let train: Vec<String> = shuffled[..n_train].iter().map(|s| (*s).clone()).collect();
    let validation: Vec<String> = shuffled[n_train..n_train + n_val]
        .iter()
        .map(|s| (*s).clone())
        .collect();
    let test: Vec<String> = shuffled[n_train + n_val..]
        .iter()
        .map(|s| (*s).clone())
        .collect();

    let mut test_folds: Vec<Vec<String>> = vec![Vec::new(); TEST_FOLDS];
    for (pos, id) in test.iter().enumerate() {
        test_folds[pos % TEST_FOLDS].push(id.clone());
    }

    Ok(CorpusSplit {
        train,
        validation,
        test,
        test_folds,
    })
}

/// Largest-remainder apportionment of `n` into buckets proportional to
/// `ratios`; remainder ties go to the earlier bucket.
fn largest_remainder(n: usize, ratios: &[f64]) -> Vec<usize> {
    let exact: Vec<f64> = ratios.iter().map(|r| r * n as f64).collect();
    let mut sizes: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let assigned: usize = sizes.iter().sum();
    let mut order: Vec<usize> = (0..ratios.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = exact[a] - exact[a].floor();
        let fb = exact[b] - exact[b].floor();
        fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
    });
    for i in 0..(n - assigned) {
        sizes[order[i % ratios.len()]] += 1;
    }
    sizes
}
