//! Metadata feature scoring and pairwise learning-to-rank fusion.
//!
//! Each metadata feature scores a candidate citation by the smoothed
//! conditional probability of citing it given the feature value. A linear
//! SVM trained on pairwise feature differences (correct citation vs. the
//! recommender's other candidates) learns weights, and the fused score is
//! the weighted sum of min-max-scaled feature columns.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Document, Metadata, Token};
use crate::error::{Error, Result};
use crate::ranked::RankedList;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetaFeature {
    Year,
    IssueArea,
    Vlj,
}

pub const ALL_FEATURES: [MetaFeature; 3] = [MetaFeature::Year, MetaFeature::IssueArea, MetaFeature::Vlj];

impl MetaFeature {
    pub fn as_str(self) -> &'static str {
        match self {
            MetaFeature::Year => "year",
            MetaFeature::IssueArea => "issue_area",
            MetaFeature::Vlj => "vlj",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "year" => Some(MetaFeature::Year),
            "issue_area" => Some(MetaFeature::IssueArea),
            "vlj" => Some(MetaFeature::Vlj),
            _ => None,
        }
    }

    pub fn value_of(self, meta: &Metadata) -> i64 {
        match self {
            MetaFeature::Year => meta.year as i64,
            MetaFeature::IssueArea => meta.issue_area as i64,
            MetaFeature::Vlj => meta.vlj as i64,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
struct ValueCounts {
    counts: BTreeMap<u32, u64>,
    total: u64,
}

/// Laplace-smoothed conditional citation probabilities per feature value.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureScoreTable {
    alpha: f64,
    vocab_size: usize,
    tables: BTreeMap<MetaFeature, BTreeMap<i64, ValueCounts>>,
}

impl FeatureScoreTable {
    /// Counts every citation token occurrence (UNK included, so each row
    /// distributes all probability mass over the whole vocabulary).
    pub fn build(train_docs: &[Document], vocab_size: usize, alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(Error::invalid("smoothing alpha", "must be non-negative"));
        }
        let mut tables: BTreeMap<MetaFeature, BTreeMap<i64, ValueCounts>> = BTreeMap::new();
        for feature in ALL_FEATURES {
            tables.insert(feature, BTreeMap::new());
        }
        for doc in train_docs {
            let cites: Vec<u32> = doc.tokens.iter().filter_map(Token::as_cite).collect();
            if cites.is_empty() {
                continue;
            }
            for feature in ALL_FEATURES {
                let value = feature.value_of(&doc.metadata);
                let slot = tables.get_mut(&feature).unwrap().entry(value).or_default();
                for &c in &cites {
                    *slot.counts.entry(c).or_insert(0) += 1;
                    slot.total += 1;
                }
            }
        }
        Ok(FeatureScoreTable {
            alpha,
            vocab_size,
            tables,
        })
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    /// `P(c | feature = value)` with Laplace smoothing; an unseen feature
    /// value falls back to the uniform distribution.
    pub fn score(&self, feature: MetaFeature, value: i64, citation: u32) -> f64 {
        let v = self.vocab_size as f64;
        match self.tables.get(&feature).and_then(|t| t.get(&value)) {
            Some(slot) => {
                let count = slot.counts.get(&citation).copied().unwrap_or(0) as f64;
                (count + self.alpha) / (slot.total as f64 + self.alpha * v)
            }
            None => 1.0 / v,
        }
    }

    /// Feature row for a candidate: base recommender score first, then one
    /// conditional probability per requested feature.
    pub fn feature_row(
        &self,
        base_score: f64,
        citation: u32,
        meta: &Metadata,
        features: &[MetaFeature],
    ) -> Vec<f64> {
        let mut row = Vec::with_capacity(1 + features.len());
        row.push(base_score);
        for &f in features {
            row.push(self.score(f, f.value_of(meta), citation));
        }
        row
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        crate::artifact::save_json(path, &TableFile {
            format: TABLE_FORMAT.to_string(),
            version: 1,
            table: self.clone(),
        })
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        let file: TableFile = crate::artifact::load_json(path, "train-fusion")?;
        crate::artifact::check_format(path, TABLE_FORMAT, &file.format)?;
        Ok(file.table)
    }
}

const TABLE_FORMAT: &str = "citerec.feature-tables";

#[derive(Serialize, Deserialize)]
struct TableFile {
    format: String,
    version: u32,
    table: FeatureScoreTable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinMax {
    pub min: f64,
    pub max: f64,
}

impl MinMax {
    /// Min-max scaling; a degenerate column (max == min) maps to 0.
    pub fn scale(&self, x: f64) -> f64 {
        if self.max > self.min {
            (x - self.min) / (self.max - self.min)
        } else {
            0.0
        }
    }

    /// Scaling for difference rows: the min shift cancels when two scaled
    /// values are subtracted, leaving division by the column range. Training
    /// and pair accuracy use this form so that a bias-free hinge objective
    /// stays satisfiable on separable pairs (the mirrored −1 row of a shifted
    /// +1 row could otherwise never land on the other side of zero).
    pub fn scale_delta(&self, d: f64) -> f64 {
        if self.max > self.min {
            d / (self.max - self.min)
        } else {
            0.0
        }
    }
}

/// Pairwise-transformed training data: feature-difference rows with ±1
/// labels, plus the per-column min/max of the emitted rows.
#[derive(Debug, Clone)]
pub struct PairwiseDataset {
    pub rows: Vec<(Vec<f64>, i8)>,
    pub scalers: Vec<MinMax>,
}

/// Emits `(x⁺ − x⁻, +1)` and `(x⁻ − x⁺, −1)` for every (positive, negative)
/// pair of each instance. Errors when nothing can be emitted.
pub fn pairwise_transform(instances: &[(Vec<f64>, Vec<Vec<f64>>)]) -> Result<PairwiseDataset> {
    let mut rows: Vec<(Vec<f64>, i8)> = Vec::new();
    let mut n_cols = 0usize;
    for (positive, negatives) in instances {
        for negative in negatives {
            if negative.len() != positive.len() {
                return Err(Error::DimMismatch {
                    left: positive.len(),
                    right: negative.len(),
                });
            }
            n_cols = positive.len();
            let forward: Vec<f64> = positive.iter().zip(negative).map(|(p, n)| p - n).collect();
            let backward: Vec<f64> = forward.iter().map(|d| -d).collect();
            rows.push((forward, 1));
            rows.push((backward, -1));
        }
    }
    if rows.is_empty() {
        return Err(Error::invalid("pairwise data", "no (positive, negative) pairs"));
    }
    for (row, _) in &rows {
        if row.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("pairwise data", "non-finite feature value"));
        }
    }
    let mut scalers = vec![
        MinMax {
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        };
        n_cols
    ];
    for (row, _) in &rows {
        for (j, &x) in row.iter().enumerate() {
            scalers[j].min = scalers[j].min.min(x);
            scalers[j].max = scalers[j].max.max(x);
        }
    }
    Ok(PairwiseDataset { rows, scalers })
}

/// Learned fusion weights: column 0 is the base recommender score, the rest
/// follow the feature order used at training time.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FusionWeights {
    pub columns: Vec<String>,
    pub w: Vec<f64>,
    pub scalers: Vec<MinMax>,
}

impl FusionWeights {
    pub fn save_json(&self, path: &Path) -> Result<()> {
        crate::artifact::save_json(path, &WeightsFile {
            format: WEIGHTS_FORMAT.to_string(),
            version: 1,
            weights: self.clone(),
        })
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        let file: WeightsFile = crate::artifact::load_json(path, "train-fusion")?;
        crate::artifact::check_format(path, WEIGHTS_FORMAT, &file.format)?;
        Ok(file.weights)
    }

    pub fn features(&self) -> Result<Vec<MetaFeature>> {
        self.columns
            .iter()
            .skip(1)
            .map(|c| {
                MetaFeature::parse(c)
                    .ok_or_else(|| Error::invalid("fusion weights", format!("unknown column {c:?}")))
            })
            .collect()
    }
}

const WEIGHTS_FORMAT: &str = "citerec.fusion-weights";

#[derive(Serialize, Deserialize)]
struct WeightsFile {
    format: String,
    version: u32,
    weights: FusionWeights,
}

/// Trains a linear ranking SVM by deterministic Pegasos-style subgradient
/// descent on the hinge loss over min-max-normalized rows, returning the
/// average of the iterates. `epochs = 0` returns zero weights.
pub fn train_linear_svm(
    data: &PairwiseDataset,
    columns: Vec<String>,
    c: f64,
    epochs: usize,
    seed: u64,
) -> Result<FusionWeights> {
    if data.rows.is_empty() {
        return Err(Error::invalid("svm training", "empty dataset"));
    }
    if !c.is_finite() || c <= 0.0 {
        return Err(Error::invalid("svm training", "C must be positive"));
    }
    let dim = data.rows[0].0.len();
    if columns.len() != dim {
        return Err(Error::DimMismatch {
            left: columns.len(),
            right: dim,
        });
    }
    let normalized: Vec<(Vec<f64>, f64)> = data
        .rows
        .iter()
        .map(|(row, label)| {
            let scaled: Vec<f64> = row
                .iter()
                .zip(&data.scalers)
                .map(|(&x, s)| s.scale_delta(x))
                .collect();
            (scaled, *label as f64)
        })
        .collect();

    let n = normalized.len() as f64;
    let lambda = 1.0 / (c * n);
    let mut w = vec![0.0f64; dim];
    let mut w_sum = vec![0.0f64; dim];
    let mut steps = 0u64;
    let mut order: Vec<usize> = (0..normalized.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    for _ in 0..epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            steps += 1;
            let (x, y) = &normalized[i];
            let eta = 1.0 / (lambda * steps as f64);
            let margin: f64 = y * w.iter().zip(x).map(|(wi, xi)| wi * xi).sum::<f64>();
            let shrink = 1.0 - eta * lambda;
            for wi in &mut w {
                *wi *= shrink;
            }
            if margin < 1.0 {
                for (wi, xi) in w.iter_mut().zip(x) {
                    *wi += eta * y * xi;
                }
            }
            for (s, wi) in w_sum.iter_mut().zip(&w) {
                *s += *wi;
            }
        }
    }

    let w_avg: Vec<f64> = if steps == 0 {
        vec![0.0; dim]
    } else {
        w_sum.iter().map(|s| s / steps as f64).collect()
    };
    Ok(FusionWeights {
        columns,
        w: w_avg,
        scalers: data.scalers.clone(),
    })
}

/// Fraction of pairs ranked correctly: the label matches the sign of the
/// fused-score difference `w · scale_delta(x⁺ − x⁻)`.
pub fn pairwise_accuracy(weights: &FusionWeights, data: &PairwiseDataset) -> f64 {
    if data.rows.is_empty() {
        return 0.0;
    }
    let correct = data
        .rows
        .iter()
        .filter(|(row, label)| {
            let score: f64 = row
                .iter()
                .zip(&weights.scalers)
                .zip(&weights.w)
                .map(|((&x, s), wi)| wi * s.scale_delta(x))
                .sum();
            (score > 0.0 && *label > 0) || (score < 0.0 && *label < 0)
        })
        .count();
    correct as f64 / data.rows.len() as f64
}

/// Reranks the base candidates by the weighted sum of scaled feature columns.
/// Fusion never introduces candidates; `rows` must align with `base`.
pub fn fuse(
    base: &RankedList,
    rows: &[Vec<f64>],
    weights: &FusionWeights,
    top_n: usize,
) -> Result<RankedList> {
    if rows.len() != base.len() {
        return Err(Error::DimMismatch {
            left: rows.len(),
            right: base.len(),
        });
    }
    let mut scored = Vec::with_capacity(rows.len());
    for (&(citation, _), row) in base.items().iter().zip(rows) {
        if row.len() != weights.w.len() {
            return Err(Error::DimMismatch {
                left: row.len(),
                right: weights.w.len(),
            });
        }
        let final_score: f64 = row
            .iter()
            .zip(&weights.scalers)
            .zip(&weights.w)
            .map(|((&x, s), wi)| wi * s.scale(x))
            .sum();
        scored.push((citation, final_score));
    }
    Ok(RankedList::from_scores(scored, top_n))
}
