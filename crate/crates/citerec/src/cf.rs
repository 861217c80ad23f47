//! Citation-list recommendation: user-based top-K collaborative filtering
//! over document citation vectors.
//!
//! Each training document is a sparse vector over the citation vocabulary.
//! A query (partial citation list) is vectorized the same way; the K most
//! cosine-similar training documents vote for candidate citations with their
//! own citation weights, averaged by similarity:
//!
//! ```text
//! score(d, c) = Σ_{d' ∈ K(d)} sim(v_d, v_d') · v_{d',c}  /  Σ_{d' ∈ K(d)} sim(v_d, v_d')
//! ```

use std::collections::{HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ranked::RankedList;
use crate::sparse::SparseVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightScheme {
    Binary,
    Tf,
    TfIdf,
}

impl WeightScheme {
    pub fn as_str(self) -> &'static str {
        match self {
            WeightScheme::Binary => "binary",
            WeightScheme::Tf => "tf",
            WeightScheme::TfIdf => "tfidf",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "binary" => Some(WeightScheme::Binary),
            "tf" => Some(WeightScheme::Tf),
            "tfidf" => Some(WeightScheme::TfIdf),
            _ => None,
        }
    }
}

/// Vectorizes a citation list. Binary stores 1 per distinct index, Tf the
/// occurrence count, TfIdf the count scaled by the supplied idf weights.
pub fn doc_vector(
    citations: &[u32],
    dims: usize,
    scheme: WeightScheme,
    idf: Option<&[f64]>,
) -> Result<SparseVector> {
    if scheme == WeightScheme::TfIdf && idf.is_none() {
        return Err(Error::invalid("doc_vector", "tfidf scheme requires idf weights"));
    }
    let mut counts: HashMap<u32, u64> = HashMap::new();
    for &c in citations {
        *counts.entry(c).or_insert(0) += 1;
    }
    let pairs: Vec<(u32, f64)> = counts
        .into_iter()
        .map(|(i, n)| {
            let w = match scheme {
                WeightScheme::Binary => 1.0,
                WeightScheme::Tf => n as f64,
                WeightScheme::TfIdf => n as f64 * idf.unwrap().get(i as usize).copied().unwrap_or(0.0),
            };
            (i, w)
        })
        .collect();
    SparseVector::from_pairs(dims, pairs)
}

/// Inverse document frequency per citation index over training documents:
/// `ln(N / df)`, zero for indices never cited.
pub fn citation_idf(docs: &[(String, Vec<u32>)], dims: usize) -> Vec<f64> {
    let mut df = vec![0u64; dims];
    for (_, citations) in docs {
        let distinct: HashSet<u32> = citations.iter().copied().collect();
        for i in distinct {
            df[i as usize] += 1;
        }
    }
    let n = docs.len() as f64;
    df.iter()
        .map(|&d| if d == 0 { 0.0 } else { (n / d as f64).ln() })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CfModel {
    scheme: WeightScheme,
    k: usize,
    dims: usize,
    unk_index: u32,
    idf: Option<Vec<f64>>,
    doc_ids: Vec<String>,
    doc_vectors: Vec<SparseVector>,
    #[serde(skip)]
    inverted: HashMap<u32, Vec<usize>>,
}

impl CfModel {
    /// Builds the model from training documents' citation sequences.
    pub fn build(
        mut docs: Vec<(String, Vec<u32>)>,
        dims: usize,
        unk_index: u32,
        scheme: WeightScheme,
        k: usize,
    ) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("cf model", "K must be at least 1"));
        }
        docs.sort_by(|a, b| a.0.cmp(&b.0));
        let idf = match scheme {
            WeightScheme::TfIdf => Some(citation_idf(&docs, dims)),
            _ => None,
        };
        let mut doc_ids = Vec::with_capacity(docs.len());
        let mut doc_vectors = Vec::with_capacity(docs.len());
        for (id, citations) in docs {
            doc_vectors.push(doc_vector(&citations, dims, scheme, idf.as_deref())?);
            doc_ids.push(id);
        }
        let mut model = CfModel {
            scheme,
            k,
            dims,
            unk_index,
            idf,
            doc_ids,
            doc_vectors,
            inverted: HashMap::new(),
        };
        model.rebuild_inverted();
        Ok(model)
    }

    fn rebuild_inverted(&mut self) {
        self.inverted.clear();
        for (pos, vec) in self.doc_vectors.iter().enumerate() {
            for &(i, _) in vec.pairs() {
                self.inverted.entry(i).or_default().push(pos);
            }
        }
    }

    pub fn scheme(&self) -> WeightScheme {
        self.scheme
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn n_docs(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn query_vector(&self, partial: &[u32]) -> Result<SparseVector> {
        doc_vector(partial, self.dims, self.scheme, self.idf.as_deref())
    }

    /// Recommends up to `top_n` citations for a partial citation list.
    /// Citations already in the list and the UNK index are never returned.
    /// With no similar neighbors at all (cold start) the list is empty.
    pub fn recommend(&self, partial: &[u32], top_n: usize) -> RankedList {
        let Ok(query) = self.query_vector(partial) else {
            return RankedList::empty();
        };
        if query.is_zero() {
            return RankedList::empty();
        }

        // Only documents sharing support can have nonzero similarity; zero-
        // similarity neighbors would add nothing to either sum.
        let mut candidates: Vec<usize> = query
            .pairs()
            .iter()
            .filter_map(|&(i, _)| self.inverted.get(&i))
            .flatten()
            .copied()
            .collect();
        candidates.sort_unstable();
        candidates.dedup();

        let mut sims: Vec<(usize, f64)> = candidates
            .into_iter()
            .filter_map(|pos| {
                let sim = query
                    .cosine(&self.doc_vectors[pos])
                    .expect("model vectors share dims");
                (sim > 0.0).then_some((pos, sim))
            })
            .collect();
        // Doc ids are in ascending order, so position order is id order.
        sims.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        sims.truncate(self.k);
        if sims.is_empty() {
            return RankedList::empty();
        }

        let exclude: HashSet<u32> = partial.iter().copied().collect();
        let mut numerator: HashMap<u32, f64> = HashMap::new();
        let mut denominator = 0.0;
        for &(pos, sim) in &sims {
            denominator += sim;
            for &(i, w) in self.doc_vectors[pos].pairs() {
                if i == self.unk_index || exclude.contains(&i) {
                    continue;
                }
                *numerator.entry(i).or_insert(0.0) += sim * w;
            }
        }
        if denominator == 0.0 {
            return RankedList::empty();
        }
        let scored: Vec<(u32, f64)> = numerator
            .into_iter()
            .map(|(i, num)| (i, num / denominator))
            .collect();
        RankedList::from_scores(scored, top_n)
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        crate::artifact::save_json(path, &CfModelFile {
            format: CF_FORMAT.to_string(),
            version: 1,
            model: self.clone(),
        })
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        let file: CfModelFile = crate::artifact::load_json(path, "train-cf")?;
        crate::artifact::check_format(path, CF_FORMAT, &file.format)?;
        let mut model = file.model;
        model.rebuild_inverted();
        Ok(model)
    }
}

const CF_FORMAT: &str = "citerec.cf-model";

#[derive(Serialize, Deserialize)]
struct CfModelFile {
    format: String,
    version: u32,
    model: CfModel,
}
