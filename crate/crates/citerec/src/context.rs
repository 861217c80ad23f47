//! Context-aware recommendation: tf-idf context banks and the majority-vote
//! baseline.
//!
//! Each citation is represented by up to `cap` L2-normalized tf-idf vectors
//! of the token window preceding its training occurrences. A query window is
//! vectorized the same way and scored against each bank:
//!
//! ```text
//! score(b_d, c) = (1/k_c) Σ_j (b_d · b_j)²
//! ```

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::citation::CitationVocabulary;
use crate::corpus::{Document, Token};
use crate::error::{Error, Result};
use crate::hash::derive_seed;
use crate::ranked::RankedList;
use crate::sparse::SparseVector;

pub const DEFAULT_MAX_TERMS: usize = 25_000;
pub const DEFAULT_MIN_DF: u64 = 10;
pub const DEFAULT_CONTEXT_LEN: usize = 50;
pub const DEFAULT_BANK_CAP: usize = 100;

/// Text vocabulary for context vectors: the most frequent filtered word
/// terms plus one pseudo-term per citation vocabulary index. Word dimensions
/// come first, citation dimensions follow in citation-index order.
#[derive(Debug, Clone)]
pub struct TextVocabulary {
    word_terms: Vec<String>,
    word_index: HashMap<String, u32>,
    word_df: Vec<u64>,
    word_idf: Vec<f64>,
    cite_df: Vec<u64>,
    cite_idf: Vec<f64>,
    n_docs: u64,
}

impl TextVocabulary {
    pub fn dims(&self) -> usize {
        self.word_terms.len() + self.cite_idf.len()
    }

    pub fn n_words(&self) -> usize {
        self.word_terms.len()
    }

    pub fn n_cites(&self) -> usize {
        self.cite_idf.len()
    }

    pub fn word_dim(&self, term: &str) -> Option<u32> {
        self.word_index.get(term).copied()
    }

    pub fn cite_dim(&self, cite_index: u32) -> u32 {
        self.word_terms.len() as u32 + cite_index
    }

    fn idf_of_dim(&self, dim: u32) -> f64 {
        let words = self.word_terms.len() as u32;
        if dim < words {
            self.word_idf[dim as usize]
        } else {
            self.cite_idf[(dim - words) as usize]
        }
    }

    pub(crate) fn from_parts(
        word_terms: Vec<String>,
        word_df: Vec<u64>,
        word_idf: Vec<f64>,
        cite_df: Vec<u64>,
        cite_idf: Vec<f64>,
        n_docs: u64,
    ) -> Self {
        let word_index = word_terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        TextVocabulary {
            word_terms,
            word_index,
            word_df,
            word_idf,
            cite_df,
            cite_idf,
            n_docs,
        }
    }

    /// Writes `term\tdf\tidf` rows: word terms in rank order, then one
    /// `cite::<key>` row per citation vocabulary index.
    pub fn write_tsv(&self, mut w: impl Write, vocab: &CitationVocabulary) -> std::io::Result<()> {
        writeln!(w, "term\tdf\tidf")?;
        writeln!(w, "#docs\t{}\t0", self.n_docs)?;
        for (i, term) in self.word_terms.iter().enumerate() {
            writeln!(w, "{term}\t{}\t{}", self.word_df[i], self.word_idf[i])?;
        }
        for i in 0..self.cite_idf.len() {
            writeln!(
                w,
                "cite::{}\t{}\t{}",
                vocab.key_of(i as u32),
                self.cite_df[i],
                self.cite_idf[i]
            )?;
        }
        Ok(())
    }

    pub fn read_tsv(reader: impl Read, path: &Path, vocab: &CitationVocabulary) -> Result<Self> {
        let mut lines = BufReader::new(reader).lines();
        let bad = |why: String| Error::invalid("text vocabulary file", format!("{}: {why}", path.display()));
        let header = lines
            .next()
            .transpose()
            .map_err(|e| Error::io(path, e))?
            .ok_or_else(|| bad("empty file".into()))?;
        if header != "term\tdf\tidf" {
            return Err(bad(format!("unexpected header {header:?}")));
        }
        let mut n_docs = 0u64;
        let mut word_terms = Vec::new();
        let mut word_df = Vec::new();
        let mut word_idf = Vec::new();
        let mut cite_rows: Vec<(String, u64, f64)> = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err(bad(format!("bad row at line {}", lineno + 2)));
            }
            let df: u64 = fields[1].parse().map_err(|_| bad(format!("bad df at line {}", lineno + 2)))?;
            let idf: f64 = fields[2].parse().map_err(|_| bad(format!("bad idf at line {}", lineno + 2)))?;
            if fields[0] == "#docs" {
                n_docs = df;
            } else if let Some(key) = fields[0].strip_prefix("cite::") {
                cite_rows.push((key.to_string(), df, idf));
            } else {
                if !cite_rows.is_empty() {
                    return Err(bad("word row after cite rows".into()));
                }
                word_terms.push(fields[0].to_string());
                word_df.push(df);
                word_idf.push(idf);
            }
        }
        if cite_rows.len() != vocab.len() {
            return Err(bad(format!(
                "{} cite rows for a {}-entry citation vocabulary",
                cite_rows.len(),
                vocab.len()
            )));
        }
        for (i, (key, _, _)) in cite_rows.iter().enumerate() {
            if key != vocab.key_of(i as u32) {
                return Err(bad(format!("cite row {i} is {key:?}, vocabulary has {:?}", vocab.key_of(i as u32))));
            }
        }
        let cite_df = cite_rows.iter().map(|r| r.1).collect();
        let cite_idf = cite_rows.iter().map(|r| r.2).collect();
        Ok(TextVocabulary::from_parts(
            word_terms, word_df, word_idf, cite_df, cite_idf, n_docs,
        ))
    }
}

/// Builds the text vocabulary from training documents: drops stopwords,
/// digit-bearing terms and terms in fewer than `min_df` documents, ranks the
/// rest by corpus frequency (ties by ascending term), keeps `max_terms`, and
/// appends the citation pseudo-terms. idf is `ln(N / df)`.
pub fn build_text_vocab(
    train_docs: &[Document],
    citation_vocab_len: usize,
    max_terms: usize,
    min_df: u64,
    stopwords: &HashSet<String>,
) -> TextVocabulary {
    let mut freq: HashMap<&str, u64> = HashMap::new();
    let mut df: HashMap<&str, u64> = HashMap::new();
    let mut cite_df = vec![0u64; citation_vocab_len];
    for doc in train_docs {
        let mut seen_words: HashSet<&str> = HashSet::new();
        let mut seen_cites: HashSet<u32> = HashSet::new();
        for token in &doc.tokens {
            match token {
                Token::Word(w) => {
                    *freq.entry(w.as_str()).or_insert(0) += 1;
                    if seen_words.insert(w.as_str()) {
                        *df.entry(w.as_str()).or_insert(0) += 1;
                    }
                }
                Token::Cite(i) => {
                    if seen_cites.insert(*i) {
                        cite_df[*i as usize] += 1;
                    }
                }
            }
        }
    }

    let n = train_docs.len() as u64;
    let idf = |d: u64| -> f64 {
        if d == 0 || n == 0 {
            0.0
        } else {
            (n as f64 / d as f64).ln()
        }
    };

    let mut ranked: Vec<(&str, u64)> = freq
        .iter()
        .filter(|(term, _)| {
            let d = df.get(*term).copied().unwrap_or(0);
            d >= min_df
                && !stopwords.contains(**term)
                && !term.chars().any(|c| c.is_numeric())
        })
        .map(|(t, f)| (*t, *f))
        .collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    ranked.truncate(max_terms);

    let word_terms: Vec<String> = ranked.iter().map(|(t, _)| t.to_string()).collect();
    let word_df: Vec<u64> = ranked.iter().map(|(t, _)| df[*t]).collect();
    let word_idf: Vec<f64> = word_df.iter().map(|&d| idf(d)).collect();
    let cite_idf: Vec<f64> = cite_df.iter().map(|&d| idf(d)).collect();
    TextVocabulary::from_parts(word_terms, word_df, word_idf, cite_df, cite_idf, n)
}

/// tf-idf vector of a token window, L2-normalized; a window with no
/// in-vocabulary term stays the zero vector.
pub fn context_vector(window: &[Token], tv: &TextVocabulary) -> SparseVector {
    let mut counts: HashMap<u32, u64> = HashMap::new();
    for token in window {
        let dim = match token {
            Token::Word(w) => tv.word_dim(w),
            Token::Cite(i) => Some(tv.cite_dim(*i)),
        };
        if let Some(dim) = dim {
            *counts.entry(dim).or_insert(0) += 1;
        }
    }
    let pairs: Vec<(u32, f64)> = counts
        .into_iter()
        .map(|(dim, tf)| (dim, tf as f64 * tv.idf_of_dim(dim)))
        .collect();
    SparseVector::from_pairs(tv.dims(), pairs)
        .expect("window dims bounded by vocabulary")
        .normalized()
}

/// Per-citation collections of context vectors from training documents.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContextBank {
    dims: usize,
    context_len: usize,
    cap: usize,
    seed: u64,
    banks: Vec<(u32, Vec<SparseVector>)>,
}

impl ContextBank {
    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn context_len(&self) -> usize {
        self.context_len
    }

    pub fn contexts(&self, cite: u32) -> Option<&[SparseVector]> {
        self.banks
            .binary_search_by_key(&cite, |(c, _)| *c)
            .ok()
            .map(|pos| self.banks[pos].1.as_slice())
    }

    pub fn citations(&self) -> impl Iterator<Item = u32> + '_ {
        self.banks.iter().map(|(c, _)| *c)
    }

    pub fn n_citations(&self) -> usize {
        self.banks.len()
    }

    /// Scores one citation: the mean squared dot product against its bank,
    /// zero for citations without a bank.
    pub fn score(&self, query: &SparseVector, cite: u32) -> f64 {
        self.contexts(cite)
            .map(|contexts| context_score(query, contexts))
            .unwrap_or(0.0)
    }

    /// Scores every banked citation and ranks them. A zero query vector
    /// yields an empty list.
    pub fn recommend(&self, query: &SparseVector, top_n: usize) -> RankedList {
        if query.is_zero() {
            return RankedList::empty();
        }
        let scored: Vec<(u32, f64)> = self
            .banks
            .iter()
            .map(|(c, contexts)| (*c, context_score(query, contexts)))
            .collect();
        RankedList::from_scores(scored, top_n)
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        crate::artifact::save_json(path, &ContextBankFile {
            format: BANK_FORMAT.to_string(),
            version: 1,
            bank: self.clone(),
        })
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        let file: ContextBankFile = crate::artifact::load_json(path, "train-context")?;
        crate::artifact::check_format(path, BANK_FORMAT, &file.format)?;
        Ok(file.bank)
    }
}

const BANK_FORMAT: &str = "citerec.context-bank";

#[derive(Serialize, Deserialize)]
struct ContextBankFile {
    format: String,
    version: u32,
    bank: ContextBank,
}

/// Mean squared dot product of the query against a citation's contexts.
/// With unit (or zero) vectors on both sides this lies in [0, 1].
pub fn context_score(query: &SparseVector, contexts: &[SparseVector]) -> f64 {
    if contexts.is_empty() {
        return 0.0;
    }
    let mut sum = 0.0;
    for b in contexts {
        let dot = query.dot(b).expect("bank vectors share dims");
        sum += dot * dot;
    }
    sum / contexts.len() as f64
}

/// Collects the context vector of every non-UNK citation occurrence in the
/// training documents. Citations with more than `cap` occurrences keep a
/// uniform random subset drawn from a per-citation RNG stream, so the result
/// does not depend on build order.
pub fn build_context_bank(
    train_docs: &[Document],
    tv: &TextVocabulary,
    unk_index: u32,
    context_len: usize,
    cap: usize,
    seed: u64,
) -> ContextBank {
    let mut order: Vec<usize> = (0..train_docs.len()).collect();
    order.sort_by(|&a, &b| train_docs[a].id.cmp(&train_docs[b].id));

    let mut collected: BTreeMap<u32, Vec<SparseVector>> = BTreeMap::new();
    for &doc_pos in &order {
        let doc = &train_docs[doc_pos];
        for (pos, token) in doc.tokens.iter().enumerate() {
            let Token::Cite(c) = token else { continue };
            if *c == unk_index {
                continue;
            }
            let window = &doc.tokens[pos.saturating_sub(context_len)..pos];
            collected
                .entry(*c)
                .or_default()
                .push(context_vector(window, tv));
        }
    }

    let banks: Vec<(u32, Vec<SparseVector>)> = collected
        .into_iter()
        .map(|(c, contexts)| {
            if contexts.len() <= cap {
                (c, contexts)
            } else {
                let mut rng =
                    ChaCha8Rng::seed_from_u64(derive_seed(seed, &[b"bank", &c.to_le_bytes()]));
                let mut keep = rand::seq::index::sample(&mut rng, contexts.len(), cap).into_vec();
                keep.sort_unstable();
                let kept: Vec<SparseVector> = keep
                    .into_iter()
                    .map(|i| contexts[i].clone())
                    .collect();
                (c, kept)
            }
        })
        .collect();

    ContextBank {
        dims: tv.dims(),
        context_len,
        cap,
        seed,
        banks,
    }
}

/// Vectorizes a query window and ranks banked citations against it.
pub fn recommend_window(
    window: &[Token],
    bank: &ContextBank,
    tv: &TextVocabulary,
    top_n: usize,
) -> RankedList {
    bank.recommend(&context_vector(window, tv), top_n)
}

/// The majority-vote baseline: the most frequently cited vocabulary entries
/// in descending training count, independent of the query. UNK is excluded;
/// count ties break by ascending index.
pub fn majority_recommend(vocab: &CitationVocabulary, top_n: usize) -> RankedList {
    let scored: Vec<(u32, f64)> = vocab
        .entries()
        .iter()
        .enumerate()
        .filter(|&(i, _)| i as u32 != vocab.unk_index())
        .map(|(i, e)| (i as u32, e.count as f64))
        .collect();
    RankedList::from_scores(scored, top_n)
}
