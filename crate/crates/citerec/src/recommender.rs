//! Recommender fronts shared by the evaluation protocols and the CLI.
//!
//! The two query shapes — a partial citation list and a token context window
//! — get one trait each; metadata rides along so fused variants can score
//! conditional-probability features without changing the protocol code.

use crate::cf::CfModel;
use crate::citation::CitationVocabulary;
use crate::context::{context_vector, majority_recommend, ContextBank, TextVocabulary};
use crate::corpus::{Metadata, Token};
use crate::fusion::{fuse, FeatureScoreTable, FusionWeights, MetaFeature};
use crate::ranked::RankedList;

pub trait CitationListRecommender {
    fn recommend_citations(&self, partial: &[u32], meta: &Metadata, top_n: usize) -> RankedList;
}

pub trait ContextRecommender {
    fn recommend_context(&self, window: &[Token], meta: &Metadata, top_n: usize) -> RankedList;
}

impl CitationListRecommender for CfModel {
    fn recommend_citations(&self, partial: &[u32], _meta: &Metadata, top_n: usize) -> RankedList {
        self.recommend(partial, top_n)
    }
}

/// Text-similarity recommender: a context bank plus its text vocabulary.
pub struct ContextModel {
    pub bank: ContextBank,
    pub text_vocab: TextVocabulary,
}

impl ContextRecommender for ContextModel {
    fn recommend_context(&self, window: &[Token], _meta: &Metadata, top_n: usize) -> RankedList {
        self.bank
            .recommend(&context_vector(window, &self.text_vocab), top_n)
    }
}

/// Query-independent popularity baseline.
pub struct MajorityModel {
    full: RankedList,
}

impl MajorityModel {
    pub fn new(vocab: &CitationVocabulary) -> Self {
        MajorityModel {
            full: majority_recommend(vocab, vocab.len()),
        }
    }
}

impl CitationListRecommender for MajorityModel {
    fn recommend_citations(&self, _partial: &[u32], _meta: &Metadata, top_n: usize) -> RankedList {
        self.full.truncated(top_n)
    }
}

impl ContextRecommender for MajorityModel {
    fn recommend_context(&self, _window: &[Token], _meta: &Metadata, top_n: usize) -> RankedList {
        self.full.truncated(top_n)
    }
}

/// How many base candidates a fused recommender reranks.
pub const DEFAULT_FUSION_POOL: usize = 50;

pub struct FusedCitationList<B: CitationListRecommender> {
    pub base: B,
    pub table: FeatureScoreTable,
    pub weights: FusionWeights,
    pub features: Vec<MetaFeature>,
    pub pool: usize,
}

impl<B: CitationListRecommender> CitationListRecommender for FusedCitationList<B> {
    fn recommend_citations(&self, partial: &[u32], meta: &Metadata, top_n: usize) -> RankedList {
        let pool = self.pool.max(top_n);
        let base = self.base.recommend_citations(partial, meta, pool);
        rerank(&base, &self.table, &self.weights, &self.features, meta, top_n)
    }
}

pub struct FusedContext<B: ContextRecommender> {
    pub base: B,
    pub table: FeatureScoreTable,
    pub weights: FusionWeights,
    pub features: Vec<MetaFeature>,
    pub pool: usize,
}

impl<B: ContextRecommender> ContextRecommender for FusedContext<B> {
    fn recommend_context(&self, window: &[Token], meta: &Metadata, top_n: usize) -> RankedList {
        let pool = self.pool.max(top_n);
        let base = self.base.recommend_context(window, meta, pool);
        rerank(&base, &self.table, &self.weights, &self.features, meta, top_n)
    }
}

fn rerank(
    base: &RankedList,
    table: &FeatureScoreTable,
    weights: &FusionWeights,
    features: &[MetaFeature],
    meta: &Metadata,
    top_n: usize,
) -> RankedList {
    let rows: Vec<Vec<f64>> = base
        .items()
        .iter()
        .map(|&(citation, score)| table.feature_row(score, citation, meta, features))
        .collect();
    fuse(base, &rows, weights, top_n).expect("rows built from base candidates")
}
