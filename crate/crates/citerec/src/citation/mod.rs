//! Citation extraction and normalization.
//!
//! Raw citation strings are located in opinion text with three pattern
//! families (case, U.S.C., C.F.R.), resolved against an authority list into
//! canonical citation identities, and counted into a pruned vocabulary.

mod authority;
mod extract;
mod normalize;
mod vocab;

pub use authority::{AuthorityIndex, AuthorityRecord};
pub use extract::{extract_citations, CitationExtractor, KindHint, RawCitation, DEFAULT_REPORTERS};
pub use normalize::{canonical_reporter, normalize, Normalizer};
pub use vocab::{CitationVocabulary, VocabEntry};

use serde::{Deserialize, Serialize};

/// Sentinel key absorbing pruned and unresolvable citations.
pub const UNK_KEY: &str = "UNK_CITATION";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CitationClass {
    Case,
    Statute,
    Regulation,
    Unknown,
}

impl CitationClass {
    pub fn as_str(self) -> &'static str {
        match self {
            CitationClass::Case => "case",
            CitationClass::Statute => "statute",
            CitationClass::Regulation => "regulation",
            CitationClass::Unknown => "unknown",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "case" => Some(CitationClass::Case),
            "statute" => Some(CitationClass::Statute),
            "regulation" => Some(CitationClass::Regulation),
            "unknown" => Some(CitationClass::Unknown),
            _ => None,
        }
    }
}

/// A canonical citation identity. The key is deterministic for a given raw
/// string and authority index; `Unknown` if and only if the key is [`UNK_KEY`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NormalizedCitation {
    pub class: CitationClass,
    pub key: String,
}

impl NormalizedCitation {
    pub fn unknown() -> Self {
        NormalizedCitation {
            class: CitationClass::Unknown,
            key: UNK_KEY.to_string(),
        }
    }

    pub fn is_unknown(&self) -> bool {
        self.class == CitationClass::Unknown
    }
}
