//! Decision ingestion and tokenization.
//!
//! Raw decisions arrive as JSONL with metadata. Tokenization lowercases the
//! text, splits on anything outside alphanumeric runs (internal apostrophes
//! and hyphens stay), and re-inserts each extracted citation as one `Cite`
//! token per normalized citation at the position where the span stood.

mod split;

pub use split::{split_corpus, CorpusSplit, SplitRatios, TEST_FOLDS};

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::de::{SeqAccess, Visitor};
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::citation::{AuthorityIndex, CitationExtractor, CitationVocabulary, Normalizer};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metadata {
    pub year: i32,
    pub issue_area: i32,
    pub vlj: i32,
}

/// One token of a tokenized decision: a lowercased word or a citation
/// vocabulary index. Serialized as `["w","the"]` / `["c",7]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Token {
    Word(String),
    Cite(u32),
}

impl Token {
    pub fn as_cite(&self) -> Option<u32> {
        match self {
            Token::Cite(i) => Some(*i),
            Token::Word(_) => None,
        }
    }
}

impl Serialize for Token {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(2))?;
        match self {
            Token::Word(w) => {
                seq.serialize_element("w")?;
                seq.serialize_element(w)?;
            }
            Token::Cite(i) => {
                seq.serialize_element("c")?;
                seq.serialize_element(i)?;
            }
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for Token {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct TokenVisitor;

        impl<'de> Visitor<'de> for TokenVisitor {
            type Value = Token;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                write!(f, "a [\"w\", word] or [\"c\", index] pair")
            }

            fn visit_seq<A: SeqAccess<'de>>(
                self,
                mut seq: A,
            ) -> std::result::Result<Token, A::Error> {
                let tag: String = seq
                    .next_element()?
                    .ok_or_else(|| serde::de::Error::invalid_length(0, &self))?;
                match tag.as_str() {
                    "w" => {
                        let word: String = seq
                            .next_element()?
                            .ok_or_else(|| serde::de::Error::invalid_length(1, &self))?;
                        Ok(Token::Word(word))
                    }
                    "c" => {
                        let index: u32 = seq
                            .next_element()?
                            .ok_or_else(|| serde::de::Error::invalid_length(1, &self))?;
                        Ok(Token::Cite(index))
                    }
                    other => Err(serde::de::Error::unknown_variant(other, &["w", "c"])),
                }
            }
        }

        deserializer.deserialize_seq(TokenVisitor)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub id: String,
    pub tokens: Vec<Token>,
    pub metadata: Metadata,
}

impl Document {
    /// Citation tokens in document order.
    pub fn citation_sequence(&self) -> Vec<u32> {
        self.tokens.iter().filter_map(Token::as_cite).collect()
    }
}

/// One line of the corpus JSONL input.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawDocument {
    pub id: String,
    pub text: String,
    pub year: i32,
    pub issue_area: i32,
    pub vlj: i32,
}

impl RawDocument {
    pub fn metadata(&self) -> Metadata {
        Metadata {
            year: self.year,
            issue_area: self.issue_area,
            vlj: self.vlj,
        }
    }
}

/// Lowercased word tokens: maximal runs of alphanumerics plus internal
/// apostrophes/hyphens; everything else separates.
pub fn word_tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut current = String::new();
    for c in text.chars() {
        if c.is_alphanumeric() || c == '\'' || c == '’' || c == '-' {
            current.push(c);
        } else if !current.is_empty() {
            push_word(&mut out, &current);
            current.clear();
        }
    }
    if !current.is_empty() {
        push_word(&mut out, &current);
    }
    out
}

fn push_word(out: &mut Vec<String>, run: &str) {
    let trimmed = run.trim_matches(|c: char| !c.is_alphanumeric());
    if !trimmed.is_empty() {
        out.push(trimmed.to_lowercase());
    }
}

/// Tokenizes decision text: citation spans become placeholders, the rest is
/// word-tokenized, and each placeholder re-expands to one `Cite` token per
/// normalized citation (vocabulary misses map to the UNK index).
pub fn tokenize(
    text: &str,
    vocab: &CitationVocabulary,
    index: &AuthorityIndex,
    extractor: &CitationExtractor,
) -> Vec<Token> {
    let normalizer = Normalizer::for_extractor(index, extractor);
    let mut tokens = Vec::new();
    let mut cursor = 0usize;
    for raw in extractor.extract(text) {
        for word in word_tokenize(&text[cursor..raw.span.0]) {
            tokens.push(Token::Word(word));
        }
        for citation in normalizer.normalize(&raw) {
            tokens.push(Token::Cite(vocab.lookup(&citation.key)));
        }
        cursor = raw.span.1;
    }
    for word in word_tokenize(&text[cursor..]) {
        tokens.push(Token::Word(word));
    }
    tokens
}

pub fn read_corpus(path: &Path) -> Result<Vec<RawDocument>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_corpus_from(file, path)
}

pub fn read_corpus_from(reader: impl Read, path: &Path) -> Result<Vec<RawDocument>> {
    let mut docs = Vec::new();
    for line in BufReader::new(reader).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let doc: RawDocument = serde_json::from_str(&line).map_err(|e| Error::Json {
            path: path.to_path_buf(),
            source: e,
        })?;
        docs.push(doc);
    }
    Ok(docs)
}

#[derive(Serialize, Deserialize)]
struct CacheLine {
    id: String,
    tokens: Vec<Token>,
}

/// Writes the tokenized corpus cache: one `{"id": ..., "tokens": [...]}` line
/// per document, in the given order.
pub fn write_token_cache<'a>(
    mut w: impl Write,
    docs: impl IntoIterator<Item = (&'a str, &'a [Token])>,
) -> Result<u64> {
    let mut written = 0u64;
    for (id, tokens) in docs {
        let line = serde_json::to_string(&CacheLine {
            id: id.to_string(),
            tokens: tokens.to_vec(),
        })
        .expect("token cache serialization");
        w.write_all(line.as_bytes())
            .and_then(|_| w.write_all(b"\n"))
            .map_err(|e| Error::io("<token cache>", e))?;
        written += 1;
    }
    Ok(written)
}

pub fn read_token_cache(path: &Path) -> Result<HashMap<String, Vec<Token>>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = HashMap::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: CacheLine = serde_json::from_str(&line).map_err(|e| Error::Json {
            path: path.to_path_buf(),
            source: e,
        })?;
        out.insert(parsed.id, parsed.tokens);
    }
    Ok(out)
}

/// Joins the raw corpus (metadata) with the token cache into documents,
/// sorted by id. Documents missing from either side are skipped.
pub fn assemble_documents(
    raw: &[RawDocument],
    cache: &HashMap<String, Vec<Token>>,
) -> Vec<Document> {
    let mut docs: Vec<Document> = raw
        .iter()
        .filter_map(|r| {
            cache.get(&r.id).map(|tokens| Document {
                id: r.id.clone(),
                tokens: tokens.clone(),
                metadata: r.metadata(),
            })
        })
        .collect();
    docs.sort_by(|a, b| a.id.cmp(&b.id));
    docs
}
