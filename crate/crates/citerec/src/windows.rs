//! Context/forecast window instances for training and evaluating
//! context-based recommenders.
//!
//! A window instance anchors at a token offset: the context is up to `l`
//! tokens ending at `offset − 1`, and the prediction target is the first
//! non-UNK citation token in the forecast window `[offset, offset + w)`.
//! One offset is sampled uniformly per document per pass from all offsets
//! whose forecast window contains a citation; this under-samples citations
//! that rarely open a run of successive citations, which is accepted rather
//! than corrected.

use std::io::Write;

use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Document, Token};
use crate::error::{Error, Result};
use crate::hash::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    /// Context length `l` in tokens.
    pub context_len: usize,
    /// Forecast window length `w` in tokens.
    pub forecast_len: usize,
}

impl WindowSpec {
    pub fn new(context_len: usize, forecast_len: usize) -> Result<Self> {
        if context_len == 0 || forecast_len == 0 {
            return Err(Error::invalid("window spec", "lengths must be at least 1"));
        }
        Ok(WindowSpec {
            context_len,
            forecast_len,
        })
    }
}

impl Default for WindowSpec {
    /// The main-experiment setting: 256-token context, 128-token forecast.
    fn default() -> Self {
        WindowSpec {
            context_len: 256,
            forecast_len: 128,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowInstance {
    pub doc_id: String,
    pub offset: usize,
    pub context: Vec<Token>,
    pub target: u32,
    /// 1-based token distance from the forecast start to the target.
    pub distance: usize,
    pub metadata: crate::corpus::Metadata,
}

/// All offsets `o ∈ [1, |tokens| − 1]` whose forecast window `[o, o + w)`
/// contains a non-UNK citation token.
pub fn valid_offsets(doc: &Document, spec: WindowSpec, unk_index: u32) -> Vec<usize> {
    let n = doc.tokens.len();
    if n < 2 {
        return Vec::new();
    }
    // next_cite[o] = position of the first non-UNK citation at or after o.
    let mut next_cite = vec![usize::MAX; n + 1];
    for pos in (0..n).rev() {
        next_cite[pos] = match &doc.tokens[pos] {
            Token::Cite(c) if *c != unk_index => pos,
            _ => next_cite[pos + 1],
        };
    }
    (1..n)
        .filter(|&o| {
            let first = next_cite[o];
            first != usize::MAX && first < o + spec.forecast_len
        })
        .collect()
}

fn instance_at(doc: &Document, spec: WindowSpec, unk_index: u32, offset: usize) -> WindowInstance {
    let end = (offset + spec.forecast_len).min(doc.tokens.len());
    let (target_pos, target) = doc.tokens[offset..end]
        .iter()
        .enumerate()
        .find_map(|(i, t)| match t {
            Token::Cite(c) if *c != unk_index => Some((offset + i, *c)),
            _ => None,
        })
        .expect("offset came from valid_offsets");
    let context_start = offset.saturating_sub(spec.context_len);
    WindowInstance {
        doc_id: doc.id.clone(),
        offset,
        context: doc.tokens[context_start..offset].to_vec(),
        target,
        distance: target_pos - offset + 1,
        metadata: doc.metadata,
    }
}

/// RNG stream for one (seed, document, epoch) triple.
pub fn instance_rng(seed: u64, doc_id: &str, epoch: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(
        seed,
        &[b"window", doc_id.as_bytes(), &epoch.to_le_bytes()],
    ))
}

/// Uniformly samples one instance from the document's valid offsets; `None`
/// when the document has none.
pub fn sample_instance(
    doc: &Document,
    spec: WindowSpec,
    unk_index: u32,
    rng: &mut impl Rng,
) -> Option<WindowInstance> {
    let offsets = valid_offsets(doc, spec, unk_index);
    if offsets.is_empty() {
        return None;
    }
    let offset = offsets[rng.random_range(0..offsets.len())];
    Some(instance_at(doc, spec, unk_index, offset))
}

/// One instance per offset, in offset order; drives exhaustive evaluation.
pub fn all_instances(doc: &Document, spec: WindowSpec, unk_index: u32) -> Vec<WindowInstance> {
    valid_offsets(doc, spec, unk_index)
        .into_iter()
        .map(|o| instance_at(doc, spec, unk_index, o))
        .collect()
}

#[derive(Serialize)]
struct ExportLine<'a> {
    doc_id: &'a str,
    offset: usize,
    context: &'a [Token],
    target: u32,
    distance: usize,
    year: i32,
    issue_area: i32,
    vlj: i32,
}

/// Writes one sampled instance per document per epoch as JSONL (documents
/// without a citation in reach are skipped). Returns the number of lines
/// written; on a sink failure the error reports the partial count.
pub fn export_instances(
    docs: &[Document],
    spec: WindowSpec,
    unk_index: u32,
    epochs: u64,
    seed: u64,
    sink: &mut impl Write,
) -> Result<u64> {
    let mut written = 0u64;
    for epoch in 0..epochs {
        for doc in docs {
            let mut rng = instance_rng(seed, &doc.id, epoch);
            let Some(inst) = sample_instance(doc, spec, unk_index, &mut rng) else {
                continue;
            };
            let line = serde_json::to_string(&ExportLine {
                doc_id: &inst.doc_id,
                offset: inst.offset,
                context: &inst.context,
                target: inst.target,
                distance: inst.distance,
                year: inst.metadata.year,
                issue_area: inst.metadata.issue_area,
                vlj: inst.metadata.vlj,
            })
            .expect("window instance serialization");
            sink.write_all(line.as_bytes())
                .and_then(|_| sink.write_all(b"\n"))
                .map_err(|e| Error::Invalid {
                    what: "window export sink",
                    why: format!("{e} after {written} lines"),
                })?;
            written += 1;
        }
    }
    Ok(written)
}
