//! Normalization of raw citation spans into canonical identities.
//!
//! Case spans resolve through the authority index to an authority id.
//! Statute/regulation spans break into one normalized citation per section
//! atom. Every failure degrades to the unknown sentinel; normalization never
//! errors.

use std::sync::OnceLock;

use regex::Regex;

use super::authority::AuthorityIndex;
use super::extract::{scan_tail, CitationExtractor, KindHint, RawCitation, DEFAULT_REPORTERS};
use super::{CitationClass, NormalizedCitation};

/// Canonical reporter form: single spaces, and a space after any period that
/// precedes a letter ("Vet.App." → "Vet. App."; "F.3d" unchanged).
pub fn canonical_reporter(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len() + 2);
    let chars: Vec<char> = raw.trim().chars().collect();
    for (i, &c) in chars.iter().enumerate() {
        if c.is_whitespace() {
            if !out.ends_with(' ') && !out.is_empty() {
                out.push(' ');
            }
            continue;
        }
        out.push(c);
        if c == '.' {
            if let Some(&next) = chars.get(i + 1) {
                if next.is_alphabetic() {
                    out.push(' ');
                }
            }
        }
    }
    while out.ends_with(' ') {
        out.pop();
    }
    out
}

pub struct Normalizer<'a> {
    index: &'a AuthorityIndex,
    case_parts: Regex,
}

fn default_case_parts() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| CitationExtractor::case_parts_re(DEFAULT_REPORTERS))
}

impl<'a> Normalizer<'a> {
    pub fn new(index: &'a AuthorityIndex) -> Self {
        Normalizer {
            index,
            case_parts: default_case_parts().clone(),
        }
    }

    /// Normalizer for a custom reporter whitelist; must match the whitelist
    /// the extractor ran with, or case spans will not re-parse.
    pub fn with_reporters(index: &'a AuthorityIndex, reporters: &[&str]) -> Self {
        Normalizer {
            index,
            case_parts: CitationExtractor::case_parts_re(reporters),
        }
    }

    /// Normalizer matching an extractor's reporter whitelist.
    pub fn for_extractor(index: &'a AuthorityIndex, extractor: &CitationExtractor) -> Self {
        Normalizer::with_reporters(index, &extractor.reporters())
    }

    pub fn normalize(&self, raw: &RawCitation) -> Vec<NormalizedCitation> {
        match raw.kind_hint {
            KindHint::CaseLike => vec![self.normalize_case(&raw.text)],
            KindHint::UscLike => self.normalize_sections(&raw.text, CitationClass::Statute, "U.S.C."),
            KindHint::CfrLike => {
                self.normalize_sections(&raw.text, CitationClass::Regulation, "C.F.R.")
            }
        }
    }

    fn normalize_case(&self, text: &str) -> NormalizedCitation {
        let Some(caps) = self.case_parts.captures(text) else {
            return NormalizedCitation::unknown();
        };
        let (Ok(volume), Ok(page)) = (
            caps["vol"].parse::<u32>(),
            caps["page"].parse::<u32>(),
        ) else {
            return NormalizedCitation::unknown();
        };
        match self.index.lookup(volume, &caps["rep"], page) {
            Some(record) => NormalizedCitation {
                class: CitationClass::Case,
                key: record.authority_id.clone(),
            },
            None => NormalizedCitation::unknown(),
        }
    }

    fn normalize_sections(
        &self,
        text: &str,
        class: CitationClass,
        anchor: &str,
    ) -> Vec<NormalizedCitation> {
        let Some(anchor_pos) = text.find(anchor) else {
            return vec![NormalizedCitation::unknown()];
        };
        let chapter = text[..anchor_pos].trim();
        if chapter.is_empty() || !chapter.bytes().all(|b| b.is_ascii_digit()) {
            return vec![NormalizedCitation::unknown()];
        }
        let Some((atoms, _)) = scan_tail(text, anchor_pos + anchor.len()) else {
            return vec![NormalizedCitation::unknown()];
        };
        if atoms.is_empty() {
            return vec![NormalizedCitation::unknown()];
        }
        atoms
            .into_iter()
            .map(|atom| {
                if atom.is_empty() {
                    NormalizedCitation::unknown()
                } else {
                    NormalizedCitation {
                        class,
                        key: format!("{chapter} {anchor} § {atom}"),
                    }
                }
            })
            .collect()
    }
}

/// Normalizes one raw citation against an authority index.
pub fn normalize(raw: &RawCitation, index: &AuthorityIndex) -> Vec<NormalizedCitation> {
    Normalizer::new(index).normalize(raw)
}
