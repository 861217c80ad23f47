//! Regex-based citation span extraction.
//!
//! Three pattern families are recognized:
//!
//! - case:       `<Name> v. <Name>, <vol> <Reporter> <page> [(year)]`
//! - statute:    `<chapter> U.S.C. <§-tail>`
//! - regulation: `<chapter> C.F.R. <§-tail>`
//!
//! The §-tail is one or more section atoms separated by commas and/or "and".
//! Short-form citations ("id.", "supra") are ordinary text and never matched.

use std::sync::OnceLock;

use regex::Regex;

/// Default reporter whitelist for the case pattern.
pub const DEFAULT_REPORTERS: &[&str] = &["Vet. App.", "F.3d"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum KindHint {
    CaseLike,
    UscLike,
    CfrLike,
}

impl KindHint {
    pub fn as_str(self) -> &'static str {
        match self {
            KindHint::CaseLike => "case_like",
            KindHint::UscLike => "usc_like",
            KindHint::CfrLike => "cfr_like",
        }
    }
}

/// A matched citation span. `text` always equals the source substring at
/// `span`; spans produced for one document are disjoint and sorted by start.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawCitation {
    pub text: String,
    pub span: (usize, usize),
    pub kind_hint: KindHint,
}

pub struct CitationExtractor {
    case_re: Regex,
    anchor_re: Regex,
    reporters: Vec<String>,
}

/// Anchored check for the start of a statute/regulation citation, used to
/// stop a §-tail from swallowing the chapter of the next citation
/// ("... § 46(b) and 38 C.F.R. § 3.156(a)").
fn anchor_start_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^\d+\s+(U\.S\.C\.|C\.F\.R\.)").unwrap())
}

/// Pattern for one reporter name in canonical form ("Vet. App."): matching
/// tolerates missing or extra whitespace after internal periods ("Vet.App.",
/// "Vet.  App.").
fn reporter_pattern(canonical: &str) -> String {
    let mut out = String::new();
    let chars: Vec<char> = canonical.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        match chars[i] {
            '.' if chars.get(i + 1) == Some(&' ') => {
                out.push_str(r"\.\s*");
                i += 2;
            }
            ' ' => {
                out.push_str(r"\s+");
                i += 1;
            }
            c => {
                out.push_str(&regex::escape(&c.to_string()));
                i += 1;
            }
        }
    }
    out
}

/// Party-name pattern: capitalized first token, then further name tokens.
/// Periods are allowed inside a token ("U.S") and once at a name's end
/// ("Servs."), but a period followed by whitespace ends the name, so a
/// sentence boundary before the citation is never swallowed.
fn name_pattern() -> String {
    let token = r"[\w'’&-]+(?:\.[\w'’&-]+)*";
    format!(r"[A-Z][\w'’&-]*(?:\.[\w'’&-]+)*(?:\s+{token})*\.?")
}

impl CitationExtractor {
    /// Builds an extractor for a reporter whitelist given in canonical form.
    pub fn new(reporters: &[&str]) -> Self {
        let rep_alt = reporters
            .iter()
            .map(|r| reporter_pattern(r))
            .collect::<Vec<_>>()
            .join("|");
        let name = name_pattern();
        let case = format!(
            r"{name}\s+v\.\s+{name},\s+\d+\s+(?:{rep_alt})\s+\d+(?:\s*\(\d{{4}}\))?"
        );
        CitationExtractor {
            case_re: Regex::new(&case).expect("case citation pattern"),
            anchor_re: Regex::new(r"(\d+)\s+(U\.S\.C\.|C\.F\.R\.)").expect("anchor pattern"),
            reporters: reporters.iter().map(|r| r.to_string()).collect(),
        }
    }

    pub fn with_default_reporters() -> Self {
        CitationExtractor::new(DEFAULT_REPORTERS)
    }

    /// The reporter whitelist this extractor was built with.
    pub fn reporters(&self) -> Vec<&str> {
        self.reporters.iter().map(String::as_str).collect()
    }

    /// Returns all matches of the three pattern families, left-to-right,
    /// longest-match-wins on overlap. Unmatched text yields no entries.
    pub fn extract(&self, text: &str) -> Vec<RawCitation> {
        let mut candidates: Vec<RawCitation> = Vec::new();

        for m in self.case_re.find_iter(text) {
            candidates.push(RawCitation {
                text: m.as_str().to_string(),
                span: (m.start(), m.end()),
                kind_hint: KindHint::CaseLike,
            });
        }

        for caps in self.anchor_re.captures_iter(text) {
            let whole = caps.get(0).unwrap();
            let anchor = caps.get(2).unwrap().as_str();
            if let Some((atoms, end)) = scan_tail(text, whole.end()) {
                if atoms.is_empty() {
                    continue;
                }
                let kind = if anchor == "U.S.C." {
                    KindHint::UscLike
                } else {
                    KindHint::CfrLike
                };
                candidates.push(RawCitation {
                    text: text[whole.start()..end].to_string(),
                    span: (whole.start(), end),
                    kind_hint: kind,
                });
            }
        }

        // Left-to-right sweep; at equal starts the longer candidate wins.
        candidates.sort_by(|a, b| {
            a.span
                .0
                .cmp(&b.span.0)
                .then(b.span.1.cmp(&a.span.1))
        });
        let mut out: Vec<RawCitation> = Vec::new();
        let mut last_end = 0usize;
        for c in candidates {
            if c.span.0 >= last_end {
                last_end = c.span.1;
                out.push(c);
            }
        }
        out
    }

    /// The case pattern with capture groups, for normalization.
    pub(crate) fn case_parts_re(reporters: &[&str]) -> Regex {
        let rep_alt = reporters
            .iter()
            .map(|r| reporter_pattern(r))
            .collect::<Vec<_>>()
            .join("|");
        let name = name_pattern();
        let case = format!(
            r"{name}\s+v\.\s+{name},\s+(?P<vol>\d+)\s+(?P<rep>{rep_alt})\s+(?P<page>\d+)"
        );
        Regex::new(&case).expect("case parts pattern")
    }
}

/// Extracts citations with the default reporter whitelist.
pub fn extract_citations(text: &str) -> Vec<RawCitation> {
    static DEFAULT: OnceLock<CitationExtractor> = OnceLock::new();
    DEFAULT
        .get_or_init(CitationExtractor::with_default_reporters)
        .extract(text)
}

/// Scans a §-tail starting at `pos` (just past the `U.S.C.`/`C.F.R.` anchor).
/// Returns the section atoms and the byte offset one past the last atom, or
/// `None` when no section marker follows the anchor.
///
/// Each atom is returned in canonical form: internal whitespace removed,
/// sub-paragraph parentheses preserved, trailing four-digit year
/// parentheticals and trailing punctuation dropped.
pub(crate) fn scan_tail(text: &str, pos: usize) -> Option<(Vec<String>, usize)> {
    let mut i = skip_ws(text, pos);
    let (j, found) = eat_section_markers(text, i);
    if !found {
        return None;
    }
    i = skip_ws(text, j);

    let (first, end) = scan_atom(text, i)?;
    let mut atoms = vec![first];
    let mut last_end = end;
    i = end;

    loop {
        let mut j = skip_ws(text, i);
        let mut consumed_sep = false;
        if text[j..].starts_with(',') {
            j = skip_ws(text, j + 1);
            consumed_sep = true;
        }
        if word_at(text, j, "and") {
            j = skip_ws(text, j + 3);
            consumed_sep = true;
        }
        if !consumed_sep {
            break;
        }
        let (j2, _) = eat_section_markers(text, j);
        let j2 = skip_ws(text, j2);
        // A bare chapter number followed by an anchor starts a new citation.
        if anchor_start_re().is_match(&text[j2..]) {
            break;
        }
        match scan_atom(text, j2) {
            Some((atom, end)) => {
                atoms.push(atom);
                i = end;
                last_end = end;
            }
            None => break,
        }
    }
    Some((atoms, last_end))
}

fn skip_ws(text: &str, mut i: usize) -> usize {
    let bytes = text.as_bytes();
    while i < bytes.len() && (bytes[i] as char).is_ascii_whitespace() {
        i += 1;
    }
    i
}

fn word_at(text: &str, i: usize, word: &str) -> bool {
    text[i..].starts_with(word)
        && !text[i + word.len()..]
            .chars()
            .next()
            .map(|c| c.is_alphanumeric())
            .unwrap_or(false)
}

/// Consumes zero or more `§` signs (with interleaved whitespace); the flag
/// reports whether at least one was seen.
fn eat_section_markers(text: &str, mut i: usize) -> (usize, bool) {
    let mut found = false;
    loop {
        let j = skip_ws(text, i);
        if text[j..].starts_with('§') {
            i = j + '§'.len_utf8();
            found = true;
        } else {
            return (if found { i } else { j }, found);
        }
    }
}

/// Scans one section atom ("5108", "3.156(a)", "5102-5103A"). Atoms start
/// with an alphanumeric character; parentheses are consumed only while
/// balanced, and a whitespace-separated non-year parenthetical is folded in
/// ("3.156 (a)" → "3.156(a)").
fn scan_atom(text: &str, start: usize) -> Option<(String, usize)> {
    let bytes = text.as_bytes();
    if start >= bytes.len() || !(bytes[start] as char).is_ascii_alphanumeric() {
        return None;
    }
    let mut i = start;
    let mut depth = 0usize;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let take = match c {
            c if c.is_ascii_alphanumeric() => true,
            '.' | '-' => true,
            '(' => {
                depth += 1;
                true
            }
            ')' => {
                if depth == 0 {
                    false
                } else {
                    depth -= 1;
                    true
                }
            }
            _ => false,
        };
        if !take {
            break;
        }
        i += 1;
    }
    let mut atom = text[start..i].to_string();

    // Fold whitespace-separated sub-paragraph parentheticals into the atom,
    // but stop at a four-digit year parenthetical.
    loop {
        let j = skip_ws(text, i);
        if !text[j..].starts_with('(') {
            break;
        }
        let Some(close) = text[j..].find(')') else {
            break;
        };
        let inner = &text[j + 1..j + close];
        if inner.len() == 4 && inner.bytes().all(|b| b.is_ascii_digit()) {
            break;
        }
        if inner.is_empty() || !inner.bytes().all(|b| b.is_ascii_alphanumeric()) {
            break;
        }
        atom.push('(');
        atom.push_str(inner);
        atom.push(')');
        i = j + close + 1;
    }

    let atom = canonical_atom(&atom);
    if atom.is_empty() {
        None
    } else {
        Some((atom, i))
    }
}

/// Canonicalizes a section atom: strips whitespace, trailing punctuation and
/// trailing four-digit year parentheticals; sub-paragraph parentheses stay.
pub(crate) fn canonical_atom(atom: &str) -> String {
    let mut s: String = atom.chars().filter(|c| !c.is_whitespace()).collect();
    loop {
        let t = s.trim_end_matches(['.', ',', '-']).to_string();
        let t = strip_trailing_year(&t);
        if t == s {
            return s;
        }
        s = t;
    }
}

fn strip_trailing_year(s: &str) -> String {
    if let Some(open) = s.rfind('(') {
        if s.ends_with(')') {
            let inner = &s[open + 1..s.len() - 1];
            if inner.len() == 4 && inner.bytes().all(|b| b.is_ascii_digit()) {
                return s[..open].to_string();
            }
        }
    }
    s.to_string()
}
