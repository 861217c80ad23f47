//! Pruned citation vocabulary.
//!
//! Distinct normalized citations seen at least `min_count` times in the
//! training stream become entries; everything pruned or unresolvable is
//! absorbed by the UNK entry. Entry order is descending count with ties
//! broken by ascending key, which makes vocabulary files reproducible.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use super::{CitationClass, NormalizedCitation};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VocabEntry {
    pub citation: NormalizedCitation,
    pub count: u64,
}

#[derive(Debug, Clone)]
pub struct CitationVocabulary {
    entries: Vec<VocabEntry>,
    index_of: HashMap<String, u32>,
    unk_index: u32,
}

impl CitationVocabulary {
    /// Counts the stream, prunes entries below `min_count` into UNK, and
    /// fixes the deterministic entry order.
    pub fn build(
        stream: impl IntoIterator<Item = NormalizedCitation>,
        min_count: u64,
    ) -> Result<Self> {
        if min_count < 1 {
            return Err(Error::invalid("min_count", "must be at least 1"));
        }
        let mut counts: BTreeMap<String, (CitationClass, u64)> = BTreeMap::new();
        let mut unk_count = 0u64;
        for citation in stream {
            if citation.is_unknown() {
                unk_count += 1;
            } else {
                let slot = counts.entry(citation.key).or_insert((citation.class, 0));
                slot.1 += 1;
            }
        }

        let mut entries: Vec<VocabEntry> = Vec::new();
        for (key, (class, count)) in counts {
            if count >= min_count {
                entries.push(VocabEntry {
                    citation: NormalizedCitation { class, key },
                    count,
                });
            } else {
                unk_count += count;
            }
        }
        entries.push(VocabEntry {
            citation: NormalizedCitation::unknown(),
            count: unk_count,
        });
        entries.sort_by(|a, b| {
            b.count
                .cmp(&a.count)
                .then_with(|| a.citation.key.cmp(&b.citation.key))
        });
        Ok(Self::from_entries(entries))
    }

    fn from_entries(entries: Vec<VocabEntry>) -> Self {
        let mut index_of = HashMap::with_capacity(entries.len());
        let mut unk_index = 0u32;
        for (i, e) in entries.iter().enumerate() {
            index_of.insert(e.citation.key.clone(), i as u32);
            if e.citation.is_unknown() {
                unk_index = i as u32;
            }
        }
        CitationVocabulary {
            entries,
            index_of,
            unk_index,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn unk_index(&self) -> u32 {
        self.unk_index
    }

    pub fn entries(&self) -> &[VocabEntry] {
        &self.entries
    }

    pub fn index_of(&self, key: &str) -> Option<u32> {
        self.index_of.get(key).copied()
    }

    /// Vocabulary lookup with the UNK fallback used during tokenization.
    pub fn lookup(&self, key: &str) -> u32 {
        self.index_of(key).unwrap_or(self.unk_index)
    }

    pub fn entry(&self, index: u32) -> &VocabEntry {
        &self.entries[index as usize]
    }

    pub fn key_of(&self, index: u32) -> &str {
        &self.entries[index as usize].citation.key
    }

    pub fn class_of(&self, index: u32) -> CitationClass {
        self.entries[index as usize].citation.class
    }

    pub fn count_of(&self, index: u32) -> u64 {
        self.entries[index as usize].count
    }

    /// Writes `index\tclass\tkey\tcount` rows in vocabulary order.
    pub fn write_tsv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "index\tclass\tkey\tcount")?;
        for (i, e) in self.entries.iter().enumerate() {
            writeln!(w, "{i}\t{}\t{}\t{}", e.citation.class.as_str(), e.citation.key, e.count)?;
        }
        Ok(())
    }

    pub fn read_tsv(reader: impl Read, path: &Path) -> Result<Self> {
        let mut lines = BufReader::new(reader).lines();
        let header = lines
            .next()
            .transpose()
            .map_err(|e| Error::io(path, e))?
            .unwrap_or_default();
        if header != "index\tclass\tkey\tcount" {
            return Err(Error::invalid(
                "vocabulary file",
                format!("{}: unexpected header {header:?}", path.display()),
            ));
        }
        let mut entries = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let parse_err = || {
                Error::invalid(
                    "vocabulary file",
                    format!("{}: bad row at line {}", path.display(), lineno + 2),
                )
            };
            if fields.len() != 4 {
                return Err(parse_err());
            }
            let index: usize = fields[0].parse().map_err(|_| parse_err())?;
            if index != entries.len() {
                return Err(parse_err());
            }
            let class = CitationClass::parse(fields[1]).ok_or_else(parse_err)?;
            let count: u64 = fields[3].parse().map_err(|_| parse_err())?;
            entries.push(VocabEntry {
                citation: NormalizedCitation {
                    class,
                    key: fields[2].to_string(),
                },
                count,
            });
        }
        if !entries.iter().any(|e| e.citation.is_unknown()) {
            return Err(Error::invalid(
                "vocabulary file",
                format!("{}: no UNK entry", path.display()),
            ));
        }
        Ok(Self::from_entries(entries))
    }
}
