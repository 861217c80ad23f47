//! Authority list backing case-citation normalization.
//!
//! Records identify cases by volume, reporter, and the first/last page
//! interval they occupy; `(volume, reporter, first_page)` is unique.

use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::normalize::canonical_reporter;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthorityRecord {
    pub volume: u32,
    pub reporter: String,
    pub first_page: u32,
    pub last_page: u32,
    pub authority_id: String,
    pub case_name: String,
}

#[derive(Debug, Default)]
pub struct AuthorityIndex {
    by_volume_reporter: HashMap<(u32, String), Vec<AuthorityRecord>>,
    len: usize,
}

impl AuthorityIndex {
    pub fn empty() -> Self {
        AuthorityIndex::default()
    }

    pub fn from_records(records: Vec<AuthorityRecord>) -> Result<Self> {
        let mut by_volume_reporter: HashMap<(u32, String), Vec<AuthorityRecord>> = HashMap::new();
        let len = records.len();
        for mut rec in records {
            if rec.last_page < rec.first_page {
                return Err(Error::invalid(
                    "authority record",
                    format!(
                        "{}: last_page {} < first_page {}",
                        rec.authority_id, rec.last_page, rec.first_page
                    ),
                ));
            }
            rec.reporter = canonical_reporter(&rec.reporter);
            let key = (rec.volume, rec.reporter.clone());
            let bucket = by_volume_reporter.entry(key).or_default();
            if bucket.iter().any(|r| r.first_page == rec.first_page) {
                return Err(Error::invalid(
                    "authority record",
                    format!(
                        "duplicate (volume, reporter, first_page) = ({}, {}, {})",
                        rec.volume, rec.reporter, rec.first_page
                    ),
                ));
            }
            bucket.push(rec);
        }
        for bucket in by_volume_reporter.values_mut() {
            bucket.sort_by_key(|r| r.first_page);
        }
        Ok(AuthorityIndex {
            by_volume_reporter,
            len,
        })
    }

    /// Loads `volume,reporter,first_page,last_page,authority_id,case_name` CSV.
    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_reader(file, path)
    }

    pub fn from_csv_reader(reader: impl Read, path: &Path) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let expected = ["volume", "reporter", "first_page", "last_page", "authority_id", "case_name"];
        {
            let headers = rdr.headers().map_err(|e| Error::Csv {
                path: path.to_path_buf(),
                message: e.to_string(),
            })?;
            let got: Vec<&str> = headers.iter().collect();
            if got != expected {
                return Err(Error::Csv {
                    path: path.to_path_buf(),
                    message: format!("header {:?}, expected {:?}", got, expected),
                });
            }
        }
        let mut records = Vec::new();
        for row in rdr.deserialize::<CsvRow>() {
            let row = row.map_err(|e| Error::Csv {
                path: path.to_path_buf(),
                message: e.to_string(),
            })?;
            records.push(AuthorityRecord {
                volume: row.volume,
                reporter: row.reporter,
                first_page: row.first_page,
                last_page: row.last_page,
                authority_id: row.authority_id,
                case_name: row.case_name,
            });
        }
        Self::from_records(records)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Resolves a cited page against the `[first_page, last_page]` intervals
    /// of `(volume, reporter)`. An exact first-page match wins; among interval
    /// matches the record starting nearest before the page wins (table pages
    /// can make several short dispositions share one physical page).
    pub fn lookup(&self, volume: u32, reporter: &str, page: u32) -> Option<&AuthorityRecord> {
        let bucket = self
            .by_volume_reporter
            .get(&(volume, canonical_reporter(reporter)))?;
        if let Some(exact) = bucket.iter().find(|r| r.first_page == page) {
            return Some(exact);
        }
        bucket
            .iter()
            .filter(|r| r.first_page <= page && page <= r.last_page)
            .max_by_key(|r| r.first_page)
    }
}

#[derive(Deserialize)]
struct CsvRow {
    volume: u32,
    reporter: String,
    first_page: u32,
    last_page: u32,
    authority_id: String,
    case_name: String,
}
