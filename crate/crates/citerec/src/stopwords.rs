//! The fixed English stopword list shipped with the crate
//! (`assets/stopwords.txt`, one lowercase term per line).

use std::collections::HashSet;

const STOPWORDS_TXT: &str = include_str!("../assets/stopwords.txt");

pub fn default_stopwords() -> HashSet<String> {
    STOPWORDS_TXT
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect()
}
