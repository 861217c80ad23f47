#![allow(dead_code)] // shared by several integration-test crates

//! Synthetic corpus generation for integration tests.
//!
//! Documents are built from topic cliques: each topic owns a set of
//! citations (cases, statutes, regulations), every document cites a random
//! subset of one topic's clique, and each citation occurrence is immediately
//! preceded by that citation's ten signature terms. Context therefore
//! carries more signal than co-citation, co-citation more than global
//! popularity.

use rand::seq::index;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use citerec::corpus::RawDocument;

#[derive(Debug, Clone, Copy)]
pub struct SynthSpec {
    pub n_topics: usize,
    pub clique_size: usize,
    pub cites_per_doc: usize,
    pub n_docs: usize,
    pub seed: u64,
}

impl SynthSpec {
    pub fn large() -> Self {
        SynthSpec {
            n_topics: 8,
            clique_size: 14,
            cites_per_doc: 6,
            n_docs: 500,
            seed: 20_240_101,
        }
    }

    pub fn small() -> Self {
        SynthSpec {
            n_topics: 4,
            clique_size: 8,
            cites_per_doc: 5,
            n_docs: 120,
            seed: 77,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthCitation {
    /// How the citation appears in text.
    pub rendering: String,
    /// The normalized key it resolves to.
    pub key: String,
    /// Ten digit-free signature terms preceding every occurrence.
    pub signature: Vec<String>,
}

#[derive(Debug)]
pub struct SynthCorpus {
    pub docs: Vec<RawDocument>,
    pub authorities_csv: String,
    /// Citations per topic, topic-major.
    pub citations: Vec<Vec<SynthCitation>>,
}

/// Spells a small number with letters only (no digits anywhere in terms).
fn letters(mut n: usize) -> String {
    let mut out = String::new();
    loop {
        out.push((b'a' + (n % 26) as u8) as char);
        n /= 26;
        if n == 0 {
            break;
        }
    }
    out
}

const FILLERS: &[&str] = &[
    "veteran", "benefit", "claim", "record", "evidence", "hearing", "service",
    "connection", "disability", "rating", "decision", "appeal", "board",
    "regional", "office", "medical", "opinion", "examination", "treatment",
    "statement", "argument", "entitlement", "condition", "injury", "symptom",
    "diagnosis", "review", "remand", "grant", "denial",
];

fn make_citation(topic: usize, member: usize, csv: &mut String) -> SynthCitation {
    let signature: Vec<String> = (0..10)
        .map(|k| format!("sig{}{}{}", letters(topic), letters(member), letters(k)))
        .collect();
    let serial = topic * 100 + member;
    match (topic + member) % 3 {
        0 => {
            let name = format!(
                "{}{} v. Brown",
                letters(topic).to_uppercase(),
                letters(member)
            );
            let volume = 10 + topic;
            let page = 100 + member * 10;
            let id = format!("CLA#{:06}", 700_000 + serial);
            csv.push_str(&format!(
                "{volume},Vet. App.,{page},{},{id},{name}\n",
                page + 5
            ));
            SynthCitation {
                rendering: format!("{name}, {volume} Vet. App. {page} (1995)"),
                key: id,
                signature,
            }
        }
        1 => {
            let section = 500 + serial;
            SynthCitation {
                rendering: format!("38 U.S.C. § {section}"),
                key: format!("38 U.S.C. § {section}"),
                signature,
            }
        }
        _ => {
            let atom = format!("{}.{}", 3 + topic, 100 + member);
            SynthCitation {
                rendering: format!("38 C.F.R. § {atom}"),
                key: format!("38 C.F.R. § {atom}"),
                signature,
            }
        }
    }
}

pub fn generate(spec: SynthSpec) -> SynthCorpus {
    let mut csv = String::from("volume,reporter,first_page,last_page,authority_id,case_name\n");
    let citations: Vec<Vec<SynthCitation>> = (0..spec.n_topics)
        .map(|t| {
            (0..spec.clique_size)
                .map(|j| make_citation(t, j, &mut csv))
                .collect()
        })
        .collect();

    let mut docs = Vec::with_capacity(spec.n_docs);
    for i in 0..spec.n_docs {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed.wrapping_add(i as u64));
        let topic = i % spec.n_topics;
        let members = index::sample(&mut rng, spec.clique_size, spec.cites_per_doc);

        let mut text = String::from("The veteran appeals the decision of the regional office. ");
        for member in members {
            let citation = &citations[topic][member];
            for _ in 0..3 {
                text.push_str(FILLERS[rng.random_range(0..FILLERS.len())]);
                text.push(' ');
            }
            for term in &citation.signature {
                text.push_str(term);
                text.push(' ');
            }
            text.push_str(&citation.rendering);
            text.push_str(". ");
        }

        docs.push(RawDocument {
            id: format!("doc-{i:04}"),
            text,
            year: 2000 + topic as i32,
            issue_area: topic as i32,
            vlj: rng.random_range(0..6),
        });
    }

    SynthCorpus {
        docs,
        authorities_csv: csv,
        citations,
    }
}

pub fn corpus_jsonl(corpus: &SynthCorpus) -> String {
    let mut out = String::new();
    for doc in &corpus.docs {
        out.push_str(&serde_json::to_string(doc).expect("doc serialization"));
        out.push('\n');
    }
    out
}

/// Writes corpus.jsonl and authorities.csv into a directory.
pub fn write_inputs(dir: &std::path::Path, corpus: &SynthCorpus) {
    std::fs::create_dir_all(dir).unwrap();
    std::fs::write(dir.join("corpus.jsonl"), corpus_jsonl(corpus)).unwrap();
    std::fs::write(dir.join("authorities.csv"), &corpus.authorities_csv).unwrap();
}
