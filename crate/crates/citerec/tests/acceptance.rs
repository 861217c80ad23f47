//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//!
//! Reference implementations here are deliberately naive (dense vectors,
//! literal formulas, independent scans) and share no code with the library
//! paths they check.

mod common;

use std::collections::{HashMap, HashSet};
use std::path::Path;
use std::process::Command;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use citerec::cf::{CfModel, WeightScheme};
use citerec::citation::{
    extract_citations, normalize, AuthorityIndex, AuthorityRecord, CitationExtractor,
    CitationVocabulary, NormalizedCitation, Normalizer,
};
use citerec::context::{build_context_bank, build_text_vocab, context_vector, ContextBank, TextVocabulary};
use citerec::corpus::{split_corpus, tokenize, Document, Metadata, SplitRatios, Token};
use citerec::eval::{
    build_report, distance_bins, evaluate_citation_list, evaluate_context, fold_stats,
    EvalInstance, RecallReport,
};
use citerec::fusion::{
    fuse, pairwise_accuracy, pairwise_transform, train_linear_svm, FusionWeights, MinMax,
};
use citerec::hash::derive_seed;
use citerec::ranked::RankedList;
use citerec::recommender::{ContextModel, MajorityModel};
use citerec::sparse::SparseVector;
use citerec::stopwords::default_stopwords;
use citerec::windows::{instance_rng, sample_instance, valid_offsets, WindowSpec};

use common::{generate, write_inputs, SynthCorpus, SynthSpec};

/// Prints the criterion verdict even when the test panics mid-way.
struct Criterion {
    label: &'static str,
    passed: bool,
}

impl Criterion {
    fn new(label: &'static str) -> Self {
        Criterion {
            label,
            passed: false,
        }
    }

    fn pass(mut self) {
        self.passed = true;
    }
}

impl Drop for Criterion {
    fn drop(&mut self) {
        println!(
            "criterion {}: {}",
            self.label,
            if self.passed { "PASS" } else { "FAIL" }
        );
    }
}

// ---------------------------------------------------------------------------
// 1. Normalization golden suite
// ---------------------------------------------------------------------------

#[test]
fn criterion_1_normalization_golden() {
    let c = Criterion::new("1 normalization-golden");

    let index = AuthorityIndex::from_records(vec![AuthorityRecord {
        volume: 8,
        reporter: "Vet. App.".to_string(),
        first_page: 208,
        last_page: 211,
        authority_id: "CLA#6456776".to_string(),
        case_name: "Degmetich v. Brown".to_string(),
    }])
    .unwrap();

    let raws = extract_citations("Degmetich v. Brown, 8 Vet. App. 208 (1995)");
    assert_eq!(raws.len(), 1);
    let norm = normalize(&raws[0], &index);
    assert_eq!(norm.len(), 1);
    assert_eq!(norm[0].key, "CLA#6456776");

    let raws = extract_citations("18 U.S.C. §§ 46(a), 46(b)");
    assert_eq!(raws.len(), 1);
    let atoms: Vec<String> = normalize(&raws[0], &index)
        .into_iter()
        .map(|n| n.key)
        .collect();
    assert_eq!(atoms, vec!["18 U.S.C. § 46(a)", "18 U.S.C. § 46(b)"]);

    // A whitelisted reporter with no matching authority record.
    let raws = extract_citations("Nosuch v. Brown, 99 Vet. App. 123 (2001)");
    assert_eq!(raws.len(), 1);
    let norm = normalize(&raws[0], &index);
    assert_eq!(norm, vec![NormalizedCitation::unknown()]);

    c.pass();
}

// ---------------------------------------------------------------------------
// 2. CF oracle equivalence
// ---------------------------------------------------------------------------

fn naive_dense_vector(
    citations: &[u32],
    dims: usize,
    scheme: WeightScheme,
    idf: &[f64],
) -> Vec<f64> {
    let mut counts = vec![0u64; dims];
    for &c in citations {
        counts[c as usize] += 1;
    }
    (0..dims)
        .map(|i| match scheme {
            WeightScheme::Binary => {
                if counts[i] > 0 {
                    1.0
                } else {
                    0.0
                }
            }
            WeightScheme::Tf => counts[i] as f64,
            WeightScheme::TfIdf => counts[i] as f64 * idf[i],
        })
        .collect()
}

fn naive_dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn naive_norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Literal scoring: cosine against every training document, top-K by
/// (similarity, ascending id), similarity-weighted average of neighbor
/// weights per candidate.
fn naive_cf_recommend(
    docs: &[(String, Vec<u32>)],
    dims: usize,
    unk: u32,
    scheme: WeightScheme,
    k: usize,
    partial: &[u32],
    top_n: usize,
) -> Vec<(u32, f64)> {
    let mut sorted: Vec<(String, Vec<u32>)> = docs.to_vec();
    sorted.sort_by(|a, b| a.0.cmp(&b.0));

    let mut df = vec![0u64; dims];
    for (_, cites) in &sorted {
        let distinct: HashSet<u32> = cites.iter().copied().collect();
        for c in distinct {
            df[c as usize] += 1;
        }
    }
    let n = sorted.len() as f64;
    let idf: Vec<f64> = df
        .iter()
        .map(|&d| if d == 0 { 0.0 } else { (n / d as f64).ln() })
        .collect();

    let dense: Vec<Vec<f64>> = sorted
        .iter()
        .map(|(_, cites)| naive_dense_vector(cites, dims, scheme, &idf))
        .collect();
    let query = naive_dense_vector(partial, dims, scheme, &idf);
    if naive_norm(&query) == 0.0 {
        return Vec::new();
    }

    let mut sims: Vec<(usize, f64)> = dense
        .iter()
        .enumerate()
        .map(|(pos, v)| {
            let denom = naive_norm(&query) * naive_norm(v);
            let sim = if denom == 0.0 {
                0.0
            } else {
                naive_dot(&query, v) / denom
            };
            (pos, sim)
        })
        .collect();
    sims.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    sims.truncate(k);

    let denominator: f64 = sims.iter().map(|&(_, s)| s).sum();
    if denominator == 0.0 {
        return Vec::new();
    }
    let exclude: HashSet<u32> = partial.iter().copied().collect();
    let mut scored = Vec::new();
    for c in 0..dims as u32 {
        if c == unk || exclude.contains(&c) {
            continue;
        }
        let numerator: f64 = sims.iter().map(|&(pos, s)| s * dense[pos][c as usize]).sum();
        if numerator > 0.0 {
            scored.push((c, numerator / denominator));
        }
    }
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    scored.truncate(top_n);
    scored
}

#[test]
fn criterion_2_cf_oracle_equivalence() {
    let c = Criterion::new("2 cf-oracle-equivalence");
    let mut rng = ChaCha8Rng::seed_from_u64(0xCF0C);
    let schemes = [WeightScheme::Binary, WeightScheme::Tf, WeightScheme::TfIdf];
    let k_choices = [1usize, 5, 50];

    for corpus_idx in 0..20 {
        let dims = rng.random_range(5..=50);
        let n_docs = rng.random_range(3..=100);
        let unk = rng.random_range(0..dims) as u32;
        let scheme = schemes[corpus_idx % 3];
        let k = k_choices[(corpus_idx / 3) % 3];

        let docs: Vec<(String, Vec<u32>)> = (0..n_docs)
            .map(|i| {
                let len = rng.random_range(0..=12);
                let cites: Vec<u32> =
                    (0..len).map(|_| rng.random_range(0..dims) as u32).collect();
                (format!("doc-{i:03}"), cites)
            })
            .collect();
        let model = CfModel::build(docs.clone(), dims, unk, scheme, k).unwrap();

        for _ in 0..3 {
            let qlen = rng.random_range(0..=6);
            let partial: Vec<u32> = (0..qlen).map(|_| rng.random_range(0..dims) as u32).collect();
            let expected = naive_cf_recommend(&docs, dims, unk, scheme, k, &partial, dims);
            let got = model.recommend(&partial, dims);

            assert_eq!(
                got.items().len(),
                expected.len(),
                "candidate set size differs (corpus {corpus_idx}, partial {partial:?})"
            );
            for (g, e) in got.items().iter().zip(&expected) {
                assert_eq!(g.0, e.0, "ranking differs (corpus {corpus_idx})");
                assert!(
                    (g.1 - e.1).abs() <= 1e-9,
                    "score differs: {} vs {} (corpus {corpus_idx})",
                    g.1,
                    e.1
                );
            }
        }
    }
    c.pass();
}

// ---------------------------------------------------------------------------
// 3. Context-model oracle equivalence
// ---------------------------------------------------------------------------

fn dense_of(v: &SparseVector, dims: usize) -> Vec<f64> {
    let mut out = vec![0.0; dims];
    for &(i, w) in v.pairs() {
        out[i as usize] = w;
    }
    out
}

#[test]
fn criterion_3_context_oracle_equivalence() {
    let c = Criterion::new("3 context-oracle-equivalence");
    let mut rng = ChaCha8Rng::seed_from_u64(0xC047E);
    let pool: Vec<String> = (0..24).map(|i| format!("term{}", (b'a' + i) as char)).collect();

    for bank_idx in 0..20 {
        let n_cites = rng.random_range(1..=50);
        let unk = n_cites as u32;

        // One training document per citation, several occurrences each, with
        // random word windows.
        let mut docs = Vec::new();
        for cite in 0..n_cites {
            let n_ctx = rng.random_range(1..=20);
            let mut tokens = Vec::new();
            for _ in 0..n_ctx {
                for _ in 0..rng.random_range(1..=8) {
                    tokens.push(Token::Word(pool[rng.random_range(0..pool.len())].clone()));
                }
                tokens.push(Token::Cite(cite as u32));
            }
            docs.push(Document {
                id: format!("doc-{cite:03}"),
                tokens,
                metadata: Metadata {
                    year: 2000,
                    issue_area: 0,
                    vlj: 0,
                },
            });
        }
        let tv = build_text_vocab(&docs, n_cites + 1, 25_000, 1, &HashSet::new());
        let bank = build_context_bank(&docs, &tv, unk, 10, 100, bank_idx as u64);

        for _ in 0..3 {
            let window: Vec<Token> = (0..rng.random_range(0..=10))
                .map(|_| Token::Word(pool[rng.random_range(0..pool.len())].clone()))
                .collect();
            let query = context_vector(&window, &tv);

            // Brute force: mean of squared dense dot products per citation.
            let expected: Vec<(u32, f64)> = if query.is_zero() {
                Vec::new()
            } else {
                let dq = dense_of(&query, tv.dims());
                let mut scored: Vec<(u32, f64)> = bank
                    .citations()
                    .map(|cite| {
                        let contexts = bank.contexts(cite).unwrap();
                        let sum: f64 = contexts
                            .iter()
                            .map(|b| {
                                let d = naive_dot(&dq, &dense_of(b, tv.dims()));
                                d * d
                            })
                            .sum();
                        (cite, sum / contexts.len() as f64)
                    })
                    .collect();
                scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
                scored
            };

            let got = bank.recommend(&query, bank.n_citations());
            assert_eq!(got.items().len(), expected.len(), "bank {bank_idx}");
            for (g, e) in got.items().iter().zip(&expected) {
                assert_eq!(g.0, e.0, "ranking differs (bank {bank_idx})");
                assert!((g.1 - e.1).abs() <= 1e-9, "score differs (bank {bank_idx})");
            }
        }
    }
    c.pass();
}

// ---------------------------------------------------------------------------
// Shared in-process pipeline over the synthetic corpus
// ---------------------------------------------------------------------------

struct Pipeline {
    vocab: CitationVocabulary,
    docs: Vec<Document>,
    train_ids: Vec<String>,
    test_ids: Vec<String>,
    fold_of: HashMap<String, usize>,
}

fn build_pipeline(corpus: &SynthCorpus, min_count: u64) -> Pipeline {
    let index = AuthorityIndex::from_csv_reader(
        corpus.authorities_csv.as_bytes(),
        Path::new("authorities.csv"),
    )
    .unwrap();
    let extractor = CitationExtractor::with_default_reporters();
    let normalizer = Normalizer::new(&index);

    let ids: Vec<String> = corpus.docs.iter().map(|d| d.id.clone()).collect();
    let split = split_corpus(&ids, SplitRatios::default(), 5).unwrap();
    let train_set: HashSet<&str> = split.train.iter().map(String::as_str).collect();

    let mut stream = Vec::new();
    for doc in corpus.docs.iter().filter(|d| train_set.contains(d.id.as_str())) {
        for raw in extractor.extract(&doc.text) {
            stream.extend(normalizer.normalize(&raw));
        }
    }
    let vocab = CitationVocabulary::build(stream, min_count).unwrap();

    let docs: Vec<Document> = corpus
        .docs
        .iter()
        .map(|d| Document {
            id: d.id.clone(),
            tokens: tokenize(&d.text, &vocab, &index, &extractor),
            metadata: d.metadata(),
        })
        .collect();

    let mut fold_of = HashMap::new();
    for (fold, fold_ids) in split.test_folds.iter().enumerate() {
        for id in fold_ids {
            fold_of.insert(id.clone(), fold);
        }
    }

    Pipeline {
        vocab,
        docs,
        train_ids: split.train,
        test_ids: split.test,
        fold_of,
    }
}

impl Pipeline {
    fn train_docs(&self) -> Vec<Document> {
        let set: HashSet<&str> = self.train_ids.iter().map(String::as_str).collect();
        self.docs
            .iter()
            .filter(|d| set.contains(d.id.as_str()))
            .cloned()
            .collect()
    }

    fn test_docs(&self) -> Vec<Document> {
        let set: HashSet<&str> = self.test_ids.iter().map(String::as_str).collect();
        self.docs
            .iter()
            .filter(|d| set.contains(d.id.as_str()))
            .cloned()
            .collect()
    }
}

// ---------------------------------------------------------------------------
// 4. Unit-norm invariant
// ---------------------------------------------------------------------------

#[test]
fn criterion_4_unit_norm_invariant() {
    let c = Criterion::new("4 unit-norm-invariant");
    let corpus = generate(SynthSpec::small());
    let pipeline = build_pipeline(&corpus, 3);
    let train = pipeline.train_docs();
    let tv = build_text_vocab(&train, pipeline.vocab.len(), 25_000, 3, &default_stopwords());
    let bank = build_context_bank(&train, &tv, pipeline.vocab.unk_index(), 50, 100, 11);

    let mut checked = 0usize;
    for cite in bank.citations().collect::<Vec<_>>() {
        for v in bank.contexts(cite).unwrap() {
            let norm = v.norm();
            assert!(
                norm == 0.0 || (norm - 1.0).abs() <= 1e-9,
                "stored context vector has norm {norm}"
            );
            checked += 1;
        }
    }
    assert!(checked > 100, "bank too small to be meaningful ({checked})");
    c.pass();
}

// ---------------------------------------------------------------------------
// 5. Synthetic-corpus ordering
// ---------------------------------------------------------------------------

#[test]
fn criterion_5_synthetic_corpus_ordering() {
    let c = Criterion::new("5 synthetic-corpus-ordering");
    let corpus = generate(SynthSpec::large());
    let pipeline = build_pipeline(&corpus, 5);
    let vocab = &pipeline.vocab;
    let train = pipeline.train_docs();
    let test = pipeline.test_docs();
    let ks = [1usize, 5, 20];

    let cf = CfModel::build(
        train
            .iter()
            .map(|d| (d.id.clone(), d.citation_sequence()))
            .collect(),
        vocab.len(),
        vocab.unk_index(),
        WeightScheme::Binary,
        50,
    )
    .unwrap();
    let (cf_report, _) =
        evaluate_citation_list(&cf, &test, &pipeline.fold_of, vocab, &ks, 0);

    let majority = MajorityModel::new(vocab);
    let (majority_report, _) =
        evaluate_citation_list(&majority, &test, &pipeline.fold_of, vocab, &ks, 0);

    let tv = build_text_vocab(&train, vocab.len(), 25_000, 5, &default_stopwords());
    let bank = build_context_bank(&train, &tv, vocab.unk_index(), 50, 100, 13);
    let context_model = ContextModel {
        bank,
        text_vocab: tv,
    };
    let spec = WindowSpec::new(50, 1).unwrap();
    let (context_report, _) = evaluate_context(
        &context_model,
        &test,
        &pipeline.fold_of,
        vocab,
        spec,
        &ks,
        21,
        true,
    );

    let text_r5 = context_report.instance_mean[&5];
    let cf_r5 = cf_report.instance_mean[&5];
    let majority_r5 = majority_report.instance_mean[&5];
    println!(
        "recall@5: text-similarity={text_r5:.3} cf={cf_r5:.3} majority={majority_r5:.3}"
    );
    assert!(
        text_r5 >= cf_r5 + 0.10,
        "text-similarity ({text_r5:.3}) must lead cf ({cf_r5:.3}) by ≥ 0.10"
    );
    assert!(
        cf_r5 >= majority_r5 + 0.10,
        "cf ({cf_r5:.3}) must lead majority ({majority_r5:.3}) by ≥ 0.10"
    );
    c.pass();
}

// ---------------------------------------------------------------------------
// 6. svmRank property
// ---------------------------------------------------------------------------

#[test]
fn criterion_6_svmrank_property() {
    let c = Criterion::new("6 svmrank-property");
    let mut rng = ChaCha8Rng::seed_from_u64(0x57A4);
    let true_w = [2.0, 1.0, -0.5, 0.25];

    // 100 instances × 2 negatives = 200 separable pairs over 4 columns.
    let mut instances = Vec::new();
    for _ in 0..100 {
        let positive: Vec<f64> = (0..4).map(|_| rng.random_range(0.0..1.0)).collect();
        let mut negatives = Vec::new();
        while negatives.len() < 2 {
            let candidate: Vec<f64> = (0..4).map(|_| rng.random_range(0.0..1.0)).collect();
            let margin: f64 = positive
                .iter()
                .zip(&candidate)
                .zip(&true_w)
                .map(|((p, n), w)| w * (p - n))
                .sum();
            if margin > 0.1 {
                negatives.push(candidate);
            }
        }
        instances.push((positive, negatives));
    }
    let data = pairwise_transform(&instances).unwrap();
    assert_eq!(data.rows.len(), 400);
    let columns = vec!["base".into(), "f1".into(), "f2".into(), "f3".into()];
    let weights = train_linear_svm(&data, columns, 1.0, 100, 99).unwrap();
    let accuracy = pairwise_accuracy(&weights, &data);
    println!("svm pairwise accuracy on separable data: {accuracy:.4}");
    assert!(accuracy >= 0.95, "accuracy {accuracy} below 0.95");

    // Identity fusion reproduces the base ranking exactly.
    let base = RankedList::from_scores(
        (0..20).map(|i| (i as u32, rng.random_range(0.0..1.0))).collect(),
        20,
    );
    let rows: Vec<Vec<f64>> = base
        .items()
        .iter()
        .map(|&(_, s)| vec![s, rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)])
        .collect();
    let identity = FusionWeights {
        columns: vec!["base".into(), "f1".into(), "f2".into()],
        w: vec![1.0, 0.0, 0.0],
        scalers: vec![
            MinMax { min: 0.0, max: 1.0 },
            MinMax { min: 0.0, max: 1.0 },
            MinMax { min: 0.0, max: 1.0 },
        ],
    };
    let fused = fuse(&base, &rows, &identity, 20).unwrap();
    let base_order: Vec<u32> = base.items().iter().map(|&(i, _)| i).collect();
    let fused_order: Vec<u32> = fused.items().iter().map(|&(i, _)| i).collect();
    assert_eq!(base_order, fused_order);
    c.pass();
}

// ---------------------------------------------------------------------------
// 7. Evaluation arithmetic
// ---------------------------------------------------------------------------

#[test]
fn criterion_7_evaluation_arithmetic() {
    let c = Criterion::new("7 evaluation-arithmetic");

    // fold_stats against hand-computed fixtures at 1e-12.
    let (mean, stderr) = fold_stats(&[0.5, 0.5, 0.5, 0.5, 0.5, 0.5]);
    assert!((mean - 0.5).abs() < 1e-12 && stderr.abs() < 1e-12);
    let (mean, stderr) = fold_stats(&[0.0, 1.0]);
    assert!((mean - 0.5).abs() < 1e-12 && (stderr - 0.5).abs() < 1e-12);
    let (mean, stderr) = fold_stats(&[0.2, 0.4, 0.6]);
    assert!((mean - 0.4).abs() < 1e-12);
    assert!((stderr - 0.2 / 3.0f64.sqrt()).abs() < 1e-12);

    // Distance bins for w = 128 are exactly the eight 16-wide ranges.
    assert_eq!(
        distance_bins(128),
        vec![
            (1, 16),
            (17, 32),
            (33, 48),
            (49, 64),
            (65, 80),
            (81, 96),
            (97, 112),
            (113, 128)
        ]
    );

    // Recall monotone in k on every fold of a generated report.
    let mut rng = ChaCha8Rng::seed_from_u64(0xE7A1);
    let instances: Vec<EvalInstance> = (0..500)
        .map(|i| {
            let rank = if rng.random_range(0..4) == 0 {
                None
            } else {
                Some(rng.random_range(1..40))
            };
            EvalInstance {
                target: i as u32 % 50,
                rank,
                fold: i % 6,
                class: citerec::citation::CitationClass::Case,
                year: 2000,
                distance: Some(rng.random_range(1..=128)),
                target_train_count: 5,
            }
        })
        .collect();
    let report: RecallReport = build_report(&instances, &[1, 5, 20]);
    for fi in 0..report.folds.len() {
        assert!(report.per_fold_recall[&1][fi] <= report.per_fold_recall[&5][fi]);
        assert!(report.per_fold_recall[&5][fi] <= report.per_fold_recall[&20][fi]);
    }
    assert!(report.instance_mean[&1] <= report.instance_mean[&5]);
    assert!(report.instance_mean[&5] <= report.instance_mean[&20]);
    c.pass();
}

// ---------------------------------------------------------------------------
// 8. Pipeline determinism (full CLI, two runs, byte-identical artifacts)
// ---------------------------------------------------------------------------

fn run_cli(config: &Path, args: &[&str]) {
    let exe = env!("CARGO_BIN_EXE_citerec");
    let output = Command::new(exe)
        .arg("--config")
        .arg(config)
        .args(args)
        .output()
        .expect("spawn citerec");
    assert!(
        output.status.success(),
        "citerec {args:?} failed:\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
}

fn pipeline_config(dir: &Path) -> serde_json::Value {
    serde_json::json!({
        "corpus": dir.join("corpus.jsonl"),
        "authorities": dir.join("authorities.csv"),
        "artifacts_dir": dir.join("artifacts"),
        "seed": 1234,
        "min_count": 3,
        "cf": {"scheme": "binary", "k": 10},
        "context": {"max_terms": 2000, "min_df": 3, "context_len": 50, "cap": 100},
        "fusion": {"alpha": 1.0, "svm_c": 1.0, "epochs": 30, "sample_docs": 40, "pool": 20},
        "windows": {"context_len": 64, "forecast_len": 32, "epochs": 2}
    })
}

fn run_full_pipeline(dir: &Path, corpus: &SynthCorpus) -> Vec<(String, Vec<u8>)> {
    write_inputs(dir, corpus);
    let config_path = dir.join("config.json");
    std::fs::write(
        &config_path,
        serde_json::to_string_pretty(&pipeline_config(dir)).unwrap(),
    )
    .unwrap();

    run_cli(&config_path, &["split"]);
    run_cli(&config_path, &["vocab"]);
    run_cli(&config_path, &["ingest"]);
    run_cli(&config_path, &["train-cf"]);
    run_cli(&config_path, &["train-context"]);
    run_cli(&config_path, &["train-fusion", "--model", "cf"]);
    run_cli(&config_path, &["train-fusion", "--model", "context"]);
    run_cli(&config_path, &["evaluate", "--model", "majority"]);
    run_cli(&config_path, &["evaluate", "--model", "cf"]);
    run_cli(
        &config_path,
        &["evaluate", "--model", "cf", "--features", "year,issue_area,vlj"],
    );
    run_cli(&config_path, &["evaluate", "--model", "context"]);
    run_cli(
        &config_path,
        &["evaluate", "--model", "context", "--features", "year,issue_area,vlj"],
    );
    run_cli(&config_path, &["export-windows", "--split", "train"]);

    // Collect every artifact under artifacts/<confighash>/, relative path +
    // bytes, sorted for comparison.
    let artifacts = dir.join("artifacts");
    let hash_dirs: Vec<_> = std::fs::read_dir(&artifacts).unwrap().collect();
    assert_eq!(hash_dirs.len(), 1, "expected a single config-hash directory");
    let run_dir = hash_dirs[0].as_ref().unwrap().path();

    let mut files = Vec::new();
    let mut stack = vec![run_dir.clone()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(&run_dir).unwrap().to_string_lossy().to_string();
                files.push((rel, std::fs::read(&path).unwrap()));
            }
        }
    }
    files.sort_by(|a, b| a.0.cmp(&b.0));
    files
}

#[test]
fn criterion_8_pipeline_determinism() {
    let c = Criterion::new("8 pipeline-determinism");
    let corpus = generate(SynthSpec::small());

    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let files_a = run_full_pipeline(dir_a.path(), &corpus);
    let files_b = run_full_pipeline(dir_b.path(), &corpus);

    assert!(!files_a.is_empty());
    assert_eq!(
        files_a.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>(),
        files_b.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>(),
        "artifact sets differ"
    );
    for ((name_a, bytes_a), (_, bytes_b)) in files_a.iter().zip(&files_b) {
        assert_eq!(bytes_a, bytes_b, "artifact {name_a} differs between runs");
    }
    println!(
        "pipeline determinism: {} artifacts byte-identical across runs",
        files_a.len()
    );
    c.pass();
}

// ---------------------------------------------------------------------------
// 9. Window sampler invariants
// ---------------------------------------------------------------------------

#[test]
fn criterion_9_window_sampler() {
    let c = Criterion::new("9 window-sampler");
    let unk = 9u32;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5A3);

    let docs: Vec<Document> = (0..120)
        .map(|i| {
            let len = rng.random_range(30..120);
            let tokens: Vec<Token> = (0..len)
                .map(|_| {
                    if rng.random_range(0..10) == 0 {
                        Token::Cite(rng.random_range(0..10) as u32) // may be UNK
                    } else {
                        Token::Word("w".to_string())
                    }
                })
                .collect();
            Document {
                id: format!("doc-{i:03}"),
                tokens,
                metadata: Metadata {
                    year: 2000,
                    issue_area: 0,
                    vlj: 0,
                },
            }
        })
        .collect();

    let spec = WindowSpec::new(16, 8).unwrap();
    let mut draws = 0usize;
    for epoch in 0..100u64 {
        for doc in &docs {
            let mut stream = instance_rng(31, &doc.id, epoch);
            let Some(inst) = sample_instance(doc, spec, unk, &mut stream) else {
                continue;
            };
            draws += 1;
            // Independent scan of the forecast window.
            let end = (inst.offset + spec.forecast_len).min(doc.tokens.len());
            let first = doc.tokens[inst.offset..end]
                .iter()
                .enumerate()
                .find_map(|(i, t)| match t {
                    Token::Cite(x) if *x != unk => Some((inst.offset + i, *x)),
                    _ => None,
                })
                .expect("sampled instance must have a citation in its window");
            assert_eq!(first.1, inst.target);
            assert_eq!(first.0 - inst.offset + 1, inst.distance);
            assert!(inst.distance >= 1 && inst.distance <= spec.forecast_len);
            assert!(inst.context.len() <= spec.context_len);
            let expected_start = inst.offset.saturating_sub(spec.context_len);
            assert_eq!(inst.context, doc.tokens[expected_start..inst.offset].to_vec());
        }
    }
    assert!(draws >= 10_000, "only {draws} draws");

    // Uniformity over a document with exactly three valid offsets.
    let tri = Document {
        id: "tri".to_string(),
        tokens: vec![
            Token::Word("a".to_string()),
            Token::Cite(1),
            Token::Word("b".to_string()),
            Token::Cite(2),
        ],
        metadata: Metadata {
            year: 2000,
            issue_area: 0,
            vlj: 0,
        },
    };
    let tri_spec = WindowSpec::new(4, 2).unwrap();
    let offsets = valid_offsets(&tri, tri_spec, unk);
    assert_eq!(offsets, vec![1, 2, 3]);

    let n = 12_000u64;
    let mut counts = HashMap::new();
    for epoch in 0..n {
        let mut stream = instance_rng(8, &tri.id, epoch);
        let inst = sample_instance(&tri, tri_spec, unk, &mut stream).unwrap();
        *counts.entry(inst.offset).or_insert(0u64) += 1;
    }
    let p = 1.0 / 3.0;
    let sigma = (n as f64 * p * (1.0 - p)).sqrt();
    for &offset in &offsets {
        let count = *counts.get(&offset).unwrap_or(&0) as f64;
        let expected = n as f64 * p;
        assert!(
            (count - expected).abs() <= 3.0 * sigma,
            "offset {offset} drawn {count} times, expected {expected} ± {:.1}",
            3.0 * sigma
        );
    }
    println!("window sampler: {draws} invariant draws, offset counts {counts:?}");
    c.pass();
}

// ---------------------------------------------------------------------------
// Cross-check: persisted artifacts round-trip through their loaders
// ---------------------------------------------------------------------------

#[test]
fn artifact_round_trips() {
    let corpus = generate(SynthSpec::small());
    let pipeline = build_pipeline(&corpus, 3);
    let train = pipeline.train_docs();
    let dir = tempfile::tempdir().unwrap();

    let tv = build_text_vocab(&train, pipeline.vocab.len(), 2000, 3, &default_stopwords());
    let tv_path = dir.path().join("text-vocab.tsv");
    {
        let mut buf = Vec::new();
        tv.write_tsv(&mut buf, &pipeline.vocab).unwrap();
        std::fs::write(&tv_path, &buf).unwrap();
        let reloaded = TextVocabulary::read_tsv(
            std::fs::File::open(&tv_path).unwrap(),
            &tv_path,
            &pipeline.vocab,
        )
        .unwrap();
        assert_eq!(reloaded.dims(), tv.dims());
        let mut buf2 = Vec::new();
        reloaded.write_tsv(&mut buf2, &pipeline.vocab).unwrap();
        assert_eq!(buf, buf2, "text vocabulary TSV not stable");
    }

    let bank = build_context_bank(&train, &tv, pipeline.vocab.unk_index(), 50, 100, 3);
    let bank_path = dir.path().join("context-bank.json");
    bank.save_json(&bank_path).unwrap();
    let bank2 = ContextBank::load_json(&bank_path).unwrap();
    let query = context_vector(
        &[Token::Word("veteran".to_string()), Token::Word("sigaaa".to_string())],
        &tv,
    );
    assert_eq!(
        bank.recommend(&query, 10),
        bank2.recommend(&query, 10),
        "bank behavior changed across persistence"
    );

    let cf = CfModel::build(
        train
            .iter()
            .map(|d| (d.id.clone(), d.citation_sequence()))
            .collect(),
        pipeline.vocab.len(),
        pipeline.vocab.unk_index(),
        WeightScheme::Binary,
        10,
    )
    .unwrap();
    let cf_path = dir.path().join("cf-model.json");
    cf.save_json(&cf_path).unwrap();
    let cf2 = CfModel::load_json(&cf_path).unwrap();
    let seq = train[0].citation_sequence();
    assert_eq!(cf.recommend(&seq[..2], 10), cf2.recommend(&seq[..2], 10));
}

// ---------------------------------------------------------------------------
// Cross-check: derive_seed streams differ across documents and epochs
// ---------------------------------------------------------------------------

#[test]
fn rng_streams_are_distinct() {
    let a = derive_seed(1, &[b"window", b"doc-1", &0u64.to_le_bytes()]);
    let b = derive_seed(1, &[b"window", b"doc-2", &0u64.to_le_bytes()]);
    let c = derive_seed(1, &[b"window", b"doc-1", &1u64.to_le_bytes()]);
    assert_ne!(a, b);
    assert_ne!(a, c);
}
