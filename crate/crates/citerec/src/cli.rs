//! Subcommand implementations for the `citerec` binary.
//!
//! Pipeline order: `split` → `vocab` → `ingest` → `train-*` → `evaluate` /
//! `recommend` / `export-windows`. Every command is deterministic given the
//! same configuration and seed, and all artifacts live under
//! `<artifacts_dir>/<confighash>/` so outputs from different configurations
//! never mix.

use std::collections::{HashMap, HashSet};
use std::io::{BufWriter, Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::artifact;
use crate::cf::{CfModel, WeightScheme};
use crate::citation::{
    AuthorityIndex, CitationExtractor, CitationVocabulary, Normalizer,
};
use crate::config::Config;
use crate::context::{
    build_context_bank, build_text_vocab, context_vector, ContextBank, TextVocabulary,
};
use crate::corpus::{
    assemble_documents, read_corpus, read_token_cache, split_corpus, tokenize, write_token_cache,
    CorpusSplit, Document, Metadata, Token,
};
use crate::error::{Error, Result};
use crate::eval::{breakdowns, evaluate_citation_list, evaluate_context, RecallReport};
use crate::fusion::{
    pairwise_accuracy, pairwise_transform, train_linear_svm, FeatureScoreTable, FusionWeights,
    MetaFeature,
};
use crate::hash::derive_seed;
use crate::ranked::RankedList;
use crate::recommender::{
    CitationListRecommender, ContextModel, ContextRecommender, FusedCitationList, FusedContext,
    MajorityModel,
};
use crate::stopwords::default_stopwords;
use crate::windows::{export_instances, WindowSpec};

#[derive(Parser)]
#[command(name = "citerec", version, about = "Legal citation recommendation pipeline")]
pub struct Cli {
    /// JSON configuration file; flags override file values, file values
    /// override defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub corpus: Option<PathBuf>,
    #[arg(long, global = true)]
    pub authorities: Option<PathBuf>,
    #[arg(long, global = true)]
    pub artifacts_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Deterministic train/validation/test split with 6 test folds.
    Split,
    /// Build the pruned citation vocabulary from training documents.
    Vocab(VocabArgs),
    /// Tokenize the corpus and cache citation-indexed tokens.
    Ingest,
    /// Train the collaborative-filtering recommender.
    TrainCf(TrainCfArgs),
    /// Train the text-similarity recommender (text vocabulary + context bank).
    TrainContext(TrainContextArgs),
    /// Learn metadata fusion weights for a base recommender.
    TrainFusion(TrainFusionArgs),
    /// Evaluate a recommender on the test folds.
    Evaluate(EvaluateArgs),
    /// One-shot recommendation from a citation list or a text snippet.
    Recommend(RecommendArgs),
    /// Export sampled context/forecast window instances as JSONL.
    ExportWindows(ExportWindowsArgs),
}

#[derive(Args)]
pub struct VocabArgs {
    /// Pruning threshold: citations seen fewer times become UNK.
    #[arg(long)]
    pub min_count: Option<u64>,
}

#[derive(Args)]
pub struct TrainCfArgs {
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeArg>,
    #[arg(long)]
    pub k: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum SchemeArg {
    Binary,
    Tf,
    Tfidf,
}

impl From<SchemeArg> for WeightScheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Binary => WeightScheme::Binary,
            SchemeArg::Tf => WeightScheme::Tf,
            SchemeArg::Tfidf => WeightScheme::TfIdf,
        }
    }
}

#[derive(Args)]
pub struct TrainContextArgs {
    #[arg(long)]
    pub max_terms: Option<usize>,
    #[arg(long)]
    pub min_df: Option<u64>,
    #[arg(long)]
    pub context_len: Option<usize>,
    #[arg(long)]
    pub cap: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
pub enum ModelArg {
    Cf,
    Context,
    Majority,
}

impl ModelArg {
    fn as_str(self) -> &'static str {
        match self {
            ModelArg::Cf => "cf",
            ModelArg::Context => "context",
            ModelArg::Majority => "majority",
        }
    }
}

#[derive(Args)]
pub struct TrainFusionArgs {
    #[arg(long, value_enum)]
    pub model: ModelArg,
    /// Comma-separated subset of year,issue_area,vlj (default: config).
    #[arg(long)]
    pub features: Option<String>,
    #[arg(long)]
    pub sample_docs: Option<usize>,
    #[arg(long)]
    pub svm_c: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub pool: Option<usize>,
}

#[derive(Args)]
pub struct EvaluateArgs {
    #[arg(long, value_enum)]
    pub model: ModelArg,
    /// Rerank with fusion weights for these features (requires train-fusion).
    #[arg(long)]
    pub features: Option<String>,
    /// Comma-separated recall cutoffs, e.g. `1,5,20`.
    #[arg(long, short)]
    pub k: Option<String>,
    /// Forecast window for the context protocol.
    #[arg(long)]
    pub w: Option<usize>,
    /// Evaluate every valid offset instead of one sample per document.
    #[arg(long)]
    pub exhaustive_offsets: bool,
    /// Cap citation-list instances per document (0 = all).
    #[arg(long)]
    pub max_instances_per_doc: Option<usize>,
}

#[derive(Args)]
pub struct RecommendArgs {
    #[arg(long, value_enum)]
    pub model: ModelArg,
    /// Comma-separated citation keys forming the partial list (cf model).
    #[arg(long)]
    pub citations: Option<String>,
    /// Query text file (context model); stdin when omitted.
    #[arg(long)]
    pub text_file: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    pub top_n: usize,
    /// Rerank with fusion weights for these features; requires the metadata
    /// flags below.
    #[arg(long)]
    pub features: Option<String>,
    #[arg(long)]
    pub year: Option<i32>,
    #[arg(long)]
    pub issue_area: Option<i32>,
    #[arg(long)]
    pub vlj: Option<i32>,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum SplitArg {
    Train,
    Validation,
    Test,
}

#[derive(Args)]
pub struct ExportWindowsArgs {
    #[arg(long, value_enum, default_value = "train")]
    pub split: SplitArg,
    #[arg(long)]
    pub epochs: Option<u64>,
    #[arg(long)]
    pub context_len: Option<usize>,
    #[arg(long)]
    pub forecast_len: Option<usize>,
}

pub fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(p) = cli.corpus {
        cfg.corpus = p;
    }
    if let Some(p) = cli.authorities {
        cfg.authorities = p;
    }
    if let Some(p) = cli.artifacts_dir {
        cfg.artifacts_dir = p;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }

    match cli.command {
        Command::Split => cmd_split(&cfg),
        Command::Vocab(args) => {
            if let Some(m) = args.min_count {
                cfg.min_count = m;
            }
            cfg.validate()?;
            cmd_vocab(&cfg)
        }
        Command::Ingest => cmd_ingest(&cfg),
        Command::TrainCf(args) => {
            if let Some(s) = args.scheme {
                cfg.cf.scheme = s.into();
            }
            if let Some(k) = args.k {
                cfg.cf.k = k;
            }
            cfg.validate()?;
            cmd_train_cf(&cfg)
        }
        Command::TrainContext(args) => {
            if let Some(v) = args.max_terms {
                cfg.context.max_terms = v;
            }
            if let Some(v) = args.min_df {
                cfg.context.min_df = v;
            }
            if let Some(v) = args.context_len {
                cfg.context.context_len = v;
            }
            if let Some(v) = args.cap {
                cfg.context.cap = v;
            }
            cfg.validate()?;
            cmd_train_context(&cfg)
        }
        Command::TrainFusion(args) => {
            if let Some(v) = args.sample_docs {
                cfg.fusion.sample_docs = v;
            }
            if let Some(v) = args.svm_c {
                cfg.fusion.svm_c = v;
            }
            if let Some(v) = args.epochs {
                cfg.fusion.epochs = v;
            }
            if let Some(v) = args.alpha {
                cfg.fusion.alpha = v;
            }
            if let Some(v) = args.pool {
                cfg.fusion.pool = v;
            }
            cfg.validate()?;
            let features = parse_features(args.features.as_deref(), &cfg)?;
            cmd_train_fusion(&cfg, args.model, &features)
        }
        Command::Evaluate(args) => {
            if let Some(w) = args.w {
                cfg.eval.forecast_len = w;
            }
            if let Some(ks) = &args.k {
                cfg.eval.ks = parse_ks(ks)?;
            }
            if args.exhaustive_offsets {
                cfg.eval.exhaustive_offsets = true;
            }
            if let Some(m) = args.max_instances_per_doc {
                cfg.eval.max_instances_per_doc = m;
            }
            cfg.validate()?;
            let features = match &args.features {
                Some(_) => Some(parse_features(args.features.as_deref(), &cfg)?),
                None => None,
            };
            cmd_evaluate(&cfg, args.model, features.as_deref())
        }
        Command::Recommend(args) => cmd_recommend(&cfg, args),
        Command::ExportWindows(args) => {
            if let Some(v) = args.epochs {
                cfg.windows.epochs = v;
            }
            if let Some(v) = args.context_len {
                cfg.windows.context_len = v;
            }
            if let Some(v) = args.forecast_len {
                cfg.windows.forecast_len = v;
            }
            cfg.validate()?;
            cmd_export_windows(&cfg, args.split)
        }
    }
}

fn parse_ks(s: &str) -> Result<Vec<usize>> {
    let ks: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Config(format!("cannot parse k list {s:?}")))?;
    if ks.is_empty() || ks.contains(&0) {
        return Err(Error::Config("k values must be positive".into()));
    }
    Ok(ks)
}

fn parse_features(arg: Option<&str>, cfg: &Config) -> Result<Vec<MetaFeature>> {
    let features = match arg {
        None => cfg.fusion.features.clone(),
        Some(s) => s
            .split(',')
            .map(|p| {
                let p = p.trim();
                MetaFeature::parse(p)
                    .ok_or_else(|| Error::Config(format!("unknown feature {p:?}")))
            })
            .collect::<Result<Vec<_>>>()?,
    };
    if features.is_empty() {
        return Err(Error::Config("feature list is empty".into()));
    }
    Ok(features)
}

fn feature_suffix(features: &[MetaFeature]) -> String {
    features
        .iter()
        .map(|f| f.as_str())
        .collect::<Vec<_>>()
        .join("+")
}

// ---------------------------------------------------------------------------
// Artifact names and loading
// ---------------------------------------------------------------------------

const SPLIT_FORMAT: &str = "citerec.split";

#[derive(Serialize, Deserialize)]
struct SplitFile {
    format: String,
    version: u32,
    split: CorpusSplit,
}

fn load_split(cfg: &Config) -> Result<CorpusSplit> {
    let path = cfg.path("split.json");
    let file: SplitFile = artifact::load_json(&path, "split")?;
    artifact::check_format(&path, SPLIT_FORMAT, &file.format)?;
    Ok(file.split)
}

fn load_vocab(cfg: &Config) -> Result<CitationVocabulary> {
    let path = cfg.path("vocab.tsv");
    let file = artifact::open_required(&path, "vocab")?;
    CitationVocabulary::read_tsv(file, &path)
}

fn load_documents(cfg: &Config) -> Result<Vec<Document>> {
    let raw = read_corpus(&cfg.corpus)?;
    let cache_path = cfg.path("tokens.jsonl");
    artifact::open_required(&cache_path, "ingest")?;
    let cache = read_token_cache(&cache_path)?;
    Ok(assemble_documents(&raw, &cache))
}

fn load_text_vocab(cfg: &Config, vocab: &CitationVocabulary) -> Result<TextVocabulary> {
    let path = cfg.path("text-vocab.tsv");
    let file = artifact::open_required(&path, "train-context")?;
    TextVocabulary::read_tsv(file, &path, vocab)
}

fn select_docs<'a>(docs: &'a [Document], ids: &[String]) -> Vec<&'a Document> {
    let wanted: HashSet<&str> = ids.iter().map(String::as_str).collect();
    docs.iter().filter(|d| wanted.contains(d.id.as_str())).collect()
}

fn extractor_for(cfg: &Config) -> CitationExtractor {
    let names: Vec<&str> = cfg.reporters.iter().map(String::as_str).collect();
    CitationExtractor::new(&names)
}

fn normalizer_for<'a>(cfg: &Config, index: &'a AuthorityIndex) -> Normalizer<'a> {
    let names: Vec<&str> = cfg.reporters.iter().map(String::as_str).collect();
    Normalizer::with_reporters(index, &names)
}

fn fold_map(split: &CorpusSplit) -> HashMap<String, usize> {
    let mut map = HashMap::new();
    for (fold, ids) in split.test_folds.iter().enumerate() {
        for id in ids {
            map.insert(id.clone(), fold);
        }
    }
    map
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

fn cmd_split(cfg: &Config) -> Result<()> {
    let raw = read_corpus(&cfg.corpus)?;
    let ids: Vec<String> = raw.iter().map(|d| d.id.clone()).collect();
    let split = split_corpus(&ids, cfg.split, cfg.seed)?;
    let path = cfg.path("split.json");
    artifact::save_json(&path, &SplitFile {
        format: SPLIT_FORMAT.to_string(),
        version: 1,
        split: split.clone(),
    })?;
    println!(
        "split train={} validation={} test={} folds={} -> {}",
        split.train.len(),
        split.validation.len(),
        split.test.len(),
        split.test_folds.len(),
        path.display()
    );
    Ok(())
}

fn cmd_vocab(cfg: &Config) -> Result<()> {
    let raw = read_corpus(&cfg.corpus)?;
    let index = AuthorityIndex::from_csv_path(&cfg.authorities)?;
    let split = load_split(cfg)?;
    let train_ids: HashSet<&str> = split.train.iter().map(String::as_str).collect();
    let extractor = extractor_for(cfg);
    let normalizer = normalizer_for(cfg, &index);

    let mut stream = Vec::new();
    for doc in raw.iter().filter(|d| train_ids.contains(d.id.as_str())) {
        for raw_cite in extractor.extract(&doc.text) {
            stream.extend(normalizer.normalize(&raw_cite));
        }
    }
    let total = stream.len();
    let vocab = CitationVocabulary::build(stream, cfg.min_count)?;

    let path = cfg.path("vocab.tsv");
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut out = BufWriter::new(std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?);
    vocab.write_tsv(&mut out).map_err(|e| Error::io(&path, e))?;
    out.flush().map_err(|e| Error::io(&path, e))?;
    println!(
        "vocabulary entries={} (from {} citation occurrences, min_count={}) -> {}",
        vocab.len(),
        total,
        cfg.min_count,
        path.display()
    );
    Ok(())
}

fn cmd_ingest(cfg: &Config) -> Result<()> {
    let raw = read_corpus(&cfg.corpus)?;
    let index = AuthorityIndex::from_csv_path(&cfg.authorities)?;
    let vocab = load_vocab(cfg)?;
    let extractor = extractor_for(cfg);

    let mut tokenized: Vec<(String, Vec<Token>)> = Vec::with_capacity(raw.len());
    for doc in &raw {
        let tokens = tokenize(&doc.text, &vocab, &index, &extractor);
        if tokens.is_empty() {
            eprintln!("warning: document {} produced no tokens, skipping", doc.id);
            continue;
        }
        tokenized.push((doc.id.clone(), tokens));
    }

    let path = cfg.path("tokens.jsonl");
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut out = BufWriter::new(std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?);
    let written = write_token_cache(
        &mut out,
        tokenized.iter().map(|(id, t)| (id.as_str(), t.as_slice())),
    )?;
    out.flush().map_err(|e| Error::io(&path, e))?;
    println!("ingested documents={written} -> {}", path.display());
    Ok(())
}

fn train_documents(cfg: &Config) -> Result<(Vec<Document>, CorpusSplit, CitationVocabulary)> {
    let vocab = load_vocab(cfg)?;
    let split = load_split(cfg)?;
    let docs = load_documents(cfg)?;
    let train: Vec<Document> = select_docs(&docs, &split.train)
        .into_iter()
        .cloned()
        .collect();
    Ok((train, split, vocab))
}

fn cmd_train_cf(cfg: &Config) -> Result<()> {
    let (train, _, vocab) = train_documents(cfg)?;
    let docs: Vec<(String, Vec<u32>)> = train
        .iter()
        .map(|d| (d.id.clone(), d.citation_sequence()))
        .collect();
    let model = CfModel::build(
        docs,
        vocab.len(),
        vocab.unk_index(),
        cfg.cf.scheme,
        cfg.cf.k,
    )?;
    let path = cfg.path("cf-model.json");
    model.save_json(&path)?;
    println!(
        "cf model scheme={} k={} docs={} -> {}",
        cfg.cf.scheme.as_str(),
        cfg.cf.k,
        model.n_docs(),
        path.display()
    );
    Ok(())
}

fn cmd_train_context(cfg: &Config) -> Result<()> {
    let (train, _, vocab) = train_documents(cfg)?;
    let tv = build_text_vocab(
        &train,
        vocab.len(),
        cfg.context.max_terms,
        cfg.context.min_df,
        &default_stopwords(),
    );
    let tv_path = cfg.path("text-vocab.tsv");
    if let Some(parent) = tv_path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut out =
        BufWriter::new(std::fs::File::create(&tv_path).map_err(|e| Error::io(&tv_path, e))?);
    tv.write_tsv(&mut out, &vocab).map_err(|e| Error::io(&tv_path, e))?;
    out.flush().map_err(|e| Error::io(&tv_path, e))?;

    let bank = build_context_bank(
        &train,
        &tv,
        vocab.unk_index(),
        cfg.context.context_len,
        cfg.context.cap,
        cfg.seed,
    );
    let bank_path = cfg.path("context-bank.json");
    bank.save_json(&bank_path)?;
    println!(
        "context model terms={} banked_citations={} -> {} + {}",
        tv.n_words(),
        bank.n_citations(),
        tv_path.display(),
        bank_path.display()
    );
    Ok(())
}

/// Training documents sampled for fusion, in a deterministic seeded order.
fn fusion_sample<'a>(cfg: &Config, split: &CorpusSplit, docs: &'a [Document]) -> Vec<&'a Document> {
    let mut ids: Vec<&String> = split.train.iter().collect();
    ids.sort_by_key(|id| {
        (
            derive_seed(cfg.seed, &[b"fusion-sample", id.as_bytes()]),
            (*id).clone(),
        )
    });
    ids.truncate(cfg.fusion.sample_docs);
    let by_id: HashMap<&str, &Document> = docs.iter().map(|d| (d.id.as_str(), d)).collect();
    ids.into_iter()
        .filter_map(|id| by_id.get(id.as_str()).copied())
        .collect()
}

/// (positive row, negative rows) instances from a base ranked list: the
/// candidates that are not the target become negatives.
fn fusion_instance(
    base: &RankedList,
    target: u32,
    meta: &Metadata,
    table: &FeatureScoreTable,
    features: &[MetaFeature],
) -> Option<(Vec<f64>, Vec<Vec<f64>>)> {
    let target_score = base
        .items()
        .iter()
        .find(|&&(c, _)| c == target)
        .map(|&(_, s)| s)
        .unwrap_or(0.0);
    let negatives: Vec<Vec<f64>> = base
        .items()
        .iter()
        .filter(|&&(c, _)| c != target)
        .map(|&(c, s)| table.feature_row(s, c, meta, features))
        .collect();
    if negatives.is_empty() {
        return None;
    }
    Some((
        table.feature_row(target_score, target, meta, features),
        negatives,
    ))
}

fn cmd_train_fusion(cfg: &Config, model: ModelArg, features: &[MetaFeature]) -> Result<()> {
    if model == ModelArg::Majority {
        return Err(Error::Config("fusion applies to cf or context models".into()));
    }
    let (train, split, vocab) = train_documents(cfg)?;
    let table = FeatureScoreTable::build(&train, vocab.len(), cfg.fusion.alpha)?;
    let table_path = cfg.path("feature-tables.json");
    table.save_json(&table_path)?;

    let sample = fusion_sample(cfg, &split, &train);
    let pool = cfg.fusion.pool;
    let mut instances: Vec<(Vec<f64>, Vec<Vec<f64>>)> = Vec::new();

    match model {
        ModelArg::Cf => {
            let cf = CfModel::load_json(&cfg.path("cf-model.json"))?;
            for doc in &sample {
                let seq = doc.citation_sequence();
                for m in 1..seq.len() {
                    let target = seq[m];
                    if target == vocab.unk_index() {
                        continue;
                    }
                    let base = cf.recommend(&seq[..m], pool);
                    if let Some(inst) =
                        fusion_instance(&base, target, &doc.metadata, &table, features)
                    {
                        instances.push(inst);
                    }
                }
            }
        }
        ModelArg::Context => {
            let tv = load_text_vocab(cfg, &vocab)?;
            let bank = ContextBank::load_json(&cfg.path("context-bank.json"))?;
            for doc in &sample {
                for (pos, token) in doc.tokens.iter().enumerate() {
                    let Token::Cite(target) = token else { continue };
                    if *target == vocab.unk_index() {
                        continue;
                    }
                    let window = &doc.tokens[pos.saturating_sub(cfg.context.context_len)..pos];
                    let base = bank.recommend(&context_vector(window, &tv), pool);
                    if let Some(inst) =
                        fusion_instance(&base, *target, &doc.metadata, &table, features)
                    {
                        instances.push(inst);
                    }
                }
            }
        }
        ModelArg::Majority => unreachable!(),
    }

    let data = pairwise_transform(&instances)?;
    let mut columns = vec!["base".to_string()];
    columns.extend(features.iter().map(|f| f.as_str().to_string()));
    let weights = train_linear_svm(
        &data,
        columns,
        cfg.fusion.svm_c,
        cfg.fusion.epochs,
        derive_seed(cfg.seed, &[b"svm", model.as_str().as_bytes()]),
    )?;
    let accuracy = pairwise_accuracy(&weights, &data);

    let path = cfg.path(&format!(
        "fusion-{}-{}.json",
        model.as_str(),
        feature_suffix(features)
    ));
    weights.save_json(&path)?;
    println!(
        "fusion model={} features={} pairs={} train_pair_accuracy={:.4} -> {}",
        model.as_str(),
        feature_suffix(features),
        data.rows.len(),
        accuracy,
        path.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct EvalReportFile<'a> {
    format: &'a str,
    version: u32,
    model: &'a str,
    protocol: &'a str,
    features: Vec<&'a str>,
    forecast_len: Option<usize>,
    report: &'a RecallReport,
}

fn load_fusion(
    cfg: &Config,
    model: ModelArg,
    features: &[MetaFeature],
) -> Result<(FeatureScoreTable, FusionWeights)> {
    let table = FeatureScoreTable::load_json(&cfg.path("feature-tables.json"))?;
    let weights = FusionWeights::load_json(&cfg.path(&format!(
        "fusion-{}-{}.json",
        model.as_str(),
        feature_suffix(features)
    )))?;
    Ok((table, weights))
}

fn cmd_evaluate(cfg: &Config, model: ModelArg, features: Option<&[MetaFeature]>) -> Result<()> {
    let vocab = load_vocab(cfg)?;
    let split = load_split(cfg)?;
    let docs = load_documents(cfg)?;
    let test: Vec<Document> = select_docs(&docs, &split.test).into_iter().cloned().collect();
    let fold_of = fold_map(&split);
    let ks = &cfg.eval.ks;

    let (protocol, report, instances, forecast_len) = match model {
        ModelArg::Majority => {
            if features.is_some() {
                return Err(Error::Config("fusion applies to cf or context models".into()));
            }
            let majority = MajorityModel::new(&vocab);
            let (report, instances) = evaluate_citation_list(
                &majority,
                &test,
                &fold_of,
                &vocab,
                ks,
                cfg.eval.max_instances_per_doc,
            );
            ("citation-list", report, instances, None)
        }
        ModelArg::Cf => {
            let cf = CfModel::load_json(&cfg.path("cf-model.json"))?;
            let (report, instances) = match features {
                None => evaluate_citation_list(
                    &cf,
                    &test,
                    &fold_of,
                    &vocab,
                    ks,
                    cfg.eval.max_instances_per_doc,
                ),
                Some(features) => {
                    let (table, weights) = load_fusion(cfg, model, features)?;
                    let fused = FusedCitationList {
                        base: cf,
                        table,
                        weights,
                        features: features.to_vec(),
                        pool: cfg.fusion.pool,
                    };
                    evaluate_citation_list(
                        &fused,
                        &test,
                        &fold_of,
                        &vocab,
                        ks,
                        cfg.eval.max_instances_per_doc,
                    )
                }
            };
            ("citation-list", report, instances, None)
        }
        ModelArg::Context => {
            let tv = load_text_vocab(cfg, &vocab)?;
            let bank = ContextBank::load_json(&cfg.path("context-bank.json"))?;
            let spec = WindowSpec::new(cfg.context.context_len, cfg.eval.forecast_len)?;
            let base = ContextModel {
                bank,
                text_vocab: tv,
            };
            let (report, instances) = match features {
                None => evaluate_context(
                    &base,
                    &test,
                    &fold_of,
                    &vocab,
                    spec,
                    ks,
                    cfg.seed,
                    cfg.eval.exhaustive_offsets,
                ),
                Some(features) => {
                    let (table, weights) = load_fusion(cfg, model, features)?;
                    let fused = FusedContext {
                        base,
                        table,
                        weights,
                        features: features.to_vec(),
                        pool: cfg.fusion.pool,
                    };
                    evaluate_context(
                        &fused,
                        &test,
                        &fold_of,
                        &vocab,
                        spec,
                        ks,
                        cfg.seed,
                        cfg.eval.exhaustive_offsets,
                    )
                }
            };
            ("context", report, instances, Some(cfg.eval.forecast_len))
        }
    };

    let feature_names: Vec<&str> = features
        .map(|fs| fs.iter().map(|f| f.as_str()).collect())
        .unwrap_or_default();
    let stem = match features {
        Some(fs) => format!("eval-{}-{}", model.as_str(), feature_suffix(fs)),
        None => format!("eval-{}", model.as_str()),
    };
    let report_path = cfg.path(&format!("{stem}.json"));
    artifact::save_json(&report_path, &EvalReportFile {
        format: "citerec.eval-report",
        version: 1,
        model: model.as_str(),
        protocol,
        features: feature_names,
        forecast_len,
        report: &report,
    })?;

    let tables = breakdowns(&instances, ks, forecast_len);
    let breakdown_dir = cfg.path(&format!("{stem}-breakdowns"));
    artifact::write_text(&breakdown_dir.join("class.csv"), &tables.class_csv())?;
    artifact::write_text(&breakdown_dir.join("year.csv"), &tables.year_csv())?;
    artifact::write_text(
        &breakdown_dir.join("per_citation.csv"),
        &tables.per_citation_csv(&vocab),
    )?;
    if forecast_len.is_some() {
        artifact::write_text(&breakdown_dir.join("distance.csv"), &tables.distance_csv())?;
    }

    let mut summary = String::new();
    for k in ks {
        summary.push_str(&format!(
            " recall@{k}={:.4}±{:.4}",
            report.fold_mean[k], report.fold_stderr[k]
        ));
    }
    println!(
        "evaluated model={} protocol={} instances={}{} -> {}",
        model.as_str(),
        protocol,
        report.n_instances,
        summary,
        report_path.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct RecommendOutput<'a> {
    model: &'a str,
    items: Vec<RecommendItem>,
}

#[derive(Serialize)]
struct RecommendItem {
    index: u32,
    key: String,
    class: &'static str,
    score: f64,
}

fn cmd_recommend(cfg: &Config, args: RecommendArgs) -> Result<()> {
    let vocab = load_vocab(cfg)?;
    let features = match &args.features {
        Some(_) => Some(parse_features(args.features.as_deref(), cfg)?),
        None => None,
    };
    let meta = match (&features, args.year, args.issue_area, args.vlj) {
        (None, ..) => Metadata {
            year: args.year.unwrap_or(0),
            issue_area: args.issue_area.unwrap_or(0),
            vlj: args.vlj.unwrap_or(0),
        },
        (Some(fs), year, issue_area, vlj) => {
            let mut meta = Metadata {
                year: year.unwrap_or(0),
                issue_area: issue_area.unwrap_or(0),
                vlj: vlj.unwrap_or(0),
            };
            for f in fs {
                let present = match f {
                    MetaFeature::Year => year.is_some(),
                    MetaFeature::IssueArea => issue_area.is_some(),
                    MetaFeature::Vlj => vlj.is_some(),
                };
                if !present {
                    return Err(Error::Config(format!(
                        "--features {} requires --{}",
                        f.as_str(),
                        f.as_str().replace('_', "-")
                    )));
                }
                match f {
                    MetaFeature::Year => meta.year = year.unwrap(),
                    MetaFeature::IssueArea => meta.issue_area = issue_area.unwrap(),
                    MetaFeature::Vlj => meta.vlj = vlj.unwrap(),
                }
            }
            meta
        }
    };

    let ranked = match args.model {
        ModelArg::Majority => MajorityModel::new(&vocab).recommend_citations(&[], &meta, args.top_n),
        ModelArg::Cf => {
            let keys = args.citations.as_deref().ok_or_else(|| {
                Error::Config("--model cf needs --citations \"key1,key2,...\"".into())
            })?;
            let mut partial = Vec::new();
            for key in keys.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                match vocab.index_of(key) {
                    Some(i) => partial.push(i),
                    None => {
                        eprintln!("warning: citation key {key:?} not in vocabulary, using UNK");
                        partial.push(vocab.unk_index());
                    }
                }
            }
            let cf = CfModel::load_json(&cfg.path("cf-model.json"))?;
            match &features {
                None => cf.recommend_citations(&partial, &meta, args.top_n),
                Some(fs) => {
                    let (table, weights) = load_fusion(cfg, ModelArg::Cf, fs)?;
                    FusedCitationList {
                        base: cf,
                        table,
                        weights,
                        features: fs.clone(),
                        pool: cfg.fusion.pool,
                    }
                    .recommend_citations(&partial, &meta, args.top_n)
                }
            }
        }
        ModelArg::Context => {
            let text = match &args.text_file {
                Some(path) => std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?,
                None => {
                    let mut buf = String::new();
                    std::io::stdin()
                        .read_to_string(&mut buf)
                        .map_err(|e| Error::io("<stdin>", e))?;
                    buf
                }
            };
            let index = AuthorityIndex::from_csv_path(&cfg.authorities)?;
            let extractor = extractor_for(cfg);
            let tokens = tokenize(&text, &vocab, &index, &extractor);
            let start = tokens.len().saturating_sub(cfg.context.context_len);
            let window = &tokens[start..];
            let tv = load_text_vocab(cfg, &vocab)?;
            let bank = ContextBank::load_json(&cfg.path("context-bank.json"))?;
            let base = ContextModel {
                bank,
                text_vocab: tv,
            };
            match &features {
                None => base.recommend_context(window, &meta, args.top_n),
                Some(fs) => {
                    let (table, weights) = load_fusion(cfg, ModelArg::Context, fs)?;
                    FusedContext {
                        base,
                        table,
                        weights,
                        features: fs.clone(),
                        pool: cfg.fusion.pool,
                    }
                    .recommend_context(window, &meta, args.top_n)
                }
            }
        }
    };

    let output = RecommendOutput {
        model: args.model.as_str(),
        items: ranked
            .items()
            .iter()
            .map(|&(index, score)| RecommendItem {
                index,
                key: vocab.key_of(index).to_string(),
                class: vocab.class_of(index).as_str(),
                score,
            })
            .collect(),
    };
    println!("{}", serde_json::to_string_pretty(&output).expect("recommend output"));
    Ok(())
}

fn cmd_export_windows(cfg: &Config, which: SplitArg) -> Result<()> {
    let vocab = load_vocab(cfg)?;
    let split = load_split(cfg)?;
    let docs = load_documents(cfg)?;
    let (name, ids) = match which {
        SplitArg::Train => ("train", &split.train),
        SplitArg::Validation => ("validation", &split.validation),
        SplitArg::Test => ("test", &split.test),
    };
    let selected: Vec<Document> = select_docs(&docs, ids).into_iter().cloned().collect();
    let spec = WindowSpec::new(cfg.windows.context_len, cfg.windows.forecast_len)?;

    let path = cfg.path(&format!(
        "windows-{name}-l{}-w{}-e{}.jsonl",
        cfg.windows.context_len, cfg.windows.forecast_len, cfg.windows.epochs
    ));
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut out = BufWriter::new(std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?);
    let written = export_instances(
        &selected,
        spec,
        vocab.unk_index(),
        cfg.windows.epochs,
        cfg.seed,
        &mut out,
    )?;
    out.flush().map_err(|e| Error::io(&path, e))?;
    println!(
        "exported windows split={name} instances={written} (l={} w={} epochs={}) -> {}",
        cfg.windows.context_len,
        cfg.windows.forecast_len,
        cfg.windows.epochs,
        path.display()
    );
    Ok(())
}
