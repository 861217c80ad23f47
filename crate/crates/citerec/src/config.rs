//! Pipeline configuration: defaults, JSON config file, flag overrides.
//!
//! Artifact paths are addressed by a hash of the effective configuration, so
//! artifacts produced under different settings can never be mixed up.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cf::WeightScheme;
use crate::corpus::SplitRatios;
use crate::error::{Error, Result};
use crate::fusion::MetaFeature;
use crate::hash::fnv1a64;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Corpus JSONL: one `{"id","text","year","issue_area","vlj"}` per line.
    pub corpus: PathBuf,
    /// Authority list CSV with header
    /// `volume,reporter,first_page,last_page,authority_id,case_name`.
    pub authorities: PathBuf,
    /// Root directory for artifacts; outputs live under `<root>/<confighash>/`.
    pub artifacts_dir: PathBuf,
    pub seed: u64,
    /// Citation vocabulary pruning threshold.
    pub min_count: u64,
    /// Reporter whitelist for the case-citation pattern, in canonical form.
    pub reporters: Vec<String>,
    pub split: SplitRatios,
    pub cf: CfConfig,
    pub context: ContextConfig,
    pub fusion: FusionConfig,
    pub windows: WindowsConfig,
    pub eval: EvalConfig,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            corpus: PathBuf::from("corpus.jsonl"),
            authorities: PathBuf::from("authorities.csv"),
            artifacts_dir: PathBuf::from("artifacts"),
            seed: 42,
            min_count: 20,
            reporters: crate::citation::DEFAULT_REPORTERS
                .iter()
                .map(|r| r.to_string())
                .collect(),
            split: SplitRatios::default(),
            cf: CfConfig::default(),
            context: ContextConfig::default(),
            fusion: FusionConfig::default(),
            windows: WindowsConfig::default(),
            eval: EvalConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CfConfig {
    pub scheme: WeightScheme,
    pub k: usize,
}

impl Default for CfConfig {
    fn default() -> Self {
        CfConfig {
            scheme: WeightScheme::Binary,
            k: 50,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContextConfig {
    pub max_terms: usize,
    pub min_df: u64,
    /// Context window length in tokens for bank building and queries.
    pub context_len: usize,
    /// Maximum stored contexts per citation.
    pub cap: usize,
}

impl Default for ContextConfig {
    fn default() -> Self {
        ContextConfig {
            max_terms: crate::context::DEFAULT_MAX_TERMS,
            min_df: crate::context::DEFAULT_MIN_DF,
            context_len: crate::context::DEFAULT_CONTEXT_LEN,
            cap: crate::context::DEFAULT_BANK_CAP,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FusionConfig {
    /// Laplace smoothing for conditional citation probabilities.
    pub alpha: f64,
    pub svm_c: f64,
    pub epochs: usize,
    /// Training documents sampled for pairwise transformation.
    pub sample_docs: usize,
    /// Base-recommender candidates per instance (negative pool and rerank
    /// pool size).
    pub pool: usize,
    /// Metadata features fused by default, in column order.
    pub features: Vec<MetaFeature>,
}

impl Default for FusionConfig {
    fn default() -> Self {
        FusionConfig {
            alpha: 1.0,
            svm_c: 1.0,
            epochs: 100,
            sample_docs: 1000,
            pool: crate::recommender::DEFAULT_FUSION_POOL,
            features: vec![MetaFeature::Year, MetaFeature::IssueArea, MetaFeature::Vlj],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindowsConfig {
    pub context_len: usize,
    pub forecast_len: usize,
    pub epochs: u64,
}

impl Default for WindowsConfig {
    fn default() -> Self {
        WindowsConfig {
            context_len: 256,
            forecast_len: 128,
            epochs: 1,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub ks: Vec<usize>,
    /// Forecast window for context-protocol evaluation (the text-similarity
    /// target is the very next token, hence 1).
    pub forecast_len: usize,
    /// Instance cap per document under the citation-list protocol
    /// (0 = exhaustive over m).
    pub max_instances_per_doc: usize,
    /// Evaluate every valid offset instead of one sample per document.
    pub exhaustive_offsets: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            ks: vec![1, 5, 20],
            forecast_len: 1,
            max_instances_per_doc: 0,
            exhaustive_offsets: false,
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let config: Config = serde_json::from_slice(&bytes).map_err(|e| Error::Json {
            path: path.to_path_buf(),
            source: e,
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_count < 1 {
            return Err(Error::Config("min_count must be at least 1".into()));
        }
        if self.reporters.is_empty() {
            return Err(Error::Config("reporters must not be empty".into()));
        }
        if self.cf.k < 1 {
            return Err(Error::Config("cf.k must be at least 1".into()));
        }
        if self.context.context_len < 1 || self.context.cap < 1 {
            return Err(Error::Config("context.context_len and context.cap must be at least 1".into()));
        }
        if self.windows.context_len < 1 || self.windows.forecast_len < 1 {
            return Err(Error::Config("windows lengths must be at least 1".into()));
        }
        if self.eval.forecast_len < 1 {
            return Err(Error::Config("eval.forecast_len must be at least 1".into()));
        }
        if self.eval.ks.is_empty() || self.eval.ks.contains(&0) {
            return Err(Error::Config("eval.ks must be non-empty positive integers".into()));
        }
        if !self.fusion.alpha.is_finite() || self.fusion.alpha < 0.0 {
            return Err(Error::Config("fusion.alpha must be non-negative".into()));
        }
        if !self.fusion.svm_c.is_finite() || self.fusion.svm_c <= 0.0 {
            return Err(Error::Config("fusion.svm_c must be positive".into()));
        }
        if self.fusion.pool < 1 || self.fusion.sample_docs < 1 {
            return Err(Error::Config("fusion.pool and fusion.sample_docs must be at least 1".into()));
        }
        let sum = self.split.train + self.split.validation + self.split.test;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("split ratios sum to {sum}, expected 1")));
        }
        Ok(())
    }

    /// Hash of the effective configuration. The artifact directory is
    /// excluded so relocating outputs does not invalidate them. The eval and
    /// windows sections are excluded because they only shape leaf outputs
    /// (reports record their parameters; window exports carry them in the
    /// filename), so varying them must not re-key the trained artifacts.
    pub fn config_hash(&self) -> String {
        let mut hashed = self.clone();
        hashed.artifacts_dir = PathBuf::new();
        hashed.eval = EvalConfig::default();
        hashed.windows = WindowsConfig::default();
        let canonical = serde_json::to_string(&hashed).expect("config serialization");
        format!("{:016x}", fnv1a64(canonical.as_bytes()))
    }

    /// Directory holding every artifact for this configuration.
    pub fn run_dir(&self) -> PathBuf {
        self.artifacts_dir.join(self.config_hash())
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.run_dir().join(name)
    }
}
