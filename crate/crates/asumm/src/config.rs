//! Run configuration: a TOML file plus `ASUMM_` environment overrides.
//!
//! `ASUMM_SEED=7` sets `seed`; `ASUMM_SUMMARIZER__MAX_WORDS=40` sets
//! `summarizer.max_words`. Values are read as TOML when they parse as such
//! and as plain strings otherwise.

use std::path::{Path, PathBuf};

use asumm_core::classify::logreg::TrainConfig;
use asumm_core::classify::ZsLabelMap;
use asumm_core::lingfeat::PatternLists;
use asumm_core::pipeline::{FailurePolicy, Strategy, SummarizerBackend, SummarizerSpec};
use asumm_core::textprep::CleanerConfig;
use asumm_core::Aspect;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::gateway::GatewayConfig;
use crate::io::read_list;

pub const ENV_PREFIX: &str = "ASUMM_";

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub sampler: SamplerConfig,
    pub split: SplitConfig,
    pub preprocess: PreprocessConfig,
    pub patterns: PatternFiles,
    pub classify: ClassifyConfig,
    pub train: TrainConfig,
    pub summarizer: SummarizerConfig,
    pub gateway: GatewayConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerConfig {
    pub k: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self { k: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub ratios: [f64; 3],
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            ratios: [0.6, 0.2, 0.2],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessConfig {
    pub guards_file: Option<PathBuf>,
    pub min_alnum: usize,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            guards_file: None,
            min_alnum: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PatternFiles {
    pub do_patterns: Option<PathBuf>,
    pub helping_verbs: Option<PathBuf>,
    pub personal_pronouns: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum RelevanceChoice {
    #[default]
    CosineLr,
    Pair,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum AspectChoice {
    #[default]
    Gm,
    Zs,
    ZsPp,
    Multiclass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyConfig {
    pub relevance: RelevanceChoice,
    pub relevance_model: Option<PathBuf>,
    pub pair_threshold: f64,
    pub aspect: AspectChoice,
    pub aspect_model: Option<PathBuf>,
    /// Zero-shot candidate labels, one per line; defaults to the built-in 12.
    pub zs_labels_file: Option<PathBuf>,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self {
            relevance: RelevanceChoice::default(),
            relevance_model: None,
            pair_threshold: 0.5,
            aspect: AspectChoice::default(),
            aspect_model: None,
            zs_labels_file: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum BackendChoice {
    #[default]
    Extractive,
    Gateway,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyChoice {
    #[default]
    Pipeline,
    Ans,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SummarizerConfig {
    pub backend: BackendChoice,
    pub family: String,
    pub strategy: StrategyChoice,
    pub max_words: usize,
    pub on_gateway_error: FailurePolicy,
    /// Aspects emitted under the `ans` strategy.
    pub ans_aspects: Vec<Aspect>,
}

impl Default for SummarizerConfig {
    fn default() -> Self {
        Self {
            backend: BackendChoice::default(),
            family: "bart".into(),
            strategy: StrategyChoice::default(),
            max_words: 60,
            on_gateway_error: FailurePolicy::default(),
            ans_aspects: Aspect::ALL.to_vec(),
        }
    }
}

impl SummarizerConfig {
    pub fn spec(&self) -> SummarizerSpec {
        SummarizerSpec {
            backend: match self.backend {
                BackendChoice::Extractive => SummarizerBackend::ExtractiveLead,
                BackendChoice::Gateway => SummarizerBackend::GatewayAbstractive,
            },
            model_name: self.family.clone(),
            strategy: match self.strategy {
                StrategyChoice::Pipeline => Strategy::PipelineFt,
                StrategyChoice::Ans => Strategy::AnsFt,
            },
            max_words: self.max_words,
        }
    }
}

fn parse_env_value(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

fn apply_override(root: &mut toml::Table, path: &[String], value: toml::Value) -> Result<()> {
    let (last, parents) = path.split_last().expect("non-empty path");
    let mut table = root;
    for key in parents {
        let entry = table
            .entry(key.clone())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("{key} is not a section")))?;
    }
    table.insert(last.clone(), value);
    Ok(())
}

impl RunConfig {
    /// Parses `text`, applies overrides and checks the result.
    pub fn from_toml<I>(text: &str, env: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        let mut root: toml::Table = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut overrides: Vec<(String, String)> = env
            .into_iter()
            .filter(|(k, _)| k.starts_with(ENV_PREFIX))
            .collect();
        overrides.sort();
        for (key, raw) in overrides {
            let path: Vec<String> = key[ENV_PREFIX.len()..]
                .split("__")
                .map(str::to_ascii_lowercase)
                .collect();
            if path.iter().any(String::is_empty) {
                return Err(Error::Config(format!("malformed override {key}")));
            }
            apply_override(&mut root, &path, parse_env_value(&raw))?;
        }
        let cfg: RunConfig = toml::Value::Table(root)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: Option<&Path>) -> Result<Self> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?,
            None => String::new(),
        };
        Self::from_toml(&text, std::env::vars())
    }

    pub fn validate(&self) -> Result<()> {
        let files = [
            &self.preprocess.guards_file,
            &self.patterns.do_patterns,
            &self.patterns.helping_verbs,
            &self.patterns.personal_pronouns,
            &self.classify.relevance_model,
            &self.classify.aspect_model,
            &self.classify.zs_labels_file,
        ];
        for p in files.into_iter().flatten() {
            if !p.is_file() {
                return Err(Error::Config(format!("{} does not exist", p.display())));
            }
        }
        if self.sampler.k == 0 {
            return Err(Error::Config("sampler.k must be at least 1".into()));
        }
        if self.summarizer.max_words == 0 {
            return Err(Error::Config("summarizer.max_words must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.classify.pair_threshold) {
            return Err(Error::Config("classify.pair_threshold must lie in [0, 1]".into()));
        }
        self.gateway
            .validate()
            .map_err(|e| Error::Config(e.to_string()))
    }

    /// SHA-256 of the canonical JSON form of the effective configuration.
    pub fn hash(&self) -> String {
        let v = serde_json::to_value(self).expect("serializable config");
        hex::encode(Sha256::digest(v.to_string().as_bytes()))
    }

    pub fn require_seed(&self, flag: Option<u64>) -> Result<u64> {
        flag.or(self.seed)
            .ok_or_else(|| Error::Usage("a seed is required (--seed or `seed` in the config)".into()))
    }

    pub fn pattern_lists(&self) -> Result<PatternLists> {
        let d = PatternLists::default();
        let pick = |file: &Option<PathBuf>, default: Vec<String>| match file {
            Some(p) => read_list(p),
            None => Ok(default),
        };
        PatternLists::new(
            pick(&self.patterns.do_patterns, d.do_patterns)?,
            pick(&self.patterns.helping_verbs, d.helping_verbs)?,
            pick(&self.patterns.personal_pronouns, d.personal_pronouns)?,
        )
        .map_err(|e| Error::Config(e.to_string()))
    }

    pub fn cleaner(&self, guards_flag: Option<&Path>) -> Result<CleanerConfig> {
        let mut cfg = match guards_flag.or(self.preprocess.guards_file.as_deref()) {
            Some(p) => CleanerConfig::with_guards(read_list(p)?).map_err(|e| Error::Config(e.to_string()))?,
            None => CleanerConfig::default(),
        };
        cfg.min_alnum = self.preprocess.min_alnum;
        cfg.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn zs_labels(&self) -> Result<ZsLabelMap> {
        Ok(match &self.classify.zs_labels_file {
            Some(p) => ZsLabelMap {
                candidate_labels: read_list(p)?,
            },
            None => ZsLabelMap::default(),
        })
    }
}
