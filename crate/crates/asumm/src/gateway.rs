//! Client for the model service: embeddings, pair relevance, zero-shot NLI,
//! mood probabilities and abstractive summaries over JSON/HTTP.
//!
//! Live responses are cached in memory (and optionally on disk) under the
//! SHA-256 of endpoint plus canonical request body. Offline mode answers
//! every call from deterministic stand-ins and never opens a socket.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Mutex, OnceLock};
use std::time::Duration;

use asumm_core::classify::{
    AspectClassifier, CosinePairClassifier, Embedder, HashEmbedder, NliLabeler, NliOutput,
    PairClassifier, TokenOverlapNli,
};
use asumm_core::lingfeat::{MoodSource, Moods, PatternLists, RuleFallback};
use asumm_core::pipeline::{model_matrix, AbstractiveSummarizer, LeadWords, ModelKey, MODEL_FAMILIES};
use asumm_core::{Aspect, BackendError};
use rand::Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Live,
    #[default]
    Offline,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GatewayConfig {
    pub base_url: String,
    pub timeout_ms: u64,
    pub max_retries: u32,
    /// First retry delay; doubles per attempt, with ±50% jitter.
    pub backoff_ms: u64,
    pub batch_size: usize,
    pub cache_dir: Option<PathBuf>,
    pub mode: Mode,
    /// Seed of the offline pseudo-embeddings.
    pub seed: u64,
    /// Model name sent with `/v1/pair` requests.
    pub pair_model: String,
}

impl Default for GatewayConfig {
    fn default() -> Self {
        Self {
            base_url: "http://127.0.0.1:8000".into(),
            timeout_ms: 30_000,
            max_retries: 3,
            backoff_ms: 200,
            batch_size: 32,
            cache_dir: None,
            mode: Mode::Offline,
            seed: 0,
            pair_model: "pair".into(),
        }
    }
}

impl GatewayConfig {
    pub fn validate(&self) -> Result<(), GatewayError> {
        if self.batch_size == 0 {
            return Err(GatewayError::Config("batch_size must be at least 1".into()));
        }
        if self.mode == Mode::Live && !self.base_url.starts_with("http") {
            return Err(GatewayError::Config(format!("base_url {:?} is not an http URL", self.base_url)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GatewayError {
    #[error("gateway {endpoint} (batch {batch}): {message}")]
    Request {
        endpoint: &'static str,
        batch: usize,
        message: String,
    },

    #[error("gateway {endpoint}: malformed response: {message}")]
    Protocol { endpoint: &'static str, message: String },

    #[error("unknown model key {key}; available: {}", available.join(", "))]
    UnknownModel { key: String, available: Vec<String> },

    #[error("gateway config: {0}")]
    Config(String),
}

impl From<GatewayError> for BackendError {
    fn from(e: GatewayError) -> Self {
        BackendError::new(e.to_string())
    }
}

pub mod wire {
    //! Request and response bodies of the service protocol.

    use serde::{Deserialize, Serialize};

    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    pub struct EmbedRequest {
        pub texts: Vec<String>,
    }
    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    pub struct EmbedResponse {
        pub vectors: Vec<Vec<f64>>,
    }

    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    pub struct PairRequest {
        pub question: String,
        pub sentence: String,
        pub model: String,
    }
    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    pub struct PairResponse {
        pub label: String,
        pub p_relevant: f64,
    }

    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    pub struct NliRequest {
        pub premise: String,
        pub labels: Vec<String>,
    }
    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    pub struct NliResponse {
        pub label: String,
        pub scores: Vec<f64>,
    }

    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    pub struct MoodsRequest {
        pub sentence: String,
    }
    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    pub struct MoodsResponse {
        pub imperative: f64,
        pub interrogative: f64,
        pub indicative: f64,
    }

    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    pub struct SummarizeRequest {
        pub text: String,
        pub family: String,
        pub aspect: String,
        pub strategy: String,
        pub max_len: usize,
    }
    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    pub struct SummarizeResponse {
        pub summary: String,
    }

    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    pub struct HealthResponse {
        pub status: String,
        pub models: Vec<String>,
    }

    /// Error body for rejected requests, e.g. an unknown model key.
    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    pub struct ErrorResponse {
        pub error: String,
        #[serde(default)]
        pub available: Vec<String>,
    }
}

use wire::*;

pub const EMBED: &str = "/v1/embed";
pub const PAIR: &str = "/v1/pair";
pub const NLI: &str = "/v1/nli";
pub const MOODS: &str = "/v1/moods";
pub const SUMMARIZE: &str = "/v1/summarize";
pub const HEALTH: &str = "/v1/health";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GatewayStats {
    /// HTTP requests sent, retries included.
    pub requests: u64,
    pub cache_hits: u64,
    pub retries: u64,
}

#[derive(Default)]
struct Counters {
    requests: AtomicU64,
    cache_hits: AtomicU64,
    retries: AtomicU64,
}

struct Offline {
    embedder: HashEmbedder,
    moods: RuleFallback,
}

pub struct Gateway {
    cfg: GatewayConfig,
    agent: Option<ureq::Agent>,
    cache: Mutex<BTreeMap<String, Value>>,
    models: OnceLock<Option<Vec<String>>>,
    dim: OnceLock<usize>,
    counters: Counters,
    offline: Offline,
}

impl std::fmt::Debug for Gateway {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Gateway")
            .field("cfg", &self.cfg)
            .field("stats", &self.stats())
            .finish()
    }
}

/// Cache key: SHA-256 of the endpoint and the canonical (key-sorted) body.
pub fn cache_key(endpoint: &str, body: &Value) -> String {
    let mut h = Sha256::new();
    h.update(endpoint.as_bytes());
    h.update(b"\n");
    h.update(body.to_string().as_bytes());
    hex::encode(h.finalize())
}

enum Failure {
    Retryable(String),
    Fatal(GatewayError),
}

impl Gateway {
    pub fn new(cfg: GatewayConfig) -> Result<Self, GatewayError> {
        Self::with_patterns(cfg, PatternLists::default())
    }

    /// `patterns` drive the offline mood heuristic.
    pub fn with_patterns(cfg: GatewayConfig, patterns: PatternLists) -> Result<Self, GatewayError> {
        cfg.validate()?;
        let agent = (cfg.mode == Mode::Live).then(|| {
            ureq::Agent::config_builder()
                .timeout_global(Some(Duration::from_millis(cfg.timeout_ms)))
                .http_status_as_error(false)
                .build()
                .into()
        });
        Ok(Self {
            offline: Offline {
                embedder: HashEmbedder::new(256, cfg.seed),
                moods: RuleFallback::new(patterns),
            },
            agent,
            cache: Mutex::new(BTreeMap::new()),
            models: OnceLock::new(),
            dim: OnceLock::new(),
            counters: Counters::default(),
            cfg,
        })
    }

    pub fn offline() -> Self {
        Self::new(GatewayConfig::default()).expect("default config is valid")
    }

    pub fn config(&self) -> &GatewayConfig {
        &self.cfg
    }

    pub fn is_offline(&self) -> bool {
        self.agent.is_none()
    }

    pub fn stats(&self) -> GatewayStats {
        GatewayStats {
            requests: self.counters.requests.load(Ordering::Relaxed),
            cache_hits: self.counters.cache_hits.load(Ordering::Relaxed),
            retries: self.counters.retries.load(Ordering::Relaxed),
        }
    }

    fn cached(&self, key: &str) -> Option<Value> {
        if let Some(v) = self.cache.lock().expect("cache lock").get(key) {
            return Some(v.clone());
        }
        let dir = self.cfg.cache_dir.as_ref()?;
        let text = std::fs::read_to_string(dir.join(format!("{key}.json"))).ok()?;
        let v: Value = serde_json::from_str(&text).ok()?;
        self.cache.lock().expect("cache lock").insert(key.to_string(), v.clone());
        Some(v)
    }

    fn store(&self, key: String, value: &Value) {
        if let Some(dir) = &self.cfg.cache_dir {
            let path = dir.join(format!("{key}.json"));
            if let Err(e) = crate::io::write_atomic(&path, value.to_string().as_bytes()) {
                log::warn!("cache write failed: {e}");
            }
        }
        self.cache.lock().expect("cache lock").insert(key, value.clone());
    }

    fn url(&self, endpoint: &str) -> String {
        format!("{}{endpoint}", self.cfg.base_url.trim_end_matches('/'))
    }

    fn send_once(&self, endpoint: &'static str, body: Option<&Value>) -> Result<Value, Failure> {
        let agent = self.agent.as_ref().expect("live mode");
        self.counters.requests.fetch_add(1, Ordering::Relaxed);
        let sent = match body {
            Some(b) => agent.post(&self.url(endpoint)).send_json(b),
            None => agent.get(&self.url(endpoint)).call(),
        };
        let mut resp = sent.map_err(|e| Failure::Retryable(e.to_string()))?;
        let status = resp.status().as_u16();
        let parsed: Result<Value, _> = resp.body_mut().read_json();
        if status == 429 || status >= 500 {
            return Err(Failure::Retryable(format!("HTTP {status}")));
        }
        let value = parsed.map_err(|e| {
            Failure::Fatal(GatewayError::Protocol {
                endpoint,
                message: e.to_string(),
            })
        })?;
        if status >= 400 {
            let err: Option<ErrorResponse> = serde_json::from_value(value.clone()).ok();
            return Err(Failure::Fatal(GatewayError::Request {
                endpoint,
                batch: 0,
                message: match err {
                    Some(e) => format!("HTTP {status}: {}", e.error),
                    None => format!("HTTP {status}: {value}"),
                },
            }));
        }
        Ok(value)
    }

    /// Sends with retries (all endpoints are idempotent).
    fn send(&self, endpoint: &'static str, body: Option<&Value>, batch: usize) -> Result<Value, GatewayError> {
        let mut attempt = 0u32;
        loop {
            match self.send_once(endpoint, body) {
                Ok(v) => return Ok(v),
                Err(Failure::Fatal(GatewayError::Request { message, .. })) => {
                    return Err(GatewayError::Request {
                        endpoint,
                        batch,
                        message,
                    })
                }
                Err(Failure::Fatal(e)) => return Err(e),
                Err(Failure::Retryable(message)) => {
                    if attempt >= self.cfg.max_retries {
                        return Err(GatewayError::Request {
                            endpoint,
                            batch,
                            message: format!("{message} (after {} attempts)", attempt + 1),
                        });
                    }
                    let base = self.cfg.backoff_ms.saturating_mul(1 << attempt.min(16));
                    let jitter: f64 = rand::thread_rng().gen_range(0.5..1.5);
                    std::thread::sleep(Duration::from_millis((base as f64 * jitter) as u64));
                    self.counters.retries.fetch_add(1, Ordering::Relaxed);
                    attempt += 1;
                }
            }
        }
    }

    fn post<Req: Serialize, Resp: DeserializeOwned>(
        &self,
        endpoint: &'static str,
        req: &Req,
        batch: usize,
    ) -> Result<Resp, GatewayError> {
        let body = serde_json::to_value(req).expect("serializable request");
        let key = cache_key(endpoint, &body);
        let value = match self.cached(&key) {
            Some(v) => {
                self.counters.cache_hits.fetch_add(1, Ordering::Relaxed);
                v
            }
            None => {
                let v = self.send(endpoint, Some(&body), batch)?;
                // only well-formed responses are cached
                serde_json::from_value::<Resp>(v.clone()).map_err(|e| GatewayError::Protocol {
                    endpoint,
                    message: e.to_string(),
                })?;
                self.store(key, &v);
                v
            }
        };
        serde_json::from_value(value).map_err(|e| GatewayError::Protocol {
            endpoint,
            message: e.to_string(),
        })
    }

    pub fn health(&self) -> Result<HealthResponse, GatewayError> {
        if self.is_offline() {
            return Ok(HealthResponse {
                status: "offline".into(),
                models: offline_models(),
            });
        }
        let v = self.send(HEALTH, None, 0)?;
        serde_json::from_value(v).map_err(|e| GatewayError::Protocol {
            endpoint: HEALTH,
            message: e.to_string(),
        })
    }

    /// Registered summarizer keys; `None` when the service cannot say.
    pub fn models(&self) -> Option<&[String]> {
        self.models
            .get_or_init(|| match self.health() {
                Ok(h) => Some(h.models),
                Err(e) => {
                    log::warn!("model listing unavailable: {e}");
                    None
                }
            })
            .as_deref()
    }

    /// One vector per text. Each text is cached separately, so results do
    /// not depend on how a call is batched.
    pub fn embed_texts(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, GatewayError> {
        if self.is_offline() {
            return Ok(texts.iter().map(|t| self.offline.embedder.embed_one(t)).collect());
        }
        let keys: Vec<String> = texts
            .iter()
            .map(|t| cache_key(EMBED, &serde_json::json!({ "texts": [t] })))
            .collect();
        let mut out: Vec<Option<Vec<f64>>> = vec![None; texts.len()];
        let mut missing: Vec<usize> = Vec::new();
        for (i, key) in keys.iter().enumerate() {
            match self.cached(key).and_then(|v| serde_json::from_value(v).ok()) {
                Some(vec) => {
                    self.counters.cache_hits.fetch_add(1, Ordering::Relaxed);
                    out[i] = Some(vec);
                }
                None if missing.iter().any(|&j| texts[j] == texts[i]) => {}
                None => missing.push(i),
            }
        }
        for (batch, chunk) in missing.chunks(self.cfg.batch_size).enumerate() {
            let req = EmbedRequest {
                texts: chunk.iter().map(|&i| texts[i].clone()).collect(),
            };
            let body = serde_json::to_value(&req).expect("serializable request");
            let v = self.send(EMBED, Some(&body), batch)?;
            let resp: EmbedResponse = serde_json::from_value(v).map_err(|e| GatewayError::Protocol {
                endpoint: EMBED,
                message: e.to_string(),
            })?;
            if resp.vectors.len() != chunk.len() {
                return Err(GatewayError::Protocol {
                    endpoint: EMBED,
                    message: format!("{} vectors for {} texts", resp.vectors.len(), chunk.len()),
                });
            }
            for (&i, vector) in chunk.iter().zip(resp.vectors) {
                let dim = *self.dim.get_or_init(|| vector.len());
                if vector.len() != dim {
                    return Err(GatewayError::Protocol {
                        endpoint: EMBED,
                        message: format!("vector of length {} after {dim}", vector.len()),
                    });
                }
                self.store(keys[i].clone(), &Value::from(vector.clone()));
                out[i] = Some(vector);
            }
        }
        // duplicates of texts fetched above
        for i in 0..texts.len() {
            if out[i].is_none() {
                let v = self.cached(&keys[i]).and_then(|v| serde_json::from_value(v).ok());
                out[i] = v;
            }
        }
        out.into_iter()
            .map(|v| {
                v.ok_or_else(|| GatewayError::Protocol {
                    endpoint: EMBED,
                    message: "missing vector".into(),
                })
            })
            .collect()
    }

    pub fn pair(&self, question: &str, sentence: &str) -> Result<f64, GatewayError> {
        if self.is_offline() {
            let stub = CosinePairClassifier {
                embedder: self.offline.embedder,
            };
            return Ok(stub.p_relevant(question, sentence).expect("offline embedder"));
        }
        let resp: PairResponse = self.post(
            PAIR,
            &PairRequest {
                question: question.into(),
                sentence: sentence.into(),
                model: self.cfg.pair_model.clone(),
            },
            0,
        )?;
        if !(0.0..=1.0).contains(&resp.p_relevant) {
            return Err(GatewayError::Protocol {
                endpoint: PAIR,
                message: format!("p_relevant {} outside [0, 1]", resp.p_relevant),
            });
        }
        Ok(resp.p_relevant)
    }

    pub fn nli_label(&self, premise: &str, labels: &[String]) -> Result<NliResponse, GatewayError> {
        if labels.is_empty() {
            return Err(GatewayError::Request {
                endpoint: NLI,
                batch: 0,
                message: "no candidate labels".into(),
            });
        }
        if self.is_offline() {
            let out = TokenOverlapNli.nli(premise, labels).expect("non-empty labels");
            return Ok(NliResponse {
                label: out.label,
                scores: out.scores,
            });
        }
        let resp: NliResponse = self.post(
            NLI,
            &NliRequest {
                premise: premise.into(),
                labels: labels.to_vec(),
            },
            0,
        )?;
        if !labels.contains(&resp.label) || resp.scores.len() != labels.len() {
            return Err(GatewayError::Protocol {
                endpoint: NLI,
                message: format!("label {:?} with {} scores", resp.label, resp.scores.len()),
            });
        }
        Ok(resp)
    }

    pub fn mood_probs(&self, sentence: &str) -> Result<Moods, GatewayError> {
        if self.is_offline() {
            return Ok(self.offline.moods.moods(sentence).expect("rule fallback"));
        }
        let r: MoodsResponse = self.post(
            MOODS,
            &MoodsRequest {
                sentence: sentence.into(),
            },
            0,
        )?;
        Ok(Moods {
            imperative: r.imperative,
            interrogative: r.interrogative,
            indicative: r.indicative,
        })
    }

    pub fn summarize_text(&self, text: &str, key: &ModelKey, max_len: usize) -> Result<String, GatewayError> {
        let name = key.to_string();
        let available = if self.is_offline() {
            Some(offline_models())
        } else {
            self.models().map(<[String]>::to_vec)
        };
        if let Some(available) = available {
            if !available.contains(&name) {
                return Err(GatewayError::UnknownModel { key: name, available });
            }
        }
        if self.is_offline() {
            return Ok(LeadWords.summarize(text, key, max_len).expect("stub"));
        }
        let resp: SummarizeResponse = self.post(
            SUMMARIZE,
            &SummarizeRequest {
                text: text.into(),
                family: key.family.clone(),
                aspect: key.aspect.as_str().into(),
                strategy: key.strategy.as_str().into(),
                max_len,
            },
            0,
        )?;
        Ok(resp.summary)
    }
}

/// The 32 summarizer keys served by the offline stub.
pub fn offline_models() -> Vec<String> {
    model_matrix(&MODEL_FAMILIES).iter().map(ToString::to_string).collect()
}

impl Embedder for Gateway {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, BackendError> {
        Ok(self.embed_texts(texts)?)
    }
}

impl PairClassifier for Gateway {
    fn p_relevant(&self, question: &str, sentence: &str) -> Result<f64, BackendError> {
        Ok(self.pair(question, sentence)?)
    }
}

impl NliLabeler for Gateway {
    fn nli(&self, premise: &str, labels: &[String]) -> Result<NliOutput, BackendError> {
        let r = self.nli_label(premise, labels)?;
        Ok(NliOutput {
            label: r.label,
            scores: r.scores,
        })
    }
}

impl MoodSource for Gateway {
    fn moods(&self, sentence: &str) -> Result<Moods, BackendError> {
        Ok(self.mood_probs(sentence)?)
    }
}

impl AbstractiveSummarizer for Gateway {
    fn summarize(&self, text: &str, key: &ModelKey, max_words: usize) -> Result<String, BackendError> {
        Ok(self.summarize_text(text, key, max_words)?)
    }
}

/// Multiclass aspect classification through the NLI endpoint with the four
/// aspect names as candidate labels.
impl AspectClassifier for Gateway {
    fn aspect(&self, sentence: &str) -> Result<Aspect, BackendError> {
        let labels: Vec<String> = Aspect::ALL.iter().map(|a| a.as_str().to_string()).collect();
        let r = self.nli_label(sentence, &labels)?;
        r.label.parse().map_err(|e| BackendError::new(format!("{e}")))
    }
}
