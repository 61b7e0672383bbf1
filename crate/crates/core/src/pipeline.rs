//! Relevance → aspect → chunk → summarize, per thread.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::classify::{classify_aspect, classify_relevance, AspectBackend, RelevanceBackend};
use crate::corpus::{Aspect, Relevance, SentenceRecord, SummarySet, Thread};
use crate::error::{BackendError, Error};
use crate::util::word_count;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelSource {
    Gold,
    Predicted,
}

/// The relevant sentences of one aspect, in source order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AspectChunk {
    pub thread_id: String,
    pub aspect: Aspect,
    pub sentences: Vec<SentenceRecord>,
    pub joined_text: String,
}

impl AspectChunk {
    pub fn word_count(&self) -> usize {
        word_count(&self.joined_text)
    }
}

fn labels_of(s: &SentenceRecord, source: LabelSource) -> (Option<Relevance>, Option<Aspect>) {
    match source {
        LabelSource::Gold => (s.relevance_gold, s.aspect_gold),
        LabelSource::Predicted => (s.relevance_pred, s.aspect_pred),
    }
}

/// One chunk per aspect that has at least one relevant sentence, in
/// canonical aspect order.
pub fn chunk_by_aspect(thread: &Thread, source: LabelSource) -> Result<Vec<AspectChunk>, Error> {
    if thread.sentences().any(|s| labels_of(s, source).0.is_none()) {
        return Err(Error::MissingLabels {
            thread_id: thread.thread_id.clone(),
            what: match source {
                LabelSource::Gold => "gold relevance",
                LabelSource::Predicted => "predicted relevance",
            },
        });
    }
    let mut sentences: Vec<&SentenceRecord> = thread.sentences().collect();
    sentences.sort_by_key(|s| s.position());

    let mut chunks = Vec::new();
    for aspect in Aspect::ALL {
        let members: Vec<SentenceRecord> = sentences
            .iter()
            .filter(|s| labels_of(s, source) == (Some(Relevance::Relevant), Some(aspect)))
            .map(|s| (*s).clone())
            .collect();
        if members.is_empty() {
            continue;
        }
        let joined_text = join_sentences(members.iter().map(|s| s.text.as_str()));
        chunks.push(AspectChunk {
            thread_id: thread.thread_id.clone(),
            aspect,
            sentences: members,
            joined_text,
        });
    }
    Ok(chunks)
}

fn join_sentences<'a>(texts: impl Iterator<Item = &'a str>) -> String {
    let mut out = String::new();
    for t in texts {
        let t = t.trim();
        if t.is_empty() {
            continue;
        }
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(t);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SummarizerBackend {
    ExtractiveLead,
    GatewayAbstractive,
}

/// Which input a per-aspect summarizer sees: the full source answers
/// (`AnsFt`) or the aspect's relevant sentences (`PipelineFt`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    #[serde(rename = "ans")]
    AnsFt,
    #[serde(rename = "pipeline")]
    PipelineFt,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::AnsFt => "ans",
            Strategy::PipelineFt => "pipeline",
        }
    }
}

/// Address of one per-aspect summarization model.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModelKey {
    pub family: String,
    pub aspect: Aspect,
    pub strategy: Strategy,
}

impl fmt::Display for ModelKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.family, self.aspect, self.strategy.as_str())
    }
}

/// The model families × aspects × strategies matrix.
pub fn model_matrix(families: &[&str]) -> Vec<ModelKey> {
    let mut keys = Vec::new();
    for family in families {
        for strategy in [Strategy::AnsFt, Strategy::PipelineFt] {
            for aspect in Aspect::ALL {
                keys.push(ModelKey {
                    family: String::from(*family),
                    aspect,
                    strategy,
                });
            }
        }
    }
    keys
}

pub const MODEL_FAMILIES: [&str; 4] = ["bart", "t5", "prophetnet", "pegasus"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummarizerSpec {
    pub backend: SummarizerBackend,
    pub model_name: String,
    pub strategy: Strategy,
    pub max_words: usize,
}

impl Default for SummarizerSpec {
    fn default() -> Self {
        Self {
            backend: SummarizerBackend::ExtractiveLead,
            model_name: String::from("bart"),
            strategy: Strategy::PipelineFt,
            max_words: 60,
        }
    }
}

impl SummarizerSpec {
    pub fn key(&self, aspect: Aspect) -> ModelKey {
        ModelKey {
            family: self.model_name.clone(),
            aspect,
            strategy: self.strategy,
        }
    }
}

pub trait AbstractiveSummarizer {
    fn summarize(&self, text: &str, key: &ModelKey, max_words: usize) -> Result<String, BackendError>;
}

/// Echoes the first `max_words` words of its input.
#[derive(Debug, Clone, Copy, Default)]
pub struct LeadWords;

impl AbstractiveSummarizer for LeadWords {
    fn summarize(&self, text: &str, _key: &ModelKey, max_words: usize) -> Result<String, BackendError> {
        Ok(join_sentences(text.split_whitespace().take(max_words)))
    }
}

/// Leading sentences while the running word count stays within
/// `max_words`; the first sentence is always kept whole.
pub fn extractive_lead<'a>(sentences: impl IntoIterator<Item = &'a str>, max_words: usize) -> String {
    let mut picked: Vec<&str> = Vec::new();
    let mut words = 0usize;
    for s in sentences {
        let n = word_count(s);
        if n == 0 {
            continue;
        }
        if !picked.is_empty() && words + n > max_words {
            break;
        }
        picked.push(s);
        words += n;
    }
    join_sentences(picked.into_iter())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailurePolicy {
    #[default]
    FailFast,
    DegradeToExtractive,
}

pub fn summarize_chunk(
    chunk: &AspectChunk,
    spec: &SummarizerSpec,
    abstractive: Option<&dyn AbstractiveSummarizer>,
) -> Result<String, Error> {
    if chunk.sentences.is_empty() {
        return Err(Error::Empty("cannot summarize an empty chunk"));
    }
    if spec.max_words == 0 {
        return Err(Error::InvalidInput("max_words must be at least 1".into()));
    }
    match spec.backend {
        SummarizerBackend::ExtractiveLead => Ok(extractive_lead(
            chunk.sentences.iter().map(|s| s.text.as_str()),
            spec.max_words,
        )),
        SummarizerBackend::GatewayAbstractive => {
            let summarizer = abstractive.ok_or_else(|| {
                Error::InvalidInput("abstractive summarizer requested but none configured".into())
            })?;
            summarizer
                .summarize(&chunk.joined_text, &spec.key(chunk.aspect), spec.max_words)
                .map_err(|source| Error::Backend {
                    thread_id: chunk.thread_id.clone(),
                    backend: "summarizer",
                    source,
                })
        }
    }
}

fn summarize_with_policy(
    chunk: &AspectChunk,
    spec: &SummarizerSpec,
    abstractive: Option<&dyn AbstractiveSummarizer>,
    policy: FailurePolicy,
) -> Result<String, Error> {
    match summarize_chunk(chunk, spec, abstractive) {
        Err(Error::Backend { .. }) if policy == FailurePolicy::DegradeToExtractive => {
            let fallback = SummarizerSpec {
                backend: SummarizerBackend::ExtractiveLead,
                ..spec.clone()
            };
            summarize_chunk(chunk, &fallback, None)
        }
        other => other,
    }
}

/// Summarizes every chunk into a [`SummarySet`].
pub fn summarize_chunks(
    thread_id: &str,
    chunks: &[AspectChunk],
    spec: &SummarizerSpec,
    abstractive: Option<&dyn AbstractiveSummarizer>,
    policy: FailurePolicy,
) -> Result<SummarySet, Error> {
    let mut set = SummarySet::new(thread_id);
    for chunk in chunks {
        let summary = summarize_with_policy(chunk, spec, abstractive, policy)?;
        set.insert(chunk.aspect, summary);
    }
    Ok(set)
}

/// A pseudo-chunk holding every sentence of the thread (or the raw answer
/// text when the thread has not been split), used by the `AnsFt` strategy.
pub fn source_chunk(thread: &Thread, aspect: Aspect) -> AspectChunk {
    let mut sentences: Vec<SentenceRecord> = thread.sentences().cloned().collect();
    if sentences.is_empty() {
        sentences = thread
            .answers
            .iter()
            .filter(|a| !a.raw_text.trim().is_empty())
            .map(|a| SentenceRecord::new(join_sentences(a.raw_text.split_whitespace()), a.answer_index, 0))
            .collect();
    }
    sentences.sort_by_key(|s| s.position());
    let joined_text = join_sentences(thread.answers.iter().map(|a| a.raw_text.as_str()).flat_map(str::split_whitespace));
    AspectChunk {
        thread_id: thread.thread_id.clone(),
        aspect,
        sentences,
        joined_text,
    }
}

pub struct PipelineConfig<'a> {
    pub relevance: RelevanceBackend<'a>,
    pub aspect: AspectBackend<'a>,
    pub summarizer: SummarizerSpec,
    pub abstractive: Option<&'a dyn AbstractiveSummarizer>,
    pub on_gateway_error: FailurePolicy,
    /// Aspects summarized under the `AnsFt` strategy.
    pub ans_aspects: Vec<Aspect>,
}

impl fmt::Debug for PipelineConfig<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PipelineConfig")
            .field("relevance", &self.relevance)
            .field("aspect", &self.aspect)
            .field("summarizer", &self.summarizer)
            .field("on_gateway_error", &self.on_gateway_error)
            .field("ans_aspects", &self.ans_aspects)
            .finish()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    /// The thread with predicted labels (unchanged under `AnsFt`).
    pub thread: Thread,
    pub chunks: Vec<AspectChunk>,
    pub summaries: SummarySet,
}

pub fn run_pipeline_detailed(thread: Thread, cfg: &PipelineConfig<'_>) -> Result<PipelineOutput, Error> {
    if cfg.summarizer.strategy == Strategy::AnsFt {
        let chunks: Vec<AspectChunk> = cfg
            .ans_aspects
            .iter()
            .map(|&a| source_chunk(&thread, a))
            .filter(|c| !c.sentences.is_empty())
            .collect();
        let summaries = summarize_chunks(
            &thread.thread_id,
            &chunks,
            &cfg.summarizer,
            cfg.abstractive,
            cfg.on_gateway_error,
        )
        .map_err(|e| e.in_stage("summarize"))?;
        return Ok(PipelineOutput {
            thread,
            chunks,
            summaries,
        });
    }
    let thread = classify_relevance(thread, &cfg.relevance).map_err(|e| e.in_stage("relevance"))?;
    let thread = classify_aspect(thread, &cfg.aspect).map_err(|e| e.in_stage("aspect"))?;
    let chunks = chunk_by_aspect(&thread, LabelSource::Predicted).map_err(|e| e.in_stage("chunk"))?;
    let summaries = summarize_chunks(
        &thread.thread_id,
        &chunks,
        &cfg.summarizer,
        cfg.abstractive,
        cfg.on_gateway_error,
    )
    .map_err(|e| e.in_stage("summarize"))?;
    Ok(PipelineOutput {
        thread,
        chunks,
        summaries,
    })
}

pub fn run_pipeline(thread: Thread, cfg: &PipelineConfig<'_>) -> Result<SummarySet, Error> {
    run_pipeline_detailed(thread, cfg).map(|out| out.summaries)
}

/// Copies the best answer (or the first, when none is marked) into every
/// requested aspect.
pub fn best_answer_baseline(thread: &Thread, aspects: &[Aspect]) -> SummarySet {
    let mut set = SummarySet::new(thread.thread_id.clone());
    let idx = thread.best_answer_index.unwrap_or(0);
    if let Some(answer) = thread.answers.get(idx) {
        let text = join_sentences(answer.raw_text.split_whitespace());
        for &a in aspects {
            set.insert(a, text.clone());
        }
    }
    set
}

/// Summaries built directly from gold chunks with extractive lead and no
/// word limit: the extractive reference for a thread.
pub fn gold_extractive_summaries(thread: &Thread) -> Result<SummarySet, Error> {
    let chunks = chunk_by_aspect(thread, LabelSource::Gold)?;
    let mut set = SummarySet::new(thread.thread_id.clone());
    for c in chunks {
        set.insert(c.aspect, c.joined_text);
    }
    Ok(set)
}
