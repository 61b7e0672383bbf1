//! Thread data model and the stratified train/val/test split.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::util::rng_for;

/// The four answer aspects, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aspect {
    Suggestion,
    Experience,
    Information,
    Question,
}

impl Aspect {
    pub const ALL: [Aspect; 4] = [
        Aspect::Suggestion,
        Aspect::Experience,
        Aspect::Information,
        Aspect::Question,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Aspect::Suggestion => "suggestion",
            Aspect::Experience => "experience",
            Aspect::Information => "information",
            Aspect::Question => "question",
        }
    }

    /// Position in the canonical order.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Aspect> {
        Self::ALL.get(i).copied()
    }
}

impl fmt::Display for Aspect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Aspect {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "suggestion" => Ok(Aspect::Suggestion),
            "experience" => Ok(Aspect::Experience),
            "information" => Ok(Aspect::Information),
            "question" => Ok(Aspect::Question),
            other => Err(Error::InvalidInput(format!("unknown aspect {other:?}"))),
        }
    }
}

/// Binary relevance label. `Irrelevant` sorts first, which is also the
/// tie-break order of the binary classifier head.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relevance {
    Irrelevant,
    Relevant,
}

impl Relevance {
    pub fn is_relevant(self) -> bool {
        self == Relevance::Relevant
    }
}

impl FromStr for Relevance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "relevant" => Ok(Relevance::Relevant),
            "irrelevant" => Ok(Relevance::Irrelevant),
            other => Err(Error::InvalidInput(format!("unknown relevance {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceRecord {
    pub text: String,
    pub answer_index: usize,
    pub sentence_index: usize,
    #[serde(default)]
    pub relevance_gold: Option<Relevance>,
    #[serde(default)]
    pub aspect_gold: Option<Aspect>,
    #[serde(default)]
    pub relevance_pred: Option<Relevance>,
    #[serde(default)]
    pub aspect_pred: Option<Aspect>,
}

impl SentenceRecord {
    pub fn new(text: impl Into<String>, answer_index: usize, sentence_index: usize) -> Self {
        Self {
            text: text.into(),
            answer_index,
            sentence_index,
            relevance_gold: None,
            aspect_gold: None,
            relevance_pred: None,
            aspect_pred: None,
        }
    }

    /// Sets gold labels; an aspect implies relevance.
    pub fn with_gold(mut self, aspect: Option<Aspect>) -> Self {
        self.relevance_gold = Some(if aspect.is_some() {
            Relevance::Relevant
        } else {
            Relevance::Irrelevant
        });
        self.aspect_gold = aspect;
        self
    }

    pub fn position(&self) -> (usize, usize) {
        (self.answer_index, self.sentence_index)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Answer {
    pub answer_index: usize,
    pub raw_text: String,
    #[serde(default)]
    pub sentences: Vec<SentenceRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Thread {
    pub thread_id: String,
    pub category: String,
    pub subject: String,
    #[serde(default)]
    pub content: String,
    pub answers: Vec<Answer>,
    #[serde(default)]
    pub best_answer_index: Option<usize>,
}

impl Thread {
    /// Builds a thread from raw answer strings, numbering answers in order.
    pub fn from_raw(
        thread_id: impl Into<String>,
        category: impl Into<String>,
        subject: impl Into<String>,
        content: impl Into<String>,
        answers: impl IntoIterator<Item = String>,
    ) -> Self {
        Self {
            thread_id: thread_id.into(),
            category: category.into(),
            subject: subject.into(),
            content: content.into(),
            answers: answers
                .into_iter()
                .enumerate()
                .map(|(answer_index, raw_text)| Answer {
                    answer_index,
                    raw_text,
                    sentences: Vec::new(),
                })
                .collect(),
            best_answer_index: None,
        }
    }

    /// The query: subject and body joined by a space.
    pub fn query(&self) -> String {
        let mut q = String::with_capacity(self.subject.len() + self.content.len() + 1);
        q.push_str(self.subject.trim());
        let body = self.content.trim();
        if !body.is_empty() {
            if !q.is_empty() {
                q.push(' ');
            }
            q.push_str(body);
        }
        q
    }

    pub fn sentences(&self) -> impl Iterator<Item = &SentenceRecord> {
        self.answers.iter().flat_map(|a| a.sentences.iter())
    }

    pub fn sentences_mut(&mut self) -> impl Iterator<Item = &mut SentenceRecord> {
        self.answers.iter_mut().flat_map(|a| a.sentences.iter_mut())
    }

    pub fn sentence_count(&self) -> usize {
        self.answers.iter().map(|a| a.sentences.len()).sum()
    }

    /// True when every sentence carries a gold relevance label.
    pub fn has_gold(&self) -> bool {
        self.sentence_count() > 0 && self.sentences().all(|s| s.relevance_gold.is_some())
    }

    /// Checks the structural invariants of a thread.
    pub fn validate(&self) -> Result<(), Error> {
        if self.answers.is_empty() {
            return Err(Error::InvalidInput(format!(
                "thread {} has no answers",
                self.thread_id
            )));
        }
        if let Some(best) = self.best_answer_index {
            if best >= self.answers.len() {
                return Err(Error::InvalidInput(format!(
                    "thread {}: best_answer_index {best} out of range",
                    self.thread_id
                )));
            }
        }
        for s in self.sentences() {
            if s.aspect_gold.is_some() && s.relevance_gold != Some(Relevance::Relevant) {
                return Err(Error::InvalidInput(format!(
                    "thread {}: sentence ({}, {}) has an aspect but is not relevant",
                    self.thread_id, s.answer_index, s.sentence_index
                )));
            }
        }
        Ok(())
    }
}

/// Per-aspect summaries of one thread. Empty summaries are never stored.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummarySet {
    pub thread_id: String,
    pub summaries: BTreeMap<Aspect, String>,
}

impl SummarySet {
    pub fn new(thread_id: impl Into<String>) -> Self {
        Self {
            thread_id: thread_id.into(),
            summaries: BTreeMap::new(),
        }
    }

    /// Inserts a summary; blank text removes the aspect instead.
    pub fn insert(&mut self, aspect: Aspect, text: impl Into<String>) {
        let text = text.into();
        if text.trim().is_empty() {
            self.summaries.remove(&aspect);
        } else {
            self.summaries.insert(aspect, text);
        }
    }

    pub fn get(&self, aspect: Aspect) -> Option<&str> {
        self.summaries.get(&aspect).map(String::as_str)
    }

    pub fn aspects(&self) -> impl Iterator<Item = Aspect> + '_ {
        self.summaries.keys().copied()
    }

    pub fn is_empty(&self) -> bool {
        self.summaries.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "train" => Ok(Split::Train),
            "val" | "valid" | "validation" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            other => Err(Error::InvalidInput(format!("unknown split {other:?}"))),
        }
    }
}

/// thread_id → split, sorted by thread id.
pub type SplitAssignment = BTreeMap<String, Split>;

#[derive(Debug, Clone, PartialEq)]
pub struct SplitOutcome {
    pub assignment: SplitAssignment,
    pub warnings: Vec<String>,
}

impl SplitOutcome {
    pub fn count(&self, split: Split) -> usize {
        self.assignment.values().filter(|&&s| s == split).count()
    }
}

/// Largest-remainder apportionment of `n` items over `ratios`.
/// Ties in the fractional part go to the earlier slot.
pub fn apportion(n: usize, ratios: &[f64]) -> Vec<usize> {
    let quotas: Vec<f64> = ratios.iter().map(|r| r * n as f64).collect();
    // Absorb float noise such as 0.6 * 10 = 6.000000000000001.
    let mut counts: Vec<usize> = quotas
        .iter()
        .map(|q| libm::floor(q + 1e-9) as usize)
        .collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..ratios.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = quotas[a] - counts[a] as f64;
        let fb = quotas[b] - counts[b] as f64;
        fb.partial_cmp(&fa).unwrap_or(core::cmp::Ordering::Equal).then(a.cmp(&b))
    });
    for &slot in order.iter().take(n.saturating_sub(assigned)) {
        counts[slot] += 1;
    }
    counts
}

/// Splits threads into train/val/test within each category.
///
/// Threads of a category are sorted by id, shuffled with an RNG derived from
/// `(seed, category)`, and cut at the largest-remainder counts. Categories
/// with fewer than three threads go entirely to `Train`.
pub fn stratified_split(
    threads: &[Thread],
    ratios: [f64; 3],
    seed: u64,
) -> Result<SplitOutcome, Error> {
    if ratios.iter().any(|r| !r.is_finite() || *r < 0.0) {
        return Err(Error::InvalidInput(format!("invalid split ratios {ratios:?}")));
    }
    let total: f64 = ratios.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!(
            "split ratios must sum to 1, got {total}"
        )));
    }

    let mut by_category: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for t in threads {
        by_category
            .entry(t.category.as_str())
            .or_default()
            .push(t.thread_id.as_str());
    }

    let mut assignment = SplitAssignment::new();
    let mut warnings = Vec::new();
    for (category, mut ids) in by_category {
        ids.sort_unstable();
        let before = ids.len();
        ids.dedup();
        if ids.len() != before {
            return Err(Error::InvalidInput(format!(
                "duplicate thread_id in category {category:?}"
            )));
        }
        if ids.len() < 3 {
            warnings.push(format!(
                "category {category:?} has {} thread(s); all assigned to train",
                ids.len()
            ));
            for id in ids {
                assignment.insert(String::from(id), Split::Train);
            }
            continue;
        }
        let mut rng = rng_for(seed, category);
        ids.shuffle(&mut rng);
        let counts = apportion(ids.len(), &ratios);
        let mut it = ids.into_iter();
        for (split, count) in Split::ALL.into_iter().zip(counts) {
            for id in it.by_ref().take(count) {
                if assignment.insert(String::from(id), split).is_some() {
                    return Err(Error::InvalidInput(format!(
                        "thread_id {id:?} appears in more than one category"
                    )));
                }
            }
        }
    }
    Ok(SplitOutcome {
        assignment,
        warnings,
    })
}
