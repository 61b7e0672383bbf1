use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::corpus::{Aspect, SummarySet, Thread};
use crate::error::Error;
use crate::pipeline::{chunk_by_aspect, LabelSource};
use crate::util::{mean, std_dev, word_count};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub std: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        Self {
            n: values.len(),
            mean: mean(values),
            std: std_dev(values),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThreadCompression {
    pub thread_id: String,
    pub answer_words: usize,
    pub relevant_words: usize,
    pub summary_words: usize,
    /// Combined gold summaries over all answer words.
    pub summary_ratio: f64,
    /// Gold-relevant sentence words over all answer words.
    pub relevance_ratio: f64,
    /// Aspect summary words over that aspect's gold sentence words.
    pub aspect_ratios: BTreeMap<Aspect, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompressionReport {
    pub threads: Vec<ThreadCompression>,
    pub summary: Summary,
    pub relevance: Summary,
    pub per_aspect: BTreeMap<Aspect, Summary>,
    pub warnings: Vec<String>,
}

/// Compression statistics over gold-annotated threads and their gold
/// summaries. Words are whitespace-delimited tokens.
pub fn compression_stats(threads: &[Thread], gold: &[SummarySet]) -> Result<CompressionReport, Error> {
    let by_id: BTreeMap<&str, &SummarySet> = gold.iter().map(|s| (s.thread_id.as_str(), s)).collect();
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for t in threads {
        let summaries = by_id
            .get(t.thread_id.as_str())
            .ok_or_else(|| Error::UnmatchedThread(t.thread_id.clone()))?;
        let answer_words: usize = t.answers.iter().map(|a| word_count(&a.raw_text)).sum();
        if answer_words == 0 {
            warnings.push(format!("thread {} has no answer words; excluded", t.thread_id));
            continue;
        }
        if !t.has_gold() {
            return Err(Error::MissingLabels {
                thread_id: t.thread_id.clone(),
                what: "gold",
            });
        }
        let chunks = chunk_by_aspect(t, LabelSource::Gold)?;
        let relevant_words: usize = chunks.iter().map(|c| word_count(&c.joined_text)).sum();
        let summary_words: usize = summaries.summaries.values().map(|s| word_count(s)).sum();
        let mut aspect_ratios = BTreeMap::new();
        for (&aspect, text) in &summaries.summaries {
            let chunk_words = chunks
                .iter()
                .find(|c| c.aspect == aspect)
                .map_or(0, |c| word_count(&c.joined_text));
            if chunk_words == 0 {
                warnings.push(format!(
                    "thread {}: {aspect} summary has no gold sentences; aspect ratio skipped",
                    t.thread_id
                ));
                continue;
            }
            aspect_ratios.insert(aspect, word_count(text) as f64 / chunk_words as f64);
        }
        rows.push(ThreadCompression {
            thread_id: t.thread_id.clone(),
            answer_words,
            relevant_words,
            summary_words,
            summary_ratio: summary_words as f64 / answer_words as f64,
            relevance_ratio: relevant_words as f64 / answer_words as f64,
            aspect_ratios,
        });
    }
    let collect = |f: &dyn Fn(&ThreadCompression) -> f64| rows.iter().map(f).collect::<Vec<_>>();
    let mut per_aspect = BTreeMap::new();
    for aspect in Aspect::ALL {
        let values: Vec<f64> = rows.iter().filter_map(|r| r.aspect_ratios.get(&aspect).copied()).collect();
        if !values.is_empty() {
            per_aspect.insert(aspect, Summary::of(&values));
        }
    }
    Ok(CompressionReport {
        summary: Summary::of(&collect(&|r| r.summary_ratio)),
        relevance: Summary::of(&collect(&|r| r.relevance_ratio)),
        per_aspect,
        threads: rows,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Answer, SentenceRecord};
    use alloc::vec;

    fn words(n: usize, w: &str) -> String {
        vec![w; n].join(" ")
    }

    fn thread(id: &str, sentences: &[(String, Option<Aspect>)]) -> Thread {
        let raw = sentences.iter().map(|(s, _)| s.as_str()).collect::<Vec<_>>().join(" ");
        let mut t = Thread::from_raw(id, "c", "q", "", vec![raw]);
        t.answers[0] = Answer {
            answer_index: 0,
            raw_text: t.answers[0].raw_text.clone(),
            sentences: sentences
                .iter()
                .enumerate()
                .map(|(i, (s, a))| SentenceRecord::new(s.clone(), 0, i).with_gold(*a))
                .collect(),
        };
        t
    }

    #[test]
    fn ratio_038() {
        let t = thread(
            "t",
            &[(words(60, "tip"), Some(Aspect::Suggestion)), (words(40, "noise"), None)],
        );
        let mut s = SummarySet::new("t");
        s.insert(Aspect::Suggestion, words(38, "tip"));
        let r = compression_stats(&[t], &[s]).unwrap();
        assert!((r.summary.mean - 0.38).abs() < 1e-12);
        assert!((r.relevance.mean - 0.6).abs() < 1e-12);
        assert!((r.per_aspect[&Aspect::Suggestion].mean - 38.0 / 60.0).abs() < 1e-12);
    }

    #[test]
    fn expansion_and_identity() {
        let t = thread("t", &[(words(5, "a"), Some(Aspect::Experience))]);
        let mut s = SummarySet::new("t");
        s.insert(Aspect::Experience, words(8, "a"));
        let r = compression_stats(core::slice::from_ref(&t), &[s]).unwrap();
        assert!(r.per_aspect[&Aspect::Experience].mean > 1.0);

        let mut same = SummarySet::new("t");
        same.insert(Aspect::Experience, t.answers[0].raw_text.clone());
        assert_eq!(compression_stats(&[t], &[same]).unwrap().summary.mean, 1.0);
    }

    #[test]
    fn errors_and_warnings() {
        let t = thread("t", &[(words(3, "a"), Some(Aspect::Experience))]);
        assert!(matches!(
            compression_stats(core::slice::from_ref(&t), &[]),
            Err(Error::UnmatchedThread(_))
        ));
        let empty = Thread::from_raw("e", "c", "q", "", vec![String::new()]);
        let r = compression_stats(&[empty], &[SummarySet::new("e")]).unwrap();
        assert_eq!(r.threads.len(), 0);
        assert_eq!(r.warnings.len(), 1);
    }
}
