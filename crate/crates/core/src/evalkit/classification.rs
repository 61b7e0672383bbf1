use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize, Serializer};

use crate::corpus::{Aspect, Relevance, Thread};
use crate::error::Error;

/// Rows are gold labels, columns predictions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix<T> {
    pub labels: Vec<T>,
    pub counts: Vec<Vec<usize>>,
}

impl<T> ConfusionMatrix<T> {
    pub fn row_sums(&self) -> Vec<usize> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport<T> {
    pub labels: Vec<T>,
    pub per_class: Vec<ClassMetrics>,
    /// Unweighted mean F1 over labels present in the gold list.
    pub macro_f1: f64,
    pub accuracy: f64,
    pub confusion: ConfusionMatrix<T>,
}

/// Per-class precision/recall/F1, macro-F1 and the confusion matrix.
///
/// With `labels = None` the label set is the sorted union of gold and
/// predicted labels; otherwise every observed label must be listed.
pub fn classification_report<T: Ord + Clone + fmt::Debug>(
    gold: &[T],
    pred: &[T],
    labels: Option<&[T]>,
) -> Result<ClassificationReport<T>, Error> {
    if gold.len() != pred.len() {
        return Err(Error::LengthMismatch {
            left: gold.len(),
            right: pred.len(),
        });
    }
    let labels: Vec<T> = match labels {
        Some(l) => l.to_vec(),
        None => gold
            .iter()
            .chain(pred)
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect(),
    };
    let index: BTreeMap<&T, usize> = labels.iter().enumerate().map(|(i, l)| (l, i)).collect();
    let lookup = |l: &T| {
        index
            .get(l)
            .copied()
            .ok_or_else(|| Error::InvalidInput(format!("label {l:?} not in label set")))
    };

    let k = labels.len();
    let mut counts = vec![vec![0usize; k]; k];
    for (g, p) in gold.iter().zip(pred) {
        counts[lookup(g)?][lookup(p)?] += 1;
    }

    let mut per_class = Vec::with_capacity(k);
    let mut f1_sum = 0.0;
    let mut present = 0usize;
    for c in 0..k {
        let tp = counts[c][c];
        let support: usize = counts[c].iter().sum();
        let predicted: usize = counts.iter().map(|row| row[c]).sum();
        let precision = if predicted == 0 { 0.0 } else { tp as f64 / predicted as f64 };
        let recall = if support == 0 { 0.0 } else { tp as f64 / support as f64 };
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        if support > 0 {
            f1_sum += f1;
            present += 1;
        }
        per_class.push(ClassMetrics {
            precision,
            recall,
            f1,
            support,
        });
    }
    let correct: usize = (0..k).map(|c| counts[c][c]).sum();
    Ok(ClassificationReport {
        per_class,
        macro_f1: if present == 0 { 0.0 } else { f1_sum / present as f64 },
        accuracy: if gold.is_empty() { 0.0 } else { correct as f64 / gold.len() as f64 },
        confusion: ConfusionMatrix {
            labels: labels.clone(),
            counts,
        },
        labels,
    })
}

/// End-to-end sentence label: an aspect, or NA for irrelevant sentences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EndToEndLabel {
    Aspect(Aspect),
    Na,
}

impl EndToEndLabel {
    pub const ALL: [EndToEndLabel; 5] = [
        EndToEndLabel::Aspect(Aspect::Suggestion),
        EndToEndLabel::Aspect(Aspect::Experience),
        EndToEndLabel::Aspect(Aspect::Information),
        EndToEndLabel::Aspect(Aspect::Question),
        EndToEndLabel::Na,
    ];
}

impl fmt::Display for EndToEndLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EndToEndLabel::Aspect(a) => f.write_str(a.as_str()),
            EndToEndLabel::Na => f.write_str("NA"),
        }
    }
}

impl Serialize for EndToEndLabel {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for EndToEndLabel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        if s.eq_ignore_ascii_case("na") {
            return Ok(EndToEndLabel::Na);
        }
        s.parse::<Aspect>()
            .map(EndToEndLabel::Aspect)
            .map_err(serde::de::Error::custom)
    }
}

/// Gold and predicted relevance for every sentence.
pub fn relevance_labels(threads: &[Thread]) -> Result<(Vec<Relevance>, Vec<Relevance>), Error> {
    let mut gold = Vec::new();
    let mut pred = Vec::new();
    for t in threads {
        for s in t.sentences() {
            let missing = |what| Error::MissingLabels {
                thread_id: t.thread_id.clone(),
                what,
            };
            gold.push(s.relevance_gold.ok_or_else(|| missing("gold relevance"))?);
            pred.push(s.relevance_pred.ok_or_else(|| missing("predicted relevance"))?);
        }
    }
    Ok((gold, pred))
}

/// Gold and predicted five-way labels (four aspects plus NA).
pub fn end_to_end_labels(threads: &[Thread]) -> Result<(Vec<EndToEndLabel>, Vec<EndToEndLabel>), Error> {
    let mut gold = Vec::new();
    let mut pred = Vec::new();
    for t in threads {
        for s in t.sentences() {
            let missing = |what| Error::MissingLabels {
                thread_id: t.thread_id.clone(),
                what,
            };
            let to_label = |r: Relevance, a: Option<Aspect>| match (r, a) {
                (Relevance::Relevant, Some(a)) => EndToEndLabel::Aspect(a),
                _ => EndToEndLabel::Na,
            };
            gold.push(to_label(
                s.relevance_gold.ok_or_else(|| missing("gold relevance"))?,
                s.aspect_gold,
            ));
            pred.push(to_label(
                s.relevance_pred.ok_or_else(|| missing("predicted relevance"))?,
                s.aspect_pred,
            ));
        }
    }
    Ok((gold, pred))
}

/// Gold and predicted aspects for sentences that are gold-relevant and
/// predicted-relevant (the aspect stage in isolation).
pub fn aspect_labels(threads: &[Thread]) -> (Vec<Aspect>, Vec<Aspect>) {
    threads
        .iter()
        .flat_map(Thread::sentences)
        .filter_map(|s| Some((s.aspect_gold?, s.aspect_pred?)))
        .unzip()
}
