//! Summary and classification metrics.

mod classification;
mod compression;
mod kappa;
mod rouge;

pub use classification::{
    aspect_labels, classification_report, end_to_end_labels, relevance_labels, ClassMetrics,
    ClassificationReport, ConfusionMatrix, EndToEndLabel,
};
pub use compression::{compression_stats, CompressionReport, Summary, ThreadCompression};
pub use kappa::cohens_kappa;
pub use rouge::{
    lcs_len, rouge, rouge_l_tokens, rouge_n_tokens, rouge_tokens, rouge_with, Prf, RougeConfig,
    RougeScore,
};

use alloc::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{Aspect, SummarySet};
use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AspectRouge {
    pub mean: RougeScore,
    /// Threads whose gold set has this aspect.
    pub pairs: usize,
    /// Of those, threads where the system produced nothing for the aspect.
    pub missing: usize,
}

fn add(acc: &mut Prf, x: &Prf) {
    acc.precision += x.precision;
    acc.recall += x.recall;
    acc.f1 += x.f1;
}

fn scale(p: &mut Prf, n: f64) {
    p.precision /= n;
    p.recall /= n;
    p.f1 /= n;
}

/// Per-aspect mean ROUGE over (system, gold) pairs.
///
/// An aspect is scored on every thread whose gold set contains it; a missing
/// system summary counts as zero. Aspects only the system produced are ignored.
pub fn evaluate_summaries(
    system: &[SummarySet],
    gold: &[SummarySet],
    cfg: &RougeConfig,
) -> Result<BTreeMap<Aspect, AspectRouge>, Error> {
    let sys: BTreeMap<&str, &SummarySet> = system.iter().map(|s| (s.thread_id.as_str(), s)).collect();
    if let Some(extra) = system
        .iter()
        .find(|s| !gold.iter().any(|g| g.thread_id == s.thread_id))
    {
        return Err(Error::UnmatchedThread(extra.thread_id.clone()));
    }
    let mut out: BTreeMap<Aspect, AspectRouge> = BTreeMap::new();
    for g in gold {
        let s = sys
            .get(g.thread_id.as_str())
            .ok_or_else(|| Error::UnmatchedThread(g.thread_id.clone()))?;
        for (&aspect, reference) in &g.summaries {
            let entry = out.entry(aspect).or_default();
            entry.pairs += 1;
            match s.get(aspect) {
                Some(candidate) => {
                    let score = rouge_with(candidate, reference, cfg);
                    add(&mut entry.mean.r1, &score.r1);
                    add(&mut entry.mean.r2, &score.r2);
                    add(&mut entry.mean.rl, &score.rl);
                    entry.mean.empty_reference |= score.empty_reference;
                }
                None => entry.missing += 1,
            }
        }
    }
    for entry in out.values_mut() {
        let n = entry.pairs as f64;
        scale(&mut entry.mean.r1, n);
        scale(&mut entry.mean.r2, n);
        scale(&mut entry.mean.rl, n);
    }
    Ok(out)
}
