use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::corpus::{Relevance, Thread};

/// (question, relevant sentence, irrelevant sentence) from one thread.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Triplet {
    pub anchor: String,
    pub positive: String,
    pub negative: String,
}

/// Every (query, relevant, irrelevant) combination per thread, positives
/// outermost. Threads without both kinds of gold sentence contribute nothing.
pub fn build_triplets(threads: &[Thread]) -> Vec<Triplet> {
    let mut out = Vec::new();
    for thread in threads {
        let with = |label| {
            thread
                .sentences()
                .filter(move |s| s.relevance_gold == Some(label))
                .map(|s| s.text.as_str())
                .collect::<Vec<_>>()
        };
        let positives = with(Relevance::Relevant);
        let negatives = with(Relevance::Irrelevant);
        if positives.is_empty() || negatives.is_empty() {
            continue;
        }
        let anchor = thread.query();
        for p in &positives {
            for n in &negatives {
                out.push(Triplet {
                    anchor: anchor.clone(),
                    positive: String::from(*p),
                    negative: String::from(*n),
                });
            }
        }
    }
    out
}
