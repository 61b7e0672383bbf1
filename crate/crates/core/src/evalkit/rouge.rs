use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    pub fn new(precision: f64, recall: f64) -> Self {
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Self {
            precision,
            recall,
            f1,
        }
    }

    fn from_counts(matched: usize, candidate: usize, reference: usize) -> Self {
        let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        Self::new(ratio(matched, candidate), ratio(matched, reference))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RougeScore {
    pub r1: Prf,
    pub r2: Prf,
    pub rl: Prf,
    /// Set when the reference had no tokens; all scores are then zero.
    #[serde(default)]
    pub empty_reference: bool,
}

/// Tokenization switches. Stemming and stopword removal are not offered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RougeConfig {
    pub lowercase: bool,
    pub strip_punctuation: bool,
}

impl Default for RougeConfig {
    fn default() -> Self {
        Self {
            lowercase: true,
            strip_punctuation: true,
        }
    }
}

/// Whitespace tokens, optionally lowercased, with leading and trailing
/// non-alphanumeric characters removed; tokens left empty are dropped.
pub fn rouge_tokens(text: &str, cfg: &RougeConfig) -> Vec<String> {
    text.split_whitespace()
        .map(|t| {
            let t = if cfg.strip_punctuation {
                t.trim_matches(|c: char| !c.is_alphanumeric())
            } else {
                t
            };
            if cfg.lowercase {
                t.to_lowercase()
            } else {
                String::from(t)
            }
        })
        .filter(|t| !t.is_empty())
        .collect()
}

fn ngram_counts(tokens: &[String], n: usize) -> BTreeMap<&[String], usize> {
    let mut counts = BTreeMap::new();
    if n > 0 && tokens.len() >= n {
        for w in tokens.windows(n) {
            *counts.entry(w).or_insert(0) += 1;
        }
    }
    counts
}

/// Clipped n-gram overlap.
pub fn rouge_n_tokens(candidate: &[String], reference: &[String], n: usize) -> Prf {
    let c = ngram_counts(candidate, n);
    let r = ngram_counts(reference, n);
    let matched: usize = c
        .iter()
        .map(|(g, &cc)| r.get(g).map_or(0, |&rc| cc.min(rc)))
        .sum();
    let total = |m: &BTreeMap<&[String], usize>| m.values().sum::<usize>();
    Prf::from_counts(matched, total(&c), total(&r))
}

/// Longest common subsequence length, O(|a|·|b|) time and O(|b|) space.
pub fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y {
                prev[j] + 1
            } else {
                cur[j].max(prev[j + 1])
            };
        }
        core::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

pub fn rouge_l_tokens(candidate: &[String], reference: &[String]) -> Prf {
    Prf::from_counts(lcs_len(candidate, reference), candidate.len(), reference.len())
}

pub fn rouge_with(candidate: &str, reference: &str, cfg: &RougeConfig) -> RougeScore {
    let c = rouge_tokens(candidate, cfg);
    let r = rouge_tokens(reference, cfg);
    if r.is_empty() {
        return RougeScore {
            empty_reference: true,
            ..RougeScore::default()
        };
    }
    RougeScore {
        r1: rouge_n_tokens(&c, &r, 1),
        r2: rouge_n_tokens(&c, &r, 2),
        rl: rouge_l_tokens(&c, &r),
        empty_reference: false,
    }
}

/// ROUGE-1, ROUGE-2 and ROUGE-L with the default tokenization.
pub fn rouge(candidate: &str, reference: &str) -> RougeScore {
    rouge_with(candidate, reference, &RougeConfig::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical() {
        let s = rouge("The cat sat on the mat.", "the cat sat on the mat");
        for prf in [s.r1, s.r2, s.rl] {
            assert_eq!((prf.precision, prf.recall, prf.f1), (1.0, 1.0, 1.0));
        }
    }

    #[test]
    fn unigram_by_hand() {
        let s = rouge("the cat", "the cat sat");
        assert_eq!(s.r1.precision, 1.0);
        assert!((s.r1.recall - 2.0 / 3.0).abs() < 1e-15);
        assert!((s.r1.f1 - 0.8).abs() < 1e-15);
    }

    #[test]
    fn lcs_by_hand() {
        let s = rouge("a b c d", "a x c y");
        assert_eq!((s.rl.precision, s.rl.recall, s.rl.f1), (0.5, 0.5, 0.5));
    }

    #[test]
    fn clipping() {
        let s = rouge("the the the", "the cat");
        assert!((s.r1.precision - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(s.r1.recall, 0.5);
    }

    #[test]
    fn empty_reference_flagged() {
        let s = rouge("something", " ... ");
        assert!(s.empty_reference);
        assert_eq!(s.r1, Prf::default());
        let e = rouge("", "reference");
        assert!(!e.empty_reference);
        assert_eq!(e.r1.f1, 0.0);
    }
}
