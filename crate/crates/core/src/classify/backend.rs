//! Interfaces to model backends, plus deterministic offline stand-ins.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::corpus::Aspect;
use crate::error::BackendError;
use crate::lingfeat::words;
use crate::util::fnv1a64;

/// Sentence embeddings; one vector per input text.
pub trait Embedder {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, BackendError>;
}

/// Sentence-pair relevance classifier returning P(relevant).
pub trait PairClassifier {
    fn p_relevant(&self, question: &str, sentence: &str) -> Result<f64, BackendError>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct NliOutput {
    pub label: String,
    pub scores: Vec<f64>,
}

/// Zero-shot classifier: premise against candidate label hypotheses.
pub trait NliLabeler {
    fn nli(&self, premise: &str, labels: &[String]) -> Result<NliOutput, BackendError>;
}

/// Direct multiclass aspect classifier (e.g. a fine-tuned encoder).
pub trait AspectClassifier {
    fn aspect(&self, sentence: &str) -> Result<Aspect, BackendError>;
}

/// Cosine similarity, clamped to [-1, 1]; zero when either side is zero.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = libm::sqrt(a.iter().map(|x| x * x).sum::<f64>());
    let nb = libm::sqrt(b.iter().map(|x| x * x).sum::<f64>());
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (na * nb)).clamp(-1.0, 1.0)
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Feature-hashed bag-of-words vectors, L2-normalized. Texts sharing words
/// get positive cosine similarity; identical texts get identical vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashEmbedder {
    pub dim: usize,
    pub seed: u64,
}

impl Default for HashEmbedder {
    fn default() -> Self {
        Self { dim: 256, seed: 0 }
    }
}

impl HashEmbedder {
    pub fn new(dim: usize, seed: u64) -> Self {
        Self { dim: dim.max(1), seed }
    }

    pub fn embed_one(&self, text: &str) -> Vec<f64> {
        let mut v = vec![0.0; self.dim];
        for token in words(text) {
            let base = fnv1a64(token.as_bytes()) ^ splitmix64(self.seed);
            for j in 0..4u64 {
                let h = splitmix64(base.wrapping_add(j));
                let idx = (h % self.dim as u64) as usize;
                v[idx] += if h >> 63 == 0 { 1.0 } else { -1.0 };
            }
        }
        let norm = libm::sqrt(v.iter().map(|x| x * x).sum::<f64>());
        if norm > 0.0 {
            for x in &mut v {
                *x /= norm;
            }
        }
        v
    }
}

impl Embedder for HashEmbedder {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, BackendError> {
        Ok(texts.iter().map(|t| self.embed_one(t)).collect())
    }
}

/// Picks the candidate label sharing the most words with the premise
/// (first candidate on ties). Scores are `(overlap + 1)` normalized.
#[derive(Debug, Clone, Copy, Default)]
pub struct TokenOverlapNli;

impl NliLabeler for TokenOverlapNli {
    fn nli(&self, premise: &str, labels: &[String]) -> Result<NliOutput, BackendError> {
        if labels.is_empty() {
            return Err(BackendError::new("no candidate labels"));
        }
        let premise_words = words(premise);
        let overlaps: Vec<f64> = labels
            .iter()
            .map(|l| words(l).iter().filter(|w| premise_words.contains(w)).count() as f64)
            .collect();
        let mut best = 0;
        for (i, &o) in overlaps.iter().enumerate() {
            if o > overlaps[best] {
                best = i;
            }
        }
        let total: f64 = overlaps.iter().map(|o| o + 1.0).sum();
        Ok(NliOutput {
            label: labels[best].clone(),
            scores: overlaps.iter().map(|o| (o + 1.0) / total).collect(),
        })
    }
}

/// Pair classifier over embedding cosine: `P(relevant) = (1 + cos) / 2`.
#[derive(Debug, Clone, Copy)]
pub struct CosinePairClassifier<E> {
    pub embedder: E,
}

impl<E: Embedder> PairClassifier for CosinePairClassifier<E> {
    fn p_relevant(&self, question: &str, sentence: &str) -> Result<f64, BackendError> {
        let v = self
            .embedder
            .embed(&[String::from(question), String::from(sentence)])?;
        if v.len() != 2 {
            return Err(BackendError::new("embedder returned the wrong number of vectors"));
        }
        Ok((1.0 + cosine(&v[0], &v[1])) / 2.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn self_similarity() {
        let e = HashEmbedder::default();
        let v = e.embed_one("Drink plenty of water.");
        assert!((cosine(&v, &v) - 1.0).abs() < 1e-12);
        assert_eq!(v, e.embed_one("Drink plenty of water."));
        assert_eq!(cosine(&e.embed_one(""), &v), 0.0);
    }

    #[test]
    fn overlap_is_more_similar() {
        let e = HashEmbedder::default();
        let q = e.embed_one("how do i treat a sore throat");
        let near = e.embed_one("gargle salt water for a sore throat");
        let far = e.embed_one("my cat likes boxes");
        assert!(cosine(&q, &near) > cosine(&q, &far));
    }

    #[test]
    fn overlap_nli() {
        let labels: Vec<String> = ["suggestion", "question"].iter().map(|s| s.to_string()).collect();
        let out = TokenOverlapNli.nli("I have a question about this", &labels).unwrap();
        assert_eq!(out.label, "question");
        assert!((out.scores.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let single = TokenOverlapNli.nli("anything", &labels[..1]).unwrap();
        assert_eq!(single.scores, vec![1.0]);
        assert!(TokenOverlapNli.nli("x", &[]).is_err());
    }
}
