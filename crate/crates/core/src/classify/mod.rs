//! Relevance and aspect classification.

pub mod backend;
pub mod logreg;
pub mod triplets;
pub mod zs;

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

pub use backend::{
    cosine, AspectClassifier, CosinePairClassifier, Embedder, HashEmbedder, NliLabeler, NliOutput,
    PairClassifier, TokenOverlapNli,
};
pub use logreg::{predict, train_logreg, LogRegModel, Prediction, TrainConfig};
pub use triplets::{build_triplets, Triplet};
pub use zs::{zs_map, ZsLabelMap, ZsVariant, CANDIDATE_LABELS};

use crate::corpus::{Aspect, Relevance, Thread};
use crate::error::{BackendError, Error};
use crate::lingfeat::{featurize, FeatureVector, MoodSource, PatternLists};

pub const RELEVANCE_CLASSES: [&str; 2] = ["irrelevant", "relevant"];
pub const RELEVANCE_FEATURES: [&str; 1] = ["cosine"];

/// Cosine similarity of one answer sentence to its thread's query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelevanceScore {
    pub answer_index: usize,
    pub sentence_index: usize,
    pub cosine: f64,
}

/// Scores every sentence of `thread` against its query, in sentence order.
pub fn relevance_scores(thread: &Thread, embedder: &dyn Embedder) -> Result<Vec<RelevanceScore>, BackendError> {
    let mut texts = Vec::with_capacity(thread.sentence_count() + 1);
    texts.push(thread.query());
    texts.extend(thread.sentences().map(|s| s.text.clone()));
    let vectors = embedder.embed(&texts)?;
    if vectors.len() != texts.len() {
        return Err(BackendError::new(format!(
            "embedder returned {} vectors for {} texts",
            vectors.len(),
            texts.len()
        )));
    }
    let query = &vectors[0];
    Ok(thread
        .sentences()
        .zip(&vectors[1..])
        .map(|(s, v)| RelevanceScore {
            answer_index: s.answer_index,
            sentence_index: s.sentence_index,
            cosine: cosine(query, v),
        })
        .collect())
}

pub enum RelevanceBackend<'a> {
    /// Logistic regression over query–sentence embedding cosine.
    CosineLr {
        embedder: &'a dyn Embedder,
        model: &'a LogRegModel,
    },
    /// Sentence-pair classifier; relevant when `P(relevant) >= threshold`.
    PairClassifier {
        classifier: &'a dyn PairClassifier,
        threshold: f64,
    },
}

impl RelevanceBackend<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            RelevanceBackend::CosineLr { .. } => "cosine-lr",
            RelevanceBackend::PairClassifier { .. } => "pair-classifier",
        }
    }
}

impl fmt::Debug for RelevanceBackend<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn backend_error(thread: &Thread, backend: &'static str, source: BackendError) -> Error {
    Error::Backend {
        thread_id: thread.thread_id.clone(),
        backend,
        source,
    }
}

fn parse_relevance(label: &str) -> Result<Relevance, Error> {
    label.parse()
}

/// Sets `relevance_pred` on every sentence. Gold labels are not touched.
pub fn classify_relevance(mut thread: Thread, backend: &RelevanceBackend<'_>) -> Result<Thread, Error> {
    let labels: Vec<Relevance> = match backend {
        RelevanceBackend::CosineLr { embedder, model } => {
            if model.n_features() != 1 {
                return Err(Error::DimensionMismatch {
                    expected: 1,
                    got: model.n_features(),
                });
            }
            let scores = relevance_scores(&thread, *embedder)
                .map_err(|e| backend_error(&thread, backend.name(), e))?;
            scores
                .iter()
                .map(|s| {
                    let p = model.predict(&[s.cosine])?;
                    parse_relevance(model.label(&p))
                })
                .collect::<Result<_, _>>()?
        }
        RelevanceBackend::PairClassifier {
            classifier,
            threshold,
        } => {
            let query = thread.query();
            thread
                .sentences()
                .map(|s| {
                    classifier
                        .p_relevant(&query, &s.text)
                        .map(|p| {
                            if p >= *threshold {
                                Relevance::Relevant
                            } else {
                                Relevance::Irrelevant
                            }
                        })
                        .map_err(|e| backend_error(&thread, backend.name(), e))
                })
                .collect::<Result<_, _>>()?
        }
    };
    for (s, label) in thread.sentences_mut().zip(labels) {
        s.relevance_pred = Some(label);
    }
    Ok(thread)
}

pub enum AspectBackend<'a> {
    /// Feature-based logistic regression over [`FeatureVector`].
    Gm {
        model: &'a LogRegModel,
        patterns: &'a PatternLists,
        moods: &'a dyn MoodSource,
    },
    /// Zero-shot NLI label mapped through [`ZsLabelMap`].
    Zs {
        nli: &'a dyn NliLabeler,
        labels: &'a ZsLabelMap,
        patterns: &'a PatternLists,
        variant: ZsVariant,
    },
    Multiclass(&'a dyn AspectClassifier),
}

impl AspectBackend<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            AspectBackend::Gm { .. } => "gm",
            AspectBackend::Zs {
                variant: ZsVariant::Zs,
                ..
            } => "zs",
            AspectBackend::Zs {
                variant: ZsVariant::ZsPp,
                ..
            } => "zs-pp",
            AspectBackend::Multiclass(_) => "multiclass",
        }
    }
}

impl fmt::Debug for AspectBackend<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn sentence_error(answer_index: usize, sentence_index: usize, e: BackendError) -> BackendError {
    BackendError::new(format!("sentence ({answer_index}, {sentence_index}): {}", e.message))
}

/// Sets `aspect_pred` on exactly the sentences predicted relevant and clears
/// it everywhere else.
pub fn classify_aspect(mut thread: Thread, backend: &AspectBackend<'_>) -> Result<Thread, Error> {
    let mut predictions: Vec<Option<Aspect>> = Vec::with_capacity(thread.sentence_count());
    for s in thread.sentences() {
        match s.relevance_pred {
            None => {
                return Err(Error::MissingLabels {
                    thread_id: thread.thread_id.clone(),
                    what: "predicted relevance",
                })
            }
            Some(Relevance::Irrelevant) => predictions.push(None),
            Some(Relevance::Relevant) => {
                let wrap = |e| backend_error(&thread, backend.name(), sentence_error(s.answer_index, s.sentence_index, e));
                let aspect = match backend {
                    AspectBackend::Gm {
                        model,
                        patterns,
                        moods,
                    } => {
                        let features = featurize(&s.text, patterns, *moods).map_err(wrap)?;
                        gm_predict(model, &features)?
                    }
                    AspectBackend::Zs {
                        nli,
                        labels,
                        patterns,
                        variant,
                    } => {
                        let out = nli.nli(&s.text, &labels.candidate_labels).map_err(wrap)?;
                        labels.map(&out.label, &s.text, *variant, patterns)?
                    }
                    AspectBackend::Multiclass(classifier) => classifier.aspect(&s.text).map_err(wrap)?,
                };
                predictions.push(Some(aspect));
            }
        }
    }
    for (s, aspect) in thread.sentences_mut().zip(predictions) {
        s.aspect_pred = aspect;
    }
    Ok(thread)
}

/// Aspect predicted by a GM model whose classes are aspect names.
pub fn gm_predict(model: &LogRegModel, features: &FeatureVector) -> Result<Aspect, Error> {
    let p = model.predict(&features.to_array())?;
    model.label(&p).parse()
}

/// Aspect class names in canonical order.
pub fn aspect_classes() -> Vec<String> {
    Aspect::ALL.iter().map(|a| a.as_str().to_string()).collect()
}

pub fn relevance_classes() -> Vec<String> {
    RELEVANCE_CLASSES.iter().map(|s| s.to_string()).collect()
}

/// Cosine features and gold relevance labels (0 = irrelevant, 1 = relevant)
/// for every gold-labelled sentence.
pub fn relevance_training_data(
    threads: &[Thread],
    embedder: &dyn Embedder,
) -> Result<(Vec<Vec<f64>>, Vec<usize>), Error> {
    let mut x = Vec::new();
    let mut y = Vec::new();
    for thread in threads {
        let scores = relevance_scores(thread, embedder)
            .map_err(|e| backend_error(thread, "embedder", e))?;
        for (s, score) in thread.sentences().zip(scores) {
            if let Some(label) = s.relevance_gold {
                x.push(Vec::from([score.cosine]));
                y.push(usize::from(label.is_relevant()));
            }
        }
    }
    Ok((x, y))
}

/// GM features and gold aspect indices for every sentence with a gold aspect.
pub fn aspect_training_data(
    threads: &[Thread],
    patterns: &PatternLists,
    moods: &dyn MoodSource,
) -> Result<(Vec<Vec<f64>>, Vec<usize>), Error> {
    let mut x = Vec::new();
    let mut y = Vec::new();
    for thread in threads {
        for s in thread.sentences() {
            if let Some(aspect) = s.aspect_gold {
                let f = featurize(&s.text, patterns, moods).map_err(|e| {
                    backend_error(thread, "moods", sentence_error(s.answer_index, s.sentence_index, e))
                })?;
                x.push(f.to_array().to_vec());
                y.push(aspect.index());
            }
        }
    }
    Ok((x, y))
}
