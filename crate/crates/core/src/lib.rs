//! Aspect-based answer summarization for community question answering threads.
//!
//! The crate turns noisy forum threads into one summary per answer aspect
//! (suggestion, experience, information, clarifying question). It is split
//! into the stages a thread passes through:
//!
//!  - [`textprep`] cleans raw answers and splits them into sentences.
//!  - [`sampler`] removes answer-count outliers with Tukey fences and draws
//!    a fixed number of threads per category.
//!  - [`corpus`] holds the data model and the stratified train/val/test split.
//!  - [`lingfeat`] extracts mood, pronoun and question features.
//!  - [`classify`] hosts logistic regression, zero-shot label mapping,
//!    triplet construction and the relevance/aspect stages.
//!  - [`pipeline`] chunks sentences by aspect and summarizes each chunk.
//!  - [`evalkit`] implements ROUGE, P/R/F1, confusion matrices, Cohen's kappa
//!    and compression statistics.
//!
//! Everything here is `no_std` (with `alloc`). Model inference that needs a
//! neural network is reached through the backend traits in
//! [`classify::backend`] and [`pipeline::AbstractiveSummarizer`]; the `asumm`
//! crate provides HTTP and offline implementations of them.
#![no_std]
#![deny(rust_2018_idioms, unused_must_use)]
#![warn(missing_debug_implementations)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod classify;
pub mod corpus;
pub mod error;
pub mod evalkit;
pub mod lingfeat;
pub mod pipeline;
pub mod sampler;
pub mod textprep;
mod util;

pub use corpus::{
    Answer, Aspect, Relevance, SentenceRecord, Split, SplitAssignment, SummarySet, Thread,
};
pub use error::{BackendError, Error};
pub use util::{fnv1a64, word_count};
