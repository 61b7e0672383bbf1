//! Mapping of zero-shot NLI labels onto aspects.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::corpus::Aspect;
use crate::error::Error;
use crate::lingfeat::{has_personal_pronoun, PatternLists};

pub const CANDIDATE_LABELS: [&str; 12] = [
    "informative",
    "information",
    "cause",
    "question",
    "interrogative",
    "suggestion",
    "imperative",
    "instruction",
    "command",
    "personal experience",
    "experience",
    "personal",
];

const INFORMATION_LABELS: [&str; 3] = ["informative", "information", "cause"];
const QUESTION_LABELS: [&str; 2] = ["question", "interrogative"];
const SUGGESTION_LABELS: [&str; 4] = ["suggestion", "imperative", "instruction", "command"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZsVariant {
    /// Label mapping only.
    Zs,
    /// Information labels become Experience when the sentence has a
    /// personal pronoun.
    ZsPp,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZsLabelMap {
    pub candidate_labels: Vec<String>,
}

impl Default for ZsLabelMap {
    fn default() -> Self {
        Self {
            candidate_labels: CANDIDATE_LABELS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl ZsLabelMap {
    /// Aspect for a candidate label; labels outside the information,
    /// question and suggestion groups fall back to Experience.
    pub fn aspect_for(&self, label: &str) -> Result<Aspect, Error> {
        let label = label.trim();
        if !self.candidate_labels.iter().any(|c| c == label) {
            return Err(Error::UnknownLabel(label.to_string()));
        }
        Ok(if INFORMATION_LABELS.contains(&label) {
            Aspect::Information
        } else if QUESTION_LABELS.contains(&label) {
            Aspect::Question
        } else if SUGGESTION_LABELS.contains(&label) {
            Aspect::Suggestion
        } else {
            Aspect::Experience
        })
    }

    pub fn map(
        &self,
        nli_label: &str,
        sentence: &str,
        variant: ZsVariant,
        patterns: &PatternLists,
    ) -> Result<Aspect, Error> {
        let aspect = self.aspect_for(nli_label)?;
        Ok(match (variant, aspect) {
            (ZsVariant::ZsPp, Aspect::Information) if has_personal_pronoun(sentence, patterns) => {
                Aspect::Experience
            }
            _ => aspect,
        })
    }
}

/// [`ZsLabelMap::map`] over the default candidate labels.
pub fn zs_map(
    nli_label: &str,
    sentence: &str,
    variant: ZsVariant,
    patterns: &PatternLists,
) -> Result<Aspect, Error> {
    ZsLabelMap::default().map(nli_label, sentence, variant, patterns)
}
