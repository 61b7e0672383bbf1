//! Linguistic features used by the aspect classifiers: grammatical mood
//! probabilities, personal pronouns and question cues.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{BackendError, Error};

pub const DO_PATTERNS: [&str; 23] = [
    "do i",
    "do you",
    "do they",
    "does she",
    "does he",
    "would you",
    "is there",
    "are there",
    "is it so",
    "is this true",
    "are you",
    "is he",
    "is she",
    "is that true",
    "are we",
    "am i",
    "question is",
    "tell me more",
    "can i",
    "can we",
    "tell me",
    "can you explain",
    "to ask",
];

pub const HELPING_VERBS: [&str; 8] = ["is", "am", "can", "are", "does", "would", "could", "will"];

pub const PERSONAL_PRONOUNS: [&str; 21] = [
    "i", "me", "my", "mine", "myself", "we", "us", "our", "ours", "you", "your", "yours", "he",
    "him", "his", "she", "her", "hers", "they", "them", "their",
];

/// Verbs that open an imperative sentence in the rule-based mood fallback.
pub const IMPERATIVE_VERBS: [&str; 72] = [
    "add", "apply", "ask", "avoid", "be", "breathe", "buy", "call", "change", "check", "chew",
    "consider", "consult", "contact", "cut", "do", "drink", "drop", "eat", "exercise", "find",
    "follow", "gargle", "get", "give", "go", "google", "have", "hydrate", "increase", "keep",
    "let", "lie", "limit", "look", "make", "massage", "mix", "note", "put", "quit", "read",
    "reduce", "relax", "remember", "research", "rest", "rinse", "schedule", "search", "see",
    "seek", "sit", "sleep", "soak", "start", "stay", "stop", "stretch", "switch", "take", "talk",
    "tell", "think", "treat", "try", "use", "visit", "walk", "wash", "watch", "wear",
];

/// Leading words skipped before looking for an imperative verb.
const LEADING_FILLERS: [&str; 12] = [
    "please", "just", "also", "so", "and", "then", "definitely", "always", "really", "now",
    "first", "but",
];

/// Lowercased alphanumeric word tokens.
pub fn words(sentence: &str) -> Vec<String> {
    sentence
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternLists {
    pub do_patterns: Vec<String>,
    pub helping_verbs: Vec<String>,
    pub personal_pronouns: Vec<String>,
}

impl Default for PatternLists {
    fn default() -> Self {
        let own = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect();
        Self {
            do_patterns: own(&DO_PATTERNS),
            helping_verbs: own(&HELPING_VERBS),
            personal_pronouns: own(&PERSONAL_PRONOUNS),
        }
    }
}

impl PatternLists {
    /// Lowercases and deduplicates each list (keeping first occurrences),
    /// then checks that none is empty.
    pub fn new(
        do_patterns: Vec<String>,
        helping_verbs: Vec<String>,
        personal_pronouns: Vec<String>,
    ) -> Result<Self, Error> {
        fn normalize(list: Vec<String>, name: &str) -> Result<Vec<String>, Error> {
            let mut out: Vec<String> = Vec::with_capacity(list.len());
            for item in list {
                let item = item.trim().to_lowercase();
                if !item.is_empty() && !out.contains(&item) {
                    out.push(item);
                }
            }
            if out.is_empty() {
                return Err(Error::InvalidInput(alloc::format!("pattern list {name} is empty")));
            }
            Ok(out)
        }
        Ok(Self {
            do_patterns: normalize(do_patterns, "do_patterns")?,
            helping_verbs: normalize(helping_verbs, "helping_verbs")?,
            personal_pronouns: normalize(personal_pronouns, "personal_pronouns")?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct QuestionFlags {
    pub question_mark: bool,
    pub do_pattern: bool,
    pub helping_verb: bool,
}

impl QuestionFlags {
    pub fn any(self) -> bool {
        self.question_mark || self.do_pattern || self.helping_verb
    }
}

fn contains_phrase(tokens: &[String], phrase: &str) -> bool {
    let needle: Vec<&str> = phrase.split_whitespace().collect();
    !needle.is_empty()
        && tokens
            .windows(needle.len())
            .any(|w| w.iter().zip(&needle).all(|(a, b)| a == b))
}

pub fn question_flags(sentence: &str, p: &PatternLists) -> QuestionFlags {
    let tokens = words(sentence);
    QuestionFlags {
        question_mark: sentence.trim_end().ends_with('?'),
        do_pattern: p.do_patterns.iter().any(|pat| contains_phrase(&tokens, pat)),
        helping_verb: tokens.first().is_some_and(|t| p.helping_verbs.contains(t)),
    }
}

pub fn has_personal_pronoun(sentence: &str, p: &PatternLists) -> bool {
    words(sentence).iter().any(|w| p.personal_pronouns.contains(w))
}

/// Probabilities of the three grammatical moods; always sums to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moods {
    pub imperative: f64,
    pub interrogative: f64,
    pub indicative: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mood {
    Imperative,
    Interrogative,
    Indicative,
}

impl Moods {
    /// 0.8 on `mood`, 0.1 on the other two.
    pub fn peaked(mood: Mood) -> Self {
        let at = |m: Mood| if m == mood { 0.8 } else { 0.1 };
        Self {
            imperative: at(Mood::Imperative),
            interrogative: at(Mood::Interrogative),
            indicative: at(Mood::Indicative),
        }
    }

    /// Clamps negatives and renormalizes onto the simplex.
    pub fn normalized(self) -> Result<Self, Error> {
        let vals = [self.imperative, self.interrogative, self.indicative];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite mood probability".into()));
        }
        let clamped = vals.map(|v| v.max(0.0));
        let sum: f64 = clamped.iter().sum();
        if sum <= 0.0 {
            return Err(Error::InvalidInput("mood probabilities sum to zero".into()));
        }
        Ok(Self {
            imperative: clamped[0] / sum,
            interrogative: clamped[1] / sum,
            indicative: clamped[2] / sum,
        })
    }

    pub fn dominant(&self) -> Mood {
        let mut best = (Mood::Imperative, self.imperative);
        for (m, v) in [
            (Mood::Interrogative, self.interrogative),
            (Mood::Indicative, self.indicative),
        ] {
            if v > best.1 {
                best = (m, v);
            }
        }
        best.0
    }
}

/// Source of mood probabilities.
pub trait MoodSource {
    fn moods(&self, sentence: &str) -> Result<Moods, BackendError>;
}

/// Offline mood heuristic: interrogative if any question cue fires,
/// imperative if the sentence opens with a base verb, indicative otherwise.
#[derive(Debug, Clone, Default)]
pub struct RuleFallback {
    pub patterns: PatternLists,
}

impl RuleFallback {
    pub fn new(patterns: PatternLists) -> Self {
        Self { patterns }
    }

    pub fn classify(&self, sentence: &str) -> Mood {
        if question_flags(sentence, &self.patterns).any() {
            return Mood::Interrogative;
        }
        let tokens = words(sentence);
        let mut rest = tokens
            .iter()
            .map(String::as_str)
            .skip_while(|w| LEADING_FILLERS.contains(w));
        match (rest.next(), rest.next()) {
            (Some("don"), Some("t")) | (Some("do"), Some("not")) | (Some("never"), _) => {
                Mood::Imperative
            }
            (Some(first), _) if IMPERATIVE_VERBS.contains(&first) => Mood::Imperative,
            _ => Mood::Indicative,
        }
    }
}

impl MoodSource for RuleFallback {
    fn moods(&self, sentence: &str) -> Result<Moods, BackendError> {
        Ok(Moods::peaked(self.classify(sentence)))
    }
}

pub fn mood_probabilities(sentence: &str, provider: &dyn MoodSource) -> Result<Moods, BackendError> {
    provider.moods(sentence)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub p_imperative: f64,
    pub p_interrogative: f64,
    pub p_indicative: f64,
    pub has_personal_pronoun: bool,
    pub question_mark: bool,
    pub do_pattern: bool,
    pub helping_verb: bool,
}

impl FeatureVector {
    pub const NAMES: [&'static str; 7] = [
        "p_imperative",
        "p_interrogative",
        "p_indicative",
        "has_personal_pronoun",
        "question_mark",
        "do_pattern",
        "helping_verb",
    ];

    pub fn to_array(&self) -> [f64; 7] {
        let b = |x: bool| if x { 1.0 } else { 0.0 };
        [
            self.p_imperative,
            self.p_interrogative,
            self.p_indicative,
            b(self.has_personal_pronoun),
            b(self.question_mark),
            b(self.do_pattern),
            b(self.helping_verb),
        ]
    }
}

pub fn featurize(
    sentence: &str,
    p: &PatternLists,
    provider: &dyn MoodSource,
) -> Result<FeatureVector, BackendError> {
    let moods = provider
        .moods(sentence)?
        .normalized()
        .map_err(|e| BackendError::new(alloc::format!("{e}")))?;
    let flags = question_flags(sentence, p);
    Ok(FeatureVector {
        p_imperative: moods.imperative,
        p_interrogative: moods.interrogative,
        p_indicative: moods.indicative,
        has_personal_pronoun: has_personal_pronoun(sentence, p),
        question_mark: flags.question_mark,
        do_pattern: flags.do_pattern,
        helping_verb: flags.helping_verb,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn p() -> PatternLists {
        PatternLists::default()
    }

    fn flags(s: &str) -> (bool, bool, bool) {
        let f = question_flags(s, &p());
        (f.question_mark, f.do_pattern, f.helping_verb)
    }

    #[test]
    fn question_flag_examples() {
        assert_eq!(flags("Are you low on vitamin B12?"), (true, true, true));
        assert_eq!(flags("Tell me more about your symptoms."), (false, true, false));
        assert_eq!(flags("Thyroid cancer is very slow growing."), (false, false, false));
    }

    #[test]
    fn do_pattern_is_word_bounded() {
        assert!(!question_flags("You can undo it if needed.", &p()).do_pattern);
        assert!(!question_flags("Pseudo isn't real.", &p()).do_pattern);
        assert!(question_flags("So do i need a test.", &p()).do_pattern);
    }

    #[test]
    fn pronouns() {
        let pl = p();
        assert!(has_personal_pronoun(
            "My mother had orthodontia done in her 50s with no problems.",
            &pl
        ));
        assert!(!has_personal_pronoun("Thyroid cancer is very slow growing.", &pl));
        assert!(has_personal_pronoun("Me.", &pl));
        assert!(has_personal_pronoun("I'm fine.", &pl));
    }

    #[test]
    fn default_lists() {
        let pl = p();
        assert_eq!(pl.do_patterns.len(), 23);
        assert_eq!(pl.helping_verbs.len(), 8);
        assert_eq!(pl.personal_pronouns.len(), 21);
        let rebuilt = PatternLists::new(
            pl.do_patterns.clone(),
            ["is", "am", "can", "are", "does", "would", "could", "can", "will"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            pl.personal_pronouns.clone(),
        )
        .unwrap();
        assert_eq!(rebuilt, pl);
        assert!(PatternLists::new(vec![], vec!["is".into()], vec!["i".into()]).is_err());
    }

    #[test]
    fn rule_moods() {
        let r = RuleFallback::default();
        assert_eq!(r.classify("Try essential oils."), Mood::Imperative);
        assert_eq!(r.classify("Just don't scratch it."), Mood::Imperative);
        assert_eq!(r.classify("Are you low on vitamin B12?"), Mood::Interrogative);
        assert_eq!(r.classify("Thyroid cancer is very slow growing."), Mood::Indicative);
        let m = r.moods("Try essential oils.").unwrap();
        assert_eq!(m.dominant(), Mood::Imperative);
        assert!((m.imperative + m.interrogative + m.indicative - 1.0).abs() < 1e-12);
    }

    #[test]
    fn featurize_examples() {
        let r = RuleFallback::default();
        let f = featurize("What is your condition?", &p(), &r).unwrap();
        assert!(f.question_mark);
        assert!(f.p_interrogative > f.p_imperative && f.p_interrogative > f.p_indicative);
        let g = featurize("mine is treated with a machine which i wear while i sleep.", &p(), &r)
            .unwrap();
        assert!(g.has_personal_pronoun);
        assert_eq!(g, featurize("mine is treated with a machine which i wear while i sleep.", &p(), &r).unwrap());
    }

    #[test]
    fn normalize_rejects_degenerate() {
        let zero = Moods { imperative: 0.0, interrogative: 0.0, indicative: 0.0 };
        assert!(zero.normalized().is_err());
        let m = Moods { imperative: 2.0, interrogative: 1.0, indicative: 1.0 }.normalized().unwrap();
        assert_eq!(m.imperative, 0.5);
    }
}
