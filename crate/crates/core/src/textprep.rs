//! Cleaning and sentence splitting of raw forum answers.
//!
//! [`clean`] normalizes a raw answer into a single line: lines are joined or
//! terminated, URLs, emoticons and noise symbols are dropped, and repeated
//! terminal punctuation is collapsed. [`tokenize`] then splits the cleaned
//! text into sentences, never breaking inside a configured abbreviation or a
//! list numeral, and drops fragments with too few alphanumeric characters.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::corpus::{SentenceRecord, Thread};
use crate::error::Error;

pub const DEFAULT_GUARDS: [&str; 6] = ["etc.", "M.D.", "dr.", "i.e.", "P.S.", "L.A."];

pub const DEFAULT_STRIP_SYMBOLS: [char; 10] = ['~', '*', '(', ')', '>', '<', '"', '\'', ':', '-'];

/// ASCII emoticons removed by [`clean`], longest first.
pub const EMOTICONS: [&str; 27] = [
    ":'-(", ":-)", ":-(", ":-D", ":-P", ":-p", ";-)", ":-/", ":-|", "^_^", "-_-", ":'(", ":)",
    ":(", ":D", ":P", ":p", ";)", ":/", ":|", ":o", ":O", "xD", "XD", "<3", "^^", "=)",
];

const URL_PREFIXES: [&str; 3] = ["http://", "https://", "www."];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CleanerConfig {
    /// Tokens whose trailing period never ends a sentence. Guards written
    /// with an uppercase letter match case-sensitively, all-lowercase guards
    /// match case-insensitively.
    pub abbreviation_guards: Vec<String>,
    pub strip_symbols: Vec<char>,
    pub min_alnum: usize,
}

impl Default for CleanerConfig {
    fn default() -> Self {
        Self {
            abbreviation_guards: DEFAULT_GUARDS.iter().map(|g| g.to_string()).collect(),
            strip_symbols: DEFAULT_STRIP_SYMBOLS.to_vec(),
            min_alnum: 2,
        }
    }
}

impl CleanerConfig {
    pub fn with_guards<I, S>(guards: I) -> Result<Self, Error>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let cfg = Self {
            abbreviation_guards: guards
                .into_iter()
                .map(Into::into)
                .map(|g: String| g.trim().to_string())
                .filter(|g| !g.is_empty())
                .collect(),
            ..Self::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.abbreviation_guards.is_empty() {
            return Err(Error::InvalidInput("abbreviation guard list is empty".into()));
        }
        if self.min_alnum == 0 {
            return Err(Error::InvalidInput("min_alnum must be at least 1".into()));
        }
        Ok(())
    }
}

fn is_terminal(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

fn ends_terminal(s: &str) -> bool {
    s.chars().next_back().is_some_and(is_terminal)
}

/// Cleans a raw answer into a single normalized line.
pub fn clean(raw: &str, cfg: &CleanerConfig) -> String {
    // Blank lines separate paragraphs; lines that only held noise vanish.
    let mut paragraphs: Vec<Vec<String>> = Vec::new();
    let mut current: Vec<String> = Vec::new();
    for line in raw.lines() {
        if line.trim().is_empty() {
            if !current.is_empty() {
                paragraphs.push(core::mem::take(&mut current));
            }
            continue;
        }
        let scrubbed = scrub_line(line, cfg);
        if !scrubbed.is_empty() {
            current.push(scrubbed);
        }
    }
    if !current.is_empty() {
        paragraphs.push(current);
    }

    let mut joined = String::with_capacity(raw.len() + 8);
    for lines in &paragraphs {
        if !joined.is_empty() {
            joined.push(' ');
        }
        for (i, line) in lines.iter().enumerate() {
            joined.push_str(line);
            match lines.get(i + 1) {
                Some(next) => {
                    let continues = ends_terminal(line)
                        || next.chars().next().is_some_and(char::is_lowercase);
                    if !continues {
                        joined.push('.');
                    }
                    joined.push(' ');
                }
                None => {
                    if !ends_terminal(line) {
                        joined.push('.');
                    }
                }
            }
        }
    }
    normalize_punctuation(&joined)
}

/// Removes URLs, emoticons and stripped symbols from one line.
fn scrub_line(line: &str, cfg: &CleanerConfig) -> String {
    let without_urls = remove_urls(line, cfg);
    let without_emoticons = remove_emoticons(&without_urls);
    let stripped: String = without_emoticons
        .chars()
        .filter(|c| !cfg.strip_symbols.contains(c))
        .collect();
    collapse_whitespace(&stripped)
}

fn remove_urls(line: &str, cfg: &CleanerConfig) -> String {
    let mut out = String::with_capacity(line.len());
    for token in line.split_whitespace() {
        let body = token.trim_start_matches(|c| cfg.strip_symbols.contains(&c));
        let lower = body.to_ascii_lowercase();
        let piece = if URL_PREFIXES.iter().any(|p| lower.starts_with(p)) {
            // Keep sentence-final punctuation that trailed the URL.
            let keep = token.len() - token.trim_end_matches(is_terminal).len();
            &token[token.len() - keep..]
        } else {
            token
        };
        if piece.is_empty() {
            continue;
        }
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(piece);
    }
    out
}

fn remove_emoticons(line: &str) -> String {
    let mut out = String::with_capacity(line.len());
    let mut prev: Option<char> = None;
    let mut rest = line;
    'scan: while let Some(c) = rest.chars().next() {
        for emo in EMOTICONS {
            if !rest.starts_with(emo) {
                continue;
            }
            let first = emo.chars().next().unwrap_or(' ');
            let last = emo.chars().next_back().unwrap_or(' ');
            let after = rest[emo.len()..].chars().next();
            let start_ok = !first.is_alphanumeric() || !prev.is_some_and(char::is_alphanumeric);
            let end_ok = !last.is_alphanumeric() || !after.is_some_and(char::is_alphanumeric);
            if start_ok && end_ok {
                rest = &rest[emo.len()..];
                out.push(' ');
                prev = Some(' ');
                continue 'scan;
            }
        }
        out.push(c);
        prev = Some(c);
        rest = &rest[c.len_utf8()..];
    }
    out
}

fn collapse_whitespace(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for word in s.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

/// Drops whitespace before punctuation and collapses runs of the same
/// terminal mark ("..." → ".", "??" → "?", "!!!" → "!").
fn normalize_punctuation(s: &str) -> String {
    let collapsed = collapse_whitespace(s);
    let mut out = String::with_capacity(collapsed.len());
    for c in collapsed.chars() {
        if is_terminal(c) || c == ',' || c == ';' {
            while out.ends_with(' ') {
                out.pop();
            }
        }
        if is_terminal(c) && out.ends_with(c) {
            continue;
        }
        out.push(c);
    }
    out.trim().to_string()
}

/// Splits cleaned text into sentences.
pub fn tokenize(cleaned: &str, cfg: &CleanerConfig) -> Vec<String> {
    let chars: Vec<(usize, char)> = cleaned.char_indices().collect();
    let mut sentences = Vec::new();
    let mut sentence_start = 0usize; // index into `chars`
    let mut i = 0usize;
    while i < chars.len() {
        if !is_terminal(chars[i].1) {
            i += 1;
            continue;
        }
        let run_start = i;
        while i < chars.len() && is_terminal(chars[i].1) {
            i += 1;
        }
        if is_split_point(cleaned, &chars, sentence_start, run_start, i, cfg) {
            push_sentence(&mut sentences, cleaned, &chars, sentence_start, i, cfg);
            sentence_start = i;
        }
    }
    push_sentence(&mut sentences, cleaned, &chars, sentence_start, chars.len(), cfg);
    sentences
}

fn byte_at(cleaned: &str, chars: &[(usize, char)], idx: usize) -> usize {
    chars.get(idx).map_or(cleaned.len(), |&(b, _)| b)
}

/// Decides whether the terminal run `chars[run_start..run_end]` ends a sentence.
fn is_split_point(
    cleaned: &str,
    chars: &[(usize, char)],
    sentence_start: usize,
    run_start: usize,
    run_end: usize,
    cfg: &CleanerConfig,
) -> bool {
    let Some(&(_, next)) = chars.get(run_end) else {
        return true;
    };
    let last = chars[run_end - 1].1;
    let before = run_start.checked_sub(1).map(|j| chars[j].1);
    let run_end_byte = byte_at(cleaned, chars, run_end);

    if last == '.' && ends_with_guard(&cleaned[..run_end_byte], cfg) {
        return false;
    }

    if next.is_whitespace() {
        if last != '.' || !before.is_some_and(|c| c.is_ascii_digit()) {
            return true;
        }
        // "." after a digit: keep "3. 4" and list markers ("1. Rest") together.
        let following = chars[run_end..].iter().map(|&(_, c)| c).find(|c| !c.is_whitespace());
        if following.is_some_and(|c| c.is_ascii_digit()) {
            return false;
        }
        let head = cleaned[byte_at(cleaned, chars, sentence_start)..byte_at(cleaned, chars, run_start)]
            .trim();
        return !(head.chars().all(|c| c.is_ascii_digit()) && !head.is_empty());
    }

    if !next.is_alphabetic() {
        return false;
    }
    if last != '.' {
        // "fine!It" splits, "Yahoo!answers" does not.
        return next.is_uppercase();
    }
    // A period glued to the next word, as in "bodies.try washing".
    let mut j = run_start;
    while j > 0 && chars[j - 1].1.is_alphabetic() {
        j -= 1;
    }
    let prev_len = run_start - j;
    let prev_boundary_ok = j == 0 || chars[j - 1].1.is_whitespace();
    let mut k = run_end;
    while k < chars.len() && chars[k].1.is_alphabetic() {
        k += 1;
    }
    let next_len = k - run_end;
    let after_next = chars.get(k).map(|&(_, c)| c);
    let next_ok = next_len >= 2
        || (next.is_uppercase() && after_next.is_none_or(char::is_whitespace));
    prev_len >= 2 && prev_boundary_ok && next_ok
}

fn ends_with_guard(prefix: &str, cfg: &CleanerConfig) -> bool {
    cfg.abbreviation_guards.iter().any(|guard| {
        if prefix.len() < guard.len() || !prefix.is_char_boundary(prefix.len() - guard.len()) {
            return false;
        }
        let start = prefix.len() - guard.len();
        let tail = &prefix[start..];
        let matches = if guard.chars().any(char::is_uppercase) {
            tail == guard
        } else {
            tail.eq_ignore_ascii_case(guard)
        };
        matches
            && prefix[..start]
                .chars()
                .next_back()
                .is_none_or(|c| !c.is_alphanumeric())
    })
}

fn push_sentence(
    out: &mut Vec<String>,
    cleaned: &str,
    chars: &[(usize, char)],
    from: usize,
    to: usize,
    cfg: &CleanerConfig,
) {
    let raw = &cleaned[byte_at(cleaned, chars, from)..byte_at(cleaned, chars, to)];
    let mut sentence = collapse_whitespace(raw);
    if sentence.chars().filter(|c| c.is_alphanumeric()).count() < cfg.min_alnum {
        return;
    }
    if !ends_terminal(&sentence) {
        while sentence.ends_with([',', ';', ' ']) {
            sentence.pop();
        }
        sentence.push('.');
    }
    out.push(sentence);
}

/// `tokenize(clean(raw))`.
pub fn split_answer(raw: &str, cfg: &CleanerConfig) -> Vec<String> {
    tokenize(&clean(raw, cfg), cfg)
}

/// Populates the sentences of every answer from its raw text.
///
/// Answers whose existing sentences already equal the fresh tokenization are
/// left untouched, so gold and predicted labels survive a re-run.
pub fn preprocess_thread(mut thread: Thread, cfg: &CleanerConfig) -> Thread {
    for answer in &mut thread.answers {
        let texts = split_answer(&answer.raw_text, cfg);
        let unchanged = answer.sentences.len() == texts.len()
            && answer
                .sentences
                .iter()
                .zip(&texts)
                .enumerate()
                .all(|(i, (s, t))| {
                    s.text == *t && s.sentence_index == i && s.answer_index == answer.answer_index
                });
        if unchanged {
            continue;
        }
        answer.sentences = texts
            .into_iter()
            .enumerate()
            .map(|(i, text)| SentenceRecord::new(text, answer.answer_index, i))
            .collect();
    }
    thread
}
