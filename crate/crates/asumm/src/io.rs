//! JSON-lines thread and summary files, plus atomic writes.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use asumm_core::{Answer, Aspect, Relevance, SentenceRecord, SummarySet, Thread};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-sentence labels in the annotated thread format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceLabels {
    pub text: String,
    #[serde(default)]
    pub relevance: Option<Relevance>,
    #[serde(default)]
    pub aspect: Option<Aspect>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relevance_pred: Option<Relevance>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aspect_pred: Option<Aspect>,
}

/// One line of a thread file. `sentences`, when present, holds one array per
/// answer aligned with the tokenized sentences of that answer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThreadRecord {
    pub thread_id: String,
    pub category: String,
    pub subject: String,
    #[serde(default)]
    pub content: String,
    pub answers: Vec<String>,
    #[serde(default)]
    pub best_answer_index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sentences: Option<Vec<Vec<SentenceLabels>>>,
}

impl ThreadRecord {
    pub fn into_thread(self) -> std::result::Result<Thread, String> {
        if let Some(sentences) = &self.sentences {
            if sentences.len() != self.answers.len() {
                return Err(format!(
                    "{} sentence arrays for {} answers",
                    sentences.len(),
                    self.answers.len()
                ));
            }
        }
        let sentences = self.sentences.unwrap_or_default();
        let mut thread = Thread {
            thread_id: self.thread_id,
            category: self.category,
            subject: self.subject,
            content: self.content,
            answers: Vec::with_capacity(self.answers.len()),
            best_answer_index: self.best_answer_index,
        };
        let mut sentences = sentences.into_iter();
        for (i, raw_text) in self.answers.into_iter().enumerate() {
            let labels = sentences.next().unwrap_or_default();
            thread.answers.push(Answer {
                answer_index: i,
                raw_text,
                sentences: labels
                    .into_iter()
                    .enumerate()
                    .map(|(j, l)| SentenceRecord {
                        text: l.text,
                        answer_index: i,
                        sentence_index: j,
                        relevance_gold: match (l.relevance, l.aspect) {
                            (None, Some(_)) => Some(Relevance::Relevant),
                            (r, _) => r,
                        },
                        aspect_gold: l.aspect,
                        relevance_pred: l.relevance_pred,
                        aspect_pred: l.aspect_pred,
                    })
                    .collect(),
            });
        }
        thread.validate().map_err(|e| e.to_string())?;
        Ok(thread)
    }

    pub fn from_thread(thread: &Thread) -> Self {
        let annotated = thread.answers.iter().any(|a| !a.sentences.is_empty());
        Self {
            thread_id: thread.thread_id.clone(),
            category: thread.category.clone(),
            subject: thread.subject.clone(),
            content: thread.content.clone(),
            answers: thread.answers.iter().map(|a| a.raw_text.clone()).collect(),
            best_answer_index: thread.best_answer_index,
            sentences: annotated.then(|| {
                thread
                    .answers
                    .iter()
                    .map(|a| {
                        a.sentences
                            .iter()
                            .map(|s| SentenceLabels {
                                text: s.text.clone(),
                                relevance: s.relevance_gold,
                                aspect: s.aspect_gold,
                                relevance_pred: s.relevance_pred,
                                aspect_pred: s.aspect_pred,
                            })
                            .collect()
                    })
                    .collect()
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Ingested {
    pub threads: Vec<Thread>,
    /// Records dropped because they had no answers.
    pub skipped: Vec<String>,
}

fn open(path: &Path) -> Result<BufReader<fs::File>> {
    fs::File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

/// Parses every non-blank line of a JSON-lines file, passing the 1-based
/// line number along.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<(usize, T)>> {
    let mut out = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let value = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push((i + 1, value));
    }
    Ok(out)
}

/// Reads a thread file (plain or annotated). Records with no answers are
/// skipped and counted; duplicate ids are an error.
pub fn read_threads(path: &Path) -> Result<Ingested> {
    let mut seen = BTreeSet::new();
    let mut out = Ingested::default();
    for (line, record) in read_jsonl::<ThreadRecord>(path)? {
        if !seen.insert(record.thread_id.clone()) {
            return Err(Error::Duplicate {
                path: path.to_path_buf(),
                line,
                thread_id: record.thread_id,
            });
        }
        if record.answers.is_empty() {
            log::warn!("{}:{line}: thread {} has no answers; skipped", path.display(), record.thread_id);
            out.skipped.push(record.thread_id);
            continue;
        }
        let thread = record.into_thread().map_err(|message| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        })?;
        out.threads.push(thread);
    }
    Ok(out)
}

pub fn write_threads(path: &Path, threads: &[Thread]) -> Result<()> {
    let records: Vec<ThreadRecord> = threads.iter().map(ThreadRecord::from_thread).collect();
    write_jsonl(path, &records)
}

/// Reads a summary file; empty summaries are dropped, duplicate ids rejected.
pub fn read_summaries(path: &Path) -> Result<Vec<SummarySet>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (line, raw) in read_jsonl::<SummarySet>(path)? {
        if !seen.insert(raw.thread_id.clone()) {
            return Err(Error::Duplicate {
                path: path.to_path_buf(),
                line,
                thread_id: raw.thread_id,
            });
        }
        let mut set = SummarySet::new(raw.thread_id);
        for (aspect, text) in raw.summaries {
            set.insert(aspect, text);
        }
        out.push(set);
    }
    Ok(out)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })
}

/// Plain-text list, one entry per line; blank lines and `#` comments skipped.
pub fn read_list(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect())
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let name = path
        .file_name()
        .ok_or_else(|| Error::Usage(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp-{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(Error::io(path, e));
    }
    Ok(())
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let mut buf = Vec::new();
    for item in items {
        serde_json::to_writer(&mut buf, item).expect("serializable record");
        buf.push(b'\n');
    }
    write_atomic(path, &buf)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut buf = serde_json::to_vec_pretty(value).expect("serializable value");
    buf.push(b'\n');
    write_atomic(path, &buf)
}

/// Index threads by id.
pub fn by_id(threads: &[Thread]) -> BTreeMap<&str, &Thread> {
    threads.iter().map(|t| (t.thread_id.as_str(), t)).collect()
}
