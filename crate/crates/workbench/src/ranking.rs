//! Reviewer rankings of the methods with desirability-word picks.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use topicbench_core::models::Method;
use topicbench_core::stats::MetricTable;

use crate::error::{Error, Result};

const BUILTIN_WORDS: &str = include_str!("../assets/desirability_words.json");

/// The configured desirability vocabulary and per-method pick limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordList {
    pub max_words_per_method: usize,
    pub words: Vec<String>,
}

impl WordList {
    pub fn builtin() -> Self {
        serde_json::from_str(BUILTIN_WORDS).expect("bundled word list parses")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let list: WordList =
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        if list.words.is_empty() {
            return Err(Error::Config(format!("{}: word list is empty", path.display())));
        }
        Ok(list)
    }

    /// Canonical spelling of `word`, matched case-insensitively.
    fn canonical(&self, word: &str) -> Option<&str> {
        let w = word.trim();
        self.words.iter().find(|c| c.eq_ignore_ascii_case(w)).map(String::as_str)
    }
}

/// Ranking as submitted by a client, before validation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RankingSubmission {
    pub dataset: String,
    pub reviewer: String,
    /// Best first.
    pub ordering: Vec<String>,
    #[serde(default)]
    pub words: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub notes: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingRecord {
    pub dataset: String,
    pub reviewer: String,
    pub ordering: Vec<Method>,
    pub words: BTreeMap<Method, Vec<String>>,
    pub notes: String,
    pub timestamp: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl FieldError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

/// Checks a submission against the methods available for its dataset
/// (`None` = unknown dataset) and returns the record to store.
pub fn validate_submission(
    sub: &RankingSubmission,
    available: Option<&[Method]>,
    words: &WordList,
    now: DateTime<Utc>,
) -> std::result::Result<RankingRecord, Vec<FieldError>> {
    let mut errors = Vec::new();
    if sub.dataset.trim().is_empty() {
        errors.push(FieldError::new("dataset", "must not be empty"));
    } else if available.is_none() {
        errors.push(FieldError::new("dataset", format!("unknown dataset {:?}", sub.dataset)));
    }
    if sub.reviewer.trim().is_empty() {
        errors.push(FieldError::new("reviewer", "must not be empty"));
    }

    let available = available.unwrap_or(&[]);
    let mut ordering = Vec::new();
    for (i, m) in sub.ordering.iter().enumerate() {
        match m.parse::<Method>() {
            Ok(m) => ordering.push(m),
            Err(_) => errors.push(FieldError::new(format!("ordering[{i}]"), format!("unknown method {m:?}"))),
        }
    }
    if ordering.len() == sub.ordering.len() && !available.is_empty() {
        let given: BTreeSet<Method> = ordering.iter().copied().collect();
        let expected: BTreeSet<Method> = available.iter().copied().collect();
        if given != expected || ordering.len() != expected.len() {
            let names: Vec<&str> = expected.iter().map(|m| m.as_str()).collect();
            errors.push(FieldError::new(
                "ordering",
                format!("must list each of {} exactly once", names.join(", ")),
            ));
        }
    }

    let mut picks = BTreeMap::new();
    for (key, list) in &sub.words {
        let field = format!("words.{key}");
        let method = match key.parse::<Method>() {
            Ok(m) if available.is_empty() || available.contains(&m) => m,
            _ => {
                errors.push(FieldError::new(field, format!("{key:?} is not a method of this dataset")));
                continue;
            }
        };
        if list.len() > words.max_words_per_method {
            errors.push(FieldError::new(
                &field,
                format!("at most {} words per method, got {}", words.max_words_per_method, list.len()),
            ));
        }
        let mut chosen: Vec<String> = Vec::new();
        for w in list {
            match words.canonical(w) {
                Some(c) if chosen.iter().any(|x| x == c) => {
                    errors.push(FieldError::new(&field, format!("{w:?} selected twice")));
                }
                Some(c) => chosen.push(c.to_string()),
                None => errors.push(FieldError::new(&field, format!("{w:?} is not in the word list"))),
            }
        }
        picks.insert(method, chosen);
    }

    if !errors.is_empty() {
        return Err(errors);
    }
    Ok(RankingRecord {
        dataset: sub.dataset.clone(),
        reviewer: sub.reviewer.trim().to_string(),
        ordering,
        words: picks,
        notes: sub.notes.clone(),
        timestamp: now,
    })
}

/// Append-only JSON-lines file; appends are serialized through one lock.
#[derive(Debug)]
pub struct RankingStore {
    path: PathBuf,
    lock: Mutex<()>,
}

impl RankingStore {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        Self {
            path: path.into(),
            lock: Mutex::new(()),
        }
    }

    pub fn append(&self, record: &RankingRecord) -> Result<()> {
        let _guard = self.lock.lock().unwrap_or_else(|e| e.into_inner());
        let mut line = serde_json::to_vec(record)?;
        line.push(b'\n');
        let mut file = OpenOptions::new().create(true).append(true).open(&self.path)?;
        file.write_all(&line)?;
        file.flush()?;
        Ok(())
    }

    /// All records in insertion order, optionally for one dataset.
    pub fn list(&self, dataset: Option<&str>) -> Result<Vec<RankingRecord>> {
        let _guard = self.lock.lock().unwrap_or_else(|e| e.into_inner());
        read_rankings(&self.path, dataset)
    }
}

pub fn read_rankings(path: &Path, dataset: Option<&str>) -> Result<Vec<RankingRecord>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for (i, line) in BufReader::new(std::fs::File::open(path)?).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: RankingRecord = serde_json::from_str(&line).map_err(|e| Error::Artifact {
            path: path.to_path_buf(),
            reason: format!("line {}: {e}", i + 1),
        })?;
        if dataset.is_none_or(|d| d == rec.dataset) {
            out.push(rec);
        }
    }
    Ok(out)
}

/// Rank positions (1 = best) with one row per record and one column per
/// method. Only records that rank all of `methods` are used; `None` when
/// fewer than two remain.
pub fn ranking_table(records: &[RankingRecord], methods: &[Method]) -> Option<MetricTable> {
    let rows: Vec<(String, Vec<f64>)> = records
        .iter()
        .filter(|r| r.ordering.len() == methods.len() && methods.iter().all(|m| r.ordering.contains(m)))
        .enumerate()
        .map(|(i, r)| {
            let label = format!("{}:{}:{}", r.dataset, r.reviewer, i);
            let ranks = methods
                .iter()
                .map(|m| (r.ordering.iter().position(|x| x == m).unwrap() + 1) as f64)
                .collect();
            (label, ranks)
        })
        .collect();
    if rows.len() < 2 {
        return None;
    }
    let (labels, values): (Vec<String>, Vec<Vec<f64>>) = rows.into_iter().unzip();
    MetricTable::new(labels, methods.iter().map(|m| m.to_string()).collect(), values).ok()
}
