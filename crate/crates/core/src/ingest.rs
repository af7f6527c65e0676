//! Archived subreddit dumps: zstd-framed NDJSON decoding, month bucketing and
//! merging of submissions with their comments into thread documents.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Datelike};
use serde::{Deserialize, Deserializer, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

const ZSTD_MAGIC: [u8; 4] = [0x28, 0xb5, 0x2f, 0xfd];

/// Bucket key used for records without a usable timestamp.
pub const UNKNOWN_MONTH: &str = "unknown";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubmissionRecord {
    pub id: String,
    #[serde(default, deserialize_with = "null_as_empty")]
    pub title: String,
    #[serde(default, deserialize_with = "null_as_empty")]
    pub selftext: String,
    #[serde(deserialize_with = "epoch_seconds")]
    pub created_utc: i64,
    #[serde(default, deserialize_with = "null_as_empty")]
    pub subreddit: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommentRecord {
    pub id: String,
    pub link_id: String,
    #[serde(default, deserialize_with = "null_as_empty")]
    pub body: String,
    #[serde(deserialize_with = "epoch_seconds")]
    pub created_utc: i64,
}

/// A submission merged with all of its comments.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Thread {
    pub id: String,
    pub text: String,
    pub comment_count: usize,
}

fn null_as_empty<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<String, D::Error> {
    Ok(Option::<String>::deserialize(d)?.unwrap_or_default())
}

// Dumps from different years store the timestamp as an integer, a float or a string.
fn epoch_seconds<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<i64, D::Error> {
    use serde::de::Error as _;
    match Value::deserialize(d)? {
        Value::Number(n) => n
            .as_i64()
            .or_else(|| n.as_f64().map(|f| f as i64))
            .ok_or_else(|| D::Error::custom("created_utc out of range")),
        Value::String(s) => s
            .trim()
            .parse::<f64>()
            .map(|f| f as i64)
            .map_err(D::Error::custom),
        other => Err(D::Error::custom(format!("created_utc has type {other}"))),
    }
}

impl SubmissionRecord {
    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::Validation("submission id is empty".into()));
        }
        if self.created_utc < 0 {
            return Err(Error::Validation(format!("submission {} has negative created_utc", self.id)));
        }
        Ok(())
    }
}

impl CommentRecord {
    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::Validation("comment id is empty".into()));
        }
        if !self.link_id.starts_with("t3_") {
            return Err(Error::Validation(format!(
                "comment {} link_id {:?} lacks the t3_ prefix",
                self.id, self.link_id
            )));
        }
        Ok(())
    }

    /// Submission id this comment belongs to, without the `t3_` kind prefix.
    pub fn submission_id(&self) -> Option<&str> {
        self.link_id.strip_prefix("t3_")
    }
}

/// Streaming reader over an NDJSON dump, zstd-compressed or plain.
///
/// Malformed lines are skipped and counted; I/O and decoding failures end the
/// stream with an error.
pub struct DumpReader {
    lines: std::io::Lines<BufReader<Box<dyn Read>>>,
    path: PathBuf,
    malformed: usize,
    failed: bool,
}

impl DumpReader {
    pub fn malformed_lines(&self) -> usize {
        self.malformed
    }
}

impl Iterator for DumpReader {
    type Item = Result<Value>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        loop {
            let line = match self.lines.next()? {
                Ok(line) => line,
                Err(e) => {
                    self.failed = true;
                    return Some(Err(Error::Ingest {
                        path: self.path.clone(),
                        reason: e.to_string(),
                    }));
                }
            };
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str::<Value>(&line) {
                Ok(v @ Value::Object(_)) => return Some(Ok(v)),
                Ok(_) | Err(_) => {
                    self.malformed += 1;
                    log::warn!("{}: skipping malformed line", self.path.display());
                }
            }
        }
    }
}

/// Opens a zstd-compressed NDJSON dump. An empty file is a valid, empty dump.
pub fn decompress_dump(path: impl AsRef<Path>) -> Result<DumpReader> {
    let path = path.as_ref();
    let ingest_err = |reason: String| Error::Ingest {
        path: path.to_path_buf(),
        reason,
    };
    let mut file = File::open(path).map_err(|e| ingest_err(e.to_string()))?;
    let mut magic = [0u8; 4];
    let read = read_prefix(&mut file, &mut magic).map_err(|e| ingest_err(e.to_string()))?;
    let reader: Box<dyn Read> = if read == 0 {
        Box::new(std::io::empty())
    } else if read == 4 && magic == ZSTD_MAGIC {
        let file = File::open(path).map_err(|e| ingest_err(e.to_string()))?;
        // Pushshift archives use long-distance windows beyond the decoder default.
        let mut decoder = zstd::stream::read::Decoder::new(file).map_err(|e| ingest_err(e.to_string()))?;
        decoder
            .window_log_max(31)
            .map_err(|e| ingest_err(e.to_string()))?;
        Box::new(decoder)
    } else {
        return Err(ingest_err("not a zstd frame".into()));
    };
    Ok(DumpReader {
        lines: BufReader::new(reader).lines(),
        path: path.to_path_buf(),
        malformed: 0,
        failed: false,
    })
}

fn read_prefix(file: &mut File, buf: &mut [u8]) -> std::io::Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match file.read(&mut buf[filled..])? {
            0 => break,
            n => filled += n,
        }
    }
    Ok(filled)
}

/// Opens a dump by extension: `.zst` is decompressed, anything else is read as
/// plain NDJSON.
pub fn open_dump(path: impl AsRef<Path>) -> Result<DumpReader> {
    let path = path.as_ref();
    if path.extension().is_some_and(|e| e == "zst") {
        return decompress_dump(path);
    }
    let file = File::open(path).map_err(|e| Error::Ingest {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    let reader: Box<dyn Read> = Box::new(file);
    Ok(DumpReader {
        lines: BufReader::new(reader).lines(),
        path: path.to_path_buf(),
        malformed: 0,
        failed: false,
    })
}

/// Records read from one dump plus the number of skipped lines.
#[derive(Debug, Default)]
pub struct DumpContents {
    pub records: Vec<Value>,
    pub malformed: usize,
}

pub fn read_dump(path: impl AsRef<Path>) -> Result<DumpContents> {
    let mut reader = open_dump(path)?;
    let mut records = Vec::new();
    for record in reader.by_ref() {
        records.push(record?);
    }
    Ok(DumpContents {
        records,
        malformed: reader.malformed_lines(),
    })
}

/// Writes records as zstd-compressed NDJSON, one compact JSON object per line.
pub fn write_dump(path: impl AsRef<Path>, records: &[Value]) -> Result<()> {
    let file = File::create(path)?;
    let mut encoder = zstd::stream::write::Encoder::new(file, 3)?;
    for record in records {
        serde_json::to_writer(&mut encoder, record)?;
        encoder.write_all(b"\n")?;
    }
    encoder.finish()?;
    Ok(())
}

/// Month buckets keyed `YYYY-MM` (UTC), plus the [`UNKNOWN_MONTH`] bucket.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct MonthPartition {
    pub buckets: BTreeMap<String, Vec<Value>>,
    pub warnings: usize,
}

pub fn month_key(created_utc: i64) -> Option<String> {
    if created_utc < 0 {
        return None;
    }
    let dt = DateTime::from_timestamp(created_utc, 0)?;
    Some(format!("{:04}-{:02}", dt.year(), dt.month()))
}

fn record_timestamp(record: &Value) -> Option<i64> {
    match record.get("created_utc")? {
        Value::Number(n) => n.as_i64().or_else(|| n.as_f64().map(|f| f as i64)),
        Value::String(s) => s.trim().parse::<f64>().ok().map(|f| f as i64),
        _ => None,
    }
}

pub fn partition_by_month<I>(records: I) -> MonthPartition
where
    I: IntoIterator<Item = Value>,
{
    let mut out = MonthPartition::default();
    for record in records {
        let key = match record_timestamp(&record).and_then(month_key) {
            Some(key) => key,
            None => {
                out.warnings += 1;
                UNKNOWN_MONTH.to_string()
            }
        };
        out.buckets.entry(key).or_default().push(record);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct MergeOutcome {
    pub threads: Vec<Thread>,
    pub orphan_count: usize,
}

/// Builds one thread per submission. Comments are appended in ascending
/// `created_utc` order, ties broken by comment id; comments without a matching
/// submission are counted as orphans.
pub fn merge_threads(submissions: &[SubmissionRecord], comments: &[CommentRecord]) -> MergeOutcome {
    let mut index: HashMap<&str, usize> = HashMap::with_capacity(submissions.len());
    for (i, s) in submissions.iter().enumerate() {
        index.entry(s.id.as_str()).or_insert(i);
    }

    let mut attached: Vec<Vec<&CommentRecord>> = vec![Vec::new(); submissions.len()];
    let mut orphan_count = 0;
    for c in comments {
        match c.submission_id().and_then(|id| index.get(id)) {
            Some(&i) => attached[i].push(c),
            None => orphan_count += 1,
        }
    }

    let threads = submissions
        .iter()
        .zip(attached)
        .map(|(s, mut cs)| {
            cs.sort_by(|a, b| a.created_utc.cmp(&b.created_utc).then_with(|| a.id.cmp(&b.id)));
            let segments = [s.title.as_str(), s.selftext.as_str()]
                .into_iter()
                .chain(cs.iter().map(|c| c.body.as_str()))
                .map(str::trim)
                .filter(|seg| !seg.is_empty());
            let text = segments.collect::<Vec<_>>().join(" ");
            Thread {
                id: s.id.clone(),
                text,
                comment_count: cs.len(),
            }
        })
        .collect();

    MergeOutcome {
        threads,
        orphan_count,
    }
}

/// Typed submissions and comments decoded from raw records; records that do not
/// fit the schema are skipped and counted.
#[derive(Debug, Default)]
pub struct DecodedRecords<T> {
    pub records: Vec<T>,
    pub rejected: usize,
}

pub fn decode_records<T>(raw: impl IntoIterator<Item = Value>) -> DecodedRecords<T>
where
    T: for<'de> Deserialize<'de> + Validated,
{
    let mut out = DecodedRecords {
        records: Vec::new(),
        rejected: 0,
    };
    for value in raw {
        match serde_json::from_value::<T>(value) {
            Ok(rec) if rec.check().is_ok() => out.records.push(rec),
            Ok(rec) => {
                if let Err(e) = rec.check() {
                    log::warn!("rejecting record: {e}");
                }
                out.rejected += 1;
            }
            Err(e) => {
                log::warn!("rejecting record: {e}");
                out.rejected += 1;
            }
        }
    }
    out
}

pub trait Validated {
    fn check(&self) -> Result<()>;
}

impl Validated for SubmissionRecord {
    fn check(&self) -> Result<()> {
        self.validate()
    }
}

impl Validated for CommentRecord {
    fn check(&self) -> Result<()> {
        // Comments with a bad link_id still count toward the orphan total, so
        // only the id is mandatory here.
        if self.id.is_empty() {
            return Err(Error::Validation("comment id is empty".into()));
        }
        Ok(())
    }
}

/// Summary of ingesting one submissions/comments dump pair.
#[derive(Debug)]
pub struct IngestOutcome {
    pub threads: Vec<Thread>,
    pub orphan_count: usize,
    pub malformed_lines: usize,
    pub rejected_records: usize,
}

/// Reads an `RS_*` / `RC_*` dump pair and merges it into threads.
pub fn ingest_pair(submissions: impl AsRef<Path>, comments: impl AsRef<Path>) -> Result<IngestOutcome> {
    let subs = read_dump(submissions)?;
    let coms = read_dump(comments)?;
    let decoded_subs = decode_records::<SubmissionRecord>(subs.records);
    let decoded_coms = decode_records::<CommentRecord>(coms.records);
    let merged = merge_threads(&decoded_subs.records, &decoded_coms.records);
    Ok(IngestOutcome {
        threads: merged.threads,
        orphan_count: merged.orphan_count,
        malformed_lines: subs.malformed + coms.malformed,
        rejected_records: decoded_subs.rejected + decoded_coms.rejected,
    })
}

/// Finds the `RS_<name>` and `RC_<name>` dumps (`.json` or `.zst`) in a
/// subreddit directory.
pub fn find_dump_pair(dir: impl AsRef<Path>) -> Result<(PathBuf, PathBuf)> {
    let dir = dir.as_ref();
    let mut subs = None;
    let mut coms = None;
    let mut entries: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| Error::Ingest {
            path: dir.to_path_buf(),
            reason: e.to_string(),
        })?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    entries.sort();
    for p in entries {
        let Some(name) = p.file_name().and_then(|n| n.to_str()) else {
            continue;
        };
        let is_dump = name.ends_with(".json") || name.ends_with(".zst");
        if is_dump && name.starts_with("RS_") && subs.is_none() {
            subs = Some(p.clone());
        } else if is_dump && name.starts_with("RC_") && coms.is_none() {
            coms = Some(p.clone());
        }
    }
    match (subs, coms) {
        (Some(s), Some(c)) => Ok((s, c)),
        _ => Err(Error::Ingest {
            path: dir.to_path_buf(),
            reason: "expected one RS_* and one RC_* dump".into(),
        }),
    }
}

pub fn save_threads(path: impl AsRef<Path>, threads: &[Thread]) -> Result<()> {
    let file = std::io::BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(file, threads)?;
    Ok(())
}

pub fn load_threads(path: impl AsRef<Path>) -> Result<Vec<Thread>> {
    let file = BufReader::new(File::open(path)?);
    Ok(serde_json::from_reader(file)?)
}
