//! Evaluation metrics shared by every trainer.

mod coherence;
mod divergence;

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use coherence::{coherence_cv, per_topic_cv, topic_coherence, DEFAULT_WINDOW};
pub use divergence::{kl_between, kl_divergence, perplexity, perplexity_from_distributions, EPSILON};

use crate::error::Result;
use crate::models::{Method, TopicModelResult};
use crate::preprocess::TokenSet;

/// Runs `job` and returns its output with elapsed wall-clock seconds.
pub fn timed<T, F>(job: F) -> Result<(T, f64)>
where
    F: FnOnce() -> Result<T>,
{
    let start = Instant::now();
    let out = job()?;
    Ok((out, start.elapsed().as_secs_f64()))
}

/// Share of distinct words among all topics' top `top_k` keywords.
pub fn topic_diversity(model: &TopicModelResult, top_k: usize) -> f64 {
    let lists: Vec<Vec<&str>> = (0..model.num_topics()).map(|t| model.top_words(t, top_k)).collect();
    diversity_of(&lists, top_k)
}

pub fn diversity_of<S: AsRef<str>>(topics: &[Vec<S>], top_k: usize) -> f64 {
    if topics.is_empty() || top_k == 0 {
        return 0.0;
    }
    let unique: BTreeSet<&str> = topics.iter().flat_map(|t| t.iter().take(top_k)).map(|w| w.as_ref()).collect();
    unique.len() as f64 / (topics.len() * top_k) as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub dataset: String,
    pub method: Method,
    pub num_topics: usize,
    /// NaN (stored as `null`) when the model has no topics.
    #[serde(with = "crate::floats")]
    pub coherence: f64,
    pub diversity: f64,
    #[serde(with = "crate::floats")]
    pub kl_divergence: f64,
    pub perplexity: f64,
    pub runtime_seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    NumTopics,
    Coherence,
    Diversity,
    KlDivergence,
    Perplexity,
    Runtime,
}

impl MetricKind {
    pub const ALL: [MetricKind; 6] = [
        MetricKind::NumTopics,
        MetricKind::Coherence,
        MetricKind::Diversity,
        MetricKind::KlDivergence,
        MetricKind::Perplexity,
        MetricKind::Runtime,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::NumTopics => "num_topics",
            MetricKind::Coherence => "coherence",
            MetricKind::Diversity => "diversity",
            MetricKind::KlDivergence => "kl",
            MetricKind::Perplexity => "perplexity",
            MetricKind::Runtime => "runtime",
        }
    }

    pub fn value(self, r: &MetricsReport) -> f64 {
        match self {
            MetricKind::NumTopics => r.num_topics as f64,
            MetricKind::Coherence => r.coherence,
            MetricKind::Diversity => r.diversity,
            MetricKind::KlDivergence => r.kl_divergence,
            MetricKind::Perplexity => r.perplexity,
            MetricKind::Runtime => r.runtime_seconds,
        }
    }

    /// Whether larger values rank better.
    pub fn higher_is_better(self) -> bool {
        matches!(self, MetricKind::Coherence | MetricKind::Diversity)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    pub top_k: usize,
    pub window: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            top_k: 10,
            window: DEFAULT_WINDOW,
        }
    }
}

/// Computes every metric for one model. Coherence, divergence and
/// perplexity use `reference` as the corpus; a model without topics scores
/// NaN coherence and divergence.
pub fn evaluate(
    dataset: &str,
    model: &TopicModelResult,
    reference: &[TokenSet],
    opts: &EvalOptions,
) -> Result<MetricsReport> {
    let topics: Vec<Vec<String>> = (0..model.num_topics())
        .map(|t| model.top_words(t, opts.top_k).into_iter().map(str::to_string).collect())
        .collect();
    let (coherence, kl) = if topics.is_empty() {
        (f64::NAN, f64::NAN)
    } else {
        (
            coherence_cv(&topics, reference, opts.window)?,
            kl_divergence(model, reference)?,
        )
    };
    Ok(MetricsReport {
        dataset: dataset.to_string(),
        method: model.method,
        num_topics: model.num_topics(),
        coherence,
        diversity: topic_diversity(model, opts.top_k),
        kl_divergence: kl,
        perplexity: perplexity(model, reference)?,
        runtime_seconds: model.runtime_seconds,
    })
}

pub fn save_reports(path: impl AsRef<Path>, reports: &[MetricsReport]) -> Result<()> {
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer_pretty(file, reports)?;
    Ok(())
}

pub fn load_reports(path: impl AsRef<Path>) -> Result<Vec<MetricsReport>> {
    let file = std::io::BufReader::new(std::fs::File::open(path)?);
    Ok(serde_json::from_reader(file)?)
}

/// One metric as a table: rows = datasets, columns = methods.
pub fn write_metric_csv<W: Write>(out: &mut W, reports: &[MetricsReport], metric: MetricKind) -> Result<()> {
    let methods: BTreeSet<Method> = reports.iter().map(|r| r.method).collect();
    let mut rows: BTreeMap<&str, BTreeMap<Method, f64>> = BTreeMap::new();
    for r in reports {
        rows.entry(r.dataset.as_str()).or_default().insert(r.method, metric.value(r));
    }
    write!(out, "dataset")?;
    for m in &methods {
        write!(out, ",{m}")?;
    }
    writeln!(out)?;
    for (dataset, cells) in rows {
        write!(out, "{dataset}")?;
        for m in &methods {
            match cells.get(m) {
                Some(v) => write!(out, ",{v}")?,
                None => write!(out, ",")?,
            }
        }
        writeln!(out)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::time::Duration;

    #[test]
    fn diversity_examples() {
        assert_eq!(diversity_of(&[vec!["a", "b", "c"], vec!["d", "e", "f"]], 3), 1.0);
        assert_eq!(diversity_of(&[vec!["a", "b", "c"], vec!["a", "b", "c"]], 3), 0.5);
        assert!((diversity_of(&[vec!["a", "b", "c"], vec!["a", "d", "e"]], 3) - 5.0 / 6.0).abs() < 1e-12);
        assert_eq!(
            diversity_of(&[vec!["a", "d", "e"], vec!["a", "b", "c"]], 3),
            diversity_of(&[vec!["a", "b", "c"], vec!["a", "d", "e"]], 3)
        );
    }

    #[test]
    fn timing_brackets_sleep() {
        let ((), t) = timed(|| {
            std::thread::sleep(Duration::from_millis(100));
            Ok(())
        })
        .unwrap();
        assert!((0.1..=0.3).contains(&t), "{t}");
        let (v, t) = timed(|| Ok(3)).unwrap();
        assert_eq!(v, 3);
        assert!(t >= 0.0);
    }

    #[test]
    fn timing_propagates_errors() {
        assert!(timed::<(), _>(|| Err(crate::Error::EmptyCorpus)).is_err());
    }

    #[test]
    fn csv_layout() {
        let r = |d: &str, m, c| MetricsReport {
            dataset: d.into(),
            method: m,
            num_topics: 5,
            coherence: c,
            diversity: 1.0,
            kl_divergence: 0.0,
            perplexity: 1.0,
            runtime_seconds: 0.0,
        };
        let mut buf = Vec::new();
        write_metric_csv(
            &mut buf,
            &[r("b", Method::Nmf, 0.5), r("a", Method::Lda, 0.25), r("a", Method::Nmf, 0.75)],
            MetricKind::Coherence,
        )
        .unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "dataset,lda,nmf\na,0.25,0.75\nb,,0.5\n");
    }

    #[test]
    fn nan_metrics_survive_json() {
        let report = MetricsReport {
            dataset: "d".into(),
            method: Method::Embed,
            num_topics: 0,
            coherence: f64::NAN,
            diversity: 0.0,
            kl_divergence: f64::NAN,
            perplexity: 12.0,
            runtime_seconds: 0.5,
        };
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains(r#""coherence":null"#));
        let back: MetricsReport = serde_json::from_str(&json).unwrap();
        assert!(back.coherence.is_nan() && back.kl_divergence.is_nan());
        assert_eq!(back.perplexity, 12.0);
    }
}
