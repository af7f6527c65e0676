//! Report bundle export: one CSV per compared metric (datasets as rows,
//! methods as columns, then mean, minimum and maximum rows), the stats JSON
//! with a pairwise CSV, and one chord graph per model.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use topicbench_core::metrics::{load_reports, MetricKind, MetricsReport};
use topicbench_core::models::{Method, TopicModelResult};
use topicbench_core::stats::{describe, StatsReport, Summary};

use crate::chord::chord_graph;
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::pipeline::COMPARED_METRICS;
use crate::workspace::{read_json, write_json_atomic, Status, Workspace};

#[derive(Debug, Clone, PartialEq)]
pub struct ReportBundle {
    pub dir: PathBuf,
    pub metric_tables: Vec<PathBuf>,
    pub stats: PathBuf,
    pub pairwise: PathBuf,
    pub chords: Vec<PathBuf>,
}

/// Writes a metric table (datasets as rows, methods as columns) followed by
/// `mean`, `minimum` and `maximum` rows. Undefined cells are left blank and
/// summaries use the defined cells only.
pub fn write_table_with_summary<W: Write>(mut out: W, reports: &[MetricsReport], metric: MetricKind) -> Result<()> {
    let mut rows: Vec<&str> = reports.iter().map(|r| r.dataset.as_str()).collect();
    rows.sort_unstable();
    rows.dedup();
    let mut methods: Vec<Method> = reports.iter().map(|r| r.method).collect();
    methods.sort_unstable();
    methods.dedup();
    let cell = |d: &str, m: Method| {
        reports
            .iter()
            .find(|r| r.dataset == d && r.method == m)
            .map_or(f64::NAN, |r| metric.value(r))
    };
    let fmt = |v: f64| if v.is_finite() { v.to_string() } else { String::new() };

    write!(out, "dataset")?;
    for m in &methods {
        write!(out, ",{m}")?;
    }
    writeln!(out)?;
    for d in &rows {
        write!(out, "{d}")?;
        for &m in &methods {
            write!(out, ",{}", fmt(cell(d, m)))?;
        }
        writeln!(out)?;
    }
    let columns: Vec<Option<Summary>> = methods
        .iter()
        .map(|&m| {
            let xs: Vec<f64> = rows.iter().map(|d| cell(d, m)).filter(|v| v.is_finite()).collect();
            describe(&xs).ok()
        })
        .collect();
    for (label, pick) in [
        ("mean", (|s: &Summary| s.mean) as fn(&Summary) -> f64),
        ("minimum", |s| s.min),
        ("maximum", |s| s.max),
    ] {
        write!(out, "{label}")?;
        for s in &columns {
            write!(out, ",{}", s.as_ref().map_or(String::new(), |s| fmt(pick(s))))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Exports the bundle for a completed run into `out` (default
/// `<workspace>/reports/<run>`).
pub fn export_report(ws: &Workspace, run_id: &str, out: Option<&Path>) -> Result<ReportBundle> {
    let manifest = ws.load_manifest(run_id)?;
    if manifest.status != Status::Complete {
        let missing = match &manifest.failed_stage {
            Some(stage) => vec![stage.clone()],
            None => vec!["completion".to_string()],
        };
        return Err(Error::Incomplete {
            run: run_id.into(),
            missing,
        });
    }
    let mut missing = Vec::new();
    let metrics = manifest.artifact("metrics", None, None).map(|a| ws.resolve(&a.path));
    let stats = manifest.artifact("stats", None, None).map(|a| ws.resolve(&a.path));
    let models: Vec<_> = manifest.artifacts.iter().filter(|a| a.kind == "model").collect();
    for (name, path) in [("metrics", &metrics), ("stats", &stats)] {
        if path.as_ref().is_none_or(|p| !p.is_file()) {
            missing.push(name.to_string());
        }
    }
    if models.is_empty() {
        missing.push("models".into());
    }
    for m in &models {
        if !ws.resolve(&m.path).is_file() {
            missing.push(format!("model {}", m.path.display()));
        }
    }
    if !missing.is_empty() {
        return Err(Error::Incomplete {
            run: run_id.into(),
            missing,
        });
    }
    let (metrics, stats) = (metrics.unwrap(), stats.unwrap());
    let config: RunConfig = read_json(&ws.run_dir(run_id).join("config.json"))?;

    let dir = out.map_or_else(|| ws.root().join("reports").join(run_id), Path::to_path_buf);
    fs::create_dir_all(dir.join("chords"))?;

    let reports = load_reports(&metrics)?;
    let mut metric_tables = Vec::new();
    for kind in COMPARED_METRICS {
        let path = dir.join(format!("{}.csv", kind.name()));
        write_table_with_summary(std::io::BufWriter::new(fs::File::create(&path)?), &reports, kind)?;
        metric_tables.push(path);
    }

    let stats_report = StatsReport::load(&stats)?;
    let stats_out = dir.join("stats.json");
    stats_report.save(&stats_out)?;
    let pairwise = dir.join("pairwise.csv");
    stats_report.write_pairwise_csv(std::io::BufWriter::new(fs::File::create(&pairwise)?))?;

    let mut chords = Vec::new();
    for m in models {
        let model = TopicModelResult::load(ws.resolve(&m.path))?;
        let dataset = m.dataset.as_deref().unwrap_or("run");
        let path = dir.join("chords").join(format!("{dataset}-{}.json", model.method));
        write_json_atomic(&path, &chord_graph(&model, config.chord_threshold))?;
        chords.push(path);
    }

    Ok(ReportBundle {
        dir,
        metric_tables,
        stats: stats_out,
        pairwise,
        chords,
    })
}
