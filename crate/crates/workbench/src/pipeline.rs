//! End-to-end run: ingest → preprocess → select → train → evaluate → stats,
//! with every artifact recorded in the run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::Utc;
use serde::{Deserialize, Serialize};
use topicbench_core::ingest::{find_dump_pair, ingest_pair, load_threads, Thread};
use topicbench_core::metrics::{evaluate, save_reports, MetricKind, MetricsReport};
use topicbench_core::models::{Method, SweepSelection, TopicModelResult};
use topicbench_core::preprocess::{save_token_sets, ModelPath, Preprocessor, TokenSet};
use topicbench_core::stats::{compare_methods, compare_rankings, MetricTable, StatsReport};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::ranking::{ranking_table, read_rankings, RankingRecord};
use crate::train::{median_of_runs, sweep_topics, train_method, MedianRun};
use crate::workspace::{
    model_id, write_json_atomic, ArtifactRef, DatasetEntry, ModelEntry, RunManifest, StageRecord, Status, Workspace,
};

pub const STAGES: [&str; 7] = ["ingest", "preprocess", "select", "train", "evaluate", "stats", "register"];

/// Metrics compared across methods; perplexity is exported but not tested.
pub const COMPARED_METRICS: [MetricKind; 5] = [
    MetricKind::NumTopics,
    MetricKind::Coherence,
    MetricKind::Diversity,
    MetricKind::KlDivergence,
    MetricKind::Runtime,
];

/// Topic-count selection outcome for one dataset.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SelectionRecord {
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub sweeps: BTreeMap<Method, SweepSelection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub median: Option<MedianRun>,
}

struct DatasetState {
    name: String,
    threads: Vec<Thread>,
    bow: Vec<TokenSet>,
    embedding: Option<Vec<TokenSet>>,
    topics: BTreeMap<Method, usize>,
    models: BTreeMap<Method, TopicModelResult>,
}

struct Run<'a> {
    ws: &'a Workspace,
    config: &'a RunConfig,
    manifest: RunManifest,
    datasets: Vec<DatasetState>,
    reports: Vec<MetricsReport>,
}

impl Run<'_> {
    fn rel(&self, parts: &[&str]) -> PathBuf {
        let mut p = Workspace::run_dir_rel(&self.manifest.run_id);
        for part in parts {
            p.push(part);
        }
        p
    }

    fn write<T: Serialize + ?Sized>(
        &mut self,
        kind: &str,
        dataset: Option<&str>,
        method: Option<Method>,
        rel: PathBuf,
        value: &T,
    ) -> Result<()> {
        write_json_atomic(&self.ws.resolve(&rel), value)?;
        self.record(kind, dataset, method, rel);
        Ok(())
    }

    fn record(&mut self, kind: &str, dataset: Option<&str>, method: Option<Method>, path: PathBuf) {
        self.manifest.artifacts.push(ArtifactRef {
            kind: kind.into(),
            dataset: dataset.map(str::to_string),
            method,
            path,
        });
    }

    fn ingest(&mut self) -> Result<Vec<String>> {
        let mut notes = Vec::new();
        for input in &self.config.datasets {
            let (threads, extra) = read_input(&input.input)?;
            if threads.is_empty() {
                return Err(Error::Config(format!("dataset {} has no threads", input.name)));
            }
            notes.push(format!("{}: {} threads", input.name, threads.len()));
            notes.extend(extra.into_iter().map(|n| format!("{}: {n}", input.name)));
            self.datasets.push(DatasetState {
                name: input.name.clone(),
                threads,
                bow: Vec::new(),
                embedding: None,
                topics: BTreeMap::new(),
                models: BTreeMap::new(),
            });
        }
        for i in 0..self.datasets.len() {
            let name = self.datasets[i].name.clone();
            fs::create_dir_all(self.ws.resolve(&self.rel(&[&name, "models"])))?;
            let rel = self.rel(&[&name, "threads.json"]);
            let threads = std::mem::take(&mut self.datasets[i].threads);
            self.write("threads", Some(&name), None, rel, &threads)?;
            self.datasets[i].threads = threads;
        }
        Ok(notes)
    }

    fn preprocess(&mut self) -> Result<Vec<String>> {
        let pre = Preprocessor::new(self.config.preprocess.clone())?;
        let wants_embedding = self.config.methods.contains(&Method::Embed);
        let mut notes = Vec::new();
        for i in 0..self.datasets.len() {
            let name = self.datasets[i].name.clone();
            let bow = pre.run(&self.datasets[i].threads, ModelPath::BagOfWords)?;
            let rel = self.rel(&[&name, "tokens.json"]);
            save_token_sets(self.ws.resolve(&rel), &bow.token_sets)?;
            self.record("token_sets", Some(&name), None, rel);
            notes.push(format!("{name}: {} tokens", bow.token_sets.iter().map(|s| s.tokens.len()).sum::<usize>()));
            self.datasets[i].bow = bow.token_sets;
            if wants_embedding {
                let emb = pre.run(&self.datasets[i].threads, ModelPath::Embedding)?;
                if emb.counts.tfidf_filter_skipped {
                    notes.push(format!("{name}: tf-idf filter skipped for the embedding path"));
                }
                let rel = self.rel(&[&name, "tokens.embedding.json"]);
                save_token_sets(self.ws.resolve(&rel), &emb.token_sets)?;
                self.record("embedding_token_sets", Some(&name), None, rel);
                self.datasets[i].embedding = Some(emb.token_sets);
            }
        }
        Ok(notes)
    }

    fn select(&mut self) -> Result<Vec<String>> {
        let sel = &self.config.selection;
        let configs = self.config.method_configs();
        let eval = self.config.evaluation.options();
        let mut notes = Vec::new();
        for i in 0..self.datasets.len() {
            let mut record = SelectionRecord::default();
            let d = &mut self.datasets[i];
            for &method in &self.config.methods {
                match method {
                    Method::Lda | Method::Nmf if sel.topic_sweep => {
                        let s = sweep_topics(method, &d.bow, &configs, &sel.grid, &eval)?;
                        notes.push(format!("{}/{method}: K = {} by coherence sweep", d.name, s.selected));
                        d.topics.insert(method, s.selected);
                        record.sweeps.insert(method, s);
                    }
                    Method::Embed => {
                        if let Some(runs) = sel.median_runs {
                            let (run, model) =
                                median_of_runs(method, &d.bow, d.embedding.as_deref(), &configs, runs)?;
                            notes.push(format!(
                                "{}/{method}: median {} topics over {runs} runs (mean {:.2}, std {:.2})",
                                d.name, run.selection.selected, run.selection.mean, run.selection.std
                            ));
                            d.models.insert(method, model);
                            record.median = Some(run);
                        }
                    }
                    _ => {}
                }
            }
            if record != SelectionRecord::default() {
                let name = self.datasets[i].name.clone();
                let rel = self.rel(&[&name, "selection.json"]);
                self.write("selection", Some(&name), None, rel, &record)?;
            }
        }
        Ok(notes)
    }

    fn train(&mut self) -> Result<Vec<String>> {
        let base = self.config.method_configs();
        let mut notes = Vec::new();
        for i in 0..self.datasets.len() {
            for method in self.config.methods.clone() {
                let name = self.datasets[i].name.clone();
                let rel = self.rel(&[&name, "models", &format!("{method}.json")]);
                let d = &mut self.datasets[i];
                if !d.models.contains_key(&method) {
                    let configs = match d.topics.get(&method) {
                        Some(&k) => base.with_topics(method, k),
                        None => base.clone(),
                    };
                    let model = train_method(method, &d.bow, d.embedding.as_deref(), &configs)?;
                    d.models.insert(method, model);
                }
                let model = &d.models[&method];
                notes.push(format!(
                    "{name}/{method}: {} topics in {:.2}s",
                    model.num_topics(),
                    model.runtime_seconds
                ));
                self.manifest.seeds.insert(format!("{name}/{method}"), model.seed);
                model.save(self.ws.resolve(&rel))?;
                self.record("model", Some(&name), Some(method), rel);
            }
        }
        Ok(notes)
    }

    fn evaluate(&mut self) -> Result<Vec<String>> {
        let opts = self.config.evaluation.options();
        for d in &self.datasets {
            for &method in &self.config.methods {
                self.reports.push(evaluate(&d.name, &d.models[&method], &d.bow, &opts)?);
            }
        }
        let rel = self.rel(&["metrics.json"]);
        save_reports(self.ws.resolve(&rel), &self.reports)?;
        self.record("metrics", None, None, rel);
        Ok(Vec::new())
    }

    /// Returns `None` when the stage does not apply to this run.
    fn stats(&mut self) -> Result<Option<Vec<String>>> {
        if !self.config.stats.enabled {
            return Ok(None);
        }
        if self.datasets.len() < 2 || self.config.methods.len() < 2 {
            log::warn!("stats need at least two datasets and two methods; skipped");
            return Ok(None);
        }
        let names: Vec<&str> = self.datasets.iter().map(|d| d.name.as_str()).collect();
        let rankings: Vec<RankingRecord> = read_rankings(&self.ws.rankings_path(), None)?
            .into_iter()
            .filter(|r| names.contains(&r.dataset.as_str()))
            .collect();
        let (report, notes) = compare_reports(&self.reports, &rankings, &self.config.methods, self.config.stats.alpha)?;
        let rel = self.rel(&["stats.json"]);
        report.save(self.ws.resolve(&rel))?;
        self.record("stats", None, None, rel);
        Ok(Some(notes))
    }

    fn register(&mut self) -> Result<Vec<String>> {
        let mut registry = self.ws.registry()?;
        let metrics = self.rel(&["metrics.json"]);
        for d in &self.datasets {
            let path_of = |kind: &str, method: Option<Method>| {
                self.manifest
                    .artifact(kind, Some(&d.name), method)
                    .map(|a| a.path.clone())
            };
            let models = self
                .config
                .methods
                .iter()
                .map(|&m| ModelEntry {
                    id: model_id(&d.name, m),
                    method: m,
                    path: path_of("model", Some(m)).expect("model recorded"),
                    num_topics: d.models[&m].num_topics(),
                })
                .collect();
            registry.datasets.insert(
                d.name.clone(),
                DatasetEntry {
                    run_id: self.manifest.run_id.clone(),
                    num_documents: d.threads.len(),
                    threads: path_of("threads", None).expect("threads recorded"),
                    token_sets: path_of("token_sets", None).expect("tokens recorded"),
                    embedding_token_sets: path_of("embedding_token_sets", None),
                    models,
                    metrics: metrics.clone(),
                },
            );
        }
        self.ws.save_registry(&registry)?;
        Ok(Vec::new())
    }
}

/// Method comparison for every metric in [`COMPARED_METRICS`], plus
/// Friedman/Nemenyi over reviewer rankings when at least two complete ones
/// exist. Metrics whose table is undefined or degenerate are skipped with a
/// note.
pub fn compare_reports(
    reports: &[MetricsReport],
    rankings: &[RankingRecord],
    methods: &[Method],
    alpha: f64,
) -> Result<(StatsReport, Vec<String>)> {
    let mut notes = Vec::new();
    let mut metrics = Vec::new();
    for kind in COMPARED_METRICS {
        let table = match MetricTable::from_reports(reports, kind) {
            Ok(t) => t,
            Err(e) => {
                notes.push(format!("{}: skipped, {e}", kind.name()));
                continue;
            }
        };
        match compare_methods(kind.name(), &table) {
            Ok(c) => metrics.push(c),
            Err(e) => notes.push(format!("{}: skipped, {e}", kind.name())),
        }
    }
    let rankings = match ranking_table(rankings, methods) {
        Some(t) => match compare_rankings(&t, alpha) {
            Ok(r) => Some(r),
            Err(e) => {
                notes.push(format!("rankings: skipped, {e}"));
                None
            }
        },
        None => None,
    };
    for n in &notes {
        log::warn!("{n}");
    }
    Ok((StatsReport { metrics, rankings }, notes))
}

/// Threads plus ingest notes from a dump directory or a threads file.
fn read_input(input: &Path) -> Result<(Vec<Thread>, Vec<String>)> {
    if input.is_dir() {
        let (subs, coms) = find_dump_pair(input)?;
        let out = ingest_pair(subs, coms)?;
        let mut notes = Vec::new();
        if out.orphan_count > 0 {
            notes.push(format!("{} orphan comments", out.orphan_count));
        }
        if out.malformed_lines + out.rejected_records > 0 {
            notes.push(format!(
                "{} malformed lines, {} rejected records",
                out.malformed_lines, out.rejected_records
            ));
        }
        Ok((out.threads, notes))
    } else if input.is_file() {
        Ok((load_threads(input)?, Vec::new()))
    } else {
        Err(Error::NotFound(format!("input path {}", input.display())))
    }
}

/// Executes a run. A stage failure is reported through the returned manifest
/// (status `failed`, `failed_stage`, `error`) and leaves no artifacts behind
/// other than the manifest and the run's config. `Err` is returned only when
/// the config is invalid or the workspace cannot be written.
pub fn run_pipeline(ws: &Workspace, config: &RunConfig) -> Result<RunManifest> {
    config.validate()?;
    let run_id = config.run_id();
    let dir = ws.run_dir(&run_id);
    if dir.exists() {
        fs::remove_dir_all(&dir)?;
    }
    fs::create_dir_all(&dir)?;
    write_json_atomic(&dir.join("config.json"), config)?;

    let manifest = RunManifest {
        run_id: run_id.clone(),
        name: config.name.clone(),
        config_hash: config.hash(),
        status: Status::Running,
        started_at: Utc::now(),
        finished_at: None,
        failed_stage: None,
        error: None,
        seeds: BTreeMap::new(),
        stages: Vec::new(),
        artifacts: Vec::new(),
    };
    ws.save_manifest(&manifest)?;
    let mut run = Run {
        ws,
        config,
        manifest,
        datasets: Vec::new(),
        reports: Vec::new(),
    };

    for stage in STAGES {
        log::info!("{run_id}: {stage}");
        let outcome = match stage {
            "ingest" => run.ingest().map(Some),
            "preprocess" => run.preprocess().map(Some),
            "select" => run.select().map(Some),
            "train" => run.train().map(Some),
            "evaluate" => run.evaluate().map(Some),
            "stats" => run.stats(),
            "register" => run.register().map(Some),
            _ => unreachable!(),
        };
        match outcome {
            Ok(notes) => run.manifest.stages.push(StageRecord {
                name: stage.into(),
                status: if notes.is_some() { Status::Complete } else { Status::Skipped },
                notes: notes.unwrap_or_default(),
            }),
            Err(e) => {
                log::error!("{run_id}: {stage} failed: {e}");
                return fail(ws, run.manifest, stage, &e);
            }
        }
        ws.save_manifest(&run.manifest)?;
    }

    run.manifest.status = Status::Complete;
    run.manifest.finished_at = Some(Utc::now());
    ws.save_manifest(&run.manifest)?;
    ws.verify_run(&run_id)
}

fn fail(ws: &Workspace, mut manifest: RunManifest, stage: &str, err: &Error) -> Result<RunManifest> {
    let dir = ws.run_dir(&manifest.run_id);
    for entry in fs::read_dir(&dir)? {
        let path = entry?.path();
        let keep = matches!(
            path.file_name().and_then(|n| n.to_str()),
            Some("manifest.json" | "config.json")
        );
        if keep {
            continue;
        }
        if path.is_dir() {
            fs::remove_dir_all(&path)?;
        } else {
            fs::remove_file(&path)?;
        }
    }
    manifest.artifacts.clear();
    manifest.seeds.clear();
    manifest.stages.push(StageRecord {
        name: stage.into(),
        status: Status::Failed,
        notes: vec![err.to_string()],
    });
    manifest.status = Status::Failed;
    manifest.failed_stage = Some(stage.into());
    manifest.error = Some(err.to_string());
    manifest.finished_at = Some(Utc::now());
    ws.save_manifest(&manifest)?;
    Ok(manifest)
}
