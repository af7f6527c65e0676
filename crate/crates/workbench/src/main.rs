use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use topicbench::api::{router, router_with_assets, AppState};
use topicbench::config::RunConfig;
use topicbench::pipeline::{compare_reports, run_pipeline};
use topicbench::ranking::{read_rankings, WordList};
use topicbench::report::export_report;
use topicbench::train::{median_of_runs, sweep_topics, train_method, MethodConfigs};
use topicbench::workspace::{read_json, write_json_atomic, Status, Workspace};
use topicbench_core::ingest::{find_dump_pair, ingest_pair, load_threads, save_threads};
use topicbench_core::metrics::{evaluate, load_reports, save_reports, EvalOptions, MetricsReport};
use topicbench_core::models::{default_grid, Method, TopicModelResult};
use topicbench_core::preprocess::{load_token_sets, save_token_sets, ModelPath, PreprocessConfig, Preprocessor};

#[derive(Parser)]
#[command(name = "topicbench", version, about = "Train, score and compare topic models on subreddit dumps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum PathArg {
    Bow,
    Embedding,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Lda,
    Nmf,
    Embed,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Lda => Method::Lda,
            MethodArg::Nmf => Method::Nmf,
            MethodArg::Embed => Method::Embed,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Strategy {
    Sweep,
    Median,
}

#[derive(Subcommand)]
enum Command {
    /// Merge an RS_/RC_ dump pair into threads.
    Ingest {
        /// Directory holding the dump pair.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Clean and tokenize threads.
    Preprocess {
        #[arg(long)]
        threads: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "bow")]
        path: PathArg,
        /// Preprocessing config JSON.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Train one model.
    Train {
        #[arg(long, value_enum)]
        method: MethodArg,
        #[arg(long)]
        tokens: PathBuf,
        /// Token sets for the embedding method, if different from --tokens.
        #[arg(long)]
        embedding_tokens: Option<PathBuf>,
        /// Method configs JSON: `{"lda": {...}, "nmf": {...}, "embed": {...}}`.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        topics: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Choose a topic count by coherence sweep or median of runs.
    Select {
        #[arg(long, value_enum)]
        strategy: Strategy,
        #[arg(long, value_enum)]
        method: MethodArg,
        #[arg(long)]
        tokens: PathBuf,
        #[arg(long)]
        embedding_tokens: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Comma-separated topic counts for the sweep.
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<usize>>,
        #[arg(long, default_value_t = 11)]
        runs: usize,
        #[arg(long)]
        out: PathBuf,
        /// Also save the model kept by the median strategy.
        #[arg(long)]
        model_out: Option<PathBuf>,
    },
    /// Score a model; the report is added to (or replaced in) `--out`.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        tokens: PathBuf,
        #[arg(long)]
        dataset: String,
        #[arg(long, default_value_t = 10)]
        top_k: usize,
        #[arg(long, default_value_t = 110)]
        window: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare methods across datasets from metric reports.
    Compare {
        #[arg(long, required = true, num_args = 1..)]
        metrics: Vec<PathBuf>,
        /// Rankings JSON-lines file for Friedman/Nemenyi.
        #[arg(long)]
        rankings: Option<PathBuf>,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Execute a full run from a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        workspace: PathBuf,
    },
    /// Export the report bundle of a completed run.
    Report {
        #[arg(long)]
        workspace: PathBuf,
        #[arg(long)]
        run: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long)]
        workspace: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Desirability word list JSON; the bundled list by default.
        #[arg(long)]
        words: Option<PathBuf>,
        /// Directory of built UI assets to serve at `/`.
        #[arg(long)]
        assets: Option<PathBuf>,
        #[arg(long, default_value_t = 20)]
        page_size: usize,
    },
}

fn method_configs(path: Option<&Path>) -> anyhow::Result<MethodConfigs> {
    match path {
        Some(p) => read_json(p).with_context(|| format!("reading {}", p.display())),
        None => Ok(MethodConfigs::default()),
    }
}

fn optional_tokens(path: Option<&Path>) -> anyhow::Result<Option<Vec<topicbench_core::preprocess::TokenSet>>> {
    path.map(load_token_sets).transpose().map_err(Into::into)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Ingest { input, out } => {
            let (subs, coms) = find_dump_pair(&input)?;
            let outcome = ingest_pair(subs, coms)?;
            save_threads(&out, &outcome.threads)?;
            println!(
                "{} threads, {} orphan comments, {} malformed lines, {} rejected records",
                outcome.threads.len(),
                outcome.orphan_count,
                outcome.malformed_lines,
                outcome.rejected_records
            );
        }
        Command::Preprocess {
            threads,
            out,
            path,
            config,
        } => {
            let config: PreprocessConfig = match config {
                Some(p) => read_json(&p)?,
                None => PreprocessConfig::default(),
            };
            let path = match path {
                PathArg::Bow => ModelPath::BagOfWords,
                PathArg::Embedding => ModelPath::Embedding,
            };
            let output = Preprocessor::new(config)?.run(&load_threads(&threads)?, path)?;
            save_token_sets(&out, &output.token_sets)?;
            for (stage, n) in &output.counts.stages {
                println!("{stage}: {n} tokens");
            }
        }
        Command::Train {
            method,
            tokens,
            embedding_tokens,
            config,
            topics,
            seed,
            out,
        } => {
            let method = Method::from(method);
            let mut configs = method_configs(config.as_deref())?;
            if let Some(k) = topics {
                configs = configs.with_topics(method, k);
            }
            if let Some(s) = seed {
                configs = configs.with_seed(method, s);
            }
            let bow = load_token_sets(&tokens)?;
            let emb = optional_tokens(embedding_tokens.as_deref())?;
            let model = train_method(method, &bow, emb.as_deref(), &configs)?;
            model.save(&out)?;
            println!("{method}: {} topics in {:.2}s", model.num_topics(), model.runtime_seconds);
        }
        Command::Select {
            strategy,
            method,
            tokens,
            embedding_tokens,
            config,
            grid,
            runs,
            out,
            model_out,
        } => {
            let method = Method::from(method);
            let configs = method_configs(config.as_deref())?;
            let bow = load_token_sets(&tokens)?;
            match strategy {
                Strategy::Sweep => {
                    let grid = grid.unwrap_or_else(default_grid);
                    let s = sweep_topics(method, &bow, &configs, &grid, &EvalOptions::default())?;
                    write_json_atomic(&out, &s)?;
                    println!("selected K = {}", s.selected);
                }
                Strategy::Median => {
                    let emb = optional_tokens(embedding_tokens.as_deref())?;
                    let (run, model) = median_of_runs(method, &bow, emb.as_deref(), &configs, runs)?;
                    write_json_atomic(&out, &run)?;
                    if let Some(p) = model_out {
                        model.save(p)?;
                    }
                    println!(
                        "median {} topics (mean {:.2}, std {:.2})",
                        run.selection.selected, run.selection.mean, run.selection.std
                    );
                }
            }
        }
        Command::Evaluate {
            model,
            tokens,
            dataset,
            top_k,
            window,
            out,
        } => {
            let model = TopicModelResult::load(&model)?;
            let docs = load_token_sets(&tokens)?;
            let report = evaluate(&dataset, &model, &docs, &EvalOptions { top_k, window })?;
            let mut reports: Vec<MetricsReport> = if out.exists() { load_reports(&out)? } else { Vec::new() };
            reports.retain(|r| !(r.dataset == report.dataset && r.method == report.method));
            reports.push(report.clone());
            save_reports(&out, &reports)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        Command::Compare {
            metrics,
            rankings,
            alpha,
            out,
        } => {
            let mut reports = Vec::new();
            for p in &metrics {
                reports.extend(load_reports(p)?);
            }
            let mut methods: Vec<Method> = reports.iter().map(|r| r.method).collect();
            methods.sort();
            methods.dedup();
            let rankings = match rankings {
                Some(p) => read_rankings(&p, None)?,
                None => Vec::new(),
            };
            let (report, _) = compare_reports(&reports, &rankings, &methods, alpha)?;
            report.save(&out)?;
            for m in &report.metrics {
                println!(
                    "{}: F = {:.3}, p = {:.4}",
                    m.metric, m.anova.statistic, m.anova.p_value
                );
            }
        }
        Command::Run { config, workspace } => {
            let config = RunConfig::load(&config)?;
            let ws = Workspace::open(workspace)?;
            let manifest = run_pipeline(&ws, &config)?;
            println!("{}", serde_json::to_string_pretty(&manifest)?);
            if manifest.status != Status::Complete {
                bail!(
                    "run {} failed at {}",
                    manifest.run_id,
                    manifest.failed_stage.as_deref().unwrap_or("unknown stage")
                );
            }
        }
        Command::Report { workspace, run, out } => {
            let ws = Workspace::open(workspace)?;
            let bundle = export_report(&ws, &run, out.as_deref())?;
            println!("report written to {}", bundle.dir.display());
        }
        Command::Serve {
            workspace,
            port,
            host,
            words,
            assets,
            page_size,
        } => {
            let ws = Workspace::open(workspace)?;
            let words = match words {
                Some(p) => WordList::load(p)?,
                None => WordList::builtin(),
            };
            let mut state = AppState::new(ws, words);
            state.default_limit = page_size.max(1);
            let state = Arc::new(state);
            let app = match assets {
                Some(dir) => router_with_assets(state, dir),
                None => router(state),
            };
            let addr: SocketAddr = format!("{host}:{port}").parse().context("invalid host/port")?;
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::bind(addr).await?;
                log::info!("listening on http://{addr}");
                axum::serve(listener, app)
                    .with_graceful_shutdown(async {
                        let _ = tokio::signal::ctrl_c().await;
                    })
                    .await
            })?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
