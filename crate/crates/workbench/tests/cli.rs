//! The `topicbench` binary, one subcommand at a time and as a full run.

mod support;

use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};
use topicbench::workspace::RunManifest;
use topicbench_core::ingest::write_dump;
use topicbench_core::metrics::load_reports;
use topicbench_core::models::{Method, TopicModelResult};

fn topicbench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_topicbench"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = topicbench(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// A dump pair whose submissions carry the themed thread texts.
fn write_forum(dir: &Path, n: usize, salt: usize) {
    std::fs::create_dir_all(dir).unwrap();
    let threads = support::themed_threads(n, salt);
    let subs: Vec<Value> = threads
        .iter()
        .enumerate()
        .map(|(i, t)| {
            json!({"id": format!("s{i}"), "title": "", "selftext": t.text, "created_utc": 1_600_000_000 + i as i64})
        })
        .collect();
    let coms: Vec<Value> = (0..n)
        .map(|i| json!({"id": format!("c{i}"), "link_id": format!("t3_s{i}"), "body": "thanks", "created_utc": 1_700_000_000}))
        .collect();
    write_dump(dir.join("RS_forum.zst"), &subs).unwrap();
    write_dump(dir.join("RC_forum.zst"), &coms).unwrap();
}

#[test]
fn stage_by_stage() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_forum(&d.join("dump"), 45, 0);

    let out = ok(&["ingest", "--input", s(&d.join("dump")), "--out", s(&d.join("threads.json"))]);
    assert!(out.starts_with("45 threads, 0 orphan comments"), "{out}");
    ok(&["preprocess", "--threads", s(&d.join("threads.json")), "--out", s(&d.join("tokens.json"))]);
    ok(&[
        "preprocess",
        "--threads",
        s(&d.join("threads.json")),
        "--path",
        "embedding",
        "--out",
        s(&d.join("tokens.embedding.json")),
    ]);

    let configs = d.join("methods.json");
    std::fs::write(&configs, r#"{"lda": {"passes": 30, "workers": 1}, "embed": {"min_cluster_size": 5}}"#).unwrap();
    let sweep = ok(&[
        "select",
        "--strategy",
        "sweep",
        "--method",
        "nmf",
        "--tokens",
        s(&d.join("tokens.json")),
        "--grid",
        "2,3,4",
        "--out",
        s(&d.join("sweep.json")),
    ]);
    assert!(sweep.starts_with("selected K = "), "{sweep}");
    ok(&[
        "select",
        "--strategy",
        "median",
        "--method",
        "embed",
        "--tokens",
        s(&d.join("tokens.json")),
        "--embedding-tokens",
        s(&d.join("tokens.embedding.json")),
        "--config",
        s(&configs),
        "--runs",
        "3",
        "--out",
        s(&d.join("median.json")),
        "--model-out",
        s(&d.join("embed.json")),
    ]);
    let median: Value = serde_json::from_str(&std::fs::read_to_string(d.join("median.json")).unwrap()).unwrap();
    assert_eq!(median["seeds"].as_array().unwrap().len(), 3);

    for method in ["lda", "nmf"] {
        ok(&[
            "train",
            "--method",
            method,
            "--tokens",
            s(&d.join("tokens.json")),
            "--config",
            s(&configs),
            "--topics",
            "3",
            "--seed",
            "9",
            "--out",
            s(&d.join(format!("{method}.json"))),
        ]);
        let model = TopicModelResult::load(d.join(format!("{method}.json"))).unwrap();
        assert_eq!(model.num_topics(), 3);
        assert_eq!(model.seed, 9);
    }
    for (dataset, method) in [("a", "lda"), ("a", "nmf"), ("a", "embed"), ("a", "lda")] {
        ok(&[
            "evaluate",
            "--model",
            s(&d.join(format!("{method}.json"))),
            "--tokens",
            s(&d.join("tokens.json")),
            "--dataset",
            dataset,
            "--out",
            s(&d.join("metrics.json")),
        ]);
    }
    let reports = load_reports(d.join("metrics.json")).unwrap();
    assert_eq!(reports.iter().map(|r| r.method).collect::<Vec<_>>(), vec![Method::Nmf, Method::Embed, Method::Lda]);
}

#[test]
fn full_run_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_forum(&d.join("one"), 45, 0);
    write_forum(&d.join("two"), 60, 1);
    let config = json!({
        "name": "cli run",
        "datasets": [{"name": "one", "input": d.join("one")}, {"name": "two", "input": d.join("two")}],
        "lda": {"passes": 30, "workers": 1},
        "embed": {"min_cluster_size": 5},
        "selection": {"grid": [2, 3, 4], "median_runs": 3},
    });
    std::fs::write(d.join("run.json"), config.to_string()).unwrap();
    let ws = d.join("ws");
    let manifest: RunManifest =
        serde_json::from_str(&ok(&["run", "--config", s(&d.join("run.json")), "--workspace", s(&ws)])).unwrap();
    assert!(manifest.run_id.starts_with("cli-run-"));

    let out = ok(&["report", "--workspace", s(&ws), "--run", &manifest.run_id, "--out", s(&d.join("report"))]);
    assert!(out.contains("report written to"));
    for f in ["num_topics.csv", "coherence.csv", "diversity.csv", "kl.csv", "runtime.csv", "stats.json", "pairwise.csv"]
    {
        assert!(d.join("report").join(f).is_file(), "{f}");
    }
    assert_eq!(std::fs::read_dir(d.join("report/chords")).unwrap().count(), 6);

    let compare = ok(&[
        "compare",
        "--metrics",
        s(&ws.join("runs").join(&manifest.run_id).join("metrics.json")),
        "--out",
        s(&d.join("compare.json")),
    ]);
    assert!(compare.contains("coherence: F = "), "{compare}");
}

#[test]
fn failures_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("run.json"),
        json!({"name": "x", "datasets": [{"name": "gone", "input": d.join("gone")}]}).to_string(),
    )
    .unwrap();
    let ws = d.join("ws");
    let out = topicbench(&["run", "--config", s(&d.join("run.json")), "--workspace", s(&ws)]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("failed at ingest"));

    let out = topicbench(&["report", "--workspace", s(&ws), "--run", "missing"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("not found"));

    let out = topicbench(&["train", "--method", "lsa", "--tokens", "t", "--out", "o"]);
    assert!(!out.status.success());

    std::fs::write(d.join("bad.json"), r#"{"name": "x", "datasets": [], "typo": 1}"#).unwrap();
    let out = topicbench(&["run", "--config", s(&d.join("bad.json")), "--workspace", s(&ws)]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("typo"));
}

#[test]
fn help_lists_subcommands() {
    let out = ok(&["--help"]);
    for cmd in ["ingest", "preprocess", "train", "select", "evaluate", "compare", "run", "report", "serve"] {
        assert!(out.contains(cmd), "{cmd}");
    }
}
