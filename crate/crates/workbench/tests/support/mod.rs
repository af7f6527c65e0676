//! Small themed forums and a fast run config over them.

#![allow(dead_code)]

use std::path::{Path, PathBuf};

use serde_json::json;
use topicbench::config::RunConfig;
use topicbench::pipeline::run_pipeline;
use topicbench::workspace::{RunManifest, Workspace};
use topicbench_core::ingest::{save_threads, Thread};

pub const THEMES: [&[&str]; 3] = [
    &["recipe", "oven", "flour", "butter", "dough", "bread", "sugar", "bake", "crust", "yeast"],
    &["engine", "tire", "brake", "gearbox", "clutch", "exhaust", "radiator", "piston", "mechanic", "garage"],
    &["tomato", "compost", "seedling", "soil", "mulch", "shovel", "greenhouse", "fertilizer", "orchard", "harvest"],
];

pub const DATASETS: [&str; 2] = ["kitchen", "workshop"];

/// Threads per dataset, in [`DATASETS`] order.
pub const SIZES: [usize; 2] = [45, 60];

/// `n` threads cycling through the themes, with word choice varied by `salt`.
pub fn themed_threads(n: usize, salt: usize) -> Vec<Thread> {
    (0..n)
        .map(|i| {
            let theme = THEMES[i % 3];
            let words: Vec<&str> = (0..30).map(|j| theme[(i * 7 + j * j * 3 + j + salt) % theme.len()]).collect();
            Thread {
                id: format!("t{salt}_{i}"),
                text: format!("The {} and the {}. {}", words[0], words[1], words[2..].join(" ")),
                comment_count: i % 4,
            }
        })
        .collect()
}

/// Writes one threads file per dataset under `dir` and returns a config over
/// them with small training budgets.
pub fn fast_config(dir: &Path, name: &str) -> RunConfig {
    let datasets: Vec<_> = DATASETS
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let path = dir.join(format!("{d}.threads.json"));
            save_threads(&path, &themed_threads(SIZES[i], i)).unwrap();
            json!({"name": d, "input": path})
        })
        .collect();
    serde_json::from_value(json!({
        "name": name,
        "datasets": datasets,
        "lda": {"passes": 30, "workers": 1, "seed": 5},
        "nmf": {"seed": 5},
        "embed": {"seed": 5, "min_cluster_size": 5},
        "selection": {"grid": [2, 3, 4], "median_runs": 3},
    }))
    .unwrap()
}

pub struct Fixture {
    pub dir: tempfile::TempDir,
    pub workspace: Workspace,
    pub manifest: RunManifest,
}

impl Fixture {
    pub fn root(&self) -> PathBuf {
        self.workspace.root().to_path_buf()
    }
}

/// A workspace holding one completed run over [`DATASETS`].
pub fn completed_run() -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let config = fast_config(dir.path(), "fixture");
    let workspace = Workspace::open(dir.path().join("ws")).unwrap();
    let manifest = run_pipeline(&workspace, &config).unwrap();
    assert_eq!(manifest.status, topicbench::workspace::Status::Complete, "{:?}", manifest.error);
    Fixture {
        dir,
        workspace,
        manifest,
    }
}
