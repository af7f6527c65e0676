//! On-disk workspace: dataset registry, run directories and manifests.
//!
//! ```text
//! <root>/workspace.json             dataset registry
//! <root>/rankings.jsonl             append-only ranking records
//! <root>/runs/<run>/manifest.json
//! <root>/runs/<run>/config.json
//! <root>/runs/<run>/<dataset>/...   per-dataset artifacts
//! <root>/reports/<run>/...          exported report bundles
//! ```
//!
//! Paths stored in the registry and manifests are relative to the root.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use topicbench_core::models::Method;

use crate::config::{valid_name, RunConfig};
use crate::error::{Error, Result};

const REGISTRY_FILE: &str = "workspace.json";
const RANKINGS_FILE: &str = "rankings.jsonl";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelEntry {
    pub id: String,
    pub method: Method,
    pub path: PathBuf,
    pub num_topics: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetEntry {
    pub run_id: String,
    pub num_documents: usize,
    pub threads: PathBuf,
    pub token_sets: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding_token_sets: Option<PathBuf>,
    pub models: Vec<ModelEntry>,
    pub metrics: PathBuf,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Registry {
    pub datasets: BTreeMap<String, DatasetEntry>,
}

impl Registry {
    pub fn model(&self, id: &str) -> Option<(&str, &DatasetEntry, &ModelEntry)> {
        self.datasets
            .iter()
            .find_map(|(name, d)| d.models.iter().find(|m| m.id == id).map(|m| (name.as_str(), d, m)))
    }
}

pub fn model_id(dataset: &str, method: Method) -> String {
    format!("{dataset}-{method}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Running,
    Complete,
    Failed,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub name: String,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactRef {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub run_id: String,
    pub name: String,
    pub config_hash: String,
    pub status: Status,
    pub started_at: DateTime<Utc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub finished_at: Option<DateTime<Utc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failed_stage: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Seed used by every trained model, keyed `<dataset>/<method>`.
    pub seeds: BTreeMap<String, u64>,
    pub stages: Vec<StageRecord>,
    pub artifacts: Vec<ArtifactRef>,
}

impl RunManifest {
    pub fn artifact(&self, kind: &str, dataset: Option<&str>, method: Option<Method>) -> Option<&ArtifactRef> {
        self.artifacts
            .iter()
            .find(|a| a.kind == kind && a.dataset.as_deref() == dataset && a.method == method)
    }

    pub fn stage(&self, name: &str) -> Option<&StageRecord> {
        self.stages.iter().find(|s| s.name == name)
    }
}

#[derive(Debug, Clone)]
pub struct Workspace {
    root: PathBuf,
}

impl Workspace {
    /// Opens `root`, creating it if needed.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(root.join("runs"))?;
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn resolve(&self, relative: &Path) -> PathBuf {
        self.root.join(relative)
    }

    pub fn rankings_path(&self) -> PathBuf {
        self.root.join(RANKINGS_FILE)
    }

    pub fn registry(&self) -> Result<Registry> {
        let path = self.root.join(REGISTRY_FILE);
        if !path.exists() {
            return Ok(Registry::default());
        }
        read_json(&path)
    }

    pub fn save_registry(&self, registry: &Registry) -> Result<()> {
        write_json_atomic(&self.root.join(REGISTRY_FILE), registry)
    }

    pub fn run_dir_rel(run_id: &str) -> PathBuf {
        Path::new("runs").join(run_id)
    }

    pub fn run_dir(&self, run_id: &str) -> PathBuf {
        self.root.join(Self::run_dir_rel(run_id))
    }

    pub fn manifest_path(&self, run_id: &str) -> PathBuf {
        self.run_dir(run_id).join("manifest.json")
    }

    pub fn load_manifest(&self, run_id: &str) -> Result<RunManifest> {
        if !valid_name(run_id) {
            return Err(Error::NotFound(format!("run {run_id:?}")));
        }
        let path = self.manifest_path(run_id);
        if !path.exists() {
            return Err(Error::NotFound(format!("run {run_id:?}")));
        }
        read_json(&path)
    }

    pub fn save_manifest(&self, manifest: &RunManifest) -> Result<()> {
        fs::create_dir_all(self.run_dir(&manifest.run_id))?;
        write_json_atomic(&self.manifest_path(&manifest.run_id), manifest)
    }

    /// Checks that every artifact a manifest references exists and that the
    /// stored config still hashes to the recorded value.
    pub fn verify_run(&self, run_id: &str) -> Result<RunManifest> {
        let manifest = self.load_manifest(run_id)?;
        for a in &manifest.artifacts {
            let p = self.resolve(&a.path);
            if !p.is_file() {
                return Err(Error::Artifact {
                    path: a.path.clone(),
                    reason: "missing on disk".into(),
                });
            }
        }
        let config_path = self.run_dir(run_id).join("config.json");
        let config: RunConfig = read_json(&config_path)?;
        if config.hash() != manifest.config_hash {
            return Err(Error::Artifact {
                path: config_path,
                reason: "config hash does not match the manifest".into(),
            });
        }
        Ok(manifest)
    }

    pub fn run_ids(&self) -> Result<Vec<String>> {
        let mut ids: Vec<String> = fs::read_dir(self.root.join("runs"))?
            .filter_map(|e| e.ok())
            .filter(|e| e.path().join("manifest.json").is_file())
            .filter_map(|e| e.file_name().to_str().map(str::to_string))
            .collect();
        ids.sort();
        Ok(ids)
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let file = fs::File::open(path).map_err(|e| Error::Artifact {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    serde_json::from_reader(std::io::BufReader::new(file)).map_err(|e| Error::Artifact {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

/// Writes pretty JSON through a temporary sibling so readers never observe a
/// half-written file.
pub fn write_json_atomic<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let tmp = path.with_extension("json.tmp");
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}
