//! Declarative run configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use topicbench_core::metrics::EvalOptions;
use topicbench_core::models::{default_grid, EmbedClusterConfig, LdaConfig, Method, NmfConfig};
use topicbench_core::preprocess::PreprocessConfig;

use crate::chord::DEFAULT_THRESHOLD;
use crate::error::{Error, Result};
use crate::train::MethodConfigs;

/// One subreddit to process. `input` is either a directory holding an
/// `RS_*` / `RC_*` dump pair or a threads JSON file written by `ingest`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetInput {
    pub name: String,
    pub input: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectionConfig {
    /// Pick LDA/NMF topic counts by coherence over `grid` instead of using
    /// the configured `num_topics`.
    pub topic_sweep: bool,
    pub grid: Vec<usize>,
    /// Train the embedding model this many times with distinct seeds and keep
    /// the run with the median topic count. `None` trains once.
    pub median_runs: Option<usize>,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self {
            topic_sweep: true,
            grid: default_grid(),
            median_runs: Some(11),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationConfig {
    pub top_k: usize,
    pub window: usize,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        let o = EvalOptions::default();
        Self {
            top_k: o.top_k,
            window: o.window,
        }
    }
}

impl EvaluationConfig {
    pub fn options(&self) -> EvalOptions {
        EvalOptions {
            top_k: self.top_k,
            window: self.window,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsConfig {
    pub enabled: bool,
    pub alpha: f64,
}

impl Default for StatsConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            alpha: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub name: String,
    pub datasets: Vec<DatasetInput>,
    #[serde(default = "all_methods")]
    pub methods: Vec<Method>,
    #[serde(default)]
    pub preprocess: PreprocessConfig,
    #[serde(default)]
    pub lda: LdaConfig,
    #[serde(default)]
    pub nmf: NmfConfig,
    #[serde(default)]
    pub embed: EmbedClusterConfig,
    #[serde(default)]
    pub selection: SelectionConfig,
    #[serde(default)]
    pub evaluation: EvaluationConfig,
    #[serde(default)]
    pub stats: StatsConfig,
    #[serde(default = "default_threshold")]
    pub chord_threshold: f64,
}

fn all_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}

fn default_threshold() -> f64 {
    DEFAULT_THRESHOLD
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let config: RunConfig = serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::Config("name is empty".into()));
        }
        if self.datasets.is_empty() {
            return Err(Error::Config("no datasets configured".into()));
        }
        for (i, d) in self.datasets.iter().enumerate() {
            if !valid_name(&d.name) {
                return Err(Error::Config(format!(
                    "dataset name {:?} must be non-empty and use only letters, digits, '_' or '-'",
                    d.name
                )));
            }
            if self.datasets[..i].iter().any(|o| o.name == d.name) {
                return Err(Error::Config(format!("dataset {:?} listed twice", d.name)));
            }
        }
        if self.methods.is_empty() {
            return Err(Error::Config("no methods configured".into()));
        }
        if self.selection.grid.is_empty() || self.selection.grid.contains(&0) {
            return Err(Error::Config("selection grid must hold positive topic counts".into()));
        }
        if let Some(r) = self.selection.median_runs {
            if r == 0 || r % 2 == 0 {
                return Err(Error::Config(format!("median_runs must be odd and positive, got {r}")));
            }
        }
        if !(0.0..=1.0).contains(&self.chord_threshold) {
            return Err(Error::Config(format!("chord_threshold {} outside [0, 1]", self.chord_threshold)));
        }
        if !(self.stats.alpha > 0.0 && self.stats.alpha < 1.0) {
            return Err(Error::Config(format!("stats alpha {} outside (0, 1)", self.stats.alpha)));
        }
        self.preprocess.validate()?;
        self.embed.validate()?;
        Ok(())
    }

    pub fn method_configs(&self) -> MethodConfigs {
        MethodConfigs {
            lda: self.lda.clone(),
            nmf: self.nmf.clone(),
            embed: self.embed.clone(),
        }
    }

    /// SHA-256 of the canonical JSON form: defaults filled in, keys sorted,
    /// no insignificant whitespace.
    pub fn hash(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        hex_digest(serde_json::to_string(&value).expect("value serializes").as_bytes())
    }

    /// Run id: the config name followed by the first 12 hex digits of the hash.
    pub fn run_id(&self) -> String {
        format!("{}-{}", slug(&self.name), &self.hash()[..12])
    }
}

pub fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn valid_name(name: &str) -> bool {
    !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

fn slug(name: &str) -> String {
    let s: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '-' })
        .collect();
    let s = s.trim_matches('-').to_string();
    if s.is_empty() {
        "run".into()
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> RunConfig {
        serde_json::from_str(r#"{"name": "Demo run", "datasets": [{"name": "cooking", "input": "data/cooking"}]}"#).unwrap()
    }

    #[test]
    fn defaults_fill_in() {
        let c = minimal();
        assert_eq!(c.methods, Method::ALL.to_vec());
        assert_eq!(c.selection.grid, (5..=50).step_by(5).collect::<Vec<_>>());
        assert_eq!(c.selection.median_runs, Some(11));
        assert_eq!(c.chord_threshold, 0.1);
        c.validate().unwrap();
    }

    #[test]
    fn hash_ignores_key_order_and_whitespace() {
        let a: RunConfig =
            serde_json::from_str(r#"{"name":"x","datasets":[{"name":"d","input":"p"}],"chord_threshold":0.2}"#).unwrap();
        let b: RunConfig = serde_json::from_str(
            r#"{
                "chord_threshold": 0.2,
                "datasets": [{"input": "p", "name": "d"}],
                "name": "x"
            }"#,
        )
        .unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
        let mut c = a.clone();
        c.chord_threshold = 0.3;
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn run_id_is_slugged() {
        let id = minimal().run_id();
        assert!(id.starts_with("demo-run-"), "{id}");
        assert_eq!(id.len(), "demo-run-".len() + 12);
    }

    #[test]
    fn rejects_bad_configs() {
        let mut c = minimal();
        c.datasets[0].name = "r/cooking".into();
        assert!(c.validate().is_err());
        let mut c = minimal();
        c.selection.median_runs = Some(10);
        assert!(c.validate().is_err());
        let mut c = minimal();
        c.datasets.push(c.datasets[0].clone());
        assert!(c.validate().is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"name":"x","datasets":[],"bogus":1}"#).is_err());
    }

    #[test]
    fn known_digest() {
        assert_eq!(
            hex_digest(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
