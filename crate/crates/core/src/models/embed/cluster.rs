use hdbscan::{DistanceMetric, Hdbscan, HdbscanHyperParams};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Assigns a cluster label to each row; `-1` marks noise.
pub trait Clusterer {
    fn cluster(&self, data: &[Vec<f64>]) -> Result<Vec<i64>>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClusterMetric {
    Euclidean,
    Manhattan,
}

/// Density clustering with excess-of-mass cluster selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityClusterer {
    pub min_cluster_size: usize,
    /// Neighbourhood size for core distances; defaults to `min_cluster_size`.
    pub min_samples: Option<usize>,
    pub metric: ClusterMetric,
}

impl Default for DensityClusterer {
    fn default() -> Self {
        Self {
            min_cluster_size: 15,
            min_samples: None,
            metric: ClusterMetric::Euclidean,
        }
    }
}

impl Clusterer for DensityClusterer {
    fn cluster(&self, data: &[Vec<f64>]) -> Result<Vec<i64>> {
        if self.min_cluster_size < 2 {
            return Err(Error::Config("min_cluster_size must be at least 2".into()));
        }
        let min_samples = self.min_samples.unwrap_or(self.min_cluster_size);
        if data.len() < self.min_cluster_size || data.len() <= min_samples {
            return Ok(vec![-1; data.len()]);
        }
        let metric = match self.metric {
            ClusterMetric::Euclidean => DistanceMetric::Euclidean,
            ClusterMetric::Manhattan => DistanceMetric::Manhattan,
        };
        let hp = HdbscanHyperParams::builder()
            .min_cluster_size(self.min_cluster_size)
            .min_samples(min_samples)
            .dist_metric(metric)
            .build();
        let labels = Hdbscan::new(data, hp).cluster().map_err(|e| Error::Backend {
            stage: "cluster",
            reason: e.to_string(),
        })?;
        Ok(labels.into_iter().map(i64::from).collect())
    }
}
