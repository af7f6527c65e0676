//! Choosing the number of topics: a coherence sweep for LDA/NMF and the
//! median of repeated runs for the embedding path.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub fn default_grid() -> Vec<usize> {
    (5..=50).step_by(5).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub num_topics: usize,
    /// `None` when training or scoring failed at this point.
    pub coherence: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSelection {
    pub selected: usize,
    pub curve: Vec<CurvePoint>,
}

/// Scores every grid point with `score` (train at K, return coherence) and
/// picks the best; ties go to the smaller K. Failed points are skipped.
pub fn choose_topics_by_coherence<F>(grid: &[usize], mut score: F) -> Result<SweepSelection>
where
    F: FnMut(usize) -> Result<f64>,
{
    if grid.is_empty() {
        return Err(Error::Config("empty topic grid".into()));
    }
    let mut points: Vec<usize> = grid.to_vec();
    points.sort_unstable();
    points.dedup();
    let mut curve = Vec::with_capacity(points.len());
    let mut best: Option<(usize, f64)> = None;
    for k in points {
        match score(k) {
            Ok(c) if c.is_finite() => {
                if best.is_none_or(|(_, b)| c > b) {
                    best = Some((k, c));
                }
                curve.push(CurvePoint {
                    num_topics: k,
                    coherence: Some(c),
                    error: None,
                });
            }
            Ok(c) => {
                log::warn!("K={k}: non-finite coherence {c}, skipped");
                curve.push(CurvePoint {
                    num_topics: k,
                    coherence: None,
                    error: Some(format!("non-finite coherence {c}")),
                });
            }
            Err(e) => {
                log::warn!("K={k}: {e}, skipped");
                curve.push(CurvePoint {
                    num_topics: k,
                    coherence: None,
                    error: Some(e.to_string()),
                });
            }
        }
    }
    match best {
        Some((selected, _)) => Ok(SweepSelection { selected, curve }),
        None => Err(Error::Degenerate("every grid point failed".into())),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MedianSelection {
    pub selected: usize,
    pub counts: Vec<usize>,
    pub mean: f64,
    /// Population standard deviation of the counts.
    pub std: f64,
}

/// Runs `train(run_index)` `runs` times and returns the median topic count.
pub fn choose_topics_median<F>(runs: usize, mut train: F) -> Result<MedianSelection>
where
    F: FnMut(usize) -> Result<usize>,
{
    if runs == 0 || runs % 2 == 0 {
        return Err(Error::Config(format!("runs must be odd and positive, got {runs}")));
    }
    let mut counts = Vec::with_capacity(runs);
    for index in 0..runs {
        let k = train(index).map_err(|e| Error::Run {
            index,
            source: Box::new(e),
        })?;
        counts.push(k);
    }
    let mut sorted = counts.clone();
    sorted.sort_unstable();
    let n = runs as f64;
    let mean = counts.iter().sum::<usize>() as f64 / n;
    let std = (counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / n).sqrt();
    Ok(MedianSelection {
        selected: sorted[runs / 2],
        counts,
        mean,
        std,
    })
}
