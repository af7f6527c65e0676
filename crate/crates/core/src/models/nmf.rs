//! Non-negative matrix factorization `V ≈ W H` by Lee–Seung multiplicative
//! updates on the Frobenius objective `½‖V − WH‖²`.

use ndarray::{Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::result::{dominant_sizes, normalize, top_keywords, DocTopics, Method, Topic, TopicModelResult};
use super::sparse::CsrMatrix;
use crate::error::{Error, Result};
use crate::metrics::timed;

const DENOM_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NmfConfig {
    pub num_topics: usize,
    pub max_iter: usize,
    /// Stop once an iteration improves the objective by less than `tol`
    /// times its initial value.
    pub tol: f64,
    pub seed: u64,
    pub top_words: usize,
}

impl Default for NmfConfig {
    fn default() -> Self {
        Self {
            num_topics: 10,
            max_iter: 200,
            tol: 1e-4,
            seed: 42,
            top_words: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NmfFactors {
    /// documents × K
    pub w: Array2<f64>,
    /// K × vocabulary
    pub h: Array2<f64>,
    /// Objective before the first update and after every iteration.
    pub objective: Vec<f64>,
    pub converged: bool,
}

impl NmfFactors {
    /// `‖V − WH‖_F / ‖V‖_F`
    pub fn relative_error(&self, v: &CsrMatrix) -> f64 {
        let norm = v.frobenius_sq();
        if norm == 0.0 {
            return 0.0;
        }
        (2.0 * objective(v, &self.w, &self.h) / norm).max(0.0).sqrt()
    }
}

/// `½‖V − WH‖²` expanded so only the stored entries of `V` are visited.
fn objective(v: &CsrMatrix, w: &Array2<f64>, h: &Array2<f64>) -> f64 {
    let mut cross = 0.0;
    for i in 0..v.n_rows() {
        let wi = w.row(i);
        for (j, x) in v.row(i) {
            cross += x * wi.dot(&h.column(j));
        }
    }
    let wtw = w.t().dot(w);
    let hht = h.dot(&h.t());
    let model_sq: f64 = (&wtw * &hht).sum();
    0.5 * (v.frobenius_sq() - 2.0 * cross + model_sq)
}

pub fn validate_input(v: &CsrMatrix) -> Result<()> {
    if let Some(bad) = v.values().iter().find(|x| !x.is_finite() || **x < 0.0) {
        return Err(Error::Validation(format!("NMF input contains entry {bad}")));
    }
    Ok(())
}

pub fn factorize(v: &CsrMatrix, config: &NmfConfig) -> Result<NmfFactors> {
    validate_input(v)?;
    let k = config.num_topics;
    let (n, m) = (v.n_rows(), v.n_cols());
    if k == 0 || k > n.min(m) {
        return Err(Error::Config(format!(
            "num_topics {k} must be in 1..={} for a {n}x{m} matrix",
            n.min(m)
        )));
    }
    if !(config.tol > 0.0) {
        return Err(Error::Config("tol must be positive".into()));
    }

    let total: f64 = v.values().iter().sum();
    let scale = 2.0 * (total / (n * m) as f64 / k as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut w = Array2::from_shape_fn((n, k), |_| rng.random::<f64>() * scale);
    let mut h = Array2::from_shape_fn((k, m), |_| rng.random::<f64>() * scale);

    let mut history = vec![objective(v, &w, &h)];
    let initial = history[0];
    let mut converged = false;
    for _ in 0..config.max_iter {
        // W ← W ∘ (V Hᵀ) / (W H Hᵀ)
        let hht = h.dot(&h.t());
        let mut numer_w = Array2::<f64>::zeros((n, k));
        for i in 0..n {
            let mut row = numer_w.row_mut(i);
            for (j, x) in v.row(i) {
                row.scaled_add(x, &h.column(j));
            }
        }
        let denom_w = w.dot(&hht);
        w.zip_mut_with(&numer_w, |a, &b| *a *= b);
        w.zip_mut_with(&denom_w, |a, &d| *a /= d.max(DENOM_FLOOR));

        // H ← H ∘ (Wᵀ V) / (Wᵀ W H)
        let wtw = w.t().dot(&w);
        let mut numer_h = Array2::<f64>::zeros((k, m));
        for i in 0..n {
            let wi = w.row(i);
            for (j, x) in v.row(i) {
                numer_h.column_mut(j).scaled_add(x, &wi);
            }
        }
        let denom_h = wtw.dot(&h);
        h.zip_mut_with(&numer_h, |a, &b| *a *= b);
        h.zip_mut_with(&denom_h, |a, &d| *a /= d.max(DENOM_FLOOR));

        let current = objective(v, &w, &h);
        let previous = *history.last().expect("history starts non-empty");
        history.push(current);
        if initial <= 0.0 || (previous - current) / initial < config.tol {
            converged = true;
            break;
        }
    }

    Ok(NmfFactors {
        w,
        h,
        objective: history,
        converged,
    })
}

pub fn train_nmf(
    tfidf: &CsrMatrix,
    vocabulary: &[String],
    doc_ids: &[String],
    config: &NmfConfig,
) -> Result<TopicModelResult> {
    if vocabulary.len() != tfidf.n_cols() || doc_ids.len() != tfidf.n_rows() {
        return Err(Error::Validation("matrix shape does not match vocabulary/documents".into()));
    }
    let (factors, runtime) = timed(|| factorize(tfidf, config))?;
    let k = config.num_topics;
    let topic_word: Vec<Vec<f64>> = factors.h.axis_iter(Axis(0)).map(|r| r.to_vec()).collect();
    let rows: Vec<Vec<f64>> = factors.w.axis_iter(Axis(0)).map(|r| normalize(&r.to_vec())).collect();
    let sizes = dominant_sizes(&rows, k);
    let topics = (0..k)
        .map(|t| Topic {
            topic_id: t,
            keywords: top_keywords(&topic_word[t], vocabulary, config.top_words),
            size: sizes[t],
        })
        .collect();
    Ok(TopicModelResult {
        method: Method::Nmf,
        topics,
        doc_ids: doc_ids.to_vec(),
        doc_topic: DocTopics::Distribution { rows },
        vocabulary: vocabulary.to_vec(),
        topic_word,
        runtime_seconds: runtime,
        config: serde_json::to_value(config).unwrap_or_default(),
        seed: config.seed,
    })
}
