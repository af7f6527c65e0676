//! Sequential UMAP: fuzzy kNN graph, PCA initialization and seeded SGD layout.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Cosine,
    Euclidean,
}

impl Metric {
    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Euclidean => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt(),
            Metric::Cosine => {
                let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
                for (x, y) in a.iter().zip(b) {
                    dot += x * y;
                    na += x * x;
                    nb += y * y;
                }
                if na == 0.0 && nb == 0.0 {
                    0.0
                } else if na == 0.0 || nb == 0.0 {
                    1.0
                } else {
                    (1.0 - dot / (na.sqrt() * nb.sqrt())).max(0.0)
                }
            }
        }
    }
}

/// Maps high-dimensional rows to a lower-dimensional space.
pub trait Reducer {
    fn reduce(&self, data: &[Vec<f64>]) -> Result<Vec<Vec<f64>>>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Umap {
    pub n_neighbors: usize,
    pub n_components: usize,
    pub min_dist: f64,
    pub spread: f64,
    pub metric: Metric,
    /// `None` picks 500 epochs up to 10 000 rows, 200 above.
    pub n_epochs: Option<usize>,
    pub learning_rate: f64,
    pub negative_sample_rate: usize,
    pub seed: u64,
}

impl Default for Umap {
    fn default() -> Self {
        Self {
            n_neighbors: 15,
            n_components: 5,
            min_dist: 0.0,
            spread: 1.0,
            metric: Metric::Cosine,
            n_epochs: None,
            learning_rate: 1.0,
            negative_sample_rate: 5,
            seed: 42,
        }
    }
}

const SMOOTH_K_TOLERANCE: f64 = 1e-5;
const MIN_K_DIST_SCALE: f64 = 1e-3;
const GRAD_CLIP: f64 = 4.0;
const INIT_SCALE: f64 = 10.0;

/// Nearest neighbours of each row (self included), ascending by distance.
pub fn nearest_neighbors(data: &[Vec<f64>], k: usize, metric: Metric) -> (Vec<Vec<usize>>, Vec<Vec<f64>>) {
    let n = data.len();
    let k = k.min(n);
    let mut idx = Vec::with_capacity(n);
    let mut dist = Vec::with_capacity(n);
    for i in 0..n {
        let mut row: Vec<(f64, usize)> = (0..n)
            .map(|j| (if i == j { 0.0 } else { metric.distance(&data[i], &data[j]) }, j))
            .collect();
        row.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1 != i).cmp(&(b.1 != i))).then(a.1.cmp(&b.1)));
        row.truncate(k);
        idx.push(row.iter().map(|r| r.1).collect());
        dist.push(row.iter().map(|r| r.0).collect());
    }
    (idx, dist)
}

/// Per-point `(sigma, rho)` so that the smoothed neighbour memberships sum to
/// `log2(k)`.
pub fn smooth_knn_dist(dists: &[Vec<f64>], k: usize) -> Vec<(f64, f64)> {
    let target = (k as f64).log2();
    let mean_all = {
        let (s, c) = dists.iter().flatten().fold((0.0, 0usize), |(s, c), d| (s + d, c + 1));
        if c > 0 {
            s / c as f64
        } else {
            0.0
        }
    };
    dists
        .iter()
        .map(|row| {
            let rho = row.iter().copied().find(|&d| d > 0.0).unwrap_or(0.0);
            let (mut lo, mut hi, mut mid) = (0.0, f64::INFINITY, 1.0);
            for _ in 0..64 {
                let psum: f64 = row
                    .iter()
                    .skip(1)
                    .map(|&d| {
                        let x = d - rho;
                        if x > 0.0 {
                            (-x / mid).exp()
                        } else {
                            1.0
                        }
                    })
                    .sum();
                if (psum - target).abs() < SMOOTH_K_TOLERANCE {
                    break;
                }
                if psum > target {
                    hi = mid;
                    mid = (lo + hi) / 2.0;
                } else {
                    lo = mid;
                    mid = if hi.is_infinite() { mid * 2.0 } else { (lo + hi) / 2.0 };
                }
            }
            let mean_row = row.iter().sum::<f64>() / row.len().max(1) as f64;
            let floor = if rho > 0.0 { mean_row } else { mean_all } * MIN_K_DIST_SCALE;
            (mid.max(floor), rho)
        })
        .collect()
}

/// Symmetric fuzzy graph as `(i, j, weight)` edges with `i != j`, both
/// directions present, ordered by `(i, j)`.
pub fn fuzzy_graph(idx: &[Vec<usize>], dists: &[Vec<f64>], k: usize) -> Vec<(usize, usize, f64)> {
    let params = smooth_knn_dist(dists, k);
    let mut directed: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (i, (row_idx, row_d)) in idx.iter().zip(dists).enumerate() {
        let (sigma, rho) = params[i];
        for (&j, &d) in row_idx.iter().zip(row_d) {
            if j == i {
                continue;
            }
            let w = if d - rho <= 0.0 || sigma == 0.0 {
                1.0
            } else {
                (-(d - rho) / sigma).exp()
            };
            directed.insert((i, j), w);
        }
    }
    let mut sym: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (&(i, j), &a) in &directed {
        let b = directed.get(&(j, i)).copied().unwrap_or(0.0);
        let w = a + b - a * b;
        sym.insert((i, j), w);
        sym.insert((j, i), w);
    }
    sym.into_iter().filter(|&(_, w)| w > 0.0).map(|((i, j), w)| (i, j, w)).collect()
}

/// Fits `1 / (1 + a·d^{2b})` to the offset-exponential target curve by
/// Levenberg–Marquardt.
pub fn find_ab_params(spread: f64, min_dist: f64) -> (f64, f64) {
    let xs: Vec<f64> = (0..300).map(|i| 3.0 * spread * i as f64 / 299.0).collect();
    let ys: Vec<f64> = xs
        .iter()
        .map(|&x| if x < min_dist { 1.0 } else { (-(x - min_dist) / spread).exp() })
        .collect();
    let sse = |a: f64, b: f64| -> f64 {
        xs.iter()
            .zip(&ys)
            .map(|(&x, &y)| {
                let r = 1.0 / (1.0 + a * x.powf(2.0 * b)) - y;
                r * r
            })
            .sum()
    };
    let (mut a, mut b) = (1.0, 1.0);
    let mut lambda = 1e-3;
    let mut cost = sse(a, b);
    for _ in 0..500 {
        let (mut jtj, mut jtr) = ([[0.0; 2]; 2], [0.0; 2]);
        for (&x, &y) in xs.iter().zip(&ys) {
            if x <= 0.0 {
                continue;
            }
            let u = x.powf(2.0 * b);
            let f = 1.0 / (1.0 + a * u);
            let r = f - y;
            let ja = -u * f * f;
            let jb = -a * u * 2.0 * x.ln() * f * f;
            jtj[0][0] += ja * ja;
            jtj[0][1] += ja * jb;
            jtj[1][1] += jb * jb;
            jtr[0] += ja * r;
            jtr[1] += jb * r;
        }
        jtj[1][0] = jtj[0][1];
        let mut improved = false;
        for _ in 0..30 {
            let m00 = jtj[0][0] * (1.0 + lambda);
            let m11 = jtj[1][1] * (1.0 + lambda);
            let det = m00 * m11 - jtj[0][1] * jtj[1][0];
            if det.abs() < 1e-300 {
                lambda *= 10.0;
                continue;
            }
            let da = -(m11 * jtr[0] - jtj[0][1] * jtr[1]) / det;
            let db = -(m00 * jtr[1] - jtj[1][0] * jtr[0]) / det;
            let (na, nb) = (a + da, b + db);
            if na > 0.0 && nb > 0.0 {
                let c = sse(na, nb);
                if c < cost {
                    let gain = cost - c;
                    a = na;
                    b = nb;
                    cost = c;
                    lambda = (lambda / 10.0).max(1e-12);
                    improved = gain > 1e-15;
                    break;
                }
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    (a, b)
}

/// Projection onto the leading principal components, scaled so the largest
/// absolute coordinate is 10, plus a small seeded jitter.
fn pca_init(data: &[Vec<f64>], c: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = data.len();
    let d = data[0].len();
    let mut mean = vec![0.0; d];
    for row in data {
        mean.iter_mut().zip(row).for_each(|(m, x)| *m += x / n as f64);
    }
    let centered: Vec<Vec<f64>> = data
        .iter()
        .map(|r| r.iter().zip(&mean).map(|(x, m)| x - m).collect())
        .collect();
    let mut cov = vec![vec![0.0; d]; d];
    for row in &centered {
        for a in 0..d {
            if row[a] == 0.0 {
                continue;
            }
            for b in a..d {
                cov[a][b] += row[a] * row[b];
            }
        }
    }
    for a in 0..d {
        for b in 0..a {
            cov[a][b] = cov[b][a];
        }
    }

    let mut components: Vec<Vec<f64>> = Vec::with_capacity(c);
    for comp in 0..c {
        let mut v: Vec<f64> = (0..d).map(|i| 1.0 + ((i * 7919 + comp * 104_729) % 97) as f64 / 97.0).collect();
        for _ in 0..300 {
            let mut next: Vec<f64> = cov.iter().map(|row| row.iter().zip(&v).map(|(x, y)| x * y).sum()).collect();
            for prev in &components {
                let p: f64 = next.iter().zip(prev).map(|(x, y)| x * y).sum();
                next.iter_mut().zip(prev).for_each(|(x, y)| *x -= p * y);
            }
            let norm = next.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm < 1e-300 {
                break;
            }
            next.iter_mut().for_each(|x| *x /= norm);
            let delta: f64 = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).sum();
            v = next;
            if delta < 1e-10 {
                break;
            }
        }
        for prev in &components {
            let p: f64 = v.iter().zip(prev).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(prev).for_each(|(x, y)| *x -= p * y);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            v.iter_mut().for_each(|x| *x /= norm);
        }
        components.push(v);
    }

    let mut emb: Vec<Vec<f64>> = centered
        .iter()
        .map(|r| {
            components
                .iter()
                .map(|comp| r.iter().zip(comp).map(|(x, y)| x * y).sum())
                .collect()
        })
        .collect();
    let max_abs = emb.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
    let scale = if max_abs > 0.0 { INIT_SCALE / max_abs } else { 1.0 };
    for row in &mut emb {
        for x in row.iter_mut() {
            *x = *x * scale + rng.random_range(-1e-4..1e-4);
        }
    }
    emb
}

fn clip(x: f64) -> f64 {
    x.clamp(-GRAD_CLIP, GRAD_CLIP)
}

impl Umap {
    pub fn validate(&self, n_features: usize) -> Result<()> {
        if self.n_neighbors < 2 {
            return Err(Error::Config("n_neighbors must be at least 2".into()));
        }
        if self.n_components == 0 || self.n_components >= n_features {
            return Err(Error::Config(format!(
                "n_components {} must be in 1..{n_features}",
                self.n_components
            )));
        }
        if !(self.spread > 0.0) || self.min_dist < 0.0 || self.min_dist > self.spread {
            return Err(Error::Config("require 0 <= min_dist <= spread and spread > 0".into()));
        }
        Ok(())
    }

    fn optimize(&self, emb: &mut [Vec<f64>], edges: &[(usize, usize, f64)], n_epochs: usize, rng: &mut ChaCha8Rng) {
        let n = emb.len();
        let dim = self.n_components;
        let (a, b) = find_ab_params(self.spread, self.min_dist);
        let max_w = edges.iter().fold(0.0f64, |m, e| m.max(e.2));
        let kept: Vec<(usize, usize, f64)> = edges
            .iter()
            .copied()
            .filter(|e| e.2 >= max_w / n_epochs as f64)
            .collect();
        let eps: Vec<f64> = kept.iter().map(|e| max_w / e.2).collect();
        let neg_rate = self.negative_sample_rate.max(1) as f64;
        let eps_neg: Vec<f64> = eps.iter().map(|e| e / neg_rate).collect();
        let mut next_sample = eps.clone();
        let mut next_neg = eps_neg.clone();
        let mut current = vec![0.0; dim];

        for epoch in 0..n_epochs {
            let ep = epoch as f64;
            let alpha = self.learning_rate * (1.0 - ep / n_epochs as f64);
            for (e, &(j, k, _)) in kept.iter().enumerate() {
                if next_sample[e] > ep {
                    continue;
                }
                current.copy_from_slice(&emb[j]);
                let dist_sq: f64 = current.iter().zip(&emb[k]).map(|(x, y)| (x - y) * (x - y)).sum();
                let coeff = if dist_sq > 0.0 {
                    -2.0 * a * b * dist_sq.powf(b - 1.0) / (a * dist_sq.powf(b) + 1.0)
                } else {
                    0.0
                };
                for d in 0..dim {
                    let g = clip(coeff * (current[d] - emb[k][d])) * alpha;
                    current[d] += g;
                    emb[k][d] -= g;
                }
                next_sample[e] += eps[e];

                let n_neg = ((ep - next_neg[e]) / eps_neg[e]).floor().max(0.0) as usize;
                for _ in 0..n_neg {
                    let other = rng.random_range(0..n);
                    if other == j {
                        continue;
                    }
                    let dist_sq: f64 = current.iter().zip(&emb[other]).map(|(x, y)| (x - y) * (x - y)).sum();
                    if dist_sq <= 0.0 {
                        continue;
                    }
                    let coeff = 2.0 * b / ((0.001 + dist_sq) * (a * dist_sq.powf(b) + 1.0));
                    for d in 0..dim {
                        current[d] += clip(coeff * (current[d] - emb[other][d])) * alpha;
                    }
                }
                next_neg[e] += n_neg as f64 * eps_neg[e];
                emb[j].copy_from_slice(&current);
            }
        }
    }
}

impl Reducer for Umap {
    fn reduce(&self, data: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let n = data.len();
        if n == 0 {
            return Err(Error::EmptyCorpus);
        }
        let n_features = data[0].len();
        if data.iter().any(|r| r.len() != n_features) {
            return Err(Error::Validation("embedding rows differ in dimension".into()));
        }
        if data.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::Validation("embedding contains non-finite values".into()));
        }
        self.validate(n_features)?;

        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut emb = pca_init(data, self.n_components, &mut rng);
        if n <= 2 {
            return Ok(emb);
        }
        let k = self.n_neighbors.min(n);
        let (idx, dists) = nearest_neighbors(data, k, self.metric);
        let edges = fuzzy_graph(&idx, &dists, k);
        if edges.is_empty() {
            return Ok(emb);
        }
        let n_epochs = self.n_epochs.unwrap_or(if n <= 10_000 { 500 } else { 200 });
        self.optimize(&mut emb, &edges, n_epochs.max(1), &mut rng);
        Ok(emb)
    }
}
