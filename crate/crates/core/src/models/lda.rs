//! Latent Dirichlet allocation by collapsed Gibbs sampling.
//!
//! `alpha` is symmetric (`1/K` by default). With `eta = "auto"` the topic-word
//! prior becomes an asymmetric per-word vector re-estimated every ten sweeps
//! with Minka's fixed-point iteration. With more than one worker, documents are
//! split into contiguous shards sampled against a snapshot of the global
//! counts and merged after each sweep, so output depends only on the seed and
//! the worker count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::digamma;

use super::result::{dominant_sizes, top_keywords, DocTopics, Method, Topic, TopicModelResult};
use super::vocab::{BowCorpus, Vocabulary};
use crate::error::{Error, Result};
use crate::metrics::timed;

const ETA_UPDATE_EVERY: usize = 10;
const ETA_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Eta {
    Fixed(f64),
    Named(EtaMode),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EtaMode {
    Auto,
}

impl Eta {
    pub const AUTO: Eta = Eta::Named(EtaMode::Auto);
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LdaConfig {
    pub num_topics: usize,
    /// Symmetric document-topic prior; `None` means `1/K`.
    pub alpha: Option<f64>,
    pub eta: Eta,
    /// Full Gibbs sweeps over the corpus.
    pub passes: usize,
    pub workers: usize,
    pub seed: u64,
    pub top_words: usize,
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get().saturating_sub(1))
        .unwrap_or(1)
        .max(1)
}

impl Default for LdaConfig {
    fn default() -> Self {
        Self {
            num_topics: 10,
            alpha: None,
            eta: Eta::AUTO,
            passes: 200,
            workers: default_workers(),
            seed: 42,
            top_words: 10,
        }
    }
}

impl LdaConfig {
    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(1.0 / self.num_topics as f64)
    }

    fn validate(&self, corpus: &BowCorpus) -> Result<()> {
        if self.num_topics == 0 {
            return Err(Error::Config("num_topics must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        if self.num_topics > corpus.len() {
            return Err(Error::Config(format!(
                "num_topics {} exceeds document count {}",
                self.num_topics,
                corpus.len()
            )));
        }
        if let Eta::Fixed(e) = self.eta {
            if !(e > 0.0) {
                return Err(Error::Config("fixed eta must be positive".into()));
            }
        }
        if self.alpha() <= 0.0 {
            return Err(Error::Config("alpha must be positive".into()));
        }
        Ok(())
    }
}

struct Counts {
    k: usize,
    v: usize,
    /// topic-major: `topic_word[t * v + w]`
    topic_word: Vec<u32>,
    topic_total: Vec<u32>,
}

struct Shard<'a> {
    docs: std::ops::Range<usize>,
    doc_offsets: &'a [usize],
    words: &'a [usize],
    z: &'a mut [usize],
    doc_topic: &'a mut [u32],
    rng: &'a mut ChaCha8Rng,
}

fn sample_shard(shard: Shard<'_>, counts: &mut Counts, alpha: f64, eta: &[f64], eta_sum: f64) {
    let k = counts.k;
    let v = counts.v;
    let token_base = shard.doc_offsets[shard.docs.start];
    let doc_base = shard.docs.start;
    let mut weights = vec![0.0f64; k];
    for d in shard.docs.clone() {
        let nd = &mut shard.doc_topic[(d - doc_base) * k..(d - doc_base + 1) * k];
        for i in shard.doc_offsets[d]..shard.doc_offsets[d + 1] {
            let w = shard.words[i];
            let local = i - token_base;
            let old = shard.z[local];
            nd[old] -= 1;
            counts.topic_word[old * v + w] -= 1;
            counts.topic_total[old] -= 1;

            let mut total = 0.0;
            for t in 0..k {
                let p = (nd[t] as f64 + alpha) * (counts.topic_word[t * v + w] as f64 + eta[w])
                    / (counts.topic_total[t] as f64 + eta_sum);
                total += p;
                weights[t] = total;
            }
            let u = shard.rng.random::<f64>() * total;
            let new = weights.iter().position(|&c| u < c).unwrap_or(k - 1);

            shard.z[local] = new;
            nd[new] += 1;
            counts.topic_word[new * v + w] += 1;
            counts.topic_total[new] += 1;
        }
    }
}

/// One Minka fixed-point step for an asymmetric Dirichlet over words.
fn update_eta(eta: &mut [f64], counts: &Counts) {
    let k = counts.k;
    let v = counts.v;
    let eta_sum: f64 = eta.iter().sum();
    let denom: f64 = (0..k)
        .map(|t| digamma(counts.topic_total[t] as f64 + eta_sum) - digamma(eta_sum))
        .sum();
    if denom <= 0.0 {
        return;
    }
    for (w, e) in eta.iter_mut().enumerate() {
        let num: f64 = (0..k)
            .map(|t| digamma(counts.topic_word[t * v + w] as f64 + *e) - digamma(*e))
            .sum();
        *e = (*e * num / denom).max(ETA_FLOOR);
    }
}

pub fn train_lda(corpus: &BowCorpus, vocab: &Vocabulary, config: &LdaConfig) -> Result<TopicModelResult> {
    config.validate(corpus)?;
    if corpus.total_tokens() == 0 {
        return Err(Error::EmptyCorpus);
    }
    let (mut result, runtime) = timed(|| Ok::<_, Error>(fit(corpus, vocab, config)))?;
    result.runtime_seconds = runtime;
    Ok(result)
}

fn fit(corpus: &BowCorpus, vocab: &Vocabulary, config: &LdaConfig) -> TopicModelResult {
    let k = config.num_topics;
    let v = vocab.len();
    let n_docs = corpus.len();
    let alpha = config.alpha();

    let mut doc_offsets = Vec::with_capacity(n_docs + 1);
    let mut words = Vec::with_capacity(corpus.total_tokens());
    doc_offsets.push(0);
    for doc in &corpus.docs {
        for &(w, c) in doc {
            words.extend(std::iter::repeat_n(w, c));
        }
        doc_offsets.push(words.len());
    }

    let workers = config.workers.min(n_docs).max(1);
    let mut rngs: Vec<ChaCha8Rng> = (0..workers)
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(s as u64);
            rng
        })
        .collect();

    let mut z = vec![0usize; words.len()];
    let mut doc_topic = vec![0u32; n_docs * k];
    let mut counts = Counts {
        k,
        v,
        topic_word: vec![0; k * v],
        topic_total: vec![0; k],
    };
    for d in 0..n_docs {
        for i in doc_offsets[d]..doc_offsets[d + 1] {
            let t = rngs[0].random_range(0..k);
            z[i] = t;
            doc_topic[d * k + t] += 1;
            counts.topic_word[t * v + words[i]] += 1;
            counts.topic_total[t] += 1;
        }
    }

    let mut eta = vec![
        match config.eta {
            Eta::Fixed(e) => e,
            Eta::Named(EtaMode::Auto) => 1.0 / k as f64,
        };
        v
    ];

    // shard boundaries over documents
    let bounds: Vec<usize> = (0..=workers).map(|s| s * n_docs / workers).collect();

    for sweep in 0..config.passes {
        let eta_sum: f64 = eta.iter().sum();
        if workers == 1 {
            sample_shard(
                Shard {
                    docs: 0..n_docs,
                    doc_offsets: &doc_offsets,
                    words: &words,
                    z: &mut z,
                    doc_topic: &mut doc_topic,
                    rng: &mut rngs[0],
                },
                &mut counts,
                alpha,
                &eta,
                eta_sum,
            );
        } else {
            let snapshot_tw = counts.topic_word.clone();
            let snapshot_tt = counts.topic_total.clone();
            let mut locals: Vec<Counts> = Vec::with_capacity(workers);
            std::thread::scope(|scope| {
                let mut z_rest: &mut [usize] = &mut z;
                let mut dt_rest: &mut [u32] = &mut doc_topic;
                let mut handles = Vec::with_capacity(workers);
                for (s, rng) in rngs.iter_mut().enumerate() {
                    let docs = bounds[s]..bounds[s + 1];
                    let n_tok = doc_offsets[docs.end] - doc_offsets[docs.start];
                    let (z_here, z_tail) = std::mem::take(&mut z_rest).split_at_mut(n_tok);
                    let (dt_here, dt_tail) = std::mem::take(&mut dt_rest).split_at_mut(docs.len() * k);
                    z_rest = z_tail;
                    dt_rest = dt_tail;
                    let mut local = Counts {
                        k,
                        v,
                        topic_word: snapshot_tw.clone(),
                        topic_total: snapshot_tt.clone(),
                    };
                    let doc_offsets = &doc_offsets;
                    let words = &words;
                    let eta = &eta;
                    handles.push(scope.spawn(move || {
                        sample_shard(
                            Shard {
                                docs,
                                doc_offsets,
                                words,
                                z: z_here,
                                doc_topic: dt_here,
                                rng,
                            },
                            &mut local,
                            alpha,
                            eta,
                            eta_sum,
                        );
                        local
                    }));
                }
                for h in handles {
                    locals.push(h.join().expect("lda worker panicked"));
                }
            });
            merge_counts(&mut counts, &snapshot_tw, &snapshot_tt, &locals);
        }
        if matches!(config.eta, Eta::Named(EtaMode::Auto)) && (sweep + 1) % ETA_UPDATE_EVERY == 0 {
            update_eta(&mut eta, &counts);
        }
    }

    let eta_sum: f64 = eta.iter().sum();
    let topic_word: Vec<Vec<f64>> = (0..k)
        .map(|t| {
            let denom = counts.topic_total[t] as f64 + eta_sum;
            (0..v)
                .map(|w| (counts.topic_word[t * v + w] as f64 + eta[w]) / denom)
                .collect()
        })
        .collect();
    let rows: Vec<Vec<f64>> = (0..n_docs)
        .map(|d| {
            let nd = (doc_offsets[d + 1] - doc_offsets[d]) as f64;
            let denom = nd + k as f64 * alpha;
            (0..k).map(|t| (doc_topic[d * k + t] as f64 + alpha) / denom).collect()
        })
        .collect();

    let sizes = dominant_sizes(&rows, k);
    let topics = (0..k)
        .map(|t| Topic {
            topic_id: t,
            keywords: top_keywords(&topic_word[t], vocab.words(), config.top_words),
            size: sizes[t],
        })
        .collect();

    TopicModelResult {
        method: Method::Lda,
        topics,
        doc_ids: corpus.doc_ids.clone(),
        doc_topic: DocTopics::Distribution { rows },
        vocabulary: vocab.words().to_vec(),
        topic_word,
        runtime_seconds: 0.0,
        config: serde_json::to_value(config).unwrap_or_default(),
        seed: config.seed,
    }
}

fn merge_counts(global: &mut Counts, snap_tw: &[u32], snap_tt: &[u32], locals: &[Counts]) {
    for (i, g) in global.topic_word.iter_mut().enumerate() {
        let delta: i64 = locals.iter().map(|l| l.topic_word[i] as i64 - snap_tw[i] as i64).sum();
        *g = (snap_tw[i] as i64 + delta) as u32;
    }
    for (t, g) in global.topic_total.iter_mut().enumerate() {
        let delta: i64 = locals.iter().map(|l| l.topic_total[t] as i64 - snap_tt[t] as i64).sum();
        *g = (snap_tt[t] as i64 + delta) as u32;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preprocess::TokenSet;

    fn corpus(docs: &[&[&str]]) -> (BowCorpus, Vocabulary) {
        let sets: Vec<TokenSet> = docs
            .iter()
            .enumerate()
            .map(|(i, d)| TokenSet::new(i.to_string(), d.iter().map(|s| s.to_string()).collect()))
            .collect();
        let vocab = Vocabulary::build(&sets).unwrap();
        (BowCorpus::from_token_sets(&sets, &vocab), vocab)
    }

    fn cfg(k: usize) -> LdaConfig {
        LdaConfig {
            num_topics: k,
            passes: 50,
            workers: 1,
            ..Default::default()
        }
    }

    #[test]
    fn single_topic_is_smoothed_frequency() {
        let (c, v) = corpus(&[&["a", "a", "b"], &["a", "c", "c", "c"]]);
        let r = train_lda(&c, &v, &cfg(1)).unwrap();
        if let DocTopics::Distribution { rows } = &r.doc_topic {
            assert!(rows.iter().all(|row| row == &vec![1.0]));
        } else {
            panic!("expected distributions");
        }
        // counts a=3, b=1, c=3 out of 7
        let expected = [3.0 / 7.0, 1.0 / 7.0, 3.0 / 7.0];
        for (w, e) in expected.iter().enumerate() {
            assert!((r.topic_word[0][w] - e).abs() < 0.05, "{:?}", r.topic_word[0]);
        }
    }

    #[test]
    fn rows_are_simplices() {
        let (c, v) = corpus(&[&["a", "b", "c"], &["c", "d"], &["a", "d", "d"], &["e"]]);
        let r = train_lda(&c, &v, &cfg(3)).unwrap();
        r.validate().unwrap();
        for row in &r.topic_word {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-6);
        }
        for d in 0..r.num_docs() {
            assert!((r.doc_topic.membership(d).iter().sum::<f64>() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn too_many_topics_rejected() {
        let (c, v) = corpus(&[&["a"], &["b"]]);
        assert!(matches!(train_lda(&c, &v, &cfg(3)), Err(Error::Config(_))));
    }

    #[test]
    fn seeded_runs_identical_with_workers() {
        let docs: Vec<Vec<String>> = (0..40)
            .map(|i| (0..12).map(|j| format!("w{}", (i * 7 + j * 3) % 17)).collect())
            .collect();
        let refs: Vec<Vec<&str>> = docs.iter().map(|d| d.iter().map(String::as_str).collect()).collect();
        let slices: Vec<&[&str]> = refs.iter().map(Vec::as_slice).collect();
        let (c, v) = corpus(&slices);
        let config = LdaConfig {
            workers: 3,
            ..cfg(4)
        };
        let a = train_lda(&c, &v, &config).unwrap();
        let b = train_lda(&c, &v, &config).unwrap();
        assert_eq!(a.topics, b.topics);
        assert_eq!(a.topic_word, b.topic_word);
        let total: usize = a.topics.iter().map(|t| t.size).sum();
        assert_eq!(total, 40);
    }

    #[test]
    fn eta_serde_forms() {
        assert_eq!(serde_json::to_string(&Eta::AUTO).unwrap(), "\"auto\"");
        assert_eq!(serde_json::from_str::<Eta>("0.01").unwrap(), Eta::Fixed(0.01));
        assert_eq!(serde_json::from_str::<Eta>("\"auto\"").unwrap(), Eta::AUTO);
    }
}
