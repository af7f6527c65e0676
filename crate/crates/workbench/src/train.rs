//! Method dispatch shared by the CLI and the run pipeline.

use serde::{Deserialize, Serialize};
use topicbench_core::metrics::{coherence_cv, EvalOptions};
use topicbench_core::models::{
    choose_topics_by_coherence, choose_topics_median, train_embed_cluster, train_lda, train_nmf, BowCorpus,
    EmbedClusterConfig, LdaConfig, MedianSelection, Method, NmfConfig, SweepSelection, TopicModelResult, Vocabulary,
};
use topicbench_core::preprocess::TokenSet;
use topicbench_core::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MethodConfigs {
    pub lda: LdaConfig,
    pub nmf: NmfConfig,
    pub embed: EmbedClusterConfig,
}

impl MethodConfigs {
    /// The same settings with the topic count of `method` replaced.
    pub fn with_topics(&self, method: Method, k: usize) -> Self {
        let mut c = self.clone();
        match method {
            Method::Lda => c.lda.num_topics = k,
            Method::Nmf => c.nmf.num_topics = k,
            Method::Embed => c.embed.nr_topics = topicbench_core::models::embed::NrTopics::Count(k),
        }
        c
    }

    pub fn with_seed(&self, method: Method, seed: u64) -> Self {
        let mut c = self.clone();
        match method {
            Method::Lda => c.lda.seed = seed,
            Method::Nmf => c.nmf.seed = seed,
            Method::Embed => c.embed.seed = seed,
        }
        c
    }

    pub fn seed(&self, method: Method) -> u64 {
        match method {
            Method::Lda => self.lda.seed,
            Method::Nmf => self.nmf.seed,
            Method::Embed => self.embed.seed,
        }
    }
}

/// Trains one model. Bag-of-words methods read `bow`; the embedding method
/// reads `embedding` (falling back to `bow` when absent).
pub fn train_method(
    method: Method,
    bow: &[TokenSet],
    embedding: Option<&[TokenSet]>,
    configs: &MethodConfigs,
) -> Result<TopicModelResult> {
    match method {
        Method::Lda | Method::Nmf => {
            let vocab = Vocabulary::build(bow)?;
            let corpus = BowCorpus::from_token_sets(bow, &vocab);
            if method == Method::Lda {
                train_lda(&corpus, &vocab, &configs.lda)
            } else {
                let ids: Vec<String> = bow.iter().map(|s| s.thread_id.clone()).collect();
                train_nmf(&corpus.tfidf(vocab.len()), vocab.words(), &ids, &configs.nmf)
            }
        }
        Method::Embed => {
            let sets = embedding.unwrap_or(bow);
            if sets.is_empty() {
                return Err(Error::EmptyCorpus);
            }
            let ids: Vec<String> = sets.iter().map(|s| s.thread_id.clone()).collect();
            let texts: Vec<String> = sets.iter().map(TokenSet::joined).collect();
            let embedder = configs.embed.embedder.build()?;
            train_embed_cluster(&ids, &texts, &configs.embed, embedder.as_ref())
        }
    }
}

/// Coherence sweep over `grid` for a bag-of-words method.
pub fn sweep_topics(
    method: Method,
    bow: &[TokenSet],
    configs: &MethodConfigs,
    grid: &[usize],
    eval: &EvalOptions,
) -> Result<SweepSelection> {
    if method == Method::Embed {
        return Err(Error::Config("the coherence sweep applies to lda and nmf only".into()));
    }
    choose_topics_by_coherence(grid, |k| {
        let model = train_method(method, bow, None, &configs.with_topics(method, k))?;
        let topics: Vec<Vec<String>> = (0..model.num_topics())
            .map(|t| model.top_words(t, eval.top_k).into_iter().map(str::to_string).collect())
            .collect();
        coherence_cv(&topics, bow, eval.window)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MedianRun {
    #[serde(flatten)]
    pub selection: MedianSelection,
    /// Seeds of the runs, in order.
    pub seeds: Vec<u64>,
    /// Index of the kept run: the first whose topic count equals the median.
    pub chosen_run: usize,
}

/// Trains `runs` models with seeds `base, base+1, …` and keeps the first one
/// whose topic count equals the median.
pub fn median_of_runs(
    method: Method,
    bow: &[TokenSet],
    embedding: Option<&[TokenSet]>,
    configs: &MethodConfigs,
    runs: usize,
) -> Result<(MedianRun, TopicModelResult)> {
    let base = configs.seed(method);
    let seeds: Vec<u64> = (0..runs as u64).map(|i| base.wrapping_add(i)).collect();
    let mut models = Vec::with_capacity(runs);
    let selection = choose_topics_median(runs, |i| {
        let model = train_method(method, bow, embedding, &configs.with_seed(method, seeds[i]))?;
        let k = model.num_topics();
        models.push(model);
        Ok(k)
    })?;
    let chosen_run = models
        .iter()
        .position(|m| m.num_topics() == selection.selected)
        .expect("median is one of the observed counts");
    let model = models.swap_remove(chosen_run);
    Ok((
        MedianRun {
            selection,
            seeds,
            chosen_run,
        },
        model,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus() -> Vec<TokenSet> {
        (0..40)
            .map(|i| {
                let theme = if i % 2 == 0 { ["apple", "pear", "plum"] } else { ["car", "bus", "train"] };
                let tokens = (0..12).map(|j| theme[(i + j) % 3].to_string()).collect();
                TokenSet::new(format!("d{i}"), tokens)
            })
            .collect()
    }

    fn configs() -> MethodConfigs {
        let mut c = MethodConfigs::default();
        c.lda.passes = 30;
        c.lda.workers = 1;
        c
    }

    #[test]
    fn dispatch_respects_topic_override() {
        let docs = corpus();
        for method in [Method::Lda, Method::Nmf] {
            let m = train_method(method, &docs, None, &configs().with_topics(method, 2)).unwrap();
            assert_eq!((m.method, m.num_topics()), (method, 2));
        }
    }

    #[test]
    fn sweep_stays_on_grid() {
        let docs = corpus();
        let s = sweep_topics(Method::Nmf, &docs, &configs(), &[2, 3, 4], &EvalOptions::default()).unwrap();
        assert!([2, 3, 4].contains(&s.selected));
        assert_eq!(s.curve.len(), 3);
        assert!(sweep_topics(Method::Embed, &docs, &configs(), &[2], &EvalOptions::default()).is_err());
    }

    #[test]
    fn median_keeps_a_matching_run() {
        let docs = corpus();
        let (run, model) = median_of_runs(Method::Embed, &docs, None, &configs(), 3).unwrap();
        assert_eq!(run.seeds, vec![42, 43, 44]);
        assert_eq!(model.num_topics(), run.selection.selected);
        assert_eq!(model.seed, run.seeds[run.chosen_run]);
    }
}
