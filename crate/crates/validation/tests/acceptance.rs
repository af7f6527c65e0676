//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

mod support;

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use topicbench_core::ingest::{merge_threads, CommentRecord, SubmissionRecord};
use topicbench_core::metrics::{diversity_of, kl_between, perplexity_from_distributions};
use topicbench_core::models::nmf::factorize;
use topicbench_core::models::{
    choose_topics_by_coherence, choose_topics_median, train_embed_cluster, train_lda, train_nmf, BowCorpus, CsrMatrix,
    DocTopics, EmbedClusterConfig, HashProjectionEmbedder, LdaConfig, NmfConfig, Vocabulary, OUTLIER,
};
use topicbench_core::stats::{
    describe, format_like, friedman, one_way_anova, tukey_hsd, wilcoxon_signed_rank, MetricTable, StatTestResult,
};

use support::{blob_texts, dump_records, fixture_path, greedy_match, planted_lda_corpus};

#[derive(Default)]
struct Check {
    failures: Vec<String>,
}

impl Check {
    fn expect(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }

    fn near(&mut self, label: &str, got: f64, want: f64, tol: f64) {
        self.expect((got - want).abs() <= tol, format!("{label}: got {got:.6}, want {want} ± {tol}"));
    }
}

fn run(name: &str, body: impl FnOnce(&mut Check)) -> bool {
    let start = Instant::now();
    let mut check = Check::default();
    let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| body(&mut check)));
    if let Err(e) = outcome {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into());
        check.failures.push(format!("panicked: {msg}"));
    }
    let ok = check.failures.is_empty();
    println!(
        "[{}] {name} ({:.2}s)",
        if ok { "PASS" } else { "FAIL" },
        start.elapsed().as_secs_f64()
    );
    for f in &check.failures {
        println!("       {f}");
    }
    ok
}

fn table(name: &str) -> MetricTable {
    MetricTable::from_csv_path(fixture_path(&format!("{name}.csv"))).expect("fixture table")
}

fn anova_and_tukey(name: &str) -> (StatTestResult, StatTestResult) {
    let t = table(name);
    let groups = t.groups();
    (
        one_way_anova(&groups).expect("anova"),
        tukey_hsd(&groups, &t.columns).expect("tukey"),
    )
}

fn stats_oracle(c: &mut Check) {
    let timed = |c: &mut Check, name: &str| {
        let start = Instant::now();
        let out = anova_and_tukey(name);
        c.expect(start.elapsed().as_secs_f64() < 1.0, format!("{name}: slower than 1s"));
        out
    };

    let (anova, tukey) = timed(c, "num_topics");
    c.expect(anova.df == vec![2.0, 33.0], format!("num_topics df {:?}", anova.df));
    c.near("num_topics F", anova.statistic, 12.00, 0.05);
    c.near("num_topics eta2", anova.effect_size.unwrap_or(f64::NAN), 0.42, 0.01);
    let p = tukey.pair("lda", "bertopic").expect("lda-bertopic");
    c.near("num_topics lda-bertopic diff", p.mean_diff, 45.41, 0.1);
    c.near("num_topics lda-bertopic ci low", p.ci_low, 17.16, 0.5);
    c.near("num_topics lda-bertopic ci high", p.ci_high, 73.66, 0.5);
    let p = tukey.pair("nmf", "bertopic").expect("nmf-bertopic");
    c.near("num_topics nmf-bertopic diff", p.mean_diff, 51.66, 0.1);

    let (anova, tukey) = timed(c, "coherence");
    c.near("coherence F", anova.statistic, 21.25, 0.1);
    let p = tukey.pair("lda", "bertopic").expect("lda-bertopic");
    c.near("coherence lda-bertopic |diff|", p.mean_diff.abs(), 0.147, 0.005);
    let (lo, hi) = if p.mean_diff >= 0.0 {
        (p.ci_low, p.ci_high)
    } else {
        (-p.ci_high, -p.ci_low)
    };
    c.near("coherence lda-bertopic ci low", lo, 0.038, 0.01);
    c.near("coherence lda-bertopic ci high", hi, 0.256, 0.01);

    let (anova, tukey) = timed(c, "diversity");
    c.near("diversity F", anova.statistic, 154.13, 0.5);
    for pair in tukey.pairwise.as_deref().unwrap_or_default() {
        c.expect(
            pair.p_value < 0.001,
            format!("diversity {}-{} p = {}", pair.group_a, pair.group_b, pair.p_value),
        );
    }
    c.expect(tukey.pairwise.as_ref().is_some_and(|p| p.len() == 3), "diversity: three pairs");

    let (anova, tukey) = timed(c, "kl");
    c.near("kl F", anova.statistic, 655.30, 2.0);
    let p = tukey.pair("lda", "bertopic").expect("lda-bertopic");
    c.expect(p.p_value > 0.9, format!("kl lda-bertopic p = {}", p.p_value));

    let (anova, _) = timed(c, "runtime");
    c.near("runtime F", anova.statistic, 5.41, 0.05);
    c.near("runtime p", anova.p_value, 0.009, 0.002);
}

fn descriptive(c: &mut Check) {
    let mut rdr = csv::Reader::from_path(fixture_path("summaries.csv")).expect("summaries");
    for row in rdr.records() {
        let row = row.expect("summary row");
        let (tbl, method, stat, printed) = (&row[0], &row[1], &row[2], &row[3]);
        let column = table(tbl).column(method).expect("column");
        let s = describe(&column).expect("describe");
        let value = match stat {
            "mean" => s.mean,
            "minimum" => s.min,
            "maximum" => s.max,
            other => panic!("unknown stat {other}"),
        };
        let shown = format_like(value, printed);
        c.expect(
            shown == printed,
            format!("{tbl}/{method}/{stat}: computed {value:.5} prints {shown}, table has {printed}"),
        );
    }
}

/// Two-sided p by enumerating every sign assignment of the ranked |d|.
fn wilcoxon_brute(d: &[f64]) -> f64 {
    let nz: Vec<f64> = d.iter().copied().filter(|x| *x != 0.0).collect();
    let n = nz.len();
    let abs: Vec<f64> = nz.iter().map(|x| x.abs()).collect();
    let ranks: Vec<f64> = abs
        .iter()
        .map(|a| {
            let below = abs.iter().filter(|b| *b < a).count() as f64;
            let equal = abs.iter().filter(|b| *b == a).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect();
    let total: f64 = ranks.iter().sum();
    let observed: f64 = nz.iter().zip(&ranks).filter(|(x, _)| **x > 0.0).map(|(_, r)| r).sum();
    let obs_dev = (2.0 * observed - total).abs();
    let mut hits = 0u64;
    for mask in 0u32..(1 << n) {
        let t: f64 = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| ranks[i]).sum();
        if (2.0 * t - total).abs() >= obs_dev - 1e-9 {
            hits += 1;
        }
    }
    hits as f64 / (1u64 << n) as f64
}

fn wilcoxon_exactness(c: &mut Check) {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut compared = 0;
    while compared < 200 {
        let n = rng.random_range(1..=12);
        // Small integer range so ties and zero differences occur.
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(0..8) as f64).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(0..8) as f64).collect();
        let d: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
        if d.iter().all(|v| *v == 0.0) {
            continue;
        }
        compared += 1;
        let got = wilcoxon_signed_rank(&x, &y).expect("wilcoxon");
        let want = wilcoxon_brute(&d);
        c.expect(
            (got.p_value - want).abs() < 1e-12,
            format!("x={x:?} y={y:?}: p {} vs enumeration {want}", got.p_value),
        );
    }
}

fn friedman_chi(table: &[Vec<f64>]) -> f64 {
    let (n, k) = (table.len() as f64, table[0].len());
    let mut sums = vec![0.0; k];
    for row in table {
        for (j, v) in row.iter().enumerate() {
            sums[j] += 1.0 + row.iter().filter(|w| *w < v).count() as f64;
        }
    }
    let k = k as f64;
    12.0 / (n * k * (k + 1.0)) * sums.iter().map(|r| r * r).sum::<f64>() - 3.0 * n * (k + 1.0)
}

fn friedman_sanity(c: &mut Check) {
    let blocks = vec![vec![1.0, 2.0, 3.0]; 12];
    let res = friedman(&blocks).expect("friedman");
    c.expect(res.statistic == 24.0, format!("identical blocks: chi2 = {}", res.statistic));

    let fixture = vec![vec![3.1, 1.2, 2.7], vec![2.2, 0.9, 4.0], vec![5.5, 1.8, 3.3]];
    let observed = friedman_chi(&fixture);
    let perms: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut hits = 0;
    for a in &perms {
        for b in &perms {
            for d in &perms {
                let t: Vec<Vec<f64>> = [a, b, d]
                    .iter()
                    .zip(&fixture)
                    .map(|(p, row)| p.iter().map(|&i| row[i]).collect())
                    .collect();
                if friedman_chi(&t) >= observed - 1e-9 {
                    hits += 1;
                }
            }
        }
    }
    let want = hits as f64 / 216.0;
    let res = friedman(&fixture).expect("friedman");
    c.near("3x3 statistic", res.statistic, observed, 1e-12);
    c.near("3x3 permutation p", res.p_value, want, 1e-12);
}

fn planted_recovery(c: &mut Check) {
    let start = Instant::now();
    let planted = planted_lda_corpus(500, 50, 2, 17);
    let vocab = Vocabulary::build(&planted.docs).expect("vocab");
    let corpus = BowCorpus::from_token_sets(&planted.docs, &vocab);
    let config = LdaConfig {
        num_topics: 2,
        ..Default::default()
    };
    let model = train_lda(&corpus, &vocab, &config).expect("lda");
    // Re-index the recovered rows onto the planted w0..w49 order.
    let recovered: Vec<Vec<f64>> = model
        .topic_word_distributions()
        .iter()
        .map(|row| {
            let mut out = vec![0.0; 50];
            for (j, w) in model.vocabulary.iter().enumerate() {
                out[w[1..].parse::<usize>().expect("planted word")] = row[j];
            }
            out
        })
        .collect();
    let scores = greedy_match(&planted.topics, &recovered);
    c.expect(scores.len() == 2, "two matched topics");
    for s in &scores {
        c.expect(*s >= 0.9, format!("matched cosine {s:.4}"));
    }
    let elapsed = start.elapsed().as_secs_f64();
    c.expect(elapsed < 60.0, format!("took {elapsed:.1}s"));
}

fn nmf_properties(c: &mut Check) {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let rows: Vec<Vec<(usize, f64)>> = (0..40)
        .map(|_| {
            (0..30)
                .filter_map(|j| rng.random_bool(0.3).then(|| (j, rng.random_range(0.1..2.0))))
                .collect()
        })
        .collect();
    let v = CsrMatrix::from_rows(30, rows);
    let config = NmfConfig {
        num_topics: 5,
        max_iter: 300,
        tol: 1e-15,
        ..Default::default()
    };
    let f = factorize(&v, &config).expect("nmf");
    let rising = f.objective.windows(2).filter(|w| w[1] > w[0] * (1.0 + 1e-12)).count();
    c.expect(rising == 0, format!("objective increased in {rising} iterations"));

    let u: Vec<f64> = (0..20).map(|i| 0.5 + i as f64 * 0.1).collect();
    let w: Vec<f64> = (0..15).map(|j| 1.0 + (j % 4) as f64).collect();
    let rank1 = CsrMatrix::from_rows(
        15,
        u.iter().map(|a| w.iter().enumerate().map(|(j, b)| (j, a * b)).collect()).collect(),
    );
    let f = factorize(
        &rank1,
        &NmfConfig {
            num_topics: 1,
            max_iter: 500,
            tol: 1e-12,
            ..Default::default()
        },
    )
    .expect("rank-1 nmf");
    let err = f.relative_error(&rank1);
    c.expect(err < 1e-3, format!("rank-1 relative error {err:e}"));

    let vocab: Vec<String> = (0..30).map(|j| format!("t{j}")).collect();
    let ids: Vec<String> = (0..40).map(|i| format!("d{i}")).collect();
    let dir = tempfile::tempdir().expect("tempdir");
    let mut bytes = Vec::new();
    for run in 0..2 {
        let mut model = train_nmf(&v, &vocab, &ids, &config).expect("train nmf");
        model.runtime_seconds = 0.0;
        let path = dir.path().join(format!("nmf{run}.json"));
        model.save(&path).expect("save");
        bytes.push(std::fs::read(&path).expect("read back"));
    }
    c.expect(bytes[0] == bytes[1], "artifacts differ between identical runs");
}

fn embedding_path(c: &mut Check) {
    let (ids, texts) = blob_texts(50, 3);
    let embedder = HashProjectionEmbedder::new(64, 11);
    let config = EmbedClusterConfig::default();
    let model = train_embed_cluster(&ids, &texts, &config, &embedder).expect("embed-cluster");
    c.expect(model.num_topics() == 3, format!("{} topics", model.num_topics()));
    let DocTopics::Hard { labels, .. } = &model.doc_topic else {
        panic!("expected hard labels");
    };
    for b in 0..3 {
        let blob = &labels[b * 50..(b + 1) * 50];
        let mut counts = std::collections::BTreeMap::new();
        for &l in blob.iter().filter(|&&l| l != OUTLIER) {
            *counts.entry(l).or_insert(0) += 1;
        }
        let Some((&topic, _)) = counts.iter().max_by_key(|(_, n)| **n) else {
            c.expect(false, format!("blob {b} entirely outliers"));
            continue;
        };
        let top = model.top_words(topic as usize, 1);
        c.expect(
            top == [format!("marker{b}").as_str()],
            format!("blob {b}: topic {topic} top word {top:?}"),
        );
    }

    let n = config.min_cluster_size - 1;
    let small = train_embed_cluster(&ids[..n], &texts[..n], &config, &embedder).expect("small corpus");
    let DocTopics::Hard { labels, .. } = &small.doc_topic else {
        panic!("expected hard labels");
    };
    c.expect(
        small.num_topics() == 0 && labels.iter().all(|&l| l == OUTLIER),
        format!("{n} docs: {} topics, labels {labels:?}", small.num_topics()),
    );
}

fn selection(c: &mut Check) {
    let grid: Vec<usize> = (5..=50).step_by(5).collect();
    // Two equal peaks at 20 and 35; the smaller K must win.
    let score = |k: usize| Ok(1.0 - ((k as f64 - 20.0).abs().min((k as f64 - 35.0).abs())) / 100.0);
    let sweep = choose_topics_by_coherence(&grid, score).expect("sweep");
    c.expect(sweep.selected == 20, format!("sweep selected {}", sweep.selected));
    c.expect(sweep.curve.len() == grid.len(), "curve covers the grid");

    let fixture = [12usize, 15, 9, 20, 15, 11, 18, 14, 15, 10, 13];
    let sel = choose_topics_median(11, |i| Ok(fixture[i])).expect("median");
    let mut sorted = fixture.to_vec();
    sorted.sort_unstable();
    c.expect(sel.selected == sorted[5], format!("median {} vs {}", sel.selected, sorted[5]));
    let mean = fixture.iter().sum::<usize>() as f64 / 11.0;
    let var = fixture.iter().map(|&k| (k as f64 - mean).powi(2)).sum::<f64>() / 11.0;
    c.near("median-of-11 mean", sel.mean, mean, 1e-12);
    c.near("median-of-11 std", sel.std, var.sqrt(), 1e-12);
}

fn metric_identities(c: &mut Check) {
    let disjoint: Vec<Vec<String>> = (0..4)
        .map(|t| (0..10).map(|w| format!("t{t}w{w}")).collect())
        .collect();
    c.near("disjoint diversity", diversity_of(&disjoint, 10), 1.0, 0.0);
    let duplicated = vec![disjoint[0].clone(), disjoint[0].clone()];
    c.near("duplicated diversity", diversity_of(&duplicated, 10), 0.5, 0.0);

    let p = [0.2, 0.3, 0.5];
    c.near("KL(P||P)", kl_between(&p, &p).expect("kl"), 0.0, 1e-12);
    c.near("hand KL", kl_between(&[0.5, 0.5], &[0.25, 0.75]).expect("kl"), 0.1438, 1e-4);

    let uniform = vec![vec![0.01; 100]];
    let doc: Vec<Option<usize>> = (0..500).map(|i| Some(i % 100)).collect();
    let ppl = perplexity_from_distributions(&uniform, &[doc]).expect("perplexity");
    c.near("uniform perplexity", ppl, 100.0, 1e-6);
}

fn ingest_fixture(c: &mut Check) {
    let (n, m) = (6, 25);
    let (subs, coms) = dump_records(n, m);
    let subs: Vec<SubmissionRecord> = subs.into_iter().map(|v| serde_json::from_value(v).expect("sub")).collect();
    let coms: Vec<CommentRecord> = coms.into_iter().map(|v| serde_json::from_value(v).expect("com")).collect();
    let out = merge_threads(&subs, &coms);
    c.expect(out.threads.len() == n, format!("{} threads", out.threads.len()));
    c.expect(out.orphan_count == 1, format!("orphan_count {}", out.orphan_count));
    let attached: usize = out.threads.iter().map(|t| t.comment_count).sum();
    c.expect(attached == m - 1, format!("{attached} attached comments"));
    for thread in &out.threads {
        let sub = subs.iter().find(|s| s.id == thread.id).expect("thread has a submission");
        let mut mine: Vec<&CommentRecord> = coms
            .iter()
            .filter(|cm| cm.link_id.strip_prefix("t3_") == Some(sub.id.as_str()))
            .collect();
        mine.sort_by(|a, b| a.created_utc.cmp(&b.created_utc).then_with(|| a.id.cmp(&b.id)));
        let mut expected = vec![sub.title.clone(), sub.selftext.clone()];
        expected.extend(mine.iter().map(|cm| cm.body.clone()));
        c.expect(
            thread.text == expected.join(" "),
            format!("thread {}: comments out of order", thread.id),
        );
    }
}

fn main() {
    let checks: [(&str, fn(&mut Check)); 10] = [
        ("stats oracle vs reference tables", stats_oracle),
        ("descriptive reproduction of summary rows", descriptive),
        ("wilcoxon exact p vs sign enumeration", wilcoxon_exactness),
        ("friedman sanity", friedman_sanity),
        ("planted-topic recovery (lda)", planted_recovery),
        ("nmf properties", nmf_properties),
        ("embedding path with test embedder", embedding_path),
        ("selection procedures", selection),
        ("metric identities", metric_identities),
        ("ingest fixture", ingest_fixture),
    ];
    let mut failed = 0;
    for (name, f) in checks {
        if !run(name, f) {
            failed += 1;
        }
    }
    println!("{} passed, {failed} failed", checks.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
