use std::collections::HashMap;

use super::distributions::{chi2_sf, normal_cdf, ptukey, qtukey};
use super::result::{PairwiseComparison, StatTestResult};
use crate::error::{Error, Result};

/// Wilcoxon uses the exact null distribution up to this many non-zero pairs.
pub const WILCOXON_EXACT_MAX: usize = 20;
/// Friedman uses the exact permutation distribution while `(k!)^n` stays
/// within this many rank configurations.
pub const FRIEDMAN_EXACT_MAX: f64 = 1e6;

/// Mid-ranks (1-based) of `values`.
pub fn rank_average(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Wilcoxon signed-rank test on `x − y`; zero differences are dropped.
/// The statistic is the smaller of the positive and negative rank sums.
pub fn wilcoxon_signed_rank(x: &[f64], y: &[f64]) -> Result<StatTestResult> {
    if x.len() != y.len() {
        return Err(Error::Validation("paired samples need equal lengths".into()));
    }
    let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).filter(|v| *v != 0.0).collect();
    let zeros = x.len() - d.len();
    if d.is_empty() {
        return Err(Error::Degenerate("all paired differences are zero".into()));
    }
    let n = d.len();
    let ranks = rank_average(&d.iter().map(|v| v.abs()).collect::<Vec<_>>());
    let w_plus = d.iter().zip(&ranks).filter(|(v, _)| **v > 0.0).fold(0.0, |acc, (_, r)| acc + r);
    let total = (n * (n + 1)) as f64 / 2.0;
    let w = w_plus.min(total - w_plus);

    let (p, method) = if n <= WILCOXON_EXACT_MAX {
        (wilcoxon_exact_p(&ranks, w_plus), 0.0)
    } else {
        let nf = n as f64;
        let mut ties: HashMap<u64, usize> = HashMap::new();
        for r in &ranks {
            *ties.entry(r.to_bits()).or_default() += 1;
        }
        let tie_term: f64 = ties.values().map(|&t| (t * t * t - t) as f64).sum::<f64>() / 48.0;
        let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term;
        let dev = (w_plus - total / 2.0).abs();
        let z = if var > 0.0 { (dev - 0.5).max(0.0) / var.sqrt() } else { 0.0 };
        (2.0 * (1.0 - normal_cdf(z)), 1.0)
    };
    Ok(StatTestResult::new("wilcoxon_signed_rank", w, vec![], p.min(1.0))
        .detail("n", n as f64)
        .detail("zero_differences", zeros as f64)
        .detail("w_plus", w_plus)
        .detail("normal_approximation", method))
}

/// `P(|T − S/2| ≥ |t − S/2|)` over all 2ⁿ sign patterns, via subset-sum
/// counts on doubled ranks.
fn wilcoxon_exact_p(ranks: &[f64], w_plus: f64) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (r * 2.0).round() as usize).collect();
    let s: usize = doubled.iter().sum();
    let mut counts = vec![0f64; s + 1];
    counts[0] = 1.0;
    for &r in &doubled {
        for t in (r..=s).rev() {
            counts[t] += counts[t - r];
        }
    }
    // compare |2T − S| in doubled-rank units
    let observed = (w_plus * 2.0).round() as i64;
    let obs_dev = (2 * observed - s as i64).abs();
    let total = 2f64.powi(ranks.len() as i32);
    let extreme: f64 = counts
        .iter()
        .enumerate()
        .filter(|(t, _)| (2 * *t as i64 - s as i64).abs() >= obs_dev)
        .map(|(_, c)| c)
        .sum();
    extreme / total
}

fn check_table(table: &[Vec<f64>]) -> Result<(usize, usize)> {
    let n = table.len();
    let k = table.first().map_or(0, Vec::len);
    if n < 2 || k < 2 {
        return Err(Error::Validation("rank table needs at least 2 blocks and 2 treatments".into()));
    }
    if table.iter().any(|r| r.len() != k) {
        return Err(Error::Validation("rank table rows differ in length".into()));
    }
    if table.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::Validation("non-finite value in rank table".into()));
    }
    Ok((n, k))
}

/// Friedman statistic from per-block mid-ranks.
fn friedman_statistic(ranked: &[Vec<f64>]) -> f64 {
    let n = ranked.len() as f64;
    let k = ranked[0].len();
    let kf = k as f64;
    let sums: Vec<f64> = (0..k).map(|j| ranked.iter().map(|r| r[j]).sum()).collect();
    let ss: f64 = sums.iter().map(|r| r * r).sum();
    (12.0 / (n * kf * (kf + 1.0)) * ss - 3.0 * n * (kf + 1.0)).max(0.0)
}

fn permutations(items: &[i64]) -> Vec<Vec<i64>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

/// Exact permutation p: within-block rank vectors permuted independently.
fn friedman_exact_p(ranked: &[Vec<f64>], observed: f64) -> f64 {
    let k = ranked[0].len();
    let mut dist: HashMap<Vec<i64>, f64> = HashMap::from([(vec![0; k], 1.0)]);
    for block in ranked {
        let doubled: Vec<i64> = block.iter().map(|r| (r * 2.0).round() as i64).collect();
        let perms = permutations(&doubled);
        let mut next: HashMap<Vec<i64>, f64> = HashMap::with_capacity(dist.len() * perms.len());
        for (sums, c) in &dist {
            for p in &perms {
                let key: Vec<i64> = sums.iter().zip(p).map(|(a, b)| a + b).collect();
                *next.entry(key).or_default() += c;
            }
        }
        dist = next;
    }
    let n = ranked.len() as f64;
    let kf = k as f64;
    let total: f64 = dist.values().sum();
    let extreme: f64 = dist
        .iter()
        .filter(|(sums, _)| {
            let ss: f64 = sums.iter().map(|&s| (s as f64 / 2.0).powi(2)).sum();
            let chi = 12.0 / (n * kf * (kf + 1.0)) * ss - 3.0 * n * (kf + 1.0);
            chi >= observed - 1e-9
        })
        .map(|(_, c)| c)
        .sum();
    extreme / total
}

fn rank_blocks(table: &[Vec<f64>]) -> Vec<Vec<f64>> {
    table.iter().map(|r| rank_average(r)).collect()
}

/// Friedman test over `n` blocks (rows) × `k` treatments (columns). Rows are
/// ranked internally, so raw scores or ranks are both accepted.
pub fn friedman(table: &[Vec<f64>]) -> Result<StatTestResult> {
    let (n, k) = check_table(table)?;
    let ranked = rank_blocks(table);
    let chi = friedman_statistic(&ranked);
    let configurations = (1..=k).map(|i| i as f64).product::<f64>().powi(n as i32);
    let (p, exact) = if configurations <= FRIEDMAN_EXACT_MAX {
        (friedman_exact_p(&ranked, chi), 1.0)
    } else {
        (chi2_sf(chi, (k - 1) as f64)?, 0.0)
    };
    Ok(StatTestResult::new("friedman", chi, vec![(k - 1) as f64], p)
        .detail("n", n as f64)
        .detail("k", k as f64)
        .detail("exact", exact))
}

/// Nemenyi post-hoc comparison of mean ranks with the critical difference.
pub fn nemenyi(table: &[Vec<f64>], names: &[String], alpha: f64) -> Result<StatTestResult> {
    let (n, k) = check_table(table)?;
    if names.len() != k {
        return Err(Error::Validation("one name per treatment required".into()));
    }
    let ranked = rank_blocks(table);
    let mean_ranks: Vec<f64> = (0..k).map(|j| ranked.iter().map(|r| r[j]).sum::<f64>() / n as f64).collect();
    let se = ((k * (k + 1)) as f64 / (6.0 * n as f64)).sqrt();
    let q = qtukey(1.0 - alpha, k, f64::INFINITY)?;
    let cd = q / 2f64.sqrt() * se;
    let mut pairs = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            let diff = mean_ranks[j] - mean_ranks[i];
            let p = 1.0 - ptukey(diff.abs() * 2f64.sqrt() / se, k, f64::INFINITY)?;
            pairs.push(PairwiseComparison {
                group_a: names[i].clone(),
                group_b: names[j].clone(),
                mean_diff: diff,
                ci_low: diff - cd,
                ci_high: diff + cd,
                p_value: p.clamp(0.0, 1.0),
                significant: diff.abs() > cd,
            });
        }
    }
    let min_p = pairs.iter().map(|p| p.p_value).fold(1.0, f64::min);
    let mut r = StatTestResult::new("nemenyi", cd, vec![], min_p);
    r.pairwise = Some(pairs);
    for (name, m) in names.iter().zip(&mean_ranks) {
        r.details.insert(format!("mean_rank_{name}"), *m);
    }
    Ok(r.detail("critical_difference", cd).detail("q_alpha", q))
}
