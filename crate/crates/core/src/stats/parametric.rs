use super::distributions::{f_sf, ptukey, qtukey, t_two_sided};
use super::result::{PairwiseComparison, StatTestResult};
use crate::error::{Error, Result};

pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn check_groups(groups: &[Vec<f64>]) -> Result<()> {
    if groups.len() < 2 {
        return Err(Error::Validation("at least two groups are required".into()));
    }
    if let Some(i) = groups.iter().position(|g| g.len() < 2) {
        return Err(Error::Validation(format!("group {i} has fewer than two values")));
    }
    if groups.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::Validation("non-finite value".into()));
    }
    Ok(())
}

struct Anova {
    ss_between: f64,
    ss_within: f64,
    df_between: f64,
    df_within: f64,
}

impl Anova {
    fn compute(groups: &[Vec<f64>]) -> Self {
        let all: Vec<f64> = groups.iter().flatten().copied().collect();
        let grand = mean(&all);
        let ss_between = groups.iter().map(|g| g.len() as f64 * (mean(g) - grand).powi(2)).sum();
        let ss_within = groups
            .iter()
            .map(|g| {
                let m = mean(g);
                g.iter().map(|x| (x - m).powi(2)).sum::<f64>()
            })
            .sum();
        Self {
            ss_between,
            ss_within,
            df_between: (groups.len() - 1) as f64,
            df_within: (all.len() - groups.len()) as f64,
        }
    }

    fn mse(&self) -> f64 {
        self.ss_within / self.df_within
    }
}

/// One-way ANOVA with η² as effect size.
pub fn one_way_anova(groups: &[Vec<f64>]) -> Result<StatTestResult> {
    check_groups(groups)?;
    let a = Anova::compute(groups);
    let total = a.ss_between + a.ss_within;
    if total == 0.0 {
        return Err(Error::Degenerate("all values are identical".into()));
    }
    let ms_between = a.ss_between / a.df_between;
    let (f, p) = if a.ss_within == 0.0 {
        (f64::INFINITY, 0.0)
    } else {
        let f = ms_between / a.mse();
        (f, f_sf(f, a.df_between, a.df_within)?)
    };
    let mut r = StatTestResult::new("one_way_anova", f, vec![a.df_between, a.df_within], p);
    r.effect_size = Some(a.ss_between / total);
    Ok(r.detail("ss_between", a.ss_between).detail("ss_within", a.ss_within))
}

/// Tukey HSD (Tukey–Kramer for unequal sizes) with simultaneous 95%
/// intervals. `names` labels the groups in the pairwise output.
pub fn tukey_hsd(groups: &[Vec<f64>], names: &[String]) -> Result<StatTestResult> {
    tukey_hsd_at(groups, names, 0.05)
}

pub fn tukey_hsd_at(groups: &[Vec<f64>], names: &[String], alpha: f64) -> Result<StatTestResult> {
    check_groups(groups)?;
    if names.len() != groups.len() {
        return Err(Error::Validation("one name per group required".into()));
    }
    let k = groups.len();
    let a = Anova::compute(groups);
    let mse = a.mse();
    let q_crit = qtukey(1.0 - alpha, k, a.df_within)?;
    let means: Vec<f64> = groups.iter().map(|g| mean(g)).collect();
    let mut pairs = Vec::new();
    let mut max_q: f64 = 0.0;
    for i in 0..k {
        for j in i + 1..k {
            let diff = means[j] - means[i];
            let se = (mse / 2.0 * (1.0 / groups[i].len() as f64 + 1.0 / groups[j].len() as f64)).sqrt();
            if se > 0.0 {
                max_q = max_q.max(diff.abs() / se);
            }
            let p = if se == 0.0 {
                if diff == 0.0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                1.0 - ptukey(diff.abs() / se, k, a.df_within)?
            };
            pairs.push(PairwiseComparison {
                group_a: names[i].clone(),
                group_b: names[j].clone(),
                mean_diff: diff,
                ci_low: diff - q_crit * se,
                ci_high: diff + q_crit * se,
                p_value: p.clamp(0.0, 1.0),
                significant: p < alpha,
            });
        }
    }
    let min_p = pairs.iter().map(|p| p.p_value).fold(1.0, f64::min);
    let mut r = StatTestResult::new("tukey_hsd", max_q, vec![k as f64, a.df_within], min_p);
    r.pairwise = Some(pairs);
    Ok(r.detail("q_critical", q_crit).detail("mse", mse))
}

/// Paired two-sided t-test on `x − y`.
pub fn paired_t(x: &[f64], y: &[f64]) -> Result<StatTestResult> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Validation("paired samples need equal lengths of at least 2".into()));
    }
    let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    if d.iter().all(|&v| v == 0.0) {
        return Err(Error::Degenerate("all paired differences are zero".into()));
    }
    let n = d.len() as f64;
    let m = mean(&d);
    let sd = (d.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let t = if sd == 0.0 { m.signum() * f64::INFINITY } else { m / (sd / n.sqrt()) };
    let p = t_two_sided(t, n - 1.0)?;
    let mut r = StatTestResult::new("paired_t", t, vec![n - 1.0], p);
    r.effect_size = (sd > 0.0).then(|| m / sd);
    Ok(r.detail("mean_difference", m))
}

/// Pearson correlation with a two-sided t-transform p value.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<StatTestResult> {
    if x.len() != y.len() || x.len() < 3 {
        return Err(Error::Validation("correlation needs equal lengths of at least 3".into()));
    }
    let (mx, my) = (mean(x), mean(y));
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Degenerate("zero variance".into()));
    }
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    let df = x.len() as f64 - 2.0;
    let p = if r.abs() >= 1.0 {
        0.0
    } else {
        t_two_sided(r * df.sqrt() / (1.0 - r * r).sqrt(), df)?
    };
    Ok(StatTestResult::new("pearson", r, vec![df], p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn names(k: usize) -> Vec<String> {
        (0..k).map(|i| format!("g{i}")).collect()
    }

    #[test]
    fn equal_means_give_zero_f() {
        let r = one_way_anova(&[vec![1.0, 2.0, 3.0], vec![2.0, 1.0, 3.0], vec![3.0, 2.0, 1.0]]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!((r.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn f_matches_textbook_sums_of_squares() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let groups: Vec<Vec<f64>> = (0..3).map(|g| (0..5).map(|_| g as f64 + rng.random::<f64>()).collect()).collect();
        // SS_total − SS_within route, independent of the implementation's split
        let all: Vec<f64> = groups.iter().flatten().copied().collect();
        let n = all.len() as f64;
        let sum: f64 = all.iter().sum();
        let ss_total = all.iter().map(|x| x * x).sum::<f64>() - sum * sum / n;
        let ss_within: f64 = groups
            .iter()
            .map(|g| g.iter().map(|x| x * x).sum::<f64>() - g.iter().sum::<f64>().powi(2) / g.len() as f64)
            .sum();
        let f = ((ss_total - ss_within) / 2.0) / (ss_within / 12.0);
        let r = one_way_anova(&groups).unwrap();
        assert!((r.statistic - f).abs() < 1e-9);
    }

    #[test]
    fn short_group_rejected() {
        assert!(one_way_anova(&[vec![1.0], vec![2.0, 3.0]]).is_err());
        assert!(tukey_hsd(&[vec![1.0], vec![2.0, 3.0]], &names(2)).is_err());
    }

    #[test]
    fn identical_groups_have_symmetric_intervals() {
        let g = vec![1.0, 2.0, 4.0, 7.0];
        let r = tukey_hsd(&[g.clone(), g.clone(), g], &names(3)).unwrap();
        for p in r.pairwise.unwrap() {
            assert_eq!(p.mean_diff, 0.0);
            assert!((p.ci_low + p.ci_high).abs() < 1e-12);
            assert!((p.p_value - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn paired_t_closed_form() {
        let r = paired_t(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap();
        assert!((r.statistic + 12f64.sqrt()).abs() < 1e-9);
        assert_eq!(r.df, vec![2.0]);
        assert!(matches!(paired_t(&[1.0, 2.0], &[1.0, 2.0]), Err(Error::Degenerate(_))));
    }

    #[test]
    fn paired_t_matches_formula_on_random_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x: Vec<f64> = (0..12).map(|_| rng.random::<f64>()).collect();
        let y: Vec<f64> = (0..12).map(|_| rng.random::<f64>()).collect();
        let d: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
        let sum: f64 = d.iter().sum();
        let sum_sq: f64 = d.iter().map(|v| v * v).sum();
        let var = (sum_sq - sum * sum / 12.0) / 11.0;
        let t = (sum / 12.0) / (var / 12.0).sqrt();
        assert!((paired_t(&x, &y).unwrap().statistic - t).abs() < 1e-9);
    }

    #[test]
    fn pearson_cases() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert!((pearson(&x, &x.map(|v| 2.0 * v)).unwrap().statistic - 1.0).abs() < 1e-12);
        assert!((pearson(&x, &x.map(|v| -v)).unwrap().statistic + 1.0).abs() < 1e-12);
        let r = pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0, 4.0]).unwrap().statistic;
        assert!((r - 3.0 / (2.0f64 * (14.0 / 3.0)).sqrt()).abs() < 1e-12);
        assert!((r - 0.982).abs() < 1e-3);
        assert!(pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
    }

    fn groups_strategy() -> impl Strategy<Value = Vec<Vec<f64>>> {
        prop::collection::vec(prop::collection::vec(-100.0f64..100.0, 2..8), 2..5)
    }

    proptest! {
        #[test]
        fn anova_invariant_to_shift_and_scale(groups in groups_strategy(), shift in -50.0f64..50.0, scale in 0.1f64..10.0) {
            let Ok(base) = one_way_anova(&groups) else { return Ok(()) };
            prop_assume!(base.statistic.is_finite() && base.statistic > 1e-6);
            let moved: Vec<Vec<f64>> = groups.iter().map(|g| g.iter().map(|x| x * scale + shift).collect()).collect();
            let r = one_way_anova(&moved).unwrap();
            prop_assert!((r.statistic - base.statistic).abs() <= 1e-6 * base.statistic.max(1.0));
        }

        #[test]
        fn tukey_p_not_below_unadjusted_t(groups in groups_strategy()) {
            let k = groups.len();
            let Ok(r) = tukey_hsd(&groups, &names(k)) else { return Ok(()) };
            let mse = r.details["mse"];
            prop_assume!(mse > 1e-9);
            let df = (groups.iter().map(Vec::len).sum::<usize>() - k) as f64;
            let mut idx = 0;
            let pairs = r.pairwise.unwrap();
            for i in 0..k {
                for j in i + 1..k {
                    let se = (mse * (1.0 / groups[i].len() as f64 + 1.0 / groups[j].len() as f64)).sqrt();
                    let t = (mean(&groups[j]) - mean(&groups[i])) / se;
                    let p_t = t_two_sided(t, df).unwrap();
                    prop_assert!(pairs[idx].p_value >= p_t - 1e-7, "{} < {}", pairs[idx].p_value, p_t);
                    prop_assert!(pairs[idx].ci_low <= pairs[idx].ci_high);
                    idx += 1;
                }
            }
        }

        #[test]
        fn pearson_bounded(xy in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 3..20)) {
            let (x, y): (Vec<f64>, Vec<f64>) = xy.into_iter().unzip();
            if let Ok(r) = pearson(&x, &y) {
                prop_assert!(r.statistic.abs() <= 1.0);
                prop_assert!((0.0..=1.0).contains(&r.p_value));
            }
        }
    }
}
