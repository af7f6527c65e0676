//! Statistical comparison of topic-model methods.

mod distributions;
mod nonparametric;
mod parametric;
mod result;
mod table;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use distributions::{chi2_sf, f_sf, normal_cdf, ptukey, qtukey, t_cdf, t_two_sided};
pub use nonparametric::{friedman, nemenyi, rank_average, wilcoxon_signed_rank, FRIEDMAN_EXACT_MAX, WILCOXON_EXACT_MAX};
pub use parametric::{one_way_anova, paired_t, pearson, tukey_hsd, tukey_hsd_at};
pub use result::{PairwiseComparison, StatTestResult};
pub use table::{describe, format_like, MetricTable, Summary};

use crate::error::Result;

/// Paired tests between two methods over the same datasets. A test that
/// cannot run on the data (e.g. identical columns) is `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedTests {
    pub method_a: String,
    pub method_b: String,
    pub paired_t: Option<StatTestResult>,
    pub wilcoxon: Option<StatTestResult>,
    pub pearson: Option<StatTestResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricComparison {
    pub metric: String,
    pub summaries: Vec<(String, Summary)>,
    pub anova: StatTestResult,
    pub tukey: StatTestResult,
    pub paired: Vec<PairedTests>,
}

/// ANOVA, Tukey HSD and all pairwise paired tests for one metric table.
pub fn compare_methods(metric: &str, table: &MetricTable) -> Result<MetricComparison> {
    let groups = table.groups();
    let summaries = table
        .columns
        .iter()
        .zip(&groups)
        .map(|(c, g)| Ok((c.clone(), describe(g)?)))
        .collect::<Result<Vec<_>>>()?;
    let anova = one_way_anova(&groups)?;
    let tukey = tukey_hsd(&groups, &table.columns)?;
    let mut paired = Vec::new();
    for i in 0..groups.len() {
        for j in i + 1..groups.len() {
            let skip = |r: Result<StatTestResult>| match r {
                Ok(r) => Some(r),
                Err(e) => {
                    log::warn!("{metric}: {} vs {}: {e}", table.columns[i], table.columns[j]);
                    None
                }
            };
            paired.push(PairedTests {
                method_a: table.columns[i].clone(),
                method_b: table.columns[j].clone(),
                paired_t: skip(paired_t(&groups[i], &groups[j])),
                wilcoxon: skip(wilcoxon_signed_rank(&groups[i], &groups[j])),
                pearson: skip(pearson(&groups[i], &groups[j])),
            });
        }
    }
    Ok(MetricComparison {
        metric: metric.to_string(),
        summaries,
        anova,
        tukey,
        paired,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankComparison {
    pub friedman: StatTestResult,
    pub nemenyi: StatTestResult,
}

/// Friedman and Nemenyi over a ranking table (rows = blocks, columns = methods).
pub fn compare_rankings(table: &MetricTable, alpha: f64) -> Result<RankComparison> {
    Ok(RankComparison {
        friedman: friedman(&table.values)?,
        nemenyi: nemenyi(&table.values, &table.columns, alpha)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub metrics: Vec<MetricComparison>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rankings: Option<RankComparison>,
}

impl StatsReport {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::io::BufWriter::new(std::fs::File::create(path)?);
        serde_json::to_writer_pretty(file, self)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_reader(std::io::BufReader::new(std::fs::File::open(path)?))?)
    }

    /// Pairwise rows of every Tukey and Nemenyi result as CSV.
    pub fn write_pairwise_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let err = |e: csv::Error| crate::Error::Validation(e.to_string());
        w.write_record(["source", "group_a", "group_b", "mean_diff", "ci_low", "ci_high", "p_value", "significant"])
            .map_err(err)?;
        let mut rows: Vec<(String, &PairwiseComparison)> = Vec::new();
        for m in &self.metrics {
            for p in m.tukey.pairwise.iter().flatten() {
                rows.push((format!("{}:tukey", m.metric), p));
            }
        }
        if let Some(r) = &self.rankings {
            for p in r.nemenyi.pairwise.iter().flatten() {
                rows.push(("rankings:nemenyi".to_string(), p));
            }
        }
        for (source, p) in rows {
            w.write_record([
                source,
                p.group_a.clone(),
                p.group_b.clone(),
                p.mean_diff.to_string(),
                p.ci_low.to_string(),
                p.ci_high.to_string(),
                p.p_value.to_string(),
                p.significant.to_string(),
            ])
            .map_err(err)?;
        }
        w.flush()?;
        Ok(())
    }
}
