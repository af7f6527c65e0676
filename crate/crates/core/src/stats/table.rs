use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{MetricKind, MetricsReport};

/// Rectangular table of one metric: rows = datasets, columns = methods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricTable {
    pub rows: Vec<String>,
    pub columns: Vec<String>,
    /// `values[row][column]`
    pub values: Vec<Vec<f64>>,
}

fn csv_err(e: csv::Error) -> Error {
    Error::Validation(format!("metric table CSV: {e}"))
}

impl MetricTable {
    pub fn new(rows: Vec<String>, columns: Vec<String>, values: Vec<Vec<f64>>) -> Result<Self> {
        if values.len() != rows.len() || values.iter().any(|r| r.len() != columns.len()) {
            return Err(Error::Validation("metric table is not rectangular".into()));
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Validation("metric table has missing or non-finite cells".into()));
        }
        Ok(Self { rows, columns, values })
    }

    /// First column holds row labels; the header names the columns.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header = rdr.headers().map_err(csv_err)?.clone();
        let columns: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut rows = Vec::new();
        let mut values = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(csv_err)?;
            rows.push(rec.get(0).unwrap_or_default().to_string());
            let row = rec
                .iter()
                .skip(1)
                .map(|c| {
                    c.parse::<f64>()
                        .map_err(|_| Error::Validation(format!("cell {c:?} is not a number")))
                })
                .collect::<Result<Vec<f64>>>()?;
            values.push(row);
        }
        Self::new(rows, columns, values)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_csv(std::fs::File::open(path)?)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["dataset".to_string()];
        header.extend(self.columns.iter().cloned());
        w.write_record(&header).map_err(csv_err)?;
        for (label, row) in self.rows.iter().zip(&self.values) {
            let mut rec = vec![label.clone()];
            rec.extend(row.iter().map(f64::to_string));
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Builds a table from metric reports; every (dataset, method) cell must
    /// be present exactly once.
    pub fn from_reports(reports: &[MetricsReport], metric: MetricKind) -> Result<Self> {
        let mut rows: Vec<String> = reports.iter().map(|r| r.dataset.clone()).collect();
        rows.sort();
        rows.dedup();
        let mut methods: Vec<_> = reports.iter().map(|r| r.method).collect();
        methods.sort();
        methods.dedup();
        let mut values = vec![vec![f64::NAN; methods.len()]; rows.len()];
        for r in reports {
            let i = rows.binary_search(&r.dataset).expect("row collected above");
            let j = methods.binary_search(&r.method).expect("method collected above");
            if !values[i][j].is_nan() {
                return Err(Error::Validation(format!("duplicate report for {} / {}", r.dataset, r.method)));
            }
            values[i][j] = metric.value(r);
        }
        Self::new(rows, methods.iter().map(|m| m.to_string()).collect(), values)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.values.iter().map(|r| r[j]).collect())
    }

    /// Columns as groups, in column order.
    pub fn groups(&self) -> Vec<Vec<f64>> {
        (0..self.columns.len()).map(|j| self.values.iter().map(|r| r[j]).collect()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    #[serde(with = "crate::floats")]
    pub mean: f64,
    #[serde(with = "crate::floats")]
    pub min: f64,
    #[serde(with = "crate::floats")]
    pub max: f64,
}

pub fn describe(column: &[f64]) -> Result<Summary> {
    if column.is_empty() {
        return Err(Error::Validation("cannot describe an empty column".into()));
    }
    Ok(Summary {
        mean: column.iter().sum::<f64>() / column.len() as f64,
        min: column.iter().copied().fold(f64::INFINITY, f64::min),
        max: column.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    })
}

/// Formats `value` with as many decimals as `printed` carries, so a computed
/// statistic can be compared with a value copied from a table. Exact halves
/// (up to floating-point noise) round to even: 0.5005 prints as 0.500.
pub fn format_like(value: f64, printed: &str) -> String {
    let decimals = printed.split_once('.').map_or(0, |(_, frac)| frac.len());
    let scale = 10f64.powi(decimals as i32);
    let scaled = value * scale;
    let floor = scaled.floor();
    let frac = scaled - floor;
    let rounded = if (frac - 0.5).abs() <= 1e-9 * scaled.abs().max(1.0) {
        if floor % 2.0 == 0.0 {
            floor
        } else {
            floor + 1.0
        }
    } else {
        scaled.round()
    };
    format!("{:.decimals$}", rounded / scale)
}
