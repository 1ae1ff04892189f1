//! Output schemas and rendering as JSON, CSV or aligned text.

use std::io::Write;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

/// A rendered command result: a JSON document plus its tabular view.
pub struct Report {
    pub json: serde_json::Value,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    /// Emitted as `# key: value` lines ahead of CSV and text tables.
    pub meta: Vec<(&'static str, String)>,
}

impl Report {
    pub fn new<T: Serialize>(value: &T) -> Report {
        Report {
            json: serde_json::to_value(value).expect("output types serialise"),
            columns: Vec::new(),
            rows: Vec::new(),
            meta: Vec::new(),
        }
    }

    pub fn table(mut self, columns: Vec<&'static str>, rows: Vec<Vec<String>>) -> Report {
        self.columns = columns;
        self.rows = rows;
        self
    }

    pub fn meta(mut self, key: &'static str, value: impl ToString) -> Report {
        self.meta.push((key, value.to_string()));
        self
    }

    /// Scalar reports render their top-level JSON fields as a single row.
    fn scalar_table(&self) -> (Vec<String>, Vec<Vec<String>>) {
        let obj = self.json.as_object().cloned().unwrap_or_default();
        let mut cols = Vec::new();
        let mut row = Vec::new();
        for (k, v) in obj {
            if v.is_array() || v.is_object() {
                continue;
            }
            cols.push(k);
            row.push(match v {
                serde_json::Value::String(s) => s,
                serde_json::Value::Null => String::new(),
                other => other.to_string(),
            });
        }
        (cols, vec![row])
    }

    pub fn write(&self, format: Format, out: &mut dyn Write) -> std::io::Result<()> {
        match format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut *out, &self.json)?;
                writeln!(out)
            }
            Format::Csv => {
                for (k, v) in &self.meta {
                    writeln!(out, "# {k}: {v}")?;
                }
                let (cols, rows) = self.tabular();
                let mut w = csv::Writer::from_writer(out);
                w.write_record(&cols)?;
                for r in &rows {
                    w.write_record(r)?;
                }
                w.flush()
            }
            Format::Text => {
                for (k, v) in &self.meta {
                    writeln!(out, "{k}: {v}")?;
                }
                let (cols, rows) = self.tabular();
                let widths: Vec<usize> = (0..cols.len())
                    .map(|i| rows.iter().map(|r| r[i].len()).chain([cols[i].len()]).max().unwrap_or(0))
                    .collect();
                let line = |cells: &[String]| {
                    cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect::<Vec<_>>().join("  ")
                };
                writeln!(out, "{}", line(&cols).trim_end())?;
                for r in &rows {
                    writeln!(out, "{}", line(r).trim_end())?;
                }
                Ok(())
            }
        }
    }

    fn tabular(&self) -> (Vec<String>, Vec<Vec<String>>) {
        if self.columns.is_empty() {
            self.scalar_table()
        } else {
            (self.columns.iter().map(|c| c.to_string()).collect(), self.rows.clone())
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FpOut {
    pub sap: String,
    pub ell: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub exact: Option<String>,
    pub numeric: String,
    pub precision: u32,
    pub patch_size: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRowOut {
    #[serde(rename = "L")]
    pub len: usize,
    pub count: u64,
    #[serde(rename = "S")]
    pub s: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepOut {
    pub max_len: usize,
    pub mode: String,
    pub dedup: bool,
    pub precision: u32,
    pub computed: usize,
    pub cached: usize,
    pub exponent: Option<f64>,
    pub rows: Vec<SweepRowOut>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoeffOut {
    pub ell: usize,
    pub coefficient: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesOut {
    pub sap: String,
    pub order: usize,
    pub coefficients: Vec<CoeffOut>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioRowOut {
    pub ell: usize,
    pub ratio: String,
    pub scaled_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioOut {
    pub sap: String,
    pub order: usize,
    pub precision: u32,
    pub limit: String,
    pub rows: Vec<RatioRowOut>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZetaTildeOut {
    pub order: usize,
    pub zeta_tilde: Vec<String>,
    pub mu_tilde: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaOut {
    pub alpha: String,
    pub precision: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CEntryOut {
    pub dx: i64,
    pub dy: i64,
    pub a: String,
    pub b: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DumpCOut {
    pub radius: usize,
    pub entries: Vec<CEntryOut>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteSeriesOut {
    pub kind: String,
    pub order: usize,
    pub coefficients: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SieveRowOut {
    pub l: usize,
    pub exact_ratio: String,
    pub predicted: String,
    pub rel_diff: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SieveCheckOut {
    pub support: Vec<usize>,
    pub len: usize,
    pub precision: u32,
    pub asymptote: String,
    pub k_max: usize,
    pub rows: Vec<SieveRowOut>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleCountOut {
    pub sap: String,
    pub len: usize,
    pub count: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistEntryOut {
    pub sap: String,
    pub count: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistOut {
    pub len: usize,
    pub total: u64,
    pub entries: Vec<HistEntryOut>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McOut {
    pub sap: String,
    pub samples: u64,
    pub max_len: usize,
    pub seed: u64,
    pub generator: String,
    pub estimate: f64,
    pub stderr: f64,
    pub truncated_fraction: f64,
    pub returned: u64,
    pub hits: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOut {
    pub name: String,
    pub expected: String,
    pub actual: String,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyOut {
    pub level: String,
    pub precision: u32,
    pub passed: usize,
    pub failed: usize,
    pub checks: Vec<CheckOut>,
}
