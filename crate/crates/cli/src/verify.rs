//! Golden-value checks shipped in `data/golden.toml`.

use clap::ValueEnum;
use serde::Deserialize;

use lel_core::lattice::{parse_sap, rectangle, Sap};
use lel_core::oracle::count_last_loop;
use lel_core::ring::{parse_rational, to_decimal, PiPoly};
use lel_core::series::{alpha, mu_tilde, rp_series_infinite, zeta_tilde, RatSeries};
use lel_core::sieve::{fraction_exact, fraction_numeric, sweep, SweepMode, SweepOptions};
use lel_core::Result;

use crate::output::{CheckOut, VerifyOut};

const GOLDEN: &str = include_str!("../data/golden.toml");

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Quick,
    Full,
}

#[derive(Debug, Deserialize)]
struct Golden {
    check: Vec<Check>,
}

#[derive(Debug, Deserialize)]
struct Check {
    name: String,
    level: Level,
    #[serde(flatten)]
    kind: Kind,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
enum Kind {
    FractionExact {
        sap: String,
        coeffs: Vec<String>,
    },
    FractionNumeric {
        sap: Option<String>,
        rect: Option<[usize; 2]>,
        value: f64,
        tol: f64,
        precision: Option<u32>,
    },
    Series {
        series: String,
        start: usize,
        step: usize,
        values: Vec<i64>,
    },
    Alpha {
        value: f64,
        tol: f64,
    },
    OracleCount {
        sap: String,
        len: usize,
        value: u64,
    },
    Sweep {
        max_len: usize,
        values: Vec<f64>,
        tol: f64,
    },
}

fn golden() -> Golden {
    toml::from_str(GOLDEN).expect("bundled golden file parses")
}

fn numeric_check(name: &str, actual: f64, value: f64, tol: f64) -> CheckOut {
    CheckOut {
        name: name.into(),
        expected: format!("{value:e} ± {tol:e}"),
        actual: format!("{actual:e}"),
        pass: (actual - value).abs() <= tol,
    }
}

fn series_for(name: &str, order: usize) -> Result<RatSeries> {
    match name {
        "zeta-tilde" => Ok(zeta_tilde(order)),
        "mu-tilde" => Ok(mu_tilde(order)),
        sap => rp_series_infinite(&parse_sap(sap)?, order),
    }
}

fn run_check(c: &Check, precision: u32) -> Result<CheckOut> {
    Ok(match &c.kind {
        Kind::FractionExact { sap, coeffs } => {
            let want = PiPoly::from_coeffs(coeffs.iter().map(|s| parse_rational(s)).collect::<Result<_>>()?);
            let got = fraction_exact(&parse_sap(sap)?);
            CheckOut { name: c.name.clone(), expected: want.to_string(), actual: got.to_string(), pass: got == want }
        }
        Kind::FractionNumeric { sap, rect, value, tol, precision: p } => {
            let sap: Sap = match (sap, rect) {
                (Some(s), _) => parse_sap(s)?,
                (None, Some([w, h])) => rectangle(*w, *h),
                (None, None) => unreachable!("golden entries name a polygon"),
            };
            let v = fraction_numeric(&sap, p.unwrap_or(precision))?;
            numeric_check(&c.name, v.to_f64(), *value, *tol)
        }
        Kind::Series { series, start, step, values } => {
            let order = start + step * (values.len() - 1);
            let s = series_for(series, order)?;
            let got: Vec<String> =
                (0..values.len()).map(|i| s.coeffs()[start + i * step].to_string()).collect();
            let want: Vec<String> = values.iter().map(|v| v.to_string()).collect();
            CheckOut { name: c.name.clone(), expected: want.join(","), actual: got.join(","), pass: got == want }
        }
        Kind::Alpha { value, tol } => numeric_check(&c.name, alpha(precision)?.to_f64(), *value, *tol),
        Kind::OracleCount { sap, len, value } => {
            let got = count_last_loop(&parse_sap(sap)?, *len)?;
            CheckOut { name: c.name.clone(), expected: value.to_string(), actual: got.to_string(), pass: got == *value }
        }
        Kind::Sweep { max_len, values, tol } => {
            let opts = SweepOptions { max_len: *max_len, mode: SweepMode::Numeric, precision, dedup: true };
            let table = sweep(&opts, None)?.table;
            let got: Vec<f64> = table.rows.iter().map(|r| r.s.to_f64()).collect();
            let pass = got.len() == values.len() && got.iter().zip(values).all(|(g, v)| (g - v).abs() <= *tol);
            CheckOut {
                name: c.name.clone(),
                expected: values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","),
                actual: table.rows.iter().map(|r| to_decimal(&r.s, 6)).collect::<Vec<_>>().join(","),
                pass,
            }
        }
    })
}

/// Runs every check at or below `level`. A check that errors counts as failed.
pub fn verify(level: Level, precision: u32) -> VerifyOut {
    let checks: Vec<CheckOut> = golden()
        .check
        .iter()
        .filter(|c| c.level <= level)
        .map(|c| {
            run_check(c, precision).unwrap_or_else(|e| CheckOut {
                name: c.name.clone(),
                expected: String::new(),
                actual: format!("error: {e}"),
                pass: false,
            })
        })
        .collect();
    let passed = checks.iter().filter(|c| c.pass).count();
    VerifyOut {
        level: format!("{level:?}").to_lowercase(),
        precision,
        passed,
        failed: checks.len() - passed,
        checks,
    }
}
