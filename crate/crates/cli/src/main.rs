//! `lel`: command-line front end for the last-erased-loop engines.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rug::Float;

use lel_core::finite::{
    exact_ratio, length_corollary_error, sieve_asymptote, viennot_series, Digraph, VertexSet,
};
use lel_core::green::{c_entry, ensure_radius};
use lel_core::lattice::{parse_sap, Sap};
use lel_core::oracle::{count_last_loop, last_loop_histogram, mc_first_return};
use lel_core::ring::{check_precision, decimal_digits, to_decimal, DEFAULT_PRECISION};
use lel_core::series::{alpha, mu_tilde, ratio_convergence, rp_series_infinite, zeta_tilde};
use lel_core::sieve::{evaluate, fit_exponent, sweep, SweepMode, SweepOptions};
use lel_core::store::Store;
use lel_core::Error;

use lel_cli::output::*;
use lel_cli::verify;

#[derive(Parser, Debug)]
#[command(name = "lel", version, about = "Last-erased-loop fractions on the square lattice")]
struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output format (default depends on the command).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Mantissa bits for numeric results.
    #[arg(long, global = true, default_value_t = DEFAULT_PRECISION)]
    precision: u32,
    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Log more (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fraction of closed walks whose last erased loop is a polygon.
    Fp(FpArgs),
    /// Partial sums S(L) over all polygons through the origin.
    Sweep(SweepArgs),
    /// Generating function of walks with a given last erased loop.
    Series(SapOrder),
    /// Coefficient ratios converging to the fraction.
    Ratio(SapOrder),
    /// Coefficients of the hike series and its inverse.
    ZetaTilde(OrderArg),
    /// alpha = exp(4G/pi)/4.
    Alpha,
    /// Exact entries c(dx,dy) = a + b/pi for 0 <= dy <= dx <= radius.
    DumpC {
        #[arg(long)]
        radius: usize,
    },
    /// Sieves on finite weighted digraphs.
    #[command(subcommand)]
    Finite(FiniteCommand),
    /// Brute-force walk enumeration.
    #[command(subcommand)]
    Oracle(OracleCommand),
    /// Monte-Carlo estimate of a fraction from first-return walks.
    Mc(McArgs),
    /// Check the bundled reference constants.
    Verify {
        #[arg(long, value_enum, default_value = "quick")]
        level: verify::Level,
    },
}

#[derive(Args, Debug)]
struct FpArgs {
    /// Step string such as RULD.
    #[arg(long, required_unless_present = "sap_file", conflicts_with = "sap_file")]
    sap: Option<String>,
    /// One step string per line, or a JSON object {"steps": "..."}.
    #[arg(long)]
    sap_file: Option<PathBuf>,
    /// Also compute the exact value in Q[1/pi].
    #[arg(long)]
    exact: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Exact,
    Numeric,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    max_len: usize,
    #[arg(long, value_enum, default_value = "numeric")]
    mode: ModeArg,
    /// Evaluate every anchored polygon instead of one per support.
    #[arg(long)]
    no_dedup: bool,
    /// Append-only result cache (*.lel.jsonl).
    #[arg(long, env = "LEL_CACHE")]
    cache: Option<PathBuf>,
    /// Skip malformed cache lines instead of failing.
    #[arg(long)]
    lenient: bool,
    /// Significant digits of S in tables (default: all carried by the precision).
    #[arg(long)]
    digits: Option<usize>,
}

#[derive(Args, Debug)]
struct SapOrder {
    #[arg(long)]
    sap: String,
    /// Series truncation order.
    #[arg(long, default_value_t = 40)]
    order: usize,
}

#[derive(Args, Debug)]
struct OrderArg {
    #[arg(long, default_value_t = 40)]
    order: usize,
}

#[derive(Args, Debug)]
struct GraphArgs {
    /// Digraph JSON {"n": .., "edges": [[i, j, "num/den"], ..]}.
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, default_value_t = 40)]
    order: usize,
}

#[derive(Args, Debug)]
struct PrimeArgs {
    /// Comma-separated support vertices of the prime.
    #[arg(long)]
    support: String,
    /// Length of the prime.
    #[arg(long)]
    len: usize,
}

#[derive(Subcommand, Debug)]
enum FiniteCommand {
    /// Hike series zeta(z) = 1/det(I - zA).
    Zeta(GraphArgs),
    /// Series of walks whose last erased loop has the given support.
    Viennot {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        prime: PrimeArgs,
    },
    /// Asymptote plus length-corollary error against exact coefficient ratios.
    SieveCheck {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        prime: PrimeArgs,
        /// Terms of the error expansion (default: all).
        #[arg(long)]
        k_max: Option<usize>,
    },
}

#[derive(Subcommand, Debug)]
enum OracleCommand {
    /// Closed walks of length --len whose last erased loop is --sap.
    Count {
        #[arg(long)]
        sap: String,
        #[arg(long)]
        len: usize,
    },
    /// Last erased loops of all closed walks of length --len.
    Hist {
        #[arg(long)]
        len: usize,
    },
}

#[derive(Args, Debug)]
struct McArgs {
    #[arg(long)]
    sap: String,
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    #[arg(long, default_value_t = 10_000)]
    max_len: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

enum Failure {
    Usage(String),
    Domain(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        Failure::Domain(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Failure {
        Failure::Domain(Error::Io(e))
    }
}

type Outcome = std::result::Result<(Report, Format), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Domain(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> std::result::Result<ExitCode, Failure> {
    if check_precision(cli.precision).is_err() {
        return Err(Failure::Usage(format!("--precision {} is below the minimum of 53 bits", cli.precision)));
    }
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Failure::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Failure::Usage(format!("--threads: {e}")))?;
    }
    let (report, default_format) = dispatch(cli)?;
    let format = cli.format.unwrap_or(default_format);
    match &cli.out {
        Some(path) => {
            let mut f = BufWriter::new(File::create(path)?);
            report.write(format, &mut f)?;
            f.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            report.write(format, &mut lock)?;
        }
    }
    let failed = report.json.get("failed").and_then(|v| v.as_u64()).unwrap_or(0);
    Ok(if failed > 0 { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn sap_arg(s: &str) -> std::result::Result<Sap, Failure> {
    Ok(parse_sap(s)?)
}

fn read_saps(path: &PathBuf) -> std::result::Result<Vec<Sap>, Failure> {
    let text = std::fs::read_to_string(path)?;
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        #[derive(serde::Deserialize)]
        struct SapJson {
            steps: String,
        }
        let j: SapJson = serde_json::from_str(trimmed).map_err(Error::from)?;
        return Ok(vec![parse_sap(&j.steps)?]);
    }
    text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).map(sap_arg).collect()
}

fn dispatch(cli: &Cli) -> Outcome {
    let prec = cli.precision;
    let digits = decimal_digits(prec);
    match &cli.command {
        Command::Fp(a) => {
            let saps = match (&a.sap, &a.sap_file) {
                (Some(s), _) => vec![sap_arg(s)?],
                (None, Some(f)) => read_saps(f)?,
                (None, None) => return Err(Failure::Usage("one of --sap or --sap-file is required".into())),
            };
            let outs: Vec<FpOut> = saps
                .iter()
                .map(|p| {
                    let r = evaluate(p, a.exact, prec)?;
                    Ok(FpOut {
                        sap: p.step_string(),
                        ell: r.ell,
                        exact: r.exact.map(|e| e.to_string()),
                        numeric: to_decimal(&r.numeric, digits),
                        precision: prec,
                        patch_size: r.patch_size,
                    })
                })
                .collect::<lel_core::Result<_>>()?;
            let rows = outs
                .iter()
                .map(|o| {
                    vec![o.sap.clone(), o.ell.to_string(), o.exact.clone().unwrap_or_default(), o.numeric.clone()]
                })
                .collect();
            let report = if outs.len() == 1 { Report::new(&outs[0]) } else { Report::new(&outs) };
            Ok((report.table(vec!["sap", "ell", "exact", "numeric"], rows).meta("precision", prec), Format::Json))
        }
        Command::Sweep(a) => {
            if a.no_dedup && a.cache.is_some() {
                return Err(Failure::Usage("--cache cannot be combined with --no-dedup".into()));
            }
            if a.max_len < 2 {
                return Err(Failure::Usage(format!("--max-len {} is below 2", a.max_len)));
            }
            let mode = match a.mode {
                ModeArg::Exact => SweepMode::Exact,
                ModeArg::Numeric => SweepMode::Numeric,
            };
            let opts = SweepOptions { max_len: a.max_len, mode, precision: prec, dedup: !a.no_dedup };
            let outcome = match &a.cache {
                Some(path) => {
                    let mut store = Store::open(path, a.lenient)?;
                    sweep(&opts, Some(&mut store))?
                }
                None => sweep(&opts, None)?,
            };
            let d = a.digits.unwrap_or(digits);
            let rows: Vec<SweepRowOut> = outcome
                .table
                .rows
                .iter()
                .map(|r| SweepRowOut { len: r.len, count: r.count, s: to_decimal(&r.s, d) })
                .collect();
            let fit_rows: Vec<(f64, f64)> = outcome.table.rows.iter().map(|r| (r.len as f64, r.s.to_f64())).collect();
            let exponent = fit_exponent(&fit_rows).ok();
            let out = SweepOut {
                max_len: a.max_len,
                mode: format!("{mode:?}").to_lowercase(),
                dedup: !a.no_dedup,
                precision: prec,
                computed: outcome.computed,
                cached: outcome.cached,
                exponent,
                rows,
            };
            log::info!("computed {}, cached {}, exponent {:?}", out.computed, out.cached, out.exponent);
            let table = out.rows.iter().map(|r| vec![r.len.to_string(), r.count.to_string(), r.s.clone()]).collect();
            Ok((Report::new(&out).table(vec!["L", "count", "S"], table).meta("precision", prec), Format::Csv))
        }
        Command::Series(a) => {
            let p = sap_arg(&a.sap)?;
            let s = rp_series_infinite(&p, a.order)?;
            let coefficients: Vec<CoeffOut> = (0..=a.order)
                .map(|ell| CoeffOut { ell, coefficient: s.coeffs()[ell].to_string() })
                .collect();
            let rows = coefficients.iter().map(|c| vec![c.ell.to_string(), c.coefficient.clone()]).collect();
            let out = SeriesOut { sap: p.step_string(), order: a.order, coefficients };
            Ok((Report::new(&out).table(vec!["ell", "coefficient"], rows), Format::Json))
        }
        Command::Ratio(a) => {
            let p = sap_arg(&a.sap)?;
            let pts = ratio_convergence(&p, a.order)?;
            let limit = lel_core::sieve::fraction_numeric(&p, prec)?;
            let rows: Vec<RatioRowOut> = pts
                .iter()
                .map(|q| RatioRowOut {
                    ell: q.ell,
                    ratio: to_decimal(&Float::with_val(prec, &q.ratio), digits),
                    scaled_error: q.scaled_error,
                })
                .collect();
            let table =
                rows.iter().map(|r| vec![r.ell.to_string(), r.ratio.clone(), r.scaled_error.to_string()]).collect();
            let out = RatioOut {
                sap: p.step_string(),
                order: a.order,
                precision: prec,
                limit: to_decimal(&limit, digits),
                rows,
            };
            Ok((Report::new(&out).table(vec!["ell", "ratio", "scaled_error"], table).meta("precision", prec), Format::Json))
        }
        Command::ZetaTilde(a) => {
            let z = zeta_tilde(a.order);
            let m = mu_tilde(a.order);
            let out = ZetaTildeOut {
                order: a.order,
                zeta_tilde: z.coeffs().iter().map(|c| c.to_string()).collect(),
                mu_tilde: m.coeffs().iter().map(|c| c.to_string()).collect(),
            };
            let rows = (0..=a.order)
                .map(|n| vec![n.to_string(), out.zeta_tilde[n].clone(), out.mu_tilde[n].clone()])
                .collect();
            Ok((Report::new(&out).table(vec!["n", "zeta_tilde", "mu_tilde"], rows), Format::Json))
        }
        Command::Alpha => {
            let out = AlphaOut { alpha: to_decimal(&alpha(prec)?, digits), precision: prec };
            Ok((Report::new(&out), Format::Json))
        }
        Command::DumpC { radius } => {
            ensure_radius(*radius);
            let mut entries = Vec::new();
            for dx in 0..=*radius as i64 {
                for dy in 0..=dx {
                    let c = c_entry(dx, dy);
                    entries.push(CEntryOut { dx, dy, a: c.coeff(0).to_string(), b: c.coeff(1).to_string() });
                }
            }
            let rows =
                entries.iter().map(|e| vec![e.dx.to_string(), e.dy.to_string(), e.a.clone(), e.b.clone()]).collect();
            let out = DumpCOut { radius: *radius, entries };
            Ok((Report::new(&out).table(vec!["dx", "dy", "a", "b"], rows), Format::Csv))
        }
        Command::Finite(f) => finite(f, prec, digits),
        Command::Oracle(OracleCommand::Count { sap, len }) => {
            let p = sap_arg(sap)?;
            let count = count_last_loop(&p, *len)?;
            let out = OracleCountOut { sap: p.step_string(), len: *len, count };
            Ok((Report::new(&out), Format::Json))
        }
        Command::Oracle(OracleCommand::Hist { len }) => {
            let h = last_loop_histogram(*len)?;
            let entries: Vec<HistEntryOut> = h.into_iter().map(|(sap, count)| HistEntryOut { sap, count }).collect();
            let total = entries.iter().map(|e| e.count).sum();
            let rows = entries.iter().map(|e| vec![e.sap.clone(), e.count.to_string()]).collect();
            let out = HistOut { len: *len, total, entries };
            Ok((Report::new(&out).table(vec!["sap", "count"], rows), Format::Csv))
        }
        Command::Mc(a) => {
            let p = sap_arg(&a.sap)?;
            let e = mc_first_return(&p, a.samples, a.max_len, a.seed)?;
            let out = McOut {
                sap: p.step_string(),
                samples: a.samples,
                max_len: a.max_len,
                seed: a.seed,
                generator: e.generator.into(),
                estimate: e.estimate,
                stderr: e.stderr,
                truncated_fraction: e.truncated_fraction,
                returned: e.returned,
                hits: e.hits,
            };
            Ok((Report::new(&out), Format::Json))
        }
        Command::Verify { level } => {
            let out = verify::verify(*level, prec);
            let rows = out
                .checks
                .iter()
                .map(|c| {
                    vec![
                        if c.pass { "pass" } else { "FAIL" }.to_string(),
                        c.name.clone(),
                        c.expected.clone(),
                        c.actual.clone(),
                    ]
                })
                .collect();
            Ok((
                Report::new(&out).table(vec!["result", "check", "expected", "actual"], rows).meta("precision", prec),
                Format::Text,
            ))
        }
    }
}

fn load_graph(g: &GraphArgs) -> std::result::Result<Digraph, Failure> {
    let text = std::fs::read_to_string(&g.graph)?;
    Ok(Digraph::from_json(&text)?)
}

fn finite(cmd: &FiniteCommand, prec: u32, digits: usize) -> Outcome {
    let series_report = |kind: &str, order: usize, coeffs: Vec<String>| {
        let rows = coeffs.iter().enumerate().map(|(n, c)| vec![n.to_string(), c.clone()]).collect();
        let out = FiniteSeriesOut { kind: kind.into(), order, coefficients: coeffs };
        Report::new(&out).table(vec!["n", "coefficient"], rows)
    };
    match cmd {
        FiniteCommand::Zeta(g) => {
            let graph = load_graph(g)?;
            let z = graph.zeta_series(g.order);
            Ok((series_report("zeta", g.order, z.coeffs().iter().map(|c| c.to_string()).collect()), Format::Json))
        }
        FiniteCommand::Viennot { graph: g, prime } => {
            let graph = load_graph(g)?;
            let support = parse_support(&prime.support, &graph)?;
            let v = viennot_series(&graph, &support, prime.len, g.order)?;
            Ok((series_report("viennot", g.order, v.coeffs().iter().map(|c| c.to_string()).collect()), Format::Json))
        }
        FiniteCommand::SieveCheck { graph: g, prime, k_max } => {
            let graph = load_graph(g)?;
            let support = parse_support(&prime.support, &graph)?;
            let asymptote = sieve_asymptote(&graph, &support, prime.len, prec)?;
            let k_max = k_max.unwrap_or(graph.len());
            let mut rows = Vec::new();
            for l in prime.len.max(1)..=g.order {
                let exact = match exact_ratio(&graph, &support, prime.len, l) {
                    Ok(q) => Float::with_val(prec, &q),
                    Err(Error::ZeroDensity(_)) => continue,
                    Err(e) => return Err(e.into()),
                };
                let err = length_corollary_error(&graph, &support, prime.len, l, k_max, prec)?;
                let predicted = Float::with_val(prec, &asymptote + &err);
                let diff = Float::with_val(prec, &predicted - &exact).abs();
                let rel = if exact.is_zero() { diff } else { diff / exact.clone().abs() };
                rows.push(SieveRowOut {
                    l,
                    exact_ratio: to_decimal(&exact, digits),
                    predicted: to_decimal(&predicted, digits),
                    rel_diff: rel.to_f64(),
                });
            }
            let table = rows
                .iter()
                .map(|r| vec![r.l.to_string(), r.exact_ratio.clone(), r.predicted.clone(), r.rel_diff.to_string()])
                .collect();
            let out = SieveCheckOut {
                support: support.as_slice().to_vec(),
                len: prime.len,
                precision: prec,
                asymptote: to_decimal(&asymptote, digits),
                k_max,
                rows,
            };
            Ok((
                Report::new(&out).table(vec!["l", "exact_ratio", "predicted", "rel_diff"], table).meta("precision", prec),
                Format::Json,
            ))
        }
    }
}

fn parse_support(s: &str, g: &Digraph) -> std::result::Result<VertexSet, Failure> {
    let v = VertexSet::parse(s).map_err(|e| Failure::Usage(format!("--support: {e}")))?;
    if let Some(&bad) = v.as_slice().iter().find(|&&i| i >= g.len()) {
        return Err(Failure::Usage(format!("--support: vertex {bad} is outside the graph (n = {})", g.len())));
    }
    Ok(v)
}
