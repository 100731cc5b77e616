//! Command-line front end. Every subcommand computes one report and prints
//! it to stdout (or `--out`) as CSV rows or a single JSON object.
//!
//! Conventions shared by both formats: integers that can exceed 2^53
//! (bound arguments, counts, discriminants) are decimal strings, exact
//! rationals are `n/d` strings, floating-point fields are plain f64 values.
//! `verify` output carries no timing fields, so its bytes depend only on
//! the arguments and the sieve bound.

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use multiquad::asymptotics::{constant_ck, fit_leading};
use multiquad::countform::{derive_family, Kind};
use multiquad::fields::{field_key, normalize, FieldKey, Presentation};
use multiquad::globalcount::{count_n, SieveCfg};
use multiquad::oracle::{enumerate_by_radical, FieldFilter};
use multiquad::verify::{first_failure, run_suite, Suite, VerifyOpts};
use multiquad::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

/// `Send` so a sized worker pool can own the report writer.
type Sink = Box<dyn Write + Send>;

#[derive(Parser)]
#[command(
    name = "multiquad",
    version,
    about = "Exact counts and asymptotics for multi-quadratic number fields"
)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write the report to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker pool size; defaults to all cores. Output bytes never depend
    /// on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Number of degree-2^k multi-quadratic fields with |disc| <= x.
    Count {
        /// Rank of the field family, 2 to 6.
        #[arg(long)]
        k: u32,
        /// Discriminant bound.
        #[arg(long)]
        x: u128,
        /// Count only totally real fields.
        #[arg(long)]
        totally_real: bool,
    },
    /// List the fields with a given radical.
    Radical {
        /// Rank of the field family.
        #[arg(long)]
        k: u32,
        /// Squarefree radical shared by the listed fields.
        #[arg(long = "P", alias = "p")]
        p: u64,
        /// `+`-joined tokens: all, i-free, totally-real, class=(a,b).
        #[arg(long, default_value = "all")]
        filter: String,
    },
    /// Rewrite a presentation in normal form.
    Normalize {
        /// Comma-separated squarefree entries, e.g. "6,10".
        #[arg(long, allow_hyphen_values = true)]
        presentation: String,
    },
    /// Invariants (radical, mod-4 class, discriminant) of one field.
    Disc {
        /// Comma-separated presentation entries.
        #[arg(long, allow_hyphen_values = true)]
        presentation: Option<String>,
        /// Comma-separated field key, e.g. "-6,-3,2".
        #[arg(long, allow_hyphen_values = true)]
        key: Option<String>,
    },
    /// Closed-form count by radical as an exponential polynomial in omega.
    Formula {
        /// Rank of the field family.
        #[arg(long)]
        k: u32,
        /// One of R, Q, R11, R31, R21, R23, Q11, Q31, Q21, Q23.
        #[arg(long)]
        kind: String,
    },
    /// Leading constant of the discriminant count.
    Constant {
        /// Rank of the field family, 2 to 6.
        #[arg(long)]
        k: u32,
        /// Truncate Euler products at this prime bound.
        #[arg(long, default_value_t = 10_000_000)]
        prime_bound: u64,
    },
    /// Fit the normalized count on a grid and compare with the constant.
    Fit {
        /// Rank of the field family, 2 to 6.
        #[arg(long)]
        k: u32,
        /// Comma-separated, strictly increasing evaluation points.
        #[arg(long)]
        grid: String,
        /// Fit the totally real count instead of the full one.
        #[arg(long)]
        totally_real: bool,
        /// Truncate Euler products at this prime bound.
        #[arg(long, default_value_t = 10_000_000)]
        prime_bound: u64,
    },
    /// Run a self-check suite; one row per check, deterministic bytes.
    Verify {
        /// formulas, global, asymptotics or all.
        #[arg(long, default_value = "all")]
        suite: String,
        /// Cap on the number of primes in generated radicals.
        #[arg(long, default_value_t = 4)]
        max_omega: u32,
        /// Seed for the randomized checks; recorded in the report.
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

// ---------------------------------------------------------------------------
// Report shapes. Field order fixes the CSV column order.

#[derive(Serialize)]
struct CountReport {
    command: &'static str,
    k: u32,
    x: String,
    totally_real: bool,
    sieve_bound: u64,
    value: String,
    wall_ms: u64,
}

#[derive(Serialize)]
struct RadicalField {
    key: String,
    /// Absent below rank 2, where the mod-4 class is undefined.
    discriminant: Option<String>,
    class: Option<String>,
    totally_real: bool,
    i_free: bool,
}

#[derive(Serialize)]
struct RadicalReport {
    command: &'static str,
    k: u32,
    radical: u64,
    filter: String,
    count: usize,
    fields: Vec<RadicalField>,
    wall_ms: u64,
}

#[derive(Serialize)]
struct RadicalRow {
    command: &'static str,
    k: u32,
    radical: u64,
    filter: String,
    key: String,
    discriminant: Option<String>,
    class: Option<String>,
    totally_real: bool,
    i_free: bool,
    wall_ms: u64,
}

#[derive(Serialize)]
struct NormalizeReport {
    command: &'static str,
    input: String,
    normal: String,
    key: String,
    radical: u64,
    class: Option<String>,
    discriminant: Option<String>,
    wall_ms: u64,
}

#[derive(Serialize)]
struct DiscReport {
    command: &'static str,
    source: &'static str,
    key: String,
    k: u32,
    radical: u64,
    class: String,
    two_exponent: u32,
    discriminant: String,
    wall_ms: u64,
}

#[derive(Serialize)]
struct FormulaReport {
    command: &'static str,
    k: u32,
    kind: String,
    bivariate: bool,
    formula: String,
    /// Value of the rational continuation at omega = 0.
    omega_zero: String,
    /// True count at the empty odd radical where it differs from the
    /// continuation.
    zero_override: Option<String>,
    wall_ms: u64,
}

#[derive(Serialize)]
struct ConstantReport {
    command: &'static str,
    k: u32,
    prime_bound: u64,
    prefactor: String,
    value: f64,
    lo: f64,
    hi: f64,
    alt_value: f64,
    residual: f64,
    wall_ms: u64,
}

#[derive(Serialize)]
struct FitReport {
    command: &'static str,
    k: u32,
    totally_real: bool,
    prime_bound: u64,
    sieve_bound: u64,
    grid: Vec<String>,
    /// Ascending powers of log x.
    coefficients: Vec<f64>,
    alpha: f64,
    target: f64,
    ratio: f64,
    rel_residuals: Vec<f64>,
    wall_ms: u64,
}

#[derive(Serialize)]
struct FitRow {
    command: &'static str,
    k: u32,
    totally_real: bool,
    prime_bound: u64,
    sieve_bound: u64,
    x: String,
    rel_residual: f64,
    alpha: f64,
    target: f64,
    ratio: f64,
    wall_ms: u64,
}

#[derive(Serialize)]
struct VerifyRowOut {
    suite: String,
    check: String,
    params: String,
    expected: String,
    got: String,
    pass: bool,
}

#[derive(Serialize)]
struct VerifyReport {
    command: &'static str,
    suite: String,
    seed: u64,
    max_omega: u32,
    sieve_bound: u64,
    rows: Vec<VerifyRowOut>,
    failures: usize,
}

#[derive(Serialize)]
struct VerifyRowCsv {
    command: &'static str,
    suite: String,
    seed: u64,
    max_omega: u32,
    check: String,
    params: String,
    expected: String,
    got: String,
    pass: bool,
}

// ---------------------------------------------------------------------------

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            let payload = serde_json::json!({
                "error": { "code": e.code(), "message": e.to_string() }
            });
            eprintln!("{payload}");
            std::process::exit(1);
        }
    }
}

fn run(cli: Cli) -> Result<i32> {
    let Cli {
        format,
        out,
        threads,
        cmd,
    } = cli;
    let cfg = sieve_cfg_from_env()?;
    let mut sink: Sink = match &out {
        Some(p) => Box::new(
            File::create(p)
                .map_err(|e| Error::Domain(format!("cannot create {}: {e}", p.display())))?,
        ),
        None => Box::new(io::stdout()),
    };
    let body = move || dispatch(cmd, format, cfg, &mut sink);
    match threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Domain(format!("thread pool: {e}")))?;
            pool.install(body)
        }
        None => body(),
    }
}

/// `MULTIQUAD_SIEVE_BOUND` overrides the default cap on every sieved range.
fn sieve_cfg_from_env() -> Result<SieveCfg> {
    let mut cfg = SieveCfg::default();
    if let Ok(s) = std::env::var("MULTIQUAD_SIEVE_BOUND") {
        let v: u64 = s
            .trim()
            .replace('_', "")
            .parse()
            .map_err(|_| Error::Domain(format!("MULTIQUAD_SIEVE_BOUND: cannot parse {s:?}")))?;
        if v < 4 {
            return Err(Error::Domain(
                "MULTIQUAD_SIEVE_BOUND must be at least 4".into(),
            ));
        }
        cfg.bound = v;
    }
    Ok(cfg)
}

fn dispatch(cmd: Cmd, format: Format, cfg: SieveCfg, w: &mut Sink) -> Result<i32> {
    match cmd {
        Cmd::Count { k, x, totally_real } => {
            let t0 = Instant::now();
            let value = count_n(k, x, totally_real, &cfg)?;
            let rep = CountReport {
                command: "count",
                k,
                x: x.to_string(),
                totally_real,
                sieve_bound: cfg.bound,
                value: value.to_string(),
                wall_ms: ms(t0),
            };
            emit(format, &rep, std::slice::from_ref(&rep), w)?;
            Ok(0)
        }
        Cmd::Radical { k, p, filter } => {
            let t0 = Instant::now();
            let parsed = parse_filter(&filter)?;
            let keys = enumerate_by_radical(p, k, &parsed)?;
            let fields: Vec<RadicalField> = keys.iter().map(radical_field).collect();
            let wall_ms = ms(t0);
            let rows: Vec<RadicalRow> = fields
                .iter()
                .map(|f| RadicalRow {
                    command: "radical",
                    k,
                    radical: p,
                    filter: filter.clone(),
                    key: f.key.clone(),
                    discriminant: f.discriminant.clone(),
                    class: f.class.clone(),
                    totally_real: f.totally_real,
                    i_free: f.i_free,
                    wall_ms,
                })
                .collect();
            let rep = RadicalReport {
                command: "radical",
                k,
                radical: p,
                filter,
                count: fields.len(),
                fields,
                wall_ms,
            };
            emit(format, &rep, &rows, w)?;
            Ok(0)
        }
        Cmd::Normalize { presentation } => {
            let t0 = Instant::now();
            let input: Presentation = presentation.parse()?;
            let normal = normalize(&input)?;
            let key = field_key(&normal)?;
            let rep = NormalizeReport {
                command: "normalize",
                input: input.to_string(),
                normal: normal.to_string(),
                key: key.to_string(),
                radical: key.radical()?,
                class: key.mod4_class().ok().map(|c| c.to_string()),
                discriminant: key.discriminant().ok().map(|d| d.to_string()),
                wall_ms: ms(t0),
            };
            emit(format, &rep, std::slice::from_ref(&rep), w)?;
            Ok(0)
        }
        Cmd::Disc { presentation, key } => {
            let t0 = Instant::now();
            let (source, key) = match (presentation, key) {
                (Some(p), None) => ("presentation", field_key(&p.parse::<Presentation>()?)?),
                (None, Some(s)) => ("key", s.parse::<FieldKey>()?),
                _ => {
                    return Err(Error::Domain(
                        "give exactly one of --presentation and --key".into(),
                    ))
                }
            };
            let class = key.mod4_class()?;
            let rep = DiscReport {
                command: "disc",
                source,
                key: key.to_string(),
                k: key.k(),
                radical: key.radical()?,
                class: class.to_string(),
                two_exponent: class.two_exponent(),
                discriminant: key.discriminant()?.to_string(),
                wall_ms: ms(t0),
            };
            emit(format, &rep, std::slice::from_ref(&rep), w)?;
            Ok(0)
        }
        Cmd::Formula { k, kind } => {
            let t0 = Instant::now();
            let kind: Kind = kind.parse()?;
            let fam = derive_family(k, kind)?;
            let rep = FormulaReport {
                command: "formula",
                k,
                kind: kind.to_string(),
                bivariate: kind.is_bivariate(),
                formula: fam.poly.to_string(),
                omega_zero: rat_str(&fam.rational_at_zero()?),
                zero_override: fam.zero_override.as_ref().map(|b| b.to_string()),
                wall_ms: ms(t0),
            };
            emit(format, &rep, std::slice::from_ref(&rep), w)?;
            Ok(0)
        }
        Cmd::Constant { k, prime_bound } => {
            let t0 = Instant::now();
            let ck = constant_ck(k, prime_bound)?;
            let rep = ConstantReport {
                command: "constant",
                k,
                prime_bound,
                prefactor: rat_str(&ck.prefactor),
                value: ck.value,
                lo: ck.lo,
                hi: ck.hi,
                alt_value: ck.alt_value,
                residual: ck.residual,
                wall_ms: ms(t0),
            };
            emit(format, &rep, std::slice::from_ref(&rep), w)?;
            Ok(0)
        }
        Cmd::Fit {
            k,
            grid,
            totally_real,
            prime_bound,
        } => {
            let t0 = Instant::now();
            let grid = parse_grid(&grid)?;
            let fr = fit_leading(k, &grid, totally_real, &cfg, prime_bound)?;
            let wall_ms = ms(t0);
            let rows: Vec<FitRow> = fr
                .grid
                .iter()
                .zip(&fr.rel_residuals)
                .map(|(&x, &rel_residual)| FitRow {
                    command: "fit",
                    k,
                    totally_real,
                    prime_bound,
                    sieve_bound: cfg.bound,
                    x: x.to_string(),
                    rel_residual,
                    alpha: fr.alpha,
                    target: fr.target,
                    ratio: fr.ratio,
                    wall_ms,
                })
                .collect();
            let rep = FitReport {
                command: "fit",
                k,
                totally_real,
                prime_bound,
                sieve_bound: cfg.bound,
                grid: fr.grid.iter().map(|x| x.to_string()).collect(),
                coefficients: fr.coefficients,
                alpha: fr.alpha,
                target: fr.target,
                ratio: fr.ratio,
                rel_residuals: fr.rel_residuals,
                wall_ms,
            };
            emit(format, &rep, &rows, w)?;
            Ok(0)
        }
        Cmd::Verify {
            suite,
            max_omega,
            seed,
        } => {
            let suite: Suite = suite.parse()?;
            let opts = VerifyOpts {
                max_omega,
                seed,
                cfg,
            };
            let rows = run_suite(suite, &opts)?;
            let failures = rows.iter().filter(|r| !r.pass).count();
            let suite_name = suite.to_string();
            let csv_rows: Vec<VerifyRowCsv> = rows
                .iter()
                .map(|r| VerifyRowCsv {
                    command: "verify",
                    suite: r.suite.clone(),
                    seed,
                    max_omega,
                    check: r.check.clone(),
                    params: r.params.clone(),
                    expected: r.expected.clone(),
                    got: r.got.clone(),
                    pass: r.pass,
                })
                .collect();
            let rep = VerifyReport {
                command: "verify",
                suite: suite_name,
                seed,
                max_omega,
                sieve_bound: cfg.bound,
                rows: rows
                    .iter()
                    .map(|r| VerifyRowOut {
                        suite: r.suite.clone(),
                        check: r.check.clone(),
                        params: r.params.clone(),
                        expected: r.expected.clone(),
                        got: r.got.clone(),
                        pass: r.pass,
                    })
                    .collect(),
                failures,
            };
            emit(format, &rep, &csv_rows, w)?;
            if let Some(fail) = first_failure(&rows) {
                let payload = serde_json::json!({
                    "error": {
                        "code": "verify-failed",
                        "message": format!(
                            "{}/{} [{}]: expected {}, got {}",
                            fail.suite, fail.check, fail.params, fail.expected, fail.got
                        )
                    }
                });
                eprintln!("{payload}");
                return Ok(1);
            }
            Ok(0)
        }
    }
}

fn ms(t0: Instant) -> u64 {
    t0.elapsed().as_millis() as u64
}

fn radical_field(key: &FieldKey) -> RadicalField {
    RadicalField {
        key: key.to_string(),
        discriminant: key.discriminant().ok().map(|d| d.to_string()),
        class: key.mod4_class().ok().map(|c| c.to_string()),
        totally_real: key.is_totally_real(),
        i_free: key.is_i_free(),
    }
}

fn rat_str(r: &BigRational) -> String {
    if r.is_integer() || r.is_zero() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn parse_filter(s: &str) -> Result<FieldFilter> {
    let mut f = FieldFilter::default();
    for tok in s.split('+').map(str::trim).filter(|t| !t.is_empty()) {
        match tok {
            "all" => {}
            "i-free" => f.i_free_only = true,
            "totally-real" => f.totally_real_only = true,
            t if t.starts_with("class=") => {
                f.mod4_class = Some(t["class=".len()..].parse()?);
            }
            other => {
                return Err(Error::Domain(format!(
                    "unknown filter token {other:?}; use all, i-free, totally-real or class=(a,b)"
                )))
            }
        }
    }
    Ok(f)
}

fn parse_grid(s: &str) -> Result<Vec<u128>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .replace('_', "")
                .parse::<u128>()
                .map_err(|_| Error::Domain(format!("cannot parse grid point {t:?}")))
        })
        .collect()
}

fn emit<J: Serialize, R: Serialize>(
    format: Format,
    json: &J,
    rows: &[R],
    w: &mut Sink,
) -> Result<()> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *w, json)
                .map_err(|e| Error::Domain(format!("serialize: {e}")))?;
            writeln!(w).map_err(|e| Error::Domain(format!("write: {e}")))?;
        }
        Format::Csv => {
            let mut wtr = csv::Writer::from_writer(&mut *w);
            for r in rows {
                wtr.serialize(r)
                    .map_err(|e| Error::Domain(format!("serialize: {e}")))?;
            }
            wtr.flush()
                .map_err(|e| Error::Domain(format!("write: {e}")))?;
        }
    }
    w.flush()
        .map_err(|e| Error::Domain(format!("write: {e}")))?;
    Ok(())
}
