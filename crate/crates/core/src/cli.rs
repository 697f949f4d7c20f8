//! Command-line front end.
//!
//! Every subcommand emits one JSON document
//! `{"cmd", "input", "result", "elapsed_ms"}` or, for the sweep subcommands,
//! a CSV table with a header row. Unbounded integers are written as decimal
//! strings. Output depends only on the arguments: `elapsed_ms` is 0 unless
//! `--timing` is given.
//!
//! Exit status: 0 on success, 2 for invalid input, 3 when a resource guard
//! trips, 1 when a result fails its own certificate.

use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{domain, Error, Result};
use crate::numbercore::{height, jacobsthal, IntVector, DEFAULT_SIEVE_CAP};
use crate::{adversary, bhconstants, coprime, linform, shiftsearch};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "shiftgcd",
    version,
    about = "Exact experiments on gcds of shifted integer vectors"
)]
pub struct Cli {
    /// Output format; csv is available for the sweep subcommands.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    /// Overrides the subcommand's enumeration, sieve or work guard.
    #[arg(long, global = true)]
    pub guard: Option<u64>,
    /// Report wall-clock time in `elapsed_ms`.
    #[arg(long, global = true)]
    pub timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CountMethod {
    Mobius,
    Brute,
    Both,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// kappa, theta and gamma for (n, eps), plus the parameter plan for H.
    Constants {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        eps: f64,
        #[arg(long = "H")]
        height: Option<f64>,
    },
    /// Largest gcd reachable by shifts of height at most H.
    MaxGcdShift {
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long = "H")]
        height: u64,
        /// Allow H >= min a_i and non-positive entries.
        #[arg(long)]
        allow_large_shift: bool,
    },
    /// Random instances of the shifted-gcd exponent experiment.
    ExponentSweep {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        scale: u64,
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        seed: u64,
    },
    /// One-sided greedy shift to a pairwise coprime vector.
    GreedyCoprime {
        #[arg(long)]
        a: String,
    },
    /// Greedy shift heights on random vectors, with Jacobsthal step checks.
    GreedyAudit {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        samples: usize,
        #[arg(long)]
        magnitude: u64,
        #[arg(long)]
        seed: u64,
    },
    /// Least height making the entries pairwise coprime.
    LExact {
        #[arg(long, allow_hyphen_values = true)]
        a: String,
    },
    /// Least height making the joint gcd 1.
    EllExact {
        #[arg(long, allow_hyphen_values = true)]
        a: String,
    },
    /// CRT vector that no shift of height at most H makes coprime.
    CrtInstance {
        #[arg(long)]
        n: usize,
        #[arg(long = "H")]
        height: u64,
    },
    /// Re-check a serialized CRT instance ("-" reads standard input).
    VerifyInstance {
        #[arg(long)]
        instance: String,
    },
    /// Size of CRT instances as H grows.
    GrowthAudit {
        #[arg(long)]
        n: usize,
        #[arg(long = "Hs", value_delimiter = ',', required = true)]
        heights: Vec<u64>,
    },
    /// Pairs of vectors whose linear forms keep gcd(a).
    CountR {
        #[arg(long)]
        a: String,
        #[arg(long)]
        h: u64,
        #[arg(long, value_enum, default_value_t = CountMethod::Mobius)]
        method: CountMethod,
        /// Include the U_d table.
        #[arg(long)]
        table: bool,
    },
    /// Exact checks of the U_d estimates.
    BoundAudit {
        #[arg(long)]
        a: String,
        #[arg(long)]
        h: u64,
        /// Moduli to check; otherwise `--samples` random ones.
        #[arg(long, value_delimiter = ',', conflicts_with = "samples")]
        d: Vec<u64>,
        #[arg(long, requires = "seed")]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// R(a, h) / h^(2n) against 6/pi^2.
    Converge {
        #[arg(long)]
        a: String,
        #[arg(long = "hs", value_delimiter = ',', required = true)]
        hs: Vec<u64>,
    },
    /// Largest gap between consecutive integers coprime to m.
    Jacobsthal {
        #[arg(long)]
        m: u64,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Constants { .. } => "constants",
            Command::MaxGcdShift { .. } => "max-gcd-shift",
            Command::ExponentSweep { .. } => "exponent-sweep",
            Command::GreedyCoprime { .. } => "greedy-coprime",
            Command::GreedyAudit { .. } => "greedy-audit",
            Command::LExact { .. } => "l-exact",
            Command::EllExact { .. } => "ell-exact",
            Command::CrtInstance { .. } => "crt-instance",
            Command::VerifyInstance { .. } => "verify-instance",
            Command::GrowthAudit { .. } => "growth-audit",
            Command::CountR { .. } => "count-r",
            Command::BoundAudit { .. } => "bound-audit",
            Command::Converge { .. } => "converge",
            Command::Jacobsthal { .. } => "jacobsthal",
        }
    }
}

/// A finished subcommand: echoed input, result payload, and for sweeps the
/// CSV rendering.
struct Report {
    input: Value,
    result: Value,
    table: Option<Table>,
}

struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn strings(v: &[BigInt]) -> Vec<String> {
    v.iter().map(ToString::to_string).collect()
}

fn joined<T: ToString>(v: &[T]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn parse_vector(s: &str) -> Result<IntVector> {
    s.parse()
}

fn dispatch(cmd: &Command, guard: Option<u64>) -> Result<Report> {
    let plain = |input, result| {
        Ok(Report {
            input,
            result,
            table: None,
        })
    };
    match cmd {
        Command::Constants { n, eps, height } => {
            let report = bhconstants::constants(*n, *eps)?;
            let mut result = to_value(&report);
            if let Some(h) = height {
                let plan = bhconstants::plan_parameters(*n, *eps, *h)?;
                result["plan"] = to_value(&plan);
                result["plan"]["height_identity_error"] = json!(plan.height_identity_error());
                result["plan"]["radius_identity_error"] = json!(plan.radius_identity_error());
            }
            plain(json!({"n": n, "eps": eps, "H": height}), result)
        }
        Command::MaxGcdShift {
            a,
            height,
            allow_large_shift,
        } => {
            let v = parse_vector(a)?;
            let opts = shiftsearch::SearchOptions {
                allow_large_shift: *allow_large_shift,
                scan_limit: guard.unwrap_or(shiftsearch::DEFAULT_SCAN_LIMIT),
            };
            let res = shiftsearch::max_shifted_gcd_with(&v, *height, &opts)?;
            plain(
                json!({"a": strings(v.entries()), "H": height, "allow_large_shift": allow_large_shift}),
                to_value(&res),
            )
        }
        Command::ExponentSweep {
            n,
            eps,
            scale,
            trials,
            seed,
        } => {
            let records = shiftsearch::exponent_experiment(*n, *eps, *scale, *trials, *seed)?;
            let mut exps: Vec<f64> = records.iter().map(|r| r.exponent).collect();
            exps.sort_by(f64::total_cmp);
            let theta = bhconstants::theta(*n as u32, *eps)?;
            let rows = records
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    vec![
                        i.to_string(),
                        joined(&r.a),
                        r.height_bound.to_string(),
                        r.d.to_string(),
                        r.exponent.to_string(),
                    ]
                })
                .collect();
            Ok(Report {
                input: json!({"n": n, "eps": eps, "scale": scale, "trials": trials, "seed": seed}),
                result: json!({
                    "records": to_value(&records),
                    "median_exponent": median(&exps),
                    "theta": theta,
                    "predicted_exponent_floor": 1.0 + theta,
                }),
                table: Some(Table {
                    header: vec!["trial", "a", "H", "d", "exponent"],
                    rows,
                }),
            })
        }
        Command::GreedyCoprime { a } => {
            let v = parse_vector(a)?;
            let res = coprime::greedy_coprime(&v)?;
            plain(
                json!({"a": strings(v.entries())}),
                json!({
                    "h": res.shifts.entries(),
                    "shifted": strings(res.shifted.entries()),
                    "height_used": res.height_used,
                }),
            )
        }
        Command::GreedyAudit {
            n,
            samples,
            magnitude,
            seed,
        } => {
            let cap = guard.unwrap_or(coprime::DEFAULT_AUDIT_SIEVE_CAP);
            let audit = coprime::greedy_bound_audit(*samples, *n, *magnitude, *seed, cap)?;
            let rows = audit
                .rows
                .iter()
                .map(|r| {
                    let checks: Vec<bool> = r
                        .steps
                        .iter()
                        .filter_map(coprime::StepCheck::within_jacobsthal)
                        .collect();
                    vec![
                        r.sample.to_string(),
                        joined(&r.a),
                        joined(&r.h),
                        r.height_used.to_string(),
                        r.height_star.to_string(),
                        r.ratio.to_string(),
                        r.pairwise_coprime.to_string(),
                        checks.len().to_string(),
                        checks.iter().filter(|ok| !**ok).count().to_string(),
                    ]
                })
                .collect();
            Ok(Report {
                input: json!({"n": n, "samples": samples, "magnitude": magnitude, "seed": seed, "sieve_cap": cap}),
                result: to_value(&audit),
                table: Some(Table {
                    header: vec![
                        "sample",
                        "a",
                        "h",
                        "height_used",
                        "height_star",
                        "ratio",
                        "pairwise_coprime",
                        "jacobsthal_checks",
                        "jacobsthal_violations",
                    ],
                    rows,
                }),
            })
        }
        Command::LExact { a } | Command::EllExact { a } => {
            let v = parse_vector(a)?;
            let limit = guard.unwrap_or(coprime::DEFAULT_LEVEL_LIMIT);
            let res = if matches!(cmd, Command::LExact { .. }) {
                coprime::l_exact(&v, limit)?
            } else {
                coprime::ell_exact(&v, limit)?
            };
            plain(json!({"a": strings(v.entries())}), to_value(&res))
        }
        Command::CrtInstance { n, height } => {
            let inst = adversary::crt_hard_instance(
                *n,
                *height,
                guard.unwrap_or(adversary::DEFAULT_PRIME_LIMIT),
            )?;
            plain(json!({"n": n, "H": height}), to_value(&inst))
        }
        Command::VerifyInstance { instance } => {
            let text = if instance == "-" {
                std::io::read_to_string(std::io::stdin())
            } else {
                std::fs::read_to_string(instance)
            }
            .map_err(|e| domain(format!("cannot read {instance}: {e}")))?;
            let inst = parse_instance(&text)?;
            let cert = adversary::verify_hard_instance(
                &inst,
                guard.unwrap_or(adversary::DEFAULT_VERIFY_LIMIT),
            )?;
            plain(
                json!({"instance": instance, "n": inst.n, "H": inst.height_bound}),
                to_value(&cert),
            )
        }
        Command::GrowthAudit { n, heights } => {
            let rows = adversary::growth_audit(
                *n,
                heights,
                guard.unwrap_or(adversary::DEFAULT_PRIME_LIMIT),
            )?;
            let table = rows
                .iter()
                .map(|r| {
                    vec![
                        r.n.to_string(),
                        r.height_bound.to_string(),
                        r.primes.to_string(),
                        r.largest_prime.to_string(),
                        r.height_bits.to_string(),
                        r.log_height.to_string(),
                        opt(r.lower_bound_ratio),
                        r.growth_ratio.to_string(),
                    ]
                })
                .collect();
            Ok(Report {
                input: json!({"n": n, "Hs": heights}),
                result: json!({"rows": to_value(&rows)}),
                table: Some(Table {
                    header: vec![
                        "n",
                        "H",
                        "primes",
                        "largest_prime",
                        "height_bits",
                        "log_height",
                        "lower_bound_ratio",
                        "growth_ratio",
                    ],
                    rows: table,
                }),
            })
        }
        Command::CountR {
            a,
            h,
            method,
            table,
        } => {
            let v = parse_vector(a)?;
            let input = json!({"a": strings(v.entries()), "h": h, "method": format!("{method:?}").to_lowercase()});
            let brute =
                || linform::r_brute(&v, *h, guard.unwrap_or(linform::DEFAULT_R_BRUTE_LIMIT));
            let result = match method {
                CountMethod::Brute => json!({"R": brute()?.to_string()}),
                CountMethod::Mobius | CountMethod::Both => {
                    let rep = linform::count_report(
                        &v,
                        *h,
                        *table,
                        guard.unwrap_or(linform::DEFAULT_WORK_BUDGET),
                    )?;
                    let mut value = to_value(&rep);
                    if *method == CountMethod::Both {
                        let b = brute()?;
                        if b != rep.r {
                            return Err(Error::Invariant(format!(
                                "Moebius count {} != brute count {b}",
                                rep.r
                            )));
                        }
                        value["R_brute"] = json!(b.to_string());
                    }
                    value
                }
            };
            plain(input, result)
        }
        Command::BoundAudit {
            a,
            h,
            d,
            samples,
            seed,
        } => {
            let v = parse_vector(a)?;
            let ds = match (samples, seed) {
                (Some(k), Some(s)) => sample_moduli(&v, *h, *k, *s)?,
                _ if !d.is_empty() => d.clone(),
                _ => return Err(domain("bound-audit needs --d or --samples with --seed")),
            };
            let audit = linform::bound_audit(&v, *h, &ds)?;
            let rows = audit
                .rows
                .iter()
                .map(|r| {
                    vec![
                        r.d.to_string(),
                        r.u.to_string(),
                        r.squarefree.to_string(),
                        opt(r.asymptotic),
                        r.box_bound.to_string(),
                        opt(r.squarefree_bound),
                    ]
                })
                .collect();
            Ok(Report {
                input: json!({"a": strings(v.entries()), "h": h, "d": ds, "samples": samples, "seed": seed}),
                result: to_value(&audit),
                table: Some(Table {
                    header: vec![
                        "d",
                        "U_d",
                        "squarefree",
                        "asymptotic",
                        "box_bound",
                        "squarefree_bound",
                    ],
                    rows,
                }),
            })
        }
        Command::Converge { a, hs } => {
            let v = parse_vector(a)?;
            let rows =
                linform::convergence_sweep(&v, hs, guard.unwrap_or(linform::DEFAULT_WORK_BUDGET))?;
            let table = rows
                .iter()
                .map(|r| {
                    vec![
                        r.h.to_string(),
                        r.r.to_string(),
                        r.density.to_string(),
                        r.gap.to_string(),
                    ]
                })
                .collect();
            Ok(Report {
                input: json!({"a": strings(v.entries()), "hs": hs}),
                result: json!({"rows": to_value(&rows), "inverse_zeta2": linform::inverse_zeta2()}),
                table: Some(Table {
                    header: vec!["h", "R", "density", "gap"],
                    rows: table,
                }),
            })
        }
        Command::Jacobsthal { m } => {
            let g = jacobsthal(*m, guard.unwrap_or(DEFAULT_SIEVE_CAP))?;
            plain(json!({"m": m}), json!({"g": g}))
        }
    }
}

fn median(sorted: &[f64]) -> Option<f64> {
    let n = sorted.len();
    match n {
        0 => None,
        _ if n % 2 == 1 => Some(sorted[n / 2]),
        _ => Some(0.5 * (sorted[n / 2 - 1] + sorted[n / 2])),
    }
}

/// Moduli for a random bound audit: half from the range where the
/// asymptotic estimate applies, half from the whole truncation range.
pub fn sample_moduli(a: &IntVector, h: u64, count: usize, seed: u64) -> Result<Vec<u64>> {
    let top = (height(a) * a.len() * h)
        .to_u64()
        .ok_or_else(|| domain("n * H(a) * h must fit in 64 bits"))?
        .max(1);
    let small = (2 * h / (3 * a.len() as u64)).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|i| {
            if i % 2 == 0 {
                rng.gen_range(1..=small)
            } else {
                rng.gen_range(1..=top)
            }
        })
        .collect())
}

pub fn parse_instance(text: &str) -> Result<adversary::HardInstance> {
    // Accept either a bare instance or a full crt-instance document.
    let value: Value =
        serde_json::from_str(text).map_err(|e| domain(format!("invalid JSON: {e}")))?;
    let body = match value.get("result") {
        Some(r) if value.get("cmd").is_some() => r.clone(),
        _ => value,
    };
    serde_json::from_value(body).map_err(|e| domain(format!("invalid instance: {e}")))
}

fn render_csv(table: &Table) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Invariant(format!("csv encoding failed: {e}"));
    w.write_record(&table.header).map_err(io)?;
    for row in &table.rows {
        w.write_record(row).map_err(io)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Invariant(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv of utf-8 fields"))
}

/// Runs a parsed command line and returns the emitted document.
pub fn run(cli: &Cli) -> Result<String> {
    let start = Instant::now();
    let report = dispatch(&cli.command, cli.guard)?;
    match cli.format {
        Format::Csv => {
            let table = report
                .table
                .as_ref()
                .ok_or_else(|| domain(format!("{} has no csv output", cli.command.name())))?;
            render_csv(table)
        }
        Format::Json => {
            let elapsed_ms = if cli.timing {
                start.elapsed().as_millis() as u64
            } else {
                0
            };
            let doc = json!({
                "cmd": cli.command.name(),
                "input": report.input,
                "result": report.result,
                "elapsed_ms": elapsed_ms,
            });
            let mut text = serde_json::to_string_pretty(&doc).expect("JSON values serialize");
            text.push('\n');
            Ok(text)
        }
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Domain(_) => 2,
        Error::Resource(_) => 3,
        Error::Numeric(_) | Error::Invariant(_) => 1,
    }
}

/// Outcome of a full invocation, as the binary would produce it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Execution {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn execute<I, T>(args: I) -> Execution
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            return if code == 0 {
                Execution {
                    code,
                    stdout: text,
                    stderr: String::new(),
                }
            } else {
                Execution {
                    code: 2,
                    stdout: String::new(),
                    stderr: text,
                }
            };
        }
    };
    match run(&cli) {
        Ok(stdout) => Execution {
            code: 0,
            stdout,
            stderr: String::new(),
        },
        Err(e) => Execution {
            code: exit_code(&e),
            stdout: String::new(),
            stderr: format!("shiftgcd {}: {e}\n", cli.command.name()),
        },
    }
}
