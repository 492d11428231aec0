//! `cwfact`: command-line access to the lifting, scan, enumeration and
//! bound evaluators, plus the full `reproduce` pipeline.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use cwfact_core::bounds::{self, audit};
use cwfact_core::lifting::{find_residues, lift, max_valuation_below, LiftTask, Target};
use cwfact_core::pipeline::{reproduce, PipelineConfig};
use cwfact_core::recurrence::RecurrenceSpec;
use cwfact_core::scan::{unit_factorial_shifts, SUnitBox, Scan, ScanOptions, Shift};
use cwfact_core::solve::{solve_factorial_sunit, Family};

/// Exit status for a computation that diverges from a published value.
const EXIT_DIVERGENCE: u8 = 1;
/// Exit status for invalid arguments or parameters.
const EXIT_USAGE: u8 = 2;
/// Exit status for I/O and other runtime failures.
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "cwfact",
    version,
    about = "Factorial/S-unit equations for Cullen, Woodall and double-root recurrences"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Print machine-readable JSON
    #[arg(long, global = true)]
    json: bool,
    /// Write JSON output to this file (a directory for `reproduce`)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads
    #[arg(long, global = true, env = "CWFACT_WORKERS", default_value_t = 1)]
    workers: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Lift a residue class to depth K
    Lift {
        #[arg(long)]
        prime: u64,
        /// Target t: an integer, `m!`, `-m!`, `a+m!` or `a-m!`
        #[arg(long, allow_hyphen_values = true)]
        target: Target,
        #[arg(long)]
        residue: u64,
        #[arg(long)]
        depth: u32,
    },
    /// Residues n0 in [0, p(p-1)) with p | n0 2^n0 + 1 - t
    Residues {
        #[arg(long)]
        prime: u64,
        #[arg(long, allow_hyphen_values = true)]
        target: Target,
    },
    /// Least k with nu_p(n 2^n + 1 - t) < k for every n below the limit
    Valbound {
        #[arg(long)]
        prime: u64,
        #[arg(long, allow_hyphen_values = true)]
        target: Target,
        /// An integer or `1eN`
        #[arg(long, value_parser = parse_limit)]
        limit: BigUint,
    },
    /// max* nu_2(s + delta) over an S-unit box and a list of shifts
    ScanNu2 {
        #[arg(long, value_delimiter = ',', required = true)]
        primes: Vec<u64>,
        #[arg(long, value_delimiter = ',', required = true)]
        caps: Vec<u32>,
        /// `pm1` for +-1 (combined with --mrange for +-1 +- m!), or a comma-separated integer list
        #[arg(long, default_value = "pm1", allow_hyphen_values = true)]
        shifts: String,
        /// Factorial range `lo,hi`
        #[arg(long, value_parser = parse_range)]
        mrange: Option<(u64, u64)>,
        #[arg(long, default_value_t = 32)]
        width: u32,
        /// Leave out the cell s = 1
        #[arg(long)]
        exclude_unit: bool,
        /// Checkpoint file; an existing checkpoint is resumed
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Enumerate u_n + eps m! = +-s with s in the box
    Solve {
        #[arg(long, value_delimiter = ',', default_value = "cullen,woodall")]
        families: Vec<String>,
        #[arg(long, default_value_t = 30)]
        nmax: u64,
        #[arg(long, value_parser = parse_range, default_value = "2,500")]
        mrange: (u64, u64),
        #[arg(long, value_delimiter = ',', default_value = "3,5,7")]
        primes: Vec<u64>,
        #[arg(long, value_delimiter = ',', default_value = "130,100,80")]
        caps: Vec<u32>,
        /// Cap on the exponent of 2; 0 leaves the prime 2 out
        #[arg(long, default_value_t = 130)]
        two_cap: u32,
    },
    /// Bound report and audit trail for a recurrence
    Bounds {
        /// `cullen` or `woodall`
        #[arg(long, conflicts_with_all = ["r", "u"])]
        preset: Option<String>,
        /// Recurrence coefficients r1,r2,r3
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, requires = "u")]
        r: Option<Vec<i64>>,
        /// Initial terms u0,u1,u2
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, requires = "r")]
        u: Option<Vec<i64>>,
        /// Largest prime of the prime set
        #[arg(long, default_value_t = 7)]
        pk: u64,
        /// Bound K on the factorial coefficient
        #[arg(long = "K", default_value_t = 1)]
        k_coef: u64,
    },
    /// Lower bound for log |Lambda| (Matveev)
    Matveev {
        #[command(flatten)]
        params: MatveevArgs,
    },
    /// Upper bound for the valuation of Lambda (Yu)
    Yu {
        #[command(flatten)]
        params: YuArgs,
    },
    /// Run every campaign and compare with the published data
    Reproduce {
        /// Reduced ranges (m <= 50, caps 60/50/40)
        #[arg(long)]
        smoke: bool,
        #[arg(long, default_value_t = 32)]
        width: u32,
        #[arg(long, default_value_t = 130)]
        two_cap: u32,
        /// Directory for scan checkpoints
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct MatveevArgs {
    /// JSON file with fields l, d, a, b_star
    #[arg(long, conflicts_with_all = ["l", "d", "a", "b_star"])]
    #[serde(skip)]
    params: Option<PathBuf>,
    #[arg(long)]
    l: Option<u32>,
    #[arg(long = "D")]
    d: Option<u32>,
    #[arg(long, value_delimiter = ',')]
    a: Option<Vec<f64>>,
    #[arg(long)]
    b_star: Option<f64>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct YuArgs {
    /// JSON file with fields l, d, p, e, f, h, b_star
    #[arg(long, conflicts_with_all = ["l", "d", "p", "e", "f", "h", "b_star"])]
    #[serde(skip)]
    params: Option<PathBuf>,
    #[arg(long)]
    l: Option<u32>,
    #[arg(long = "D")]
    d: Option<u32>,
    #[arg(long)]
    p: Option<u64>,
    /// Ramification index (default 1)
    #[arg(long)]
    e: Option<u32>,
    /// Residue degree (default 1)
    #[arg(long)]
    f: Option<u32>,
    #[arg(long, value_delimiter = ',')]
    h: Option<Vec<f64>>,
    #[arg(long)]
    b_star: Option<f64>,
}

fn parse_limit(s: &str) -> Result<BigUint, String> {
    let s = s.trim();
    if let Some((mant, exp)) = s.split_once(['e', 'E']) {
        let mant: BigUint = mant.parse().map_err(|e| format!("bad limit {s:?}: {e}"))?;
        let exp: u32 = exp.parse().map_err(|e| format!("bad limit {s:?}: {e}"))?;
        return Ok(mant * BigUint::from(10u32).pow(exp));
    }
    s.parse().map_err(|e| format!("bad limit {s:?}: {e}"))
}

fn parse_range(s: &str) -> Result<(u64, u64), String> {
    let (lo, hi) = s.split_once(',').ok_or_else(|| format!("expected lo,hi, got {s:?}"))?;
    let lo = lo.trim().parse().map_err(|e| format!("bad range {s:?}: {e}"))?;
    let hi = hi.trim().parse().map_err(|e| format!("bad range {s:?}: {e}"))?;
    if lo > hi {
        return Err(format!("empty range {s:?}"));
    }
    Ok((lo, hi))
}

/// Errors that map to the usage exit status.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage<T>(r: cwfact_core::Result<T>) -> anyhow::Result<T> {
    r.map_err(|e| Usage(e.to_string()).into())
}

fn emit<T: Serialize>(common: &Common, value: &T, text: impl FnOnce() -> String) -> anyhow::Result<()> {
    let json = serde_json::to_string_pretty(value)?;
    if let Some(path) = &common.out {
        fs::write(path, &json).with_context(|| format!("writing {}", path.display()))?;
    }
    if common.json {
        say(&json);
    } else {
        say(&text());
    }
    Ok(())
}

/// Prints a line; a closed stdout (e.g. piped into `head`) is not an error.
fn say(s: &str) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout().lock(), "{s}");
}

fn shifts_from(spec: &str, mrange: Option<(u64, u64)>) -> anyhow::Result<Vec<Shift>> {
    match (spec, mrange) {
        ("pm1", None) => Ok(cwfact_core::scan::unit_shifts()),
        ("pm1", Some((lo, hi))) => Ok(unit_factorial_shifts(lo, hi)),
        (list, None) => list
            .split(',')
            .map(|x| {
                x.trim()
                    .parse::<i64>()
                    .map(Shift::constant)
                    .map_err(|e| Usage(format!("bad shift {x:?}: {e}")).into())
            })
            .collect(),
        (_, Some(_)) => Err(Usage("--mrange combines only with --shifts pm1".into()).into()),
    }
}

fn read_params<T: for<'de> Deserialize<'de>>(path: &Path) -> anyhow::Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| Usage(format!("{}: {e}", path.display())).into())
}

fn required<T>(v: Option<T>, name: &str) -> anyhow::Result<T> {
    v.ok_or_else(|| Usage(format!("missing --{name}")).into())
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    let common = cli.common;
    if common.workers == 0 {
        bail!(Usage("--workers must be >= 1".into()));
    }
    cwfact_core::pipeline::init_global_pool(common.workers);
    match cli.command {
        Command::Lift {
            prime,
            target,
            residue,
            depth,
        } => {
            let res = usage(lift(&LiftTask {
                p: prime,
                target,
                n0: residue,
                depth,
            }))?;
            emit(&common, &res, || {
                let digits: Vec<String> = res.digits.iter().map(u64::to_string).collect();
                format!("digits: [{}]\nn_final: {}", digits.join(", "), res.n_final)
            })?;
        }
        Command::Residues { prime, target } => {
            let res = usage(find_residues(prime, &target))?;
            emit(&common, &res, || format!("{res:?}"))?;
        }
        Command::Valbound { prime, target, limit } => {
            let b = usage(max_valuation_below(prime, &target, &limit))?;
            emit(&common, &b, || {
                let mut s = format!("nu_{prime}(n 2^n + 1 - ({target})) < {} for all n < {limit}", b.k);
                for w in &b.witnesses {
                    s.push_str(&format!(
                        "\n  n0 = {}: exit depth {}, n_{} = {}",
                        w.n0, w.exit_depth, b.k, w.representative
                    ));
                }
                s
            })?;
        }
        Command::ScanNu2 {
            primes,
            caps,
            shifts,
            mrange,
            width,
            exclude_unit,
            checkpoint,
        } => {
            let sbox = usage(SUnitBox::new(primes, caps))?;
            if sbox.primes().contains(&2) {
                bail!(Usage("scan boxes take odd primes only".into()));
            }
            let shifts = shifts_from(&shifts, mrange)?;
            let options = ScanOptions {
                width,
                workers: common.workers,
                exclude_unit,
                ..Default::default()
            };
            let mut scan = usage(Scan::new(&sbox, &shifts, options))?;
            if let Some(path) = checkpoint {
                scan = scan.with_checkpoint(path);
            }
            let report = scan.run().map_err(|e| match e {
                cwfact_core::Error::Checkpoint(_) => anyhow::anyhow!(e),
                other => Usage(other.to_string()).into(),
            })?;
            emit(&common, &report, || {
                let at = report.argmax.as_ref().map_or("-".to_string(), |a| {
                    format!("exponents {:?}, shift {}", a.exponents, a.shift)
                });
                format!(
                    "max nu_2 = {} at {at}\nscanned {}, skipped (zero) {}, excluded {}, escalations {}",
                    report.max_val,
                    report.count_scanned,
                    report.count_skipped_zero,
                    report.count_excluded_unit,
                    report.width_escalations
                )
            })?;
        }
        Command::Solve {
            families,
            nmax,
            mrange,
            primes,
            caps,
            two_cap,
        } => {
            let families: Vec<Family> = families
                .iter()
                .map(|f| Family::parse(f).ok_or_else(|| Usage(format!("unknown family {f:?}"))))
                .collect::<Result<_, _>>()?;
            if primes.len() != caps.len() {
                bail!(Usage(format!("{} primes but {} caps", primes.len(), caps.len())));
            }
            let (mut p, mut c) = (primes, caps);
            if two_cap > 0 && !p.contains(&2) {
                p.insert(0, 2);
                c.insert(0, two_cap);
            }
            let sbox = usage(SUnitBox::new(p, c))?;
            let report = usage(solve_factorial_sunit(&families, nmax, mrange, &sbox))?;
            if let Some(path) = &common.out {
                let csv = path.with_extension("csv");
                fs::write(&csv, report.to_csv()).with_context(|| format!("writing {}", csv.display()))?;
            }
            emit(&common, &report, || {
                let mut s = String::new();
                for r in &report.records {
                    s.push_str(&format!("{r}\n"));
                }
                let values: Vec<String> = report.values.iter().map(|v| v.to_string()).collect();
                s.push_str(&format!("values: {{{}}}\n{}", values.join(","), report.headline()));
                s
            })?;
        }
        Command::Bounds {
            preset,
            r,
            u,
            pk,
            k_coef,
        } => {
            let spec = match (preset, r, u) {
                (Some(name), _, _) => {
                    RecurrenceSpec::preset(&name).ok_or_else(|| Usage(format!("unknown preset {name:?}")))?
                }
                (None, Some(r), Some(u)) => {
                    let r: [i64; 3] = r.try_into().map_err(|_| Usage("--r takes three values".into()))?;
                    let u: [i64; 3] = u.try_into().map_err(|_| Usage("--u takes three values".into()))?;
                    RecurrenceSpec::new(r, u)
                }
                _ => RecurrenceSpec::cullen(),
            };
            usage(cwfact_core::derive_closed_form(&spec))?;
            let rep = usage(audit(&spec, pk, k_coef))?;
            emit(&common, &rep, || {
                let mut s = format!(
                    "X = {}, Y = {}\nlog n < {} (n < 10^{})\nu_n = 0 forces n < {:.2}\npi(X) = {}, 1.25X/log X = {:.3}, log M(X) = {:.3}\n",
                    rep.x,
                    rep.y,
                    rep.log_n_bound,
                    rep.decimal_exponent,
                    rep.zero_bound,
                    rep.prime_count.pi,
                    rep.prime_count.pi_upper,
                    rep.prime_count.m_log
                );
                s.push_str("audit:\n");
                for e in &rep.audit {
                    let cmp = match (e.reference, e.holds) {
                        (Some(r), Some(h)) => format!(" vs rounded {r:.4e} [{}]", if h { "holds" } else { "FAILS" }),
                        _ => String::new(),
                    };
                    s.push_str(&format!("  {}: {:.6e}{cmp}\n", e.name, e.value));
                }
                s
            })?;
        }
        Command::Matveev { params } => {
            let p = match &params.params {
                Some(path) => read_params::<MatveevArgs>(path)?,
                None => params,
            };
            let a = required(p.a, "a")?;
            let l = p.l.unwrap_or(a.len() as u32);
            let v = usage(bounds::matveev_log_lower(
                l,
                p.d.unwrap_or(1),
                &a,
                required(p.b_star, "b-star")?,
            ))?;
            emit(&common, &serde_json::json!({ "log_lower": v }), || {
                format!("log |Lambda| > {v:.6e}")
            })?;
        }
        Command::Yu { params } => {
            let p = match &params.params {
                Some(path) => read_params::<YuArgs>(path)?,
                None => params,
            };
            let h = required(p.h, "h")?;
            let l = p.l.unwrap_or(h.len() as u32);
            let v = usage(bounds::yu_valuation_upper(
                l,
                p.d.unwrap_or(1),
                required(p.p, "p")?,
                p.e.unwrap_or(1),
                p.f.unwrap_or(1),
                &h,
                required(p.b_star, "b-star")?,
            ))?;
            emit(&common, &serde_json::json!({ "nu_upper": v }), || {
                format!("nu(Lambda) < {v:.6e}")
            })?;
        }
        Command::Reproduce {
            smoke,
            width,
            two_cap,
            checkpoint,
        } => {
            let config = PipelineConfig {
                smoke,
                workers: common.workers,
                width,
                two_cap,
                checkpoint_dir: checkpoint,
            };
            usage(config.validate())?;
            let bundle = reproduce(&config, &mut |msg: &str| eprintln!("{msg}")).map_err(|e| anyhow::anyhow!(e))?;
            if let Some(dir) = &common.out {
                bundle
                    .write(dir)
                    .with_context(|| format!("writing {}", dir.display()))?;
            }
            if common.json {
                say(&serde_json::to_string_pretty(&bundle)?);
            } else {
                say(bundle.summary().trim_end());
            }
            return Ok(bundle.exit_code() as u8);
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(EXIT_DIVERGENCE),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Usage>().is_some() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::from(EXIT_RUNTIME)
            }
        }
    }
}
