//! End-to-end reproduction of the Cullen/Woodall results: lifting fixtures
//! and valuation campaigns, the two nu_2 scans, the enumeration, and a
//! report bundle comparing everything with the published data.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use num_bigint::{BigInt, BigUint};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::pow10;
use crate::bounds::{audit, BoundReport};
use crate::error::{Error, Result};
use crate::lifting::{find_residues, lift, max_valuation_below, LiftTask, Target};
use crate::recurrence::RecurrenceSpec;
use crate::reference::{self as refdata, IdentityCheck, SetDiff};
use crate::scan::{unit_factorial_shifts, unit_shifts, SUnitBox, Scan, ScanOptions, ScanReport};
use crate::solve::{solve_factorial_sunit, Family, SolveReport};
use crate::valuation::nu_factorial;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// reduced ranges: m <= 50, caps 60/50/40
    pub smoke: bool,
    pub workers: usize,
    pub width: u32,
    /// cap on the exponent of 2 in the enumeration box; 0 leaves 2 out
    pub two_cap: u32,
    pub checkpoint_dir: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            smoke: false,
            workers: 1,
            width: 32,
            two_cap: 130,
            checkpoint_dir: None,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.workers == 0 {
            return Err(Error::ParameterOutOfRange("workers must be >= 1".into()));
        }
        if !matches!(self.width, 24 | 32 | 64) {
            return Err(Error::ParameterOutOfRange(format!(
                "width {} not in {{24, 32, 64}}",
                self.width
            )));
        }
        Ok(())
    }

    fn m_hi(&self) -> u64 {
        if self.smoke {
            50
        } else {
            500
        }
    }

    fn odd_caps(&self) -> [u32; 3] {
        if self.smoke {
            [60, 50, 40]
        } else {
            refdata::SCAN_B_CAPS
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiftCheck {
    pub p: u64,
    pub t: i64,
    pub n0: u64,
    pub k: u32,
    pub printed: String,
    pub computed: String,
    pub typesetting_artifact: bool,
    pub certified: bool,
    pub matches: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidueCheck {
    pub p: u64,
    pub t: i64,
    pub published: Vec<u64>,
    pub computed: Vec<u64>,
    pub matches: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LegendreCheck {
    pub m: u64,
    pub p: u64,
    pub published: u64,
    pub computed: u64,
    pub matches: bool,
}

/// `nu_p < cap` for every `n < 10^58`, judged by the certified bound `k <= cap`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimCheck {
    pub label: String,
    pub p: u64,
    pub cap: u32,
    /// largest certified `k` over the targets of this claim
    pub k: u32,
    /// target attaining `k`
    pub worst_target: String,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanCheck {
    pub claim: String,
    pub report: ScanReport,
    /// the same scan with `s = 1` left out
    pub excluding_unit: Option<ScanReport>,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveCheck {
    pub report: SolveReport,
    pub value_set_diff: SetDiff,
    pub table: Vec<IdentityCheck>,
    pub headline: String,
    pub headline_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureOutcome {
    pub name: String,
    pub matches: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bundle {
    pub config: PipelineConfig,
    pub lifts: Vec<LiftCheck>,
    pub residues: Vec<ResidueCheck>,
    pub legendre: Vec<LegendreCheck>,
    pub pure_claims: Vec<ClaimCheck>,
    pub case_claims: Vec<ClaimCheck>,
    pub scan_a: ScanCheck,
    pub scan_b: ScanCheck,
    pub solve: SolveCheck,
    pub bounds: BoundReport,
    pub fixtures: Vec<FixtureOutcome>,
}

impl Bundle {
    pub fn all_match(&self) -> bool {
        self.fixtures.iter().all(|f| f.matches)
    }

    /// 0 if every fixture matches, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.all_match() {
            0
        } else {
            1
        }
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{}", self.solve.headline);
        let _ = writeln!(s);
        let _ = writeln!(s, "fixtures:");
        for f in &self.fixtures {
            let mark = if f.matches { "ok  " } else { "DIFF" };
            let _ = writeln!(s, "  [{mark}] {}: {}", f.name, f.detail);
        }
        let _ = writeln!(s);
        let _ = writeln!(s, "solutions:");
        let mut by_value: Vec<(&BigInt, Vec<String>)> = Vec::new();
        for r in &self.solve.report.records {
            let label = if r.degenerate {
                format!("{}*", r.label())
            } else {
                r.label()
            };
            match by_value.last_mut() {
                Some((v, labels)) if *v == &r.value => labels.push(label),
                _ => by_value.push((&r.value, vec![label])),
            }
        }
        for (v, labels) in by_value {
            let _ = writeln!(s, "  {v:>6} = {}", labels.join(" = "));
        }
        let _ = writeln!(s, "  (* degenerate)");
        s
    }

    /// Writes the bundle directory; only `manifest.json` carries a timestamp.
    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("bundle.json"), json(self))?;
        fs::write(dir.join("lifts.json"), json(&self.lifts))?;
        fs::write(
            dir.join("valuations.json"),
            json(&(&self.residues, &self.legendre, &self.pure_claims, &self.case_claims)),
        )?;
        fs::write(dir.join("scan_a.json"), json(&self.scan_a))?;
        fs::write(dir.join("scan_b.json"), json(&self.scan_b))?;
        fs::write(dir.join("solutions.json"), json(&self.solve))?;
        fs::write(dir.join("solutions.csv"), self.solve.report.to_csv())?;
        fs::write(dir.join("bounds.json"), json(&self.bounds))?;
        fs::write(dir.join("summary.txt"), self.summary())?;
        let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        let manifest = serde_json::json!({
            "timestamp": stamp,
            "exit_code": self.exit_code(),
            "files": ["bundle.json", "lifts.json", "valuations.json", "scan_a.json",
                      "scan_b.json", "solutions.json", "solutions.csv", "bounds.json", "summary.txt"],
        });
        fs::write(dir.join("manifest.json"), json(&manifest))
    }
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

pub fn check_lifts() -> Result<Vec<LiftCheck>> {
    refdata::LIFT_FIXTURES
        .par_iter()
        .map(|f| {
            let res = lift(&LiftTask {
                p: f.p,
                target: Target::int(f.t),
                n0: f.n0,
                depth: f.k,
            })?;
            let computed = res.n_final.to_string();
            Ok(LiftCheck {
                p: f.p,
                t: f.t,
                n0: f.n0,
                k: f.k,
                printed: f.printed.to_string(),
                matches: computed == f.normalized(),
                computed,
                typesetting_artifact: f.has_typesetting_artifact(),
                certified: res.verify(),
            })
        })
        .collect()
}

pub fn check_residues() -> Result<Vec<ResidueCheck>> {
    refdata::RESIDUE_SETS
        .iter()
        .map(|&(p, t, set)| {
            let computed = find_residues(p, &Target::int(t))?;
            Ok(ResidueCheck {
                p,
                t,
                published: set.to_vec(),
                matches: computed == set,
                computed,
            })
        })
        .collect()
}

pub fn check_legendre() -> Vec<LegendreCheck> {
    refdata::LEGENDRE
        .iter()
        .map(|&(m, p, e)| {
            let computed = nu_factorial(m, p);
            LegendreCheck {
                m,
                p,
                published: e,
                computed,
                matches: computed == e,
            }
        })
        .collect()
}

fn limit() -> BigUint {
    pow10(refdata::LIMIT_EXPONENT)
}

pub fn check_pure_claims() -> Result<Vec<ClaimCheck>> {
    let limit = limit();
    refdata::PURE_CLAIMS
        .par_iter()
        .map(|&(p, t, cap)| {
            let target = Target::int(t);
            let b = max_valuation_below(p, &target, &limit)?;
            let family = if t == 0 { "C_n" } else { "W_n" };
            Ok(ClaimCheck {
                label: format!("nu_{p}({family}) < {cap}"),
                p,
                cap,
                k: b.k,
                worst_target: target.to_string(),
                holds: b.k <= cap,
            })
        })
        .collect()
}

pub fn check_case_claims(m_range: (u64, u64)) -> Result<Vec<ClaimCheck>> {
    let limit = limit();
    let jobs: Vec<(usize, u64, u32)> = refdata::CASE_CLAIMS
        .iter()
        .enumerate()
        .flat_map(|(i, c)| c.caps.iter().map(move |&(p, cap)| (i, p, cap)))
        .collect();
    jobs.par_iter()
        .map(|&(i, p, cap)| {
            let case = &refdata::CASE_CLAIMS[i];
            let worst = (m_range.0..=m_range.1)
                .into_par_iter()
                .map(|m| {
                    let target = Target::shifted(case.family.base_shift(), case.eps, m);
                    let b = max_valuation_below(p, &target, &limit)?;
                    Ok((b.k, std::cmp::Reverse(m), target))
                })
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .max_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)))
                .expect("nonempty m range");
            Ok(ClaimCheck {
                label: format!("{}: nu_{p} < {cap}", case.label),
                p,
                cap,
                k: worst.0,
                worst_target: worst.2.to_string(),
                holds: worst.0 <= cap,
            })
        })
        .collect()
}

fn run_scan(
    config: &PipelineConfig,
    sbox: &SUnitBox,
    shifts: &[crate::scan::Shift],
    name: &str,
    exclude_unit: bool,
) -> Result<ScanReport> {
    let options = ScanOptions {
        width: config.width,
        workers: config.workers,
        exclude_unit,
        ..Default::default()
    };
    let mut scan = Scan::new(sbox, shifts, options)?;
    if let Some(dir) = &config.checkpoint_dir {
        fs::create_dir_all(dir).map_err(|e| Error::Checkpoint(e.to_string()))?;
        scan = scan.with_checkpoint(dir.join(format!("{name}.ckpt.json")));
    }
    scan.run()
}

pub fn scan_a(config: &PipelineConfig) -> Result<ScanCheck> {
    let sbox = SUnitBox::new(vec![3, 5, 7], refdata::SCAN_A_CAPS.to_vec())?;
    let report = run_scan(config, &sbox, &unit_shifts(), "scan_a", false)?;
    Ok(ScanCheck {
        claim: format!("max* nu_2(3^a 5^b 7^c +- 1) <= {}", refdata::SCAN_A_MAX),
        holds: report.max_val <= refdata::SCAN_A_MAX,
        report,
        excluding_unit: None,
    })
}

pub fn scan_b(config: &PipelineConfig) -> Result<ScanCheck> {
    let sbox = SUnitBox::new(vec![3, 5, 7], config.odd_caps().to_vec())?;
    let shifts = unit_factorial_shifts(refdata::SCAN_B_M_RANGE.0, config.m_hi());
    let report = run_scan(config, &sbox, &shifts, "scan_b", false)?;
    let excluding_unit = run_scan(config, &sbox, &shifts, "scan_b_excl", true)?;
    Ok(ScanCheck {
        claim: format!("max* nu_2(3^a 5^b 7^c +- 1 +- m!) < {}", refdata::SCAN_B_BOUND),
        holds: report.max_val < refdata::SCAN_B_BOUND,
        report,
        excluding_unit: Some(excluding_unit),
    })
}

pub fn enumerate(config: &PipelineConfig) -> Result<SolveCheck> {
    let caps = config.odd_caps();
    let (primes, caps) = if config.two_cap > 0 {
        (vec![2, 3, 5, 7], vec![config.two_cap, caps[0], caps[1], caps[2]])
    } else {
        (vec![3, 5, 7], caps.to_vec())
    };
    let sbox = SUnitBox::new(primes, caps)?;
    let report = solve_factorial_sunit(
        &[Family::Cullen, Family::Woodall],
        refdata::SOLVE_N_MAX,
        (refdata::SOLVE_M_RANGE.0, config.m_hi()),
        &sbox,
    )?;
    let headline_holds = report.max_n().map(|r| (r.n, r.label())) == Some((refdata::HEADLINE_N, "C_8-4!".into()))
        && report.max_m().map(|r| (r.m, r.label())) == Some((refdata::HEADLINE_M, "W_4+7!".into()));
    Ok(SolveCheck {
        value_set_diff: refdata::compare_value_set(&report.values),
        table: refdata::check_table(&report),
        headline: report.headline(),
        headline_holds,
        report,
    })
}

fn outcome(name: &str, matches: bool, detail: String) -> FixtureOutcome {
    FixtureOutcome {
        name: name.to_string(),
        matches,
        detail,
    }
}

/// Sizes the global rayon pool; later calls keep the first size.
pub fn init_global_pool(workers: usize) {
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build_global();
}

/// Runs every step, reporting progress through `log`.
pub fn reproduce(config: &PipelineConfig, log: &mut (dyn FnMut(&str) + Send)) -> Result<Bundle> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Domain(e.to_string()))?;
    pool.install(|| reproduce_in_pool(config, log))
}

fn reproduce_in_pool(config: &PipelineConfig, log: &mut (dyn FnMut(&str) + Send)) -> Result<Bundle> {
    let mut step = |name: &str, t: Instant| log(&format!("{name} ({:.2?})", t.elapsed()));

    let t = Instant::now();
    let lifts = check_lifts()?;
    let residues = check_residues()?;
    let legendre = check_legendre();
    step("lift constants and residues", t);

    let t = Instant::now();
    let pure_claims = check_pure_claims()?;
    let case_claims = check_case_claims((refdata::CASE_M_RANGE.0, config.m_hi()))?;
    step("valuation campaigns", t);

    let t = Instant::now();
    let scan_a = scan_a(config)?;
    step("scan A", t);
    let t = Instant::now();
    let scan_b = scan_b(config)?;
    step("scan B", t);

    let t = Instant::now();
    let solve = enumerate(config)?;
    step("enumeration", t);

    let bounds = audit(&RecurrenceSpec::cullen(), 7, 1)?;

    let mut fixtures = Vec::new();
    for l in &lifts {
        let name = format!("lift(p={}, t={}, n0={}, k={})", l.p, l.t, l.n0, l.k);
        let detail = if l.matches {
            if l.typesetting_artifact {
                "matches after removing whitespace"
            } else {
                "matches"
            }
            .to_string()
        } else {
            format!(
                "printed {} computed {}",
                l.printed.split_whitespace().collect::<String>(),
                l.computed
            )
        };
        fixtures.push(outcome(&name, l.matches && l.certified, detail));
    }
    for r in &residues {
        fixtures.push(outcome(
            &format!("residues(p={}, t={})", r.p, r.t),
            r.matches,
            format!("{:?}", r.computed),
        ));
    }
    for l in &legendre {
        fixtures.push(outcome(
            &format!("nu_{}({}!)", l.p, l.m),
            l.matches,
            l.computed.to_string(),
        ));
    }
    for c in pure_claims.iter().chain(&case_claims) {
        fixtures.push(outcome(
            &c.label,
            c.holds,
            format!("certified k = {} at t = {}", c.k, c.worst_target),
        ));
    }
    for s in [&scan_a, &scan_b] {
        let mut detail = format!("max = {}", s.report.max_val);
        if let Some(am) = &s.report.argmax {
            let _ = write!(detail, " at {:?} {}", am.exponents, am.shift);
        }
        if let Some(ex) = &s.excluding_unit {
            let _ = write!(detail, "; without s = 1: max = {}", ex.max_val);
        }
        fixtures.push(outcome(&s.claim, s.holds, detail));
    }
    if !config.smoke {
        let d = &solve.value_set_diff;
        fixtures.push(outcome(
            "intersection set",
            d.is_empty(),
            format!(
                "missing {:?}, extra {:?}",
                d.missing,
                d.extra.iter().map(|v| v.to_string()).collect::<Vec<_>>()
            ),
        ));
        for c in &solve.table {
            let detail = format!(
                "printed {} = {}, actual {}, degenerate {:?}",
                c.printed_value, c.claimed, c.actual, c.record_degenerate
            );
            fixtures.push(outcome(&format!("table {}", c.identity), c.ok, detail));
        }
    }
    fixtures.push(outcome("headline", solve.headline_holds, solve.headline.clone()));

    Ok(Bundle {
        config: config.clone(),
        lifts,
        residues,
        legendre,
        pure_claims,
        case_claims,
        scan_a,
        scan_b,
        solve,
        bounds,
        fixtures,
    })
}
