//! Evaluators for the explicit bounds: the height `X` and its endpoint
//! `n < e^{12X}`, the zero/growth/valuation bounds for `u_n`, the
//! `x / (log x)^s` inversion, and parameterized Matveev and Yu bounds.
//!
//! All logarithms are natural. Evaluators return numbers; the [`audit`]
//! trail pairs each evaluation with the rounded constant it is compared to.

use std::collections::BTreeMap;
use std::f64::consts::E;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::arith::{is_prime, pow10, primes_up_to};
use crate::error::{Error, Result};
use crate::recurrence::RecurrenceSpec;

/// `(X, Y)` with `X = max(|u_i|, |r_i|, p_k, K, 11)` and `Y = max(|r_i|, |u_i|)`.
pub fn compute_xy(spec: &RecurrenceSpec, p_k: u64, k_coef: u64) -> (i64, i64) {
    let y = spec.height();
    let x = y.max(p_k as i64).max(k_coef as i64).max(11);
    (x, y)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem2Bound {
    /// `log n < 12 X`
    pub log_bound: f64,
    /// least `e` with `10^e > e^{12X}`
    pub decimal_exponent: u32,
    pub decimal_threshold: BigUint,
}

pub fn theorem2_bound(x: i64) -> Result<Theorem2Bound> {
    if x < 11 {
        return Err(Error::Domain(format!("X = {x} < 11")));
    }
    let log_bound = 12.0 * x as f64;
    let decimal_exponent = (log_bound / std::f64::consts::LN_10).floor() as u32 + 1;
    Ok(Theorem2Bound {
        log_bound,
        decimal_exponent,
        decimal_threshold: pow10(decimal_exponent),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaBounds {
    /// `u_n = 0` forces `n < 39 Y log Y`
    pub zero_bound: f64,
    /// the growth bounds below assume `n > Y^8`
    pub growth_applies: bool,
    /// `log(|beta|^n / (2 Y^3))`, the lower bound for `log |u_n|` when `|beta| > |alpha|`
    pub log_lower_beta: f64,
    /// `log(n |alpha|^n / (6 Y^3))`, the same when `|alpha| > |beta|`
    pub log_lower_alpha: f64,
    /// `1.2e12 (p / log p)(log p + log Y)(log n)^2`
    pub nu_upper: f64,
}

pub fn zero_bound(y: i64) -> Result<f64> {
    if y < 3 {
        return Err(Error::Domain(format!("Y = {y} < 3")));
    }
    let y = y as f64;
    Ok(39.0 * y * y.ln())
}

pub fn nu_upper(y: i64, p: u64, log_n: f64) -> Result<f64> {
    if y < 3 {
        return Err(Error::Domain(format!("Y = {y} < 3")));
    }
    let lp = (p as f64).ln();
    Ok(1.2e12 * (p as f64 / lp) * (lp + (y as f64).ln()) * log_n * log_n)
}

/// The lemma bounds at `n`, given through `log n` so that `n` may be huge.
pub fn lemma_bounds(y: i64, p: u64, log_n: f64, alpha: i64, beta: i64) -> Result<LemmaBounds> {
    if y < 3 {
        return Err(Error::Domain(format!("Y = {y} < 3")));
    }
    if log_n <= 0.0 {
        return Err(Error::Domain("n must exceed 1".into()));
    }
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let yf = y as f64;
    let n = log_n.exp();
    let y3 = 3.0 * yf.ln();
    Ok(LemmaBounds {
        zero_bound: zero_bound(y)?,
        growth_applies: log_n > 8.0 * yf.ln(),
        log_lower_beta: n * (beta.unsigned_abs() as f64).ln() - (2f64.ln() + y3),
        log_lower_alpha: log_n + n * (alpha.unsigned_abs() as f64).ln() - (6f64.ln() + y3),
        nu_upper: nu_upper(y, p, log_n)?,
    })
}

/// If `T > (4 s^2)^s` and `T > x / (log x)^s` then `x < 2^s T (log T)^s`.
pub fn invert_log_bound(t: f64, s: u32) -> Result<f64> {
    if s == 0 {
        return Err(Error::ParameterOutOfRange("s must be >= 1".into()));
    }
    let threshold = (4.0 * (s * s) as f64).powi(s as i32);
    if t <= threshold {
        return Err(Error::HypothesisViolated(format!("T = {t} <= (4 s^2)^s = {threshold}")));
    }
    Ok(2f64.powi(s as i32) * t * t.ln().powi(s as i32))
}

/// Lower bound for `log |Lambda|` over a real field of degree `D`.
pub fn matveev_log_lower(l: u32, d: u32, a: &[f64], b_star: f64) -> Result<f64> {
    if l == 0 || d == 0 {
        return Err(Error::ParameterOutOfRange("l and D must be >= 1".into()));
    }
    if a.len() != l as usize {
        return Err(Error::ParameterOutOfRange(format!(
            "{} values A_j for l = {l}",
            a.len()
        )));
    }
    if let Some(x) = a.iter().find(|&&x| x.is_nan() || x < 0.16) {
        return Err(Error::ParameterOutOfRange(format!("A_j = {x} < 0.16")));
    }
    if b_star.is_nan() || b_star < 3.0 {
        return Err(Error::ParameterOutOfRange(format!("B* = {b_star} < 3")));
    }
    let lf = l as f64;
    let df = d as f64;
    let omega: f64 = a.iter().product();
    Ok(-1.4 * 30f64.powi(l as i32 + 3) * lf.powf(4.5) * df * df * omega * (E * df).ln() * (E * b_star).ln())
}

/// Upper bound for `nu_pi(Lambda)` at a prime ideal over `p` with
/// ramification index `e_pi` and residue degree `f_pi`.
pub fn yu_valuation_upper(l: u32, d: u32, p: u64, e_pi: u32, f_pi: u32, h: &[f64], b_star: f64) -> Result<f64> {
    if l == 0 || d == 0 || e_pi == 0 || f_pi == 0 {
        return Err(Error::ParameterOutOfRange("l, D, e_pi, f_pi must be >= 1".into()));
    }
    if !is_prime(p) {
        return Err(Error::ParameterOutOfRange(format!("{p} is not prime")));
    }
    if h.len() != l as usize {
        return Err(Error::ParameterOutOfRange(format!(
            "{} values H_j for l = {l}",
            h.len()
        )));
    }
    let lp = (p as f64).ln();
    if let Some(x) = h.iter().find(|&&x| x.is_nan() || x < lp) {
        return Err(Error::ParameterOutOfRange(format!("H_j = {x} < log p = {lp}")));
    }
    if b_star.is_nan() || b_star <= 1.0 {
        return Err(Error::ParameterOutOfRange(format!("B* = {b_star} <= 1")));
    }
    let lf = l as f64;
    let df = d as f64;
    let lead = 19.0 * (20.0 * (lf + 1.0).sqrt() * df).powi(2 * (l as i32 + 1));
    let ram = (e_pi as f64).powi(l as i32 - 1);
    let res = (p as f64).powi(f_pi as i32) / (f_pi as f64 * lp).powi(2);
    let heights: f64 = h.iter().product();
    Ok(lead * ram * res * (E.powi(5) * lf * df).ln() * heights * b_star.ln())
}

/// `19 (20 sqrt 3)^6 * 4.4 * log(2 e^5)`: the constant that the valuation
/// bound for `u_n` rounds up to `1.1e12`.
pub fn yu_consolidation() -> f64 {
    19.0 * (20.0 * 3f64.sqrt()).powi(6) * 4.4 * (2.0 * E.powi(5)).ln()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrimeCount {
    pub pi: u64,
    /// `1.25 X / log X`
    pub pi_upper: f64,
    /// `log M(X) = pi(X) log log X`
    pub m_log: f64,
}

pub fn prime_pi_and_m(x: u64) -> Result<PrimeCount> {
    if x < 2 {
        return Err(Error::Domain(format!("X = {x} < 2")));
    }
    let xf = x as f64;
    let pi = primes_up_to(x).len() as u64;
    Ok(PrimeCount {
        pi,
        pi_upper: 1.25 * xf / xf.ln(),
        m_log: pi as f64 * xf.ln().ln(),
    })
}

/// A formula whose value can be recomputed from its logged inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formula {
    /// `12 X`
    Theorem2Log,
    /// `1.25 X / log X`
    PrimePiUpper,
    /// `pi log log X`
    MLog,
    /// `39 Y log Y`
    ZeroBound,
    /// `1.2e12 (p / log p)(log p + log Y)(log n)^2`
    NuUpper,
    /// `19 (20 sqrt 3)^6 4.4 log(2 e^5)`
    YuConsolidation,
    /// `2^s T (log T)^s`
    InvertLog,
    /// `c * X^a (log X)^b`, a rounded closed form
    PowerLog,
    /// `|Matveev bound| / log n` at `l = k + 2`, `A = (5 log X, log X, ...)`, `B* = n^1.5`
    MatveevCase3,
    /// `log(X^a (30 log X)^(k + b))`
    Case3LogEndpoint,
}

impl Formula {
    pub fn evaluate(self, inp: &BTreeMap<String, f64>) -> Result<f64> {
        let get = |k: &str| {
            inp.get(k)
                .copied()
                .ok_or_else(|| Error::ParameterOutOfRange(format!("missing input {k}")))
        };
        Ok(match self {
            Formula::Theorem2Log => theorem2_bound(get("X")? as i64)?.log_bound,
            Formula::PrimePiUpper => prime_pi_and_m(get("X")? as u64)?.pi_upper,
            Formula::MLog => get("pi")? * get("X")?.ln().ln(),
            Formula::ZeroBound => zero_bound(get("Y")? as i64)?,
            Formula::NuUpper => nu_upper(get("Y")? as i64, get("p")? as u64, get("log_n")?)?,
            Formula::YuConsolidation => yu_consolidation(),
            Formula::InvertLog => invert_log_bound(get("T")?, get("s")? as u32)?,
            Formula::PowerLog => {
                let x = get("X")?;
                get("c")? * x.powf(get("a")?) * x.ln().powf(get("b")?)
            }
            Formula::MatveevCase3 => {
                let x = get("X")?;
                let k = get("k")? as u32;
                let log_n = get("log_n")?;
                let lx = x.ln();
                let mut a = vec![lx; k as usize + 2];
                a[0] = 5.0 * lx;
                let b_star = (1.5 * log_n).exp();
                -matveev_log_lower(k + 2, 1, &a, b_star)? / log_n
            }
            Formula::Case3LogEndpoint => {
                let x = get("X")?;
                get("a")? * x.ln() + (get("k")? + get("b")?) * (30.0 * x.ln()).ln()
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub name: String,
    pub formula: Formula,
    pub inputs: BTreeMap<String, f64>,
    pub value: f64,
    /// rounded constant the value is compared against
    pub reference: Option<f64>,
    /// `value <= reference` (or `value < reference` where noted)
    pub holds: Option<bool>,
    pub note: String,
}

impl AuditEntry {
    fn new(name: &str, formula: Formula, inputs: &[(&str, f64)], reference: Option<f64>, note: &str) -> Result<Self> {
        let inputs: BTreeMap<String, f64> = inputs.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        let value = formula.evaluate(&inputs)?;
        Ok(AuditEntry {
            name: name.to_string(),
            formula,
            inputs,
            value,
            reference,
            holds: reference.map(|r| value <= r),
            note: note.to_string(),
        })
    }

    pub fn recompute(&self) -> Result<f64> {
        self.formula.evaluate(&self.inputs)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub spec: RecurrenceSpec,
    pub p_k: u64,
    pub k_coef: u64,
    pub y: i64,
    pub x: i64,
    pub log_n_bound: f64,
    pub decimal_exponent: u32,
    pub zero_bound: f64,
    /// valuation bound for `u_n` at `log n = 12 X`, per prime `<= p_k`
    pub nu_bounds: BTreeMap<u64, f64>,
    pub prime_count: PrimeCount,
    pub audit: Vec<AuditEntry>,
}

/// The full audit trail for one recurrence and prime set `{p <= p_k}`.
pub fn audit(spec: &RecurrenceSpec, p_k: u64, k_coef: u64) -> Result<BoundReport> {
    if !is_prime(p_k) {
        return Err(Error::NotPrime(p_k));
    }
    let (x, y) = compute_xy(spec, p_k, k_coef);
    if y < 3 {
        return Err(Error::SmallHeight(y));
    }
    let t2 = theorem2_bound(x)?;
    let xf = x as f64;
    let primes = primes_up_to(p_k);
    let k = primes.len() as f64;
    let pc = prime_pi_and_m(x as u64)?;
    let mut nu_bounds = BTreeMap::new();
    for &p in &primes {
        nu_bounds.insert(p, nu_upper(y, p, t2.log_bound)?);
    }

    let log_n_min = 8.0 * xf.ln(); // n > X^8 throughout the case analysis
    let mut audit = vec![
        AuditEntry::new(
            "theorem2: log n < 12X",
            Formula::Theorem2Log,
            &[("X", xf)],
            Some(t2.decimal_exponent as f64 * std::f64::consts::LN_10),
            "holds: e^{12X} < 10^e",
        )?,
        AuditEntry::new("pi(X) upper bound", Formula::PrimePiUpper, &[("X", xf)], None, "")?,
        AuditEntry::new("log M(X)", Formula::MLog, &[("X", xf), ("pi", pc.pi as f64)], None, "")?,
        AuditEntry::new("u_n = 0 bound", Formula::ZeroBound, &[("Y", y as f64)], None, "")?,
        AuditEntry::new(
            "valuation constant",
            Formula::YuConsolidation,
            &[],
            Some(1.1e12),
            "rounded constant 1.1e12",
        )?,
        AuditEntry::new(
            "case A=0: n <= 4T(log T)^2, T = 7.3e12 X^2",
            Formula::InvertLog,
            &[("T", 7.3e12 * xf * xf), ("s", 2.0)],
            Some(Formula::PowerLog.evaluate(&btree(&[("c", 6.1e15), ("X", xf), ("a", 2.0), ("b", 2.0)]))?),
            "rounded constant 6.1e15 X^2 (log X)^2",
        )?,
        AuditEntry::new(
            "case B=0, m <= 10: n <= 2T log T, T = 17",
            Formula::InvertLog,
            &[("T", 17.0), ("s", 1.0)],
            None,
            "the integer search gives n <= 73",
        )?,
        AuditEntry::new(
            "case B=0: n <= 8T(log T)^3, T = 1e14 X",
            Formula::InvertLog,
            &[("T", 1e14 * xf), ("s", 3.0)],
            Some(Formula::PowerLog.evaluate(&btree(&[("c", 2.5e18), ("X", xf), ("a", 1.0), ("b", 3.0)]))?),
            "rounded constant 2.5e18 X (log X)^3",
        )?,
        AuditEntry::new(
            "case AB != 0: Matveev coefficient / log n at n = X^8",
            Formula::MatveevCase3,
            &[("X", xf), ("k", k), ("log_n", log_n_min)],
            Some(11.2 * 30f64.powf(k + 5.0) * (k + 2.0).powf(4.5) * xf.ln().powf(k + 2.0)),
            "rounded constant 11.2 * 30^{k+5} (k+2)^{4.5} (log X)^{k+2}",
        )?,
        AuditEntry::new(
            "case AB != 0: log(X^6.5 (30 log X)^{k+6})",
            Formula::Case3LogEndpoint,
            &[("X", xf), ("k", k), ("a", 6.5), ("b", 6.0)],
            Some(8.0 * xf),
            "compared with 8X",
        )?,
        AuditEntry::new(
            "case AB != 0: log(X^7.5 (30 log X)^{k+7})",
            Formula::Case3LogEndpoint,
            &[("X", xf), ("k", k), ("a", 7.5), ("b", 7.0)],
            Some(10.0 * xf),
            "compared with 10X",
        )?,
        AuditEntry::new(
            "case AB != 0, m! large: n <= 8T(log T)^3, T = 3e13 X^2",
            Formula::InvertLog,
            &[("T", 3e13 * xf * xf), ("s", 3.0)],
            Some(Formula::PowerLog.evaluate(&btree(&[("c", 8.1e16), ("X", xf), ("a", 2.0), ("b", 3.0)]))?),
            "rounded constant 8.1e16 X^2 (log X)^3",
        )?,
    ];
    for &p in &primes {
        audit.push(AuditEntry::new(
            &format!("nu_{p}(u_n) bound at log n = 12X"),
            Formula::NuUpper,
            &[("Y", y as f64), ("p", p as f64), ("log_n", t2.log_bound)],
            None,
            "",
        )?);
    }

    Ok(BoundReport {
        spec: *spec,
        p_k,
        k_coef,
        y,
        x,
        log_n_bound: t2.log_bound,
        decimal_exponent: t2.decimal_exponent,
        zero_bound: zero_bound(y)?,
        nu_bounds,
        prime_count: pc,
        audit,
    })
}

fn btree(items: &[(&str, f64)]) -> BTreeMap<String, f64> {
    items.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}
