//! Enumeration of `u_n + eps m! = +-s` with `s` an S-unit inside a box.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{factorial, sign_of};
use crate::error::{Error, Result};
use crate::recurrence::{derive_closed_form, is_degenerate, ClosedForm, RecurrenceSpec};
use crate::scan::SUnitBox;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Smoothness {
    Smooth(Vec<u32>),
    NotSmooth,
    /// smooth over the box primes, but some exponent is above its cap
    CapExceeded(Vec<u32>),
}

/// Exponents of `|x|` over the box primes.
pub fn smooth_decompose(x: &BigInt, sbox: &SUnitBox) -> Result<Smoothness> {
    if x.is_zero() {
        return Err(Error::ZeroArgument);
    }
    let mut rest: BigUint = x.magnitude().clone();
    let mut exps = Vec::with_capacity(sbox.primes().len());
    for &p in sbox.primes() {
        let mut e = 0u32;
        if p == 2 {
            let tz = rest.trailing_zeros().unwrap_or(0);
            rest >>= tz;
            e = tz as u32;
        } else {
            let pb = BigUint::from(p);
            loop {
                let (q, r) = rest.div_rem(&pb);
                if !r.is_zero() {
                    break;
                }
                rest = q;
                e += 1;
            }
        }
        exps.push(e);
    }
    if !rest.is_one() {
        return Ok(Smoothness::NotSmooth);
    }
    if exps.iter().zip(sbox.caps()).any(|(e, c)| e > c) {
        return Ok(Smoothness::CapExceeded(exps));
    }
    Ok(Smoothness::Smooth(exps))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Cullen,
    Woodall,
}

impl Family {
    pub fn spec(self) -> RecurrenceSpec {
        match self {
            Family::Cullen => RecurrenceSpec::cullen(),
            Family::Woodall => RecurrenceSpec::woodall(),
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Family::Cullen => 'C',
            Family::Woodall => 'W',
        }
    }

    /// `t` with `u_n = n 2^n + 1 - t`.
    pub fn base_shift(self) -> i64 {
        match self {
            Family::Cullen => 0,
            Family::Woodall => 2,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cullen" | "c" => Some(Family::Cullen),
            "woodall" | "w" => Some(Family::Woodall),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub family: Family,
    pub n: u64,
    pub m: u64,
    pub eps: i8,
    /// `u_n + eps m!`
    pub value: BigInt,
    pub sign_s: i8,
    pub exponents: Vec<u32>,
    pub degenerate: bool,
}

impl SolutionRecord {
    /// Exact re-check of `u_n + eps m! = sign_s * prod p_i^{e_i}`.
    pub fn verify(&self, sbox: &SUnitBox) -> bool {
        let u = self.family.spec().iterate_term(self.n);
        let f = BigInt::from(factorial(self.m));
        let lhs = if self.eps > 0 { u + f } else { u - f };
        let rhs = sbox.value(&self.exponents) * BigInt::from(self.sign_s);
        lhs == self.value && rhs == self.value
    }

    /// `C_8-4!`-style label.
    pub fn label(&self) -> String {
        let sign = if self.eps > 0 { '+' } else { '-' };
        format!("{}_{}{}{}!", self.family.symbol(), self.n, sign, self.m)
    }
}

impl fmt::Display for SolutionRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.value, self.label())?;
        if self.degenerate {
            write!(f, " (degenerate)")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveReport {
    pub families: Vec<Family>,
    pub n_max: u64,
    pub m_range: (u64, u64),
    pub primes: Vec<u64>,
    pub caps: Vec<u32>,
    pub records: Vec<SolutionRecord>,
    /// distinct values, ascending
    pub values: Vec<BigInt>,
}

impl SolveReport {
    pub fn nondegenerate(&self) -> impl Iterator<Item = &SolutionRecord> {
        self.records.iter().filter(|r| !r.degenerate)
    }

    /// Record with the largest `n` among nondegenerate ones (ties: smallest m).
    pub fn max_n(&self) -> Option<&SolutionRecord> {
        self.nondegenerate().max_by_key(|r| (r.n, std::cmp::Reverse(r.m)))
    }

    pub fn max_m(&self) -> Option<&SolutionRecord> {
        self.nondegenerate().max_by_key(|r| (r.m, std::cmp::Reverse(r.n)))
    }

    pub fn headline(&self) -> String {
        let n = self.max_n().map_or("-".to_string(), |r| r.n.to_string());
        let m = self.max_m().map_or("-".to_string(), |r| r.m.to_string());
        let lo = self.m_range.0;
        format!("max n (nondegenerate, m>={lo}) = {n}; max m = {m}")
    }

    /// CSV with one row per record.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("value,sign_s,factorization,identity,degenerate\n");
        for r in &self.records {
            let fact: Vec<String> = self
                .primes
                .iter()
                .zip(&r.exponents)
                .filter(|(_, &e)| e > 0)
                .map(|(p, e)| if *e == 1 { p.to_string() } else { format!("{p}^{e}") })
                .collect();
            let fact = if fact.is_empty() {
                "1".to_string()
            } else {
                fact.join("*")
            };
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.value,
                r.sign_s,
                fact,
                r.label(),
                r.degenerate
            ));
        }
        out
    }
}

/// Every `(family, n, m, eps)` with `n <= n_max`, `m` in the range and
/// `u_n + eps m!` equal to plus or minus an in-cap S-unit.
pub fn solve_factorial_sunit(
    families: &[Family],
    n_max: u64,
    m_range: (u64, u64),
    sbox: &SUnitBox,
) -> Result<SolveReport> {
    let (m_lo, m_hi) = m_range;
    if m_lo > m_hi {
        return Err(Error::ParameterOutOfRange(format!("empty m range [{m_lo}, {m_hi}]")));
    }
    let factorials: Vec<BigInt> = (m_lo..=m_hi).map(|m| BigInt::from(factorial(m))).collect();
    let mut fams: Vec<Family> = families.to_vec();
    fams.sort();
    fams.dedup();
    let forms: Vec<(Family, ClosedForm)> = fams
        .iter()
        .map(|&f| Ok((f, derive_closed_form(&f.spec())?)))
        .collect::<Result<_>>()?;

    let jobs: Vec<(usize, u64)> = (0..forms.len())
        .flat_map(|i| (0..=n_max).map(move |n| (i, n)))
        .collect();
    let mut records: Vec<SolutionRecord> = jobs
        .par_iter()
        .map(|&(i, n)| {
            let (family, cf) = &forms[i];
            let u = family.spec().iterate_term(n);
            let mut found = Vec::new();
            for (k, f) in factorials.iter().enumerate() {
                let m = m_lo + k as u64;
                for eps in [1i8, -1] {
                    let value = if eps > 0 { &u + f } else { &u - f };
                    if value.is_zero() {
                        continue;
                    }
                    if let Smoothness::Smooth(exponents) = smooth_decompose(&value, sbox)? {
                        let a_coef = BigInt::from(-eps);
                        found.push(SolutionRecord {
                            family: *family,
                            n,
                            m,
                            eps,
                            sign_s: sign_of(&value),
                            exponents,
                            degenerate: is_degenerate(cf, &a_coef, m, n),
                            value,
                        });
                    }
                }
            }
            Ok(found)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    records.sort_by(|a, b| {
        (a.value.abs(), a.value.is_negative(), a.family, a.n, a.m, -a.eps).cmp(&(
            b.value.abs(),
            b.value.is_negative(),
            b.family,
            b.n,
            b.m,
            -b.eps,
        ))
    });
    let values: BTreeSet<BigInt> = records.iter().map(|r| r.value.clone()).collect();
    Ok(SolveReport {
        families: fams,
        n_max,
        m_range,
        primes: sbox.primes().to_vec(),
        caps: sbox.caps().to_vec(),
        records,
        values: values.into_iter().collect(),
    })
}
