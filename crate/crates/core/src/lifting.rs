//! Digit-by-digit lifting of solutions of `p^k | n 2^n + 1 - t`.
//!
//! For an odd prime `p` the residue class of `n` modulo `p - 1` fixes
//! `2^n mod p`, which in turn fixes `n mod p`; so exactly `p - 1` classes
//! modulo `p (p - 1)` satisfy `p | n 2^n + 1 - t`. Starting from such a class
//! `n0`, write
//!
//! ```text
//! n = n0 + (p-1) p l_1 + (p-1) p^2 l_2 + ...,    0 <= l_j < p.
//! ```
//!
//! Because `(p-1) p^j = phi(p^{j+1})`, adding a multiple of it does not move
//! `2^n mod p^{j+1}`, and the next digit is the unique solution of a linear
//! congruence mod `p`:
//!
//! ```text
//! l_j = 2^{-n_{j-1}} * ((n_{j-1} 2^{n_{j-1}} + 1 - t) / p^j)  (mod p).
//! ```
//!
//! The representative `n_{k-1}` after `k - 1` digits is the least
//! nonnegative `n` in its class with `p^k | n 2^n + 1 - t`. If it exceeds a
//! search limit for every class, then `nu_p(n 2^n + 1 - t) < k` for all `n`
//! below the limit.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{factorial, factorial_mod, is_prime};
use crate::error::{Error, Result};
use crate::valuation::nu_factorial;

/// The shift `t` in `n 2^n + 1 - t`.
///
/// `t = 0` is `C_n`, `t = 2` is `W_n`; `t = base + sign * m!` covers
/// `C_n -+ m!` (`base = 0`) and `W_n -+ m!` (`base = 2`). Factorial shifts are
/// only ever reduced modulo prime powers, never expanded.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Target {
    Integer(BigInt),
    Factorial { base: i64, negative: bool, m: u64 },
}

impl Target {
    pub fn int(t: i64) -> Self {
        Target::Integer(BigInt::from(t))
    }

    /// `t` for the expression `u_n + eps * m!`, where `u_n = n 2^n + 1 - base`.
    pub fn shifted(base: i64, eps: i8, m: u64) -> Self {
        Target::Factorial {
            base,
            negative: eps > 0,
            m,
        }
    }

    /// `t mod p^e` in `[0, p^e)`.
    pub fn residue(&self, p: u64, e: u32) -> BigUint {
        let modulus = BigUint::from(p).pow(e);
        match self {
            Target::Integer(t) => t.mod_floor(&BigInt::from(modulus.clone())).to_biguint().unwrap(),
            Target::Factorial { base, negative, m } => {
                let base = BigInt::from(*base).mod_floor(&BigInt::from(modulus.clone()));
                let fact = if nu_factorial(*m, p) >= e as u64 {
                    BigUint::zero()
                } else {
                    factorial_mod(*m, &modulus)
                };
                let base = base.to_biguint().unwrap();
                if *negative {
                    (base + &modulus - fact % &modulus) % &modulus
                } else {
                    (base + fact) % &modulus
                }
            }
        }
    }

    pub fn exact(&self) -> BigInt {
        match self {
            Target::Integer(t) => t.clone(),
            Target::Factorial { base, negative, m } => {
                let f = BigInt::from(factorial(*m));
                if *negative {
                    BigInt::from(*base) - f
                } else {
                    BigInt::from(*base) + f
                }
            }
        }
    }

    /// Nonnegative integers `n` with `n 2^n + 1 - t = 0`.
    pub fn exact_roots(&self) -> Vec<u64> {
        let target = self.exact() - 1u32;
        if target < BigInt::zero() {
            return Vec::new();
        }
        let bound = target.bits() + 2;
        (0..=bound).filter(|&n| BigInt::from(n) << n == target).collect()
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Integer(t) => write!(f, "{t}"),
            Target::Factorial { base, negative, m } => {
                let sign = if *negative { '-' } else { '+' };
                if *base == 0 {
                    if *negative {
                        write!(f, "-{m}!")
                    } else {
                        write!(f, "{m}!")
                    }
                } else {
                    write!(f, "{base}{sign}{m}!")
                }
            }
        }
    }
}

impl FromStr for Target {
    type Err = String;

    /// Accepts `-6`, `2`, `500!`, `-500!`, `2+7!`, `2-500!`.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim();
        let Some(body) = s.strip_suffix('!') else {
            return s
                .parse::<BigInt>()
                .map(Target::Integer)
                .map_err(|e| format!("bad target {s:?}: {e}"));
        };
        // split at the last sign that is not the leading one
        let split = body
            .char_indices()
            .skip(1)
            .filter(|(_, c)| *c == '+' || *c == '-')
            .map(|(i, _)| i)
            .last();
        let (base, negative, m) = match split {
            Some(i) => {
                let base = body[..i].parse::<i64>().map_err(|e| format!("bad target {s:?}: {e}"))?;
                (base, &body[i..i + 1] == "-", &body[i + 1..])
            }
            None => match body.strip_prefix('-') {
                Some(rest) => (0, true, rest),
                None => (0, false, body.strip_prefix('+').unwrap_or(body)),
            },
        };
        let m = m.parse::<u64>().map_err(|e| format!("bad factorial in {s:?}: {e}"))?;
        Ok(Target::Factorial { base, negative, m })
    }
}

impl Serialize for Target {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Target {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn check_odd_prime(p: u64) -> Result<()> {
    if p == 2 {
        return Err(Error::EvenPrime(p));
    }
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    Ok(())
}

/// The `p - 1` seeds `n0 < p (p - 1)` with `p | n0 2^n0 + 1 - t`, ascending.
pub fn find_residues(p: u64, t: &Target) -> Result<Vec<u64>> {
    check_odd_prime(p)?;
    let t_mod = t.residue(p, 1).to_u64().expect("t mod p fits");
    let mut out = Vec::with_capacity(p as usize - 1);
    let mut pow2 = 1u64; // 2^n mod p
    for n in 0..p * (p - 1) {
        let v = ((n % p) as u128 * pow2 as u128 + 1 + p as u128 - t_mod as u128) % p as u128;
        if v == 0 {
            out.push(n);
        }
        pow2 = pow2 * 2 % p;
    }
    assert_eq!(out.len() as u64, p - 1, "residue count for p = {p}, t = {t}");
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiftTask {
    pub p: u64,
    pub target: Target,
    pub n0: u64,
    pub depth: u32,
}

/// Stage `stage` verified `p^stage | n 2^n + 1 - t` at `representative`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageCertificate {
    pub stage: u32,
    pub representative: BigUint,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiftResult {
    pub p: u64,
    pub target: Target,
    pub n0: u64,
    pub depth: u32,
    /// `l_1 .. l_{depth-1}`
    pub digits: Vec<u64>,
    pub n_final: BigUint,
    pub certificates: Vec<StageCertificate>,
}

impl LiftResult {
    /// Re-checks every certificate with an unreduced exponent.
    pub fn verify(&self) -> bool {
        let p = BigUint::from(self.p);
        let mut n = BigUint::from(self.n0);
        let mut step = (&p - 1u32) * &p;
        for d in &self.digits {
            n += &step * *d;
            step *= &p;
        }
        if n != self.n_final || self.certificates.len() != self.depth as usize {
            return false;
        }
        if self.n_final >= (&p - 1u32) * p.pow(self.depth) {
            return false;
        }
        self.certificates.iter().all(|c| {
            let modulus = p.pow(c.stage);
            let t = self.target.residue(self.p, c.stage);
            let pow2 = BigUint::from(2u32).modpow(&c.representative, &modulus);
            let v = (&c.representative * pow2 + 1u32 + &modulus - t) % &modulus;
            v.is_zero()
        })
    }
}

/// Incremental lifter for one seed.
#[derive(Debug, Clone)]
pub struct Lifter {
    p: u64,
    p_big: BigUint,
    target: Target,
    n0: u64,
    /// `p^k` divides the expression at `n`
    depth: u32,
    n: BigUint,
    /// `p^depth`
    p_pow: BigUint,
    digits: Vec<u64>,
    certificates: Vec<StageCertificate>,
    t_cache: (u32, BigUint),
    keep_certificates: bool,
}

impl Lifter {
    pub fn new(p: u64, target: Target, n0: u64) -> Result<Self> {
        check_odd_prime(p)?;
        let mut lifter = Lifter {
            p,
            p_big: BigUint::from(p),
            target,
            n0,
            depth: 1,
            n: BigUint::from(n0),
            p_pow: BigUint::from(p),
            digits: Vec::new(),
            certificates: Vec::new(),
            t_cache: (0, BigUint::zero()),
            keep_certificates: true,
        };
        let v = lifter.expression_mod(2);
        if !(v % &lifter.p_big).is_zero() || n0 >= p * (p - 1) {
            return Err(Error::BadSeed { n0 });
        }
        lifter.record_certificate();
        Ok(lifter)
    }

    /// Skip storing per-stage representatives (they are still checked).
    pub fn without_certificates(mut self) -> Self {
        self.keep_certificates = false;
        self.certificates.clear();
        self
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn representative(&self) -> &BigUint {
        &self.n
    }

    fn record_certificate(&mut self) {
        if self.keep_certificates {
            self.certificates.push(StageCertificate {
                stage: self.depth,
                representative: self.n.clone(),
            });
        }
    }

    fn target_mod(&mut self, e: u32) -> BigUint {
        if self.t_cache.0 < e {
            let cached = e.max(self.t_cache.0 * 2).max(32);
            self.t_cache = (cached, self.target.residue(self.p, cached));
        }
        if self.t_cache.0 == e {
            self.t_cache.1.clone()
        } else {
            &self.t_cache.1 % self.p_big.pow(e)
        }
    }

    /// `n 2^n + 1 - t mod p^e`, with the exponent reduced mod `phi(p^e)`.
    fn expression_mod(&mut self, e: u32) -> BigUint {
        let modulus = self.p_big.pow(e);
        let phi = (&self.p_big - 1u32) * self.p_big.pow(e - 1);
        let exponent = &self.n % &phi;
        let pow2 = BigUint::from(2u32).modpow(&exponent, &modulus);
        let t = self.target_mod(e);
        (&self.n * pow2 + 1u32 + &modulus - t) % &modulus
    }

    /// Appends `l_depth` and moves to `depth + 1`.
    pub fn advance(&mut self) -> Result<u64> {
        let j = self.depth;
        let v = self.expression_mod(j + 1);
        let (quotient, rem) = v.div_rem(&self.p_pow);
        if !rem.is_zero() {
            return Err(Error::InternalCertificateFailure {
                stage: j,
                representative: self.n.clone(),
            });
        }
        let q = (quotient % &self.p_big).to_u64().unwrap();
        // 2^{-n} mod p = 2^{(p-1) - (n mod (p-1))}
        let e = (&self.n % (self.p - 1)).to_u64().unwrap();
        let inv = mod_pow_u64(2, (self.p - 1 - e) % (self.p - 1), self.p);
        let digit = (inv as u128 * q as u128 % self.p as u128) as u64;

        self.n += (&self.p_big - 1u32) * &self.p_pow * digit;
        self.p_pow *= &self.p_big;
        self.depth += 1;
        self.digits.push(digit);
        self.record_certificate();
        Ok(digit)
    }

    /// Checks the current depth's divisibility directly.
    pub fn certify(&mut self) -> Result<()> {
        let v = self.expression_mod(self.depth);
        if v.is_zero() {
            Ok(())
        } else {
            Err(Error::InternalCertificateFailure {
                stage: self.depth,
                representative: self.n.clone(),
            })
        }
    }

    pub fn finish(mut self) -> Result<LiftResult> {
        self.certify()?;
        Ok(LiftResult {
            p: self.p,
            target: self.target,
            n0: self.n0,
            depth: self.depth,
            digits: self.digits,
            n_final: self.n,
            certificates: self.certificates,
        })
    }
}

fn mod_pow_u64(base: u64, mut exp: u64, m: u64) -> u64 {
    let m = m as u128;
    let mut b = base as u128 % m;
    let mut acc = 1u128 % m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    acc as u64
}

/// Lifts `task.n0` to depth `task.depth` (digits `l_1 .. l_{depth-1}`).
pub fn lift(task: &LiftTask) -> Result<LiftResult> {
    if task.depth == 0 {
        return Err(Error::ParameterOutOfRange("depth must be >= 1".into()));
    }
    let mut lifter = Lifter::new(task.p, task.target.clone(), task.n0)?;
    while lifter.depth() < task.depth {
        lifter.advance()?;
    }
    lifter.finish()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchWitness {
    pub n0: u64,
    /// first depth at which this branch's representative reaches the limit
    pub exit_depth: u32,
    /// representative at the reported bound `k`
    pub representative: BigUint,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValuationBound {
    pub p: u64,
    pub target: Target,
    pub limit: BigUint,
    /// every `n < limit` has `nu_p(n 2^n + 1 - t) < k`
    pub k: u32,
    pub witnesses: Vec<BranchWitness>,
}

/// Least `k` such that every seed's depth-`k` representative is `>= limit`.
pub fn max_valuation_below(p: u64, target: &Target, limit: &BigUint) -> Result<ValuationBound> {
    if limit.is_zero() {
        return Err(Error::ParameterOutOfRange("limit must be >= 1".into()));
    }
    let seeds = find_residues(p, target)?;
    // an exact root below the limit pins one branch forever
    if let Some(&root) = target.exact_roots().iter().find(|&&r| BigUint::from(r) < *limit) {
        return Err(Error::ExactRoot { n: root });
    }
    let mut lifters: Vec<(Lifter, u32)> = seeds
        .iter()
        .map(|&n0| {
            let mut l = Lifter::new(p, target.clone(), n0)?.without_certificates();
            while l.representative() < limit {
                l.advance()?;
            }
            let exit = l.depth();
            Ok((l, exit))
        })
        .collect::<Result<_>>()?;
    let k = lifters.iter().map(|(_, d)| *d).max().unwrap_or(1);
    let witnesses = lifters
        .iter_mut()
        .map(|(l, exit)| {
            while l.depth() < k {
                l.advance()?;
            }
            l.certify()?;
            Ok(BranchWitness {
                n0: l.n0,
                exit_depth: *exit,
                representative: l.representative().clone(),
            })
        })
        .collect::<Result<_>>()?;
    Ok(ValuationBound {
        p,
        target: target.clone(),
        limit: limit.clone(),
        k,
        witnesses,
    })
}

/// [`max_valuation_below`] over many targets, in parallel.
pub fn max_valuation_campaign(p: u64, targets: &[Target], limit: &BigUint) -> Result<Vec<ValuationBound>> {
    targets.par_iter().map(|t| max_valuation_below(p, t, limit)).collect()
}

/// Brute force `nu_p(n 2^n + 1 - t)` for small `n`; `None` at an exact zero.
pub fn brute_force_valuation(p: u64, t: &BigInt, n: u64) -> Option<u64> {
    let v = (BigInt::from(n) << n) + 1u32 - t;
    crate::valuation::nu(&v, p).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    fn t(v: i64) -> Target {
        Target::int(v)
    }

    #[test]
    fn residue_sets() {
        assert_eq!(find_residues(3, &t(0)).unwrap(), vec![1, 2]);
        assert_eq!(find_residues(5, &t(0)).unwrap(), vec![3, 4, 6, 17]);
        assert_eq!(find_residues(7, &t(0)).unwrap(), vec![5, 6, 10, 26, 27, 31]);
        assert_eq!(find_residues(3, &t(2)).unwrap(), vec![4, 5]);
        assert_eq!(find_residues(5, &t(2)).unwrap(), vec![7, 13, 14, 16]);
        assert_eq!(find_residues(7, &t(2)).unwrap(), vec![2, 4, 15, 23, 25, 36]);
        assert_eq!(find_residues(3, &t(-2)).unwrap(), vec![0, 3]);
    }

    #[test]
    fn residue_errors() {
        assert_eq!(find_residues(2, &t(0)), Err(Error::EvenPrime(2)));
        assert_eq!(find_residues(9, &t(0)), Err(Error::NotPrime(9)));
    }

    #[test]
    fn branch_count() {
        for p in [3u64, 5, 7, 11, 13] {
            for tv in -20..=20 {
                assert_eq!(find_residues(p, &t(tv)).unwrap().len() as u64, p - 1);
            }
        }
    }

    #[test]
    fn small_lift() {
        let r = lift(&LiftTask {
            p: 3,
            target: t(0),
            n0: 1,
            depth: 2,
        })
        .unwrap();
        assert_eq!(r.digits, vec![2]);
        assert_eq!(r.n_final, BigUint::from(13u32));
        assert!(r.verify());
        let depth1 = lift(&LiftTask {
            p: 3,
            target: t(0),
            n0: 1,
            depth: 1,
        })
        .unwrap();
        assert!(depth1.digits.is_empty());
        assert_eq!(depth1.n_final, BigUint::one());
    }

    #[test]
    fn bad_seed() {
        assert_eq!(
            lift(&LiftTask {
                p: 3,
                target: t(0),
                n0: 0,
                depth: 3
            }),
            Err(Error::BadSeed { n0: 0 })
        );
        assert_eq!(
            lift(&LiftTask {
                p: 3,
                target: t(0),
                n0: 7,
                depth: 3
            }),
            Err(Error::BadSeed { n0: 7 })
        );
    }

    #[test]
    fn target_parse_roundtrip() {
        for s in ["0", "-6", "500!", "-500!", "2+7!", "2-500!", "-3-4!"] {
            let tg: Target = s.parse().unwrap();
            assert_eq!(tg.to_string(), s);
        }
        assert_eq!("2-3!".parse::<Target>().unwrap().exact(), BigInt::from(-4));
        assert_eq!("-3-4!".parse::<Target>().unwrap().exact(), BigInt::from(-27));
        assert!("abc".parse::<Target>().is_err());
    }

    #[test]
    fn factorial_target_residue() {
        for tg in [
            Target::shifted(0, 1, 10),
            Target::shifted(2, -1, 10),
            Target::shifted(2, 1, 30),
        ] {
            let exact = tg.exact();
            for e in [1u32, 3, 9, 40] {
                let m = BigInt::from(3u32).pow(e);
                assert_eq!(BigInt::from(tg.residue(3, e)), exact.mod_floor(&m), "{tg} e={e}");
            }
        }
        // C_n - m! has t = +m!
        assert_eq!(Target::shifted(0, -1, 4).exact(), BigInt::from(24));
        assert_eq!(Target::shifted(2, 1, 4).exact(), BigInt::from(-22));
    }

    #[test]
    fn exact_roots() {
        // t = 1: n = 0 gives 0 * 1 + 1 - 1 = 0
        assert_eq!(t(1).exact_roots(), vec![0]);
        // n = 3: 24 + 1 = 25
        assert_eq!(t(25).exact_roots(), vec![3]);
        assert!(t(0).exact_roots().is_empty());
        assert!(matches!(
            max_valuation_below(3, &t(25), &BigUint::from(100u32)),
            Err(Error::ExactRoot { n: 3 })
        ));
    }

    #[test]
    fn bound_semantics_match_brute_force() {
        for p in [3u64, 5, 7] {
            for tv in -6i64..=6 {
                let target = t(tv);
                if !target.exact_roots().is_empty() {
                    continue;
                }
                for limit in [1u64, 2, 14, 50, 300] {
                    let vb = max_valuation_below(p, &target, &BigUint::from(limit)).unwrap();
                    let brute = (0..limit)
                        .filter_map(|n| brute_force_valuation(p, &BigInt::from(tv), n))
                        .max()
                        .unwrap_or(0);
                    assert_eq!(vb.k as u64, (brute + 1).max(1), "p={p} t={tv} limit={limit}");
                    for w in &vb.witnesses {
                        assert!(w.representative >= BigUint::from(limit));
                    }
                }
            }
        }
    }

    #[test]
    fn boundary_example() {
        // n < 14: the largest nu_3(n 2^n + 1) is 2, at n = 2 and n = 13
        let vb = max_valuation_below(3, &t(0), &BigUint::from(14u32)).unwrap();
        assert_eq!(vb.k, 3);
    }
}
