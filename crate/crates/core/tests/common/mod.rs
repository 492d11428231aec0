//! Oracles shared by the integration tests.
#![allow(dead_code)]

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::Zero;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use cwfact_core::{derive_closed_form, ClosedForm, RecurrenceSpec};

/// Valid specs with small random roots and initial terms.
pub fn spec_corpus(count: usize, seed: u64) -> Vec<(RecurrenceSpec, ClosedForm)> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let alpha: i64 = rng.random_range(-6..=6);
        let beta: i64 = rng.random_range(-6..=6);
        if alpha == 0 || beta == 0 || alpha.abs() == beta.abs() || alpha.gcd(&beta) != 1 {
            continue;
        }
        let r = [
            2 * alpha + beta,
            -(alpha * alpha + 2 * alpha * beta),
            alpha * alpha * beta,
        ];
        if r[0].gcd(&r[1]).gcd(&r[2]) != 1 {
            continue;
        }
        let u = [
            rng.random_range(-20..=20),
            rng.random_range(-20..=20),
            rng.random_range(-20..=20),
        ];
        let spec = RecurrenceSpec::new(r, u);
        if let Ok(cf) = derive_closed_form(&spec) {
            out.push((spec, cf));
        }
    }
    out
}

/// `u_0 .. u_n` by direct iteration.
pub fn iterate(spec: &RecurrenceSpec, n: usize) -> Vec<BigInt> {
    let mut v: Vec<BigInt> = vec![spec.u0.into(), spec.u1.into(), spec.u2.into()];
    while v.len() <= n {
        let k = v.len();
        let next = &v[k - 1] * spec.r1 + &v[k - 2] * spec.r2 + &v[k - 3] * spec.r3;
        v.push(next);
    }
    v
}

/// Least `n` in the class of `n0` mod `(p-1)p` with `p^k | n 2^n + 1 - t`.
pub fn least_in_class(p: u64, t: i64, n0: u64, k: u32) -> u64 {
    let t = BigInt::from(t);
    let step = (p - 1) * p;
    let pk = BigInt::from(p).pow(k);
    let mut n = n0;
    loop {
        let v = (BigInt::from(n) << n) + 1u32 - &t;
        if (&v % &pk).is_zero() {
            return n;
        }
        n += step;
    }
}

/// Exponent of `p` in `m!` by repeated division of the full product.
pub fn nu_factorial_by_division(m: u64, p: u64) -> u64 {
    let mut f: BigUint = (1..=m).map(BigUint::from).product();
    let p = BigUint::from(p);
    let mut e = 0;
    loop {
        let (q, r) = f.div_rem(&p);
        if !r.is_zero() {
            return e;
        }
        f = q;
        e += 1;
    }
}
