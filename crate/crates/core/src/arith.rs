//! Small integer helpers shared by the other modules.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};

pub fn factorial(m: u64) -> BigUint {
    (2..=m).fold(BigUint::one(), |acc, k| acc * k)
}

/// `m! mod modulus`, without materializing `m!`.
pub fn factorial_mod(m: u64, modulus: &BigUint) -> BigUint {
    let mut acc = BigUint::one() % modulus;
    for k in 2..=m {
        if acc.is_zero() {
            break;
        }
        acc = (acc * k) % modulus;
    }
    acc
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) {
        return false;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Primes `<= limit` by the sieve of Eratosthenes.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if composite[i] {
            continue;
        }
        out.push(i as u64);
        let mut j = i * i;
        while j <= n {
            composite[j] = true;
            j += i;
        }
    }
    out
}

/// Natural log of `|x|`, accurate to f64 precision for any magnitude.
pub fn ln_abs(x: &BigInt) -> f64 {
    ln_biguint(x.magnitude())
}

pub fn ln_biguint(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("fits in f64").ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().expect("64-bit head");
    top.ln() + (shift as f64) * std::f64::consts::LN_2
}

/// `10^e` as an integer.
pub fn pow10(e: u32) -> BigUint {
    num_traits::pow(BigUint::from(10u32), e as usize)
}

pub fn signed(x: &BigUint, negative: bool) -> BigInt {
    let v = BigInt::from(x.clone());
    if negative {
        -v
    } else {
        v
    }
}

pub fn sign_of(x: &BigInt) -> i8 {
    if x.is_negative() {
        -1
    } else if x.is_zero() {
        0
    } else {
        1
    }
}
