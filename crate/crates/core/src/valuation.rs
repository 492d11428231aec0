//! p-adic valuations of integers and factorials, plus the truncated
//! 2-adic valuation used by the scan kernels.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `e` with `p^e | x`.
pub fn nu(x: &BigInt, p: u64) -> Result<u64> {
    if x.is_zero() {
        return Err(Error::ZeroArgument);
    }
    if p == 2 {
        return Ok(x.trailing_zeros().expect("nonzero"));
    }
    let p_big = BigUint::from(p);
    let mut v = x.magnitude().clone();
    let mut e = 0;
    loop {
        let (q, r) = v.div_rem(&p_big);
        if !r.is_zero() {
            return Ok(e);
        }
        v = q;
        e += 1;
    }
}

pub fn nu_u64(x: u64, p: u64) -> Result<u64> {
    if x == 0 {
        return Err(Error::ZeroArgument);
    }
    let mut x = x;
    let mut e = 0;
    while x.is_multiple_of(p) {
        x /= p;
        e += 1;
    }
    Ok(e)
}

/// Legendre's formula: `nu_p(m!) = sum floor(m / p^i)`.
pub fn nu_factorial(m: u64, p: u64) -> u64 {
    let mut total = 0;
    let mut q = m;
    while q > 0 {
        q /= p;
        total += q;
    }
    total
}

/// Sum of the base-`p` digits of `m`.
pub fn digit_sum(mut m: u64, p: u64) -> u64 {
    let mut s = 0;
    while m > 0 {
        s += m % p;
        m /= p;
    }
    s
}

/// An integer known only modulo `2^width`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncatedResidue {
    residue: u64,
    width: u32,
}

impl TruncatedResidue {
    /// Reduces `value` into `[0, 2^width)`; `width` is 1..=64.
    pub fn new(value: u64, width: u32) -> Self {
        assert!((1..=64).contains(&width), "width {width} outside 1..=64");
        TruncatedResidue {
            residue: value & mask(width),
            width,
        }
    }

    pub fn from_bigint(x: &BigInt, width: u32) -> Self {
        Self::new(low_u64(x), width)
    }

    pub fn residue(&self) -> u64 {
        self.residue
    }

    pub fn width(&self) -> u32 {
        self.width
    }
}

pub fn mask(width: u32) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

/// `x mod 2^64` in two's complement.
pub fn low_u64(x: &BigInt) -> u64 {
    let mag = x.magnitude();
    let low = mag.iter_u64_digits().next().unwrap_or(0);
    if x.sign() == num_bigint::Sign::Minus {
        low.wrapping_neg()
    } else {
        low
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Nu2 {
    Exact(u32),
    /// Residue was zero: `nu_2(x) >= width`.
    Saturated,
}

pub fn nu2_truncated(r: TruncatedResidue) -> Nu2 {
    if r.residue == 0 {
        Nu2::Saturated
    } else {
        Nu2::Exact(r.residue.trailing_zeros())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::factorial;
    use proptest::prelude::*;

    fn nu_by_division(x: &BigInt, p: u64) -> u64 {
        let mut x = x.clone();
        let p = BigInt::from(p);
        let mut e = 0;
        while (&x % &p).is_zero() {
            x /= &p;
            e += 1;
        }
        e
    }

    #[test]
    fn fixtures() {
        assert_eq!(nu(&BigInt::from(106497), 3).unwrap(), 2);
        assert_eq!(nu(&BigInt::from(1), 7).unwrap(), 0);
        assert_eq!(nu(&BigInt::from(2049 - 24), 3).unwrap(), 4);
        assert_eq!(nu(&BigInt::from(2025), 5).unwrap(), 2);
        assert_eq!(nu(&BigInt::from(-96), 2).unwrap(), 5);
        assert_eq!(nu(&BigInt::zero(), 3), Err(Error::ZeroArgument));
        assert_eq!(nu_u64(0, 3), Err(Error::ZeroArgument));
    }

    #[test]
    fn legendre() {
        assert_eq!(nu_factorial(500, 3), 247);
        assert_eq!(nu_factorial(500, 5), 124);
        assert_eq!(nu_factorial(500, 7), 82);
        assert_eq!(nu_factorial(500, 2), 494);
        assert_eq!(nu_factorial(1, 2), 0);
        assert_eq!(nu_factorial(0, 5), 0);
        for m in 0..=40u64 {
            let f = BigInt::from(factorial(m));
            for p in [2u64, 3, 5, 7] {
                assert_eq!(nu_factorial(m, p), nu_by_division(&f, p), "m={m} p={p}");
            }
        }
    }

    #[test]
    fn legendre_digit_sum_identity() {
        for p in [2u64, 3, 5, 7, 11] {
            for m in 0..=10_000u64 {
                assert_eq!((m - digit_sum(m, p)) / (p - 1), nu_factorial(m, p));
            }
        }
    }

    #[test]
    fn truncated() {
        assert_eq!(nu2_truncated(TruncatedResidue::new(40, 24)), Nu2::Exact(3));
        assert_eq!(nu2_truncated(TruncatedResidue::new(0, 32)), Nu2::Saturated);
        // 2^40 is invisible at width 32
        assert_eq!(nu2_truncated(TruncatedResidue::new(1 << 40, 32)), Nu2::Saturated);
        assert_eq!(nu2_truncated(TruncatedResidue::new(1 << 40, 64)), Nu2::Exact(40));
        assert_eq!(low_u64(&BigInt::from(-1)), u64::MAX);
    }

    #[test]
    fn truncated_agrees_with_exact_on_random_512_bit() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(0x5eed);
        let mut saturated = 0;
        for i in 0..10_000 {
            let mut limbs: Vec<u64> = (0..8).map(|_| rng.random()).collect();
            // force some high 2-adic valuations
            let shift = rng.random_range(0..80u32);
            if i % 3 == 0 {
                limbs[0] = 0;
            }
            let mag = BigUint::from_slice(
                &limbs
                    .iter()
                    .flat_map(|l| [*l as u32, (*l >> 32) as u32])
                    .collect::<Vec<_>>(),
            ) << shift;
            if mag.is_zero() {
                continue;
            }
            let x = if rng.random::<bool>() {
                -BigInt::from(mag)
            } else {
                BigInt::from(mag)
            };
            match nu2_truncated(TruncatedResidue::from_bigint(&x, 64)) {
                Nu2::Exact(v) => assert_eq!(v as u64, nu(&x, 2).unwrap()),
                Nu2::Saturated => {
                    saturated += 1;
                    assert!(nu(&x, 2).unwrap() >= 64);
                }
            }
        }
        assert!(saturated > 0);
    }

    proptest! {
        #[test]
        fn nu_is_additive(x in 1i64..1_000_000_000, y in 1i64..1_000_000_000, neg in any::<bool>()) {
            let (bx, by) = (BigInt::from(if neg { -x } else { x }), BigInt::from(y));
            for p in [2u64, 3, 5, 7] {
                prop_assert_eq!(nu(&(&bx * &by), p).unwrap(), nu(&bx, p).unwrap() + nu(&by, p).unwrap());
            }
        }

        #[test]
        fn truncated_exact_below_width(x in any::<u64>(), w in prop::sample::select(vec![24u32, 32, 64])) {
            if let Nu2::Exact(v) = nu2_truncated(TruncatedResidue::new(x, w)) {
                prop_assert!(v < w);
                prop_assert_eq!(v as u64, nu(&BigInt::from(x), 2).unwrap());
            }
        }
    }
}
