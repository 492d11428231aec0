//! Ternary recurrences whose characteristic polynomial has a double root.
//!
//! A [`RecurrenceSpec`] holds `f(X) = X^3 - r1 X^2 - r2 X - r3` and the
//! initial terms. When `f = (X - alpha)^2 (X - beta)` with coprime nonzero
//! integers `|alpha| != |beta|`, the sequence has the closed form
//! `u_n = (a n + c) alpha^n + b beta^n` with rational `a, b, c`. The
//! coefficients are obtained by Cramer's rule on the 3x3 system fixed by
//! `u_0, u_1, u_2`, and stored over the unreduced determinant.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{factorial, ln_abs};
use crate::error::{Error, Result};

/// Above this index [`eval_term`] switches from iteration to the closed form.
pub const ITERATION_LIMIT: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "SpecJson", into = "SpecJson")]
pub struct RecurrenceSpec {
    pub r1: i64,
    pub r2: i64,
    pub r3: i64,
    pub u0: i64,
    pub u1: i64,
    pub u2: i64,
}

#[derive(Serialize, Deserialize)]
struct SpecJson {
    r: [i64; 3],
    u: [i64; 3],
}

impl From<SpecJson> for RecurrenceSpec {
    fn from(j: SpecJson) -> Self {
        RecurrenceSpec::new(j.r, j.u)
    }
}

impl From<RecurrenceSpec> for SpecJson {
    fn from(s: RecurrenceSpec) -> Self {
        SpecJson {
            r: [s.r1, s.r2, s.r3],
            u: [s.u0, s.u1, s.u2],
        }
    }
}

impl RecurrenceSpec {
    pub fn new(r: [i64; 3], u: [i64; 3]) -> Self {
        RecurrenceSpec {
            r1: r[0],
            r2: r[1],
            r3: r[2],
            u0: u[0],
            u1: u[1],
            u2: u[2],
        }
    }

    /// Cullen numbers `C_n = n 2^n + 1`.
    pub fn cullen() -> Self {
        RecurrenceSpec::new([5, -8, 4], [1, 3, 9])
    }

    /// Woodall numbers `W_n = n 2^n - 1`.
    pub fn woodall() -> Self {
        RecurrenceSpec::new([5, -8, 4], [-1, 1, 7])
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "cullen" => Some(Self::cullen()),
            "woodall" => Some(Self::woodall()),
            _ => None,
        }
    }

    /// `Y = max |r_i|, |u_i|`.
    pub fn height(&self) -> i64 {
        [self.r1, self.r2, self.r3, self.u0, self.u1, self.u2]
            .iter()
            .map(|v| v.abs())
            .max()
            .unwrap_or(0)
    }

    /// `u_n` by iterating `u_{n+3} = r1 u_{n+2} + r2 u_{n+1} + r3 u_n`.
    pub fn iterate_term(&self, n: u64) -> BigInt {
        let mut w = [BigInt::from(self.u0), BigInt::from(self.u1), BigInt::from(self.u2)];
        if n < 3 {
            return w[n as usize].clone();
        }
        let (r1, r2, r3) = (BigInt::from(self.r1), BigInt::from(self.r2), BigInt::from(self.r3));
        for _ in 2..n {
            let next = &r1 * &w[2] + &r2 * &w[1] + &r3 * &w[0];
            w.rotate_left(1);
            w[2] = next;
        }
        w[2].clone()
    }

    /// The first `count` terms by iteration.
    pub fn terms(&self, count: usize) -> Vec<BigInt> {
        let mut out: Vec<BigInt> = [self.u0, self.u1, self.u2]
            .iter()
            .take(count)
            .map(|&v| BigInt::from(v))
            .collect();
        while out.len() < count {
            let k = out.len();
            let next = self.r1 * &out[k - 1] + self.r2 * &out[k - 2] + self.r3 * &out[k - 3];
            out.push(next);
        }
        out
    }
}

/// Closed form `u_n = (a n + c) alpha^n + b beta^n` with
/// `a = delta1 / delta`, `c = delta2 / delta`, `b = delta3 / delta`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClosedForm {
    pub alpha: i64,
    pub beta: i64,
    pub delta: BigInt,
    pub delta1: BigInt,
    pub delta2: BigInt,
    pub delta3: BigInt,
}

impl ClosedForm {
    pub fn a(&self) -> BigRational {
        BigRational::new(self.delta1.clone(), self.delta.clone())
    }

    pub fn c(&self) -> BigRational {
        BigRational::new(self.delta2.clone(), self.delta.clone())
    }

    pub fn b(&self) -> BigRational {
        BigRational::new(self.delta3.clone(), self.delta.clone())
    }

    /// `delta * (a n + c) alpha^n`, an integer.
    fn scaled_poly_part(&self, n: u64) -> BigInt {
        (&self.delta1 * BigInt::from(n) + &self.delta2) * BigInt::from(self.alpha).pow(n as u32)
    }

    /// `delta * b beta^n`, an integer.
    fn scaled_geometric_part(&self, n: u64) -> BigInt {
        &self.delta3 * BigInt::from(self.beta).pow(n as u32)
    }

    /// `u_n` from the closed form. The division by `delta` is exact.
    pub fn term(&self, n: u64) -> BigInt {
        let num = self.scaled_poly_part(n) + self.scaled_geometric_part(n);
        let (q, r) = num.div_rem(&self.delta);
        assert!(r.is_zero(), "closed form produced a non-integer at n = {n}");
        q
    }

    /// `p(n) alpha^n` as an exact rational.
    pub fn poly_part(&self, n: u64) -> BigRational {
        BigRational::new(self.scaled_poly_part(n), self.delta.clone())
    }

    /// `b beta^n` as an exact rational.
    pub fn geometric_part(&self, n: u64) -> BigRational {
        BigRational::new(self.scaled_geometric_part(n), self.delta.clone())
    }

    pub fn max_height(&self) -> f64 {
        [self.a(), self.b(), self.c()]
            .iter()
            .map(rational_height)
            .fold(0.0, f64::max)
    }
}

fn det3(m: &[[BigInt; 3]; 3]) -> BigInt {
    &m[0][0] * (&m[1][1] * &m[2][2] - &m[1][2] * &m[2][1]) - &m[0][1] * (&m[1][0] * &m[2][2] - &m[1][2] * &m[2][0])
        + &m[0][2] * (&m[1][0] * &m[2][1] - &m[1][1] * &m[2][0])
}

/// Monic gcd of two polynomials over Q, coefficients lowest degree first.
fn poly_gcd(mut a: Vec<BigRational>, mut b: Vec<BigRational>) -> Vec<BigRational> {
    fn trim(p: &mut Vec<BigRational>) {
        while p.last().is_some_and(|c| c.is_zero()) {
            p.pop();
        }
    }
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        // a mod b
        let lead = b.last().unwrap().clone();
        while a.len() >= b.len() {
            let shift = a.len() - b.len();
            let coef = a.last().unwrap() / &lead;
            for (i, bc) in b.iter().enumerate() {
                a[i + shift] = &a[i + shift] - &coef * bc;
            }
            trim(&mut a);
            if a.is_empty() {
                break;
            }
        }
        std::mem::swap(&mut a, &mut b);
    }
    if let Some(lead) = a.last().cloned() {
        for c in a.iter_mut() {
            *c = &*c / &lead;
        }
    }
    a
}

/// The double root of `f`, from `gcd(f, f')`.
fn double_root(spec: &RecurrenceSpec) -> Result<i64> {
    let q = |v: i64| BigRational::from_integer(BigInt::from(v));
    let f = vec![q(-spec.r3), q(-spec.r2), q(-spec.r1), q(1)];
    let df = vec![q(-spec.r2), q(-2 * spec.r1), q(3)];
    let g = poly_gcd(f, df);
    match g.len() {
        // degree 1: X - alpha
        2 => {
            let root = -&g[0];
            if !root.is_integer() {
                return Err(Error::NoDoubleRoot);
            }
            i64::try_from(root.to_integer()).map_err(|_| Error::NoDoubleRoot)
        }
        // (X - alpha)^3: alpha = beta
        3 => {
            let alpha = spec.r1 / 3;
            Err(Error::DegenerateRatio { alpha, beta: alpha })
        }
        _ => Err(Error::NoDoubleRoot),
    }
}

/// Validate `spec` and solve for the closed form by Cramer's rule.
pub fn derive_closed_form(spec: &RecurrenceSpec) -> Result<ClosedForm> {
    let alpha = double_root(spec)?;
    let beta = spec.r1 - 2 * alpha;
    let (a, b) = (alpha as i128, beta as i128);
    let viete = 2 * a + b == spec.r1 as i128 && a * a + 2 * a * b == -(spec.r2 as i128) && a * a * b == spec.r3 as i128;
    if !viete {
        return Err(Error::NoDoubleRoot);
    }
    if alpha == 0 || beta == 0 {
        return Err(Error::ZeroRoot);
    }
    if alpha.abs() == beta.abs() {
        return Err(Error::DegenerateRatio { alpha, beta });
    }
    if spec.r1.gcd(&spec.r2).gcd(&spec.r3) != 1 {
        return Err(Error::NotCoprime(format!(
            "gcd(r1, r2, r3) = {}",
            spec.r1.gcd(&spec.r2).gcd(&spec.r3)
        )));
    }
    if alpha.gcd(&beta) != 1 {
        return Err(Error::NotCoprime(format!(
            "gcd(alpha, beta) = gcd({alpha}, {beta}) = {}",
            alpha.gcd(&beta)
        )));
    }
    let y = spec.height();
    if y < 3 {
        return Err(Error::SmallHeight(y));
    }

    let z = |v: i128| BigInt::from(v);
    let column_a = [z(0), z(a), z(2 * a * a)];
    let column_c = [z(1), z(a), z(a * a)];
    let column_b = [z(1), z(b), z(b * b)];
    let rhs = [z(spec.u0 as i128), z(spec.u1 as i128), z(spec.u2 as i128)];
    let matrix = |cols: [&[BigInt; 3]; 3]| -> [[BigInt; 3]; 3] {
        std::array::from_fn(|row| std::array::from_fn(|col| cols[col][row].clone()))
    };
    let delta = det3(&matrix([&column_a, &column_c, &column_b]));
    let delta1 = det3(&matrix([&rhs, &column_c, &column_b]));
    let delta2 = det3(&matrix([&column_a, &rhs, &column_b]));
    let delta3 = det3(&matrix([&column_a, &column_c, &rhs]));
    if delta1.is_zero() {
        return Err(Error::ZeroLinearCoefficient);
    }
    Ok(ClosedForm {
        alpha,
        beta,
        delta,
        delta1,
        delta2,
        delta3,
    })
}

/// `u_n`: iteration up to [`ITERATION_LIMIT`], the closed form above it.
pub fn eval_term(spec: &RecurrenceSpec, n: u64) -> Result<BigInt> {
    if n <= ITERATION_LIMIT {
        Ok(spec.iterate_term(n))
    } else {
        Ok(derive_closed_form(spec)?.term(n))
    }
}

/// True iff `A m! = b beta^n` or `A m! = p(n) alpha^n`.
pub fn is_degenerate(cf: &ClosedForm, a_coef: &BigInt, m: u64, n: u64) -> bool {
    let lhs = a_coef * BigInt::from(factorial(m)) * &cf.delta;
    lhs == cf.scaled_geometric_part(n) || lhs == cf.scaled_poly_part(n)
}

/// Logarithmic height of a rational: `log max(|p|, |q|)` in lowest terms,
/// with `h(0) = 0`.
pub fn rational_height(q: &BigRational) -> f64 {
    if q.is_zero() {
        return 0.0;
    }
    // BigRational is kept reduced with a positive denominator.
    let num = q.numer().abs();
    let den = q.denom().abs();
    let m = if num > den { num } else { den };
    if m.is_one() {
        0.0
    } else {
        ln_abs(&m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn cullen_closed_form() {
        let cf = derive_closed_form(&RecurrenceSpec::cullen()).unwrap();
        assert_eq!((cf.alpha, cf.beta), (2, 1));
        assert_eq!(cf.a(), rat(1, 1));
        assert_eq!(cf.c(), rat(0, 1));
        assert_eq!(cf.b(), rat(1, 1));
        assert_eq!(cf.delta.abs(), BigInt::from(2));
    }

    #[test]
    fn woodall_closed_form() {
        let cf = derive_closed_form(&RecurrenceSpec::woodall()).unwrap();
        assert_eq!((cf.alpha, cf.beta), (2, 1));
        assert_eq!(cf.a(), rat(1, 1));
        assert_eq!(cf.c(), rat(0, 1));
        assert_eq!(cf.b(), rat(-1, 1));
    }

    #[test]
    fn geometric_initials_rejected() {
        let spec = RecurrenceSpec::new([5, -8, 4], [1, 2, 4]);
        assert_eq!(derive_closed_form(&spec), Err(Error::ZeroLinearCoefficient));
    }

    #[test]
    fn validation_errors() {
        // (X-1)(X-2)(X-3): no repeated root
        let s = RecurrenceSpec::new([6, -11, 6], [0, 1, 2]);
        assert_eq!(derive_closed_form(&s), Err(Error::NoDoubleRoot));
        // (X-2)^2 (X+2)
        let s = RecurrenceSpec::new([2, 4, -8], [0, 1, 2]);
        assert!(matches!(derive_closed_form(&s), Err(Error::DegenerateRatio { .. })));
        // (X-2)^2 (X-4): gcd(alpha, beta) = 2
        let s = RecurrenceSpec::new([8, -20, 16], [0, 1, 2]);
        assert!(matches!(derive_closed_form(&s), Err(Error::NotCoprime(_))));
        // (X-3)^2 X
        let s = RecurrenceSpec::new([6, -9, 0], [0, 1, 2]);
        assert_eq!(derive_closed_form(&s), Err(Error::ZeroRoot));
        // (X-1)^3
        let s = RecurrenceSpec::new([3, -3, 1], [0, 1, 2]);
        assert!(matches!(derive_closed_form(&s), Err(Error::DegenerateRatio { .. })));
        // irreducible cubic X^3 - X - 1
        let s = RecurrenceSpec::new([0, 1, 1], [0, 1, 2]);
        assert_eq!(derive_closed_form(&s), Err(Error::NoDoubleRoot));
    }

    #[test]
    fn terms_match() {
        let c = RecurrenceSpec::cullen();
        let w = RecurrenceSpec::woodall();
        assert_eq!(eval_term(&c, 8).unwrap(), BigInt::from(2049));
        assert_eq!(eval_term(&w, 4).unwrap(), BigInt::from(63));
        assert_eq!(eval_term(&c, 0).unwrap(), BigInt::from(1));
        let cf = derive_closed_form(&c).unwrap();
        for (n, t) in c.terms(40).iter().enumerate() {
            assert_eq!(&cf.term(n as u64), t);
            assert_eq!(&c.iterate_term(n as u64), t);
        }
    }

    #[test]
    fn degeneracy() {
        let cf = derive_closed_form(&RecurrenceSpec::cullen()).unwrap();
        let one = BigInt::one();
        assert!(is_degenerate(&cf, &one, 2, 1));
        assert!(is_degenerate(&cf, &one, 4, 3));
        assert!(!is_degenerate(&cf, &one, 3, 5));
        // A m! = b beta^n = 1 needs m in {0, 1}
        assert!(is_degenerate(&cf, &one, 1, 7));
    }

    #[test]
    fn heights() {
        assert_eq!(rational_height(&rat(1, 1)), 0.0);
        assert_eq!(rational_height(&rat(0, 1)), 0.0);
        assert!((rational_height(&rat(3, 2)) - 3f64.ln()).abs() < 1e-15);
        assert!((rational_height(&rat(-2, 7)) - 7f64.ln()).abs() < 1e-15);
        let cf = derive_closed_form(&RecurrenceSpec::cullen()).unwrap();
        assert_eq!(cf.max_height(), 0.0);
        assert!(cf.max_height() <= (4.0 * 11f64.powi(3)).ln());
    }

    #[test]
    fn json_shape() {
        let s = RecurrenceSpec::cullen();
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(j, r#"{"r":[5,-8,4],"u":[1,3,9]}"#);
        let back: RecurrenceSpec = serde_json::from_str(&j).unwrap();
        assert_eq!(back, s);
        assert_eq!(RecurrenceSpec::preset("Woodall"), Some(RecurrenceSpec::woodall()));
        assert_eq!(RecurrenceSpec::preset("fibonacci"), None);
    }
}
