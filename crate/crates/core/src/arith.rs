//! Exact arithmetic helpers: rationals, binomials, parsing and conversions.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
#[allow(unused_imports)]
use num_traits::float::Float as _;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{invalid_input, Result};

/// Arbitrary-precision rational number used throughout the crate.
pub type Q = BigRational;

/// Builds the rational `num / den`.
pub fn q(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

/// Builds an integer-valued rational.
pub fn qi(v: i64) -> Q {
    Q::from_integer(BigInt::from(v))
}

/// Lifts a big integer into the rationals.
pub fn q_big(v: BigInt) -> Q {
    Q::from_integer(v)
}

/// Binomial coefficient `C(n, k)` over the naturals.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// Binomial coefficient with signed arguments; zero whenever `k < 0`,
/// `n < 0` or `k > n`.
pub fn binomial_i(n: i64, k: i64) -> BigInt {
    if n < 0 || k < 0 || k > n {
        return BigInt::zero();
    }
    BigInt::from(binomial(n as u64, k as u64))
}

/// `C(n, k)` as a `u128` when it fits.
pub fn binomial_u128(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k as u128 {
        // acc * (n - i) / (i + 1) stays integral at every step.
        let g = acc.gcd(&(i + 1));
        let a = acc / g;
        let b = (n as u128 - i) / ((i + 1) / g);
        acc = a.checked_mul(b)?;
    }
    Some(acc)
}

/// `n!` as a big integer.
pub fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * i)
}

/// Converts a rational to the nearest `f64`.
pub fn to_f64(v: &Q) -> f64 {
    v.to_f64().unwrap_or_else(|| if v.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY })
}

/// Base-2 logarithm of a positive big integer, accurate to `f64` precision
/// even when the integer has far more than 1024 bits.
pub fn log2_biguint(v: &BigUint) -> f64 {
    let bits = v.bits();
    if bits <= 1000 {
        return v.to_f64().unwrap_or(f64::INFINITY).log2();
    }
    let shift = bits - 64;
    let top = (v >> shift).to_f64().unwrap_or(f64::INFINITY);
    top.log2() + shift as f64
}

/// Base-2 logarithm of `|v|` for a nonzero rational; `-inf` for zero.
pub fn log2_abs(v: &Q) -> f64 {
    if v.is_zero() {
        return f64::NEG_INFINITY;
    }
    log2_biguint(v.numer().magnitude()) - log2_biguint(v.denom().magnitude())
}

/// Parses `"p/q"`, an integer, or a finite decimal such as `"0.3"` or
/// `"-1.25e-2"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Q> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let num: BigInt = a.trim().parse().map_err(|_| invalid_input(["bad numerator in ", s].concat()))?;
        let den: BigInt = b.trim().parse().map_err(|_| invalid_input(["bad denominator in ", s].concat()))?;
        if den.is_zero() {
            return Err(invalid_input(["zero denominator in ", s].concat()));
        }
        return Ok(Q::new(num, den));
    }
    parse_decimal(s)
}

fn parse_decimal(s: &str) -> Result<Q> {
    let bad = || invalid_input(["not a number: ", s].concat());
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let mut digits = String::with_capacity(int_part.len() + frac_part.len());
    digits.push_str(int_part);
    digits.push_str(frac_part);
    let mut num: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().map_err(|_| bad())? };
    if neg {
        num = -num;
    }
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    Ok(if scale >= 0 {
        Q::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        Q::new(num, num_traits::pow(ten, (-scale) as usize))
    })
}

/// Exact rational value of a finite `f64`.
pub fn from_f64_exact(x: f64) -> Option<Q> {
    Q::from_float(x)
}

/// Canonical `"p/q"` rendering (integers render without a denominator).
pub fn fmt_rational(v: &Q) -> String {
    if v.denom().is_one() {
        v.numer().to_string()
    } else {
        let mut s = v.numer().to_string();
        s.push('/');
        s.push_str(&v.denom().to_string());
        s
    }
}

/// Absolute value of a rational.
pub fn abs(v: &Q) -> Q {
    v.abs()
}

/// Integer `floor(v)` for a rational.
pub fn floor(v: &Q) -> BigInt {
    v.floor().to_integer()
}

/// Sign of a big integer as `-1`, `0` or `1`.
pub fn sign(v: &BigInt) -> i8 {
    match v.sign() {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (0..k).rev().find(|&i| cur[i] < n - k + i) else {
            return out;
        };
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}
