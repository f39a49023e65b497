//! Strings, populations and restrictions.
//!
//! A [`Population`] is a finitely supported distribution over binary strings
//! of one length `n`, with exact rational weights and a declared bound `ell`
//! on its support size.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::arith::{fmt_rational, Q};
use crate::error::{invalid_input, invalid_param, Result};

/// A binary string stored one bit per byte (`0` or `1`).
///
/// Ordering is lexicographic with `0 < 1`, and the integer encoding used for
/// deck indices reads `bits[0]` as the most significant bit.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct BitString {
    bits: Vec<u8>,
}

impl BitString {
    /// Wraps a bit vector; every entry must be 0 or 1.
    pub fn from_bits(bits: Vec<u8>) -> Result<Self> {
        if bits.iter().any(|&b| b > 1) {
            return Err(invalid_input("bit values must be 0 or 1"));
        }
        Ok(Self { bits })
    }

    /// Parses a string of `'0'`/`'1'` characters.
    pub fn parse(s: &str) -> Result<Self> {
        let bits = s
            .bytes()
            .map(|c| match c {
                b'0' => Ok(0),
                b'1' => Ok(1),
                _ => Err(invalid_input(format!("non-binary character {:?} in {:?}", c as char, s))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Ok(Self { bits })
    }

    /// The string of length `n` whose most-significant-first encoding is `value`.
    pub fn from_index(value: u64, n: usize) -> Self {
        let bits = (0..n).map(|i| ((value >> (n - 1 - i)) & 1) as u8).collect();
        Self { bits }
    }

    /// Integer encoding with `bits[0]` as the most significant bit.
    ///
    /// Only meaningful for strings of at most 64 bits.
    pub fn to_index(&self) -> u64 {
        self.bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64)
    }

    /// All `2^n` strings of length `n` in lexicographic order.
    pub fn all(n: usize) -> impl Iterator<Item = BitString> {
        (0..1u64 << n).map(move |v| BitString::from_index(v, n))
    }

    /// The all-`bit` string of length `n`.
    pub fn constant(bit: u8, n: usize) -> Self {
        Self { bits: alloc::vec![bit & 1; n] }
    }

    /// Length of the string.
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    /// Whether the string is empty.
    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// The underlying bits.
    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    /// Bit at position `i`.
    pub fn get(&self, i: usize) -> u8 {
        self.bits[i]
    }

    /// Number of ones.
    pub fn weight(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    /// The reversed string.
    pub fn reversed(&self) -> Self {
        let mut bits = self.bits.clone();
        bits.reverse();
        Self { bits }
    }

    /// Bits of `self` at the positions in `positions`.
    pub fn project(&self, positions: &[usize]) -> Vec<u8> {
        positions.iter().map(|&p| self.bits[p]).collect()
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

/// A distribution over strings of a common length with exact weights.
///
/// Invariants: at least one support string, all strings of length `n`,
/// distinct strings, weights strictly positive and summing to exactly one,
/// and `support.len() <= ell`. The support is kept sorted by string.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Population {
    n: usize,
    ell: usize,
    support: Vec<(BitString, Q)>,
}

impl Population {
    /// Validates and builds a population over strings of length `n` with
    /// support bound `ell`.
    pub fn new(n: usize, ell: usize, mut support: Vec<(BitString, Q)>) -> Result<Self> {
        if support.is_empty() {
            return Err(invalid_input("population support is empty"));
        }
        if support.len() > ell {
            return Err(invalid_input(format!("support has {} strings but the bound is {ell}", support.len())));
        }
        let mut total = Q::zero();
        for (s, w) in &support {
            if s.len() != n {
                return Err(invalid_input(format!("string {s} has length {} but n = {n}", s.len())));
            }
            if !w.is_positive() {
                return Err(invalid_input(format!("weight {} of {s} is not positive", fmt_rational(w))));
            }
            total += w;
        }
        if !total.is_one() {
            return Err(invalid_input(format!("weights sum to {} instead of 1", fmt_rational(&total))));
        }
        support.sort_by(|a, b| a.0.cmp(&b.0));
        if support.windows(2).any(|p| p[0].0 == p[1].0) {
            return Err(invalid_input("duplicate support string"));
        }
        Ok(Self { n, ell, support })
    }

    /// Builds a population whose support bound equals its support size,
    /// inferring `n` from the first string.
    pub fn from_entries(support: Vec<(BitString, Q)>) -> Result<Self> {
        let n = support.first().map(|(s, _)| s.len()).ok_or_else(|| invalid_input("population support is empty"))?;
        let ell = support.len();
        Self::new(n, ell, support)
    }

    /// Convenience constructor from `(string, "p/q")` pairs.
    pub fn parse(entries: &[(&str, &str)]) -> Result<Self> {
        let support = entries
            .iter()
            .map(|(s, w)| Ok((BitString::parse(s)?, crate::arith::parse_rational(w)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_entries(support)
    }

    /// Point mass on one string.
    pub fn point(s: BitString) -> Self {
        let n = s.len();
        Self { n, ell: 1, support: alloc::vec![(s, Q::one())] }
    }

    /// Returns the same distribution with a different support bound.
    pub fn with_bound(mut self, ell: usize) -> Result<Self> {
        if self.support.len() > ell {
            return Err(invalid_param(format!("support size {} exceeds bound {ell}", self.support.len())));
        }
        self.ell = ell;
        Ok(self)
    }

    /// String length.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Declared support bound.
    pub fn ell(&self) -> usize {
        self.ell
    }

    /// Support strings with their weights, sorted by string.
    pub fn support(&self) -> &[(BitString, Q)] {
        &self.support
    }

    /// Weight of `s` (zero when `s` is not in the support).
    pub fn weight(&self, s: &BitString) -> Q {
        match self.support.binary_search_by(|(t, _)| t.cmp(s)) {
            Ok(i) => self.support[i].1.clone(),
            Err(_) => Q::zero(),
        }
    }

    /// The population of reversed strings.
    pub fn reversed(&self) -> Self {
        let support = self.support.iter().map(|(s, w)| (s.reversed(), w.clone())).collect();
        Self::new(self.n, self.ell, support).expect("reversal preserves the invariants")
    }
}

/// A set of positions `T` (strictly increasing) and the pattern `c` the
/// string must show there.
#[derive(Clone, PartialEq, Eq, Debug, PartialOrd, Ord, Hash)]
pub struct Restriction {
    positions: Vec<usize>,
    pattern: Vec<u8>,
}

impl Restriction {
    /// Validates `positions` (strictly increasing, below `n`) and `pattern`
    /// (same length, binary).
    pub fn new(n: usize, positions: Vec<usize>, pattern: Vec<u8>) -> Result<Self> {
        if positions.len() != pattern.len() {
            return Err(invalid_input("restriction positions and pattern differ in length"));
        }
        if positions.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid_input("restriction positions must be strictly increasing"));
        }
        if positions.last().is_some_and(|&p| p >= n) {
            return Err(invalid_input(format!("restriction position out of range for n = {n}")));
        }
        if pattern.iter().any(|&b| b > 1) {
            return Err(invalid_input("restriction pattern must be binary"));
        }
        Ok(Self { positions, pattern })
    }

    /// The positions `T`.
    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    /// The pattern `c`.
    pub fn pattern(&self) -> &[u8] {
        &self.pattern
    }

    /// Whether `s` agrees with the pattern on the positions.
    pub fn matches(&self, s: &BitString) -> bool {
        self.positions.iter().zip(&self.pattern).all(|(&p, &c)| s.get(p) == c)
    }
}

/// Total mass of the support strings that match the restriction.
pub fn restrict(x: &Population, r: &Restriction) -> Result<Q> {
    if r.positions.last().is_some_and(|&p| p >= x.n) {
        return Err(invalid_input("restriction position out of range"));
    }
    Ok(x.support.iter().filter(|(s, _)| r.matches(s)).fold(Q::zero(), |acc, (_, w)| acc + w))
}

/// Total variation distance `(1/2) sum_z |X(z) - Y(z)|`.
pub fn tv_distance(x: &Population, y: &Population) -> Result<Q> {
    if x.n != y.n {
        return Err(invalid_input(format!("length mismatch: {} vs {}", x.n, y.n)));
    }
    let mut total = Q::zero();
    let (mut i, mut j) = (0, 0);
    let (a, b) = (&x.support, &y.support);
    while i < a.len() || j < b.len() {
        let ord = match (a.get(i), b.get(j)) {
            (Some(p), Some(q)) => p.0.cmp(&q.0),
            (Some(_), None) => core::cmp::Ordering::Less,
            _ => core::cmp::Ordering::Greater,
        };
        match ord {
            core::cmp::Ordering::Less => {
                total += &a[i].1;
                i += 1;
            }
            core::cmp::Ordering::Greater => {
                total += &b[j].1;
                j += 1;
            }
            core::cmp::Ordering::Equal => {
                total += (&a[i].1 - &b[j].1).abs();
                i += 1;
                j += 1;
            }
        }
    }
    Ok(total / Q::from_integer(BigInt::from(2)))
}

/// Outcome of [`quantize`]: the rounded population and the strings whose
/// weight rounded to zero and were removed.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Quantized {
    /// Rounded population, weights in multiples of the grid except possibly
    /// the last support string, which absorbs the remainder.
    pub population: Population,
    /// Strings dropped because their rounded weight was not positive.
    pub dropped: Vec<BitString>,
}

/// Rounds every weight but the last (in string order) half-up to a multiple
/// of `grid` and fixes the last so the total is one.
///
/// Strings whose rounded weight is not positive are dropped and the rule is
/// reapplied to the rest.
pub fn quantize(x: &Population, grid: &Q) -> Result<Quantized> {
    if !grid.is_positive() || grid > &Q::one() {
        return Err(invalid_param("grid must lie in (0, 1]"));
    }
    let half = Q::new(BigInt::one(), BigInt::from(2));
    let mut kept: Vec<(BitString, Q)> = x.support.clone();
    let mut dropped = Vec::new();
    loop {
        let last = kept.len() - 1;
        let mut out = Vec::with_capacity(kept.len());
        let mut used = Q::zero();
        for (s, w) in &kept[..last] {
            let steps = (w / grid + &half).floor();
            let r = steps * grid;
            used += &r;
            out.push((s.clone(), r));
        }
        out.push((kept[last].0.clone(), Q::one() - used));
        let bad: Vec<usize> = (0..out.len()).filter(|&i| !out[i].1.is_positive()).collect();
        if bad.is_empty() {
            let population = Population::new(x.n, x.ell, out)?;
            return Ok(Quantized { population, dropped });
        }
        if bad.len() == out.len() {
            return Err(invalid_param("grid rounds every weight to zero"));
        }
        for &i in bad.iter().rev() {
            dropped.push(kept.remove(i).0);
        }
    }
}

/// Formats a population as `{s:w, ...}` for diagnostics.
pub fn describe(x: &Population) -> String {
    let mut s = String::from("{");
    for (i, (b, w)) in x.support.iter().enumerate() {
        if i > 0 {
            s.push_str(", ");
        }
        s.push_str(&format!("{b}:{}", fmt_rational(w)));
    }
    s.push('}');
    s
}
