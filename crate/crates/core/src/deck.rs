//! Subsequence occurrence counts and k-decks.
//!
//! The k-deck of a string `x` of length `n` is the distribution of the
//! subsequence read off a uniformly random set of `k` positions:
//! `D_k(x)_v = #(v, x) / C(n, k)`, where `#(v, x)` counts the position sets
//! spelling `v`. A population's deck is the weighted average of its strings'
//! decks. Entries are indexed by the integer encoding of `v` with the first
//! bit most significant.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::AddAssign;

use num_bigint::{BigInt, BigUint};
#[allow(unused_imports)]
use num_traits::float::Float as _;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{binomial, binomial_u128, to_f64, Q};
use crate::channel::TraceBatch;
use crate::error::{invalid_input, invalid_param, Error, Result};
use crate::model::{BitString, Population};

/// Largest supported deck order.
pub const MAX_K: usize = 24;

fn check_k(k: usize) -> Result<()> {
    if k > MAX_K {
        return Err(Error::LimitExceeded { what: "k", limit: MAX_K as u64, got: k as u64 });
    }
    Ok(())
}

/// Number of position sets `t_1 < ... < t_k` with `z[t_i] = v[i]`.
pub fn count_occurrences(v: &[u8], z: &[u8]) -> BigUint {
    // ways[j] = number of embeddings of v[..j] into the prefix read so far.
    let mut ways = vec![BigUint::zero(); v.len() + 1];
    ways[0] = BigUint::one();
    for &c in z {
        for j in (1..=v.len()).rev() {
            if v[j - 1] == c {
                let prev = ways[j - 1].clone();
                ways[j] += prev;
            }
        }
    }
    ways.pop().unwrap_or_else(BigUint::one)
}

/// Occurrence counts of every `v` in `{0,1}^k` inside `z`, indexed by `v`.
///
/// Runs in `O(|z| 2^k)` by keeping, for every prefix length `j <= k` and
/// every pattern of that length, the number of its embeddings so far.
pub fn all_counts<T>(z: &[u8], k: usize) -> Vec<T>
where
    T: Clone + Zero + One + for<'a> AddAssign<&'a T>,
{
    let mut layers: Vec<Vec<T>> = (0..=k).map(|j| vec![T::zero(); 1 << j]).collect();
    layers[0][0] = T::one();
    for (i, &c) in z.iter().enumerate() {
        let top = k.min(i + 1);
        for j in (1..=top).rev() {
            let (lower, upper) = layers.split_at_mut(j);
            let src = &lower[j - 1];
            let dst = &mut upper[0];
            for (p, val) in src.iter().enumerate() {
                if !val.is_zero() {
                    dst[(p << 1) | c as usize] += val;
                }
            }
        }
    }
    layers.pop().expect("k + 1 layers")
}

/// Exact occurrence counts of all `k`-patterns in `x` as `u128`.
///
/// Fails when `C(|x|, k)` does not fit in `u128`.
pub fn occurrence_counts(x: &BitString, k: usize) -> Result<Vec<u128>> {
    check_k(k)?;
    binomial_u128(x.len() as u64, k as u64).ok_or(Error::LimitExceeded {
        what: "C(n, k) bits",
        limit: 128,
        got: 129,
    })?;
    Ok(all_counts::<u128>(x.bits(), k))
}

/// Values of a deck.
#[derive(Clone, Debug, PartialEq)]
pub enum DeckEntries {
    /// Exact rational entries summing to one.
    Exact(Vec<Q>),
    /// Unbiased estimates from traces, clamped at zero and not renormalised.
    Estimated {
        /// Entry estimates.
        values: Vec<f64>,
        /// Sum of the estimates before any clamping.
        raw_sum: f64,
        /// Number of traces used.
        traces: u64,
    },
}

/// A k-deck (exact or estimated) of strings of length `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct Deck {
    /// Subsequence length.
    pub k: usize,
    /// Source string length.
    pub n: usize,
    /// Entry values indexed by pattern.
    pub entries: DeckEntries,
}

impl Deck {
    /// Entry for pattern `v` as `f64`.
    pub fn value_f64(&self, v: usize) -> f64 {
        match &self.entries {
            DeckEntries::Exact(e) => to_f64(&e[v]),
            DeckEntries::Estimated { values, .. } => values[v],
        }
    }

    /// All entries as `f64`.
    pub fn values_f64(&self) -> Vec<f64> {
        (0..1usize << self.k).map(|v| self.value_f64(v)).collect()
    }

    /// Exact entries, if the deck is exact.
    pub fn exact(&self) -> Option<&[Q]> {
        match &self.entries {
            DeckEntries::Exact(e) => Some(e),
            DeckEntries::Estimated { .. } => None,
        }
    }

    /// Whether the deck holds exact values.
    pub fn is_exact(&self) -> bool {
        matches!(self.entries, DeckEntries::Exact(_))
    }
}

/// Exact k-deck of a single string.
pub fn exact_deck_string(x: &BitString, k: usize) -> Result<Deck> {
    check_k(k)?;
    if k > x.len() {
        return Err(invalid_param(format!("k = {k} exceeds n = {}", x.len())));
    }
    let total = BigInt::from(binomial(x.len() as u64, k as u64));
    let counts = all_counts::<BigUint>(x.bits(), k);
    let entries = counts.into_iter().map(|c| Q::new(BigInt::from(c), total.clone())).collect();
    Ok(Deck { k, n: x.len(), entries: DeckEntries::Exact(entries) })
}

/// Exact k-deck of a population.
pub fn exact_deck(x: &Population, k: usize) -> Result<Deck> {
    check_k(k)?;
    if k > x.n() {
        return Err(invalid_param(format!("k = {k} exceeds n = {}", x.n())));
    }
    let total = BigInt::from(binomial(x.n() as u64, k as u64));
    let mut acc = vec![Q::zero(); 1 << k];
    for (s, w) in x.support() {
        let counts = all_counts::<BigUint>(s.bits(), k);
        for (a, c) in acc.iter_mut().zip(counts) {
            if !c.is_zero() {
                *a += w * Q::from_integer(BigInt::from(c));
            }
        }
    }
    let entries = acc.into_iter().map(|a| a / Q::from_integer(total.clone())).collect();
    Ok(Deck { k, n: x.n(), entries: DeckEntries::Exact(entries) })
}

enum Totals {
    Small(Vec<u128>),
    Big(Vec<BigUint>),
}

/// Estimates the population k-deck from traces of the deletion channel.
///
/// Entry `v` is the mean of `#(v, trace)` divided by `(1 - delta)^k C(n, k)`.
/// Occurrence counts are accumulated as exact integers, so the result does
/// not depend on the order in which traces are processed.
pub fn estimate_deck(batch: &TraceBatch, k: usize) -> Result<Deck> {
    check_k(k)?;
    let n = batch.n;
    if k > n {
        return Err(invalid_param(format!("k = {k} exceeds n = {n}")));
    }
    if batch.traces.is_empty() {
        return Err(invalid_input("no traces to estimate from"));
    }
    let rho = 1.0 - batch.delta;
    if !(rho > 0.0) || batch.delta < 0.0 {
        return Err(invalid_param("deletion probability must lie in [0, 1)"));
    }
    if let Some(t) = batch.traces.iter().find(|t| t.len() > n) {
        return Err(invalid_input(format!("trace of length {} is longer than n = {n}", t.len())));
    }
    let m = batch.traces.len() as u128;
    let fits = binomial_u128(n as u64, k as u64).and_then(|c| c.checked_mul(m)).is_some();
    let totals = if fits {
        let mut acc = vec![0u128; 1 << k];
        for t in &batch.traces {
            for (a, c) in acc.iter_mut().zip(all_counts::<u128>(t, k)) {
                *a += c;
            }
        }
        Totals::Small(acc)
    } else {
        let mut acc = vec![BigUint::zero(); 1 << k];
        for t in &batch.traces {
            for (a, c) in acc.iter_mut().zip(all_counts::<BigUint>(t, k)) {
                *a += c;
            }
        }
        Totals::Big(acc)
    };
    let scale = batch.traces.len() as f64
        * rho.powi(k as i32)
        * to_f64(&Q::from_integer(BigInt::from(binomial(n as u64, k as u64))));
    let values: Vec<f64> = match totals {
        Totals::Small(acc) => acc.iter().map(|&c| c as f64 / scale).collect(),
        Totals::Big(acc) => acc.iter().map(|c| c.to_f64().unwrap_or(f64::INFINITY) / scale).collect(),
    };
    let raw_sum = values.iter().sum();
    let values = values.into_iter().map(|v| v.max(0.0)).collect();
    Ok(Deck { k, n, entries: DeckEntries::Estimated { values, raw_sum, traces: batch.traces.len() as u64 } })
}

/// Sup-norm distance between two decks.
#[derive(Clone, Debug, PartialEq)]
pub enum DeckDistance {
    /// Both decks exact.
    Exact(Q),
    /// At least one deck estimated.
    Approx(f64),
}

impl DeckDistance {
    /// The distance as `f64`.
    pub fn to_f64(&self) -> f64 {
        match self {
            DeckDistance::Exact(q) => to_f64(q),
            DeckDistance::Approx(v) => *v,
        }
    }
}

/// `max_v |P_v - Q_v|`; exact when both decks are exact.
pub fn deck_distance(p: &Deck, q: &Deck) -> Result<DeckDistance> {
    if p.k != q.k || p.n != q.n {
        return Err(invalid_input(format!("deck mismatch: (k, n) = ({}, {}) vs ({}, {})", p.k, p.n, q.k, q.n)));
    }
    match (&p.entries, &q.entries) {
        (DeckEntries::Exact(a), DeckEntries::Exact(b)) => {
            let d = a.iter().zip(b).map(|(x, y)| (x - y).abs()).max().unwrap_or_else(Q::zero);
            Ok(DeckDistance::Exact(d))
        }
        _ => {
            let a = p.values_f64();
            let b = q.values_f64();
            Ok(DeckDistance::Approx(a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)))
        }
    }
}

/// Smallest `k` whose k-decks separate `x` and `y`, or `None` when `x == y`.
pub fn minimal_distinguishing_k(x: &BitString, y: &BitString) -> Result<Option<usize>> {
    if x.len() != y.len() {
        return Err(invalid_input("strings differ in length"));
    }
    if x == y {
        return Ok(None);
    }
    for k in 1..=x.len() {
        if all_counts::<BigUint>(x.bits(), k) != all_counts::<BigUint>(y.bits(), k) {
            return Ok(Some(k));
        }
    }
    Err(crate::error::violation("distinct strings with identical n-decks"))
}

/// Exact expected value of trace bit `j` (zero when the trace is shorter),
/// for every `j < n`, for a population sent through the channel with
/// retention probability `rho`.
///
/// Bit `i` of the source lands at trace position `j` exactly when it
/// survives and `j` of the `i` bits before it survive.
pub fn mean_trace(x: &Population, rho: &Q) -> Vec<Q> {
    let n = x.n();
    let del = Q::one() - rho;
    let marginal: Vec<Q> =
        (0..n).map(|i| x.support().iter().filter(|(s, _)| s.get(i) == 1).fold(Q::zero(), |a, (_, w)| a + w)).collect();
    (0..n)
        .map(|j| {
            (j..n).fold(Q::zero(), |acc, i| {
                let c = Q::from_integer(BigInt::from(binomial(i as u64, j as u64)));
                acc + c * num_traits::pow(rho.clone(), j + 1) * num_traits::pow(del.clone(), i - j) * &marginal[i]
            })
        })
        .collect()
}
