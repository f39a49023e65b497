//! Population recovery by deck matching.
//!
//! Estimate the k-deck of the unknown population from traces, enumerate
//! every population on at most `ell` candidate strings whose weights are
//! positive multiples of `xi / ell`, and return the candidate whose exact
//! k-deck is closest to the estimate in sup norm.

use alloc::format;
use alloc::vec::Vec;

use num_bigint::BigInt;
#[allow(unused_imports)]
use num_traits::float::Float as _;
use num_traits::{One, ToPrimitive, Zero};

use crate::arith::{binomial_u128, Q};
use crate::channel::TraceBatch;
use crate::deck::{estimate_deck, occurrence_counts, Deck};
use crate::error::{invalid_input, invalid_param, Error, Result};
use crate::model::{BitString, Population};

/// Largest string length for which the default pool of all strings is used.
pub const DEFAULT_POOL_CAP: usize = 14;

/// Parameters of a recovery run.
#[derive(Clone, Debug, PartialEq)]
pub struct RecoveryConfig {
    /// Support bound of the unknown population.
    pub ell: usize,
    /// Deck order.
    pub k: usize,
    /// Accuracy parameter; candidate weights are multiples of `xi / ell`.
    pub xi: Q,
    /// Explicit candidate strings; `None` means all strings of length `n`.
    pub candidate_pool: Option<Vec<BitString>>,
    /// Constant in front of the sample-size formula.
    pub sample_multiplier: f64,
    /// Seed used when the caller samples traces for this run.
    pub seed: u64,
    /// Largest `n` for which the full pool may be used implicitly.
    pub pool_cap: usize,
}

impl RecoveryConfig {
    /// Config with the full default pool and unit multiplier.
    pub fn new(ell: usize, k: usize, xi: Q) -> Self {
        Self { ell, k, xi, candidate_pool: None, sample_multiplier: 1.0, seed: 0, pool_cap: DEFAULT_POOL_CAP }
    }

    /// Weight resolution `xi / ell` of the candidate grid.
    pub fn grid(&self) -> Q {
        &self.xi / Q::from_integer(BigInt::from(self.ell))
    }

    /// Number of grid steps making up total mass one.
    pub fn grid_steps(&self) -> Result<u64> {
        if self.ell == 0 {
            return Err(invalid_param("ell must be positive"));
        }
        if self.xi <= Q::zero() || self.xi > Q::one() {
            return Err(invalid_param("xi must lie in (0, 1]"));
        }
        let inv = self.grid().recip();
        if !inv.is_integer() {
            return Err(invalid_param("xi / ell must be the reciprocal of an integer"));
        }
        inv.to_integer().to_u64().ok_or_else(|| invalid_param("grid too fine"))
    }
}

/// `ceil(multiplier * k / (xi^2 (1 - delta)^(2k)))`.
pub fn required_sample_size(k: usize, xi: &Q, delta: f64, multiplier: f64) -> Result<u64> {
    if *xi <= Q::zero() {
        return Err(invalid_param("xi must be positive"));
    }
    if !(0.0..1.0).contains(&delta) {
        return Err(invalid_param(format!("delta = {delta} must lie in [0, 1)")));
    }
    if !(multiplier > 0.0) {
        return Err(invalid_param("multiplier must be positive"));
    }
    let xi = crate::arith::to_f64(xi);
    let m = multiplier * k as f64 / (xi * xi * (1.0 - delta).powi(2 * k as i32));
    if !m.is_finite() || m > u64::MAX as f64 {
        return Err(Error::LimitExceeded { what: "sample size", limit: u64::MAX, got: u64::MAX });
    }
    Ok(m.ceil() as u64)
}

/// Reference value `ceil(sqrt(n) * log2(n)^(c * ell))` for the asymptotic
/// choice of deck order, with the unspecified exponent constant `c` exposed.
pub fn nominal_k_star(n: usize, ell: usize, c: f64) -> f64 {
    let n = n.max(2) as f64;
    (n.sqrt() * n.log2().powf(c * ell as f64)).ceil()
}

fn resolve_pool(n: usize, cfg: &RecoveryConfig) -> Result<Vec<BitString>> {
    let mut pool = match &cfg.candidate_pool {
        Some(p) => {
            if p.is_empty() {
                return Err(invalid_input("candidate pool is empty"));
            }
            if let Some(s) = p.iter().find(|s| s.len() != n) {
                return Err(invalid_input(format!("pool string {s} does not have length {n}")));
            }
            p.clone()
        }
        None => {
            if n > cfg.pool_cap {
                return Err(Error::LimitExceeded {
                    what: "n for the full candidate pool",
                    limit: cfg.pool_cap as u64,
                    got: n as u64,
                });
            }
            BitString::all(n).collect()
        }
    };
    pool.sort();
    pool.dedup();
    Ok(pool)
}

/// A candidate as pool indices (increasing) and grid multiples.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Candidate {
    support: Vec<usize>,
    parts: Vec<u64>,
}

/// Lexicographic stream of candidates: by support size, then support
/// indices, then weight composition.
struct CandidateIter {
    pool: usize,
    ell: usize,
    steps: u64,
    cur: Option<Candidate>,
}

impl CandidateIter {
    fn new(pool: usize, ell: usize, steps: u64) -> Self {
        Self { pool, ell: ell.min(pool).min(steps as usize), steps, cur: None }
    }

    fn first_of_size(&self, s: usize) -> Option<Candidate> {
        if s == 0 || s > self.ell {
            return None;
        }
        let mut parts = alloc::vec![1u64; s];
        parts[s - 1] = self.steps - (s as u64 - 1);
        Some(Candidate { support: (0..s).collect(), parts })
    }

    fn next_parts(parts: &mut [u64]) -> bool {
        // Next composition in lex order: bump the rightmost entry that can
        // grow (all but the last), reset the tail to 1 and give the remainder
        // to the last part.
        let s = parts.len();
        if s < 2 {
            return false;
        }
        let total: u64 = parts.iter().sum();
        for i in (0..s - 1).rev() {
            let head: u64 = parts[..=i].iter().sum();
            let tail_min = (s - 1 - i) as u64;
            if head + 1 + tail_min <= total {
                parts[i] += 1;
                for p in parts.iter_mut().take(s - 1).skip(i + 1) {
                    *p = 1;
                }
                let used: u64 = parts[..s - 1].iter().sum();
                parts[s - 1] = total - used;
                return true;
            }
        }
        false
    }

    fn next_support(support: &mut [usize], pool: usize) -> bool {
        let s = support.len();
        let Some(i) = (0..s).rev().find(|&i| support[i] < pool - s + i) else {
            return false;
        };
        support[i] += 1;
        for j in i + 1..s {
            support[j] = support[j - 1] + 1;
        }
        true
    }
}

impl Iterator for CandidateIter {
    type Item = Candidate;

    fn next(&mut self) -> Option<Candidate> {
        let next = match self.cur.take() {
            None => self.first_of_size(1),
            Some(mut c) => {
                if Self::next_parts(&mut c.parts) {
                    Some(c)
                } else if Self::next_support(&mut c.support, self.pool) {
                    let s = c.support.len();
                    c.parts = self.first_of_size(s).map(|f| f.parts).unwrap_or_default();
                    Some(c)
                } else {
                    self.first_of_size(c.support.len() + 1)
                }
            }
        };
        self.cur = next.clone();
        next
    }
}

fn to_population(n: usize, ell: usize, pool: &[BitString], c: &Candidate, steps: u64) -> Population {
    let support = c
        .support
        .iter()
        .zip(&c.parts)
        .map(|(&i, &p)| (pool[i].clone(), Q::new(BigInt::from(p), BigInt::from(steps))))
        .collect();
    Population::new(n, ell, support).expect("candidate weights are positive and sum to one")
}

/// Every population on at most `ell` pool strings with weights in positive
/// multiples of `xi / ell`, in deterministic order (support size, then
/// support, then weights).
pub fn enumerate_candidates(n: usize, cfg: &RecoveryConfig) -> Result<impl Iterator<Item = Population>> {
    let steps = cfg.grid_steps()?;
    let pool = resolve_pool(n, cfg)?;
    let ell = cfg.ell;
    Ok(CandidateIter::new(pool.len(), ell, steps).map(move |c| to_population(n, ell, &pool, &c, steps)))
}

/// Number of candidates [`enumerate_candidates`] yields.
pub fn candidate_count(pool: usize, ell: usize, steps: u64) -> u128 {
    (1..=ell.min(pool).min(steps as usize))
        .map(|s| {
            binomial_u128(pool as u64, s as u64).unwrap_or(u128::MAX)
                * binomial_u128(steps - 1, s as u64 - 1).unwrap_or(u128::MAX)
        })
        .sum()
}

/// Outcome of [`recover`].
#[derive(Clone, Debug, PartialEq)]
pub struct RecoveryResult {
    /// The deck-distance minimiser.
    pub estimate: Population,
    /// Sup-norm distance between its deck and the estimated deck.
    pub achieved_deck_distance: f64,
    /// Number of candidates compared.
    pub candidates_scanned: u64,
    /// Number of traces used.
    pub samples_used: u64,
    /// The estimated deck.
    pub deck: Deck,
}

/// Runs the deck-matching recovery on a batch of traces.
pub fn recover(batch: &TraceBatch, cfg: &RecoveryConfig) -> Result<RecoveryResult> {
    let n = batch.n;
    if cfg.k == 0 || cfg.k > n {
        return Err(invalid_param(format!("k = {} must lie in [1, n = {n}]", cfg.k)));
    }
    let steps = cfg.grid_steps()?;
    let pool = resolve_pool(n, cfg)?;
    let deck = estimate_deck(batch, cfg.k)?;
    let target = deck.values_f64();
    let counts = pool.iter().map(|s| occurrence_counts(s, cfg.k)).collect::<Result<Vec<_>>>()?;
    let total = binomial_u128(n as u64, cfg.k as u64).expect("checked by occurrence_counts");
    let scale = total.checked_mul(steps as u128);
    const EXACT: u128 = 1 << 53;
    let fast = scale.is_some_and(|s| s < EXACT);

    let mut best: Option<(f64, Candidate)> = None;
    let mut scanned = 0u64;
    let mut mix = alloc::vec![0u128; target.len()];
    for c in CandidateIter::new(pool.len(), cfg.ell, steps) {
        scanned += 1;
        mix.iter_mut().for_each(|m| *m = 0);
        for (&i, &p) in c.support.iter().zip(&c.parts) {
            for (m, &cnt) in mix.iter_mut().zip(&counts[i]) {
                *m += cnt * p as u128;
            }
        }
        let dist = if fast {
            let s = scale.unwrap() as f64;
            mix.iter().zip(&target).map(|(&m, &t)| (t - m as f64 / s).abs()).fold(0.0, f64::max)
        } else {
            let s = BigInt::from(total) * BigInt::from(steps);
            mix.iter()
                .zip(&target)
                .map(|(&m, &t)| (t - crate::arith::to_f64(&Q::new(BigInt::from(m), s.clone()))).abs())
                .fold(0.0, f64::max)
        };
        if best.as_ref().is_none_or(|(d, _)| dist < *d) {
            best = Some((dist, c));
        }
    }
    let (dist, c) = best.ok_or_else(|| invalid_input("no candidates"))?;
    let estimate = to_population(n, cfg.ell, &pool, &c, steps);
    Ok(RecoveryResult {
        estimate,
        achieved_deck_distance: dist,
        candidates_scanned: scanned,
        samples_used: batch.len() as u64,
        deck,
    })
}
