//! Reproducible binary deletion channel.
//!
//! Randomness is counter based: draw `i` of a run with seed `s` reads a
//! single ChaCha8 stream keyed by `s` with stream id `i`. Word 0 selects the
//! source string and word `1 + j` decides whether bit `j` survives, so every
//! trace is a pure function of `(seed, draw_index)` and batches can be split
//! across workers in any way without changing a single bit.

use alloc::format;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use rand_chacha::rand_core::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith::{from_f64_exact, Q};
use crate::error::{invalid_param, Result};
use crate::model::{BitString, Population};

/// Deletion channel with deletion probability `delta`.
#[derive(Clone, Debug, PartialEq)]
pub struct DeletionChannel {
    delta: f64,
    exact: Q,
}

impl DeletionChannel {
    /// Channel from a floating-point deletion probability in `[0, 1]`.
    pub fn new(delta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&delta) {
            return Err(invalid_param(format!("delta = {delta} is outside [0, 1]")));
        }
        let exact = from_f64_exact(delta).ok_or_else(|| invalid_param("delta is not finite"))?;
        Ok(Self { delta, exact })
    }

    /// Channel from an exact rational deletion probability in `[0, 1]`.
    pub fn from_rational(delta: Q) -> Result<Self> {
        if delta < Q::zero() || delta > Q::one() {
            return Err(invalid_param("delta is outside [0, 1]"));
        }
        let f = crate::arith::to_f64(&delta);
        Ok(Self { delta: f, exact: delta })
    }

    /// Deletion probability as `f64`.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Deletion probability as an exact rational.
    pub fn delta_exact(&self) -> &Q {
        &self.exact
    }

    /// Retention probability `1 - delta` as an exact rational.
    pub fn retention(&self) -> Q {
        Q::one() - &self.exact
    }
}

/// Scales a probability in `[0, 1]` to a threshold on uniform `u64` words:
/// a word `u` is accepted when `u < threshold`.
fn threshold(p: &Q) -> u128 {
    let scaled = p * Q::from_integer(BigInt::from(BigUint::one() << 64u32));
    scaled.floor().to_integer().to_u128().unwrap_or(0).min(1u128 << 64)
}

/// Precomputed sampler for one population and channel.
#[derive(Clone, Debug)]
pub struct Sampler<'a> {
    population: &'a Population,
    cumulative: Vec<u128>,
    keep: u128,
    seed: u64,
}

impl<'a> Sampler<'a> {
    /// Prepares exact selection thresholds for `population` under `channel`.
    pub fn new(population: &'a Population, channel: &DeletionChannel, seed: u64) -> Self {
        let mut acc = Q::zero();
        let mut cumulative = Vec::with_capacity(population.support().len());
        for (_, w) in population.support() {
            acc += w;
            cumulative.push(threshold(&acc));
        }
        Self { population, cumulative, keep: threshold(&channel.retention()), seed }
    }

    /// Index of the support string selected for `draw_index`, and the trace.
    pub fn draw(&self, draw_index: u64) -> (usize, Vec<u8>) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(draw_index);
        let u = rng.next_u64() as u128;
        let last = self.cumulative.len() - 1;
        let pick = self.cumulative.iter().position(|&c| u < c).unwrap_or(last);
        let source = &self.population.support()[pick].0;
        (pick, self.delete(source, &mut rng))
    }

    fn delete(&self, source: &BitString, rng: &mut ChaCha8Rng) -> Vec<u8> {
        source.bits().iter().copied().filter(|_| (rng.next_u64() as u128) < self.keep).collect()
    }

    /// The trace for `draw_index`.
    pub fn trace(&self, draw_index: u64) -> Vec<u8> {
        self.draw(draw_index).1
    }
}

/// Passes a fixed string through the channel using draw `draw_index` of the
/// run keyed by `seed`. The output is always a subsequence of `x`.
pub fn apply_deletion(x: &BitString, channel: &DeletionChannel, seed: u64, draw_index: u64) -> Vec<u8> {
    let population = Population::point(x.clone());
    Sampler::new(&population, channel, seed).trace(draw_index)
}

/// A batch of traces together with the parameters that produced them.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceBatch {
    /// Source string length.
    pub n: usize,
    /// Deletion probability.
    pub delta: f64,
    /// Run seed.
    pub seed: u64,
    /// Traces in draw order; empty traces are kept.
    pub traces: Vec<Vec<u8>>,
}

impl TraceBatch {
    /// Number of traces.
    pub fn len(&self) -> usize {
        self.traces.len()
    }

    /// Whether the batch is empty.
    pub fn is_empty(&self) -> bool {
        self.traces.is_empty()
    }
}

/// Draws `count` traces of `population` through `channel`.
pub fn sample_traces(population: &Population, channel: &DeletionChannel, count: u64, seed: u64) -> TraceBatch {
    let sampler = Sampler::new(population, channel, seed);
    let traces = (0..count).map(|i| sampler.trace(i)).collect();
    TraceBatch { n: population.n(), delta: channel.delta(), seed, traces }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::q;

    fn is_subsequence(t: &[u8], x: &[u8]) -> bool {
        let mut it = x.iter();
        t.iter().all(|b| it.any(|c| c == b))
    }

    #[test]
    fn extreme_deletion_probabilities() {
        let x = BitString::parse("10110").unwrap();
        let keep_all = DeletionChannel::new(0.0).unwrap();
        let drop_all = DeletionChannel::new(1.0).unwrap();
        for i in 0..50 {
            assert_eq!(apply_deletion(&x, &keep_all, 7, i), x.bits());
            assert!(apply_deletion(&x, &drop_all, 7, i).is_empty());
        }
        assert!(DeletionChannel::new(1.5).is_err());
        assert!(DeletionChannel::new(f64::NAN).is_err());
        assert!(DeletionChannel::from_rational(q(3, 2)).is_err());
    }

    #[test]
    fn traces_are_subsequences_and_reproducible() {
        let x = Population::parse(&[("0110100", "1/3"), ("1110001", "2/3")]).unwrap();
        let ch = DeletionChannel::new(0.4).unwrap();
        let a = sample_traces(&x, &ch, 500, 11);
        let b = sample_traces(&x, &ch, 500, 11);
        assert_eq!(a, b);
        let sampler = Sampler::new(&x, &ch, 11);
        for (i, t) in a.traces.iter().enumerate() {
            let (pick, again) = sampler.draw(i as u64);
            assert_eq!(&again, t);
            assert!(is_subsequence(t, x.support()[pick].0.bits()));
        }
        let c = sample_traces(&x, &ch, 500, 12);
        assert_ne!(a.traces, c.traces);
    }

    #[test]
    fn selection_frequencies_follow_weights() {
        let x = Population::parse(&[("00", "1/4"), ("11", "3/4")]).unwrap();
        let ch = DeletionChannel::new(0.0).unwrap();
        let batch = sample_traces(&x, &ch, 40_000, 3);
        let ones = batch.traces.iter().filter(|t| t[0] == 1).count() as f64 / 40_000.0;
        assert!((ones - 0.75).abs() < 0.015, "{ones}");
    }
}
