//! Randomised properties of the population model, channel, decks, recovery
//! and exact trace distances.

use deckrec_core::arith::{binomial, q, subsets, Q};
use deckrec_core::channel::{apply_deletion, sample_traces, DeletionChannel, Sampler, TraceBatch};
use deckrec_core::deck::{count_occurrences, deck_distance, estimate_deck, exact_deck, occurrence_counts};
use deckrec_core::lower_bound::{exact_trace_tv, mixture_tv, unit_string};
use deckrec_core::model::{quantize, restrict, tv_distance};
use deckrec_core::recovery::{recover, RecoveryConfig};
use deckrec_core::{BitString, Population, Restriction};
use num_bigint::BigInt;
use num_traits::Zero;
use proptest::prelude::*;
use statrs::distribution::{Binomial, ChiSquared, ContinuousCDF, Discrete};

fn population(n: usize, strings: Vec<u64>, weights: Vec<u64>) -> Population {
    let mut seen = Vec::new();
    let mut support = Vec::new();
    for (s, w) in strings.into_iter().zip(weights) {
        let s = s % (1 << n);
        if !seen.contains(&s) {
            seen.push(s);
            support.push((s, w));
        }
    }
    let total: u64 = support.iter().map(|(_, w)| w).sum();
    let entries = support
        .into_iter()
        .map(|(s, w)| (BitString::from_index(s, n), Q::new(BigInt::from(w), BigInt::from(total))))
        .collect();
    Population::from_entries(entries).unwrap()
}

fn arb_population(n: usize, max_support: usize) -> impl Strategy<Value = Population> {
    (prop::collection::vec(any::<u64>(), 1..=max_support), prop::collection::vec(1u64..10, max_support))
        .prop_map(move |(s, w)| population(n, s, w))
}

fn arb_triple() -> impl Strategy<Value = (Population, Population, Population)> {
    (1usize..=5).prop_flat_map(|n| (arb_population(n, 3), arb_population(n, 3), arb_population(n, 3)))
}

fn is_subsequence(t: &[u8], x: &[u8]) -> bool {
    let mut it = x.iter();
    t.iter().all(|b| it.any(|c| c == b))
}

fn unit_mixture(n: usize, picks: Vec<(usize, u64)>) -> Population {
    let mut support: Vec<(usize, u64)> = Vec::new();
    for (j, w) in picks {
        let j = j % n;
        if !support.iter().any(|(k, _)| *k == j) {
            support.push((j, w));
        }
    }
    let total: u64 = support.iter().map(|(_, w)| w).sum();
    Population::from_entries(
        support.into_iter().map(|(j, w)| (unit_string(j, n), Q::new(BigInt::from(w), BigInt::from(total)))).collect(),
    )
    .unwrap()
}

fn arb_unit_mixture(n: usize) -> impl Strategy<Value = Population> {
    prop::collection::vec((0usize..n, 1u64..6), 1..=3).prop_map(move |p| unit_mixture(n, p))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tv_is_a_metric((x, y, z) in arb_triple()) {
        let xy = tv_distance(&x, &y).unwrap();
        prop_assert_eq!(&xy, &tv_distance(&y, &x).unwrap());
        prop_assert!(tv_distance(&x, &x).unwrap().is_zero());
        prop_assert_eq!(xy.is_zero(), x.support() == y.support());
        prop_assert!(tv_distance(&x, &z).unwrap() <= &xy + tv_distance(&y, &z).unwrap());
    }

    #[test]
    fn restrictions_sum_to_one(x in (1usize..=6).prop_flat_map(|n| arb_population(n, 4)), pick in any::<u64>()) {
        let n = x.n();
        let d = 1 + (pick as usize) % n.min(3);
        let sets = subsets(n, d);
        let t = sets[(pick as usize / 7) % sets.len()].clone();
        let mut total = Q::zero();
        for c in 0..1usize << d {
            let pattern: Vec<u8> = (0..d).map(|i| ((c >> i) & 1) as u8).collect();
            total += restrict(&x, &Restriction::new(n, t.clone(), pattern).unwrap()).unwrap();
        }
        prop_assert_eq!(total, q(1, 1));
    }

    #[test]
    fn quantize_stays_within_the_grid(x in (1usize..=5).prop_flat_map(|n| arb_population(n, 3)), steps in 1i64..=12) {
        let g = q(1, steps);
        let r = quantize(&x, &g).unwrap();
        prop_assert!(tv_distance(&x, &r.population).unwrap() <= g);
    }

    #[test]
    fn traces_are_subsequences(bits in prop::collection::vec(0u8..2, 0..24), delta in 0.0f64..1.0, seed in any::<u64>(), i in any::<u64>()) {
        let x = BitString::from_bits(bits).unwrap();
        let ch = DeletionChannel::new(delta).unwrap();
        let t = apply_deletion(&x, &ch, seed, i);
        prop_assert!(is_subsequence(&t, x.bits()));
        prop_assert_eq!(t, apply_deletion(&x, &ch, seed, i));
    }

    #[test]
    fn occurrence_totals_are_binomial(bits in prop::collection::vec(0u8..2, 1..14), k in 1usize..6) {
        let x = BitString::from_bits(bits).unwrap();
        prop_assume!(k <= x.len());
        let total: u128 = occurrence_counts(&x, k).unwrap().iter().sum();
        prop_assert_eq!(BigInt::from(total), BigInt::from(binomial(x.len() as u64, k as u64)));
    }

    #[test]
    fn deck_commutes_with_reversal(x in (2usize..=7).prop_flat_map(|n| arb_population(n, 3)), k in 1usize..4) {
        prop_assume!(k <= x.n());
        let d = exact_deck(&x, k).unwrap();
        let dr = exact_deck(&x.reversed(), k).unwrap();
        let (e, er) = (d.exact().unwrap(), dr.exact().unwrap());
        for z in 0..1usize << k {
            let rev = BitString::from_index(z as u64, k).reversed().to_index() as usize;
            prop_assert_eq!(&e[z], &er[rev]);
        }
    }

    #[test]
    fn trace_tv_is_a_metric(a in arb_unit_mixture(9), b in arb_unit_mixture(9), c in arb_unit_mixture(9)) {
        let half = q(1, 2);
        let ab = exact_trace_tv(&a, &b, &half).unwrap();
        prop_assert!(exact_trace_tv(&a, &a, &half).unwrap().is_zero());
        prop_assert_eq!(&ab, &exact_trace_tv(&b, &a, &half).unwrap());
        prop_assert!(exact_trace_tv(&a, &c, &half).unwrap() <= &ab + exact_trace_tv(&b, &c, &half).unwrap());
    }
}

#[test]
fn occurrence_counts_match_subset_enumeration() {
    for n in 0..=12usize {
        for xi in 0..1u64 << n {
            if n >= 8 && xi % 37 != 0 {
                continue;
            }
            let x = BitString::from_index(xi, n);
            for len in 0..=4usize.min(n) {
                for vi in 0..1u64 << len {
                    let v = BitString::from_index(vi, len);
                    let brute = subsets(n, len).iter().filter(|s| x.project(s) == v.bits()).count();
                    assert_eq!(count_occurrences(v.bits(), x.bits()), brute.into(), "{x} {v}");
                }
            }
        }
    }
}

fn chi_square_lengths(n: usize, delta: f64, draws: u64, seed: u64) -> (f64, f64) {
    let x = BitString::from_index(0b1011_0010_1110_0101_1010 & ((1 << n) - 1), n);
    let ch = DeletionChannel::new(delta).unwrap();
    let mut observed = vec![0u64; n + 1];
    for i in 0..draws {
        observed[apply_deletion(&x, &ch, seed, i).len()] += 1;
    }
    let law = Binomial::new(1.0 - delta, n as u64).unwrap();
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut e_acc, mut o_acc) = (0.0, 0.0);
    for (len, &o) in observed.iter().enumerate() {
        e_acc += law.pmf(len as u64) * draws as f64;
        o_acc += o as f64;
        if e_acc >= 5.0 {
            bins.push((o_acc, e_acc));
            e_acc = 0.0;
            o_acc = 0.0;
        }
    }
    if let Some(last) = bins.last_mut() {
        last.0 += o_acc;
        last.1 += e_acc;
    }
    let stat: f64 = bins.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let critical = ChiSquared::new((bins.len() - 1) as f64).unwrap().inverse_cdf(0.99);
    (stat, critical)
}

#[test]
fn trace_lengths_are_binomial() {
    for (n, delta, seed) in [(1usize, 0.5, 1u64), (6, 0.3, 2), (12, 0.5, 3), (20, 0.1, 4), (20, 0.7, 5)] {
        let (stat, critical) = chi_square_lengths(n, delta, 100_000, seed);
        assert!(stat <= critical, "n={n} delta={delta}: chi2 {stat} > {critical}");
    }
}

#[test]
fn sampling_ignores_call_order() {
    let x = Population::parse(&[("0110", "1/3"), ("1001", "2/3")]).unwrap();
    let ch = DeletionChannel::new(0.4).unwrap();
    let batch = sample_traces(&x, &ch, 500, 11);
    let sampler = Sampler::new(&x, &ch, 11);
    for i in (0..500u64).rev() {
        assert_eq!(sampler.trace(i), batch.traces[i as usize]);
    }
}

fn deck_error(m: u64, seed: u64) -> f64 {
    let x = Population::point(BitString::parse("0101").unwrap());
    let ch = DeletionChannel::new(0.5).unwrap();
    let batch = sample_traces(&x, &ch, m, seed);
    deck_distance(&estimate_deck(&batch, 2).unwrap(), &exact_deck(&x, 2).unwrap()).unwrap().to_f64()
}

#[test]
fn estimator_error_halves_when_samples_quadruple() {
    let mean = |m: u64| (0..20u64).map(|s| deck_error(m, 100 + s)).sum::<f64>() / 20.0;
    let small = mean(2_000);
    let large = mean(8_000);
    let ratio = large / small;
    assert!((0.3..=0.75).contains(&ratio), "error ratio {ratio} ({small} -> {large})");
}

#[test]
fn recovery_ignores_trace_order() {
    let x = Population::parse(&[("000111", "1/2"), ("110100", "1/2")]).unwrap();
    let ch = DeletionChannel::new(0.3).unwrap();
    let batch = sample_traces(&x, &ch, 4000, 8);
    let mut shuffled = batch.clone();
    shuffled.traces.reverse();
    let (a, b) = (shuffled.traces.len() / 3, shuffled.traces.len() / 2);
    shuffled.traces.swap(a, b);
    let cfg = RecoveryConfig::new(2, 3, q(1, 2));
    let r1 = recover(&batch, &cfg).unwrap();
    let r2 = recover(&shuffled, &cfg).unwrap();
    assert_eq!(r1.deck, r2.deck);
    assert_eq!(r1.estimate, r2.estimate);
    assert_eq!(r1.achieved_deck_distance.to_bits(), r2.achieved_deck_distance.to_bits());
}

#[test]
fn lossless_recovery_matches_the_empirical_distribution() {
    let x = Population::parse(&[("0011", "1/4"), ("0110", "3/4")]).unwrap();
    let ch = DeletionChannel::new(0.0).unwrap();
    let batch = sample_traces(&x, &ch, 200, 3);
    let ones = batch.traces.iter().filter(|t| t.as_slice() == [0, 0, 1, 1]).count() as i64;
    let empirical = if ones == 0 || ones == 200 {
        Population::point(BitString::from_bits(batch.traces[0].clone()).unwrap())
    } else {
        Population::parse(&[("0011", &format!("{ones}/200")), ("0110", &format!("{}/200", 200 - ones))]).unwrap()
    };
    let xi = q(1, 10);
    let r = recover(&batch, &RecoveryConfig::new(2, 4, xi.clone())).unwrap();
    assert!(tv_distance(&r.estimate, &empirical).unwrap() <= xi);
}

#[test]
fn trace_tv_scales_with_retention() {
    let a = Population::parse(&[("000010000", "1")]).unwrap();
    let b = Population::parse(&[("000001000", "1/2"), ("001000000", "1/2")]).unwrap();
    for (delta, rho) in [(q(1, 4), q(3, 4)), (q(1, 2), q(1, 2)), (q(3, 4), q(1, 4))] {
        let mixture = mixture_tv(&a, &b, &rho).unwrap();
        assert_eq!(exact_trace_tv(&a, &b, &delta).unwrap(), rho * mixture);
    }
}

#[test]
fn sampler_batch_records_parameters() {
    let x = Population::point(BitString::parse("101").unwrap());
    let ch = DeletionChannel::new(0.25).unwrap();
    let b: TraceBatch = sample_traces(&x, &ch, 3, 4);
    assert_eq!((b.n, b.delta, b.seed, b.len()), (3, 0.25, 4, 3));
}
