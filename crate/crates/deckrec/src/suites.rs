//! Exact verification suites shared by the `verify` command and the
//! acceptance tests. Each suite returns a list of named checks.

use deckrec_core::arith::{binomial, fmt_rational, subsets, Q};
use deckrec_core::lower_bound::{
    build_hard_pair, cd_coefficient, krawtchouk_pmf, moment_profile, pbd_pmf, roos_term_check, PbdSpec, Side,
};
use deckrec_core::poly::{chebyshev_family, verify_g_properties, verify_h_properties, HReport};
use deckrec_core::separation::{deck_linear_form, monomial_deck_identity, pascal_coefficients, verify_idd};
use deckrec_core::{BitString, Population};
use num_bigint::BigInt;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::formats::{population_to_json, rational};

/// Outcome class of a check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    /// An assertable check that held.
    Pass,
    /// An assertable check that failed.
    Fail,
    /// A measured quantity with no pass/fail meaning.
    Report,
}

impl Status {
    fn of(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

/// One named check with supporting data.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    /// Check name.
    pub name: String,
    /// Outcome.
    pub status: Status,
    /// Counts, values and counterexamples.
    pub detail: Value,
}

/// All checks of one suite run.
#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    /// Suite name.
    pub suite: String,
    /// Checks in execution order.
    pub checks: Vec<Check>,
}

impl SuiteReport {
    fn new(suite: &str) -> Self {
        Self { suite: suite.to_string(), checks: Vec::new() }
    }

    fn push(&mut self, name: impl Into<String>, status: Status, detail: Value) {
        self.checks.push(Check { name: name.into(), status, detail });
    }

    /// Whether no assertable check failed.
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    /// JSON document of the report.
    pub fn to_json(&self) -> Value {
        json!({
            "suite": self.suite,
            "all_pass": self.all_pass(),
            "checks": self.checks,
        })
    }
}

/// Names accepted by [`run_suite`].
pub const SUITES: [&str; 5] = ["identities", "h-properties", "krawtchouk", "polynomials", "moments"];

/// Failure counter that keeps the first few counterexamples.
struct Tally {
    cases: u64,
    failures: u64,
    examples: Vec<Value>,
}

impl Tally {
    fn new() -> Self {
        Self { cases: 0, failures: 0, examples: Vec::new() }
    }

    fn record(&mut self, ok: bool, example: impl FnOnce() -> Value) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
            if self.examples.len() < 5 {
                self.examples.push(example());
            }
        }
    }

    fn push_into(self, report: &mut SuiteReport, name: &str) {
        report.push(
            name,
            Status::of(self.failures == 0 && self.cases > 0),
            json!({ "cases": self.cases, "failures": self.failures, "counterexamples": self.examples }),
        );
    }
}

/// Size caps of the identity suite.
#[derive(Clone, Debug, PartialEq)]
pub struct IdentityCaps {
    /// Largest power in the Pascal expansion.
    pub pascal_r: usize,
    /// Largest evaluation point of the Pascal expansion.
    pub pascal_t: u64,
    /// Largest `n` of the binomial-conversion identity.
    pub idd_n: usize,
    /// Largest `n` of the deck identities on random populations.
    pub deck_n: usize,
    /// Largest deck order.
    pub k: usize,
    /// Largest restriction size.
    pub d: usize,
    /// Number of random population pairs.
    pub trials: u64,
    /// Seed of the random populations.
    pub seed: u64,
}

impl Default for IdentityCaps {
    fn default() -> Self {
        Self { pascal_r: 8, pascal_t: 20, idd_n: 9, deck_n: 8, k: 5, d: 2, trials: 50, seed: 0 }
    }
}

/// Every vector of `d` non-negative integers with sum at most `max_sum`.
fn bounded_vectors(d: usize, max_sum: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; d];
    fn go(i: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == cur.len() {
            out.push(cur.clone());
            return;
        }
        for v in 0..=left {
            cur[i] = v;
            go(i + 1, left - v, cur, out);
        }
        cur[i] = 0;
    }
    go(0, max_sum, &mut cur, &mut out);
    out
}

fn bit_patterns(d: usize) -> Vec<Vec<u8>> {
    (0..1usize << d).map(|z| (0..d).map(|i| ((z >> (d - 1 - i)) & 1) as u8).collect()).collect()
}

/// A population on `n` bits with 1 to 3 distinct strings and small
/// integer-ratio weights.
pub fn random_population(rng: &mut ChaCha8Rng, n: usize) -> Population {
    let max_support = 3.min(1usize << n.min(20));
    let size = rng.random_range(1..=max_support);
    let mut strings: Vec<u64> = Vec::with_capacity(size);
    while strings.len() < size {
        let s = rng.random_range(0..(1u64 << n));
        if !strings.contains(&s) {
            strings.push(s);
        }
    }
    let raw: Vec<u64> = (0..size).map(|_| rng.random_range(1..=6)).collect();
    let total: u64 = raw.iter().sum();
    let support = strings
        .iter()
        .zip(&raw)
        .map(|(&s, &w)| (BitString::from_index(s, n), Q::new(BigInt::from(w), BigInt::from(total))))
        .collect();
    Population::new(n, size, support).expect("weights are positive and sum to one")
}

/// Pascal expansion, binomial conversion, the deck linear-form identity and
/// the monomial-to-deck composition, all in exact arithmetic.
pub fn identities(caps: &IdentityCaps) -> SuiteReport {
    let mut report = SuiteReport::new("identities");

    let mut pascal = Tally::new();
    for r in 0..=caps.pascal_r {
        let v = pascal_coefficients(r);
        for t in 0..=caps.pascal_t {
            let s = v
                .iter()
                .enumerate()
                .fold(BigInt::from(0), |acc, (b, vb)| acc + vb * BigInt::from(binomial(t, b as u64)));
            pascal.record(s == BigInt::from(t).pow(r as u32), || json!({ "r": r, "t": t }));
        }
    }
    pascal.push_into(&mut report, "pascal-expansion");

    let mut idd = Tally::new();
    for n in 1..=caps.idd_n {
        for k in 1..=caps.k.min(n) {
            for d in 1..=caps.d.min(k) {
                for beta in bounded_vectors(d, k - d) {
                    for t in subsets(n, d) {
                        let ok = verify_idd(&beta, n, k, &t).unwrap_or(false);
                        idd.record(ok, || json!({ "n": n, "k": k, "beta": beta, "t": t }));
                    }
                }
            }
        }
    }
    idd.push_into(&mut report, "binomial-conversion");

    let mut rng = ChaCha8Rng::seed_from_u64(caps.seed);
    let mut linear = Tally::new();
    let mut composition = Tally::new();
    for trial in 0..caps.trials {
        let n = rng.random_range(1..=caps.deck_n.max(1));
        let x = random_population(&mut rng, n);
        let y = random_population(&mut rng, n);
        for k in 1..=caps.k.min(n) {
            for d in 1..=caps.d.min(k) {
                let patterns = bit_patterns(d);
                for j in subsets(k, d) {
                    for c in &patterns {
                        let ok = deck_linear_form(&x, &j, c, k).is_ok();
                        linear.record(
                            ok,
                            || json!({ "trial": trial, "x": population_to_json(&x), "j": j, "c": c, "k": k }),
                        );
                    }
                }
                for r in bounded_vectors(d, k - d) {
                    for c in &patterns {
                        let res = monomial_deck_identity(&x, &y, &r, c, k);
                        let ok = matches!(&res, Ok(id) if id.lhs == id.rhs);
                        composition.record(ok, || {
                            json!({
                                "trial": trial,
                                "x": population_to_json(&x),
                                "y": population_to_json(&y),
                                "r": r,
                                "c": c,
                                "k": k,
                                "result": match &res {
                                    Ok(id) => json!({ "lhs": fmt_rational(&id.lhs), "rhs": fmt_rational(&id.rhs) }),
                                    Err(e) => json!(e.to_string()),
                                },
                            })
                        });
                    }
                }
            }
        }
    }
    linear.push_into(&mut report, "deck-linear-form");
    composition.push_into(&mut report, "monomial-deck-composition");
    report
}

fn h_report_json(rep: &HReport) -> Value {
    json!({
        "m": rep.m,
        "degree": rep.degree,
        "factors": rep.shape.factors.iter().map(|(r, e)| json!({ "r": r, "e": e })).collect::<Vec<_>>(),
        "beta": rep.shape.beta,
        "m_tilde": rep.shape.m_tilde,
        "log2_norm1": rep.log2_norm1,
        "norm1_within_bound": rep.norm1_within_bound,
        "h0_is_one": rep.h0_is_one,
        "upper_violations": rep.upper_violations.iter().map(|v| json!({ "b": v.b, "log2_bound": v.log2_bound, "log2_actual": v.log2_actual })).collect::<Vec<_>>(),
        "negative_constant": rep.negative_constant,
        "negative_violations": rep.negative_violations.iter().map(|v| json!({ "b": v.b, "log2_bound": v.log2_bound, "log2_actual": v.log2_actual })).collect::<Vec<_>>(),
        "negative_floor_violations": rep.negative_floor_violations,
        "minimal_negative_constant": rep.minimal_negative_constant,
    })
}

/// Damping-polynomial checks for each range in `ms`. The value at zero, the
/// decay on the positive side, the floor on the negative side and the
/// coefficient-norm bound are asserted; the negative-side growth constant is
/// reported.
pub fn h_properties(ms: &[u64], negative_constant: f64) -> SuiteReport {
    let mut report = SuiteReport::new("h-properties");
    for &m in ms {
        match verify_h_properties(m, negative_constant) {
            Ok(rep) => {
                let ok = rep.h0_is_one
                    && rep.norm1_within_bound
                    && rep.upper_violations.is_empty()
                    && rep.negative_floor_violations.is_empty();
                report.push(format!("h m={m}"), Status::of(ok), h_report_json(&rep));
                report.push(
                    format!("negative-side constant m={m}"),
                    Status::Report,
                    json!({
                        "constant": negative_constant,
                        "violations": rep.negative_violations.len(),
                        "minimal_constant": rep.minimal_negative_constant,
                    }),
                );
            }
            Err(e) => report.push(format!("h m={m}"), Status::Fail, json!({ "error": e.to_string() })),
        }
    }
    report
}

fn random_probability(rng: &mut ChaCha8Rng, open: bool) -> Q {
    let den = rng.random_range(2..=9i64);
    let num = if open { rng.random_range(1..den) } else { rng.random_range(0..=den) };
    Q::new(BigInt::from(num), BigInt::from(den))
}

/// Krawtchouk expansion against direct convolution, and the per-term
/// bounds, on `trials` random specs with up to `max_len` terms.
pub fn krawtchouk(trials: u64, max_len: usize, seed: u64) -> SuiteReport {
    let mut report = SuiteReport::new("krawtchouk");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pmf = Tally::new();
    let mut roos = Tally::new();
    let mut largest_ratio: f64 = 0.0;
    for case in 0..trials {
        let len = rng.random_range(1..=max_len.max(1));
        let probs: Vec<Q> = (0..len).map(|_| random_probability(&mut rng, false)).collect();
        let p = random_probability(&mut rng, true);
        let spec = PbdSpec::new(probs, p).expect("probabilities lie in [0, 1]");
        let direct = pbd_pmf(&spec);
        for (r, want) in direct.iter().enumerate() {
            let got = krawtchouk_pmf(&spec, r);
            let ok = matches!(&got, Ok(v) if v == want);
            pmf.record(ok, || json!({ "case": case, "probs": spec.probs.iter().map(fmt_rational).collect::<Vec<_>>(), "p": fmt_rational(&spec.p), "r": r }));
        }
        for t in 1..=len {
            match roos_term_check(&spec, t) {
                Ok(term) => {
                    if term.bound > 0.0 {
                        largest_ratio = largest_ratio.max(crate::formats::approx(&term.lhs) / term.bound);
                    }
                    roos.record(term.holds, || {
                        json!({ "case": case, "t": t, "lhs": fmt_rational(&term.lhs), "bound": term.bound, "p": fmt_rational(&spec.p), "probs": spec.probs.iter().map(fmt_rational).collect::<Vec<_>>() })
                    });
                }
                Err(e) => roos.record(false, || json!({ "case": case, "t": t, "error": e.to_string() })),
            }
        }
    }
    pmf.push_into(&mut report, "expansion-equals-convolution");
    roos.push_into(&mut report, "term-bounds");
    report.push("largest-term-to-bound-ratio", Status::Report, json!({ "ratio": largest_ratio }));
    report
}

/// Coefficient norms of the Chebyshev family and the grid properties of the
/// normalised Chebyshev polynomials.
pub fn polynomials(max_t: usize, max_g: usize, resolution: i64) -> SuiteReport {
    let mut report = SuiteReport::new("polynomials");
    let mut norms = Tally::new();
    for (r, t) in chebyshev_family(max_t).iter().enumerate() {
        let bound = Q::from_integer(BigInt::from(3u32).pow(r as u32));
        norms.record(t.norm1() <= bound, || json!({ "r": r, "norm1": fmt_rational(&t.norm1()) }));
    }
    norms.push_into(&mut report, "chebyshev-norm");
    for r in 1..=max_g {
        match verify_g_properties(r, resolution) {
            Ok(g) => report.push(
                format!("g r={r}"),
                Status::of(g.all_ok()),
                json!({
                    "resolution": resolution,
                    "value_at_one": g.value_at_one,
                    "sup_violations": g.sup_violations,
                    "growth_violations": g.growth_violations,
                    "decay_violations": g.decay_violations,
                    "norm1_ok": g.norm1_ok,
                }),
            ),
            Err(e) => report.push(format!("g r={r}"), Status::Fail, json!({ "error": e.to_string() })),
        }
    }
    report
}

/// Hard pairs for `ell` in `1..=max_ell`: disjoint supports and equal
/// moments through order `ell` are asserted; the first order at which the
/// moments differ is reported, as are the lowest-order C/D coefficients.
pub fn moments(max_ell: usize, rho: &Q) -> SuiteReport {
    let mut report = SuiteReport::new("moments");
    for ell in 1..=max_ell {
        let n = 4 * ell + 3;
        let pair = match build_hard_pair(ell, n, rho) {
            Ok(p) => p,
            Err(e) => {
                report.push(format!("hard pair ell={ell}"), Status::Fail, json!({ "error": e.to_string() }));
                continue;
            }
        };
        let disjoint = pair.s.iter().all(|i| !pair.t.contains(i));
        let profile = moment_profile(&pair, 2 * ell + 1);
        let matched = profile[..=ell].iter().all(|&(a, b)| a && b);
        let first_difference = profile.iter().position(|&(_, b)| !b);
        report.push(
            format!("hard pair ell={ell}"),
            Status::of(disjoint && matched),
            json!({
                "n": n,
                "c_vec": pair.c_vec.iter().map(fmt_rational).collect::<Vec<_>>(),
                "pi_s": population_to_json(&pair.pi_s),
                "pi_t": population_to_json(&pair.pi_t),
                "disjoint": disjoint,
                "moments_equal_through": ell,
            }),
        );
        let next = profile[ell + 1].1;
        report.push(
            format!("moment order ell+1 ell={ell}"),
            Status::Report,
            json!({ "order": ell + 1, "equal": next, "first_differing_order": first_difference }),
        );
        let mut cd = Tally::new();
        for p in [Q::new(1.into(), 4.into()), Q::new(1.into(), 2.into())] {
            for t in 0..=ell {
                for tp in 0..=ell - t {
                    let c = cd_coefficient(&pair, t, tp, &p, Side::S);
                    let d = cd_coefficient(&pair, t, tp, &p, Side::T);
                    cd.record(c == d, || json!({ "t": t, "t_prime": tp, "p": fmt_rational(&p), "c": rational(&c), "d": rational(&d) }));
                }
            }
        }
        cd.push_into(&mut report, &format!("C equals D ell={ell}"));
    }
    report
}

/// Runs a suite by name with the caps taken from `cfg`.
pub fn run_suite(name: &str, cfg: &crate::config::ExperimentConfig) -> crate::error::Result<SuiteReport> {
    let seed = cfg.seed.unwrap_or(0);
    Ok(match name {
        "identities" => {
            let mut caps = IdentityCaps { seed, ..IdentityCaps::default() };
            if let Some(n) = cfg.n {
                caps.idd_n = n;
                caps.deck_n = n;
            }
            if let Some(k) = cfg.k {
                caps.k = k;
            }
            if let Some(d) = cfg.d {
                caps.d = d;
            }
            if let Some(t) = cfg.trials {
                caps.trials = t;
            }
            identities(&caps)
        }
        "h-properties" => {
            let ms = match cfg.m {
                Some(m) => vec![m],
                None => vec![16, 64, 256],
            };
            h_properties(&ms, cfg.negative_constant.unwrap_or(24.0))
        }
        "krawtchouk" => krawtchouk(cfg.trials.unwrap_or(200), cfg.n.unwrap_or(8), seed),
        "polynomials" => polynomials(30, cfg.n.unwrap_or(20), 200),
        "moments" => moments(cfg.ell.unwrap_or(4), &cfg.delta_or(Some("1/2")).map(|d| Q::from_integer(1.into()) - d)?),
        other => {
            return Err(crate::error::CliError::config(format!(
                "unknown suite \"{other}\"; expected one of {}",
                SUITES.join(", ")
            )))
        }
    })
}
