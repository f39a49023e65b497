//! Moment-matched pairs of single-one populations and the binomial machinery
//! used to bound their trace distance.
//!
//! Write `e_j` for the length-`n` string whose only one sits at position `j`
//! and `m = (n - 1) / 2`. A trace of `e_{m+i}` either loses the one (the same
//! outcome for every such string) or shows `0^a 1 0^b` with independent
//! `a ~ Bin(m + i, rho)` and `b ~ Bin(m - i, rho)`. Two populations over the
//! `e_{m+i}` whose index mixtures agree on low moments therefore produce
//! nearly identical trace distributions.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
#[allow(unused_imports)]
use num_traits::float::Float as _;
use num_traits::{One, Pow, Signed, Zero};

use crate::arith::{binomial, binomial_i, factorial, to_f64, Q};
use crate::error::{invalid_input, invalid_param, violation, Result};
use crate::model::{BitString, Population};
use crate::poly::Poly;

fn qint(v: i64) -> Q {
    Q::from_integer(BigInt::from(v))
}

/// `nn (nn - 1) ... (nn - t) rho^{t+1}`, the falling moment of order `t + 1`
/// of `Bin(nn, rho)`.
pub fn falling_moment(nn: u64, rho: &Q, t: u64) -> Q {
    let mut acc = Q::one();
    for i in 0..=t {
        if i > nn {
            return Q::zero();
        }
        acc *= qint((nn - i) as i64) * rho;
    }
    acc
}

/// Probability mass function of `Bin(nn, rho)` on `0..=nn`.
pub fn binomial_pmf(nn: u64, rho: &Q) -> Vec<Q> {
    let q = Q::one() - rho;
    (0..=nn).map(|a| Q::from_integer(BigInt::from(binomial(nn, a))) * Pow::pow(rho, a) * Pow::pow(&q, nn - a)).collect()
}

/// `x (x - 1) ... (x - t)` as a polynomial in `x`.
fn falling_poly(t: usize) -> Poly {
    let mut p = Poly::one();
    for i in 0..=t {
        p = &p * &Poly::from_coeffs(&[qint(-(i as i64)), Q::one()]);
    }
    p
}

/// Reduced row echelon form over the rationals; returns the pivot columns.
fn rref(a: &mut [Vec<Q>]) -> Vec<usize> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(r, p);
        let inv = Q::one() / &a[r][c];
        for x in a[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in 0..cols {
                    let delta = &f * &a[r][j];
                    a[i][j] -= delta;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    pivots
}

/// Coefficients `c_0..c_ell` with
/// `c_0 P(r) + sum_{i>=1} c_i (P(r + i) + P(r - i)) = 0` identically in `r`,
/// where `P(x) = x (x - 1) ... (x - ell + 1)`.
///
/// The system is solved by exact elimination; the basis vector of the first
/// free variable is taken and scaled so that
/// `2 sum_{i>=1} max(c_i, 0) + max(c_0, 0) = 1`.
pub fn moment_match_solve(ell: usize) -> Result<Vec<Q>> {
    if ell == 0 {
        return Err(invalid_param("ell must be at least 1"));
    }
    let p = falling_poly(ell - 1);
    let mut columns: Vec<Poly> = Vec::with_capacity(ell + 1);
    columns.push(p.clone());
    for i in 1..=ell {
        let shift = qint(i as i64);
        columns.push(&p.compose_linear(&shift, &Q::one()) + &p.compose_linear(&-shift, &Q::one()));
    }
    let mut a: Vec<Vec<Q>> = (0..=ell).map(|deg| columns.iter().map(|col| col.coeff(deg)).collect()).collect();
    let pivots = rref(&mut a);
    let free =
        (0..=ell).find(|c| !pivots.contains(c)).ok_or_else(|| violation("moment system has only the zero solution"))?;
    let mut c = vec![Q::zero(); ell + 1];
    c[free] = Q::one();
    for (row, &pc) in pivots.iter().enumerate() {
        c[pc] = -a[row][free].clone();
    }
    let pos = |v: &Q| if v.is_positive() { v.clone() } else { Q::zero() };
    let scale = c[1..].iter().fold(pos(&c[0]), |acc, v| acc + pos(v) * qint(2));
    if scale.is_zero() {
        return Err(violation("moment solution has no positive part"));
    }
    Ok(c.into_iter().map(|v| v / &scale).collect())
}

/// Two disjointly supported populations over `e_{m+t}`, `t` in `[0, 2 ell]`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentMatchedPair {
    /// Moment order.
    pub ell: usize,
    /// String length (odd).
    pub n: usize,
    /// `(n - 1) / 2`.
    pub m: usize,
    /// Retention probability used by the binomial checks.
    pub rho: Q,
    /// Offsets `t` with `pi_S(e_{m+t}) > 0`.
    pub s: Vec<usize>,
    /// Offsets `t` with `pi_T(e_{m+t}) > 0`.
    pub t: Vec<usize>,
    /// Weights `pi_S(e_{m+t})` for `t` in `[0, 2 ell]`.
    pub weights_s: Vec<Q>,
    /// Weights `pi_T(e_{m+t})` for `t` in `[0, 2 ell]`.
    pub weights_t: Vec<Q>,
    /// The first population.
    pub pi_s: Population,
    /// The second population.
    pub pi_t: Population,
    /// The solved coefficients `c_0..c_ell`.
    pub c_vec: Vec<Q>,
}

/// `e_j` of length `n`.
pub fn unit_string(j: usize, n: usize) -> BitString {
    let mut bits = vec![0u8; n];
    bits[j] = 1;
    BitString::from_bits(bits).expect("binary")
}

/// Builds the hard pair: offset `t` gets `a_{|t - ell|}` in `pi_S` and
/// `b_{|t - ell|}` in `pi_T`, where `a` and `b` are the positive and negative
/// parts of the solved coefficients.
pub fn build_hard_pair(ell: usize, n: usize, rho: &Q) -> Result<MomentMatchedPair> {
    if n % 2 == 0 {
        return Err(invalid_param(format!("n = {n} must be odd")));
    }
    if n < 4 * ell + 3 {
        return Err(invalid_param(format!("n = {n} is below 4 ell + 3 = {}", 4 * ell + 3)));
    }
    if !rho.is_positive() || rho > &Q::one() {
        return Err(invalid_param("rho must lie in (0, 1]"));
    }
    let c_vec = moment_match_solve(ell)?;
    let m = (n - 1) / 2;
    let mut weights_s = Vec::with_capacity(2 * ell + 1);
    let mut weights_t = Vec::with_capacity(2 * ell + 1);
    for t in 0..=2 * ell {
        let c = &c_vec[t.abs_diff(ell)];
        weights_s.push(if c.is_positive() { c.clone() } else { Q::zero() });
        weights_t.push(if c.is_negative() { -c.clone() } else { Q::zero() });
    }
    let collect = |w: &[Q]| -> (Vec<usize>, Vec<(BitString, Q)>) {
        let idx: Vec<usize> = (0..w.len()).filter(|&t| w[t].is_positive()).collect();
        let support = idx.iter().map(|&t| (unit_string(m + t, n), w[t].clone())).collect();
        (idx, support)
    };
    let (s, sup_s) = collect(&weights_s);
    let (t, sup_t) = collect(&weights_t);
    let pi_s = Population::from_entries(sup_s)?;
    let pi_t = Population::from_entries(sup_t)?;
    let pair = MomentMatchedPair { ell, n, m, rho: rho.clone(), s, t, weights_s, weights_t, pi_s, pi_t, c_vec };
    if pair.s.iter().any(|i| pair.t.contains(i)) {
        return Err(violation("hard pair supports intersect"));
    }
    if !verify_moment_equality(&pair, ell) {
        return Err(violation("hard pair moments differ"));
    }
    Ok(pair)
}

/// Raw moment `E[Z^t]` of `Bin(nn, rho)` by pmf summation.
fn binomial_raw_moment(pmf: &[Q], t: u32) -> Q {
    pmf.iter().enumerate().fold(Q::zero(), |acc, (a, p)| acc + p * qint(a as i64).pow(t))
}

/// For each `t` in `0..=max_degree`: whether the index mixtures agree on
/// `E[(m + i)^t]` and the binomial mixtures agree on `E[Z^t]`.
pub fn moment_profile(pair: &MomentMatchedPair, max_degree: usize) -> Vec<(bool, bool)> {
    let pmfs: Vec<Vec<Q>> = (0..=2 * pair.ell).map(|i| binomial_pmf((pair.m + i) as u64, &pair.rho)).collect();
    (0..=max_degree)
        .map(|t| {
            let side = |w: &[Q]| -> (Q, Q) {
                w.iter().enumerate().filter(|(_, v)| !v.is_zero()).fold((Q::zero(), Q::zero()), |(ix, bin), (i, v)| {
                    (
                        ix + v * qint((pair.m + i) as i64).pow(t as u32),
                        bin + v * binomial_raw_moment(&pmfs[i], t as u32),
                    )
                })
            };
            let (ia, ba) = side(&pair.weights_s);
            let (ib, bb) = side(&pair.weights_t);
            (ia == ib, ba == bb)
        })
        .collect()
}

/// Whether both moment checks of [`moment_profile`] hold for every degree up
/// to `max_degree`.
pub fn verify_moment_equality(pair: &MomentMatchedPair, max_degree: usize) -> bool {
    moment_profile(pair, max_degree).iter().all(|&(a, b)| a && b)
}

/// Position of the single one of `s`, or an error.
fn single_one(s: &BitString) -> Result<usize> {
    let ones: Vec<usize> = (0..s.len()).filter(|&i| s.get(i) == 1).collect();
    match ones.as_slice() {
        [p] => Ok(*p),
        _ => Err(invalid_input(format!("{s} does not contain exactly one 1"))),
    }
}

/// Total variation distance between the mixtures of `(Bin(j, rho),
/// Bin(n - 1 - j, rho))` induced by two single-one populations.
pub fn mixture_tv(x: &Population, y: &Population, rho: &Q) -> Result<Q> {
    let n = x.n();
    if y.n() != n {
        return Err(invalid_input(format!("length mismatch: {} vs {}", n, y.n())));
    }
    if rho.is_negative() || rho > &Q::one() {
        return Err(invalid_param("rho must lie in [0, 1]"));
    }
    let den = x.support().iter().chain(y.support()).fold(BigInt::one(), |acc, (_, w)| acc.lcm(w.denom()));
    let mut weights: Vec<(usize, BigInt)> = Vec::new();
    for (pop, sign) in [(x, 1i32), (y, -1i32)] {
        for (s, w) in pop.support() {
            let j = single_one(s)?;
            let v = w.numer() * (&den / w.denom());
            let v = if sign > 0 { v } else { -v };
            match weights.iter_mut().find(|(p, _)| *p == j) {
                Some(entry) => entry.1 += v,
                None => weights.push((j, v)),
            }
        }
    }
    weights.retain(|(_, v)| !v.is_zero());
    if weights.is_empty() {
        return Ok(Q::zero());
    }
    let u = rho.numer().clone();
    let v = rho.denom().clone();
    let w = &v - &u;
    let top = n - 1;
    let pow = |b: &BigInt| -> Vec<BigInt> {
        let mut out = vec![BigInt::one()];
        for i in 0..top {
            let next = &out[i] * b;
            out.push(next);
        }
        out
    };
    let (pu, pw) = (pow(&u), pow(&w));
    let binoms: Vec<Vec<BigInt>> =
        (0..=top).map(|a| (0..=top).map(|b| BigInt::from(binomial(a as u64, b as u64))).collect()).collect();
    let mut total = BigInt::zero();
    for a in 0..=top {
        for b in 0..=top - a {
            let mut diff = BigInt::zero();
            for (j, wt) in &weights {
                if a <= *j && b <= top - j {
                    diff += wt * &binoms[*j][a] * &binoms[top - j][b];
                }
            }
            if !diff.is_zero() {
                total += diff.abs() * &pu[a + b] * &pw[top - a - b];
            }
        }
    }
    Ok(Q::new(total, den * v.pow(top as u32) * BigInt::from(2)))
}

/// Exact total variation distance between the trace distributions of two
/// single-one populations under deletion probability `delta`.
///
/// Traces that lose the one are identically distributed for both sides, so
/// the distance is `(1 - delta)` times [`mixture_tv`].
pub fn exact_trace_tv(x: &Population, y: &Population, delta: &Q) -> Result<Q> {
    if delta.is_negative() || delta > &Q::one() {
        return Err(invalid_param("delta must lie in [0, 1]"));
    }
    let rho = Q::one() - delta;
    Ok(mixture_tv(x, y, &rho)? * &rho)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// A Poisson binomial distribution together with a reference probability.
#[derive(Clone, Debug, PartialEq)]
pub struct PbdSpec {
    /// Success probabilities `p_1..p_{n'}`.
    pub probs: Vec<Q>,
    /// Reference probability `p`.
    pub p: Q,
}

impl PbdSpec {
    /// Validates that all probabilities lie in `[0, 1]`.
    pub fn new(probs: Vec<Q>, p: Q) -> Result<Self> {
        let unit = |v: &Q| !v.is_negative() && v <= &Q::one();
        if !probs.iter().all(unit) || !unit(&p) {
            return Err(invalid_param("probabilities must lie in [0, 1]"));
        }
        Ok(Self { probs, p })
    }

    /// The step vector `v^(c)` of length `len`: `c` entries `rho` then zeros.
    pub fn step(c: usize, len: usize, rho: &Q, p: Q) -> Result<Self> {
        if c > len {
            return Err(invalid_param(format!("step {c} exceeds length {len}")));
        }
        let probs = (0..len).map(|i| if i < c { rho.clone() } else { Q::zero() }).collect();
        Self::new(probs, p)
    }

    /// `n'`.
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    /// Whether there are no Bernoulli terms.
    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// All `alpha_0..alpha_{n'}` via the elementary symmetric recursion on the
/// deviations `p_i - p`.
pub fn alpha_coefficients(spec: &PbdSpec) -> Vec<Q> {
    let mut e = vec![Q::zero(); spec.len() + 1];
    e[0] = Q::one();
    for (i, pi) in spec.probs.iter().enumerate() {
        let dev = pi - &spec.p;
        for t in (1..=i + 1).rev() {
            let add = &e[t - 1] * &dev;
            e[t] += add;
        }
    }
    e
}

/// `alpha_t = sum over t-subsets U of prod_{u in U} (p_u - p)`.
pub fn alpha_coefficient(spec: &PbdSpec, t: usize) -> Result<Q> {
    if t > spec.len() {
        return Err(invalid_param(format!("t = {t} exceeds n' = {}", spec.len())));
    }
    Ok(alpha_coefficients(spec).swap_remove(t))
}

/// Closed form of `alpha_t` for the step vector with `c` entries `rho` among
/// `len`: `sum_j C(c, j) C(len - c, t - j) (rho - p)^j (-p)^(t - j)`.
pub fn step_alpha(c: usize, len: usize, rho: &Q, p: &Q, t: usize) -> Q {
    let up = rho - p;
    let down = -p.clone();
    (0..=t).fold(Q::zero(), |acc, j| {
        let k = binomial_i(c as i64, j as i64) * binomial_i(len as i64 - c as i64, (t - j) as i64);
        if k.is_zero() {
            acc
        } else {
            acc + Q::from_integer(k) * Pow::pow(&up, j as u64) * Pow::pow(&down, (t - j) as u64)
        }
    })
}

/// `B_{n', p}(r) = C(n', r) p^r (1 - p)^{n' - r}` as a polynomial in `p`.
fn binomial_term_poly(len: usize, r: usize) -> Poly {
    let one_minus = Poly::from_coeffs(&[Q::one(), -Q::one()]);
    &Poly::monomial(Q::from_integer(BigInt::from(binomial(len as u64, r as u64))), r) * &one_minus.pow((len - r) as u64)
}

/// `Delta^t B_{n'-t, p}(r) = ((n' - t)! / n'!) d^t/dp^t B_{n', p}(r)` for all `r`.
pub fn delta_t_binomial(len: usize, t: usize, p: &Q) -> Result<Vec<Q>> {
    if t > len {
        return Err(invalid_param(format!("t = {t} exceeds n' = {len}")));
    }
    let scale = Q::new(BigInt::from(factorial((len - t) as u64)), BigInt::from(factorial(len as u64)));
    Ok((0..=len)
        .map(|r| {
            let mut poly = binomial_term_poly(len, r);
            for _ in 0..t {
                poly = poly.derivative();
            }
            poly.eval(p) * &scale
        })
        .collect())
}

/// `Pr[U = r]` via the Krawtchouk expansion `sum_t alpha_t Delta^t B_{n'-t,p}(r)`.
pub fn krawtchouk_pmf(spec: &PbdSpec, r: usize) -> Result<Q> {
    let len = spec.len();
    if r > len {
        return Err(invalid_param(format!("r = {r} exceeds n' = {len}")));
    }
    let alphas = alpha_coefficients(spec);
    let mut acc = Q::zero();
    for (t, a) in alphas.iter().enumerate() {
        if !a.is_zero() {
            acc += a * &delta_t_binomial(len, t, &spec.p)?[r];
        }
    }
    Ok(acc)
}

/// The distribution of `U` by direct convolution of the Bernoulli terms.
pub fn pbd_pmf(spec: &PbdSpec) -> Vec<Q> {
    let mut pmf = vec![Q::one()];
    for pi in &spec.probs {
        let qi = Q::one() - pi;
        let mut next = vec![Q::zero(); pmf.len() + 1];
        for (k, v) in pmf.iter().enumerate() {
            next[k] += v * &qi;
            next[k + 1] += v * pi;
        }
        pmf = next;
    }
    pmf
}

/// `theta = (2 sum (p_i - p)^2 + (sum (p_i - p))^2) / (2 n' p^2 (1 - p)^2)`.
pub fn theta_value(spec: &PbdSpec) -> Result<Q> {
    if spec.p.is_zero() || spec.p >= Q::one() {
        return Err(invalid_param("theta needs 0 < p < 1"));
    }
    if spec.is_empty() {
        return Err(invalid_param("theta needs at least one term"));
    }
    let devs: Vec<Q> = spec.probs.iter().map(|pi| pi - &spec.p).collect();
    let sq = devs.iter().fold(Q::zero(), |acc, d| acc + d * d);
    let sum = devs.iter().fold(Q::zero(), |acc, d| acc + d);
    let q = Q::one() - &spec.p;
    let den = qint(2 * spec.len() as i64) * &spec.p * &spec.p * &q * &q;
    Ok((qint(2) * sq + &sum * &sum) / den)
}

/// One term of the Krawtchouk expansion against its bound.
#[derive(Clone, Debug, PartialEq)]
pub struct RoosTerm {
    /// Term index.
    pub t: usize,
    /// `|alpha_t| ||Delta^t B_{n'-t,p}||_1`, exact.
    pub lhs: Q,
    /// `sqrt(e) theta^{t/2} t^{1/4}`.
    pub bound: f64,
    /// Whether `lhs <= bound`.
    pub holds: bool,
}

/// Compares term `t` of the expansion with `sqrt(e) theta^{t/2} t^{1/4}`.
pub fn roos_term_check(spec: &PbdSpec, t: usize) -> Result<RoosTerm> {
    if t == 0 || t > spec.len() {
        return Err(invalid_param(format!("t = {t} must lie in [1, {}]", spec.len())));
    }
    let alpha = alpha_coefficient(spec, t)?;
    let norm = delta_t_binomial(spec.len(), t, &spec.p)?.iter().fold(Q::zero(), |acc, v| acc + v.abs());
    let lhs = alpha.abs() * norm;
    let theta = to_f64(&theta_value(spec)?);
    let bound = core::f64::consts::E.sqrt() * theta.powf(t as f64 / 2.0) * (t as f64).powf(0.25);
    let holds = lhs.is_zero() || to_f64(&lhs) <= bound * (1.0 + 1e-12);
    Ok(RoosTerm { t, lhs, bound, holds })
}

/// Which population of a pair a coefficient refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `pi_S`, giving `C_{t,t'}`.
    S,
    /// `pi_T`, giving `D_{t,t'}`.
    T,
}

/// Length `n' = m + 2 ell` of the step vectors, so that every `v^(m+i)`
/// with `i` in `[0, 2 ell]` is defined.
pub fn step_length(pair: &MomentMatchedPair) -> usize {
    pair.m + 2 * pair.ell
}

/// `sum_i pi(e_{m+i}) alpha_t(v^(m+i); p) alpha_{t'}(v^(m-i); p)` for the
/// chosen side.
pub fn cd_coefficient(pair: &MomentMatchedPair, t: usize, t_prime: usize, p: &Q, side: Side) -> Q {
    let weights = match side {
        Side::S => &pair.weights_s,
        Side::T => &pair.weights_t,
    };
    let len = step_length(pair);
    weights.iter().enumerate().filter(|(_, w)| !w.is_zero()).fold(Q::zero(), |acc, (i, w)| {
        let a = step_alpha(pair.m + i, len, &pair.rho, p, t);
        let b = step_alpha(pair.m - i, len, &pair.rho, p, t_prime);
        acc + w * a * b
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{q, qi, subsets};
    use crate::model::tv_distance;

    #[test]
    fn falling_moment_examples() {
        assert_eq!(falling_moment(2, &q(1, 2), 0), qi(1));
        assert_eq!(falling_moment(2, &q(1, 2), 1), q(1, 2));
        let pmf = binomial_pmf(2, &q(1, 2));
        let direct =
            pmf.iter().enumerate().fold(Q::zero(), |acc, (i, p)| acc + p * qi((i * i.saturating_sub(1)) as i64));
        assert_eq!(direct, q(1, 2));
        assert!(falling_moment(3, &q(1, 3), 3).is_zero());
    }

    #[test]
    fn solver_examples() {
        assert_eq!(moment_match_solve(1).unwrap(), vec![qi(-1), q(1, 2)]);
        let c2 = moment_match_solve(2).unwrap();
        assert_eq!(c2, vec![qi(6) * q(1, 8), qi(-4) * q(1, 8), q(1, 8)]);
        for ell in 1..=6 {
            let c = moment_match_solve(ell).unwrap();
            let top = c[1..].iter().fold(c[0].clone(), |acc, v| acc + v * qi(2));
            assert!(top.is_zero());
        }
    }

    #[test]
    fn hard_pair_examples() {
        let pair = build_hard_pair(1, 9, &q(1, 2)).unwrap();
        assert_eq!(pair.pi_s, Population::parse(&[("000010000", "1/2"), ("000000100", "1/2")]).unwrap());
        assert_eq!(pair.pi_t, Population::parse(&[("000001000", "1")]).unwrap());
        assert!(verify_moment_equality(&pair, 1));
        assert!(moment_profile(&pair, 0)[0] == (true, true));
        for ell in 1..=4 {
            let pair = build_hard_pair(ell, 4 * ell + 3, &q(1, 3)).unwrap();
            assert!(pair.s.iter().all(|i| !pair.t.contains(i)));
            assert!(verify_moment_equality(&pair, ell));
        }
        assert!(build_hard_pair(2, 9, &q(1, 2)).is_err());
        assert!(build_hard_pair(1, 10, &q(1, 2)).is_err());
    }

    /// Exact trace distribution by enumerating every deletion pattern.
    fn trace_distribution(x: &Population, delta: &Q) -> alloc::collections::BTreeMap<Vec<u8>, Q> {
        let mut out = alloc::collections::BTreeMap::new();
        let n = x.n();
        let rho = Q::one() - delta;
        for (s, w) in x.support() {
            for keep in 0..=n {
                for set in subsets(n, keep) {
                    let p = w * Pow::pow(&rho, keep as u64) * Pow::pow(delta, (n - keep) as u64);
                    let trace: Vec<u8> = set.iter().map(|&i| s.get(i)).collect();
                    *out.entry(trace).or_insert_with(Q::zero) += p;
                }
            }
        }
        out
    }

    fn brute_tv(x: &Population, y: &Population, delta: &Q) -> Q {
        let a = trace_distribution(x, delta);
        let b = trace_distribution(y, delta);
        let mut keys: Vec<&Vec<u8>> = a.keys().chain(b.keys()).collect();
        keys.sort();
        keys.dedup();
        keys.iter().fold(Q::zero(), |acc, k| {
            let pa = a.get(*k).cloned().unwrap_or_else(Q::zero);
            let pb = b.get(*k).cloned().unwrap_or_else(Q::zero);
            acc + (pa - pb).abs()
        }) / qi(2)
    }

    #[test]
    fn trace_tv_matches_enumeration() {
        let x = Population::parse(&[("0010000", "1/3"), ("0000100", "2/3")]).unwrap();
        let y = Population::parse(&[("0001000", "1")]).unwrap();
        for delta in [q(1, 4), q(1, 2), q(2, 3)] {
            assert_eq!(exact_trace_tv(&x, &y, &delta).unwrap(), brute_tv(&x, &y, &delta));
        }
        assert!(exact_trace_tv(&x, &x, &q(1, 2)).unwrap().is_zero());
        let bad = Population::parse(&[("0011000", "1")]).unwrap();
        assert!(exact_trace_tv(&bad, &y, &q(1, 2)).is_err());
        let delta = q(1, 2);
        assert!(exact_trace_tv(&x, &y, &delta).unwrap() <= tv_distance(&x, &y).unwrap());
    }

    #[test]
    fn unit_shift_golden() {
        let x = Population::point(unit_string(4, 9));
        let y = Population::point(unit_string(5, 9));
        let tv = exact_trace_tv(&x, &y, &q(1, 2)).unwrap();
        assert_eq!(tv, brute_tv(&x, &y, &q(1, 2)));
        assert_eq!(tv, q(35, 256));
    }

    #[test]
    fn hard_pair_tv_decreases() {
        let mut last = Q::one();
        for n in [9, 17, 33] {
            let pair = build_hard_pair(1, n, &q(1, 2)).unwrap();
            let tv = exact_trace_tv(&pair.pi_s, &pair.pi_t, &q(1, 2)).unwrap();
            assert!(tv < last);
            last = tv;
        }
    }

    #[test]
    fn alpha_examples() {
        let spec = PbdSpec::new(vec![q(1, 3), q(1, 2), q(3, 4)], q(1, 5)).unwrap();
        assert_eq!(alpha_coefficient(&spec, 0).unwrap(), qi(1));
        for t in 0..=3 {
            let brute = subsets(3, t)
                .iter()
                .fold(Q::zero(), |acc, u| acc + u.iter().fold(qi(1), |p, &i| p * (&spec.probs[i] - &spec.p)));
            assert_eq!(alpha_coefficient(&spec, t).unwrap(), brute);
        }
        let (rho, p) = (q(2, 3), q(1, 4));
        for len in 1..=8 {
            for c in 0..=len {
                let step = PbdSpec::step(c, len, &rho, p.clone()).unwrap();
                for t in 0..=len {
                    assert_eq!(step_alpha(c, len, &rho, &p, t), alpha_coefficient(&step, t).unwrap());
                }
                let t1 = qi(c as i64) * (&rho - &p) + qi((len - c) as i64) * (-p.clone());
                assert_eq!(step_alpha(c, len, &rho, &p, 1), t1);
            }
        }
        let flat = PbdSpec::new(vec![q(1, 3); 4], q(1, 3)).unwrap();
        assert!((1..=4).all(|t| alpha_coefficient(&flat, t).unwrap().is_zero()));
    }

    #[test]
    fn krawtchouk_examples() {
        let one = PbdSpec::new(vec![q(2, 7)], q(1, 3)).unwrap();
        assert_eq!(krawtchouk_pmf(&one, 1).unwrap(), q(2, 7));
        let flat = PbdSpec::new(vec![q(1, 3); 4], q(1, 3)).unwrap();
        assert_eq!((0..=4).map(|r| krawtchouk_pmf(&flat, r).unwrap()).collect::<Vec<_>>(), binomial_pmf(4, &q(1, 3)));
        let spec = PbdSpec::new(vec![q(1, 7), q(2, 5), q(5, 6), q(1, 2), q(3, 11), q(9, 10)], q(2, 5)).unwrap();
        let pmf = pbd_pmf(&spec);
        for (r, v) in pmf.iter().enumerate() {
            assert_eq!(&krawtchouk_pmf(&spec, r).unwrap(), v);
        }
    }

    #[test]
    fn theta_and_roos_examples() {
        let flat = PbdSpec::new(vec![q(1, 3); 4], q(1, 3)).unwrap();
        assert!(theta_value(&flat).unwrap().is_zero());
        let rho = q(1, 2);
        let (len, c) = (5usize, 2usize);
        let step = PbdSpec::step(c, len, &rho, rho.clone()).unwrap();
        let k = qi((len - c) as i64);
        let expect = (qi(2) * &k * &rho * &rho + (&k * &rho) * (&k * &rho))
            / (qi(2 * len as i64) * &rho * &rho * (qi(1) - &rho) * (qi(1) - &rho));
        assert_eq!(theta_value(&step).unwrap(), expect);
        assert!(theta_value(&PbdSpec::new(vec![q(1, 2)], qi(0)).unwrap()).is_err());

        let step = PbdSpec::step(2, 4, &q(1, 2), q(1, 2)).unwrap();
        assert!(roos_term_check(&step, 1).unwrap().holds);
        assert!(roos_term_check(&flat, 2).unwrap().lhs.is_zero());
    }

    #[test]
    fn cd_coefficients_agree_at_low_order() {
        let pair = build_hard_pair(2, 11, &q(1, 2)).unwrap();
        for p in [q(1, 4), q(1, 2)] {
            assert_eq!(cd_coefficient(&pair, 0, 0, &p, Side::S), qi(1));
            assert_eq!(cd_coefficient(&pair, 0, 0, &p, Side::T), qi(1));
            for t in 0..=2 {
                for tp in 0..=2 - t {
                    assert_eq!(cd_coefficient(&pair, t, tp, &p, Side::S), cd_coefficient(&pair, t, tp, &p, Side::T));
                }
            }
        }
    }
}
