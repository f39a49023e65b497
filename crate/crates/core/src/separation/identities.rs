//! Exact identities linking monomials in subset coordinates to deck entries.
//!
//! `g_j(t) = C(t_1, j_1) C(t_2 - t_1 - 1, j_2 - j_1 - 1) ... C(n - t_d - 1, k - j_d - 1)`
//! counts the `k`-subsets of `[0, n)` in which `t_i` is the `(j_i + 1)`-th
//! smallest element. Pairing `g_j` with a restriction gives a sum of deck
//! entries, and every monomial of degree at most `k - d` is an exact linear
//! combination of the `g_j`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::arith::{binomial, binomial_i, subsets, Q};
use crate::deck::exact_deck;
use crate::error::{invalid_input, violation, Result};
use crate::model::{restrict, Population, Restriction};

fn check_increasing(v: &[usize], bound: usize, what: &str) -> Result<()> {
    if v.windows(2).any(|p| p[0] >= p[1]) {
        return Err(invalid_input(format!("{what} must be strictly increasing")));
    }
    if v.last().is_some_and(|&x| x >= bound) {
        return Err(invalid_input(format!("{what} must lie below {bound}")));
    }
    Ok(())
}

/// Product of binomials `C(a_1, b_1) C(a_2 - a_1 - 1, b_2) ... C(a_d - a_{d-1} - 1, b_d)`.
fn gap_binomials(a: &[usize], b: &[i64]) -> BigInt {
    let mut prev = -1i64;
    let mut out = BigInt::one();
    for (&ai, &bi) in a.iter().zip(b) {
        out *= binomial_i(ai as i64 - prev - 1, bi);
        if out.is_zero() {
            break;
        }
        prev = ai as i64;
    }
    out
}

/// `g_j(t)` for `0 <= j_1 < ... < j_d < k` and `0 <= t_1 < ... < t_d < n`.
pub fn g_basis_value(j: &[usize], t: &[usize], n: usize, k: usize) -> Result<BigInt> {
    if j.len() != t.len() || j.is_empty() {
        return Err(invalid_input("j and t must be nonempty and of equal length"));
    }
    check_increasing(j, k, "j")?;
    check_increasing(t, n, "t")?;
    let steps: Vec<i64> =
        j.iter().enumerate().map(|(i, &ji)| if i == 0 { ji as i64 } else { ji as i64 - j[i - 1] as i64 - 1 }).collect();
    let last = *t.last().expect("nonempty");
    let tail = binomial_i(n as i64 - last as i64 - 1, k as i64 - *j.last().expect("nonempty") as i64 - 1);
    Ok(gap_binomials(t, &steps) * tail)
}

/// `v_b = sum_{i <= b} (-1)^{b - i} C(b, i) i^r` for `b = 0..=r`, so that
/// `t^r = sum_b v_b C(t, b)`.
pub fn pascal_coefficients(r: usize) -> Vec<BigInt> {
    (0..=r)
        .map(|b| {
            (0..=b).fold(BigInt::zero(), |acc, i| {
                let term = BigInt::from(binomial(b as u64, i as u64)) * BigInt::from(i).pow(r as u32);
                if (b - i) % 2 == 0 {
                    acc + term
                } else {
                    acc - term
                }
            })
        })
        .collect()
}

fn check_degree(sum: usize, d: usize, k: usize) -> Result<()> {
    if d == 0 || sum + d > k {
        return Err(invalid_input(format!("need d >= 1 and total degree {sum} <= k - d = {}", k as i64 - d as i64)));
    }
    Ok(())
}

/// Checks the identity
/// `sum_j g_j(t) PBC_beta(j) = PBC_beta(t) C(n - |beta| - d, k - |beta| - d)`,
/// where `PBC_beta(a) = C(a_1, beta_1) prod_i C(a_i - a_{i-1} - 1, beta_i)`.
pub fn verify_idd(beta: &[usize], n: usize, k: usize, t: &[usize]) -> Result<bool> {
    let d = beta.len();
    let total: usize = beta.iter().sum();
    check_degree(total, d, k)?;
    if t.len() != d {
        return Err(invalid_input("t and beta differ in length"));
    }
    check_increasing(t, n, "t")?;
    let b: Vec<i64> = beta.iter().map(|&x| x as i64).collect();
    let mut lhs = BigInt::zero();
    for j in subsets(k, d) {
        let g = g_basis_value(&j, t, n, k)?;
        if !g.is_zero() {
            lhs += g * gap_binomials(&j, &b);
        }
    }
    let s = (total + d) as i64;
    let rhs = gap_binomials(t, &b) * binomial_i(n as i64 - s, k as i64 - s);
    Ok(lhs == rhs)
}

type Sparse = BTreeMap<Vec<usize>, BigInt>;

fn multiply(a: &Sparse, b: &Sparse) -> Sparse {
    let mut out = Sparse::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let e: Vec<usize> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            *out.entry(e).or_insert_with(BigInt::zero) += ca * cb;
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

/// `t^r` rewritten in the gap variables `s_1 = t_1`, `s_i = t_i - t_{i-1} - 1`,
/// where `t_i = s_1 + ... + s_i + (i - 1)`.
fn in_gap_variables(r: &[usize]) -> Sparse {
    let d = r.len();
    let mut acc: Sparse = [(vec![0; d], BigInt::one())].into_iter().collect();
    for (i, &ri) in r.iter().enumerate() {
        let mut linear = Sparse::new();
        for l in 0..=i {
            let mut e = vec![0; d];
            e[l] = 1;
            linear.insert(e, BigInt::one());
        }
        if i > 0 {
            linear.insert(vec![0; d], BigInt::from(i));
        }
        for _ in 0..ri {
            acc = multiply(&acc, &linear);
        }
    }
    acc
}

/// Weights `w_j` with `t_1^{r_1} ... t_d^{r_d} = sum_j w_j g_j(t)` for all
/// `0 <= t_1 < ... < t_d < n`, built by rewriting in gap variables, expanding
/// each gap power in binomials, and converting each product of binomials
/// with [`verify_idd`]'s identity.
pub fn monomial_to_g_weights(r: &[usize], n: usize, k: usize) -> Result<BTreeMap<Vec<usize>, Q>> {
    let d = r.len();
    check_degree(r.iter().sum(), d, k)?;
    if n < k {
        return Err(invalid_input(format!("need n >= k, got n = {n}, k = {k}")));
    }
    let mut pbc = Sparse::new();
    for (alpha, coef) in in_gap_variables(r) {
        let tables: Vec<Vec<BigInt>> = alpha.iter().map(|&a| pascal_coefficients(a)).collect();
        let mut beta = vec![0usize; d];
        loop {
            let prod = tables.iter().zip(&beta).fold(coef.clone(), |acc, (v, &b)| acc * &v[b]);
            if !prod.is_zero() {
                *pbc.entry(beta.clone()).or_insert_with(BigInt::zero) += prod;
            }
            let Some(i) = (0..d).rev().find(|&i| beta[i] < alpha[i]) else { break };
            beta[i] += 1;
            beta[i + 1..].iter_mut().for_each(|b| *b = 0);
        }
    }
    let sets = subsets(k, d);
    let mut weights: BTreeMap<Vec<usize>, Q> = BTreeMap::new();
    for (beta, coef) in pbc {
        if coef.is_zero() {
            continue;
        }
        let s = (beta.iter().sum::<usize>() + d) as i64;
        let denom = binomial_i(n as i64 - s, k as i64 - s);
        if denom.is_zero() {
            return Err(violation("vanishing normaliser in the binomial conversion"));
        }
        let b: Vec<i64> = beta.iter().map(|&x| x as i64).collect();
        for j in &sets {
            let num = gap_binomials(j, &b);
            if !num.is_zero() {
                *weights.entry(j.clone()).or_insert_with(Q::zero) += Q::new(&coef * num, denom.clone());
            }
        }
    }
    weights.retain(|_, w| !w.is_zero());
    Ok(weights)
}

/// `sum_j |w_j|`.
pub fn weight_norm(weights: &BTreeMap<Vec<usize>, Q>) -> Q {
    weights.values().fold(Q::zero(), |acc, w| acc + w.abs())
}

fn pattern_matches(z: usize, k: usize, j: &[usize], c: &[u8]) -> bool {
    j.iter().zip(c).all(|(&ji, &ci)| ((z >> (k - 1 - ji)) & 1) as u8 == ci)
}

/// `C(n, k) sum_{z : z_j = c} D_k(X)_z` from the exact deck entries.
fn deck_route(entries: &[Q], n: usize, j: &[usize], c: &[u8], k: usize) -> Q {
    let sum = (0..1usize << k).filter(|&z| pattern_matches(z, k, j, c)).fold(Q::zero(), |acc, z| acc + &entries[z]);
    sum * Q::from_integer(BigInt::from(binomial(n as u64, k as u64)))
}

fn exact_entries(x: &Population, k: usize) -> Result<Vec<Q>> {
    let deck = exact_deck(x, k)?;
    Ok(deck.exact().expect("exact deck").to_vec())
}

/// `sum_t g_j(t) restrict(X, t, c)`, computed directly and from the k-deck;
/// the two must agree exactly.
pub fn deck_linear_form(x: &Population, j: &[usize], c: &[u8], k: usize) -> Result<Q> {
    let n = x.n();
    if j.len() != c.len() || j.is_empty() || j.len() > k {
        return Err(invalid_input("need 1 <= |j| = |c| <= k"));
    }
    check_increasing(j, k, "j")?;
    let mut direct = Q::zero();
    for t in subsets(n, j.len()) {
        let g = g_basis_value(j, &t, n, k)?;
        if g.is_zero() {
            continue;
        }
        let r = Restriction::new(n, t, c.to_vec())?;
        direct += Q::from_integer(g) * restrict(x, &r)?;
    }
    let via_deck = deck_route(&exact_entries(x, k)?, n, j, c, k);
    if direct != via_deck {
        return Err(violation("direct and deck evaluations of the linear form differ"));
    }
    Ok(direct)
}

/// Both sides of the monomial identity for a pair of populations.
#[derive(Clone, Debug, PartialEq)]
pub struct MonomialIdentity {
    /// `sum_t t^r Delta(t)`.
    pub lhs: Q,
    /// `sum_j w_j C(n, k) sum_{z : z_j = c} (D_k(X) - D_k(Y))_z`.
    pub rhs: Q,
    /// `sum_j |w_j|`.
    pub weight_norm: Q,
}

/// Evaluates `sum_t t_1^{r_1} ... t_d^{r_d} Delta(t)` directly and as a
/// linear combination of deck-entry differences.
pub fn monomial_deck_identity(
    x: &Population,
    y: &Population,
    r: &[usize],
    c: &[u8],
    k: usize,
) -> Result<MonomialIdentity> {
    let n = x.n();
    if y.n() != n || r.len() != c.len() {
        return Err(invalid_input("mismatched lengths"));
    }
    let d = r.len();
    let weights = monomial_to_g_weights(r, n, k)?;
    let mut lhs = Q::zero();
    for t in subsets(n, d) {
        let mono = t.iter().zip(r).fold(BigInt::one(), |acc, (&ti, &ri)| acc * BigInt::from(ti).pow(ri as u32));
        if mono.is_zero() {
            continue;
        }
        let rs = Restriction::new(n, t, c.to_vec())?;
        lhs += Q::from_integer(mono) * (restrict(x, &rs)? - restrict(y, &rs)?);
    }
    let dx = exact_entries(x, k)?;
    let dy = exact_entries(y, k)?;
    let diff: Vec<Q> = dx.iter().zip(&dy).map(|(a, b)| a - b).collect();
    let mut rhs = Q::zero();
    for (j, w) in &weights {
        rhs += w * deck_route(&diff, n, j, c, k);
    }
    Ok(MonomialIdentity { lhs, rhs, weight_norm: weight_norm(&weights) })
}
