//! Separation machinery for pairs of populations.
//!
//! Given `X != Y`, a witness restriction `(T, c)` is found on which the two
//! populations differ, the difference `Delta(T') = restrict(X, T', c) -
//! restrict(Y, T', c)` is tabulated over all `d`-subsets `T'`, its support is
//! partitioned into constant-value classes with dominating anchors (a cover),
//! classes are grouped by anchor magnitude, and an integer projection
//! `w(T) = sum w_i t_i` pushes `Delta` forward to a univariate profile
//! `Gamma`. A shifted power of the polynomial `h` then gives a polynomial
//! `phi` whose pairing with `Delta` is the separation sum.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
#[allow(unused_imports)]
use num_traits::float::Float as _;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand_chacha::rand_core::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith::{factorial, log2_abs, log2_biguint, subsets, Q};
use crate::error::{invalid_input, violation, Error, Result};
use crate::model::{restrict, BitString, Population, Restriction};
use crate::poly::{build_f, build_h, build_phi, int_powers, nominal_f_exponent, MultiPoly, Poly};

pub mod identities;

pub use identities::{
    deck_linear_form, g_basis_value, monomial_deck_identity, monomial_to_g_weights, pascal_coefficients, verify_idd,
};

/// Default largest string length for which a Delta table is materialised.
pub const DEFAULT_MAX_N: usize = 30;
/// Default largest subset size for which a Delta table is materialised.
pub const DEFAULT_MAX_D: usize = 3;

fn support_bound(x: &Population, y: &Population) -> usize {
    x.ell().max(y.ell()).max(1)
}

/// `floor(log2(2 ell))` for `ell >= 1`.
pub fn witness_size(ell: usize) -> usize {
    (usize::BITS - 1 - (2 * ell.max(1)).leading_zeros()) as usize
}

/// A witness restriction and the gap it exhibits.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    /// Positions `T` (padded to `witness_size(ell)` when possible) and pattern `c`.
    pub restriction: Restriction,
    /// `|restrict(X, T, c) - restrict(Y, T, c)|`, always positive.
    pub gap: Q,
    /// Number of leading strings `i*` considered by the isolation step.
    pub i_star: usize,
    /// The isolated string.
    pub isolated: BitString,
    /// Size of `T` before padding.
    pub unpadded_len: usize,
}

/// Finds a small restriction on which `X` and `Y` differ.
///
/// Strings of the joint support are sorted by `p_i = |X(z) - Y(z)|`
/// (decreasing, ties by string). `i*` is the first index with
/// `p_{i+1} <= p_i / (4 ell)`. Among the first `i*` strings one is isolated
/// by repeatedly taking the smallest coordinate that splits the remaining
/// strings and keeping the smaller side (bit 0 on ties). The coordinate set
/// is then padded with the smallest unused coordinates, extending the pattern
/// with the isolated string's bits.
pub fn find_witness(x: &Population, y: &Population) -> Result<Witness> {
    if x.n() != y.n() {
        return Err(invalid_input(format!("length mismatch: {} vs {}", x.n(), y.n())));
    }
    let n = x.n();
    let ell = support_bound(x, y);
    let mut diffs: Vec<(Q, BitString)> = Vec::new();
    for (s, _) in x.support().iter().chain(y.support()) {
        if diffs.iter().any(|(_, t)| t == s) {
            continue;
        }
        let p = (x.weight(s) - y.weight(s)).abs();
        if !p.is_zero() {
            diffs.push((p, s.clone()));
        }
    }
    if diffs.is_empty() {
        return Err(invalid_input("X and Y are equal, no witness exists"));
    }
    diffs.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
    let ratio = Q::from_integer(BigInt::from(4 * ell));
    let i_star = (1..=diffs.len())
        .find(|&i| diffs.get(i).map_or(true, |(next, _)| next * &ratio <= diffs[i - 1].0))
        .expect("the last index always qualifies");

    let mut alive: Vec<&BitString> = diffs[..i_star].iter().map(|(_, s)| s).collect();
    let mut positions = Vec::new();
    let mut pattern = Vec::new();
    while alive.len() > 1 {
        let coord = (0..n)
            .find(|&t| alive.iter().any(|s| s.get(t) != alive[0].get(t)))
            .expect("distinct strings differ somewhere");
        let zeros = alive.iter().filter(|s| s.get(coord) == 0).count();
        let keep = if zeros <= alive.len() - zeros { 0 } else { 1 };
        alive.retain(|s| s.get(coord) == keep);
        positions.push(coord);
        pattern.push(keep);
    }
    let isolated = alive[0].clone();
    let unpadded_len = positions.len();
    let target = witness_size(ell).min(n);
    let mut t = 0;
    while positions.len() < target {
        if !positions.contains(&t) {
            positions.push(t);
            pattern.push(isolated.get(t));
        }
        t += 1;
    }
    let mut pairs: Vec<(usize, u8)> = positions.into_iter().zip(pattern).collect();
    pairs.sort_unstable();
    let (positions, pattern): (Vec<usize>, Vec<u8>) = pairs.into_iter().unzip();
    let restriction = Restriction::new(n, positions, pattern)?;
    let gap = (restrict(x, &restriction)? - restrict(y, &restriction)?).abs();
    if gap.is_zero() {
        return Err(violation("witness restriction shows no gap"));
    }
    Ok(Witness { restriction, gap, i_star, isolated, unpadded_len })
}

/// `Delta(T) = restrict(X, T, c) - restrict(Y, T, c)` on every `d`-subset.
#[derive(Clone, Debug, PartialEq)]
pub struct DeltaTable {
    /// String length.
    pub n: usize,
    /// Subset size.
    pub d: usize,
    /// Pattern.
    pub c: Vec<u8>,
    /// All `d`-subsets in lexicographic order.
    pub sets: Vec<Vec<usize>>,
    /// `Delta` on `sets`, index for index.
    pub values: Vec<Q>,
}

impl DeltaTable {
    /// `Delta(T)` for a sorted `d`-subset `T`.
    pub fn get(&self, t: &[usize]) -> Option<&Q> {
        self.sets.binary_search_by(|s| s.as_slice().cmp(t)).ok().map(|i| &self.values[i])
    }

    /// Subsets with nonzero `Delta`, with their values.
    pub fn support(&self) -> impl Iterator<Item = (&Vec<usize>, &Q)> {
        self.sets.iter().zip(&self.values).filter(|(_, v)| !v.is_zero())
    }

    /// `max_T |Delta(T)|`.
    pub fn sup_norm(&self) -> Q {
        self.values.iter().map(|v| v.abs()).max().unwrap_or_else(Q::zero)
    }

    /// `sum_T Delta(T)`.
    pub fn total(&self) -> Q {
        self.values.iter().fold(Q::zero(), |acc, v| acc + v)
    }
}

/// Materialises `Delta` with the default size caps.
pub fn delta_table(x: &Population, y: &Population, c: &[u8], d: usize) -> Result<DeltaTable> {
    delta_table_capped(x, y, c, d, DEFAULT_MAX_N, DEFAULT_MAX_D)
}

/// Materialises `Delta` for strings of length at most `max_n` and subsets of
/// size at most `max_d`.
pub fn delta_table_capped(
    x: &Population,
    y: &Population,
    c: &[u8],
    d: usize,
    max_n: usize,
    max_d: usize,
) -> Result<DeltaTable> {
    let n = x.n();
    if y.n() != n {
        return Err(invalid_input(format!("length mismatch: {} vs {}", n, y.n())));
    }
    if c.len() != d {
        return Err(invalid_input(format!("pattern length {} differs from d = {d}", c.len())));
    }
    if d > n {
        return Err(invalid_input(format!("d = {d} exceeds n = {n}")));
    }
    if n > max_n {
        return Err(Error::LimitExceeded { what: "n", limit: max_n as u64, got: n as u64 });
    }
    if d > max_d {
        return Err(Error::LimitExceeded { what: "d", limit: max_d as u64, got: d as u64 });
    }
    let sets = subsets(n, d);
    let mut values = Vec::with_capacity(sets.len());
    for t in &sets {
        let r = Restriction::new(n, t.clone(), c.to_vec())?;
        values.push(restrict(x, &r)? - restrict(y, &r)?);
    }
    Ok(DeltaTable { n, d, c: c.to_vec(), sets, values })
}

/// One class of a cover: subsets sharing a coordinate-type sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct CoverClass {
    /// The coordinatewise-minimal member.
    pub anchor: Vec<usize>,
    /// All members in lexicographic order.
    pub members: Vec<Vec<usize>>,
    /// The common value of `Delta` on the class.
    pub value: Q,
}

/// A cover of `supp(Delta)`, optionally grouped by anchor magnitude.
#[derive(Clone, Debug, PartialEq)]
pub struct Cover {
    /// Subset size.
    pub d: usize,
    /// Classes ordered by anchor.
    pub classes: Vec<CoverClass>,
    /// Groups `A_1..A_q` of class indices, smallest magnitudes first; empty
    /// until [`build_group_cover`] runs.
    pub group_partition: Vec<Vec<usize>>,
    /// Support bound used for the grouping threshold `(2 ell + 2)!`.
    pub ell: usize,
}

impl Cover {
    /// Number of classes `L`.
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    /// Whether the cover has no classes.
    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// Number of groups `q`.
    pub fn group_count(&self) -> usize {
        self.group_partition.len()
    }

    /// Whether `q <= ell`.
    pub fn within_stated_bound(&self) -> bool {
        self.group_partition.len() <= self.ell
    }

    /// The anchors in class order.
    pub fn anchors(&self) -> Vec<Vec<usize>> {
        self.classes.iter().map(|c| c.anchor.clone()).collect()
    }
}

/// Partitions `supp(Delta)` into classes of equal coordinate-type sequences.
///
/// The type of coordinate `t` is the column `(x^1_t, ..., y^1_t, ...)` of the
/// two supports. The anchor of a class takes, for each slot in turn, the
/// smallest coordinate of the required type above the previous one.
pub fn build_cover(x: &Population, y: &Population, dt: &DeltaTable) -> Result<Cover> {
    if x.n() != dt.n || y.n() != dt.n {
        return Err(invalid_input("Delta table length differs from the populations"));
    }
    let columns: Vec<Vec<u8>> =
        (0..dt.n).map(|t| x.support().iter().chain(y.support()).map(|(s, _)| s.get(t)).collect()).collect();
    let mut by_type: BTreeMap<Vec<&Vec<u8>>, Vec<usize>> = BTreeMap::new();
    for (i, t) in dt.sets.iter().enumerate() {
        if dt.values[i].is_zero() {
            continue;
        }
        let key: Vec<&Vec<u8>> = t.iter().map(|&p| &columns[p]).collect();
        by_type.entry(key).or_default().push(i);
    }
    let mut classes = Vec::with_capacity(by_type.len());
    for (key, idx) in by_type {
        let mut anchor = Vec::with_capacity(dt.d);
        let mut from = 0;
        for ty in &key {
            let p =
                (from..dt.n).find(|&p| &columns[p] == *ty).ok_or_else(|| violation("anchor slot has no coordinate"))?;
            anchor.push(p);
            from = p + 1;
        }
        let value = dt.get(&anchor).cloned().ok_or_else(|| violation("anchor is not a d-subset"))?;
        let members = idx.iter().map(|&i| dt.sets[i].clone()).collect();
        classes.push(CoverClass { anchor, members, value });
    }
    classes.sort_by(|a, b| a.anchor.cmp(&b.anchor));
    let cover = Cover { d: dt.d, classes, group_partition: Vec::new(), ell: support_bound(x, y) };
    check_cover(&cover, dt)?;
    Ok(cover)
}

/// Re-asserts the cover invariants against `dt`: the classes partition
/// `supp(Delta)`, `Delta` is constant on each class and equal to the
/// anchor's value, every member dominates its anchor, and `L <= 2^{2 d ell}`.
pub fn check_cover(cover: &Cover, dt: &DeltaTable) -> Result<()> {
    let mut seen: BTreeMap<&[usize], usize> = BTreeMap::new();
    for (a, class) in cover.classes.iter().enumerate() {
        if !class.members.contains(&class.anchor) {
            return Err(violation(format!("anchor {:?} is not a member of its class", class.anchor)));
        }
        for m in &class.members {
            if seen.insert(m.as_slice(), a).is_some() {
                return Err(violation(format!("subset {m:?} lies in two classes")));
            }
            let v = dt.get(m).ok_or_else(|| violation("class member is not a d-subset"))?;
            if v != &class.value {
                return Err(violation(format!("Delta is not constant on the class of {:?}", class.anchor)));
            }
            if m.iter().zip(&class.anchor).any(|(s, t)| t > s) {
                return Err(violation(format!("{m:?} does not dominate anchor {:?}", class.anchor)));
            }
        }
    }
    let support = dt.support().count();
    if support != seen.len() {
        return Err(violation("classes do not cover the support of Delta"));
    }
    let exp = 2 * cover.d * cover.ell;
    if exp < 127 && cover.classes.len() as u128 > 1u128 << exp {
        return Err(violation(format!("L = {} exceeds 2^{exp}", cover.classes.len())));
    }
    Ok(())
}

/// `(2 ell + 2)!`.
pub fn group_ratio(ell: usize) -> BigUint {
    factorial(2 * ell as u64 + 2)
}

/// Groups the classes greedily from the smallest anchor magnitude: each
/// group takes every remaining class with `|Delta(T_a)| <= (2 ell + 2)! v`,
/// where `v` is the smallest remaining magnitude.
///
/// The number of groups never exceeds `2 ell` (larger counts are reported as
/// an invariant violation); [`Cover::within_stated_bound`] tells whether it
/// also stays within `ell`.
pub fn build_group_cover(cover: &Cover, ell: usize) -> Result<Cover> {
    if cover.is_empty() {
        return Err(invalid_input("cannot group an empty cover"));
    }
    let ell = ell.max(1);
    let lambda = Q::from_integer(BigInt::from(group_ratio(ell)));
    let mut order: Vec<usize> = (0..cover.len()).collect();
    order.sort_by(|&a, &b| cover.classes[a].value.abs().cmp(&cover.classes[b].value.abs()).then(a.cmp(&b)));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut at = 0;
    while at < order.len() {
        let limit = cover.classes[order[at]].value.abs() * &lambda;
        let mut group = Vec::new();
        while at < order.len() && cover.classes[order[at]].value.abs() <= limit {
            group.push(order[at]);
            at += 1;
        }
        group.sort_unstable();
        groups.push(group);
    }
    let mut out = cover.clone();
    out.ell = ell;
    out.group_partition = groups;
    check_groups(&out)?;
    Ok(out)
}

/// Re-asserts the grouping invariants: the groups partition the classes,
/// the magnitude ratio inside each group is at most `(2 ell + 2)!`, and
/// `q <= 2 ell`.
pub fn check_groups(cover: &Cover) -> Result<()> {
    let lambda = Q::from_integer(BigInt::from(group_ratio(cover.ell)));
    let mut count = vec![0usize; cover.len()];
    for g in &cover.group_partition {
        let mags: Vec<Q> = g.iter().map(|&a| cover.classes[a].value.abs()).collect();
        let (Some(lo), Some(hi)) = (mags.iter().min(), mags.iter().max()) else {
            return Err(violation("empty group"));
        };
        if hi > &(lo * &lambda) {
            return Err(violation("group magnitude ratio exceeds (2 ell + 2)!"));
        }
        for &a in g {
            count[a] += 1;
        }
    }
    if count.iter().any(|&c| c != 1) {
        return Err(violation("groups do not partition the classes"));
    }
    if cover.group_partition.len() > 2 * cover.ell {
        return Err(violation(format!("q = {} exceeds 2 ell = {}", cover.group_partition.len(), 2 * cover.ell)));
    }
    Ok(())
}

/// `w(T) = sum_i w_i t_i`.
pub fn project(w: &[u64], t: &[usize]) -> u64 {
    w.iter().zip(t).map(|(&wi, &ti)| wi * ti as u64).sum()
}

/// Projection weights and the number of rejected draws.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Projection {
    /// Weights in `[1, L^2]`.
    pub w: Vec<u64>,
    /// Draws rejected before `w` was accepted.
    pub rejections: u64,
}

fn uniform_below(rng: &mut ChaCha8Rng, range: u64) -> u64 {
    let zone = u64::MAX - u64::MAX % range;
    loop {
        let u = rng.next_u64();
        if u < zone {
            return u % range;
        }
    }
}

/// Draws `w` uniformly from `[L^2]^d` until all anchors have distinct
/// images under `w`.
pub fn projection_weights(l: usize, d: usize, anchors: &[Vec<usize>], seed: u64) -> Result<Projection> {
    if d == 0 {
        return Err(invalid_input("projection needs d >= 1"));
    }
    if anchors.iter().any(|a| a.len() != d) {
        return Err(invalid_input("anchor size differs from d"));
    }
    let mut sorted = anchors.to_vec();
    sorted.sort();
    if sorted.windows(2).any(|p| p[0] == p[1]) {
        return Err(invalid_input("anchors must be distinct"));
    }
    let range = (l.max(1) as u64).checked_mul(l.max(1) as u64).ok_or_else(|| invalid_input("L is too large"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rejections = 0;
    loop {
        let w: Vec<u64> = (0..d).map(|_| 1 + uniform_below(&mut rng, range)).collect();
        let mut images: Vec<u64> = anchors.iter().map(|a| project(&w, a)).collect();
        images.sort_unstable();
        if images.windows(2).all(|p| p[0] != p[1]) {
            return Ok(Projection { w, rejections });
        }
        rejections += 1;
    }
}

/// The anchor of one group under a projection.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupAnchor {
    /// Class index of the anchor `V_i`.
    pub class: usize,
    /// `kappa_i = w(V_i)`.
    pub kappa: u64,
    /// `v_i = |Delta(V_i)|`.
    pub v: Q,
}

/// One step of the anchor-selection induction, from `p` to `p + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct InductionStep {
    /// The level `p` being extended.
    pub p: usize,
    /// Natural log of `tau_{p+1} 2 n^d lambda exp(sqrt(m_alpha - m_{p+1}) log2(m)^{beta+3})`.
    pub ln_lhs: f64,
    /// Natural log of `|Gamma_p(m_alpha)|`.
    pub ln_rhs: f64,
    /// Whether the first case held, keeping `alpha` and `beta`.
    pub kept: bool,
    /// `alpha` after the step.
    pub alpha: usize,
    /// `beta` after the step.
    pub beta: u32,
}

/// Pushforward of `Delta` under `w` together with the step sequences and the
/// selected `alpha`, `beta`.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaProfile {
    /// Projection weights.
    pub w: Vec<u64>,
    /// Range bound `d (n - 1) max(w)` on which `gamma` lives.
    pub m: u64,
    /// The nominal range `d (n - 1) L^2`.
    pub nominal_m: u128,
    /// Nonzero values of `Gamma(b) = sum_{w(T) = b} Delta(T)`.
    pub gamma: BTreeMap<u64, Q>,
    /// Group anchors, in group order.
    pub groups: Vec<GroupAnchor>,
    /// `tau_0 > ... > tau_r`.
    pub tau_seq: Vec<Q>,
    /// `m_0 > ... > m_r`.
    pub m_seq: Vec<u64>,
    /// Selected step index.
    pub alpha: usize,
    /// Selected exponent.
    pub beta: u32,
    /// The induction trace.
    pub steps: Vec<InductionStep>,
    /// `Gamma_p(b) = 0` for `b < m_p`, `|Gamma_p(m_p)| = tau_p`, and every
    /// `kappa_i` in `(m_p, m_{p-1})` has `v_i <= tau_p`, for every `p`.
    pub step_properties_hold: bool,
}

impl GammaProfile {
    /// `Gamma(b)`.
    pub fn gamma_at(&self, b: u64) -> Q {
        self.gamma.get(&b).cloned().unwrap_or_else(Q::zero)
    }
}

/// `Gamma(b)` for all `b`, summing `Delta` over the subsets in `sets`.
fn pushforward<'a>(w: &[u64], sets: impl Iterator<Item = (&'a Vec<usize>, &'a Q)>) -> BTreeMap<u64, Q> {
    let mut gamma: BTreeMap<u64, Q> = BTreeMap::new();
    for (t, v) in sets {
        *gamma.entry(project(w, t)).or_insert_with(Q::zero) += v;
    }
    gamma.retain(|_, v| !v.is_zero());
    gamma
}

fn ln_abs(v: &Q) -> f64 {
    if v.is_zero() {
        f64::NEG_INFINITY
    } else {
        log2_abs(v) * core::f64::consts::LN_2
    }
}

/// Builds the profile of `Delta` under `w` for a grouped cover.
pub fn gamma_profile(dt: &DeltaTable, cover: &Cover, w: &[u64]) -> Result<GammaProfile> {
    if w.len() != dt.d || w.contains(&0) {
        return Err(invalid_input("weights must be d positive integers"));
    }
    if cover.group_partition.is_empty() {
        return Err(invalid_input("cover has no group partition"));
    }
    let mut images: Vec<u64> = cover.classes.iter().map(|c| project(w, &c.anchor)).collect();
    images.sort_unstable();
    if images.windows(2).any(|p| p[0] == p[1]) {
        return Err(invalid_input("weights do not separate the anchors"));
    }
    let maxw = *w.iter().max().expect("d >= 1");
    let m = dt.d as u64 * (dt.n as u64).saturating_sub(1) * maxw;
    let l = cover.len() as u128;
    let nominal_m = dt.d as u128 * (dt.n as u128).saturating_sub(1) * l * l;
    let gamma = pushforward(w, dt.support());

    let groups: Vec<GroupAnchor> = cover
        .group_partition
        .iter()
        .map(|g| {
            let class = *g.iter().min_by_key(|&&a| project(w, &cover.classes[a].anchor)).expect("groups are nonempty");
            GroupAnchor { class, kappa: project(w, &cover.classes[class].anchor), v: cover.classes[class].value.abs() }
        })
        .collect();
    let group_of: BTreeMap<&[usize], usize> = cover
        .group_partition
        .iter()
        .enumerate()
        .flat_map(|(i, g)| g.iter().flat_map(move |&a| cover.classes[a].members.iter().map(move |t| (t.as_slice(), i))))
        .collect();

    let mut tau_seq = Vec::new();
    let mut m_seq: Vec<u64> = Vec::new();
    let mut bound = u64::MAX;
    loop {
        let below = groups.iter().filter(|g| g.kappa < bound);
        let Some(tau) = below.clone().map(|g| &g.v).max().cloned() else { break };
        let at = below.filter(|g| g.v == tau).map(|g| g.kappa).min().expect("tau is attained");
        tau_seq.push(tau);
        m_seq.push(at);
        bound = at;
    }

    let gamma_p = |p: usize| -> BTreeMap<u64, Q> {
        let keep: Vec<bool> = groups.iter().map(|g| g.kappa >= m_seq[p]).collect();
        pushforward(w, dt.support().filter(|(t, _)| keep[group_of[t.as_slice()]]))
    };
    let profiles: Vec<BTreeMap<u64, Q>> = (0..m_seq.len()).map(gamma_p).collect();
    let mut props = profiles.last().is_some_and(|g| g == &gamma);
    for (p, prof) in profiles.iter().enumerate() {
        props &= prof.range(..m_seq[p]).next().is_none();
        props &= prof.get(&m_seq[p]).map(|v| v.abs()) == Some(tau_seq[p].clone());
        let upper = if p == 0 { u64::MAX } else { m_seq[p - 1] };
        props &= groups.iter().filter(|g| g.kappa > m_seq[p] && g.kappa < upper).all(|g| g.v <= tau_seq[p]);
    }

    let n = dt.n as f64;
    let ln_slack = core::f64::consts::LN_2
        + dt.d as f64 * n.ln()
        + log2_biguint(&group_ratio(cover.ell)) * core::f64::consts::LN_2;
    let log_m = if nominal_m > 1 { (nominal_m as f64).log2() } else { 1.0 };
    let (mut alpha, mut beta) = (0usize, 3u32);
    let mut steps = Vec::new();
    for p in 0..m_seq.len().saturating_sub(1) {
        let gap = (m_seq[alpha] - m_seq[p + 1]) as f64;
        let ln_lhs = ln_abs(&tau_seq[p + 1]) + ln_slack + gap.sqrt() * log_m.powi(beta as i32 + 3);
        let ln_rhs = ln_abs(&profiles[p].get(&m_seq[alpha]).cloned().unwrap_or_else(Q::zero));
        let kept = ln_lhs <= ln_rhs;
        if !kept {
            alpha = p + 1;
            beta += 4;
        }
        steps.push(InductionStep { p, ln_lhs, ln_rhs, kept, alpha, beta });
    }

    Ok(GammaProfile {
        w: w.to_vec(),
        m,
        nominal_m,
        gamma,
        groups,
        tau_seq,
        m_seq,
        alpha,
        beta,
        steps,
        step_properties_hold: props,
    })
}

/// `sum_T phi(T) Delta(T)` over all `d`-subsets.
///
/// Computed through integer moments `sum_T D Delta(T) t^e`, where `D` is the
/// common denominator of `Delta`, so only one rational division is needed.
pub fn separation_sum(phi: &MultiPoly, dt: &DeltaTable) -> Result<Q> {
    if phi.vars() != dt.d {
        return Err(invalid_input(format!("phi has {} variables, d = {}", phi.vars(), dt.d)));
    }
    let (terms, phi_den) = phi.integer_form();
    let deg = phi.degree().unwrap_or(0) as usize;
    let delta_den = dt.support().fold(BigInt::one(), |acc, (_, v)| acc.lcm(v.denom()));
    let points: Vec<(BigInt, Vec<Vec<BigInt>>)> = dt
        .support()
        .map(|(t, v)| {
            let weight = v.numer() * (&delta_den / v.denom());
            (weight, t.iter().map(|&p| int_powers(&BigInt::from(p), deg)).collect())
        })
        .collect();
    let mut total = BigInt::zero();
    for (e, a) in &terms {
        let mut moment = BigInt::zero();
        for (weight, powers) in &points {
            let mut term = weight.clone();
            for (v, &k) in e.iter().enumerate() {
                term *= &powers[v][k as usize];
            }
            moment += term;
        }
        total += a * moment;
    }
    Ok(Q::new(total, phi_den * delta_den))
}

/// `sum_b f(b) Gamma(b)`.
pub fn regrouped_sum(f: &Poly, profile: &GammaProfile) -> Q {
    profile.gamma.iter().fold(Q::zero(), |acc, (&b, g)| acc + f.eval_int(b as i64) * g)
}

/// Both evaluations of the separation sum for `phi = build_phi(f, w)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SeparationSums {
    /// `sum_T phi(T) Delta(T)`.
    pub direct: Q,
    /// `sum_b f(b) Gamma(b)`.
    pub regrouped: Q,
}

/// Evaluates the separation sum both ways and requires exact agreement.
pub fn separation_sums(phi: &MultiPoly, f: &Poly, dt: &DeltaTable, profile: &GammaProfile) -> Result<SeparationSums> {
    let direct = separation_sum(phi, dt)?;
    let regrouped = regrouped_sum(f, profile);
    if direct != regrouped {
        return Err(violation("direct and regrouped separation sums differ"));
    }
    Ok(SeparationSums { direct, regrouped })
}

/// Caps applied when running the whole pipeline.
#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    /// Seed for the projection weights.
    pub seed: u64,
    /// Largest range used to build `h`.
    pub h_range_cap: u64,
    /// Largest exponent applied to the shifted `h`.
    pub exponent_cap: u64,
    /// Largest `n` for the Delta table.
    pub max_n: usize,
    /// Largest `d` for the Delta table.
    pub max_d: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self { seed: 0, h_range_cap: 64, exponent_cap: 1, max_n: DEFAULT_MAX_N, max_d: DEFAULT_MAX_D }
    }
}

/// Everything the pipeline produced for one pair.
#[derive(Clone, Debug, PartialEq)]
pub struct SeparationCertificate {
    /// Witness restriction and gap.
    pub witness: Witness,
    /// Number of cover classes `L`.
    pub l: usize,
    /// Number of groups `q`.
    pub q: usize,
    /// Whether `q <= ell`.
    pub q_within_stated_bound: bool,
    /// Support bound `ell`.
    pub ell: usize,
    /// Projection weights and rejections.
    pub projection: Projection,
    /// The Gamma profile.
    pub profile: GammaProfile,
    /// Range used to build `h`.
    pub h_range: u64,
    /// Exponent applied to the shifted `h`.
    pub exponent: u64,
    /// Nominal exponent `ceil(3 log2(m)^(beta + 1))` for the nominal `m`.
    pub nominal_exponent: f64,
    /// Degree of `phi`.
    pub phi_degree: u32,
    /// `||phi||_1`.
    pub phi_norm1: Q,
    /// `||Delta||_inf`.
    pub delta_sup: Q,
    /// Both evaluations of the separation sum (equal).
    pub sums: SeparationSums,
    /// The cover with its group partition.
    pub cover: Cover,
}

impl SeparationCertificate {
    /// `|separation sum|`.
    pub fn sum_abs(&self) -> Q {
        self.sums.direct.abs()
    }
}

/// Runs witness, Delta table, cover, grouping, projection, profile, `h`, `f`,
/// `phi` and both separation sums.
pub fn run_pipeline(x: &Population, y: &Population, cfg: &PipelineConfig) -> Result<SeparationCertificate> {
    let witness = find_witness(x, y)?;
    let d = witness.restriction.positions().len();
    let c = witness.restriction.pattern().to_vec();
    let dt = delta_table_capped(x, y, &c, d, cfg.max_n, cfg.max_d)?;
    let ell = support_bound(x, y);
    let cover = build_cover(x, y, &dt)?;
    let cover = build_group_cover(&cover, ell)?;
    let projection = projection_weights(cover.len(), d, &cover.anchors(), cfg.seed)?;
    let profile = gamma_profile(&dt, &cover, &projection.w)?;
    let h_range = profile.m.clamp(1, cfg.h_range_cap.max(1));
    let h = build_h(h_range)?;
    let nominal_exponent = nominal_f_exponent(profile.nominal_m.max(2) as f64, profile.beta);
    let exponent = if nominal_exponent.is_finite() && nominal_exponent >= 1.0 {
        (nominal_exponent as u64).min(cfg.exponent_cap.max(1))
    } else {
        1
    };
    let shift = profile.m_seq[profile.alpha].to_i64().ok_or_else(|| invalid_input("shift overflows"))?;
    let f = build_f(&h, shift, exponent)?;
    let phi = build_phi(&f, &projection.w)?;
    let sums = separation_sums(&phi, &f, &dt, &profile)?;
    Ok(SeparationCertificate {
        witness,
        l: cover.len(),
        q: cover.group_count(),
        q_within_stated_bound: cover.within_stated_bound(),
        ell,
        projection,
        h_range,
        exponent,
        nominal_exponent,
        phi_degree: phi.degree().unwrap_or(0),
        phi_norm1: phi.norm1(),
        delta_sup: dt.sup_norm(),
        sums,
        profile,
        cover,
    })
}

/// Short human-readable summary of a certificate.
pub fn summarize(cert: &SeparationCertificate) -> String {
    format!(
        "T={:?} c={:?} L={} q={} w={:?} alpha={} beta={} deg(phi)={}",
        cert.witness.restriction.positions(),
        cert.witness.restriction.pattern(),
        cert.l,
        cert.q,
        cert.projection.w,
        cert.profile.alpha,
        cert.profile.beta,
        cert.phi_degree
    )
}
