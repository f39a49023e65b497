//! Exact rational polynomials and the Chebyshev damping chain.
//!
//! [`Poly`] is a dense univariate polynomial stored as integer coefficients
//! over one common positive denominator, which keeps products to plain
//! integer convolutions. [`MultiPoly`] is a sparse multivariate polynomial
//! with rational coefficients.
//!
//! The chain built here is `T_r -> g_r -> psi_r -> h -> f -> phi`:
//! Chebyshev polynomials, their normalised partial sums, a rescaled copy on
//! `[0, 2m]`, a product of powers that is exponentially small on `[1, m]`
//! but equal to one at zero, a shifted power of it, and finally its
//! composition with a positive linear form in `d` variables.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint};
use num_integer::{Integer, Roots};
#[allow(unused_imports)]
use num_traits::float::Float as _;
use num_traits::{One, Pow, Signed, Zero};

use crate::arith::{factorial, log2_abs, to_f64, Q};
use crate::error::{invalid_input, invalid_param, Result};

/// Dense univariate polynomial with exact rational coefficients.
///
/// Stored as `num[i] / den` for the coefficient of `x^i`, with `den > 0`,
/// `gcd(num..., den) = 1` and no trailing zero coefficients.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Poly {
    num: Vec<BigInt>,
    den: BigInt,
}

impl Poly {
    fn from_parts(num: Vec<BigInt>, den: BigInt) -> Self {
        let mut p = Self { num, den };
        p.normalize();
        p
    }

    fn normalize(&mut self) {
        while self.num.last().is_some_and(|c| c.is_zero()) {
            self.num.pop();
        }
        if self.num.is_empty() {
            self.den = BigInt::one();
            return;
        }
        if self.den.is_negative() {
            self.den = -core::mem::take(&mut self.den);
            self.num.iter_mut().for_each(|c| *c = -core::mem::take(c));
        }
        let mut g = self.den.clone();
        for c in &self.num {
            if g.is_one() {
                break;
            }
            g = g.gcd(c);
        }
        if !g.is_one() {
            self.den /= &g;
            self.num.iter_mut().for_each(|c| *c /= &g);
        }
    }

    /// The zero polynomial.
    pub fn zero() -> Self {
        Self { num: Vec::new(), den: BigInt::one() }
    }

    /// The constant one.
    pub fn one() -> Self {
        Self::constant(Q::one())
    }

    /// A constant polynomial.
    pub fn constant(c: Q) -> Self {
        Self::from_parts(vec![c.numer().clone()], c.denom().clone())
    }

    /// The identity polynomial `x`.
    pub fn x() -> Self {
        Self::from_parts(vec![BigInt::zero(), BigInt::one()], BigInt::one())
    }

    /// `c * x^deg`.
    pub fn monomial(c: Q, deg: usize) -> Self {
        let mut num = vec![BigInt::zero(); deg + 1];
        num[deg] = c.numer().clone();
        Self::from_parts(num, c.denom().clone())
    }

    /// Polynomial with the given ascending coefficients.
    pub fn from_coeffs(coeffs: &[Q]) -> Self {
        let den = coeffs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let num = coeffs.iter().map(|c| c.numer() * (&den / c.denom())).collect();
        Self::from_parts(num, den)
    }

    /// Polynomial with integer coefficients.
    pub fn from_integers(coeffs: Vec<BigInt>) -> Self {
        Self::from_parts(coeffs, BigInt::one())
    }

    /// Whether this is the zero polynomial.
    pub fn is_zero(&self) -> bool {
        self.num.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.num.len().checked_sub(1)
    }

    /// Coefficient of `x^i`.
    pub fn coeff(&self, i: usize) -> Q {
        match self.num.get(i) {
            Some(c) => Q::new(c.clone(), self.den.clone()),
            None => Q::zero(),
        }
    }

    /// All coefficients in ascending order.
    pub fn coeffs(&self) -> Vec<Q> {
        (0..self.num.len()).map(|i| self.coeff(i)).collect()
    }

    /// Multiplies every coefficient by `c`.
    pub fn scale(&self, c: &Q) -> Self {
        let num = self.num.iter().map(|a| a * c.numer()).collect();
        Self::from_parts(num, &self.den * c.denom())
    }

    /// `self^e` by repeated squaring.
    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// The composition `self(a + b x)`.
    pub fn compose_linear(&self, a: &Q, b: &Q) -> Self {
        let lin = Self::from_coeffs(&[a.clone(), b.clone()]);
        let mut acc = Self::zero();
        for i in (0..self.num.len()).rev() {
            acc = &(&acc * &lin) + &Self::constant(self.coeff(i));
        }
        acc
    }

    /// Exact value at a rational point.
    pub fn eval(&self, x: &Q) -> Q {
        // Horner on integers: sum num_i p^i q^(d-i), over den q^d.
        let (p, q) = (x.numer(), x.denom());
        if self.is_zero() {
            return Q::zero();
        }
        let mut acc = BigInt::zero();
        let mut qpow = BigInt::one();
        for c in self.num.iter().rev() {
            acc = acc * p + c * &qpow;
            qpow *= q;
        }
        Q::new(acc, &self.den * (qpow / q))
    }

    /// Value at an integer point.
    pub fn eval_int(&self, x: i64) -> Q {
        self.eval(&Q::from_integer(BigInt::from(x)))
    }

    /// Sum of the magnitudes of the coefficients.
    pub fn norm1(&self) -> Q {
        let s = self.num.iter().fold(BigInt::zero(), |acc, c| acc + c.abs());
        Q::new(s, self.den.clone())
    }

    /// The derivative.
    pub fn derivative(&self) -> Self {
        if self.num.len() <= 1 {
            return Self::zero();
        }
        let num = self.num.iter().enumerate().skip(1).map(|(i, c)| c * BigInt::from(i)).collect();
        Self::from_parts(num, self.den.clone())
    }
}

impl Add for &Poly {
    type Output = Poly;

    fn add(self, rhs: &Poly) -> Poly {
        let den = self.den.lcm(&rhs.den);
        let (fa, fb) = (&den / &self.den, &den / &rhs.den);
        let len = self.num.len().max(rhs.num.len());
        let num = (0..len)
            .map(|i| {
                let a = self.num.get(i).map(|c| c * &fa).unwrap_or_default();
                let b = rhs.num.get(i).map(|c| c * &fb).unwrap_or_default();
                a + b
            })
            .collect();
        Poly::from_parts(num, den)
    }
}

impl Neg for &Poly {
    type Output = Poly;

    fn neg(self) -> Poly {
        Poly { num: self.num.iter().map(|c| -c).collect(), den: self.den.clone() }
    }
}

impl Sub for &Poly {
    type Output = Poly;

    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl Mul for &Poly {
    type Output = Poly;

    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut num = vec![BigInt::zero(); self.num.len() + rhs.num.len() - 1];
        for (i, a) in self.num.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.num.iter().enumerate() {
                if !b.is_zero() {
                    num[i + j] += a * b;
                }
            }
        }
        Poly::from_parts(num, &self.den * &rhs.den)
    }
}

/// Sparse multivariate polynomial with rational coefficients keyed by
/// exponent vectors.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MultiPoly {
    vars: usize,
    terms: BTreeMap<Vec<u32>, Q>,
}

impl MultiPoly {
    /// The zero polynomial in `vars` variables.
    pub fn zero(vars: usize) -> Self {
        Self { vars, terms: BTreeMap::new() }
    }

    /// Builds a polynomial from `(exponents, coefficient)` pairs, summing
    /// repeated exponents and dropping zeros.
    pub fn from_terms(vars: usize, terms: impl IntoIterator<Item = (Vec<u32>, Q)>) -> Result<Self> {
        let mut p = Self::zero(vars);
        for (e, c) in terms {
            if e.len() != vars {
                return Err(invalid_input(format!(
                    "exponent vector of length {} in a {vars}-variable polynomial",
                    e.len()
                )));
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    fn add_term(&mut self, e: Vec<u32>, c: Q) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(e);
        match entry {
            alloc::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            alloc::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// Number of variables.
    pub fn vars(&self) -> usize {
        self.vars
    }

    /// Nonzero terms in exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Q)> {
        self.terms.iter()
    }

    /// Number of nonzero terms.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    /// Whether the polynomial is zero.
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of the monomial with exponents `e`.
    pub fn coeff(&self, e: &[u32]) -> Q {
        self.terms.get(e).cloned().unwrap_or_else(Q::zero)
    }

    /// Largest total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// Sum of the magnitudes of the coefficients.
    pub fn norm1(&self) -> Q {
        self.terms.values().fold(Q::zero(), |acc, c| acc + c.abs())
    }

    /// Exact value at a rational point.
    pub fn eval(&self, point: &[Q]) -> Result<Q> {
        if point.len() != self.vars {
            return Err(invalid_input(format!(
                "point has {} coordinates, polynomial has {} variables",
                point.len(),
                self.vars
            )));
        }
        let mut powers: Vec<Vec<Q>> = point.iter().map(|x| vec![Q::one(), x.clone()]).collect();
        let mut acc = Q::zero();
        for (e, c) in &self.terms {
            let mut term = c.clone();
            for (v, &k) in e.iter().enumerate() {
                let k = k as usize;
                while powers[v].len() <= k {
                    let next = powers[v].last().unwrap() * &point[v];
                    powers[v].push(next);
                }
                term *= &powers[v][k];
            }
            acc += term;
        }
        Ok(acc)
    }

    /// Exact value at an integer point.
    pub fn eval_int(&self, point: &[i64]) -> Result<Q> {
        if point.len() != self.vars {
            return Err(invalid_input(format!(
                "point has {} coordinates, polynomial has {} variables",
                point.len(),
                self.vars
            )));
        }
        let (terms, den) = self.integer_form();
        let deg = self.degree().unwrap_or(0) as usize;
        let powers: Vec<Vec<BigInt>> = point.iter().map(|&x| int_powers(&BigInt::from(x), deg)).collect();
        let mut acc = BigInt::zero();
        for (e, a) in &terms {
            let mut term = a.clone();
            for (v, &k) in e.iter().enumerate() {
                term *= &powers[v][k as usize];
            }
            acc += term;
        }
        Ok(Q::new(acc, den))
    }

    /// Integer numerators over the least common denominator of the
    /// coefficients.
    pub fn integer_form(&self) -> (Vec<(Vec<u32>, BigInt)>, BigInt) {
        let den = self.terms.values().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let terms = self.terms.iter().map(|(e, c)| (e.clone(), c.numer() * (&den / c.denom()))).collect();
        (terms, den)
    }

    /// The univariate polynomial viewed as a one-variable `MultiPoly`.
    pub fn from_univariate(p: &Poly) -> Self {
        let terms = p.coeffs().into_iter().enumerate().map(|(i, c)| (vec![i as u32], c));
        Self::from_terms(1, terms).expect("one variable")
    }
}

/// `1, x, ..., x^deg`.
pub(crate) fn int_powers(x: &BigInt, deg: usize) -> Vec<BigInt> {
    let mut out = Vec::with_capacity(deg + 1);
    out.push(BigInt::one());
    for i in 0..deg {
        let next = &out[i] * x;
        out.push(next);
    }
    out
}

/// Chebyshev polynomial of the first kind, from
/// `T_0 = 1`, `T_1 = x`, `T_{r+1} = 2x T_r - T_{r-1}`.
pub fn chebyshev_t(r: usize) -> Poly {
    chebyshev_family(r).pop().expect("r + 1 polynomials")
}

/// `T_0, ..., T_r` with integer coefficients.
pub fn chebyshev_family(r: usize) -> Vec<Poly> {
    let mut out: Vec<Vec<BigInt>> = vec![vec![BigInt::one()]];
    if r >= 1 {
        out.push(vec![BigInt::zero(), BigInt::one()]);
    }
    for i in 1..r {
        let (a, b) = (&out[i], &out[i - 1]);
        let mut next = vec![BigInt::zero(); a.len() + 1];
        for (j, c) in a.iter().enumerate() {
            next[j + 1] += c * 2;
        }
        for (j, c) in b.iter().enumerate() {
            next[j] -= c;
        }
        out.push(next);
    }
    out.into_iter().map(Poly::from_integers).collect()
}

/// `g_r = (T_0/2 + T_1 + ... + T_r) / (r + 1/2)`.
pub fn g_poly(r: usize) -> Result<Poly> {
    if r == 0 {
        return Err(invalid_param("g_r needs r >= 1"));
    }
    let fam = chebyshev_family(r);
    let mut sum = fam[0].scale(&Q::new(BigInt::one(), BigInt::from(2)));
    for t in &fam[1..] {
        sum = &sum + t;
    }
    Ok(sum.scale(&Q::new(BigInt::from(2), BigInt::from(2 * r + 1))))
}

/// `psi_r(x) = g_r(1 - x/m)`.
pub fn psi_poly(r: usize, m: u64) -> Result<Poly> {
    if m == 0 {
        return Err(invalid_param("psi_r needs m >= 1"));
    }
    Ok(g_poly(r)?.compose_linear(&Q::one(), &Q::new(BigInt::from(-1), BigInt::from(m))))
}

/// Parameters of the damping polynomial for a given range `m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HShape {
    /// Range parameter.
    pub m: u64,
    /// Exponent with `4^beta` the smallest power of four at least `m`.
    pub beta: u32,
    /// `4^beta`.
    pub m_tilde: u64,
    /// Factors `(r_i, e_i)`: `h = prod psi_{r_i}^{e_i}`.
    pub factors: Vec<(usize, u64)>,
}

impl HShape {
    /// Shape for range `m >= 1`.
    pub fn new(m: u64) -> Result<Self> {
        if m == 0 {
            return Err(invalid_param("h needs m >= 1"));
        }
        let mut beta = 0u32;
        let mut m_tilde = 1u64;
        while m_tilde < m {
            m_tilde *= 4;
            beta += 1;
        }
        // r_i = sqrt(m_tilde / 4^(i-2)) = 2^(beta - i + 2), e_i = sqrt(4^i) = 2^i.
        let factors = (1..=beta).map(|i| (1usize << (beta + 2 - i), 1u64 << i)).collect();
        Ok(Self { m, beta, m_tilde, factors })
    }

    /// Degree of the product.
    pub fn degree(&self) -> u64 {
        self.factors.iter().map(|&(r, e)| r as u64 * e).sum()
    }

    /// Upper bound `prod (3^{r_i} * 2)^{e_i}` on the coefficient norm.
    pub fn norm1_bound(&self) -> BigUint {
        self.factors
            .iter()
            .fold(BigUint::one(), |acc, &(r, e)| acc * Pow::pow(BigUint::from(3u32).pow(r as u32) * 2u32, e as u32))
    }
}

/// The damping polynomial `h = prod_{i=1..beta} psi_{r_i}^{e_i}` for range `m`.
///
/// For `m = 1` the product is empty and `h = 1`.
pub fn build_h(m: u64) -> Result<Poly> {
    let shape = HShape::new(m)?;
    let mut h = Poly::one();
    for &(r, e) in &shape.factors {
        h = &h * &psi_poly(r, m)?.pow(e);
    }
    Ok(h)
}

/// A single failed bound check: the point, the bound and the actual value
/// (both as base-2 logarithms when the magnitudes are extreme).
#[derive(Clone, Debug, PartialEq)]
pub struct BoundViolation {
    /// Evaluation point.
    pub b: i64,
    /// Bound (log2 scale).
    pub log2_bound: f64,
    /// Actual value (log2 scale).
    pub log2_actual: f64,
}

/// Property check of the damping polynomial on `[-m, m]`.
#[derive(Clone, Debug, PartialEq)]
pub struct HReport {
    /// Range parameter.
    pub m: u64,
    /// Degree of `h`.
    pub degree: usize,
    /// Factor layout.
    pub shape: HShape,
    /// Exact `||h||_1`.
    pub norm1: Q,
    /// `log2 ||h||_1`.
    pub log2_norm1: f64,
    /// Whether `||h||_1 <= prod (3^{r_i} 2)^{e_i}`.
    pub norm1_within_bound: bool,
    /// Whether `h(0) = 1` exactly.
    pub h0_is_one: bool,
    /// Points `b in [m]` with `|h(b)| > 2^{-sqrt b}`.
    pub upper_violations: Vec<BoundViolation>,
    /// Constant used on the negative side.
    pub negative_constant: f64,
    /// Points `b in [m]` with `h(-b) > exp(C sqrt(b) ln m)`.
    pub negative_violations: Vec<BoundViolation>,
    /// Points `b in [m]` with `h(-b) < 1`.
    pub negative_floor_violations: Vec<i64>,
    /// Smallest `C` for which every negative-side check passes.
    pub minimal_negative_constant: f64,
}

impl HReport {
    /// Whether every check passed.
    pub fn all_ok(&self) -> bool {
        self.h0_is_one
            && self.norm1_within_bound
            && self.upper_violations.is_empty()
            && self.negative_violations.is_empty()
            && self.negative_floor_violations.is_empty()
    }
}

/// Largest range accepted by [`verify_h_properties`].
pub const MAX_H_RANGE: u64 = 1024;

/// Checks `h(0) = 1`, `|h(b)| <= 2^{-sqrt b}`, `1 <= h(-b) <= exp(C sqrt(b) ln m)`
/// for every `b in [m]`, and the coefficient-norm bound. Violations are
/// reported, not raised.
pub fn verify_h_properties(m: u64, negative_constant: f64) -> Result<HReport> {
    if m > MAX_H_RANGE {
        return Err(crate::error::Error::LimitExceeded { what: "m", limit: MAX_H_RANGE, got: m });
    }
    let shape = HShape::new(m)?;
    let h = build_h(m)?;
    let norm1 = h.norm1();
    let bound = Q::from_integer(BigInt::from(shape.norm1_bound()));
    let ln_m = (m as f64).ln();
    let mut upper = Vec::new();
    let mut negative = Vec::new();
    let mut floor = Vec::new();
    let mut minimal_c: f64 = 0.0;
    for b in 1..=m as i64 {
        let v = h.eval_int(b);
        let s = (b as u64).sqrt();
        let root = (b as f64).sqrt();
        let ok = if s * s == b as u64 {
            // |h(b)| * 2^s <= 1 exactly.
            v.abs() * Q::from_integer(BigInt::one() << s as usize) <= Q::one()
        } else {
            log2_abs(&v) <= -root
        };
        if !ok {
            upper.push(BoundViolation { b, log2_bound: -root, log2_actual: log2_abs(&v) });
        }
        let w = h.eval_int(-b);
        if w < Q::one() {
            floor.push(b);
        }
        let ln_w = log2_abs(&w) * core::f64::consts::LN_2;
        if ln_m > 0.0 {
            minimal_c = minimal_c.max(ln_w / (root * ln_m));
        }
        let ln_bound = negative_constant * root * ln_m;
        if w.is_positive() && ln_w > ln_bound {
            negative.push(BoundViolation {
                b: -b,
                log2_bound: ln_bound / core::f64::consts::LN_2,
                log2_actual: ln_w / core::f64::consts::LN_2,
            });
        }
    }
    Ok(HReport {
        m,
        degree: h.degree().unwrap_or(0),
        log2_norm1: log2_abs(&norm1),
        norm1_within_bound: norm1 <= bound,
        norm1,
        shape,
        h0_is_one: h.eval(&Q::zero()).is_one(),
        upper_violations: upper,
        negative_constant,
        negative_violations: negative,
        negative_floor_violations: floor,
        minimal_negative_constant: minimal_c,
    })
}

/// Violation counts for the properties of `g_r` on rational grids.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct GReport {
    /// Degree parameter.
    pub r: usize,
    /// Whether `g_r(1) = 1`.
    pub value_at_one: bool,
    /// Grid points of `[-1, 1]` with `|g_r(x)| > 1`.
    pub sup_violations: usize,
    /// Grid points `a in [0, 1]` with `g_r(1 + a) < 1` or `> e^{3 r sqrt a}`.
    pub growth_violations: usize,
    /// Whether `||g_r||_1 <= 3^r`.
    pub norm1_ok: bool,
    /// Grid points of `[-1, 1)` with `|g_r(x)| > 1 / (r sqrt(2 (1 - x)))`.
    pub decay_violations: usize,
}

impl GReport {
    /// Whether every check passed.
    pub fn all_ok(&self) -> bool {
        self.value_at_one
            && self.norm1_ok
            && self.sup_violations == 0
            && self.growth_violations == 0
            && self.decay_violations == 0
    }
}

/// Checks the four standard properties of `g_r` on the grid with spacing
/// `1 / resolution`. All comparisons are exact except the exponential growth
/// bound, which compares `ln g_r(1 + a)` with `3 r sqrt(a)` in `f64`.
pub fn verify_g_properties(r: usize, resolution: i64) -> Result<GReport> {
    let g = g_poly(r)?;
    let mut rep = GReport { r, value_at_one: g.eval(&Q::one()).is_one(), ..GReport::default() };
    let three_r = BigInt::from(3u32).pow(r as u32);
    rep.norm1_ok = g.norm1() <= Q::from_integer(three_r);
    let r2 = Q::from_integer(BigInt::from((r * r) as u64 * 2));
    for j in -resolution..=resolution {
        let x = Q::new(BigInt::from(j), BigInt::from(resolution));
        let v = g.eval(&x);
        if v.abs() > Q::one() {
            rep.sup_violations += 1;
        }
        if j < resolution {
            // |g(x)| <= 1/(r sqrt(2(1-x)))  <=>  g(x)^2 r^2 2 (1-x) <= 1.
            if &v * &v * &r2 * (Q::one() - &x) > Q::one() {
                rep.decay_violations += 1;
            }
        }
    }
    for j in 0..=resolution {
        let a = Q::new(BigInt::from(j), BigInt::from(resolution));
        let v = g.eval(&(Q::one() + &a));
        let ln_v = log2_abs(&v) * core::f64::consts::LN_2;
        let ln_bound = 3.0 * r as f64 * to_f64(&a).sqrt();
        let above = if j == 0 { !v.is_one() } else { ln_v > ln_bound * (1.0 + 1e-12) };
        if v < Q::one() || above {
            rep.growth_violations += 1;
        }
    }
    Ok(rep)
}

/// `f(x) = h(x - shift)^exponent`.
pub fn build_f(h: &Poly, shift: i64, exponent: u64) -> Result<Poly> {
    if exponent == 0 {
        return Err(invalid_param("exponent must be at least 1"));
    }
    Ok(h.compose_linear(&Q::from_integer(BigInt::from(-shift)), &Q::one()).pow(exponent))
}

/// Nominal exponent `ceil(3 log2(m)^(beta + 1))`.
pub fn nominal_f_exponent(m: f64, beta: u32) -> f64 {
    (3.0 * m.log2().powi(beta as i32 + 1)).ceil()
}

/// `phi(t_1, ..., t_d) = f(w_1 t_1 + ... + w_d t_d)`, expanded.
///
/// The coefficient of `t^a` is `f_{|a|} * multinomial(|a|; a) * prod w_i^{a_i}`.
pub fn build_phi(f: &Poly, w: &[u64]) -> Result<MultiPoly> {
    let d = w.len();
    if d == 0 {
        return Err(invalid_param("phi needs at least one variable"));
    }
    if w.contains(&0) {
        return Err(invalid_param("weights must be positive"));
    }
    let deg = f.degree().unwrap_or(0);
    let fact: Vec<BigInt> = (0..=deg as u64).map(|i| BigInt::from(factorial(i))).collect();
    let wpow: Vec<Vec<BigInt>> = w
        .iter()
        .map(|&wi| {
            let mut v = vec![BigInt::one()];
            for _ in 0..deg {
                let next = v.last().unwrap() * BigInt::from(wi);
                v.push(next);
            }
            v
        })
        .collect();
    let mut terms = Vec::new();
    let mut exps = vec![0u32; d];
    for total in 0..=deg {
        if f.num.get(total).map_or(true, Zero::is_zero) {
            continue;
        }
        compositions(total, d, &mut exps, 0, &mut |e| {
            let mut mult = fact[total].clone();
            let mut prod = BigInt::one();
            for (i, &a) in e.iter().enumerate() {
                mult /= &fact[a as usize];
                prod *= &wpow[i][a as usize];
            }
            terms.push((e.to_vec(), Q::new(&f.num[total] * mult * prod, f.den.clone())));
        });
    }
    MultiPoly::from_terms(d, terms)
}

fn compositions(total: usize, d: usize, buf: &mut [u32], at: usize, visit: &mut impl FnMut(&[u32])) {
    if at == d - 1 {
        buf[at] = total as u32;
        visit(buf);
        return;
    }
    for a in 0..=total {
        buf[at] = a as u32;
        compositions(total - a, d, buf, at + 1, visit);
    }
}

/// Whether `||phi||_1 <= ||f||_1 (d max w)^{deg f}`.
pub fn phi_norm_within_bound(f: &Poly, w: &[u64], phi: &MultiPoly) -> bool {
    let d = w.len() as u64;
    let maxw = w.iter().copied().max().unwrap_or(1);
    let deg = f.degree().unwrap_or(0) as u32;
    let factor = BigInt::from(d * maxw).pow(deg);
    phi.norm1() <= f.norm1() * Q::from_integer(factor)
}
