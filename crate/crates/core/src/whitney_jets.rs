//! Finite-order jets on finite rational point sets, their Taylor operators and
//! seminorms, coordinate quadrants, and the radial homotopy on polynomial forms.
//!
//! Multi-indices in `N(m, n)` are ordered by total order, then
//! lexicographically descending, so `N(1, 2)` is `(0,0), (1,0), (0,1)`. Jet
//! files use the same order:
//!
//! ```text
//! # n m
//! 1 2
//! # x  F_0  F_1  F_2
//! 0    0    0    2
//! 1/2  1/4  1    2
//! ```

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use thiserror::Error;

use crate::graded_core::{cohomology_from_differentials, fmt_rational, Matrix, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum JetError {
    #[error("point set is empty")]
    EmptyPointSet,
    #[error("duplicate point {0}")]
    DuplicatePoint(String),
    #[error("expected {expected} coordinates, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("jets live on different point sets, orders or dimensions")]
    Mismatch,
    #[error("point {0} is not in the point set")]
    NotAPoint(String),
    #[error("order {k} exceeds jet order {m}")]
    OrderTooLarge { k: u32, m: u32 },
    #[error("expected {expected} jet values, found {found}")]
    IncompleteJet { expected: usize, found: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid quadrant: {0}")]
    Quadrant(String),
    #[error("unsupported input: {0}")]
    Unsupported(String),
}

type Result<T> = std::result::Result<T, JetError>;

fn factorial(k: u32) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

fn binomial(n: u32, k: u32) -> BigInt {
    factorial(n) / (factorial(k) * factorial(n - k))
}

fn format_point(p: &[Rational]) -> String {
    let parts: Vec<String> = p.iter().map(fmt_rational).collect();
    format!("({})", parts.join(", "))
}

// ---------------------------------------------------------------------------
// Multi-indices
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn factorial(&self) -> BigInt {
        self.0.iter().map(|&a| factorial(a)).product()
    }

    pub fn is_below(&self, other: &MultiIndex) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn sub(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    /// `Π C(α_i, β_i)` for `β ≤ α`.
    pub fn binomial(&self, beta: &MultiIndex) -> BigInt {
        self.0
            .iter()
            .zip(&beta.0)
            .map(|(&a, &b)| binomial(a, b))
            .product()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Exponent vectors of total order exactly `k` in `n` variables, lexicographically descending.
pub fn exponents_of_order(n: usize, k: u32) -> Vec<Vec<u32>> {
    fn go(n: usize, k: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() + 1 == n {
            cur.push(k);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for first in (0..=k).rev() {
            cur.push(first);
            go(n, k - first, cur, out);
            cur.pop();
        }
    }
    if n == 0 {
        return if k == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    go(n, k, &mut Vec::with_capacity(n), &mut out);
    out
}

/// `N(m, n)` in graded order.
pub fn multi_indices(m: u32, n: usize) -> Vec<MultiIndex> {
    (0..=m)
        .flat_map(|k| exponents_of_order(n, k))
        .map(MultiIndex)
        .collect()
}

// ---------------------------------------------------------------------------
// Polynomials
// ---------------------------------------------------------------------------

/// Sparse polynomial over Q in `n` variables; no zero coefficients are stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial {
    n: usize,
    terms: BTreeMap<Vec<u32>, Rational>,
}

impl Polynomial {
    pub fn zero(n: usize) -> Self {
        Polynomial {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: Rational) -> Self {
        Self::monomial(n, vec![0; n], c)
    }

    pub fn variable(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        Self::monomial(n, e, Rational::one())
    }

    pub fn monomial(n: usize, exponent: Vec<u32>, c: Rational) -> Self {
        assert_eq!(exponent.len(), n);
        let mut p = Self::zero(n);
        p.add_term(exponent, c);
        p
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Rational)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, exponent: Vec<u32>, c: Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(exponent).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add(&other.scale(&-Rational::one()))
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        let mut out = Self::zero(self.n);
        for (e, v) in &self.terms {
            out.add_term(e.clone(), v * c);
        }
        out
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut out = Self::zero(self.n);
        for (a, c) in &self.terms {
            for (b, d) in &other.terms {
                let e = a.iter().zip(b).map(|(x, y)| x + y).collect();
                out.add_term(e, c * d);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Polynomial {
        (0..k).fold(Self::constant(self.n, Rational::one()), |acc, _| acc.mul(self))
    }

    /// `∂^α`.
    pub fn derivative(&self, alpha: &MultiIndex) -> Polynomial {
        let mut out = Self::zero(self.n);
        for (e, c) in &self.terms {
            if !alpha.0.iter().zip(e).all(|(a, x)| a <= x) {
                continue;
            }
            let mut coeff = c.clone();
            for (&x, &a) in e.iter().zip(&alpha.0) {
                coeff *= Rational::from_integer(factorial(x) / factorial(x - a));
            }
            out.add_term(e.iter().zip(&alpha.0).map(|(x, a)| x - a).collect(), coeff);
        }
        out
    }

    pub fn evaluate(&self, point: &[Rational]) -> Rational {
        let mut total = Rational::zero();
        for (e, c) in &self.terms {
            let mut v = c.clone();
            for (x, &k) in point.iter().zip(e) {
                v *= num_traits::pow(x.clone(), k as usize);
            }
            total += v;
        }
        total
    }

    /// Uniformly random coefficients in `-5..=5` on every monomial of degree `≤ max_degree`.
    pub fn random<R: Rng>(rng: &mut R, n: usize, max_degree: u32) -> Polynomial {
        let mut p = Self::zero(n);
        for k in 0..=max_degree {
            for e in exponents_of_order(n, k) {
                if rng.gen_bool(0.5) {
                    p.add_term(e, Rational::from_integer(rng.gen_range(-5..=5).into()));
                }
            }
        }
        p
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.terms.iter().rev().enumerate() {
            let vars: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(j, &k)| match k {
                    1 => format!("x{}", j + 1),
                    _ => format!("x{}^{k}", j + 1),
                })
                .collect();
            let negative = c.is_negative();
            if i > 0 {
                write!(f, " {} ", if negative { '-' } else { '+' })?;
            } else if negative {
                write!(f, "-")?;
            }
            let a = c.abs();
            match (vars.is_empty(), a.is_one()) {
                (true, _) => write!(f, "{}", fmt_rational(&a))?,
                (false, true) => write!(f, "{}", vars.join("*"))?,
                (false, false) => write!(f, "{}*{}", fmt_rational(&a), vars.join("*"))?,
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Point sets and jets
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointSet {
    n: usize,
    points: Vec<Vec<Rational>>,
}

impl PointSet {
    pub fn new(n: usize, points: Vec<Vec<Rational>>) -> Result<Self> {
        if points.is_empty() {
            return Err(JetError::EmptyPointSet);
        }
        let mut seen = BTreeSet::new();
        for p in &points {
            if p.len() != n {
                return Err(JetError::DimensionMismatch {
                    expected: n,
                    found: p.len(),
                });
            }
            if !seen.insert(p.clone()) {
                return Err(JetError::DuplicatePoint(format_point(p)));
            }
        }
        Ok(PointSet { n, points })
    }

    pub fn from_i64(points: &[&[i64]]) -> Result<Self> {
        let n = points.first().map_or(0, |p| p.len());
        Self::new(
            n,
            points
                .iter()
                .map(|p| p.iter().map(|&x| Rational::from_integer(x.into())).collect())
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<Rational>] {
        &self.points
    }

    pub fn position(&self, x: &[Rational]) -> Result<usize> {
        self.points
            .iter()
            .position(|p| p.as_slice() == x)
            .ok_or_else(|| JetError::NotAPoint(format_point(x)))
    }
}

/// An `m`-jet: `F_α(x)` for every point `x` and every `α ∈ N(m, n)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Jet {
    m: u32,
    points: PointSet,
    indices: Vec<MultiIndex>,
    values: Vec<Vec<Rational>>,
}

impl Jet {
    /// `values[i]` lists `F_α(points[i])` in the order of [`multi_indices`].
    pub fn new(points: PointSet, m: u32, values: Vec<Vec<Rational>>) -> Result<Self> {
        let indices = multi_indices(m, points.dim());
        if values.len() != points.len() {
            return Err(JetError::IncompleteJet {
                expected: points.len() * indices.len(),
                found: values.iter().map(Vec::len).sum(),
            });
        }
        for row in &values {
            if row.len() != indices.len() {
                return Err(JetError::IncompleteJet {
                    expected: indices.len(),
                    found: row.len(),
                });
            }
        }
        Ok(Jet {
            m,
            points,
            indices,
            values,
        })
    }

    pub fn zero(points: PointSet, m: u32) -> Self {
        let width = multi_indices(m, points.dim()).len();
        let values = vec![vec![Rational::zero(); width]; points.len()];
        Self::new(points, m, values).unwrap()
    }

    pub fn order(&self) -> u32 {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.points.dim()
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn values_at(&self, point: usize) -> &[Rational] {
        &self.values[point]
    }

    fn slot(&self, alpha: &MultiIndex) -> usize {
        self.indices
            .iter()
            .position(|a| a == alpha)
            .expect("multi-index within the jet order")
    }

    pub fn value(&self, point: usize, alpha: &MultiIndex) -> &Rational {
        &self.values[point][self.slot(alpha)]
    }

    fn same_shape(&self, other: &Jet) -> Result<()> {
        if self.m != other.m || self.points != other.points {
            return Err(JetError::Mismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Jet) -> Result<Jet> {
        self.same_shape(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
            .collect();
        Jet::new(self.points.clone(), self.m, values)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().flatten().all(Zero::is_zero)
    }

    /// `P_{k,m}`: forget entries of order above `k`.
    pub fn project(&self, k: u32) -> Result<Jet> {
        if k > self.m {
            return Err(JetError::OrderTooLarge { k, m: self.m });
        }
        let width = multi_indices(k, self.dim()).len();
        let values = self.values.iter().map(|row| row[..width].to_vec()).collect();
        Jet::new(self.points.clone(), k, values)
    }

    /// Entrywise `F_α ↦ F_α / α!`.
    pub fn to_divided_powers(&self) -> Jet {
        self.rescale(|f| Rational::new(BigInt::one(), f))
    }

    /// Inverse of [`Jet::to_divided_powers`].
    pub fn from_divided_powers(&self) -> Jet {
        self.rescale(Rational::from_integer)
    }

    fn rescale(&self, by: impl Fn(BigInt) -> Rational) -> Jet {
        let factors: Vec<Rational> = self.indices.iter().map(|a| by(a.factorial())).collect();
        let values = self
            .values
            .iter()
            .map(|row| row.iter().zip(&factors).map(|(v, f)| v * f).collect())
            .collect();
        Jet::new(self.points.clone(), self.m, values).unwrap()
    }
}

/// `F_α(x) = (∂^α f)(x)`.
pub fn jet_of(f: &Polynomial, points: &PointSet, m: u32) -> Jet {
    let indices = multi_indices(m, points.dim());
    let derivatives: Vec<Polynomial> = indices.iter().map(|a| f.derivative(a)).collect();
    let values = points
        .points()
        .iter()
        .map(|x| derivatives.iter().map(|d| d.evaluate(x)).collect())
        .collect();
    Jet::new(points.clone(), m, values).unwrap()
}

fn convolve(f: &Jet, g: &Jet, weight: impl Fn(&MultiIndex, &MultiIndex) -> Rational) -> Result<Jet> {
    f.same_shape(g)?;
    let slots: HashMap<&MultiIndex, usize> =
        f.indices.iter().enumerate().map(|(i, a)| (a, i)).collect();
    let values = (0..f.points.len())
        .map(|p| {
            f.indices
                .iter()
                .map(|alpha| {
                    let mut h = Rational::zero();
                    for beta in f.indices.iter().filter(|b| b.is_below(alpha)) {
                        let gamma = alpha.sub(beta);
                        h += weight(alpha, beta)
                            * &f.values[p][slots[beta]]
                            * &g.values[p][slots[&gamma]];
                    }
                    h
                })
                .collect()
        })
        .collect();
    Jet::new(f.points.clone(), f.m, values)
}

/// `H_α = Σ_{β ≤ α} C(α, β) F_β G_{α-β}`, the product matching `∂^α (fg)`.
pub fn jet_product(f: &Jet, g: &Jet) -> Result<Jet> {
    convolve(f, g, |a, b| Rational::from_integer(a.binomial(b)))
}

/// `H_α = Σ_{β+γ=α} F_β G_γ`; agrees with [`jet_product`] on divided-power jets.
pub fn jet_product_divided(f: &Jet, g: &Jet) -> Result<Jet> {
    convolve(f, g, |_, _| Rational::one())
}

// ---------------------------------------------------------------------------
// Taylor operators and seminorms
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TaylorConvention {
    /// `Σ F_α(x) (x - y)^α / α!`
    Verbatim,
    /// `Σ F_α(x) (y - x)^α / α!`
    Classical,
}

/// `T^k_x F` as a polynomial in `y`.
pub fn taylor_poly(f: &Jet, x: &[Rational], k: u32, convention: TaylorConvention) -> Result<Polynomial> {
    let at = f.points.position(x)?;
    if k > f.m {
        return Err(JetError::OrderTooLarge { k, m: f.m });
    }
    let n = f.dim();
    let shifts: Vec<Polynomial> = (0..n)
        .map(|i| {
            let s = Polynomial::variable(n, i).sub(&Polynomial::constant(n, x[i].clone()));
            match convention {
                TaylorConvention::Classical => s,
                TaylorConvention::Verbatim => s.scale(&-Rational::one()),
            }
        })
        .collect();
    let mut out = Polynomial::zero(n);
    for (slot, alpha) in f.indices.iter().enumerate().take_while(|(_, a)| a.order() <= k) {
        let c = &f.values[at][slot] / Rational::from_integer(alpha.factorial());
        if c.is_zero() {
            continue;
        }
        let mut term = Polynomial::constant(n, c);
        for (s, &a) in shifts.iter().zip(&alpha.0) {
            term = term.mul(&s.pow(a));
        }
        out = out.add(&term);
    }
    Ok(out)
}

/// `R^k_x F = P_k F - J^k T^k_x F` with the classical Taylor convention.
pub fn remainder(f: &Jet, x: &[Rational], k: u32) -> Result<Jet> {
    remainder_with(f, x, k, TaylorConvention::Classical)
}

pub fn remainder_with(f: &Jet, x: &[Rational], k: u32, convention: TaylorConvention) -> Result<Jet> {
    let t = taylor_poly(f, x, k, convention)?;
    let projected = f.project(k)?;
    let taylor_jet = jet_of(&t, &f.points, k);
    let values = projected
        .values
        .iter()
        .zip(&taylor_jet.values)
        .map(|(a, b)| a.iter().zip(b).map(|(p, q)| p - q).collect())
        .collect();
    Jet::new(f.points.clone(), k, values)
}

fn subset_positions(f: &Jet, k_set: &PointSet) -> Result<Vec<usize>> {
    if k_set.is_empty() {
        return Err(JetError::EmptyPointSet);
    }
    k_set.points().iter().map(|p| f.points.position(p)).collect()
}

/// `|F|_{K,k} = max |F_β(x)|` over `x ∈ K`, `|β| ≤ k`.
pub fn seminorm_flat(f: &Jet, k_set: &PointSet, k: u32) -> Result<Rational> {
    if k > f.m {
        return Err(JetError::OrderTooLarge { k, m: f.m });
    }
    let width = multi_indices(k, f.dim()).len();
    let mut best = Rational::zero();
    for p in subset_positions(f, k_set)? {
        for v in &f.values[p][..width] {
            best = best.max(v.abs());
        }
    }
    Ok(best)
}

/// `‖F‖_{K,k} = |F|_{K,k} + max |(R^m_x F)_β(y)|` over `x, y ∈ K`, `|β| ≤ k`.
pub fn seminorm_whitney(f: &Jet, k_set: &PointSet, k: u32) -> Result<Rational> {
    let flat = seminorm_flat(f, k_set, k)?;
    let positions = subset_positions(f, k_set)?;
    let width = multi_indices(k, f.dim()).len();
    let mut best = Rational::zero();
    for &x in &positions {
        let r = remainder(f, &f.points.points[x], f.m)?;
        for &y in &positions {
            for v in &r.values[y][..width] {
                best = best.max(v.abs());
            }
        }
    }
    Ok(flat + best)
}

fn sup_distance(x: &[Rational], y: &[Rational]) -> Rational {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b).abs())
        .max()
        .unwrap_or_else(Rational::zero)
}

/// `floor(log2 d)` for `d > 0`.
fn dyadic_exponent(d: &Rational) -> i64 {
    let (p, q) = (d.numer(), d.denom());
    let e = p.bits() as i64 - q.bits() as i64;
    let at_least = if e >= 0 {
        p >= &(q << e as usize)
    } else {
        &(p << (-e) as usize) >= q
    };
    if at_least {
        e
    } else {
        e - 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RateBucket {
    /// Pairs with `2^scale ≤ |x - y| < 2^(scale+1)` in the sup norm.
    pub scale: i64,
    pub pairs: usize,
    pub max_ratio: Rational,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RateVerdict {
    Consistent,
    Violation,
    InsufficientData,
}

impl RateVerdict {
    pub fn label(self) -> &'static str {
        match self {
            RateVerdict::Consistent => "consistent",
            RateVerdict::Violation => "violation",
            RateVerdict::InsufficientData => "diagnostic-insufficient",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RateReport {
    pub m: u32,
    pub beta: MultiIndex,
    /// Finest scale first.
    pub buckets: Vec<RateBucket>,
    pub verdict: RateVerdict,
}

/// Diagnostic for `r_{F,β}(x, y) = o(|x - y|^{m - |β|})` on a finite sample.
///
/// The ratio `|r_{F,β}(x,y)| / |x - y|^{m-|β|}` is maximized over dyadic
/// distance buckets. The verdict is consistent when every maximum vanishes, or
/// when the maxima never grow toward finer scales and the finest one is
/// strictly below the coarsest.
pub fn whitney_rate_check(f: &Jet, m: u32, beta: &MultiIndex, k_set: &PointSet) -> Result<RateReport> {
    if beta.order() > m {
        return Err(JetError::OrderTooLarge { k: beta.order(), m });
    }
    let jet = f.project(m)?;
    let positions = subset_positions(&jet, k_set)?;
    let slot = jet.slot(beta);
    let power = m - beta.order();
    let mut buckets: BTreeMap<i64, (usize, Rational)> = BTreeMap::new();
    for &x in &positions {
        let r = remainder(&jet, &jet.points.points[x], m)?;
        for &y in &positions {
            if x == y {
                continue;
            }
            let d = sup_distance(&jet.points.points[x], &jet.points.points[y]);
            let ratio = r.values[y][slot].abs() / num_traits::pow(d.clone(), power as usize);
            let entry = buckets
                .entry(dyadic_exponent(&d))
                .or_insert_with(|| (0, Rational::zero()));
            entry.0 += 1;
            entry.1 = entry.1.clone().max(ratio);
        }
    }
    let buckets: Vec<RateBucket> = buckets
        .into_iter()
        .map(|(scale, (pairs, max_ratio))| RateBucket {
            scale,
            pairs,
            max_ratio,
        })
        .collect();
    let verdict = if buckets.len() < 2 {
        RateVerdict::InsufficientData
    } else if buckets.iter().all(|b| b.max_ratio.is_zero()) {
        RateVerdict::Consistent
    } else {
        let monotone = buckets.windows(2).all(|w| w[0].max_ratio <= w[1].max_ratio);
        if monotone && buckets[0].max_ratio < buckets[buckets.len() - 1].max_ratio {
            RateVerdict::Consistent
        } else {
            RateVerdict::Violation
        }
    };
    Ok(RateReport {
        m,
        beta: beta.clone(),
        buckets,
        verdict,
    })
}

/// Reads a jet table: a header `n m`, then one row per point with `n`
/// coordinates followed by the `F_α` values in [`multi_indices`] order.
/// Fields are separated by commas or whitespace; `#` starts a comment.
pub fn parse_jet_file(text: &str) -> Result<Jet> {
    let mut rows = text.lines().enumerate().filter_map(|(i, line)| {
        let body = line.split('#').next().unwrap_or("").trim();
        (!body.is_empty()).then(|| {
            (
                i + 1,
                body.split(|c: char| c == ',' || c.is_whitespace())
                    .filter(|s| !s.is_empty())
                    .collect::<Vec<_>>(),
            )
        })
    });
    let err = |line: usize, message: String| JetError::Parse { line, message };
    let (hline, header) = rows.next().ok_or_else(|| err(1, "missing header `n m`".into()))?;
    if header.len() != 2 {
        return Err(err(hline, "header must be `n m`".into()));
    }
    let n: usize = header[0]
        .parse()
        .map_err(|_| err(hline, format!("invalid dimension `{}`", header[0])))?;
    let m: u32 = header[1]
        .parse()
        .map_err(|_| err(hline, format!("invalid order `{}`", header[1])))?;
    let width = multi_indices(m, n).len();
    let mut points = Vec::new();
    let mut values = Vec::new();
    for (line, fields) in rows {
        if fields.len() != n + width {
            return Err(err(
                line,
                format!("expected {} fields, found {}", n + width, fields.len()),
            ));
        }
        let parsed = fields
            .iter()
            .map(|s| Rational::from_str(s).map_err(|_| err(line, format!("invalid rational `{s}`"))))
            .collect::<Result<Vec<_>>>()?;
        points.push(parsed[..n].to_vec());
        values.push(parsed[n..].to_vec());
    }
    let points = PointSet::new(n, points).map_err(|e| match e {
        JetError::Parse { .. } => e,
        other => err(hline, other.to_string()),
    })?;
    Jet::new(points, m, values)
}

// ---------------------------------------------------------------------------
// Quadrants
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Zero,
    Positive,
    Negative,
    Free,
}

/// `{x : x_i = p_i on I₀, x_i > p_i on I₊, x_i < p_i on I₋}` for an apex `p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Quadrant {
    pub signs: Vec<Sign>,
    pub apex: Vec<Rational>,
}

impl Quadrant {
    pub fn new(signs: Vec<Sign>) -> Self {
        let apex = vec![Rational::zero(); signs.len()];
        Quadrant { signs, apex }
    }

    /// From 1-based index sets; coordinates in none of them are unconstrained.
    pub fn from_partition(n: usize, zero: &[usize], positive: &[usize], negative: &[usize]) -> Result<Self> {
        let mut signs = vec![Sign::Free; n];
        for (set, s) in [(zero, Sign::Zero), (positive, Sign::Positive), (negative, Sign::Negative)] {
            for &i in set {
                if i == 0 || i > n {
                    return Err(JetError::Quadrant(format!("index {i} outside 1..={n}")));
                }
                if signs[i - 1] != Sign::Free {
                    return Err(JetError::Quadrant(format!("index {i} in two parts")));
                }
                signs[i - 1] = s;
            }
        }
        Ok(Self::new(signs))
    }

    pub fn contains(&self, p: &[Rational]) -> bool {
        self.signs.iter().zip(p.iter().zip(&self.apex)).all(|(s, (x, a))| match s {
            Sign::Zero => x == a,
            Sign::Positive => x > a,
            Sign::Negative => x < a,
            Sign::Free => true,
        })
    }

    pub fn origin_in_closure(&self) -> bool {
        self.signs.iter().zip(&self.apex).all(|(s, a)| match s {
            Sign::Zero => a.is_zero(),
            Sign::Positive => !a.is_positive(),
            Sign::Negative => !a.is_negative(),
            Sign::Free => true,
        })
    }

    fn span(&self) -> BTreeSet<usize> {
        (0..self.signs.len())
            .filter(|&i| self.signs[i] != Sign::Zero)
            .collect()
    }
}

/// A finite union of quadrants in `R^n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadrantSpec {
    pub n: usize,
    pub parts: Vec<Quadrant>,
}

impl QuadrantSpec {
    pub fn new(n: usize, parts: Vec<Quadrant>) -> Result<Self> {
        if parts.is_empty() {
            return Err(JetError::Quadrant("empty union".into()));
        }
        for q in &parts {
            if q.signs.len() != n || q.apex.len() != n {
                return Err(JetError::DimensionMismatch {
                    expected: n,
                    found: q.signs.len().max(q.apex.len()),
                });
            }
        }
        Ok(QuadrantSpec { n, parts })
    }

    /// Parses `|`-separated parts, each a string over `0 + - *` with one
    /// character per coordinate and an optional apex `@p1,p2,...`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut parts = Vec::new();
        for part in text.split('|') {
            let (signs, apex) = match part.trim().split_once('@') {
                Some((s, a)) => (s, Some(a)),
                None => (part.trim(), None),
            };
            let signs = signs
                .chars()
                .map(|c| match c {
                    '0' => Ok(Sign::Zero),
                    '+' => Ok(Sign::Positive),
                    '-' => Ok(Sign::Negative),
                    '*' => Ok(Sign::Free),
                    other => Err(JetError::Quadrant(format!("unknown sign `{other}`"))),
                })
                .collect::<Result<Vec<_>>>()?;
            let mut q = Quadrant::new(signs);
            if let Some(a) = apex {
                q.apex = a
                    .split(',')
                    .map(|s| {
                        Rational::from_str(s.trim())
                            .map_err(|_| JetError::Quadrant(format!("invalid apex coordinate `{s}`")))
                    })
                    .collect::<Result<Vec<_>>>()?;
            }
            parts.push(q);
        }
        let n = parts[0].signs.len();
        Self::new(n, parts)
    }

    pub fn contains(&self, p: &[Rational]) -> bool {
        self.parts.iter().any(|q| q.contains(p))
    }
}

pub fn quadrant_membership(p: &[Rational], q: &QuadrantSpec) -> bool {
    q.contains(p)
}

// ---------------------------------------------------------------------------
// Polynomial forms on R^n
// ---------------------------------------------------------------------------

/// Polynomial differential form: `(x^a, dx_I) ↦ coefficient` with `I` increasing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EuclideanPolyForm {
    n: usize,
    terms: BTreeMap<(Vec<u32>, Vec<usize>), Rational>,
}

impl EuclideanPolyForm {
    pub fn zero(n: usize) -> Self {
        EuclideanPolyForm {
            n,
            terms: BTreeMap::new(),
        }
    }

    /// `c x^a dx_{i_1} ∧ ... ∧ dx_{i_k}`, reordering the indices with sign.
    pub fn term(n: usize, a: Vec<u32>, indices: &[usize], c: Rational) -> Self {
        let mut out = Self::zero(n);
        out.add_term(a, indices, c);
        out
    }

    pub fn from_polynomial(p: &Polynomial) -> Self {
        let mut out = Self::zero(p.nvars());
        for (e, c) in p.terms() {
            out.add_term(e.clone(), &[], c.clone());
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(Vec<u32>, Vec<usize>), &Rational)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, a: Vec<u32>, indices: &[usize], c: Rational) {
        let mut idx = indices.to_vec();
        let mut negative = false;
        for i in 0..idx.len() {
            for j in 0..idx.len() - 1 - i {
                if idx[j] == idx[j + 1] {
                    return;
                }
                if idx[j] > idx[j + 1] {
                    idx.swap(j, j + 1);
                    negative = !negative;
                }
            }
        }
        if idx.windows(2).any(|w| w[0] == w[1]) || c.is_zero() {
            return;
        }
        let c = if negative { -c } else { c };
        let entry = self.terms.entry((a, idx)).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for ((a, i), c) in &other.terms {
            out.add_term(a.clone(), i, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-Rational::one()))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = Self::zero(self.n);
        for ((a, i), v) in &self.terms {
            out.add_term(a.clone(), i, v * c);
        }
        out
    }

    /// `Some(k)` when every term has form degree `k`; zero is homogeneous of every degree.
    pub fn form_degree(&self) -> Option<usize> {
        let degrees: BTreeSet<usize> = self.terms.keys().map(|(_, i)| i.len()).collect();
        match degrees.len() {
            1 => degrees.into_iter().next(),
            _ => None,
        }
    }

    pub fn d(&self) -> Self {
        let mut out = Self::zero(self.n);
        for ((a, idx), c) in &self.terms {
            for j in 0..self.n {
                if a[j] == 0 || idx.contains(&j) {
                    continue;
                }
                let mut b = a.clone();
                b[j] -= 1;
                let mut with_j = vec![j];
                with_j.extend_from_slice(idx);
                out.add_term(b, &with_j, c * Rational::from_integer(a[j].into()));
            }
        }
        out
    }

    /// Value of the 0-form part at the origin; positive-degree parts are dropped.
    pub fn ev0(&self) -> Self {
        let zero = vec![0; self.n];
        let mut out = Self::zero(self.n);
        if let Some(c) = self.terms.get(&(zero.clone(), vec![])) {
            out.add_term(zero, &[], c.clone());
        }
        out
    }

    /// Uniformly random coefficients in `-5..=5` on monomial `k`-forms of coefficient degree `≤ max_degree`.
    pub fn random<R: Rng>(rng: &mut R, n: usize, k: usize, max_degree: u32) -> Self {
        let mut out = Self::zero(n);
        let subsets = index_subsets(n, k);
        for deg in 0..=max_degree {
            for a in exponents_of_order(n, deg) {
                for idx in &subsets {
                    if rng.gen_bool(0.3) {
                        out.add_term(a.clone(), idx, Rational::from_integer(rng.gen_range(-5..=5).into()));
                    }
                }
            }
        }
        out
    }
}

impl fmt::Display for EuclideanPolyForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|((a, idx), c)| {
                let p = Polynomial::monomial(self.n, a.clone(), c.clone());
                let dx: Vec<String> = idx.iter().map(|i| format!("dx{}", i + 1)).collect();
                if dx.is_empty() {
                    format!("{p}")
                } else {
                    format!("({p})*{}", dx.join("^"))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Increasing `k`-subsets of `0..n`.
pub fn index_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Radial homotopy for `H(x, t) = (1 - t) x`:
/// `K(x^a dx_I) = 1/(|a| + k) Σ_j (-1)^(j-1) x^a x_{i_j} dx_{I without i_j}`,
/// and `K` vanishes on 0-forms. It satisfies `Kd + dK = id - ev₀`.
pub fn poincare_homotopy(omega: &EuclideanPolyForm) -> EuclideanPolyForm {
    let mut out = EuclideanPolyForm::zero(omega.n);
    for ((a, idx), c) in &omega.terms {
        let k = idx.len();
        if k == 0 {
            continue;
        }
        let weight = a.iter().sum::<u32>() as usize + k;
        let c = c / Rational::from_integer(BigInt::from(weight));
        for (j, &i) in idx.iter().enumerate() {
            let mut b = a.clone();
            b[i] += 1;
            let rest: Vec<usize> = idx.iter().copied().filter(|&x| x != i).collect();
            let s = if j % 2 == 0 { c.clone() } else { -c.clone() };
            out.add_term(b, &rest, s);
        }
    }
    out
}

/// `Kdω + dKω - (ω - ev₀ω)`; zero exactly when the homotopy identity holds on `ω`.
pub fn homotopy_defect(omega: &EuclideanPolyForm) -> EuclideanPolyForm {
    let lhs = poincare_homotopy(&omega.d()).add(&poincare_homotopy(omega).d());
    lhs.sub(&omega.sub(&omega.ev0()))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PoincareReport {
    /// 0-based coordinates spanned by the union.
    pub span: Vec<usize>,
    pub coefficient_bound: u32,
    /// `dims[k]` for form degrees `0..=up_to`.
    pub dims: Vec<usize>,
    pub forms_checked: usize,
    pub homotopy_identity: bool,
    pub k_squared_zero: bool,
}

/// Polynomial de Rham cohomology of a star-shaped quadrant union, with the
/// radial homotopy verified on every monomial form of coefficient degree
/// `≤ coefficient_bound`.
pub fn quadrant_poincare_report(q: &QuadrantSpec, up_to: usize, coefficient_bound: u32) -> Result<PoincareReport> {
    for part in &q.parts {
        if !part.origin_in_closure() {
            return Err(JetError::Unsupported(
                "the origin is not in the closure of every quadrant, so the radial contraction does not apply".into(),
            ));
        }
    }
    let span: BTreeSet<usize> = q.parts.iter().flat_map(Quadrant::span).collect();
    if !q.parts.iter().any(|p| p.span() == span) {
        return Err(JetError::Unsupported(
            "the union has empty interior in its linear span".into(),
        ));
    }
    let s = span.len();
    let mut forms_checked = 0;
    let mut homotopy_identity = true;
    let mut k_squared_zero = true;
    let mut dims = vec![0; up_to + 1];
    for w in 0..=coefficient_bound as usize + up_to.min(s) {
        // forms of weight w = coefficient degree + form degree, a subcomplex for d and K
        let pieces: Vec<Vec<(Vec<u32>, Vec<usize>)>> = (0..=s + 1)
            .map(|k| {
                if k > s || k > w || w - k > coefficient_bound as usize {
                    return vec![];
                }
                let mut basis = Vec::new();
                for a in exponents_of_order(s, (w - k) as u32) {
                    for idx in index_subsets(s, k) {
                        basis.push((a.clone(), idx));
                    }
                }
                basis
            })
            .collect();
        for piece in &pieces {
            for (a, idx) in piece {
                let omega = EuclideanPolyForm::term(s, a.clone(), idx, Rational::one());
                forms_checked += 1;
                homotopy_identity &= homotopy_defect(&omega).is_zero();
                k_squared_zero &= poincare_homotopy(&poincare_homotopy(&omega)).is_zero();
            }
        }
        let complete = |k: usize| k > s || w < k || w - k <= coefficient_bound as usize;
        let matrix = |k: usize| -> Matrix {
            let source = pieces.get(k).map_or(&[][..], Vec::as_slice);
            let target = pieces.get(k + 1).map_or(&[][..], Vec::as_slice);
            let position: HashMap<&(Vec<u32>, Vec<usize>), usize> =
                target.iter().enumerate().map(|(i, t)| (t, i)).collect();
            let cols: Vec<Vec<Rational>> = source
                .iter()
                .map(|(a, idx)| {
                    let mut col = vec![Rational::zero(); target.len()];
                    let image = EuclideanPolyForm::term(s, a.clone(), idx, Rational::one()).d();
                    for (key, c) in image.terms() {
                        col[position[key]] = c.clone();
                    }
                    col
                })
                .collect();
            Matrix::from_columns(target.len(), &cols)
        };
        for (k, dim) in dims.iter_mut().enumerate().take(s.min(up_to) + 1) {
            if !(complete(k) && complete(k + 1) && (k == 0 || complete(k - 1))) {
                continue;
            }
            let incoming = if k == 0 {
                Matrix::zeros(pieces[0].len(), 0)
            } else {
                matrix(k - 1)
            };
            *dim += cohomology_from_differentials(k as i32, &incoming, &matrix(k)).dim;
        }
    }
    Ok(PoincareReport {
        span: span.into_iter().collect(),
        coefficient_bound,
        dims,
        forms_checked,
        homotopy_identity,
        k_squared_zero,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graded_core::{frac, int};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pt(xs: &[i64]) -> Vec<Rational> {
        xs.iter().map(|&x| int(x)).collect()
    }

    fn x_power(n: usize, i: usize, k: u32) -> Polynomial {
        Polynomial::variable(n, i).pow(k)
    }

    #[test]
    fn graded_order_of_multi_indices() {
        let idx: Vec<Vec<u32>> = multi_indices(2, 2).into_iter().map(|a| a.0).collect();
        assert_eq!(
            idx,
            vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![2, 0], vec![1, 1], vec![0, 2]]
        );
        assert_eq!(multi_indices(4, 3).len(), 35);
    }

    #[test]
    fn jets_of_monomials() {
        let origin = PointSet::from_i64(&[&[0]]).unwrap();
        let j = jet_of(&x_power(1, 0, 2), &origin, 2);
        assert_eq!(j.values_at(0), &[int(0), int(0), int(2)]);
        let j = jet_of(&x_power(1, 0, 1), &origin, 2);
        assert_eq!(j.values_at(0), &[int(0), int(1), int(0)]);
        let f = Polynomial::variable(2, 0).mul(&Polynomial::variable(2, 1));
        let j = jet_of(&f, &PointSet::from_i64(&[&[1, 1]]).unwrap(), 1);
        assert_eq!(j.values_at(0), &[int(1), int(1), int(1)]);
    }

    #[test]
    fn product_examples() {
        let origin = PointSet::from_i64(&[&[0]]).unwrap();
        let x = jet_of(&x_power(1, 0, 1), &origin, 2);
        let h = jet_product(&x, &x).unwrap();
        assert_eq!(h.values_at(0), &[int(0), int(0), int(2)]);
        let one = jet_of(&Polynomial::constant(1, int(1)), &origin, 2);
        assert_eq!(jet_product(&one, &x).unwrap(), x);
        let other = jet_of(&x_power(1, 0, 1), &origin, 1);
        assert_eq!(jet_product(&x, &other), Err(JetError::Mismatch));
    }

    #[test]
    fn coefficient_free_product_differs_without_intertwiner() {
        let origin = PointSet::from_i64(&[&[0]]).unwrap();
        let x = jet_of(&x_power(1, 0, 1), &origin, 2);
        assert_eq!(jet_product_divided(&x, &x).unwrap().values_at(0), &[int(0), int(0), int(1)]);
    }

    #[test]
    fn taylor_examples() {
        let origin = PointSet::from_i64(&[&[0]]).unwrap();
        let c = jet_of(&Polynomial::constant(1, frac(3, 2)), &origin, 2);
        for conv in [TaylorConvention::Verbatim, TaylorConvention::Classical] {
            assert_eq!(taylor_poly(&c, &pt(&[0]), 2, conv).unwrap(), Polynomial::constant(1, frac(3, 2)));
        }
        let sq = jet_of(&x_power(1, 0, 2), &origin, 2);
        assert_eq!(
            taylor_poly(&sq, &pt(&[0]), 2, TaylorConvention::Verbatim).unwrap(),
            x_power(1, 0, 2)
        );
        assert_eq!(
            taylor_poly(&sq, &pt(&[0]), 0, TaylorConvention::Verbatim).unwrap(),
            Polynomial::zero(1)
        );
        assert!(matches!(
            taylor_poly(&sq, &pt(&[1]), 1, TaylorConvention::Classical),
            Err(JetError::NotAPoint(_))
        ));
    }

    #[test]
    fn remainder_examples() {
        let pts = PointSet::from_i64(&[&[0], &[1]]).unwrap();
        let cube = jet_of(&x_power(1, 0, 3), &pts, 3);
        let r = remainder(&cube, &pt(&[0]), 2).unwrap();
        assert_eq!(r.values_at(1)[0], int(1));
        assert!(r.values_at(0).iter().all(Zero::is_zero));
        let r = remainder(&cube, &pt(&[1]), 3).unwrap();
        assert!(r.is_zero());
    }

    #[test]
    fn verbatim_convention_breaks_vanishing_for_odd_orders() {
        let pts = PointSet::from_i64(&[&[0], &[1]]).unwrap();
        let x = jet_of(&x_power(1, 0, 1), &pts, 1);
        assert!(remainder_with(&x, &pt(&[0]), 1, TaylorConvention::Classical).unwrap().is_zero());
        assert!(!remainder_with(&x, &pt(&[0]), 1, TaylorConvention::Verbatim).unwrap().is_zero());
    }

    #[test]
    fn seminorm_examples() {
        let pts = PointSet::from_i64(&[&[0], &[1]]).unwrap();
        let z = Jet::zero(pts.clone(), 2);
        assert_eq!(seminorm_flat(&z, &pts, 2).unwrap(), int(0));
        assert_eq!(seminorm_whitney(&z, &pts, 2).unwrap(), int(0));
        let x = jet_of(&x_power(1, 0, 1), &pts, 1);
        assert_eq!(seminorm_flat(&x, &pts, 0).unwrap(), int(1));
        assert_eq!(seminorm_whitney(&x, &pts, 0).unwrap(), int(1));
        let bump = Jet::new(pts.clone(), 0, vec![vec![int(0)], vec![int(2)]]).unwrap();
        assert_eq!(seminorm_whitney(&bump, &pts, 0).unwrap(), int(4));
        let single = PointSet::from_i64(&[&[5]]).unwrap();
        assert!(matches!(seminorm_flat(&x, &single, 0), Err(JetError::NotAPoint(_))));
    }

    fn dyadic_grid() -> PointSet {
        let pts: Vec<Vec<Rational>> = [-1, -2, -4, -8, 0, 1, 2, 4, 8]
            .iter()
            .map(|&d| vec![if d == 0 { int(0) } else { frac(d.signum(), d.abs()) }])
            .collect();
        PointSet::new(1, pts).unwrap()
    }

    #[test]
    fn rate_check_verdicts() {
        let grid = dyadic_grid();
        let f = Polynomial::random(&mut ChaCha8Rng::seed_from_u64(3), 1, 3);
        let j = jet_of(&f, &grid, 3);
        let report = whitney_rate_check(&j, 3, &MultiIndex(vec![0]), &grid).unwrap();
        assert_eq!(report.verdict, RateVerdict::Consistent);
        assert!(report.buckets.iter().all(|b| b.max_ratio.is_zero()));

        let values = grid.points().iter().map(|p| vec![p[0].abs(), int(0)]).collect();
        let abs = Jet::new(grid.clone(), 1, values).unwrap();
        let report = whitney_rate_check(&abs, 1, &MultiIndex(vec![0]), &grid).unwrap();
        assert_eq!(report.verdict, RateVerdict::Violation);

        let pair = PointSet::from_i64(&[&[0], &[1]]).unwrap();
        let j = jet_of(&f, &pair, 3);
        let report = whitney_rate_check(&j, 3, &MultiIndex(vec![0]), &pair).unwrap();
        assert_eq!(report.verdict, RateVerdict::InsufficientData);
    }

    #[test]
    fn smooth_non_polynomial_samples_decay() {
        // x^3 sampled with an order-2 jet: ratios shrink linearly with the distance
        let grid = dyadic_grid();
        let j = jet_of(&x_power(1, 0, 3), &grid, 2);
        let report = whitney_rate_check(&j, 2, &MultiIndex(vec![0]), &grid).unwrap();
        assert_eq!(report.verdict, RateVerdict::Consistent);
    }

    #[test]
    fn dyadic_exponents() {
        assert_eq!(dyadic_exponent(&int(1)), 0);
        assert_eq!(dyadic_exponent(&int(3)), 1);
        assert_eq!(dyadic_exponent(&frac(1, 2)), -1);
        assert_eq!(dyadic_exponent(&frac(3, 8)), -2);
        assert_eq!(dyadic_exponent(&frac(1, 3)), -2);
    }

    #[test]
    fn membership_examples() {
        let all_zero = QuadrantSpec::new(2, vec![Quadrant::from_partition(2, &[1, 2], &[], &[]).unwrap()]).unwrap();
        assert!(quadrant_membership(&pt(&[0, 0]), &all_zero));
        let mixed = QuadrantSpec::parse("+-").unwrap();
        assert!(quadrant_membership(&pt(&[1, -1]), &mixed));
        let open = QuadrantSpec::new(2, vec![Quadrant::from_partition(2, &[], &[1, 2], &[]).unwrap()]).unwrap();
        assert!(!quadrant_membership(&pt(&[0, 1]), &open));
        let union = QuadrantSpec::parse("++|0*").unwrap();
        assert!(quadrant_membership(&pt(&[0, 1]), &union));
        assert!(Quadrant::from_partition(2, &[1], &[1], &[]).is_err());
        assert!(QuadrantSpec::parse("+x").is_err());
    }

    #[test]
    fn homotopy_examples() {
        let f = EuclideanPolyForm::from_polynomial(&Polynomial::random(&mut ChaCha8Rng::seed_from_u64(1), 2, 3));
        assert!(poincare_homotopy(&f).is_zero());
        assert!(homotopy_defect(&f).is_zero());
        let omega = EuclideanPolyForm::term(1, vec![1], &[0], int(1));
        let k = poincare_homotopy(&omega);
        assert_eq!(k, EuclideanPolyForm::term(1, vec![2], &[], frac(1, 2)));
        assert_eq!(k.d(), omega);
        assert!(omega.d().is_zero());
    }

    #[test]
    fn wedge_signs() {
        let a = EuclideanPolyForm::term(3, vec![0, 0, 0], &[1, 0], int(1));
        assert_eq!(a, EuclideanPolyForm::term(3, vec![0, 0, 0], &[0, 1], int(-1)));
        assert!(EuclideanPolyForm::term(3, vec![0, 0, 0], &[2, 2], int(1)).is_zero());
        let f = EuclideanPolyForm::term(2, vec![1, 1], &[], int(1));
        assert!(f.d().d().is_zero());
    }

    #[test]
    fn quadrant_poincare_examples() {
        let q = QuadrantSpec::parse("++").unwrap();
        let r = quadrant_poincare_report(&q, 2, 3).unwrap();
        assert_eq!(r.dims, vec![1, 0, 0]);
        assert!(r.homotopy_identity && r.k_squared_zero);
        let point = QuadrantSpec::parse("000").unwrap();
        assert_eq!(quadrant_poincare_report(&point, 1, 3).unwrap().dims, vec![1, 0]);
        let full = QuadrantSpec::parse("***").unwrap();
        assert_eq!(quadrant_poincare_report(&full, 3, 2).unwrap().dims, vec![1, 0, 0, 0]);
        let union = QuadrantSpec::parse("+*0|0-0").unwrap();
        assert_eq!(quadrant_poincare_report(&union, 2, 2).unwrap().span, vec![0, 1]);
    }

    #[test]
    fn quadrant_poincare_rejections() {
        let away = QuadrantSpec::parse("++@1,0").unwrap();
        assert!(matches!(quadrant_poincare_report(&away, 2, 2), Err(JetError::Unsupported(_))));
        let shifted = QuadrantSpec::parse("++@-1,0").unwrap();
        assert!(quadrant_poincare_report(&shifted, 2, 2).is_ok());
        let rays = QuadrantSpec::parse("+0|0+").unwrap();
        assert!(matches!(quadrant_poincare_report(&rays, 2, 2), Err(JetError::Unsupported(_))));
    }

    #[test]
    fn jet_file_round() {
        let j = parse_jet_file("# n m\n1 2\n0, 0, 0, 2\n1/2 1/4 1 2\n").unwrap();
        let sq = jet_of(&x_power(1, 0, 2), j.points(), 2);
        assert_eq!(j, sq);
        assert!(matches!(
            parse_jet_file("1 2\n0 0 0\n"),
            Err(JetError::Parse { line: 2, .. })
        ));
        assert!(matches!(parse_jet_file("1 1\n0 1 2\n0 3 4\n"), Err(JetError::Parse { line: 1, .. })));
        assert!(matches!(parse_jet_file(""), Err(JetError::Parse { .. })));
    }

    fn poly_strategy(n: usize, max_degree: u32) -> impl Strategy<Value = Polynomial> {
        any::<u64>().prop_map(move |seed| Polynomial::random(&mut ChaCha8Rng::seed_from_u64(seed), n, max_degree))
    }

    fn grid(n: usize) -> PointSet {
        let pts = [[0, 0, 0], [1, -1, 2], [-2, 1, 1]]
            .iter()
            .map(|p| p[..n].iter().map(|&x| frac(x, 2)).collect())
            .collect();
        PointSet::new(n, pts).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn jet_map_is_multiplicative(n in 1usize..=3, m in 0u32..=3, seeds in any::<(u64, u64)>()) {
            let f = Polynomial::random(&mut ChaCha8Rng::seed_from_u64(seeds.0), n, 3);
            let g = Polynomial::random(&mut ChaCha8Rng::seed_from_u64(seeds.1), n, 3);
            let x = grid(n);
            let lhs = jet_of(&f.mul(&g), &x, m);
            let (jf, jg) = (jet_of(&f, &x, m), jet_of(&g, &x, m));
            prop_assert_eq!(&lhs, &jet_product(&jf, &jg).unwrap());
            let divided = jet_product_divided(&jf.to_divided_powers(), &jg.to_divided_powers()).unwrap();
            prop_assert_eq!(lhs, divided.from_divided_powers());
        }

        #[test]
        fn remainder_vanishes_on_low_degree(f in poly_strategy(2, 3), extra in 0u32..2) {
            let x = grid(2);
            let j = jet_of(&f, &x, 3 + extra);
            for p in x.points() {
                prop_assert!(remainder(&j, p, 3).unwrap().is_zero());
            }
        }

        #[test]
        fn whitney_dominates_flat(f in poly_strategy(1, 4)) {
            let x = grid(1);
            let j = jet_of(&f, &x, 2);
            prop_assert!(seminorm_whitney(&j, &x, 1).unwrap() >= seminorm_flat(&j, &x, 1).unwrap());
        }

        #[test]
        fn homotopy_identity_and_square(seed in any::<u64>(), n in 1usize..=4, k in 0usize..=4) {
            let k = k.min(n);
            let omega = EuclideanPolyForm::random(&mut ChaCha8Rng::seed_from_u64(seed), n, k, 4);
            prop_assert!(homotopy_defect(&omega).is_zero());
            prop_assert!(poincare_homotopy(&poincare_homotopy(&omega)).is_zero());
        }

        #[test]
        fn union_membership_is_monotone(signs in "[0+*-]{3}", extra in "[0+*-]{3}", p in proptest::collection::vec(-2i64..=2, 3)) {
            let p = pt(&p);
            let small = QuadrantSpec::parse(&signs).unwrap();
            let big = QuadrantSpec::parse(&format!("{signs}|{extra}")).unwrap();
            prop_assert!(!quadrant_membership(&p, &small) || quadrant_membership(&p, &big));
        }
    }
}
