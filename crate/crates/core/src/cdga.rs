//! Free graded-commutative algebras with Koszul signs, Leibniz differentials,
//! monomial quotients, morphisms, chain homotopies and cohomology.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::graded_core::{
    cohomology_from_differentials, fmt_rational, int, is_chain_homotopy, CochainComplexSlice, CohomologyGroup, GradedBasis,
    GradedError, Label, LinearMap, Matrix, Rational,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CdgaError {
    #[error("generator `{0}` is declared twice")]
    DuplicateGenerator(String),
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("generator `{0}` has degree 0; only the unit may live in degree 0")]
    DegreeZeroGenerator(String),
    #[error("basis in degree {degree} is infinite: degree-0 generator `{generator}` has no polynomial bound")]
    Finiteness { degree: u32, generator: String },
    #[error("d `{generator}` must be homogeneous of degree {expected}")]
    DifferentialDegree { generator: String, expected: u32 },
    #[error("d(d `{0}`) is nonzero")]
    DSquaredNonzero(String),
    #[error("d of relation `{0}` is not in the relation ideal")]
    RelationNotClosed(String),
    #[error("relations must be monomials (got `{0}`)")]
    NonMonomialRelation(String),
    #[error("degree {degree} exceeds the truncation degree {truncation}")]
    AboveTruncation { degree: u32, truncation: u32 },
    #[error("element does not belong to this presentation ({found} exponents, expected {expected})")]
    MismatchedPresentation { expected: usize, found: usize },
    #[error("element is not homogeneous")]
    NotHomogeneous,
    #[error("morphism image of `{0}` has the wrong degree")]
    MorphismDegree(String),
    #[error("morphism does not commute with d on `{0}`")]
    MorphismNotChainMap(String),
    #[error("morphism does not map relation `{0}` into the target ideal")]
    MorphismRelation(String),
    #[error("morphism needs {expected} generator images, got {found}")]
    MorphismArity { expected: usize, found: usize },
    #[error(transparent)]
    Graded(#[from] GradedError),
}

pub type Result<T, E = CdgaError> = std::result::Result<T, E>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Generator {
    pub name: String,
    pub degree: u32,
}

impl Generator {
    pub fn new(name: impl Into<String>, degree: u32) -> Self {
        Generator {
            name: name.into(),
            degree,
        }
    }

    pub fn is_odd(&self) -> bool {
        self.degree % 2 == 1
    }
}

/// Exponent vector over the generators, in declaration order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn unit(ngens: usize) -> Self {
        Monomial(vec![0; ngens])
    }

    pub fn generator(ngens: usize, i: usize) -> Self {
        let mut e = vec![0; ngens];
        e[i] = 1;
        Monomial(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn is_unit(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// Word length (number of generator factors with multiplicity).
    pub fn length(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// The single generator this monomial equals, if any.
    pub fn as_generator(&self) -> Option<usize> {
        (self.length() == 1).then(|| self.0.iter().position(|&e| e == 1).unwrap())
    }
}

/// Sparse linear combination of monomials; zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Element {
    terms: BTreeMap<Monomial, Rational>,
}

impl Element {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_monomial(m: Monomial) -> Self {
        Self::term(m, Rational::one())
    }

    pub fn term(m: Monomial, c: Rational) -> Self {
        let mut e = Self::zero();
        e.add_term(m, c);
        e
    }

    pub fn unit(ngens: usize) -> Self {
        Self::from_monomial(Monomial::unit(ngens))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get() + c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &Element) -> Element {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Element) -> Element {
        self.add(&other.scale(&-Rational::one()))
    }

    pub fn scale(&self, c: &Rational) -> Element {
        if c.is_zero() {
            return Element::zero();
        }
        Element {
            terms: self
                .terms
                .iter()
                .map(|(m, x)| (m.clone(), x * c))
                .collect(),
        }
    }

    pub fn retain(&mut self, mut keep: impl FnMut(&Monomial) -> bool) {
        self.terms.retain(|m, _| keep(m));
    }
}

impl FromIterator<(Monomial, Rational)> for Element {
    fn from_iter<T: IntoIterator<Item = (Monomial, Rational)>>(iter: T) -> Self {
        let mut e = Element::zero();
        for (m, c) in iter {
            e.add_term(m, c);
        }
        e
    }
}

// ---------------------------------------------------------------------------
// Free CDGA engine
// ---------------------------------------------------------------------------

/// Free graded-commutative algebra on named generators with a differential
/// given on generators. No validation beyond unique names; the degree-0
/// variables of polynomial forms live here too.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreeCdga {
    generators: Vec<Generator>,
    differential: Vec<Element>,
}

impl FreeCdga {
    pub fn new(generators: Vec<Generator>) -> Result<Self> {
        for (i, g) in generators.iter().enumerate() {
            if generators[..i].iter().any(|h| h.name == g.name) {
                return Err(CdgaError::DuplicateGenerator(g.name.clone()));
            }
        }
        let n = generators.len();
        Ok(FreeCdga {
            generators,
            differential: vec![Element::zero(); n],
        })
    }

    pub fn ngens(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.generators
            .iter()
            .position(|g| g.name == name)
            .ok_or_else(|| CdgaError::UnknownGenerator(name.to_string()))
    }

    pub fn gen(&self, name: &str) -> Result<Element> {
        Ok(self.gen_at(self.index_of(name)?))
    }

    pub fn gen_at(&self, i: usize) -> Element {
        Element::from_monomial(Monomial::generator(self.ngens(), i))
    }

    pub fn unit(&self) -> Element {
        Element::unit(self.ngens())
    }

    pub fn set_differential(&mut self, i: usize, value: Element) {
        self.differential[i] = value;
    }

    pub fn with_differential(mut self, name: &str, value: Element) -> Result<Self> {
        let i = self.index_of(name)?;
        self.differential[i] = value;
        Ok(self)
    }

    pub fn d_of_generator(&self, i: usize) -> &Element {
        &self.differential[i]
    }

    pub fn monomial_degree(&self, m: &Monomial) -> u32 {
        m.0.iter()
            .zip(&self.generators)
            .map(|(e, g)| e * g.degree)
            .sum()
    }

    /// Degree of a homogeneous element; `None` for zero or mixed degrees.
    pub fn degree(&self, e: &Element) -> Option<u32> {
        let mut degs = e.terms().map(|(m, _)| self.monomial_degree(m));
        let first = degs.next()?;
        degs.all(|d| d == first).then_some(first)
    }

    pub fn check_element(&self, e: &Element) -> Result<()> {
        for (m, _) in e.terms() {
            if m.0.len() != self.ngens() {
                return Err(CdgaError::MismatchedPresentation {
                    expected: self.ngens(),
                    found: m.0.len(),
                });
            }
        }
        Ok(())
    }

    /// Product of two monomials in canonical order.
    ///
    /// The concatenated word `a·b` is merged into generator order; every odd
    /// factor of `b` that moves past an odd factor of `a` is one adjacent
    /// transposition and contributes a sign. Returns `None` for odd squares.
    pub fn multiply_monomials(&self, a: &Monomial, b: &Monomial) -> Option<(bool, Monomial)> {
        let mut odd_left: u32 = a
            .0
            .iter()
            .zip(&self.generators)
            .filter(|(_, g)| g.is_odd())
            .map(|(e, _)| *e)
            .sum();
        let mut negative = false;
        let mut out = Vec::with_capacity(a.0.len());
        for (i, g) in self.generators.iter().enumerate() {
            let (ea, eb) = (a.0[i], b.0[i]);
            if g.is_odd() {
                if ea + eb > 1 {
                    return None;
                }
                // left copies of g are emitted first
                odd_left -= ea;
                if eb == 1 && odd_left % 2 == 1 {
                    negative = !negative;
                }
            }
            out.push(ea + eb);
        }
        Some((negative, Monomial(out)))
    }

    pub fn multiply(&self, a: &Element, b: &Element) -> Element {
        let mut out = Element::zero();
        for (ma, ca) in a.terms() {
            for (mb, cb) in b.terms() {
                if let Some((neg, m)) = self.multiply_monomials(ma, mb) {
                    let c = ca * cb;
                    out.add_term(m, if neg { -c } else { c });
                }
            }
        }
        out
    }

    fn split_monomial(&self, m: &Monomial, i: usize) -> (Monomial, Monomial, Monomial) {
        let n = self.ngens();
        let mut prefix = vec![0; n];
        let mut block = vec![0; n];
        let mut suffix = vec![0; n];
        prefix[..i].copy_from_slice(&m.0[..i]);
        block[i] = m.0[i];
        suffix[i + 1..].copy_from_slice(&m.0[i + 1..]);
        (Monomial(prefix), Monomial(block), Monomial(suffix))
    }

    /// Leibniz extension of the differential to a monomial.
    pub fn d_monomial(&self, m: &Monomial) -> Element {
        let mut out = Element::zero();
        for i in 0..self.ngens() {
            let e = m.0[i];
            if e == 0 || self.differential[i].is_zero() {
                continue;
            }
            let (prefix, _, suffix) = self.split_monomial(m, i);
            let mut lower = Monomial::unit(self.ngens());
            lower.0[i] = e - 1;
            // d(g^e) = e g^{e-1} dg (g even, or g odd with e = 1)
            let d_block = self
                .multiply(&Element::from_monomial(lower), &self.differential[i])
                .scale(&int(e as i64));
            let sign = if self.monomial_degree(&prefix) % 2 == 1 {
                -Rational::one()
            } else {
                Rational::one()
            };
            let term = self.multiply(
                &self.multiply(&Element::from_monomial(prefix), &d_block),
                &Element::from_monomial(suffix),
            );
            out = out.add(&term.scale(&sign));
        }
        out
    }

    pub fn apply_d(&self, a: &Element) -> Element {
        let mut out = Element::zero();
        for (m, c) in a.terms() {
            out = out.add(&self.d_monomial(m).scale(c));
        }
        out
    }

    /// Image of `e` under the algebra map sending generator `i` to
    /// `images[i]`, computed in `target`.
    pub fn substitute(&self, target: &FreeCdga, images: &[Element], e: &Element) -> Element {
        let mut out = Element::zero();
        let mut cache: HashMap<Monomial, Element> = HashMap::new();
        for (m, c) in e.terms() {
            let img = self.substitute_monomial(target, images, m, &mut cache);
            out = out.add(&img.scale(c));
        }
        out
    }

    fn substitute_monomial(
        &self,
        target: &FreeCdga,
        images: &[Element],
        m: &Monomial,
        cache: &mut HashMap<Monomial, Element>,
    ) -> Element {
        if let Some(v) = cache.get(m) {
            return v.clone();
        }
        let value = match m.0.iter().position(|&e| e > 0) {
            None => target.unit(),
            Some(i) => {
                // m = g_i * rest with no sign: g_i is the first factor
                let mut rest = m.clone();
                rest.0[i] -= 1;
                let tail = self.substitute_monomial(target, images, &rest, cache);
                target.multiply(&images[i], &tail)
            }
        };
        cache.insert(m.clone(), value.clone());
        value
    }

    /// All canonical monomials of total degree `k`, deterministic order.
    pub fn basis_in_degree(&self, k: u32) -> Result<Vec<Monomial>> {
        if let Some(g) = self.generators.iter().find(|g| g.degree == 0) {
            return Err(CdgaError::Finiteness {
                degree: k,
                generator: g.name.clone(),
            });
        }
        let mut out = Vec::new();
        let mut cur = vec![0; self.ngens()];
        self.enumerate(0, k, &mut cur, &mut out);
        Ok(out)
    }

    fn enumerate(&self, i: usize, remaining: u32, cur: &mut Vec<u32>, out: &mut Vec<Monomial>) {
        if i == self.ngens() {
            if remaining == 0 {
                out.push(Monomial(cur.clone()));
            }
            return;
        }
        let g = &self.generators[i];
        let max = if g.is_odd() {
            1.min(remaining / g.degree)
        } else {
            remaining / g.degree
        };
        for e in (0..=max).rev() {
            cur[i] = e;
            self.enumerate(i + 1, remaining - e * g.degree, cur, out);
        }
        cur[i] = 0;
    }

    pub fn format_monomial(&self, m: &Monomial) -> String {
        let parts: Vec<String> = m
            .0
            .iter()
            .zip(&self.generators)
            .filter(|(e, _)| **e > 0)
            .map(|(e, g)| {
                if *e == 1 {
                    g.name.clone()
                } else {
                    format!("{}^{}", g.name, e)
                }
            })
            .collect();
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("*")
        }
    }

    /// Renders an element in the expression grammar, e.g. `x^2 - 1/2*x*y`.
    pub fn format_element(&self, e: &Element) -> String {
        if e.is_zero() {
            return "0".to_string();
        }
        let mut s = String::new();
        for (idx, (m, c)) in e.terms().enumerate() {
            let neg = c < &Rational::zero();
            let mag = if neg { -c.clone() } else { c.clone() };
            if idx == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            let mono = self.format_monomial(m);
            if m.is_unit() {
                s.push_str(&fmt_rational(&mag));
            } else if mag.is_one() {
                s.push_str(&mono);
            } else {
                s.push_str(&format!("{}*{}", fmt_rational(&mag), mono));
            }
        }
        s
    }
}

// ---------------------------------------------------------------------------
// Presentations
// ---------------------------------------------------------------------------

/// A validated finite-type CDGA: free algebra on positive-degree generators,
/// modulo monomial relations and everything above the truncation degree.
#[derive(Clone, Debug)]
pub struct CdgaPresentation {
    algebra: FreeCdga,
    relations: Vec<Monomial>,
    truncation: u32,
    bases: Vec<Vec<Monomial>>,
    index: HashMap<Monomial, usize>,
}

impl PartialEq for CdgaPresentation {
    fn eq(&self, other: &Self) -> bool {
        self.algebra == other.algebra
            && self.relations == other.relations
            && self.truncation == other.truncation
    }
}

impl CdgaPresentation {
    pub fn new(algebra: FreeCdga, relations: Vec<Monomial>, truncation: u32) -> Result<Self> {
        for g in algebra.generators() {
            if g.degree == 0 {
                return Err(CdgaError::DegreeZeroGenerator(g.name.clone()));
            }
        }
        for m in &relations {
            if m.0.len() != algebra.ngens() {
                return Err(CdgaError::MismatchedPresentation {
                    expected: algebra.ngens(),
                    found: m.0.len(),
                });
            }
        }
        let mut bases = Vec::with_capacity(truncation as usize + 1);
        let mut index = HashMap::new();
        for k in 0..=truncation {
            let basis: Vec<Monomial> = algebra
                .basis_in_degree(k)?
                .into_iter()
                .filter(|m| !relations.iter().any(|r| r.divides(m)))
                .collect();
            for (i, m) in basis.iter().enumerate() {
                index.insert(m.clone(), i);
            }
            bases.push(basis);
        }
        let p = CdgaPresentation {
            algebra,
            relations,
            truncation,
            bases,
            index,
        };
        p.validate()?;
        Ok(p)
    }

    /// The ground field: no generators.
    pub fn ground_field(truncation: u32) -> Self {
        Self::new(FreeCdga::new(vec![]).unwrap(), vec![], truncation).unwrap()
    }

    fn validate(&self) -> Result<()> {
        for (i, g) in self.algebra.generators().iter().enumerate() {
            let dg = self.algebra.d_of_generator(i);
            self.algebra.check_element(dg)?;
            let dg = self.normal_form(dg);
            if !dg.is_zero() && self.algebra.degree(&dg) != Some(g.degree + 1) {
                return Err(CdgaError::DifferentialDegree {
                    generator: g.name.clone(),
                    expected: g.degree + 1,
                });
            }
            if !self.apply_d_unchecked(&dg).is_zero() {
                return Err(CdgaError::DSquaredNonzero(g.name.clone()));
            }
        }
        for r in &self.relations {
            let dr = self.normal_form(&self.algebra.d_monomial(r));
            if !dr.is_zero() {
                return Err(CdgaError::RelationNotClosed(self.algebra.format_monomial(r)));
            }
        }
        Ok(())
    }

    pub fn algebra(&self) -> &FreeCdga {
        &self.algebra
    }

    pub fn generators(&self) -> &[Generator] {
        self.algebra.generators()
    }

    pub fn ngens(&self) -> usize {
        self.algebra.ngens()
    }

    pub fn relations(&self) -> &[Monomial] {
        &self.relations
    }

    pub fn truncation(&self) -> u32 {
        self.truncation
    }

    /// Top possible degree of the untruncated quotient when it is
    /// finite-dimensional, that is when every even generator has a pure
    /// power among the relations.
    pub fn finite_top_degree(&self) -> Option<u32> {
        let mut top = 0;
        for (i, g) in self.algebra.generators().iter().enumerate() {
            if g.is_odd() {
                top += g.degree;
                continue;
            }
            let power = self
                .relations
                .iter()
                .filter(|r| r.0.iter().enumerate().all(|(j, &e)| j == i || e == 0))
                .map(|r| r.0[i])
                .min()?;
            top += (power - 1) * g.degree;
        }
        Some(top)
    }

    /// Same algebra with a different truncation degree.
    pub fn with_truncation(&self, truncation: u32) -> Result<Self> {
        Self::new(self.algebra.clone(), self.relations.clone(), truncation)
    }

    pub fn gen(&self, name: &str) -> Result<Element> {
        self.algebra.gen(name)
    }

    pub fn unit(&self) -> Element {
        self.algebra.unit()
    }

    pub fn d_of_generator(&self, i: usize) -> Element {
        self.normal_form(self.algebra.d_of_generator(i))
    }

    /// Drops monomials divisible by a relation or above the truncation.
    pub fn normal_form(&self, e: &Element) -> Element {
        let mut out = e.clone();
        out.retain(|m| {
            self.algebra.monomial_degree(m) <= self.truncation
                && !self.relations.iter().any(|r| r.divides(m))
        });
        out
    }

    pub fn multiply(&self, a: &Element, b: &Element) -> Result<Element> {
        self.algebra.check_element(a)?;
        self.algebra.check_element(b)?;
        Ok(self.multiply_unchecked(a, b))
    }

    pub(crate) fn multiply_unchecked(&self, a: &Element, b: &Element) -> Element {
        self.normal_form(&self.algebra.multiply(a, b))
    }

    pub fn apply_d(&self, a: &Element) -> Result<Element> {
        self.algebra.check_element(a)?;
        Ok(self.apply_d_unchecked(a))
    }

    pub(crate) fn apply_d_unchecked(&self, a: &Element) -> Element {
        self.normal_form(&self.algebra.apply_d(&self.normal_form(a)))
    }

    pub fn degree(&self, e: &Element) -> Option<u32> {
        self.algebra.degree(e)
    }

    /// Canonical monomials of degree `k` surviving the relations.
    pub fn basis_in_degree(&self, k: u32) -> Result<&[Monomial]> {
        self.bases
            .get(k as usize)
            .map(Vec::as_slice)
            .ok_or(CdgaError::AboveTruncation {
                degree: k,
                truncation: self.truncation,
            })
    }

    pub fn dim(&self, k: u32) -> usize {
        self.bases.get(k as usize).map_or(0, Vec::len)
    }

    /// Coordinates of a degree-`k` element in the degree-`k` basis.
    pub fn coordinates(&self, k: u32, e: &Element) -> Vec<Rational> {
        let mut v = vec![Rational::zero(); self.dim(k)];
        for (m, c) in self.normal_form(e).terms() {
            if self.algebra.monomial_degree(m) == k {
                v[self.index[m]] += c;
            }
        }
        v
    }

    pub fn element_from_coordinates(&self, k: u32, v: &[Rational]) -> Element {
        self.bases[k as usize]
            .iter()
            .zip(v)
            .map(|(m, c)| (m.clone(), c.clone()))
            .collect()
    }

    /// Degree `k` of the differential as a matrix `dim(k+1) x dim(k)`.
    pub fn differential_matrix(&self, k: u32) -> Matrix {
        let cols: Vec<Vec<Rational>> = self.bases[k as usize]
            .iter()
            .map(|m| {
                self.coordinates(
                    k + 1,
                    &self.apply_d_unchecked(&Element::from_monomial(m.clone())),
                )
            })
            .collect();
        Matrix::from_columns(self.dim(k + 1), &cols)
    }

    /// Cochain complex on degrees `-1..=hi`, where the empty degree `-1`
    /// makes `H^0` computable. Requires `hi <= truncation`.
    pub fn complex_slice(&self, hi: u32) -> Result<CochainComplexSlice<Monomial>> {
        if hi > self.truncation {
            return Err(CdgaError::AboveTruncation {
                degree: hi,
                truncation: self.truncation,
            });
        }
        let basis = Arc::new(self.graded_basis(hi)?);
        let mut entries = HashMap::new();
        for k in 0..hi {
            for m in &self.bases[k as usize] {
                let dm = self.apply_d_unchecked(&Element::from_monomial(m.clone()));
                entries.insert(
                    m.clone(),
                    dm.terms().map(|(t, c)| (t.clone(), c.clone())).collect(),
                );
            }
        }
        let d = LinearMap::new(basis.clone(), basis.clone(), 1, entries)?;
        Ok(CochainComplexSlice::new(basis, d, -1, hi as i32)?)
    }

    fn graded_basis(&self, hi: u32) -> Result<GradedBasis<Monomial>> {
        let mut pieces = vec![(-1, vec![])];
        for k in 0..=hi {
            pieces.push((k as i32, self.bases[k as usize].clone()));
        }
        Ok(GradedBasis::from_pieces(pieces)?)
    }

    /// `H^k` alone, from the two differentials around degree `k`; needs `k < truncation`.
    pub fn cohomology_group(&self, k: u32) -> CohomologyGroup {
        let incoming = if k == 0 {
            Matrix::zeros(self.dim(0), 0)
        } else {
            self.differential_matrix(k - 1)
        };
        cohomology_from_differentials(k as i32, &incoming, &self.differential_matrix(k))
    }

    /// Cohomology in degrees `0..=up_to` together with the cup product.
    pub fn cohomology(&self, up_to: u32) -> Result<CdgaCohomology> {
        let slice = self.complex_slice(up_to + 1)?;
        let mut groups = Vec::new();
        for k in 0..=up_to {
            let raw = slice.cohomology_at(k as i32)?;
            let representatives = raw
                .representatives
                .iter()
                .map(|v| self.element_from_coordinates(k, v))
                .collect();
            groups.push(CdgaCohomologyGroup {
                degree: k,
                dim: raw.dim,
                representatives,
                raw,
            });
        }
        Ok(CdgaCohomology {
            presentation: self.clone(),
            groups,
        })
    }

    pub fn format_element(&self, e: &Element) -> String {
        self.algebra.format_element(e)
    }
}

#[derive(Clone, Debug)]
pub struct CdgaCohomologyGroup {
    pub degree: u32,
    pub dim: usize,
    pub representatives: Vec<Element>,
    raw: CohomologyGroup,
}

impl CdgaCohomologyGroup {
    pub fn raw(&self) -> &CohomologyGroup {
        &self.raw
    }
}

/// One nonzero structure constant of the cup product on chosen representatives.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CupEntry {
    pub left: (u32, usize),
    pub right: (u32, usize),
    /// Coordinates of the product class in degree `left.0 + right.0`.
    pub product: Vec<Rational>,
}

#[derive(Clone, Debug)]
pub struct CdgaCohomology {
    presentation: CdgaPresentation,
    groups: Vec<CdgaCohomologyGroup>,
}

impl CdgaCohomology {
    pub fn groups(&self) -> &[CdgaCohomologyGroup] {
        &self.groups
    }

    pub fn up_to(&self) -> u32 {
        self.groups.len() as u32 - 1
    }

    pub fn dims(&self) -> Vec<usize> {
        self.groups.iter().map(|g| g.dim).collect()
    }

    pub fn group(&self, k: u32) -> Option<&CdgaCohomologyGroup> {
        self.groups.get(k as usize)
    }

    pub fn unit_class(&self) -> Vec<Rational> {
        self.class_of(0, &self.presentation.unit()).unwrap_or_default()
    }

    /// Coordinates of the class of a degree-`k` cocycle.
    pub fn class_of(&self, k: u32, cocycle: &Element) -> Option<Vec<Rational>> {
        let g = self.group(k)?;
        g.raw
            .coordinates(&self.presentation.coordinates(k, cocycle))
    }

    /// Class of the product of the `a`-th representative in degree `i` and
    /// the `b`-th in degree `j`.
    pub fn cup(&self, i: u32, a: usize, j: u32, b: usize) -> Option<Vec<Rational>> {
        let x = &self.group(i)?.representatives[a];
        let y = &self.group(j)?.representatives[b];
        let prod = self.presentation.multiply_unchecked(x, y);
        self.class_of(i + j, &prod)
    }

    /// All products landing in the computed range, including zero ones.
    pub fn product_table(&self) -> Vec<CupEntry> {
        let mut out = Vec::new();
        for i in 1..=self.up_to() {
            for j in i..=self.up_to() - i {
                for a in 0..self.groups[i as usize].dim {
                    for b in 0..self.groups[j as usize].dim {
                        if let Some(product) = self.cup(i, a, j, b) {
                            out.push(CupEntry {
                                left: (i, a),
                                right: (j, b),
                                product,
                            });
                        }
                    }
                }
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Morphisms
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct CdgaMorphism {
    source: CdgaPresentation,
    target: CdgaPresentation,
    images: Vec<Element>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuasiIsoDegree {
    pub degree: u32,
    pub source_dim: usize,
    pub target_dim: usize,
    pub rank: usize,
    pub bijective: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuasiIsoReport {
    /// Degrees `0..=verified_up_to` were checked.
    pub verified_up_to: u32,
    pub degrees: Vec<QuasiIsoDegree>,
    pub is_quasi_iso: bool,
}

impl CdgaMorphism {
    pub fn new(
        source: CdgaPresentation,
        target: CdgaPresentation,
        images: Vec<Element>,
    ) -> Result<Self> {
        if images.len() != source.ngens() {
            return Err(CdgaError::MorphismArity {
                expected: source.ngens(),
                found: images.len(),
            });
        }
        let images: Vec<Element> = images.iter().map(|e| target.normal_form(e)).collect();
        let f = CdgaMorphism {
            source,
            target,
            images,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn identity(p: &CdgaPresentation) -> Self {
        let images = (0..p.ngens()).map(|i| p.algebra.gen_at(i)).collect();
        CdgaMorphism {
            source: p.clone(),
            target: p.clone(),
            images,
        }
    }

    fn validate(&self) -> Result<()> {
        let cap = self.source.truncation.min(self.target.truncation);
        for (i, g) in self.source.generators().iter().enumerate() {
            let img = &self.images[i];
            self.target.algebra.check_element(img)?;
            if !img.is_zero() && self.target.degree(img) != Some(g.degree) {
                return Err(CdgaError::MorphismDegree(g.name.clone()));
            }
            if g.degree < cap {
                let lhs = self.apply(&self.source.d_of_generator(i));
                let rhs = self.target.apply_d_unchecked(img);
                if lhs != rhs {
                    return Err(CdgaError::MorphismNotChainMap(g.name.clone()));
                }
            }
        }
        for r in &self.source.relations {
            if self.source.algebra.monomial_degree(r) > self.target.truncation {
                continue;
            }
            let img = self.target.normal_form(&self.source.algebra.substitute(
                &self.target.algebra,
                &self.images,
                &Element::from_monomial(r.clone()),
            ));
            if !img.is_zero() {
                return Err(CdgaError::MorphismRelation(
                    self.source.algebra.format_monomial(r),
                ));
            }
        }
        Ok(())
    }

    pub fn source(&self) -> &CdgaPresentation {
        &self.source
    }

    pub fn target(&self) -> &CdgaPresentation {
        &self.target
    }

    pub fn images(&self) -> &[Element] {
        &self.images
    }

    pub fn apply(&self, e: &Element) -> Element {
        let e = self.source.normal_form(e);
        self.target.normal_form(&self.source.algebra.substitute(
            &self.target.algebra,
            &self.images,
            &e,
        ))
    }

    /// Matrix of the map in degree `k`, rows indexed by the target basis.
    pub fn matrix_in_degree(&self, k: u32) -> Matrix {
        let cols: Vec<Vec<Rational>> = self.source.bases[k as usize]
            .iter()
            .map(|m| {
                self.target
                    .coordinates(k, &self.apply(&Element::from_monomial(m.clone())))
            })
            .collect();
        Matrix::from_columns(self.target.dim(k), &cols)
    }

    /// Whether `H^k(f)` is bijective for every `k <= n`. The range is clamped
    /// to what both truncations can certify; the report states it.
    pub fn is_quasi_iso_up_to(&self, n: u32) -> QuasiIsoReport {
        let cap = self.source.truncation.min(self.target.truncation);
        let n = n.min(cap.saturating_sub(1));
        let hs = self.source.cohomology(n).expect("range clamped");
        let ht = self.target.cohomology(n).expect("range clamped");
        let mut degrees = Vec::new();
        for k in 0..=n {
            let gs = hs.group(k).unwrap();
            let gt = ht.group(k).unwrap();
            let cols: Vec<Vec<Rational>> = gs
                .representatives
                .iter()
                .map(|r| {
                    ht.class_of(k, &self.apply(r))
                        .expect("chain maps send cocycles to cocycles")
                })
                .collect();
            let rank = Matrix::from_columns(gt.dim, &cols).rank();
            degrees.push(QuasiIsoDegree {
                degree: k,
                source_dim: gs.dim,
                target_dim: gt.dim,
                rank,
                bijective: gs.dim == gt.dim && rank == gt.dim,
            });
        }
        QuasiIsoReport {
            verified_up_to: n,
            is_quasi_iso: degrees.iter().all(|d| d.bijective),
            degrees,
        }
    }
}

// ---------------------------------------------------------------------------
// Chain homotopies
// ---------------------------------------------------------------------------

/// Two chain maps `f, g` between complexes and a candidate homotopy `h` of
/// shift -1 with `f - g = d h + h d`.
#[derive(Clone, Debug)]
pub struct ChainHomotopy<L: Label> {
    pub source: CochainComplexSlice<L>,
    pub target: CochainComplexSlice<L>,
    pub f: LinearMap<L>,
    pub g: LinearMap<L>,
    pub h: LinearMap<L>,
}

impl ChainHomotopy<Monomial> {
    /// Homotopy data between two CDGA morphisms with `h` given on source
    /// basis monomials (absent entries are zero), checked on degrees `0..=up_to`.
    pub fn between(
        f: &CdgaMorphism,
        g: &CdgaMorphism,
        h: &BTreeMap<Monomial, Element>,
        up_to: u32,
    ) -> Result<Self> {
        let source = f.source.complex_slice(up_to + 1)?;
        let target = f.target.complex_slice(up_to + 1)?;
        let linear = |phi: &CdgaMorphism| -> Result<LinearMap<Monomial>> {
            let mut entries = HashMap::new();
            for k in 0..=up_to + 1 {
                for m in &phi.source.bases[k as usize] {
                    let img = phi.apply(&Element::from_monomial(m.clone()));
                    entries.insert(
                        m.clone(),
                        img.terms().map(|(t, c)| (t.clone(), c.clone())).collect(),
                    );
                }
            }
            Ok(LinearMap::new(
                source.basis().clone(),
                target.basis().clone(),
                0,
                entries,
            )?)
        };
        let fl = linear(f)?;
        let gl = linear(g)?;
        let entries = h
            .iter()
            .map(|(m, e)| {
                let e = f.target.normal_form(e);
                (
                    m.clone(),
                    e.terms().map(|(t, c)| (t.clone(), c.clone())).collect(),
                )
            })
            .collect();
        let hl = LinearMap::new(source.basis().clone(), target.basis().clone(), -1, entries)?;
        Ok(ChainHomotopy {
            source,
            target,
            f: fl,
            g: gl,
            h: hl,
        })
    }
}

/// Exact check of `f^n - g^n = d^{n-1} h^n + h^{n+1} d^n` on the slice.
pub fn check_homotopy<L: Label>(h: &ChainHomotopy<L>) -> bool {
    is_chain_homotopy(&h.source, &h.target, &h.f, &h.g, &h.h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::parse_presentation;
    use crate::graded_core::frac;

    fn p(text: &str) -> CdgaPresentation {
        parse_presentation(text).unwrap().presentation
    }

    fn s2() -> CdgaPresentation {
        p("generator x deg 2\ngenerator y deg 3\nd y = x^2\ntruncate 11")
    }

    #[test]
    fn odd_transposition_sign() {
        let a = p("generator x deg 3\ngenerator y deg 3\ntruncate 8");
        let x = a.gen("x").unwrap();
        let y = a.gen("y").unwrap();
        let yx = a.multiply(&y, &x).unwrap();
        let xy = a.multiply(&x, &y).unwrap();
        assert_eq!(yx, xy.scale(&int(-1)));
        assert!(a.multiply(&x, &x).unwrap().is_zero());
    }

    #[test]
    fn leibniz_example() {
        let a = s2();
        let x = a.gen("x").unwrap();
        let y = a.gen("y").unwrap();
        let xy = a.multiply(&x, &y).unwrap();
        let x3 = a.multiply(&a.multiply(&x, &x).unwrap(), &x).unwrap();
        assert_eq!(a.apply_d(&xy).unwrap(), x3);
        let x2 = a.multiply(&x, &x).unwrap();
        assert!(a.apply_d(&x2).unwrap().is_zero());
    }

    #[test]
    fn bases() {
        let a = s2();
        assert_eq!(a.basis_in_degree(5).unwrap(), &[Monomial(vec![1, 1])]);
        let e = p("generator x deg 3\ntruncate 8");
        assert_eq!(e.basis_in_degree(3).unwrap().len(), 1);
        assert!(e.basis_in_degree(6).unwrap().is_empty());
        let poly = p("generator x deg 2\ntruncate 12");
        for k in 0..=6 {
            assert_eq!(poly.basis_in_degree(2 * k).unwrap(), &[Monomial(vec![k])]);
        }
        assert!(matches!(
            poly.basis_in_degree(13),
            Err(CdgaError::AboveTruncation { .. })
        ));
    }

    #[test]
    fn degree_zero_generators() {
        let free = FreeCdga::new(vec![Generator::new("t", 0), Generator::new("y", 1)]).unwrap();
        assert!(matches!(
            free.basis_in_degree(1),
            Err(CdgaError::Finiteness { .. })
        ));
        assert!(matches!(
            CdgaPresentation::new(free, vec![], 4),
            Err(CdgaError::DegreeZeroGenerator(_))
        ));
    }

    #[test]
    fn bilinearity_in_free_forms() {
        // (t0 + t1) * y0 in a free algebra on t0, t1 (deg 0) and y0 (deg 1)
        let free = FreeCdga::new(vec![
            Generator::new("t0", 0),
            Generator::new("t1", 0),
            Generator::new("y0", 1),
        ])
        .unwrap();
        let t0 = free.gen("t0").unwrap();
        let t1 = free.gen("t1").unwrap();
        let y0 = free.gen("y0").unwrap();
        let lhs = free.multiply(&t0.add(&t1), &y0);
        let rhs = free.multiply(&t0, &y0).add(&free.multiply(&t1, &y0));
        assert_eq!(lhs, rhs);
        assert_eq!(lhs.len(), 2);
    }

    #[test]
    fn cohomology_examples() {
        let h = s2().cohomology(10).unwrap();
        assert_eq!(h.dims(), vec![1, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0]);

        let s3 = p("generator x deg 3\ntruncate 12");
        let dims = s3.cohomology(10).unwrap().dims();
        for (k, d) in dims.iter().enumerate() {
            assert_eq!(*d, usize::from(k == 0 || k == 3));
        }

        let acyclic = p("generator b deg 1\ngenerator a deg 2\nd b = a\ntruncate 12");
        let dims = acyclic.cohomology(10).unwrap().dims();
        assert_eq!(dims[0], 1);
        assert!(dims[1..].iter().all(|&d| d == 0));
    }

    #[test]
    fn rejects_bad_differentials() {
        let free = FreeCdga::new(vec![Generator::new("x", 2), Generator::new("y", 2)]).unwrap();
        let x = free.gen("x").unwrap();
        let bad = free.clone().with_differential("y", x).unwrap();
        assert_eq!(
            CdgaPresentation::new(bad, vec![], 8).unwrap_err(),
            CdgaError::DifferentialDegree {
                generator: "y".into(),
                expected: 3
            }
        );
        // d b = a^2 and d c = a*b give d(d c) = -a^3
        let free = FreeCdga::new(vec![
            Generator::new("a", 2),
            Generator::new("b", 3),
            Generator::new("c", 4),
        ])
        .unwrap();
        let a = free.gen("a").unwrap();
        let b = free.gen("b").unwrap();
        let aa = free.multiply(&a, &a);
        let ab = free.multiply(&a, &b);
        let f = free
            .with_differential("b", aa)
            .unwrap()
            .with_differential("c", ab)
            .unwrap();
        assert_eq!(
            CdgaPresentation::new(f, vec![], 10).unwrap_err(),
            CdgaError::DSquaredNonzero("c".into())
        );
    }

    #[test]
    fn relation_must_be_closed() {
        let free = FreeCdga::new(vec![Generator::new("x", 2), Generator::new("y", 3)]).unwrap();
        let x = free.gen("x").unwrap();
        let x2 = free.multiply(&x, &x);
        let free = free.with_differential("y", x2).unwrap();
        // d y = x^2 is not in the ideal (y)
        let r = CdgaPresentation::new(free, vec![Monomial(vec![0, 1])], 8);
        assert_eq!(r.unwrap_err(), CdgaError::RelationNotClosed("y".into()));
    }

    #[test]
    fn mismatched_presentations() {
        let a = s2();
        let other = p("generator x deg 3\ntruncate 8");
        let x = other.gen("x").unwrap();
        assert!(matches!(
            a.multiply(&x, &x),
            Err(CdgaError::MismatchedPresentation { .. })
        ));
    }

    fn acyclic_extension() -> CdgaPresentation {
        p("generator x deg 3\ngenerator b deg 1\ngenerator a deg 2\nd b = a\ntruncate 12")
    }

    #[test]
    fn quasi_isomorphisms() {
        let s3 = p("generator x deg 3\ntruncate 12");
        let id = CdgaMorphism::identity(&s3);
        assert!(id.is_quasi_iso_up_to(10).is_quasi_iso);

        let big = acyclic_extension();
        let incl = CdgaMorphism::new(s3.clone(), big.clone(), vec![big.gen("x").unwrap()]).unwrap();
        let report = incl.is_quasi_iso_up_to(11);
        assert!(report.is_quasi_iso);
        assert_eq!(report.verified_up_to, 11);

        let poly = p("generator x deg 2\ntruncate 10");
        let zero = CdgaMorphism::new(poly.clone(), poly.clone(), vec![Element::zero()]).unwrap();
        let report = zero.is_quasi_iso_up_to(6);
        assert!(!report.is_quasi_iso);
        assert!(report.degrees[0].bijective);
        assert!(!report.degrees[2].bijective);
    }

    #[test]
    fn morphism_validation() {
        let s2 = s2();
        let poly = p("generator x deg 2\ntruncate 10");
        // x -> x, y -> 0 is not a chain map into Λ(x) with d = 0 (x^2 != 0)
        let err = CdgaMorphism::new(
            s2.clone(),
            poly.clone(),
            vec![poly.gen("x").unwrap(), Element::zero()],
        )
        .unwrap_err();
        assert_eq!(err, CdgaError::MorphismNotChainMap("y".into()));
        // into H(S^2) it is fine
        let h = p("generator x deg 2\nrelation x^2\ntruncate 10");
        assert!(CdgaMorphism::new(s2, h.clone(), vec![h.gen("x").unwrap(), Element::zero()]).is_ok());
        // Λ(x)/(x^2) -> Λ(x) with x -> x does not respect the relation
        assert_eq!(
            CdgaMorphism::new(h.clone(), poly.clone(), vec![poly.gen("x").unwrap()]).unwrap_err(),
            CdgaError::MorphismRelation("x^2".into())
        );
        assert!(matches!(
            CdgaMorphism::new(h, poly.clone(), vec![poly.gen("x").unwrap().add(&poly.unit())]),
            Err(CdgaError::MorphismDegree(_))
        ));
    }

    #[test]
    fn homotopy_examples() {
        let a = s2();
        let id = CdgaMorphism::identity(&a);
        let h0 = ChainHomotopy::between(&id, &id, &BTreeMap::new(), 8).unwrap();
        assert!(check_homotopy(&h0));

        let zero = CdgaMorphism::new(
            a.clone(),
            a.clone(),
            vec![Element::zero(), Element::zero()],
        )
        .unwrap();
        let h = ChainHomotopy::between(&id, &zero, &BTreeMap::new(), 8).unwrap();
        assert!(!check_homotopy(&h));
    }

    #[test]
    fn homotopy_in_acyclic_factor() {
        // contraction of Λ(b, a) with d b = a: h(a^k) = b a^{k-1}
        let acyc = p("generator b deg 1\ngenerator a deg 2\nd b = a\ntruncate 9");
        let id = CdgaMorphism::identity(&acyc);
        let aug = CdgaMorphism::new(acyc.clone(), acyc.clone(), vec![Element::zero(), Element::zero()]).unwrap();
        let mut h = BTreeMap::new();
        for k in 1..=4u32 {
            h.insert(
                Monomial(vec![0, k]),
                Element::from_monomial(Monomial(vec![1, k - 1])),
            );
        }
        let hom = ChainHomotopy::between(&id, &aug, &h, 7).unwrap();
        assert!(check_homotopy(&hom));
    }

    #[test]
    fn cup_product_table() {
        let cp2 = p("generator x deg 2\ngenerator y deg 5\nd y = x^3\ntruncate 9");
        let h = cp2.cohomology(8).unwrap();
        assert_eq!(h.dims(), vec![1, 0, 1, 0, 1, 0, 0, 0, 0]);
        let sq = h.cup(2, 0, 2, 0).unwrap();
        assert_eq!(sq.len(), 1);
        assert!(!sq[0].is_zero());
        assert!(!h.product_table().is_empty());
    }

    #[test]
    fn formatting() {
        let a = s2();
        let e = a
            .gen("x")
            .unwrap()
            .scale(&frac(-1, 2))
            .add(&a.multiply(&a.gen("x").unwrap(), &a.gen("x").unwrap()).unwrap());
        let s = a.format_element(&e);
        assert!(s.contains("x^2"));
        assert!(s.contains("1/2*x"));
    }
}
