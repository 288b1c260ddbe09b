//! Polynomial differential forms on standard simplices.
//!
//! A form on `Δ_n` lives in the free algebra on `t_1..t_n` (degree 0) and
//! `y_1..y_n` (degree 1) with `d t_i = y_i`; the barycentric coordinate
//! `t_0 = 1 - Σ t_i` and `y_0 = -Σ y_i` are eliminated on construction.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::Rng;
use thiserror::Error;

use crate::cdga::{Element, FreeCdga, Generator, Monomial};
use crate::graded_core::{
    cohomology_from_differentials, free_columns, null_space, CochainComplexSlice, GradedBasis,
    GradedError, LinearMap, Matrix, Rational,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AplError {
    #[error("{op} index {index} out of range for a {n}-simplex")]
    IndexOutOfRange {
        op: &'static str,
        index: usize,
        n: usize,
    },
    #[error("integration needs a top-degree form on Δ_{n}")]
    NotTopDegree { n: usize },
    #[error("form is not homogeneous")]
    NotHomogeneous,
    #[error("forms live on simplices of different dimensions ({0} and {1})")]
    DimensionMismatch(usize, usize),
    #[error("simplicial set, line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("face identity d_i d_j = d_(j-1) d_i fails on `{simplex}` for i = {i}, j = {j}")]
    Incidence { simplex: String, i: usize, j: usize },
    #[error(transparent)]
    Graded(#[from] GradedError),
}

pub type Result<T, E = AplError> = std::result::Result<T, E>;

/// The free algebra underlying forms on `Δ_n`.
pub fn simplex_algebra(n: usize) -> FreeCdga {
    let mut gens: Vec<Generator> = (1..=n).map(|i| Generator::new(format!("t{i}"), 0)).collect();
    gens.extend((1..=n).map(|i| Generator::new(format!("y{i}"), 1)));
    let mut free = FreeCdga::new(gens).expect("distinct names");
    for i in 0..n {
        let y = free.gen_at(n + i);
        free.set_differential(i, y);
    }
    free
}

/// A polynomial differential form on the standard `n`-simplex.
#[derive(Clone, PartialEq, Eq)]
pub struct PolyForm {
    n: usize,
    element: Element,
    algebra: Arc<FreeCdga>,
}

impl fmt::Debug for PolyForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PolyForm(Δ_{}: {})", self.n, self)
    }
}

impl fmt::Display for PolyForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.algebra.format_element(&self.element))
    }
}

impl PolyForm {
    fn wrap(n: usize, algebra: Arc<FreeCdga>, element: Element) -> Self {
        PolyForm {
            n,
            element,
            algebra,
        }
    }

    pub fn zero(n: usize) -> Self {
        Self::wrap(n, Arc::new(simplex_algebra(n)), Element::zero())
    }

    pub fn constant(n: usize, c: Rational) -> Self {
        let a = simplex_algebra(n);
        let e = a.unit().scale(&c);
        Self::wrap(n, Arc::new(a), e)
    }

    pub fn from_element(n: usize, element: Element) -> Self {
        Self::wrap(n, Arc::new(simplex_algebra(n)), element)
    }

    /// Barycentric coordinate `t_k`, `0 <= k <= n`.
    pub fn t(n: usize, k: usize) -> Self {
        let a = simplex_algebra(n);
        let e = coordinate(&a, n, k, false);
        Self::wrap(n, Arc::new(a), e)
    }

    /// `y_k = d t_k`, `0 <= k <= n`.
    pub fn y(n: usize, k: usize) -> Self {
        let a = simplex_algebra(n);
        let e = coordinate(&a, n, k, true);
        Self::wrap(n, Arc::new(a), e)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn element(&self) -> &Element {
        &self.element
    }

    pub fn is_zero(&self) -> bool {
        self.element.is_zero()
    }

    fn same_simplex(&self, other: &PolyForm) -> Result<()> {
        if self.n != other.n {
            return Err(AplError::DimensionMismatch(self.n, other.n));
        }
        Ok(())
    }

    pub fn add(&self, other: &PolyForm) -> Result<PolyForm> {
        self.same_simplex(other)?;
        Ok(self.with(self.element.add(&other.element)))
    }

    pub fn sub(&self, other: &PolyForm) -> Result<PolyForm> {
        self.same_simplex(other)?;
        Ok(self.with(self.element.sub(&other.element)))
    }

    pub fn scale(&self, c: &Rational) -> PolyForm {
        self.with(self.element.scale(c))
    }

    pub fn multiply(&self, other: &PolyForm) -> Result<PolyForm> {
        self.same_simplex(other)?;
        Ok(self.with(self.algebra.multiply(&self.element, &other.element)))
    }

    pub fn d(&self) -> PolyForm {
        self.with(self.algebra.apply_d(&self.element))
    }

    fn with(&self, element: Element) -> PolyForm {
        Self::wrap(self.n, self.algebra.clone(), element)
    }

    /// Number of `y` factors, when homogeneous.
    pub fn form_degree(&self) -> Option<u32> {
        self.algebra.degree(&self.element)
    }

    /// Largest polynomial degree among the terms.
    pub fn poly_degree(&self) -> u32 {
        self.element
            .terms()
            .map(|(m, _)| m.0[..self.n].iter().sum())
            .max()
            .unwrap_or(0)
    }

    fn substitute(&self, target_n: usize, images: &[Element]) -> PolyForm {
        let target = simplex_algebra(target_n);
        let e = self.algebra.substitute(&target, images, &self.element);
        Self::wrap(target_n, Arc::new(target), e)
    }
}

/// `t_k` or `y_k` on `Δ_n` in canonical coordinates.
fn coordinate(a: &FreeCdga, n: usize, k: usize, odd: bool) -> Element {
    let shift = if odd { n } else { 0 };
    if k > 0 {
        return a.gen_at(shift + k - 1);
    }
    let mut e = if odd { Element::zero() } else { a.unit() };
    for i in 0..n {
        e = e.sub(&a.gen_at(shift + i));
    }
    e
}

/// Face map `∂_i: A_{PL,n} -> A_{PL,n-1}`.
pub fn face(w: &PolyForm, i: usize) -> Result<PolyForm> {
    let n = w.n;
    if n == 0 || i > n {
        return Err(AplError::IndexOutOfRange { op: "face", index: i, n });
    }
    let target = simplex_algebra(n - 1);
    let mut images = Vec::with_capacity(2 * n);
    for odd in [false, true] {
        for k in 1..=n {
            images.push(match k.cmp(&i) {
                std::cmp::Ordering::Less => coordinate(&target, n - 1, k, odd),
                std::cmp::Ordering::Equal => Element::zero(),
                std::cmp::Ordering::Greater => coordinate(&target, n - 1, k - 1, odd),
            });
        }
    }
    Ok(w.substitute(n - 1, &images))
}

/// Degeneracy map `s_j: A_{PL,n} -> A_{PL,n+1}`.
pub fn degeneracy(w: &PolyForm, j: usize) -> Result<PolyForm> {
    let n = w.n;
    if j > n {
        return Err(AplError::IndexOutOfRange { op: "degeneracy", index: j, n });
    }
    let target = simplex_algebra(n + 1);
    let mut images = Vec::with_capacity(2 * n);
    for odd in [false, true] {
        for k in 1..=n {
            images.push(match k.cmp(&j) {
                std::cmp::Ordering::Less => coordinate(&target, n + 1, k, odd),
                std::cmp::Ordering::Equal => coordinate(&target, n + 1, k, odd)
                    .add(&coordinate(&target, n + 1, k + 1, odd)),
                std::cmp::Ordering::Greater => coordinate(&target, n + 1, k + 1, odd),
            });
        }
    }
    Ok(w.substitute(n + 1, &images))
}

// ---------------------------------------------------------------------------
// Simplicial identities
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum IdentityFamily {
    /// `∂_i ∂_j = ∂_{j-1} ∂_i` for `i < j`
    FaceFace,
    /// `s_i s_j = s_{j+1} s_i` for `i <= j`
    DegeneracyDegeneracy,
    /// `∂_i s_j = s_{j-1} ∂_i` for `i < j`
    FaceBelow,
    /// `∂_i s_j = id` for `i = j, j + 1`
    FaceIdentity,
    /// `∂_i s_j = s_j ∂_{i-1}` for `i > j + 1`
    FaceAbove,
}

impl IdentityFamily {
    pub fn label(self) -> &'static str {
        match self {
            IdentityFamily::FaceFace => "d_i d_j = d_(j-1) d_i",
            IdentityFamily::DegeneracyDegeneracy => "s_i s_j = s_(j+1) s_i",
            IdentityFamily::FaceBelow => "d_i s_j = s_(j-1) d_i",
            IdentityFamily::FaceIdentity => "d_i s_j = id",
            IdentityFamily::FaceAbove => "d_i s_j = s_j d_(i-1)",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentityCheck {
    pub family: IdentityFamily,
    pub n: usize,
    pub i: usize,
    pub j: usize,
    /// `t_k` or `y_k`.
    pub generator: String,
    pub passed: bool,
}

#[derive(Clone, Debug, Default)]
pub struct IdentityReport {
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &IdentityCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// Check count per family.
    pub fn counts(&self) -> BTreeMap<IdentityFamily, usize> {
        let mut out = BTreeMap::new();
        for c in &self.checks {
            *out.entry(c.family).or_insert(0) += 1;
        }
        out
    }
}

/// Checks all five families on every `t_k`, `y_k` of `A_{PL,n}`, `n <= n_max`.
pub fn verify_simplicial_identities(n_max: usize) -> IdentityReport {
    use IdentityFamily::*;
    let mut report = IdentityReport::default();
    let f = |w: &PolyForm, i| face(w, i).expect("index in range");
    let s = |w: &PolyForm, j| degeneracy(w, j).expect("index in range");
    for n in 0..=n_max {
        let gens: Vec<(String, PolyForm)> = (0..=n)
            .flat_map(|k| {
                [
                    (format!("t{k}"), PolyForm::t(n, k)),
                    (format!("y{k}"), PolyForm::y(n, k)),
                ]
            })
            .collect();
        let mut record = |family, i, j, name: &str, passed| {
            report.checks.push(IdentityCheck {
                family,
                n,
                i,
                j,
                generator: name.to_string(),
                passed,
            })
        };
        for (name, g) in &gens {
            if n >= 2 {
                for j in 1..=n {
                    for i in 0..j {
                        let ok = f(&f(g, j), i) == f(&f(g, i), j - 1);
                        record(FaceFace, i, j, name, ok);
                    }
                }
            }
            for j in 0..=n {
                for i in 0..=j {
                    let ok = s(&s(g, j), i) == s(&s(g, i), j + 1);
                    record(DegeneracyDegeneracy, i, j, name, ok);
                }
            }
            for j in 0..=n {
                let sj = s(g, j);
                for i in 0..=n + 1 {
                    let lhs = f(&sj, i);
                    let (family, ok) = if i < j {
                        (FaceBelow, lhs == s(&f(g, i), j - 1))
                    } else if i == j || i == j + 1 {
                        (FaceIdentity, &lhs == g)
                    } else {
                        (FaceAbove, lhs == s(&f(g, i - 1), j))
                    };
                    record(family, i, j, name, ok);
                }
            }
        }
    }
    report
}

// ---------------------------------------------------------------------------
// Integration
// ---------------------------------------------------------------------------

fn factorial(n: u32) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * k)
}

/// `∫_{Δ_n} ω` for a top-degree form, with `y_1 ∧ ... ∧ y_n` positive.
pub fn integrate(w: &PolyForm) -> Result<Rational> {
    let n = w.n;
    let mut total = Rational::zero();
    for (m, c) in w.element.terms() {
        if m.0[n..].iter().any(|&e| e != 1) {
            return Err(AplError::NotTopDegree { n });
        }
        let a = &m.0[..n];
        let num: BigUint = a.iter().map(|&e| factorial(e)).product();
        let den = factorial(n as u32 + a.iter().sum::<u32>());
        total += c * Rational::new(num.into(), den.into());
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StokesResult {
    pub lhs: Rational,
    pub rhs: Rational,
    pub equal: bool,
}

/// Compares `∫ dω` with `Σ (-1)^i ∫ ∂_i ω` for an `(n-1)`-form on `Δ_n`.
pub fn stokes_check(w: &PolyForm) -> Result<StokesResult> {
    let n = w.n;
    if n == 0 {
        return Err(AplError::NotTopDegree { n: 0 });
    }
    let lhs = integrate(&w.d())?;
    let mut rhs = Rational::zero();
    for i in 0..=n {
        let v = integrate(&face(w, i)?)?;
        if i % 2 == 0 {
            rhs += v;
        } else {
            rhs -= v;
        }
    }
    Ok(StokesResult {
        equal: lhs == rhs,
        lhs,
        rhs,
    })
}

/// Random form of the given form degree and polynomial degree at most
/// `max_poly`, with small integer and half-integer coefficients.
pub fn random_form<R: Rng>(rng: &mut R, n: usize, form_degree: usize, max_poly: u32) -> PolyForm {
    let mut e = Element::zero();
    let terms = rng.gen_range(1..=4);
    for _ in 0..terms {
        let mut exps = vec![0u32; 2 * n];
        let mut budget = rng.gen_range(0..=max_poly);
        while budget > 0 && n > 0 {
            exps[rng.gen_range(0..n)] += 1;
            budget -= 1;
        }
        let mut idx: Vec<usize> = (0..n).collect();
        for k in 0..form_degree.min(n) {
            let pick = rng.gen_range(k..n);
            idx.swap(k, pick);
            exps[n + idx[k]] = 1;
        }
        let c = Rational::new(rng.gen_range(-6i64..=6).into(), rng.gen_range(1i64..=2).into());
        e.add_term(Monomial(exps), c);
    }
    PolyForm::from_element(n, e)
}

// ---------------------------------------------------------------------------
// Bases and acyclicity
// ---------------------------------------------------------------------------

/// Monomials `t^a y_I` on `Δ_n` with `|I| = k` and `|a|` in `poly`.
pub fn form_monomials(n: usize, k: usize, poly: std::ops::RangeInclusive<u32>) -> Vec<Monomial> {
    let mut out = Vec::new();
    let mut subsets = Vec::new();
    subsets_of_size(n, k, 0, &mut Vec::new(), &mut subsets);
    for p in poly {
        let mut exps = Vec::new();
        compositions(n, p, &mut vec![0; n], 0, &mut exps);
        for a in &exps {
            for s in &subsets {
                let mut v = a.clone();
                v.extend((0..n).map(|i| u32::from(s.contains(&i))));
                out.push(Monomial(v));
            }
        }
    }
    out
}

fn subsets_of_size(n: usize, k: usize, from: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if cur.len() == k {
        out.push(cur.clone());
        return;
    }
    for i in from..n {
        cur.push(i);
        subsets_of_size(n, k, i + 1, cur, out);
        cur.pop();
    }
}

/// Exponent vectors of length `n` summing to `total`, descending lex order.
pub(crate) fn compositions(n: usize, total: u32, cur: &mut Vec<u32>, i: usize, out: &mut Vec<Vec<u32>>) {
    if n == 0 {
        if total == 0 {
            out.push(vec![]);
        }
        return;
    }
    if i == n - 1 {
        cur[i] = total;
        out.push(cur.clone());
        cur[i] = 0;
        return;
    }
    for e in (0..=total).rev() {
        cur[i] = e;
        compositions(n, total - e, cur, i + 1, out);
    }
    cur[i] = 0;
}

/// Cohomology dimensions (form degrees `0..=n`) of the total-degree-`T`
/// summand of `A_{PL,n}`: forms `t^a y_I` with `|a| + |I| = T`.
pub fn total_degree_cohomology(n: usize, total: u32) -> Result<Vec<usize>> {
    let algebra = simplex_algebra(n);
    let mut pieces = vec![(-1, vec![])];
    for k in 0..=n {
        let pieces_k = if (k as u32) <= total {
            let p = total - k as u32;
            form_monomials(n, k, p..=p)
        } else {
            vec![]
        };
        pieces.push((k as i32, pieces_k));
    }
    pieces.push((n as i32 + 1, vec![]));
    let basis = Arc::new(GradedBasis::from_pieces(pieces.clone())?);
    let mut entries = HashMap::new();
    for (_, ms) in &pieces {
        for m in ms {
            let dm = algebra.d_monomial(m);
            entries.insert(m.clone(), dm.terms().map(|(t, c)| (t.clone(), c.clone())).collect());
        }
    }
    let d = LinearMap::new(basis.clone(), basis.clone(), 1, entries)?;
    let slice = CochainComplexSlice::new(basis, d, -1, n as i32 + 1)?;
    (0..=n as i32)
        .map(|k| Ok(slice.cohomology_dim_at(k)?))
        .collect()
}

// ---------------------------------------------------------------------------
// Finite simplicial sets
// ---------------------------------------------------------------------------

/// A possibly degenerate simplex `s_{i_1} ... s_{i_r} x` with
/// `i_1 > ... > i_r` and `x` nondegenerate.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SimplexRef {
    pub degeneracies: Vec<usize>,
    pub base: usize,
}

impl SimplexRef {
    fn nondegenerate(base: usize) -> Self {
        SimplexRef {
            degeneracies: vec![],
            base,
        }
    }

    /// `s_a` applied on top, re-canonicalized with `s_i s_j = s_{j+1} s_i`.
    fn degenerate(&self, a: usize) -> Self {
        let mut out = Vec::with_capacity(self.degeneracies.len() + 1);
        let mut placed = false;
        for &i in &self.degeneracies {
            if placed || a > i {
                if !placed {
                    out.push(a);
                    placed = true;
                }
                out.push(i);
            } else {
                out.push(i + 1);
            }
        }
        if !placed {
            out.push(a);
        }
        SimplexRef {
            degeneracies: out,
            base: self.base,
        }
    }
}

#[derive(Clone, Debug)]
pub struct FiniteSimplicialSet {
    names: Vec<String>,
    dims: Vec<usize>,
    faces: Vec<Vec<SimplexRef>>,
}

impl FiniteSimplicialSet {
    /// One nondegenerate simplex per line: `dim id face_0 ... face_dim`.
    /// Faces are ids of earlier lines, or degeneracies like `s1s0(v)`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut set = FiniteSimplicialSet {
            names: vec![],
            dims: vec![],
            faces: vec![],
        };
        let mut index: HashMap<String, usize> = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let err = |message: String| AplError::Parse { line, message };
            let body = raw.split('#').next().unwrap_or("");
            let toks: Vec<&str> = body.split_whitespace().collect();
            if toks.is_empty() {
                continue;
            }
            let dim: usize = toks[0]
                .parse()
                .map_err(|_| err(format!("bad dimension `{}`", toks[0])))?;
            let Some(&name) = toks.get(1) else {
                return Err(err("missing simplex id".into()));
            };
            if index.contains_key(name) {
                return Err(err(format!("duplicate simplex `{name}`")));
            }
            let face_toks = &toks[2..];
            let expected = if dim == 0 { 0 } else { dim + 1 };
            if face_toks.len() != expected {
                return Err(err(format!(
                    "a {dim}-simplex needs {expected} faces, got {}",
                    face_toks.len()
                )));
            }
            let mut faces = Vec::new();
            for tok in face_toks {
                let (ops, base) = parse_face(tok).map_err(err)?;
                let &b = index
                    .get(base)
                    .ok_or_else(|| err(format!("unknown simplex `{base}`")))?;
                let mut r = SimplexRef::nondegenerate(b);
                for &op in ops.iter().rev() {
                    r = r.degenerate(op);
                }
                if set.dims[b] + ops.len() != dim - 1 {
                    return Err(err(format!("face `{tok}` has the wrong dimension")));
                }
                faces.push(r);
            }
            index.insert(name.to_string(), set.names.len());
            set.names.push(name.to_string());
            set.dims.push(dim);
            set.faces.push(faces);
        }
        set.check_incidence()?;
        Ok(set)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.dims.iter().copied().max().unwrap_or(0)
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn simplex_dim(&self, i: usize) -> usize {
        self.dims[i]
    }

    /// `∂_i` of a possibly degenerate simplex.
    pub fn face_of(&self, s: &SimplexRef, i: usize) -> SimplexRef {
        match s.degeneracies.split_first() {
            None => self.faces[s.base][i].clone(),
            Some((&j, rest)) => {
                let rest = SimplexRef {
                    degeneracies: rest.to_vec(),
                    base: s.base,
                };
                if i < j {
                    self.face_of(&rest, i).degenerate(j - 1)
                } else if i == j || i == j + 1 {
                    rest
                } else {
                    self.face_of(&rest, i - 1).degenerate(j)
                }
            }
        }
    }

    fn check_incidence(&self) -> Result<()> {
        for (b, &dim) in self.dims.iter().enumerate() {
            let s = SimplexRef::nondegenerate(b);
            for j in 1..=dim {
                for i in 0..j {
                    if dim < 2 {
                        continue;
                    }
                    let lhs = self.face_of(&self.face_of(&s, j), i);
                    let rhs = self.face_of(&self.face_of(&s, i), j - 1);
                    if lhs != rhs {
                        return Err(AplError::Incidence {
                            simplex: self.names[b].clone(),
                            i,
                            j,
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

fn parse_face(tok: &str) -> std::result::Result<(Vec<usize>, &str), String> {
    let Some(open) = tok.find('(') else {
        return Ok((vec![], tok));
    };
    if !tok.ends_with(')') {
        return Err(format!("malformed face `{tok}`"));
    }
    let base = &tok[open + 1..tok.len() - 1];
    let mut ops = Vec::new();
    for part in tok[..open].split('s').skip(1) {
        ops.push(
            part.parse()
                .map_err(|_| format!("malformed degeneracy in `{tok}`"))?,
        );
    }
    if ops.is_empty() || !tok.starts_with('s') {
        return Err(format!("malformed face `{tok}`"));
    }
    Ok((ops, base))
}

/// A basis of the degree-`k` sections of `A_PL(X)` with total degree at most `D`.
#[derive(Clone, Debug)]
pub struct SectionSpace {
    pub form_degree: usize,
    /// Per simplex: the forms allowed on it.
    pub local_bases: Vec<Vec<Monomial>>,
    /// Offset of each simplex in the unknown vector.
    pub offsets: Vec<usize>,
    /// Basis of the solution space, as unknown vectors.
    pub basis: Vec<Vec<Rational>>,
    free: Vec<usize>,
}

impl SectionSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    fn unknowns(&self) -> usize {
        self.offsets.last().copied().unwrap_or(0)
    }

    /// The form a section vector assigns to nondegenerate simplex `s`.
    pub fn form_on(&self, x: &FiniteSimplicialSet, v: &[Rational], s: usize) -> PolyForm {
        let lo = self.offsets[s];
        let e = self.local_bases[s]
            .iter()
            .zip(&v[lo..])
            .map(|(m, c)| (m.clone(), c.clone()))
            .collect();
        PolyForm::from_element(x.simplex_dim(s), e)
    }

    fn coordinates(&self, v: &[Rational]) -> Vec<Rational> {
        self.free.iter().map(|&c| v[c].clone()).collect()
    }
}

/// `ω(s_{i_1} ... s_{i_r} x) = s_{i_1} ... s_{i_r} ω(x)`.
fn degenerate_form(w: &PolyForm, s: &SimplexRef) -> PolyForm {
    let mut w = w.clone();
    for &j in s.degeneracies.iter().rev() {
        w = degeneracy(&w, j).expect("canonical degeneracy index in range");
    }
    w
}

/// Exact solve of the compatibility system `ω(∂_i σ) = ∂_i ω(σ)`.
pub fn sections(x: &FiniteSimplicialSet, k: usize, max_total: u32) -> Result<SectionSpace> {
    let mut local_bases = Vec::with_capacity(x.len());
    let mut offsets = vec![0];
    for s in 0..x.len() {
        let m = x.simplex_dim(s);
        let b = if k <= m && (k as u32) <= max_total {
            form_monomials(m, k, 0..=max_total - k as u32)
        } else {
            vec![]
        };
        offsets.push(offsets.last().unwrap() + b.len());
        local_bases.push(b);
    }
    let unknowns = *offsets.last().unwrap();
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    for s in 0..x.len() {
        let m = x.simplex_dim(s);
        if m == 0 {
            continue;
        }
        let sref = SimplexRef::nondegenerate(s);
        for i in 0..=m {
            let target = x.face_of(&sref, i);
            // one row per monomial of ∂_i ω(σ) - ω(∂_i σ)
            let mut cols: HashMap<Monomial, Vec<(usize, Rational)>> = HashMap::new();
            for (idx, mono) in local_bases[s].iter().enumerate() {
                let w = PolyForm::from_element(m, Element::from_monomial(mono.clone()));
                for (t, c) in face(&w, i)?.element.terms() {
                    cols.entry(t.clone())
                        .or_default()
                        .push((offsets[s] + idx, c.clone()));
                }
            }
            let b = target.base;
            for (idx, mono) in local_bases[b].iter().enumerate() {
                let base = PolyForm::from_element(x.simplex_dim(b), Element::from_monomial(mono.clone()));
                let w = degenerate_form(&base, &target);
                for (t, c) in w.element.terms() {
                    cols.entry(t.clone())
                        .or_default()
                        .push((offsets[b] + idx, -c.clone()));
                }
            }
            let mut keys: Vec<&Monomial> = cols.keys().collect();
            keys.sort();
            for key in keys {
                let mut row = vec![Rational::zero(); unknowns];
                for (col, c) in &cols[key] {
                    row[*col] += c;
                }
                if row.iter().any(|c| !c.is_zero()) {
                    rows.push(row);
                }
            }
        }
    }
    let system = if rows.is_empty() {
        Matrix::zeros(0, unknowns)
    } else {
        Matrix::from_rows(rows)
    };
    Ok(SectionSpace {
        form_degree: k,
        local_bases,
        offsets,
        basis: null_space(&system),
        free: free_columns(&system),
    })
}

/// Cohomology dimensions of the section complex in degrees `0..=up_to`.
pub fn sections_cohomology(x: &FiniteSimplicialSet, up_to: usize, max_total: u32) -> Result<Vec<usize>> {
    let spaces: Vec<SectionSpace> = (0..=up_to + 1)
        .map(|k| sections(x, k, max_total))
        .collect::<Result<_>>()?;
    let d_matrix = |k: usize| -> Result<Matrix> {
        let (src, dst) = (&spaces[k], &spaces[k + 1]);
        let mut cols = Vec::with_capacity(src.dim());
        for v in &src.basis {
            let mut image = vec![Rational::zero(); dst.unknowns()];
            for s in 0..x.len() {
                let dw = src.form_on(x, v, s).d();
                let lo = dst.offsets[s];
                for (t, c) in dw.element.terms() {
                    let pos = dst.local_bases[s]
                        .iter()
                        .position(|m| m == t)
                        .expect("d preserves the total-degree bound");
                    image[lo + pos] += c;
                }
            }
            cols.push(dst.coordinates(&image));
        }
        Ok(Matrix::from_columns(dst.dim(), &cols))
    };
    let mut dims = Vec::with_capacity(up_to + 1);
    let mut incoming = Matrix::zeros(spaces[0].dim(), 0);
    for k in 0..=up_to {
        let outgoing = d_matrix(k)?;
        dims.push(cohomology_from_differentials(k as i32, &incoming, &outgoing).dim);
        incoming = outgoing;
    }
    Ok(dims)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graded_core::{frac, int};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn t(n: usize, k: usize) -> PolyForm {
        PolyForm::t(n, k)
    }

    #[test]
    fn face_table() {
        assert!(face(&t(1, 1), 1).unwrap().is_zero());
        assert_eq!(face(&t(1, 1), 0).unwrap(), PolyForm::constant(0, int(1)));
        assert_eq!(face(&t(2, 2), 0).unwrap(), t(1, 1));
        assert_eq!(face(&t(2, 1), 0).unwrap(), t(1, 0));
        assert!(matches!(face(&t(1, 1), 2), Err(AplError::IndexOutOfRange { .. })));
    }

    #[test]
    fn degeneracy_table() {
        assert_eq!(degeneracy(&t(1, 1), 0).unwrap(), t(2, 2));
        assert_eq!(
            degeneracy(&PolyForm::constant(0, int(1)), 0).unwrap(),
            PolyForm::constant(1, int(1))
        );
        assert_eq!(
            degeneracy(&t(1, 1), 1).unwrap(),
            t(2, 1).add(&t(2, 2)).unwrap()
        );
        assert!(matches!(degeneracy(&t(1, 1), 2), Err(AplError::IndexOutOfRange { .. })));
    }

    #[test]
    fn d_of_coordinates() {
        for n in 1..=3 {
            for k in 0..=n {
                assert_eq!(t(n, k).d(), PolyForm::y(n, k));
            }
        }
    }

    #[test]
    fn identities_small() {
        let r = verify_simplicial_identities(2);
        assert!(r.all_passed(), "{:?}", r.failures().collect::<Vec<_>>());
        assert_eq!(r.counts().len(), 5);
        let w = t(2, 1);
        assert_eq!(
            face(&face(&w, 2).unwrap(), 0).unwrap(),
            face(&face(&w, 0).unwrap(), 1).unwrap()
        );
    }

    #[test]
    fn integration_values() {
        assert_eq!(integrate(&PolyForm::y(1, 1)).unwrap(), int(1));
        let w = t(1, 1).multiply(&PolyForm::y(1, 1)).unwrap();
        assert_eq!(integrate(&w).unwrap(), frac(1, 2));
        let w = t(2, 1)
            .multiply(&t(2, 2))
            .unwrap()
            .multiply(&PolyForm::y(2, 1))
            .unwrap()
            .multiply(&PolyForm::y(2, 2))
            .unwrap();
        assert_eq!(integrate(&w).unwrap(), frac(1, 24));
        assert!(matches!(integrate(&t(1, 1)), Err(AplError::NotTopDegree { .. })));
    }

    #[test]
    fn integration_against_quadrature() {
        // midpoint rule on a fine grid for t1^2 t2 on Δ_2; exact value 2!1!/5! = 1/60
        let w = t(2, 1)
            .multiply(&t(2, 1))
            .unwrap()
            .multiply(&t(2, 2))
            .unwrap()
            .multiply(&PolyForm::y(2, 1))
            .unwrap()
            .multiply(&PolyForm::y(2, 2))
            .unwrap();
        let exact = integrate(&w).unwrap();
        assert_eq!(exact, frac(1, 60));
        let n = 2000;
        let h = 1.0 / n as f64;
        let mut sum = 0.0;
        for i in 0..n {
            for j in 0..n - i {
                let (a, b) = ((i as f64 + 1.0 / 3.0) * h, (j as f64 + 1.0 / 3.0) * h);
                sum += a * a * b * h * h / 2.0;
                if i + j + 1 < n {
                    let (a, b) = ((i as f64 + 2.0 / 3.0) * h, (j as f64 + 2.0 / 3.0) * h);
                    sum += a * a * b * h * h / 2.0;
                }
            }
        }
        assert!((sum - 1.0 / 60.0).abs() < 1e-6);
    }

    #[test]
    fn stokes_examples() {
        let r = stokes_check(&t(1, 1)).unwrap();
        assert_eq!((r.lhs.clone(), r.rhs.clone()), (int(1), int(1)));
        let r = stokes_check(&PolyForm::constant(1, int(5))).unwrap();
        assert!(r.equal && r.lhs.is_zero());
        let w = t(2, 1).multiply(&PolyForm::y(2, 2)).unwrap();
        assert!(stokes_check(&w).unwrap().equal);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let w = random_form(&mut rng, 2, 1, 5);
            assert!(stokes_check(&w).unwrap().equal);
        }
    }

    #[test]
    fn acyclicity() {
        for n in 1..=3 {
            assert_eq!(total_degree_cohomology(n, 0).unwrap()[0], 1);
            for total in 1..=4 {
                let dims = total_degree_cohomology(n, total).unwrap();
                assert!(dims.iter().all(|&d| d == 0), "n={n} T={total} {dims:?}");
            }
        }
    }

    const POINT: &str = "0 v\n";
    const CIRCLE: &str = "0 a\n0 b\n0 c\n1 ab b a\n1 bc c b\n1 ac c a\n";
    const TRIANGLE: &str = "0 a\n0 b\n0 c\n1 ab b a\n1 bc c b\n1 ac c a\n2 abc bc ac ab\n";

    #[test]
    fn section_cohomology_examples() {
        let p = FiniteSimplicialSet::parse(POINT).unwrap();
        assert_eq!(sections_cohomology(&p, 2, 3).unwrap(), vec![1, 0, 0]);
        let c = FiniteSimplicialSet::parse(CIRCLE).unwrap();
        for d in 2..=4 {
            assert_eq!(sections_cohomology(&c, 1, d).unwrap(), vec![1, 1]);
        }
        let t = FiniteSimplicialSet::parse(TRIANGLE).unwrap();
        assert_eq!(sections_cohomology(&t, 2, 3).unwrap(), vec![1, 0, 0]);
    }

    #[test]
    fn degenerate_faces() {
        // one vertex and one loop: the circle as a minimal simplicial set
        let loop_ = FiniteSimplicialSet::parse("0 v\n1 e v v\n").unwrap();
        assert_eq!(sections_cohomology(&loop_, 1, 3).unwrap(), vec![1, 1]);
        // a 2-simplex with one collapsed edge: a disk
        let disk = FiniteSimplicialSet::parse("0 v\n0 w\n1 e w v\n1 f w v\n2 s s0(w) f e\n").unwrap();
        assert_eq!(sections_cohomology(&disk, 2, 3).unwrap(), vec![1, 0, 0]);
        let s = SimplexRef::nondegenerate(0).degenerate(0).degenerate(0);
        assert_eq!(s.degeneracies, vec![1, 0]);
    }

    #[test]
    fn simplicial_set_errors() {
        assert!(matches!(
            FiniteSimplicialSet::parse("0 a\n1 e a"),
            Err(AplError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            FiniteSimplicialSet::parse("0 a\n1 e a b"),
            Err(AplError::Parse { line: 2, .. })
        ));
        // d0 d1 != d0 d0 on the 2-simplex
        let bad = "0 a\n0 b\n0 c\n1 ab b a\n1 bc c b\n1 ca a c\n2 t bc ca ab\n";
        assert!(matches!(
            FiniteSimplicialSet::parse(bad),
            Err(AplError::Incidence { .. })
        ));
    }

    fn arb_form(n: usize, k: usize) -> impl Strategy<Value = PolyForm> {
        any::<u64>().prop_map(move |seed| {
            random_form(&mut ChaCha8Rng::seed_from_u64(seed), n, k, 3)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn faces_are_cdga_maps(a in arb_form(2, 1), b in arb_form(2, 0), i in 0usize..=2) {
            prop_assert_eq!(face(&a.d(), i).unwrap(), face(&a, i).unwrap().d());
            let ab = a.multiply(&b).unwrap();
            prop_assert_eq!(
                face(&ab, i).unwrap(),
                face(&a, i).unwrap().multiply(&face(&b, i).unwrap()).unwrap()
            );
        }

        #[test]
        fn degeneracies_are_cdga_maps(a in arb_form(2, 1), b in arb_form(2, 1), j in 0usize..=2) {
            prop_assert_eq!(degeneracy(&a.d(), j).unwrap(), degeneracy(&a, j).unwrap().d());
            let ab = a.multiply(&b).unwrap();
            prop_assert_eq!(
                degeneracy(&ab, j).unwrap(),
                degeneracy(&a, j).unwrap().multiply(&degeneracy(&b, j).unwrap()).unwrap()
            );
        }

        #[test]
        fn stokes_holds(w in arb_form(3, 2)) {
            prop_assert!(stokes_check(&w).unwrap().equal);
        }
    }
}
