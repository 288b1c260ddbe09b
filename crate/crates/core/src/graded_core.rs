//! Exact rational linear algebra over graded vector spaces.
//!
//! Everything here works over [`Rational`] (arbitrary precision, always
//! reduced). Graded pieces are stored sparsely by label and only densified
//! one degree at a time when an elimination is needed.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Debug;
use std::hash::Hash;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Exact rational scalar.
pub type Rational = BigRational;

/// A sparse vector: strictly increasing column indices with nonzero values.
pub type SparseVec = Vec<(usize, Rational)>;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Prints a rational as `p` or `p/q`.
pub fn fmt_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GradedError {
    #[error("degree {degree} is outside the available range [{lo}, {hi}]")]
    DegreeOutOfRange { degree: i32, lo: i32, hi: i32 },
    #[error("cohomology at degree {degree} needs the {missing} differential, which is outside the slice")]
    Boundary { degree: i32, missing: &'static str },
    #[error("entry for a label in degree {source_degree} lands in degree {target_degree}, expected shift {shift}")]
    ShiftMismatch {
        source_degree: i32,
        target_degree: i32,
        shift: i32,
    },
    #[error("d∘d is nonzero starting in degree {degree}")]
    NotAComplex { degree: i32 },
    #[error("label {0} appears twice in the basis")]
    DuplicateLabel(String),
    #[error("label {0} is not in the basis")]
    UnknownLabel(String),
    #[error("the differential of a cochain complex must have shift +1, got {0}")]
    DifferentialShift(i32),
    #[error("negative degree {0} in a graded basis")]
    NegativeDegree(i32),
}

// ---------------------------------------------------------------------------
// Dense matrices
// ---------------------------------------------------------------------------

/// Row-major dense rational matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rational::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix");
        Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| int(x)).collect())
                .collect(),
        )
    }

    /// Builds a matrix whose columns are the given vectors of length `rows`.
    pub fn from_columns(rows: usize, columns: &[Vec<Rational>]) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows);
            for (i, v) in col.iter().enumerate() {
                if !v.is_zero() {
                    m.set(i, j, v.clone());
                }
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Rational {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Rational) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Rational] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<Rational> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        let v = out.get(i, j) + a * b;
                        out.set(i, j, v);
                    }
                }
            }
        }
        out
    }

    pub fn rank(&self) -> usize {
        rref(self).1.len()
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }
}

/// Reduced row echelon form with its pivot columns.
///
/// Pivoting is deterministic: for each column left to right, the first row
/// (in current order, at or below the next free row) with a nonzero entry is
/// used.
pub fn rref(m: &Matrix) -> (Matrix, Vec<usize>) {
    let mut a = m.clone();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..a.cols {
        if r == a.rows {
            break;
        }
        let Some(p) = (r..a.rows).find(|&i| !a.get(i, c).is_zero()) else {
            continue;
        };
        a.swap_rows(r, p);
        let inv = a.get(r, c).recip();
        for j in c..a.cols {
            let v = a.get(r, j) * &inv;
            a.set(r, j, v);
        }
        for i in 0..a.rows {
            if i == r {
                continue;
            }
            let f = a.get(i, c).clone();
            if f.is_zero() {
                continue;
            }
            for j in c..a.cols {
                let pv = a.get(r, j);
                if pv.is_zero() {
                    continue;
                }
                let v = a.get(i, j) - &f * pv;
                a.set(i, j, v);
            }
        }
        pivots.push(c);
        r += 1;
    }
    (a, pivots)
}

/// Basis of the null space, one vector per free column in increasing order.
/// Each vector has a 1 in its own free column and 0 in the other free columns.
pub fn null_space(m: &Matrix) -> Vec<Vec<Rational>> {
    let (red, pivots) = rref(m);
    let mut is_pivot = vec![false; m.cols];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    (0..m.cols)
        .filter(|&c| !is_pivot[c])
        .map(|free| {
            let mut v = vec![Rational::zero(); m.cols];
            v[free] = Rational::one();
            for (row, &p) in pivots.iter().enumerate() {
                let e = red.get(row, free);
                if !e.is_zero() {
                    v[p] = -e.clone();
                }
            }
            v
        })
        .collect()
}

/// Non-pivot columns of `rref(m)`; the `i`-th [`null_space`] vector has a 1 in
/// the `i`-th free column and 0 in the others.
pub fn free_columns(m: &Matrix) -> Vec<usize> {
    let (_, pivots) = rref(m);
    let mut is_pivot = vec![false; m.cols];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    (0..m.cols).filter(|&c| !is_pivot[c]).collect()
}

/// A particular solution of `m x = b` (free variables set to zero), or `None`
/// when the system is inconsistent.
pub fn solve(m: &Matrix, b: &[Rational]) -> Option<Vec<Rational>> {
    assert_eq!(b.len(), m.rows);
    let mut aug = Matrix::zeros(m.rows, m.cols + 1);
    for i in 0..m.rows {
        for j in 0..m.cols {
            aug.set(i, j, m.get(i, j).clone());
        }
        aug.set(i, m.cols, b[i].clone());
    }
    let (red, pivots) = rref(&aug);
    if pivots.last() == Some(&m.cols) {
        return None;
    }
    let mut x = vec![Rational::zero(); m.cols];
    for (row, &p) in pivots.iter().enumerate() {
        x[p] = red.get(row, m.cols).clone();
    }
    Some(x)
}

// ---------------------------------------------------------------------------
// Sparse incremental echelon form
// ---------------------------------------------------------------------------

pub fn to_sparse(v: &[Rational]) -> SparseVec {
    v.iter()
        .enumerate()
        .filter(|(_, x)| !x.is_zero())
        .map(|(i, x)| (i, x.clone()))
        .collect()
}

pub fn to_dense(v: &SparseVec, len: usize) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); len];
    for (i, x) in v {
        out[*i] = x.clone();
    }
    out
}

/// `a + f * b` for sparse vectors.
fn axpy(a: &SparseVec, f: &Rational, b: &SparseVec) -> SparseVec {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let take_a = j == b.len() || (i < a.len() && a[i].0 < b[j].0);
        let take_b = i == a.len() || (j < b.len() && b[j].0 < a[i].0);
        if take_a {
            out.push(a[i].clone());
            i += 1;
        } else if take_b {
            out.push((b[j].0, f * &b[j].1));
            j += 1;
        } else {
            let v = &a[i].1 + f * &b[j].1;
            if !v.is_zero() {
                out.push((a[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// Row space kept in (non-reduced) echelon form, grown one vector at a time.
///
/// Each stored row is normalized to leading coefficient 1 and keyed by its
/// leading column.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    rows: BTreeMap<usize, SparseVec>,
}

impl Echelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `v` against the stored rows until its leading column is free.
    pub fn reduce(&self, mut v: SparseVec) -> SparseVec {
        loop {
            let Some((lead, coeff)) = v.first().cloned() else {
                return v;
            };
            match self.rows.get(&lead) {
                Some(row) => v = axpy(&v, &-coeff, row),
                None => return v,
            }
        }
    }

    /// Inserts `v`; returns whether the rank grew.
    pub fn insert(&mut self, v: SparseVec) -> bool {
        let v = self.reduce(v);
        let Some((lead, coeff)) = v.first().cloned() else {
            return false;
        };
        let inv = coeff.recip();
        let row = v.into_iter().map(|(i, x)| (i, x * &inv)).collect();
        self.rows.insert(lead, row);
        true
    }

    pub fn insert_dense(&mut self, v: &[Rational]) -> bool {
        self.insert(to_sparse(v))
    }

    pub fn contains_dense(&self, v: &[Rational]) -> bool {
        self.reduce(to_sparse(v)).is_empty()
    }
}

/// Rank of a family of sparse vectors.
pub fn sparse_rank<I: IntoIterator<Item = SparseVec>>(vectors: I) -> usize {
    let mut e = Echelon::new();
    for v in vectors {
        e.insert(v);
    }
    e.rank()
}

// ---------------------------------------------------------------------------
// Graded bases and maps
// ---------------------------------------------------------------------------

/// Trait alias for basis labels.
pub trait Label: Clone + Eq + Hash + Ord + Debug {}
impl<T: Clone + Eq + Hash + Ord + Debug> Label for T {}

/// Per-degree ordered lists of basis labels.
#[derive(Clone, Debug)]
pub struct GradedBasis<L: Label> {
    pieces: BTreeMap<i32, Vec<L>>,
    index: HashMap<L, (i32, usize)>,
}

impl<L: Label> Default for GradedBasis<L> {
    fn default() -> Self {
        GradedBasis {
            pieces: BTreeMap::new(),
            index: HashMap::new(),
        }
    }
}

impl<L: Label> GradedBasis<L> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a basis from `(degree, labels)` pairs. Labels must be unique;
    /// negative degrees may only carry empty pieces.
    pub fn from_pieces<I>(pieces: I) -> Result<Self, GradedError>
    where
        I: IntoIterator<Item = (i32, Vec<L>)>,
    {
        let mut b = Self::new();
        for (deg, labels) in pieces {
            b.set_piece(deg, labels)?;
        }
        Ok(b)
    }

    pub fn set_piece(&mut self, degree: i32, labels: Vec<L>) -> Result<(), GradedError> {
        if degree < 0 && !labels.is_empty() {
            return Err(GradedError::NegativeDegree(degree));
        }
        if let Some(old) = self.pieces.remove(&degree) {
            for l in old {
                self.index.remove(&l);
            }
        }
        for (i, l) in labels.iter().enumerate() {
            if self.index.insert(l.clone(), (degree, i)).is_some() {
                return Err(GradedError::DuplicateLabel(format!("{l:?}")));
            }
        }
        self.pieces.insert(degree, labels);
        Ok(())
    }

    pub fn piece(&self, degree: i32) -> &[L] {
        self.pieces.get(&degree).map_or(&[], Vec::as_slice)
    }

    pub fn dim(&self, degree: i32) -> usize {
        self.piece(degree).len()
    }

    pub fn position(&self, label: &L) -> Option<(i32, usize)> {
        self.index.get(label).copied()
    }

    /// Smallest and largest degree carrying a piece (possibly empty).
    pub fn degree_range(&self) -> Option<(i32, i32)> {
        let lo = *self.pieces.keys().next()?;
        let hi = *self.pieces.keys().next_back()?;
        Some((lo, hi))
    }

    pub fn degrees(&self) -> impl Iterator<Item = i32> + '_ {
        self.pieces.keys().copied()
    }
}

/// Sparse linear map between graded bases, homogeneous of a fixed shift.
#[derive(Clone, Debug)]
pub struct LinearMap<L: Label> {
    source: Arc<GradedBasis<L>>,
    target: Arc<GradedBasis<L>>,
    shift: i32,
    entries: HashMap<L, Vec<(L, Rational)>>,
}

impl<L: Label> LinearMap<L> {
    pub fn new(
        source: Arc<GradedBasis<L>>,
        target: Arc<GradedBasis<L>>,
        shift: i32,
        entries: HashMap<L, Vec<(L, Rational)>>,
    ) -> Result<Self, GradedError> {
        for (s, images) in &entries {
            let (sd, _) = source
                .position(s)
                .ok_or_else(|| GradedError::UnknownLabel(format!("{s:?}")))?;
            for (t, _) in images {
                let (td, _) = target
                    .position(t)
                    .ok_or_else(|| GradedError::UnknownLabel(format!("{t:?}")))?;
                if td != sd + shift {
                    return Err(GradedError::ShiftMismatch {
                        source_degree: sd,
                        target_degree: td,
                        shift,
                    });
                }
            }
        }
        let entries = entries
            .into_iter()
            .map(|(k, v)| (k, v.into_iter().filter(|(_, c)| !c.is_zero()).collect()))
            .collect();
        Ok(LinearMap {
            source,
            target,
            shift,
            entries,
        })
    }

    pub fn zero(source: Arc<GradedBasis<L>>, target: Arc<GradedBasis<L>>, shift: i32) -> Self {
        LinearMap {
            source,
            target,
            shift,
            entries: HashMap::new(),
        }
    }

    pub fn identity(basis: Arc<GradedBasis<L>>) -> Self {
        let entries = basis
            .degrees()
            .flat_map(|d| basis.piece(d).to_vec())
            .map(|l| (l.clone(), vec![(l, Rational::one())]))
            .collect();
        LinearMap {
            source: basis.clone(),
            target: basis,
            shift: 0,
            entries,
        }
    }

    pub fn source(&self) -> &Arc<GradedBasis<L>> {
        &self.source
    }

    pub fn target(&self) -> &Arc<GradedBasis<L>> {
        &self.target
    }

    pub fn shift(&self) -> i32 {
        self.shift
    }

    pub fn image_of(&self, label: &L) -> &[(L, Rational)] {
        self.entries.get(label).map_or(&[], Vec::as_slice)
    }

    /// Matrix of the map from the source degree-`degree` piece, with rows
    /// indexed by the target piece in degree `degree + shift`.
    pub fn matrix_in_degree(&self, degree: i32) -> Matrix {
        let src = self.source.piece(degree);
        let tdeg = degree + self.shift;
        let mut m = Matrix::zeros(self.target.dim(tdeg), src.len());
        for (j, s) in src.iter().enumerate() {
            for (t, c) in self.image_of(s) {
                let (_, i) = self.target.position(t).expect("validated label");
                let v = m.get(i, j) + c;
                m.set(i, j, v);
            }
        }
        m
    }

    /// Applies the map to a coordinate vector of the source piece.
    pub fn apply(&self, degree: i32, v: &[Rational]) -> Vec<Rational> {
        self.matrix_in_degree(degree).mul_vec(v)
    }

    /// Exact basis of the kernel in the given source degree.
    pub fn kernel_basis(&self, degree: i32) -> Result<Vec<Vec<Rational>>, GradedError> {
        self.check_source_degree(degree)?;
        Ok(null_space(&self.matrix_in_degree(degree)))
    }

    pub fn rank_in_degree(&self, degree: i32) -> Result<usize, GradedError> {
        self.check_source_degree(degree)?;
        Ok(self.matrix_in_degree(degree).rank())
    }

    fn check_source_degree(&self, degree: i32) -> Result<(), GradedError> {
        let (lo, hi) = self.source.degree_range().unwrap_or((0, -1));
        if degree < lo || degree > hi {
            return Err(GradedError::DegreeOutOfRange { degree, lo, hi });
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Cochain complexes
// ---------------------------------------------------------------------------

/// Finite slice `[lo, hi]` of a cochain complex with an exact differential.
#[derive(Clone, Debug)]
pub struct CochainComplexSlice<L: Label> {
    basis: Arc<GradedBasis<L>>,
    differential: LinearMap<L>,
    lo: i32,
    hi: i32,
}

/// One cohomology group with chosen representatives.
#[derive(Clone, Debug)]
pub struct CohomologyGroup {
    pub degree: i32,
    pub dim: usize,
    /// Cocycles (coordinates in the degree piece) whose classes form a basis.
    pub representatives: Vec<Vec<Rational>>,
    /// Spanning set of the coboundaries, in echelon-independent form.
    pub boundaries: Vec<Vec<Rational>>,
    /// Dimension of the cochain piece.
    pub ambient: usize,
}

impl CohomologyGroup {
    /// Coordinates of the class of `cocycle` with respect to the chosen
    /// representatives, or `None` if `cocycle` is not in cocycles modulo
    /// boundaries spanned here.
    pub fn coordinates(&self, cocycle: &[Rational]) -> Option<Vec<Rational>> {
        assert_eq!(cocycle.len(), self.ambient);
        let mut cols = self.boundaries.clone();
        cols.extend(self.representatives.iter().cloned());
        let m = Matrix::from_columns(self.ambient, &cols);
        let x = solve(&m, cocycle)?;
        Some(x[self.boundaries.len()..].to_vec())
    }

    /// Whether `v` is a coboundary.
    pub fn is_boundary(&self, v: &[Rational]) -> bool {
        let m = Matrix::from_columns(self.ambient, &self.boundaries);
        solve(&m, v).is_some()
    }
}

impl<L: Label> CochainComplexSlice<L> {
    /// Validates the shift and that `d∘d = 0` on degrees `lo..=hi-2`.
    pub fn new(
        basis: Arc<GradedBasis<L>>,
        differential: LinearMap<L>,
        lo: i32,
        hi: i32,
    ) -> Result<Self, GradedError> {
        if differential.shift() != 1 {
            return Err(GradedError::DifferentialShift(differential.shift()));
        }
        let slice = CochainComplexSlice {
            basis,
            differential,
            lo,
            hi,
        };
        for k in lo..=hi - 2 {
            let dd = slice
                .differential_matrix(k + 1)
                .mul(&slice.differential_matrix(k));
            if !dd.is_zero() {
                return Err(GradedError::NotAComplex { degree: k });
            }
        }
        Ok(slice)
    }

    pub fn basis(&self) -> &Arc<GradedBasis<L>> {
        &self.basis
    }

    pub fn differential(&self) -> &LinearMap<L> {
        &self.differential
    }

    pub fn range(&self) -> (i32, i32) {
        (self.lo, self.hi)
    }

    /// Matrix of `d^k: C^k -> C^{k+1}`.
    pub fn differential_matrix(&self, k: i32) -> Matrix {
        self.differential.matrix_in_degree(k)
    }

    fn check_interior(&self, k: i32) -> Result<(), GradedError> {
        if k <= self.lo {
            return Err(GradedError::Boundary {
                degree: k,
                missing: "incoming",
            });
        }
        if k >= self.hi {
            return Err(GradedError::Boundary {
                degree: k,
                missing: "outgoing",
            });
        }
        Ok(())
    }

    /// Dimension only, computed from two ranks.
    pub fn cohomology_dim_at(&self, k: i32) -> Result<usize, GradedError> {
        self.check_interior(k)?;
        let dim = self.basis.dim(k);
        let out = self.differential_matrix(k).rank();
        let inc = self.differential_matrix(k - 1).rank();
        Ok(dim - out - inc)
    }

    /// `H^k` with representatives; see [`cohomology_from_differentials`].
    pub fn cohomology_at(&self, k: i32) -> Result<CohomologyGroup, GradedError> {
        self.check_interior(k)?;
        Ok(cohomology_from_differentials(
            k,
            &self.differential_matrix(k - 1),
            &self.differential_matrix(k),
        ))
    }
}

/// Cohomology at the middle of `C^{k-1} -> C^k -> C^{k+1}` given the two
/// matrices. Representatives are kernel vectors of `outgoing`, in free-column
/// order, kept when independent of the image of `incoming` and of the
/// representatives already chosen.
pub fn cohomology_from_differentials(
    degree: i32,
    incoming: &Matrix,
    outgoing: &Matrix,
) -> CohomologyGroup {
    let ambient = outgoing.cols();
    let mut span = Echelon::new();
    let mut boundaries = Vec::new();
    for j in 0..incoming.cols() {
        let col = incoming.column(j);
        if span.insert_dense(&col) {
            boundaries.push(col);
        }
    }
    let mut representatives = Vec::new();
    for z in null_space(outgoing) {
        if span.insert_dense(&z) {
            representatives.push(z);
        }
    }
    CohomologyGroup {
        degree,
        dim: representatives.len(),
        representatives,
        boundaries,
        ambient,
    }
}

/// Exact test of `f - g = d h + h d` on every source degree `n` with
/// `lo <= n < hi`. All maps run between the same two complexes; `h` has shift -1.
pub fn is_chain_homotopy<L: Label>(
    source: &CochainComplexSlice<L>,
    target: &CochainComplexSlice<L>,
    f: &LinearMap<L>,
    g: &LinearMap<L>,
    h: &LinearMap<L>,
) -> bool {
    if f.shift() != 0 || g.shift() != 0 || h.shift() != -1 {
        return false;
    }
    let (lo, hi) = source.range();
    (lo..hi).all(|n| {
        let lhs_f = f.matrix_in_degree(n);
        let lhs_g = g.matrix_in_degree(n);
        let dh = target
            .differential_matrix(n - 1)
            .mul(&h.matrix_in_degree(n));
        let hd = h
            .matrix_in_degree(n + 1)
            .mul(&source.differential_matrix(n));
        (0..lhs_f.rows()).all(|i| {
            (0..lhs_f.cols()).all(|j| {
                lhs_f.get(i, j) - lhs_g.get(i, j) == dh.get(i, j) + hd.get(i, j)
            })
        })
    })
}

/// `|x|` for a rational.
pub fn abs(q: &Rational) -> Rational {
    q.abs()
}
