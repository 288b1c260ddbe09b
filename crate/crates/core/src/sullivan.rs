//! Sullivan algebras, degree-by-degree minimal models and homotopy ranks.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};
use thiserror::Error;

use crate::cdga::{
    CdgaCohomology, CdgaError, CdgaMorphism, CdgaPresentation, Element, FreeCdga, Generator,
    Monomial, QuasiIsoReport,
};
use crate::graded_core::{
    cohomology_from_differentials, solve, CohomologyGroup, Echelon, Matrix, Rational,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SullivanError {
    #[error("unsupported input: H^0 has rank {0}, expected a connected algebra")]
    NotConnected(usize),
    #[error("unsupported input: H^1 has rank {0}, expected a simply connected algebra")]
    NotSimplyConnected(usize),
    #[error("target is only known through degree {available}; degree {needed} is required")]
    InsufficientTruncation { needed: u32, available: u32 },
    #[error(transparent)]
    Cdga(#[from] CdgaError),
}

impl SullivanError {
    /// Whether the failure is a hypothesis violation rather than bad input.
    pub fn is_unsupported(&self) -> bool {
        matches!(
            self,
            SullivanError::NotConnected(_) | SullivanError::NotSimplyConnected(_)
        )
    }
}

pub type Result<T, E = SullivanError> = std::result::Result<T, E>;

/// A cochain algebra known through some degree, seen in coordinates.
pub trait CochainAlgebra {
    /// Highest `k` for which [`Self::cohomology_group`] is exact.
    fn max_cohomology_degree(&self) -> u32;
    fn dim(&self, k: u32) -> usize;
    fn cohomology_group(&self, k: u32) -> CohomologyGroup;
    /// Some `c` in degree `k` with `d c = target`, where `target` lives in degree `k + 1`.
    fn solve_coboundary(&self, k: u32, target: &[Rational]) -> Option<Vec<Rational>>;
    fn product(&self, i: u32, a: &[Rational], j: u32, b: &[Rational]) -> Vec<Rational>;
    fn unit(&self) -> Vec<Rational>;
}

impl CochainAlgebra for CdgaPresentation {
    fn max_cohomology_degree(&self) -> u32 {
        self.truncation().saturating_sub(1)
    }

    fn dim(&self, k: u32) -> usize {
        CdgaPresentation::dim(self, k)
    }

    fn cohomology_group(&self, k: u32) -> CohomologyGroup {
        CdgaPresentation::cohomology_group(self, k)
    }

    fn solve_coboundary(&self, k: u32, target: &[Rational]) -> Option<Vec<Rational>> {
        solve(&self.differential_matrix(k), target)
    }

    fn product(&self, i: u32, a: &[Rational], j: u32, b: &[Rational]) -> Vec<Rational> {
        let x = self.element_from_coordinates(i, a);
        let y = self.element_from_coordinates(j, b);
        self.coordinates(i + j, &self.multiply_unchecked(&x, &y))
    }

    fn unit(&self) -> Vec<Rational> {
        self.coordinates(0, &CdgaPresentation::unit(self))
    }
}

/// `(H(A), 0)` in the basis of chosen cohomology representatives.
#[derive(Clone, Debug)]
pub struct CohomologyAlgebra {
    dims: Vec<usize>,
    unit: Vec<Rational>,
    /// `(i, a, j, b)` -> class of `rep_{i,a} * rep_{j,b}`.
    products: HashMap<(u32, usize, u32, usize), Vec<Rational>>,
}

impl CohomologyAlgebra {
    pub fn new(h: &CdgaCohomology) -> Self {
        let dims = h.dims();
        let top = h.up_to();
        let unit = h.unit_class();
        let mut products = HashMap::new();
        for i in 0..=top {
            for j in 0..=top - i {
                for a in 0..dims[i as usize] {
                    for b in 0..dims[j as usize] {
                        let c = h.cup(i, a, j, b).expect("product of cocycles is a cocycle");
                        products.insert((i, a, j, b), c);
                    }
                }
            }
        }
        CohomologyAlgebra {
            dims,
            unit,
            products,
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }
}

impl CochainAlgebra for CohomologyAlgebra {
    fn max_cohomology_degree(&self) -> u32 {
        self.dims.len() as u32 - 1
    }

    fn dim(&self, k: u32) -> usize {
        self.dims.get(k as usize).copied().unwrap_or(0)
    }

    fn cohomology_group(&self, k: u32) -> CohomologyGroup {
        let n = self.dim(k);
        cohomology_from_differentials(k as i32, &Matrix::zeros(n, 0), &Matrix::zeros(0, n))
    }

    fn solve_coboundary(&self, k: u32, target: &[Rational]) -> Option<Vec<Rational>> {
        target
            .iter()
            .all(Zero::is_zero)
            .then(|| vec![Rational::zero(); self.dim(k)])
    }

    fn product(&self, i: u32, a: &[Rational], j: u32, b: &[Rational]) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.dim(i + j)];
        for (p, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (q, y) in b.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                if let Some(c) = self.products.get(&(i, p, j, q)) {
                    let xy = x * y;
                    for (o, ci) in out.iter_mut().zip(c) {
                        *o += &xy * ci;
                    }
                }
            }
        }
        out
    }

    fn unit(&self) -> Vec<Rational> {
        self.unit.clone()
    }
}

/// A free CDGA together with a well-ordering of its generators.
#[derive(Clone, Debug)]
pub struct SullivanModel {
    pub presentation: CdgaPresentation,
    /// Generator indices, earliest first.
    pub order: Vec<usize>,
}

impl SullivanModel {
    /// Uses declaration order.
    pub fn new(presentation: CdgaPresentation) -> Self {
        let order = (0..presentation.ngens()).collect();
        SullivanModel {
            presentation,
            order,
        }
    }

    pub fn with_order(presentation: CdgaPresentation, order: Vec<usize>) -> Self {
        SullivanModel {
            presentation,
            order,
        }
    }

    /// Every `d v` only involves generators strictly earlier than `v`.
    pub fn is_sullivan(&self) -> bool {
        let p = &self.presentation;
        let n = p.ngens();
        let mut sorted = self.order.clone();
        sorted.sort_unstable();
        if !p.relations().is_empty() || sorted != (0..n).collect::<Vec<_>>() {
            return false;
        }
        let mut rank = vec![0; n];
        for (pos, &g) in self.order.iter().enumerate() {
            rank[g] = pos;
        }
        (0..n).all(|g| {
            p.d_of_generator(g).terms().all(|(m, _)| {
                m.0.iter()
                    .enumerate()
                    .all(|(h, &e)| e == 0 || rank[h] < rank[g])
            })
        })
    }

    /// `d` lands in decomposables: no term of any `d v` is a single generator.
    pub fn is_minimal(&self) -> bool {
        let p = &self.presentation;
        self.is_sullivan()
            && (0..p.ngens()).all(|g| {
                p.d_of_generator(g)
                    .terms()
                    .all(|(m, _)| m.length() >= 2)
            })
    }

    /// `dim V^k` for every `k` with at least one generator.
    pub fn generator_counts(&self) -> BTreeMap<u32, usize> {
        let mut out = BTreeMap::new();
        for g in self.presentation.generators() {
            *out.entry(g.degree).or_insert(0) += 1;
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct MinimalModelResult {
    pub model: SullivanModel,
    /// Image of each model generator, as coordinates in the target.
    pub images: Vec<Vec<Rational>>,
    pub quasi_iso: Option<CdgaMorphism>,
    pub report: QuasiIsoReport,
    pub verified_degree: u32,
}

/// Minimal model of a connected, simply connected CDGA through degree `up_to`.
/// Requires the target truncation to be at least `up_to + 2`.
pub fn minimal_model(target: &CdgaPresentation, up_to: u32) -> Result<MinimalModelResult> {
    let mut result = build_model(target, up_to)?;
    let images = result
        .model
        .presentation
        .generators()
        .iter()
        .zip(&result.images)
        .map(|(g, v)| target.element_from_coordinates(g.degree, v))
        .collect();
    let f = CdgaMorphism::new(result.model.presentation.clone(), target.clone(), images)?;
    let report = f.is_quasi_iso_up_to(up_to);
    debug_assert_eq!(report, result.report);
    result.report = report;
    result.quasi_iso = Some(f);
    Ok(result)
}

/// Minimal model of any [`CochainAlgebra`]; the morphism is kept in coordinates.
pub fn build_model<A: CochainAlgebra>(target: &A, up_to: u32) -> Result<MinimalModelResult> {
    let available = target.max_cohomology_degree();
    let h0 = target.cohomology_group(0);
    if h0.dim != 1 {
        return Err(SullivanError::NotConnected(h0.dim));
    }
    if up_to >= 1 && available >= 1 {
        let h1 = target.cohomology_group(1);
        if h1.dim != 0 {
            return Err(SullivanError::NotSimplyConnected(h1.dim));
        }
    }
    if up_to + 1 > available {
        return Err(SullivanError::InsufficientTruncation {
            needed: up_to + 1,
            available,
        });
    }
    let target_h: Vec<CohomologyGroup> = (0..=up_to + 1).map(|k| target.cohomology_group(k)).collect();
    let truncation = up_to + 2;
    let mut builder = Builder {
        target,
        generators: vec![],
        differentials: vec![],
        images: vec![],
        truncation,
    };
    for k in 2..=up_to {
        // cokernel: new cocycle generators hitting missing classes
        let model = builder.presentation()?;
        let hk = model.cohomology_group(k);
        let mut span = Echelon::new();
        for r in &hk.representatives {
            let img = builder.phi(&model, k, r);
            let class = target_h[k as usize]
                .coordinates(&img)
                .expect("image of a cocycle is a cocycle");
            span.insert_dense(&class);
        }
        let tk = &target_h[k as usize];
        let mut added = 0;
        for (j, rep) in tk.representatives.iter().enumerate() {
            let mut e = vec![Rational::zero(); tk.dim];
            e[j] = Rational::one();
            if span.insert_dense(&e) {
                builder.push(k, Element::zero(), rep.clone(), added);
                added += 1;
            }
        }
        // kernel: kill classes in degree k+1 that vanish in the target
        let model = builder.presentation()?;
        let hk1 = model.cohomology_group(k + 1);
        let t1 = &target_h[k as usize + 1];
        let images: Vec<Vec<Rational>> = hk1
            .representatives
            .iter()
            .map(|r| builder.phi(&model, k + 1, r))
            .collect();
        let classes: Vec<Vec<Rational>> = images
            .iter()
            .map(|img| t1.coordinates(img).expect("image of a cocycle is a cocycle"))
            .collect();
        let map = Matrix::from_columns(t1.dim, &classes);
        for c in crate::graded_core::null_space(&map) {
            let mut z = vec![Rational::zero(); model.dim(k + 1)];
            let mut img = vec![Rational::zero(); target.dim(k + 1)];
            for (i, ci) in c.iter().enumerate() {
                if ci.is_zero() {
                    continue;
                }
                for (zj, rj) in z.iter_mut().zip(&hk1.representatives[i]) {
                    *zj += ci * rj;
                }
                for (ij, xj) in img.iter_mut().zip(&images[i]) {
                    *ij += ci * xj;
                }
            }
            let pre = target
                .solve_coboundary(k, &img)
                .expect("class vanishes in the target");
            let dz = model.element_from_coordinates(k + 1, &z);
            builder.push(k, dz, pre, added);
            added += 1;
        }
    }
    let presentation = builder.presentation()?;
    let report = builder.verify(&presentation, &target_h, up_to);
    Ok(MinimalModelResult {
        model: SullivanModel::new(presentation),
        images: builder.images,
        quasi_iso: None,
        report,
        verified_degree: up_to,
    })
}

struct Builder<'a, A: CochainAlgebra> {
    target: &'a A,
    generators: Vec<Generator>,
    differentials: Vec<Element>,
    images: Vec<Vec<Rational>>,
    truncation: u32,
}

impl<A: CochainAlgebra> Builder<'_, A> {
    fn push(&mut self, degree: u32, d: Element, image: Vec<Rational>, index: usize) {
        let n = self.generators.len() + 1;
        self.generators
            .push(Generator::new(format!("v{degree}_{index}"), degree));
        for e in &mut self.differentials {
            *e = widen(e, n);
        }
        self.differentials.push(widen(&d, n));
        self.images.push(image);
    }

    fn presentation(&self) -> Result<CdgaPresentation> {
        let mut free = FreeCdga::new(self.generators.clone())?;
        for (i, d) in self.differentials.iter().enumerate() {
            free.set_differential(i, d.clone());
        }
        Ok(CdgaPresentation::new(free, vec![], self.truncation)?)
    }

    /// Image of a degree-`k` coordinate vector of the model.
    fn phi(&self, model: &CdgaPresentation, k: u32, v: &[Rational]) -> Vec<Rational> {
        let mut cache = HashMap::new();
        let mut out = vec![Rational::zero(); self.target.dim(k)];
        for (m, c) in model.basis_in_degree(k).unwrap().iter().zip(v) {
            if c.is_zero() {
                continue;
            }
            let img = self.phi_monomial(model, m, &mut cache);
            for (o, x) in out.iter_mut().zip(&img) {
                *o += c * x;
            }
        }
        out
    }

    fn phi_monomial(
        &self,
        model: &CdgaPresentation,
        m: &Monomial,
        cache: &mut HashMap<Monomial, Vec<Rational>>,
    ) -> Vec<Rational> {
        if let Some(v) = cache.get(m) {
            return v.clone();
        }
        let value = match m.0.iter().position(|&e| e > 0) {
            None => self.target.unit(),
            Some(i) => {
                let mut rest = m.clone();
                rest.0[i] -= 1;
                let tail = self.phi_monomial(model, &rest, cache);
                let gi = self.generators[i].degree;
                let rest_deg = model.algebra().monomial_degree(&rest);
                self.target.product(gi, &self.images[i], rest_deg, &tail)
            }
        };
        cache.insert(m.clone(), value.clone());
        value
    }

    fn verify(
        &self,
        model: &CdgaPresentation,
        target_h: &[CohomologyGroup],
        up_to: u32,
    ) -> QuasiIsoReport {
        let mut degrees = Vec::new();
        for k in 0..=up_to {
            let hm = model.cohomology_group(k);
            let t = &target_h[k as usize];
            let cols: Vec<Vec<Rational>> = hm
                .representatives
                .iter()
                .map(|r| {
                    t.coordinates(&self.phi(model, k, r))
                        .expect("image of a cocycle is a cocycle")
                })
                .collect();
            let rank = Matrix::from_columns(t.dim, &cols).rank();
            degrees.push(crate::cdga::QuasiIsoDegree {
                degree: k,
                source_dim: hm.dim,
                target_dim: t.dim,
                rank,
                bijective: hm.dim == t.dim && rank == t.dim,
            });
        }
        QuasiIsoReport {
            verified_up_to: up_to,
            is_quasi_iso: degrees.iter().all(|d| d.bijective),
            degrees,
        }
    }
}

fn widen(e: &Element, n: usize) -> Element {
    e.terms()
        .map(|(m, c)| {
            let mut v = m.0.clone();
            v.resize(n, 0);
            (Monomial(v), c.clone())
        })
        .collect()
}

/// `dim V^k` for `k <= verified_degree`; degrees without generators are omitted.
pub fn homotopy_ranks(r: &MinimalModelResult) -> BTreeMap<u32, usize> {
    r.model
        .generator_counts()
        .into_iter()
        .filter(|(k, _)| *k <= r.verified_degree)
        .collect()
}

/// Outcome of [`formal_up_to`]: evidence only, never a proof of formality.
#[derive(Clone, Debug)]
pub struct FormalityEvidence {
    pub up_to: u32,
    pub model_of_algebra: SullivanModel,
    pub model_of_cohomology: SullivanModel,
    pub counts_agree: bool,
    pub differentials_agree: bool,
}

impl FormalityEvidence {
    pub fn consistent(&self) -> bool {
        self.counts_agree && self.differentials_agree
    }
}

/// Compares the minimal model of `p` with that of `(H(p), 0)` through
/// degree `n`, matching generators by position. Needs `p` truncated at
/// `n + 2` or higher.
pub fn formal_up_to(p: &CdgaPresentation, n: u32) -> Result<FormalityEvidence> {
    let direct = build_model(p, n)?;
    let h = p.cohomology(n + 1)?;
    let ha = CohomologyAlgebra::new(&h);
    let via_h = build_model(&ha, n)?;
    let a = &direct.model.presentation;
    let b = &via_h.model.presentation;
    let counts_agree = direct.model.generator_counts() == via_h.model.generator_counts();
    let differentials_agree = counts_agree
        && a.generators() == b.generators()
        && (0..a.ngens()).all(|i| a.d_of_generator(i) == b.d_of_generator(i));
    Ok(FormalityEvidence {
        up_to: n,
        model_of_algebra: direct.model,
        model_of_cohomology: via_h.model,
        counts_agree,
        differentials_agree,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::parse_presentation;
    use proptest::prelude::*;

    fn p(text: &str) -> CdgaPresentation {
        parse_presentation(text).unwrap().presentation
    }

    const H_S2: &str = "generator x deg 2\nrelation x^2\ntruncate 12";
    const S2: &str = "generator x deg 2\ngenerator y deg 3\nd y = x^2\ntruncate 12";

    fn counts(r: &MinimalModelResult) -> Vec<(u32, usize)> {
        homotopy_ranks(r).into_iter().collect()
    }

    #[test]
    fn sullivan_and_minimal() {
        let s2 = SullivanModel::new(p(S2));
        assert!(s2.is_sullivan());
        assert!(s2.is_minimal());
        let flipped = SullivanModel::with_order(p(S2), vec![1, 0]);
        assert!(!flipped.is_sullivan());
        let linear = SullivanModel::new(p(
            "generator a deg 4\ngenerator b deg 2\ngenerator c deg 3\nd c = a\ntruncate 8",
        ));
        assert!(linear.is_sullivan());
        assert!(!linear.is_minimal());
        assert!(SullivanModel::new(p("generator x deg 3\ntruncate 8")).is_minimal());
    }

    #[test]
    fn sphere_models() {
        let r = minimal_model(&p(H_S2), 8).unwrap();
        assert_eq!(counts(&r), vec![(2, 1), (3, 1)]);
        assert!(r.model.is_minimal());
        assert!(r.report.is_quasi_iso);
        let d = r.model.presentation.d_of_generator(1);
        assert_eq!(r.model.presentation.format_element(&d), "v2_0^2");

        let s3 = minimal_model(&p("generator x deg 3\ntruncate 12"), 10).unwrap();
        assert_eq!(counts(&s3), vec![(3, 1)]);

        let s4 = minimal_model(&p("generator x deg 4\nrelation x^2\ntruncate 12"), 10).unwrap();
        assert_eq!(counts(&s4), vec![(4, 1), (7, 1)]);
        assert!(s4.report.is_quasi_iso);
    }

    #[test]
    fn acyclic_factor_is_invisible() {
        let t = p("generator x deg 3\ngenerator b deg 1\ngenerator a deg 2\nd b = a\ntruncate 12");
        let r = minimal_model(&t, 9).unwrap();
        assert_eq!(counts(&r), vec![(3, 1)]);
    }

    #[test]
    fn point_has_no_ranks() {
        let r = minimal_model(&CdgaPresentation::ground_field(10), 8).unwrap();
        assert!(homotopy_ranks(&r).is_empty());
    }

    #[test]
    fn rejects_non_simply_connected() {
        let circle = p("generator x deg 1\ntruncate 6");
        let err = minimal_model(&circle, 3).unwrap_err();
        assert_eq!(err, SullivanError::NotSimplyConnected(1));
        assert!(err.is_unsupported());
        assert!(matches!(
            minimal_model(&p(S2), 11),
            Err(SullivanError::InsufficientTruncation { .. })
        ));
    }

    #[test]
    fn remodelling_is_stable() {
        let r = minimal_model(&p(H_S2), 8).unwrap();
        let again = minimal_model(&r.model.presentation.with_truncation(10).unwrap(), 8).unwrap();
        assert_eq!(homotopy_ranks(&r), homotopy_ranks(&again));
    }

    #[test]
    fn cp2_model() {
        let h = p("generator x deg 2\nrelation x^3\ntruncate 12");
        let r = minimal_model(&h, 10).unwrap();
        assert_eq!(counts(&r), vec![(2, 1), (5, 1)]);
    }

    #[test]
    fn formality_evidence() {
        assert!(formal_up_to(&p("generator x deg 3\ntruncate 12"), 9).unwrap().consistent());
        assert!(formal_up_to(&p(S2), 8).unwrap().consistent());
        assert!(formal_up_to(&p(H_S2), 8).unwrap().consistent());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        // rescaling d y leaves the ranks unchanged
        #[test]
        fn ranks_ignore_generator_scaling(num in 1i64..5, den in 1i64..5) {
            let text = format!(
                "generator x deg 2\ngenerator y deg 3\nd y = {num}/{den}*x^2\ntruncate 10"
            );
            let r = minimal_model(&p(&text), 8).unwrap();
            prop_assert_eq!(counts(&r), vec![(2, 1), (3, 1)]);
            prop_assert!(r.model.is_minimal());
        }
    }
}
