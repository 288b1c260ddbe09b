//! Normalized Hochschild complex of a finite-type CDGA.
//!
//! Words `a_0 ⊗ a_1 ⊗ ... ⊗ a_p` use basis monomials, with `a_1..a_p`
//! of positive degree. A word sits in cohomological degree
//! `|a_0| + ... + |a_p| - p`, and the total differential `b + (-1)^p δ`
//! raises that degree by one.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};

use crate::cdga::{CdgaError, CdgaPresentation, Element, Monomial};
use crate::graded_core::{sparse_rank, Rational, SparseVec};
use crate::sullivan::MinimalModelResult;

pub const DEGREE_CONVENTION: &str = "cohomological degree = sum of factor degrees - tensor length";

pub type Word = Vec<usize>;
pub type Chain = BTreeMap<Word, Rational>;

fn add_to(chain: &mut Chain, w: Word, c: Rational) {
    if c.is_zero() {
        return;
    }
    match chain.entry(w) {
        std::collections::btree_map::Entry::Vacant(v) => {
            v.insert(c);
        }
        std::collections::btree_map::Entry::Occupied(mut o) => {
            *o.get_mut() += c;
            if o.get().is_zero() {
                o.remove();
            }
        }
    }
}

fn sign(odd: bool) -> Rational {
    if odd {
        -Rational::one()
    } else {
        Rational::one()
    }
}

/// The normalized complex with words of length at most `max_length`.
#[derive(Clone, Debug)]
pub struct HochschildComplex {
    algebra: CdgaPresentation,
    basis: Vec<Monomial>,
    degrees: Vec<u32>,
    by_degree: Vec<Vec<usize>>,
    products: HashMap<(usize, usize), Vec<(usize, Rational)>>,
    differentials: Vec<Vec<(usize, Rational)>>,
    max_length: usize,
}

impl HochschildComplex {
    /// `algebra` is used as given; its truncation caps every factor and product.
    pub fn new(algebra: &CdgaPresentation, max_length: usize) -> Result<Self, CdgaError> {
        let top = algebra.truncation();
        let mut basis = Vec::new();
        let mut degrees = Vec::new();
        let mut by_degree = vec![Vec::new(); top as usize + 1];
        for k in 0..=top {
            for m in algebra.basis_in_degree(k)? {
                by_degree[k as usize].push(basis.len());
                basis.push(m.clone());
                degrees.push(k);
            }
        }
        let index: HashMap<&Monomial, usize> =
            basis.iter().enumerate().map(|(i, m)| (m, i)).collect();
        let to_ids = |e: &Element| -> Vec<(usize, Rational)> {
            e.terms().map(|(m, c)| (index[m], c.clone())).collect()
        };
        let mut products = HashMap::new();
        for i in 0..basis.len() {
            for j in 0..basis.len() {
                if degrees[i] + degrees[j] > top {
                    continue;
                }
                let p = algebra.multiply_unchecked(
                    &Element::from_monomial(basis[i].clone()),
                    &Element::from_monomial(basis[j].clone()),
                );
                products.insert((i, j), to_ids(&p));
            }
        }
        let differentials = basis
            .iter()
            .map(|m| to_ids(&algebra.apply_d_unchecked(&Element::from_monomial(m.clone()))))
            .collect();
        Ok(HochschildComplex {
            algebra: algebra.clone(),
            basis,
            degrees,
            by_degree,
            products,
            differentials,
            max_length,
        })
    }

    pub fn algebra(&self) -> &CdgaPresentation {
        &self.algebra
    }

    pub fn max_length(&self) -> usize {
        self.max_length
    }

    pub fn word_degree(&self, w: &[usize]) -> i64 {
        w.iter().map(|&i| self.degrees[i] as i64).sum::<i64>() - (w.len() as i64 - 1)
    }

    pub fn format_word(&self, w: &[usize]) -> String {
        w.iter()
            .map(|&i| self.algebra.algebra().format_monomial(&self.basis[i]))
            .collect::<Vec<_>>()
            .join(" ⊗ ")
    }

    fn product(&self, i: usize, j: usize) -> &[(usize, Rational)] {
        self.products.get(&(i, j)).map_or(&[], Vec::as_slice)
    }

    /// Hochschild boundary with the Koszul sign on the wrap-around term.
    pub fn b(&self, w: &[usize]) -> Chain {
        let mut out = Chain::new();
        let n = w.len() - 1;
        for i in 0..n {
            let s = sign(i % 2 == 1);
            for (k, c) in self.product(w[i], w[i + 1]) {
                let mut v = Vec::with_capacity(n);
                v.extend_from_slice(&w[..i]);
                v.push(*k);
                v.extend_from_slice(&w[i + 2..]);
                add_to(&mut out, v, &s * c);
            }
        }
        if n >= 1 {
            let last = self.degrees[w[n]] as u64;
            let rest: u64 = w[..n].iter().map(|&i| self.degrees[i] as u64).sum();
            let s = sign((n as u64 + last * rest) % 2 == 1);
            for (k, c) in self.product(w[n], w[0]) {
                let mut v = Vec::with_capacity(n);
                v.push(*k);
                v.extend_from_slice(&w[1..n]);
                add_to(&mut out, v, &s * c);
            }
        }
        out
    }

    /// The differential of the algebra applied factorwise, with Koszul signs.
    pub fn delta(&self, w: &[usize]) -> Chain {
        let mut out = Chain::new();
        let mut passed = 0u64;
        for i in 0..w.len() {
            let s = sign(passed % 2 == 1);
            for (k, c) in &self.differentials[w[i]] {
                let mut v = w.to_vec();
                v[i] = *k;
                add_to(&mut out, v, &s * c);
            }
            passed += self.degrees[w[i]] as u64;
        }
        out
    }

    /// `b + (-1)^p δ` on a word of length `p + 1`.
    pub fn total(&self, w: &[usize]) -> Chain {
        let mut out = self.b(w);
        let s = sign((w.len() - 1) % 2 == 1);
        for (v, c) in self.delta(w) {
            add_to(&mut out, v, &s * &c);
        }
        out
    }

    /// Applies a word-level operator linearly.
    pub fn apply(&self, chain: &Chain, f: impl Fn(&Self, &[usize]) -> Chain) -> Chain {
        let mut out = Chain::new();
        for (w, c) in chain {
            for (v, d) in f(self, w) {
                add_to(&mut out, v, c * &d);
            }
        }
        out
    }

    /// Words of cohomological degree `t` and length at most `max_length + 1`,
    /// in deterministic order.
    pub fn words_in_degree(&self, t: i64) -> Vec<Word> {
        let mut out = Vec::new();
        for p in 0..=self.max_length {
            let sum = t + p as i64;
            if sum < 0 {
                continue;
            }
            let mut cur = Vec::with_capacity(p + 1);
            self.fill(p + 1, sum as u64, &mut cur, &mut out);
        }
        out
    }

    fn fill(&self, len: usize, remaining: u64, cur: &mut Word, out: &mut Vec<Word>) {
        if cur.len() == len {
            if remaining == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let slots_after = (len - cur.len() - 1) as u64;
        let min_deg = if cur.is_empty() { 0 } else { 1 };
        let max_deg = remaining
            .saturating_sub(slots_after)
            .min(self.by_degree.len() as u64 - 1);
        for d in min_deg..=max_deg {
            for &id in &self.by_degree[d as usize] {
                cur.push(id);
                self.fill(len, remaining - d, cur, out);
                cur.pop();
            }
        }
    }

    /// `dim H^t` of the length-truncated total complex.
    pub fn homology_dim(&self, t: i64) -> usize {
        let here = self.words_in_degree(t);
        let rank_out = self.rank_from(&here, t + 1);
        let rank_in = self.rank_from(&self.words_in_degree(t - 1), t);
        here.len() - rank_out - rank_in
    }

    fn rank_from(&self, words: &[Word], target_degree: i64) -> usize {
        if words.is_empty() {
            return 0;
        }
        let targets = self.words_in_degree(target_degree);
        let index: HashMap<&Word, usize> = targets.iter().enumerate().map(|(i, w)| (w, i)).collect();
        sparse_rank(words.iter().map(|w| {
            let mut v: SparseVec = self
                .total(w)
                .into_iter()
                .map(|(u, c)| (*index.get(&u).expect("length-truncation is a subcomplex"), c))
                .collect();
            v.sort_by_key(|(i, _)| *i);
            v
        }))
    }

    /// Exhaustive check of `b² = 0`, `δ² = 0` and `bδ' + δ'b = 0` with
    /// `δ' = (-1)^p δ` on every word of degree `lo..=hi`.
    pub fn check_differentials(&self, lo: i64, hi: i64) -> DifferentialCheck {
        let mut check = DifferentialCheck {
            words: 0,
            b_squared_zero: true,
            delta_squared_zero: true,
            anticommute: true,
        };
        let twisted = |h: &Self, w: &[usize]| -> Chain {
            let s = sign((w.len() - 1) % 2 == 1);
            h.delta(w).into_iter().map(|(v, c)| (v, &s * &c)).collect()
        };
        for t in lo..=hi {
            for w in self.words_in_degree(t) {
                check.words += 1;
                let bw = self.b(&w);
                check.b_squared_zero &= self.apply(&bw, Self::b).is_empty();
                let dw = self.delta(&w);
                check.delta_squared_zero &= self.apply(&dw, Self::delta).is_empty();
                let mut mixed = self.apply(&twisted(self, &w), Self::b);
                for (v, c) in self.apply(&bw, twisted) {
                    add_to(&mut mixed, v, c);
                }
                check.anticommute &= mixed.is_empty();
            }
        }
        check
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DifferentialCheck {
    pub words: usize,
    pub b_squared_zero: bool,
    pub delta_squared_zero: bool,
    pub anticommute: bool,
}

impl DifferentialCheck {
    pub fn passed(&self) -> bool {
        self.b_squared_zero && self.delta_squared_zero && self.anticommute
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stability {
    /// Unchanged when the length bound grows by one.
    Stable,
    TruncationLimited,
}

impl Stability {
    pub fn label(self) -> &'static str {
        match self {
            Stability::Stable => "stable",
            Stability::TruncationLimited => "truncation-limited",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HhDegree {
    pub degree: i64,
    pub dim: usize,
    pub stability: Stability,
    /// The algebra is infinite-dimensional and its truncation cuts words
    /// that this degree depends on.
    pub boundary_effect: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HochschildReport {
    pub max_length: usize,
    /// Truncation of the algebra used for factors and products.
    pub algebra_truncation: u32,
    pub degrees: Vec<HhDegree>,
}

impl HochschildReport {
    pub fn dims(&self) -> Vec<usize> {
        self.degrees.iter().map(|d| d.dim).collect()
    }

    pub fn all_stable(&self) -> bool {
        self.degrees.iter().all(|d| d.stability == Stability::Stable)
    }
}

/// Truncation that represents every factor and product appearing in degree
/// `t + 1` with up to `max_length + 2` tensor factors.
pub fn required_truncation(t: i64, max_length: usize) -> u32 {
    (t.max(0) as u32) + max_length as u32 + 2
}

/// Dimensions of `HH` of `p`, truncation included, in degrees `lo..=hi`
/// with words of length at most `max_length + 1`.
///
/// A degree is stable when the dimension does not change with
/// `max_length + 1` and the truncation of an infinite-dimensional algebra
/// does not reach into it.
pub fn hochschild_homology(
    p: &CdgaPresentation,
    lo: i64,
    hi: i64,
    max_length: usize,
) -> Result<HochschildReport, CdgaError> {
    let at = HochschildComplex::new(p, max_length)?;
    let above = HochschildComplex::new(p, max_length + 1)?;
    let finite = p
        .finite_top_degree()
        .is_some_and(|top| top <= p.truncation());
    let degrees = (lo..=hi)
        .map(|t| {
            let dim = at.homology_dim(t);
            let boundary_effect = !finite && p.truncation() < required_truncation(t, max_length);
            let stability = if above.homology_dim(t) == dim && !boundary_effect {
                Stability::Stable
            } else {
                Stability::TruncationLimited
            };
            HhDegree {
                degree: t,
                dim,
                stability,
                boundary_effect,
            }
        })
        .collect();
    Ok(HochschildReport {
        max_length,
        algebra_truncation: p.truncation(),
        degrees,
    })
}

/// Hochschild homology of a minimal model, read as free loop space cohomology.
#[derive(Clone, Debug)]
pub struct LoopSpaceTable {
    pub label: String,
    pub report: HochschildReport,
}

/// Degrees above `verified_degree - 2` depend on generators the model does
/// not yet have and are flagged truncation-limited.
pub fn loop_space_table(
    model: &MinimalModelResult,
    lo: i64,
    hi: i64,
    max_length: usize,
) -> Result<LoopSpaceTable, CdgaError> {
    let free = model
        .model
        .presentation
        .with_truncation(required_truncation(hi, max_length))?;
    let mut report = hochschild_homology(&free, lo, hi, max_length)?;
    for d in &mut report.degrees {
        if d.degree + 2 > model.verified_degree as i64 {
            d.boundary_effect = true;
            d.stability = Stability::TruncationLimited;
        }
    }
    Ok(LoopSpaceTable {
        label: "free loop space cohomology ranks of the modeled space".to_string(),
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::parse_presentation;
    use crate::sullivan::minimal_model;

    fn p(text: &str) -> CdgaPresentation {
        parse_presentation(text).unwrap().presentation
    }

    const S3: &str = "generator x deg 3\ntruncate 12";
    const EXT: &str =
        "generator x deg 3\ngenerator b deg 1\ngenerator a deg 2\nd b = a\ntruncate 12";

    #[test]
    fn b_vanishes_on_exterior_words() {
        let h = HochschildComplex::new(&p(S3), 3).unwrap();
        let x = 1;
        assert!(h.b(&[0]).is_empty());
        assert!(h.b(&[0, x]).is_empty());
        assert!(h.b(&[x, x, x]).is_empty());
    }

    #[test]
    fn differentials_square_to_zero() {
        let h = HochschildComplex::new(&p(S3), 3).unwrap();
        let c = h.check_differentials(0, 12);
        assert!(c.passed());
        assert_eq!(c.words, 8);
        let s2 = p("generator x deg 2\ngenerator y deg 3\nd y = x^2\ntruncate 10");
        let h = HochschildComplex::new(&s2, 3).unwrap();
        assert!(h.check_differentials(0, 6).passed());
        let e = HochschildComplex::new(&p(EXT).with_truncation(8).unwrap(), 2).unwrap();
        assert!(e.check_differentials(0, 4).passed());
    }

    #[test]
    fn ground_field_and_sphere() {
        let r = hochschild_homology(&CdgaPresentation::ground_field(4), 0, 5, 3).unwrap();
        assert_eq!(r.dims(), vec![1, 0, 0, 0, 0, 0]);
        let r = hochschild_homology(&p(S3), 0, 8, 4).unwrap();
        assert_eq!(r.dims(), vec![1, 0, 1, 1, 1, 1, 1, 1, 1]);
        assert!(r.all_stable());
    }

    #[test]
    fn truncation_flags() {
        // degree 8 needs the word 1 ⊗ x ⊗ x ⊗ x ⊗ x
        let r = hochschild_homology(&p(S3), 0, 8, 3).unwrap();
        assert_eq!(r.degrees[8].dim, 0);
        assert_eq!(r.degrees[8].stability, Stability::TruncationLimited);
        assert_eq!(r.degrees[7].stability, Stability::Stable);
    }

    #[test]
    fn boundary_effects_are_flagged() {
        let s2 = p("generator x deg 2\ngenerator y deg 3\nd y = x^2\ntruncate 8");
        let r = hochschild_homology(&s2, 0, 4, 3).unwrap();
        assert!(!r.degrees[3].boundary_effect);
        assert!(r.degrees[4].boundary_effect);
        assert_eq!(r.degrees[4].stability, Stability::TruncationLimited);
    }

    #[test]
    fn hh0_of_zero_differential_algebra() {
        let r = hochschild_homology(&p(S3), 0, 0, 2).unwrap();
        assert_eq!(r.degrees[0].dim, 1);
    }

    #[test]
    fn acyclic_extension_matches() {
        let small = hochschild_homology(&p(S3), 0, 5, 3).unwrap();
        let big = hochschild_homology(&p(EXT), 0, 5, 3).unwrap();
        assert_eq!(small.dims(), big.dims());
    }

    #[test]
    fn monotone_stabilization() {
        let s2 = p("generator x deg 2\ngenerator y deg 3\nd y = x^2\ntruncate 12");
        let mut previous: Option<HochschildReport> = None;
        for len in 1..=3 {
            let r = hochschild_homology(&s2, 0, 5, len).unwrap();
            if let Some(prev) = &previous {
                for (a, b) in prev.degrees.iter().zip(&r.degrees) {
                    if a.stability == Stability::Stable {
                        assert_eq!(a.dim, b.dim);
                    }
                }
            }
            previous = Some(r);
        }
    }

    #[test]
    fn loop_space_of_point_and_s3() {
        let point = minimal_model(&CdgaPresentation::ground_field(8), 5).unwrap();
        let t = loop_space_table(&point, 0, 4, 2).unwrap();
        assert_eq!(t.report.dims(), vec![1, 0, 0, 0, 0]);
        let s3 = minimal_model(&p(S3), 8).unwrap();
        let t = loop_space_table(&s3, 0, 6, 3).unwrap();
        assert_eq!(t.report.dims(), vec![1, 0, 1, 1, 1, 1, 1]);
        assert!(t.report.all_stable());
        let t = loop_space_table(&s3, 0, 7, 4).unwrap();
        assert_eq!(t.report.degrees[7].stability, Stability::TruncationLimited);
        assert!(t.label.contains("free loop space"));
    }

    #[test]
    fn two_sphere_model() {
        let s2 = p("generator x deg 2\ngenerator y deg 3\nd y = x^2\ntruncate 16");
        let r = hochschild_homology(&s2, 0, 7, 7).unwrap();
        assert_eq!(r.dims(), vec![1; 8]);
        assert!(r.all_stable());
        let short = hochschild_homology(&s2, 0, 5, 4).unwrap();
        assert_eq!(short.degrees[5].dim, 0);
        assert_eq!(short.degrees[5].stability, Stability::TruncationLimited);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(24))]
        #[test]
        fn total_differential_squares_to_zero(
            degs in proptest::collection::vec(1u32..4, 1..3),
            power in 2u32..4,
        ) {
            let mut text = String::new();
            for (i, d) in degs.iter().enumerate() {
                text.push_str(&format!("generator g{i} deg {d}\n"));
            }
            if degs[0] % 2 == 0 {
                text.push_str(&format!("relation g0^{power}\n"));
            }
            if degs.len() == 2 && degs[1] + 1 == degs[0] {
                text.push_str("d g1 = g0\n");
            }
            text.push_str("truncate 7\n");
            let h = HochschildComplex::new(&p(&text), 2).unwrap();
            proptest::prop_assert!(h.check_differentials(0, 4).passed());
        }
    }
}
