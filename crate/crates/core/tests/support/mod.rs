#![allow(dead_code)]

use std::collections::HashMap;
use std::path::PathBuf;

use num_traits::{One, Zero};
use rhtk::cdga::{CdgaPresentation, Element, Monomial};
use rhtk::cli::parse_presentation;
use rhtk::graded_core::{Matrix, Rational};

pub fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus").join(name)
}

pub fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(format!("{name}.json"))
}

pub fn load(name: &str) -> CdgaPresentation {
    let text = std::fs::read_to_string(corpus(name)).unwrap();
    parse_presentation(&text).unwrap().presentation
}

/// Golden reports: file stem and command line after `rhtk --json`.
pub const GOLDEN_CASES: &[(&str, &[&str])] = &[
    ("minimal_model_h_s2", &["minimal-model", "@h_s2.cdga", "--up-to", "8"]),
    ("homotopy_ranks_h_s2", &["homotopy-ranks", "@h_s2.cdga", "--up-to", "8"]),
    ("homotopy_ranks_s3", &["homotopy-ranks", "@s3.cdga", "--up-to", "10"]),
    ("homotopy_ranks_h_s4", &["homotopy-ranks", "@h_s4.cdga", "--up-to", "10"]),
    ("cohomology_h_cp2", &["cohomology", "@h_cp2.cdga", "--up-to", "6"]),
    ("formality_h_cp2", &["formality", "@h_cp2.cdga", "--up-to", "6"]),
    ("hochschild_s3", &["hochschild", "@s3.cdga", "--max-degree", "8", "--max-length", "4"]),
    ("loop_space_s2", &["loop-space", "@s2.cdga", "--max-degree", "5", "--max-length", "5"]),
    ("apl_verify_3", &["apl-verify", "--n", "3"]),
    ("apl_sections_circle", &["apl-sections", "@circle.sset", "--max-degree", "3"]),
    ("stokes_2", &["stokes", "--n", "2", "--samples", "20"]),
    ("jets_parabola", &["jets", "@parabola.jets"]),
    ("jets_abs", &["jets", "@abs.jets"]),
    ("quadrant_poincare_positive", &["quadrant-poincare", "--quadrant", "++", "--up-to", "2"]),
];

/// Expands `@file` arguments to corpus paths.
pub fn golden_args(args: &[&str]) -> Vec<String> {
    let mut out = vec!["rhtk".to_string(), "--json".to_string()];
    for a in args {
        match a.strip_prefix('@') {
            Some(f) => out.push(corpus(f).display().to_string()),
            None => out.push(a.to_string()),
        }
    }
    out
}

/// Hochschild dimensions from a full dense matrix of the total differential
/// on every normalized word of degree `-1..=hi + 1` and length at most
/// `max_length + 1`.
pub struct Oracle {
    pub dims: Vec<usize>,
    pub words: usize,
    pub d_squared_zero: bool,
}

pub fn oracle_hochschild(p: &CdgaPresentation, hi: i64, max_length: usize) -> Oracle {
    let mut basis: Vec<(Monomial, i64)> = Vec::new();
    for k in 0..=p.truncation() {
        for m in p.basis_in_degree(k).unwrap() {
            basis.push((m.clone(), k as i64));
        }
    }
    let reduced: Vec<usize> = (0..basis.len()).filter(|&i| basis[i].1 > 0).collect();
    let degree = |w: &[usize]| w.iter().map(|&i| basis[i].1).sum::<i64>() - (w.len() as i64 - 1);

    // odometer over all tuples, filtered by degree
    let mut words: Vec<Vec<usize>> = Vec::new();
    for len in 0..=max_length {
        for a0 in 0..basis.len() {
            let mut digits = vec![0usize; len];
            loop {
                let mut w = vec![a0];
                w.extend(digits.iter().map(|&d| reduced[d]));
                let t = degree(&w);
                if (-1..=hi + 1).contains(&t) {
                    words.push(w);
                }
                let mut pos = 0;
                while pos < len {
                    digits[pos] += 1;
                    if digits[pos] < reduced.len() {
                        break;
                    }
                    digits[pos] = 0;
                    pos += 1;
                }
                if pos == len {
                    break;
                }
            }
        }
    }
    let index: HashMap<Vec<usize>, usize> = words.iter().cloned().enumerate().map(|(i, w)| (w, i)).collect();
    let lookup: HashMap<Monomial, usize> = basis.iter().enumerate().map(|(i, (m, _))| (m.clone(), i)).collect();
    let elem = |i: usize| Element::from_monomial(basis[i].0.clone());

    let n = words.len();
    let mut d = Matrix::zeros(n, n);
    for (col, w) in words.iter().enumerate() {
        if degree(w) > hi {
            continue;
        }
        let mut image: HashMap<Vec<usize>, Rational> = HashMap::new();
        let mut put = |v: Vec<usize>, c: Rational| {
            *image.entry(v).or_insert_with(Rational::zero) += c;
        };
        let len = w.len() - 1;
        let minus = |e: i64| if e.rem_euclid(2) == 1 { -Rational::one() } else { Rational::one() };
        for i in 0..len {
            let prod = p.multiply(&elem(w[i]), &elem(w[i + 1])).unwrap();
            for (m, c) in prod.terms() {
                let mut v = w[..i].to_vec();
                v.push(lookup[m]);
                v.extend_from_slice(&w[i + 2..]);
                put(v, minus(i as i64) * c);
            }
        }
        if len > 0 {
            let before: i64 = w[..len].iter().map(|&i| basis[i].1).sum();
            let sign = minus(len as i64 + basis[w[len]].1 * before);
            let prod = p.multiply(&elem(w[len]), &elem(w[0])).unwrap();
            for (m, c) in prod.terms() {
                let mut v = vec![lookup[m]];
                v.extend_from_slice(&w[1..len]);
                put(v, &sign * c);
            }
        }
        let outer = minus(len as i64);
        let mut passed = 0;
        for i in 0..w.len() {
            let da = p.apply_d(&elem(w[i])).unwrap();
            for (m, c) in da.terms() {
                let mut v = w.clone();
                v[i] = lookup[m];
                put(v, &outer * minus(passed) * c);
            }
            passed += basis[w[i]].1;
        }
        for (v, c) in image {
            if !c.is_zero() {
                d.set(index[&v], col, c);
            }
        }
    }

    let square = d.mul(&d);
    let d_squared_zero = (0..n)
        .filter(|&c| degree(&words[c]) < hi)
        .all(|c| (0..n).all(|r| square.get(r, c).is_zero()));

    let of_degree = |t: i64| -> Vec<usize> { (0..n).filter(|&i| degree(&words[i]) == t).collect() };
    let block_rank = |t: i64| -> usize {
        let (src, dst) = (of_degree(t), of_degree(t + 1));
        let rows: Vec<Vec<Rational>> = dst
            .iter()
            .map(|&r| src.iter().map(|&c| d.get(r, c).clone()).collect())
            .collect();
        if rows.is_empty() || src.is_empty() {
            0
        } else {
            Matrix::from_rows(rows).rank()
        }
    };
    let dims = (0..=hi)
        .map(|t| of_degree(t).len() - block_rank(t) - block_rank(t - 1))
        .collect();
    Oracle {
        dims,
        words: n,
        d_squared_zero,
    }
}

/// `dim` per degree of the free graded-commutative algebra on the given
/// generator degrees, from monomial counts.
pub fn free_algebra_dims(degrees: &[u32], hi: u32) -> Vec<usize> {
    let mut text = String::new();
    for (i, d) in degrees.iter().enumerate() {
        text.push_str(&format!("generator g{i} deg {d}\n"));
    }
    text.push_str(&format!("truncate {hi}\n"));
    let p = parse_presentation(&text).unwrap().presentation;
    (0..=hi).map(|k| p.dim(k)).collect()
}
