//! Realizability decisions checked against an independent description.
//!
//! A single row `f` keeps the points `{v : f(v) ∈ {0,1}}`, and the trace of a
//! matrix is the intersection of its rows' sets. Choosing a maximal
//! independent `B` inside a row's set, that set is `{v ∈ span(B) :
//! <coeff_B(v), c> ∈ {0,1}}` with `c = f(B) ∈ {0,1}^B`, and every such set is
//! a row's set. So the realizable patterns are exactly the intersections of
//! these sets, which this file enumerates by brute force in exact
//! arithmetic.

use std::collections::BTreeSet;

use cubeslice::constructions::{self, MapClass};
use cubeslice::cube::{count_points, AffineMap, CubePoint};
use cubeslice::linalg::{coords_in_basis, rank, rat, RatMatrix, RatVector, Rational};
use cubeslice::patterns::{
    self, canonical_pattern, exhaustive_search, Decider, Outcome, Pattern, Symmetry,
};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};

fn vector(k: usize, v: u64) -> RatVector {
    CubePoint::new(v, k).to_vector()
}

fn independent_subsets(k: usize) -> Vec<Vec<u64>> {
    fn grow(k: usize, start: u64, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        out.push(cur.clone());
        if cur.len() == k {
            return;
        }
        for v in start..1u64 << k {
            cur.push(v);
            let cols: Vec<RatVector> = cur.iter().map(|&b| vector(k, b)).collect();
            if rank(&RatMatrix::from_columns(&cols).unwrap()) == cur.len() {
                grow(k, v + 1, cur, out);
            }
            cur.pop();
        }
    }
    let mut out = Vec::new();
    grow(k, 1, &mut Vec::new(), &mut out);
    out
}

fn row_sets(k: usize) -> BTreeSet<u64> {
    let mut sets = BTreeSet::new();
    for basis in independent_subsets(k) {
        let vecs: Vec<RatVector> = basis.iter().map(|&b| vector(k, b)).collect();
        let coeffs: Vec<Option<RatVector>> = (0..1u64 << k)
            .map(|v| {
                if basis.is_empty() {
                    return (v == 0).then(Vec::new);
                }
                coords_in_basis(&vecs, &vector(k, v)).unwrap()
            })
            .collect();
        for c in 0..1u64 << basis.len() {
            let mut set = 0u64;
            for (v, coef) in coeffs.iter().enumerate() {
                let Some(coef) = coef else { continue };
                let value: Rational = coef
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| c >> i & 1 == 1)
                    .map(|(_, x)| x.clone())
                    .sum();
                if value.is_zero() || value.is_one() {
                    set |= 1 << v;
                }
            }
            sets.insert(set);
        }
    }
    sets
}

fn realizable_by_closure(k: usize) -> Vec<bool> {
    let n = 1usize << (1 << k);
    let full = (n - 1) as u64;
    let mut seen = vec![false; n];
    let mut list = vec![full];
    seen[full as usize] = true;
    for r in row_sets(k) {
        for i in 0..list.len() {
            let m = list[i] & r;
            if !seen[m as usize] {
                seen[m as usize] = true;
                list.push(m);
            }
        }
    }
    seen
}

fn trace(l: &RatMatrix) -> u64 {
    count_points(&AffineMap::linear(l.clone()), true)
        .unwrap()
        .points
        .unwrap()
        .into_iter()
        .fold(0, |acc, p| acc | 1 << p)
}

#[test]
fn decisions_match_the_closure_for_k_up_to_4() {
    for k in 1..=4 {
        let truth = realizable_by_closure(k);
        let mut d = Decider::new(k);
        let mut realizable = 0;
        for x in 0..1u64 << ((1 << k) - 1) {
            let bits = x << 1 | 1;
            let got = d.decide(bits).is_realizable();
            assert_eq!(got, truth[bits as usize], "k = {k}, pattern {bits:x}");
            realizable += got as usize;
        }
        assert!(realizable > 0);
    }
}

#[test]
fn witnesses_reproduce_the_pattern_bit_for_bit() {
    for k in 1..=3 {
        let mut d = Decider::new(k);
        for x in 0..1u64 << ((1 << k) - 1) {
            let bits = x << 1 | 1;
            match d.witness(bits).unwrap() {
                Some(w) => assert_eq!(trace(&w), bits, "k = {k}, pattern {bits:x}"),
                None => assert!(!d.decide(bits).is_realizable()),
            }
        }
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let mut d = Decider::new(4);
    for _ in 0..300 {
        let bits = rng.gen::<u64>() & 0xffff | 1;
        if let Some(w) = d.witness(bits).unwrap() {
            assert_eq!(trace(&w), bits);
        }
    }
}

fn maximal_independent_subsets(k: usize, bits: u64) -> Vec<Vec<u64>> {
    let points: Vec<u64> = (1..1u64 << k).filter(|v| bits >> v & 1 == 1).collect();
    let span_rank = if points.is_empty() {
        0
    } else {
        let cols: Vec<RatVector> = points.iter().map(|&b| vector(k, b)).collect();
        rank(&RatMatrix::from_columns(&cols).unwrap())
    };
    independent_subsets(k)
        .into_iter()
        .filter(|b| b.len() == span_rank && b.iter().all(|v| bits >> v & 1 == 1))
        .collect()
}

#[test]
fn decision_does_not_depend_on_the_basis() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    for k in 2..=4 {
        let mut d = Decider::new(k);
        for _ in 0..60 {
            let bits = rng.gen::<u64>() & ((1u64 << (1 << k)) - 1) | 1;
            let expected = d.decide(bits).is_realizable();
            for basis in maximal_independent_subsets(k, bits) {
                let got = d.decide_with_basis(bits, &basis).unwrap().is_realizable();
                assert_eq!(got, expected, "k = {k}, pattern {bits:x}, basis {basis:?}");
            }
        }
    }
}

#[test]
fn decision_is_invariant_under_coordinate_permutations() {
    for k in 2..=4 {
        let sym = Symmetry::new(k);
        let mut d = Decider::new(k);
        for x in (0..1u64 << ((1 << k) - 1)).step_by(7) {
            let bits = x << 1 | 1;
            let expected = d.decide(bits).is_realizable();
            for image in sym.orbit(bits) {
                assert_eq!(d.decide(image).is_realizable(), expected);
            }
            let p = Pattern::new(k, bits).unwrap();
            let c = canonical_pattern(&p);
            assert_eq!(d.decide(c.bits()).is_realizable(), expected);
        }
    }
}

#[test]
fn search_counts_agree_with_orbit_enumeration() {
    for k in 1..=4 {
        let s = exhaustive_search(k, None).unwrap();
        let sym = Symmetry::new(k);
        let truth = realizable_by_closure(k);
        let mut orbits = BTreeSet::new();
        let mut per_size = vec![(0u64, 0u64); (1 << k) + 1];
        for x in 0..1u64 << ((1 << k) - 1) {
            let bits = x << 1 | 1;
            let canon = sym.canonical_bits(bits);
            if orbits.insert(canon) {
                let e = &mut per_size[canon.count_ones() as usize];
                e.0 += 1;
                e.1 += truth[canon as usize] as u64;
            }
        }
        for (size, stats) in s.by_size.iter().enumerate() {
            assert_eq!(
                (stats.patterns, stats.realizable),
                per_size[size],
                "k = {k}, size {size}"
            );
        }
    }
}

#[test]
fn gallery_traces_are_realizable() {
    for k in 1..=4 {
        let mut d = Decider::new(k);
        for spec in constructions::gallery(k) {
            let (map, _) = constructions::build(&spec).unwrap();
            let bits = trace(&map.linear);
            let p = Pattern::new(k, bits).unwrap();
            let result = d.realize(&p).unwrap();
            let Outcome::Realizable { witness, .. } = &result.outcome else {
                panic!("{} not realizable", spec.label());
            };
            assert_eq!(trace(witness), bits, "{}", spec.label());
        }
    }
}

#[test]
fn certificates_hold_up_under_direct_checking() {
    // every canonical pattern of size 7 in H^3
    let sym = Symmetry::new(3);
    for x in 0..128u64 {
        let bits = x << 1 | 1;
        if bits.count_ones() != 7 || !sym.is_canonical(bits) {
            continue;
        }
        let p = Pattern::new(3, bits).unwrap();
        let Outcome::NotRealizable { certificate } = patterns::realizable(&p).unwrap().outcome
        else {
            panic!("{bits:x} should not be realizable");
        };
        let basis: Vec<RatVector> = certificate.basis.iter().map(|b| b.to_vector()).collect();
        let forced = certificate.forced_point;
        assert!(!p.contains(forced.bits));
        let coef = coords_in_basis(&basis, &forced.to_vector())
            .unwrap()
            .unwrap();
        assert_eq!(coef, certificate.forced_coefficients);
        for col in &certificate.admissible_columns {
            let c: Vec<Rational> = col.chars().map(|ch| rat((ch == '1') as i64)).collect();
            let value: Rational = coef.iter().zip(&c).map(|(a, b)| a * b).sum();
            assert!(value.is_zero() || value.is_one());
        }
    }
}

#[test]
fn construction_closure_witnesses_verify() {
    for k in 1..=5 {
        for class in [MapClass::General, MapClass::Contraction, MapClass::Isometry] {
            for (t, w) in patterns::construction_witnesses(k, class).unwrap() {
                patterns::check_witness(k, class, &w).unwrap();
                assert_eq!(w.t, t);
            }
        }
    }
}
