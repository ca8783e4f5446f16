use cubeslice::constructions::{direct_sum, embed, has_positivity_property, plus_one, MapClass};
use cubeslice::cube::{
    count_points, count_points_naive, count_points_rational, linearize, AffineMap,
};
use cubeslice::knapsack::{count_knapsack, count_knapsack_naive, KnapsackInstance};
use cubeslice::linalg::{
    self, determinant, gram, is_contraction, is_isometry, is_psd_symmetric, rank, ratio, RatMatrix,
    Rational,
};
use num_traits::{Signed, Zero};
use proptest::prelude::*;
use proptest::sample::subsequence;

fn entry() -> impl Strategy<Value = Rational> {
    prop_oneof![
        3 => Just(ratio(0, 1)),
        3 => Just(ratio(1, 1)),
        2 => Just(ratio(-1, 1)),
        1 => (-4i64..=4, 1i64..=4).prop_map(|(n, d)| ratio(n, d)),
    ]
}

fn matrix(
    rows: std::ops::RangeInclusive<usize>,
    cols: std::ops::RangeInclusive<usize>,
) -> impl Strategy<Value = RatMatrix> {
    (rows, cols).prop_flat_map(|(m, k)| {
        prop::collection::vec(entry(), m * k)
            .prop_map(move |data| RatMatrix::new(m, k, data).unwrap())
    })
}

fn count(l: &RatMatrix) -> u64 {
    count_points(&AffineMap::linear(l.clone()), false)
        .unwrap()
        .count
}

fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

/// Determinant by cofactor expansion along the first row.
fn cofactor_det(a: &RatMatrix, rows: &[usize], cols: &[usize]) -> Rational {
    if rows.is_empty() {
        return ratio(1, 1);
    }
    let mut total = Rational::zero();
    for (j, &c) in cols.iter().enumerate() {
        let x = a.get(rows[0], c);
        if x.is_zero() {
            continue;
        }
        let rest: Vec<usize> = cols.iter().copied().filter(|&d| d != c).collect();
        let minor = cofactor_det(a, &rows[1..], &rest);
        let term = x * minor;
        total += if j % 2 == 0 { term } else { -term };
    }
    total
}

/// Sylvester's criterion for semidefiniteness: every principal minor is
/// nonnegative.
fn psd_by_minors(a: &RatMatrix) -> bool {
    let n = a.rows();
    (1u32..1 << n).all(|mask| {
        let idx: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        !cofactor_det(a, &idx, &idx).is_negative()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn gray_code_paths_agree_with_naive(l in matrix(1..=4, 1..=10), offset_seed in prop::collection::vec(entry(), 4)) {
        let c: Vec<Rational> = offset_seed.into_iter().take(l.rows()).collect();
        for map in [AffineMap::linear(l.clone()), AffineMap::new(l.clone(), c).unwrap()] {
            let naive = count_points_naive(&map, true).unwrap();
            prop_assert_eq!(&count_points(&map, true).unwrap(), &naive);
            prop_assert_eq!(&count_points_rational(&map, true).unwrap(), &naive);
        }
    }

    #[test]
    fn count_ignores_column_and_row_order(l in matrix(1..=4, 1..=8), seed in any::<u64>()) {
        let mut cols: Vec<usize> = (0..l.cols()).collect();
        let mut rows: Vec<usize> = (0..l.rows()).collect();
        let mut s = seed;
        for v in [&mut cols, &mut rows] {
            for i in (1..v.len()).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                v.swap(i, (s >> 33) as usize % (i + 1));
            }
        }
        let t = count(&l);
        prop_assert_eq!(count(&l.permute_columns(&cols)), t);
        prop_assert_eq!(count(&l.permute_rows(&rows)), t);
    }

    #[test]
    fn zero_rows_do_not_change_the_count(l in matrix(1..=3, 1..=8), extra in 1usize..3) {
        let padded = l.stack(&RatMatrix::zeros(extra, l.cols())).unwrap();
        prop_assert_eq!(count(&padded), count(&l));
    }

    #[test]
    fn linearizing_keeps_the_count(l in matrix(1..=3, 1..=8), offset in prop::collection::vec(entry(), 3)) {
        let c: Vec<Rational> = offset.into_iter().take(l.rows()).collect();
        let map = AffineMap::new(l, c).unwrap();
        let t = count_points(&map, false).unwrap().count;
        match linearize(&map) {
            Ok(lin) => {
                prop_assert!(lin.is_linear());
                prop_assert_eq!(count_points(&lin, false).unwrap().count, t);
            }
            Err(_) => prop_assert_eq!(t, 0),
        }
    }

    #[test]
    fn rank_is_invariant(l in matrix(1..=5, 1..=5), p in permutation(5), s in 1i64..5) {
        let r = rank(&l);
        prop_assert!(r <= l.rows().min(l.cols()));
        let cols: Vec<usize> = p.iter().copied().filter(|&i| i < l.cols()).collect();
        prop_assert_eq!(rank(&l.permute_columns(&cols)), r);
        prop_assert_eq!(rank(&l.scale(&ratio(-s, 3))), r);
        prop_assert_eq!(rank(&l.transpose()), r);
    }

    #[test]
    fn determinant_matches_cofactors(l in matrix(1..=5, 1..=5)) {
        prop_assume!(l.is_square());
        let idx: Vec<usize> = (0..l.rows()).collect();
        let d = determinant(&l).unwrap();
        prop_assert_eq!(&d, &cofactor_det(&l, &idx, &idx));
        prop_assert_eq!(d.is_zero(), rank(&l) < l.rows());
    }

    #[test]
    fn gram_is_symmetric_and_semidefinite(l in matrix(1..=4, 1..=4)) {
        let g = gram(&l);
        prop_assert_eq!(&g, &g.transpose());
        prop_assert!(is_psd_symmetric(&g).unwrap());
    }

    #[test]
    fn psd_agrees_with_principal_minors(l in matrix(1..=4, 1..=4), shift in -3i64..3) {
        let g = gram(&l);
        let n = g.cols();
        let mut a = g.clone();
        for i in 0..n {
            a.set(i, i, g.get(i, i) + ratio(shift, 2));
        }
        prop_assert_eq!(is_psd_symmetric(&a).unwrap(), psd_by_minors(&a));
    }

    #[test]
    fn isometries_are_contractions(l in matrix(1..=4, 1..=4)) {
        if is_isometry(&l) {
            prop_assert!(is_contraction(&l));
        }
        let n = l.cols();
        let diag = RatMatrix::identity(n).scale(&ratio(1, 2));
        let half = l.mul(&diag).unwrap();
        // shrinking never leaves the class
        if is_contraction(&l) {
            prop_assert!(is_contraction(&half));
        }
        prop_assert_eq!(MapClass::certify(&l).implies(MapClass::Contraction), is_contraction(&l));
    }

    #[test]
    fn text_format_round_trips(l in matrix(1..=4, 1..=4)) {
        prop_assert_eq!(RatMatrix::parse(&l.to_text()).unwrap(), l);
    }

    #[test]
    fn rational_arithmetic_is_exact(n in prop::collection::vec(1i64..50, 1..12)) {
        // sum of 1/n_i minus itself in another order is exactly zero
        let a: Rational = n.iter().map(|&x| ratio(1, x)).sum();
        let b: Rational = n.iter().rev().map(|&x| ratio(1, x)).sum();
        prop_assert!((a - b).is_zero());
        let third = ratio(1, 3);
        prop_assert_eq!(&third + &third + &third, ratio(1, 1));
        prop_assert_eq!(linalg::parse_rational(&linalg::format_rational(&third)).unwrap(), third);
    }

    #[test]
    fn knapsack_matches_naive(w in prop::collection::vec(-6i64..=12, 0..=14), q in -6i64..30, d in 1i64..4) {
        let inst = KnapsackInstance::new(w.iter().map(|&x| ratio(x, d)).collect(), ratio(q, d));
        prop_assert_eq!(count_knapsack(&inst).unwrap(), count_knapsack_naive(&inst));
    }

    #[test]
    fn knapsack_ignores_item_order(w in prop::collection::vec(0i64..=9, 1..=12), q in 0i64..30, order in subsequence((0..12usize).collect::<Vec<_>>(), 12).prop_shuffle()) {
        let inst = KnapsackInstance::new(w.iter().map(|&x| ratio(x, 1)).collect(), ratio(q, 1));
        let permuted: Vec<Rational> = order.iter().filter(|&&i| i < w.len()).map(|&i| ratio(w[i], 1)).collect();
        let other = KnapsackInstance::new(permuted, ratio(q, 1));
        prop_assert_eq!(count_knapsack(&inst).unwrap(), count_knapsack(&other).unwrap());
    }

    #[test]
    fn combinators(a in matrix(1..=3, 1..=5), b in matrix(1..=3, 1..=5), extra in 0usize..3, image in 0usize..2) {
        prop_assert_eq!(count(&direct_sum(&a, &b)), count(&a) * count(&b));
        prop_assert_eq!(count(&embed(&a, extra, image)), count(&a));
        if has_positivity_property(&a).unwrap() {
            let p = plus_one(&a).unwrap();
            prop_assert_eq!(count(&p), count(&a) + 1);
            prop_assert!(has_positivity_property(&p).unwrap());
        } else {
            prop_assert!(plus_one(&a).is_err());
        }
    }
}
