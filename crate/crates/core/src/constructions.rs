//! Explicit maps realizing known intersection sizes, and the combinators
//! that produce new sizes from old ones.
//!
//! Every construction returns its matrix together with the membership it
//! claims (`t` in the class set for dimensions `(n, k)`); [`verify`]
//! recounts and certifies the claim.

use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::cube::{self, AffineMap, CubePoint};
use crate::error::{Error, Result};
use crate::knapsack::{self, KnapsackInstance};
use crate::linalg::{self, rat, ratio, RatMatrix, RatVector, Rational};

/// Map classes, ordered from most general to most restrictive.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapClass {
    General,
    Contraction,
    Isometry,
}

impl MapClass {
    /// Whether a witness of class `self` also witnesses class `other`.
    pub fn implies(self, other: MapClass) -> bool {
        self >= other
    }

    /// Strongest class certified for `l`.
    pub fn certify(l: &RatMatrix) -> MapClass {
        if linalg::is_isometry(l) {
            MapClass::Isometry
        } else if linalg::is_contraction(l) {
            MapClass::Contraction
        } else {
            MapClass::General
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MapClass::General => "general",
            MapClass::Contraction => "contraction",
            MapClass::Isometry => "isometry",
        }
    }
}

impl fmt::Display for MapClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for MapClass {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "general" => Ok(MapClass::General),
            "contraction" => Ok(MapClass::Contraction),
            "isometry" => Ok(MapClass::Isometry),
            _ => Err(format!("unknown map class `{s}`")),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(tag = "variant")]
pub enum ConstructionSpec {
    /// `L e_i = e_i` for `i <= j`, `-e_i` after: `2^j` by an isometry.
    DiagonalIsometry { k: usize, j: usize },
    /// `L e_i = 0` for `i <= j`, `-eps` after, into `R^1`: `2^j` by a contraction.
    EpsilonContraction {
        k: usize,
        j: usize,
        #[serde(
            default,
            with = "linalg::rational_string::option",
            skip_serializing_if = "Option::is_none"
        )]
        epsilon: Option<Rational>,
    },
    /// Single all-ones row: `k + 1`.
    AllOnes { k: usize },
    /// `L e_i = (1, 1)` for `i < k`, `L e_k = (0, -1)`: `2k - 1`.
    TwoRow { k: usize },
    /// `L e_i = e_i` for `i < k`, `L e_k` all ones: `2^(k-1) + 1`.
    HalfPlusOne { k: usize },
    /// Row with `1/r` on the first `l` coordinates and `2` after: `C(l, r) + 1`.
    BinomialPlusOne {
        k: usize,
        #[serde(alias = "ℓ")]
        l: usize,
        r: usize,
    },
    /// `2^t + 2^r`, or `2^t + 2^r + 1` with `plus_one`.
    TwoPowers {
        k: usize,
        t: usize,
        r: usize,
        plus_one: bool,
    },
    /// `sum_i 2^(t_i)` for strictly increasing exponents.
    SumOfPowers {
        k: usize,
        #[serde(rename = "t_list")]
        exponents: Vec<usize>,
    },
    /// The orthogonal map with columns `(1,2,2)/3, (2,1,-2)/3, (2,-2,1)/3`: 3.
    Isometry3Example,
    /// Isometry into `R^(2k-2)` hitting exactly `0` and the `k` points of weight `k-1`.
    NearIsometry { k: usize },
    /// Solutions of `sum p_i v_i = q`, as an affine hyperplane section.
    KnapsackHyperplane {
        #[serde(rename = "p", with = "linalg::rational_string::vec")]
        weights: Vec<Rational>,
        #[serde(rename = "q", with = "linalg::rational_string")]
        target: Rational,
    },
}

/// A membership claim `t in H(n, k)` (or its contraction/isometry variant).
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct ClaimedResult {
    pub t: u64,
    pub k: usize,
    pub n: usize,
    pub class: MapClass,
}

impl ConstructionSpec {
    pub fn name(&self) -> &'static str {
        match self {
            Self::DiagonalIsometry { .. } => "DiagonalIsometry",
            Self::EpsilonContraction { .. } => "EpsilonContraction",
            Self::AllOnes { .. } => "AllOnes",
            Self::TwoRow { .. } => "TwoRow",
            Self::HalfPlusOne { .. } => "HalfPlusOne",
            Self::BinomialPlusOne { .. } => "BinomialPlusOne",
            Self::TwoPowers { .. } => "TwoPowers",
            Self::SumOfPowers { .. } => "SumOfPowers",
            Self::Isometry3Example => "Isometry3Example",
            Self::NearIsometry { .. } => "NearIsometry",
            Self::KnapsackHyperplane { .. } => "KnapsackHyperplane",
        }
    }

    /// Short human-readable label including parameters.
    pub fn label(&self) -> String {
        match self {
            Self::DiagonalIsometry { k, j } => format!("DiagonalIsometry(k={k}, j={j})"),
            Self::EpsilonContraction { k, j, epsilon } => format!(
                "EpsilonContraction(k={k}, j={j}, eps={})",
                linalg::format_rational(&epsilon_or_default(*k, epsilon))
            ),
            Self::AllOnes { k } => format!("AllOnes(k={k})"),
            Self::TwoRow { k } => format!("TwoRow(k={k})"),
            Self::HalfPlusOne { k } => format!("HalfPlusOne(k={k})"),
            Self::BinomialPlusOne { k, l, r } => format!("BinomialPlusOne(k={k}, l={l}, r={r})"),
            Self::TwoPowers { k, t, r, plus_one } => {
                format!("TwoPowers(k={k}, t={t}, r={r}, plus_one={plus_one})")
            }
            Self::SumOfPowers { k, exponents } => format!("SumOfPowers(k={k}, t={exponents:?})"),
            Self::Isometry3Example => "Isometry3Example".into(),
            Self::NearIsometry { k } => format!("NearIsometry(k={k})"),
            Self::KnapsackHyperplane { weights, target } => {
                let w: Vec<String> = weights.iter().map(linalg::format_rational).collect();
                format!(
                    "KnapsackHyperplane(p=[{}], q={})",
                    w.join(","),
                    linalg::format_rational(target)
                )
            }
        }
    }

    /// Dimension of the domain of the built map.
    pub fn domain_dim(&self) -> usize {
        match self {
            Self::DiagonalIsometry { k, .. }
            | Self::EpsilonContraction { k, .. }
            | Self::AllOnes { k }
            | Self::TwoRow { k }
            | Self::HalfPlusOne { k }
            | Self::BinomialPlusOne { k, .. }
            | Self::TwoPowers { k, .. }
            | Self::SumOfPowers { k, .. }
            | Self::NearIsometry { k } => *k,
            Self::Isometry3Example => 3,
            Self::KnapsackHyperplane { weights, .. } => weights.len(),
        }
    }

    /// Checks the per-variant parameter inequalities.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Constraint(msg));
        match self {
            Self::DiagonalIsometry { k, j } => {
                if *k < 1 {
                    return fail("DiagonalIsometry needs k >= 1".into());
                }
                if j > k {
                    return fail(format!("DiagonalIsometry needs j <= k, got j={j} > k={k}"));
                }
            }
            Self::EpsilonContraction { k, j, epsilon } => {
                if *k < 1 {
                    return fail("EpsilonContraction needs k >= 1".into());
                }
                if j > k {
                    return fail(format!(
                        "EpsilonContraction needs j <= k, got j={j} > k={k}"
                    ));
                }
                let eps = epsilon_or_default(*k, epsilon);
                if !eps.is_positive() || eps >= ratio(1, *k as i64) {
                    return fail(format!(
                        "EpsilonContraction needs 0 < eps < 1/k, got eps={} with k={k}",
                        linalg::format_rational(&eps)
                    ));
                }
            }
            Self::AllOnes { k } | Self::TwoRow { k } => {
                if *k < 1 {
                    return fail(format!("{} needs k >= 1", self.name()));
                }
            }
            Self::HalfPlusOne { k } => {
                if *k < 2 {
                    return fail(format!("HalfPlusOne needs k >= 2, got k={k}"));
                }
            }
            Self::BinomialPlusOne { k, l, r } => {
                // the row entry 1/r needs r >= 1
                if *r < 1 {
                    return fail("BinomialPlusOne needs r >= 1 (the entries are 1/r)".into());
                }
                if r > l {
                    return fail(format!("BinomialPlusOne needs r <= l, got r={r} > l={l}"));
                }
                if l > k {
                    return fail(format!("BinomialPlusOne needs l <= k, got l={l} > k={k}"));
                }
            }
            Self::TwoPowers { k, t, r, plus_one } => {
                if r >= t {
                    return fail(format!("TwoPowers needs r < t, got r={r} >= t={t}"));
                }
                if t >= k {
                    return fail(format!("TwoPowers needs t < k, got t={t} >= k={k}"));
                }
                if *plus_one && t + 2 > *k {
                    return fail(format!(
                        "TwoPowers with plus_one needs t <= k-2, got t={t} with k={k}"
                    ));
                }
            }
            Self::SumOfPowers { k, exponents } => {
                let Some(&top) = exponents.last() else {
                    return fail("SumOfPowers needs at least one exponent".into());
                };
                if exponents.windows(2).any(|w| w[0] >= w[1]) {
                    return fail("SumOfPowers needs strictly increasing exponents".into());
                }
                let j = exponents.len() - 1;
                if j > *k || top > k - j {
                    return fail(format!(
                        "SumOfPowers needs k - j >= t_j, got k={k}, j={j}, t_j={top}"
                    ));
                }
                if *k < 1 {
                    return fail("SumOfPowers needs k >= 1".into());
                }
            }
            Self::Isometry3Example => {}
            Self::NearIsometry { k } => {
                if *k < 3 {
                    return fail(format!("NearIsometry needs k >= 3, got k={k}"));
                }
            }
            Self::KnapsackHyperplane { weights, .. } => {
                if weights.is_empty() {
                    return fail("KnapsackHyperplane needs at least one weight".into());
                }
                if weights.len() > cube::MAX_DIM {
                    return fail(format!(
                        "KnapsackHyperplane needs at most {} weights",
                        cube::MAX_DIM
                    ));
                }
            }
        }
        Ok(())
    }
}

fn epsilon_or_default(k: usize, epsilon: &Option<Rational>) -> Rational {
    epsilon.clone().unwrap_or_else(|| ratio(1, k as i64 + 1))
}

fn unit(dim: usize, i: usize) -> RatVector {
    (0..dim).map(|j| rat((i == j) as i64)).collect()
}

fn ones_on(dim: usize, range: std::ops::Range<usize>) -> RatVector {
    (0..dim).map(|j| rat(range.contains(&j) as i64)).collect()
}

fn scaled(v: RatVector, s: i64) -> RatVector {
    v.into_iter().map(|x| x * rat(s)).collect()
}

fn pow2(e: usize) -> u64 {
    1u64 << e
}

/// Builds the explicit map and the membership it claims.
pub fn build(spec: &ConstructionSpec) -> Result<(AffineMap, ClaimedResult)> {
    use ConstructionSpec::*;
    spec.validate()?;
    let claim = |t: u64, k: usize, n: usize, class: MapClass| ClaimedResult { t, k, n, class };
    let linear = |cols: Vec<RatVector>| -> Result<AffineMap> {
        Ok(AffineMap::linear(RatMatrix::from_columns(&cols)?))
    };
    Ok(match spec {
        DiagonalIsometry { k, j } => {
            let cols = (0..*k)
                .map(|i| scaled(unit(*k, i), if i < *j { 1 } else { -1 }))
                .collect();
            (
                linear(cols)?,
                claim(pow2(*j), *k, 2 * k, MapClass::Isometry),
            )
        }
        EpsilonContraction { k, j, epsilon } => {
            let eps = epsilon_or_default(*k, epsilon);
            let cols = (0..*k)
                .map(|i| {
                    vec![if i < *j {
                        Rational::zero()
                    } else {
                        -eps.clone()
                    }]
                })
                .collect();
            (
                linear(cols)?,
                claim(pow2(*j), *k, k + 1, MapClass::Contraction),
            )
        }
        AllOnes { k } => {
            let cols = vec![vec![Rational::one()]; *k];
            (
                linear(cols)?,
                claim(*k as u64 + 1, *k, k + 1, MapClass::General),
            )
        }
        TwoRow { k } => {
            let mut cols = vec![vec![rat(1), rat(1)]; k - 1];
            cols.push(vec![rat(0), rat(-1)]);
            (
                linear(cols)?,
                claim(2 * *k as u64 - 1, *k, k + 2, MapClass::General),
            )
        }
        HalfPlusOne { k } => {
            let m = k - 1;
            let mut cols: Vec<RatVector> = (0..m).map(|i| unit(m, i)).collect();
            cols.push(ones_on(m, 0..m));
            (
                linear(cols)?,
                claim(pow2(k - 1) + 1, *k, 2 * k - 1, MapClass::General),
            )
        }
        BinomialPlusOne { k, l, r } => {
            let cols = (0..*k)
                .map(|i| vec![if i < *l { ratio(1, *r as i64) } else { rat(2) }])
                .collect();
            let t = knapsack::binomial(*l as u64, *r as u64) + 1;
            (linear(cols)?, claim(t, *k, k + 1, MapClass::General))
        }
        TwoPowers { k, t, r, plus_one } => {
            let (k, t, r) = (*k, *t, *r);
            let mut cols: Vec<RatVector> = Vec::with_capacity(k);
            for i in 0..k {
                // 0-based: i < t identity, i == t the block of the first t - r, then negated
                let col = if i < t {
                    unit(k, i)
                } else if i == t {
                    ones_on(k, 0..t - r)
                } else if *plus_one && i == t + 1 {
                    ones_on(k, 0..t + 2)
                } else {
                    scaled(unit(k, i), -1)
                };
                cols.push(col);
            }
            let count = pow2(t) + pow2(r) + *plus_one as u64;
            (linear(cols)?, claim(count, k, 2 * k, MapClass::General))
        }
        SumOfPowers { k, exponents } => {
            let k = *k;
            let j = exponents.len() - 1;
            let top = exponents[j];
            let cols = (0..k)
                .map(|i| {
                    if i < top {
                        unit(k, i)
                    } else if i < k - j {
                        scaled(unit(k, i), -1)
                    } else {
                        // column k - delta (1-based) sums e_{t_delta + 1} .. e_{t_j}
                        let delta = k - 1 - i;
                        ones_on(k, exponents[delta]..top)
                    }
                })
                .collect();
            let count = exponents.iter().map(|&e| pow2(e)).sum();
            (linear(cols)?, claim(count, k, 2 * k, MapClass::General))
        }
        Isometry3Example => {
            let third = ratio(1, 3);
            let cols = [[1, 2, 2], [2, 1, -2], [2, -2, 1]]
                .iter()
                .map(|c| c.iter().map(|&x| rat(x) * &third).collect())
                .collect();
            (linear(cols)?, claim(3, 3, 6, MapClass::Isometry))
        }
        NearIsometry { k } => {
            let k = *k;
            let inv = ratio(1, k as i64 - 1);
            let cols = (0..k)
                .map(|i| {
                    let mut col: RatVector = (0..k)
                        .map(|j| if i == j { &inv - rat(1) } else { inv.clone() })
                        .collect();
                    col.extend(std::iter::repeat_n(inv.clone(), k - 2));
                    col
                })
                .collect();
            (
                linear(cols)?,
                claim(k as u64 + 1, k, 3 * k - 2, MapClass::Isometry),
            )
        }
        KnapsackHyperplane { weights, target } => {
            let inst = KnapsackInstance::new(weights.clone(), target.clone());
            let t = knapsack::count_knapsack(&inst)?;
            if t == 0 {
                return Err(Error::Constraint(
                    "KnapsackHyperplane needs at least one solution (empty intersection)".into(),
                ));
            }
            let map = knapsack_map(weights, target)?;
            let l = weights.len();
            (map, claim(t, l - 1, l, MapClass::General))
        }
    })
}

/// `sum p_i v_i = q` as a one-row affine map into `R^1`. With `D` the common
/// denominator of `p` and `q`, the row is `2D p` and the offset `-2D q`; the
/// image is then an even integer, so it lies in `{0, 1}` exactly when it is 0.
pub fn knapsack_map(weights: &[Rational], target: &Rational) -> Result<AffineMap> {
    use num_integer::Integer;
    let d = weights
        .iter()
        .fold(target.denom().clone(), |acc, x| acc.lcm(x.denom()));
    let s = Rational::from_integer(d * 2);
    let row: RatVector = weights.iter().map(|p| p * &s).collect();
    AffineMap::new(RatMatrix::from_rows(&[row])?, vec![-(target * &s)])
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct Verification {
    pub claim: ClaimedResult,
    pub recount: u64,
    pub certified_class: MapClass,
}

impl Verification {
    pub fn passed(&self) -> bool {
        self.recount == self.claim.t && self.certified_class.implies(self.claim.class)
    }
}

/// Builds, recounts and certifies the claimed class.
pub fn verify_detail(spec: &ConstructionSpec) -> Result<Verification> {
    let (map, claim) = build(spec)?;
    let recount = cube::count_points(&map, false)?.count;
    let certified_class = if claim.class == MapClass::General {
        MapClass::General
    } else {
        MapClass::certify(&map.linear)
    };
    Ok(Verification {
        claim,
        recount,
        certified_class,
    })
}

pub fn verify(spec: &ConstructionSpec) -> Result<bool> {
    Ok(verify_detail(spec)?.passed())
}

/// Every in-range linear construction with domain dimension exactly `k`
/// (knapsack hyperplanes are affine and listed separately).
pub fn gallery(k: usize) -> Vec<ConstructionSpec> {
    use ConstructionSpec::*;
    let mut out = Vec::new();
    if k == 0 {
        return out;
    }
    for j in 0..=k {
        out.push(DiagonalIsometry { k, j });
        out.push(EpsilonContraction {
            k,
            j,
            epsilon: None,
        });
    }
    out.push(AllOnes { k });
    out.push(TwoRow { k });
    if k >= 2 {
        out.push(HalfPlusOne { k });
    }
    for l in 1..=k {
        for r in 1..=l {
            out.push(BinomialPlusOne { k, l, r });
        }
    }
    for t in 1..k {
        for r in 0..t {
            out.push(TwoPowers {
                k,
                t,
                r,
                plus_one: false,
            });
            if t + 2 <= k {
                out.push(TwoPowers {
                    k,
                    t,
                    r,
                    plus_one: true,
                });
            }
        }
    }
    for exponents in increasing_lists(k) {
        out.push(SumOfPowers { k, exponents });
    }
    if k == 3 {
        out.push(Isometry3Example);
    }
    if k >= 3 {
        out.push(NearIsometry { k });
    }
    out
}

/// Strictly increasing lists `t_0 < ... < t_j` with `t_j <= k - j`.
fn increasing_lists(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for mask in 1u64..1 << (k + 1) {
        let list: Vec<usize> = (0..=k).filter(|i| mask >> i & 1 == 1).collect();
        let j = list.len() - 1;
        if j <= k && list[j] <= k - j {
            out.push(list);
        }
    }
    out
}

/// Knapsack hyperplanes for `l` items: all-ones weights for every target
/// with a solution, plus increasing weights `1..=l` for every reachable target.
pub fn knapsack_gallery(l: usize) -> Vec<ConstructionSpec> {
    let mut out = Vec::new();
    for q in 0..=l as i64 {
        out.push(ConstructionSpec::KnapsackHyperplane {
            weights: vec![rat(1); l],
            target: rat(q),
        });
    }
    let total = (l * (l + 1) / 2) as i64;
    for q in 0..=total {
        out.push(ConstructionSpec::KnapsackHyperplane {
            weights: (1..=l as i64).map(rat).collect(),
            target: rat(q),
        });
    }
    out
}

/// Appends `extra_domain` columns `(b, 0, ..., 0)` with
/// `b = sum_i |(L e_i)_1| + 2`, then `extra_image` zero rows.
pub fn embed(l: &RatMatrix, extra_domain: usize, extra_image: usize) -> RatMatrix {
    let b: Rational = l.row(0).iter().map(|x| x.abs()).sum::<Rational>() + rat(2);
    let mut cols = l.columns();
    let mut new_col = vec![Rational::zero(); l.rows()];
    new_col[0] = b;
    cols.extend(std::iter::repeat_n(new_col, extra_domain));
    for c in cols.iter_mut() {
        c.extend(std::iter::repeat_n(Rational::zero(), extra_image));
    }
    RatMatrix::from_columns(&cols).expect("columns share a length")
}

/// Block-diagonal sum `A (+) B`.
pub fn direct_sum(a: &RatMatrix, b: &RatMatrix) -> RatMatrix {
    let (m, k) = (a.rows() + b.rows(), a.cols() + b.cols());
    let mut out = RatMatrix::zeros(m, k);
    for r in 0..a.rows() {
        for c in 0..a.cols() {
            out.set(r, c, a.get(r, c).clone());
        }
    }
    for r in 0..b.rows() {
        for c in 0..b.cols() {
            out.set(a.rows() + r, a.cols() + c, b.get(r, c).clone());
        }
    }
    out
}

/// First nonzero cube point (in increasing bit order) whose image has no
/// positive coordinate, if any.
pub fn positivity_counterexample(l: &RatMatrix) -> Result<Option<CubePoint>> {
    let k = l.cols();
    if k > cube::MAX_DIM {
        return Err(Error::Capacity {
            what: "domain dimension k",
            limit: cube::MAX_DIM,
            got: k,
        });
    }
    let map = AffineMap::linear(l.clone());
    Ok((1..1u64 << k)
        .map(|b| CubePoint::new(b, k))
        .find(|&v| !map.image(v).iter().any(Signed::is_positive)))
}

/// Every nonzero cube point has an image with a positive coordinate.
pub fn has_positivity_property(l: &RatMatrix) -> Result<bool> {
    Ok(positivity_counterexample(l)?.is_none())
}

/// Appends the all-ones column; raises the count by exactly one when the
/// positivity property holds.
pub fn plus_one(l: &RatMatrix) -> Result<RatMatrix> {
    if let Some(v) = positivity_counterexample(l)? {
        return Err(Error::Precondition(format!(
            "positivity fails at v = {v}: no coordinate of Lv is positive"
        )));
    }
    let mut cols = l.columns();
    cols.push(vec![Rational::one(); l.rows()]);
    RatMatrix::from_columns(&cols)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count(l: &RatMatrix) -> u64 {
        cube::count_points(&AffineMap::linear(l.clone()), false)
            .unwrap()
            .count
    }

    #[test]
    fn all_ones_k4() {
        let (map, claim) = build(&ConstructionSpec::AllOnes { k: 4 }).unwrap();
        assert_eq!(map.linear, RatMatrix::from_i64(1, 4, &[1, 1, 1, 1]));
        assert_eq!(
            claim,
            ClaimedResult {
                t: 5,
                k: 4,
                n: 5,
                class: MapClass::General
            }
        );
    }

    #[test]
    fn sum_of_powers_eleven() {
        let spec = ConstructionSpec::SumOfPowers {
            k: 5,
            exponents: vec![0, 1, 3],
        };
        let (_, claim) = build(&spec).unwrap();
        assert_eq!(claim.t, 11);
        assert!(verify(&spec).unwrap());
        let thirteen = ConstructionSpec::SumOfPowers {
            k: 5,
            exponents: vec![0, 2, 3],
        };
        assert_eq!(verify_detail(&thirteen).unwrap().recount, 13);
    }

    #[test]
    fn isometry_example() {
        let (map, claim) = build(&ConstructionSpec::Isometry3Example).unwrap();
        assert_eq!((claim.t, claim.n, claim.class), (3, 6, MapClass::Isometry));
        let r = cube::count_intersection(&map, true).unwrap();
        let shown: Vec<String> = r.witnesses.unwrap().iter().map(|p| p.to_string()).collect();
        let mut shown = shown;
        shown.sort();
        assert_eq!(shown, ["000", "101", "110"]);
        assert!(verify(&ConstructionSpec::Isometry3Example).unwrap());
    }

    #[test]
    fn near_isometry_k4() {
        let spec = ConstructionSpec::NearIsometry { k: 4 };
        let (map, claim) = build(&spec).unwrap();
        assert_eq!((claim.t, claim.n), (5, 10));
        assert_eq!((map.linear.rows(), map.linear.cols()), (6, 4));
        assert!(linalg::is_isometry(&map.linear));
        assert!(verify(&spec).unwrap());
    }

    #[test]
    fn binomial_and_two_powers_claims() {
        let (_, c) = build(&ConstructionSpec::BinomialPlusOne { k: 4, l: 4, r: 2 }).unwrap();
        assert_eq!(c.t, 7);
        let spec = ConstructionSpec::TwoPowers {
            k: 4,
            t: 3,
            r: 1,
            plus_one: false,
        };
        assert_eq!(build(&spec).unwrap().1.t, 10);
        assert!(verify(&spec).unwrap());
    }

    #[test]
    fn class_constructions_verify() {
        assert!(verify(&ConstructionSpec::DiagonalIsometry { k: 3, j: 2 }).unwrap());
        let eps = ConstructionSpec::EpsilonContraction {
            k: 3,
            j: 1,
            epsilon: Some(ratio(1, 4)),
        };
        let v = verify_detail(&eps).unwrap();
        assert_eq!(v.recount, 2);
        assert_eq!(v.certified_class, MapClass::Contraction);
        assert!(v.passed());
    }

    #[test]
    fn constraint_violations_name_the_inequality() {
        let cases = [
            ConstructionSpec::HalfPlusOne { k: 1 },
            ConstructionSpec::BinomialPlusOne { k: 3, l: 4, r: 1 },
            ConstructionSpec::BinomialPlusOne { k: 3, l: 2, r: 0 },
            ConstructionSpec::TwoPowers {
                k: 4,
                t: 3,
                r: 1,
                plus_one: true,
            },
            ConstructionSpec::SumOfPowers {
                k: 5,
                exponents: vec![0, 1, 4],
            },
            ConstructionSpec::NearIsometry { k: 2 },
            ConstructionSpec::EpsilonContraction {
                k: 3,
                j: 0,
                epsilon: Some(ratio(1, 3)),
            },
        ];
        for spec in cases {
            match build(&spec) {
                Err(Error::Constraint(msg)) => assert!(msg.contains("needs"), "{msg}"),
                other => panic!("{spec:?} gave {other:?}"),
            }
        }
    }

    #[test]
    fn knapsack_hyperplane_counts_solutions() {
        let spec = ConstructionSpec::KnapsackHyperplane {
            weights: vec![rat(1), rat(2), rat(3)],
            target: rat(3),
        };
        let v = verify_detail(&spec).unwrap();
        assert_eq!((v.claim.t, v.claim.k, v.claim.n), (2, 2, 3));
        assert!(v.passed());
        // half-integer sums must not be mistaken for the value 1
        let frac = ConstructionSpec::KnapsackHyperplane {
            weights: vec![ratio(1, 2), ratio(1, 2), rat(1)],
            target: rat(1),
        };
        assert!(verify(&frac).unwrap());
        let none = ConstructionSpec::KnapsackHyperplane {
            weights: vec![rat(2)],
            target: rat(1),
        };
        assert!(matches!(build(&none), Err(Error::Constraint(_))));
    }

    #[test]
    fn embed_examples() {
        let l = RatMatrix::from_i64(1, 2, &[1, 1]);
        let e = embed(&l, 1, 0);
        assert_eq!(e, RatMatrix::from_i64(1, 3, &[1, 1, 4]));
        assert_eq!(count(&e), 3);
        let id = embed(&RatMatrix::identity(2), 0, 1);
        assert_eq!((id.rows(), id.cols()), (3, 2));
        assert_eq!(count(&id), 4);
        assert_eq!(count(&embed(&l, 2, 1)), 3);
    }

    #[test]
    fn direct_sum_examples() {
        let l = RatMatrix::from_i64(1, 2, &[1, 1]);
        assert_eq!(count(&direct_sum(&l, &RatMatrix::from_i64(1, 1, &[0]))), 6);
        assert_eq!(
            count(&direct_sum(
                &RatMatrix::identity(2),
                &RatMatrix::identity(3)
            )),
            32
        );
        assert_eq!(count(&direct_sum(&l, &l)), 9);
    }

    #[test]
    fn positivity_and_plus_one() {
        for k in 1..=6 {
            assert!(has_positivity_property(&RatMatrix::from_i64(1, k, &vec![1; k])).unwrap());
        }
        assert!(has_positivity_property(&RatMatrix::identity(3)).unwrap());
        assert!(!has_positivity_property(&RatMatrix::identity(3).neg()).unwrap());

        let p = plus_one(&RatMatrix::from_i64(1, 2, &[1, 1])).unwrap();
        assert_eq!(count(&p), 4);
        let (half, _) = build(&ConstructionSpec::HalfPlusOne { k: 4 }).unwrap();
        let p = plus_one(&half.linear).unwrap();
        assert_eq!(count(&p), 10);
        assert!(has_positivity_property(&p).unwrap());
        match plus_one(&RatMatrix::identity(2).neg()) {
            Err(Error::Precondition(msg)) => assert!(msg.contains("v = 10"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn spec_json_shape() {
        let spec = ConstructionSpec::EpsilonContraction {
            k: 3,
            j: 1,
            epsilon: Some(ratio(1, 4)),
        };
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(
            json,
            r#"{"variant":"EpsilonContraction","k":3,"j":1,"epsilon":"1/4"}"#
        );
        let back: ConstructionSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
        let parsed: ConstructionSpec =
            serde_json::from_str(r#"{"variant":"AllOnes","k":4}"#).unwrap();
        assert_eq!(parsed, ConstructionSpec::AllOnes { k: 4 });
    }

    #[test]
    fn gallery_is_valid_for_small_k() {
        for k in 1..=5 {
            for spec in gallery(k) {
                assert!(verify(&spec).unwrap(), "{}", spec.label());
            }
        }
    }
}
