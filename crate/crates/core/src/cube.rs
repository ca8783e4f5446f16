//! Counting hypercube points mapped into the hypercube.
//!
//! For an affine map `v -> Lv + c` with `L` of shape `m x k`, the count is
//! `t = |{ v in {0,1}^k : Lv + c in {0,1}^m }|`. Points are visited in
//! reflected Gray-code order so each step adds or subtracts exactly one
//! column of `L`. When every entry fits, the map is scaled by the common
//! denominator `D` and the loop runs in machine integers, testing image
//! coordinates against `{0, D}`.

use std::fmt;
use std::ops::{AddAssign, SubAssign};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, RatMatrix, RatVector, Rational};

/// Largest domain dimension that can be enumerated.
pub const MAX_DIM: usize = 62;

/// Below this dimension the count runs on a single thread.
const PARALLEL_MIN_DIM: usize = 16;

/// Log2 of the number of Gray-code indices handled per work unit.
const CHUNK_BITS: usize = 12;

/// A vertex of `{0,1}^dim`; bit `i` holds coordinate `i + 1`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct CubePoint {
    pub bits: u64,
    pub dim: u8,
}

impl CubePoint {
    pub fn new(bits: u64, dim: usize) -> Self {
        assert!(dim <= MAX_DIM && (dim == 64 || bits >> dim == 0));
        Self {
            bits,
            dim: dim as u8,
        }
    }

    pub fn coordinate(&self, i: usize) -> bool {
        self.bits >> i & 1 == 1
    }

    pub fn weight(&self) -> u32 {
        self.bits.count_ones()
    }

    pub fn to_vector(&self) -> RatVector {
        (0..self.dim as usize)
            .map(|i| linalg::rat(self.coordinate(i) as i64))
            .collect()
    }
}

/// Coordinates written left to right, so `e1` in `H^2` prints as `10`.
impl fmt::Display for CubePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.dim as usize {
            f.write_str(if self.coordinate(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// `v -> Lv + c`. A zero offset is the linear case.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AffineMap {
    pub linear: RatMatrix,
    pub offset: RatVector,
}

impl AffineMap {
    pub fn linear(l: RatMatrix) -> Self {
        let offset = vec![Rational::zero(); l.rows()];
        Self { linear: l, offset }
    }

    pub fn new(l: RatMatrix, offset: RatVector) -> Result<Self> {
        if offset.len() != l.rows() {
            return Err(Error::DimensionMismatch(format!(
                "offset has length {} but the map has {} image coordinates",
                offset.len(),
                l.rows()
            )));
        }
        Ok(Self { linear: l, offset })
    }

    pub fn domain_dim(&self) -> usize {
        self.linear.cols()
    }

    pub fn image_dim(&self) -> usize {
        self.linear.rows()
    }

    pub fn is_linear(&self) -> bool {
        self.offset.iter().all(Zero::is_zero)
    }

    pub fn image(&self, v: CubePoint) -> RatVector {
        let mut w = self.offset.clone();
        for i in 0..self.domain_dim() {
            if v.coordinate(i) {
                for (r, x) in w.iter_mut().enumerate() {
                    *x += self.linear.get(r, i);
                }
            }
        }
        w
    }

    pub fn maps_into_cube(&self, v: CubePoint) -> bool {
        in_cube(&self.image(v))
    }
}

pub fn in_cube(w: &[Rational]) -> bool {
    w.iter().all(|x| x.is_zero() || x.is_one())
}

/// Membership in `{0, 1, -1}^m`.
pub fn in_extended_cube(w: &[Rational]) -> bool {
    w.iter().all(|x| x.is_zero() || x.is_one() || (-x).is_one())
}

/// Where a count sits relative to the two gap theorems.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum GapClass {
    /// `t = 2^k`.
    Full,
    /// `2^(k-1) < t <= 3 * 2^(k-2)`; only reachable by non-contractions.
    AtMostThreeQuarters,
    /// A contraction with `t <= 2^(k-1)`.
    AtMostHalf,
    /// A non-contraction with `t <= 2^(k-1)`.
    Small,
    /// Strictly between the applicable bound and `2^k`: a counterexample.
    Violation,
}

/// Second largest count achievable in dimension `k` by general maps.
pub fn general_second_largest(k: usize) -> u64 {
    match k {
        0 => 0,
        1 => 1,
        _ => 3 << (k - 2),
    }
}

/// Second largest count achievable in dimension `k` by contractions.
pub fn contraction_second_largest(k: usize) -> u64 {
    if k == 0 {
        0
    } else {
        1 << (k - 1)
    }
}

pub fn classify_gap(k: usize, t: u64, contraction: bool) -> GapClass {
    let full = 1u64 << k;
    let half = full >> 1;
    if t == full {
        GapClass::Full
    } else if contraction {
        if t <= contraction_second_largest(k) {
            GapClass::AtMostHalf
        } else {
            GapClass::Violation
        }
    } else if t <= half {
        GapClass::Small
    } else if t <= general_second_largest(k) {
        GapClass::AtMostThreeQuarters
    } else {
        GapClass::Violation
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct IntersectionReport {
    pub k: usize,
    pub m: usize,
    pub count: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witnesses: Option<Vec<CubePoint>>,
    pub is_isometry: bool,
    pub is_contraction: bool,
    pub gap_class: GapClass,
}

/// Result of the raw enumeration: the count and, if requested, the points
/// in increasing bit order.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Tally {
    pub count: u64,
    pub points: Option<Vec<u64>>,
}

/// Full report: count, optional witnesses, class certificates and gap class.
pub fn count_intersection(map: &AffineMap, collect_witnesses: bool) -> Result<IntersectionReport> {
    let tally = count_points(map, collect_witnesses)?;
    let k = map.domain_dim();
    let is_isometry = linalg::is_isometry(&map.linear);
    let is_contraction = is_isometry || linalg::is_contraction(&map.linear);
    Ok(IntersectionReport {
        k,
        m: map.image_dim(),
        count: tally.count,
        witnesses: tally
            .points
            .map(|p| p.into_iter().map(|b| CubePoint::new(b, k)).collect()),
        is_isometry,
        is_contraction,
        gap_class: classify_gap(k, tally.count, is_contraction),
    })
}

/// Gray-code enumeration, on the integer fast path when it applies.
pub fn count_points(map: &AffineMap, collect: bool) -> Result<Tally> {
    check_dim(map.domain_dim())?;
    match IntegerForm::<i64>::try_from_map(map) {
        Some(form) => Ok(form.count(collect)),
        None => match IntegerForm::<i128>::try_from_map(map) {
            Some(form) => Ok(form.count(collect)),
            None => count_points_rational(map, collect),
        },
    }
}

/// Gray-code enumeration in exact rational arithmetic.
pub fn count_points_rational(map: &AffineMap, collect: bool) -> Result<Tally> {
    let k = map.domain_dim();
    check_dim(k)?;
    let columns: Vec<Vec<(usize, Rational)>> = (0..k)
        .map(|c| {
            (0..map.image_dim())
                .filter(|&r| !map.linear.get(r, c).is_zero())
                .map(|r| (r, map.linear.get(r, c).clone()))
                .collect()
        })
        .collect();
    let ok = |x: &Rational| x.is_zero() || x.is_one();
    let run = |start: u64, len: u64| -> (u64, Vec<u64>) {
        let mut v = gray(start);
        let mut w = map.image(CubePoint::new(v, k));
        let mut bad = w.iter().filter(|x| !ok(x)).count();
        let mut hits = 0u64;
        let mut pts = Vec::new();
        for i in start..start + len {
            if i != start {
                let bit = i.trailing_zeros() as usize;
                v ^= 1 << bit;
                let adding = v >> bit & 1 == 1;
                for (r, a) in &columns[bit] {
                    let before = ok(&w[*r]);
                    if adding {
                        w[*r] += a;
                    } else {
                        w[*r] -= a;
                    }
                    let after = ok(&w[*r]);
                    bad = bad + before as usize - after as usize;
                }
            }
            if bad == 0 {
                hits += 1;
                if collect {
                    pts.push(v);
                }
            }
        }
        (hits, pts)
    };
    Ok(merge_chunks(k, collect, run))
}

/// Recomputes `Lv + c` from scratch at every point; reference path.
pub fn count_points_naive(map: &AffineMap, collect: bool) -> Result<Tally> {
    let k = map.domain_dim();
    check_dim(k)?;
    let mut count = 0;
    let mut pts = Vec::new();
    for bits in 0..1u64 << k {
        if map.maps_into_cube(CubePoint::new(bits, k)) {
            count += 1;
            if collect {
                pts.push(bits);
            }
        }
    }
    Ok(Tally {
        count,
        points: collect.then_some(pts),
    })
}

fn check_dim(k: usize) -> Result<()> {
    if k > MAX_DIM {
        return Err(Error::Capacity {
            what: "domain dimension k",
            limit: MAX_DIM,
            got: k,
        });
    }
    Ok(())
}

fn gray(i: u64) -> u64 {
    i ^ (i >> 1)
}

/// Splits `[0, 2^k)` into fixed chunks, runs them (in parallel for large
/// `k`) and concatenates in chunk order, so the result does not depend on
/// scheduling.
fn merge_chunks<F>(k: usize, collect: bool, run: F) -> Tally
where
    F: Fn(u64, u64) -> (u64, Vec<u64>) + Sync,
{
    let total = 1u64 << k;
    let chunk = 1u64 << CHUNK_BITS.min(k);
    let parts: Vec<(u64, Vec<u64>)> = if k >= PARALLEL_MIN_DIM {
        (0..total / chunk)
            .into_par_iter()
            .map(|c| run(c * chunk, chunk))
            .collect()
    } else {
        vec![run(0, total)]
    };
    let count = parts.iter().map(|p| p.0).sum();
    let points = collect.then(|| {
        let mut pts: Vec<u64> = parts.into_iter().flat_map(|p| p.1).collect();
        pts.sort_unstable();
        pts
    });
    Tally { count, points }
}

trait Word: Copy + Eq + Send + Sync + AddAssign + SubAssign + Zero {
    const MAX: i128;
    fn from_bigint(x: &BigInt) -> Option<Self>;
}

impl Word for i64 {
    const MAX: i128 = i64::MAX as i128;
    fn from_bigint(x: &BigInt) -> Option<Self> {
        x.to_i64()
    }
}

impl Word for i128 {
    const MAX: i128 = i128::MAX;
    fn from_bigint(x: &BigInt) -> Option<Self> {
        x.to_i128()
    }
}

/// The map scaled by the common denominator `D`, with sparse integer columns.
struct IntegerForm<T> {
    k: usize,
    columns: Vec<Vec<(usize, T)>>,
    offset: Vec<T>,
    scale: T,
}

impl<T: Word> IntegerForm<T> {
    fn try_from_map(map: &AffineMap) -> Option<Self> {
        let l = &map.linear;
        let d = map
            .offset
            .iter()
            .fold(l.denominator_lcm(), |acc, x| acc.lcm(x.denom()));
        let scaled = |x: &Rational| x.numer() * (&d / x.denom());
        // every partial image sum must stay representable
        let limit = BigInt::from(T::MAX / 4);
        for r in 0..l.rows() {
            let mut bound = scaled(&map.offset[r]).abs();
            for c in 0..l.cols() {
                bound += scaled(l.get(r, c)).abs();
            }
            if bound > limit || d > limit {
                return None;
            }
        }
        let columns = (0..l.cols())
            .map(|c| {
                (0..l.rows())
                    .filter(|&r| !l.get(r, c).is_zero())
                    .map(|r| Some((r, T::from_bigint(&scaled(l.get(r, c)))?)))
                    .collect::<Option<Vec<_>>>()
            })
            .collect::<Option<Vec<_>>>()?;
        let offset = map
            .offset
            .iter()
            .map(|x| T::from_bigint(&scaled(x)))
            .collect::<Option<Vec<_>>>()?;
        Some(Self {
            k: l.cols(),
            columns,
            offset,
            scale: T::from_bigint(&d)?,
        })
    }

    fn count(&self, collect: bool) -> Tally {
        let scale = self.scale;
        let ok = |x: T| x.is_zero() || x == scale;
        let run = |start: u64, len: u64| -> (u64, Vec<u64>) {
            let mut v = gray(start);
            let mut w = self.offset.clone();
            for (bit, col) in self.columns.iter().enumerate() {
                if v >> bit & 1 == 1 {
                    for &(r, a) in col {
                        w[r] += a;
                    }
                }
            }
            let mut bad = w.iter().filter(|&&x| !ok(x)).count();
            let mut hits = 0u64;
            let mut pts = Vec::new();
            for i in start..start + len {
                if i != start {
                    let bit = i.trailing_zeros() as usize;
                    v ^= 1 << bit;
                    let adding = v >> bit & 1 == 1;
                    for &(r, a) in &self.columns[bit] {
                        let before = ok(w[r]);
                        if adding {
                            w[r] += a;
                        } else {
                            w[r] -= a;
                        }
                        let after = ok(w[r]);
                        bad = bad + before as usize - after as usize;
                    }
                }
                if bad == 0 {
                    hits += 1;
                    if collect {
                        pts.push(v);
                    }
                }
            }
            (hits, pts)
        };
        merge_chunks(self.k, collect, run)
    }
}

/// Reduces an affine map with nonempty intersection to a linear one with the
/// same count: flip domain coordinates where a witness `v*` is 1 and reflect
/// image coordinates where `Lv* + c` is 1. The result is `R L S` with sign
/// matrices `R`, `S`.
pub fn linearize(map: &AffineMap) -> Result<AffineMap> {
    if map.is_linear() {
        return Ok(map.clone());
    }
    let k = map.domain_dim();
    check_dim(k)?;
    let anchor = (0..1u64 << k)
        .map(|b| CubePoint::new(b, k))
        .find(|&v| map.maps_into_cube(v))
        .ok_or(Error::NoIntersection)?;
    let image = map.image(anchor);
    let mut l = map.linear.clone();
    for (r, w) in image.iter().enumerate() {
        for c in 0..l.cols() {
            let flip = anchor.coordinate(c) != w.is_one();
            if flip {
                let v = -l.get(r, c).clone();
                l.set(r, c, v);
            }
        }
    }
    Ok(AffineMap::linear(l))
}
