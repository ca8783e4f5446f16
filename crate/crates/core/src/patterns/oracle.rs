//! The column method.
//!
//! Every row `f` of a realizing map sends each point of `T` into `{0, 1}`.
//! Fix a maximal independent `B ⊆ T`; then `f` is pinned on `span(B)` by the
//! vector `c = (f(b))_b ∈ {0,1}^B`, and `f(v) = <coeff(v), c>` there. The
//! admissible columns `A(T)` are the `c` keeping all of `T` in `{0, 1}`.
//! Points of `span(B)` outside `T` must each be pushed out by some admissible
//! row; points outside `span(B)` are pushed out by large multiples of the
//! dual functionals of a complement basis. Using all of `A(T)` at once is
//! optimal, so the decision is a single pass.
//!
//! Coordinates are kept as integers: with `P = [B | complement]` and `D` the
//! common denominator of `P^-1`, the vector `y = D P^-1 v` is integral and
//! `<coeff(v), c> ∈ {0,1}` becomes `sum_{i in c} y_i ∈ {0, D}`.

use std::collections::HashMap;
use std::sync::Arc;

use num_traits::{ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use super::Pattern;
use crate::cube::{self, AffineMap, CubePoint};
use crate::error::{Error, Result};
use crate::linalg::{self, rat, RatMatrix, RatVector, Rational};

/// Per-basis lookup tables.
struct BasisTable {
    rank: usize,
    denom: i64,
    /// `P^-1`; rows `0..rank` are the coefficient functionals of `B`.
    inverse: RatMatrix,
    /// Points of `H^k` lying in `span(B)`.
    in_span: u64,
    /// `ok[v]` has bit `c` set when `<coeff(v), c> ∈ {0, 1}`.
    ok: Vec<u64>,
}

impl BasisTable {
    fn build(k: usize, basis: &[u64]) -> Result<Self> {
        let mut cols: Vec<RatVector> = basis
            .iter()
            .map(|&b| CubePoint::new(b, k).to_vector())
            .collect();
        if !cols.is_empty() && linalg::rank(&RatMatrix::from_columns(&cols)?) != cols.len() {
            return Err(Error::Precondition(
                "basis points are linearly dependent".into(),
            ));
        }
        let rank = basis.len();
        for i in 0..k {
            if cols.len() == k {
                break;
            }
            let mut trial = cols.clone();
            trial.push(CubePoint::new(1 << i, k).to_vector());
            if linalg::rank(&RatMatrix::from_columns(&trial)?) == trial.len() {
                cols = trial;
            }
        }
        let p = RatMatrix::from_columns(&cols)?;
        let inverse = linalg::inverse(&p)?.expect("completed basis is invertible");
        let d = inverse.denominator_lcm();
        let scaled = inverse.scale(&Rational::from_integer(d.clone()));
        let denom = d.to_i64().expect("small denominators");
        let q: Vec<i64> = scaled
            .entries()
            .iter()
            .map(|x| x.to_integer().to_i64().expect("small entries"))
            .collect();

        let n = 1usize << k;
        let mut y = vec![vec![0i64; k]; n];
        for v in 1..n {
            let low = v.trailing_zeros() as usize;
            let prev = v & (v - 1);
            for r in 0..k {
                y[v][r] = y[prev][r] + q[r * k + low];
            }
        }
        let mut in_span = 0u64;
        let mut ok = vec![0u64; n];
        let mut sums = vec![0i64; 1 << rank];
        for v in 0..n {
            if y[v][rank..].iter().all(|&x| x == 0) {
                in_span |= 1 << v;
            }
            let mut mask = 1u64;
            for c in 1usize..1 << rank {
                sums[c] = sums[c & (c - 1)] + y[v][c.trailing_zeros() as usize];
                if sums[c] == 0 || sums[c] == denom {
                    mask |= 1 << c;
                }
            }
            ok[v] = mask;
        }
        Ok(Self {
            rank,
            denom,
            inverse,
            in_span,
            ok,
        })
    }

    fn admissible(&self, bits: u64) -> u64 {
        let mut a = u64::MAX >> (64 - (1u32 << self.rank));
        let mut rest = bits;
        while rest != 0 {
            a &= self.ok[rest.trailing_zeros() as usize];
            rest &= rest - 1;
        }
        a
    }
}

/// Outcome of the decision alone, before any witness is built.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Decision {
    Realizable,
    /// Every admissible column keeps `forced` in `{0, 1}`.
    NotRealizable {
        forced: u64,
    },
}

impl Decision {
    pub fn is_realizable(self) -> bool {
        self == Decision::Realizable
    }
}

fn points_as_strings<S: Serializer>(points: &[CubePoint], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(points.iter().map(|p| p.to_string()))
}

fn point_as_string<S: Serializer>(p: &CubePoint, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&p.to_string())
}

/// Why a pattern has no realizing map: the point `forced` lies in the span
/// of `basis`, is not in the pattern, and every admissible column evaluates
/// to 0 or 1 on it.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct ColumnCertificate {
    #[serde(serialize_with = "points_as_strings")]
    pub basis: Vec<CubePoint>,
    /// Each admissible column as a 0/1 string indexed like `basis`.
    pub admissible_columns: Vec<String>,
    #[serde(serialize_with = "point_as_string")]
    pub forced_point: CubePoint,
    /// Coordinates of the forced point in `basis`.
    #[serde(with = "linalg::rational_string::vec")]
    pub forced_coefficients: Vec<Rational>,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Outcome {
    Realizable {
        m: usize,
        #[serde(with = "linalg::matrix_text")]
        witness: RatMatrix,
    },
    NotRealizable {
        certificate: ColumnCertificate,
    },
    Unknown {
        budget: u64,
    },
}

fn pattern_hex<S: Serializer>(p: &Pattern, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&p.to_hex())
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct RealizabilityResult {
    pub k: usize,
    #[serde(serialize_with = "pattern_hex")]
    pub pattern: Pattern,
    pub size: usize,
    #[serde(flatten)]
    pub outcome: Outcome,
}

impl RealizabilityResult {
    pub fn is_realizable(&self) -> bool {
        matches!(self.outcome, Outcome::Realizable { .. })
    }

    pub fn witness(&self) -> Option<&RatMatrix> {
        match &self.outcome {
            Outcome::Realizable { witness, .. } => Some(witness),
            _ => None,
        }
    }
}

/// Decides patterns of one dimension, caching the tables of every basis it
/// meets. Not shared between threads; build one per worker.
pub struct Decider {
    k: usize,
    cache: HashMap<u64, Arc<BasisTable>>,
}

fn basis_key(basis: &[u64]) -> u64 {
    basis
        .iter()
        .enumerate()
        .fold(0, |acc, (i, &b)| acc | (b + 1) << (7 * i))
}

impl Decider {
    pub fn new(k: usize) -> Self {
        assert!((1..=super::MAX_QUERY_DIM).contains(&k));
        Self {
            k,
            cache: HashMap::new(),
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    fn table(&mut self, basis: &[u64]) -> Result<Arc<BasisTable>> {
        let key = basis_key(basis);
        if let Some(t) = self.cache.get(&key) {
            return Ok(t.clone());
        }
        let t = Arc::new(BasisTable::build(self.k, basis)?);
        self.cache.insert(key, t.clone());
        Ok(t)
    }

    /// Greedy independent subset of `bits`, scanning points in increasing order.
    pub fn greedy_basis(&mut self, bits: u64) -> Vec<u64> {
        let mut basis = Vec::new();
        let mut span = 1u64;
        let mut rest = bits & !1;
        while rest != 0 {
            let v = rest.trailing_zeros() as u64;
            rest &= rest - 1;
            if span >> v & 1 == 0 {
                basis.push(v);
                span = self
                    .table(&basis)
                    .expect("greedy picks are independent")
                    .in_span;
            }
        }
        basis
    }

    pub fn decide(&mut self, bits: u64) -> Decision {
        let basis = self.greedy_basis(bits);
        let table = self.table(&basis).expect("greedy basis is valid");
        Self::decide_in(&table, bits)
    }

    /// Decision with a caller-chosen basis, which must be a maximal
    /// independent subset of the pattern.
    pub fn decide_with_basis(&mut self, bits: u64, basis: &[u64]) -> Result<Decision> {
        if basis.iter().any(|&b| b >= 64 || bits >> b & 1 == 0) {
            return Err(Error::Precondition(
                "basis points must belong to the pattern".into(),
            ));
        }
        let table = self.table(basis)?;
        if bits & !table.in_span != 0 {
            return Err(Error::Precondition(
                "basis does not span the pattern".into(),
            ));
        }
        Ok(Self::decide_in(&table, bits))
    }

    fn decide_in(table: &BasisTable, bits: u64) -> Decision {
        let a = table.admissible(bits);
        let mut forced = table.in_span & !bits;
        while forced != 0 {
            let v = forced.trailing_zeros() as usize;
            forced &= forced - 1;
            if table.ok[v] & a == a {
                return Decision::NotRealizable { forced: v as u64 };
            }
        }
        Decision::Realizable
    }

    pub fn certificate(&mut self, bits: u64, forced: u64) -> ColumnCertificate {
        let k = self.k;
        let basis = self.greedy_basis(bits);
        let table = self.table(&basis).expect("greedy basis is valid");
        let a = table.admissible(bits);
        let r = table.rank;
        let admissible_columns = (0..1u64 << r)
            .filter(|c| a >> c & 1 == 1)
            .map(|c| {
                (0..r)
                    .map(|i| if c >> i & 1 == 1 { '1' } else { '0' })
                    .collect()
            })
            .collect();
        let v = CubePoint::new(forced, k).to_vector();
        let coeffs = table.inverse.apply(&v).expect("square inverse");
        ColumnCertificate {
            basis: basis.iter().map(|&b| CubePoint::new(b, k)).collect(),
            admissible_columns,
            forced_point: CubePoint::new(forced, k),
            forced_coefficients: coeffs[..r].to_vec(),
        }
    }

    /// A map whose trace is exactly `bits`, or `None` if there is none.
    pub fn witness(&mut self, bits: u64) -> Result<Option<RatMatrix>> {
        let k = self.k;
        if bits == super::full_mask(k) {
            return Ok(Some(RatMatrix::identity(k)));
        }
        let basis = self.greedy_basis(bits);
        let table = self.table(&basis)?;
        if !Self::decide_in(&table, bits).is_realizable() {
            return Ok(None);
        }
        let r = table.rank;
        let a = table.admissible(bits);
        let inv = &table.inverse;
        let column_rows: Vec<RatVector> = (1..1u64 << r)
            .filter(|c| a >> c & 1 == 1)
            .map(|c| {
                (0..k)
                    .map(|j| {
                        (0..r)
                            .filter(|i| c >> i & 1 == 1)
                            .map(|i| inv.get(i, j).clone())
                            .sum()
                    })
                    .collect()
            })
            .collect();
        let mut factor = 2i64;
        for _ in 0..48 {
            let mut rows = column_rows.clone();
            for j in 0..k - r {
                let s = rat(factor * (j as i64 + 1));
                rows.push(inv.row(r + j).iter().map(|x| x * &s).collect());
            }
            if rows.is_empty() {
                rows.push(vec![Rational::zero(); k]);
            }
            if trace_of_rows(&rows)? == bits {
                return Ok(Some(prune(rows, bits)?));
            }
            factor *= 2;
        }
        Err(Error::Precondition(format!(
            "witness reconstruction did not converge for pattern {:x} (denominator {})",
            bits, table.denom
        )))
    }

    pub fn realize(&mut self, pattern: &Pattern) -> Result<RealizabilityResult> {
        if pattern.k() != self.k {
            return Err(Error::DimensionMismatch(format!(
                "pattern in dimension {} given to a decider for dimension {}",
                pattern.k(),
                self.k
            )));
        }
        let bits = pattern.bits();
        let outcome = match self.decide(bits) {
            Decision::NotRealizable { forced } => Outcome::NotRealizable {
                certificate: self.certificate(bits, forced),
            },
            Decision::Realizable => {
                let witness = self.witness(bits)?.expect("decided realizable");
                Outcome::Realizable {
                    m: witness.rows(),
                    witness,
                }
            }
        };
        Ok(RealizabilityResult {
            k: self.k,
            pattern: *pattern,
            size: pattern.len(),
            outcome,
        })
    }
}

/// Bitset of the points sent into the hypercube by `l`.
pub(crate) fn trace(l: &RatMatrix) -> Result<u64> {
    let tally = cube::count_points(&AffineMap::linear(l.clone()), true)?;
    Ok(tally
        .points
        .unwrap_or_default()
        .into_iter()
        .fold(0, |acc, p| acc | 1 << p))
}

fn trace_of_rows(rows: &[RatVector]) -> Result<u64> {
    trace(&RatMatrix::from_rows(rows)?)
}

/// Drops rows one at a time, front to back, while the trace is unchanged.
fn prune(mut rows: Vec<RatVector>, bits: u64) -> Result<RatMatrix> {
    let mut i = 0;
    while i < rows.len() && rows.len() > 1 {
        let mut trial = rows.clone();
        trial.remove(i);
        if trace_of_rows(&trial)? == bits {
            rows = trial;
        } else {
            i += 1;
        }
    }
    RatMatrix::from_rows(&rows)
}

/// Decides one pattern and, when it is realizable, reconstructs and
/// re-verifies a witness.
pub fn realizable(pattern: &Pattern) -> Result<RealizabilityResult> {
    Decider::new(pattern.k()).realize(pattern)
}
