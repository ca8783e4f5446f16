//! Realizability of prescribed traces `T = H^k ∩ L^-1 H^m`.
//!
//! A pattern is a subset of `{0,1}^k` stored as a bitset over the `2^k`
//! points (bit `v` is the point whose coordinate `i + 1` is bit `i` of `v`).
//! Affine sections reduce to linear ones by reflecting coordinates (see
//! [`crate::cube::linearize`]), so every pattern here contains the origin.

mod oracle;
mod scan;
mod table;

use std::fmt;

use crate::cube::CubePoint;
use crate::error::{Error, Result};

pub use oracle::{realizable, ColumnCertificate, Decider, Decision, Outcome, RealizabilityResult};
pub use scan::{
    check_gap_maps, check_gap_property, scan_conjecture_large, scan_conjecture_small,
    second_largest_bound, GapReport, GapViolation, LargeScan, SmallScan,
};
pub use table::{
    achievable_table, check_witness, construction_witnesses, exhaustive_search, AchievabilityTable,
    Exclusion, KnownWitness, Provenance, SearchSummary, SizeStats, Status, TableEntry,
    TableOptions, MAX_CONSTRUCTION_DIM, TABLE_VERSION,
};

/// Largest dimension for single-pattern queries (one `u64` bitset).
pub const MAX_QUERY_DIM: usize = 6;

/// Largest dimension for exhaustive tables.
pub const MAX_TABLE_DIM: usize = 5;

fn full_mask(k: usize) -> u64 {
    let n = 1u32 << k;
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Pattern {
    k: usize,
    bits: u64,
}

impl Pattern {
    pub fn new(k: usize, bits: u64) -> Result<Self> {
        if k == 0 || k > MAX_QUERY_DIM {
            return Err(Error::InvalidPattern(format!(
                "dimension must be in 1..={MAX_QUERY_DIM}, got {k}"
            )));
        }
        if bits & !full_mask(k) != 0 {
            return Err(Error::InvalidPattern(format!(
                "bitset has members beyond the {} points of H^{k}",
                1u32 << k
            )));
        }
        if bits & 1 == 0 {
            return Err(Error::InvalidPattern(
                "the origin must belong to the pattern".into(),
            ));
        }
        Ok(Self { k, bits })
    }

    pub fn from_points(k: usize, points: impl IntoIterator<Item = u64>) -> Result<Self> {
        let mut bits = 0u64;
        for p in points {
            if p >> k != 0 {
                return Err(Error::InvalidPattern(format!("point {p} is outside H^{k}")));
            }
            bits |= 1 << p;
        }
        Self::new(k, bits)
    }

    pub fn full(k: usize) -> Self {
        Self::new(k, full_mask(k)).expect("full cube is a valid pattern")
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn contains(&self, point: u64) -> bool {
        point < 64 && self.bits >> point & 1 == 1
    }

    pub fn points(&self) -> impl Iterator<Item = CubePoint> + '_ {
        (0..1u64 << self.k)
            .filter(|&p| self.contains(p))
            .map(|p| CubePoint::new(p, self.k))
    }

    /// Hex bitmask, `max(1, 2^k / 4)` digits, most significant first.
    pub fn to_hex(&self) -> String {
        let width = ((1usize << self.k) / 4).max(1);
        format!("{:0width$x}", self.bits)
    }

    pub fn from_hex(k: usize, text: &str) -> Result<Self> {
        let t = text.trim().trim_start_matches("0x");
        let bits = u64::from_str_radix(t, 16)
            .map_err(|_| Error::InvalidPattern(format!("`{text}` is not a hex bitmask")))?;
        Self::new(k, bits)
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pts: Vec<String> = self.points().map(|p| p.to_string()).collect();
        write!(f, "{{{}}}", pts.join(", "))
    }
}

/// All `k!` coordinate permutations, with byte lookup tables to permute a
/// whole bitset in `2^k / 8` steps.
pub struct Symmetry {
    k: usize,
    /// `point_maps[p][v]` is the image of point `v` under permutation `p`.
    point_maps: Vec<Vec<u8>>,
    /// `byte_tables[p][b * 256 + x]`: image of byte `b` of a bitset holding `x`.
    byte_tables: Vec<Vec<u64>>,
}

impl Symmetry {
    pub fn new(k: usize) -> Self {
        assert!((1..=MAX_QUERY_DIM).contains(&k));
        let n = 1usize << k;
        let bytes = n.div_ceil(8);
        let mut point_maps = Vec::new();
        let mut byte_tables = Vec::new();
        for perm in permutations(k) {
            let map: Vec<u8> = (0..n)
                .map(|v| {
                    (0..k)
                        .filter(|i| v >> i & 1 == 1)
                        .map(|i| 1u8 << perm[i])
                        .sum()
                })
                .collect();
            let mut table = vec![0u64; bytes * 256];
            for b in 0..bytes {
                for x in 0..256usize {
                    let mut out = 0u64;
                    for bit in 0..8 {
                        let v = b * 8 + bit;
                        if x >> bit & 1 == 1 && v < n {
                            out |= 1 << map[v];
                        }
                    }
                    table[b * 256 + x] = out;
                }
            }
            point_maps.push(map);
            byte_tables.push(table);
        }
        Self {
            k,
            point_maps,
            byte_tables,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn order(&self) -> usize {
        self.point_maps.len()
    }

    fn apply(&self, p: usize, bits: u64) -> u64 {
        let table = &self.byte_tables[p];
        let bytes = (1usize << self.k).div_ceil(8);
        let mut out = 0;
        for b in 0..bytes {
            out |= table[b * 256 + (bits >> (8 * b) & 0xff) as usize];
        }
        out
    }

    pub fn permute_point(&self, p: usize, v: u64) -> u64 {
        self.point_maps[p][v as usize] as u64
    }

    pub fn canonical_bits(&self, bits: u64) -> u64 {
        (0..self.order())
            .map(|p| self.apply(p, bits))
            .min()
            .unwrap_or(bits)
    }

    /// True when no permutation gives a smaller bitset.
    pub fn is_canonical(&self, bits: u64) -> bool {
        (1..self.order()).all(|p| self.apply(p, bits) >= bits)
    }

    pub fn orbit(&self, bits: u64) -> Vec<u64> {
        let mut out: Vec<u64> = (0..self.order()).map(|p| self.apply(p, bits)).collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Permutations of `0..k` in lexicographic order (identity first).
fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut cur: Vec<usize> = (0..k).collect();
    let mut out = vec![cur.clone()];
    loop {
        let Some(i) = (0..k.saturating_sub(1))
            .rev()
            .find(|&i| cur[i] < cur[i + 1])
        else {
            return out;
        };
        let j = (i + 1..k).rev().find(|&j| cur[j] > cur[i]).expect("exists");
        cur.swap(i, j);
        cur[i + 1..].reverse();
        out.push(cur.clone());
    }
}

/// Lexicographically smallest bitset in the orbit of `pattern` under the
/// coordinate permutations, which are the cube symmetries fixing the origin.
pub fn canonical_pattern(pattern: &Pattern) -> Pattern {
    let sym = Symmetry::new(pattern.k);
    Pattern {
        k: pattern.k,
        bits: sym.canonical_bits(pattern.bits),
    }
}
