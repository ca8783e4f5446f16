//! Randomized checks of the two gap theorems and scanners for the two
//! conjectures on the shape of the count sets.

use rayon::prelude::*;
use serde::Serialize;

use super::table::{achievable_table, AchievabilityTable, TableOptions};
use crate::constructions::MapClass;
use crate::cube::{self, AffineMap};
use crate::error::{Error, Result};
use crate::linalg::{self, RatMatrix};
use crate::sampling::{self, EntryDistribution};

/// Second largest count for `class` in dimension `k`: `3 * 2^(k-2)` for
/// general maps (1 when `k = 1`), `2^(k-1)` for contractions and isometries.
pub fn second_largest_bound(k: usize, class: MapClass) -> u64 {
    match class {
        MapClass::General => cube::general_second_largest(k),
        MapClass::Contraction | MapClass::Isometry => cube::contraction_second_largest(k),
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct GapViolation {
    pub index: usize,
    pub count: u64,
    #[serde(with = "linalg::matrix_text")]
    pub matrix: RatMatrix,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct GapReport {
    pub k: usize,
    pub class: MapClass,
    pub samples: usize,
    pub bound: u64,
    /// Number of sampled maps with the full count `2^k`.
    pub full: usize,
    /// Largest count below `2^k` seen.
    pub largest_proper: u64,
    pub violations: Vec<GapViolation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl GapReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Counts each map and reports every count strictly between the class bound
/// and `2^k`. Maps must be certified members of `class`.
pub fn check_gap_maps(k: usize, class: MapClass, maps: &[RatMatrix]) -> Result<GapReport> {
    if let Some(bad) = maps.iter().position(|l| l.cols() != k) {
        return Err(Error::DimensionMismatch(format!(
            "map {bad} has {} columns, expected {k}",
            maps[bad].cols()
        )));
    }
    if let Some(bad) = maps
        .iter()
        .position(|l| !MapClass::certify(l).implies(class))
    {
        return Err(Error::Precondition(format!(
            "map {bad} is not certified as {class}"
        )));
    }
    let counts: Vec<u64> = maps
        .par_iter()
        .map(|l| cube::count_points(&AffineMap::linear(l.clone()), false).map(|t| t.count))
        .collect::<Result<_>>()?;
    let full = 1u64 << k;
    let bound = second_largest_bound(k, class);
    let violations = counts
        .iter()
        .enumerate()
        .filter(|&(_, &t)| t != full && t > bound)
        .map(|(index, &count)| GapViolation {
            index,
            count,
            matrix: maps[index].clone(),
        })
        .collect();
    let note = (class == MapClass::General && k < 3)
        .then(|| format!("vacuous for k={k}: every count other than 2^k is at most {bound}"));
    Ok(GapReport {
        k,
        class,
        samples: maps.len(),
        bound,
        full: counts.iter().filter(|&&t| t == full).count(),
        largest_proper: counts
            .iter()
            .copied()
            .filter(|&t| t != full)
            .max()
            .unwrap_or(0),
        violations,
        note,
    })
}

/// Draws `samples` maps of `class` from a seeded generator and checks them.
pub fn check_gap_property(
    k: usize,
    class: MapClass,
    samples: usize,
    seed: u64,
    dist: EntryDistribution,
) -> Result<GapReport> {
    if k == 0 || k > cube::MAX_DIM {
        return Err(Error::Capacity {
            what: "domain dimension k",
            limit: cube::MAX_DIM,
            got: k,
        });
    }
    let mut rng = sampling::rng(seed);
    let maps: Vec<RatMatrix> = (0..samples)
        .map(|_| match class {
            MapClass::General => sampling::random_map(&mut rng, k, dist),
            MapClass::Contraction => sampling::random_contraction(&mut rng, k, dist),
            MapClass::Isometry => sampling::random_isometry(&mut rng, k),
        })
        .collect();
    check_gap_maps(k, class, &maps)
}

fn table_for_scan(k: usize, budget: Option<u64>) -> Result<AchievabilityTable> {
    let opts = TableOptions {
        budget,
        ..TableOptions::default()
    };
    achievable_table(k, MapClass::General, &opts)
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct LargeScan {
    pub k: usize,
    /// Realizable counts `t > 2^(k-1)`.
    pub found: Vec<u64>,
    /// `{2^(k-1) + 2^i : 0 <= i < k}`.
    pub conjectured: Vec<u64>,
    /// The extra value `35 * 2^(k-6)` when `k >= 6`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amendment: Option<u64>,
    /// Counts above `2^(k-1)` left undecided.
    pub unknown: Vec<u64>,
    /// Every count above `2^(k-1)` is decided.
    pub complete: bool,
    pub matches_conjecture: bool,
    pub matches_amended: bool,
}

/// Realizable general-class counts above `2^(k-1)`, compared with
/// `{2^(k-1) + 2^i}` and its amended form.
pub fn scan_conjecture_large(k: usize, budget: Option<u64>) -> Result<LargeScan> {
    let table = table_for_scan(k, budget)?;
    let half = 1u64 << (k - 1);
    let found: Vec<u64> = table
        .realizable()
        .into_iter()
        .filter(|&t| t > half)
        .collect();
    let unknown: Vec<u64> = table.unknown().into_iter().filter(|&t| t > half).collect();
    let conjectured: Vec<u64> = (0..k).map(|i| half + (1 << i)).collect();
    let amendment = (k >= 6).then(|| 35u64 << (k - 6));
    let mut amended = conjectured.clone();
    amended.extend(amendment);
    amended.sort_unstable();
    let complete = unknown.is_empty();
    // with undecided counts, agreement means nothing found contradicts the set
    let agrees = |set: &[u64]| {
        if complete {
            found == set
        } else {
            found.iter().all(|t| set.contains(t))
        }
    };
    Ok(LargeScan {
        k,
        matches_conjecture: agrees(&conjectured),
        matches_amended: agrees(&amended),
        found,
        conjectured,
        amendment,
        unknown,
        complete,
    })
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct SmallScan {
    pub k: usize,
    /// Upper end of the interval `[1, 2^(k-1) + 2]`, clipped to `2^k`.
    pub upper: u64,
    pub clipped: bool,
    pub realizable: Vec<u64>,
    /// Counts in the interval shown not to occur.
    pub missing: Vec<u64>,
    pub unknown: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl SmallScan {
    pub fn interval_covered(&self) -> bool {
        self.missing.is_empty() && self.unknown.is_empty()
    }
}

/// Which counts in `[1, 2^(k-1) + 2]` are realizable by general maps.
pub fn scan_conjecture_small(k: usize, budget: Option<u64>) -> Result<SmallScan> {
    let table = table_for_scan(k, budget)?;
    let full = 1u64 << k;
    let raw = (1u64 << (k - 1)) + 2;
    let upper = raw.min(full);
    let clipped = raw > full;
    let pick = |v: Vec<u64>| v.into_iter().filter(|&t| t <= upper).collect::<Vec<_>>();
    Ok(SmallScan {
        k,
        upper,
        clipped,
        realizable: pick(table.realizable()),
        missing: pick(table.excluded()),
        unknown: pick(table.unknown()),
        note: clipped.then(|| {
            format!("the interval [1, {raw}] exceeds 2^{k} = {full}; clipped to [1, {full}]")
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{build, ConstructionSpec};

    #[test]
    fn bounds() {
        assert_eq!(second_largest_bound(4, MapClass::General), 12);
        assert_eq!(second_largest_bound(3, MapClass::General), 6);
        assert_eq!(second_largest_bound(4, MapClass::Contraction), 8);
        assert_eq!(second_largest_bound(1, MapClass::General), 1);
    }

    #[test]
    fn all_ones_in_a_sample() {
        let (map, _) = build(&ConstructionSpec::AllOnes { k: 3 }).unwrap();
        let mut maps = vec![map.linear];
        let mut rng = sampling::rng(5);
        maps.extend((0..50).map(|_| sampling::random_map(&mut rng, 3, EntryDistribution::Uniform)));
        let r = check_gap_maps(3, MapClass::General, &maps).unwrap();
        assert!(r.passed());
        assert!(r.largest_proper >= 4);
    }

    #[test]
    fn small_k_is_vacuous() {
        let r =
            check_gap_property(2, MapClass::General, 20, 1, EntryDistribution::Uniform).unwrap();
        assert!(r.passed());
        assert!(r.note.unwrap().contains("vacuous"));
    }

    #[test]
    fn non_contractions_are_rejected() {
        let l = RatMatrix::from_i64(1, 2, &[1, 1]);
        assert!(check_gap_maps(2, MapClass::Contraction, &[l]).is_err());
    }

    #[test]
    fn scans_for_small_k() {
        let s = scan_conjecture_large(3, None).unwrap();
        assert_eq!(s.found, vec![5, 6, 8]);
        assert!(s.matches_conjecture);
        let s = scan_conjecture_large(2, None).unwrap();
        assert_eq!(s.found, vec![3, 4]);
        let s = scan_conjecture_small(1, None).unwrap();
        assert!(s.clipped);
        assert_eq!(s.upper, 2);
        assert!(s.interval_covered());
    }
}
