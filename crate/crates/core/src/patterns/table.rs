//! Achievability tables: which counts `t ∈ [1, 2^k]` occur for a map class.
//!
//! Three sources are merged. Constructions and their closure under direct
//! sums, embeddings and the plus-one step give verified witnesses for every
//! class. For the general class with `k <= 5`, an exhaustive pass over
//! canonical patterns decides every remaining `t`. The gap theorems exclude
//! the counts strictly between the second largest value and `2^k`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::oracle::{trace, Decider};
use super::{Symmetry, MAX_TABLE_DIM};
use crate::constructions::{self, direct_sum, embed, plus_one, MapClass};
use crate::cube::{self, AffineMap};
use crate::error::{Error, Result};
use crate::linalg::{self, RatMatrix};

pub const TABLE_VERSION: u32 = 1;

/// Largest `k` for construction-only tables.
pub const MAX_CONSTRUCTION_DIM: usize = 8;

/// Raw masks handled per parallel work unit.
const SEARCH_CHUNK: u64 = 1 << 14;

/// Where a witness came from.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Provenance {
    Construction { name: String },
    Search { pattern: String },
}

impl Provenance {
    pub fn label(&self) -> String {
        match self {
            Provenance::Construction { name } => name.clone(),
            Provenance::Search { .. } => "search".into(),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Exclusion {
    /// `t` lies strictly between the second largest count and `2^k`.
    GapTheorem { bound: u64 },
    /// No canonical pattern of size `t` is realizable.
    ExhaustiveSearch { patterns: u64 },
}

impl Exclusion {
    pub fn label(&self) -> String {
        match self {
            Exclusion::GapTheorem { bound } => format!("gap-theorem (bound {bound})"),
            Exclusion::ExhaustiveSearch { patterns } => {
                format!("exhaustive-search ({patterns} canonical patterns)")
            }
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Status {
    Realizable {
        provenance: Provenance,
        m: usize,
        #[serde(with = "linalg::matrix_text")]
        witness: RatMatrix,
    },
    Excluded {
        reason: Exclusion,
    },
    Unknown {
        #[serde(skip_serializing_if = "Option::is_none")]
        budget: Option<u64>,
    },
}

impl Status {
    pub fn name(&self) -> &'static str {
        match self {
            Status::Realizable { .. } => "realizable",
            Status::Excluded { .. } => "excluded",
            Status::Unknown { .. } => "unknown",
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct TableEntry {
    pub t: u64,
    #[serde(flatten)]
    pub status: Status,
}

/// A verified map with a known count, from a construction, a search or the store.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct KnownWitness {
    pub t: u64,
    pub matrix: RatMatrix,
    pub provenance: Provenance,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default, Serialize)]
pub struct SizeStats {
    /// Canonical patterns of this size.
    pub patterns: u64,
    pub realizable: u64,
    /// Smallest realizable canonical bitset of this size.
    #[serde(skip)]
    pub first_realizable: Option<u64>,
}

impl SizeStats {
    fn merge(self, other: SizeStats) -> SizeStats {
        SizeStats {
            patterns: self.patterns + other.patterns,
            realizable: self.realizable + other.realizable,
            first_realizable: match (self.first_realizable, other.first_realizable) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            },
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct SearchSummary {
    pub k: usize,
    /// Raw bitsets containing the origin examined.
    pub examined: u64,
    pub total: u64,
    pub complete: bool,
    /// Index `s` holds the statistics for patterns of size `s`.
    pub by_size: Vec<SizeStats>,
}

impl SearchSummary {
    pub fn canonical_patterns(&self) -> u64 {
        self.by_size.iter().map(|s| s.patterns).sum()
    }
}

/// Decides every canonical pattern among the first `budget` bitsets that
/// contain the origin (all of them when `budget` is `None` or large enough).
pub fn exhaustive_search(k: usize, budget: Option<u64>) -> Result<SearchSummary> {
    if k == 0 || k > MAX_TABLE_DIM {
        return Err(Error::Capacity {
            what: "exhaustive search dimension k",
            limit: MAX_TABLE_DIM,
            got: k,
        });
    }
    let n = 1usize << k;
    let total = 1u64 << (n - 1);
    let examined = budget.map_or(total, |b| b.min(total));
    let sym = Symmetry::new(k);
    let chunks = examined.div_ceil(SEARCH_CHUNK);
    let empty = vec![SizeStats::default(); n + 1];
    let by_size = (0..chunks)
        .into_par_iter()
        .map_init(
            || Decider::new(k),
            |decider, chunk| {
                let mut stats = vec![SizeStats::default(); n + 1];
                let end = ((chunk + 1) * SEARCH_CHUNK).min(examined);
                for x in chunk * SEARCH_CHUNK..end {
                    let bits = x << 1 | 1;
                    if !sym.is_canonical(bits) {
                        continue;
                    }
                    let s = &mut stats[bits.count_ones() as usize];
                    s.patterns += 1;
                    if decider.decide(bits).is_realizable() {
                        s.realizable += 1;
                        s.first_realizable.get_or_insert(bits);
                    }
                }
                stats
            },
        )
        .reduce(
            || empty.clone(),
            |a, b| a.into_iter().zip(b).map(|(x, y)| x.merge(y)).collect(),
        );
    Ok(SearchSummary {
        k,
        examined,
        total,
        complete: examined == total,
        by_size,
    })
}

#[derive(Clone, Debug)]
struct Candidate {
    matrix: RatMatrix,
    name: String,
    positive: bool,
}

/// One witness per count at each dimension, plus one with the positivity
/// property when such a witness is known (only those feed the plus-one step).
#[derive(Default)]
struct Level {
    first: BTreeMap<u64, Candidate>,
    positive: BTreeMap<u64, Candidate>,
}

impl Level {
    fn offer(&mut self, t: u64, c: Candidate) {
        if c.positive && !self.positive.contains_key(&t) {
            self.positive.insert(t, c.clone());
        }
        self.first.entry(t).or_insert(c);
    }
}

fn positive(l: &RatMatrix) -> bool {
    constructions::has_positivity_property(l).unwrap_or(false)
}

/// Verified witnesses for every count reachable in dimension `k` from the
/// construction gallery by direct sums, embeddings and (general class) the
/// plus-one step. Each returned map is recounted and certified for `class`.
pub fn construction_witnesses(k: usize, class: MapClass) -> Result<BTreeMap<u64, KnownWitness>> {
    if k == 0 || k > MAX_CONSTRUCTION_DIM {
        return Err(Error::Capacity {
            what: "construction table dimension k",
            limit: MAX_CONSTRUCTION_DIM,
            got: k,
        });
    }
    let general = class == MapClass::General;
    let mut levels: Vec<Level> = vec![Level::default()];
    for d in 1..=k {
        let mut level = Level::default();
        for spec in constructions::gallery(d) {
            let (map, claim) = constructions::build(&spec)?;
            if !claim.class.implies(class) {
                continue;
            }
            let l = map.linear;
            let positive = general && positive(&l);
            level.offer(
                claim.t,
                Candidate {
                    matrix: l,
                    name: spec.label(),
                    positive,
                },
            );
        }
        for a in 1..d {
            let b = d - a;
            if a > b {
                break;
            }
            for (&t1, c1) in &levels[a].first {
                for (&t2, c2) in &levels[b].first {
                    level.offer(
                        t1 * t2,
                        Candidate {
                            matrix: direct_sum(&c1.matrix, &c2.matrix),
                            name: format!("DirectSum({}, {})", c1.name, c2.name),
                            positive: false,
                        },
                    );
                }
            }
            if general {
                for (&t1, c1) in &levels[a].positive {
                    for (&t2, c2) in &levels[b].positive {
                        level.offer(
                            t1 * t2,
                            Candidate {
                                matrix: direct_sum(&c1.matrix, &c2.matrix),
                                name: format!("DirectSum({}, {})", c1.name, c2.name),
                                positive: true,
                            },
                        );
                    }
                }
            }
        }
        if general && d >= 2 {
            for (&t, c) in &levels[d - 1].first {
                level.offer(
                    t,
                    Candidate {
                        matrix: embed(&c.matrix, 1, 0),
                        name: format!("Embed({})", c.name),
                        positive: c.positive,
                    },
                );
            }
            for (&t, c) in &levels[d - 1].positive {
                let matrix = plus_one(&c.matrix)?;
                let positive = positive(&matrix);
                level.offer(
                    t + 1,
                    Candidate {
                        matrix,
                        name: format!("PlusOne({})", c.name),
                        positive,
                    },
                );
            }
        }
        levels.push(level);
    }
    let mut out = BTreeMap::new();
    for (t, c) in std::mem::take(&mut levels[k].first) {
        let w = KnownWitness {
            t,
            matrix: c.matrix,
            provenance: Provenance::Construction { name: c.name },
        };
        check_witness(k, class, &w)?;
        out.insert(t, w);
    }
    Ok(out)
}

/// Recounts `w` and certifies its class.
pub fn check_witness(k: usize, class: MapClass, w: &KnownWitness) -> Result<()> {
    if w.matrix.cols() != k {
        return Err(Error::DimensionMismatch(format!(
            "witness for t = {} has {} columns, expected {k}",
            w.t,
            w.matrix.cols()
        )));
    }
    let count = cube::count_points(&AffineMap::linear(w.matrix.clone()), false)?.count;
    if count != w.t {
        return Err(Error::Constraint(format!(
            "witness `{}` claims t = {} but recounts to {count}",
            w.provenance.label(),
            w.t
        )));
    }
    if !MapClass::certify(&w.matrix).implies(class) {
        return Err(Error::Constraint(format!(
            "witness `{}` for t = {} is not certified as {class}",
            w.provenance.label(),
            w.t
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, Default)]
pub struct TableOptions {
    /// Cap on raw bitsets examined by the exhaustive search; `None` is unbounded.
    pub budget: Option<u64>,
    /// Skip the exhaustive search even where it applies.
    pub constructions_only: bool,
    /// Previously verified witnesses (re-verified before use).
    pub known: Vec<KnownWitness>,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct AchievabilityTable {
    pub version: u32,
    pub k: usize,
    pub class: MapClass,
    pub entries: Vec<TableEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub search: Option<SearchSummary>,
}

pub fn achievable_table(
    k: usize,
    class: MapClass,
    opts: &TableOptions,
) -> Result<AchievabilityTable> {
    let mut witnesses = construction_witnesses(k, class)?;
    for w in &opts.known {
        if w.matrix.cols() == k && !witnesses.contains_key(&w.t) {
            check_witness(k, class, w)?;
            witnesses.insert(w.t, w.clone());
        }
    }
    let full = 1u64 << k;
    let bound = super::second_largest_bound(k, class);

    let search = if class == MapClass::General && k <= MAX_TABLE_DIM && !opts.constructions_only {
        Some(exhaustive_search(k, opts.budget)?)
    } else {
        None
    };
    if let Some(s) = &search {
        let mut decider = Decider::new(k);
        for (size, stats) in s.by_size.iter().enumerate() {
            let t = size as u64;
            let Some(bits) = stats.first_realizable else {
                continue;
            };
            if witnesses.contains_key(&t) {
                continue;
            }
            let matrix = decider.witness(bits)?.ok_or_else(|| {
                Error::Constraint(format!("search pattern {bits:x} lost its witness"))
            })?;
            if trace(&matrix)? != bits {
                return Err(Error::Constraint(format!(
                    "search witness for pattern {bits:x} has the wrong trace"
                )));
            }
            let w = KnownWitness {
                t,
                matrix,
                provenance: Provenance::Search {
                    pattern: super::Pattern::new(k, bits)?.to_hex(),
                },
            };
            check_witness(k, class, &w)?;
            witnesses.insert(t, w);
        }
    }

    let mut entries = Vec::with_capacity(full as usize);
    for t in 1..=full {
        let gap = t > bound && t < full;
        let status = match witnesses.remove(&t) {
            Some(w) if gap => {
                return Err(Error::Constraint(format!(
                    "t = {t} has a verified witness `{}` but lies in the gap above {bound}",
                    w.provenance.label()
                )))
            }
            Some(w) => Status::Realizable {
                provenance: w.provenance,
                m: w.matrix.rows(),
                witness: w.matrix,
            },
            None if gap => Status::Excluded {
                reason: Exclusion::GapTheorem { bound },
            },
            None => match &search {
                Some(s) if s.complete => Status::Excluded {
                    reason: Exclusion::ExhaustiveSearch {
                        patterns: s.by_size[t as usize].patterns,
                    },
                },
                Some(s) => Status::Unknown {
                    budget: Some(s.examined),
                },
                None => Status::Unknown { budget: None },
            },
        };
        entries.push(TableEntry { t, status });
    }
    let table = AchievabilityTable {
        version: TABLE_VERSION,
        k,
        class,
        entries,
        search,
    };
    table.check_invariants()?;
    Ok(table)
}

impl AchievabilityTable {
    pub fn status(&self, t: u64) -> Option<&Status> {
        self.entries.iter().find(|e| e.t == t).map(|e| &e.status)
    }

    fn with_status(&self, name: &str) -> Vec<u64> {
        self.entries
            .iter()
            .filter(|e| e.status.name() == name)
            .map(|e| e.t)
            .collect()
    }

    pub fn realizable(&self) -> Vec<u64> {
        self.with_status("realizable")
    }

    pub fn excluded(&self) -> Vec<u64> {
        self.with_status("excluded")
    }

    pub fn unknown(&self) -> Vec<u64> {
        self.with_status("unknown")
    }

    pub fn is_decided(&self) -> bool {
        self.unknown().is_empty()
    }

    /// Structural checks: one entry per `t`, `2^k` realizable, the gap
    /// excluded, and search statistics agreeing with the realizable column.
    pub fn check_invariants(&self) -> Result<()> {
        let full = 1u64 << self.k;
        let bound = super::second_largest_bound(self.k, self.class);
        let fail = |msg: String| Err(Error::Constraint(msg));
        if self.entries.len() as u64 != full || self.entries.iter().zip(1..).any(|(e, t)| e.t != t)
        {
            return fail("entries must list t = 1..2^k in order".into());
        }
        if !matches!(self.status(full), Some(Status::Realizable { .. })) {
            return fail(format!("t = {full} must be realizable"));
        }
        for e in &self.entries {
            let in_gap = e.t > bound && e.t < full;
            if in_gap && !matches!(e.status, Status::Excluded { .. }) {
                return fail(format!("t = {} lies in the gap but is not excluded", e.t));
            }
        }
        if let Some(s) = &self.search {
            for e in &self.entries {
                let found = s.by_size[e.t as usize].realizable > 0;
                match e.status {
                    Status::Excluded { .. } if found => {
                        return fail(format!("t = {} is excluded but a pattern was found", e.t))
                    }
                    Status::Realizable { .. } if s.complete && !found => {
                        return fail(format!(
                            "t = {} has a witness but the complete search found none",
                            e.t
                        ))
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }

    /// Fixed columns: `k,class,t,status,source,m`. `source` is the
    /// provenance of a witness or the reason for an exclusion.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["k", "class", "t", "status", "source", "m"])
            .expect("in-memory write");
        for e in &self.entries {
            let (source, m) = match &e.status {
                Status::Realizable { provenance, m, .. } => (provenance.label(), m.to_string()),
                Status::Excluded { reason } => (reason.label(), String::new()),
                Status::Unknown { budget } => (
                    budget.map_or("constructions only".into(), |b| format!("budget {b}")),
                    String::new(),
                ),
            };
            w.write_record([
                self.k.to_string(),
                self.class.to_string(),
                e.t.to_string(),
                e.status.name().to_string(),
                source,
                m,
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }

    pub fn to_human(&self) -> String {
        let mut out = format!("k = {}, class = {}\n", self.k, self.class);
        for e in &self.entries {
            let detail = match &e.status {
                Status::Realizable { provenance, m, .. } => {
                    format!("m = {m}, {}", provenance.label())
                }
                Status::Excluded { reason } => reason.label(),
                Status::Unknown { budget: Some(b) } => format!("search stopped after {b} patterns"),
                Status::Unknown { budget: None } => "no construction known".into(),
            };
            let _ = writeln!(out, "{:>4}  {:<10}  {}", e.t, e.status.name(), detail);
        }
        let list = |v: Vec<u64>| v.iter().map(u64::to_string).collect::<Vec<_>>().join(", ");
        let _ = writeln!(out, "realizable: {{{}}}", list(self.realizable()));
        let _ = writeln!(out, "excluded:   {{{}}}", list(self.excluded()));
        let unknown = self.unknown();
        if !unknown.is_empty() {
            let _ = writeln!(out, "unknown:    {{{}}}", list(unknown));
        }
        if let Some(s) = &self.search {
            let _ = writeln!(
                out,
                "search: {} of {} bitsets, {} canonical patterns{}",
                s.examined,
                s.total,
                s.canonical_patterns(),
                if s.complete { "" } else { " (incomplete)" }
            );
        }
        out
    }
}
