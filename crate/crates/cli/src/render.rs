//! JSON, CSV and human renderings of every command's result.
//!
//! JSON objects written by the CLI carry a top-level `"version"`. CSV
//! columns are fixed per command and listed on each `csv` method.

use std::fmt::Write as _;

use clap::ValueEnum;
use cubeslice::constructions::{ClaimedResult, ConstructionSpec, MapClass};
use cubeslice::knapsack::KnapsackReport;
use cubeslice::linalg::{self, RatMatrix};
use cubeslice::patterns::{
    AchievabilityTable, GapReport, LargeScan, Outcome, RealizabilityResult, SmallScan,
};
use cubeslice::IntersectionReport;
use serde::Serialize;
use serde_json::{json, Value};

pub const OUTPUT_VERSION: u32 = 1;

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Human,
}

pub trait Render {
    fn json(&self) -> Value;
    fn csv(&self) -> String;
    fn human(&self) -> String;

    fn print(&self, fmt: Format) {
        match fmt {
            Format::Json => {
                let text = serde_json::to_string_pretty(&self.json()).expect("values serialize");
                println!("{text}");
            }
            Format::Csv => print!("{}", self.csv()),
            Format::Human => print!("{}", self.human()),
        }
    }
}

/// Serializes `value` and adds the output version.
fn versioned<T: Serialize>(value: &T) -> Value {
    let mut v = serde_json::to_value(value).expect("values serialize");
    if let Value::Object(map) = &mut v {
        map.insert("version".into(), json!(OUTPUT_VERSION));
    }
    v
}

fn csv_rows<I, R>(header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

fn list(v: &[u64]) -> String {
    let items: Vec<String> = v.iter().map(u64::to_string).collect();
    format!("{{{}}}", items.join(", "))
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn gap_name(r: &IntersectionReport) -> String {
    serde_json::to_value(r.gap_class)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default()
}

impl Render for IntersectionReport {
    fn json(&self) -> Value {
        versioned(self)
    }

    /// `k,m,count,is_isometry,is_contraction,gap_class,witnesses`
    fn csv(&self) -> String {
        let witnesses = self
            .witnesses
            .as_ref()
            .map(|w| {
                w.iter()
                    .map(|p| p.to_string())
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .unwrap_or_default();
        csv_rows(
            &[
                "k",
                "m",
                "count",
                "is_isometry",
                "is_contraction",
                "gap_class",
                "witnesses",
            ],
            [[
                self.k.to_string(),
                self.m.to_string(),
                self.count.to_string(),
                self.is_isometry.to_string(),
                self.is_contraction.to_string(),
                gap_name(self),
                witnesses,
            ]],
        )
    }

    fn human(&self) -> String {
        let mut out = format!("t = {}  (k = {}, m = {})\n", self.count, self.k, self.m);
        let _ = writeln!(
            out,
            "isometry: {}, contraction: {}, gap class: {}",
            yes_no(self.is_isometry),
            yes_no(self.is_contraction),
            gap_name(self)
        );
        if let Some(w) = &self.witnesses {
            let pts: Vec<String> = w.iter().map(|p| p.to_string()).collect();
            let _ = writeln!(out, "points: {}", pts.join(" "));
        }
        out
    }
}

impl Render for AchievabilityTable {
    fn json(&self) -> Value {
        serde_json::to_value(self).expect("tables serialize")
    }

    fn csv(&self) -> String {
        self.to_csv()
    }

    fn human(&self) -> String {
        self.to_human()
    }
}

impl Render for GapReport {
    fn json(&self) -> Value {
        versioned(self)
    }

    /// `k,class,samples,bound,full,largest_proper,violations`
    fn csv(&self) -> String {
        csv_rows(
            &[
                "k",
                "class",
                "samples",
                "bound",
                "full",
                "largest_proper",
                "violations",
            ],
            [[
                self.k.to_string(),
                self.class.to_string(),
                self.samples.to_string(),
                self.bound.to_string(),
                self.full.to_string(),
                self.largest_proper.to_string(),
                self.violations.len().to_string(),
            ]],
        )
    }

    fn human(&self) -> String {
        let mut out = format!(
            "{} maps, k = {}, class = {}: counts are 2^k or at most {}\n",
            self.samples, self.k, self.class, self.bound
        );
        let _ = writeln!(
            out,
            "full: {}, largest proper count: {}",
            self.full, self.largest_proper
        );
        if let Some(note) = &self.note {
            let _ = writeln!(out, "note: {note}");
        }
        if self.violations.is_empty() {
            out.push_str("no violations\n");
        }
        for v in &self.violations {
            let _ = writeln!(out, "VIOLATION: sample {} counts {}", v.index, v.count);
            out.push_str(&v.matrix.to_text());
        }
        out
    }
}

impl Render for RealizabilityResult {
    fn json(&self) -> Value {
        versioned(self)
    }

    /// `k,pattern,size,status,m`
    fn csv(&self) -> String {
        let (status, m) = match &self.outcome {
            Outcome::Realizable { m, .. } => ("realizable", m.to_string()),
            Outcome::NotRealizable { .. } => ("not-realizable", String::new()),
            Outcome::Unknown { .. } => ("unknown", String::new()),
        };
        csv_rows(
            &["k", "pattern", "size", "status", "m"],
            [[
                self.k.to_string(),
                self.pattern.to_hex(),
                self.size.to_string(),
                status.to_string(),
                m,
            ]],
        )
    }

    fn human(&self) -> String {
        let mut out = format!("T = {} ({} points)\n", self.pattern, self.size);
        match &self.outcome {
            Outcome::Realizable { m, witness } => {
                let _ = writeln!(out, "realizable; witness with m = {m}:");
                out.push_str(&witness.to_text());
            }
            Outcome::NotRealizable { certificate } => {
                let basis: Vec<String> = certificate.basis.iter().map(|p| p.to_string()).collect();
                let coeffs: Vec<String> = certificate
                    .forced_coefficients
                    .iter()
                    .map(linalg::format_rational)
                    .collect();
                let _ = writeln!(out, "not realizable");
                let _ = writeln!(out, "basis: {}", basis.join(" "));
                let _ = writeln!(
                    out,
                    "admissible columns ({}): {}",
                    certificate.admissible_columns.len(),
                    certificate.admissible_columns.join(" ")
                );
                let _ = writeln!(
                    out,
                    "forced point {} = ({}) in the basis stays in the cube under every admissible column",
                    certificate.forced_point,
                    coeffs.join(", ")
                );
            }
            Outcome::Unknown { budget } => {
                let _ = writeln!(out, "unknown after a budget of {budget}");
            }
        }
        out
    }
}

impl Render for LargeScan {
    fn json(&self) -> Value {
        versioned(self)
    }

    /// `k,t,found,conjectured`
    fn csv(&self) -> String {
        let mut ts: Vec<u64> = self
            .found
            .iter()
            .chain(&self.conjectured)
            .copied()
            .collect();
        ts.extend(self.amendment);
        ts.sort_unstable();
        ts.dedup();
        csv_rows(
            &["k", "t", "found", "conjectured"],
            ts.into_iter().map(|t| {
                [
                    self.k.to_string(),
                    t.to_string(),
                    self.found.contains(&t).to_string(),
                    (self.conjectured.contains(&t) || self.amendment == Some(t)).to_string(),
                ]
            }),
        )
    }

    fn human(&self) -> String {
        let mut out = format!("k = {}: realizable counts above 2^(k-1)\n", self.k);
        let _ = writeln!(out, "found:       {}", list(&self.found));
        let _ = writeln!(out, "conjectured: {}", list(&self.conjectured));
        if let Some(a) = self.amendment {
            let _ = writeln!(out, "amended adds {a}");
        }
        if !self.unknown.is_empty() {
            let _ = writeln!(out, "undecided:   {}", list(&self.unknown));
        }
        let _ = writeln!(
            out,
            "matches conjecture: {}, matches amended set: {}",
            yes_no(self.matches_conjecture),
            yes_no(self.matches_amended)
        );
        out
    }
}

impl Render for SmallScan {
    fn json(&self) -> Value {
        versioned(self)
    }

    /// `k,t,status`
    fn csv(&self) -> String {
        let status = |t: u64| {
            if self.realizable.contains(&t) {
                "realizable"
            } else if self.missing.contains(&t) {
                "missing"
            } else {
                "unknown"
            }
        };
        csv_rows(
            &["k", "t", "status"],
            (1..=self.upper).map(|t| [self.k.to_string(), t.to_string(), status(t).to_string()]),
        )
    }

    fn human(&self) -> String {
        let mut out = format!("k = {}: interval [1, {}]\n", self.k, self.upper);
        if let Some(note) = &self.note {
            let _ = writeln!(out, "note: {note}");
        }
        let _ = writeln!(out, "realizable: {}", list(&self.realizable));
        let _ = writeln!(out, "missing:    {}", list(&self.missing));
        if !self.unknown.is_empty() {
            let _ = writeln!(out, "undecided:  {}", list(&self.unknown));
        }
        out
    }
}

impl Render for KnapsackReport {
    fn json(&self) -> Value {
        versioned(self)
    }

    /// `count,ℓ,q`
    fn csv(&self) -> String {
        csv_rows(
            &["count", "ℓ", "q"],
            [[
                self.count.to_string(),
                self.items.to_string(),
                self.q.clone(),
            ]],
        )
    }

    fn human(&self) -> String {
        let mut out = format!(
            "{} solutions ({} items, q = {})\n",
            self.count, self.items, self.q
        );
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        out
    }
}

pub struct ConstructSummary {
    pub label: String,
    pub spec: ConstructionSpec,
    pub claim: ClaimedResult,
    pub recount: u64,
    pub certified_class: MapClass,
    pub passed: bool,
    pub matrix: RatMatrix,
}

impl ConstructSummary {
    /// The claim file written next to the matrix.
    pub fn sidecar(&self) -> Value {
        json!({
            "version": OUTPUT_VERSION,
            "label": self.label,
            "spec": self.spec,
            "claim": self.claim,
            "recount": self.recount,
            "certified_class": self.certified_class,
            "passed": self.passed,
        })
    }
}

impl Render for ConstructSummary {
    fn json(&self) -> Value {
        let mut v = self.sidecar();
        v["matrix"] = json!(self.matrix.to_text());
        v
    }

    /// `label,t,k,n,class,recount,certified_class,passed`
    fn csv(&self) -> String {
        csv_rows(
            &[
                "label",
                "t",
                "k",
                "n",
                "class",
                "recount",
                "certified_class",
                "passed",
            ],
            [[
                self.label.clone(),
                self.claim.t.to_string(),
                self.claim.k.to_string(),
                self.claim.n.to_string(),
                self.claim.class.to_string(),
                self.recount.to_string(),
                self.certified_class.to_string(),
                self.passed.to_string(),
            ]],
        )
    }

    fn human(&self) -> String {
        let mut out = format!(
            "{}: claims {} in H({}, {}) for class {}\n",
            self.label, self.claim.t, self.claim.n, self.claim.k, self.claim.class
        );
        let _ = writeln!(
            out,
            "recount {}, certified {}: {}",
            self.recount,
            self.certified_class,
            if self.passed { "verified" } else { "FAILED" }
        );
        out.push_str(&self.matrix.to_text());
        out
    }
}
