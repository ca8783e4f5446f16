//! `cubeslice`: count, construct and classify hypercube sections from the
//! command line.
//!
//! Exit status: 0 on success, 1 when a claim fails verification or a
//! theorem check finds a violation, 2 on malformed input.

mod render;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use cubeslice::constructions::{self, ConstructionSpec, MapClass};
use cubeslice::knapsack::{self, KnapsackInstance};
use cubeslice::linalg::{self, RatMatrix};
use cubeslice::patterns::{self, Pattern, TableOptions};
use cubeslice::sampling::EntryDistribution;
use cubeslice::store::{StoreLock, WitnessStore};
use cubeslice::{AffineMap, Error, ParseError};

use render::{Format, Render};

#[derive(Parser)]
#[command(name = "cubeslice", version, about = "Exact hypercube section counts")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    format: Format,

    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker threads (CUBESLICE_THREADS takes precedence when set).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Theorem {
    Gap,
    ContractionGap,
}

#[derive(Clone, Copy, ValueEnum)]
enum Conjecture {
    Large,
    Small,
}

#[derive(Subcommand)]
enum Command {
    /// Count the cube points a matrix (plus optional offset) maps into the cube.
    Count {
        matrix: PathBuf,
        /// File with one line of `m` rationals added to every image.
        #[arg(long)]
        offset: Option<PathBuf>,
        /// List the points in the intersection.
        #[arg(long)]
        witnesses: bool,
    },
    /// Achievable counts for dimension `k` and a map class.
    Table {
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value_t = ClassArg::General)]
        class: ClassArg,
        /// Raw bitsets examined by the exhaustive search, or `unlimited`.
        #[arg(long, default_value = "16777216", value_parser = parse_budget)]
        budget: Budget,
        /// Skip the exhaustive search.
        #[arg(long)]
        constructions_only: bool,
        /// Witness store to read from and merge new witnesses into.
        #[arg(long)]
        store: Option<PathBuf>,
    },
    /// Randomized check of a gap theorem.
    CheckTheorem {
        #[arg(value_enum)]
        theorem: Theorem,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value = "uniform")]
        distribution: EntryDistribution,
    },
    /// Build a construction from its JSON spec and verify its claim.
    Construct {
        /// Path to a JSON spec, `-` for stdin, or inline JSON.
        spec: String,
        /// Write `<out>.txt` (matrix), `<out>.claim.json` and, for affine
        /// maps, `<out>.offset.txt`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide whether a pattern is the trace of a linear map.
    Realizable {
        #[arg(long)]
        k: usize,
        /// Hex bitmask; bit `v` is the point with binary value `v`.
        pattern: String,
    },
    /// Compare the achievable counts with a conjecture.
    Scan {
        #[arg(value_enum)]
        which: Conjecture,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value = "16777216", value_parser = parse_budget)]
        budget: Budget,
    },
    /// Count 0/1 solutions of `sum p_i v_i = q`.
    Knapsack {
        /// Comma-separated rational weights.
        #[arg(allow_hyphen_values = true)]
        weights: String,
        #[arg(allow_hyphen_values = true)]
        q: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ClassArg {
    General,
    Contraction,
    Isometry,
}

impl From<ClassArg> for MapClass {
    fn from(c: ClassArg) -> Self {
        match c {
            ClassArg::General => MapClass::General,
            ClassArg::Contraction => MapClass::Contraction,
            ClassArg::Isometry => MapClass::Isometry,
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Budget(Option<u64>);

fn parse_budget(s: &str) -> Result<Budget, String> {
    if s == "unlimited" {
        return Ok(Budget(None));
    }
    s.parse::<u64>()
        .map(|b| Budget(Some(b)))
        .map_err(|_| format!("`{s}` is neither a count nor `unlimited`"))
}

/// Failure with its exit status.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

fn input_error(e: anyhow::Error) -> Failure {
    Failure { code: 2, error: e }
}

/// Library errors describing bad input exit with 2; failed verification
/// (including a stale witness store) with 1.
fn classify(e: anyhow::Error) -> Failure {
    let code = match e.downcast_ref::<Error>() {
        Some(Error::Store(_)) | Some(Error::NoIntersection) => 1,
        Some(_) => 2,
        None if e.downcast_ref::<ParseError>().is_some() => 2,
        None if e.downcast_ref::<std::io::Error>().is_some() => 2,
        None => 1,
    };
    Failure { code, error: e }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = std::env::var("CUBESLICE_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .or(cli.threads);
    if let Some(n) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("warning: could not size the thread pool: {e}");
        }
    }
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    if path == Path::new("-") {
        return std::io::read_to_string(std::io::stdin())
            .context("reading stdin")
            .map_err(input_error);
    }
    fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(input_error)
}

fn run(cli: &Cli) -> Result<u8, Failure> {
    let fmt = cli.format;
    match &cli.command {
        Command::Count {
            matrix,
            offset,
            witnesses,
        } => {
            let l = RatMatrix::parse(&read_text(matrix)?)
                .map_err(|e| input_error(anyhow!("{}: {e}", matrix.display())))?;
            let map = match offset {
                None => AffineMap::linear(l),
                Some(path) => {
                    let c = linalg::parse_vector(&read_text(path)?, l.rows())
                        .map_err(|e| input_error(anyhow!("{}: {e}", path.display())))?;
                    AffineMap::new(l, c).map_err(|e| classify(e.into()))?
                }
            };
            let report =
                cubeslice::count_intersection(&map, *witnesses).map_err(|e| classify(e.into()))?;
            report.print(fmt);
            Ok(0)
        }
        Command::Table {
            k,
            class,
            budget,
            constructions_only,
            store,
        } => {
            let class = MapClass::from(*class);
            let mut opts = TableOptions {
                budget: budget.0,
                constructions_only: *constructions_only,
                known: Vec::new(),
            };
            let Some(path) = store else {
                let table =
                    patterns::achievable_table(*k, class, &opts).map_err(|e| classify(e.into()))?;
                table.print(fmt);
                return Ok(0);
            };
            let _lock = StoreLock::acquire(path, Duration::from_secs(30))
                .map_err(|e| classify(e.into()))?;
            let mut ws = WitnessStore::load(path).map_err(|e| classify(e.into()))?;
            opts.known = ws.known(*k, class);
            let table =
                patterns::achievable_table(*k, class, &opts).map_err(|e| classify(e.into()))?;
            let added = ws.merge_table(&table).map_err(|e| classify(e.into()))?;
            ws.save(path).map_err(|e| classify(e.into()))?;
            eprintln!(
                "store {}: {added} new witness(es), {} total",
                path.display(),
                ws.entries.len()
            );
            table.print(fmt);
            Ok(0)
        }
        Command::CheckTheorem {
            theorem,
            k,
            samples,
            distribution,
        } => {
            let class = match theorem {
                Theorem::Gap => MapClass::General,
                Theorem::ContractionGap => MapClass::Contraction,
            };
            let report = patterns::check_gap_property(*k, class, *samples, cli.seed, *distribution)
                .map_err(|e| classify(e.into()))?;
            report.print(fmt);
            Ok(if report.passed() { 0 } else { 1 })
        }
        Command::Construct { spec, out } => construct(spec, out.as_deref(), fmt),
        Command::Realizable { k, pattern } => {
            let p = Pattern::from_hex(*k, pattern).map_err(|e| classify(e.into()))?;
            let result = patterns::realizable(&p).map_err(|e| classify(e.into()))?;
            result.print(fmt);
            Ok(0)
        }
        Command::Scan { which, k, budget } => {
            match which {
                Conjecture::Large => patterns::scan_conjecture_large(*k, budget.0)
                    .map_err(|e| classify(e.into()))?
                    .print(fmt),
                Conjecture::Small => patterns::scan_conjecture_small(*k, budget.0)
                    .map_err(|e| classify(e.into()))?
                    .print(fmt),
            }
            Ok(0)
        }
        Command::Knapsack { weights, q } => {
            let inst = parse_knapsack(weights, q).map_err(input_error)?;
            let report = knapsack::report(&inst).map_err(|e| classify(e.into()))?;
            report.print(fmt);
            Ok(0)
        }
    }
}

fn parse_knapsack(weights: &str, q: &str) -> anyhow::Result<KnapsackInstance> {
    let mut parsed = Vec::new();
    if !weights.trim().is_empty() {
        let mut column = 1;
        for token in weights.split(',') {
            let r = linalg::parse_rational(token.trim())
                .map_err(|m| ParseError::new(1, column, format!("weights: {m}")))?;
            parsed.push(r);
            column += token.chars().count() + 1;
        }
    }
    let target = linalg::parse_rational(q.trim()).map_err(|m| anyhow!("target: {m}"))?;
    Ok(KnapsackInstance::new(parsed, target))
}

fn construct(spec_arg: &str, out: Option<&Path>, fmt: Format) -> Result<u8, Failure> {
    let text = if spec_arg.trim_start().starts_with('{') {
        spec_arg.to_string()
    } else {
        read_text(Path::new(spec_arg))?
    };
    let spec: ConstructionSpec = serde_json::from_str(&text).map_err(|e| {
        input_error(anyhow!(
            "spec line {}, column {}: {e}",
            e.line(),
            e.column()
        ))
    })?;
    let (map, claim) = constructions::build(&spec).map_err(|e| classify(e.into()))?;
    let verification = constructions::verify_detail(&spec).map_err(|e| classify(e.into()))?;
    let summary = render::ConstructSummary {
        label: spec.label(),
        spec: spec.clone(),
        claim,
        recount: verification.recount,
        certified_class: verification.certified_class,
        passed: verification.passed(),
        matrix: map.linear.clone(),
    };
    if let Some(prefix) = out {
        let with_ext = |ext: &str| {
            let mut s = prefix.as_os_str().to_owned();
            s.push(ext);
            PathBuf::from(s)
        };
        let write = |path: PathBuf, body: String| {
            fs::write(&path, body)
                .with_context(|| format!("writing {}", path.display()))
                .map_err(classify)
        };
        write(with_ext(".txt"), map.linear.to_text())?;
        if !map.is_linear() {
            let c: Vec<String> = map.offset.iter().map(linalg::format_rational).collect();
            write(with_ext(".offset.txt"), c.join(" ") + "\n")?;
        }
        let sidecar = serde_json::to_string_pretty(&summary.sidecar())
            .context("serializing claim")
            .map_err(classify)?;
        write(with_ext(".claim.json"), sidecar + "\n")?;
    }
    summary.print(fmt);
    if summary.passed {
        Ok(0)
    } else {
        Err(Failure {
            code: 1,
            error: anyhow!(
                "{} claims t = {} ({}) but recounts to {} ({})",
                summary.label,
                summary.claim.t,
                summary.claim.class,
                summary.recount,
                summary.certified_class
            ),
        })
    }
}
