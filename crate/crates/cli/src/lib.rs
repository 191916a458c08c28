//! Command implementations behind the `zerosum` binary.
//!
//! Every command produces a [`Report`] and an [`Outcome`]; the binary prints
//! the report as JSON and exits with the outcome's code.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use zerosum_core::decomposition::{self, DecompError, Phi};
use zerosum_core::engine::{self, EngineConfig, EngineError, DEFAULT_CELL_BUDGET};
use zerosum_core::group::DEFAULT_AUT_BOUND;
use zerosum_core::lemmas::{self, LemmaError, LemmaKind, SweepReport};
use zerosum_core::search::{
    self, ExtremalReport, InvariantKind, InvariantQuery, SearchConfig, SearchError, SearchStats,
    ShardSpec,
};
use zerosum_core::structures::{self, ClauseMatch, StructureError};
use zerosum_core::{GroupSpec, Sequence};

pub const REPORT_VERSION: u32 = 1;

/// Overrides the default node budget when set.
pub const NODE_BUDGET_ENV: &str = "ZEROSUM_MAX_NODES";

#[derive(Debug, Parser)]
#[command(name = "zerosum", version, about = "Zero-sum invariants and extremal sequences over C_n + C_mn")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Include wall-clock timing in the report.
    #[arg(long, global = true)]
    pub timing: bool,
    #[command(flatten)]
    pub budget: BudgetArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BudgetArgs {
    /// Maximum search nodes (default 2e9, or $ZEROSUM_MAX_NODES).
    #[arg(long, global = true)]
    pub max_nodes: Option<u64>,
    /// Wall-clock budget per search, in seconds.
    #[arg(long, global = true)]
    pub max_seconds: Option<f64>,
    /// Maximum reach-table cells.
    #[arg(long, global = true, default_value_t = DEFAULT_CELL_BUDGET)]
    pub max_cells: u64,
    /// Maximum automorphism-group order used for symmetry reduction.
    #[arg(long, global = true, default_value_t = DEFAULT_AUT_BOUND)]
    pub aut_bound: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Davenport,
    Eta,
    S,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute D(G), eta(G) or s_{<=ell}(G) by exhaustive search.
    Invariant {
        #[arg(long)]
        group: GroupSpec,
        #[arg(long, value_enum)]
        kind: KindArg,
        /// Length bound for `--kind s` (defaults to exp(G)).
        #[arg(long)]
        ell: Option<usize>,
    },
    /// Decide whether a sequence has a nontrivial zero-sum of bounded length.
    Check {
        #[arg(long)]
        group: GroupSpec,
        #[arg(long)]
        seq: String,
        #[arg(long)]
        maxlen: usize,
    },
    /// Enumerate extremal sequences at `k`, one representative per orbit.
    Enumerate {
        #[arg(long)]
        group: GroupSpec,
        #[arg(long)]
        k: u32,
        /// Run one shard, `i/N` or `i/N@depth`.
        #[arg(long)]
        shard: Option<ShardSpec>,
        /// Split into this many shards and run them in parallel.
        #[arg(long, default_value_t = 1)]
        jobs: u32,
        /// Explore every multiset and merge orbits at the leaves.
        #[arg(long)]
        no_prefix_pruning: bool,
    },
    /// Enumerate and require every orbit to match the conjectured structure.
    VerifyConjecture {
        #[arg(long)]
        group: GroupSpec,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        shard: Option<ShardSpec>,
        #[arg(long, default_value_t = 1)]
        jobs: u32,
    },
    /// Sweep one residue lemma over a range of moduli.
    Lemma {
        #[arg(value_enum)]
        lemma: LemmaArg,
        /// Inclusive range of moduli `a..b`.
        #[arg(long)]
        range: ModulusRange,
    },
    /// Run the block-decomposition claim checks on one extremal sequence.
    Claims {
        #[arg(long)]
        group: GroupSpec,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        seq: String,
        /// Check every block decomposition instead of the greedy one.
        #[arg(long)]
        all_decompositions: bool,
        /// Admit k in [1, n-1] instead of [2, n-2].
        #[arg(long)]
        boundary: bool,
        /// Cap on enumerated decompositions.
        #[arg(long, default_value_t = 100_000)]
        limit: usize,
    },
    /// Merge shard reports produced by `enumerate` or `verify-conjecture`.
    Merge {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LemmaArg {
    Zs3,
    Xset,
    Length3,
    Pairsum,
    Claim1,
}

impl From<LemmaArg> for LemmaKind {
    fn from(l: LemmaArg) -> Self {
        match l {
            LemmaArg::Zs3 => LemmaKind::Zs3,
            LemmaArg::Xset => LemmaKind::Xset,
            LemmaArg::Length3 => LemmaKind::Length3,
            LemmaArg::Pairsum => LemmaKind::Pairsum,
            LemmaArg::Claim1 => LemmaKind::Claim1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModulusRange {
    pub lo: u32,
    pub hi: u32,
}

impl std::str::FromStr for ModulusRange {
    type Err = String;

    /// `a..b` (inclusive), `a..=b`, or a single `a`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("expected a..b, got {s:?}");
        let (lo, hi) = match s.split_once("..") {
            Some((a, b)) => (a, b.strip_prefix('=').unwrap_or(b)),
            None => (s, s),
        };
        let lo: u32 = lo.trim().parse().map_err(|_| bad())?;
        let hi: u32 = hi.trim().parse().map_err(|_| bad())?;
        if lo < 2 || hi < lo {
            return Err(format!("range {s:?} must satisfy 2 <= a <= b"));
        }
        Ok(ModulusRange { lo, hi })
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 2,
            CliError::Budget(_) => 3,
        }
    }
}

impl From<SearchError> for CliError {
    fn from(e: SearchError) -> Self {
        match e {
            SearchError::NodeBudget(_) | SearchError::TimeBudget(_) => CliError::Budget(e.to_string()),
            SearchError::Engine(EngineError::BudgetExceeded { .. }) => CliError::Budget(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<LemmaError> for CliError {
    fn from(e: LemmaError) -> Self {
        match e {
            LemmaError::Search(s) => s.into(),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<DecompError> for CliError {
    fn from(e: DecompError) -> Self {
        match e {
            DecompError::TooMany(_) => CliError::Budget(e.to_string()),
            DecompError::Engine(inner) => inner.into(),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<StructureError> for CliError {
    fn from(e: StructureError) -> Self {
        CliError::Usage(e.to_string())
    }
}

/// Whether the command's predicate held.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Pass => 0,
            Outcome::Fail => 1,
        }
    }
}

/// A replayable failure: the sequence literal (or parameters) and the
/// predicate that failed on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub predicate: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sequence: Option<String>,
    #[serde(skip_serializing_if = "Value::is_null", default)]
    pub params: Value,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub seconds: f64,
}

/// Machine-readable result of one command. Field order is fixed and maps are
/// key-sorted, so identical inputs give byte-identical JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: u32,
    pub command: String,
    pub spec: Option<String>,
    pub parameters: Value,
    pub results: Value,
    pub counterexamples: Vec<Counterexample>,
    pub shard: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub timing: Option<Timing>,
}

impl Report {
    fn new(command: &str, spec: Option<GroupSpec>, parameters: Value) -> Self {
        Report {
            version: REPORT_VERSION,
            command: command.to_string(),
            spec: spec.map(|s| s.to_string()),
            parameters,
            results: Value::Null,
            counterexamples: Vec::new(),
            shard: None,
            timing: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn search_config(budget: &BudgetArgs, shard: Option<ShardSpec>) -> SearchConfig {
    let env_nodes = std::env::var(NODE_BUDGET_ENV).ok().and_then(|v| v.parse().ok());
    let mut cfg = SearchConfig {
        aut_bound: budget.aut_bound,
        shard,
        max_time: budget.max_seconds.map(Duration::from_secs_f64),
        ..SearchConfig::default()
    };
    if let Some(n) = budget.max_nodes.or(env_nodes) {
        cfg.max_nodes = n;
    }
    cfg
}

fn engine_config(budget: &BudgetArgs) -> EngineConfig {
    EngineConfig {
        cell_budget: budget.max_cells,
        ..EngineConfig::default()
    }
}

fn parse_seq(text: &str, spec: GroupSpec) -> Result<Sequence, CliError> {
    Sequence::parse(text, spec).map_err(|e| CliError::Usage(format!("--seq: {e}")))
}

/// Runs a parsed command line.
pub fn run(cli: &Cli) -> Result<(Report, Outcome), CliError> {
    let start = Instant::now();
    let (mut report, outcome) = match &cli.command {
        Command::Invariant { group, kind, ell } => invariant(*group, *kind, *ell, &cli.budget)?,
        Command::Check { group, seq, maxlen } => check(*group, seq, *maxlen, &cli.budget)?,
        Command::Enumerate {
            group,
            k,
            shard,
            jobs,
            no_prefix_pruning,
        } => {
            let mut cfg = search_config(&cli.budget, *shard);
            cfg.prefix_pruning = !no_prefix_pruning;
            let ext = enumerate(*group, *k, &cfg, *jobs)?;
            (extremal_report("enumerate", &ext, false), Outcome::Pass)
        }
        Command::VerifyConjecture {
            group,
            k,
            shard,
            jobs,
        } => {
            let cfg = search_config(&cli.budget, *shard);
            let ext = enumerate(*group, *k, &cfg, *jobs)?;
            let report = extremal_report("verify-conjecture", &ext, true);
            let outcome = if report.counterexamples.is_empty() {
                Outcome::Pass
            } else {
                Outcome::Fail
            };
            (report, outcome)
        }
        Command::Lemma { lemma, range } => lemma_sweep((*lemma).into(), *range)?,
        Command::Claims {
            group,
            k,
            seq,
            all_decompositions,
            boundary,
            limit,
        } => claims(*group, *k, seq, *all_decompositions, *boundary, *limit)?,
        Command::Merge { inputs } => merge(inputs)?,
    };
    if cli.timing {
        report.timing = Some(Timing {
            seconds: start.elapsed().as_secs_f64(),
        });
    }
    Ok((report, outcome))
}

fn invariant(
    spec: GroupSpec,
    kind: KindArg,
    ell: Option<usize>,
    budget: &BudgetArgs,
) -> Result<(Report, Outcome), CliError> {
    let kind = match kind {
        KindArg::Davenport => InvariantKind::Davenport,
        KindArg::Eta => InvariantKind::Eta,
        KindArg::S => InvariantKind::SLeq,
    };
    if kind != InvariantKind::SLeq && ell.is_some() {
        return Err(CliError::Usage("--ell only applies to --kind s".into()));
    }
    let ell = match kind {
        InvariantKind::SLeq => Some(ell.unwrap_or(spec.exponent() as usize)),
        _ => None,
    };
    let query = InvariantQuery { spec, kind, ell };
    let value = query.run(&search_config(budget, None))?;
    let formula = query.formula();
    let agree = formula.is_none_or(|f| f == value);
    let mut report = Report::new("invariant", Some(spec), json!({ "kind": kind, "ell": ell }));
    report.results = json!({ "value": value, "formula": formula, "agree": agree });
    if !agree {
        report.counterexamples.push(Counterexample {
            predicate: "formula".into(),
            sequence: None,
            params: json!({ "kind": kind, "ell": ell }),
            detail: format!("search gives {value}, formula gives {}", formula.unwrap_or(0)),
        });
    }
    Ok((report, if agree { Outcome::Pass } else { Outcome::Fail }))
}

fn check(
    spec: GroupSpec,
    text: &str,
    maxlen: usize,
    budget: &BudgetArgs,
) -> Result<(Report, Outcome), CliError> {
    let s = parse_seq(text, spec)?;
    let cfg = engine_config(budget);
    let ell = maxlen.min(s.len());
    let found = engine::has_zero_sum_leq_with(&s, ell, &cfg)?;
    let witness = if found {
        engine::witness_with(&s, ell, &cfg)?
    } else {
        None
    };
    let mut report = Report::new(
        "check",
        Some(spec),
        json!({ "seq": s.to_string(), "maxlen": maxlen }),
    );
    report.results = json!({
        "length": s.len(),
        "has_zero_sum": found,
        "witness": witness.map(|w| w.to_string()),
    });
    Ok((report, Outcome::Pass))
}

/// Runs one search, or `jobs` shards in parallel merged into one report.
pub fn enumerate(
    spec: GroupSpec,
    k: u32,
    cfg: &SearchConfig,
    jobs: u32,
) -> Result<ExtremalReport, CliError> {
    if jobs == 0 {
        return Err(CliError::Usage("--jobs must be positive".into()));
    }
    if cfg.shard.is_some() || jobs == 1 {
        return Ok(search::enumerate_extremal_with(spec, k, cfg)?);
    }
    let parts: Vec<ExtremalReport> = ShardSpec::all(jobs)
        .into_par_iter()
        .map(|shard| {
            let cfg = SearchConfig {
                shard: Some(shard),
                ..cfg.clone()
            };
            search::enumerate_extremal_with(spec, k, &cfg)
        })
        .collect::<Result<_, _>>()?;
    let mut merged = parts[0].clone();
    for p in &parts[1..] {
        merged = merged.merge(p)?;
    }
    Ok(merged)
}

/// One orbit as written to reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitRow {
    pub sequence: String,
    pub orbit_size: u64,
    pub clause: Option<ClauseMatch>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremalResults {
    pub k: u32,
    pub length: usize,
    pub horizon: usize,
    pub orbits: usize,
    pub sequences: u64,
    pub unmatched: usize,
    pub nodes: u64,
    pub representatives: Vec<OrbitRow>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub near_misses: Vec<structures::NearMiss>,
}

fn extremal_report(command: &str, ext: &ExtremalReport, strict: bool) -> Report {
    let spec = ext.spec;
    let mut report = Report::new(command, Some(spec), json!({ "k": ext.k }));
    report.shard = ext.shard.map(|s| s.to_string());
    let mut near = Vec::new();
    for (s, m) in ext.representatives.iter().zip(&ext.clause_matches) {
        let failures = if strict {
            structures::conjecture_failures(s, ext.k).unwrap_or_else(|e| vec![e.to_string()])
        } else if m.is_none() {
            vec!["no clause matches".to_string()]
        } else {
            Vec::new()
        };
        for f in failures {
            report.counterexamples.push(Counterexample {
                predicate: "conjecture".into(),
                sequence: Some(s.to_string()),
                params: json!({ "k": ext.k }),
                detail: f,
            });
        }
        if strict {
            near.extend(structures::near_misses(s, ext.k).unwrap_or_default());
        }
    }
    let results = ExtremalResults {
        k: ext.k,
        length: search::extremal_length(spec, ext.k),
        horizon: search::extremal_horizon(spec, ext.k),
        orbits: ext.representatives.len(),
        sequences: ext.total_sequences(),
        unmatched: ext.unmatched().count(),
        nodes: ext.stats.nodes,
        representatives: ext
            .representatives
            .iter()
            .zip(&ext.orbit_sizes)
            .zip(&ext.clause_matches)
            .map(|((s, &o), c)| OrbitRow {
                sequence: s.to_string(),
                orbit_size: o,
                clause: c.clone(),
            })
            .collect(),
        near_misses: near,
    };
    report.results = serde_json::to_value(results).expect("results serialize");
    report
}

fn lemma_sweep(lemma: LemmaKind, range: ModulusRange) -> Result<(Report, Outcome), CliError> {
    let per_n: Vec<SweepReport> = (range.lo..=range.hi)
        .into_par_iter()
        .map(|n| lemmas::sweep(lemma, n))
        .collect::<Result<_, _>>()?;
    let mut report = Report::new(
        "lemma",
        None,
        json!({ "lemma": lemma, "range": [range.lo, range.hi] }),
    );
    let mut cases = BTreeMap::new();
    for r in &per_n {
        cases.insert(r.n.to_string(), r.cases);
        for c in &r.counterexamples {
            report.counterexamples.push(Counterexample {
                predicate: lemma.to_string(),
                sequence: None,
                params: json!({ "n": c.n, "x": c.params }),
                detail: c.detail.clone(),
            });
        }
    }
    let total: u64 = per_n.iter().map(|r| r.cases).sum();
    report.results = json!({ "cases": total, "cases_per_n": cases });
    let outcome = if report.counterexamples.is_empty() {
        Outcome::Pass
    } else {
        Outcome::Fail
    };
    Ok((report, outcome))
}

fn claims(
    spec: GroupSpec,
    k: u32,
    text: &str,
    all: bool,
    boundary: bool,
    limit: usize,
) -> Result<(Report, Outcome), CliError> {
    let s = parse_seq(text, spec)?;
    let phi = Phi::canonical(spec)?;
    let reports = if all {
        decomposition::check_all_decompositions(&s, k, &phi, boundary, limit)?
    } else {
        decomposition::verify_extremal(&s, k)?;
        let d = decomposition::find_block_decomposition(&s, &phi)?
            .ok_or_else(|| CliError::Usage("no block decomposition found".into()))?;
        vec![decomposition::check_claims_cd(&s, k, &d, &phi, boundary)?]
    };
    let mut report = Report::new(
        "claims",
        Some(spec),
        json!({ "k": k, "seq": s.to_string(), "all_decompositions": all, "boundary": boundary }),
    );
    for (i, r) in reports.iter().enumerate() {
        if !r.passes() {
            report.counterexamples.push(Counterexample {
                predicate: "claims".into(),
                sequence: Some(s.to_string()),
                params: json!({ "k": k, "decomposition": i }),
                detail: failed_claims(r).join(", "),
            });
        }
    }
    report.results = json!({ "decompositions": reports.len(), "reports": reports });
    let outcome = if report.counterexamples.is_empty() {
        Outcome::Pass
    } else {
        Outcome::Fail
    };
    Ok((report, outcome))
}

/// Names of the checks that failed in a claims report.
pub fn failed_claims(r: &decomposition::ClaimsReport) -> Vec<&'static str> {
    let checks = [
        ("claim_a", r.claim_a.passes()),
        ("weak_length_bound", r.weak_length_bound),
        ("invcn", r.invcn),
        ("claim_c", r.claim_c),
        ("claim_d", r.claim_d),
        ("swaps_rigid", r.swaps_rigid),
        ("g_help", r.g_help),
        ("generates", r.generates),
        ("sum_order", r.sum_order),
        ("dichotomy", !r.dichotomy.is_empty()),
    ];
    checks.into_iter().filter(|(_, ok)| !ok).map(|(n, _)| n).collect()
}

fn read_report(path: &Path) -> Result<Report, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// Reassembles an [`ExtremalReport`] from its JSON form.
fn extremal_from_report(r: &Report) -> Result<ExtremalReport, CliError> {
    let spec: GroupSpec = r
        .spec
        .as_deref()
        .ok_or_else(|| CliError::Usage("report has no group".into()))?
        .parse()
        .map_err(|e: zerosum_core::GroupError| CliError::Usage(e.to_string()))?;
    let res: ExtremalResults = serde_json::from_value(r.results.clone())
        .map_err(|e| CliError::Usage(format!("not an enumeration report: {e}")))?;
    let shard = match &r.shard {
        Some(s) => Some(s.parse::<ShardSpec>()?),
        None => None,
    };
    let mut reps = Vec::new();
    for row in &res.representatives {
        reps.push(parse_seq(&row.sequence, spec)?);
    }
    Ok(ExtremalReport {
        spec,
        k: res.k,
        representatives: reps,
        orbit_sizes: res.representatives.iter().map(|r| r.orbit_size).collect(),
        clause_matches: res.representatives.iter().map(|r| r.clause.clone()).collect(),
        shard,
        stats: SearchStats { nodes: res.nodes },
    })
}

fn merge(inputs: &[PathBuf]) -> Result<(Report, Outcome), CliError> {
    let reports: Vec<Report> = inputs.iter().map(|p| read_report(p)).collect::<Result<_, _>>()?;
    let command = reports[0].command.clone();
    if !matches!(command.as_str(), "enumerate" | "verify-conjecture") {
        return Err(CliError::Usage(format!("cannot merge {command} reports")));
    }
    if reports.iter().any(|r| r.command != command) {
        return Err(CliError::Usage("reports come from different commands".into()));
    }
    let mut merged = extremal_from_report(&reports[0])?;
    for r in &reports[1..] {
        merged = merged.merge(&extremal_from_report(r)?)?;
    }
    let strict = command == "verify-conjecture";
    let report = extremal_report(&command, &merged, strict);
    let outcome = if report.counterexamples.is_empty() {
        Outcome::Pass
    } else {
        Outcome::Fail
    };
    Ok((report, outcome))
}

/// Parses `args`, runs the command, writes the report, and returns the exit
/// code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok((report, outcome)) => {
            let text = report.to_json();
            match &cli.out {
                Some(path) => {
                    if let Err(e) = fs::write(path, text) {
                        eprintln!("error: {}: {e}", path.display());
                        return 2;
                    }
                }
                None => print!("{text}"),
            }
            outcome.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
