//! Exhaustive search for `D(G)`, `η(G)`, `s_{≤ℓ}(G)` and extremal sequences.
//!
//! The search extends multisets term by term in nondecreasing linear-index
//! order. A prefix is dropped as soon as it contains a nontrivial zero-sum of
//! length at most `ℓ`; the avoiding property passes to subsequences, so no
//! valid extension is lost. Orbits under `Aut(G)` are reduced by keeping only
//! prefixes that are lexicographically least among their images. Prefixes of
//! a least sorted list are themselves least, so this pruning is exact.
//!
//! Reach state is kept as one `u64` per group element (bit `j` = some
//! subsequence of length `j` sums to that element), which caps searchable
//! lengths at [`MAX_SEARCH_LEN`].

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine;
use crate::group::{GroupError, GroupSpec, DEFAULT_AUT_BOUND};
use crate::sequence::Sequence;
use crate::structures::{self, ClauseMatch};

pub const MAX_SEARCH_LEN: usize = 63;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("s_<=ell is unbounded for ell = {ell} < exp(G) = {exponent}")]
    Unbounded { ell: usize, exponent: u32 },
    #[error("node budget of {0} exhausted")]
    NodeBudget(u64),
    #[error("time budget of {0:?} exhausted")]
    TimeBudget(Duration),
    #[error("search would exceed the maximum tracked length {MAX_SEARCH_LEN}")]
    TooLong,
    #[error("k = {k} outside [0, {max}]")]
    KOutOfRange { k: u32, max: u32 },
    #[error("invalid shard descriptor {0:?}")]
    BadShard(String),
    #[error("reports cannot be merged: {0}")]
    MergeMismatch(String),
    #[error("engine disagrees with search on {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Engine(#[from] engine::EngineError),
}

/// Which zero-sums disqualify a sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Horizon {
    /// Any nontrivial zero-sum.
    Any,
    /// Nontrivial zero-sums of length at most the bound.
    AtMost(usize),
}

impl Horizon {
    fn cap(self) -> usize {
        match self {
            Horizon::Any => MAX_SEARCH_LEN,
            Horizon::AtMost(l) => l.min(MAX_SEARCH_LEN),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InvariantKind {
    Davenport,
    Eta,
    SLeq,
}

/// A request for one invariant of one group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantQuery {
    pub spec: GroupSpec,
    pub kind: InvariantKind,
    pub ell: Option<usize>,
}

impl InvariantQuery {
    /// The closed form the computed value is expected to match, `None` when
    /// no closed form is known for the query.
    pub fn formula(&self) -> Option<usize> {
        let n = self.spec.n() as usize;
        let m = self.spec.m() as usize;
        let mn = m * n;
        match self.kind {
            InvariantKind::Davenport => Some(mn + n - 1),
            InvariantKind::Eta => Some(mn + 2 * n - 2),
            InvariantKind::SLeq => {
                let ell = self.ell?;
                let d = mn + n - 1;
                if ell < mn {
                    None
                } else if ell >= d {
                    Some(d)
                } else {
                    // ell = mn + n - 1 - k with k in [1, n - 1]
                    let k = d - ell;
                    Some(d + k)
                }
            }
        }
    }

    pub fn run(&self, config: &SearchConfig) -> Result<usize, SearchError> {
        match self.kind {
            InvariantKind::Davenport => davenport_with(self.spec, config),
            InvariantKind::Eta => eta_with(self.spec, config),
            InvariantKind::SLeq => {
                let ell = self.ell.unwrap_or(self.spec.exponent() as usize);
                s_leq_with(self.spec, ell, config)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchConfig {
    pub max_nodes: u64,
    pub max_time: Option<Duration>,
    /// Reject non-canonical prefixes during the descent. When off, every
    /// avoiding multiset is visited and orbits are merged at the leaves.
    pub prefix_pruning: bool,
    pub aut_bound: usize,
    pub shard: Option<ShardSpec>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            max_nodes: 2_000_000_000,
            max_time: None,
            prefix_pruning: true,
            aut_bound: DEFAULT_AUT_BOUND,
            shard: None,
        }
    }
}

/// Shard `index` (1-based) of `count`. Nodes at depth `split_depth` are
/// dealt round-robin, in search order, to the shards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ShardSpec {
    pub index: u32,
    pub count: u32,
    pub split_depth: u32,
}

pub const DEFAULT_SPLIT_DEPTH: u32 = 2;

impl ShardSpec {
    pub fn new(index: u32, count: u32) -> Result<Self, SearchError> {
        Self::with_depth(index, count, DEFAULT_SPLIT_DEPTH)
    }

    pub fn with_depth(index: u32, count: u32, split_depth: u32) -> Result<Self, SearchError> {
        if count == 0 || index == 0 || index > count || split_depth == 0 {
            return Err(SearchError::BadShard(format!(
                "{index}/{count}@{split_depth}"
            )));
        }
        Ok(ShardSpec {
            index,
            count,
            split_depth,
        })
    }

    pub fn all(count: u32) -> Vec<ShardSpec> {
        (1..=count)
            .map(|i| ShardSpec::new(i, count).unwrap())
            .collect()
    }
}

impl fmt::Display for ShardSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.index, self.count)?;
        if self.split_depth != DEFAULT_SPLIT_DEPTH {
            write!(f, "@{}", self.split_depth)?;
        }
        Ok(())
    }
}

impl FromStr for ShardSpec {
    type Err = SearchError;

    /// `"i/N"` or `"i/N@depth"`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || SearchError::BadShard(s.to_string());
        let (body, depth) = match s.split_once('@') {
            Some((b, d)) => (b, d.trim().parse().map_err(|_| bad())?),
            None => (s, DEFAULT_SPLIT_DEPTH),
        };
        let (i, n) = body.split_once('/').ok_or_else(bad)?;
        let i = i.trim().parse().map_err(|_| bad())?;
        let n = n.trim().parse().map_err(|_| bad())?;
        ShardSpec::with_depth(i, n, depth)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub nodes: u64,
}

/// Automorphisms of `G` as permutations of linear indices.
#[derive(Debug, Clone)]
pub struct Symmetry {
    spec: GroupSpec,
    perms: Vec<Vec<u32>>,
}

impl Symmetry {
    pub fn new(spec: GroupSpec, aut_bound: usize) -> Result<Self, SearchError> {
        let perms = spec
            .automorphisms_bounded(aut_bound)?
            .iter()
            .skip(1)
            .map(|a| a.permutation(&spec))
            .collect();
        Ok(Symmetry { spec, perms })
    }

    /// `|Aut(G)|`.
    pub fn group_order(&self) -> usize {
        self.perms.len() + 1
    }

    /// True iff the sorted list is least among its images.
    pub fn is_canonical(&self, sorted: &[u32], buf: &mut Vec<u32>) -> bool {
        for p in &self.perms {
            buf.clear();
            buf.extend(sorted.iter().map(|&i| p[i as usize]));
            buf.sort_unstable();
            if buf.as_slice() < sorted {
                return false;
            }
        }
        true
    }

    pub fn canonical_list(&self, sorted: &[u32]) -> Vec<u32> {
        let mut best = sorted.to_vec();
        let mut buf = Vec::with_capacity(sorted.len());
        for p in &self.perms {
            buf.clear();
            buf.extend(sorted.iter().map(|&i| p[i as usize]));
            buf.sort_unstable();
            if buf < best {
                best.clone_from(&buf);
            }
        }
        best
    }

    pub fn canonical_form(&self, s: &Sequence) -> Sequence {
        Sequence::from_index_list(self.spec, &self.canonical_list(&s.index_list()))
    }

    pub fn orbit_size(&self, s: &Sequence) -> u64 {
        let base = s.index_list();
        let mut seen: HashSet<Vec<u32>> = HashSet::new();
        seen.insert(base.clone());
        for p in &self.perms {
            let mut img: Vec<u32> = base.iter().map(|&i| p[i as usize]).collect();
            img.sort_unstable();
            seen.insert(img);
        }
        seen.len() as u64
    }
}

/// The lexicographically least sorted index list in the orbit of `s`.
pub fn canonical_form(s: &Sequence) -> Result<Sequence, SearchError> {
    Ok(Symmetry::new(s.spec(), DEFAULT_AUT_BOUND)?.canonical_form(s))
}

enum Goal {
    Longest,
    Leaves(usize),
}

struct Dfs<'a> {
    spec: GroupSpec,
    card: usize,
    cap_mask: u64,
    goal: Goal,
    config: &'a SearchConfig,
    sym: &'a Symmetry,
    masks: Vec<u64>,
    prefix: Vec<u32>,
    buf: Vec<u32>,
    nodes: u64,
    split_counter: u64,
    started: Instant,
    longest: usize,
    leaves: BTreeSet<Vec<u32>>,
}

impl Dfs<'_> {
    fn extend(&mut self, depth: usize, g: usize) -> bool {
        let card = self.card;
        let (lo, hi) = self.masks.split_at_mut((depth + 1) * card);
        let src = &lo[depth * card..];
        let dst = &mut hi[..card];
        dst.copy_from_slice(src);
        let n = self.spec.n() as usize;
        let e = self.spec.exponent() as usize;
        let (ga, gb) = (g / e, g % e);
        let cap = self.cap_mask;
        let mut ta = ga;
        for a in 0..n {
            let row = a * e;
            let trow = ta * e;
            let mut tb = gb;
            for b in 0..e {
                let v = src[row + b];
                if v != 0 {
                    dst[trow + tb] |= (v << 1) & cap;
                }
                tb += 1;
                if tb == e {
                    tb = 0;
                }
            }
            ta += 1;
            if ta == n {
                ta = 0;
            }
        }
        dst[0] & !1 == 0
    }

    fn tick(&mut self) -> Result<(), SearchError> {
        self.nodes += 1;
        if self.nodes > self.config.max_nodes {
            return Err(SearchError::NodeBudget(self.config.max_nodes));
        }
        if let Some(limit) = self.config.max_time {
            if self.nodes % 4096 == 0 && self.started.elapsed() > limit {
                return Err(SearchError::TimeBudget(limit));
            }
        }
        Ok(())
    }

    fn run(&mut self, depth: usize, start: usize) -> Result<(), SearchError> {
        let target = match self.goal {
            Goal::Leaves(t) => Some(t),
            Goal::Longest => None,
        };
        for g in start.max(1)..self.card {
            if !self.extend(depth, g) {
                continue;
            }
            self.prefix.push(g as u32);
            if self.config.prefix_pruning && !self.sym.is_canonical(&self.prefix, &mut self.buf) {
                self.prefix.pop();
                continue;
            }
            let len = depth + 1;
            if let Some(shard) = self.config.shard {
                let split = match target {
                    Some(t) => (shard.split_depth as usize).min(t),
                    None => shard.split_depth as usize,
                };
                if len == split {
                    let mine = self.split_counter % shard.count as u64 == (shard.index - 1) as u64;
                    self.split_counter += 1;
                    if !mine {
                        self.prefix.pop();
                        continue;
                    }
                }
            }
            self.tick()?;
            self.longest = self.longest.max(len);
            match target {
                Some(t) if len == t => {
                    let leaf = if self.config.prefix_pruning {
                        self.prefix.clone()
                    } else {
                        self.sym.canonical_list(&self.prefix)
                    };
                    self.leaves.insert(leaf);
                }
                _ => {
                    if len >= MAX_SEARCH_LEN {
                        return Err(SearchError::TooLong);
                    }
                    self.run(len, g)?;
                }
            }
            self.prefix.pop();
        }
        Ok(())
    }
}

struct DfsOutcome {
    longest: usize,
    leaves: BTreeSet<Vec<u32>>,
    stats: SearchStats,
}

fn search(
    spec: GroupSpec,
    horizon: Horizon,
    goal: Goal,
    config: &SearchConfig,
) -> Result<DfsOutcome, SearchError> {
    let sym = Symmetry::new(spec, config.aut_bound)?;
    let card = spec.cardinality();
    let depth_cap = match goal {
        Goal::Leaves(t) => t,
        Goal::Longest => MAX_SEARCH_LEN,
    };
    if depth_cap > MAX_SEARCH_LEN {
        return Err(SearchError::TooLong);
    }
    let cap = horizon.cap();
    let cap_mask = if cap >= 63 { u64::MAX } else { (1u64 << (cap + 1)) - 1 };
    let mut masks = vec![0u64; (depth_cap + 1) * card];
    masks[0] = 1;
    let mut dfs = Dfs {
        spec,
        card,
        cap_mask,
        goal,
        config,
        sym: &sym,
        masks,
        prefix: Vec::with_capacity(depth_cap),
        buf: Vec::with_capacity(depth_cap),
        nodes: 0,
        split_counter: 0,
        started: Instant::now(),
        longest: 0,
        leaves: BTreeSet::new(),
    };
    if let Goal::Leaves(0) = dfs.goal {
        dfs.leaves.insert(Vec::new());
    } else {
        dfs.run(0, 1)?;
    }
    Ok(DfsOutcome {
        longest: dfs.longest,
        leaves: dfs.leaves,
        stats: SearchStats { nodes: dfs.nodes },
    })
}

/// Largest `|S|` with no nontrivial zero-sum inside the horizon.
///
/// Under a shard descriptor the value is the maximum over that shard's part
/// of the tree only.
pub fn max_avoiding_length_with(
    spec: GroupSpec,
    horizon: Horizon,
    config: &SearchConfig,
) -> Result<usize, SearchError> {
    if let Horizon::AtMost(ell) = horizon {
        if ell < spec.exponent() as usize {
            return Err(SearchError::Unbounded {
                ell,
                exponent: spec.exponent(),
            });
        }
    }
    Ok(search(spec, horizon, Goal::Longest, config)?.longest)
}

/// `s_{≤ℓ}(G) − 1`.
pub fn max_avoiding_length(spec: GroupSpec, ell: usize) -> Result<usize, SearchError> {
    max_avoiding_length_with(spec, Horizon::AtMost(ell), &SearchConfig::default())
}

pub fn davenport(spec: GroupSpec) -> Result<usize, SearchError> {
    davenport_with(spec, &SearchConfig::default())
}

pub fn davenport_with(spec: GroupSpec, config: &SearchConfig) -> Result<usize, SearchError> {
    Ok(max_avoiding_length_with(spec, Horizon::Any, config)? + 1)
}

pub fn eta(spec: GroupSpec) -> Result<usize, SearchError> {
    eta_with(spec, &SearchConfig::default())
}

pub fn eta_with(spec: GroupSpec, config: &SearchConfig) -> Result<usize, SearchError> {
    s_leq_with(spec, spec.exponent() as usize, config)
}

pub fn s_leq(spec: GroupSpec, ell: usize) -> Result<usize, SearchError> {
    s_leq_with(spec, ell, &SearchConfig::default())
}

pub fn s_leq_with(spec: GroupSpec, ell: usize, config: &SearchConfig) -> Result<usize, SearchError> {
    Ok(max_avoiding_length_with(spec, Horizon::AtMost(ell), config)? + 1)
}

/// `|S| = mn+n−2+k` for extremal sequences at `k`.
pub fn extremal_length(spec: GroupSpec, k: u32) -> usize {
    (spec.exponent() + spec.n() - 2 + k) as usize
}

/// The forbidden zero-sum length bound `mn+n−1−k`.
pub fn extremal_horizon(spec: GroupSpec, k: u32) -> usize {
    (spec.exponent() + spec.n() - 1 - k) as usize
}

/// All extremal sequences at `k`, one canonical representative per orbit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtremalReport {
    pub spec: GroupSpec,
    pub k: u32,
    pub representatives: Vec<Sequence>,
    pub orbit_sizes: Vec<u64>,
    pub clause_matches: Vec<Option<ClauseMatch>>,
    pub shard: Option<ShardSpec>,
    pub stats: SearchStats,
}

impl ExtremalReport {
    pub fn total_sequences(&self) -> u64 {
        self.orbit_sizes.iter().sum()
    }

    pub fn unmatched(&self) -> impl Iterator<Item = &Sequence> {
        self.representatives
            .iter()
            .zip(&self.clause_matches)
            .filter(|(_, m)| m.is_none())
            .map(|(s, _)| s)
    }

    /// Union of two reports for the same `(G, k)`, deduplicated by
    /// representative and ordered by index list.
    pub fn merge(&self, other: &ExtremalReport) -> Result<ExtremalReport, SearchError> {
        if self.spec != other.spec || self.k != other.k {
            return Err(SearchError::MergeMismatch(format!(
                "({}, k={}) vs ({}, k={})",
                self.spec, self.k, other.spec, other.k
            )));
        }
        let mut rows: Vec<(Vec<u32>, Sequence, u64, Option<ClauseMatch>)> = Vec::new();
        let mut seen = HashSet::new();
        for r in [self, other] {
            for ((s, &o), c) in r.representatives.iter().zip(&r.orbit_sizes).zip(&r.clause_matches) {
                let key = s.index_list();
                if seen.insert(key.clone()) {
                    rows.push((key, s.clone(), o, c.clone()));
                }
            }
        }
        rows.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(ExtremalReport {
            spec: self.spec,
            k: self.k,
            representatives: rows.iter().map(|r| r.1.clone()).collect(),
            orbit_sizes: rows.iter().map(|r| r.2).collect(),
            clause_matches: rows.into_iter().map(|r| r.3).collect(),
            shard: None,
            stats: SearchStats {
                nodes: self.stats.nodes + other.stats.nodes,
            },
        })
    }
}

pub fn enumerate_extremal(spec: GroupSpec, k: u32) -> Result<ExtremalReport, SearchError> {
    enumerate_extremal_with(spec, k, &SearchConfig::default())
}

pub fn enumerate_extremal_with(
    spec: GroupSpec,
    k: u32,
    config: &SearchConfig,
) -> Result<ExtremalReport, SearchError> {
    if k > spec.n() - 1 {
        return Err(SearchError::KOutOfRange {
            k,
            max: spec.n() - 1,
        });
    }
    let len = extremal_length(spec, k);
    let ell = extremal_horizon(spec, k);
    let outcome = search(spec, Horizon::AtMost(ell), Goal::Leaves(len), config)?;
    let sym = Symmetry::new(spec, config.aut_bound)?;
    let mut report = ExtremalReport {
        spec,
        k,
        representatives: Vec::with_capacity(outcome.leaves.len()),
        orbit_sizes: Vec::with_capacity(outcome.leaves.len()),
        clause_matches: Vec::with_capacity(outcome.leaves.len()),
        shard: config.shard,
        stats: outcome.stats,
    };
    for leaf in outcome.leaves {
        let s = Sequence::from_index_list(spec, &leaf);
        if s.len() != len || engine::has_zero_sum_leq(&s, ell.min(len))? {
            return Err(SearchError::Inconsistent(s.to_string()));
        }
        report.orbit_sizes.push(sym.orbit_size(&s));
        report
            .clause_matches
            .push(structures::match_clause(&s, k).ok().flatten());
        report.representatives.push(s);
    }
    Ok(report)
}
