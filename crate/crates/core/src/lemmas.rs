//! Residue-arithmetic lemmas behind the `k = n−1` case, as checkable
//! functions and sweeps.
//!
//! `(x)_n` always denotes the least non-negative residue, computed by
//! [`residue`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine;
use crate::group::{gcd, GroupError, GroupSpec};
use crate::search::{self, SearchConfig, SearchError};
use crate::sequence::Sequence;
use crate::structures::{self, Letter};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LemmaError {
    #[error("modulus must be at least 2, got {0}")]
    Modulus(u32),
    #[error("{x} is not a unit in [1, {n}-1]")]
    NotUnit { x: i64, n: u32 },
    #[error("u = {u} outside [1, {n}-1]")]
    UOutOfRange { u: u32, n: u32 },
    #[error("residues must lie in [0, {n}-1]: {x}")]
    ResidueRange { x: i64, n: u32 },
    #[error("x1+x2+x3 = {sum} is not 0 mod {n}")]
    NotZeroSum { sum: i64, n: u32 },
    #[error("no admissible k for n = {n}, x = {xs:?}")]
    NoSmallK { n: u32, xs: [i64; 3] },
    #[error("unknown lemma {0:?}")]
    UnknownLemma(String),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Search(#[from] SearchError),
}

fn check_modulus(n: u32) -> Result<(), LemmaError> {
    if n < 2 {
        Err(LemmaError::Modulus(n))
    } else {
        Ok(())
    }
}

fn check_unit(n: u32, x: i64) -> Result<(), LemmaError> {
    if (1..n as i64).contains(&x) && gcd(x as u64, n as u64) == 1 {
        Ok(())
    } else {
        Err(LemmaError::NotUnit { x, n })
    }
}

fn check_residue(n: u32, x: i64) -> Result<(), LemmaError> {
    if (0..n as i64).contains(&x) {
        Ok(())
    } else {
        Err(LemmaError::ResidueRange { x, n })
    }
}

/// Least non-negative representative of `x` modulo `n`.
pub fn residue(x: i64, n: u32) -> i64 {
    x.rem_euclid(n as i64)
}

fn coprime(x: i64, n: u32) -> bool {
    gcd(residue(x, n) as u64, n as u64) == 1
}

/// `(−x1·k)_n + (−x2·k)_n + (k)_n > n` for every `k ∈ [1, n−1]`.
pub fn index_criterion(n: u32, x1: i64, x2: i64) -> bool {
    let n64 = n as i64;
    (1..n64).all(|k| residue(-x1 * k, n) + residue(-x2 * k, n) + residue(k, n) > n64)
}

/// `e1^[n−1]·e2^[n−1]·(x1·e1 + x2·e2)^[n−1]` over `C_n ⊕ C_n`.
pub fn zs3_sequence(n: u32, x1: i64, x2: i64) -> Result<Sequence, LemmaError> {
    check_modulus(n)?;
    let g = GroupSpec::new(n as u64, 1)?;
    let (e1, e2) = g.standard_basis();
    let e3 = g.add(g.mul(x1, e1), g.mul(x2, e2));
    let mut s = Sequence::empty(g);
    for e in [e1, e2, e3] {
        s = s.with_term(e, n - 1).expect("element of G");
    }
    Ok(s)
}

/// Whether the index criterion agrees with the engine's verdict on
/// "no zero-sum of length at most `n`" for [`zs3_sequence`].
pub fn zs3_equivalence(n: u32, x1: i64, x2: i64) -> Result<bool, LemmaError> {
    check_modulus(n)?;
    check_residue(n, x1)?;
    check_residue(n, x2)?;
    let s = zs3_sequence(n, x1, x2)?;
    let free = !engine::has_zero_sum_leq(&s, n as usize).expect("n <= |S|");
    Ok(index_criterion(n, x1, x2) == free)
}

fn triple_length(n: u32, k: i64, xs: [i64; 3]) -> i64 {
    xs.iter().map(|&x| residue(k * x, n)).sum()
}

/// Smallest `k ∈ [1, n−1]` coprime to `n` with
/// `(k·x1)_n + (k·x2)_n + (k·x3)_n ≤ n`, for triples summing to `0 mod n`.
pub fn find_small_k(n: u32, xs: [i64; 3]) -> Result<u32, LemmaError> {
    check_modulus(n)?;
    let sum: i64 = xs.iter().sum();
    if residue(sum, n) != 0 {
        return Err(LemmaError::NotZeroSum { sum, n });
    }
    (1..n as i64)
        .filter(|&k| coprime(k, n))
        .find(|&k| triple_length(n, k, xs) <= n as i64)
        .map(|k| k as u32)
        .ok_or(LemmaError::NoSmallK { n, xs })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct XSet {
    pub n: u32,
    pub x: u32,
    /// Sorted ascending.
    pub members: Vec<u32>,
    pub d: u32,
}

impl XSet {
    pub fn contains(&self, u: u32) -> bool {
        self.members.binary_search(&u).is_ok()
    }
}

/// `X(x) = {⌈jn/x⌉ : j ∈ [1, x−1]}` with `d = ⌊n/x⌋`.
pub fn x_set(n: u32, x: u32) -> Result<XSet, LemmaError> {
    check_modulus(n)?;
    check_unit(n, x as i64)?;
    let members = (1..x).map(|j| (j * n).div_ceil(x)).collect();
    Ok(XSet {
        n,
        x,
        members,
        d: n / x,
    })
}

/// `Δ(u, x) = (u·x)_n − ((u−1)·x)_n`.
pub fn delta(n: u32, u: u32, x: u32) -> Result<i64, LemmaError> {
    check_modulus(n)?;
    check_unit(n, x as i64)?;
    if !(1..n).contains(&u) {
        return Err(LemmaError::UOutOfRange { u, n });
    }
    let (u, x) = (u as i64, x as i64);
    Ok(residue(u * x, n) - residue((u - 1) * x, n))
}

/// `X(x)` and `X(n−x)` are disjoint with union `[2, n−1]`.
pub fn verify_x_partition(n: u32, x: u32) -> Result<bool, LemmaError> {
    let a = x_set(n, x)?;
    let b = x_set(n, n - x)?;
    let mut all: Vec<u32> = a.members.iter().chain(&b.members).copied().collect();
    all.sort_unstable();
    Ok(all.into_iter().eq(2..n))
}

/// Failed items of the `X(x)` lemma for one `(n, x)`, as messages.
pub fn x_set_failures(n: u32, x: u32) -> Result<Vec<String>, LemmaError> {
    let xs = x_set(n, x)?;
    let mut out = Vec::new();
    if xs.members.len() != x as usize - 1 {
        out.push(format!("|X| = {} != x-1", xs.members.len()));
    }
    if xs.members.iter().any(|&u| !(2..n).contains(&u)) {
        out.push(format!("X = {:?} not inside [2, n-1]", xs.members));
    }
    if xs.members.windows(2).any(|w| w[1] <= w[0]) {
        out.push(format!("X = {:?} has repeated members", xs.members));
    }
    for w in xs.members.windows(2) {
        let gap = w[1] - w[0];
        if gap != xs.d && gap != xs.d + 1 {
            out.push(format!("gap {gap} between {} and {} not in {{d, d+1}}", w[0], w[1]));
        }
    }
    if x >= 2 {
        let (lo, hi) = (xs.members[0], *xs.members.last().expect("x >= 2"));
        if lo != xs.d + 1 {
            out.push(format!("min X = {lo} != d+1 = {}", xs.d + 1));
        }
        if hi != n - xs.d {
            out.push(format!("max X = {hi} != n-d = {}", n - xs.d));
        }
    }
    if !verify_x_partition(n, x)? {
        out.push("X(x) and X(n-x) do not partition [2, n-1]".into());
    }
    for u in 1..n {
        let dl = delta(n, u, x)?;
        let x64 = x as i64;
        if dl != x64 && dl != x64 - n as i64 {
            out.push(format!("delta({u}) = {dl} not in {{x, x-n}}"));
        } else if (dl == x64 - n as i64) != xs.contains(u) {
            out.push(format!("delta({u}) = {dl} disagrees with membership"));
        }
    }
    Ok(out)
}

/// `(k·x1)_n + (k·x2)_n + (k·x3)_n > n` for every `k ∈ [1, n−1]`.
pub fn all_k_criterion(n: u32, xs: [i64; 3]) -> bool {
    (1..n as i64).all(|k| triple_length(n, k, xs) > n as i64)
}

/// For unit triples passing [`all_k_criterion`], distinct 1-based indices
/// `(i, j)` with `x_i + x_j ≡ 0 (mod n)`. `None` when the criterion fails
/// or, against expectation, no pair exists.
pub fn pair_sum_zero(n: u32, xs: [i64; 3]) -> Result<Option<(usize, usize)>, LemmaError> {
    check_modulus(n)?;
    if let Some(&x) = xs.iter().find(|&&x| !coprime(x, n)) {
        return Err(LemmaError::NotUnit { x, n });
    }
    if !all_k_criterion(n, xs) {
        return Ok(None);
    }
    Ok([(0, 1), (0, 2), (1, 2)]
        .into_iter()
        .find(|&(i, j)| residue(xs[i] + xs[j], n) == 0)
        .map(|(i, j)| (i + 1, j + 1)))
}

/// For unit triples with `x1+x2+x3 ≡ 1` passing the criterion, the first
/// `u ∈ [1, n−1]` with `(u·x1)_n + (u·x2)_n + (u·x3)_n ≠ n+u`, if any.
pub fn claim1_failure(n: u32, xs: [i64; 3]) -> Option<u32> {
    (1..n as i64)
        .find(|&u| triple_length(n, u, xs) != n as i64 + u)
        .map(|u| u as u32)
}

/// Outcome of the full `k = n−1` check over `C_n ⊕ C_n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnReport {
    pub n: u32,
    pub orbits: usize,
    pub sequences: u64,
    pub failures: Vec<String>,
}

impl KnReport {
    pub fn holds(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Enumerates extremal sequences of `C_n ⊕ C_n` at `k = n−1` and checks
/// each is `e1^[n−1]·e2^[n−1]·e3^[n−1]` with pairwise bases, matching a
/// part-4 clause.
pub fn verify_k_eq_n_minus_1(n: u32, config: &SearchConfig) -> Result<KnReport, LemmaError> {
    check_modulus(n)?;
    let g = GroupSpec::new(n as u64, 1)?;
    let report = search::enumerate_extremal_with(g, n - 1, config)?;
    let mut failures = Vec::new();
    for s in &report.representatives {
        let supp = s.support();
        if supp.len() != 3 || supp.iter().any(|&e| s.multiplicity(e) != n - 1) {
            failures.push(format!("{s}: not three terms of multiplicity n-1"));
            continue;
        }
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            if !g.is_basis(supp[i], supp[j]) {
                failures.push(format!("{s}: ({}, {}) is not a basis", supp[i], supp[j]));
            }
        }
        let part4 = [Letter::A, Letter::B]
            .into_iter()
            .any(|l| structures::match_display(s, 4, l, n - 1).is_some());
        if !part4 {
            failures.push(format!("{s}: no part-4 clause matches"));
        }
    }
    Ok(KnReport {
        n,
        orbits: report.representatives.len(),
        sequences: report.total_sequences(),
        failures,
    })
}

/// Lemma sweeps exposed to batch runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LemmaKind {
    Zs3,
    Xset,
    Length3,
    Pairsum,
    Claim1,
}

impl LemmaKind {
    pub const ALL: [LemmaKind; 5] = [
        LemmaKind::Zs3,
        LemmaKind::Xset,
        LemmaKind::Length3,
        LemmaKind::Pairsum,
        LemmaKind::Claim1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LemmaKind::Zs3 => "zs3",
            LemmaKind::Xset => "xset",
            LemmaKind::Length3 => "length3",
            LemmaKind::Pairsum => "pairsum",
            LemmaKind::Claim1 => "claim1",
        }
    }
}

impl fmt::Display for LemmaKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LemmaKind {
    type Err = LemmaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        LemmaKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| LemmaError::UnknownLemma(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub n: u32,
    pub params: Vec<i64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepReport {
    pub lemma: LemmaKind,
    pub n: u32,
    pub cases: u64,
    pub counterexamples: Vec<Counterexample>,
}

impl SweepReport {
    fn new(lemma: LemmaKind, n: u32) -> Self {
        SweepReport {
            lemma,
            n,
            cases: 0,
            counterexamples: Vec::new(),
        }
    }

    fn fail(&mut self, params: Vec<i64>, detail: impl Into<String>) {
        self.counterexamples.push(Counterexample {
            n: self.n,
            params,
            detail: detail.into(),
        });
    }
}

/// Runs one lemma over every parameter tuple for modulus `n`.
pub fn sweep(lemma: LemmaKind, n: u32) -> Result<SweepReport, LemmaError> {
    check_modulus(n)?;
    let mut rep = SweepReport::new(lemma, n);
    let n64 = n as i64;
    let units: Vec<i64> = (1..n64).filter(|&x| coprime(x, n)).collect();
    match lemma {
        LemmaKind::Zs3 => {
            for x1 in 0..n64 {
                for x2 in 0..n64 {
                    rep.cases += 1;
                    if !zs3_equivalence(n, x1, x2)? {
                        rep.fail(vec![x1, x2], "criterion disagrees with the engine");
                    }
                }
            }
        }
        LemmaKind::Xset => {
            for &x in &units {
                rep.cases += 1;
                let fails = x_set_failures(n, x as u32)?;
                if !fails.is_empty() {
                    rep.fail(vec![x], fails.join("; "));
                }
            }
        }
        LemmaKind::Length3 => {
            for x1 in 0..n64 {
                for x2 in x1..n64 {
                    let x3 = residue(-x1 - x2, n);
                    if x3 < x2 {
                        continue;
                    }
                    rep.cases += 1;
                    match find_small_k(n, [x1, x2, x3]) {
                        Ok(_) => {}
                        Err(LemmaError::NoSmallK { .. }) => {
                            rep.fail(vec![x1, x2, x3], "no coprime k with short length")
                        }
                        Err(e) => return Err(e),
                    }
                }
            }
        }
        LemmaKind::Pairsum | LemmaKind::Claim1 => {
            for &x1 in &units {
                for &x2 in units.iter().filter(|&&x| x >= x1) {
                    for &x3 in units.iter().filter(|&&x| x >= x2) {
                        let xs = [x1, x2, x3];
                        if !all_k_criterion(n, xs) {
                            continue;
                        }
                        if lemma == LemmaKind::Pairsum {
                            rep.cases += 1;
                            if pair_sum_zero(n, xs)?.is_none() {
                                rep.fail(xs.to_vec(), "no pair sums to 0");
                            }
                        } else if residue(x1 + x2 + x3, n) == 1 {
                            rep.cases += 1;
                            if let Some(u) = claim1_failure(n, xs) {
                                rep.fail(xs.to_vec(), format!("fails at u = {u}"));
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn criterion_examples() {
        assert!(index_criterion(2, 1, 1));
        assert!(index_criterion(3, 1, 1));
        assert!(!index_criterion(3, 0, 0));
        for (n, x1, x2) in [(3, 1, 2), (7, 3, 5), (3, 0, 0), (5, 2, 3)] {
            assert!(zs3_equivalence(n, x1, x2).unwrap(), "{n} {x1} {x2}");
        }
        assert!(zs3_equivalence(3, 3, 0).is_err());
    }

    #[test]
    fn small_k_examples() {
        assert_eq!(find_small_k(5, [1, 1, 3]).unwrap(), 1);
        assert_eq!(find_small_k(5, [2, 4, 4]).unwrap(), 3);
        assert_eq!(find_small_k(2, [1, 1, 0]).unwrap(), 1);
        let k = find_small_k(6, [1, 2, 3]).unwrap() as i64;
        assert_eq!(gcd(k as u64, 6), 1);
        assert!(residue(k, 6) + residue(2 * k, 6) + residue(3 * k, 6) <= 6);
        assert!(matches!(find_small_k(5, [1, 1, 1]), Err(LemmaError::NotZeroSum { .. })));
    }

    #[test]
    fn x_set_examples() {
        assert_eq!(x_set(5, 2).unwrap().members, vec![3]);
        assert_eq!(x_set(5, 3).unwrap().members, vec![2, 4]);
        assert_eq!(delta(5, 3, 2).unwrap(), -3);
        assert!(verify_x_partition(5, 2).unwrap());
        assert!(verify_x_partition(2, 1).unwrap());
        assert!(x_set(6, 2).is_err());
        assert!(delta(5, 5, 2).is_err());
        assert!(x_set(7, 1).unwrap().members.is_empty());
    }

    #[test]
    fn pair_sum_examples() {
        assert!(all_k_criterion(5, [1, 2, 3]));
        assert_eq!(pair_sum_zero(5, [1, 2, 3]).unwrap(), Some((2, 3)));
        assert_eq!(pair_sum_zero(2, [1, 1, 1]).unwrap(), Some((1, 2)));
        assert_eq!(pair_sum_zero(5, [1, 1, 1]).unwrap(), None);
        assert!(pair_sum_zero(6, [1, 2, 3]).is_err());
    }

    #[test]
    fn claim1_example() {
        // 1+2+3 = 6 = n+1 at n = 5
        assert_eq!(claim1_failure(5, [1, 2, 3]), None);
        assert_eq!(claim1_failure(5, [1, 1, 4]), None);
        assert!(claim1_failure(5, [2, 2, 2]).is_some());
    }

    #[test]
    fn k_eq_n_minus_1_small() {
        for n in 2..=5 {
            let rep = verify_k_eq_n_minus_1(n, &SearchConfig::default()).unwrap();
            assert!(rep.holds(), "{rep:?}");
            assert!(rep.orbits >= 1);
        }
    }

    #[test]
    fn sweeps_are_clean_for_small_n() {
        for n in 2..=9 {
            for lemma in LemmaKind::ALL {
                let rep = sweep(lemma, n).unwrap();
                assert!(rep.counterexamples.is_empty(), "{rep:?}");
            }
        }
    }

    #[test]
    fn lemma_names_round_trip() {
        for k in LemmaKind::ALL {
            assert_eq!(k.name().parse::<LemmaKind>().unwrap(), k);
        }
        assert!("nope".parse::<LemmaKind>().is_err());
    }

    proptest! {
        #[test]
        fn delta_is_x_or_x_minus_n((n, x, u) in (2u32..60).prop_flat_map(|n| (Just(n), 1..n, 1..n))) {
            prop_assume!(gcd(x as u64, n as u64) == 1);
            let d = delta(n, u, x).unwrap();
            prop_assert!(d == x as i64 || d == x as i64 - n as i64);
        }

        #[test]
        fn scaling_by_a_unit_preserves_the_criterion(n in 2u32..30, a in 1i64..30, x in 1i64..30, y in 1i64..30, z in 1i64..30) {
            // k ranges over all of [1, n-1], which a unit permutes
            prop_assume!(coprime(a, n));
            let xs = [x, y, z];
            let ys = xs.map(|v| v * a);
            prop_assert_eq!(all_k_criterion(n, xs), all_k_criterion(n, ys));
        }
    }
}
