//! The conjectured extremal structures, as constructors and recognizers.
//!
//! Parts by `k` (with `G = C_n ⊕ C_mn`, `|S| = mn+n−2+k`):
//!
//! * part 1, `k = 0`: `S·(−σ(S))` has a part-2 shape;
//! * part 2, `k = 1`: four shapes (a)–(d) built from a basis or a
//!   generating set and a list of coefficients `x_i`;
//! * part 3, `k ∈ [2, n−2]`: `e1^[n−1]·e2^[sn−1]·(e1+e2)^[(m−s)n+k]` or
//!   `g1^[n−1]·g2^[n−1]·(g1+g2)^[(m−1)n+k]`;
//! * part 4, `k = n−1`: as part 3 with `x·e1+e2` in place of `e1+e2`.
//!
//! Recognizers fix the roles of support elements, derive the remaining
//! parameters, rebuild the display and compare it with the input, so a
//! reported match always reconstructs the input exactly.

pub mod cyclic;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::{gcd, Element, GroupSpec};
use crate::sequence::Sequence;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("k = {k} outside [0, {max}]")]
    KOutOfRange { k: u32, max: u32 },
    #[error("part {part} does not apply at k = {k}")]
    PartNotApplicable { part: u8, k: u32 },
    #[error("no clause {0}")]
    UnknownClause(String),
    #[error("invalid parameters for {clause}: {reason}")]
    InvalidParams { clause: String, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Letter {
    A,
    B,
    C,
    D,
}

impl Letter {
    pub const ALL: [Letter; 4] = [Letter::A, Letter::B, Letter::C, Letter::D];

    pub fn as_char(self) -> char {
        match self {
            Letter::A => 'a',
            Letter::B => 'b',
            Letter::C => 'c',
            Letter::D => 'd',
        }
    }
}

/// A clause with the parameters that produce a sequence.
///
/// `pair` is the basis `(e1, e2)` for (a)-clauses and the generating pair
/// `(g1, g2)` otherwise. For part 4(a) `x_list` holds the single
/// coefficient `x`. For part 1 `removed` is the term dropped from the part-2
/// display, i.e. `−σ(S)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ClauseMatch {
    pub part: u8,
    pub clause: Letter,
    pub k: u32,
    pub pair: (Element, Element),
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<u32>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub x_list: Vec<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub removed: Option<Element>,
}

impl ClauseMatch {
    pub fn label(&self) -> String {
        format!("{}({})", self.part, self.clause.as_char())
    }
}

impl fmt::Display for ClauseMatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} with ({}, {})", self.label(), self.pair.0, self.pair.1)?;
        if let Some(s) = self.s {
            write!(f, ", s={s}")?;
        }
        if !self.x_list.is_empty() {
            write!(f, ", x={:?}", self.x_list)?;
        }
        if let Some(r) = self.removed {
            write!(f, ", removed {r}")?;
        }
        Ok(())
    }
}

/// Parts of the conjecture that speak about a given `k`.
pub fn applicable_parts(n: u32, k: u32) -> Vec<u8> {
    let mut parts = Vec::new();
    if k == 0 {
        parts.push(1);
    }
    if k == 1 {
        parts.push(2);
    }
    if k >= 2 && k + 2 <= n {
        parts.push(3);
    }
    if k + 1 == n {
        parts.push(4);
    }
    parts
}

fn letters_for(part: u8) -> &'static [Letter] {
    match part {
        1 | 2 => &Letter::ALL,
        _ => &Letter::ALL[..2],
    }
}

fn invalid(m: &ClauseMatch, reason: impl Into<String>) -> StructureError {
    StructureError::InvalidParams {
        clause: m.label(),
        reason: reason.into(),
    }
}

fn check_basis(spec: &GroupSpec, m: &ClauseMatch) -> Result<(), StructureError> {
    let (e1, e2) = m.pair;
    if !spec.is_basis(e1, e2) {
        return Err(invalid(m, format!("({e1}, {e2}) is not a basis")));
    }
    if spec.order(e2) != spec.exponent() {
        return Err(invalid(m, format!("ord({e2}) != {}", spec.exponent())));
    }
    Ok(())
}

fn check_genset(spec: &GroupSpec, m: &ClauseMatch) -> Result<(), StructureError> {
    let (g1, g2) = m.pair;
    if !spec.generates(g1, g2) {
        return Err(invalid(m, format!("{{{g1}, {g2}}} does not generate G")));
    }
    if spec.order(spec.add(g1, g2)) != spec.exponent() {
        return Err(invalid(m, format!("ord({g1}+{g2}) != {}", spec.exponent())));
    }
    Ok(())
}

fn check_s(m: &ClauseMatch, lo: u32, hi: u32) -> Result<u32, StructureError> {
    match m.s {
        Some(s) if (lo..=hi).contains(&s) => Ok(s),
        Some(s) => Err(invalid(m, format!("s = {s} outside [{lo}, {hi}]"))),
        None => Err(invalid(m, "missing s")),
    }
}

fn check_x_len(m: &ClauseMatch, len: usize) -> Result<(), StructureError> {
    if m.x_list.len() == len {
        Ok(())
    } else {
        Err(invalid(
            m,
            format!("expected {len} coefficients, got {}", m.x_list.len()),
        ))
    }
}

fn check_x_range(m: &ClauseMatch, lo: i64, hi: i64) -> Result<(), StructureError> {
    match m.x_list.iter().find(|x| !(lo..=hi).contains(*x)) {
        Some(x) => Err(invalid(m, format!("x = {x} outside [{lo}, {hi}]"))),
        None => Ok(()),
    }
}

/// Builds the display of a part-2 clause (length `mn+n−1`).
fn build_part2(spec: &GroupSpec, m: &ClauseMatch) -> Result<Sequence, StructureError> {
    let n = spec.n() as i64;
    let mn = spec.exponent() as i64;
    let (u, v) = m.pair;
    let mut out = Sequence::empty(*spec);
    match m.clause {
        Letter::A => {
            check_basis(spec, m)?;
            check_x_len(m, mn as usize)?;
            check_x_range(m, 0, n - 1)?;
            let sum: i64 = m.x_list.iter().sum();
            if sum.rem_euclid(n) != 1 {
                return Err(invalid(m, format!("sum of x = {sum} is not 1 mod {n}")));
            }
            out.push_n(u, (n - 1) as u32);
            for &x in &m.x_list {
                out.push_n(spec.add(spec.mul(x, u), v), 1);
            }
        }
        Letter::B => {
            check_basis(spec, m)?;
            check_x_len(m, n as usize)?;
            check_x_range(m, 0, mn - 1)?;
            let sum: i64 = m.x_list.iter().sum();
            if sum.rem_euclid(mn) != 1 {
                return Err(invalid(m, format!("sum of x = {sum} is not 1 mod {mn}")));
            }
            out.push_n(v, (mn - 1) as u32);
            for &x in &m.x_list {
                out.push_n(spec.add(spec.mul(x, v), u), 1);
            }
        }
        Letter::C | Letter::D => {
            check_genset(spec, m)?;
            let s = if m.clause == Letter::C {
                let s = check_s(m, 1, spec.m().saturating_sub(1))?;
                if !spec.mul(n, v).is_zero() {
                    return Err(invalid(m, format!("n*{v} != 0")));
                }
                s as i64
            } else {
                if m.s.is_some_and(|s| s != 1) {
                    return Err(invalid(m, "clause (d) has no s parameter"));
                }
                1
            };
            check_x_len(m, (n - 1) as usize)?;
            check_x_range(m, -1, n - 2)?;
            let sum: i64 = m.x_list.iter().sum();
            if sum != 0 {
                return Err(invalid(m, format!("sum of x = {sum} is not 0")));
            }
            out.push_n(u, (s * n - 1) as u32);
            out.push_n(spec.add(u, v), (mn - s * n + 1) as u32);
            for &x in &m.x_list {
                out.push_n(spec.add(spec.mul(-x, u), v), 1);
            }
        }
    }
    Ok(out)
}

/// The sequence described by a clause and its parameters.
///
/// Part 3 displays are accepted for every `k ∈ [0, n−1]`; the other parts
/// only at their own `k`.
pub fn build_clause(spec: &GroupSpec, m: &ClauseMatch) -> Result<Sequence, StructureError> {
    let n = spec.n();
    let mn = spec.exponent();
    if m.k > n - 1 {
        return Err(StructureError::KOutOfRange { k: m.k, max: n - 1 });
    }
    let part_k_ok = match m.part {
        1 => m.k == 0,
        2 => m.k == 1,
        3 => true,
        4 => m.k == n - 1,
        _ => return Err(StructureError::UnknownClause(m.label())),
    };
    if !part_k_ok {
        return Err(StructureError::PartNotApplicable { part: m.part, k: m.k });
    }
    if !letters_for(m.part).contains(&m.clause) {
        return Err(StructureError::UnknownClause(m.label()));
    }
    if !spec.contains(m.pair.0) || !spec.contains(m.pair.1) {
        return Err(invalid(m, "elements outside G"));
    }
    if m.part != 1 && m.removed.is_some() {
        return Err(invalid(m, "only part 1 removes a term"));
    }
    let (u, v) = m.pair;
    let k = m.k;
    match (m.part, m.clause) {
        (1, _) => {
            let removed = m.removed.ok_or_else(|| invalid(m, "missing removed term"))?;
            let full = build_part2(
                spec,
                &ClauseMatch {
                    part: 2,
                    k: 1,
                    removed: None,
                    ..m.clone()
                },
            )?;
            full.remove_term(removed, 1)
                .map_err(|_| invalid(m, format!("{removed} is not a term of the part-2 display")))
        }
        (2, _) => build_part2(spec, m),
        (3, Letter::A) => {
            check_basis(spec, m)?;
            let s = check_s(m, 1, spec.m())?;
            check_x_len(m, 0)?;
            Sequence::from_counts(
                *spec,
                [(u, n - 1), (v, s * n - 1), (spec.add(u, v), (mn - s * n) + k)],
            )
            .map_err(|e| invalid(m, e.to_string()))
        }
        (3 | 4, Letter::B) => {
            check_genset(spec, m)?;
            check_x_len(m, 0)?;
            if m.s.is_some() {
                return Err(invalid(m, "clause (b) has no s parameter"));
            }
            Sequence::from_counts(
                *spec,
                [(u, n - 1), (v, n - 1), (spec.add(u, v), (mn - n) + k)],
            )
            .map_err(|e| invalid(m, e.to_string()))
        }
        (4, Letter::A) => {
            check_basis(spec, m)?;
            let s = check_s(m, 1, spec.m())?;
            check_x_len(m, 1)?;
            let x = m.x_list[0];
            if !(1..n as i64).contains(&x) || gcd(x as u64, n as u64) != 1 {
                return Err(invalid(m, format!("x = {x} not a unit in [1, n-1]")));
            }
            let third = spec.add(spec.mul(x, u), v);
            Sequence::from_counts(*spec, [(u, n - 1), (v, s * n - 1), (third, mn - s * n + n - 1)])
                .map_err(|e| invalid(m, e.to_string()))
        }
        _ => Err(StructureError::UnknownClause(m.label())),
    }
}

/// Builds the candidate, keeping it only if it reproduces `target`.
fn confirm(spec: &GroupSpec, target: &Sequence, cand: ClauseMatch) -> Option<ClauseMatch> {
    match build_clause(spec, &cand) {
        Ok(s) if &s == target => Some(cand),
        _ => None,
    }
}

fn ordered_pairs(supp: &[Element]) -> impl Iterator<Item = (Element, Element)> + '_ {
    supp.iter()
        .flat_map(move |&p| supp.iter().map(move |&q| (p, q)))
        .filter(|(p, q)| p != q)
}

/// `x` in `lo..lo+count` with `x·base + offset = target`, if any.
fn solve_coefficient(
    spec: &GroupSpec,
    base: Element,
    offset: Element,
    target: Element,
    lo: i64,
    count: i64,
) -> Option<i64> {
    (lo..lo + count).find(|&x| spec.add(spec.mul(x, base), offset) == target)
}

fn blank(part: u8, clause: Letter, k: u32, pair: (Element, Element)) -> ClauseMatch {
    ClauseMatch {
        part,
        clause,
        k,
        pair,
        s: None,
        x_list: Vec::new(),
        removed: None,
    }
}

/// Part-2 (a)/(b): one element repeated, the rest in one coset of it.
fn match_part2_ab(spec: &GroupSpec, s: &Sequence, letter: Letter) -> Option<ClauseMatch> {
    let n = spec.n() as i64;
    let mn = spec.exponent() as i64;
    // (a): repeated e1^[n-1], coset of <e1>, x in [0, n-1]
    // (b): repeated e2^[mn-1], coset of <e2>, x in [0, mn-1]
    let (reps, span) = match letter {
        Letter::A => (n - 1, n),
        _ => (mn - 1, mn),
    };
    for (r, c) in s.counts() {
        if (c as i64) < reps {
            continue;
        }
        let rest = s.remove_term(r, reps as u32).ok()?;
        let anchor = rest.support()[0];
        for j in 0..span {
            let other = spec.add(anchor, spec.mul(j, r));
            let pair = match letter {
                Letter::A => (r, other),
                _ => (other, r),
            };
            if !spec.is_basis(pair.0, pair.1) || spec.order(pair.1) != spec.exponent() {
                continue;
            }
            let xs: Option<Vec<i64>> = rest
                .terms()
                .map(|t| solve_coefficient(spec, r, other, t, 0, span))
                .collect();
            let Some(mut xs) = xs else { continue };
            xs.sort_unstable();
            let mut cand = blank(2, letter, 1, pair);
            cand.x_list = xs;
            if let Some(hit) = confirm(spec, s, cand) {
                return Some(hit);
            }
        }
    }
    None
}

/// Candidates for part-2 (c)/(d) with every condition checked except the
/// integer sum of the coefficients. Yields `(params, sum of x)`.
fn part2_cd_candidates(
    spec: &GroupSpec,
    s: &Sequence,
    letter: Letter,
) -> Vec<(ClauseMatch, i64)> {
    let n = spec.n() as i64;
    let mn = spec.exponent() as i64;
    let s_range: Vec<i64> = match letter {
        Letter::C => (1..spec.m() as i64).collect(),
        _ => vec![1],
    };
    let supp = s.support();
    let mut out = Vec::new();
    for &g1 in &supp {
        for &z in &supp {
            let g2 = spec.sub(z, g1);
            if letter == Letter::C && !spec.mul(n, g2).is_zero() {
                continue;
            }
            if spec.order(z) as i64 != mn || !spec.generates(g1, g2) {
                continue;
            }
            for &sv in &s_range {
                let Ok(rest) = s
                    .remove_term(g1, (sv * n - 1) as u32)
                    .and_then(|r| r.remove_term(z, (mn - sv * n + 1) as u32))
                else {
                    continue;
                };
                let xs: Option<Vec<i64>> = rest
                    .terms()
                    .map(|t| solve_coefficient(spec, spec.neg(g1), g2, t, -1, n))
                    .collect();
                let Some(mut xs) = xs else { continue };
                xs.sort_unstable();
                let sum = xs.iter().sum();
                let mut cand = blank(2, letter, 1, (g1, g2));
                cand.s = (letter == Letter::C).then_some(sv as u32);
                cand.x_list = xs;
                out.push((cand, sum));
            }
        }
    }
    out
}

fn match_part2(spec: &GroupSpec, s: &Sequence, letter: Letter) -> Option<ClauseMatch> {
    match letter {
        Letter::A | Letter::B => match_part2_ab(spec, s, letter),
        _ => part2_cd_candidates(spec, s, letter)
            .into_iter()
            .filter(|(_, sum)| *sum == 0)
            .find_map(|(cand, _)| confirm(spec, s, cand)),
    }
}

fn match_part34(spec: &GroupSpec, s: &Sequence, part: u8, letter: Letter, k: u32) -> Option<ClauseMatch> {
    let n = spec.n();
    let supp = s.support();
    for (p, q) in ordered_pairs(&supp) {
        let mut cand = blank(part, letter, k, (p, q));
        if letter == Letter::A {
            let mq = s.multiplicity(q) + 1;
            if mq % n != 0 {
                continue;
            }
            cand.s = Some(mq / n);
            if part == 4 {
                let mut hit = None;
                for &r in &supp {
                    if r == p || r == q {
                        continue;
                    }
                    if let Some(x) = solve_coefficient(spec, p, q, r, 1, n as i64 - 1) {
                        let mut c = cand.clone();
                        c.x_list = vec![x];
                        hit = confirm(spec, s, c);
                        if hit.is_some() {
                            break;
                        }
                    }
                }
                if hit.is_some() {
                    return hit;
                }
                continue;
            }
        }
        if let Some(hit) = confirm(spec, s, cand) {
            return Some(hit);
        }
    }
    None
}

/// Tries one clause's display against `s`, whether or not the part applies
/// to `k` (part 3 displays exist for every `k`).
pub fn match_display(s: &Sequence, part: u8, letter: Letter, k: u32) -> Option<ClauseMatch> {
    let spec = s.spec();
    if s.len() != (spec.exponent() + spec.n() - 2 + k) as usize {
        return None;
    }
    match part {
        1 => {
            let g = spec.neg(s.sum());
            let full = s.with_term(g, 1).ok()?;
            let mut hit = match_part2(&spec, &full, letter)?;
            hit.part = 1;
            hit.k = 0;
            hit.removed = Some(g);
            confirm(&spec, s, hit)
        }
        2 => match_part2(&spec, s, letter),
        3 | 4 => match_part34(&spec, s, part, letter, k),
        _ => None,
    }
}

fn check_k(spec: &GroupSpec, k: u32) -> Result<(), StructureError> {
    if k > spec.n() - 1 {
        Err(StructureError::KOutOfRange {
            k,
            max: spec.n() - 1,
        })
    } else {
        Ok(())
    }
}

/// First matching clause over the parts applicable to `k`, in the order
/// part, then (a), (b), (c), (d).
pub fn match_clause(s: &Sequence, k: u32) -> Result<Option<ClauseMatch>, StructureError> {
    let spec = s.spec();
    check_k(&spec, k)?;
    for part in applicable_parts(spec.n(), k) {
        for &letter in letters_for(part) {
            if let Some(hit) = match_display(s, part, letter, k) {
                return Ok(Some(hit));
            }
        }
    }
    Ok(None)
}

/// One match per clause that fits, over every applicable part.
pub fn match_all(s: &Sequence, k: u32) -> Result<Vec<ClauseMatch>, StructureError> {
    let spec = s.spec();
    check_k(&spec, k)?;
    let mut out = Vec::new();
    for part in applicable_parts(spec.n(), k) {
        for &letter in letters_for(part) {
            if let Some(hit) = match_display(s, part, letter, k) {
                out.push(hit);
            }
        }
    }
    Ok(out)
}

/// Conditions an extremal sequence must meet: every part applicable to `k`
/// has a matching clause, and for `m = 1` that clause includes (a).
/// Returns the failed conditions.
pub fn conjecture_failures(s: &Sequence, k: u32) -> Result<Vec<String>, StructureError> {
    let spec = s.spec();
    check_k(&spec, k)?;
    let mut out = Vec::new();
    for part in applicable_parts(spec.n(), k) {
        let hits: Vec<Letter> = letters_for(part)
            .iter()
            .copied()
            .filter(|&l| match_display(s, part, l, k).is_some())
            .collect();
        if hits.is_empty() {
            out.push(format!("part {part}: no clause matches"));
        } else if spec.m() == 1 && !hits.contains(&Letter::A) {
            out.push(format!("part {part}: m = 1 but clause (a) does not match"));
        }
    }
    Ok(out)
}

/// A part-2 (c)/(d) fit that fails only the integer condition
/// `Σ x_i = 0`, while `Σ x_i ≡ 0 (mod n)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NearMiss {
    pub params: ClauseMatch,
    pub x_sum: i64,
}

pub fn near_misses(s: &Sequence, k: u32) -> Result<Vec<NearMiss>, StructureError> {
    let spec = s.spec();
    check_k(&spec, k)?;
    let n = spec.n() as i64;
    let (target, removed) = match k {
        0 => {
            let g = spec.neg(s.sum());
            (s.with_term(g, 1).expect("element of G"), Some(g))
        }
        1 => (s.clone(), None),
        _ => return Ok(Vec::new()),
    };
    if target.len() != (spec.exponent() + spec.n() - 1) as usize {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for letter in [Letter::C, Letter::D] {
        for (mut cand, sum) in part2_cd_candidates(&spec, &target, letter) {
            if sum != 0 && sum.rem_euclid(n) == 0 {
                if let Some(g) = removed {
                    cand.part = 1;
                    cand.k = 0;
                    cand.removed = Some(g);
                }
                out.push(NearMiss { params: cand, x_sum: sum });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine;
    use crate::search::{extremal_horizon, extremal_length};

    fn spec(n: u64, m: u64) -> GroupSpec {
        GroupSpec::new(n, m).unwrap()
    }

    fn el(a: u32, b: u32) -> Element {
        Element { a, b }
    }

    fn params(part: u8, clause: Letter, k: u32, pair: (Element, Element)) -> ClauseMatch {
        blank(part, clause, k, pair)
    }

    #[test]
    fn part3a_display() {
        let g = spec(4, 2);
        let mut p = params(3, Letter::A, 2, g.standard_basis());
        p.s = Some(1);
        let s = build_clause(&g, &p).unwrap();
        assert_eq!(s.to_string(), "(0,1)^[3] (1,0)^[3] (1,1)^[6]");
        assert_eq!(s.len(), 12);
        assert_eq!(match_display(&s, 3, Letter::A, 2).map(|m| build_clause(&g, &m).unwrap()), Some(s));
    }

    #[test]
    fn part4b_display() {
        let g = spec(3, 1);
        let (e1, e2) = g.standard_basis();
        let s = build_clause(&g, &params(4, Letter::B, 2, (e1, e2))).unwrap();
        assert_eq!(s, Sequence::from_counts(g, [(e1, 2), (e2, 2), (el(1, 1), 2)]).unwrap());
        let hit = match_clause(&s, 2).unwrap().unwrap();
        assert_eq!(hit.part, 4);
        assert_eq!(build_clause(&g, &hit).unwrap(), s);
    }

    #[test]
    fn part2a_display() {
        let g = spec(2, 1);
        let mut p = params(2, Letter::A, 1, g.standard_basis());
        p.x_list = vec![0, 1];
        let s = build_clause(&g, &p).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.to_string(), "(0,1) (1,0) (1,1)");
        assert!(engine::is_minimal_zero_sum(&s).unwrap());
        p.x_list = vec![0, 0];
        assert!(matches!(build_clause(&g, &p), Err(StructureError::InvalidParams { .. })));
    }

    #[test]
    fn invalid_parameters_are_named() {
        let g = spec(3, 2);
        let mut p = params(3, Letter::A, 1, (el(1, 0), el(2, 0)));
        p.s = Some(1);
        let err = build_clause(&g, &p).unwrap_err().to_string();
        assert!(err.contains("not a basis"), "{err}");
        p.pair = g.standard_basis();
        p.s = Some(3);
        assert!(build_clause(&g, &p).unwrap_err().to_string().contains("s = 3"));
        let mut q = params(4, Letter::A, 2, g.standard_basis());
        q.s = Some(1);
        q.x_list = vec![3];
        assert!(build_clause(&g, &q).is_err());
        assert!(matches!(
            build_clause(&g, &params(2, Letter::A, 2, g.standard_basis())),
            Err(StructureError::PartNotApplicable { .. })
        ));
    }

    #[test]
    fn permuted_roles_are_found() {
        // (0,1) + (1,2) = (1,0): a 4(b) display with the repeated sum listed first
        let g = spec(3, 1);
        let s = Sequence::parse("(1,0)^[2] (0,1)^[2] (1,2)^[2]", g).unwrap();
        assert!(!engine::has_zero_sum_leq(&s, 3).unwrap());
        let hit = match_clause(&s, 2).unwrap().unwrap();
        assert_eq!(hit.label(), "4(a)");
        assert_eq!(build_clause(&g, &hit).unwrap(), s);
        let b = match_display(&s, 4, Letter::B, 2).unwrap();
        assert_eq!(g.add(b.pair.0, b.pair.1), el(1, 0));
        assert!(match_clause(&s, 3).is_err());
    }

    #[test]
    fn short_zero_sum_has_no_match() {
        let g = spec(3, 1);
        let s = Sequence::parse("(1,0)^[2] (0,1)^[2] (1,1)^[1] (2,2)^[1]", g).unwrap();
        assert!(engine::has_zero_sum_leq(&s, 3).unwrap());
        assert_eq!(match_clause(&s, 2).unwrap(), None);
    }

    /// Every valid parameterization of every applicable clause at small specs.
    fn all_params(g: GroupSpec, k: u32) -> Vec<ClauseMatch> {
        let n = g.n() as i64;
        let mn = g.exponent() as i64;
        let elems: Vec<Element> = g.elements().collect();
        let mut out = Vec::new();
        for part in applicable_parts(g.n(), k) {
            for &letter in letters_for(part) {
                for &u in &elems {
                    for &v in &elems {
                        let base = params(part, letter, k, (u, v));
                        let mut cands = Vec::new();
                        match (part, letter) {
                            (1 | 2, Letter::A) => {
                                if !g.is_basis(u, v) {
                                    continue;
                                }
                                // one x-list per multiset: nondecreasing lists
                                for xs in nondecreasing(mn as usize, 0, n - 1) {
                                    if xs.iter().sum::<i64>().rem_euclid(n) == 1 {
                                        let mut c = base.clone();
                                        c.x_list = xs;
                                        cands.push(c);
                                    }
                                }
                            }
                            (1 | 2, Letter::B) => {
                                if !g.is_basis(u, v) {
                                    continue;
                                }
                                for xs in nondecreasing(n as usize, 0, mn - 1) {
                                    if xs.iter().sum::<i64>().rem_euclid(mn) == 1 {
                                        let mut c = base.clone();
                                        c.x_list = xs;
                                        cands.push(c);
                                    }
                                }
                            }
                            (1 | 2, _) => {
                                if !g.generates(u, v) {
                                    continue;
                                }
                                let ss: Vec<Option<u32>> = if letter == Letter::C {
                                    (1..g.m()).map(Some).collect()
                                } else {
                                    vec![None]
                                };
                                for s in ss {
                                    for xs in nondecreasing((n - 1) as usize, -1, n - 2) {
                                        if xs.iter().sum::<i64>() == 0 {
                                            let mut c = base.clone();
                                            c.s = s;
                                            c.x_list = xs;
                                            cands.push(c);
                                        }
                                    }
                                }
                            }
                            (_, Letter::A) => {
                                for s in 1..=g.m() {
                                    let mut c = base.clone();
                                    c.s = Some(s);
                                    if part == 4 {
                                        for x in 1..n {
                                            let mut c = c.clone();
                                            c.x_list = vec![x];
                                            cands.push(c);
                                        }
                                    } else {
                                        cands.push(c);
                                    }
                                }
                            }
                            _ => cands.push(base),
                        }
                        for c in cands {
                            if part == 1 {
                                let full = ClauseMatch { part: 2, k: 1, ..c.clone() };
                                if let Ok(t) = build_clause(&g, &full) {
                                    for r in t.support() {
                                        out.push(ClauseMatch { removed: Some(r), ..c.clone() });
                                    }
                                }
                            } else if build_clause(&g, &c).is_ok() {
                                out.push(c);
                            }
                        }
                    }
                }
            }
        }
        out
    }

    fn nondecreasing(len: usize, lo: i64, hi: i64) -> Vec<Vec<i64>> {
        fn go(len: usize, lo: i64, hi: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
            if cur.len() == len {
                out.push(cur.clone());
                return;
            }
            for x in lo..=hi {
                cur.push(x);
                go(len, x, hi, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        go(len, lo, hi, &mut Vec::new(), &mut out);
        out
    }

    #[test]
    fn forward_soundness_and_round_trip() {
        for (n, m) in [(2, 1), (2, 2), (3, 1), (3, 2), (4, 1), (2, 3)] {
            let g = spec(n, m);
            for k in 0..n as u32 {
                let all = all_params(g, k);
                assert!(!all.is_empty(), "{g} k={k}");
                for p in all {
                    let s = build_clause(&g, &p).unwrap();
                    assert_eq!(s.len(), extremal_length(g, k), "{p}");
                    let ell = extremal_horizon(g, k).min(s.len());
                    assert!(!engine::has_zero_sum_leq(&s, ell).unwrap(), "{g} {p} -> {s}");
                    let hit = match_display(&s, p.part, p.clause, k)
                        .unwrap_or_else(|| panic!("{g} {p} -> {s} not recognized"));
                    assert_eq!(build_clause(&g, &hit).unwrap(), s);
                }
            }
        }
    }

    #[test]
    fn matches_are_automorphism_stable() {
        for (n, m, k) in [(3, 2, 1), (3, 1, 2), (2, 2, 0), (4, 1, 2)] {
            let g = spec(n, m);
            let auts = g.automorphisms().unwrap();
            for p in all_params(g, k).into_iter().step_by(7) {
                let s = build_clause(&g, &p).unwrap();
                for alpha in auts.iter().step_by(5) {
                    let t = s.apply(alpha);
                    assert!(match_clause(&t, k).unwrap().is_some(), "{g} {p} image {t}");
                }
            }
        }
    }

    #[test]
    fn part3_display_at_k1_is_extremal() {
        let g = spec(3, 2);
        let mut p = params(3, Letter::A, 1, g.standard_basis());
        p.s = Some(1);
        let s = build_clause(&g, &p).unwrap();
        assert_eq!(s.len(), 8);
        assert!(!engine::has_zero_sum_leq(&s, 7).unwrap());
    }

    #[test]
    fn conjecture_check_on_displays() {
        let g = spec(2, 1);
        let s = Sequence::parse("(0,1) (1,0) (1,1)", g).unwrap();
        assert!(conjecture_failures(&s, 1).unwrap().is_empty());
        let g = spec(3, 1);
        let s = Sequence::parse("(1,0)^[2] (0,1)^[2] (1,1) (2,2)", g).unwrap();
        assert_eq!(conjecture_failures(&s, 2).unwrap().len(), 1);
    }

    #[test]
    fn applicable() {
        assert_eq!(applicable_parts(2, 1), vec![2, 4]);
        assert_eq!(applicable_parts(5, 0), vec![1]);
        assert_eq!(applicable_parts(5, 2), vec![3]);
        assert_eq!(applicable_parts(5, 4), vec![4]);
        assert_eq!(applicable_parts(3, 1), vec![2]);
    }
}
