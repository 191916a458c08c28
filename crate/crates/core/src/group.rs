//! Arithmetic in the rank-two group `G = C_n ⊕ C_mn`.
//!
//! Elements are reduced coordinate pairs `(a, b)` with `0 ≤ a < n` and
//! `0 ≤ b < mn`. The derived ordering on [`Element`] agrees with the
//! linearization `a·mn + b`, so sorting elements and sorting their linear
//! indices give the same order.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest group order accepted by [`GroupSpec::new`].
pub const MAX_CARDINALITY: u64 = 1 << 24;

/// Default bound on `|G|` for automorphism enumeration.
pub const DEFAULT_AUT_BOUND: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("n must be at least 2 (got {0})")]
    RankOneRejected(u64),
    #[error("m must be at least 1 (got {0})")]
    InvalidM(u64),
    #[error("group order {0} exceeds the supported maximum {MAX_CARDINALITY}")]
    TooLarge(u64),
    #[error("element ({a},{b}) does not belong to {spec}")]
    Mismatch { a: u64, b: u64, spec: GroupSpec },
    #[error("|G| = {order} exceeds the automorphism bound {bound}")]
    AutBoundExceeded { order: usize, bound: usize },
    #[error("invalid group literal {0:?}: expected \"n,m\"")]
    BadLiteral(String),
}

/// The pair `(n, m)` describing `C_n ⊕ C_mn`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct GroupSpec {
    n: u32,
    m: u32,
}

#[derive(Serialize, Deserialize)]
struct RawSpec {
    n: u64,
    m: u64,
}

impl TryFrom<RawSpec> for GroupSpec {
    type Error = GroupError;
    fn try_from(raw: RawSpec) -> Result<Self, Self::Error> {
        GroupSpec::new(raw.n, raw.m)
    }
}

impl From<GroupSpec> for RawSpec {
    fn from(spec: GroupSpec) -> Self {
        RawSpec {
            n: spec.n as u64,
            m: spec.m as u64,
        }
    }
}

/// A reduced element `(a, b)` of some [`GroupSpec`].
///
/// Serialized as the text `"(a,b)"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Element {
    pub a: u32,
    pub b: u32,
}

impl Element {
    pub const ZERO: Element = Element { a: 0, b: 0 };

    pub fn is_zero(self) -> bool {
        self.a == 0 && self.b == 0
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.a, self.b)
    }
}

impl From<Element> for String {
    fn from(e: Element) -> String {
        e.to_string()
    }
}

impl FromStr for Element {
    type Err = GroupError;

    /// Parses `"(a,b)"` without reducing; membership is checked by the group.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || GroupError::BadLiteral(s.to_string());
        let inner = s
            .trim()
            .strip_prefix('(')
            .and_then(|t| t.strip_suffix(')'))
            .ok_or_else(bad)?;
        let (a, b) = inner.split_once(',').ok_or_else(bad)?;
        Ok(Element {
            a: a.trim().parse().map_err(|_| bad())?,
            b: b.trim().parse().map_err(|_| bad())?,
        })
    }
}

impl TryFrom<String> for Element {
    type Error = GroupError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

impl GroupSpec {
    pub fn new(n: u64, m: u64) -> Result<Self, GroupError> {
        if n < 2 {
            return Err(GroupError::RankOneRejected(n));
        }
        if m < 1 {
            return Err(GroupError::InvalidM(m));
        }
        let order = n
            .checked_mul(n)
            .and_then(|x| x.checked_mul(m))
            .unwrap_or(u64::MAX);
        if order > MAX_CARDINALITY {
            return Err(GroupError::TooLarge(order));
        }
        Ok(GroupSpec {
            n: n as u32,
            m: m as u32,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// `|G| = n²m`.
    pub fn cardinality(&self) -> usize {
        (self.n as usize) * (self.n as usize) * (self.m as usize)
    }

    /// `exp(G) = mn`.
    pub fn exponent(&self) -> u32 {
        self.n * self.m
    }

    /// Builds an element from arbitrary integer coordinates, reducing them.
    pub fn element(&self, a: i64, b: i64) -> Element {
        Element {
            a: a.rem_euclid(self.n as i64) as u32,
            b: b.rem_euclid(self.exponent() as i64) as u32,
        }
    }

    /// Builds an element from coordinates that must already be reduced.
    pub fn try_element(&self, a: u64, b: u64) -> Result<Element, GroupError> {
        if a < self.n as u64 && b < self.exponent() as u64 {
            Ok(Element {
                a: a as u32,
                b: b as u32,
            })
        } else {
            Err(GroupError::Mismatch { a, b, spec: *self })
        }
    }

    pub fn contains(&self, e: Element) -> bool {
        e.a < self.n && e.b < self.exponent()
    }

    fn check(&self, e: Element) -> Result<Element, GroupError> {
        self.try_element(e.a as u64, e.b as u64)
    }

    pub fn zero(&self) -> Element {
        Element::ZERO
    }

    /// Standard basis `((1,0), (0,1))`.
    pub fn standard_basis(&self) -> (Element, Element) {
        (Element { a: 1, b: 0 }, Element { a: 0, b: 1 })
    }

    pub fn add(&self, x: Element, y: Element) -> Element {
        debug_assert!(self.contains(x) && self.contains(y));
        let mut a = x.a + y.a;
        if a >= self.n {
            a -= self.n;
        }
        let mut b = x.b + y.b;
        if b >= self.exponent() {
            b -= self.exponent();
        }
        Element { a, b }
    }

    /// Addition that rejects operands not belonging to this group.
    pub fn try_add(&self, x: Element, y: Element) -> Result<Element, GroupError> {
        Ok(self.add(self.check(x)?, self.check(y)?))
    }

    pub fn neg(&self, x: Element) -> Element {
        self.element(-(x.a as i64), -(x.b as i64))
    }

    pub fn sub(&self, x: Element, y: Element) -> Element {
        self.add(x, self.neg(y))
    }

    /// `k·x` for any integer `k`.
    pub fn mul(&self, k: i64, x: Element) -> Element {
        let n = self.n as i128;
        let e = self.exponent() as i128;
        let k = k as i128;
        Element {
            a: (k * x.a as i128).rem_euclid(n) as u32,
            b: (k * x.b as i128).rem_euclid(e) as u32,
        }
    }

    pub fn linear_index(&self, e: Element) -> usize {
        e.a as usize * self.exponent() as usize + e.b as usize
    }

    pub fn from_index(&self, idx: usize) -> Element {
        let e = self.exponent() as usize;
        debug_assert!(idx < self.cardinality());
        Element {
            a: (idx / e) as u32,
            b: (idx % e) as u32,
        }
    }

    /// All elements in linear-index order.
    pub fn elements(&self) -> impl Iterator<Item = Element> + '_ {
        (0..self.cardinality()).map(move |i| self.from_index(i))
    }

    /// Least `t ≥ 1` with `t·g = 0`.
    pub fn order(&self, g: Element) -> u32 {
        let n = self.n as u64;
        let e = self.exponent() as u64;
        let oa = n / gcd(g.a as u64, n);
        let ob = e / gcd(g.b as u64, e);
        lcm(oa, ob) as u32
    }

    fn cyclic_subgroup(&self, g: Element) -> Vec<Element> {
        let mut out = Vec::with_capacity(self.order(g) as usize);
        let mut cur = Element::ZERO;
        loop {
            out.push(cur);
            cur = self.add(cur, g);
            if cur.is_zero() {
                break;
            }
        }
        out.sort_unstable();
        out
    }

    /// True iff `G = ⟨e1⟩ ⊕ ⟨e2⟩` (internal direct sum).
    pub fn is_basis(&self, e1: Element, e2: Element) -> bool {
        let o1 = self.order(e1) as usize;
        let o2 = self.order(e2) as usize;
        if o1 * o2 != self.cardinality() {
            return false;
        }
        let span2 = self.cyclic_subgroup(e2);
        let mut cur = e1;
        for _ in 1..o1 {
            if span2.binary_search(&cur).is_ok() {
                return false;
            }
            cur = self.add(cur, e1);
        }
        true
    }

    /// True iff `⟨g1, g2⟩ = G`.
    pub fn generates(&self, g1: Element, g2: Element) -> bool {
        self.span_size(g1, g2) == self.cardinality()
    }

    /// `|⟨g1, g2⟩|`, computed by marking every combination `i·g1 + j·g2`.
    pub fn span_size(&self, g1: Element, g2: Element) -> usize {
        let mut seen = vec![false; self.cardinality()];
        let mut count = 0;
        let o1 = self.order(g1);
        let o2 = self.order(g2);
        let mut row = Element::ZERO;
        for _ in 0..o1 {
            let mut cur = row;
            for _ in 0..o2 {
                let idx = self.linear_index(cur);
                if !seen[idx] {
                    seen[idx] = true;
                    count += 1;
                }
                cur = self.add(cur, g2);
            }
            row = self.add(row, g1);
        }
        count
    }

    /// Every automorphism of `G`, using the default bound on `|G|`.
    pub fn automorphisms(&self) -> Result<Vec<Automorphism>, GroupError> {
        self.automorphisms_bounded(DEFAULT_AUT_BOUND)
    }

    /// Every automorphism of `G`, identity first, the rest ordered by
    /// generator images.
    ///
    /// A pair of images defines a homomorphism as soon as `n·img1 = 0`; it
    /// is bijective iff the images generate `G`, which for orders `(n, mn)`
    /// is the basis condition.
    pub fn automorphisms_bounded(&self, bound: usize) -> Result<Vec<Automorphism>, GroupError> {
        let order = self.cardinality();
        if order > bound {
            return Err(GroupError::AutBoundExceeded { order, bound });
        }
        let n = self.n;
        let e = self.exponent();
        let firsts: Vec<Element> = self.elements().filter(|&g| self.order(g) == n).collect();
        let seconds: Vec<Element> = self.elements().filter(|&g| self.order(g) == e).collect();
        let identity = Automorphism::identity(self);
        let mut out = vec![identity];
        for &img1 in &firsts {
            for &img2 in &seconds {
                let alpha = Automorphism { img1, img2 };
                if alpha != identity && self.is_basis(img1, img2) {
                    out.push(alpha);
                }
            }
        }
        Ok(out)
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.n, self.m)
    }
}

impl FromStr for GroupSpec {
    type Err = GroupError;

    /// Parses `"n,m"`, e.g. `"3,2"` for `C_3 ⊕ C_6`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || GroupError::BadLiteral(s.to_string());
        let (n, m) = s.trim().split_once(',').ok_or_else(bad)?;
        let n: u64 = n.trim().parse().map_err(|_| bad())?;
        let m: u64 = m.trim().parse().map_err(|_| bad())?;
        GroupSpec::new(n, m)
    }
}

/// An automorphism given by the images of `(1,0)` and `(0,1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Automorphism {
    pub img1: Element,
    pub img2: Element,
}

impl Automorphism {
    pub fn identity(spec: &GroupSpec) -> Self {
        let (img1, img2) = spec.standard_basis();
        Automorphism { img1, img2 }
    }

    /// `α(a, b) = a·img1 + b·img2`.
    pub fn apply(&self, spec: &GroupSpec, x: Element) -> Element {
        spec.add(
            spec.mul(x.a as i64, self.img1),
            spec.mul(x.b as i64, self.img2),
        )
    }

    /// `self ∘ other`.
    pub fn compose(&self, spec: &GroupSpec, other: &Automorphism) -> Automorphism {
        Automorphism {
            img1: self.apply(spec, other.img1),
            img2: self.apply(spec, other.img2),
        }
    }

    /// Checks well-definedness and bijectivity of the induced map directly.
    pub fn is_valid(&self, spec: &GroupSpec) -> bool {
        if !spec.contains(self.img1) || !spec.contains(self.img2) {
            return false;
        }
        if !spec.mul(spec.n() as i64, self.img1).is_zero() {
            return false;
        }
        let mut seen = vec![false; spec.cardinality()];
        for x in spec.elements() {
            let idx = spec.linear_index(self.apply(spec, x));
            if std::mem::replace(&mut seen[idx], true) {
                return false;
            }
        }
        true
    }

    /// The induced permutation of linear indices.
    pub fn permutation(&self, spec: &GroupSpec) -> Vec<u32> {
        spec.elements()
            .map(|x| spec.linear_index(self.apply(spec, x)) as u32)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: u64, m: u64) -> GroupSpec {
        GroupSpec::new(n, m).unwrap()
    }

    fn el(a: u32, b: u32) -> Element {
        Element { a, b }
    }

    #[test]
    fn construction() {
        assert_eq!(GroupSpec::new(1, 3), Err(GroupError::RankOneRejected(1)));
        assert_eq!(GroupSpec::new(2, 0), Err(GroupError::InvalidM(0)));
        let g = spec(3, 2);
        assert_eq!(g.cardinality(), 18);
        assert_eq!(g.exponent(), 6);
        assert_eq!("3,2".parse::<GroupSpec>().unwrap(), g);
        assert!("3".parse::<GroupSpec>().is_err());
        assert!("1,4".parse::<GroupSpec>().is_err());
    }

    #[test]
    fn addition() {
        let g = spec(3, 2);
        assert_eq!(g.add(el(1, 5), el(2, 1)), el(0, 0));
        assert_eq!(g.add(Element::ZERO, el(2, 3)), el(2, 3));
        assert_eq!(spec(2, 2).add(el(1, 3), el(1, 3)), el(0, 2));
        assert!(g.try_add(el(3, 0), el(0, 0)).is_err());
        assert!(g.try_add(el(0, 6), el(0, 0)).is_err());
    }

    #[test]
    fn linear_index_is_bijective() {
        let g = spec(3, 2);
        for i in 0..g.cardinality() {
            assert_eq!(g.linear_index(g.from_index(i)), i);
        }
        let mut sorted: Vec<Element> = g.elements().collect();
        sorted.sort();
        assert_eq!(sorted, g.elements().collect::<Vec<_>>());
    }

    #[test]
    fn orders_by_iteration() {
        for g in [spec(3, 2), spec(2, 2), spec(4, 2)] {
            for x in g.elements() {
                let mut t = 1;
                let mut cur = x;
                while !cur.is_zero() {
                    cur = g.add(cur, x);
                    t += 1;
                }
                assert_eq!(g.order(x), t, "order of {x} in {g}");
                assert_eq!(g.exponent() % t, 0);
            }
        }
        assert_eq!(spec(3, 2).order(el(0, 1)), 6);
        assert_eq!(spec(3, 2).order(el(1, 2)), 3);
        assert_eq!(spec(3, 2).order(Element::ZERO), 1);
    }

    #[test]
    fn basis_examples() {
        let g = spec(3, 1);
        assert!(spec(4, 3).is_basis(el(1, 0), el(0, 1)));
        assert!(!g.is_basis(el(1, 0), el(2, 0)));
        assert!(g.is_basis(el(1, 1), el(0, 1)));
    }

    #[test]
    fn generates_examples() {
        assert!(spec(4, 2).generates(el(1, 0), el(0, 1)));
        assert!(!spec(2, 1).generates(el(0, 0), el(0, 1)));
        assert!(spec(3, 1).generates(el(1, 1), el(1, 2)));
    }

    #[test]
    fn basis_implies_generation_but_not_conversely() {
        let g = spec(2, 2);
        let mut witness = None;
        for x in g.elements() {
            for y in g.elements() {
                if g.is_basis(x, y) {
                    assert!(g.generates(x, y));
                } else if g.generates(x, y) && witness.is_none() {
                    witness = Some((x, y));
                }
            }
        }
        let (x, y) = witness.expect("a generating non-basis pair exists in C_2+C_4");
        assert!(g.generates(x, y) && !g.is_basis(x, y));
    }

    #[test]
    fn automorphisms_of_klein_group() {
        let g = spec(2, 1);
        let auts = g.automorphisms().unwrap();
        assert_eq!(auts.len(), 6);
        assert_eq!(auts[0], Automorphism::identity(&g));
    }

    #[test]
    fn automorphism_lists_are_groups() {
        for g in [spec(2, 1), spec(2, 2), spec(3, 1), spec(3, 2), spec(2, 3)] {
            let auts = g.automorphisms().unwrap();
            // brute force over all image pairs agrees with the basis filter
            let brute = g
                .elements()
                .flat_map(|x| g.elements().map(move |y| Automorphism { img1: x, img2: y }))
                .filter(|a| a.is_valid(&g))
                .count();
            assert_eq!(brute, auts.len(), "{g}");
            let set: std::collections::HashSet<_> = auts.iter().copied().collect();
            let id = Automorphism::identity(&g);
            for a in &auts {
                assert!(a.is_valid(&g));
                assert!(auts.iter().any(|b| a.compose(&g, b) == id));
                for b in &auts {
                    assert!(set.contains(&a.compose(&g, b)));
                }
                for x in g.elements() {
                    assert_eq!(g.order(a.apply(&g, x)), g.order(x));
                }
            }
        }
    }

    #[test]
    fn automorphism_bound() {
        let g = spec(8, 100);
        assert!(matches!(
            g.automorphisms(),
            Err(GroupError::AutBoundExceeded { .. })
        ));
    }
}
