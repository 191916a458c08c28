//! Finite unordered sequences (multisets) over `G`.
//!
//! Text form: whitespace-separated terms `(a,b)` with an optional exponent
//! `^[e]`, `e ≥ 1`. The canonical rendering lists distinct terms by linear
//! index and writes exponents only when they exceed one.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::group::{Automorphism, Element, GroupSpec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SequenceError {
    #[error("sequences over different groups ({0} and {1})")]
    Mismatch(GroupSpec, GroupSpec),
    #[error("element {0} does not belong to {1}")]
    ForeignElement(Element, GroupSpec),
    #[error("not a subsequence: {0} occurs {1} times but {2} removals were requested")]
    NotSubsequence(Element, u32, u32),
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("coordinate out of range at byte {pos}: ({a},{b}) is not reduced in {spec}")]
    OutOfRange {
        pos: usize,
        a: u64,
        b: u64,
        spec: GroupSpec,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sequence {
    spec: GroupSpec,
    mult: BTreeMap<Element, u32>,
}

impl Sequence {
    pub fn empty(spec: GroupSpec) -> Self {
        Sequence {
            spec,
            mult: BTreeMap::new(),
        }
    }

    /// `g^[e]`.
    pub fn power(spec: GroupSpec, g: Element, e: u32) -> Self {
        let mut s = Sequence::empty(spec);
        s.push_n(g, e);
        s
    }

    pub fn from_terms<I: IntoIterator<Item = Element>>(
        spec: GroupSpec,
        terms: I,
    ) -> Result<Self, SequenceError> {
        let mut s = Sequence::empty(spec);
        for g in terms {
            if !spec.contains(g) {
                return Err(SequenceError::ForeignElement(g, spec));
            }
            s.push_n(g, 1);
        }
        Ok(s)
    }

    /// Builds from `(element, multiplicity)` pairs; zero multiplicities are dropped.
    pub fn from_counts<I: IntoIterator<Item = (Element, u32)>>(
        spec: GroupSpec,
        counts: I,
    ) -> Result<Self, SequenceError> {
        let mut s = Sequence::empty(spec);
        for (g, c) in counts {
            if !spec.contains(g) {
                return Err(SequenceError::ForeignElement(g, spec));
            }
            s.push_n(g, c);
        }
        Ok(s)
    }

    pub(crate) fn push_n(&mut self, g: Element, e: u32) {
        debug_assert!(self.spec.contains(g));
        if e > 0 {
            *self.mult.entry(g).or_insert(0) += e;
        }
    }

    pub fn spec(&self) -> GroupSpec {
        self.spec
    }

    pub fn len(&self) -> usize {
        self.mult.values().map(|&c| c as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.mult.is_empty()
    }

    pub fn multiplicity(&self, g: Element) -> u32 {
        self.mult.get(&g).copied().unwrap_or(0)
    }

    /// `h(S)`, zero for the empty sequence.
    pub fn height(&self) -> u32 {
        self.mult.values().copied().max().unwrap_or(0)
    }

    pub fn support(&self) -> Vec<Element> {
        self.mult.keys().copied().collect()
    }

    pub fn support_size(&self) -> usize {
        self.mult.len()
    }

    /// Distinct terms with their multiplicities, in linear-index order.
    pub fn counts(&self) -> impl Iterator<Item = (Element, u32)> + '_ {
        self.mult.iter().map(|(&g, &c)| (g, c))
    }

    /// Every term with repetition, in linear-index order.
    pub fn terms(&self) -> impl Iterator<Item = Element> + '_ {
        self.mult
            .iter()
            .flat_map(|(&g, &c)| std::iter::repeat(g).take(c as usize))
    }

    /// `σ(S)`.
    pub fn sum(&self) -> Element {
        self.mult.iter().fold(Element::ZERO, |acc, (&g, &c)| {
            self.spec.add(acc, self.spec.mul(c as i64, g))
        })
    }

    fn same_spec(&self, other: &Sequence) -> Result<(), SequenceError> {
        if self.spec == other.spec {
            Ok(())
        } else {
            Err(SequenceError::Mismatch(self.spec, other.spec))
        }
    }

    /// `S·T`.
    pub fn concat(&self, other: &Sequence) -> Result<Sequence, SequenceError> {
        self.same_spec(other)?;
        let mut out = self.clone();
        for (g, c) in other.counts() {
            out.push_n(g, c);
        }
        Ok(out)
    }

    pub fn is_subsequence_of(&self, other: &Sequence) -> bool {
        self.spec == other.spec && self.counts().all(|(g, c)| other.multiplicity(g) >= c)
    }

    /// `S·T^[-1]`.
    pub fn remove(&self, other: &Sequence) -> Result<Sequence, SequenceError> {
        self.same_spec(other)?;
        let mut out = self.clone();
        for (g, c) in other.counts() {
            let have = out.multiplicity(g);
            if have < c {
                return Err(SequenceError::NotSubsequence(g, have, c));
            }
            if have == c {
                out.mult.remove(&g);
            } else {
                out.mult.insert(g, have - c);
            }
        }
        Ok(out)
    }

    /// Removes `count` copies of `g`.
    pub fn remove_term(&self, g: Element, count: u32) -> Result<Sequence, SequenceError> {
        self.remove(&Sequence::power(self.spec, g, count))
    }

    /// `S·g^[count]`.
    pub fn with_term(&self, g: Element, count: u32) -> Result<Sequence, SequenceError> {
        if !self.spec.contains(g) {
            return Err(SequenceError::ForeignElement(g, self.spec));
        }
        let mut out = self.clone();
        out.push_n(g, count);
        Ok(out)
    }

    /// Termwise image under a map into `target`.
    pub fn map_terms<F: Fn(Element) -> Element>(&self, target: GroupSpec, f: F) -> Sequence {
        let mut out = Sequence::empty(target);
        for (g, c) in self.counts() {
            out.push_n(f(g), c);
        }
        out
    }

    pub fn apply(&self, alpha: &Automorphism) -> Sequence {
        let spec = self.spec;
        self.map_terms(spec, |g| alpha.apply(&spec, g))
    }

    /// Sorted linear indices of all terms, with repetition.
    pub fn index_list(&self) -> Vec<u32> {
        self.terms()
            .map(|g| self.spec.linear_index(g) as u32)
            .collect()
    }

    pub fn from_index_list(spec: GroupSpec, idx: &[u32]) -> Sequence {
        let mut s = Sequence::empty(spec);
        for &i in idx {
            s.push_n(spec.from_index(i as usize), 1);
        }
        s
    }

    pub fn parse(text: &str, spec: GroupSpec) -> Result<Sequence, SequenceError> {
        Parser {
            src: text.as_bytes(),
            pos: 0,
            spec,
        }
        .run()
    }
}

impl fmt::Display for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (g, c) in self.counts() {
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            write!(f, "{g}")?;
            if c > 1 {
                write!(f, "^[{c}]")?;
            }
        }
        Ok(())
    }
}

/// Serialized as the canonical text form; the group travels separately.
impl Serialize for Sequence {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    spec: GroupSpec,
}

impl Parser<'_> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, SequenceError> {
        Err(SequenceError::Syntax {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn expect(&mut self, byte: u8) -> Result<(), SequenceError> {
        self.skip_ws();
        if self.src.get(self.pos) == Some(&byte) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected '{}'", byte as char))
        }
    }

    fn number(&mut self) -> Result<u64, SequenceError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected a non-negative integer");
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse()
            .or_else(|_| {
                self.pos = start;
                self.err("integer too large")
            })
    }

    fn run(mut self) -> Result<Sequence, SequenceError> {
        let mut out = Sequence::empty(self.spec);
        loop {
            self.skip_ws();
            if self.pos == self.src.len() {
                return Ok(out);
            }
            let start = self.pos;
            self.expect(b'(')?;
            let a = self.number()?;
            self.expect(b',')?;
            let b = self.number()?;
            self.expect(b')')?;
            let g = self
                .spec
                .try_element(a, b)
                .map_err(|_| SequenceError::OutOfRange {
                    pos: start,
                    a,
                    b,
                    spec: self.spec,
                })?;
            let mut e = 1;
            if self.src.get(self.pos) == Some(&b'^') {
                self.pos += 1;
                self.expect(b'[')?;
                let exp_pos = self.pos;
                e = self.number()?;
                if e == 0 || e > u32::MAX as u64 {
                    self.pos = exp_pos;
                    return self.err("exponent must be a positive 32-bit integer");
                }
                self.expect(b']')?;
            }
            if self.pos < self.src.len() && !self.src[self.pos].is_ascii_whitespace() {
                return self.err("terms must be separated by whitespace");
            }
            out.push_n(g, e as u32);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec(n: u64, m: u64) -> GroupSpec {
        GroupSpec::new(n, m).unwrap()
    }

    fn el(a: u32, b: u32) -> Element {
        Element { a, b }
    }

    #[test]
    fn concat_and_remove() {
        let g = spec(3, 1);
        let x = el(1, 2);
        let s = Sequence::power(g, x, 2);
        assert_eq!(Sequence::empty(g).concat(&s).unwrap(), s);
        assert_eq!(
            s.concat(&Sequence::power(g, x, 3)).unwrap(),
            Sequence::power(g, x, 5)
        );
        let pair = Sequence::power(g, el(1, 0), 1)
            .concat(&Sequence::power(g, el(0, 1), 1))
            .unwrap();
        assert_eq!((pair.len(), pair.support_size()), (2, 2));
        assert!(s.remove(&s).unwrap().is_empty());
        assert_eq!(
            Sequence::power(g, x, 5)
                .remove(&Sequence::power(g, x, 2))
                .unwrap(),
            Sequence::power(g, x, 3)
        );
        assert!(matches!(
            Sequence::power(g, x, 1).remove(&Sequence::power(g, el(0, 1), 1)),
            Err(SequenceError::NotSubsequence(..))
        ));
        assert!(matches!(
            s.concat(&Sequence::empty(spec(3, 2))),
            Err(SequenceError::Mismatch(..))
        ));
    }

    #[test]
    fn statistics() {
        let g = spec(3, 2);
        let s = Sequence::parse("(1,0)^[3] (0,1) (1,5)^[2]", g).unwrap();
        assert_eq!(s.len(), 6);
        assert_eq!(s.height(), 3);
        assert_eq!(s.support(), vec![el(0, 1), el(1, 0), el(1, 5)]);
        assert_eq!(s.sum(), el(2, 5));
        assert_eq!(Sequence::empty(g).height(), 0);
        assert_eq!(Sequence::empty(g).sum(), Element::ZERO);
    }

    #[test]
    fn parse_examples() {
        let g = spec(3, 1);
        assert_eq!(Sequence::parse("(1,0)^[2] (0,1)", g).unwrap().len(), 3);
        assert!(Sequence::parse("", g).unwrap().is_empty());
        assert!(Sequence::parse("   ", g).unwrap().is_empty());
        assert!(matches!(
            Sequence::parse("(9,0)", g),
            Err(SequenceError::OutOfRange { pos: 0, .. })
        ));
        assert!(matches!(
            Sequence::parse("(1,0) (1,", g),
            Err(SequenceError::Syntax { .. })
        ));
        assert!(matches!(
            Sequence::parse("(1,0)^[0]", g),
            Err(SequenceError::Syntax { .. })
        ));
        assert!(matches!(
            Sequence::parse("(1,0)(0,1)", g),
            Err(SequenceError::Syntax { pos: 5, .. })
        ));
        assert_eq!(
            Sequence::parse("( 1 , 0 ) (1,0)", g).unwrap(),
            Sequence::power(g, el(1, 0), 2)
        );
    }

    #[test]
    fn format_is_sorted() {
        let g = spec(3, 2);
        let s = Sequence::parse("(2,0) (0,1)^[2] (0,1) (1,4)", g).unwrap();
        assert_eq!(s.to_string(), "(0,1)^[3] (1,4) (2,0)");
    }

    fn arb_seq(n: u64, m: u64) -> impl Strategy<Value = Sequence> {
        let g = spec(n, m);
        prop::collection::vec(0..g.cardinality(), 0..12)
            .prop_map(move |v| Sequence::from_terms(g, v.into_iter().map(|i| g.from_index(i))).unwrap())
    }

    proptest! {
        #[test]
        fn round_trip(s in arb_seq(3, 2)) {
            prop_assert_eq!(Sequence::parse(&s.to_string(), s.spec()).unwrap(), s);
        }

        #[test]
        fn sum_is_additive(s in arb_seq(2, 3), t in arb_seq(2, 3)) {
            let g = s.spec();
            prop_assert_eq!(s.concat(&t).unwrap().sum(), g.add(s.sum(), t.sum()));
        }

        #[test]
        fn height_and_support_bounds(s in arb_seq(3, 1)) {
            prop_assert!(s.height() as usize <= s.len());
            prop_assert!(s.support_size() <= s.len());
            let single = s.support_size() == 1;
            prop_assert_eq!(s.height() as usize == s.len() && !s.is_empty(), single);
        }

        #[test]
        fn automorphisms_preserve_shape(s in arb_seq(2, 2), pick in 0usize..1000) {
            let g = s.spec();
            let auts = g.automorphisms().unwrap();
            let alpha = auts[pick % auts.len()];
            let t = s.apply(&alpha);
            prop_assert_eq!(t.len(), s.len());
            prop_assert_eq!(t.height(), s.height());
            prop_assert_eq!(t.support_size(), s.support_size());
            prop_assert_eq!(t.sum(), alpha.apply(&g, s.sum()));
        }
    }
}
