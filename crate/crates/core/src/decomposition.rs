//! Block decompositions of sequences over `C_n ⊕ C_mn` through a
//! homomorphism `φ` with cyclic kernel `C_m` and image `C_n ⊕ C_n`, and
//! verifiers for the structural claims they lead to on extremal sequences.
//!
//! Every such `φ` has image `G[n] = {(a, b) : m | b}`, the `n`-torsion of
//! `G`, so image elements are identified with `C_n ⊕ C_n` by
//! `(a, b) ↦ (a, b/m)` regardless of which `φ` is used.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{self, EngineError};
use crate::group::{Element, GroupError, GroupSpec};
use crate::search::{extremal_horizon, extremal_length};
use crate::sequence::Sequence;
use crate::structures::{self, cyclic, ClauseMatch, Letter};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecompError {
    #[error("decompositions need m >= 2, got m = {0}")]
    MTooSmall(u32),
    #[error("({u}, {v}) does not define a homomorphism with kernel C_m and image C_n + C_n")]
    InvalidPhi { u: Element, v: Element },
    #[error("sequence is not extremal at k = {k}: {reason}")]
    NotExtremal { k: u32, reason: String },
    #[error("k = {k} outside [{lo}, {hi}]")]
    KOutOfRange { k: u32, lo: u32, hi: u32 },
    #[error("phi(W) = {0} is not e1^[n-1] e2^[n-1] (e1+e2)^[k] for any basis")]
    NoFrame(String),
    #[error("block decomposition does not factor the sequence: {0}")]
    BadDecomposition(String),
    #[error("invalid swap: {0}")]
    BadSwap(String),
    #[error("more than {0} block decompositions")]
    TooMany(usize),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// A homomorphism `G → G` given by the images of the standard basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Phi {
    spec: GroupSpec,
    diagonal: GroupSpec,
    img1: Element,
    img2: Element,
}

impl Phi {
    /// `(a, b) ↦ (a, m·b mod mn)`.
    pub fn canonical(spec: GroupSpec) -> Result<Self, DecompError> {
        let (e1, _) = spec.standard_basis();
        let img2 = spec.element(0, spec.m() as i64);
        Phi::new(spec, e1, img2)
    }

    pub fn new(spec: GroupSpec, img1: Element, img2: Element) -> Result<Self, DecompError> {
        if spec.m() < 2 {
            return Err(DecompError::MTooSmall(spec.m()));
        }
        let diagonal = GroupSpec::new(spec.n() as u64, 1)?;
        let phi = Phi {
            spec,
            diagonal,
            img1,
            img2,
        };
        if !phi.is_valid() {
            return Err(DecompError::InvalidPhi { u: img1, v: img2 });
        }
        Ok(phi)
    }

    /// Every valid `φ`, for sweeping φ-independence on small groups.
    pub fn all(spec: GroupSpec) -> Result<Vec<Phi>, DecompError> {
        if spec.m() < 2 {
            return Err(DecompError::MTooSmall(spec.m()));
        }
        let torsion: Vec<Element> = spec
            .elements()
            .filter(|e| e.b % spec.m() == 0)
            .collect();
        let mut out = Vec::new();
        for &u in &torsion {
            for &v in &torsion {
                if let Ok(p) = Phi::new(spec, u, v) {
                    out.push(p);
                }
            }
        }
        Ok(out)
    }

    fn is_valid(&self) -> bool {
        let s = &self.spec;
        let n = s.n() as i64;
        if !s.contains(self.img1) || !s.contains(self.img2) || !s.mul(n, self.img1).is_zero() {
            return false;
        }
        // image must be all of G[n] (size n²); kernel then has order m
        let image: BTreeSet<Element> = s.elements().map(|x| self.apply(x)).collect();
        if image.len() != (s.n() * s.n()) as usize || image.iter().any(|e| e.b % s.m() != 0) {
            return false;
        }
        let kernel = self.kernel();
        kernel.len() == s.m() as usize && kernel.iter().any(|&g| s.order(g) == s.m())
    }

    pub fn spec(&self) -> GroupSpec {
        self.spec
    }

    /// `C_n ⊕ C_n`, the target of [`Phi::to_diagonal`].
    pub fn diagonal(&self) -> GroupSpec {
        self.diagonal
    }

    pub fn apply(&self, x: Element) -> Element {
        let s = &self.spec;
        s.add(s.mul(x.a as i64, self.img1), s.mul(x.b as i64, self.img2))
    }

    pub fn kernel(&self) -> Vec<Element> {
        self.spec.elements().filter(|&x| self.apply(x).is_zero()).collect()
    }

    /// Identifies an image element with `C_n ⊕ C_n`.
    pub fn to_diagonal(&self, y: Element) -> Element {
        debug_assert_eq!(y.b % self.spec.m(), 0);
        Element {
            a: y.a,
            b: y.b / self.spec.m(),
        }
    }

    /// `φ(x)` as an element of `C_n ⊕ C_n`.
    pub fn project(&self, x: Element) -> Element {
        self.to_diagonal(self.apply(x))
    }

    /// Termwise image, kept in `G`.
    pub fn apply_seq(&self, s: &Sequence) -> Sequence {
        s.map_terms(self.spec, |x| self.apply(x))
    }

    /// Termwise image in `C_n ⊕ C_n`.
    pub fn project_seq(&self, s: &Sequence) -> Sequence {
        s.map_terms(self.diagonal, |x| self.project(x))
    }

    /// Kernel element `g ↦ j` with `g = j·generator`, for a fixed generator.
    fn kernel_coordinates(&self) -> (Element, Vec<(Element, u32)>) {
        let s = &self.spec;
        let kernel = self.kernel();
        let gen = *kernel
            .iter()
            .find(|&&g| s.order(g) == s.m())
            .expect("kernel is cyclic");
        let coords = (0..s.m()).map(|j| (s.mul(j as i64, gen), j)).collect();
        (gen, coords)
    }
}

/// `S = W·W_1⋯W_{m−1}` with each `φ(W_i)` a zero-sum of length `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct BlockDecomposition {
    pub w: Sequence,
    pub blocks: Vec<Sequence>,
}

impl BlockDecomposition {
    /// Checks the defining properties against `s`.
    pub fn validate(&self, s: &Sequence, phi: &Phi) -> Result<(), DecompError> {
        let spec = s.spec();
        if self.blocks.len() + 1 != spec.m() as usize {
            return Err(DecompError::BadDecomposition(format!(
                "{} blocks, expected {}",
                self.blocks.len(),
                spec.m() - 1
            )));
        }
        let mut all = self.w.clone();
        for (i, b) in self.blocks.iter().enumerate() {
            if b.is_empty() || b.len() > spec.n() as usize {
                return Err(DecompError::BadDecomposition(format!("|W_{}| = {}", i + 1, b.len())));
            }
            if !phi.apply(b.sum()).is_zero() {
                return Err(DecompError::BadDecomposition(format!("phi(W_{}) is not zero-sum", i + 1)));
            }
            all = all.concat(b).map_err(|e| DecompError::BadDecomposition(e.to_string()))?;
        }
        if &all != s {
            return Err(DecompError::BadDecomposition("parts do not multiply to S".into()));
        }
        Ok(())
    }
}

/// Lifts a multiset over `C_n ⊕ C_n` to a subsequence of `pool` with that
/// image, taking the smallest-index preimages first.
fn lift(pool: &Sequence, image: &Sequence, phi: &Phi) -> Sequence {
    let mut out = Sequence::empty(pool.spec());
    for (d, mut need) in image.counts() {
        for (x, c) in pool.counts() {
            if need == 0 {
                break;
            }
            if phi.project(x) == d {
                let take = c.min(need);
                out.push_n(x, take);
                need -= take;
            }
        }
        assert_eq!(need, 0, "image term {d} has too few preimages");
    }
    out
}

/// Greedy extraction of `m−1` blocks using shortest engine witnesses on the
/// image. `None` when some step finds no short zero-sum.
pub fn find_block_decomposition(
    s: &Sequence,
    phi: &Phi,
) -> Result<Option<BlockDecomposition>, DecompError> {
    let spec = s.spec();
    let n = spec.n() as usize;
    let mut rest = s.clone();
    let mut blocks = Vec::with_capacity(spec.m() as usize - 1);
    for _ in 1..spec.m() {
        let image = phi.project_seq(&rest);
        let Some(w) = engine::witness(&image, n.min(image.len()))? else {
            return Ok(None);
        };
        let block = lift(&rest, &w, phi);
        rest = rest.remove(&block).expect("lifted from rest");
        blocks.push(block);
    }
    Ok(Some(BlockDecomposition { w: rest, blocks }))
}

/// Sub-multisets of `pool` of size `1..=max_len` whose `φ`-image sums to 0.
fn zero_image_blocks(pool: &Sequence, phi: &Phi, max_len: usize) -> Vec<Sequence> {
    let counts: Vec<(Element, u32)> = pool.counts().collect();
    let mut out = Vec::new();
    let mut chosen: Vec<u32> = vec![0; counts.len()];
    fn go(
        i: usize,
        len: usize,
        sum: Element,
        counts: &[(Element, u32)],
        chosen: &mut Vec<u32>,
        phi: &Phi,
        max_len: usize,
        out: &mut Vec<Sequence>,
    ) {
        let spec = phi.spec();
        if i == counts.len() {
            if len > 0 && phi.apply(sum).is_zero() {
                let parts = counts.iter().zip(chosen.iter()).map(|(&(g, _), &c)| (g, c));
                out.push(Sequence::from_counts(spec, parts).expect("elements of G"));
            }
            return;
        }
        let (g, avail) = counts[i];
        let mut acc = sum;
        for c in 0..=avail.min((max_len - len) as u32) {
            chosen[i] = c;
            go(i + 1, len + c as usize, acc, counts, chosen, phi, max_len, out);
            acc = spec.add(acc, g);
        }
        chosen[i] = 0;
    }
    go(0, 0, pool.spec().zero(), &counts, &mut chosen, phi, max_len, &mut out);
    out
}

/// Every block decomposition of `s`, with blocks listed in nondecreasing
/// order so each factorization appears once.
pub fn all_block_decompositions(
    s: &Sequence,
    phi: &Phi,
    limit: usize,
) -> Result<Vec<BlockDecomposition>, DecompError> {
    let spec = s.spec();
    let mut out = Vec::new();
    fn go(
        rest: &Sequence,
        blocks: &mut Vec<Sequence>,
        need: usize,
        phi: &Phi,
        limit: usize,
        out: &mut Vec<BlockDecomposition>,
    ) -> Result<(), DecompError> {
        if blocks.len() == need {
            if out.len() == limit {
                return Err(DecompError::TooMany(limit));
            }
            out.push(BlockDecomposition {
                w: rest.clone(),
                blocks: blocks.clone(),
            });
            return Ok(());
        }
        for b in zero_image_blocks(rest, phi, phi.spec().n() as usize) {
            if blocks.last().is_some_and(|prev| b < *prev) {
                continue;
            }
            let next = rest.remove(&b).expect("drawn from rest");
            blocks.push(b);
            go(&next, blocks, need, phi, limit, out)?;
            blocks.pop();
        }
        Ok(())
    }
    go(s, &mut Vec::new(), spec.m() as usize - 1, phi, limit, &mut out)?;
    Ok(out)
}

/// Confirms `|S| = mn+n−2+k` and no zero-sum of length `≤ mn+n−1−k`.
pub fn verify_extremal(s: &Sequence, k: u32) -> Result<(), DecompError> {
    let spec = s.spec();
    if k > spec.n() - 1 {
        return Err(DecompError::KOutOfRange {
            k,
            lo: 0,
            hi: spec.n() - 1,
        });
    }
    let len = extremal_length(spec, k);
    if s.len() != len {
        return Err(DecompError::NotExtremal {
            k,
            reason: format!("length {} != {len}", s.len()),
        });
    }
    let ell = extremal_horizon(spec, k).min(len);
    if engine::has_zero_sum_leq(s, ell)? {
        return Err(DecompError::NotExtremal {
            k,
            reason: format!("has a zero-sum of length <= {ell}"),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimAReport {
    /// `|W_i| = n` for every block.
    pub blocks_full: bool,
    /// `|W| = 2n−2+k`.
    pub remainder_length: bool,
    /// `0 ∉ Σ_{≤2n−1−k}(φ(W))`.
    pub remainder_image_avoids: bool,
    /// `0 ∉ Σ_{≤n−1}(φ(S))`.
    pub image_avoids_short: bool,
    /// Clause matched by `φ(W)` in `C_n ⊕ C_n` at `k`.
    pub remainder_clause: Option<ClauseMatch>,
}

impl ClaimAReport {
    pub fn passes(&self) -> bool {
        self.blocks_full
            && self.remainder_length
            && self.remainder_image_avoids
            && self.image_avoids_short
    }
}

pub fn check_claim_a(
    s: &Sequence,
    k: u32,
    decomp: &BlockDecomposition,
    phi: &Phi,
) -> Result<ClaimAReport, DecompError> {
    verify_extremal(s, k)?;
    decomp.validate(s, phi)?;
    let n = s.spec().n() as usize;
    let k_us = k as usize;
    let w_img = phi.project_seq(&decomp.w);
    let s_img = phi.project_seq(s);
    let avoid_w = 2 * n - 1 - k_us;
    Ok(ClaimAReport {
        blocks_full: decomp.blocks.iter().all(|b| b.len() == n),
        remainder_length: decomp.w.len() == 2 * n - 2 + k_us,
        remainder_image_avoids: !engine::has_zero_sum_leq(&w_img, avoid_w.min(w_img.len()))?,
        image_avoids_short: !engine::has_zero_sum_leq(&s_img, (n - 1).min(s_img.len()))?,
        remainder_clause: structures::match_clause(&w_img, k).ok().flatten(),
    })
}

/// `S = W̃·W_0⋯W_{m−1}` with each `φ(W_i)` a nontrivial zero-sum.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WeakBlockDecomposition {
    pub w_tilde: Sequence,
    /// `W_0, …, W_{m−1}`.
    pub blocks: Vec<Sequence>,
    /// `σ(W_0), …, σ(W_{m−1})`, elements of `ker φ`.
    pub s_sigma: Vec<Element>,
    /// The common block sum, when all are equal.
    pub g0: Option<Element>,
}

impl WeakBlockDecomposition {
    pub fn new(spec: GroupSpec, w_tilde: Sequence, blocks: Vec<Sequence>) -> Self {
        let s_sigma: Vec<Element> = blocks.iter().map(Sequence::sum).collect();
        let g0 = s_sigma
            .first()
            .copied()
            .filter(|g| s_sigma.iter().all(|h| h == g));
        debug_assert!(blocks.iter().all(|b| b.spec() == spec));
        WeakBlockDecomposition {
            w_tilde,
            blocks,
            s_sigma,
            g0,
        }
    }

    pub fn validate(&self, s: &Sequence, phi: &Phi) -> Result<(), DecompError> {
        let mut all = self.w_tilde.clone();
        for (i, b) in self.blocks.iter().enumerate() {
            if b.is_empty() || !phi.apply(b.sum()).is_zero() {
                return Err(DecompError::BadDecomposition(format!(
                    "phi(W_{i}) is not a nontrivial zero-sum"
                )));
            }
            all = all.concat(b).map_err(|e| DecompError::BadDecomposition(e.to_string()))?;
        }
        if &all != s {
            return Err(DecompError::BadDecomposition("parts do not multiply to S".into()));
        }
        Ok(())
    }

    /// `|W̃| ≥ 2k−n−1`; vacuous (and reported as such) when the bound is
    /// negative.
    pub fn length_bound(&self, n: u32, k: u32) -> (bool, bool) {
        let bound = 2 * k as i64 - n as i64 - 1;
        (self.w_tilde.len() as i64 >= bound, bound < 0)
    }

    /// `S_σ` as residues mod `m` against a fixed kernel generator.
    pub fn sigma_residues(&self, phi: &Phi) -> Vec<u32> {
        let (_, coords) = phi.kernel_coordinates();
        self.s_sigma
            .iter()
            .map(|g| {
                coords
                    .iter()
                    .find(|(h, _)| h == g)
                    .map(|&(_, j)| j)
                    .expect("block sums lie in the kernel")
            })
            .collect()
    }
}

/// A basis `(ē1, ē2)` of `C_n ⊕ C_n` with
/// `φ(W) = ē1^[n−1]·ē2^[n−1]·(ē1+ē2)^[k]`.
pub fn diagonal_frame(
    w: &Sequence,
    k: u32,
    phi: &Phi,
) -> Result<(Element, Element), DecompError> {
    let img = phi.project_seq(w);
    structures::match_display(&img, 3, Letter::A, k)
        .map(|m| m.pair)
        .ok_or_else(|| DecompError::NoFrame(img.to_string()))
}

/// Splits `W_0 = ē1^[n−k]·ē2^[n−k]·(ē1+ē2)^[k]` (in the image) off `W`.
pub fn weak_from_block(
    decomp: &BlockDecomposition,
    k: u32,
    phi: &Phi,
) -> Result<(WeakBlockDecomposition, (Element, Element)), DecompError> {
    let spec = phi.spec();
    let d = phi.diagonal();
    let n = spec.n();
    let (e1, e2) = diagonal_frame(&decomp.w, k, phi)?;
    let target = Sequence::from_counts(d, [(e1, n - k), (e2, n - k), (d.add(e1, e2), k)])
        .expect("elements of C_n + C_n");
    let w0 = lift(&decomp.w, &target, phi);
    let w_tilde = decomp.w.remove(&w0).expect("lifted from W");
    let mut blocks = vec![w0];
    blocks.extend(decomp.blocks.iter().cloned());
    Ok((WeakBlockDecomposition::new(spec, w_tilde, blocks), (e1, e2)))
}

/// Term exchanges between `W̃` and a block `W_j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Swap {
    /// `x ∈ W̃` and `y ∈ W_j` with `φ(x) = φ(y)` trade places.
    Single { x: Element, y: Element },
    /// `g1·g2 | W̃` and `z ∈ W_j` with `φ(g1)+φ(g2) = φ(z)` trade places.
    Pair { g1: Element, g2: Element, z: Element },
}

pub fn swap_rebalance(
    weak: &WeakBlockDecomposition,
    j: usize,
    swap: Swap,
    phi: &Phi,
) -> Result<WeakBlockDecomposition, DecompError> {
    let spec = phi.spec();
    let block = weak
        .blocks
        .get(j)
        .ok_or_else(|| DecompError::BadSwap(format!("no block W_{j}")))?;
    let bad = |e: crate::sequence::SequenceError| DecompError::BadSwap(e.to_string());
    let (out_tilde, in_tilde) = match swap {
        Swap::Single { x, y } => {
            if phi.apply(x) != phi.apply(y) {
                return Err(DecompError::BadSwap(format!("phi({x}) != phi({y})")));
            }
            (Sequence::power(spec, x, 1), Sequence::power(spec, y, 1))
        }
        Swap::Pair { g1, g2, z } => {
            if phi.apply(spec.add(g1, g2)) != phi.apply(z) {
                return Err(DecompError::BadSwap(format!("phi({g1}+{g2}) != phi({z})")));
            }
            let pair = Sequence::from_terms(spec, [g1, g2]).map_err(bad)?;
            (pair, Sequence::power(spec, z, 1))
        }
    };
    let w_tilde = weak
        .w_tilde
        .remove(&out_tilde)
        .and_then(|w| w.concat(&in_tilde))
        .map_err(bad)?;
    let new_block = block
        .remove(&in_tilde)
        .and_then(|b| b.concat(&out_tilde))
        .map_err(bad)?;
    let mut blocks = weak.blocks.clone();
    blocks[j] = new_block;
    Ok(WeakBlockDecomposition::new(spec, w_tilde, blocks))
}

/// Per-claim outcome of the structural pipeline on one extremal sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClaimsReport {
    pub k: u32,
    pub claim_a: ClaimAReport,
    /// `(ē1, ē2)` in `C_n ⊕ C_n`.
    pub frame: (Element, Element),
    pub weak_length_bound: bool,
    pub weak_bound_vacuous: bool,
    /// All `σ(W_i)` equal a `g0` of order `m` and `S_σ` is a minimal
    /// zero-sum over `ker φ`.
    pub invcn: bool,
    pub g0: Option<Element>,
    /// Every `φ(W_j)`, `j ≥ 1`, is `ē1^[n]`, `ē2^[n]` or `(ē1+ē2)^[n]`.
    pub claim_c: bool,
    /// The unique preimages of `ē1`, `ē2` in `supp(S)`.
    pub g_pair: Option<(Element, Element)>,
    /// `supp(S) = {g1, g2, g1+g2}`.
    pub claim_d: bool,
    /// Every admissible swap leaves `S_σ = g0^[m]` only when it trades equal
    /// terms.
    pub swaps_rigid: bool,
    /// `g0 = n·g1 + n·g2`.
    pub g_help: bool,
    /// `⟨g1, g2⟩ = G`.
    pub generates: bool,
    /// `ord(g1+g2) = mn`.
    pub sum_order: bool,
    /// Clause-3 readings the block shapes allow.
    pub dichotomy: Vec<ClauseMatch>,
}

impl ClaimsReport {
    pub fn passes(&self) -> bool {
        self.claim_a.passes()
            && self.weak_length_bound
            && self.invcn
            && self.claim_c
            && self.claim_d
            && self.swaps_rigid
            && self.g_help
            && self.generates
            && self.sum_order
            && !self.dichotomy.is_empty()
    }
}

fn invcn_holds(weak: &WeakBlockDecomposition, phi: &Phi) -> bool {
    let m = phi.spec().m();
    let Some(g0) = weak.g0 else { return false };
    if phi.spec().order(g0) != m {
        return false;
    }
    let residues = weak.sigma_residues(phi);
    cyclic::is_minimal_zero_sum(m, &residues)
}

/// Swaps prescribed by the rigidity argument, each of which must either
/// trade equal terms or break `S_σ = g0^[m]`.
fn swaps_rigid(
    weak: &WeakBlockDecomposition,
    frame: (Element, Element),
    phi: &Phi,
) -> Result<bool, DecompError> {
    let d = phi.diagonal();
    let sum = d.add(frame.0, frame.1);
    for (j, block) in weak.blocks.iter().enumerate() {
        for x in weak.w_tilde.support() {
            for y in block.support() {
                if phi.apply(x) != phi.apply(y) {
                    continue;
                }
                let swapped = swap_rebalance(weak, j, Swap::Single { x, y }, phi)?;
                if x != y && invcn_holds(&swapped, phi) {
                    return Ok(false);
                }
            }
        }
        let g1s: Vec<Element> = weak
            .w_tilde
            .support()
            .into_iter()
            .filter(|&g| phi.project(g) == frame.0)
            .collect();
        let g2s: Vec<Element> = weak
            .w_tilde
            .support()
            .into_iter()
            .filter(|&g| phi.project(g) == frame.1)
            .collect();
        for &g1 in &g1s {
            for &g2 in &g2s {
                for z in block.support() {
                    if phi.project(z) != sum {
                        continue;
                    }
                    let swapped = swap_rebalance(weak, j, Swap::Pair { g1, g2, z }, phi)?;
                    let spec = phi.spec();
                    if z != spec.add(g1, g2) && invcn_holds(&swapped, phi) {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

/// Clause-3 readings of `s` that the block shapes allow: 3(a) with `s − 1`
/// blocks equal to `g2^[n]` (roles of `g1`, `g2` oriented so no block is
/// `g1^[n]`), and 3(b) when every block is `(g1+g2)^[n]`. A reading is kept
/// only if its display rebuilds `s`. Empty when blocks `g1^[n]` and `g2^[n]`
/// both occur.
fn dichotomy(
    s: &Sequence,
    k: u32,
    blocks: &[Sequence],
    g1: Element,
    g2: Element,
) -> Vec<ClauseMatch> {
    let spec = s.spec();
    let n = spec.n();
    let is_power = |b: &Sequence, g: Element| b.len() == n as usize && b.multiplicity(g) == n;
    let has1 = blocks.iter().any(|b| is_power(b, g1));
    let has2 = blocks.iter().any(|b| is_power(b, g2));
    if has1 && has2 {
        return Vec::new();
    }
    let (u, v) = if has1 { (g2, g1) } else { (g1, g2) };
    let s_val = 1 + blocks.iter().filter(|b| is_power(b, v)).count() as u32;
    let base = |clause: Letter, pair: (Element, Element), s_param: Option<u32>| ClauseMatch {
        part: 3,
        clause,
        k,
        pair,
        s: s_param,
        x_list: Vec::new(),
        removed: None,
    };
    let mut cands = vec![base(Letter::A, (u, v), Some(s_val))];
    if s_val == 1 {
        cands.push(base(Letter::A, (v, u), Some(1)));
        cands.push(base(Letter::B, (u, v), None));
    }
    let mut out: Vec<ClauseMatch> = Vec::new();
    for c in cands {
        let rebuilt = structures::build_clause(&spec, &c).is_ok_and(|t| &t == s);
        if rebuilt && !out.iter().any(|o| o.clause == c.clause) {
            out.push(c);
        }
    }
    out
}

/// Claims A, C, D, the block-sum identities and the final dichotomy for a
/// block decomposition of an extremal `s` at `k`.
///
/// `k` must lie in `[2, n−2]` unless `boundary` is set, which admits any
/// `k ∈ [1, n−1]` for which `φ(W)` still has the three-power frame.
pub fn check_claims_cd(
    s: &Sequence,
    k: u32,
    decomp: &BlockDecomposition,
    phi: &Phi,
    boundary: bool,
) -> Result<ClaimsReport, DecompError> {
    let spec = s.spec();
    let n = spec.n();
    let (lo, hi) = if boundary { (1, n - 1) } else { (2, n.saturating_sub(2)) };
    if k < lo || k > hi {
        return Err(DecompError::KOutOfRange { k, lo, hi });
    }
    let claim_a = check_claim_a(s, k, decomp, phi)?;
    let (weak, frame) = weak_from_block(decomp, k, phi)?;
    weak.validate(s, phi)?;
    let (weak_length_bound, weak_bound_vacuous) = weak.length_bound(n, k);
    let invcn = invcn_holds(&weak, phi);
    let d = phi.diagonal();
    let fsum = d.add(frame.0, frame.1);
    let claim_c = decomp.blocks.iter().all(|b| {
        let img = phi.project_seq(b);
        [frame.0, frame.1, fsum]
            .iter()
            .any(|&e| img.len() == n as usize && img.multiplicity(e) == n)
    });
    let supp = s.support();
    let unique = |target: Element| {
        let pre: Vec<Element> = supp.iter().copied().filter(|&x| phi.project(x) == target).collect();
        (pre.len() == 1).then(|| pre[0])
    };
    let g_pair = unique(frame.0).zip(unique(frame.1));
    let claim_d = g_pair.is_some_and(|(g1, g2)| {
        let want: BTreeSet<Element> = [g1, g2, spec.add(g1, g2)].into_iter().collect();
        supp.iter().copied().collect::<BTreeSet<_>>() == want
    });
    let swaps_rigid = swaps_rigid(&weak, frame, phi)?;
    let (g_help, generates, sum_order, dichotomy) = match g_pair {
        Some((g1, g2)) => {
            let nn = n as i64;
            let helper = spec.add(spec.mul(nn, g1), spec.mul(nn, g2));
            (
                weak.g0 == Some(helper),
                spec.generates(g1, g2),
                spec.order(spec.add(g1, g2)) == spec.exponent(),
                if claim_d {
                    dichotomy(s, k, &decomp.blocks, g1, g2)
                } else {
                    Vec::new()
                },
            )
        }
        None => (false, false, false, Vec::new()),
    };
    Ok(ClaimsReport {
        k,
        claim_a,
        frame,
        weak_length_bound,
        weak_bound_vacuous,
        invcn,
        g0: weak.g0,
        claim_c,
        g_pair,
        claim_d,
        swaps_rigid,
        g_help,
        generates,
        sum_order,
        dichotomy,
    })
}

/// Runs the pipeline on every block decomposition (up to `limit`) of `s`.
pub fn check_all_decompositions(
    s: &Sequence,
    k: u32,
    phi: &Phi,
    boundary: bool,
    limit: usize,
) -> Result<Vec<ClaimsReport>, DecompError> {
    verify_extremal(s, k)?;
    all_block_decompositions(s, phi, limit)?
        .iter()
        .map(|d| check_claims_cd(s, k, d, phi, boundary))
        .collect()
}
