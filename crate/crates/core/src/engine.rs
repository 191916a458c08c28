//! Length-bounded subset sums over `G`.
//!
//! A [`ReachTable`] stores, for every group element `g`, a bit row over
//! lengths `0..=|S|` whose bit `ℓ` says whether some subsequence of length
//! `ℓ` sums to `g`. Terms are folded in with a bounded-multiplicity knapsack.

use thiserror::Error;

use crate::group::{Element, GroupSpec};
use crate::sequence::Sequence;

/// Default cap on `|G|·(|S|+1)` table cells.
pub const DEFAULT_CELL_BUDGET: u64 = 1 << 28;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("reach table needs {needed} cells, budget is {budget}")]
    BudgetExceeded { needed: u64, budget: u64 },
    #[error("length bound {ell} out of range [0, {len}]")]
    LengthOutOfRange { ell: usize, len: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineConfig {
    pub cell_budget: u64,
    /// Fold a term of multiplicity `μ` in `O(log μ)` passes by binary
    /// splitting instead of `μ` single-copy passes.
    pub binary_splitting: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            cell_budget: DEFAULT_CELL_BUDGET,
            binary_splitting: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReachTable {
    spec: GroupSpec,
    len: usize,
    words: usize,
    rows: Vec<u64>,
}

impl ReachTable {
    fn new(spec: GroupSpec, len: usize, config: &EngineConfig) -> Result<Self, EngineError> {
        let needed = spec.cardinality() as u64 * (len as u64 + 1);
        if needed > config.cell_budget {
            return Err(EngineError::BudgetExceeded {
                needed,
                budget: config.cell_budget,
            });
        }
        let words = (len + 1).div_ceil(64);
        let mut rows = vec![0u64; spec.cardinality() * words];
        rows[0] = 1;
        Ok(ReachTable {
            spec,
            len,
            words,
            rows,
        })
    }

    pub fn spec(&self) -> GroupSpec {
        self.spec
    }

    /// `|S|` of the sequence the table was built from.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn bit(&self, idx: usize, ell: usize) -> bool {
        ell <= self.len && (self.rows[idx * self.words + ell / 64] >> (ell % 64)) & 1 == 1
    }

    /// Whether `g ∈ Σ_ℓ(S)` (with `Σ_0(S) = {0}`).
    pub fn get(&self, g: Element, ell: usize) -> bool {
        self.bit(self.spec.linear_index(g), ell)
    }

    /// `Σ_ℓ(S)` in linear-index order.
    pub fn sums_of_length(&self, ell: usize) -> Vec<Element> {
        self.spec.elements().filter(|&g| self.get(g, ell)).collect()
    }

    /// `Σ_{≤ℓ}(S)`; lengths start at one.
    pub fn sums_up_to(&self, ell: usize) -> Vec<Element> {
        let ell = ell.min(self.len);
        self.spec
            .elements()
            .filter(|&g| (1..=ell).any(|l| self.get(g, l)))
            .collect()
    }

    /// Least `ℓ ≥ 1` with `0 ∈ Σ_ℓ(S)`.
    pub fn shortest_zero_sum(&self) -> Option<usize> {
        (1..=self.len).find(|&l| self.bit(0, l))
    }

    fn last_mask(&self) -> u64 {
        let used = (self.len + 1) % 64;
        if used == 0 {
            u64::MAX
        } else {
            (1u64 << used) - 1
        }
    }

    /// Folds in `copies` copies of `g` as a single 0/`copies` item.
    fn fold_block(&mut self, g: Element, copies: usize, scratch: &mut Vec<u64>) {
        let step = self.spec.mul(copies as i64, g);
        scratch.clear();
        scratch.extend_from_slice(&self.rows);
        let w = self.words;
        let word_shift = copies / 64;
        let bit_shift = copies % 64;
        let mask = self.last_mask();
        for (src, h) in self.spec.elements().enumerate() {
            let dst = self.spec.linear_index(self.spec.add(h, step));
            let from = &scratch[src * w..(src + 1) * w];
            if from.iter().all(|&x| x == 0) {
                continue;
            }
            let to = &mut self.rows[dst * w..(dst + 1) * w];
            for i in (word_shift..w).rev() {
                let j = i - word_shift;
                let mut v = from[j] << bit_shift;
                if bit_shift > 0 && j > 0 {
                    v |= from[j - 1] >> (64 - bit_shift);
                }
                to[i] |= v;
            }
            to[w - 1] &= mask;
        }
    }

    fn fold_term(&mut self, g: Element, mult: u32, binary: bool, scratch: &mut Vec<u64>) {
        if binary {
            let mut left = mult as usize;
            let mut chunk = 1;
            while left > 0 {
                let take = chunk.min(left);
                self.fold_block(g, take, scratch);
                left -= take;
                chunk *= 2;
            }
        } else {
            for _ in 0..mult {
                self.fold_block(g, 1, scratch);
            }
        }
    }
}

/// Builds the reach table of `s` with the default configuration.
pub fn reach(s: &Sequence) -> Result<ReachTable, EngineError> {
    reach_with(s, &EngineConfig::default())
}

pub fn reach_with(s: &Sequence, config: &EngineConfig) -> Result<ReachTable, EngineError> {
    let mut table = ReachTable::new(s.spec(), s.len(), config)?;
    let mut scratch = Vec::new();
    for (g, c) in s.counts() {
        table.fold_term(g, c, config.binary_splitting, &mut scratch);
    }
    Ok(table)
}

fn check_ell(s: &Sequence, ell: usize) -> Result<(), EngineError> {
    if ell > s.len() {
        Err(EngineError::LengthOutOfRange { ell, len: s.len() })
    } else {
        Ok(())
    }
}

/// `0 ∈ Σ_{≤ℓ}(S)`.
pub fn has_zero_sum_leq(s: &Sequence, ell: usize) -> Result<bool, EngineError> {
    has_zero_sum_leq_with(s, ell, &EngineConfig::default())
}

pub fn has_zero_sum_leq_with(
    s: &Sequence,
    ell: usize,
    config: &EngineConfig,
) -> Result<bool, EngineError> {
    check_ell(s, ell)?;
    if s.multiplicity(Element::ZERO) > 0 {
        return Ok(ell >= 1);
    }
    Ok(reach_with(s, config)?.shortest_zero_sum().is_some_and(|l| l <= ell))
}

pub fn shortest_zero_sum(s: &Sequence) -> Result<Option<usize>, EngineError> {
    if s.multiplicity(Element::ZERO) > 0 {
        return Ok(Some(1));
    }
    Ok(reach(s)?.shortest_zero_sum())
}

pub fn is_zero_sum_free(s: &Sequence) -> Result<bool, EngineError> {
    Ok(shortest_zero_sum(s)?.is_none())
}

/// `σ(S) = 0`, `S` nontrivial, and no proper nontrivial subsequence sums to zero.
pub fn is_minimal_zero_sum(s: &Sequence) -> Result<bool, EngineError> {
    if s.is_empty() || !s.sum().is_zero() {
        return Ok(false);
    }
    Ok(shortest_zero_sum(s)? == Some(s.len()))
}

/// A shortest nontrivial zero-sum subsequence of length at most `ell`.
///
/// Reconstruction walks the distinct terms in linear-index order and takes
/// as many copies of each as still allow completion by the later terms.
pub fn witness(s: &Sequence, ell: usize) -> Result<Option<Sequence>, EngineError> {
    witness_with(s, ell, &EngineConfig::default())
}

/// [`witness`] under an explicit budget; the budget covers all suffix tables.
pub fn witness_with(
    s: &Sequence,
    ell: usize,
    config: &EngineConfig,
) -> Result<Option<Sequence>, EngineError> {
    check_ell(s, ell)?;
    let spec = s.spec();
    let counts: Vec<(Element, u32)> = s.counts().collect();
    let per_table = spec.cardinality() as u64 * (s.len() as u64 + 1);
    let needed = per_table.saturating_mul(counts.len() as u64 + 1);
    if needed > config.cell_budget {
        return Err(EngineError::BudgetExceeded {
            needed,
            budget: config.cell_budget,
        });
    }
    // suffix[i] covers counts[i..]
    let mut suffix = Vec::with_capacity(counts.len() + 1);
    let mut table = ReachTable::new(spec, s.len(), config)?;
    let mut scratch = Vec::new();
    suffix.push(table.clone());
    for &(g, c) in counts.iter().rev() {
        table.fold_term(g, c, true, &mut scratch);
        suffix.push(table.clone());
    }
    suffix.reverse();
    let Some(target_len) = (1..=ell).find(|&l| suffix[0].get(Element::ZERO, l)) else {
        return Ok(None);
    };
    let mut out = Sequence::empty(spec);
    let mut target = Element::ZERO;
    let mut remaining = target_len;
    for (i, &(g, c)) in counts.iter().enumerate() {
        let rest = &suffix[i + 1];
        let take = (0..=(c as usize).min(remaining))
            .rev()
            .find(|&t| rest.get(spec.sub(target, spec.mul(t as i64, g)), remaining - t))
            .expect("reach table is consistent with its suffix tables");
        out.push_n(g, take as u32);
        target = spec.sub(target, spec.mul(take as i64, g));
        remaining -= take;
    }
    debug_assert!(target.is_zero() && remaining == 0);
    Ok(Some(out))
}
