//! Sequences over a cyclic group `C_n`, kept as plain residue lists.
//!
//! Used for the characterization of long minimal zero-sums in `C_n`: a
//! minimal zero-sum of length `n` is `g^[n]` with `gcd(g, n) = 1`, and a
//! zero-sum free sequence of length `n − 1` is `g^[n−1]` with the same
//! condition.

use crate::group::gcd;

/// Bit `j` of entry `r`: some subsequence of length `j` sums to `r`.
fn subsum_lengths(n: u32, terms: &[u32]) -> Vec<u128> {
    assert!(terms.len() < 128, "cyclic sequences are limited to 127 terms");
    let n = n as usize;
    let mut reach = vec![0u128; n];
    reach[0] = 1;
    let mut next = vec![0u128; n];
    for &t in terms {
        next.copy_from_slice(&reach);
        let t = t as usize % n;
        for r in 0..n {
            next[(r + t) % n] |= reach[r] << 1;
        }
        std::mem::swap(&mut reach, &mut next);
    }
    reach
}

pub fn is_zero_sum_free(n: u32, terms: &[u32]) -> bool {
    subsum_lengths(n, terms)[0] == 1
}

pub fn is_minimal_zero_sum(n: u32, terms: &[u32]) -> bool {
    if terms.is_empty() {
        return false;
    }
    let zero = subsum_lengths(n, terms)[0];
    // lengths 1..len-1 absent, length len present
    let len = terms.len();
    zero >> len & 1 == 1 && zero & ((1u128 << len) - 2) == 0
}

/// `S = g^[|S|]` with `ord(g) = n`, returning `g`.
pub fn constant_generator(n: u32, terms: &[u32]) -> Option<u32> {
    let g = *terms.first()? % n;
    if terms.iter().all(|&t| t % n == g) && gcd(g as u64, n as u64) == 1 {
        Some(g)
    } else {
        None
    }
}

/// True iff `S` is a minimal zero-sum `g^[n]` or a zero-sum free `g^[n−1]`
/// with `ord(g) = n`.
pub fn is_cyclic_extremal(n: u32, terms: &[u32]) -> bool {
    let len = terms.len();
    let shaped = constant_generator(n, terms).is_some();
    if len == n as usize {
        shaped && is_minimal_zero_sum(n, terms)
    } else if len + 1 == n as usize {
        shaped && is_zero_sum_free(n, terms)
    } else {
        false
    }
}

/// All multisets of `len` residues mod `n` that are minimal zero-sums.
pub fn minimal_zero_sums(n: u32, len: usize) -> Vec<Vec<u32>> {
    fn go(n: u32, len: usize, start: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == len {
            if is_minimal_zero_sum(n, cur) {
                out.push(cur.clone());
            }
            return;
        }
        for g in start..n {
            cur.push(g);
            go(n, len, g, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(n, len, 0, &mut Vec::new(), &mut out);
    out
}
