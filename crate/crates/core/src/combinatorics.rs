//! Binomial coefficients and lexicographic ranking of k-subsets.
//!
//! Only the lowest `2^⌊log2 C(n,k)⌋` combinations carry bits; ranks at or
//! above that limit are reported as unaddressable.

use alloc::vec::Vec;
use num_bigint::BigUint;

use crate::error::{Error, Result};

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Exact `C(n, k)` in 128-bit arithmetic, `None` on overflow.
///
/// Each step keeps the partial product equal to `C(n-k+i, i)`, so no
/// intermediate exceeds the final value.
pub fn binomial(n: usize, k: usize) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 1..=k as u128 {
        let top = (n - k) as u128 + i;
        let g = gcd(c, i);
        let (c_red, i_red) = (c / g, i / g);
        c = c_red.checked_mul(top / i_red)?;
    }
    Some(c)
}

/// Arbitrary-precision `C(n, k)`.
pub fn binomial_big(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    let k = k.min(n - k);
    let mut c = BigUint::from(1u32);
    for i in 1..=k {
        c *= BigUint::from(n - k + i);
        c /= BigUint::from(i);
    }
    c
}

/// `⌊log2 C(n, k)⌋` from the exact integer; 0 when `C(n, k) = 1`.
pub fn floor_log2_binomial(n: usize, k: usize) -> u32 {
    let c = binomial_big(n, k);
    // C(n, k) >= 1 for k <= n
    (c.bits().saturating_sub(1)) as u32
}

/// Number of addressable k-subsets, `2^⌊log2 C(n, k)⌋`.
pub fn addressable(n: usize, k: usize) -> Result<u128> {
    let b = floor_log2_binomial(n, k);
    if b >= 128 {
        return Err(Error::Overflow { n, k });
    }
    Ok(1u128 << b)
}

/// The `index`-th k-subset of `0..n` in lexicographic order.
pub fn unrank_combination(n: usize, k: usize, index: u128) -> Result<Vec<usize>> {
    if k > n {
        return Err(Error::InvalidCombination { n, k });
    }
    let limit = addressable(n, k)?;
    if index >= limit {
        return Err(Error::IndexOutOfRange { index, limit });
    }
    let mut rank = index;
    let mut combo = Vec::with_capacity(k);
    let mut next = 0usize;
    for slot in 0..k {
        let remaining = k - slot - 1;
        let mut c = next;
        loop {
            // combinations that start with `c` at this position
            let count = binomial(n - c - 1, remaining).ok_or(Error::Overflow { n, k })?;
            if rank < count {
                break;
            }
            rank -= count;
            c += 1;
        }
        combo.push(c);
        next = c + 1;
    }
    Ok(combo)
}

/// Lexicographic rank of a sorted k-subset of `0..n`; inverse of [`unrank_combination`].
pub fn rank_combination(n: usize, k: usize, combo: &[usize]) -> Result<u128> {
    if combo.len() != k || k > n || combo.iter().any(|&c| c >= n) || combo.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidCombination { n, k });
    }
    let mut rank = 0u128;
    let mut start = 0usize;
    for (slot, &c) in combo.iter().enumerate() {
        let remaining = k - slot - 1;
        for skipped in start..c {
            rank += binomial(n - skipped - 1, remaining).ok_or(Error::Overflow { n, k })?;
        }
        start = c + 1;
    }
    let limit = addressable(n, k)?;
    if rank >= limit {
        return Err(Error::Unaddressable { rank, limit });
    }
    Ok(rank)
}
