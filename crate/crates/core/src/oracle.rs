//! Brute-force enumeration of multi-quadratic fields at small parameters.
//!
//! Two independent routes produce the same field keys:
//!
//! * *patterns*: walk the primes of the radical in ascending order and build
//!   every normal-form presentation (each prime either starts the next entry
//!   or multiplies into a nonempty subset of the existing ones), then attach
//!   signs; fields containing `i` are reached separately by adjoining `i` to
//!   the totally real fields of rank `k - 1` with the same radical.
//! * *subgroups*: enumerate rank-`k` subgroups of the F2-space spanned by
//!   `-1` and the primes of the radical, via reduced row-echelon matrices,
//!   keeping those whose elements cover the whole radical.
//!
//! Their agreement is a tested invariant; the counting formulas are checked
//! against both.

use crate::arith::{build_sieve_bounded, integer_root, prime_factors, squarefree_part};
use crate::error::{Error, Result};
use crate::fields::{subset_products_of, FieldKey, Mod4Class};

/// Enumeration refuses radicals with more prime factors than this.
pub const OMEGA_BUDGET: u32 = 12;

// Subgroup route additionally refuses to materialize absurd matrix counts.
const SUBGROUP_CAP: u128 = 20_000_000;

/// Which fields to keep when enumerating.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FieldFilter {
    /// Keep only fields not containing `i`.
    pub i_free_only: bool,
    /// Keep only totally real fields (every key element positive).
    pub totally_real_only: bool,
    /// Keep only fields of this mod-4 class (needs `k >= 2`).
    pub mod4_class: Option<Mod4Class>,
}

fn validate_radical(p_radical: u64) -> Result<Vec<u64>> {
    if p_radical == 0 {
        return Err(Error::ZeroInput);
    }
    if squarefree_part(p_radical as i64)? != p_radical as i64 {
        return Err(Error::NotSquarefree(p_radical as i64));
    }
    let primes = prime_factors(p_radical as i64)?;
    if primes.len() as u32 > OMEGA_BUDGET {
        return Err(Error::EnumerationBudget {
            omega: primes.len() as u32,
            budget: OMEGA_BUDGET,
        });
    }
    Ok(primes)
}

fn validate_k_filter(k: u32, filter: &FieldFilter) -> Result<()> {
    if k < 1 || k > 12 {
        return Err(Error::Domain(format!(
            "rank k = {k} out of supported range 1..=12"
        )));
    }
    if filter.mod4_class.is_some() && k < 2 {
        return Err(Error::Domain("mod-4 class filter needs k >= 2".into()));
    }
    Ok(())
}

fn apply_filter(keys: Vec<FieldKey>, filter: &FieldFilter) -> Result<Vec<FieldKey>> {
    let mut out = Vec::with_capacity(keys.len());
    for key in keys {
        if filter.i_free_only && !key.is_i_free() {
            continue;
        }
        if filter.totally_real_only && !key.is_totally_real() {
            continue;
        }
        if let Some(c) = filter.mod4_class {
            if key.mod4_class()? != c {
                continue;
            }
        }
        out.push(key);
    }
    Ok(out)
}

/// All normal-form patterns: positive entry tuples in which every prime of
/// `primes` (ascending) either becomes the pivot of the next entry or joins a
/// nonempty subset of already-started entries.
fn patterns(primes: &[u64], k: usize) -> Vec<Vec<i64>> {
    fn rec(primes: &[u64], t: usize, k: usize, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if k - cur.len() > primes.len() - t {
            return; // not enough primes left to start the remaining entries
        }
        if t == primes.len() {
            if cur.len() == k {
                out.push(cur.clone());
            }
            return;
        }
        let p = primes[t] as i64;
        if cur.len() < k {
            cur.push(p);
            rec(primes, t + 1, k, cur, out);
            cur.pop();
        }
        let j = cur.len();
        for mask in 1u32..(1 << j) {
            for b in 0..j {
                if mask >> b & 1 == 1 {
                    cur[b] *= p;
                }
            }
            rec(primes, t + 1, k, cur, out);
            for b in 0..j {
                if mask >> b & 1 == 1 {
                    cur[b] /= p;
                }
            }
        }
    }
    let mut out = Vec::new();
    rec(primes, 0, k, &mut Vec::new(), &mut out);
    out
}

/// Pattern-based enumeration of all rank-`k` fields with the given radical.
pub fn enumerate_by_radical_patterns(
    p_radical: u64,
    k: u32,
    filter: &FieldFilter,
) -> Result<Vec<FieldKey>> {
    let primes = validate_radical(p_radical)?;
    validate_k_filter(k, filter)?;
    let kk = k as usize;
    let mut keys: Vec<FieldKey> = Vec::new();

    // Fields without i: exactly one normal presentation each.
    for pat in patterns(&primes, kk) {
        for smask in 0u32..(1 << kk) {
            let signed: Vec<i64> = pat
                .iter()
                .enumerate()
                .map(|(i, &v)| if smask >> i & 1 == 1 { -v } else { v })
                .collect();
            let mut els = subset_products_of(&signed)?;
            els.sort_unstable();
            if els.binary_search(&-1).is_ok() {
                continue; // contains i; handled below
            }
            keys.push(FieldKey::from_sorted_unchecked(els));
        }
    }

    // Fields with i: adjoin i to each totally real field of rank k - 1 with
    // the same radical. Its key gains -1 and the negatives of its elements.
    for pat in patterns(&primes, kk - 1) {
        let prods = subset_products_of(&pat)?;
        let mut els: Vec<i64> = Vec::with_capacity(2 * prods.len() + 1);
        els.push(-1);
        for d in prods {
            els.push(d);
            els.push(-d);
        }
        els.sort_unstable();
        keys.push(FieldKey::from_sorted_unchecked(els));
    }

    keys.sort();
    for w in keys.windows(2) {
        if w[0] == w[1] {
            return Err(Error::Internal(format!(
                "pattern enumeration repeated key {}",
                w[0]
            )));
        }
    }
    apply_filter(keys, filter)
}

/// Gaussian binomial `[d, k]_2`: number of rank-k subspaces of F2^d.
fn gaussian_binomial(d: usize, k: usize) -> u128 {
    if k > d {
        return 0;
    }
    // [n, j] = [n-1, j-1] + 2^j [n-1, j]
    let mut row = vec![0u128; k + 1];
    row[0] = 1;
    for _n in 1..=d {
        for j in (1..=k).rev() {
            row[j] = row[j - 1] + (row[j] << j);
        }
    }
    row[k]
}

/// All k x d matrices over F2 in reduced row-echelon form with rank k,
/// each encoded as row bitmasks.
fn rref_matrices(d: usize, k: usize) -> Vec<Vec<u16>> {
    let mut out = Vec::new();
    let mut pivots: Vec<usize> = Vec::with_capacity(k);
    fn emit(d: usize, pivots: &[usize], out: &mut Vec<Vec<u16>>) {
        let pivot_mask: u16 = pivots.iter().fold(0, |a, &c| a | 1 << c);
        let mut cells: Vec<(usize, usize)> = Vec::new();
        for (i, &ci) in pivots.iter().enumerate() {
            for c in (ci + 1)..d {
                if pivot_mask >> c & 1 == 0 {
                    cells.push((i, c));
                }
            }
        }
        for assign in 0u64..(1 << cells.len()) {
            let mut rows: Vec<u16> = pivots.iter().map(|&c| 1u16 << c).collect();
            for (idx, &(i, c)) in cells.iter().enumerate() {
                if assign >> idx & 1 == 1 {
                    rows[i] |= 1 << c;
                }
            }
            out.push(rows);
        }
    }
    fn rec(d: usize, k: usize, start: usize, pivots: &mut Vec<usize>, out: &mut Vec<Vec<u16>>) {
        if pivots.len() == k {
            emit(d, pivots, out);
            return;
        }
        for c in start..d {
            if d - c >= k - pivots.len() {
                pivots.push(c);
                rec(d, k, c + 1, pivots, out);
                pivots.pop();
            }
        }
    }
    if k <= d {
        rec(d, k, 0, &mut pivots, &mut out);
    }
    out
}

/// Subgroup-based enumeration of all rank-`k` fields with the given radical.
pub fn enumerate_by_radical_subgroups(
    p_radical: u64,
    k: u32,
    filter: &FieldFilter,
) -> Result<Vec<FieldKey>> {
    let primes = validate_radical(p_radical)?;
    validate_k_filter(k, filter)?;
    let omega = primes.len();
    let d = omega + 1; // coordinates: sign, then the primes ascending
    let kk = k as usize;
    if gaussian_binomial(d, kk) > SUBGROUP_CAP {
        return Err(Error::Domain(format!(
            "subgroup enumeration for radical {p_radical} at k = {k} is too large"
        )));
    }
    let mut keys: Vec<FieldKey> = Vec::new();
    let full_primes: u16 = (1 << omega) - 1;
    for rows in rref_matrices(d, kk) {
        let cover = rows.iter().fold(0u16, |a, &r| a | r);
        if cover >> 1 != full_primes {
            continue; // subgroup misses part of the radical
        }
        let mut masks = vec![0u16; 1 << kk];
        let mut vals: Vec<i64> = Vec::with_capacity((1 << kk) - 1);
        for m in 1usize..(1 << kk) {
            masks[m] = masks[m & (m - 1)] ^ rows[m.trailing_zeros() as usize];
            let mut v: i64 = if masks[m] & 1 == 1 { -1 } else { 1 };
            for (b, &p) in primes.iter().enumerate() {
                if masks[m] >> (b + 1) & 1 == 1 {
                    v *= p as i64;
                }
            }
            vals.push(v);
        }
        vals.sort_unstable();
        keys.push(FieldKey::from_sorted_unchecked(vals));
    }
    keys.sort();
    for w in keys.windows(2) {
        if w[0] == w[1] {
            return Err(Error::Internal(format!(
                "subgroup enumeration repeated key {}",
                w[0]
            )));
        }
    }
    apply_filter(keys, filter)
}

/// Enumerates rank-`k` fields with the given squarefree radical.
/// Delegates to the pattern route; [`enumerate_by_radical_subgroups`] is the
/// independent cross-check.
pub fn enumerate_by_radical(p_radical: u64, k: u32, filter: &FieldFilter) -> Result<Vec<FieldKey>> {
    enumerate_by_radical_patterns(p_radical, k, filter)
}

/// All rank-`k` fields with discriminant at most `x`, sorted by
/// (discriminant, key). `k >= 2`.
pub fn enumerate_by_discriminant(
    x: u128,
    k: u32,
    filter: &FieldFilter,
) -> Result<Vec<(u128, FieldKey)>> {
    if k < 2 {
        return Err(Error::Domain(
            "discriminant enumeration needs k >= 2".into(),
        ));
    }
    validate_k_filter(k, filter)?;
    // Discriminants are (2^r * radical)^(2^(k-1)) with r >= 0, so the
    // radical is at most the 2^(k-1)-th root of x.
    let b1 = integer_root(x, 1 << (k - 1));
    let mut out: Vec<(u128, FieldKey)> = Vec::new();
    if b1 >= 2 {
        let sieve = build_sieve_bounded(2, b1 + 1, b1)?;
        for r in 2..=b1 {
            if !sieve.profile(r)?.is_squarefree {
                continue;
            }
            for key in enumerate_by_radical(r, k, filter)? {
                match key.discriminant() {
                    Ok(d) if d <= x => out.push((d, key)),
                    Ok(_) => {}
                    // Overflowing u128 certainly exceeds x.
                    Err(Error::Overflow(_)) => {}
                    Err(e) => return Err(e),
                }
            }
        }
    }
    out.sort();
    Ok(out)
}
