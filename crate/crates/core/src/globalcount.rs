//! Counts of fields with discriminant up to `x`.
//!
//! A field of mod-4 class `c` and radical `R` has discriminant
//! `(2^r(c) * R)^(2^(k-1))`, so "discriminant at most x" truncates the odd
//! part of the radical at `B`, `B/4`, `B/8`, `B/16` for the four classes,
//! where `B = floor(x^(1 / 2^(k-1)))`. Summing the per-radical counting
//! families over those ranges reduces everything to weighted sums over odd
//! squarefree integers, evaluated in one segmented sieve pass.

use crate::arith::{build_sieve_bounded, integer_root, DEFAULT_SEGMENT_LEN, DEFAULT_SIEVE_BOUND};
use crate::countform::{derive_family_cached, CountFamily, ExpPoly, Kind};
use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use std::collections::BTreeMap;

/// Sieve limits for the global sums: `bound` caps every range end, `segment`
/// sets the chunk length of the streaming pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SieveCfg {
    pub bound: u64,
    pub segment: u64,
}

impl Default for SieveCfg {
    fn default() -> Self {
        SieveCfg {
            bound: DEFAULT_SIEVE_BOUND,
            segment: DEFAULT_SEGMENT_LEN,
        }
    }
}

// Weight bases stay tiny in practice (at most 2^k - 1); the cap only guards
// against nonsense input.
const MAX_WEIGHT_MAG: i64 = 1 << 20;
// Largest number of distinct primes of any value in a 64-bit sieve range.
const MAX_POW: usize = 16;

/// A multiplicative weight on odd squarefree integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum WeightSpec {
    /// `m^omega(n)`.
    Omega(i64),
    /// `m1^omega1(n) * m3^omega3(n)`.
    Split { m1: i64, m3: i64 },
}

// Entries are None from the first power that leaves i128; using one then
// reports overflow instead of wrapping.
fn pow_table(m: i64) -> Vec<Option<i128>> {
    let mut t = Vec::with_capacity(MAX_POW + 1);
    let mut acc: Option<i128> = Some(1);
    for _ in 0..=MAX_POW {
        t.push(acc);
        acc = acc.and_then(|v| v.checked_mul(m as i128));
    }
    t
}

enum Compiled {
    Omega(Vec<Option<i128>>),
    Split(Vec<Option<i128>>, Vec<Option<i128>>),
}

impl Compiled {
    fn new(spec: WeightSpec) -> Compiled {
        match spec {
            WeightSpec::Omega(m) => Compiled::Omega(pow_table(m)),
            WeightSpec::Split { m1, m3 } => Compiled::Split(pow_table(m1), pow_table(m3)),
        }
    }

    fn eval(&self, omega: u8, omega1: u8, omega3: u8) -> Result<i128> {
        let miss = || Error::Overflow("weight power");
        match self {
            Compiled::Omega(t) => t[omega as usize].ok_or_else(miss),
            Compiled::Split(t1, t3) => {
                let a = t1[omega1 as usize].ok_or_else(miss)?;
                let b = t3[omega3 as usize].ok_or_else(miss)?;
                a.checked_mul(b).ok_or_else(miss)
            }
        }
    }
}

/// Sums each weight over the odd squarefree `n <= bounds[c]`, for every
/// bound, in one segmented pass up to `max(bounds)`. Segments are sieved in
/// parallel; the integer partial sums are folded in segment order.
fn sum_many(specs: &[WeightSpec], bounds: &[u64], cfg: &SieveCfg) -> Result<Vec<Vec<i128>>> {
    for spec in specs {
        let ok = match *spec {
            WeightSpec::Omega(m) => m >= 1 && m <= MAX_WEIGHT_MAG,
            WeightSpec::Split { m1, m3 } => {
                m1 != 0 && m3 != 0 && m1.abs() <= MAX_WEIGHT_MAG && m3.abs() <= MAX_WEIGHT_MAG
            }
        };
        if !ok {
            return Err(Error::Domain(format!("weight {spec:?} out of range")));
        }
    }
    let x = bounds.iter().copied().max().unwrap_or(0);
    let (nw, nb) = (specs.len(), bounds.len());
    if x == 0 {
        return Ok(vec![vec![0; nb]; nw]);
    }
    if x > cfg.bound {
        return Err(Error::BoundExceeded {
            hi: x,
            bound: cfg.bound,
        });
    }
    let compiled: Vec<Compiled> = specs.iter().map(|&s| Compiled::new(s)).collect();
    let seg = cfg.segment.max(1 << 12);
    let nseg = x.div_ceil(seg);
    let partials: Vec<Result<Vec<Vec<i128>>>> = (0..nseg)
        .into_par_iter()
        .map(|s| {
            let lo = 1 + s * seg;
            let hi = (lo + seg).min(x + 1);
            let sieve = build_sieve_bounded(lo, hi, cfg.bound)?;
            let mut acc = vec![vec![0i128; nb]; nw];
            let mut n = lo | 1; // odd integers only
            while n < hi {
                let p = sieve.profile(n)?;
                if p.is_squarefree {
                    for (w, c) in compiled.iter().enumerate() {
                        let v = c.eval(p.omega, p.omega1, p.omega3)?;
                        for (ci, &b) in bounds.iter().enumerate() {
                            if n <= b {
                                acc[w][ci] = acc[w][ci]
                                    .checked_add(v)
                                    .ok_or(Error::Overflow("weighted sum"))?;
                            }
                        }
                    }
                }
                n += 2;
            }
            Ok(acc)
        })
        .collect();
    let mut total = vec![vec![0i128; nb]; nw];
    for part in partials {
        let part = part?;
        for w in 0..nw {
            for c in 0..nb {
                total[w][c] = total[w][c]
                    .checked_add(part[w][c])
                    .ok_or(Error::Overflow("weighted sum"))?;
            }
        }
    }
    Ok(total)
}

/// `sum of M^omega(n)` over odd squarefree `n <= x`; `M >= 1`, `x >= 1`.
pub fn sum_a(m: i64, x: u64, cfg: &SieveCfg) -> Result<i128> {
    if m < 1 {
        return Err(Error::Domain(format!("sum weight M = {m} must be >= 1")));
    }
    if x < 1 {
        return Err(Error::Domain("sum range must be nonempty (x >= 1)".into()));
    }
    Ok(sum_many(&[WeightSpec::Omega(m)], &[x], cfg)?[0][0])
}

/// `sum of M^omega1(n) * N^omega3(n)` over odd squarefree `n <= x`, where
/// `omega1`/`omega3` count prime factors congruent 1 resp. 3 mod 4.
/// `M`, `N` nonzero (negative allowed), `x >= 1`.
pub fn sum_a_bivariate(m: i64, n: i64, x: u64, cfg: &SieveCfg) -> Result<i128> {
    if x < 1 {
        return Err(Error::Domain("sum range must be nonempty (x >= 1)".into()));
    }
    Ok(sum_many(&[WeightSpec::Split { m1: m, m3: n }], &[x], cfg)?[0][0])
}

/// Number of rank-`k` multi-quadratic fields with discriminant at most `x`
/// (`totally_real` restricts to totally real fields). Exact, by summing the
/// four per-class counting families over their radical ranges.
pub fn count_n(k: u32, x: u128, totally_real: bool, cfg: &SieveCfg) -> Result<u128> {
    if !(2..=6).contains(&k) {
        return Err(Error::Domain(format!("count needs k in 2..=6, got {k}")));
    }
    if x == 0 {
        return Err(Error::Domain("count needs x >= 1".into()));
    }
    let b = integer_root(x, 1u32 << (k - 1));
    // Class order: (1,1), (3,1), (2,1), (2,3); odd part of the radical is
    // bounded by B, B/4, B/8, B/16 respectively.
    let bounds = [b, b / 4, b / 8, b / 16];
    let kinds = if totally_real {
        [Kind::R11, Kind::R31, Kind::R21, Kind::R23]
    } else {
        [Kind::Q11, Kind::Q31, Kind::Q21, Kind::Q23]
    };
    let fams: Vec<CountFamily> = kinds
        .iter()
        .map(|&kd| derive_family_cached(k, kd))
        .collect::<Result<_>>()?;

    // One sieve pass shared by every term of every family.
    let mut spec_index: BTreeMap<WeightSpec, usize> = BTreeMap::new();
    let mut specs: Vec<WeightSpec> = Vec::new();
    let mut intern = |spec: WeightSpec| -> usize {
        *spec_index.entry(spec).or_insert_with(|| {
            specs.push(spec);
            specs.len() - 1
        })
    };
    // plan[family] = (coef / leading base, weight index)
    let mut plan: Vec<Vec<(BigRational, usize)>> = Vec::new();
    for fam in &fams {
        let mut terms = Vec::new();
        match &fam.poly {
            ExpPoly::Uni(ts) => {
                for t in ts {
                    let ix = intern(WeightSpec::Omega(t.base));
                    terms.push((
                        &t.coef / BigRational::from_integer(BigInt::from(t.base)),
                        ix,
                    ));
                }
            }
            ExpPoly::Bi(ts) => {
                for t in ts {
                    let ix = intern(WeightSpec::Split {
                        m1: t.base1,
                        m3: t.base3,
                    });
                    terms.push((
                        &t.coef / BigRational::from_integer(BigInt::from(t.base3)),
                        ix,
                    ));
                }
            }
        }
        plan.push(terms);
    }
    let sums = sum_many(&specs, &bounds, cfg)?;

    let mut total = BigRational::zero();
    for (fi, fam) in fams.iter().enumerate() {
        for (coef, ix) in &plan[fi] {
            total += coef * BigRational::from_integer(BigInt::from(sums[*ix][fi]));
        }
        // The pass counted the empty odd radical (n = 1) through the
        // rational continuation; patch in the true value there.
        if bounds[fi] >= 1 {
            if let Some(ov) = &fam.zero_override {
                total += BigRational::from_integer(ov.clone()) - fam.rational_at_zero()?;
            }
        }
    }
    if !total.is_integer() || total.is_negative() {
        return Err(Error::Internal(format!(
            "global count k={k} x={x} evaluated to {total}"
        )));
    }
    total
        .to_integer()
        .to_u128()
        .ok_or(Error::Overflow("global count"))
}
