//! Smallest-prime-factor sieve over a range, plus per-integer multiplicative
//! profiles (squarefreeness, prime-factor counts split by residue mod 4,
//! radical). Everything downstream that needs a factorization goes through
//! this module, so the counting layers never factor integers ad hoc.

use crate::error::{Error, Result};

/// Default cap on how far sieves may run. Large enough for every stock
/// workload; raise it explicitly (or via `MULTIQUAD_SIEVE_BOUND` in the CLI)
/// for bigger experiments.
pub const DEFAULT_SIEVE_BOUND: u64 = 100_000_000;

/// Default segment length for segmented scans.
pub const DEFAULT_SEGMENT_LEN: u64 = 1 << 21;

// Smallest-prime-factor entries are stored as u32, which caps sieved values.
const SPF_CAP: u64 = u32::MAX as u64;

/// Multiplicative profile of a single integer `n >= 1`.
///
/// `omega1`/`omega3` count odd prime factors congruent to 1 resp. 3 mod 4;
/// the prime 2 is counted in `omega` only. The radical is the product of the
/// distinct primes dividing `n` (radical of 1 is 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SquarefreeProfile {
    pub n: u64,
    pub is_squarefree: bool,
    pub omega: u8,
    pub omega1: u8,
    pub omega3: u8,
    pub radical: u64,
}

/// Factorization data for every integer in `[lo, hi)`.
#[derive(Debug, Clone)]
pub struct FactorSieve {
    lo: u64,
    hi: u64,
    spf: Vec<u32>,
    sf: Vec<bool>,
    omega: Vec<u8>,
    omega1: Vec<u8>,
    omega3: Vec<u8>,
    radical: Vec<u64>,
}

impl FactorSieve {
    pub fn lo(&self) -> u64 {
        self.lo
    }

    pub fn hi(&self) -> u64 {
        self.hi
    }

    fn index(&self, n: u64) -> Result<usize> {
        if n < self.lo || n >= self.hi {
            return Err(Error::OutOfSieveRange {
                n,
                lo: self.lo,
                hi: self.hi,
            });
        }
        Ok((n - self.lo) as usize)
    }

    /// Smallest prime factor of `n` (1 for `n = 1`).
    pub fn spf(&self, n: u64) -> Result<u64> {
        Ok(self.spf[self.index(n)?] as u64)
    }

    pub fn profile(&self, n: u64) -> Result<SquarefreeProfile> {
        let i = self.index(n)?;
        Ok(SquarefreeProfile {
            n,
            is_squarefree: self.sf[i],
            omega: self.omega[i],
            omega1: self.omega1[i],
            omega3: self.omega3[i],
            radical: self.radical[i],
        })
    }

    /// Calls `f(profile)` for each `n` in `[lo, hi)` in ascending order,
    /// without materializing the profile structs.
    pub fn for_each(&self, mut f: impl FnMut(&SquarefreeProfile)) {
        for i in 0..self.sf.len() {
            f(&SquarefreeProfile {
                n: self.lo + i as u64,
                is_squarefree: self.sf[i],
                omega: self.omega[i],
                omega1: self.omega1[i],
                omega3: self.omega3[i],
                radical: self.radical[i],
            });
        }
    }
}

/// Builds the factor sieve for `[lo, hi)` under the default bound.
pub fn build_sieve(lo: u64, hi: u64) -> Result<FactorSieve> {
    build_sieve_bounded(lo, hi, DEFAULT_SIEVE_BOUND)
}

/// Builds the factor sieve for `[lo, hi)`; `hi - 1` may not exceed `bound`.
pub fn build_sieve_bounded(lo: u64, hi: u64, bound: u64) -> Result<FactorSieve> {
    if lo < 1 || lo >= hi {
        return Err(Error::InvalidRange { lo, hi });
    }
    let top = hi - 1;
    if top > bound || top > SPF_CAP {
        return Err(Error::BoundExceeded {
            hi,
            bound: bound.min(SPF_CAP),
        });
    }

    let len = (hi - lo) as usize;
    let mut spf = vec![0u32; len];
    let mut sf = vec![true; len];
    let mut omega = vec![0u8; len];
    let mut omega1 = vec![0u8; len];
    let mut omega3 = vec![0u8; len];
    let mut radical = vec![1u64; len];
    let mut leftover: Vec<u64> = (lo..hi).collect();

    for p in primes_up_to(isqrt(top)) {
        let q0 = lo.div_ceil(p).max(1);
        let mut m = q0 * p;
        while m < hi {
            let i = (m - lo) as usize;
            if spf[i] == 0 {
                spf[i] = p as u32;
            }
            let mut e = 0u32;
            while leftover[i] % p == 0 {
                leftover[i] /= p;
                e += 1;
            }
            if e >= 2 {
                sf[i] = false;
            }
            omega[i] += 1;
            match p & 3 {
                1 => omega1[i] += 1,
                3 => omega3[i] += 1,
                _ => {}
            }
            radical[i] *= p;
            m += p;
        }
    }
    // Whatever is left over is a single prime above sqrt(top).
    for i in 0..len {
        let q = leftover[i];
        if q > 1 {
            if spf[i] == 0 {
                spf[i] = q as u32;
            }
            omega[i] += 1;
            match q & 3 {
                1 => omega1[i] += 1,
                3 => omega3[i] += 1,
                _ => {}
            }
            radical[i] *= q;
        }
    }
    if lo == 1 {
        spf[0] = 1;
    }

    Ok(FactorSieve {
        lo,
        hi,
        spf,
        sf,
        omega,
        omega1,
        omega3,
        radical,
    })
}

/// Primes `<= n` by a plain Eratosthenes pass.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for p in 2..=n {
        if !composite[p] {
            primes.push(p as u64);
            let mut m = p * p;
            while m <= n {
                composite[m] = true;
                m += p;
            }
        }
    }
    primes
}

/// Floor of sqrt(n), exact.
pub fn isqrt(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let mut r = (n as f64).sqrt() as u64;
    while r > 0 && (r as u128) * (r as u128) > n as u128 {
        r -= 1;
    }
    while ((r + 1) as u128) * ((r + 1) as u128) <= n as u128 {
        r += 1;
    }
    r
}

/// Largest `b` with `b^e <= x`; `e >= 1`. For `e >= 2` the root always
/// fits; for `e = 1` the result saturates at `u64::MAX`.
pub fn integer_root(x: u128, e: u32) -> u64 {
    assert!(e >= 1);
    if e == 1 {
        return u64::try_from(x).unwrap_or(u64::MAX);
    }
    // pow_leq avoids overflow by aborting as soon as the partial product
    // exceeds x.
    fn pow_leq(b: u128, e: u32, x: u128) -> bool {
        let mut acc: u128 = 1;
        for _ in 0..e {
            acc = match acc.checked_mul(b) {
                Some(v) if v <= x => v,
                _ => return false,
            };
        }
        true
    }
    let (mut lo, mut hi) = (0u64, u64::MAX);
    // Invariant: pow_leq(lo) holds, pow_leq(hi + 1) fails (conceptually).
    while lo < hi {
        let mid = lo + (hi - lo).div_ceil(2);
        if pow_leq(mid as u128, e, x) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    lo
}

// Trial division is only sensible up to here; beyond it, callers should be
// sieving instead.
const TRIAL_DIVISION_CAP: u64 = 1_000_000_000_000_000;

/// Squarefree part of `n != 0`: the unique squarefree `d` with `n = d m^2`.
/// Sign carries over. Uses trial division; `|n|` is capped at 10^15.
pub fn squarefree_part(n: i64) -> Result<i64> {
    if n == 0 {
        return Err(Error::ZeroInput);
    }
    let mut m = n.unsigned_abs();
    if m > TRIAL_DIVISION_CAP {
        return Err(Error::Domain(format!(
            "|{n}| exceeds the trial-division cap {TRIAL_DIVISION_CAP}"
        )));
    }
    let mut out: i64 = if n < 0 { -1 } else { 1 };
    let mut p: u64 = 2;
    while p * p <= m {
        if m % p == 0 {
            let mut e = 0u32;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            if e % 2 == 1 {
                out *= p as i64;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if m > 1 {
        out *= m as i64;
    }
    Ok(out)
}

/// True iff `v != 0` and no prime square divides `v`.
pub fn is_squarefree_i64(v: i64) -> Result<bool> {
    Ok(squarefree_part(v)? == v)
}

/// Distinct prime factors of `|v|`, ascending. `|v|` capped at 10^15.
pub fn prime_factors(v: i64) -> Result<Vec<u64>> {
    if v == 0 {
        return Err(Error::ZeroInput);
    }
    let mut m = v.unsigned_abs();
    if m > TRIAL_DIVISION_CAP {
        return Err(Error::Domain(format!(
            "|{v}| exceeds the trial-division cap {TRIAL_DIVISION_CAP}"
        )));
    }
    let mut out = Vec::new();
    let mut p: u64 = 2;
    while p * p <= m {
        if m % p == 0 {
            out.push(p);
            while m % p == 0 {
                m /= p;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if m > 1 {
        out.push(m);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sieve_small_spf() {
        let s = build_sieve(2, 10).unwrap();
        let got: Vec<u64> = (2..10).map(|n| s.spf(n).unwrap()).collect();
        assert_eq!(got, vec![2, 3, 2, 5, 2, 7, 2, 3]);
    }

    #[test]
    fn sieve_offset_segment() {
        let s = build_sieve(90, 92).unwrap();
        assert_eq!(s.spf(90).unwrap(), 2);
        assert_eq!(s.spf(91).unwrap(), 7);
        assert!(s.spf(92).is_err());
        assert!(s.spf(89).is_err());
    }

    #[test]
    fn sieve_rejects_empty_range() {
        assert!(matches!(
            build_sieve(10, 10),
            Err(Error::InvalidRange { .. })
        ));
        assert!(matches!(build_sieve(0, 5), Err(Error::InvalidRange { .. })));
    }

    #[test]
    fn sieve_respects_bound() {
        assert!(matches!(
            build_sieve_bounded(1, 1002, 1000),
            Err(Error::BoundExceeded { .. })
        ));
        build_sieve_bounded(1, 1001, 1000).unwrap();
    }

    #[test]
    fn profile_of_one() {
        let s = build_sieve(1, 3).unwrap();
        let p = s.profile(1).unwrap();
        assert!(p.is_squarefree);
        assert_eq!((p.omega, p.omega1, p.omega3, p.radical), (0, 0, 0, 1));
        assert_eq!(s.spf(1).unwrap(), 1);
    }

    #[test]
    fn profile_105() {
        // 105 = 3 * 5 * 7: 5 is 1 mod 4, 3 and 7 are 3 mod 4.
        let s = build_sieve(100, 110).unwrap();
        let p = s.profile(105).unwrap();
        assert!(p.is_squarefree);
        assert_eq!((p.omega, p.omega1, p.omega3, p.radical), (3, 1, 2, 105));
    }

    #[test]
    fn profile_12() {
        let s = build_sieve(2, 20).unwrap();
        let p = s.profile(12).unwrap();
        assert!(!p.is_squarefree);
        assert_eq!((p.omega, p.omega1, p.omega3, p.radical), (2, 0, 1, 6));
    }

    #[test]
    fn profile_counts_prime_two_in_omega_only() {
        let s = build_sieve(2, 40).unwrap();
        let p = s.profile(30).unwrap(); // 2 * 3 * 5
        assert_eq!((p.omega, p.omega1, p.omega3), (3, 1, 1));
    }

    #[test]
    fn squarefree_part_values() {
        assert_eq!(squarefree_part(12).unwrap(), 3);
        assert_eq!(squarefree_part(-18).unwrap(), -2);
        assert_eq!(squarefree_part(-1).unwrap(), -1);
        assert_eq!(squarefree_part(1).unwrap(), 1);
        assert_eq!(squarefree_part(360).unwrap(), 10);
        assert!(matches!(squarefree_part(0), Err(Error::ZeroInput)));
    }

    #[test]
    fn squarefree_part_reconstructs() {
        for n in 1..=3000i64 {
            let d = squarefree_part(n).unwrap();
            let m2 = n / d;
            let m = isqrt(m2 as u64) as i64;
            assert_eq!(d * m * m, n, "n = {n}");
        }
    }

    #[test]
    fn profile_agrees_with_trial_division() {
        let s = build_sieve(1, 5000).unwrap();
        for n in 1..5000u64 {
            let p = s.profile(n).unwrap();
            let pf = prime_factors(n as i64).unwrap();
            assert_eq!(p.radical, pf.iter().product::<u64>().max(1), "n = {n}");
            assert_eq!(p.omega as usize, pf.len(), "n = {n}");
            assert_eq!(
                p.omega1 as usize,
                pf.iter().filter(|&&q| q % 4 == 1).count(),
                "n = {n}"
            );
            assert_eq!(
                p.omega3 as usize,
                pf.iter().filter(|&&q| q % 4 == 3).count(),
                "n = {n}"
            );
            let d = squarefree_part(n as i64).unwrap() as u64;
            assert_eq!(p.is_squarefree, d == n, "n = {n}");
        }
    }

    #[test]
    fn isqrt_edges() {
        for n in 0..2000u64 {
            let r = isqrt(n);
            assert!(r * r <= n && (r + 1) * (r + 1) > n);
        }
        assert_eq!(isqrt(u64::MAX), (1u64 << 32) - 1);
    }

    #[test]
    fn integer_root_edges() {
        assert_eq!(integer_root(143, 2), 11);
        assert_eq!(integer_root(144, 2), 12);
        assert_eq!(integer_root(1, 5), 1);
        assert_eq!(integer_root(0, 3), 0);
        assert_eq!(integer_root((1u128 << 64) - 1, 1), u64::MAX);
        for e in 2..=7u32 {
            for b in [1u128, 2, 3, 10, 1000] {
                let x = b.pow(e);
                assert_eq!(integer_root(x, e) as u128, b);
                assert_eq!(integer_root(x - 1, e) as u128, b - 1);
                assert_eq!(integer_root(x + 1, e) as u128, b);
            }
        }
    }

    #[test]
    fn segmented_matches_monolithic() {
        let whole = build_sieve(1, 2000).unwrap();
        for (lo, hi) in [(1, 700), (700, 1400), (1400, 2000), (997, 1009)] {
            let seg = build_sieve(lo, hi).unwrap();
            for n in lo..hi {
                assert_eq!(seg.profile(n).unwrap(), whole.profile(n).unwrap());
                assert_eq!(seg.spf(n).unwrap(), whole.spf(n).unwrap());
            }
        }
    }
}
