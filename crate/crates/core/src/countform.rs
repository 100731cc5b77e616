//! Exact closed-form counting families.
//!
//! For a squarefree radical the number of rank-`k` fields depends only on
//! how many primes the radical has, split by residue mod 4. The counts are
//! finite combinations of exponentials in those prime counts; this module
//! derives the exact rational coefficients by solving small linear systems
//! against independent brute-force recurrences, then cross-verifies every
//! family on a larger grid before releasing it.
//!
//! Conventions: `omega` is the number of primes of the (odd part of the)
//! radical, split as `omega = omega1 + omega3` by residue mod 4. Univariate
//! terms are `c * base^(omega - 1)`; bivariate terms are
//! `c * base3^(omega3 - 1) * base1^(omega1)`. Families for even radicals
//! `2P` are expressed in the profile of the odd part `P`.

use crate::arith::SquarefreeProfile;
use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Mutex, OnceLock};

const MAX_FAMILY_K: u32 = 8;

fn bi(n: i64) -> BigInt {
    BigInt::from(n)
}

fn br(n: i64) -> BigRational {
    BigRational::from_integer(bi(n))
}

/// `base^exp` for possibly negative `exp`; `base != 0`.
fn rat_pow(base: i64, exp: i64) -> Result<BigRational> {
    if base == 0 {
        return Err(Error::Internal("zero base in exponential term".into()));
    }
    let mag = BigInt::from(base).pow(exp.unsigned_abs() as u32);
    Ok(if exp >= 0 {
        BigRational::from_integer(mag)
    } else {
        BigRational::new(BigInt::one(), mag)
    })
}

/// The ten counting families.
///
/// `R` counts totally real fields by radical, `Q` all fields by radical;
/// the suffixed variants restrict to one mod-4 class: `11`, `31` for odd
/// radicals and `21`, `23` for even radicals `2P` (evaluated at the odd
/// part `P`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Kind {
    R,
    Q,
    R11,
    R31,
    R21,
    R23,
    Q11,
    Q31,
    Q21,
    Q23,
}

impl Kind {
    pub const ALL: [Kind; 10] = [
        Kind::R,
        Kind::Q,
        Kind::R11,
        Kind::R31,
        Kind::R21,
        Kind::R23,
        Kind::Q11,
        Kind::Q31,
        Kind::Q21,
        Kind::Q23,
    ];

    /// Class-restricted totally real kinds carry two exponents.
    pub fn is_bivariate(self) -> bool {
        matches!(self, Kind::R11 | Kind::R31 | Kind::R21 | Kind::R23)
    }

    /// Kinds whose field radical is twice the evaluated odd part.
    pub fn is_even_radical(self) -> bool {
        matches!(self, Kind::R21 | Kind::R23 | Kind::Q21 | Kind::Q23)
    }

    /// Kinds restricted to a mod-4 class only exist for k >= 2.
    pub fn min_k(self) -> u32 {
        match self {
            Kind::R => 1,
            _ => 2,
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Kind::R => "R",
            Kind::Q => "Q",
            Kind::R11 => "R11",
            Kind::R31 => "R31",
            Kind::R21 => "R21",
            Kind::R23 => "R23",
            Kind::Q11 => "Q11",
            Kind::Q31 => "Q31",
            Kind::Q21 => "Q21",
            Kind::Q23 => "Q23",
        };
        write!(f, "{s}")
    }
}

impl FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "R" => Ok(Kind::R),
            "Q" => Ok(Kind::Q),
            "R11" => Ok(Kind::R11),
            "R31" => Ok(Kind::R31),
            "R21" => Ok(Kind::R21),
            "R23" => Ok(Kind::R23),
            "Q11" => Ok(Kind::Q11),
            "Q31" => Ok(Kind::Q31),
            "Q21" => Ok(Kind::Q21),
            "Q23" => Ok(Kind::Q23),
            other => Err(Error::Domain(format!("unknown counting kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniTerm {
    pub coef: BigRational,
    pub base: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BiTerm {
    pub coef: BigRational,
    pub base3: i64,
    pub base1: i64,
}

/// Exact exponential polynomial: a finite sum of exponential terms with
/// rational coefficients. No floating point anywhere.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExpPoly {
    Uni(Vec<UniTerm>),
    Bi(Vec<BiTerm>),
}

impl ExpPoly {
    pub fn uni_terms(&self) -> Result<&[UniTerm]> {
        match self {
            ExpPoly::Uni(t) => Ok(t),
            ExpPoly::Bi(_) => Err(Error::Internal("expected a univariate family".into())),
        }
    }

    pub fn bi_terms(&self) -> Result<&[BiTerm]> {
        match self {
            ExpPoly::Bi(t) => Ok(t),
            ExpPoly::Uni(_) => Err(Error::Internal("expected a bivariate family".into())),
        }
    }

    /// Merges equal bases, drops zero coefficients, sorts by descending base.
    fn compress(self) -> ExpPoly {
        match self {
            ExpPoly::Uni(terms) => {
                let mut map: BTreeMap<i64, BigRational> = BTreeMap::new();
                for t in terms {
                    let e = map.entry(t.base).or_insert_with(BigRational::zero);
                    *e += t.coef;
                }
                let mut out: Vec<UniTerm> = map
                    .into_iter()
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(base, coef)| UniTerm { coef, base })
                    .collect();
                out.reverse();
                ExpPoly::Uni(out)
            }
            ExpPoly::Bi(terms) => {
                let mut map: BTreeMap<(i64, i64), BigRational> = BTreeMap::new();
                for t in terms {
                    let e = map
                        .entry((t.base3, t.base1))
                        .or_insert_with(BigRational::zero);
                    *e += t.coef;
                }
                let mut out: Vec<BiTerm> = map
                    .into_iter()
                    .filter(|(_, c)| !c.is_zero())
                    .map(|((base3, base1), coef)| BiTerm { coef, base3, base1 })
                    .collect();
                out.reverse();
                ExpPoly::Bi(out)
            }
        }
    }

    fn add(self, other: ExpPoly) -> Result<ExpPoly> {
        match (self, other) {
            (ExpPoly::Uni(mut a), ExpPoly::Uni(b)) => {
                a.extend(b);
                Ok(ExpPoly::Uni(a).compress())
            }
            (ExpPoly::Bi(mut a), ExpPoly::Bi(b)) => {
                a.extend(b);
                Ok(ExpPoly::Bi(a).compress())
            }
            _ => Err(Error::Internal("mixed-arity polynomial sum".into())),
        }
    }

    fn scale(self, c: &BigRational) -> ExpPoly {
        match self {
            ExpPoly::Uni(mut t) => {
                for term in &mut t {
                    term.coef *= c;
                }
                ExpPoly::Uni(t).compress()
            }
            ExpPoly::Bi(mut t) => {
                for term in &mut t {
                    term.coef *= c;
                }
                ExpPoly::Bi(t).compress()
            }
        }
    }

    /// Substitutes `omega + 1` for `omega`: multiplies each coefficient by
    /// its base. Univariate only.
    fn up_shift(self) -> Result<ExpPoly> {
        match self {
            ExpPoly::Uni(mut t) => {
                for term in &mut t {
                    term.coef *= br(term.base);
                }
                Ok(ExpPoly::Uni(t).compress())
            }
            ExpPoly::Bi(_) => Err(Error::Internal("up-shift of a bivariate family".into())),
        }
    }

    /// Rational continuation at any integer `omega` (negative powers allowed).
    pub fn eval_uni(&self, omega: i64) -> Result<BigRational> {
        let mut acc = BigRational::zero();
        for t in self.uni_terms()? {
            acc += &t.coef * rat_pow(t.base, omega - 1)?;
        }
        Ok(acc)
    }

    pub fn eval_bi(&self, omega3: i64, omega1: i64) -> Result<BigRational> {
        let mut acc = BigRational::zero();
        for t in self.bi_terms()? {
            acc += &t.coef * rat_pow(t.base3, omega3 - 1)? * rat_pow(t.base1, omega1)?;
        }
        Ok(acc)
    }
}

impl fmt::Display for ExpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn coef_str(c: &BigRational) -> String {
            if c.is_integer() {
                c.numer().magnitude().to_string()
            } else {
                format!("{}/{}", c.numer().magnitude(), c.denom())
            }
        }
        let mut first = true;
        let mut sep = |f: &mut fmt::Formatter<'_>, neg: bool| -> fmt::Result {
            if first {
                first = false;
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            Ok(())
        };
        match self {
            ExpPoly::Uni(terms) => {
                if terms.is_empty() {
                    return write!(f, "0");
                }
                for t in terms {
                    sep(f, t.coef.is_negative())?;
                    write!(f, "{}*({})^(omega-1)", coef_str(&t.coef), t.base)?;
                }
            }
            ExpPoly::Bi(terms) => {
                if terms.is_empty() {
                    return write!(f, "0");
                }
                for t in terms {
                    sep(f, t.coef.is_negative())?;
                    write!(
                        f,
                        "{}*({})^(omega3-1)*({})^(omega1)",
                        coef_str(&t.coef),
                        t.base3,
                        t.base1
                    )?;
                }
            }
        }
        Ok(())
    }
}

/// A derived counting family: the exponential polynomial plus, where the
/// rational continuation disagrees with the true count at the empty odd
/// radical, the correct value there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountFamily {
    pub k: u32,
    pub kind: Kind,
    pub poly: ExpPoly,
    pub zero_override: Option<BigInt>,
}

impl CountFamily {
    /// Value of the rational continuation at `omega = 0` (bivariate: both
    /// exponents 0), ignoring the override. Used when summing families over
    /// a range that includes the empty radical.
    pub fn rational_at_zero(&self) -> Result<BigRational> {
        match self.kind.is_bivariate() {
            false => self.poly.eval_uni(0),
            true => self.poly.eval_bi(0, 0),
        }
    }
}

/// `sum_{j=i+1..=n} a^(j-i-1) * b^(n-j)`, in closed form
/// `(b^(n-i) - a^(n-i)) / (b - a)`. Demands `a != b` and `n >= i`.
pub fn geometric_pair_sum(a: i64, b: i64, n: u32, i: u32) -> Result<BigRational> {
    if a == b {
        return Err(Error::EqualBases(a));
    }
    if n < i {
        return Err(Error::Domain(format!(
            "pair sum needs n >= i, got n = {n}, i = {i}"
        )));
    }
    let e = n - i;
    let num = rat_pow(b, e as i64)? - rat_pow(a, e as i64)?;
    Ok(num / (br(b) - br(a)))
}

/// Same sum, term by term; the closed form is checked against this.
pub fn geometric_pair_sum_literal(a: i64, b: i64, n: u32, i: u32) -> Result<BigInt> {
    if n < i {
        return Err(Error::Domain(format!(
            "pair sum needs n >= i, got n = {n}, i = {i}"
        )));
    }
    let mut acc = BigInt::zero();
    for j in (i + 1)..=n {
        acc += bi(a).pow(j - i - 1) * bi(b).pow(n - j);
    }
    Ok(acc)
}

/// Number of normal-form patterns with `k` entries over `n` ordered primes:
/// walk the primes; each either starts the next entry or joins one of the
/// `2^j - 1` nonempty subsets of the `j` entries started so far.
pub fn nested_sum_rk(k: u32, n: u32) -> BigInt {
    let k = k as usize;
    let mut dp = vec![BigInt::zero(); k + 1];
    dp[0] = BigInt::one();
    for _ in 0..n {
        let mut nd = vec![BigInt::zero(); k + 1];
        for j in 0..=k {
            if dp[j].is_zero() {
                continue;
            }
            nd[j] += &dp[j] * ((bi(1) << j) - 1);
            if j < k {
                let carry = dp[j].clone();
                nd[j + 1] += carry;
            }
        }
        dp = nd;
    }
    dp[k].clone()
}

/// Number of length-`a` sequences of nonempty subsets of a `b`-set whose
/// XOR is zero (`all_even`) or equals one fixed nonzero vector (the count
/// is the same for every nonzero vector).
pub fn parity_subset_count(a: u32, b: u32, all_even: bool) -> Result<BigRational> {
    if b == 0 {
        return Err(Error::Domain("parity subset count needs b >= 1".into()));
    }
    let m = (bi(1) << b) - bi(1); // 2^b - 1
    let sign = if a % 2 == 0 { bi(1) } else { bi(-1) };
    let num = if all_even {
        BigRational::from_integer(m.pow(a) + m * sign)
    } else {
        BigRational::from_integer(m.pow(a) - sign)
    };
    Ok(num / BigRational::from_integer(bi(1) << b))
}

/// Literal enumeration over all selection sequences; exponential, test use.
pub fn parity_subset_count_literal(a: u32, b: u32) -> Vec<BigInt> {
    let mut counts = vec![BigInt::zero(); 1 << b];
    fn rec(left: u32, b: u32, acc: usize, counts: &mut [BigInt]) {
        if left == 0 {
            counts[acc] += 1;
            return;
        }
        for t in 1usize..(1 << b) {
            rec(left - 1, b, acc ^ t, counts);
        }
    }
    rec(a, b, 0, &mut counts);
    counts
}

// ---------------------------------------------------------------------------
// Mod-4-refined pattern recurrences (two independent routes).

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Row {
    /// The prime 2; first when present.
    Two,
    /// An odd prime congruent 3 mod 4: flips parity where it lands.
    Three,
    /// An odd prime congruent 1 mod 4: parity-neutral.
    One,
}

/// State-by-state recurrence over pattern rows. State: number of started
/// entries `j` and the parity vector `sigma` of 3-mod-4 prime counts per
/// entry (bit `i` = entry `i + 1`). Returns totals split by mod-4 class:
/// odd radical `(class11, class31)`, even radical `(class21, class23)`.
fn mod4_rows_count(k: u32, rows: &[Row]) -> (BigInt, BigInt) {
    let k = k as usize;
    let even = rows.contains(&Row::Two);
    debug_assert!(!even || rows[0] == Row::Two);
    // dp[j][sigma]
    let mut dp: Vec<Vec<BigInt>> = (0..=k).map(|j| vec![BigInt::zero(); 1 << j]).collect();
    dp[0][0] = BigInt::one();
    for &row in rows {
        let mut nd: Vec<Vec<BigInt>> = (0..=k).map(|j| vec![BigInt::zero(); 1 << j]).collect();
        for j in 0..=k {
            for sigma in 0..(1usize << j) {
                if dp[j][sigma].is_zero() {
                    continue;
                }
                let w = &dp[j][sigma];
                match row {
                    Row::Two | Row::One => {
                        // join any nonempty subset: parity unchanged
                        nd[j][sigma] += w * ((bi(1) << j) - 1);
                        if j < k {
                            nd[j + 1][sigma] += w;
                        }
                    }
                    Row::Three => {
                        for t in 1usize..(1 << j) {
                            nd[j][sigma ^ t] += w;
                        }
                        if j < k {
                            nd[j + 1][sigma | 1 << j] += w;
                        }
                    }
                }
            }
        }
        dp = nd;
    }
    let mut a = BigInt::zero();
    let mut b = BigInt::zero();
    for (sigma, w) in dp[k].iter().enumerate() {
        // Odd radical: class (1,1) iff no entry has odd 3-count. Even
        // radical: the 2-entry is entry 1; class (2,1) iff no *other*
        // entry has odd 3-count.
        let in_a = if even { sigma & !1 == 0 } else { sigma == 0 };
        if in_a {
            a += w;
        } else {
            b += w;
        }
    }
    (a, b)
}

fn rows_canonical(omega3: u32, omega1: u32, even_radical: bool) -> Vec<Row> {
    let mut rows = Vec::with_capacity((omega3 + omega1 + 1) as usize);
    if even_radical {
        rows.push(Row::Two);
    }
    rows.extend(std::iter::repeat(Row::Three).take(omega3 as usize));
    rows.extend(std::iter::repeat(Row::One).take(omega1 as usize));
    rows
}

/// Canonical row order: 2 first, then the 3 mod 4 primes, then the 1 mod 4
/// primes. The result is independent of the interleaving (tested).
fn mod4_pattern_count(k: u32, omega3: u32, omega1: u32, even_radical: bool) -> (BigInt, BigInt) {
    mod4_rows_count(k, &rows_canonical(omega3, omega1, even_radical))
}

/// Independent route: collapse runs of non-pivot 3 mod 4 primes through
/// [`parity_subset_count`] instead of stepping prime by prime, then place
/// the 1 mod 4 primes by a separate tail recurrence. Exists to cross-check
/// [`mod4_pattern_count`], so only tests call it.
#[cfg(test)]
fn mod4_runs_count(k: u32, omega3: u32, omega1: u32, even_radical: bool) -> (BigInt, BigInt) {
    let kk = k as usize;

    // ones[j][r]: ways to place r parity-neutral primes starting with j
    // entries, finishing with k (each level step consumes one as a pivot,
    // the rest join one of the 2^level - 1 subsets at their level).
    let r_max = omega1 as usize;
    let mut ones = vec![vec![BigInt::zero(); r_max + 1]; kk + 1];
    for r in 0..=r_max {
        ones[kk][r] = ((bi(1) << kk) - bi(1)).pow(r as u32);
    }
    for j in (0..kk).rev() {
        for r in 0..=r_max {
            let mut acc = BigInt::zero();
            let mult = (bi(1) << j) - 1;
            let mut pw = BigInt::one();
            for h in 0..r {
                acc += &pw * &ones[j + 1][r - h - 1];
                pw *= &mult;
            }
            ones[j][r] = acc;
        }
    }

    struct Ctx<'a> {
        k: usize,
        even: bool,
        ones: &'a [Vec<BigInt>],
        omega1: usize,
        class_a: BigInt,
        class_b: BigInt,
    }

    // One call per (run length, pivot) block of the 3 mod 4 primes. A run
    // of t non-pivots at a level distributes its parity by the closed count;
    // a trailing run ends the 3-block and hands over to the 1-primes.
    fn go(ctx: &mut Ctx, rem3: u32, level: usize, sigma: usize, weight: &BigRational) {
        // Finish: the remaining rem3 primes form the trailing run here.
        let finish = |ctx: &mut Ctx, sigma: usize, w: BigRational| {
            let tail = &ctx.ones[level][ctx.omega1];
            if !tail.is_zero() {
                let total = w * BigRational::from_integer(tail.clone());
                debug_assert!(total.is_integer());
                let in_a = if ctx.even {
                    sigma & !1 == 0
                } else {
                    sigma == 0
                };
                if in_a {
                    ctx.class_a += total.to_integer();
                } else {
                    ctx.class_b += total.to_integer();
                }
            }
        };
        if level == 0 {
            if rem3 == 0 {
                finish(ctx, sigma, weight.clone());
            }
        } else {
            for delta in 0..(1usize << level) {
                let w = parity_subset_count(rem3, level as u32, delta == 0).expect("level >= 1");
                if !w.is_zero() {
                    finish(ctx, sigma ^ delta, weight * w);
                }
            }
        }
        if rem3 == 0 || level >= ctx.k {
            return;
        }
        // Otherwise: run of t < rem3 non-pivots here, then a 3-pivot.
        for t in 0..rem3 {
            if level == 0 {
                if t > 0 {
                    break; // no entries yet, so no non-pivot placements
                }
                go(ctx, rem3 - 1, 1, sigma | 1, weight);
                continue;
            }
            for delta in 0..(1usize << level) {
                let w = parity_subset_count(t, level as u32, delta == 0).expect("level >= 1");
                if !w.is_zero() {
                    let nw = weight * w;
                    go(
                        ctx,
                        rem3 - t - 1,
                        level + 1,
                        (sigma ^ delta) | 1 << level,
                        &nw,
                    );
                }
            }
        }
    }

    let mut ctx = Ctx {
        k: kk,
        even: even_radical,
        ones: &ones,
        omega1: omega1 as usize,
        class_a: BigInt::zero(),
        class_b: BigInt::zero(),
    };
    // Even radicals force the 2 to pivot entry 1 before any odd prime.
    let level0 = usize::from(even_radical);
    if level0 <= kk {
        go(&mut ctx, omega3, level0, 0, &BigRational::one());
    }
    (ctx.class_a, ctx.class_b)
}

// ---------------------------------------------------------------------------
// Exact linear algebra.

/// Gaussian elimination over the rationals; errors on singular systems.
fn solve_exact(
    mut m: Vec<Vec<BigRational>>,
    mut rhs: Vec<BigRational>,
    what: &str,
) -> Result<Vec<BigRational>> {
    let n = m.len();
    for col in 0..n {
        let piv = (col..n)
            .find(|&r| !m[r][col].is_zero())
            .ok_or_else(|| Error::SingularSystem(what.to_string()))?;
        m.swap(col, piv);
        rhs.swap(col, piv);
        let inv = m[col][col].recip();
        for c in col..n {
            let v = &m[col][c] * &inv;
            m[col][c] = v;
        }
        let scaled = &rhs[col] * &inv;
        rhs[col] = scaled;
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in col..n {
                    let v = &m[r][c] - &f * &m[col][c];
                    m[r][c] = v;
                }
                let v = &rhs[r] - &f * &rhs[col];
                rhs[r] = v;
            }
        }
    }
    Ok(rhs)
}

/// Solves `sum_c coef_c * bases[c]^(grid[r]) = values[r]` for the coefs.
fn solve_exponential_fit(
    bases: &[i64],
    grid_exps: &[i64],
    values: &[BigRational],
    what: &str,
) -> Result<Vec<BigRational>> {
    let n = bases.len();
    assert_eq!(grid_exps.len(), n);
    assert_eq!(values.len(), n);
    let mut m = Vec::with_capacity(n);
    for &e in grid_exps {
        let row: Result<Vec<BigRational>> = bases.iter().map(|&b| rat_pow(b, e)).collect();
        m.push(row?);
    }
    solve_exact(m, values.to_vec(), what)
}

// ---------------------------------------------------------------------------
// Family derivation.

/// Product of 1 / (2^k - 2^j) over j = 1..k-1: the leading coefficient of
/// the totally real family.
pub fn leading_factor(k: u32) -> BigRational {
    let mut acc = BigRational::one();
    for j in 1..k {
        acc /= BigRational::from_integer((bi(1) << k) - (bi(1) << j));
    }
    acc
}

fn derive_r_poly(k: u32) -> Result<ExpPoly> {
    let bases: Vec<i64> = (1..=k as i64).map(|j| (1i64 << j) - 1).collect();
    let grid: Vec<i64> = (0..k as i64).collect(); // omega - 1 for omega = 1..=k
    let values: Vec<BigRational> = (1..=k)
        .map(|n| BigRational::from_integer(nested_sum_rk(k, n)))
        .collect();
    let coefs = solve_exponential_fit(&bases, &grid, &values, &format!("R family k={k}"))?;
    let poly = ExpPoly::Uni(
        bases
            .iter()
            .zip(coefs)
            .map(|(&base, coef)| UniTerm { coef, base })
            .collect(),
    )
    .compress();
    // The fit used omega = 1..=k; make sure the form extrapolates.
    for n in (k + 1)..=(k + 3) {
        let want = BigRational::from_integer(nested_sum_rk(k, n));
        if poly.eval_uni(n as i64)? != want {
            return Err(Error::Internal(format!(
                "R family k={k} fails extrapolation at omega={n}"
            )));
        }
    }
    Ok(poly)
}

fn finish_uni(k: u32, kind: Kind, poly: ExpPoly, truth_at_zero: BigInt) -> Result<CountFamily> {
    let rational = poly.eval_uni(0)?;
    let zero_override = if rational == BigRational::from_integer(truth_at_zero.clone()) {
        None
    } else {
        Some(truth_at_zero)
    };
    Ok(CountFamily {
        k,
        kind,
        poly,
        zero_override,
    })
}

/// Derives both mod-4 classes of the totally real family for one radical
/// parity: fit `sum c * base3^(omega3-1) * base1^(omega1)` on a small grid
/// of the pattern recurrence, then verify on a strictly larger grid.
fn derive_bi_pair(k: u32, even_radical: bool) -> Result<(ExpPoly, ExpPoly)> {
    let kk = k as i64;
    let bases3: Vec<i64> = std::iter::once(-1)
        .chain((1..=kk).map(|j| (1i64 << j) - 1))
        .collect(); // k + 1 bases
    let bases1: Vec<i64> = (1..=kk).map(|j| (1i64 << j) - 1).collect(); // k bases
    let w3_fit: Vec<i64> = (1..=kk + 1).collect();
    let w1_fit: Vec<i64> = (0..kk).collect();

    let truth = |w3: i64, w1: i64| mod4_pattern_count(k, w3 as u32, w1 as u32, even_radical);

    let mut polys = Vec::with_capacity(2);
    for pick_a in [true, false] {
        // Stage 1: at each omega1 on the grid, resolve the omega3 direction.
        // h[b3 index][omega1 index]
        let mut h = vec![vec![BigRational::zero(); w1_fit.len()]; bases3.len()];
        for (i1, &w1) in w1_fit.iter().enumerate() {
            let values: Vec<BigRational> = w3_fit
                .iter()
                .map(|&w3| {
                    let (a, b) = truth(w3, w1);
                    BigRational::from_integer(if pick_a { a } else { b })
                })
                .collect();
            let grid: Vec<i64> = w3_fit.iter().map(|&w| w - 1).collect();
            let sol = solve_exponential_fit(
                &bases3,
                &grid,
                &values,
                &format!("class family k={k} stage 1"),
            )?;
            for (ib, v) in sol.into_iter().enumerate() {
                h[ib][i1] = v;
            }
        }
        // Stage 2: resolve each base3 slice along omega1.
        let mut terms: Vec<BiTerm> = Vec::new();
        for (ib, &base3) in bases3.iter().enumerate() {
            let sol = solve_exponential_fit(
                &bases1,
                &w1_fit,
                &h[ib],
                &format!("class family k={k} stage 2"),
            )?;
            for (i1, coef) in sol.into_iter().enumerate() {
                terms.push(BiTerm {
                    coef,
                    base3,
                    base1: bases1[i1],
                });
            }
        }
        polys.push(ExpPoly::Bi(terms).compress());
    }

    // Verify both fits on a larger grid, including omega3 = 0 where the
    // closed form continues through negative powers. (0, 0) is the radical-1
    // (radical-2) cell handled by the zero override.
    for w3 in 0..=(kk + 3) {
        for w1 in 0..=(kk + 2) {
            if w3 == 0 && w1 == 0 {
                continue;
            }
            let (a, b) = truth(w3, w1);
            for (poly, want) in [(&polys[0], a), (&polys[1], b)] {
                if poly.eval_bi(w3, w1)? != BigRational::from_integer(want.clone()) {
                    return Err(Error::Internal(format!(
                        "class family k={k} even={even_radical} fails verification at omega3={w3}, omega1={w1}"
                    )));
                }
            }
        }
    }
    let mut it = polys.into_iter();
    Ok((it.next().unwrap(), it.next().unwrap()))
}

fn finish_bi(k: u32, kind: Kind, poly: ExpPoly, truth_at_zero: BigInt) -> Result<CountFamily> {
    let rational = poly.eval_bi(0, 0)?;
    let zero_override = if rational == BigRational::from_integer(truth_at_zero.clone()) {
        None
    } else {
        Some(truth_at_zero)
    };
    Ok(CountFamily {
        k,
        kind,
        poly,
        zero_override,
    })
}

/// Derives the counting family for `kind` at rank `k`: exact coefficients,
/// verified against the brute-force recurrences before being returned.
pub fn derive_family(k: u32, kind: Kind) -> Result<CountFamily> {
    if k < kind.min_k() || k > MAX_FAMILY_K {
        return Err(Error::Domain(format!(
            "kind {kind} needs k in {}..={MAX_FAMILY_K}, got {k}",
            kind.min_k()
        )));
    }
    match kind {
        Kind::R => {
            let poly = derive_r_poly(k)?;
            finish_uni(k, kind, poly, BigInt::zero())
        }
        Kind::Q => {
            // Every field either is i-free (2^k sign choices of a totally
            // real pattern) or arises from a rank k-1 totally real field by
            // adjoining i.
            let rk = derive_r_poly(k)?;
            let rk1 = derive_r_poly(k - 1)?;
            let poly = rk.scale(&br(1i64 << k)).add(rk1)?;
            finish_uni(k, kind, poly, BigInt::zero())
        }
        Kind::Q11 => {
            // Fields of class (1,1) with radical P biject with the totally
            // real fields with radical P.
            let poly = derive_r_poly(k)?;
            finish_uni(k, kind, poly, BigInt::zero())
        }
        Kind::Q31 => {
            let q = derive_family(k, Kind::Q)?.poly;
            let r = derive_r_poly(k)?;
            let poly = q.add(r.scale(&br(-1)))?;
            finish_uni(k, kind, poly, BigInt::zero())
        }
        Kind::Q21 => {
            // Class (2,1) fields with radical 2P are twice the totally real
            // fields with radical 2P.
            let poly = derive_r_poly(k)?.up_shift()?.scale(&br(2));
            finish_uni(k, kind, poly, BigInt::zero())
        }
        Kind::Q23 => {
            let q_at_2p = derive_family(k, Kind::Q)?.poly.up_shift()?;
            let q21 = derive_family(k, Kind::Q21)?.poly;
            let poly = q_at_2p.add(q21.scale(&br(-1)))?;
            // Radical 2 admits exactly Q(i, sqrt 2) when k = 2.
            finish_uni(
                k,
                kind,
                poly,
                if k == 2 {
                    BigInt::one()
                } else {
                    BigInt::zero()
                },
            )
        }
        Kind::R11 | Kind::R31 | Kind::R21 | Kind::R23 => {
            let even = kind.is_even_radical();
            let (pa, pb) = derive_bi_pair(k, even)?;
            let first = matches!(kind, Kind::R11 | Kind::R21);
            let poly = if first { pa } else { pb };
            let (ta, tb) = mod4_pattern_count(k, 0, 0, even);
            finish_bi(k, kind, poly, if first { ta } else { tb })
        }
    }
}

static FAMILY_CACHE: OnceLock<Mutex<BTreeMap<(u32, Kind), CountFamily>>> = OnceLock::new();

/// Memoized [`derive_family`]; derivation is deterministic, so caching is
/// invisible.
pub fn derive_family_cached(k: u32, kind: Kind) -> Result<CountFamily> {
    let cache = FAMILY_CACHE.get_or_init(|| Mutex::new(BTreeMap::new()));
    {
        let guard = cache.lock().expect("family cache poisoned");
        if let Some(f) = guard.get(&(k, kind)) {
            return Ok(f.clone());
        }
    }
    let fam = derive_family(k, kind)?;
    let mut guard = cache.lock().expect("family cache poisoned");
    guard.entry((k, kind)).or_insert_with(|| fam.clone());
    Ok(fam)
}

/// Evaluates a family at the profile of a squarefree radical (for the
/// class-restricted kinds: of the odd part of the radical). Exact; the
/// result is a nonnegative integer.
pub fn eval_count(family: &CountFamily, profile: &SquarefreeProfile) -> Result<BigInt> {
    if !profile.is_squarefree {
        return Err(Error::NotSquarefree(profile.n as i64));
    }
    let classed = family.kind != Kind::R && family.kind != Kind::Q;
    if classed && profile.n % 2 == 0 {
        return Err(Error::Domain(format!(
            "kind {} takes the odd part of the radical, got even {}",
            family.kind, profile.n
        )));
    }
    let value = if family.kind.is_bivariate() {
        if profile.omega3 == 0 && profile.omega1 == 0 {
            if let Some(v) = &family.zero_override {
                return Ok(v.clone());
            }
        }
        family
            .poly
            .eval_bi(profile.omega3 as i64, profile.omega1 as i64)?
    } else {
        let omega = profile.omega as i64;
        if omega == 0 {
            if let Some(v) = &family.zero_override {
                return Ok(v.clone());
            }
        }
        family.poly.eval_uni(omega)?
    };
    if !value.is_integer() || value.is_negative() {
        return Err(Error::Internal(format!(
            "family {} k={} produced non-count {} at n={}",
            family.kind, family.k, value, profile.n
        )));
    }
    Ok(value.to_integer())
}
