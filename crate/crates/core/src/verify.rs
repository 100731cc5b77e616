//! Self-check suites: every closed form against its brute-force oracle,
//! the global count against enumeration, and the numeric layer against its
//! analytic identities.
//!
//! Suites emit plain rows with no timing data, and every computation they
//! trigger is deterministic for a fixed seed, so suite output is
//! byte-identical across runs and thread counts.

use crate::arith::{build_sieve, integer_root};
use crate::asymptotics::{constant_ck, fit_leading, h1, lower_order_check};
use crate::countform::{
    derive_family_cached, eval_count, geometric_pair_sum, geometric_pair_sum_literal,
    parity_subset_count, parity_subset_count_literal, Kind,
};
use crate::error::{Error, Result};
use crate::fields::Mod4Class;
use crate::globalcount::{count_n, sum_a, sum_a_bivariate, SieveCfg};
use crate::oracle::{enumerate_by_discriminant, enumerate_by_radical, FieldFilter};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fmt::Display;
use std::str::FromStr;

/// One verification check: `pass` is `expected == got` or an explicit
/// bound check, depending on the row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckRow {
    pub suite: String,
    pub check: String,
    pub params: String,
    pub expected: String,
    pub got: String,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOpts {
    /// Cap on the number of primes in generated test radicals.
    pub max_omega: u32,
    pub seed: u64,
    pub cfg: SieveCfg,
}

impl Default for VerifyOpts {
    fn default() -> Self {
        VerifyOpts {
            max_omega: 4,
            seed: 1,
            cfg: SieveCfg::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Formulas,
    Global,
    Asymptotics,
    All,
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Suite> {
        match s.to_ascii_lowercase().as_str() {
            "formulas" => Ok(Suite::Formulas),
            "global" => Ok(Suite::Global),
            "asymptotics" => Ok(Suite::Asymptotics),
            "all" => Ok(Suite::All),
            other => Err(Error::Domain(format!(
                "unknown suite {other:?}; use formulas, global, asymptotics or all"
            ))),
        }
    }
}

impl Display for Suite {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Suite::Formulas => "formulas",
            Suite::Global => "global",
            Suite::Asymptotics => "asymptotics",
            Suite::All => "all",
        })
    }
}

pub fn run_suite(suite: Suite, opts: &VerifyOpts) -> Result<Vec<CheckRow>> {
    let mut rows = Vec::new();
    match suite {
        Suite::Formulas => formulas_suite(opts, &mut rows)?,
        Suite::Global => global_suite(opts, &mut rows)?,
        Suite::Asymptotics => asymptotics_suite(opts, &mut rows)?,
        Suite::All => {
            formulas_suite(opts, &mut rows)?;
            global_suite(opts, &mut rows)?;
            asymptotics_suite(opts, &mut rows)?;
        }
    }
    Ok(rows)
}

pub fn first_failure(rows: &[CheckRow]) -> Option<&CheckRow> {
    rows.iter().find(|r| !r.pass)
}

fn eq_row(
    suite: &str,
    check: &str,
    params: String,
    expected: impl Display,
    got: impl Display,
) -> CheckRow {
    let expected = expected.to_string();
    let got = got.to_string();
    let pass = expected == got;
    CheckRow {
        suite: suite.into(),
        check: check.into(),
        params,
        expected,
        got,
        pass,
    }
}

fn bound_row(
    suite: &str,
    check: &str,
    params: String,
    expected: impl Display,
    got: impl Display,
    pass: bool,
) -> CheckRow {
    CheckRow {
        suite: suite.into(),
        check: check.into(),
        params,
        expected: expected.to_string(),
        got: got.to_string(),
        pass,
    }
}

/// Filter selecting exactly the fields the kind counts: `Q`-kinds count
/// every field of the radical (and class), `R`-kinds the totally real ones.
fn kind_filter(kind: Kind) -> FieldFilter {
    let class = |c| FieldFilter {
        mod4_class: Some(c),
        ..Default::default()
    };
    let real_class = |c| FieldFilter {
        totally_real_only: true,
        mod4_class: Some(c),
        ..Default::default()
    };
    match kind {
        Kind::R => FieldFilter {
            totally_real_only: true,
            ..Default::default()
        },
        Kind::Q => FieldFilter::default(),
        Kind::Q11 => class(Mod4Class::C11),
        Kind::Q31 => class(Mod4Class::C31),
        Kind::Q21 => class(Mod4Class::C21),
        Kind::Q23 => class(Mod4Class::C23),
        Kind::R11 => real_class(Mod4Class::C11),
        Kind::R31 => real_class(Mod4Class::C31),
        Kind::R21 => real_class(Mod4Class::C21),
        Kind::R23 => real_class(Mod4Class::C23),
    }
}

/// Squarefree products of subsets of `primes` with at most `max_omega`
/// elements, ascending, starting at 1.
fn subset_radicals(primes: &[u64], max_omega: u32) -> Vec<u64> {
    let mut out = Vec::new();
    for mask in 0u32..(1 << primes.len()) {
        if mask.count_ones() <= max_omega {
            let mut p = 1u64;
            for (i, &q) in primes.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    p *= q;
                }
            }
            out.push(p);
        }
    }
    out.sort_unstable();
    out
}

fn formulas_suite(opts: &VerifyOpts, rows: &mut Vec<CheckRow>) -> Result<()> {
    const S: &str = "formulas";
    let primes = [3u64, 5, 7, 13, 17, 29];
    let odd = subset_radicals(&primes, opts.max_omega.min(6));
    let max_rad = odd.last().copied().unwrap_or(1) * 2;
    let sieve = build_sieve(1, max_rad + 1)?;

    // Every closed form against direct enumeration of its fields.
    for k in [2u32, 3] {
        for kind in Kind::ALL {
            if kind.min_k() > k {
                continue;
            }
            let fam = derive_family_cached(k, kind)?;
            let filter = kind_filter(kind);
            for &p in &odd {
                // Even-radical classes take the odd part as argument but
                // describe fields with radical 2P.
                let (radical, arg) = if kind.is_even_radical() {
                    (2 * p, p)
                } else {
                    (p, p)
                };
                let want = enumerate_by_radical(radical, k, &filter)?.len();
                let got = eval_count(&fam, &sieve.profile(arg)?)?;
                rows.push(eq_row(
                    S,
                    "family-vs-enumeration",
                    format!("k={k} kind={kind} radical={radical}"),
                    want,
                    got,
                ));
            }
            // Even radicals for the two kinds that take them directly.
            if matches!(kind, Kind::R | Kind::Q) {
                for &p in &odd {
                    let radical = 2 * p;
                    let want = enumerate_by_radical(radical, k, &filter)?.len();
                    let got = eval_count(&fam, &sieve.profile(radical)?)?;
                    rows.push(eq_row(
                        S,
                        "family-vs-enumeration",
                        format!("k={k} kind={kind} radical={radical}"),
                        want,
                        got,
                    ));
                }
            }
        }
    }

    // Pinned small values of the two recursions and the class splits.
    let pinned: [(u32, Kind, u64, i64); 14] = [
        (2, Kind::R, 3, 0),
        (2, Kind::R, 15, 1),
        (2, Kind::R, 105, 4),
        (3, Kind::R, 3, 0),
        (3, Kind::R, 15, 0),
        (3, Kind::R, 105, 1),
        (3, Kind::R, 1155, 11),
        (2, Kind::Q, 3, 1),
        (2, Kind::Q, 15, 5),
        (2, Kind::Q, 105, 17),
        (2, Kind::Q21, 1, 0),
        (2, Kind::Q23, 1, 1),
        (2, Kind::R11, 65, 1),
        (2, Kind::R11, 21, 0),
    ];
    let big_sieve = build_sieve(1, 1156)?;
    for (k, kind, p, want) in pinned {
        let fam = derive_family_cached(k, kind)?;
        let got = eval_count(&fam, &big_sieve.profile(p)?)?;
        rows.push(eq_row(
            S,
            "pinned-value",
            format!("k={k} kind={kind} P={p}"),
            want,
            got,
        ));
    }

    // Structural identities, element-wise on a grid. The class splits must
    // rebuild the totals: odd classes sum to the count at omega, the
    // even-radical ones to the count at omega + 1 (the extra prime 2).
    for k in 2..=4u32 {
        let q = derive_family_cached(k, Kind::Q)?.poly;
        let r = derive_family_cached(k, Kind::R)?.poly;
        let rprev = derive_family_cached(k - 1, Kind::R)?.poly;
        let mut bad = String::new();
        for w in 1..=(k as i64 + 3) {
            let lhs = q.eval_uni(w)?;
            let rhs = BigRational::from_integer(BigInt::from(1i64 << k)) * r.eval_uni(w)?
                + rprev.eval_uni(w)?;
            if lhs != rhs {
                bad = format!("omega={w}: {lhs} vs {rhs}");
                break;
            }
        }
        rows.push(eq_row(
            S,
            "rank-recursion-identity",
            format!("k={k}"),
            "equal",
            if bad.is_empty() { "equal".into() } else { bad },
        ));

        for (check, kinds, shift) in [
            ("odd-class-split", [Kind::Q11, Kind::Q31], 0i64),
            ("even-class-split", [Kind::Q21, Kind::Q23], 1),
        ] {
            let a = derive_family_cached(k, kinds[0])?.poly;
            let b = derive_family_cached(k, kinds[1])?.poly;
            let mut bad = String::new();
            for w in 1..=(k as i64 + 3) {
                let lhs = a.eval_uni(w)? + b.eval_uni(w)?;
                let rhs = q.eval_uni(w + shift)?;
                if lhs != rhs {
                    bad = format!("omega={w}: {lhs} vs {rhs}");
                    break;
                }
            }
            rows.push(eq_row(
                S,
                check,
                format!("k={k}"),
                "equal",
                if bad.is_empty() { "equal".into() } else { bad },
            ));
        }
        for (check, kinds, shift) in [
            ("odd-real-split", [Kind::R11, Kind::R31], 0i64),
            ("even-real-split", [Kind::R21, Kind::R23], 1),
        ] {
            let a = derive_family_cached(k, kinds[0])?.poly;
            let b = derive_family_cached(k, kinds[1])?.poly;
            let mut bad = String::new();
            'outer: for w3 in 0..=(k as i64 + 2) {
                for w1 in 0..=(k as i64 + 2) {
                    if w3 == 0 && w1 == 0 {
                        continue;
                    }
                    let lhs = a.eval_bi(w3, w1)? + b.eval_bi(w3, w1)?;
                    let rhs = r.eval_uni(w3 + w1 + shift)?;
                    if lhs != rhs {
                        bad = format!("omega3={w3} omega1={w1}: {lhs} vs {rhs}");
                        break 'outer;
                    }
                }
            }
            rows.push(eq_row(
                S,
                check,
                format!("k={k}"),
                "equal",
                if bad.is_empty() { "equal".into() } else { bad },
            ));
        }
    }

    // Leading coefficients against their closed forms.
    for k in 2..=4u32 {
        let fk = crate::countform::leading_factor(k);
        let m = BigRational::from_integer(BigInt::from((1i64 << k) - 1));
        let two = |e: u32| BigRational::from_integer(BigInt::from(1i64 << e));
        let expect: [(Kind, BigRational); 10] = [
            (Kind::R, fk.clone()),
            (Kind::Q, &two(k) * &fk),
            (Kind::Q11, fk.clone()),
            (Kind::Q31, &m * &fk),
            (Kind::Q21, &two(1) * &fk * &m),
            (Kind::Q23, (&two(k) - &two(1)) * &fk * &m),
            (Kind::R11, &fk / &two(k)),
            (Kind::R31, &m * &fk / &two(k)),
            (Kind::R21, &fk / &two(k - 1) * &m),
            (
                Kind::R23,
                (&two(k - 1) - BigRational::from_integer(BigInt::from(1))) * &fk / &two(k - 1) * &m,
            ),
        ];
        let mbase = (1i64 << k) - 1;
        for (kind, want) in expect {
            let fam = derive_family_cached(k, kind)?;
            let got = if kind.is_bivariate() {
                fam.poly
                    .bi_terms()?
                    .iter()
                    .find(|t| t.base3 == mbase && t.base1 == mbase)
                    .map(|t| t.coef.clone())
                    .unwrap_or_default()
            } else {
                fam.poly
                    .uni_terms()?
                    .iter()
                    .find(|t| t.base == mbase)
                    .map(|t| t.coef.clone())
                    .unwrap_or_default()
            };
            rows.push(eq_row(
                S,
                "leading-coefficient",
                format!("k={k} kind={kind}"),
                want,
                got,
            ));
        }
    }

    // The two small combinatorial lemmas behind the derivations.
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..20 {
        let (a, b) = loop {
            let a = rng.gen_range(-9i64..=9);
            let b = rng.gen_range(-9i64..=9);
            if a != b && a != 0 && b != 0 {
                break (a, b);
            }
        };
        let n = rng.gen_range(1u32..=8);
        let i = rng.gen_range(0..n);
        let closed = geometric_pair_sum(a, b, n, i)?;
        let lit = BigRational::from_integer(geometric_pair_sum_literal(a, b, n, i)?);
        rows.push(eq_row(
            S,
            "pair-sum",
            format!("a={a} b={b} n={n} i={i}"),
            lit,
            closed,
        ));
    }
    for a in 1..=6u32 {
        for b in 1..=4u32 {
            let lit = parity_subset_count_literal(a, b);
            let all_even: BigInt = lit[0].clone();
            let other = lit.get(1).cloned().unwrap_or_default();
            let ce = parity_subset_count(a, b, true)?;
            let co = parity_subset_count(a, b, false)?;
            rows.push(eq_row(
                S,
                "parity-count",
                format!("a={a} b={b}"),
                format!("{all_even}/{other}"),
                format!("{ce}/{co}"),
            ));
        }
    }
    let t_even = parity_subset_count(3, 2, true)?;
    let t_other = parity_subset_count(3, 2, false)?;
    let total = &t_even + BigRational::from_integer(BigInt::from(3)) * &t_other;
    rows.push(eq_row(
        S,
        "parity-table",
        "a=3 b=2".into(),
        "6/7/27",
        format!("{t_even}/{t_other}/{total}"),
    ));
    Ok(())
}

fn global_suite(opts: &VerifyOpts, rows: &mut Vec<CheckRow>) -> Result<()> {
    const S: &str = "global";
    let cfg = &opts.cfg;
    let all = FieldFilter::default();
    let tr = FieldFilter {
        totally_real_only: true,
        ..Default::default()
    };

    for (x, totally_real, want) in [
        (143u128, false, 0u128),
        (144, false, 1),
        (225, false, 2),
        (256, false, 3),
        (1600, true, 1),
    ] {
        let got = count_n(2, x, totally_real, cfg)?;
        rows.push(eq_row(
            S,
            "count-spot",
            format!("k=2 x={x} totally_real={totally_real}"),
            want,
            got,
        ));
    }

    // Every x <= 10^6 where the k=2 count changes, both filters: the count
    // must step exactly at the enumerated discriminants.
    for (k, limit) in [(2u32, 1_000_000u128), (3, 1_000_000_000)] {
        for (filter, totally_real) in [(&all, false), (&tr, true)] {
            let fields = enumerate_by_discriminant(limit, k, filter)?;
            let mut verdict = "ok".to_string();
            let mut checked = 0usize;
            let mut i = 0usize;
            'sweep: while i < fields.len() {
                let d = fields[i].0;
                let mut j = i;
                while j < fields.len() && fields[j].0 == d {
                    j += 1;
                }
                let before = count_n(k, d - 1, totally_real, cfg)?;
                let at = count_n(k, d, totally_real, cfg)?;
                for (x, want) in [(d - 1, i as u128), (d, j as u128)] {
                    let got = if x == d { at } else { before };
                    if got != want {
                        verdict = format!("x={x}: expected {want}, got {got}");
                        break 'sweep;
                    }
                }
                checked += 1;
                i = j;
            }
            rows.push(bound_row(
                S,
                "count-change-points",
                format!("k={k} limit={limit} totally_real={totally_real}"),
                "steps match enumeration",
                if verdict == "ok" {
                    format!("{checked} change points ok")
                } else {
                    verdict.clone()
                },
                verdict == "ok",
            ));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..50 {
        let x = rng.gen_range(1u128..=100_000_000);
        let want = enumerate_by_discriminant(x, 2, &all)?.len() as u128;
        let got = count_n(2, x, false, cfg)?;
        rows.push(eq_row(S, "count-random", format!("k=2 x={x}"), want, got));
    }

    let mut verdict = "ok".to_string();
    for _ in 0..20 {
        let x = rng.gen_range(1u128..=1_000_000_000_000);
        for k in [2u32, 3] {
            let e = 1u32 << (k - 1);
            let b = integer_root(x, e) as u128;
            let ok = b.pow(e) <= x && (b + 1).pow(e) > x;
            if !ok {
                verdict = format!("x={x} k={k}: root {b}");
            }
        }
    }
    rows.push(bound_row(
        S,
        "root-bounds",
        "20 random x <= 10^12, k in {2,3}".into(),
        "B^e <= x < (B+1)^e",
        verdict.clone(),
        verdict == "ok",
    ));

    let tiny = SieveCfg {
        bound: cfg.bound,
        segment: 1 << 12,
    };
    rows.push(eq_row(
        S,
        "segment-invariance",
        "sum_a(3, 200000)".into(),
        sum_a(3, 200_000, cfg)?,
        sum_a(3, 200_000, &tiny)?,
    ));
    rows.push(eq_row(
        S,
        "segment-invariance",
        "sum_a_bivariate(5, -3, 123456)".into(),
        sum_a_bivariate(5, -3, 123_456, cfg)?,
        sum_a_bivariate(5, -3, 123_456, &tiny)?,
    ));
    Ok(())
}

fn asymptotics_suite(opts: &VerifyOpts, rows: &mut Vec<CheckRow>) -> Result<()> {
    const S: &str = "asymptotics";
    let cfg = &opts.cfg;

    let h = h1(1, 1_000_000)?;
    let dev = (h.value * std::f64::consts::PI.powi(2) / 4.0 - 1.0).abs();
    rows.push(bound_row(
        S,
        "h1-identity",
        "M=1 B=1000000".into(),
        "|H1*pi^2/4 - 1| <= 1e-4",
        format!("{dev:e}"),
        dev <= 1e-4,
    ));

    let coarse = h1(3, 10_000)?;
    let fine = h1(3, 1_000_000)?;
    let sound = coarse.lo <= fine.value && fine.value <= coarse.hi;
    let shrinks = fine.hi - fine.lo < coarse.hi - coarse.lo;
    rows.push(bound_row(
        S,
        "interval-soundness",
        "M=3 B=10000 vs B=1000000".into(),
        "finer value inside coarser interval, width shrinks",
        format!(
            "inside={sound} width {:e} -> {:e}",
            coarse.hi - coarse.lo,
            fine.hi - fine.lo
        ),
        sound && shrinks,
    ));

    for k in 2..=4u32 {
        let c = constant_ck(k, 100_000)?;
        rows.push(bound_row(
            S,
            "ck-consistency",
            format!("k={k} B=100000"),
            "residual <= 1e-12",
            format!("{:e}", c.residual),
            c.residual <= 1e-12,
        ));
    }
    let c2 = constant_ck(2, 100_000)?;
    rows.push(eq_row(
        S,
        "ck-prefactor",
        "k=2".into(),
        "23/3072",
        c2.prefactor,
    ));

    // Leading order of the weighted sums. M = 1 has power-saving error;
    // M = 3 converges like 1/log x, so check a wide band plus drift to 1.
    let x7 = 10_000_000u64;
    let band = |m: i64, fact: f64, x: u64| -> Result<f64> {
        let a = sum_a(m, x, cfg)? as f64;
        let hm = h1(m, x)?;
        Ok(a * fact / (hm.value * x as f64 * (x as f64).ln().powi(m as i32 - 1)))
    };
    let r1 = band(1, 1.0, x7)?;
    rows.push(bound_row(
        S,
        "leading-band",
        "M=1 x=10^7".into(),
        "ratio in [0.95, 1.05]",
        format!("{r1}"),
        (0.95..=1.05).contains(&r1),
    ));
    let r3a = band(3, 2.0, 100_000)?;
    let r3b = band(3, 2.0, x7)?;
    rows.push(bound_row(
        S,
        "leading-band",
        "M=3 x=10^7".into(),
        "ratio in [1.0, 2.5) and below ratio at 10^5",
        format!("{r3b} (at 10^5: {r3a})"),
        (1.0..2.5).contains(&r3b) && r3b < r3a,
    ));

    for (m, n) in [(3i64, 1i64), (1, -1)] {
        let rep = lower_order_check(m, n, &[100_000, 1_000_000, 10_000_000], cfg)?;
        rows.push(bound_row(
            S,
            "lower-order",
            format!("M={m} N={n}"),
            "normalized ratio strictly decreasing",
            format!("{:?}", rep.ratios),
            rep.decreasing,
        ));
    }

    let grid: Vec<u128> = (6..=12).map(|e| 10u128.pow(e)).collect();
    let fit = fit_leading(2, &grid, false, cfg, 100_000)?;
    let resid_ok = fit.rel_residuals.last() < fit.rel_residuals.first();
    rows.push(bound_row(
        S,
        "fit-band",
        "k=2 grid 10^6..10^12".into(),
        "alpha/target in [0.5, 2.0], tail residual below head",
        format!("ratio={} residuals {:?}", fit.ratio, fit.rel_residuals),
        (0.5..=2.0).contains(&fit.ratio) && resid_ok,
    ));
    Ok(())
}
