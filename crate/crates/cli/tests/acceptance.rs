//! Acceptance gate for the whole toolkit: nine end-to-end checks covering
//! the closed-form counts, the global count, the leading constant and its
//! recovery from exact data, and the determinism of the verifier. Each
//! test prints one PASS line (visible with `--nocapture`).

use std::collections::BTreeMap;
use std::process::Command;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use multiquad::arith::build_sieve;
use multiquad::asymptotics::{constant_ck, fit_leading, h1, lower_order_check};
use multiquad::countform::{
    derive_family_cached, eval_count, geometric_pair_sum, geometric_pair_sum_literal,
    leading_factor, parity_subset_count, parity_subset_count_literal, Kind,
};
use multiquad::fields::Mod4Class;
use multiquad::globalcount::{count_n, SieveCfg};
use multiquad::oracle::{enumerate_by_discriminant, enumerate_by_radical, FieldFilter};

fn pass(n: u32, what: &str, t0: Instant) {
    println!(
        "criterion {n} PASS - {what} ({:.1}s)",
        t0.elapsed().as_secs_f64()
    );
}

fn br(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Fields counted by each kind: `Q`-kinds count every field of the radical
/// (and class), `R`-kinds the totally real ones.
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

/// Squarefree products of subsets of `primes` with at most `max` factors,
/// ascending, starting at 1.
fn subset_radicals(primes: &[u64], max: u32) -> Vec<u64> {
    let mut out = Vec::new();
    for mask in 0u32..(1 << primes.len()) {
        if mask.count_ones() <= max {
            out.push(
                primes
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, &q)| q)
                    .product(),
            );
        }
    }
    out.sort_unstable();
    out
}

#[test]
fn criterion_1_closed_forms_match_enumeration() {
    let t0 = Instant::now();
    let primes = [3u64, 5, 7, 13, 17, 29];
    let odd = subset_radicals(&primes, 4);
    let sieve = build_sieve(1, 2 * odd.last().unwrap() + 1).unwrap();
    let mut checked = 0u32;
    for k in [2u32, 3] {
        for kind in Kind::ALL {
            if kind.min_k() > k {
                continue;
            }
            let fam = derive_family_cached(k, kind).unwrap();
            let filter = kind_filter(kind);
            for &p in &odd {
                let (radical, arg) = if kind.is_even_radical() {
                    (2 * p, p)
                } else {
                    (p, p)
                };
                let want = enumerate_by_radical(radical, k, &filter).unwrap().len();
                let got = eval_count(&fam, &sieve.profile(arg).unwrap()).unwrap();
                assert_eq!(
                    got,
                    BigInt::from(want),
                    "k={k} kind={kind} radical={radical}"
                );
                checked += 1;
            }
            if matches!(kind, Kind::R | Kind::Q) {
                for &p in &odd {
                    let radical = 2 * p;
                    let want = enumerate_by_radical(radical, k, &filter).unwrap().len();
                    let got = eval_count(&fam, &sieve.profile(radical).unwrap()).unwrap();
                    assert_eq!(
                        got,
                        BigInt::from(want),
                        "k={k} kind={kind} radical={radical}"
                    );
                    checked += 1;
                }
            }
        }
    }

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
    for (k, kind, p, want) in pinned {
        let fam = derive_family_cached(k, kind).unwrap();
        let got = eval_count(&fam, &sieve.profile(p).unwrap()).unwrap();
        assert_eq!(got, BigInt::from(want), "pinned k={k} kind={kind} P={p}");
        checked += 1;
    }
    pass(
        1,
        &format!("{checked} closed-form values match enumeration"),
        t0,
    );
}

#[test]
fn criterion_2_polynomial_identities_and_leading_terms() {
    let t0 = Instant::now();
    for k in 2..=5u32 {
        let q = derive_family_cached(k, Kind::Q).unwrap().poly;
        let r = derive_family_cached(k, Kind::R).unwrap().poly;
        let rprev = derive_family_cached(k - 1, Kind::R).unwrap().poly;
        let q11 = derive_family_cached(k, Kind::Q11).unwrap().poly;
        let q31 = derive_family_cached(k, Kind::Q31).unwrap().poly;
        let q21 = derive_family_cached(k, Kind::Q21).unwrap().poly;
        let q23 = derive_family_cached(k, Kind::Q23).unwrap().poly;
        for w in 1..=(k as i64 + 4) {
            let qw = q.eval_uni(w).unwrap();
            assert_eq!(
                qw,
                br(1 << k) * r.eval_uni(w).unwrap() + rprev.eval_uni(w).unwrap(),
                "rank recursion k={k} omega={w}"
            );
            assert_eq!(
                qw,
                q11.eval_uni(w).unwrap() + q31.eval_uni(w).unwrap(),
                "odd class split k={k} omega={w}"
            );
            assert_eq!(
                q.eval_uni(w + 1).unwrap(),
                q21.eval_uni(w).unwrap() + q23.eval_uni(w).unwrap(),
                "even class split k={k} omega={w}"
            );
        }
        let r11 = derive_family_cached(k, Kind::R11).unwrap().poly;
        let r31 = derive_family_cached(k, Kind::R31).unwrap().poly;
        let r21 = derive_family_cached(k, Kind::R21).unwrap().poly;
        let r23 = derive_family_cached(k, Kind::R23).unwrap().poly;
        for w3 in 0..=(k as i64 + 2) {
            for w1 in 0..=(k as i64 + 2) {
                if w3 + w1 == 0 {
                    continue;
                }
                assert_eq!(
                    r11.eval_bi(w3, w1).unwrap() + r31.eval_bi(w3, w1).unwrap(),
                    r.eval_uni(w3 + w1).unwrap(),
                    "odd real split k={k} ({w3},{w1})"
                );
                assert_eq!(
                    r21.eval_bi(w3, w1).unwrap() + r23.eval_bi(w3, w1).unwrap(),
                    r.eval_uni(w3 + w1 + 1).unwrap(),
                    "even real split k={k} ({w3},{w1})"
                );
            }
        }

        // Leading coefficients: the closed forms in terms of the rank factor.
        let fk = leading_factor(k);
        let m = (1i64 << k) - 1;
        let lead_uni = |kind: Kind| {
            derive_family_cached(k, kind)
                .unwrap()
                .poly
                .uni_terms()
                .unwrap()
                .iter()
                .find(|t| t.base == m)
                .map(|t| t.coef.clone())
                .unwrap_or_else(BigRational::zero)
        };
        let lead_bi = |kind: Kind| {
            derive_family_cached(k, kind)
                .unwrap()
                .poly
                .bi_terms()
                .unwrap()
                .iter()
                .find(|t| t.base3 == m && t.base1 == m)
                .map(|t| t.coef.clone())
                .unwrap_or_else(BigRational::zero)
        };
        assert_eq!(lead_uni(Kind::R), fk, "R k={k}");
        assert_eq!(lead_uni(Kind::Q), br(1 << k) * &fk, "Q k={k}");
        assert_eq!(lead_uni(Kind::Q11), fk, "Q11 k={k}");
        assert_eq!(lead_uni(Kind::Q31), br(m) * &fk, "Q31 k={k}");
        assert_eq!(lead_uni(Kind::Q21), br(2) * &fk * br(m), "Q21 k={k}");
        assert_eq!(
            lead_uni(Kind::Q23),
            (br(1 << k) - br(2)) * &fk * br(m),
            "Q23 k={k}"
        );
        assert_eq!(lead_bi(Kind::R11), &fk / br(1 << k), "R11 k={k}");
        assert_eq!(lead_bi(Kind::R31), br(m) * &fk / br(1 << k), "R31 k={k}");
        assert_eq!(
            lead_bi(Kind::R21),
            &fk / br(1 << (k - 1)) * br(m),
            "R21 k={k}"
        );
        assert_eq!(
            lead_bi(Kind::R23),
            (br(1 << (k - 1)) - BigRational::one()) * &fk / br(1 << (k - 1)) * br(m),
            "R23 k={k}"
        );
    }
    pass(2, "identities and leading terms hold for ranks 2-5", t0);
}

#[test]
fn criterion_3_global_counts_match_enumeration() {
    let t0 = Instant::now();
    let cfg = SieveCfg::default();
    let mut checked = 0u64;

    // Every change point of the rank-2 step function up to 1e6, both filters.
    for totally_real in [false, true] {
        let filter = FieldFilter {
            totally_real_only: totally_real,
            ..Default::default()
        };
        for (k, limit) in [(2u32, 1_000_000u128), (3, 1_000_000_000)] {
            let fields = enumerate_by_discriminant(limit, k, &filter).unwrap();
            let mut cum = BTreeMap::new();
            let mut c = 0u128;
            for (d, _) in &fields {
                c += 1;
                cum.insert(*d, c);
            }
            let mut prev = 0u128;
            for (&d, &c) in &cum {
                assert_eq!(
                    count_n(k, d - 1, totally_real, &cfg).unwrap(),
                    prev,
                    "k={k} tr={totally_real} below disc {d}"
                );
                assert_eq!(
                    count_n(k, d, totally_real, &cfg).unwrap(),
                    c,
                    "k={k} tr={totally_real} at disc {d}"
                );
                prev = c;
                checked += 2;
            }
            assert_eq!(count_n(k, limit, totally_real, &cfg).unwrap(), prev);
            checked += 1;
        }
    }

    // Random bounds up to 1e8 against the sorted discriminant list.
    let discs: Vec<u128> = enumerate_by_discriminant(100_000_000, 2, &FieldFilter::default())
        .unwrap()
        .into_iter()
        .map(|(d, _)| d)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let x = rng.gen_range(1u128..=100_000_000);
        let want = discs.partition_point(|&d| d <= x) as u128;
        assert_eq!(count_n(2, x, false, &cfg).unwrap(), want, "x={x}");
        checked += 1;
    }

    // Pinned small values.
    for (x, tr, want) in [
        (143u128, false, 0u128),
        (144, false, 1),
        (256, false, 3),
        (1600, true, 1),
    ] {
        assert_eq!(count_n(2, x, tr, &cfg).unwrap(), want);
        checked += 1;
    }
    pass(3, &format!("{checked} global counts match enumeration"), t0);
}

#[test]
fn criterion_4_combinatorial_lemmas() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let (a, b) = loop {
            let a = rng.gen_range(-9i64..=9);
            let b = rng.gen_range(-9i64..=9);
            if a != b && a != 0 && b != 0 {
                break (a, b);
            }
        };
        let n = rng.gen_range(1u32..=8);
        let i = rng.gen_range(0..n);
        let closed = geometric_pair_sum(a, b, n, i).unwrap();
        let literal = geometric_pair_sum_literal(a, b, n, i).unwrap();
        assert!(closed.is_integer(), "a={a} b={b} n={n} i={i}");
        assert_eq!(closed.to_integer(), literal, "a={a} b={b} n={n} i={i}");
    }

    for a in 1..=6u32 {
        for b in 1..=4u32 {
            let counts = parity_subset_count_literal(a, b);
            let even = parity_subset_count(a, b, true).unwrap();
            let other = parity_subset_count(a, b, false).unwrap();
            assert!(even.is_integer() && other.is_integer(), "a={a} b={b}");
            assert_eq!(even.to_integer(), counts[0], "a={a} b={b} even");
            for v in 1..counts.len() {
                assert_eq!(other.to_integer(), counts[v], "a={a} b={b} v={v}");
            }
        }
    }

    // One table row by hand: sequences of 3 nonempty subsets of a 2-set.
    let counts = parity_subset_count_literal(3, 2);
    let total: BigInt = counts.iter().sum();
    assert_eq!(
        (counts[0].clone(), counts[1].clone(), total),
        (BigInt::from(6), BigInt::from(7), BigInt::from(27))
    );
    pass(
        4,
        "pair sums and parity counts match literal enumeration",
        t0,
    );
}

#[test]
fn criterion_5_euler_product_identity() {
    let t0 = Instant::now();
    let ep = h1(1, 10_000_000).unwrap();
    // (1/2) prod_{p>2} (1 - 1/p^2) = 4/pi^2.
    let target = 4.0 / (std::f64::consts::PI * std::f64::consts::PI);
    let err = (ep.value * std::f64::consts::PI * std::f64::consts::PI / 4.0 - 1.0).abs();
    assert!(err < 1e-4, "relative error {err:.3e}");
    assert!(
        ep.lo <= target && target <= ep.hi,
        "interval [{}, {}] misses {target}",
        ep.lo,
        ep.hi
    );
    pass(5, &format!("product matches 4/pi^2 to {err:.1e}"), t0);
}

#[test]
fn criterion_6_constant_assembles_consistently() {
    let t0 = Instant::now();
    let mut residuals = Vec::new();
    for k in 2..=4u32 {
        let ck = constant_ck(k, 100_000).unwrap();
        assert!(
            ck.residual < 1e-12,
            "k={k}: assemblies differ by {:.3e}",
            ck.residual
        );
        assert!(ck.lo <= ck.value && ck.value <= ck.hi);
        residuals.push(ck.residual);
    }
    let c2 = constant_ck(2, 100_000).unwrap();
    assert_eq!(
        c2.prefactor,
        BigRational::new(BigInt::from(23), BigInt::from(3072))
    );
    pass(
        6,
        &format!(
            "assemblies agree (worst residual {:.1e}), rank-2 prefactor exact",
            residuals.iter().cloned().fold(0.0f64, f64::max)
        ),
        t0,
    );
}

#[test]
fn criterion_7_fit_recovers_the_constant() {
    let t0 = Instant::now();
    let cfg = SieveCfg::default();
    let grid: Vec<u128> = (8..=14).map(|e| 10u128.pow(e)).collect();
    for totally_real in [false, true] {
        let fit = fit_leading(2, &grid, totally_real, &cfg, 10_000_000).unwrap();
        assert!(
            (0.8..=1.2).contains(&fit.ratio),
            "tr={totally_real}: fitted/predicted = {}",
            fit.ratio
        );
        let first = fit.rel_residuals.first().unwrap().abs();
        let last = fit.rel_residuals.last().unwrap().abs();
        assert!(
            last < first,
            "tr={totally_real}: residual grew {first:.3e} -> {last:.3e}"
        );
    }
    pass(
        7,
        "fitted leading coefficient within 20% of the constant",
        t0,
    );
}

#[test]
fn criterion_8_off_diagonal_sums_drop_a_log() {
    let t0 = Instant::now();
    let cfg = SieveCfg::default();
    let grid = [100_000u64, 1_000_000, 10_000_000];
    for (m, n) in [(3i64, 1i64), (1, -1)] {
        let rep = lower_order_check(m, n, &grid, &cfg).unwrap();
        assert!(
            rep.decreasing,
            "(m,n)=({m},{n}): normalized ratios {:?} do not decrease",
            rep.ratios
        );
        assert!(rep.ratios.iter().all(|r| *r > 0.0));
    }
    pass(
        8,
        "off-diagonal weighted sums decay below the main order",
        t0,
    );
}

#[test]
fn criterion_9_verify_output_is_thread_invariant() {
    let t0 = Instant::now();
    let run = |threads: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_multiquad"))
            .env_remove("MULTIQUAD_SIEVE_BOUND")
            .args(["--threads", threads, "verify", "--suite", "all"])
            .output()
            .expect("binary runs");
        assert!(
            out.status.success(),
            "--threads {threads}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(!out.stdout.is_empty());
        out.stdout
    };
    let one = run("1");
    let four = run("4");
    let eight = run("8");
    assert_eq!(one, four, "1 vs 4 worker threads");
    assert_eq!(four, eight, "4 vs 8 worker threads");
    let rows = one.split(|&b| b == b'\n').filter(|l| !l.is_empty()).count() - 1;
    pass(
        9,
        &format!("{rows} verification rows byte-identical across 1/4/8 threads"),
        t0,
    );
}
