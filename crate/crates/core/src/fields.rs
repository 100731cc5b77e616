//! Multi-quadratic fields `Q(sqrt(a_1), ..., sqrt(a_k))` as finite data.
//!
//! A *presentation* is an ordered list of squarefree integers, none 0 or 1,
//! multiplicatively independent modulo squares. The *field key* is the set of
//! squarefree parts of all nonempty subset products; it is a presentation-free
//! invariant that identifies the field, and the group structure of
//! `key + {1}` under squarefree multiplication drives everything else here.

use crate::arith::{is_squarefree_i64, prime_factors};
use crate::error::{Error, Result};
use std::fmt;
use std::str::FromStr;

// Guards so subset products stay inside i64 and presentations stay small
// enough to enumerate subsets of.
const MAX_K: usize = 12;
const MAX_RADICAL: u64 = 1_000_000_000_000_000;

/// Product of two squarefree integers, reduced to its squarefree part.
/// Common primes appear squared in `a * b` and cancel, so divide both factors
/// by the gcd first; this also keeps intermediate values small.
pub fn sqf_mul(a: i64, b: i64) -> Result<i64> {
    if a == 0 || b == 0 {
        return Err(Error::ZeroInput);
    }
    let g = gcd_u64(a.unsigned_abs(), b.unsigned_abs()) as i64;
    (a / g)
        .checked_mul(b / g)
        .ok_or(Error::Overflow("squarefree product"))
}

fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn lcm_u64(a: u64, b: u64) -> Result<u64> {
    (a / gcd_u64(a, b))
        .checked_mul(b)
        .ok_or(Error::Overflow("radical"))
}

/// Ordered, validated presentation of a multi-quadratic field.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Presentation {
    entries: Vec<i64>,
}

impl Presentation {
    pub fn new(entries: Vec<i64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Domain(
                "a presentation needs at least one entry".into(),
            ));
        }
        if entries.len() > MAX_K {
            return Err(Error::Domain(format!(
                "presentation rank {} exceeds the supported maximum {MAX_K}",
                entries.len()
            )));
        }
        for &e in &entries {
            if e == 0 || e == 1 {
                return Err(Error::BadEntry(e));
            }
            if !is_squarefree_i64(e)? {
                return Err(Error::NotSquarefree(e));
            }
        }
        let mut radical: u64 = 1;
        for &e in &entries {
            radical = lcm_u64(radical, e.unsigned_abs())?;
            if radical > MAX_RADICAL {
                return Err(Error::Domain(format!(
                    "radical exceeds the supported maximum {MAX_RADICAL}"
                )));
            }
        }
        // Independence modulo squares: no nonempty subset product may be a
        // square, i.e. all 2^k subset products (squarefree parts) distinct.
        let products = subset_products(&entries)?;
        let mut seen = products.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != products.len() || products.iter().any(|&v| v == 1) {
            return Err(Error::IndependenceViolation);
        }
        Ok(Presentation { entries })
    }

    pub fn entries(&self) -> &[i64] {
        &self.entries
    }

    pub fn k(&self) -> usize {
        self.entries.len()
    }
}

impl fmt::Display for Presentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let strs: Vec<String> = self.entries.iter().map(|e| e.to_string()).collect();
        write!(f, "{}", strs.join(","))
    }
}

impl FromStr for Presentation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let entries = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<i64>()
                    .map_err(|_| Error::Domain(format!("cannot parse entry {t:?}")))
            })
            .collect::<Result<Vec<i64>>>()?;
        Presentation::new(entries)
    }
}

/// Squarefree parts of all nonempty subset products of entries that are
/// already individually squarefree; position `mask - 1` holds the product
/// over the bits of `mask`. Callers must ensure the entries are squarefree.
pub(crate) fn subset_products_of(entries: &[i64]) -> Result<Vec<i64>> {
    subset_products(entries)
}

/// Squarefree parts of all nonempty subset products, indexed by subset mask
/// (position `mask - 1` holds the product over the bits of `mask`).
fn subset_products(entries: &[i64]) -> Result<Vec<i64>> {
    let k = entries.len();
    let mut prod = vec![1i64; 1 << k];
    for mask in 1usize..(1 << k) {
        let low = mask.trailing_zeros() as usize;
        prod[mask] = sqf_mul(prod[mask & (mask - 1)], entries[low])?;
    }
    Ok(prod[1..].to_vec())
}

/// The field key: sorted set of the `2^k - 1` squarefree subset products.
/// Two presentations give the same field exactly when their keys agree.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldKey {
    elements: Vec<i64>,
}

/// Residue pattern of a canonical presentation mod 4; fixes the power of 2
/// in the discriminant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mod4Class {
    /// All entries 1 mod 4; odd radical.
    C11,
    /// First entry 3 mod 4, rest 1 mod 4; odd radical.
    C31,
    /// First entry even, rest 1 mod 4.
    C21,
    /// First entry even, second 3 mod 4, rest 1 mod 4.
    C23,
}

impl Mod4Class {
    pub const ALL: [Mod4Class; 4] = [
        Mod4Class::C11,
        Mod4Class::C31,
        Mod4Class::C21,
        Mod4Class::C23,
    ];

    /// Exponent `r` in `disc = (2^r * radical)^(2^(k-1))`.
    pub fn two_exponent(self) -> u32 {
        match self {
            Mod4Class::C11 => 0,
            Mod4Class::C31 => 2,
            Mod4Class::C21 => 2,
            Mod4Class::C23 => 3,
        }
    }

    pub fn has_even_radical(self) -> bool {
        matches!(self, Mod4Class::C21 | Mod4Class::C23)
    }
}

impl fmt::Display for Mod4Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Mod4Class::C11 => "(1,1)",
            Mod4Class::C31 => "(3,1)",
            Mod4Class::C21 => "(2,1)",
            Mod4Class::C23 => "(2,3)",
        };
        write!(f, "{s}")
    }
}

impl FromStr for Mod4Class {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "(1,1)" | "1,1" | "11" => Ok(Mod4Class::C11),
            "(3,1)" | "3,1" | "31" => Ok(Mod4Class::C31),
            "(2,1)" | "2,1" | "21" => Ok(Mod4Class::C21),
            "(2,3)" | "2,3" | "23" => Ok(Mod4Class::C23),
            other => Err(Error::Domain(format!("unknown mod-4 class {other:?}"))),
        }
    }
}

fn mod4(v: i64) -> i64 {
    v.rem_euclid(4)
}

/// Computes the field key of a presentation.
pub fn field_key(p: &Presentation) -> Result<FieldKey> {
    let mut elements = subset_products(p.entries())?;
    elements.sort_unstable();
    Ok(FieldKey { elements })
}

impl FieldKey {
    /// Validates a sorted candidate element set: right cardinality, squarefree
    /// entries, and closure under squarefree multiplication (the set plus 1
    /// must form a group, every element being its own inverse).
    pub fn from_elements(mut elements: Vec<i64>) -> Result<Self> {
        elements.sort_unstable();
        let n = elements.len();
        if n == 0 || (n + 1) & n != 0 {
            return Err(Error::Domain(format!(
                "a field key has 2^k - 1 elements, got {n}"
            )));
        }
        if n + 1 > (1 << MAX_K) {
            return Err(Error::Domain(format!(
                "field key rank exceeds the supported maximum {MAX_K}"
            )));
        }
        for w in elements.windows(2) {
            if w[0] == w[1] {
                return Err(Error::Domain(format!("duplicate key element {}", w[0])));
            }
        }
        for &e in &elements {
            if e == 0 || e == 1 {
                return Err(Error::BadEntry(e));
            }
            if !is_squarefree_i64(e)? {
                return Err(Error::NotSquarefree(e));
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let v = sqf_mul(elements[i], elements[j])?;
                if elements.binary_search(&v).is_err() {
                    return Err(Error::Domain(format!(
                        "key not closed under products: {} * {} -> {v} missing",
                        elements[i], elements[j]
                    )));
                }
            }
        }
        Ok(FieldKey { elements })
    }

    pub(crate) fn from_sorted_unchecked(elements: Vec<i64>) -> Self {
        debug_assert!(elements.windows(2).all(|w| w[0] < w[1]));
        FieldKey { elements }
    }

    pub fn elements(&self) -> &[i64] {
        &self.elements
    }

    pub fn k(&self) -> u32 {
        (self.elements.len() + 1).trailing_zeros()
    }

    pub fn contains(&self, v: i64) -> bool {
        self.elements.binary_search(&v).is_ok()
    }

    /// Product of the distinct primes dividing any element.
    pub fn radical(&self) -> Result<u64> {
        let mut r: u64 = 1;
        for &e in &self.elements {
            r = lcm_u64(r, e.unsigned_abs())?;
        }
        Ok(r)
    }

    /// The field contains `i = sqrt(-1)` exactly when -1 is a key element.
    pub fn is_i_free(&self) -> bool {
        !self.contains(-1)
    }

    pub fn is_totally_real(&self) -> bool {
        self.elements.iter().all(|&e| e > 0)
    }

    /// Mod-4 class; defined for `k >= 2`.
    pub fn mod4_class(&self) -> Result<Mod4Class> {
        if self.k() < 2 {
            return Err(Error::Domain("mod-4 class needs k >= 2".into()));
        }
        let even = self.elements.iter().any(|&e| e % 2 == 0);
        // In the even cases the class is decided by the odd elements alone.
        let odd_all_1 = self
            .elements
            .iter()
            .filter(|&&e| e % 2 != 0)
            .all(|&e| mod4(e) == 1);
        Ok(match (even, odd_all_1) {
            (false, true) => Mod4Class::C11,
            (false, false) => Mod4Class::C31,
            (true, true) => Mod4Class::C21,
            (true, false) => Mod4Class::C23,
        })
    }

    /// Field discriminant `(2^r * radical)^(2^(k-1))` with `r` from the
    /// mod-4 class.
    pub fn discriminant(&self) -> Result<u128> {
        let class = self.mod4_class()?;
        let rad = self.radical()? as u128;
        let base = (1u128 << class.two_exponent()) * rad;
        let mut acc: u128 = 1;
        for _ in 0..(1u32 << (self.k() - 1)) {
            acc = acc
                .checked_mul(base)
                .ok_or(Error::Overflow("discriminant"))?;
        }
        Ok(acc)
    }

    /// A presentation drawn from the key whose entries follow the canonical
    /// mod-4 residue pattern of the key's class. Deterministic: elements are
    /// tried sorted by absolute value, positive before negative, and the
    /// lexicographically first independent tuple wins.
    pub fn to_mod4_presentation(&self) -> Result<Presentation> {
        let class = self.mod4_class()?;
        let k = self.k() as usize;
        let mut order = self.elements.clone();
        order.sort_by_key(|&v| (v.unsigned_abs(), v < 0));

        // Residue requirement per position, from the class pattern.
        let slot_ok = |pos: usize, v: i64| -> bool {
            let want_even = class.has_even_radical() && pos == 0;
            if want_even {
                return v % 2 == 0;
            }
            if v % 2 == 0 {
                return false;
            }
            let want3 = match class {
                Mod4Class::C31 => pos == 0,
                Mod4Class::C23 => pos == 1,
                _ => false,
            };
            mod4(v) == if want3 { 3 } else { 1 }
        };

        // Depth-first over candidate entries; `span` holds the subgroup
        // generated so far (including 1). k independent picks span the key.
        fn dfs(
            order: &[i64],
            slot_ok: &dyn Fn(usize, i64) -> bool,
            k: usize,
            picked: &mut Vec<i64>,
            span: &mut Vec<i64>,
        ) -> Result<bool> {
            if picked.len() == k {
                return Ok(true);
            }
            let pos = picked.len();
            for &v in order {
                if !slot_ok(pos, v) || span.binary_search(&v).is_ok() {
                    continue;
                }
                let mut new_span = span.clone();
                for &s in span.iter() {
                    new_span.push(sqf_mul(s, v)?);
                }
                new_span.sort_unstable();
                picked.push(v);
                std::mem::swap(span, &mut new_span);
                if dfs(order, slot_ok, k, picked, span)? {
                    return Ok(true);
                }
                std::mem::swap(span, &mut new_span);
                picked.pop();
            }
            Ok(false)
        }

        let mut picked = Vec::with_capacity(k);
        let mut span = vec![1i64];
        if !dfs(&order, &slot_ok, k, &mut picked, &mut span)? {
            return Err(Error::Internal(format!(
                "no canonical presentation found for key {self}"
            )));
        }
        let p = Presentation::new(picked)?;
        debug_assert_eq!(field_key(&p)?, *self);
        Ok(p)
    }
}

impl fmt::Display for FieldKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let strs: Vec<String> = self.elements.iter().map(|e| e.to_string()).collect();
        write!(f, "{}", strs.join(","))
    }
}

impl FromStr for FieldKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let elements = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<i64>()
                    .map_err(|_| Error::Domain(format!("cannot parse key element {t:?}")))
            })
            .collect::<Result<Vec<i64>>>()?;
        FieldKey::from_elements(elements)
    }
}

/// True iff the presentation is normal: writing the primes of the radical in
/// ascending order, entry `j` is the first entry divisible by its least
/// prime ("pivot"), pivot indices strictly increase starting at the least
/// prime of the radical, and each pivot divides no other entry.
pub fn is_normal(p: &Presentation) -> Result<bool> {
    let key = field_key(p)?;
    if !key.is_i_free() {
        return Ok(false);
    }
    let rad_primes = prime_factors(key.radical()? as i64)?;
    let entry_primes: Vec<Vec<u64>> = p
        .entries()
        .iter()
        .map(|&e| prime_factors(e))
        .collect::<Result<_>>()?;
    let pivot_index = |j: usize| -> usize {
        // Entries are nonempty sets of radical primes; least prime first.
        rad_primes.binary_search(&entry_primes[j][0]).unwrap()
    };
    let mut last = None;
    for j in 0..p.k() {
        let i_j = pivot_index(j);
        match last {
            None => {
                if i_j != 0 {
                    return Ok(false);
                }
            }
            Some(prev) => {
                if i_j <= prev {
                    return Ok(false);
                }
            }
        }
        last = Some(i_j);
        let pivot = rad_primes[i_j];
        for (other, primes) in entry_primes.iter().enumerate() {
            if other != j && primes.binary_search(&pivot).is_ok() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Rewrites a presentation of an i-free field into normal form, preserving
/// the field key. Fails with `NotIFree` when -1 is a subset product.
pub fn normalize(p: &Presentation) -> Result<Presentation> {
    let key = field_key(p)?;
    if !key.is_i_free() {
        return Err(Error::NotIFree);
    }
    let mut entries = p.entries().to_vec();
    let k = entries.len();
    for m in 0..k {
        // Least prime dividing any not-yet-fixed entry becomes the pivot of
        // position m. Earlier pivots no longer divide entries[m..], so the
        // pivots come out in strictly ascending order.
        let pivot = entries[m..]
            .iter()
            .map(|&e| prime_factors(e).map(|f| f[0]))
            .collect::<Result<Vec<u64>>>()?
            .into_iter()
            .min()
            .expect("nonempty tail");
        let j = (m..k)
            .find(|&j| entries[j] % pivot as i64 == 0)
            .expect("some entry carries the pivot");
        entries.swap(m, j);
        // Clear the pivot from every other entry, earlier ones included:
        // entries[m] has no earlier pivot, so this cannot reintroduce one.
        for i in 0..k {
            if i != m && entries[i] % pivot as i64 == 0 {
                entries[i] = sqf_mul(entries[i], entries[m])?;
            }
        }
    }
    let out = Presentation::new(entries)?;
    debug_assert_eq!(field_key(&out)?, key);
    debug_assert!(is_normal(&out)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pres(entries: &[i64]) -> Presentation {
        Presentation::new(entries.to_vec()).unwrap()
    }

    #[test]
    fn rejects_bad_entries() {
        assert!(matches!(
            Presentation::new(vec![0, 2]),
            Err(Error::BadEntry(0))
        ));
        assert!(matches!(
            Presentation::new(vec![1]),
            Err(Error::BadEntry(1))
        ));
        assert!(matches!(
            Presentation::new(vec![12]),
            Err(Error::NotSquarefree(12))
        ));
        // 6 * 10 * 15 = 900 = 30^2.
        assert!(matches!(
            Presentation::new(vec![6, 10, 15]),
            Err(Error::IndependenceViolation)
        ));
        assert!(matches!(
            Presentation::new(vec![2, 3, 6]),
            Err(Error::IndependenceViolation)
        ));
        assert!(matches!(
            Presentation::new(vec![5, 5]),
            Err(Error::IndependenceViolation)
        ));
    }

    #[test]
    fn key_of_6_10() {
        let key = field_key(&pres(&[6, 10])).unwrap();
        assert_eq!(key.elements(), &[6, 10, 15]);
        assert_eq!(key.k(), 2);
        assert_eq!(key.radical().unwrap(), 30);
    }

    #[test]
    fn key_is_presentation_invariant() {
        let a = field_key(&pres(&[6, 10])).unwrap();
        let b = field_key(&pres(&[15, 10])).unwrap();
        let c = field_key(&pres(&[6, 15])).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn sqf_mul_cancels_common_primes() {
        assert_eq!(sqf_mul(6, 10).unwrap(), 15);
        assert_eq!(sqf_mul(-6, -3).unwrap(), 2);
        assert_eq!(sqf_mul(5, 5).unwrap(), 1);
        assert_eq!(sqf_mul(-5, 5).unwrap(), -1);
    }

    #[test]
    fn i_freeness() {
        assert!(field_key(&pres(&[6, 10])).unwrap().is_i_free());
        // -6 * -3 * 2 contains the pair product -1? (-6)(-3) = 18 -> 2;
        // 2 * 2 -> 1; elements: -6,-3,2,-2(-6*2? sqf(-12) = -3)... compute.
        let key = field_key(&pres(&[-6, -3])).unwrap();
        assert_eq!(key.elements(), &[-6, -3, 2]);
        assert!(key.is_i_free());
        let key = field_key(&pres(&[-2, 2])).unwrap();
        assert!(key.contains(-1));
        assert!(!key.is_i_free());
    }

    #[test]
    fn mod4_classes() {
        let class = |e: &[i64]| field_key(&pres(e)).unwrap().mod4_class().unwrap();
        assert_eq!(class(&[5, 13]), Mod4Class::C11);
        // -3 = 1 mod 4 arithmetically, so this stays in class (1,1).
        assert_eq!(class(&[-3, 5]), Mod4Class::C11);
        // 21 = 1 mod 4 but the elements 3 and 7 are not, so not (1,1).
        assert_eq!(class(&[3, 7]), Mod4Class::C31);
        assert_eq!(class(&[-3, -7]), Mod4Class::C11);
    }

    #[test]
    fn mod4_class_examples() {
        let class = |e: &[i64]| field_key(&pres(e)).unwrap().mod4_class().unwrap();
        assert_eq!(class(&[2, 5]), Mod4Class::C21);
        assert_eq!(class(&[2, 3]), Mod4Class::C23);
        assert_eq!(class(&[2, -1]), Mod4Class::C23);
        assert_eq!(class(&[3, 5]), Mod4Class::C31);
    }

    #[test]
    fn discriminants() {
        let disc = |e: &[i64]| field_key(&pres(e)).unwrap().discriminant().unwrap();
        // Q(sqrt5, sqrt13): class (1,1), radical 65.
        assert_eq!(disc(&[5, 13]), 65 * 65);
        // Q(sqrt2, sqrt5): subfield discs 8, 5, 40.
        assert_eq!(disc(&[2, 5]), 1600);
        // Q(sqrt2, sqrt3): subfield discs 8, 12, 24.
        assert_eq!(disc(&[2, 3]), 2304);
        // -3, 5, -15 are all 1 mod 4: class (1,1), no power of 2.
        assert_eq!(disc(&[-3, 5]), 15 * 15);
        // 3 = 3 mod 4 forces r = 2.
        assert_eq!(disc(&[3, 5]), (4 * 15u128) * (4 * 15));
    }

    #[test]
    fn normalize_example() {
        let p = pres(&[15, 10]);
        let n = normalize(&p).unwrap();
        assert!(is_normal(&n).unwrap());
        assert_eq!(field_key(&n).unwrap(), field_key(&p).unwrap());
        // Least prime of radical 30 is 2: pivot entry first, 15 keeps no 2.
        assert_eq!(n.entries()[0] % 2, 0);
    }

    #[test]
    fn normalize_rejects_i() {
        let p = pres(&[-2, 2]);
        assert!(matches!(normalize(&p), Err(Error::NotIFree)));
    }

    #[test]
    fn normal_form_is_fixed_point() {
        for e in [
            vec![6i64, 10],
            vec![15, 10],
            vec![-6, -3],
            vec![30, 42, 70],
            vec![-21, -35, 5],
        ] {
            let p = pres(&e);
            if field_key(&p).unwrap().is_i_free() {
                let n = normalize(&p).unwrap();
                assert_eq!(normalize(&n).unwrap(), n, "entries {e:?}");
            }
        }
    }

    #[test]
    fn canonical_presentation_small() {
        let key = field_key(&pres(&[2, -1])).unwrap();
        let p = key.to_mod4_presentation().unwrap();
        assert_eq!(p.entries(), &[2, -1]);
        assert_eq!(field_key(&p).unwrap(), key);

        let key = field_key(&pres(&[5, 13])).unwrap();
        let p = key.to_mod4_presentation().unwrap();
        assert_eq!(p.entries(), &[5, 13]);
    }

    #[test]
    fn canonical_presentation_respects_pattern() {
        for e in [
            vec![6i64, 10],
            vec![2, 3],
            vec![2, 5],
            vec![-3, 5],
            vec![3, 5],
            vec![30, 42, 70],
            vec![-3, -7, 5],
        ] {
            let key = field_key(&pres(&e)).unwrap();
            let class = key.mod4_class().unwrap();
            let p = key.to_mod4_presentation().unwrap();
            assert_eq!(field_key(&p).unwrap(), key, "entries {e:?}");
            let ents = p.entries();
            match class {
                Mod4Class::C11 => {
                    assert!(ents.iter().all(|&v| mod4(v) == 1));
                }
                Mod4Class::C31 => {
                    assert_eq!(mod4(ents[0]), 3);
                    assert!(ents[1..].iter().all(|&v| mod4(v) == 1));
                }
                Mod4Class::C21 => {
                    assert_eq!(ents[0] % 2, 0);
                    assert!(ents[1..].iter().all(|&v| mod4(v) == 1));
                }
                Mod4Class::C23 => {
                    assert_eq!(ents[0] % 2, 0);
                    assert_eq!(mod4(ents[1]), 3);
                    assert!(ents[2..].iter().all(|&v| mod4(v) == 1));
                }
            }
        }
    }

    #[test]
    fn parse_roundtrip() {
        let p: Presentation = "6,10".parse().unwrap();
        assert_eq!(p.entries(), &[6, 10]);
        assert_eq!(p.to_string(), "6,10");
        let key: FieldKey = "-6,-3,2".parse().unwrap();
        assert_eq!(key.to_string(), "-6,-3,2");
        assert!("0,3".parse::<Presentation>().is_err());
        assert!("6,10".parse::<FieldKey>().is_err()); // not closed
        assert!("x".parse::<Presentation>().is_err());
    }

    #[test]
    fn key_validation_closure() {
        assert!(FieldKey::from_elements(vec![6, 10, 15]).is_ok());
        assert!(FieldKey::from_elements(vec![6, 10, 14]).is_err());
        assert!(FieldKey::from_elements(vec![6, 10]).is_err()); // wrong size
        assert!(FieldKey::from_elements(vec![-1]).is_ok());
    }
}
