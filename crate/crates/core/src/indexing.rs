//! Index sets I_{q-1}, I_{q+1}, I_{q^2-1}, I_{q^2+1}, I_{q^3-1}, I_{q^3+1}:
//! orbit classes, tuple classes and index doubling.

use serde::Serialize;
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IndexError {
    #[error("index {i} is excluded from {kind}")]
    ExcludedIndex { kind: IndexKind, i: u64 },
    #[error("unknown index kind '{0}'")]
    UnknownKind(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum IndexKind {
    QMinus1,
    QPlus1,
    Q2Minus1,
    Q2Plus1,
    Q3Minus1,
    Q3Plus1,
}

impl IndexKind {
    pub const ALL: [IndexKind; 6] = [
        IndexKind::QMinus1,
        IndexKind::QPlus1,
        IndexKind::Q2Minus1,
        IndexKind::Q2Plus1,
        IndexKind::Q3Minus1,
        IndexKind::Q3Plus1,
    ];

    pub fn parse(s: &str) -> Result<Self, IndexError> {
        Ok(match s {
            "q-1" => IndexKind::QMinus1,
            "q+1" => IndexKind::QPlus1,
            "q2-1" => IndexKind::Q2Minus1,
            "q2+1" => IndexKind::Q2Plus1,
            "q3-1" => IndexKind::Q3Minus1,
            "q3+1" => IndexKind::Q3Plus1,
            _ => return Err(IndexError::UnknownKind(s.to_string())),
        })
    }

    pub fn tag(self) -> &'static str {
        match self {
            IndexKind::QMinus1 => "q-1",
            IndexKind::QPlus1 => "q+1",
            IndexKind::Q2Minus1 => "q2-1",
            IndexKind::Q2Plus1 => "q2+1",
            IndexKind::Q3Minus1 => "q3-1",
            IndexKind::Q3Plus1 => "q3+1",
        }
    }

    /// I_{q-eps} for eps = +1 or -1.
    pub fn q_minus(eps: i8) -> Self {
        if eps == 1 {
            IndexKind::QMinus1
        } else {
            IndexKind::QPlus1
        }
    }

    pub fn q3_minus(eps: i8) -> Self {
        if eps == 1 {
            IndexKind::Q3Minus1
        } else {
            IndexKind::Q3Plus1
        }
    }

    pub fn modulus(self, q: u64) -> u64 {
        match self {
            IndexKind::QMinus1 => q - 1,
            IndexKind::QPlus1 => q + 1,
            IndexKind::Q2Minus1 => q * q - 1,
            IndexKind::Q2Plus1 => q * q + 1,
            IndexKind::Q3Minus1 => q * q * q - 1,
            IndexKind::Q3Plus1 => q * q * q + 1,
        }
    }

    /// Number of Frobenius powers acting on the orbit: i, qi, q^2 i.
    fn frobenius_span(self) -> u32 {
        match self {
            IndexKind::QMinus1 | IndexKind::QPlus1 => 1,
            IndexKind::Q2Minus1 | IndexKind::Q2Plus1 => 2,
            IndexKind::Q3Minus1 | IndexKind::Q3Plus1 => 3,
        }
    }

    pub fn is_excluded(self, q: u64, i: u64) -> bool {
        let md = self.modulus(q);
        let i = i % md;
        if i == 0 {
            return true;
        }
        match self {
            IndexKind::QMinus1 | IndexKind::QPlus1 | IndexKind::Q2Plus1 => false,
            IndexKind::Q2Minus1 => i.is_multiple_of(q - 1) || i.is_multiple_of(q + 1),
            IndexKind::Q3Minus1 => i.is_multiple_of(q * q + q + 1),
            IndexKind::Q3Plus1 => i.is_multiple_of(q * q - q + 1),
        }
    }

    /// Multipliers generating the orbit: +-1, +-q, +-q^2 as applicable.
    pub fn multipliers(self, q: u64) -> Vec<u64> {
        let md = self.modulus(q);
        let mut out = Vec::new();
        let mut f = 1u64 % md;
        for _ in 0..self.frobenius_span() {
            out.push(f);
            out.push((md - f) % md);
            f = mulmod(f, q, md);
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Orbit of i, sorted, computed by closure under negation and times q.
    pub fn orbit(self, q: u64, i: u64) -> Vec<u64> {
        let md = self.modulus(q);
        let start = i % md;
        let mut seen = BTreeSet::new();
        let mut stack = vec![start];
        while let Some(x) = stack.pop() {
            if seen.insert(x) {
                stack.push((md - x) % md);
                stack.push(mulmod(x, q, md));
            }
        }
        seen.into_iter().collect()
    }
}

impl fmt::Display for IndexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "I_{}", self.tag())
    }
}

pub fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// An orbit class, identified by its minimal member.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct IndexClass {
    pub kind: IndexKind,
    pub rep: u64,
}

impl IndexClass {
    pub fn orbit(&self, q: u64) -> Vec<u64> {
        self.kind.orbit(q, self.rep)
    }
}

impl fmt::Display for IndexClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.rep)
    }
}

pub fn canonicalize(kind: IndexKind, q: u64, i: u64) -> Result<IndexClass, IndexError> {
    let md = kind.modulus(q);
    let i = i % md;
    if kind.is_excluded(q, i) {
        return Err(IndexError::ExcludedIndex { kind, i });
    }
    let rep = kind.orbit(q, i)[0];
    Ok(IndexClass { kind, rep })
}

/// All classes of I_kind, sorted by representative.
pub fn enumerate_classes(kind: IndexKind, q: u64) -> Vec<IndexClass> {
    let md = kind.modulus(q);
    let mut seen = vec![false; md as usize];
    let mut out = Vec::new();
    for i in 1..md {
        if seen[i as usize] || kind.is_excluded(q, i) {
            continue;
        }
        for x in kind.orbit(q, i) {
            seen[x as usize] = true;
        }
        out.push(IndexClass { kind, rep: i });
    }
    out
}

/// Closed-form class counts.
pub fn class_count(kind: IndexKind, q: u64) -> u64 {
    match kind {
        IndexKind::QMinus1 => (q - 2) / 2,
        IndexKind::QPlus1 => q / 2,
        IndexKind::Q2Minus1 => q * (q - 2) / 4,
        IndexKind::Q2Plus1 => q * q / 4,
        IndexKind::Q3Minus1 | IndexKind::Q3Plus1 => q * (q * q - 1) / 6,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct IndexTuple {
    pub kind: IndexKind,
    pub entries: Vec<IndexClass>,
    pub starred: bool,
}

impl IndexTuple {
    pub fn new(kind: IndexKind, mut entries: Vec<IndexClass>, starred: bool) -> Self {
        if starred {
            entries.sort();
        }
        IndexTuple { kind, entries, starred }
    }
}

/// Tuples of k pairwise distinct classes; starred tuples are unordered.
pub fn tuple_classes(kind: IndexKind, q: u64, k: usize, starred: bool) -> Vec<IndexTuple> {
    let classes = enumerate_classes(kind, q);
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(
        classes: &[IndexClass],
        k: usize,
        starred: bool,
        start: usize,
        cur: &mut Vec<IndexClass>,
        out: &mut Vec<Vec<IndexClass>>,
    ) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        let from = if starred { start } else { 0 };
        for (j, c) in classes.iter().enumerate().skip(from) {
            if cur.contains(c) {
                continue;
            }
            cur.push(*c);
            rec(classes, k, starred, j + 1, cur, out);
            cur.pop();
        }
    }
    let mut raw = Vec::new();
    rec(&classes, k, starred, 0, &mut cur, &mut raw);
    for e in raw {
        out.push(IndexTuple::new(kind, e, starred));
    }
    out
}

pub fn sigma_double(c: &IndexClass, q: u64) -> IndexClass {
    let md = c.kind.modulus(q);
    canonicalize(c.kind, q, mulmod(c.rep, 2, md)).expect("doubling preserves the index set")
}

pub fn sigma_double_tuple(t: &IndexTuple, q: u64) -> IndexTuple {
    let e = t.entries.iter().map(|c| sigma_double(c, q)).collect();
    IndexTuple::new(t.kind, e, t.starred)
}

/// True iff some orbit element of c1 is congruent mod `modulus` to mu * x for
/// some orbit element x of c2 and mu in `multipliers`.
pub fn congruent_mod(c1: &IndexClass, c2: &IndexClass, q: u64, modulus: u64, multipliers: &[u64]) -> bool {
    let o1: BTreeSet<u64> = c1.orbit(q).into_iter().map(|x| x % modulus).collect();
    c2.orbit(q).into_iter().any(|x| {
        multipliers
            .iter()
            .any(|mu| o1.contains(&mulmod(x % modulus, *mu % modulus, modulus)))
    })
}

pub fn gcd(a: u64, b: u64) -> u64 {
    num_integer::gcd(a, b)
}

/// Inverse of a mod m (gcd(a, m) = 1, m >= 1).
pub fn inv_mod(a: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let k = r0 / r1;
        (r0, r1) = (r1, r0 - k * r1);
        (t0, t1) = (t1, t0 - k * t1);
    }
    assert_eq!(r0, 1, "not invertible");
    t0.rem_euclid(m as i128) as u64
}

/// Writes i = i1 * b + i2 * a with i1 taken mod a and i2 mod b, for coprime a, b.
pub fn crt_split(i: u64, a: u64, b: u64) -> (u64, u64) {
    let i1 = mulmod(i % a, inv_mod(b % a, a), a);
    let i2 = mulmod(i % b, inv_mod(a % b, b), b);
    (i1, i2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_orbit(kind: IndexKind, q: u64, i: u64) -> BTreeSet<u64> {
        let md = kind.modulus(q);
        let mut s = BTreeSet::new();
        let mut f = 1u64;
        for _ in 0..6 {
            let x = (i as u128 * f as u128 % md as u128) as u64;
            s.insert(x);
            s.insert((md - x) % md);
            f = (f as u128 * q as u128 % md as u128) as u64;
        }
        s
    }

    #[test]
    fn enumerate_examples() {
        let c = enumerate_classes(IndexKind::QPlus1, 4);
        assert_eq!(c.iter().map(|c| c.rep).collect::<Vec<_>>(), vec![1, 2]);
        assert!(enumerate_classes(IndexKind::Q2Minus1, 2).is_empty());
        let c = enumerate_classes(IndexKind::Q2Plus1, 2);
        assert_eq!(c.len(), 1);
        assert_eq!(brute_orbit(IndexKind::Q2Plus1, 2, 1).len(), 4);
        assert_eq!(enumerate_classes(IndexKind::Q3Minus1, 2).len(), 1);
    }

    #[test]
    fn canonicalize_examples() {
        assert_eq!(canonicalize(IndexKind::QPlus1, 4, 3).unwrap().rep, 2);
        assert_eq!(canonicalize(IndexKind::Q3Plus1, 2, 5).unwrap().rep, 1);
        assert_eq!(
            brute_orbit(IndexKind::Q3Plus1, 2, 1),
            [1, 2, 4, 5, 7, 8].into_iter().collect()
        );
        assert!(matches!(
            canonicalize(IndexKind::Q3Minus1, 2, 7),
            Err(IndexError::ExcludedIndex { .. })
        ));
    }

    #[test]
    fn tuple_examples() {
        assert_eq!(tuple_classes(IndexKind::QPlus1, 4, 2, true).len(), 1);
        assert_eq!(tuple_classes(IndexKind::QPlus1, 4, 2, false).len(), 2);
        assert!(tuple_classes(IndexKind::QPlus1, 4, 3, true).is_empty());
    }

    #[test]
    fn sigma_examples() {
        let c = |i| IndexClass {
            kind: IndexKind::QPlus1,
            rep: i,
        };
        assert_eq!(sigma_double(&c(1), 4).rep, 2);
        assert_eq!(sigma_double(&c(2), 4).rep, 1);
        let u = IndexClass {
            kind: IndexKind::Q2Plus1,
            rep: 1,
        };
        assert_eq!(sigma_double(&u, 2), u);
    }

    #[test]
    fn congruence_examples() {
        let c = |i| IndexClass {
            kind: IndexKind::QPlus1,
            rep: i,
        };
        assert!(congruent_mod(&c(1), &c(2), 4, 1, &[1]));
        assert!(congruent_mod(&c(1), &c(2), 8, 3, &[1]));
        assert!(!congruent_mod(&c(1), &c(3), 8, 3, &[1]));
    }

    #[test]
    fn counts_match_closed_forms() {
        for a in 1..=5 {
            let q = 1u64 << a;
            for kind in IndexKind::ALL {
                assert_eq!(enumerate_classes(kind, q).len() as u64, class_count(kind, q));
            }
        }
    }

    #[test]
    fn orbits_partition_index_set() {
        for a in 1..=8 {
            let q = 1u64 << a;
            for kind in IndexKind::ALL {
                let md = kind.modulus(q);
                if md > 1 << 16 {
                    continue;
                }
                let mut cover = vec![0u8; md as usize];
                for c in enumerate_classes(kind, q) {
                    let o = brute_orbit(kind, q, c.rep);
                    assert_eq!(o.iter().copied().collect::<Vec<_>>(), c.orbit(q));
                    assert_eq!(*o.iter().next().unwrap(), c.rep);
                    for x in o {
                        cover[x as usize] += 1;
                    }
                }
                for i in 0..md {
                    let want = u8::from(!kind.is_excluded(q, i));
                    assert_eq!(cover[i as usize], want, "{kind} q={q} i={i}");
                }
            }
        }
    }

    #[test]
    fn sigma_permutes_with_order_dividing_a() {
        for a in 1..=6u32 {
            let q = 1u64 << a;
            for kind in IndexKind::ALL {
                let cls = enumerate_classes(kind, q);
                let img: BTreeSet<_> = cls.iter().map(|c| sigma_double(c, q)).collect();
                assert_eq!(img.len(), cls.len());
                for c in &cls {
                    let mut x = *c;
                    for _ in 0..a {
                        x = sigma_double(&x, q);
                    }
                    assert_eq!(x, *c);
                    assert_eq!(canonicalize(kind, q, c.rep).unwrap(), *c);
                }
            }
        }
    }

    #[test]
    fn starred_counts_are_permutation_orbits() {
        for a in 2..=5 {
            let q = 1u64 << a;
            for kind in [IndexKind::QMinus1, IndexKind::QPlus1, IndexKind::Q2Plus1] {
                for k in 2..=3 {
                    let ordered = tuple_classes(kind, q, k, false);
                    let orbits: BTreeSet<Vec<IndexClass>> = ordered
                        .iter()
                        .map(|t| {
                            let mut e = t.entries.clone();
                            e.sort();
                            e
                        })
                        .collect();
                    let starred = tuple_classes(kind, q, k, true);
                    assert_eq!(starred.len(), orbits.len());
                    let fact = if k == 2 { 2 } else { 6 };
                    assert_eq!(starred.len() * fact, ordered.len());
                }
            }
        }
    }

    #[test]
    fn crt_split_bijects_onto_pairs() {
        for a in 2..=6 {
            let q = 1u64 << a;
            for eps in [1i64, -1] {
                let (qme, qpe) = ((q as i64 - eps) as u64, (q as i64 + eps) as u64);
                let mut pairs = BTreeSet::new();
                for c in enumerate_classes(IndexKind::Q2Minus1, q) {
                    let (i1, i2) = crt_split(c.rep, qme, qpe);
                    assert_eq!((i1 * qpe + i2 * qme) % (q * q - 1), c.rep);
                    assert!(i1 != 0 && i2 != 0);
                    let k1 = canonicalize(IndexKind::q_minus(eps as i8), q, i1).unwrap();
                    let k2 = canonicalize(IndexKind::q_minus(-eps as i8), q, i2).unwrap();
                    pairs.insert((k1, k2));
                }
                assert_eq!(
                    pairs.len() as u64,
                    class_count(IndexKind::QMinus1, q) * class_count(IndexKind::QPlus1, q)
                );
            }
        }
    }

    proptest! {
        #[test]
        fn canonical_is_orbit_min(a in 1u32..7, k in 0usize..6, i in 1u64..100_000) {
            let q = 1u64 << a;
            let kind = IndexKind::ALL[k];
            let md = kind.modulus(q);
            let i = i % md;
            prop_assume!(!kind.is_excluded(q, i));
            let c = canonicalize(kind, q, i).unwrap();
            prop_assert_eq!(c.rep, *brute_orbit(kind, q, i).iter().next().unwrap());
            prop_assert_eq!(canonicalize(kind, q, md - i).unwrap(), c);
            prop_assert_eq!(canonicalize(kind, q, mulmod(i, q, md)).unwrap(), c);
        }
    }
}
