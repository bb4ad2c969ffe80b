//! Labelled irreducible characters of the normalizers N_G(Q) of the radical
//! subgroups: a constituent on the centralizer plus an extension tag.

use crate::arith::{Family, PrimeRegime};
use crate::indexing::{enumerate_classes, sigma_double, tuple_classes, IndexClass, IndexKind};
use crate::radicals::{radical_catalog, RadicalTag};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LocalError {
    #[error("radical {0} does not occur in this regime")]
    RadicalNotInRegime(RadicalTag),
    #[error("radical {0} is not a Sylow subgroup here")]
    NotSylow(RadicalTag),
}

/// One factor of a constituent on C_G(Q) (or on N/Q for the P and R weights).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Comp {
    /// Trivial character of the factor.
    One,
    /// phi_i of GL_1^eps(q), i in I_{q-eps}.
    Phi(IndexClass),
    /// chi_{q-eps}(j) of SL_2(q), j in I_{q+eps}.
    Sl(IndexClass),
    /// The unipotent ell-defect-zero character of Sp4(q).
    W,
    /// chi_18(i) of Sp4(q), i in I_{q^2+1}.
    Chi18(IndexClass),
    /// chi_15 or chi_19 of Sp4(q) over unordered pairs of I_{q+eps}.
    Pair(IndexClass, IndexClass),
    /// chi_8(i) of GL_3^eps(q), i in I_{q^3-eps}.
    Chi8(IndexClass),
    /// phi_i of the torus C_{q^3-eps} in general position.
    Phi3(IndexClass),
    /// phi_{(q^2+eps q+1) i} of C_{q^3-eps}, i in I_{q-eps}.
    Phi3N(IndexClass),
    /// Trivial character of a torus centralizer.
    OneC,
    /// Trivial character of the base subgroup J of N_G(P).
    OneJ,
    /// theta(a, b) with a mod 3^d and b mod m, up to a common sign.
    Theta(u64, u64),
    /// vartheta_i of C_{q^2+1}, i in I_{q^2+1}.
    Vartheta(IndexClass),
    /// Steinberg character of Sp2(q).
    St,
    /// chi_3(j) of Sp2(q), j in I_{q-1}.
    Sp2Chi3(IndexClass),
    /// chi_4(j) of Sp2(q), j in I_{q+1}.
    Sp2Chi4(IndexClass),
    /// The C_2 factor of N/P, whose characters form the lambda tag.
    Lambda,
    /// The degree-3 Steinberg character of Sp2(3) in N/R.
    Varsigma,
    /// phi~_i of C_m:2 in N/P or N/R, i in I_{q-eps} with 3^d | i.
    PhiT(IndexClass),
}

impl Comp {
    fn sigma(&self, q: u64, r: &PrimeRegime) -> Comp {
        let s = |c: &IndexClass| sigma_double(c, q);
        match self {
            Comp::Phi(c) => Comp::Phi(s(c)),
            Comp::Sl(c) => Comp::Sl(s(c)),
            Comp::Chi18(c) => Comp::Chi18(s(c)),
            Comp::Pair(a, b) => {
                let (a, b) = (s(a), s(b));
                Comp::Pair(a.min(b), a.max(b))
            }
            Comp::Chi8(c) => Comp::Chi8(s(c)),
            Comp::Phi3(c) => Comp::Phi3(s(c)),
            Comp::Phi3N(c) => Comp::Phi3N(s(c)),
            Comp::Theta(a, b) => theta(r, 2 * a, 2 * b),
            Comp::Vartheta(c) => Comp::Vartheta(s(c)),
            Comp::Sp2Chi3(c) => Comp::Sp2Chi3(s(c)),
            Comp::Sp2Chi4(c) => Comp::Sp2Chi4(s(c)),
            Comp::PhiT(c) => Comp::PhiT(s(c)),
            other => other.clone(),
        }
    }

    /// Index classes carried by the component.
    pub fn indices(&self) -> Vec<IndexClass> {
        match self {
            Comp::Phi(c)
            | Comp::Sl(c)
            | Comp::Chi18(c)
            | Comp::Chi8(c)
            | Comp::Phi3(c)
            | Comp::Phi3N(c)
            | Comp::Vartheta(c)
            | Comp::Sp2Chi3(c)
            | Comp::Sp2Chi4(c)
            | Comp::PhiT(c) => vec![*c],
            Comp::Pair(a, b) => vec![*a, *b],
            _ => vec![],
        }
    }
}

impl fmt::Display for Comp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Comp::One => f.write_str("1"),
            Comp::Phi(c) => write!(f, "phi{}", c.rep),
            Comp::Sl(c) => write!(f, "chi({})", c.rep),
            Comp::W => f.write_str("W"),
            Comp::Chi18(c) => write!(f, "chi18({})", c.rep),
            Comp::Pair(a, b) => write!(f, "pair({},{})", a.rep, b.rep),
            Comp::Chi8(c) => write!(f, "chi8({})", c.rep),
            Comp::Phi3(c) => write!(f, "vphi{}", c.rep),
            Comp::Phi3N(c) => write!(f, "vphiN{}", c.rep),
            Comp::OneC => f.write_str("1C"),
            Comp::OneJ => f.write_str("1J"),
            Comp::Theta(a, b) => write!(f, "theta({a},{b})"),
            Comp::Vartheta(c) => write!(f, "vartheta{}", c.rep),
            Comp::St => f.write_str("St"),
            Comp::Sp2Chi3(c) => write!(f, "chi3({})", c.rep),
            Comp::Sp2Chi4(c) => write!(f, "chi4({})", c.rep),
            Comp::Lambda => f.write_str("lambda"),
            Comp::Varsigma => f.write_str("varsigma"),
            Comp::PhiT(c) => write!(f, "phit{}", c.rep),
        }
    }
}

/// Canonical theta(a, b) under (a, b) ~ (-a, -b).
pub fn theta(r: &PrimeRegime, a: u64, b: u64) -> Comp {
    let (pa, pb) = (r.ell_d, r.m);
    let (a, b) = (a % pa, b % pb);
    let neg = ((pa - a) % pa, (pb - b) % pb);
    let (a, b) = (a, b).min(neg);
    Comp::Theta(a, b)
}

/// A character of N_G(Q): constituent on C_G(Q) and an extension tag.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct LocalCharLabel {
    pub radical: RadicalTag,
    pub parts: Vec<Comp>,
    pub tag: String,
}

impl fmt::Display for LocalCharLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p: Vec<String> = self.parts.iter().map(|c| c.to_string()).collect();
        write!(f, "{}:({})", self.radical, p.join(" x "))?;
        if !self.tag.is_empty() {
            write!(f, "/{}", self.tag)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum LocalKind {
    /// Defect-zero characters of N/Q.
    Dz,
    /// Height-zero characters of N in blocks with defect group Q.
    Irr0,
    /// Irr_{ell'}(N); only for the Sylow radical.
    IrrEllPrime,
    /// Every label of the enumerated part of Irr(N).
    All,
}

/// Tags of the extensions over a constituent with the given stabilizer pattern.
const T2: [&str; 2] = ["+", "-"];
const D8: [&str; 5] = ["++/+", "++/-", "--/+", "--/-", "+-"];
const S3: [&str; 3] = ["1", "sgn", "2"];
const K4: [&str; 4] = ["++", "+-", "-+", "--"];
/// Irr(C_2 wr S_3): the last four have degree 3.
const W3: [&str; 10] = [
    "+++/1", "+++/sgn", "+++/2", "---/1", "---/sgn", "---/2", "++-/+", "++-/-", "+--/+", "+--/-",
];
const C6: [&str; 6] = ["0", "1", "2", "3", "4", "5"];

/// True for labels of C_2 wr S_3 or S_3-stabilized constituents of degree prime to 3.
pub fn is_phi_cubed_type(l: &LocalCharLabel) -> bool {
    l.radical == RadicalTag::Q111 && (S3.contains(&l.tag.as_str()) || (W3[..6].contains(&l.tag.as_str())))
}

struct Ctx<'a> {
    r: &'a PrimeRegime,
    q: u64,
    eps: i8,
}

impl<'a> Ctx<'a> {
    fn qme(&self) -> IndexKind {
        IndexKind::q_minus(self.eps)
    }
    fn qpe(&self) -> IndexKind {
        IndexKind::q_minus(-self.eps)
    }
    fn classes(&self, k: IndexKind) -> Vec<IndexClass> {
        enumerate_classes(k, self.q)
    }
    /// {trivial} together with I_{q-eps}.
    fn phis(&self) -> Vec<Option<IndexClass>> {
        std::iter::once(None)
            .chain(self.classes(self.qme()).into_iter().map(Some))
            .collect()
    }
    fn ld_divides(&self, c: &Option<IndexClass>) -> bool {
        c.is_none_or(|c| c.rep % self.r.ell_d == 0)
    }
}

fn comp(c: &Option<IndexClass>) -> Comp {
    c.map(Comp::Phi).unwrap_or(Comp::One)
}

fn push(out: &mut Vec<LocalCharLabel>, radical: RadicalTag, parts: Vec<Comp>, tags: &[&str]) {
    for t in tags {
        out.push(LocalCharLabel {
            radical,
            parts: parts.clone(),
            tag: t.to_string(),
        });
    }
}

/// Labels of (C_{q-eps}:2) wr S_2 constituents {a, b}, with the trailing parts appended.
fn wreath2(
    ctx: &Ctx,
    radical: RadicalTag,
    tail: &[Comp],
    keep: &dyn Fn(&[Option<IndexClass>]) -> bool,
) -> Vec<LocalCharLabel> {
    let ph = ctx.phis();
    let mut out = Vec::new();
    for x in 0..ph.len() {
        for y in x..ph.len() {
            let (a, b) = (ph[x], ph[y]);
            if !keep(&[a, b]) {
                continue;
            }
            let tags: &[&str] = match (a, b) {
                (None, None) => &D8,
                (None, _) => &T2,
                _ if a == b => &T2,
                _ => &[""],
            };
            let mut parts = vec![comp(&a), comp(&b)];
            parts.extend_from_slice(tail);
            push(&mut out, radical, parts, tags);
        }
    }
    out
}

/// Labels of (C_{q-eps}:2) wr S_3 constituents {a, b, c}.
fn wreath3(ctx: &Ctx, keep: &dyn Fn(&[Option<IndexClass>]) -> bool) -> Vec<LocalCharLabel> {
    let ph = ctx.phis();
    let mut out = Vec::new();
    for x in 0..ph.len() {
        for y in x..ph.len() {
            for z in y..ph.len() {
                let v = [ph[x], ph[y], ph[z]];
                if !keep(&v) {
                    continue;
                }
                let zeros = v.iter().filter(|c| c.is_none()).count();
                let distinct_nonzero = {
                    let mut nz: Vec<_> = v.iter().flatten().collect();
                    nz.dedup();
                    nz.len()
                };
                let tags: &[&str] = match (zeros, distinct_nonzero) {
                    (3, _) => &W3,
                    (2, _) => &D8,
                    (1, 1) => &K4,
                    (1, _) => &T2,
                    (0, 1) => &S3,
                    (0, 2) => &T2,
                    _ => &[""],
                };
                push(&mut out, RadicalTag::Q111, v.iter().map(comp).collect(), tags);
            }
        }
    }
    out
}

/// ell = 3: the constituents whose ell'-parts are stable under a 3-cycle lie in
/// blocks with larger defect group.
fn pairwise_pm_mod_m(v: &[Option<IndexClass>], ctx: &Ctx) -> bool {
    let m = ctx.r.m;
    let res = |c: &Option<IndexClass>| c.map_or(0, |c| c.rep % m);
    let pm = |a: u64, b: u64| a == b || (a + b).is_multiple_of(m);
    let rs: Vec<u64> = v.iter().map(res).collect();
    rs.iter().all(|a| rs.iter().all(|b| pm(*a, *b)))
}

fn sp2_chars(q: u64) -> Vec<Comp> {
    let mut out = vec![Comp::One, Comp::St];
    out.extend(enumerate_classes(IndexKind::QMinus1, q).into_iter().map(Comp::Sp2Chi3));
    out.extend(enumerate_classes(IndexKind::QPlus1, q).into_iter().map(Comp::Sp2Chi4));
    out
}

/// The label set of N_G(Q) of the requested kind.
pub fn enumerate_local(
    r: &PrimeRegime,
    radical: RadicalTag,
    kind: LocalKind,
) -> Result<Vec<LocalCharLabel>, LocalError> {
    let cat = radical_catalog(r);
    let class = cat
        .iter()
        .find(|c| c.tag == radical)
        .ok_or(LocalError::RadicalNotInRegime(radical))?;
    let kind = match kind {
        LocalKind::IrrEllPrime if class.is_sylow => LocalKind::Irr0,
        LocalKind::IrrEllPrime => return Err(LocalError::NotSylow(radical)),
        k => k,
    };
    let q = r.q();
    let eps = r.epsilon.unwrap_or(1);
    let ctx = Ctx { r, q, eps };
    let three = r.ell == 3 && r.group.family == Family::Sp6;
    let ld = r.ell_d;
    let mut out = Vec::new();
    let sp4 = r.group.family == Family::Sp4;
    match radical {
        RadicalTag::Q1 | RadicalTag::Q2 if sp4 => {
            // Sp2-type factor chi(i), i in I_{q+eps}, times phi_j of GL_1^eps.
            for i in ctx.classes(ctx.qpe()) {
                for j in ctx.phis() {
                    if kind == LocalKind::Dz && !ctx.ld_divides(&j) {
                        continue;
                    }
                    let tags: &[&str] = if j.is_none() { &T2 } else { &[""] };
                    push(&mut out, radical, vec![Comp::Sl(i), comp(&j)], tags);
                }
            }
        }
        RadicalTag::Q11 if sp4 => {
            let dz = kind == LocalKind::Dz;
            out = wreath2(&ctx, radical, &[], &|v| !dz || v.iter().all(|c| ctx.ld_divides(c)));
        }
        RadicalTag::Q1 => {
            let mut psi = vec![Comp::W];
            psi.extend(ctx.classes(IndexKind::Q2Plus1).into_iter().map(Comp::Chi18));
            psi.extend(
                tuple_classes(ctx.qpe(), q, 2, true)
                    .into_iter()
                    .map(|t| Comp::Pair(t.entries[0], t.entries[1])),
            );
            for a in ctx.phis() {
                if kind == LocalKind::Dz && !ctx.ld_divides(&a) {
                    continue;
                }
                let tags: &[&str] = if a.is_none() { &T2 } else { &[""] };
                for p in &psi {
                    push(&mut out, radical, vec![comp(&a), p.clone()], tags);
                }
            }
        }
        RadicalTag::Q2 => {
            for a in ctx.phis() {
                if kind == LocalKind::Dz && !ctx.ld_divides(&a) {
                    continue;
                }
                let tags: &[&str] = if a.is_none() { &T2 } else { &[""] };
                for j in ctx.classes(ctx.qpe()) {
                    for k in ctx.classes(ctx.qpe()) {
                        push(&mut out, radical, vec![comp(&a), Comp::Sl(j), Comp::Sl(k)], tags);
                    }
                }
            }
        }
        RadicalTag::Q3 => {
            if !three || kind == LocalKind::All {
                for i in ctx.classes(IndexKind::q3_minus(eps)) {
                    if kind == LocalKind::Dz && i.rep % ld != 0 {
                        continue;
                    }
                    push(&mut out, radical, vec![Comp::Chi8(i)], &[""]);
                }
            }
        }
        RadicalTag::Q11 => {
            let dz = kind == LocalKind::Dz;
            for k in ctx.classes(ctx.qpe()) {
                out.extend(wreath2(&ctx, radical, &[Comp::Sl(k)], &|v| {
                    !dz || v.iter().all(|c| ctx.ld_divides(c))
                }));
            }
        }
        RadicalTag::Q21 => {
            for a in ctx.phis() {
                for b in ctx.phis() {
                    if kind == LocalKind::Dz && !(ctx.ld_divides(&a) && ctx.ld_divides(&b)) {
                        continue;
                    }
                    let tags: &[&str] = match (a, b) {
                        (None, None) => &K4,
                        (None, _) | (_, None) => &T2,
                        _ => &[""],
                    };
                    for j in ctx.classes(ctx.qpe()) {
                        push(&mut out, radical, vec![comp(&a), Comp::Sl(j), comp(&b)], tags);
                    }
                }
            }
        }
        RadicalTag::Q111 => {
            let all = wreath3(&ctx, &|v| kind != LocalKind::Dz || v.iter().all(|c| ctx.ld_divides(c)));
            out = match (kind, three) {
                (LocalKind::All, _) | (_, false) => all,
                (LocalKind::Irr0, true) => all
                    .into_iter()
                    .filter(|l| {
                        let v: Vec<Option<IndexClass>> = l
                            .parts
                            .iter()
                            .map(|c| match c {
                                Comp::Phi(i) => Some(*i),
                                _ => None,
                            })
                            .collect();
                        !is_phi_cubed_type(l) && !pairwise_pm_mod_m(&v, &ctx)
                    })
                    .collect(),
                (_, true) => all.into_iter().filter(|l| !is_phi_cubed_type(l)).collect(),
            };
        }
        RadicalTag::Q3Torus => {
            let torus = IndexKind::q3_minus(eps);
            if three {
                for i in ctx.classes(torus) {
                    let keep = match kind {
                        LocalKind::Dz => i.rep % (3 * ld) == 0,
                        LocalKind::Irr0 => i.rep % r.n != 0,
                        _ => true,
                    };
                    if keep {
                        push(&mut out, radical, vec![Comp::Phi3(i)], &[""]);
                    }
                }
            } else {
                let phi_l =
                    crate::arith::ell_part((torus.modulus(q) / IndexKind::q_minus(eps).modulus(q)) as u128, r.ell).0
                        as u64;
                push(&mut out, radical, vec![Comp::OneC], &C6);
                for i in ctx.classes(ctx.qme()) {
                    push(&mut out, radical, vec![Comp::Phi3N(i)], &S3);
                }
                for i in ctx.classes(torus) {
                    if kind == LocalKind::Dz && i.rep % phi_l != 0 {
                        continue;
                    }
                    push(&mut out, radical, vec![Comp::Phi3(i)], &[""]);
                }
            }
        }
        RadicalTag::Q2Torus => {
            let lq = crate::arith::ell_part((q * q + 1) as u128, r.ell).0 as u64;
            let varthetas: Vec<IndexClass> = ctx
                .classes(IndexKind::Q2Plus1)
                .into_iter()
                .filter(|i| kind != LocalKind::Dz || i.rep % lq == 0)
                .collect();
            let tails = if sp4 {
                vec![None]
            } else {
                sp2_chars(q).into_iter().map(Some).collect()
            };
            for t in &tails {
                let with = |c: Comp| {
                    let mut v = vec![c];
                    v.extend(t.clone());
                    v
                };
                push(
                    &mut out,
                    radical,
                    with(if sp4 { Comp::OneC } else { Comp::One }),
                    &["0", "1", "2", "3"],
                );
                for i in &varthetas {
                    push(&mut out, radical, with(Comp::Vartheta(*i)), &[""]);
                }
            }
        }
        RadicalTag::P => match kind {
            LocalKind::Dz => {
                push(&mut out, radical, vec![Comp::One, Comp::Lambda], &K4);
                for i in ctx.classes(ctx.qme()).into_iter().filter(|i| i.rep % ld == 0) {
                    push(&mut out, radical, vec![Comp::PhiT(i), Comp::Lambda], &T2);
                }
            }
            _ => {
                push(&mut out, radical, vec![Comp::OneJ], &C6);
                let mut seen = std::collections::BTreeSet::new();
                for a in 0..ld {
                    for b in 0..r.m {
                        if (a, b) != (0, 0) {
                            seen.insert(theta(r, a, b));
                        }
                    }
                }
                for t in seen {
                    push(&mut out, radical, vec![t], &S3);
                }
            }
        },
        RadicalTag::R => {
            if kind == LocalKind::Dz {
                push(&mut out, radical, vec![Comp::One, Comp::Varsigma], &T2);
                for i in ctx.classes(ctx.qme()).into_iter().filter(|i| i.rep % ld == 0) {
                    push(&mut out, radical, vec![Comp::PhiT(i), Comp::Varsigma], &[""]);
                }
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Index doubling on every component; tags are fixed.
pub fn sigma_on_local(l: &LocalCharLabel, r: &PrimeRegime) -> LocalCharLabel {
    let q = r.q();
    let mut parts: Vec<Comp> = l.parts.iter().map(|c| c.sigma(q, r)).collect();
    canonical_order(l.radical, r.group.family, &mut parts);
    LocalCharLabel {
        radical: l.radical,
        parts,
        tag: l.tag.clone(),
    }
}

/// Sorts the permutable factors of a constituent.
pub fn canonical_order(radical: RadicalTag, family: Family, parts: &mut [Comp]) {
    match (radical, family) {
        (RadicalTag::Q11, _) => parts[..2].sort(),
        (RadicalTag::Q111, _) => parts.sort(),
        _ => {}
    }
}

fn double_class(c: &IndexClass, q: u64) -> IndexClass {
    sigma_double(c, q)
}

/// The graph automorphism of Sp4(q) on local labels: swaps the Q1 and Q2
/// label spaces (doubling on the way to Q2) and acts on Q11 by
/// (i, j) -> (i + j, i - j).
pub fn gamma_on_local_sp4(l: &LocalCharLabel, r: &PrimeRegime) -> LocalCharLabel {
    let q = r.q();
    match l.radical {
        RadicalTag::Q1 => LocalCharLabel {
            radical: RadicalTag::Q2,
            parts: l.parts.iter().map(|c| c.sigma(q, r)).collect(),
            tag: l.tag.clone(),
        },
        RadicalTag::Q2 => LocalCharLabel {
            radical: RadicalTag::Q1,
            parts: l.parts.clone(),
            tag: l.tag.clone(),
        },
        RadicalTag::Q11 => {
            let phi = |c: &Comp| match c {
                Comp::Phi(i) => Some(*i),
                _ => None,
            };
            let (a, b) = (phi(&l.parts[0]), phi(&l.parts[1]));
            let kind = IndexKind::q_minus(r.eps());
            let md = kind.modulus(q);
            let mk = |x: u64| {
                let x = x % md;
                if x == 0 {
                    None
                } else {
                    Some(crate::indexing::canonicalize(kind, q, x).expect("nonzero residue"))
                }
            };
            let (na, nb, tag) = match (a, b) {
                (None, None) => {
                    let t = match l.tag.as_str() {
                        "++/-" => "--/+",
                        "--/+" => "++/-",
                        t => t,
                    };
                    (None, None, t.to_string())
                }
                (None, Some(j)) | (Some(j), None) => (Some(j), Some(j), l.tag.clone()),
                (Some(i), Some(j)) if i == j => (Some(double_class(&i, q)), None, l.tag.clone()),
                (Some(i), Some(j)) => (mk(i.rep + j.rep), mk(i.rep + md - j.rep), l.tag.clone()),
            };
            let mut parts = vec![comp(&na), comp(&nb)];
            parts.sort();
            LocalCharLabel {
                radical: RadicalTag::Q11,
                parts,
                tag,
            }
        }
        RadicalTag::Q2Torus => {
            let parts = l
                .parts
                .iter()
                .map(|c| match c {
                    Comp::Vartheta(i) => Comp::Vartheta(
                        crate::indexing::canonicalize(IndexKind::Q2Plus1, q, i.rep * (q + 1)).expect("unit multiple"),
                    ),
                    other => other.clone(),
                })
                .collect();
            LocalCharLabel {
                radical: l.radical,
                parts,
                tag: l.tag.clone(),
            }
        }
        _ => l.clone(),
    }
}

/// Counts |Irr(H wr S_n)| for n in {2, 3} from |Irr(H)| = k by summing, over
/// S_n-orbits of k^n tuples, the class number of the stabilizer.
pub fn wreath_oracle(k: usize, n: usize) -> usize {
    assert!(n == 2 || n == 3, "wreath oracle covers S_2 and S_3");
    let perms: Vec<Vec<usize>> = if n == 2 {
        vec![vec![0, 1], vec![1, 0]]
    } else {
        vec![
            vec![0, 1, 2],
            vec![0, 2, 1],
            vec![1, 0, 2],
            vec![1, 2, 0],
            vec![2, 0, 1],
            vec![2, 1, 0],
        ]
    };
    let mut orbits: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    let total = k.pow(n as u32);
    for code in 0..total {
        let t: Vec<usize> = (0..n).map(|p| (code / k.pow(p as u32)) % k).collect();
        let stab = perms
            .iter()
            .filter(|p| p.iter().enumerate().all(|(a, b)| t[*b] == t[a]))
            .count();
        let mut key = t.clone();
        key.sort();
        orbits.insert(key, stab);
    }
    // Class numbers of the subgroups of S_3 by order: 1, C_2, C_3, S_3.
    let classes = |order: usize| match order {
        1 => 1,
        2 => 2,
        3 => 3,
        6 => 3,
        _ => unreachable!(),
    };
    orbits.values().map(|s| classes(*s)).sum()
}

/// |Irr(C_M : 2)| for odd M: two linear characters and (M - 1)/2 of degree 2.
pub fn dihedral_class_number(m: u64) -> usize {
    2 + (m as usize - 1) / 2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{classify_regime, GroupSpec};

    fn reg(f: Family, a: u32, ell: u64) -> PrimeRegime {
        classify_regime(&GroupSpec::new(f, a).unwrap(), ell).unwrap()
    }

    #[test]
    fn q3_torus_at_q2() {
        let r = reg(Family::Sp6, 1, 7);
        assert_eq!(
            enumerate_local(&r, RadicalTag::Q3Torus, LocalKind::IrrEllPrime)
                .unwrap()
                .len(),
            7
        );
    }

    #[test]
    fn q2_torus_at_q2() {
        let r = reg(Family::Sp6, 1, 5);
        assert_eq!(
            enumerate_local(&r, RadicalTag::Q2Torus, LocalKind::IrrEllPrime)
                .unwrap()
                .len(),
            15
        );
    }

    #[test]
    fn wreath_counts() {
        assert_eq!(wreath_oracle(4, 3), 40);
        assert_eq!(wreath_oracle(2, 3), 10);
        assert_eq!(wreath_oracle(2, 2), 5);
        let r = reg(Family::Sp6, 2, 5);
        let n = enumerate_local(&r, RadicalTag::Q111, LocalKind::IrrEllPrime)
            .unwrap()
            .len();
        assert_eq!(n, 40);
        assert_eq!(n, wreath_oracle(dihedral_class_number(5), 3));
    }

    #[test]
    fn r_weights_at_q8() {
        let r = reg(Family::Sp6, 3, 3);
        let dz = enumerate_local(&r, RadicalTag::R, LocalKind::Dz).unwrap();
        assert_eq!(dz.len(), 2);
    }

    #[test]
    fn p_side_at_q8() {
        let r = reg(Family::Sp6, 3, 3);
        assert_eq!(
            enumerate_local(&r, RadicalTag::P, LocalKind::IrrEllPrime)
                .unwrap()
                .len(),
            18
        );
    }

    #[test]
    fn dz_count_identities() {
        for a in 1..=6 {
            let g = GroupSpec::sp6(a);
            for ell in crate::arith::odd_primes_of(&g) {
                let r = classify_regime(&g, ell).unwrap();
                let cat: Vec<_> = radical_catalog(&r).iter().map(|c| c.tag).collect();
                if cat.contains(&RadicalTag::Q3) && ell != 3 {
                    let n = enumerate_local(&r, RadicalTag::Q3, LocalKind::Dz).unwrap().len() as u64;
                    let q = r.q();
                    let qe = if r.eps() == 1 { q + 1 } else { q - 1 };
                    assert_eq!(6 * n, q * qe * r.m, "q={q} ell={ell}");
                }
                if cat.contains(&RadicalTag::R) {
                    let n = enumerate_local(&r, RadicalTag::R, LocalKind::Dz).unwrap().len() as u64;
                    assert_eq!(n, (r.m - 1) / 2 + 2, "q={} ell={ell}", r.q());
                }
                if cat.contains(&RadicalTag::Q111) {
                    let all = enumerate_local(&r, RadicalTag::Q111, LocalKind::All).unwrap();
                    let trivial = all.iter().filter(|l| l.parts.iter().all(|c| *c == Comp::One)).count();
                    assert_eq!(trivial, 10);
                    assert_eq!(all.len(), wreath_oracle(dihedral_class_number(r.q_minus_eps()), 3));
                }
            }
        }
    }

    #[test]
    fn not_in_regime() {
        let r = reg(Family::Sp6, 1, 7);
        assert_eq!(
            enumerate_local(&r, RadicalTag::Q1, LocalKind::Irr0),
            Err(LocalError::RadicalNotInRegime(RadicalTag::Q1))
        );
        let r = reg(Family::Sp6, 2, 5);
        assert_eq!(
            enumerate_local(&r, RadicalTag::Q1, LocalKind::IrrEllPrime),
            Err(LocalError::NotSylow(RadicalTag::Q1))
        );
    }

    #[test]
    fn sigma_permutes_each_kind() {
        for (f, a, ell) in [
            (Family::Sp6, 2, 5),
            (Family::Sp6, 3, 3),
            (Family::Sp6, 4, 3),
            (Family::Sp4, 3, 3),
        ] {
            let r = reg(f, a, ell);
            for c in radical_catalog(&r) {
                for k in [LocalKind::Dz, LocalKind::Irr0, LocalKind::All] {
                    let set = enumerate_local(&r, c.tag, k).unwrap();
                    let mut img: Vec<_> = set.iter().map(|l| sigma_on_local(l, &r)).collect();
                    img.sort();
                    assert_eq!(img, set, "{f:?} q={} {} {k:?}", r.q(), c.tag);
                }
            }
        }
    }

    #[test]
    fn sp4_gamma_squared_is_sigma() {
        for a in [2, 3, 4] {
            for ell in crate::arith::odd_primes_of(&GroupSpec::sp4(a)) {
                let r = reg(Family::Sp4, a, ell);
                for c in radical_catalog(&r) {
                    for l in enumerate_local(&r, c.tag, LocalKind::All).unwrap() {
                        let g2 = gamma_on_local_sp4(&gamma_on_local_sp4(&l, &r), &r);
                        assert_eq!(g2, sigma_on_local(&l, &r), "{l}");
                    }
                }
            }
        }
    }
}
