//! The local-global maps: map-table data, per-line instantiation into explicit
//! bijections, and the coverage, weight-count and equivariance checks.

use crate::arith::{Family, PrimeRegime};
use crate::blocks::{
    BlockEngine, BlockId, BlockPartition, BlockRules, BrauerCounts, BrauerData, UnipotentTarget, VirtualChar,
};
use crate::chartable::{CharLabel, CharTable, Instance};
use crate::indexing::{canonicalize, crt_split, enumerate_classes, inv_mod, tuple_classes, IndexKind};
use crate::localchars::{
    canonical_order, enumerate_local, gamma_on_local_sp4, sigma_on_local, theta, Comp, LocalCharLabel, LocalKind,
};
use crate::radicals::{radical_catalog, RadicalTag};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MapError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("missing @group header")]
    MissingGroup,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum MapKind {
    Omega,
    Star,
}

impl MapKind {
    pub fn name(self) -> &'static str {
        match self {
            MapKind::Omega => "omega",
            MapKind::Star => "star",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EpsBranch {
    Plus,
    Minus,
    Any,
}

impl EpsBranch {
    fn render(self) -> &'static str {
        match self {
            EpsBranch::Plus => "+",
            EpsBranch::Minus => "-",
            EpsBranch::Any => "*",
        }
    }

    fn matches(self, r: &PrimeRegime) -> bool {
        match self {
            EpsBranch::Any => true,
            EpsBranch::Plus => r.epsilon == Some(1),
            EpsBranch::Minus => r.epsilon == Some(-1),
        }
    }
}

/// An index kind, possibly relative to the sign eps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum KindTok {
    QMinusE,
    QPlusE,
    Q3MinusE,
    Fixed(IndexKind),
}

impl KindTok {
    fn parse(s: &str) -> Result<Self, String> {
        Ok(match s {
            "q-e" => KindTok::QMinusE,
            "q+e" => KindTok::QPlusE,
            "q3-e" => KindTok::Q3MinusE,
            t => KindTok::Fixed(IndexKind::parse(t).map_err(|e| e.to_string())?),
        })
    }

    fn render(self) -> String {
        match self {
            KindTok::QMinusE => "q-e".into(),
            KindTok::QPlusE => "q+e".into(),
            KindTok::Q3MinusE => "q3-e".into(),
            KindTok::Fixed(k) => k.tag().into(),
        }
    }

    fn resolve(self, eps: i8) -> IndexKind {
        match self {
            KindTok::QMinusE => IndexKind::q_minus(eps),
            KindTok::QPlusE => IndexKind::q_minus(-eps),
            KindTok::Q3MinusE => IndexKind::q3_minus(eps),
            KindTok::Fixed(k) => k,
        }
    }
}

/// Index variables ranging over classes or tuples of classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VarDecl {
    pub names: Vec<String>,
    pub kind: KindTok,
    pub starred: bool,
    /// Split i = i.1 * b + i.2 * a with i.1 mod a, i.2 mod b.
    pub crt: Option<(KindTok, KindTok)>,
}

impl VarDecl {
    fn render(&self) -> String {
        let mut s = if self.names.len() == 1 {
            format!("{}:{}", self.names[0], self.kind.render())
        } else {
            format!("({}):{}^{}", self.names.join(","), self.kind.render(), self.names.len())
        };
        if self.starred {
            s.push('*');
        }
        if let Some((a, b)) = self.crt {
            s.push_str(&format!("@crt({},{})", a.render(), b.render()));
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Cond {
    /// ell^d divides each variable.
    LdDivides(Vec<String>),
    /// 3^(d+1) divides each variable.
    Pow3D1Divides(Vec<String>),
    MNotDivides(String),
    NNotDivides(String),
    /// m does not divide at least one of the variables.
    MNotDividesOne(Vec<String>),
    /// i is not congruent to +-j mod m.
    NotEquivM(String, String),
    /// The variables are not all pairwise congruent up to sign mod m.
    NotAllEquivM(Vec<String>),
    EllIs3(bool),
}

impl Cond {
    fn parse(s: &str) -> Result<Self, String> {
        let inner = |s: &str, pre: &str, post: &str| -> Option<Vec<String>> {
            s.strip_prefix(pre)
                .and_then(|r| r.strip_suffix(post))
                .map(|r| r.split(',').map(|x| x.trim().to_string()).collect())
        };
        if s == "l=3" {
            return Ok(Cond::EllIs3(true));
        }
        if s == "l!=3" {
            return Ok(Cond::EllIs3(false));
        }
        if let Some(v) = inner(s, "m!|one(", ")") {
            return Ok(Cond::MNotDividesOne(v));
        }
        if let Some(v) = inner(s, "ld|", "") {
            return Ok(Cond::LdDivides(v));
        }
        if let Some(v) = inner(s, "3d1|", "") {
            return Ok(Cond::Pow3D1Divides(v));
        }
        if let Some(v) = s.strip_prefix("m!|") {
            return Ok(Cond::MNotDivides(v.to_string()));
        }
        if let Some(v) = s.strip_prefix("n!|") {
            return Ok(Cond::NNotDivides(v.to_string()));
        }
        if let Some(v) = inner(s, "nequiv(", ")") {
            if v.len() == 2 {
                return Ok(Cond::NotEquivM(v[0].clone(), v[1].clone()));
            }
        }
        if let Some(v) = inner(s, "!allequiv(", ")") {
            return Ok(Cond::NotAllEquivM(v));
        }
        Err(format!("unknown constraint '{s}'"))
    }

    fn render(&self) -> String {
        match self {
            Cond::LdDivides(v) => format!("ld|{}", v.join(",")),
            Cond::Pow3D1Divides(v) => format!("3d1|{}", v.join(",")),
            Cond::MNotDivides(v) => format!("m!|{v}"),
            Cond::NNotDivides(v) => format!("n!|{v}"),
            Cond::MNotDividesOne(v) => format!("m!|one({})", v.join(",")),
            Cond::NotEquivM(a, b) => format!("nequiv({a},{b})"),
            Cond::NotAllEquivM(v) => format!("!allequiv({})", v.join(",")),
            Cond::EllIs3(true) => "l=3".into(),
            Cond::EllIs3(false) => "l!=3".into(),
        }
    }

    fn names(&self) -> Vec<&String> {
        match self {
            Cond::LdDivides(v) | Cond::Pow3D1Divides(v) | Cond::MNotDividesOne(v) | Cond::NotAllEquivM(v) => {
                v.iter().collect()
            }
            Cond::MNotDivides(a) | Cond::NNotDivides(a) => vec![a],
            Cond::NotEquivM(a, b) => vec![a, b],
            Cond::EllIs3(_) => vec![],
        }
    }

    fn holds(&self, env: &Env, r: &PrimeRegime) -> bool {
        let v = |n: &String| env[n];
        let pm = |a: u64, b: u64| {
            let m = r.m;
            (a % m + m - b % m).is_multiple_of(m) || (a + b).is_multiple_of(m)
        };
        match self {
            Cond::LdDivides(ns) => ns.iter().all(|n| v(n) % r.ell_d == 0),
            Cond::Pow3D1Divides(ns) => ns.iter().all(|n| v(n) % (3 * r.ell_d) == 0),
            Cond::MNotDivides(n) => v(n) % r.m != 0,
            Cond::NNotDivides(n) => v(n) % r.n != 0,
            Cond::MNotDividesOne(ns) => ns.iter().any(|n| v(n) % r.m != 0),
            Cond::NotEquivM(a, b) => !pm(v(a), v(b)),
            Cond::NotAllEquivM(ns) => !ns.iter().all(|a| ns.iter().all(|b| pm(v(a), v(b)))),
            Cond::EllIs3(t) => (r.ell == 3) == *t,
        }
    }
}

/// A family reference with index variables (empty for unipotent characters).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FamRef {
    pub family: u16,
    pub args: Vec<String>,
}

impl FamRef {
    fn render(&self) -> String {
        if self.args.is_empty() {
            self.family.to_string()
        } else {
            format!("{}({})", self.family, self.args.join(","))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum DomainSpec {
    /// An explicit list, paired in the written order when the target lists its tags.
    Set(Vec<FamRef>),
    Family(FamRef),
    /// A Lusztig series E_s(J) minus some of its families.
    Series {
        series: u16,
        args: Vec<String>,
        minus: Vec<u16>,
    },
    /// The unipotent characters of B0 or B1.
    Unipotent(u8),
    /// Brauer characters of a block, optionally a slice of them in canonical order.
    Block {
        block: u16,
        variant: Option<u8>,
        args: Vec<String>,
        slice: Option<(usize, usize)>,
    },
}

fn split_top(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(cur.trim().to_string());
                cur.clear();
                continue;
            }
            _ => {}
        }
        cur.push(ch);
    }
    if !cur.trim().is_empty() {
        out.push(cur.trim().to_string());
    }
    out
}

/// Splits "17(i,j)rest" into (17, [i, j], rest).
fn num_args(s: &str) -> Result<(u16, Vec<String>, &str), String> {
    let end = s.find(|c: char| !c.is_ascii_digit()).unwrap_or(s.len());
    let n: u16 = s[..end].parse().map_err(|_| format!("expected a number in '{s}'"))?;
    let rest = &s[end..];
    if let Some(r) = rest.strip_prefix('(') {
        let close = r.find(')').ok_or_else(|| format!("unclosed '(' in '{s}'"))?;
        let args = r[..close].split(',').map(|x| x.trim().to_string()).collect();
        Ok((n, args, &r[close + 1..]))
    } else {
        Ok((n, vec![], rest))
    }
}

impl DomainSpec {
    fn parse(s: &str) -> Result<Self, String> {
        let fam = |t: &str| -> Result<FamRef, String> {
            let (family, args, rest) = num_args(t)?;
            if !rest.is_empty() {
                return Err(format!("trailing '{rest}' in '{t}'"));
            }
            Ok(FamRef { family, args })
        };
        if let Some(r) = s.strip_prefix('{') {
            let body = r.strip_suffix('}').ok_or_else(|| format!("unclosed set '{s}'"))?;
            return Ok(DomainSpec::Set(
                split_top(body).iter().map(|t| fam(t)).collect::<Result<_, _>>()?,
            ));
        }
        if let Some(r) = s.strip_prefix("chi") {
            return Ok(DomainSpec::Family(fam(r)?));
        }
        if let Some(r) = s.strip_prefix("U(B") {
            let k = r
                .strip_suffix(')')
                .and_then(|k| k.parse().ok())
                .ok_or_else(|| format!("bad '{s}'"))?;
            return Ok(DomainSpec::Unipotent(k));
        }
        if let Some(r) = s.strip_prefix('E') {
            let (series, args, rest) = num_args(r)?;
            let minus = match rest.strip_prefix("\\{") {
                Some(m) => m
                    .strip_suffix('}')
                    .ok_or_else(|| format!("unclosed exclusion in '{s}'"))?
                    .split(',')
                    .map(|x| x.trim().parse::<u16>().map_err(|_| format!("bad family in '{s}'")))
                    .collect::<Result<_, _>>()?,
                None if rest.is_empty() => vec![],
                None => return Err(format!("trailing '{rest}' in '{s}'")),
            };
            return Ok(DomainSpec::Series { series, args, minus });
        }
        if let Some(r) = s.strip_prefix('B') {
            let end = r.find(|c: char| !c.is_ascii_digit()).unwrap_or(r.len());
            let block: u16 = r[..end].parse().map_err(|_| format!("bad block in '{s}'"))?;
            let mut rest = &r[end..];
            let mut variant = None;
            if let Some(v) = rest.strip_prefix('^') {
                let e = v.find(|c: char| !c.is_ascii_digit()).unwrap_or(v.len());
                variant = Some(v[..e].parse().map_err(|_| format!("bad variant in '{s}'"))?);
                rest = &v[e..];
            }
            let mut args = vec![];
            if let Some(a) = rest.strip_prefix('(') {
                let close = a.find(')').ok_or_else(|| format!("unclosed '(' in '{s}'"))?;
                args = a[..close].split(',').map(|x| x.trim().to_string()).collect();
                rest = &a[close + 1..];
            }
            let slice = match rest.strip_prefix('[') {
                Some(sl) => {
                    let body = sl.strip_suffix(']').ok_or_else(|| format!("unclosed slice in '{s}'"))?;
                    let (a, b) = body.split_once("..").ok_or_else(|| format!("bad slice in '{s}'"))?;
                    let a = a.parse().map_err(|_| format!("bad slice in '{s}'"))?;
                    let b = b.parse().map_err(|_| format!("bad slice in '{s}'"))?;
                    Some((a, b))
                }
                None if rest.is_empty() => None,
                None => return Err(format!("trailing '{rest}' in '{s}'")),
            };
            return Ok(DomainSpec::Block {
                block,
                variant,
                args,
                slice,
            });
        }
        Err(format!("unknown domain '{s}'"))
    }

    fn render(&self) -> String {
        match self {
            DomainSpec::Set(v) => format!("{{{}}}", v.iter().map(|f| f.render()).collect::<Vec<_>>().join(",")),
            DomainSpec::Family(f) => format!("chi{}", f.render()),
            DomainSpec::Series { series, args, minus } => {
                let mut s = format!("E{series}");
                if !args.is_empty() {
                    s.push_str(&format!("({})", args.join(",")));
                }
                if !minus.is_empty() {
                    let m: Vec<String> = minus.iter().map(|x| x.to_string()).collect();
                    s.push_str(&format!("\\{{{}}}", m.join(",")));
                }
                s
            }
            DomainSpec::Unipotent(k) => format!("U(B{k})"),
            DomainSpec::Block {
                block,
                variant,
                args,
                slice,
            } => {
                let mut s = format!("B{block}");
                if let Some(v) = variant {
                    s.push_str(&format!("^{v}"));
                }
                if !args.is_empty() {
                    s.push_str(&format!("({})", args.join(",")));
                }
                if let Some((a, b)) = slice {
                    s.push_str(&format!("[{a}..{b}]"));
                }
                s
            }
        }
    }

    /// Family ids referenced directly.
    pub fn families(&self) -> Vec<u16> {
        match self {
            DomainSpec::Set(v) => v.iter().map(|f| f.family).collect(),
            DomainSpec::Family(f) => vec![f.family],
            DomainSpec::Series { minus, .. } => minus.clone(),
            _ => vec![],
        }
    }

    fn args(&self) -> Vec<&String> {
        match self {
            DomainSpec::Set(v) => v.iter().flat_map(|f| f.args.iter()).collect(),
            DomainSpec::Family(f) => f.args.iter().collect(),
            DomainSpec::Series { args, .. } | DomainSpec::Block { args, .. } => args.iter().collect(),
            DomainSpec::Unipotent(_) => vec![],
        }
    }
}

/// k * variable, where the variable may be a CRT component such as i.1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Expr {
    pub k: u64,
    pub var: String,
}

impl Expr {
    fn parse(s: &str) -> Result<Self, String> {
        let end = s.find(|c: char| !c.is_ascii_digit()).unwrap_or(s.len());
        let k = if end == 0 {
            1
        } else {
            s[..end].parse().map_err(|_| format!("bad factor in '{s}'"))?
        };
        let var = s[end..].to_string();
        if var.is_empty() || !var.starts_with(|c: char| c.is_ascii_lowercase()) {
            return Err(format!("bad expression '{s}'"));
        }
        Ok(Expr { k, var })
    }

    fn render(&self) -> String {
        if self.k == 1 {
            self.var.clone()
        } else {
            format!("{}{}", self.k, self.var)
        }
    }

    fn eval(&self, env: &Env) -> u64 {
        self.k * env[&self.var]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum CompTpl {
    Fixed(Comp),
    Phi(Expr),
    Sl(Expr),
    Chi18(Expr),
    Pair(Expr, Expr),
    Chi8(Expr),
    Vphi(Expr),
    VphiN(Expr),
    Theta(Expr, Expr),
    Vartheta(Expr),
    Chi3(Expr),
    Chi4(Expr),
    PhiT(Expr),
}

impl CompTpl {
    fn parse(s: &str) -> Result<Self, String> {
        let fixed = match s {
            "1" => Some(Comp::One),
            "W" => Some(Comp::W),
            "1C" => Some(Comp::OneC),
            "1J" => Some(Comp::OneJ),
            "St" => Some(Comp::St),
            "lambda" => Some(Comp::Lambda),
            "varsigma" => Some(Comp::Varsigma),
            _ => None,
        };
        if let Some(c) = fixed {
            return Ok(CompTpl::Fixed(c));
        }
        let open = s.find('(').ok_or_else(|| format!("unknown component '{s}'"))?;
        let name = &s[..open];
        let body = s[open + 1..]
            .strip_suffix(')')
            .ok_or_else(|| format!("unclosed '{s}'"))?;
        let ex: Vec<Expr> = body
            .split(',')
            .map(|x| Expr::parse(x.trim()))
            .collect::<Result<_, _>>()?;
        let one = |f: fn(Expr) -> CompTpl| -> Result<CompTpl, String> {
            match ex.as_slice() {
                [a] => Ok(f(a.clone())),
                _ => Err(format!("'{name}' takes one index")),
            }
        };
        let two = |f: fn(Expr, Expr) -> CompTpl| -> Result<CompTpl, String> {
            match ex.as_slice() {
                [a, b] => Ok(f(a.clone(), b.clone())),
                _ => Err(format!("'{name}' takes two indices")),
            }
        };
        match name {
            "phi" => one(CompTpl::Phi),
            "sl" => one(CompTpl::Sl),
            "chi18" => one(CompTpl::Chi18),
            "pair" => two(CompTpl::Pair),
            "chi8" => one(CompTpl::Chi8),
            "vphi" => one(CompTpl::Vphi),
            "vphiN" => one(CompTpl::VphiN),
            "theta" => two(CompTpl::Theta),
            "vartheta" => one(CompTpl::Vartheta),
            "chi3" => one(CompTpl::Chi3),
            "chi4" => one(CompTpl::Chi4),
            "phit" => one(CompTpl::PhiT),
            _ => Err(format!("unknown component '{s}'")),
        }
    }

    fn render(&self) -> String {
        let f = |n: &str, e: &[&Expr]| format!("{n}({})", e.iter().map(|x| x.render()).collect::<Vec<_>>().join(","));
        match self {
            CompTpl::Fixed(c) => match c {
                Comp::One => "1".into(),
                Comp::W => "W".into(),
                Comp::OneC => "1C".into(),
                Comp::OneJ => "1J".into(),
                Comp::St => "St".into(),
                Comp::Lambda => "lambda".into(),
                Comp::Varsigma => "varsigma".into(),
                other => other.to_string(),
            },
            CompTpl::Phi(a) => f("phi", &[a]),
            CompTpl::Sl(a) => f("sl", &[a]),
            CompTpl::Chi18(a) => f("chi18", &[a]),
            CompTpl::Pair(a, b) => f("pair", &[a, b]),
            CompTpl::Chi8(a) => f("chi8", &[a]),
            CompTpl::Vphi(a) => f("vphi", &[a]),
            CompTpl::VphiN(a) => f("vphiN", &[a]),
            CompTpl::Theta(a, b) => f("theta", &[a, b]),
            CompTpl::Vartheta(a) => f("vartheta", &[a]),
            CompTpl::Chi3(a) => f("chi3", &[a]),
            CompTpl::Chi4(a) => f("chi4", &[a]),
            CompTpl::PhiT(a) => f("phit", &[a]),
        }
    }

    fn exprs(&self) -> Vec<&Expr> {
        match self {
            CompTpl::Fixed(_) => vec![],
            CompTpl::Pair(a, b) | CompTpl::Theta(a, b) => vec![a, b],
            CompTpl::Phi(a)
            | CompTpl::Sl(a)
            | CompTpl::Chi18(a)
            | CompTpl::Chi8(a)
            | CompTpl::Vphi(a)
            | CompTpl::VphiN(a)
            | CompTpl::Vartheta(a)
            | CompTpl::Chi3(a)
            | CompTpl::Chi4(a)
            | CompTpl::PhiT(a) => vec![a],
        }
    }

    fn instantiate(&self, env: &Env, r: &PrimeRegime) -> Result<Comp, String> {
        let q = r.q();
        let eps = r.epsilon.unwrap_or(1);
        let class = |k: IndexKind, e: &Expr| {
            let x = e.eval(env) % k.modulus(q);
            canonicalize(k, q, x).map_err(|_| format!("{} = {x} is not in I_{}", e.render(), k.tag()))
        };
        Ok(match self {
            CompTpl::Fixed(c) => c.clone(),
            CompTpl::Phi(a) => {
                let k = IndexKind::q_minus(eps);
                if a.eval(env) % k.modulus(q) == 0 {
                    Comp::One
                } else {
                    Comp::Phi(class(k, a)?)
                }
            }
            CompTpl::Sl(a) => Comp::Sl(class(IndexKind::q_minus(-eps), a)?),
            CompTpl::Chi18(a) => Comp::Chi18(class(IndexKind::Q2Plus1, a)?),
            CompTpl::Pair(a, b) => {
                let k = IndexKind::q_minus(-eps);
                let (x, y) = (class(k, a)?, class(k, b)?);
                Comp::Pair(x.min(y), x.max(y))
            }
            CompTpl::Chi8(a) => Comp::Chi8(class(IndexKind::q3_minus(eps), a)?),
            CompTpl::Vphi(a) => Comp::Phi3(class(IndexKind::q3_minus(eps), a)?),
            CompTpl::VphiN(a) => Comp::Phi3N(class(IndexKind::q_minus(eps), a)?),
            CompTpl::Theta(a, b) => theta(r, a.eval(env), b.eval(env)),
            CompTpl::Vartheta(a) => Comp::Vartheta(class(IndexKind::Q2Plus1, a)?),
            CompTpl::Chi3(a) => Comp::Sp2Chi3(class(IndexKind::QMinus1, a)?),
            CompTpl::Chi4(a) => Comp::Sp2Chi4(class(IndexKind::QPlus1, a)?),
            CompTpl::PhiT(a) => Comp::PhiT(class(IndexKind::q_minus(eps), a)?),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TargetSpec {
    pub parts: Vec<CompTpl>,
    /// Explicit extension tags, paired in the listed order.
    pub tags: Option<Vec<String>>,
}

impl TargetSpec {
    fn parse(s: &str) -> Result<Self, String> {
        let (body, tags) = match s.split_once(" @ ") {
            Some((b, t)) => (b, Some(t.split(',').map(|x| x.trim().to_string()).collect())),
            None => (s, None),
        };
        let parts = body
            .split(" x ")
            .map(|p| CompTpl::parse(p.trim()))
            .collect::<Result<_, _>>()?;
        Ok(TargetSpec { parts, tags })
    }

    fn render(&self) -> String {
        let mut s = self.parts.iter().map(|p| p.render()).collect::<Vec<_>>().join(" x ");
        if let Some(t) = &self.tags {
            s.push_str(" @ ");
            s.push_str(&t.join(","));
        }
        s
    }
}

/// One displayed map line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MapLine {
    pub radical: RadicalTag,
    pub kind: MapKind,
    pub eps: EpsBranch,
    pub domain: DomainSpec,
    pub target: TargetSpec,
    pub vars: Vec<VarDecl>,
    pub conds: Vec<Cond>,
    pub source: String,
    pub line: usize,
}

impl MapLine {
    pub fn render(&self) -> String {
        let mut cs: Vec<String> = self.vars.iter().map(|v| v.render()).collect();
        cs.extend(self.conds.iter().map(|c| c.render()));
        let cs = if cs.is_empty() { "-".to_string() } else { cs.join("; ") };
        format!(
            "{} | {} | {} | {} | {} | {} | {}",
            self.radical,
            self.kind.name(),
            self.eps.render(),
            self.domain.render(),
            self.target.render(),
            cs,
            self.source
        )
    }
}

fn parse_var(s: &str) -> Result<Option<VarDecl>, String> {
    let Some((lhs, rhs)) = s.split_once(':') else {
        return Ok(None);
    };
    let names: Vec<String> = match lhs.strip_prefix('(').and_then(|x| x.strip_suffix(')')) {
        Some(inner) => inner.split(',').map(|x| x.trim().to_string()).collect(),
        None => vec![lhs.trim().to_string()],
    };
    let (rhs, crt) = match rhs.split_once("@crt(") {
        Some((k, c)) => {
            let c = c.strip_suffix(')').ok_or_else(|| format!("unclosed crt in '{s}'"))?;
            let (a, b) = c
                .split_once(',')
                .ok_or_else(|| format!("crt needs two moduli in '{s}'"))?;
            (k, Some((KindTok::parse(a.trim())?, KindTok::parse(b.trim())?)))
        }
        None => (rhs, None),
    };
    let (rhs, starred) = match rhs.strip_suffix('*') {
        Some(r) => (r, true),
        None => (rhs, false),
    };
    let kind_s = match rhs.split_once('^') {
        Some((k, n)) => {
            let n: usize = n.parse().map_err(|_| format!("bad arity in '{s}'"))?;
            if n != names.len() {
                return Err(format!("arity {n} does not match {} names in '{s}'", names.len()));
            }
            k
        }
        None if names.len() == 1 => rhs,
        None => return Err(format!("tuple without arity in '{s}'")),
    };
    Ok(Some(VarDecl {
        names,
        kind: KindTok::parse(kind_s)?,
        starred,
        crt,
    }))
}

/// A parsed map-table file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MapTable {
    pub family: Family,
    pub lines: Vec<MapLine>,
}

impl MapTable {
    pub fn parse(text: &str) -> Result<Self, MapError> {
        let mut family = None;
        let mut lines = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let no = no + 1;
            let t = raw.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let bad = |msg: String| MapError::Malformed { line: no, msg };
            if let Some(g) = t.strip_prefix("@group") {
                family = Some(match g.trim() {
                    "sp6" => Family::Sp6,
                    "sp4" => Family::Sp4,
                    o => return Err(bad(format!("unknown group '{o}'"))),
                });
                continue;
            }
            let f: Vec<&str> = t.split(" | ").map(|x| x.trim()).collect();
            if f.len() != 7 {
                return Err(bad(format!("expected 7 fields, found {}", f.len())));
            }
            let radical = RadicalTag::parse(f[0]).ok_or_else(|| bad(format!("unknown radical '{}'", f[0])))?;
            let kind = match f[1] {
                "omega" => MapKind::Omega,
                "star" => MapKind::Star,
                o => return Err(bad(format!("unknown map '{o}'"))),
            };
            let eps = match f[2] {
                "+" => EpsBranch::Plus,
                "-" => EpsBranch::Minus,
                "*" => EpsBranch::Any,
                o => return Err(bad(format!("unknown eps '{o}'"))),
            };
            let domain = DomainSpec::parse(f[3]).map_err(bad)?;
            let target = TargetSpec::parse(f[4]).map_err(bad)?;
            let mut vars = Vec::new();
            let mut conds = Vec::new();
            if f[5] != "-" {
                for c in f[5].split(';').map(|x| x.trim()).filter(|x| !x.is_empty()) {
                    match parse_var(c).map_err(bad)? {
                        Some(v) => vars.push(v),
                        None => conds.push(Cond::parse(c).map_err(bad)?),
                    }
                }
            }
            if f[6].is_empty() {
                return Err(bad("empty source tag".into()));
            }
            let line = MapLine {
                radical,
                kind,
                eps,
                domain,
                target,
                vars,
                conds,
                source: f[6].to_string(),
                line: no,
            };
            check_scope(&line).map_err(bad)?;
            lines.push(line);
        }
        Ok(MapTable {
            family: family.ok_or(MapError::MissingGroup)?,
            lines,
        })
    }

    pub fn serialize(&self) -> String {
        let mut s = format!(
            "@group {}\n",
            match self.family {
                Family::Sp6 => "sp6",
                Family::Sp4 => "sp4",
            }
        );
        for l in &self.lines {
            s.push_str(&l.render());
            s.push('\n');
        }
        s
    }

    pub fn sp6() -> Self {
        Self::parse(include_str!("../data/sp6_maps.txt")).expect("embedded Sp6 maps parse")
    }

    pub fn sp4() -> Self {
        Self::parse(include_str!("../data/sp4_maps.txt")).expect("embedded Sp4 maps parse")
    }

    pub fn embedded(family: Family) -> Self {
        match family {
            Family::Sp6 => Self::sp6(),
            Family::Sp4 => Self::sp4(),
        }
    }

    /// Cross-checks against the character table and block rules: every
    /// referenced family, series and block exists and has the right arity.
    pub fn validate(&self, table: &CharTable, rules: &BlockRules) -> Vec<String> {
        let mut errs = Vec::new();
        for l in &self.lines {
            let at = |m: String| format!("line {}: {m}", l.line);
            let arity_ok = |fam: u16, n: usize| table.row(fam).map(|r| r.arity == n);
            match &l.domain {
                DomainSpec::Set(v) => {
                    for f in v {
                        match arity_ok(f.family, f.args.len()) {
                            None => errs.push(at(format!("unknown family {}", f.family))),
                            Some(false) => errs.push(at(format!("arity mismatch for chi{}", f.family))),
                            Some(true) => {}
                        }
                    }
                }
                DomainSpec::Family(f) => match arity_ok(f.family, f.args.len()) {
                    None => errs.push(at(format!("unknown family {}", f.family))),
                    Some(false) => errs.push(at(format!("arity mismatch for chi{}", f.family))),
                    Some(true) => {}
                },
                DomainSpec::Series { series, args, minus } => {
                    let fams = table.series_families(*series);
                    if fams.is_empty() {
                        errs.push(at(format!("unknown series {series}")));
                    } else if fams[0].arity != args.len() {
                        errs.push(at(format!("arity mismatch for E{series}")));
                    }
                    for m in minus {
                        if !table.has_family(*m) {
                            errs.push(at(format!("unknown family {m}")));
                        } else if table.series_of(*m) != *series {
                            errs.push(at(format!("chi{m} is not in E{series}")));
                        }
                    }
                }
                DomainSpec::Unipotent(k) if *k > 1 => errs.push(at(format!("unknown unipotent block B{k}"))),
                DomainSpec::Unipotent(_) => {}
                DomainSpec::Block { block, args, .. } => {
                    if args.is_empty() && *block <= 1 {
                        continue;
                    }
                    match rules.decl(*block) {
                        None => errs.push(at(format!("unknown block B{block}"))),
                        Some(d) => {
                            let lead = table.series_families(d.series);
                            if lead.first().map(|r| r.arity) != Some(args.len()) {
                                errs.push(at(format!("arity mismatch for B{block}")));
                            }
                        }
                    }
                }
            }
        }
        errs
    }
}

/// Every index name used is declared, and names are declared once.
fn check_scope(l: &MapLine) -> Result<(), String> {
    let mut declared = BTreeSet::new();
    for v in &l.vars {
        for n in &v.names {
            if !declared.insert(n.clone()) {
                return Err(format!("'{n}' declared twice"));
            }
            if v.crt.is_some() {
                declared.insert(format!("{n}.1"));
                declared.insert(format!("{n}.2"));
            }
        }
    }
    let used = l
        .domain
        .args()
        .into_iter()
        .chain(l.conds.iter().flat_map(|c| c.names()))
        .chain(
            l.target
                .parts
                .iter()
                .flat_map(|p| p.exprs().into_iter().map(|e| &e.var)),
        );
    for n in used {
        if !declared.contains(n) {
            return Err(format!("undeclared index '{n}'"));
        }
    }
    Ok(())
}

type Env = BTreeMap<String, u64>;

/// A domain element: an ordinary character or a Brauer character.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum DomainElem {
    Char(CharLabel),
    Brauer(VirtualChar),
}

impl DomainElem {
    fn sigma(&self, inst: &Instance) -> DomainElem {
        match self {
            DomainElem::Char(c) => DomainElem::Char(inst.sigma(c)),
            DomainElem::Brauer(v) => DomainElem::Brauer(v.sigma(inst)),
        }
    }

    /// Index-free sort key, so the order inside a line is stable under sigma.
    fn key(&self) -> Vec<(u16, i64)> {
        match self {
            DomainElem::Char(c) => vec![(c.family, 1)],
            DomainElem::Brauer(v) => v.terms.iter().map(|(k, c)| (c.family, *k)).collect(),
        }
    }
}

impl fmt::Display for DomainElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainElem::Char(c) => write!(f, "{c}"),
            DomainElem::Brauer(v) => write!(f, "{v}"),
        }
    }
}

/// One instantiation of a line at a binding of its indices.
#[derive(Debug, Clone, Serialize)]
pub struct Piece {
    /// Position of the line in the table.
    pub line: usize,
    pub bindings: Vec<(String, u64)>,
    pub domain: Vec<DomainElem>,
    pub target: Vec<LocalCharLabel>,
    /// The block a star piece draws its Brauer characters from.
    pub block: Option<BlockId>,
    pub error: Option<String>,
}

impl Piece {
    pub fn matched(&self) -> bool {
        self.error.is_none() && self.domain.len() == self.target.len()
    }

    fn describe(&self, table: &MapTable) -> String {
        let b: Vec<String> = self.bindings.iter().map(|(n, v)| format!("{n}={v}")).collect();
        format!("{} [{}]", table.lines[self.line].source, b.join(","))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LineReport {
    pub line: usize,
    pub source: String,
    pub radical: RadicalTag,
    pub kind: MapKind,
    pub pieces: usize,
    pub domain_size: usize,
    pub target_size: usize,
    pub matched: bool,
    pub witness: Option<String>,
}

/// Every applicable line of a table at one regime.
#[derive(Debug, Clone, Serialize)]
pub struct MapInstance {
    pub pieces: Vec<Piece>,
    pub lines: Vec<LineReport>,
}

impl MapInstance {
    pub fn all_matched(&self) -> bool {
        self.lines.iter().all(|l| l.matched)
    }

    /// The explicit bijection of one map kind.
    pub fn pairs(&self, table: &MapTable, kind: MapKind) -> Vec<(&DomainElem, &LocalCharLabel, usize)> {
        self.pieces
            .iter()
            .enumerate()
            .filter(|(_, p)| table.lines[p.line].kind == kind && p.matched())
            .flat_map(|(k, p)| p.domain.iter().zip(&p.target).map(move |(d, t)| (d, t, k)))
            .collect()
    }
}

/// Shared state for instantiating maps at one (group, q, ell).
pub struct MapContext<'a> {
    pub inst: &'a Instance,
    pub regime: &'a PrimeRegime,
    pub rules: &'a BlockRules,
    pub engine: BlockEngine<'a>,
    pub part: BlockPartition,
    pub brauer: BrauerCounts,
    pub index: HashMap<CharLabel, BlockId>,
    pub radicals: Vec<RadicalTag>,
    local: HashMap<(LocalKind, RadicalTag), Vec<LocalCharLabel>>,
    by_parts: HashMap<(LocalKind, RadicalTag, Vec<Comp>), Vec<LocalCharLabel>>,
}

impl<'a> MapContext<'a> {
    pub fn new(
        inst: &'a Instance,
        regime: &'a PrimeRegime,
        rules: &'a BlockRules,
        brauer: Option<&BrauerData>,
    ) -> Result<Self, String> {
        let engine = BlockEngine::new(inst, regime, rules).map_err(|e| e.to_string())?;
        let part = engine.partition();
        let brauer = crate::blocks::brauer_sets(&engine, &part, brauer).map_err(|e| e.to_string())?;
        let index = part.index();
        let radicals: Vec<RadicalTag> = radical_catalog(regime).iter().map(|c| c.tag).collect();
        let mut local = HashMap::new();
        let mut by_parts: HashMap<_, Vec<LocalCharLabel>> = HashMap::new();
        for &rad in &radicals {
            for kind in [LocalKind::Irr0, LocalKind::Dz] {
                let ls = enumerate_local(regime, rad, kind).map_err(|e| e.to_string())?;
                for l in &ls {
                    by_parts
                        .entry((kind, rad, l.parts.clone()))
                        .or_default()
                        .push(l.clone());
                }
                local.insert((kind, rad), ls);
            }
        }
        Ok(MapContext {
            inst,
            regime,
            rules,
            engine,
            part,
            brauer,
            index,
            radicals,
            local,
            by_parts,
        })
    }

    pub fn local(&self, kind: LocalKind, rad: RadicalTag) -> &[LocalCharLabel] {
        self.local.get(&(kind, rad)).map(|v| v.as_slice()).unwrap_or(&[])
    }

    fn applies(&self, l: &MapLine) -> bool {
        self.radicals.contains(&l.radical)
            && l.eps.matches(self.regime)
            && (l.kind == MapKind::Omega || self.regime.divides_q2_minus_1())
            && l.conds
                .iter()
                .all(|c| !matches!(c, Cond::EllIs3(_)) || c.holds(&Env::new(), self.regime))
    }

    fn bindings(&self, l: &MapLine) -> Vec<Env> {
        let q = self.inst.q();
        let eps = self.regime.epsilon.unwrap_or(1);
        let mut envs = vec![Env::new()];
        for v in &l.vars {
            let kind = v.kind.resolve(eps);
            let choices: Vec<Vec<u64>> = if v.names.len() == 1 {
                enumerate_classes(kind, q).into_iter().map(|c| vec![c.rep]).collect()
            } else {
                tuple_classes(kind, q, v.names.len(), v.starred)
                    .into_iter()
                    .map(|t| t.entries.iter().map(|c| c.rep).collect())
                    .collect()
            };
            let mut next = Vec::with_capacity(envs.len() * choices.len());
            for e in &envs {
                for c in &choices {
                    let mut e = e.clone();
                    for (n, x) in v.names.iter().zip(c) {
                        e.insert(n.clone(), *x);
                        if let Some((a, b)) = v.crt {
                            let (a, b) = (a.resolve(eps).modulus(q), b.resolve(eps).modulus(q));
                            let (i1, i2) = crt_split(*x, a, b);
                            e.insert(format!("{n}.1"), i1);
                            e.insert(format!("{n}.2"), i2);
                        }
                    }
                    next.push(e);
                }
            }
            envs = next;
        }
        envs.retain(|e| l.conds.iter().all(|c| c.holds(e, self.regime)));
        envs
    }

    fn label(&self, f: &FamRef, env: &Env) -> Result<CharLabel, String> {
        if self.inst.table.row(f.family).is_none() {
            return Err(format!("unknown family {}", f.family));
        }
        let raw: Vec<u64> = f.args.iter().map(|a| env[a]).collect();
        self.inst
            .label(f.family, &raw)
            .map_err(|e| format!("chi{}: {e}", f.family))
    }

    /// The block named by a star domain at a binding.
    pub fn block_id(&self, block: u16, variant: Option<u8>, args: &[String], env: &Env) -> Result<BlockId, String> {
        if args.is_empty() && block <= 1 {
            return Ok(BlockId::Unipotent(block as u8));
        }
        let decl = self
            .rules
            .decl(block)
            .ok_or_else(|| format!("unknown block B{block}"))?;
        let lead = self.inst.table.series_families(decl.series)[0].id;
        let raw: Vec<u64> = args.iter().map(|a| env[a]).collect();
        let params = self.inst.label(lead, &raw).map_err(|e| format!("B{block}: {e}"))?.idx;
        let exact = BlockId::Series {
            block,
            variant,
            params: params.clone(),
        };
        if self.brauer.sets.contains_key(&exact) || variant.is_none() {
            return Ok(exact);
        }
        // A variant superscript names the block itself when the regime does not split it.
        let plain = BlockId::Series {
            block,
            variant: None,
            params,
        };
        Ok(if self.brauer.sets.contains_key(&plain) {
            plain
        } else {
            exact
        })
    }

    fn domain(&self, l: &MapLine, env: &Env) -> Result<(Vec<DomainElem>, Option<BlockId>), String> {
        let ordered = l.target.tags.is_some();
        let mut out: Vec<DomainElem> = match &l.domain {
            DomainSpec::Set(v) => v
                .iter()
                .map(|f| self.label(f, env).map(DomainElem::Char))
                .collect::<Result<_, _>>()?,
            DomainSpec::Family(f) => vec![DomainElem::Char(self.label(f, env)?)],
            DomainSpec::Series { series, args, minus } => {
                let fams = self.inst.table.series_families(*series);
                if fams.is_empty() {
                    return Err(format!("unknown series {series}"));
                }
                fams.iter()
                    .filter(|r| !minus.contains(&r.id))
                    .map(|r| {
                        self.label(
                            &FamRef {
                                family: r.id,
                                args: args.clone(),
                            },
                            env,
                        )
                        .map(DomainElem::Char)
                    })
                    .collect::<Result<_, _>>()?
            }
            DomainSpec::Unipotent(k) => {
                let want = if *k == 0 {
                    UnipotentTarget::B0
                } else {
                    UnipotentTarget::B1
                };
                self.rules
                    .unipotent
                    .iter()
                    .filter(|u| u.cond.matches(self.regime) && u.target == want)
                    .flat_map(|u| u.unipotents.iter().map(|f| DomainElem::Char(CharLabel::unipotent(*f))))
                    .collect()
            }
            DomainSpec::Block {
                block,
                variant,
                args,
                slice,
            } => {
                let id = self.block_id(*block, *variant, args, env)?;
                let set = self
                    .brauer
                    .sets
                    .get(&id)
                    .ok_or_else(|| format!("{id} is not a positive-defect block"))?;
                let mut v: Vec<DomainElem> = set.iter().cloned().map(DomainElem::Brauer).collect();
                v.sort_by_key(|d| d.key());
                if let Some((a, b)) = slice {
                    if *b > v.len() || a > b {
                        return Err(format!("slice [{a}..{b}] of {id} with {} Brauer characters", v.len()));
                    }
                    v = v[*a..*b].to_vec();
                }
                return Ok((v, Some(id)));
            }
        };
        if !(ordered && matches!(l.domain, DomainSpec::Set(_))) {
            out.sort_by(|a, b| a.key().cmp(&b.key()).then_with(|| a.cmp(b)));
        }
        Ok((out, None))
    }

    fn target(&self, l: &MapLine, env: &Env) -> Result<Vec<LocalCharLabel>, String> {
        let mut parts = l
            .target
            .parts
            .iter()
            .map(|p| p.instantiate(env, self.regime))
            .collect::<Result<Vec<_>, _>>()?;
        canonical_order(l.radical, self.inst.group.family, &mut parts);
        let kind = match l.kind {
            MapKind::Omega => LocalKind::Irr0,
            MapKind::Star => LocalKind::Dz,
        };
        let found = self
            .by_parts
            .get(&(kind, l.radical, parts.clone()))
            .cloned()
            .unwrap_or_default();
        match &l.target.tags {
            None => Ok(found),
            Some(tags) => tags
                .iter()
                .map(|t| {
                    found.iter().find(|x| &x.tag == t).cloned().ok_or_else(|| {
                        let p: Vec<String> = parts.iter().map(|c| c.to_string()).collect();
                        format!("no label ({})/{t}", p.join(" x "))
                    })
                })
                .collect(),
        }
    }

    /// Instantiates the applicable lines of one radical and map kind.
    pub fn instantiate_map(&self, table: &MapTable, radical: RadicalTag, kind: MapKind) -> MapInstance {
        self.instantiate_filtered(table, |l| l.radical == radical && l.kind == kind)
    }

    pub fn instantiate_all(&self, table: &MapTable) -> MapInstance {
        self.instantiate_filtered(table, |_| true)
    }

    fn instantiate_filtered(&self, table: &MapTable, keep: impl Fn(&MapLine) -> bool) -> MapInstance {
        let mut pieces = Vec::new();
        let mut lines = Vec::new();
        for (k, l) in table.lines.iter().enumerate() {
            if !keep(l) || !self.applies(l) {
                continue;
            }
            let start = pieces.len();
            for env in self.bindings(l) {
                let bindings = env
                    .iter()
                    .filter(|(n, _)| !n.contains('.'))
                    .map(|(n, v)| (n.clone(), *v))
                    .collect();
                let (domain, block, mut error) = match self.domain(l, &env) {
                    Ok((d, b)) => (d, b, None),
                    Err(e) => (vec![], None, Some(e)),
                };
                let target = match self.target(l, &env) {
                    Ok(t) => t,
                    Err(e) => {
                        error.get_or_insert(e);
                        vec![]
                    }
                };
                pieces.push(Piece {
                    line: k,
                    bindings,
                    domain,
                    target,
                    block,
                    error,
                });
            }
            let ps = &pieces[start..];
            let bad = ps.iter().find(|p| !p.matched());
            lines.push(LineReport {
                line: l.line,
                source: l.source.clone(),
                radical: l.radical,
                kind: l.kind,
                pieces: ps.len(),
                domain_size: ps.iter().map(|p| p.domain.len()).sum(),
                target_size: ps.iter().map(|p| p.target.len()).sum(),
                matched: bad.is_none(),
                witness: bad.map(|p| {
                    let why = p
                        .error
                        .clone()
                        .unwrap_or_else(|| format!("{} vs {}", p.domain.len(), p.target.len()));
                    format!("{}: {why}", p.describe(table))
                }),
            });
        }
        MapInstance { pieces, lines }
    }

    /// Height-zero characters of the positive-defect blocks.
    pub fn expected_omega_domain(&self) -> BTreeSet<CharLabel> {
        self.part
            .positive_defect()
            .flat_map(|(id, _)| self.part.height_zero(self.inst, id))
            .collect()
    }

    pub fn expected_local(&self, kind: LocalKind) -> BTreeSet<LocalCharLabel> {
        self.radicals
            .iter()
            .flat_map(|r| self.local(kind, *r).iter().cloned())
            .collect()
    }

    fn radical_exp(&self, rad: RadicalTag) -> Option<u32> {
        radical_catalog(self.regime).iter().find(|c| c.tag == rad).map(|c| {
            let mut e = 0;
            let mut n = c.order.clone();
            let l = num_bigint::BigUint::from(self.regime.ell);
            while n > num_bigint::BigUint::from(1u32) {
                n /= &l;
                e += 1;
            }
            e
        })
    }
}

/// Disjointness and coverage of one side of a map kind.
#[derive(Debug, Clone, Default, Serialize)]
pub struct SideReport {
    pub size: usize,
    pub expected: usize,
    pub disjoint: bool,
    pub covered: bool,
    pub witness: Option<String>,
}

fn compare_side<T: Ord + Clone + fmt::Display>(got: &[T], expected: &BTreeSet<T>) -> SideReport {
    let mut seen = BTreeSet::new();
    let mut dup = None;
    for x in got {
        if !seen.insert(x.clone()) && dup.is_none() {
            dup = Some(format!("{x} is hit twice"));
        }
    }
    let missing = expected.difference(&seen).next().map(|x| format!("{x} is not covered"));
    let extra = seen
        .difference(expected)
        .next()
        .map(|x| format!("{x} lies outside the expected set"));
    SideReport {
        size: got.len(),
        expected: expected.len(),
        disjoint: dup.is_none(),
        covered: missing.is_none() && extra.is_none(),
        witness: dup.or(missing).or(extra),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CoverageReport {
    pub lines_matched: bool,
    pub line_witness: Option<String>,
    pub omega_domain: SideReport,
    pub omega_target: SideReport,
    /// Every Omega domain character lies in a block whose defect group has the radical's order.
    pub omega_defect_ok: bool,
    pub omega_defect_witness: Option<String>,
    /// None when ell does not divide q^2 - 1.
    pub star_domain: Option<SideReport>,
    pub star_target: Option<SideReport>,
}

impl CoverageReport {
    pub fn ok(&self) -> bool {
        let side = |s: &SideReport| s.disjoint && s.covered;
        self.lines_matched
            && side(&self.omega_domain)
            && side(&self.omega_target)
            && self.omega_defect_ok
            && self.star_domain.as_ref().is_none_or(side)
            && self.star_target.as_ref().is_none_or(side)
    }

    pub fn witness(&self) -> Option<String> {
        self.line_witness
            .clone()
            .or_else(|| self.omega_domain.witness.clone())
            .or_else(|| self.omega_target.witness.clone())
            .or_else(|| self.omega_defect_witness.clone())
            .or_else(|| self.star_domain.as_ref().and_then(|s| s.witness.clone()))
            .or_else(|| self.star_target.as_ref().and_then(|s| s.witness.clone()))
    }
}

pub fn verify_coverage(ctx: &MapContext, table: &MapTable, mi: &MapInstance) -> CoverageReport {
    let bad = mi.lines.iter().find(|l| !l.matched);
    let side = |kind: MapKind| {
        let ps: Vec<&Piece> = mi.pieces.iter().filter(|p| table.lines[p.line].kind == kind).collect();
        let dom: Vec<DomainElem> = ps.iter().flat_map(|p| p.domain.iter().cloned()).collect();
        let tgt: Vec<LocalCharLabel> = ps.iter().flat_map(|p| p.target.iter().cloned()).collect();
        (dom, tgt)
    };
    let (od, ot) = side(MapKind::Omega);
    let expected_od: BTreeSet<DomainElem> = ctx.expected_omega_domain().into_iter().map(DomainElem::Char).collect();
    let mut defect_witness = None;
    for p in mi.pieces.iter().filter(|p| table.lines[p.line].kind == MapKind::Omega) {
        let rad = table.lines[p.line].radical;
        let want = ctx.radical_exp(rad);
        for d in &p.domain {
            if let DomainElem::Char(c) = d {
                let got = ctx.index.get(c).map(|b| ctx.part.defect_exp[b]);
                if got != want && defect_witness.is_none() {
                    defect_witness = Some(format!("{c} ({rad}): block defect exponent {got:?}, radical {want:?}"));
                }
            }
        }
    }
    let star = ctx.regime.divides_q2_minus_1();
    let (sd, st) = side(MapKind::Star);
    let expected_sd: BTreeSet<DomainElem> = ctx
        .brauer
        .sets
        .values()
        .flat_map(|v| v.iter().cloned().map(DomainElem::Brauer))
        .collect();
    CoverageReport {
        lines_matched: bad.is_none(),
        line_witness: bad.and_then(|l| l.witness.clone()),
        omega_domain: compare_side(&od, &expected_od),
        omega_target: compare_side(&ot, &ctx.expected_local(LocalKind::Irr0)),
        omega_defect_ok: defect_witness.is_none(),
        omega_defect_witness: defect_witness,
        star_domain: star.then(|| compare_side(&sd, &expected_sd)),
        star_target: star.then(|| compare_side(&st, &ctx.expected_local(LocalKind::Dz))),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BawcBlock {
    pub block: BlockId,
    pub ibr: usize,
    /// Star target sizes per radical.
    pub by_radical: BTreeMap<RadicalTag, usize>,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BawcReport {
    pub blocks: Vec<BawcBlock>,
    pub ok: bool,
    pub witness: Option<String>,
}

/// Per block: the star targets drawn from it number exactly its Brauer characters.
pub fn verify_bawc(ctx: &MapContext, table: &MapTable, mi: &MapInstance) -> BawcReport {
    let mut by: BTreeMap<BlockId, BTreeMap<RadicalTag, usize>> = BTreeMap::new();
    for p in &mi.pieces {
        if let (Some(b), MapKind::Star) = (&p.block, table.lines[p.line].kind) {
            *by.entry(b.clone())
                .or_default()
                .entry(table.lines[p.line].radical)
                .or_default() += p.target.len();
        }
    }
    let mut blocks = Vec::new();
    let mut witness = None;
    for (id, set) in &ctx.brauer.sets {
        let by_radical = by.remove(id).unwrap_or_default();
        let total: usize = by_radical.values().sum();
        let ok = total == set.len();
        if !ok && witness.is_none() {
            witness = Some(format!("{id}: {} Brauer characters, {total} weights", set.len()));
        }
        blocks.push(BawcBlock {
            block: id.clone(),
            ibr: set.len(),
            by_radical,
            ok,
        });
    }
    if let Some((id, _)) = by.iter().next() {
        witness.get_or_insert(format!("{id} receives weights but is not a positive-defect block"));
    }
    let ok = witness.is_none();
    BawcReport { blocks, ok, witness }
}

#[derive(Debug, Clone, Serialize)]
pub struct GammaReport {
    /// gamma maps positive-defect blocks to positive-defect blocks, with gamma^2 = sigma.
    pub blocks_ok: bool,
    /// gamma^2 = sigma on the local labels.
    pub local_square_ok: bool,
    /// Per block B, gamma carries the targets of B onto those of gamma(B).
    pub block_targets_ok: bool,
    /// Elementwise on the characters whose image under gamma is pinned.
    pub elementwise_ok: bool,
    pub elementwise_checked: usize,
    pub witness: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EquivarianceReport {
    pub pairs_checked: usize,
    pub sigma_ok: bool,
    /// sigma^a is the identity on both sides of every pair.
    pub sigma_order_ok: bool,
    pub gamma: Option<GammaReport>,
    pub witness: Option<String>,
}

impl EquivarianceReport {
    pub fn ok(&self) -> bool {
        self.sigma_ok
            && self.sigma_order_ok
            && self
                .gamma
                .as_ref()
                .is_none_or(|g| g.blocks_ok && g.local_square_ok && g.block_targets_ok && g.elementwise_ok)
    }
}

pub fn verify_equivariance(ctx: &MapContext, table: &MapTable, mi: &MapInstance) -> EquivarianceReport {
    let r = ctx.regime;
    let inst = ctx.inst;
    let mut witness = None;
    let mut checked = 0;
    let mut order_ok = true;
    let a = inst.q().trailing_zeros();
    for kind in [MapKind::Omega, MapKind::Star] {
        let pairs = mi.pairs(table, kind);
        let map: HashMap<&DomainElem, &LocalCharLabel> = pairs.iter().map(|(d, t, _)| (*d, *t)).collect();
        for (d, t, _) in &pairs {
            checked += 1;
            let sd = d.sigma(inst);
            let st = sigma_on_local(t, r);
            match map.get(&sd) {
                Some(img) if **img == st => {}
                other => {
                    witness.get_or_insert(format!(
                        "{d} -> {t}, but sigma: {sd} -> {} instead of {st}",
                        other.map_or("nothing".to_string(), |x| x.to_string())
                    ));
                }
            }
            let (mut dd, mut tt) = ((*d).clone(), (*t).clone());
            for _ in 0..a {
                dd = dd.sigma(inst);
                tt = sigma_on_local(&tt, r);
            }
            if dd != **d || tt != **t {
                order_ok = false;
                witness.get_or_insert(format!("sigma^{a} moves {d} or {t}"));
            }
        }
    }
    let sigma_ok = witness.is_none();
    let gamma = (inst.group.family == Family::Sp4).then(|| verify_gamma(ctx, table, mi));
    if let Some(g) = &gamma {
        if witness.is_none() {
            witness = g.witness.clone();
        }
    }
    EquivarianceReport {
        pairs_checked: checked,
        sigma_ok,
        sigma_order_ok: order_ok,
        gamma,
        witness,
    }
}

/// gamma on the characters of Sp4(q) where its action is pinned: the
/// unipotent characters (chi3 and chi4 swapped) and chi18(i) -> chi18((q+1)i).
pub fn gamma_char_sp4(inst: &Instance, c: &CharLabel) -> Option<CharLabel> {
    match c.family {
        3 => Some(CharLabel::unipotent(4)),
        4 => Some(CharLabel::unipotent(3)),
        f if c.idx.is_empty() => Some(CharLabel::unipotent(f)),
        18 => inst.label(18, &[c.idx[0].rep * (inst.q() + 1)]).ok(),
        _ => None,
    }
}

fn crt_combine(r1: u64, m1: u64, r2: u64, m2: u64) -> u64 {
    let t = ((r2 % m2 + m2 - r1 % m2) % m2) * inv_mod(m1 % m2, m2) % m2;
    r1 + m1 * t
}

/// gamma on the blocks of Sp4(q).
pub fn gamma_block_sp4(inst: &Instance, b: &BlockId) -> Option<BlockId> {
    let q = inst.q();
    let BlockId::Series { block, variant, params } = b else {
        return Some(b.clone());
    };
    let r: Vec<u64> = params.iter().map(|c| c.rep).collect();
    let mk = |nb: u16, fam: u16, raw: Vec<u64>| {
        inst.label(fam, &raw).ok().map(|l| BlockId::Series {
            block: nb,
            variant: *variant,
            params: l.idx,
        })
    };
    match block {
        7 => mk(11, 11, vec![r[0]]),
        11 => mk(7, 7, vec![2 * r[0]]),
        9 => mk(13, 13, vec![r[0]]),
        13 => mk(9, 9, vec![2 * r[0]]),
        15 | 19 => {
            let md = params[0].kind.modulus(q);
            mk(*block, *block, vec![(r[0] + r[1]) % md, (r[0] + md - r[1]) % md])
        }
        16 => mk(17, 17, vec![r[0] % (q - 1), r[0] % (q + 1)]),
        17 => mk(
            16,
            16,
            vec![crt_combine(2 * r[0] % (q - 1), q - 1, 2 * r[1] % (q + 1), q + 1)],
        ),
        18 => mk(18, 18, vec![r[0] * (q + 1)]),
        _ => None,
    }
}

fn sigma_block(inst: &Instance, rules: &BlockRules, b: &BlockId) -> Option<BlockId> {
    match b {
        BlockId::Series { block, variant, params } => {
            let lead = inst.table.series_families(rules.decl(*block)?.series)[0].id;
            let raw: Vec<u64> = params.iter().map(|c| 2 * c.rep).collect();
            inst.label(lead, &raw).ok().map(|l| BlockId::Series {
                block: *block,
                variant: *variant,
                params: l.idx,
            })
        }
        other => Some(other.clone()),
    }
}

fn verify_gamma(ctx: &MapContext, table: &MapTable, mi: &MapInstance) -> GammaReport {
    let inst = ctx.inst;
    let r = ctx.regime;
    let mut witness: Option<String> = None;
    let mut blocks_ok = true;
    for (id, _) in ctx.part.positive_defect() {
        let g = gamma_block_sp4(inst, id);
        let gg = g.as_ref().and_then(|x| gamma_block_sp4(inst, x));
        let in_part = g
            .as_ref()
            .is_some_and(|x| ctx.part.defect_exp.get(x).is_some_and(|e| *e > 0));
        if !in_part || gg != sigma_block(inst, ctx.rules, id) {
            blocks_ok = false;
            witness.get_or_insert(format!("gamma on {id}: {g:?}, gamma^2 {gg:?}"));
        }
    }
    let mut local_square_ok = true;
    for rad in &ctx.radicals {
        for kind in [LocalKind::Irr0, LocalKind::Dz] {
            for l in ctx.local(kind, *rad) {
                let gg = gamma_on_local_sp4(&gamma_on_local_sp4(l, r), r);
                if gg != sigma_on_local(l, r) {
                    local_square_ok = false;
                    witness.get_or_insert(format!("gamma^2({l}) = {gg}"));
                }
            }
        }
    }
    let mut block_targets_ok = true;
    let mut elementwise_ok = true;
    let mut elementwise_checked = 0;
    for kind in [MapKind::Omega, MapKind::Star] {
        let pairs = mi.pairs(table, kind);
        let mut by_block: BTreeMap<BlockId, BTreeSet<LocalCharLabel>> = BTreeMap::new();
        let map: HashMap<&DomainElem, &LocalCharLabel> = pairs.iter().map(|(d, t, _)| (*d, *t)).collect();
        for (d, t, k) in &pairs {
            let b = match (d, &mi.pieces[*k].block) {
                (_, Some(b)) => Some(b.clone()),
                (DomainElem::Char(c), None) => ctx.index.get(c).cloned(),
                _ => None,
            };
            if let Some(b) = b {
                by_block.entry(b).or_default().insert((*t).clone());
            }
            let single = match d {
                DomainElem::Char(c) => Some(c),
                DomainElem::Brauer(v) if v.terms.len() == 1 && v.terms[0].0 == 1 => Some(&v.terms[0].1),
                _ => None,
            };
            if let Some(gc) = single.and_then(|c| gamma_char_sp4(inst, c)) {
                elementwise_checked += 1;
                let gd = match d {
                    DomainElem::Char(_) => DomainElem::Char(gc),
                    DomainElem::Brauer(_) => DomainElem::Brauer(VirtualChar::single(gc)),
                };
                let want = gamma_on_local_sp4(t, r);
                if map.get(&gd).map(|x| (*x).clone()) != Some(want.clone()) {
                    elementwise_ok = false;
                    witness.get_or_insert(format!("{d} -> {t}, but gamma: {gd} should map to {want}"));
                }
            }
        }
        for (b, ts) in &by_block {
            let Some(gb) = gamma_block_sp4(inst, b) else { continue };
            let image: BTreeSet<LocalCharLabel> = ts.iter().map(|t| gamma_on_local_sp4(t, r)).collect();
            if by_block.get(&gb) != Some(&image) {
                block_targets_ok = false;
                witness.get_or_insert(format!("{} targets of {b} do not map onto those of {gb}", kind.name()));
            }
        }
    }
    GammaReport {
        blocks_ok,
        local_square_ok,
        block_targets_ok,
        elementwise_ok,
        elementwise_checked,
        witness,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct McKayReport {
    pub sylow: Option<RadicalTag>,
    pub global: usize,
    pub local: usize,
    pub ok: bool,
}

/// |Irr_ell'(G)| against |Irr_ell'(N_G(P))| for the Sylow radical P.
pub fn verify_mckay(inst: &Instance, r: &PrimeRegime) -> McKayReport {
    let global = inst.count_ell_prime(r);
    let sylow = radical_catalog(r).into_iter().find(|c| c.is_sylow).map(|c| c.tag);
    let local = sylow
        .and_then(|s| enumerate_local(r, s, LocalKind::IrrEllPrime).ok())
        .map_or(0, |v| v.len());
    McKayReport {
        sylow,
        global,
        local,
        ok: sylow.is_some() && global == local,
    }
}
