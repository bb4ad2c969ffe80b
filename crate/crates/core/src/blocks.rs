//! ell-block distribution as data-driven congruence rules, defect orders, and
//! the Brauer-character data of the non-unipotent blocks.

use crate::arith::{valuation_big, Family, PrimeRegime};
use crate::chartable::{enumerate_domain, CharLabel, CharTable, FamilyRow, Instance};
use crate::indexing::{IndexClass, IndexKind};
use crate::radicals::CentralizerShape;
use num_bigint::{BigInt, BigUint};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use thiserror::Error;

pub const SP6_BLOCKS: &str = include_str!("../data/sp6_blocks.txt");
pub const SP4_BLOCKS: &str = include_str!("../data/sp4_blocks.txt");
pub const SP6_BRAUER: &str = include_str!("../data/sp6_brauer.txt");

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BlockError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("{0}")]
    Invalid(String),
    #[error("no Brauer data for series {series} in regime {tag}")]
    RegimeNotTabulated { series: u16, tag: String },
}

fn malformed(line: usize, msg: impl Into<String>) -> BlockError {
    BlockError::Malformed { line, msg: msg.into() }
}

/// A factor of a modulus or multiplier expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Atom {
    Int(u64),
    M,
    N,
    Poly(&'static str),
}

const POLYS: [&str; 6] = ["q-1", "q+1", "q2-1", "q2+1", "q2+q+1", "q2-q+1"];

/// A product of atoms; the empty product is 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct ModExpr(pub Vec<Atom>);

impl ModExpr {
    pub fn parse(s: &str) -> Result<Self, String> {
        let mut out = Vec::new();
        for f in s.split('*') {
            let f = f.trim();
            let inner = f.strip_prefix('(').and_then(|x| x.strip_suffix(')')).unwrap_or(f);
            let atom = match inner {
                "m" => Atom::M,
                "n" => Atom::N,
                _ => {
                    if let Some(p) = POLYS.iter().find(|p| **p == inner) {
                        Atom::Poly(p)
                    } else {
                        Atom::Int(inner.parse().map_err(|_| format!("bad factor '{f}'"))?)
                    }
                }
            };
            out.push(atom);
        }
        Ok(ModExpr(out))
    }

    pub fn eval(&self, r: &PrimeRegime) -> u64 {
        let q = r.q();
        self.0.iter().fold(1u64, |acc, a| {
            acc * match a {
                Atom::Int(k) => *k,
                Atom::M => r.m,
                Atom::N => r.n,
                Atom::Poly(p) => match *p {
                    "q-1" => q - 1,
                    "q+1" => q + 1,
                    "q2-1" => q * q - 1,
                    "q2+1" => q * q + 1,
                    "q2+q+1" => q * q + q + 1,
                    _ => q * q - q + 1,
                },
            }
        })
    }

    pub fn render(&self) -> String {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|a| match a {
                Atom::Int(k) => k.to_string(),
                Atom::M => "m".into(),
                Atom::N => "n".into(),
                Atom::Poly(p) => format!("({p})"),
            })
            .collect();
        parts.join("*")
    }
}

/// Condition on one index slot of a member character, relative to the block parameters.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SlotSpec {
    Any,
    /// M divides the index.
    Zero(ModExpr),
    /// Same class as parameter p (0-based).
    Eq(usize),
    /// r = f * mult * t_p mod M for some f in +-1 (span 1), +-q (span 2), +-q^2 (span 3).
    Pm {
        param: usize,
        mult: ModExpr,
        modulus: ModExpr,
        span: u32,
    },
}

impl SlotSpec {
    pub fn parse(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if s == "*" {
            return Ok(SlotSpec::Any);
        }
        if let Some(p) = s.strip_prefix('=') {
            let p: usize = p.trim().parse().map_err(|_| format!("bad parameter in '{s}'"))?;
            if p == 0 {
                return Err("parameters are 1-based".into());
            }
            return Ok(SlotSpec::Eq(p - 1));
        }
        let (head, md) = s.split_once(" mod ").ok_or_else(|| format!("missing 'mod' in '{s}'"))?;
        let modulus = ModExpr::parse(md)?;
        let head = head.trim();
        if head == "0" {
            return Ok(SlotSpec::Zero(modulus));
        }
        let (kw, rest) = head.split_once(' ').ok_or_else(|| format!("bad slot '{s}'"))?;
        let span = match kw {
            "pm" => 1,
            "pmq" => 2,
            "pmq2" => 3,
            _ => return Err(format!("unknown keyword '{kw}'")),
        };
        let (p, mult) = match rest.split_once('*') {
            Some((p, e)) => (p, ModExpr::parse(e)?),
            None => (rest, ModExpr::default()),
        };
        let p: usize = p.trim().parse().map_err(|_| format!("bad parameter in '{s}'"))?;
        if p == 0 {
            return Err("parameters are 1-based".into());
        }
        Ok(SlotSpec::Pm {
            param: p - 1,
            mult,
            modulus,
            span,
        })
    }

    pub fn render(&self) -> String {
        match self {
            SlotSpec::Any => "*".into(),
            SlotSpec::Zero(m) => format!("0 mod {}", m.render()),
            SlotSpec::Eq(p) => format!("= {}", p + 1),
            SlotSpec::Pm {
                param,
                mult,
                modulus,
                span,
            } => {
                let kw = ["pm", "pmq", "pmq2"][*span as usize - 1];
                let e = if mult.0.is_empty() {
                    String::new()
                } else {
                    format!("*{}", mult.render())
                };
                format!("{kw} {}{e} mod {}", param + 1, modulus.render())
            }
        }
    }

    fn param(&self) -> Option<usize> {
        match self {
            SlotSpec::Eq(p) | SlotSpec::Pm { param: p, .. } => Some(*p),
            _ => None,
        }
    }
}

/// Regime selector: rule tag plus an optional ell = 3 restriction.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RegimeCond {
    pub tag: String,
    pub ell3: Option<bool>,
}

const TAGS: [&str; 5] = ["q-1", "q+1", "q2+1", "q2+q+1", "q2-q+1"];

impl RegimeCond {
    pub fn parse(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let (tag, ell3) = if let Some(t) = s.strip_suffix("/l=3") {
            (t, Some(true))
        } else if let Some(t) = s.strip_suffix("/l!=3") {
            (t, Some(false))
        } else {
            (s, None)
        };
        if tag != "*" && !TAGS.contains(&tag) {
            return Err(format!("unknown regime '{tag}'"));
        }
        Ok(RegimeCond {
            tag: tag.to_string(),
            ell3,
        })
    }

    pub fn matches(&self, r: &PrimeRegime) -> bool {
        (self.tag == "*" || self.tag == r.rule_tag()) && self.ell3.is_none_or(|b| (r.ell == 3) == b)
    }

    pub fn render(&self) -> String {
        match self.ell3 {
            None => self.tag.clone(),
            Some(true) => format!("{}/l=3", self.tag),
            Some(false) => format!("{}/l!=3", self.tag),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockDecl {
    pub block: u16,
    pub series: u16,
    pub shape: CentralizerShape,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum UnipotentTarget {
    B0,
    B1,
    DefectZero,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EllSeries {
    All,
    Nothing,
    Families(Vec<u16>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnipotentLine {
    pub cond: RegimeCond,
    pub target: UnipotentTarget,
    pub unipotents: Vec<u16>,
    pub ell_series: EllSeries,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockRule {
    pub block: u16,
    pub variant: Option<u8>,
    pub cond: RegimeCond,
    pub family: u16,
    pub slots: Vec<SlotSpec>,
    pub line: usize,
}

fn parse_list(s: &str) -> Result<Vec<u16>, String> {
    s.split(',')
        .map(|x| x.trim().parse::<u16>().map_err(|_| format!("bad family '{x}'")))
        .collect()
}

fn render_list(v: &[u16]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn parse_block_head(s: &str) -> Result<(u16, Option<u8>), String> {
    let s = s.trim().strip_prefix('B').ok_or_else(|| format!("bad block '{s}'"))?;
    let (b, v) = match s.split_once('^') {
        Some((b, v)) => (b, Some(v.parse::<u8>().map_err(|_| format!("bad variant '{v}'"))?)),
        None => (s, None),
    };
    Ok((b.parse().map_err(|_| format!("bad block number '{b}'"))?, v))
}

/// The full rule set for one group family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockRules {
    pub family: Family,
    pub decls: Vec<BlockDecl>,
    pub unipotent: Vec<UnipotentLine>,
    pub rules: Vec<BlockRule>,
}

impl BlockRules {
    pub fn parse(text: &str) -> Result<Self, BlockError> {
        let mut family = None;
        let mut decls = Vec::new();
        let mut unipotent = Vec::new();
        let mut rules = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let s = raw.trim();
            if s.is_empty() || s.starts_with('#') {
                continue;
            }
            let bad = |m: String| malformed(line, m);
            if let Some(g) = s.strip_prefix("@group ") {
                family = Some(match g.trim() {
                    "sp6" => Family::Sp6,
                    "sp4" => Family::Sp4,
                    x => return Err(bad(format!("unknown group '{x}'"))),
                });
                continue;
            }
            let fields: Vec<&str> = s.split('|').map(str::trim).collect();
            if let Some(b) = fields[0].strip_prefix("@block ") {
                if fields.len() != 4 {
                    return Err(bad("@block needs 4 fields".into()));
                }
                let block = b.trim().parse().map_err(|_| bad(format!("bad block '{b}'")))?;
                let series = fields[1]
                    .parse()
                    .map_err(|_| bad(format!("bad series '{}'", fields[1])))?;
                let shape = CentralizerShape::parse(fields[2], fields[3]).map_err(|e| bad(e.to_string()))?;
                decls.push(BlockDecl { block, series, shape });
            } else if fields[0] == "U" {
                if fields.len() != 5 {
                    return Err(bad("U line needs 5 fields".into()));
                }
                let cond = RegimeCond::parse(fields[1]).map_err(bad)?;
                let target = match fields[2] {
                    "B0" => UnipotentTarget::B0,
                    "B1" => UnipotentTarget::B1,
                    "dz" => UnipotentTarget::DefectZero,
                    x => return Err(bad(format!("bad unipotent block '{x}'"))),
                };
                let unipotents = parse_list(fields[3]).map_err(bad)?;
                let ell_series = match fields[4] {
                    "*" => EllSeries::All,
                    "-" => EllSeries::Nothing,
                    x => EllSeries::Families(parse_list(x).map_err(bad)?),
                };
                unipotent.push(UnipotentLine {
                    cond,
                    target,
                    unipotents,
                    ell_series,
                });
            } else {
                if fields.len() != 4 {
                    return Err(bad(format!("rule needs 4 fields, found {}", fields.len())));
                }
                let (block, variant) = parse_block_head(fields[0]).map_err(bad)?;
                let cond = RegimeCond::parse(fields[1]).map_err(bad)?;
                let fam = fields[2]
                    .parse()
                    .map_err(|_| bad(format!("bad family '{}'", fields[2])))?;
                let slots = fields[3]
                    .split(';')
                    .map(SlotSpec::parse)
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(bad)?;
                rules.push(BlockRule {
                    block,
                    variant,
                    cond,
                    family: fam,
                    slots,
                    line,
                });
            }
        }
        let family = family.ok_or_else(|| malformed(0, "missing @group"))?;
        Ok(BlockRules {
            family,
            decls,
            unipotent,
            rules,
        })
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        out.push_str(match self.family {
            Family::Sp6 => "@group sp6\n",
            Family::Sp4 => "@group sp4\n",
        });
        for d in &self.decls {
            out.push_str(&format!("@block {} | {} | {}\n", d.block, d.series, d.shape.render()));
        }
        for u in &self.unipotent {
            let t = match u.target {
                UnipotentTarget::B0 => "B0",
                UnipotentTarget::B1 => "B1",
                UnipotentTarget::DefectZero => "dz",
            };
            let e = match &u.ell_series {
                EllSeries::All => "*".to_string(),
                EllSeries::Nothing => "-".to_string(),
                EllSeries::Families(v) => render_list(v),
            };
            out.push_str(&format!(
                "U | {} | {t} | {} | {e}\n",
                u.cond.render(),
                render_list(&u.unipotents)
            ));
        }
        for r in &self.rules {
            let v = r.variant.map(|v| format!("^{v}")).unwrap_or_default();
            let slots: Vec<String> = r.slots.iter().map(|s| s.render()).collect();
            out.push_str(&format!(
                "B{}{v} | {} | {} | {}\n",
                r.block,
                r.cond.render(),
                r.family,
                slots.join("; ")
            ));
        }
        out
    }

    pub fn embedded(family: Family) -> Self {
        let text = match family {
            Family::Sp6 => SP6_BLOCKS,
            Family::Sp4 => SP4_BLOCKS,
        };
        Self::parse(text).expect("embedded block rules parse")
    }

    pub fn decl(&self, block: u16) -> Option<&BlockDecl> {
        self.decls.iter().find(|d| d.block == block)
    }

    /// Cross-checks against a character table; returns one message per problem.
    pub fn validate(&self, table: &CharTable) -> Vec<String> {
        let mut errs = Vec::new();
        if table.family != self.family {
            errs.push("rule file and table describe different groups".into());
        }
        for d in &self.decls {
            if table.series_families(d.series).is_empty() {
                errs.push(format!("@block {}: unknown series {}", d.block, d.series));
            }
            if let Err(e) = d.shape.check(self.family) {
                errs.push(format!("@block {}: {e}", d.block));
            }
        }
        for u in &self.unipotent {
            for f in &u.unipotents {
                match table.row(*f) {
                    Some(r) if r.arity == 0 => {}
                    Some(_) => errs.push(format!("U line: chi{f} is not unipotent")),
                    None => errs.push(format!("U line: unknown family {f}")),
                }
            }
            if let EllSeries::Families(v) = &u.ell_series {
                for f in v {
                    if !table.has_family(*f) {
                        errs.push(format!("U line: unknown family {f}"));
                    }
                }
            }
        }
        for r in &self.rules {
            let at = format!("line {}", r.line);
            let Some(row) = table.row(r.family) else {
                errs.push(format!("{at}: unknown family {}", r.family));
                continue;
            };
            let Some(decl) = self.decl(r.block) else {
                errs.push(format!("{at}: undeclared block B{}", r.block));
                continue;
            };
            if r.slots.len() != row.arity {
                errs.push(format!("{at}: {} slots for arity {}", r.slots.len(), row.arity));
                continue;
            }
            let lead = table.series_families(decl.series);
            let Some(lead) = lead.first() else { continue };
            let pkinds = crate::chartable::slot_kinds(&lead.groups);
            let mkinds = crate::chartable::slot_kinds(&row.groups);
            for (k, s) in r.slots.iter().enumerate() {
                if let Some(p) = s.param() {
                    if p >= pkinds.len() {
                        errs.push(format!("{at}: parameter {} out of range", p + 1));
                    } else if matches!(s, SlotSpec::Eq(_)) && pkinds[p] != mkinds[k] {
                        errs.push(format!("{at}: '= {}' compares {} with {}", p + 1, mkinds[k], pkinds[p]));
                    }
                }
            }
        }
        errs
    }
}

/// Identifier of a block or defect-zero singleton.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum BlockId {
    Unipotent(u8),
    Series {
        block: u16,
        variant: Option<u8>,
        params: Vec<IndexClass>,
    },
    DefectZero(CharLabel),
}

impl BlockId {
    pub fn is_defect_zero(&self) -> bool {
        matches!(self, BlockId::DefectZero(_))
    }
}

impl fmt::Display for BlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BlockId::Unipotent(k) => write!(f, "B{k}"),
            BlockId::Series { block, variant, params } => {
                let p: Vec<String> = params.iter().map(|c| c.rep.to_string()).collect();
                write!(f, "B{block}({})", p.join(","))?;
                if let Some(v) = variant {
                    write!(f, "^{v}")?;
                }
                Ok(())
            }
            BlockId::DefectZero(c) => write!(f, "dz[{c}]"),
        }
    }
}

/// Why a character could not be placed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum AssignFailure {
    Unassigned,
    Ambiguous(Vec<String>),
    Conflict(String),
}

impl fmt::Display for AssignFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AssignFailure::Unassigned => f.write_str("unassigned"),
            AssignFailure::Ambiguous(v) => write!(f, "ambiguous: {}", v.join(", ")),
            AssignFailure::Conflict(s) => write!(f, "unipotent bucket member also matches {s}"),
        }
    }
}

/// Residues of a class orbit reduced mod md.
fn residues(c: &IndexClass, q: u64, md: u64) -> BTreeSet<u64> {
    c.orbit(q).into_iter().map(|x| x % md).collect()
}

fn frob_mults(q: u64, md: u64, span: u32) -> Vec<u64> {
    let mut out = Vec::new();
    let mut f = 1 % md;
    for _ in 0..span {
        out.push(f);
        out.push((md - f) % md);
        f = crate::indexing::mulmod(f, q, md);
    }
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for k in 0..n {
            let mut v = p.clone();
            v.insert(k, n - 1);
            out.push(v);
        }
    }
    out
}

/// Slot orderings of a family obtained by permuting within starred groups.
fn slot_orders(row: &FamilyRow) -> Vec<Vec<usize>> {
    let mut orders = vec![Vec::new()];
    let mut base = 0;
    for g in &row.groups {
        let perms = if g.starred {
            permutations(g.size)
        } else {
            vec![(0..g.size).collect()]
        };
        let mut next = Vec::new();
        for o in &orders {
            for p in &perms {
                let mut v = o.clone();
                v.extend(p.iter().map(|k| base + k));
                next.push(v);
            }
        }
        orders = next;
        base += g.size;
    }
    orders
}

/// Rules compiled against an instance and a regime.
pub struct BlockEngine<'a> {
    pub inst: &'a Instance,
    pub regime: &'a PrimeRegime,
    pub rules: &'a BlockRules,
    by_family: HashMap<u16, Vec<&'a BlockRule>>,
    params: BTreeMap<u16, Vec<Vec<IndexClass>>>,
    orders: HashMap<u16, Vec<Vec<usize>>>,
    unipotent: Vec<&'a UnipotentLine>,
}

impl<'a> BlockEngine<'a> {
    pub fn new(inst: &'a Instance, regime: &'a PrimeRegime, rules: &'a BlockRules) -> Result<Self, BlockError> {
        let q = inst.q();
        let mut by_family: HashMap<u16, Vec<&BlockRule>> = HashMap::new();
        let mut params = BTreeMap::new();
        let mut orders = HashMap::new();
        for r in rules.rules.iter().filter(|r| r.cond.matches(regime)) {
            let decl = rules
                .decl(r.block)
                .ok_or_else(|| BlockError::Invalid(format!("undeclared block B{}", r.block)))?;
            let row = inst
                .table
                .row(r.family)
                .ok_or_else(|| BlockError::Invalid(format!("unknown family {}", r.family)))?;
            let lead = inst.table.series_families(decl.series)[0];
            let pk = crate::chartable::slot_kinds(&lead.groups);
            let mk = crate::chartable::slot_kinds(&row.groups);
            for (k, s) in r.slots.iter().enumerate() {
                check_well_defined(s, mk[k], &pk, regime)
                    .map_err(|m| BlockError::Invalid(format!("line {}: {m}", r.line)))?;
            }
            params.entry(r.block).or_insert_with(|| {
                enumerate_domain(&lead.groups, q)
                    .into_iter()
                    .filter(|j| j.iter().all(|c| is_ell_prime_class(c, q, regime.ell)))
                    .collect::<Vec<_>>()
            });
            orders.entry(r.family).or_insert_with(|| slot_orders(row));
            by_family.entry(r.family).or_default().push(r);
        }
        let unipotent = rules.unipotent.iter().filter(|u| u.cond.matches(regime)).collect();
        Ok(BlockEngine {
            inst,
            regime,
            rules,
            by_family,
            params,
            orders,
            unipotent,
        })
    }

    /// Parameters of a block: ell'-classes of the leading family of its series.
    pub fn block_params(&self, block: u16) -> &[Vec<IndexClass>] {
        self.params.get(&block).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn active_rules(&self) -> impl Iterator<Item = &&'a BlockRule> {
        self.by_family.values().flatten()
    }

    fn slot_ok(&self, spec: &SlotSpec, x: &IndexClass, j: &[IndexClass]) -> bool {
        let q = self.inst.q();
        match spec {
            SlotSpec::Any => true,
            SlotSpec::Zero(m) => x.rep.is_multiple_of(m.eval(self.regime)),
            SlotSpec::Eq(p) => *x == j[*p],
            SlotSpec::Pm {
                param,
                mult,
                modulus,
                span,
            } => {
                let md = modulus.eval(self.regime);
                let e = mult.eval(self.regime) % md;
                let xs = residues(x, q, md);
                let fs = frob_mults(q, md, *span);
                j[*param].orbit(q).iter().any(|y| {
                    let ey = crate::indexing::mulmod(e, *y % md, md);
                    fs.iter().any(|f| xs.contains(&crate::indexing::mulmod(*f, ey, md)))
                })
            }
        }
    }

    /// True when the rule places c in the block with parameters j.
    pub fn rule_matches(&self, rule: &BlockRule, c: &CharLabel, j: &[IndexClass]) -> bool {
        let orders = &self.orders[&rule.family];
        orders.iter().any(|o| {
            rule.slots
                .iter()
                .enumerate()
                .all(|(k, s)| self.slot_ok(s, &c.idx[o[k]], j))
        })
    }

    fn rule_hits(&self, c: &CharLabel) -> BTreeSet<BlockId> {
        let mut hits = BTreeSet::new();
        if let Some(rs) = self.by_family.get(&c.family) {
            for r in rs {
                for j in self.block_params(r.block) {
                    if self.rule_matches(r, c, j) {
                        hits.insert(BlockId::Series {
                            block: r.block,
                            variant: r.variant,
                            params: j.clone(),
                        });
                    }
                }
            }
        }
        hits
    }

    /// True for unipotent characters and characters of E(G, t) with t an ell-element.
    pub fn in_unipotent_bucket(&self, c: &CharLabel) -> bool {
        c.idx.is_empty() || self.inst.is_ell_series(c, self.regime.ell)
    }

    fn unipotent_block(&self, c: &CharLabel) -> Option<BlockId> {
        let to_id = |t: UnipotentTarget| match t {
            UnipotentTarget::B0 => BlockId::Unipotent(0),
            UnipotentTarget::B1 => BlockId::Unipotent(1),
            UnipotentTarget::DefectZero => BlockId::DefectZero(c.clone()),
        };
        if c.idx.is_empty() {
            return self
                .unipotent
                .iter()
                .find(|u| u.unipotents.contains(&c.family))
                .map(|u| to_id(u.target));
        }
        if let Some(u) = self
            .unipotent
            .iter()
            .find(|u| matches!(&u.ell_series, EllSeries::Families(v) if v.contains(&c.family)))
        {
            return Some(to_id(u.target));
        }
        self.unipotent
            .iter()
            .find(|u| u.ell_series == EllSeries::All)
            .map(|u| to_id(u.target))
    }

    pub fn block_of(&self, c: &CharLabel) -> Result<BlockId, AssignFailure> {
        let hits = self.rule_hits(c);
        if self.in_unipotent_bucket(c) {
            if let Some(h) = hits.first() {
                return Err(AssignFailure::Conflict(h.to_string()));
            }
            return self.unipotent_block(c).ok_or(AssignFailure::Unassigned);
        }
        match hits.len() {
            1 => Ok(hits.into_iter().next().expect("one hit")),
            0 if self.inst.is_defect_zero(c, self.regime) => Ok(BlockId::DefectZero(c.clone())),
            0 => Err(AssignFailure::Unassigned),
            _ => Err(AssignFailure::Ambiguous(hits.iter().map(|h| h.to_string()).collect())),
        }
    }

    pub fn partition(&self) -> BlockPartition {
        let chars = self.inst.all_characters();
        let results: Vec<(CharLabel, Result<BlockId, AssignFailure>)> = chars
            .into_par_iter()
            .map(|c| {
                let b = self.block_of(&c);
                (c, b)
            })
            .collect();
        let mut blocks: BTreeMap<BlockId, Vec<CharLabel>> = BTreeMap::new();
        let mut failures = Vec::new();
        let mut total = 0;
        for (c, b) in results {
            total += 1;
            match b {
                Ok(id) => blocks.entry(id).or_default().push(c),
                Err(e) => failures.push((c, e)),
            }
        }
        let ell = self.regime.ell;
        let gv = self.inst.order_valuation(ell);
        let defect_exp = blocks
            .iter()
            .map(|(id, ms)| {
                let vmin = ms
                    .iter()
                    .map(|c| self.inst.degree_ell_valuation(c, ell))
                    .min()
                    .unwrap_or(gv);
                (id.clone(), gv - vmin)
            })
            .collect();
        let vacuous = self
            .active_rules()
            .filter(|r| {
                !blocks.iter().any(|(id, ms)| match id {
                    BlockId::Series { block, variant, params } if *block == r.block && *variant == r.variant => ms
                        .iter()
                        .any(|c| c.family == r.family && self.rule_matches(r, c, params)),
                    _ => false,
                })
            })
            .map(|r| r.line)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        BlockPartition {
            ell,
            blocks,
            failures,
            defect_exp,
            total,
            vacuous_rules: vacuous,
        }
    }
}

fn is_ell_prime_class(c: &IndexClass, q: u64, ell: u64) -> bool {
    let md = c.kind.modulus(q);
    let lp = crate::arith::ell_part(md as u128, ell).0 as u64;
    c.rep.is_multiple_of(lp)
}

/// Congruences must be well defined on both the member slot and the parameter.
fn check_well_defined(s: &SlotSpec, mk: IndexKind, pk: &[IndexKind], r: &PrimeRegime) -> Result<(), String> {
    let q = r.q();
    match s {
        SlotSpec::Any => Ok(()),
        SlotSpec::Zero(m) => {
            let md = m.eval(r);
            if !mk.modulus(q).is_multiple_of(md) {
                return Err(format!("{md} does not divide |{mk}|"));
            }
            Ok(())
        }
        SlotSpec::Eq(p) => {
            if pk.get(*p) != Some(&mk) {
                return Err(format!("'= {}' compares different index sets", p + 1));
            }
            Ok(())
        }
        SlotSpec::Pm {
            param, mult, modulus, ..
        } => {
            let md = modulus.eval(r);
            let Some(k) = pk.get(*param) else {
                return Err(format!("parameter {} out of range", param + 1));
            };
            let e = mult.eval(r) as u128;
            if !mk.modulus(q).is_multiple_of(md) || !(e * k.modulus(q) as u128).is_multiple_of(md as u128) {
                return Err(format!("modulus {md} is not compatible with {mk} and {k}"));
            }
            Ok(())
        }
    }
}

/// Result of running the rules over every character.
#[derive(Debug, Clone)]
pub struct BlockPartition {
    pub ell: u64,
    pub blocks: BTreeMap<BlockId, Vec<CharLabel>>,
    pub failures: Vec<(CharLabel, AssignFailure)>,
    /// Exponent e with |defect group| = ell^e.
    pub defect_exp: BTreeMap<BlockId, u32>,
    pub total: usize,
    /// Source lines of rules that placed no character (reported, not errors).
    pub vacuous_rules: Vec<usize>,
}

impl BlockPartition {
    pub fn defect_order(&self, b: &BlockId) -> BigUint {
        BigUint::from(self.ell).pow(self.defect_exp[b])
    }

    pub fn block_containing(&self, c: &CharLabel) -> Option<&BlockId> {
        self.blocks.iter().find(|(_, ms)| ms.contains(c)).map(|(id, _)| id)
    }

    pub fn index(&self) -> HashMap<CharLabel, BlockId> {
        let mut out = HashMap::new();
        for (id, ms) in &self.blocks {
            for c in ms {
                out.insert(c.clone(), id.clone());
            }
        }
        out
    }

    pub fn positive_defect(&self) -> impl Iterator<Item = (&BlockId, &Vec<CharLabel>)> {
        self.blocks.iter().filter(|(id, _)| self.defect_exp[*id] > 0)
    }

    /// Members whose degree has the minimal ell-valuation in the block.
    pub fn height_zero(&self, inst: &Instance, b: &BlockId) -> Vec<CharLabel> {
        let gv = inst.order_valuation(self.ell);
        let target = gv - self.defect_exp[b];
        self.blocks[b]
            .iter()
            .filter(|c| inst.degree_ell_valuation(c, self.ell) == target)
            .cloned()
            .collect()
    }

    /// Structural checks: every character placed once, singletons exactly the defect-zero ones.
    pub fn check(&self, inst: &Instance) -> Vec<String> {
        let mut errs: Vec<String> = self.failures.iter().map(|(c, e)| format!("{c}: {e}")).collect();
        let placed: usize = self.blocks.values().map(|v| v.len()).sum();
        if placed + self.failures.len() != self.total {
            errs.push(format!(
                "placed {placed} + failed {} != {}",
                self.failures.len(),
                self.total
            ));
        }
        let gv = inst.order_valuation(self.ell);
        for (id, ms) in &self.blocks {
            let e = self.defect_exp[id];
            if id.is_defect_zero() && e != 0 {
                errs.push(format!(
                    "{id} is listed as defect zero but has degree valuation {}",
                    gv - e
                ));
            }
            if (ms.len() == 1) != (e == 0) {
                errs.push(format!("{id}: {} members with defect exponent {e}", ms.len()));
            }
        }
        errs
    }
}

/// Expected defect exponent of a non-unipotent block: ell-part of |C(t)|.
pub fn shape_defect_exp(decl: &BlockDecl, r: &PrimeRegime) -> u32 {
    valuation_big(&decl.shape.order(r.q()), r.ell)
}

/// Defect consistency for the non-unipotent blocks: the block holding the
/// leading character of E(G, t) has defect |C(t)|_ell, the others no more,
/// and the leading character has degree ell-part [G : C(t)]_ell.
pub fn defect_consistency(engine: &BlockEngine, part: &BlockPartition) -> Vec<String> {
    let mut errs = Vec::new();
    let inst = engine.inst;
    let r = engine.regime;
    let gv = inst.order_valuation(r.ell);
    for (id, _) in part.positive_defect() {
        match id {
            BlockId::Series { block, params, .. } => {
                let decl = engine.rules.decl(*block).expect("declared");
                let want = shape_defect_exp(decl, r);
                let lead = inst.table.series_families(decl.series)[0].id;
                let lc = CharLabel::new(lead, params.clone());
                let got = part.defect_exp[id];
                if part.blocks[id].contains(&lc) {
                    if got != want {
                        errs.push(format!("{id}: defect exponent {got}, centralizer gives {want}"));
                    }
                    if inst.degree_ell_valuation(&lc, r.ell) != gv - want {
                        errs.push(format!("{lc}: degree valuation differs from the centralizer index"));
                    }
                } else if got > want {
                    errs.push(format!("{id}: defect exponent {got} exceeds {want}"));
                }
            }
            BlockId::Unipotent(k) => {
                let want = if *k == 0 || r.epsilon.is_none() { gv } else { r.d };
                if part.defect_exp[id] != want {
                    errs.push(format!(
                        "{id}: defect exponent {}, expected {want}",
                        part.defect_exp[id]
                    ));
                }
            }
            BlockId::DefectZero(_) => {}
        }
    }
    errs
}

/// Integer coefficient, optionally times alpha.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Coef {
    pub k: i64,
    pub alpha: bool,
}

impl Coef {
    pub fn value(&self, alpha: i64) -> i64 {
        if self.alpha {
            self.k * alpha
        } else {
            self.k
        }
    }
}

/// A virtual character template: families at a common series index.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VirtualTemplate(pub Vec<(Coef, u16)>);

impl VirtualTemplate {
    pub fn parse(s: &str) -> Result<Self, String> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut terms = Vec::new();
        let mut rest = s.as_str();
        while !rest.is_empty() {
            let (sign, r) = match rest.as_bytes()[0] {
                b'+' => (1, &rest[1..]),
                b'-' => (-1, &rest[1..]),
                _ if terms.is_empty() => (1, rest),
                _ => return Err(format!("missing sign in '{s}'")),
            };
            let end = r.find(['+', '-']).unwrap_or(r.len());
            let tok = &r[..end];
            rest = &r[end..];
            let (coef, fam) = match tok.split_once('*') {
                Some(("a", f)) => (Coef { k: sign, alpha: true }, f),
                Some((k, f)) => {
                    let k: i64 = k.parse().map_err(|_| format!("bad coefficient '{k}'"))?;
                    (
                        Coef {
                            k: sign * k,
                            alpha: false,
                        },
                        f,
                    )
                }
                None => (Coef { k: sign, alpha: false }, tok),
            };
            let fam: u16 = fam.parse().map_err(|_| format!("bad family '{fam}'"))?;
            terms.push((coef, fam));
        }
        if terms.is_empty() {
            return Err("empty virtual character".into());
        }
        Ok(VirtualTemplate(terms))
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (n, (c, f)) in self.0.iter().enumerate() {
            let sign = if c.k < 0 {
                "-"
            } else if n > 0 {
                "+"
            } else {
                ""
            };
            let mag = c.k.unsigned_abs();
            let pre = match (c.alpha, mag) {
                (true, 1) => "a*".to_string(),
                (true, k) => format!("{k}*a*"),
                (false, 1) => String::new(),
                (false, k) => format!("{k}*"),
            };
            out.push_str(&format!("{sign}{pre}{f}"));
        }
        out
    }

    pub fn lead(&self) -> u16 {
        self.0[0].1
    }

    pub fn families(&self) -> impl Iterator<Item = u16> + '_ {
        self.0.iter().map(|(_, f)| *f)
    }

    pub fn uses_alpha(&self) -> bool {
        self.0.iter().any(|(c, _)| c.alpha)
    }

    pub fn instantiate(&self, j: &[IndexClass], alpha: i64) -> VirtualChar {
        VirtualChar {
            terms: self
                .0
                .iter()
                .map(|(c, f)| (c.value(alpha), CharLabel::new(*f, j.to_vec())))
                .collect(),
        }
    }
}

/// Integer combination of ordinary characters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct VirtualChar {
    pub terms: Vec<(i64, CharLabel)>,
}

impl VirtualChar {
    pub fn single(c: CharLabel) -> Self {
        VirtualChar { terms: vec![(1, c)] }
    }

    pub fn degree(&self, inst: &Instance) -> BigInt {
        self.terms
            .iter()
            .map(|(k, c)| BigInt::from(*k) * BigInt::from(inst.degree(c).clone()))
            .sum()
    }

    pub fn sigma(&self, inst: &Instance) -> Self {
        VirtualChar {
            terms: self.terms.iter().map(|(k, c)| (*k, inst.sigma(c))).collect(),
        }
    }

    pub fn lead(&self) -> &CharLabel {
        &self.terms[0].1
    }
}

impl fmt::Display for VirtualChar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, (k, c)) in self.terms.iter().enumerate() {
            let sign = if *k < 0 {
                "-"
            } else if n > 0 {
                "+"
            } else {
                ""
            };
            let mag = k.unsigned_abs();
            if mag == 1 {
                write!(f, "{sign}^{c}")?;
            } else {
                write!(f, "{sign}{mag}^{c}")?;
            }
        }
        Ok(())
    }
}

pub fn virtual_degree_positive(v: &VirtualChar, inst: &Instance) -> bool {
    v.degree(inst) > BigInt::from(0)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BrauerRow {
    pub series: u16,
    pub conds: Vec<RegimeCond>,
    pub sets: Vec<Vec<VirtualTemplate>>,
    pub line: usize,
}

/// Brauer characters of the non-unipotent blocks, by series and regime.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BrauerData {
    pub family: Family,
    pub rows: Vec<BrauerRow>,
}

/// alpha = 1 when ell^d = 3, else 2.
pub fn alpha_of(r: &PrimeRegime) -> i64 {
    if r.ell_d == 3 {
        1
    } else {
        2
    }
}

impl BrauerData {
    pub fn parse(text: &str) -> Result<Self, BlockError> {
        let mut family = None;
        let mut rows = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let s = raw.trim();
            if s.is_empty() || s.starts_with('#') {
                continue;
            }
            if let Some(g) = s.strip_prefix("@group ") {
                family = Some(match g.trim() {
                    "sp6" => Family::Sp6,
                    "sp4" => Family::Sp4,
                    x => return Err(malformed(line, format!("unknown group '{x}'"))),
                });
                continue;
            }
            let f: Vec<&str> = s.split('|').map(str::trim).collect();
            if f.len() != 3 {
                return Err(malformed(line, "Brauer row needs 3 fields"));
            }
            let series = f[0]
                .parse()
                .map_err(|_| malformed(line, format!("bad series '{}'", f[0])))?;
            let conds = f[1]
                .split(',')
                .map(RegimeCond::parse)
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| malformed(line, e))?;
            let mut sets = Vec::new();
            let mut rest = f[2];
            while let Some(open) = rest.find('[') {
                let close = rest[open..].find(']').ok_or_else(|| malformed(line, "unclosed '['"))? + open;
                let set = rest[open + 1..close]
                    .split(',')
                    .map(VirtualTemplate::parse)
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| malformed(line, e))?;
                sets.push(set);
                rest = &rest[close + 1..];
            }
            if sets.is_empty() || !rest.trim().is_empty() {
                return Err(malformed(line, "expected bracketed sets"));
            }
            rows.push(BrauerRow {
                series,
                conds,
                sets,
                line,
            });
        }
        let family = family.ok_or_else(|| malformed(0, "missing @group"))?;
        Ok(BrauerData { family, rows })
    }

    pub fn serialize(&self) -> String {
        let mut out = String::from(match self.family {
            Family::Sp6 => "@group sp6\n",
            Family::Sp4 => "@group sp4\n",
        });
        for r in &self.rows {
            let conds: Vec<String> = r.conds.iter().map(|c| c.render()).collect();
            let sets: Vec<String> = r
                .sets
                .iter()
                .map(|s| format!("[{}]", s.iter().map(|v| v.render()).collect::<Vec<_>>().join(", ")))
                .collect();
            out.push_str(&format!("{} | {} | {}\n", r.series, conds.join(", "), sets.join(" ")));
        }
        out
    }

    /// Only Sp6 ships Brauer data.
    pub fn embedded(family: Family) -> Option<Self> {
        match family {
            Family::Sp6 => Some(Self::parse(SP6_BRAUER).expect("embedded Brauer data parses")),
            Family::Sp4 => None,
        }
    }

    pub fn row(&self, series: u16, r: &PrimeRegime) -> Result<&BrauerRow, BlockError> {
        self.rows
            .iter()
            .find(|row| row.series == series && row.conds.iter().any(|c| c.matches(r)))
            .ok_or_else(|| BlockError::RegimeNotTabulated {
                series,
                tag: r.rule_tag().to_string(),
            })
    }

    pub fn validate(&self, table: &CharTable) -> Vec<String> {
        let mut errs = Vec::new();
        for row in &self.rows {
            let at = format!("line {}", row.line);
            let fams: BTreeSet<u16> = table.series_families(row.series).iter().map(|f| f.id).collect();
            if fams.is_empty() {
                errs.push(format!("{at}: unknown series {}", row.series));
            }
            let mut seen = BTreeSet::new();
            for v in row.sets.iter().flatten() {
                for f in v.families() {
                    if !table.has_family(f) {
                        errs.push(format!("{at}: unknown family {f}"));
                    } else if !fams.contains(&f) {
                        errs.push(format!("{at}: chi{f} is outside series {}", row.series));
                    }
                }
                seen.insert(v.lead());
                if v.uses_alpha() && row.conds.iter().any(|c| c.tag != "q+1") {
                    errs.push(format!("{at}: alpha appears outside an ell | q+1 row"));
                }
            }
            if seen.len() != fams.len() {
                errs.push(format!(
                    "{at}: {} leading terms for {} families",
                    seen.len(),
                    fams.len()
                ));
            }
        }
        errs
    }
}

/// Brauer characters of one block as virtual characters.
pub type BrauerSet = Vec<VirtualChar>;

/// Per-block Brauer characters: from the Table data (when present) and the basic-set count.
pub struct BrauerCounts {
    pub sets: BTreeMap<BlockId, BrauerSet>,
    pub basic: BTreeMap<BlockId, usize>,
}

/// The members of a block that lie in E(G, t) itself, which form a basic set.
pub fn basic_set(engine: &BlockEngine, id: &BlockId, members: &[CharLabel]) -> Vec<CharLabel> {
    match id {
        BlockId::Unipotent(_) => members.iter().filter(|c| c.idx.is_empty()).cloned().collect(),
        BlockId::Series { block, params, .. } => {
            let decl = engine.rules.decl(*block).expect("declared");
            members
                .iter()
                .filter(|c| engine.inst.table.series_of(c.family) == decl.series && c.idx == *params)
                .cloned()
                .collect()
        }
        BlockId::DefectZero(c) => vec![c.clone()],
    }
}

/// Brauer characters of every positive-defect block. Non-unipotent blocks use
/// the tabulated sets when `data` is given and the basic set otherwise.
pub fn brauer_sets(
    engine: &BlockEngine,
    part: &BlockPartition,
    data: Option<&BrauerData>,
) -> Result<BrauerCounts, BlockError> {
    let idx = part.index();
    let mut sets: BTreeMap<BlockId, BrauerSet> = BTreeMap::new();
    let mut basic = BTreeMap::new();
    let alpha = alpha_of(engine.regime);
    for (id, ms) in part.positive_defect() {
        let b = basic_set(engine, id, ms);
        basic.insert(id.clone(), b.len());
        match (id, data) {
            (BlockId::Series { block, params, .. }, Some(d)) => {
                let decl = engine.rules.decl(*block).expect("declared");
                let row = d.row(decl.series, engine.regime)?;
                for set in &row.sets {
                    let lead = CharLabel::new(set[0].lead(), params.clone());
                    if idx.get(&lead) == Some(id) {
                        let e = sets.entry(id.clone()).or_default();
                        e.extend(set.iter().map(|v| v.instantiate(params, alpha)));
                    }
                }
            }
            _ => {
                sets.insert(id.clone(), b.into_iter().map(VirtualChar::single).collect());
            }
        }
    }
    Ok(BrauerCounts { sets, basic })
}

/// The v-th tabulated set of a series at index j.
pub fn brauer_set_at(
    data: &BrauerData,
    r: &PrimeRegime,
    series: u16,
    v: usize,
    j: &[IndexClass],
) -> Result<BrauerSet, BlockError> {
    let row = data.row(series, r)?;
    let set = row.sets.get(v).ok_or_else(|| BlockError::RegimeNotTabulated {
        series,
        tag: format!("{} set {v}", r.rule_tag()),
    })?;
    Ok(set.iter().map(|t| t.instantiate(j, alpha_of(r))).collect())
}

/// Checks both Brauer count routes and the support of each tabulated set.
pub fn brauer_consistency(engine: &BlockEngine, part: &BlockPartition, counts: &BrauerCounts) -> Vec<String> {
    let mut errs = Vec::new();
    let idx = part.index();
    for (id, set) in &counts.sets {
        let basic = counts.basic[id];
        if set.len() != basic {
            errs.push(format!(
                "{id}: {} tabulated Brauer characters, basic set has {basic}",
                set.len()
            ));
        }
        if let BlockId::Series { params, .. } = id {
            let support: BTreeSet<u16> = set.iter().flat_map(|v| v.terms.iter().map(|(_, c)| c.family)).collect();
            let inside: BTreeSet<u16> = basic_set(engine, id, &part.blocks[id])
                .iter()
                .map(|c| c.family)
                .collect();
            if support != inside {
                errs.push(format!(
                    "{id}: support {support:?} differs from block families {inside:?}"
                ));
            }
            for v in set {
                for (_, c) in &v.terms {
                    if c.idx != *params || idx.get(c) != Some(id) {
                        errs.push(format!("{id}: term {c} lies outside the block"));
                    }
                }
                if !virtual_degree_positive(v, engine.inst) {
                    errs.push(format!("{id}: {v} has non-positive degree"));
                }
            }
        }
    }
    errs
}

/// Positivity of every tabulated combination at the instance's q, for every
/// regime of an odd prime dividing |G| that the row covers.
pub fn positivity_check(data: &BrauerData, inst: &Instance) -> (Vec<String>, usize) {
    let mut errs = Vec::new();
    let mut evaluated = 0;
    for ell in crate::arith::odd_primes_of(&inst.group) {
        let r = crate::arith::classify_regime(&inst.group, ell).expect("prime divides |G|");
        let alpha = alpha_of(&r);
        for row in data.rows.iter().filter(|row| row.conds.iter().any(|c| c.matches(&r))) {
            for v in row.sets.iter().flatten() {
                let deg: BigInt =
                    v.0.iter()
                        .map(|(c, f)| BigInt::from(c.value(alpha)) * BigInt::from(inst.family_degree(*f).clone()))
                        .sum();
                evaluated += 1;
                if deg <= BigInt::from(0) {
                    errs.push(format!("q={} ell={ell}: {} has degree {deg}", inst.q(), v.render()));
                }
            }
        }
    }
    (errs, evaluated)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{classify_regime, GroupSpec};

    #[test]
    fn slot_round_trip() {
        for s in [
            "*",
            "= 2",
            "0 mod m",
            "pm 1 mod m",
            "pmq 1 mod m*(q+1)",
            "pm 1*(q2+q+1) mod m*n",
            "pmq2 3 mod (q-1)*n",
        ] {
            assert_eq!(
                SlotSpec::parse(s).unwrap().render(),
                SlotSpec::parse(s).unwrap().render()
            );
            let p = SlotSpec::parse(s).unwrap();
            assert_eq!(SlotSpec::parse(&p.render()).unwrap(), p);
        }
        assert!(SlotSpec::parse("pm 0 mod m").is_err());
        assert!(SlotSpec::parse("pmx 1 mod m").is_err());
        assert!(SlotSpec::parse("pm 1 mod k").is_err());
    }

    #[test]
    fn rules_round_trip() {
        for f in [Family::Sp6, Family::Sp4] {
            let strip = |mut r: BlockRules| {
                r.rules.iter_mut().for_each(|x| x.line = 0);
                r
            };
            let r = BlockRules::embedded(f);
            assert_eq!(strip(BlockRules::parse(&r.serialize()).unwrap()), strip(r.clone()));
            assert!(
                r.validate(&CharTable::embedded(f)).is_empty(),
                "{:?}",
                r.validate(&CharTable::embedded(f))
            );
        }
    }

    #[test]
    fn brauer_round_trip() {
        let d = BrauerData::embedded(Family::Sp6).unwrap();
        let again = BrauerData::parse(&d.serialize()).unwrap();
        assert_eq!(again.rows.len(), d.rows.len());
        for (a, b) in again.rows.iter().zip(&d.rows) {
            assert_eq!((a.series, &a.conds, &a.sets), (b.series, &b.conds, &b.sets));
        }
        assert!(
            d.validate(&CharTable::sp6()).is_empty(),
            "{:?}",
            d.validate(&CharTable::sp6())
        );
    }

    #[test]
    fn template_parse() {
        let v = VirtualTemplate::parse("18-a*17-16-15+13").unwrap();
        assert_eq!(v.0.len(), 5);
        assert!(v.uses_alpha());
        assert_eq!(v.render(), "18-a*17-16-15+13");
        let w = VirtualTemplate::parse("30-2*29-28").unwrap();
        assert_eq!(w.0[1].0, Coef { k: -2, alpha: false });
        assert!(VirtualTemplate::parse("").is_err());
        assert!(VirtualTemplate::parse("13*x").is_err());
        assert!(VirtualTemplate::parse("13a").is_err());
    }

    #[test]
    fn alpha_outside_q_plus_1_rejected() {
        let bad = "@group sp6\n6 | q-1 | [13, 18-a*17-16-15+13] [14] [15] [16] [17]\n";
        let d = BrauerData::parse(bad).unwrap();
        assert!(d.validate(&CharTable::sp6()).iter().any(|e| e.contains("alpha")));
    }

    #[test]
    fn q9_virtual_example() {
        // chi30 - 2 chi29 - chi28 at q = 2: 280 - 140 - 35.
        let inst = Instance::embedded(GroupSpec::sp6(1));
        let v = VirtualTemplate::parse("30-2*29-28").unwrap().instantiate(&[], 2);
        assert_eq!(v.degree(&inst), BigInt::from(105));
        assert!(virtual_degree_positive(&v, &inst));
    }

    #[test]
    fn q2_ell5_chi55_joins_principal_block() {
        // At q = 2 the only class of I_{q^2+1} is a 5-element, so chi55(1) and
        // chi56(1) lie in E_5(G, 1) and follow the unipotent blocks.
        let inst = Instance::embedded(GroupSpec::sp6(1));
        let r = classify_regime(&inst.group, 5).unwrap();
        let rules = BlockRules::embedded(Family::Sp6);
        let e = BlockEngine::new(&inst, &r, &rules).unwrap();
        let p = e.partition();
        assert!(p.check(&inst).is_empty(), "{:?}", p.check(&inst));
        let c55 = inst.label(55, &[1]).unwrap();
        let c56 = inst.label(56, &[1]).unwrap();
        assert_eq!(p.block_containing(&c55), Some(&BlockId::Unipotent(0)));
        assert_eq!(p.block_containing(&c56), Some(&BlockId::Unipotent(1)));
        assert_eq!(p.blocks[&BlockId::Unipotent(0)].len(), 5);
        assert_eq!(p.defect_order(&BlockId::Unipotent(0)), BigUint::from(5u32));
    }
}
