//! Generic character tables: families with index kinds and degree polynomials,
//! instantiated at a concrete q.

use crate::arith::{group_order, valuation_big, DegreePolynomial, Family, GroupSpec, PrimeRegime};
use crate::indexing::{canonicalize, enumerate_classes, sigma_double, tuple_classes, IndexClass, IndexKind};
use num_bigint::BigUint;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

pub const SP6_TABLE: &str = include_str!("../data/sp6_table.txt");
pub const SP4_TABLE: &str = include_str!("../data/sp4_table.txt");

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("unknown series {0}")]
    InvalidSeries(u16),
    #[error("unknown family {0}")]
    UnknownFamily(u16),
}

fn malformed(line: usize, msg: impl Into<String>) -> TableError {
    TableError::Malformed { line, msg: msg.into() }
}

/// A run of slots drawn from one index set: a single class, or k distinct
/// classes (ordered, or unordered when starred).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct KindGroup {
    pub kind: IndexKind,
    pub size: usize,
    pub starred: bool,
}

impl KindGroup {
    pub fn parse(s: &str) -> Result<Self, String> {
        let (k, rest) = match s.split_once('^') {
            Some((k, r)) => (k, Some(r)),
            None => (s, None),
        };
        let kind = IndexKind::parse(k).map_err(|e| e.to_string())?;
        let (size, starred) = match rest {
            None => (1, false),
            Some(r) => {
                let starred = r.ends_with('*');
                let n: usize = r
                    .trim_end_matches('*')
                    .parse()
                    .map_err(|_| format!("bad group size in '{s}'"))?;
                if !(1..=3).contains(&n) {
                    return Err(format!("group size {n} out of range"));
                }
                (n, starred)
            }
        };
        Ok(KindGroup { kind, size, starred })
    }

    pub fn render(&self) -> String {
        match (self.size, self.starred) {
            (1, false) => self.kind.tag().to_string(),
            (n, s) => format!("{}^{}{}", self.kind.tag(), n, if s { "*" } else { "" }),
        }
    }
}

pub fn parse_kinds(s: &str) -> Result<Vec<KindGroup>, String> {
    if s == "-" {
        return Ok(Vec::new());
    }
    s.split_whitespace().map(KindGroup::parse).collect()
}

pub fn render_kinds(groups: &[KindGroup]) -> String {
    if groups.is_empty() {
        return "-".into();
    }
    groups.iter().map(|g| g.render()).collect::<Vec<_>>().join(" ")
}

/// Slot kinds, one per index slot.
pub fn slot_kinds(groups: &[KindGroup]) -> Vec<IndexKind> {
    groups
        .iter()
        .flat_map(|g| std::iter::repeat_n(g.kind, g.size))
        .collect()
}

/// All index tuples for a group layout, each a flat list of classes.
pub fn enumerate_domain(groups: &[KindGroup], q: u64) -> Vec<Vec<IndexClass>> {
    let mut acc: Vec<Vec<IndexClass>> = vec![Vec::new()];
    for g in groups {
        let parts: Vec<Vec<IndexClass>> = if g.size == 1 {
            enumerate_classes(g.kind, q).into_iter().map(|c| vec![c]).collect()
        } else {
            tuple_classes(g.kind, q, g.size, g.starred)
                .into_iter()
                .map(|t| t.entries)
                .collect()
        };
        let mut next = Vec::with_capacity(acc.len() * parts.len());
        for a in &acc {
            for p in &parts {
                let mut v = a.clone();
                v.extend_from_slice(p);
                next.push(v);
            }
        }
        acc = next;
    }
    acc
}

/// Puts a flat index list into canonical form: starred runs sorted.
pub fn normalize_indices(groups: &[KindGroup], idx: &mut [IndexClass]) {
    let mut at = 0;
    for g in groups {
        if g.starred {
            idx[at..at + g.size].sort();
        }
        at += g.size;
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyRow {
    pub id: u16,
    pub arity: usize,
    pub groups: Vec<KindGroup>,
    pub degree: DegreePolynomial,
    pub series: u16,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharTable {
    pub family: Family,
    pub rows: Vec<FamilyRow>,
    by_id: BTreeMap<u16, usize>,
}

impl CharTable {
    pub fn parse(text: &str) -> Result<Self, TableError> {
        let mut family = None;
        let mut rows = Vec::new();
        let mut by_id = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let s = raw.trim();
            if s.is_empty() || s.starts_with('#') {
                continue;
            }
            if let Some(g) = s.strip_prefix("@group") {
                family = Some(match g.trim() {
                    "sp6" => Family::Sp6,
                    "sp4" => Family::Sp4,
                    other => return Err(malformed(line, format!("unknown group '{other}'"))),
                });
                continue;
            }
            let f: Vec<&str> = s.split('|').map(str::trim).collect();
            if f.len() != 5 {
                return Err(malformed(line, format!("expected 5 fields, got {}", f.len())));
            }
            let id: u16 = f[0].parse().map_err(|_| malformed(line, "bad family id"))?;
            let arity: usize = f[1].parse().map_err(|_| malformed(line, "bad arity"))?;
            let groups = parse_kinds(f[2]).map_err(|e| malformed(line, e))?;
            if slot_kinds(&groups).len() != arity {
                return Err(malformed(line, "arity does not match kinds"));
            }
            let (num, den) = f[3]
                .split_once('/')
                .ok_or_else(|| malformed(line, "degree needs a denominator"))?;
            let coeffs = num
                .split(',')
                .map(|c| c.trim().parse::<i64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| malformed(line, "bad coefficient"))?;
            let den: u32 = den.trim().parse().map_err(|_| malformed(line, "bad denominator"))?;
            if den != 1 && den != 2 {
                return Err(malformed(line, "denominator must be 1 or 2"));
            }
            let series: u16 = f[4].parse().map_err(|_| malformed(line, "bad series id"))?;
            if by_id.insert(id, rows.len()).is_some() {
                return Err(malformed(line, format!("duplicate family {id}")));
            }
            rows.push(FamilyRow {
                id,
                arity,
                groups,
                degree: DegreePolynomial::new(coeffs, den),
                series,
            });
        }
        let family = family.ok_or_else(|| malformed(0, "missing @group line"))?;
        Ok(CharTable { family, rows, by_id })
    }

    pub fn serialize(&self) -> String {
        let mut out = format!("@group {}\n", self.family);
        for r in &self.rows {
            let c: Vec<String> = r.degree.coeffs.iter().map(|c| c.to_string()).collect();
            out.push_str(&format!(
                "{} | {} | {} | {}/{} | {}\n",
                r.id,
                r.arity,
                render_kinds(&r.groups),
                c.join(","),
                r.degree.den,
                r.series
            ));
        }
        out
    }

    pub fn sp6() -> Self {
        Self::parse(SP6_TABLE).expect("embedded Sp6 table parses")
    }

    pub fn sp4() -> Self {
        Self::parse(SP4_TABLE).expect("embedded Sp4 table parses")
    }

    pub fn embedded(family: Family) -> Self {
        match family {
            Family::Sp6 => Self::sp6(),
            Family::Sp4 => Self::sp4(),
        }
    }

    pub fn row(&self, id: u16) -> Option<&FamilyRow> {
        self.by_id.get(&id).map(|i| &self.rows[*i])
    }

    pub fn has_family(&self, id: u16) -> bool {
        self.by_id.contains_key(&id)
    }

    pub fn series_ids(&self) -> Vec<u16> {
        let mut s: Vec<u16> = self.rows.iter().map(|r| r.series).collect();
        s.dedup();
        s
    }

    pub fn series_families(&self, series: u16) -> Vec<&FamilyRow> {
        self.rows.iter().filter(|r| r.series == series).collect()
    }

    pub fn series_of(&self, family: u16) -> u16 {
        self.row(family).expect("known family").series
    }
}

/// A character: family id plus canonical index classes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CharLabel {
    pub family: u16,
    pub idx: Vec<IndexClass>,
}

impl CharLabel {
    pub fn unipotent(family: u16) -> Self {
        CharLabel {
            family,
            idx: Vec::new(),
        }
    }

    pub fn new(family: u16, idx: Vec<IndexClass>) -> Self {
        CharLabel { family, idx }
    }

    pub fn reps(&self) -> Vec<u64> {
        self.idx.iter().map(|c| c.rep).collect()
    }
}

impl fmt::Display for CharLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "chi{}", self.family)?;
        if !self.idx.is_empty() {
            let r: Vec<String> = self.idx.iter().map(|c| c.rep.to_string()).collect();
            write!(f, "({})", r.join(","))?;
        }
        Ok(())
    }
}

/// A table instantiated at a concrete q, with cached degrees.
#[derive(Debug, Clone)]
pub struct Instance {
    pub group: GroupSpec,
    pub table: CharTable,
    pub order: BigUint,
    degrees: BTreeMap<u16, BigUint>,
}

impl Instance {
    pub fn new(group: GroupSpec, table: CharTable) -> Result<Self, crate::arith::ArithError> {
        assert_eq!(group.family, table.family, "table does not match group");
        let mut degrees = BTreeMap::new();
        for r in &table.rows {
            degrees.insert(r.id, r.degree.eval(group.q)?);
        }
        Ok(Instance {
            group,
            order: group_order(&group),
            table,
            degrees,
        })
    }

    pub fn embedded(group: GroupSpec) -> Self {
        Self::new(group, CharTable::embedded(group.family)).expect("embedded table evaluates")
    }

    pub fn q(&self) -> u64 {
        self.group.q
    }

    pub fn family_degree(&self, family: u16) -> &BigUint {
        &self.degrees[&family]
    }

    pub fn degree(&self, c: &CharLabel) -> &BigUint {
        self.family_degree(c.family)
    }

    pub fn degree_ell_valuation(&self, c: &CharLabel, ell: u64) -> u32 {
        valuation_big(self.degree(c), ell)
    }

    pub fn degree_ell_part(&self, c: &CharLabel, ell: u64) -> BigUint {
        BigUint::from(ell).pow(self.degree_ell_valuation(c, ell))
    }

    pub fn order_valuation(&self, ell: u64) -> u32 {
        valuation_big(&self.order, ell)
    }

    pub fn is_defect_zero(&self, c: &CharLabel, r: &PrimeRegime) -> bool {
        self.degree_ell_valuation(c, r.ell) == self.order_valuation(r.ell)
    }

    pub fn family_labels(&self, family: u16) -> Vec<CharLabel> {
        let row = self.table.row(family).expect("known family");
        enumerate_domain(&row.groups, self.q())
            .into_iter()
            .map(|idx| CharLabel::new(family, idx))
            .collect()
    }

    pub fn all_characters(&self) -> Vec<CharLabel> {
        self.table.rows.iter().flat_map(|r| self.family_labels(r.id)).collect()
    }

    /// Members of the series E_i(J) in table order.
    pub fn series_members(&self, series: u16, j: &[IndexClass]) -> Result<Vec<CharLabel>, TableError> {
        let fams = self.table.series_families(series);
        if fams.is_empty() {
            return Err(TableError::InvalidSeries(series));
        }
        Ok(fams.iter().map(|r| CharLabel::new(r.id, j.to_vec())).collect())
    }

    pub fn count_ell_prime(&self, r: &PrimeRegime) -> usize {
        self.all_characters()
            .iter()
            .filter(|c| self.degree_ell_valuation(c, r.ell) == 0)
            .count()
    }

    /// Builds a label from raw indices, canonicalizing each slot.
    pub fn label(&self, family: u16, raw: &[u64]) -> Result<CharLabel, crate::indexing::IndexError> {
        let row = self.table.row(family).expect("known family");
        let kinds = slot_kinds(&row.groups);
        assert_eq!(kinds.len(), raw.len(), "arity mismatch for chi{family}");
        let mut idx = kinds
            .iter()
            .zip(raw)
            .map(|(k, i)| canonicalize(*k, self.q(), *i))
            .collect::<Result<Vec<_>, _>>()?;
        normalize_indices(&row.groups, &mut idx);
        Ok(CharLabel::new(family, idx))
    }

    /// The field automorphism: doubles every index.
    pub fn sigma(&self, c: &CharLabel) -> CharLabel {
        let row = self.table.row(c.family).expect("known family");
        let mut idx: Vec<IndexClass> = c.idx.iter().map(|x| sigma_double(x, self.q())).collect();
        normalize_indices(&row.groups, &mut idx);
        CharLabel::new(c.family, idx)
    }

    /// True when every index names an ell-element, so the label lies in E_ell(G, 1).
    pub fn is_ell_series(&self, c: &CharLabel, ell: u64) -> bool {
        c.idx.iter().all(|x| {
            let md = x.kind.modulus(self.q());
            let cof = crate::arith::ell_part(md as u128, ell).1 as u64;
            x.rep % cof == 0
        })
    }
}

/// The degrees of Sp2(q) = SL2(q): 1, St, chi3(i) over I_{q-1}, chi4(i) over I_{q+1}.
pub fn sp2_class_count(q: u64) -> u64 {
    q + 1
}

pub fn kinds_of(groups: &[KindGroup]) -> Vec<IndexKind> {
    slot_kinds(groups)
}
