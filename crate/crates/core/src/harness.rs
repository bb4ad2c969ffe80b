//! Verification jobs: data loading, table validation, per-prime checks and reports.

use crate::arith::{classify_regime, odd_primes_of, Family, GroupSpec};
use crate::bijections::{verify_bawc, verify_coverage, verify_equivariance, verify_mckay, MapContext, MapTable};
use crate::blocks::{brauer_consistency, defect_consistency, BlockRules, BrauerData};
use crate::chartable::{CharTable, Instance};
use num_bigint::BigUint;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("data file missing: {0}")]
    DataFileMissing(PathBuf),
    #[error("{path}: line {line}: {msg}")]
    DataFileMalformed { path: String, line: usize, msg: String },
    #[error("{0}")]
    BadJob(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Check {
    Tables,
    Mass,
    Blocks,
    Mckay,
    Coverage,
    Equivariance,
    Bawc,
}

impl Check {
    pub const ALL: [Check; 7] = [
        Check::Tables,
        Check::Mass,
        Check::Blocks,
        Check::Mckay,
        Check::Coverage,
        Check::Equivariance,
        Check::Bawc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Tables => "tables",
            Check::Mass => "mass",
            Check::Blocks => "blocks",
            Check::Mckay => "mckay",
            Check::Coverage => "coverage",
            Check::Equivariance => "equivariance",
            Check::Bawc => "bawc",
        }
    }

    /// Checks that do not depend on ell.
    pub fn is_global(self) -> bool {
        matches!(self, Check::Tables | Check::Mass)
    }
}

impl FromStr for Check {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Check::ALL
            .into_iter()
            .find(|c| c.name() == s.trim())
            .ok_or_else(|| HarnessError::BadJob(format!("unknown check '{s}'")))
    }
}

/// Parses a comma-separated check list; "all" selects every check.
pub fn parse_checks(s: &str) -> Result<Vec<Check>, HarnessError> {
    if s.trim() == "all" {
        return Ok(Check::ALL.to_vec());
    }
    let mut v: Vec<Check> = s
        .split(',')
        .filter(|x| !x.trim().is_empty())
        .map(str::parse)
        .collect::<Result<_, _>>()?;
    v.sort();
    v.dedup();
    if v.is_empty() {
        return Err(HarnessError::BadJob("no checks selected".into()));
    }
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EllSel {
    All,
    One(u64),
}

impl FromStr for EllSel {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "all" {
            return Ok(EllSel::All);
        }
        s.parse()
            .map(EllSel::One)
            .map_err(|_| HarnessError::BadJob(format!("ell must be a prime or 'all', got '{s}'")))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationJob {
    pub group: GroupSpec,
    pub ell: EllSel,
    pub checks: Vec<Check>,
}

impl VerificationJob {
    /// The odd primes the job runs over.
    pub fn primes(&self) -> Result<Vec<u64>, HarnessError> {
        let all = odd_primes_of(&self.group);
        match self.ell {
            EllSel::All => Ok(all),
            EllSel::One(l) if all.contains(&l) => Ok(vec![l]),
            EllSel::One(l) => Err(HarnessError::BadJob(format!(
                "{l} is not an odd prime dividing |{}({})|",
                self.group.family, self.group.q
            ))),
        }
    }
}

/// The four data tables of one group.
#[derive(Debug, Clone)]
pub struct DataSet {
    pub family: Family,
    pub table: CharTable,
    pub rules: BlockRules,
    pub brauer: Option<BrauerData>,
    pub maps: MapTable,
}

pub fn family_prefix(f: Family) -> &'static str {
    match f {
        Family::Sp6 => "sp6",
        Family::Sp4 => "sp4",
    }
}

fn read(dir: &Path, name: &str) -> Result<(String, String), HarnessError> {
    let p = dir.join(name);
    std::fs::read_to_string(&p)
        .map(|s| (p.display().to_string(), s))
        .map_err(|_| HarnessError::DataFileMissing(p))
}

fn line_of(msg: &str) -> (usize, String) {
    // Parsers report "line N: msg".
    msg.strip_prefix("line ")
        .and_then(|r| r.split_once(": "))
        .and_then(|(n, m)| n.parse().ok().map(|n| (n, m.to_string())))
        .unwrap_or((0, msg.to_string()))
}

fn malformed(path: &str, e: impl ToString) -> HarnessError {
    let (line, msg) = line_of(&e.to_string());
    HarnessError::DataFileMalformed {
        path: path.to_string(),
        line,
        msg,
    }
}

impl DataSet {
    pub fn embedded(family: Family) -> Self {
        DataSet {
            family,
            table: CharTable::embedded(family),
            rules: BlockRules::embedded(family),
            brauer: BrauerData::embedded(family),
            maps: MapTable::embedded(family),
        }
    }

    /// Loads `<g>_table.txt`, `<g>_blocks.txt`, `<g>_maps.txt` and, for Sp6, `<g>_brauer.txt`.
    pub fn load(dir: &Path, family: Family) -> Result<Self, HarnessError> {
        let g = family_prefix(family);
        let (p, s) = read(dir, &format!("{g}_table.txt"))?;
        let table = CharTable::parse(&s).map_err(|e| malformed(&p, e))?;
        let (p, s) = read(dir, &format!("{g}_blocks.txt"))?;
        let rules = BlockRules::parse(&s).map_err(|e| malformed(&p, e))?;
        let brauer = match family {
            Family::Sp6 => {
                let (p, s) = read(dir, &format!("{g}_brauer.txt"))?;
                Some(BrauerData::parse(&s).map_err(|e| malformed(&p, e))?)
            }
            Family::Sp4 => None,
        };
        let (p, s) = read(dir, &format!("{g}_maps.txt"))?;
        let maps = MapTable::parse(&s).map_err(|e| malformed(&p, e))?;
        for (name, f) in [("table", table.family), ("blocks", rules.family), ("maps", maps.family)] {
            if f != family {
                return Err(HarnessError::DataFileMalformed {
                    path: format!("{g}_{name}.txt"),
                    line: 0,
                    msg: format!("declares group {f}"),
                });
            }
        }
        Ok(DataSet {
            family,
            table,
            rules,
            brauer,
            maps,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
    Vacuous,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Vacuous => "VACUOUS",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub check: Check,
    pub ell: Option<u64>,
    pub status: Status,
    pub counts: BTreeMap<String, u64>,
    pub witness: Option<String>,
    pub notes: Vec<String>,
}

impl CheckResult {
    fn new(check: Check, ell: Option<u64>) -> Self {
        CheckResult {
            check,
            ell,
            status: Status::Pass,
            counts: BTreeMap::new(),
            witness: None,
            notes: vec![],
        }
    }

    fn count(mut self, k: &str, v: usize) -> Self {
        self.counts.insert(k.to_string(), v as u64);
        self
    }

    fn fail_if(mut self, errs: Vec<String>) -> Self {
        if let Some(w) = errs.first() {
            self.status = Status::Fail;
            self.witness = Some(w.clone());
            self.counts.insert("errors".into(), errs.len() as u64);
        }
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub group: String,
    pub q: u64,
    pub ell: String,
    pub checks: Vec<Check>,
    pub results: Vec<CheckResult>,
    pub elapsed_ms: u64,
}

impl Report {
    pub fn failed(&self) -> bool {
        self.results.iter().any(|r| r.status == Status::Fail)
    }

    pub fn exit_code(&self) -> i32 {
        i32::from(self.failed())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "{}({}) ell={} checks={}\n",
            self.group,
            self.q,
            self.ell,
            self.check_list()
        );
        for r in &self.results {
            let ell = r.ell.map_or("-".to_string(), |l| l.to_string());
            let counts: Vec<String> = r.counts.iter().map(|(k, v)| format!("{k}={v}")).collect();
            let _ = write!(
                s,
                "{:<7} {:<12} ell={:<4} {}",
                r.status.name(),
                r.check.name(),
                ell,
                counts.join(" ")
            );
            if let Some(w) = &r.witness {
                let _ = write!(s, "\n        witness: {w}");
            }
            for n in &r.notes {
                let _ = write!(s, "\n        note: {n}");
            }
            s.push('\n');
        }
        let fails = self.results.iter().filter(|r| r.status == Status::Fail).count();
        let _ = writeln!(
            s,
            "{} checks, {fails} failed, {} ms",
            self.results.len(),
            self.elapsed_ms
        );
        s
    }

    fn check_list(&self) -> String {
        self.checks.iter().map(|c| c.name()).collect::<Vec<_>>().join(",")
    }
}

/// Schema and cross-table checks over one data set.
pub fn validate_tables(ds: &DataSet) -> CheckResult {
    let mut errs = Vec::new();
    let g = family_prefix(ds.family);
    errs.extend(
        ds.rules
            .validate(&ds.table)
            .into_iter()
            .map(|e| format!("{g}_blocks.txt: {e}")),
    );
    if let Some(b) = &ds.brauer {
        errs.extend(
            b.validate(&ds.table)
                .into_iter()
                .map(|e| format!("{g}_brauer.txt: {e}")),
        );
    }
    errs.extend(
        ds.maps
            .validate(&ds.table, &ds.rules)
            .into_iter()
            .map(|e| format!("{g}_maps.txt: {e}")),
    );
    for s in ds.table.series_ids() {
        let fams = ds.table.series_families(s);
        if fams.windows(2).any(|w| w[0].arity != w[1].arity) {
            errs.push(format!("{g}_table.txt: series {s} mixes arities"));
        }
    }
    CheckResult::new(Check::Tables, None)
        .count("families", ds.table.rows.len())
        .count("map_lines", ds.maps.lines.len())
        .fail_if(errs)
}

fn mass(inst: &Instance) -> CheckResult {
    let chars = inst.all_characters();
    let sum: BigUint = chars.iter().map(|c| inst.degree(c).pow(2)).sum();
    let mut r = CheckResult::new(Check::Mass, None).count("characters", chars.len());
    if sum != inst.order {
        r = r.fail_if(vec![format!(
            "sum of squared degrees {sum} differs from |G| = {}",
            inst.order
        )]);
    }
    r
}

fn per_ell(ds: &DataSet, inst: &Instance, ell: u64, checks: &[Check]) -> Vec<CheckResult> {
    let r = match classify_regime(&inst.group, ell) {
        Ok(r) => r,
        Err(e) => {
            return checks
                .iter()
                .map(|c| CheckResult::new(*c, Some(ell)).fail_if(vec![e.to_string()]))
                .collect()
        }
    };
    let mut out = Vec::new();
    if checks.contains(&Check::Mckay) {
        let m = verify_mckay(inst, &r);
        let mut c = CheckResult::new(Check::Mckay, Some(ell))
            .count("global", m.global)
            .count("local", m.local);
        if !m.ok {
            c = c.fail_if(vec![format!(
                "|Irr_ell'(G)| = {}, |Irr_ell'(N(P))| = {}",
                m.global, m.local
            )]);
        }
        out.push(c);
    }
    let needs_ctx = checks
        .iter()
        .any(|c| matches!(c, Check::Blocks | Check::Coverage | Check::Equivariance | Check::Bawc));
    if !needs_ctx {
        return out;
    }
    let ctx = match MapContext::new(inst, &r, &ds.rules, ds.brauer.as_ref()) {
        Ok(c) => c,
        Err(e) => {
            out.extend(
                checks
                    .iter()
                    .filter(|c| !c.is_global() && **c != Check::Mckay)
                    .map(|c| CheckResult::new(*c, Some(ell)).fail_if(vec![e.clone()])),
            );
            return out;
        }
    };
    if checks.contains(&Check::Blocks) {
        let mut errs = ctx.part.check(inst);
        errs.extend(defect_consistency(&ctx.engine, &ctx.part));
        errs.extend(brauer_consistency(&ctx.engine, &ctx.part, &ctx.brauer));
        let mut c = CheckResult::new(Check::Blocks, Some(ell))
            .count("characters", ctx.part.total)
            .count("blocks", ctx.part.blocks.len())
            .count("positive_defect", ctx.part.positive_defect().count())
            .count("unassigned", ctx.part.failures.len())
            .fail_if(errs);
        c.notes = ctx
            .part
            .vacuous_rules
            .iter()
            .map(|v| format!("block rule at line {v} has no members"))
            .collect();
        out.push(c);
    }
    let want = |c: Check| checks.contains(&c);
    if !(want(Check::Coverage) || want(Check::Equivariance) || want(Check::Bawc)) {
        return out;
    }
    let mi = ctx.instantiate_all(&ds.maps);
    if want(Check::Coverage) {
        let cov = verify_coverage(&ctx, &ds.maps, &mi);
        let mut c = CheckResult::new(Check::Coverage, Some(ell))
            .count("lines", mi.lines.len())
            .count("omega", cov.omega_domain.size)
            .count("omega_expected", cov.omega_domain.expected);
        if let Some(s) = &cov.star_domain {
            c = c.count("star", s.size).count("star_expected", s.expected);
        }
        if !cov.ok() {
            c = c.fail_if(vec![cov.witness().unwrap_or_else(|| "coverage failed".into())]);
        }
        out.push(c);
    }
    if want(Check::Equivariance) {
        let e = verify_equivariance(&ctx, &ds.maps, &mi);
        let mut c = CheckResult::new(Check::Equivariance, Some(ell)).count("pairs", e.pairs_checked);
        if let Some(g) = &e.gamma {
            c = c.count("gamma_pinned", g.elementwise_checked);
        }
        if !e.ok() {
            c = c.fail_if(vec![e.witness.clone().unwrap_or_else(|| "equivariance failed".into())]);
        } else if e.pairs_checked == 0 {
            c.status = Status::Vacuous;
        }
        out.push(c);
    }
    if want(Check::Bawc) {
        let mut c = CheckResult::new(Check::Bawc, Some(ell));
        if !r.divides_q2_minus_1() {
            c.status = Status::Vacuous;
            c.notes.push("ell does not divide q^2 - 1".into());
        } else {
            let b = verify_bawc(&ctx, &ds.maps, &mi);
            c = c
                .count("blocks", b.blocks.len())
                .count("brauer", b.blocks.iter().map(|x| x.ibr).sum());
            if let Some(w) = b.witness {
                c = c.fail_if(vec![w]);
            }
        }
        out.push(c);
    }
    out
}

/// Runs a job against a data set using at most `jobs` worker threads (0 = default).
pub fn run(job: &VerificationJob, ds: &DataSet, jobs: usize) -> Result<Report, HarnessError> {
    if ds.family != job.group.family {
        return Err(HarnessError::BadJob(format!(
            "data set is for {}, job for {}",
            ds.family, job.group.family
        )));
    }
    let start = Instant::now();
    let primes = job.primes()?;
    let inst = Instance::new(job.group, ds.table.clone()).map_err(|e| HarnessError::BadJob(e.to_string()))?;
    let mut results = Vec::new();
    if job.checks.contains(&Check::Tables) {
        results.push(validate_tables(ds));
    }
    if job.checks.contains(&Check::Mass) {
        results.push(mass(&inst));
    }
    let local: Vec<Check> = job.checks.iter().copied().filter(|c| !c.is_global()).collect();
    if !local.is_empty() {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| HarnessError::BadJob(e.to_string()))?;
        let per: Vec<Vec<CheckResult>> =
            pool.install(|| primes.par_iter().map(|&l| per_ell(ds, &inst, l, &local)).collect());
        results.extend(per.into_iter().flatten());
    }
    Ok(Report {
        group: job.group.family.to_string(),
        q: job.group.q,
        ell: match job.ell {
            EllSel::All => "all".into(),
            EllSel::One(l) => l.to_string(),
        },
        checks: job.checks.clone(),
        results,
        elapsed_ms: start.elapsed().as_millis() as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn job(f: Family, q: u64, ell: &str, checks: &str) -> VerificationJob {
        VerificationJob {
            group: GroupSpec::from_q(f, q).unwrap(),
            ell: ell.parse().unwrap(),
            checks: parse_checks(checks).unwrap(),
        }
    }

    #[test]
    fn intact_tables_pass() {
        for f in [Family::Sp6, Family::Sp4] {
            let r = validate_tables(&DataSet::embedded(f));
            assert_eq!(r.status, Status::Pass, "{:?}", r.witness);
        }
    }

    #[test]
    fn map_line_with_unknown_family_fails() {
        let mut ds = DataSet::embedded(Family::Sp6);
        let text = format!(
            "{}Q1 | omega | + | chi67(i) | phi(i) x W | i:q-e | bad.1\n",
            ds.maps.serialize()
        );
        let n = text.lines().count();
        ds.maps = MapTable::parse(&text).unwrap();
        let r = validate_tables(&ds);
        assert_eq!(r.status, Status::Fail);
        let w = r.witness.unwrap();
        assert!(
            w.contains("sp6_maps.txt") && w.contains(&format!("line {n}")) && w.contains("67"),
            "{w}"
        );
    }

    #[test]
    fn alpha_in_q_minus_1_row_fails() {
        let mut ds = DataSet::embedded(Family::Sp6);
        let text = crate::blocks::SP6_BRAUER.replace(
            "6 | q-1 | [13,14,15,16,18] [17]",
            "6 | q-1 | [13,14,15,16,18-a*17] [17]",
        );
        assert_ne!(text, crate::blocks::SP6_BRAUER);
        ds.brauer = Some(BrauerData::parse(&text).unwrap());
        let r = validate_tables(&ds);
        assert_eq!(r.status, Status::Fail);
        assert!(r.witness.unwrap().contains("alpha"));
    }

    #[test]
    fn mckay_and_mass_at_q2() {
        let r = run(
            &job(Family::Sp6, 2, "all", "mckay,mass"),
            &DataSet::embedded(Family::Sp6),
            0,
        )
        .unwrap();
        let ells: Vec<u64> = r.results.iter().filter_map(|x| x.ell).collect();
        assert_eq!(ells, vec![3, 5, 7]);
        assert!(!r.failed(), "{}", r.to_text());
        assert_eq!(r.exit_code(), 0);
    }

    #[test]
    fn report_is_deterministic_apart_from_timing() {
        let ds = DataSet::embedded(Family::Sp6);
        let j = job(Family::Sp6, 4, "5", "coverage,equivariance,bawc");
        let mut a = run(&j, &ds, 2).unwrap();
        let mut b = run(&j, &ds, 1).unwrap();
        a.elapsed_ms = 0;
        b.elapsed_ms = 0;
        assert_eq!(a.to_json(), b.to_json());
        assert!(!a.failed(), "{}", a.to_text());
    }

    #[test]
    fn bawc_is_vacuous_off_q2_minus_1() {
        let r = run(&job(Family::Sp6, 4, "7", "bawc"), &DataSet::embedded(Family::Sp6), 1).unwrap();
        assert_eq!(r.results[0].status, Status::Vacuous);
        assert_eq!(r.exit_code(), 0);
    }

    #[test]
    fn missing_data_dir_is_reported() {
        let e = DataSet::load(Path::new("/nonexistent"), Family::Sp6).unwrap_err();
        assert!(matches!(e, HarnessError::DataFileMissing(_)));
    }

    #[test]
    fn malformed_file_reports_line() {
        let dir = std::env::temp_dir().join(format!("mckayv-harness-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        for (n, s) in [
            ("sp4_table.txt", crate::chartable::SP4_TABLE.to_string()),
            ("sp4_blocks.txt", crate::blocks::SP4_BLOCKS.to_string()),
            ("sp4_maps.txt", "@group sp4\nQ1 | omega | +\n".to_string()),
        ] {
            std::fs::write(dir.join(n), s).unwrap();
        }
        let e = DataSet::load(&dir, Family::Sp4).unwrap_err();
        std::fs::remove_dir_all(&dir).ok();
        assert!(matches!(e, HarnessError::DataFileMalformed { line: 2, .. }), "{e}");
    }

    #[test]
    fn unknown_prime_is_rejected() {
        assert!(run(&job(Family::Sp6, 2, "11", "mckay"), &DataSet::embedded(Family::Sp6), 1).is_err());
    }
}
