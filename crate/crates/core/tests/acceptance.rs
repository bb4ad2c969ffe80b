//! Acceptance suite: one PASS/FAIL line per criterion. Exit status is nonzero on any FAIL.

use mckayv::arith::{classify_regime, odd_primes_of, Family, GroupSpec, PrimeRegime};
use mckayv::bijections::{
    gamma_block_sp4, verify_bawc, verify_coverage, verify_equivariance, verify_mckay, MapContext, MapKind, MapTable,
};
use mckayv::blocks::{alpha_of, defect_consistency, positivity_check, BlockEngine, BlockId, BlockRules, BrauerData};
use mckayv::indexing::{class_count, IndexKind};
use mckayv::localchars::{dihedral_class_number, enumerate_local, wreath_oracle, Comp, LocalKind};
use mckayv::radicals::{radical_catalog, RadicalTag};
use mckayv::Instance;
use num_bigint::BigUint;
use std::time::{Duration, Instant};

/// Wall-clock limits per criterion; counts are compared exactly.
const LIMIT_CENSUS: Duration = Duration::from_secs(1);
const LIMIT_MASS: Duration = Duration::from_secs(5);
const LIMIT_MCKAY_CYCLIC: Duration = Duration::from_secs(1);
const LIMIT_BLOCK_SWEEP: Duration = Duration::from_secs(30);

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn group(f: Family, q: u64) -> GroupSpec {
    GroupSpec::from_q(f, q).unwrap()
}

fn regime(f: Family, q: u64, ell: u64) -> PrimeRegime {
    classify_regime(&group(f, q), ell).unwrap()
}

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(t: Instant, limit: Duration) -> Result<String, String> {
    let e = t.elapsed();
    ensure(e <= limit, format!("took {e:?}, limit {limit:?}"))?;
    Ok(format!("{} ms", e.as_millis()))
}

fn binom(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Characters of Sp6(q) summed over Lusztig series from closed-form class counts.
fn sp6_census_oracle(q: u64) -> u64 {
    let qm = class_count(IndexKind::QMinus1, q);
    let qp = class_count(IndexKind::QPlus1, q);
    let q2m = class_count(IndexKind::Q2Minus1, q);
    let q2p = class_count(IndexKind::Q2Plus1, q);
    let q3 = class_count(IndexKind::Q3Minus1, q);
    // (number of characters per series label, number of labels)
    let series = [
        (12, 1),
        (6, qm),
        (6, qp),
        (3, qm),
        (3, qp),
        (4, qm),
        (4, qp),
        (2, qm * qm.saturating_sub(1)),
        (2, binom(qm, 2)),
        (2, qm * qp),
        (2, q2m),
        (2, qm * qp),
        (2, qm * qp),
        (2, qp * qp.saturating_sub(1)),
        (2, binom(qp, 2)),
        (2, q2p),
        (1, binom(qm, 3)),
        (1, binom(qm, 2) * qp),
        (1, q2m * qm),
        (1, qm * binom(qp, 2)),
        (1, q2m * qp),
        (1, qm * q2p),
        (1, q3),
        (1, binom(qp, 3)),
        (1, q2p * qp),
        (1, q3),
    ];
    series.iter().map(|(k, n)| k * n).sum()
}

fn c1_census() -> Outcome {
    let t = Instant::now();
    let inst = Instance::embedded(group(Family::Sp6, 2));
    let n = inst.all_characters().len() as u64;
    let oracle = sp6_census_oracle(2);
    ensure(n == 30 && oracle == 30, format!("enumerated {n}, oracle {oracle}"))?;
    for q in [4, 8, 16] {
        let m = Instance::embedded(group(Family::Sp6, q)).all_characters().len() as u64;
        ensure(
            m == sp6_census_oracle(q),
            format!("q={q}: enumerated {m}, oracle {}", sp6_census_oracle(q)),
        )?;
    }
    Ok(format!(
        "|Irr(Sp6(2))| = {n} (oracle {oracle}), {}",
        within(t, LIMIT_CENSUS)?
    ))
}

fn c2_mass() -> Outcome {
    let t = Instant::now();
    let cases = [
        (Family::Sp6, 2),
        (Family::Sp6, 4),
        (Family::Sp6, 8),
        (Family::Sp4, 4),
        (Family::Sp4, 8),
    ];
    for (f, q) in cases {
        let inst = Instance::embedded(group(f, q));
        let s: BigUint = inst.all_characters().iter().map(|c| inst.degree(c).pow(2)).sum();
        ensure(
            s == inst.order,
            format!("{f}({q}): sum of squares {s} vs |G| {}", inst.order),
        )?;
    }
    Ok(format!("{} groups, {}", cases.len(), within(t, LIMIT_MASS)?))
}

fn mckay(q: u64, ell: u64, want: usize) -> Result<(), String> {
    let inst = Instance::embedded(group(Family::Sp6, q));
    let m = verify_mckay(&inst, &regime(Family::Sp6, q, ell));
    ensure(
        m.global == want && m.local == want,
        format!(
            "q={q} ell={ell}: global {}, local {}, expected {want}",
            m.global, m.local
        ),
    )
}

fn c3_mckay_cyclic() -> Outcome {
    let t = Instant::now();
    mckay(2, 7, 7)?;
    mckay(2, 5, 15)?;
    Ok(format!(
        "(2,7): 7 = 7, (2,5): 15 = 15, {}",
        within(t, LIMIT_MCKAY_CYCLIC)?
    ))
}

fn c4_mckay_abelian() -> Outcome {
    mckay(4, 5, 40)?;
    let r = regime(Family::Sp6, 4, 5);
    let local = enumerate_local(&r, RadicalTag::Q111, LocalKind::IrrEllPrime)
        .map_err(|e| e.to_string())?
        .len();
    let oracle = wreath_oracle(dihedral_class_number(r.q_minus_eps()), 3);
    ensure(
        local == 40 && oracle == 40,
        format!("wreath oracle {oracle}, enumeration {local}"),
    )?;
    mckay(8, 3, 18)?;
    let r = regime(Family::Sp6, 8, 3);
    let sylow = radical_catalog(&r).into_iter().find(|c| c.is_sylow).map(|c| c.tag);
    ensure(
        sylow == Some(RadicalTag::P),
        format!("Sylow radical at q=8, ell=3 is {sylow:?}"),
    )?;
    Ok("(4,5): 40 = 40 = wreath oracle 40, (8,3): 18 = 18 via P".into())
}

fn block_sweep(
    mut check: impl FnMut(&Instance, &BlockEngine, &mckayv::blocks::BlockPartition) -> Vec<String>,
) -> Result<usize, String> {
    let mut n = 0;
    for f in [Family::Sp6, Family::Sp4] {
        let rules = BlockRules::embedded(f);
        for q in [2, 4, 8] {
            let g = group(f, q);
            let inst = Instance::embedded(g);
            for ell in odd_primes_of(&g) {
                let r = classify_regime(&g, ell).unwrap();
                let e = BlockEngine::new(&inst, &r, &rules).map_err(|x| x.to_string())?;
                let p = e.partition();
                if let Some(w) = check(&inst, &e, &p).first() {
                    return Err(format!("{f}({q}) ell={ell}: {w}"));
                }
                n += 1;
            }
        }
    }
    Ok(n)
}

fn c5_blocks() -> Outcome {
    let t = Instant::now();
    let mut chars = 0;
    let n = block_sweep(|inst, _, p| {
        chars += p.total;
        let mut errs: Vec<String> = p.failures.iter().map(|(c, f)| format!("{c}: {f}")).collect();
        errs.extend(p.check(inst));
        errs
    })?;
    Ok(format!(
        "{n} (group, q, ell) cases, {chars} characters, 0 unassigned, {}",
        within(t, LIMIT_BLOCK_SWEEP)?
    ))
}

fn c6_defects() -> Outcome {
    let mut blocks = 0;
    let n = block_sweep(|_, e, p| {
        blocks += p.positive_defect().count();
        defect_consistency(e, p)
    })?;
    Ok(format!("{n} cases, {blocks} positive-defect blocks consistent"))
}

struct MapRun {
    lines: usize,
    pieces: usize,
}

fn map_cases(
    f: Family,
    qs: &[u64],
    mut per: impl FnMut(&MapContext, &MapTable, &PrimeRegime) -> Result<(), String>,
) -> Result<MapRun, String> {
    let rules = BlockRules::embedded(f);
    let data = BrauerData::embedded(f);
    let table = MapTable::embedded(f);
    let mut run = MapRun { lines: 0, pieces: 0 };
    for &q in qs {
        let g = group(f, q);
        let inst = Instance::embedded(g);
        for ell in odd_primes_of(&g) {
            let r = classify_regime(&g, ell).unwrap();
            let ctx =
                MapContext::new(&inst, &r, &rules, data.as_ref()).map_err(|e| format!("{f}({q}) ell={ell}: {e}"))?;
            per(&ctx, &table, &r).map_err(|e| format!("{f}({q}) ell={ell}: {e}"))?;
            let mi = ctx.instantiate_all(&table);
            run.lines += mi.lines.len();
            run.pieces += mi.pieces.len();
        }
    }
    Ok(run)
}

fn c7_lines() -> Outcome {
    // Single-line sizes.
    let g = group(Family::Sp6, 2);
    let inst = Instance::embedded(g);
    let r = regime(Family::Sp6, 2, 7);
    let rules = BlockRules::embedded(Family::Sp6);
    let data = BrauerData::embedded(Family::Sp6);
    let table = MapTable::sp6();
    let ctx = MapContext::new(&inst, &r, &rules, data.as_ref())?;
    let first = ctx.instantiate_map(&table, RadicalTag::Q3Torus, MapKind::Omega).lines[0].domain_size;
    ensure(
        first == 6,
        format!("Omega_Q^3 line 1 at (2,7) has {first} characters, expected 6"),
    )?;
    let inst8 = Instance::embedded(group(Family::Sp6, 8));
    let r8 = regime(Family::Sp6, 8, 3);
    let ctx8 = MapContext::new(&inst8, &r8, &rules, data.as_ref())?;
    let star_r = ctx8.instantiate_map(&table, RadicalTag::R, MapKind::Star);
    let b0 = star_r
        .pieces
        .iter()
        .find(|p| p.block == Some(BlockId::Unipotent(0)))
        .map_or(0, |p| p.target.len());
    ensure(b0 == 2, format!("*_R on B0 at (8,3) has {b0} weights, expected 2"))?;

    let mut sizes = Vec::new();
    let mut total = 0;
    for (f, qs) in [(Family::Sp6, &[2u64, 4, 8, 16][..]), (Family::Sp4, &[2, 4, 8, 16][..])] {
        let run = map_cases(f, qs, |ctx, t, r| {
            let mi = ctx.instantiate_all(t);
            if let Some(l) = mi.lines.iter().find(|l| !l.matched) {
                return Err(format!("line {}: {}", l.line, l.witness.clone().unwrap_or_default()));
            }
            let c = verify_coverage(ctx, t, &mi);
            ensure(c.ok(), c.witness().unwrap_or_default())?;
            if f == Family::Sp6 && r.q() == 2 && (r.ell == 7 || r.ell == 5) {
                sizes.push((r.ell, c.omega_domain.size));
            }
            Ok(())
        })?;
        total += run.pieces;
    }
    sizes.sort();
    ensure(
        sizes == vec![(5, 15), (7, 7)],
        format!("coverage sizes at q=2: {sizes:?}"),
    )?;
    Ok(format!(
        "{total} line pieces matched; Q^3 line 1 = 6, *_R(B0) = 2, coverage 7 and 15 at q=2"
    ))
}

fn c8_equivariance() -> Outcome {
    let mut pairs = 0;
    let mut pinned = 0;
    for (f, qs) in [(Family::Sp6, &[4u64, 8][..]), (Family::Sp4, &[4, 8][..])] {
        map_cases(f, qs, |ctx, t, _| {
            let mi = ctx.instantiate_all(t);
            let e = verify_equivariance(ctx, t, &mi);
            ensure(e.ok(), e.witness.clone().unwrap_or_default())?;
            pairs += e.pairs_checked;
            if let Some(g) = &e.gamma {
                ensure(g.elementwise_checked > 0, "no pinned gamma pairs")?;
                pinned += g.elementwise_checked;
            }
            Ok(())
        })?;
    }
    // The block swap B7(i) -> B11(i) on every positive-defect B7.
    let mut swaps = 0;
    for q in [4, 8] {
        let g = group(Family::Sp4, q);
        let inst = Instance::embedded(g);
        let rules = BlockRules::embedded(Family::Sp4);
        for ell in odd_primes_of(&g) {
            let r = classify_regime(&g, ell).unwrap();
            let p = BlockEngine::new(&inst, &r, &rules)
                .map_err(|e| e.to_string())?
                .partition();
            for (id, _) in p.positive_defect() {
                if let BlockId::Series {
                    block: 7,
                    variant,
                    params,
                } = id
                {
                    let want = BlockId::Series {
                        block: 11,
                        variant: *variant,
                        params: params.clone(),
                    };
                    ensure(
                        gamma_block_sp4(&inst, id) == Some(want.clone()),
                        format!("gamma({id}) is not {want}"),
                    )?;
                    swaps += 1;
                }
            }
        }
    }
    ensure(swaps > 0, "no B7 block met")?;
    Ok(format!(
        "{pairs} sigma pairs, {pinned} pinned gamma pairs, {swaps} B7 -> B11 swaps, gamma^2 = sigma"
    ))
}

fn c9_bawc() -> Outcome {
    let mut blocks = 0;
    let mut splits = (0, 0);
    // No B8(i)/B9(i) has weights from P at q = 4 or 8 (ell^d never divides an index there),
    // so q = 16 is added for the 2+1 split.
    for (f, qs) in [(Family::Sp6, &[4u64, 8, 16][..]), (Family::Sp4, &[4, 8][..])] {
        map_cases(f, qs, |ctx, t, r| {
            if !r.divides_q2_minus_1() {
                return Ok(());
            }
            let mi = ctx.instantiate_all(t);
            let b = verify_bawc(ctx, t, &mi);
            ensure(b.ok, b.witness.clone().unwrap_or_default())?;
            blocks += b.blocks.len();
            if f == Family::Sp6 && r.ell == 3 {
                for x in &b.blocks {
                    let parts: Vec<(RadicalTag, usize)> = x.by_radical.iter().map(|(k, v)| (*k, *v)).collect();
                    match &x.block {
                        BlockId::Unipotent(0) => {
                            let want = vec![(RadicalTag::Q111, 4), (RadicalTag::P, 4), (RadicalTag::R, 2)];
                            ensure(sorted(&parts) == sorted(&want), format!("B0 split {parts:?}"))?;
                            splits.0 += 1;
                        }
                        BlockId::Series { block: 8 | 9, .. } if x.by_radical.contains_key(&RadicalTag::P) => {
                            let want = vec![(RadicalTag::P, 2), (RadicalTag::R, 1)];
                            ensure(sorted(&parts) == sorted(&want), format!("{} split {parts:?}", x.block))?;
                            splits.1 += 1;
                        }
                        _ => {}
                    }
                }
            }
            Ok(())
        })?;
    }
    ensure(splits.0 == 3 && splits.1 > 0, format!("split blocks met: {splits:?}"))?;
    Ok(format!(
        "{blocks} blocks; B0 = 4+4+2 at q=4,8,16; {} B8/B9 blocks = 2+1 at q=16",
        splits.1
    ))
}

fn sorted<T: Ord + Clone>(v: &[T]) -> Vec<T> {
    let mut v = v.to_vec();
    v.sort();
    v
}

fn c10_positivity() -> Outcome {
    let data = BrauerData::embedded(Family::Sp6).unwrap();
    let mut evaluated = 0;
    for q in [2, 4, 8, 16] {
        let inst = Instance::embedded(group(Family::Sp6, q));
        let (errs, n) = positivity_check(&data, &inst);
        ensure(errs.is_empty(), errs.first().cloned().unwrap_or_default())?;
        evaluated += n;
    }
    // Both alpha branches, each with at least one alpha-dependent combination in force.
    for (q, ell, alpha) in [(2, 3, 1), (8, 3, 2)] {
        let r = regime(Family::Sp6, q, ell);
        ensure(
            alpha_of(&r) == alpha,
            format!("alpha at ({q},{ell}) is {}", alpha_of(&r)),
        )?;
        let uses = data
            .rows
            .iter()
            .filter(|row| row.conds.iter().any(|c| c.matches(&r)))
            .flat_map(|row| row.sets.iter().flatten())
            .filter(|v| v.uses_alpha())
            .count();
        ensure(uses > 0, format!("no alpha combination in force at ({q},{ell})"))?;
    }
    Ok(format!(
        "{evaluated} combinations positive; alpha = 1 at (2,3), alpha = 2 at (8,3)"
    ))
}

fn c11_local_counts() -> Outcome {
    let mut checks = 0;
    for q in [4u64, 8, 16, 32] {
        let g = group(Family::Sp6, q);
        for ell in odd_primes_of(&g) {
            let r = classify_regime(&g, ell).unwrap();
            let cat: Vec<RadicalTag> = radical_catalog(&r).iter().map(|c| c.tag).collect();
            let count = |rad, kind| {
                enumerate_local(&r, rad, kind)
                    .map(|v| v.len())
                    .map_err(|e| e.to_string())
            };
            let at = format!("q={q} ell={ell}");
            if cat.contains(&RadicalTag::Q3) && ell != 3 {
                let n = count(RadicalTag::Q3, LocalKind::Dz)? as u64;
                let want = q * r.q_plus_eps() * r.m / 6;
                ensure(n == want, format!("{at}: dz(N/Q3) = {n}, formula {want}"))?;
                checks += 1;
            }
            if cat.contains(&RadicalTag::R) {
                let n = count(RadicalTag::R, LocalKind::Dz)? as u64;
                let want = (r.m - 1) / 2 + 2;
                ensure(n == want, format!("{at}: dz(N/R) = {n}, formula {want}"))?;
                checks += 1;
            }
            if cat.contains(&RadicalTag::Q111) {
                let all = enumerate_local(&r, RadicalTag::Q111, LocalKind::All).map_err(|e| e.to_string())?;
                let over_trivial = all.iter().filter(|l| l.parts.iter().all(|c| *c == Comp::One)).count();
                ensure(over_trivial == 10, format!("{at}: |Irr(N | 1x1x1)| = {over_trivial}"))?;
                checks += 1;
            }
        }
    }
    ensure(checks > 0, "no applicable regime")?;
    Ok(format!("{checks} formula instances"))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("character census", c1_census),
        ("mass identity", c2_mass),
        ("McKay, cyclic Sylow", c3_mckay_cyclic),
        ("McKay, abelian Sylow", c4_mckay_abelian),
        ("block partition", c5_blocks),
        ("defect consistency", c6_defects),
        ("map line sizes and coverage", c7_lines),
        ("sigma and gamma equivariance", c8_equivariance),
        ("block weight counts", c9_bawc),
        ("virtual degree positivity", c10_positivity),
        ("local count formulas", c11_local_counts),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(msg) => println!("PASS {:>2} {name}: {msg}", k + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {msg}", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
