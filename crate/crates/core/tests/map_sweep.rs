use mckayv::arith::{classify_regime, odd_primes_of, Family, GroupSpec};
use mckayv::bijections::{verify_bawc, verify_coverage, verify_equivariance, verify_mckay, MapContext, MapTable};
use mckayv::blocks::{BlockRules, BrauerData};
use mckayv::Instance;

fn sweep(family: Family, qs: &[u32]) -> Vec<String> {
    let rules = BlockRules::embedded(family);
    let data = BrauerData::embedded(family);
    let table = MapTable::embedded(family);
    let mut errs = Vec::new();
    for &a in qs {
        let g = GroupSpec::new(family, a).unwrap();
        let inst = Instance::embedded(g);
        for ell in odd_primes_of(&g) {
            let r = classify_regime(&g, ell).unwrap();
            let tag = format!("{family:?} q={} ell={ell}", g.q);
            let ctx = match MapContext::new(&inst, &r, &rules, data.as_ref()) {
                Ok(c) => c,
                Err(e) => {
                    errs.push(format!("{tag}: {e}"));
                    continue;
                }
            };
            let mi = ctx.instantiate_all(&table);
            let c = verify_coverage(&ctx, &table, &mi);
            if !c.ok() {
                errs.push(format!("{tag} coverage: {:?}", c.witness()));
            }
            let e = verify_equivariance(&ctx, &table, &mi);
            if !e.ok() {
                errs.push(format!("{tag} equivariance: {:?}", e.witness));
            }
            if r.divides_q2_minus_1() {
                let b = verify_bawc(&ctx, &table, &mi);
                if !b.ok {
                    errs.push(format!("{tag} bawc: {:?}", b.witness));
                }
            }
            let m = verify_mckay(&inst, &r);
            if !m.ok {
                errs.push(format!("{tag} mckay: {} vs {}", m.global, m.local));
            }
        }
    }
    errs
}

#[test]
fn sp6_map_sweep() {
    let errs = sweep(Family::Sp6, &[1, 2, 3]);
    assert!(errs.is_empty(), "{} problems:\n{}", errs.len(), errs.join("\n"));
}

#[test]
fn sp4_map_sweep() {
    let errs = sweep(Family::Sp4, &[1, 2, 3, 4]);
    assert!(errs.is_empty(), "{} problems:\n{}", errs.len(), errs.join("\n"));
}

#[test]
#[ignore = "slow: q = 16"]
fn sp6_map_sweep_q16() {
    let errs = sweep(Family::Sp6, &[4]);
    assert!(errs.is_empty(), "{} problems:\n{}", errs.len(), errs.join("\n"));
}
