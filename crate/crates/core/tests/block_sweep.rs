use mckayv::arith::{classify_regime, odd_primes_of, Family, GroupSpec};
use mckayv::blocks::{brauer_consistency, brauer_sets, defect_consistency, BlockEngine, BlockRules, BrauerData};
use mckayv::Instance;

fn sweep(family: Family, qs: &[u32]) -> Vec<String> {
    let rules = BlockRules::embedded(family);
    let data = BrauerData::embedded(family);
    let mut errs = Vec::new();
    for &a in qs {
        let g = GroupSpec::new(family, a).unwrap();
        let inst = Instance::embedded(g);
        for ell in odd_primes_of(&g) {
            let r = classify_regime(&g, ell).unwrap();
            let e = BlockEngine::new(&inst, &r, &rules).unwrap();
            let p = e.partition();
            let tag = format!("{family:?} q={} ell={ell}", g.q);
            errs.extend(p.check(&inst).into_iter().map(|m| format!("{tag} partition: {m}")));
            errs.extend(
                defect_consistency(&e, &p)
                    .into_iter()
                    .map(|m| format!("{tag} defect: {m}")),
            );
            match brauer_sets(&e, &p, data.as_ref()) {
                Ok(c) => errs.extend(
                    brauer_consistency(&e, &p, &c)
                        .into_iter()
                        .map(|m| format!("{tag} brauer: {m}")),
                ),
                Err(x) => errs.push(format!("{tag}: {x}")),
            }
        }
    }
    errs
}

#[test]
fn sp6_partition_sweep() {
    let errs = sweep(Family::Sp6, &[1, 2, 3]);
    assert!(
        errs.is_empty(),
        "{} problems:\n{}",
        errs.len(),
        errs[..errs.len().min(60)].join("\n")
    );
}

#[test]
fn sp4_partition_sweep() {
    let errs = sweep(Family::Sp4, &[1, 2, 3]);
    assert!(
        errs.is_empty(),
        "{} problems:\n{}",
        errs.len(),
        errs[..errs.len().min(60)].join("\n")
    );
}

#[test]
#[ignore = "slow: larger q with non-trivial m"]
fn sp6_partition_sweep_large() {
    let errs = sweep(Family::Sp6, &[4, 5]);
    assert!(
        errs.is_empty(),
        "{} problems:\n{}",
        errs.len(),
        errs[..errs.len().min(60)].join("\n")
    );
}
