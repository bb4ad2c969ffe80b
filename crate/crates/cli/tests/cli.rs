use std::process::{Command, Output};

fn verify(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_verify"))
        .args(args)
        .env_remove("MCKAYV_DATA_DIR")
        .output()
        .expect("verify runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn mckay_and_mass_over_all_primes() {
    let o = verify(&["--group", "sp6", "--q", "2", "--ell", "all", "--checks", "mckay,mass"]);
    let s = stdout(&o);
    assert!(o.status.success(), "{s}");
    for ell in ["ell=3", "ell=5", "ell=7"] {
        assert!(
            s.lines()
                .any(|l| l.starts_with("PASS") && l.contains("mckay") && l.contains(ell)),
            "{s}"
        );
    }
    assert!(!s.contains("FAIL"));
}

#[test]
fn json_report_for_q4_ell5() {
    let o = verify(&[
        "--group",
        "sp6",
        "--q",
        "4",
        "--ell",
        "5",
        "--checks",
        "coverage,equivariance,bawc",
        "--format",
        "json",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let results = v["results"].as_array().unwrap();
    assert_eq!(results.len(), 3);
    assert!(results.iter().all(|r| r["status"] == "PASS"), "{v}");
    assert_eq!(results[0]["counts"]["omega"], results[0]["counts"]["omega_expected"]);
}

#[test]
fn sp4_coverage() {
    let o = verify(&["--group", "sp4", "--q", "4", "--ell", "3", "--checks", "coverage"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS    coverage"));
}

#[test]
fn json_is_deterministic_apart_from_timing() {
    let args = [
        "--group",
        "sp6",
        "--q",
        "8",
        "--ell",
        "all",
        "--checks",
        "blocks,mckay",
        "--format",
        "json",
        "--jobs",
        "3",
    ];
    let strip = |o: Output| {
        let mut v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        v["elapsed_ms"] = 0.into();
        v
    };
    assert_eq!(strip(verify(&args)), strip(verify(&args)));
}

#[test]
fn bad_data_dir_fails_nonzero() {
    let o = verify(&["--group", "sp6", "--q", "2", "--data-dir", "/nonexistent"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("data file missing"));
}

#[test]
fn data_dir_from_environment() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/data");
    let o = Command::new(env!("CARGO_BIN_EXE_verify"))
        .args(["--group", "sp4", "--q", "8", "--checks", "tables,coverage"])
        .env("MCKAYV_DATA_DIR", dir)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stdout(&o));
}

#[test]
fn failing_table_gives_nonzero_exit() {
    let src = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/data");
    let dir = std::env::temp_dir().join(format!("mckayv-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    for f in ["sp6_table.txt", "sp6_blocks.txt", "sp6_brauer.txt", "sp6_maps.txt"] {
        std::fs::copy(format!("{src}/{f}"), dir.join(f)).unwrap();
    }
    let maps = dir.join("sp6_maps.txt");
    let mut text = std::fs::read_to_string(&maps).unwrap();
    text.push_str("Q1 | omega | + | chi67(i) | phi(i) x W | i:q-e | bad.1\n");
    std::fs::write(&maps, text).unwrap();
    let o = verify(&[
        "--group",
        "sp6",
        "--q",
        "2",
        "--checks",
        "tables",
        "--data-dir",
        dir.to_str().unwrap(),
    ]);
    std::fs::remove_dir_all(&dir).ok();
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL") && stdout(&o).contains("67"));
}
