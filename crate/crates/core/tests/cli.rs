use std::fs;
use std::process::Command;

fn irsbeam() -> Command {
    Command::new(env!("CARGO_BIN_EXE_irsbeam"))
}

#[test]
fn missing_config_fails_and_names_the_path() {
    let out = irsbeam()
        .args(["converge", "--config", "/definitely/not/here.toml", "--out"])
        .arg(tempfile::tempdir().unwrap().path())
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("/definitely/not/here.toml"));
}

#[test]
fn bad_field_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(
        &cfg,
        "users = 2\nsinr_db = [10.0]\nbs = { n1 = 2, n2 = 2 }\nirs = { n1 = 0, n2 = 2 }\nce = { candidates = 10, elites = 2, iterations = 5 }\n",
    )
    .unwrap();
    let out = irsbeam().args(["sweep-sinr", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("`irs`"));
}

#[test]
fn unknown_scenario_fails() {
    let out = irsbeam().args(["converge", "--scenario", "nope"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope"));
}

#[test]
fn same_seed_gives_byte_identical_csv() {
    let run = || {
        let dir = tempfile::tempdir().unwrap();
        let status = irsbeam()
            .args(["sweep-sinr", "--scenario", "small-oracle", "--trials", "4", "--seed", "17", "--out"])
            .arg(dir.path())
            .status()
            .unwrap();
        assert!(status.success());
        let csv = fs::read(dir.path().join("sweep_sinr.csv")).unwrap();
        let manifest: serde_json::Value =
            serde_json::from_slice(&fs::read(dir.path().join("sweep-sinr.manifest.json")).unwrap()).unwrap();
        assert_eq!(manifest["seed"], 17);
        assert_eq!(manifest["trials"], 4);
        csv
    };
    let a = run();
    assert_eq!(a, run());
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("method,gamma_db,mean_power_dbm,std,evaluations,seed\n"));
    assert!(text.lines().skip(1).all(|l| l.ends_with(",17")));
}

#[test]
fn oracle_compare_prints_median_gap() {
    let dir = tempfile::tempdir().unwrap();
    let out = irsbeam()
        .args(["oracle-compare", "--scenario", "small-oracle", "--trials", "10", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("median CE gap"), "{stdout}");
    assert_eq!(stdout.lines().count(), 1);
    let csv = fs::read_to_string(dir.path().join("oracle_compare.csv")).unwrap();
    assert_eq!(csv.lines().count(), 11);
}

#[test]
fn converge_and_complexity_write_tables() {
    let dir = tempfile::tempdir().unwrap();
    let ok = irsbeam()
        .args(["converge", "--scenario", "desk", "--trials", "2", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(ok.success());
    let header = fs::read_to_string(dir.path().join("converge.csv")).unwrap();
    assert!(header.starts_with("S,iteration,mean_power_dbm,std,seed\n"));
    assert!(dir.path().join("converge_traces.csv").exists());

    let ok = irsbeam()
        .args(["complexity", "--scenario", "large-complexity", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(ok.success());
    let header = fs::read_to_string(dir.path().join("complexity.csv")).unwrap();
    assert!(header.starts_with("N,Q,ce_model,sr_model,ce_measured,sr_measured,sr_sweeps,seed\n"));
}

#[test]
fn scenarios_lists_and_prints() {
    let out = irsbeam().arg("scenarios").output().unwrap();
    assert!(String::from_utf8_lossy(&out.stdout).contains("small-oracle"));
    let out = irsbeam().args(["scenarios", "desk"]).output().unwrap();
    assert!(String::from_utf8_lossy(&out.stdout).contains("[ce]"));
}
