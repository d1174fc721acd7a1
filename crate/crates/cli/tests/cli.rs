use std::process::Command;

use hybrid_alloc::harness::{read_results, ExperimentConfig, OutputFormat};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hybrid-alloc"))
}

#[test]
fn writes_csv_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sum.csv");
    let status = bin()
        .args(["sum", "--snr", "20:5:30", "--L", "8", "--trials", "2", "--qos-trials", "1", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let m = read_results(&out, OutputFormat::Csv).unwrap();
    assert_eq!(m.points.len(), 3);
    assert!(m.points.iter().all(|p| p.trials_ok + p.trials_infeasible == 2));
}

#[test]
fn config_file_with_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.toml");
    let cfg = ExperimentConfig {
        subcarriers: 4,
        trials: 1,
        qos_trials: 1,
        snr_points_db: vec![25.0],
        ..Default::default()
    };
    std::fs::write(&cfg_path, cfg.to_toml()).unwrap();
    let out = dir.path().join("mm.json");
    let status = bin()
        .args(["minmax", "--format", "text", "--seed", "9", "--config"])
        .arg(&cfg_path)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let m = read_results(&out, OutputFormat::Text).unwrap();
    assert_eq!(m.points.len(), 1);
    assert_eq!(m.points[0].snr_db, 25.0);
}

#[test]
fn stdout_matches_file_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("a.csv");
    let args = ["sum", "--snr", "15:5:20", "--L", "4", "--trials", "2", "--qos-trials", "1", "--ber", "1e-3"];
    let printed = bin().args(args).output().unwrap();
    assert!(printed.status.success());
    assert!(bin().args(args).arg("--out").arg(&out).status().unwrap().success());
    assert_eq!(printed.stdout, std::fs::read(&out).unwrap());
}

#[test]
fn bad_arguments_fail() {
    for args in [
        vec!["sum", "--snr", "1:2"],
        vec!["sum", "--ber", "0.9"],
        vec!["minmax", "--assoc", "xyz"],
        vec!["sum", "--config", "/nonexistent/run.toml"],
    ] {
        let out = bin().args(&args).output().unwrap();
        assert!(!out.status.success(), "{args:?} should fail");
    }
}
