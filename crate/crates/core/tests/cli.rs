//! End-to-end runs of the command-line binary.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cellbalance"))
}

const SMALL_ENV: &str = "horizon = 12\nmorning_window = 3,5\nevening_window = 7,9\n";

#[test]
fn generate_run_report() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("env.conf");
    std::fs::write(&conf, SMALL_ENV).unwrap();

    let trace = dir.path().join("trace.csv");
    let st = bin()
        .args(["generate-trace", "--seed", "4", "--ue", "6", "--config"])
        .arg(&conf)
        .arg("--out")
        .arg(&trace)
        .status()
        .unwrap();
    assert!(st.success());
    assert_eq!(std::fs::read_to_string(&trace).unwrap().lines().count(), 1 + 6 * 12);

    let out = dir.path().join("run");
    let st = bin()
        .args(["run", "--policy", "max_sinr", "--rb", "50,100", "--ue", "6", "--seed", "4", "--seeds", "1"])
        .arg("--config")
        .arg(&conf)
        .arg("--trace")
        .arg(&trace)
        .arg("--out")
        .arg(&out)
        .arg("--events")
        .status()
        .unwrap();
    assert!(st.success());
    let results = std::fs::read_to_string(out.join("results.csv")).unwrap();
    assert_eq!(results.lines().count(), 3);
    assert!(out.join("events").read_dir().unwrap().count() == 2);

    let again = dir.path().join("again");
    let st = bin()
        .arg("report")
        .arg("--results")
        .arg(out.join("results.csv"))
        .arg("--out")
        .arg(&again)
        .status()
        .unwrap();
    assert!(st.success());
    for f in ["results.csv", "fig5_throughput_vs_rb.csv", "fig6_throughput_vs_ue.csv"] {
        assert_eq!(
            std::fs::read(out.join(f)).unwrap(),
            std::fs::read(again.join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn failed_cells_give_nonzero_exit() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("env.conf");
    std::fs::write(&conf, SMALL_ENV).unwrap();
    let trace = dir.path().join("trace.csv");
    assert!(bin()
        .args(["generate-trace", "--ue", "3", "--config"])
        .arg(&conf)
        .arg("--out")
        .arg(&trace)
        .status()
        .unwrap()
        .success());
    let out = dir.path().join("run");
    let st = bin()
        .args(["run", "--policy", "max_sinr", "--rb", "50", "--ue", "3,4", "--seeds", "1"])
        .arg("--config")
        .arg(&conf)
        .arg("--trace")
        .arg(&trace)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(!st.success());
    let results = std::fs::read_to_string(out.join("results.csv")).unwrap();
    assert!(results.lines().any(|l| l.contains(",4,") && l.contains("failed")));
}

#[test]
fn bad_arguments_are_rejected() {
    assert!(!bin().args(["run", "--policy", "random", "--out", "x"]).status().unwrap().success());
    assert!(!bin()
        .args(["run", "--config", "/nonexistent.conf", "--out", "/tmp/never"])
        .status()
        .unwrap()
        .success());
}
