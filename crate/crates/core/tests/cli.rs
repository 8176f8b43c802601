use std::path::{Path, PathBuf};
use std::process::Command;

use pmc_core::cli::Report;

fn pmc() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_pmc"));
    c.env("PMC_LOG", "error");
    c
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn code(c: &mut Command) -> i32 {
    c.output().expect("binary runs").status.code().expect("exit code")
}

#[test]
fn converged_solve_exits_zero_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(pmc().args(["solve", "--config"]).arg(config("disk_half.toml")).arg("--out").arg(dir.path())), 0);
    let text = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    let rep = Report::from_json(&text).unwrap();
    assert_eq!(rep.outcome, "converged");
    assert_eq!(rep.to_json(), text);
    for f in ["u_final.csv", "summary.csv"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

#[test]
fn solves_are_bitwise_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        assert_eq!(code(pmc().args(["solve", "--config"]).arg(config("torus.toml")).arg("--out").arg(d.path())), 0);
    }
    for f in ["report.json", "u_final.csv", "summary.csv"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap();
        assert_eq!(x, y, "{f} differs between runs");
    }
}

#[test]
fn blow_up_exits_two_with_monitor() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(pmc().args(["solve", "--config"]).arg(config("counterexample.toml")).arg("--out").arg(dir.path())), 2);
    let rep = Report::from_json(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(rep.outcome, "blow_up");
    assert!(rep.omega_plus_cells + rep.omega_minus_cells > 0);
    assert!(dir.path().join("monitor.json").exists());
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    let text = std::fs::read_to_string(config("disk_half.toml")).unwrap().replace("c = 1.0", "c = 1.0\ncurvature = 2.0");
    std::fs::write(&bad, text).unwrap();
    assert_eq!(code(pmc().args(["solve", "--config"]).arg(&bad).arg("--out").arg(dir.path())), 1);
    assert_eq!(code(pmc().args(["solve", "--config"]).arg(dir.path().join("missing.toml"))), 1);
    assert_eq!(code(pmc().args(["verify", "nonsense", "--out"]).arg(dir.path())), 1);
    assert_eq!(code(pmc().arg("frobnicate")), 1);
    assert_eq!(code(pmc().arg("--help")), 0);
}

#[test]
fn verify_all_passes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(pmc().args(["verify", "all", "--seed", "3", "--out"]).arg(dir.path())), 0);
}

#[test]
fn verify_geometry_passes_and_is_seeded() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        assert_eq!(code(pmc().args(["verify", "geometry", "--seed", "7", "--out"]).arg(d.path())), 0);
    }
    let x = std::fs::read(a.path().join("verify.json")).unwrap();
    assert_eq!(x, std::fs::read(b.path().join("verify.json")).unwrap());
    let v: serde_json::Value = serde_json::from_slice(&x).unwrap();
    assert_eq!(v["pass"], true);
    assert_eq!(v["seed"], 7);
}

#[test]
fn sweep_writes_one_row_per_assignment() {
    let dir = tempfile::tempdir().unwrap();
    let c = code(
        pmc().args(["sweep", "--threads", "2", "--config"]).arg(config("sweeps/counterexample_beta.toml")).arg("--out").arg(dir.path()),
    );
    assert_eq!(c, 0);
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "index,problem.beta,outcome,sup_u,saturation_margin");
    assert_eq!(lines.len(), 4);
    assert!(lines[1..].iter().all(|l| l.contains(",blow_up,")));
}
