//! End-to-end runs of the `zr-fprk` binary and the collision drivers.

use std::fs;
use std::process::Command;

use zr_fprk::harness::{cmd_collide, Command as Cmd, Overrides, RunConfig};
use zr_fprk::model::CollisionCase;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_zr-fprk"))
}

#[test]
fn selftest_exits_zero() {
    let out = bin().arg("selftest").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.matches("PASS").count(), 4, "{text}");
}

#[test]
fn run_with_config_file_and_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "h = 0.125\ntau = \"1/50\"\nT = 1\ncadence = 5\nscheme = \"fprk3\"\n").unwrap();
    let out_dir = dir.path().join("out");
    let st = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .args(["--T", "0.4", "--emit-plots", "--out"])
        .arg(&out_dir)
        .status()
        .unwrap();
    assert!(st.success());
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(out_dir.join("run.json")).unwrap()).unwrap();
    assert_eq!(json["config"]["T"], 0.4);
    assert_eq!(json["config"]["N"], 512);
    assert_eq!(json["config"]["scheme"], "fprk3");
    assert_eq!(json["steps"], 20);
    assert!(json["final_errors"]["e_B"].as_f64().unwrap() < 1e-8);
    let inv = fs::read_to_string(out_dir.join("invariants.csv")).unwrap();
    assert_eq!(inv.lines().count(), 1 + 5);
    assert!(out_dir.join("snapshots.gp").exists());
}

#[test]
fn invalid_config_writes_error_record() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin().args(["run", "--tau", "0", "--out"]).arg(dir.path()).output().unwrap();
    assert!(!out.status.success());
    let rec: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("error.json")).unwrap()).unwrap();
    assert_eq!(rec["status"], "error");
    assert_eq!(rec["kind"], "config");
}

#[test]
fn converge_time_cli() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "N = 256\nT = 0.4\ntau_ladder = [0.1, 0.05]\n").unwrap();
    let st = bin().args(["converge-time", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).status().unwrap();
    assert!(st.success());
    let csv = fs::read_to_string(dir.path().join("converge_time_fprk2.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "tau,e_B,rate_B,e_rho,rate_rho,e_u,rate_u,oracle");
    assert!(lines.next().unwrap().ends_with(",analytic-negated"));
}

#[test]
fn case_two_collision_is_inelastic() {
    let dir = tempfile::tempdir().unwrap();
    let ov = Overrides {
        case: Some(CollisionCase::II),
        out: Some(dir.path().to_path_buf()),
        ..Default::default()
    };
    let cfg = RunConfig::resolve(Cmd::Collide, None, &ov).unwrap();
    assert_eq!((cfg.a, cfg.b, cfg.t_final, cfg.n), (-24.0, 24.0, 12.0, 384));
    let rep = cmd_collide(&cfg).unwrap();
    assert_eq!(rep.steps, 2400);
    assert!(rep.inelasticity.unwrap() > 1e-2);
    assert!(rep.drift.relative.mass < 1e-12 && rep.drift.relative.hamiltonian < 1e-12);
    let snaps = fs::read_to_string(dir.path().join("snapshots.csv")).unwrap();
    assert_eq!(snaps.lines().count(), 1 + rep.snapshot_frames * 384);
}
