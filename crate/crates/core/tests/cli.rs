use std::process::{Command, Output};

use turbox::optimize::SweepTable;
use turbox::{evaluate, params, Family, SteadyReport, TurReport, ValidationReport};

fn turbox(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_turbox")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn tur_matches_library_bit_for_bit() {
    let o = turbox(&["tur", "--model", "qubit", "--p", "1", "--R", "0.3", "--g", "0.25", "--delta", "0"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rep: TurReport = serde_json::from_str(&stdout(&o)).unwrap();
    let lib = evaluate(&Family::Qubit.build(&params([("p", 1.0), ("R", 0.3), ("g", 0.25), ("delta", 0.0)])).unwrap())
        .unwrap();
    assert_eq!(rep.Q.to_bits(), lib.Q.to_bits());
    assert_eq!(rep, lib);
}

#[test]
fn inline_model_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let m = Family::Qutrit.build(&params([])).unwrap();
    let doc = turbox::ModelDoc::try_from(&m).unwrap();
    let cfg = dir.path().join("model.json");
    std::fs::write(&cfg, serde_json::json!({ "model": doc }).to_string()).unwrap();
    let out = dir.path().join("steady.json");
    let o = turbox(&["steady", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    let rep: SteadyReport = serde_json::from_str(&text).unwrap();
    assert_eq!(rep, turbox::steady_report(&m).unwrap());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 2, "no temp files left behind");
}

#[test]
fn sweep_csv_has_versioned_header_and_minimum_near_half() {
    let o = turbox(&["sweep", "--model", "qubit", "--r0", "0.947", "--grid", "r_ratio=0.05:0.95:19"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "# turbox sweep v1 family=qubit");
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header.first(), Some(&"r_ratio"));
    assert_eq!(header.last(), Some(&"status"));
    let qi = header.iter().position(|&c| c == "Q").unwrap();
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[qi].parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 19);
    let best = rows.iter().min_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
    assert!((best.0 - 0.5).abs() < 1e-9, "{best:?}");
    let k = rows.iter().position(|r| r == best).unwrap();
    assert!(rows[..=k].windows(2).all(|w| w[1].1 < w[0].1));
    assert!(rows[k..].windows(2).all(|w| w[1].1 > w[0].1));
}

#[test]
fn sweep_json_round_trips() {
    let o = turbox(&["sweep", "--model", "two-qubit", "--grid", "g=0.1:0.3:3", "--format", "json"]);
    assert!(o.status.success());
    let t: SweepTable = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(t.rows.len(), 3);
    assert_eq!(serde_json::from_str::<SweepTable>(&serde_json::to_string(&t).unwrap()).unwrap(), t);
}

#[test]
fn oracle_curve_passes_through_origin() {
    let o = turbox(&["oracle", "--model", "fridge", "--chi-max", "0.4", "--chi-points", "9"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.starts_with("# turbox oracle v1 reservoir=1"));
    let rows: Vec<(f64, f64)> = text
        .lines()
        .skip(2)
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 9);
    let zero = rows.iter().find(|r| r.0 == 0.0).unwrap();
    assert!(zero.1.abs() <= 1e-10);
}

#[test]
fn optimize_is_seed_deterministic() {
    let args = ["optimize", "--model", "qubit", "--free", "r0=0.1:0.99", "--free", "r_ratio=0.1:0.9", "--seed", "5"];
    let a = turbox(&args);
    let b = turbox(&args);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert!((v["free"]["r0"].as_f64().unwrap() - 0.947).abs() < 2e-3);
}

#[test]
fn validation_failure_exits_two_with_report() {
    let o = turbox(&["validate", "--model", "qutrit", "--R0", "0.3", "--R1", "0.3"]);
    assert!(o.status.success(), "a valid qutrit passes");
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    let mut m = Family::Qutrit.build(&params([])).unwrap();
    m.reservoirs.truncate(1);
    let doc = turbox::ModelDoc::try_from(&m).unwrap();
    std::fs::write(&cfg, serde_json::json!({ "model": doc }).to_string()).unwrap();
    let o = turbox(&["validate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let rep: ValidationReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(!rep.valid);

    let o = turbox(&["tur", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"], "invalid-model");
}

#[test]
fn io_failure_exits_one() {
    let o = turbox(&["tur", "--model", "qubit", "--out", "/nonexistent-dir/x.json"]);
    assert_eq!(o.status.code(), Some(1));
    let o = turbox(&["tur", "--config", "/nonexistent-dir/cfg.json"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn unknown_parameter_and_bad_config_exit_two() {
    let o = turbox(&["tur", "--model", "qubit", "--R1", "0.3"]);
    assert_eq!(o.status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"modle": {}}"#).unwrap();
    let o = turbox(&["tur", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn study_config_drives_constrained_search() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("study.json");
    std::fs::write(
        &cfg,
        r#"{"study": {"family": "qutrit", "fixed": {"delta": 0, "R1": 0.129, "p_ratio": 0.83, "R0": 0.946},
                      "free": [{"name": "r_ratio", "min": 0.05, "max": 0.95}], "seed": 1}}"#,
    )
    .unwrap();
    let o = turbox(&["optimize", "--config", cfg.to_str().unwrap(), "--starts", "4"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["report"]["Q"].as_f64().unwrap() - 1.549).abs() < 2e-3);
}

#[test]
fn thread_cap_is_honoured() {
    let o = Command::new(env!("CARGO_BIN_EXE_turbox"))
        .args(["sweep", "--model", "qubit", "--grid", "g=0.1:0.2:2"])
        .env("TURBOX_THREADS", "1")
        .output()
        .unwrap();
    assert!(o.status.success());
    let o = Command::new(env!("CARGO_BIN_EXE_turbox"))
        .args(["sweep", "--model", "qubit", "--grid", "g=0.1:0.2:2"])
        .env("TURBOX_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}
