use std::path::Path;
use std::process::{Command, Output};

fn twinhalo(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twinhalo"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("TWINHALO_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn simulate_then_analyze() {
    let dir = tempfile::tempdir().unwrap();
    let o = twinhalo(dir.path(), &["simulate", "--shots", "1000", "--seed", "5"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let events = dir.path().join("events.csv");
    let text = std::fs::read_to_string(&events).unwrap();
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    let hash = manifest["config_hash"].as_str().unwrap();
    assert!(text.contains(&format!("# config_hash: {hash}")));
    assert!(text.contains("# seed: 5"));
    assert!(text.lines().any(|l| l == "shot_id,vx,vy,vz,phase_index"));

    let o = twinhalo(dir.path(), &["analyze", "--events", events.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let results: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("results.json")).unwrap()).unwrap();
    assert_eq!(results["config_hash"].as_str().unwrap(), hash);
    assert_eq!(results["correlations"].as_array().unwrap().len(), 9);
    let csv = std::fs::read_to_string(dir.path().join("correlations.csv")).unwrap();
    assert_eq!(csv.lines().count(), 10);
    assert!(csv.starts_with("phase,c_same,c_same_err,c_between,c_between_err,e,e_err"));
}

#[test]
fn same_seed_same_store() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = twinhalo(d.path(), &["simulate", "--shots", "50", "--phases", "0,1.5,3"]);
        assert_eq!(code(&o), 0);
    }
    let read = |d: &tempfile::TempDir| std::fs::read(d.path().join("events.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
}

#[test]
fn model_tables() {
    let dir = tempfile::tempdir().unwrap();
    let o = twinhalo(dir.path(), &["model", "--lambda", "0.6"]);
    assert_eq!(code(&o), 0);
    let m: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("model.json")).unwrap()).unwrap();
    assert!((m["e0"].as_f64().unwrap() - 0.347).abs() < 0.005);
    let table = std::fs::read_to_string(dir.path().join("e_vs_phase.csv")).unwrap();
    assert_eq!(table.lines().next().unwrap(), "phase,c_same,c_between,e");
}

#[test]
fn bragg_scan_columns() {
    let dir = tempfile::tempdir().unwrap();
    let o = twinhalo(dir.path(), &["bragg", "scan", "--sigma", "3:3.5:2", "--alpha", "0.3:0.4:2"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let scan = std::fs::read_to_string(dir.path().join("scan.csv")).unwrap();
    let mut lines = scan.lines();
    assert_eq!(lines.next().unwrap(), "sigma_us,alpha_hbar,transfer_up,transfer_down");
    assert_eq!(lines.count(), 4);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"k0": 4.102, "warp_drive": true}"#).unwrap();
    let o = twinhalo(dir.path(), &["model", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("warp_drive"));

    let o = twinhalo(dir.path(), &["model", "--lambda", "0.5,0.5"]);
    assert_eq!(code(&o), 2);

    let store = dir.path().join("garbage.csv");
    std::fs::write(&store, "not an event store\n").unwrap();
    let o = twinhalo(dir.path(), &["analyze", "--events", store.to_str().unwrap()]);
    assert_eq!(code(&o), 3);

    let o = twinhalo(dir.path(), &["bragg", "spectrum", "--alpha", "0.4", "--sigma=-1"]);
    assert_eq!(code(&o), 4, "{}", String::from_utf8_lossy(&o.stderr));

    let o = twinhalo(dir.path(), &["bragg", "find", "--target", "1", "--sigma", "0.5:0.6:3", "--alpha", "0.01:0.02:3"]);
    assert_eq!(code(&o), 5, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("best residual"));
}

#[test]
fn too_few_shots_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = twinhalo(dir.path(), &["run", "--shots", "3"]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("coincidences"));
}
