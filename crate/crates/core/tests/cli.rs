use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn qsubnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsubnet")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, v.to_string()).unwrap();
    p
}

fn stdout_json(o: &Output) -> Value {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn symmetric(eta_star: f64) -> Value {
    json!({
        "networks": [
            {"kind": "profile", "edge_count": 1000, "l_max": 2, "eta_bare": 0.1},
            {"kind": "profile", "edge_count": 1000, "l_max": 2, "eta_bare": 0.1}
        ],
        "backbone": {"fidelity": 1.0, "probability": eta_star},
        "thresholds": {"fidelity": 0.9, "probability": 0.016}
    })
}

#[test]
fn gen_network_triangle_and_errors() {
    let o = qsubnet(&["gen-network", "--nodes", "3", "--edges", "3", "--seed", "1"]);
    let g = stdout_json(&o);
    assert_eq!(g["edges"], json!([[0, 1], [0, 2], [1, 2]]));
    assert_eq!(qsubnet(&["gen-network", "--nodes", "3", "--edges", "1"]).status.code(), Some(2));
    assert_eq!(qsubnet(&["gen-network", "--nodes", "x", "--edges", "1"]).status.code(), Some(2));
    assert_eq!(qsubnet(&["gen-network", "--nodes", "60", "--edges", "59", "--seed", "1"]).status.code(), Some(3));
}

#[test]
fn gen_network_large_instance_with_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.json");
    let o = qsubnet(&["gen-network", "--nodes", "60", "--edges", "1000", "--seed", "7", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let g: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(g["node_count"], 60);
    assert_eq!(g["edges"].as_array().unwrap().len(), 1000);
    let meta: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("g.json.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["master_seed"], 7);
}

#[test]
fn optimize_symmetric_closed_forms() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", &symmetric(1.0));
    let v = stdout_json(&qsubnet(&["optimize", "--config", cfg.to_str().unwrap()]));
    let f = v["fidelity_solution"]["values"][0].as_f64().unwrap();
    let p = v["probability_solution"]["values"][1].as_f64().unwrap();
    assert!((f - 0.973643).abs() < 1e-6);
    assert!((p - 0.355656).abs() < 1e-6);
    assert_eq!(v["active_set"]["fidelity"], json!([[0, 1]]));
    assert_eq!(v["meta"]["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["meta"]["config_hash"].as_str().unwrap().len(), 64);
    // 1 - (1 - 0.1)^n >= 0.355656 needs n = 4.17..., so 5 attempts
    assert_eq!(v["ceil_attempts_per_edge"], json!([5.0, 5.0]));
}

#[test]
fn optimize_infeasible_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", &symmetric(0.01));
    let o = qsubnet(&["optimize", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("infeasible: backbone probability below threshold"));
}

#[test]
fn optimize_verify_reports_grid_gap() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({
        "networks": [
            {"kind": "profile", "edge_count": 1000, "l_max": 3, "eta_bare": 0.1},
            {"kind": "profile", "edge_count": 200, "l_max": 2, "eta_bare": 0.1}
        ],
        "backbone": {"fidelity": 0.98, "probability": 0.9},
        "thresholds": {"fidelity": 0.9, "probability": 0.01}
    });
    let cfg = write(dir.path(), "c.json", &cfg);
    let v = stdout_json(&qsubnet(&["optimize", "--config", cfg.to_str().unwrap(), "--verify"]));
    for p in ["fidelity", "probability"] {
        let ver = &v["verify"][p];
        assert_eq!(ver["resolution"], 1e-3);
        assert!(ver["cost_gap"].as_f64().unwrap() >= 0.0);
    }
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let mut bad = symmetric(1.0);
    bad["surprise"] = json!(1);
    let cfg = write(dir.path(), "c.json", &bad);
    assert_eq!(qsubnet(&["optimize", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(qsubnet(&["optimize", "--config", "/does/not/exist"]).status.code(), Some(2));
    let cfg = write(dir.path(), "d.json", &symmetric(1.0));
    // profiles have no graph to sweep over
    assert_eq!(qsubnet(&["sweep", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

fn triangle_config() -> Value {
    json!({
        "networks": [
            {"kind": "inline", "graph": {"id": "a", "node_count": 3, "edges": [[0,1],[1,2],[0,2]], "gateway": 0}},
            {"kind": "inline", "graph": {"id": "b", "node_count": 3, "edges": [[0,1],[1,2],[0,2]], "gateway": 0}}
        ],
        "backbone": {"fidelity": 1.0, "probability": 1.0},
        "thresholds": {"fidelity": 0.9, "probability": 0.016,
                       "key_rate": {"min_rate": 1000.0, "rep_rate": 1e6}},
        "master_seed": 3
    })
}

#[test]
fn sweep_single_perfect_point() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = triangle_config();
    cfg["sweep"] = json!({
        "fidelity_grid": [1.0],
        "ratios": [0.5],
        "fidelity": {"kind": "homogeneous", "mean": 1.0},
        "probability": {"kind": "homogeneous", "mean": 1.0},
        "demand_count": 20,
        "config_samples": 3
    });
    let cfg = write(dir.path(), "c.json", &cfg);
    let out = dir.path().join("s.csv");
    let o = qsubnet(&["sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv, "mean_fidelity,r,mean_psat,std_psat,samples\n1,0.5,1,0,3\n");
    let meta: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("s.csv.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["master_seed"], 3);
}

#[test]
fn simulate_perfect_network() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = triangle_config();
    cfg["simulate"] = json!({
        "fidelity": {"kind": "homogeneous", "mean": 1.0},
        "probability": {"kind": "homogeneous", "mean": 1.0},
        "demand_count": 12,
        "ratio": 0.5
    });
    let cfg = write(dir.path(), "c.json", &cfg);
    let v = stdout_json(&qsubnet(&["simulate", "--config", cfg.to_str().unwrap()]));
    assert_eq!(v["psat"], 1.0);
    assert_eq!(v["demands"].as_array().unwrap().len(), 12);
    assert!(v["demands"].as_array().unwrap().iter().all(|d| d["satisfied"] == true));
}

#[test]
fn simulate_keyrate_threshold_point() {
    // F = 0.9 on one edge, eta chosen so that the rate sits at about 1 kHz
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = triangle_config();
    cfg["mode"] = json!("keyrate");
    cfg["simulate"] = json!({
        "edge_states": [
            [{"fidelity": 0.9, "probability": 0.016129}, {"fidelity": 0.9, "probability": 0.016129},
             {"fidelity": 0.9, "probability": 0.016129}],
            [{"fidelity": 1.0, "probability": 1.0}, {"fidelity": 1.0, "probability": 1.0},
             {"fidelity": 1.0, "probability": 1.0}]
        ],
        "demands": [{"source": {"network": 0, "node": 1}, "destination": {"network": 0, "node": 2}}]
    });
    let cfg = write(dir.path(), "c.json", &cfg);
    let v = stdout_json(&qsubnet(&["simulate", "--config", cfg.to_str().unwrap()]));
    let rate = v["demands"][0]["key_rate"].as_f64().unwrap();
    assert!((rate - 1000.0).abs() < 1.0, "{rate}");
    assert_eq!(v["demands"][0]["path"], json!([{"network": 0, "node": 1}, {"network": 0, "node": 2}]));
}

#[test]
fn sweep_is_reproducible_with_explicit_seed() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = triangle_config();
    cfg["sweep"] = json!({
        "fidelity_grid": [0.9, 0.95, 1.0],
        "ratios": [0.1, 0.9],
        "fidelity": {"kind": "truncated-normal", "mean": 0.95, "std": 0.05},
        "probability": {"kind": "truncated-normal", "mean": 0.9, "std": 0.05},
        "demand_count": 30,
        "config_samples": 4
    });
    let cfg = write(dir.path(), "c.json", &cfg);
    let run = |threads: &str| {
        let o = qsubnet(&["sweep", "--config", cfg.to_str().unwrap(), "--seed", "11", "--threads", threads]);
        assert!(o.status.success());
        o.stdout
    };
    assert_eq!(run("1"), run("3"));
}
