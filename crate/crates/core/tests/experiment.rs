use std::fs;

use serde_json::{json, Value};
use vplab::stability::{stability_experiment, ExperimentConfig};

fn config(dir: &std::path::Path, perturbation: Value) -> ExperimentConfig {
    let text = json!({
        "steady": {"k": 1.0, "M": 1.0},
        "perturbation": perturbation,
        "integrator": {"method": "direct"},
        "N": 400,
        "seed": 4,
        "horizon_tdyn": 1.0,
        "cadence_tdyn": 0.5,
        "shift": {"bulk_fraction": 0.9},
        "output_dir": dir,
    });
    ExperimentConfig::from_json(&text.to_string()).unwrap()
}

#[test]
fn writes_output_tree() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), json!({"kind": "amplitude", "epsilon": 0.05}));
    let rep = stability_experiment(&cfg).unwrap();
    assert_eq!(rep.records.len(), 3);
    assert!(rep.halted.is_none());
    assert!(rep.max_identity_residual < 1e-6);

    let manifest: Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["status"], "complete");
    assert_eq!(manifest["seed"], 4);
    assert!(manifest["softening"].as_f64().unwrap() > 0.0);

    let metrics = fs::read_to_string(tmp.path().join("metrics.csv")).unwrap();
    let mut lines = metrics.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,a_x,a_y,a_z,e_kin,e_pot,casimir,h_c,p,d,field_dist,d0,field0,total0,total_opt"
    );
    assert_eq!(lines.count(), 3);

    let conc = fs::read_to_string(tmp.path().join("concentration.csv")).unwrap();
    assert!(conc.starts_with("t,radius,mass"));
    let snaps: Vec<_> = fs::read_dir(tmp.path().join("snapshots")).unwrap().collect();
    assert_eq!(snaps.len(), 2);
}

#[test]
fn boost_shift_follows_the_drift() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), json!({"kind": "boost", "velocity": [0.1, 0.0, 0.0]}));
    let rep = stability_experiment(&cfg).unwrap();
    let last = rep.records.last().unwrap();
    let expect = 0.1 * last.report.t;
    assert!((last.shift.shift[0] - expect).abs() < 0.1 * rep.steady_summary["R"].as_f64().unwrap());
    assert!(last.total_opt <= last.total0);
}

#[test]
fn bad_config_leaves_no_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let mut cfg = config(&out, json!({"kind": "amplitude", "epsilon": 0.05}));
    cfg.n = 3;
    assert!(stability_experiment(&cfg).is_err());
    assert!(!out.exists());
    let mut cfg = config(&out, json!({"kind": "amplitude", "epsilon": 5.0}));
    cfg.n = 400;
    assert!(stability_experiment(&cfg).is_err());
    assert!(!out.exists());
}
