use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn umbilic(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_umbilic"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn cusps(v: &Value) -> Vec<[f64; 2]> {
    v["curves"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|c| c["cusps"].as_array().unwrap().clone())
        .map(|k| [k["point"][0].as_f64().unwrap(), k["point"][1].as_f64().unwrap()])
        .collect()
}

#[test]
fn verify_fixtures_passes() {
    let d = tempfile::tempdir().unwrap();
    let o = umbilic(d.path(), &["verify", "--fixtures"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS outer_ring.product"));
    let v = read_json(&d.path().join("verify.json"));
    assert!(v.as_array().unwrap().iter().all(|e| e["passed"] == true));
}

#[test]
fn verify_list_names_the_fixtures() {
    let d = tempfile::tempdir().unwrap();
    let s = stdout(&umbilic(d.path(), &["verify", "--list"]));
    for name in [
        "crossing_same_separatrix",
        "crossing_four_regions",
        "crossing_five_regions",
        "fold_endpoint_outside_wall",
        "fold_endpoint_reentry",
        "cusp_12_case_a",
        "cusp_13_case_b",
        "cusp_23_case_a",
        "outer_ring",
    ] {
        assert!(s.contains(name), "{name} missing from {s}");
    }
}

#[test]
fn caustic_has_three_cusps_stable_under_refinement() {
    let d = tempfile::tempdir().unwrap();
    let o = umbilic(d.path(), &["caustic", "--preset", "umbilic", "--eps", "0.1"]);
    assert_eq!(o.status.code(), Some(0));
    let coarse = cusps(&read_json(&d.path().join("caustic.json")));
    assert_eq!(coarse.len(), 3);
    let svg = std::fs::read_to_string(d.path().join("caustic.svg")).unwrap();
    assert_eq!(svg.matches(r#"fill="red""#).count(), 3);

    let fine_dir = tempfile::tempdir().unwrap();
    let o = umbilic(fine_dir.path(), &["caustic", "--eps", "0.1", "--grid", "720", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let fine = cusps(&read_json(&fine_dir.path().join("caustic.json")));
    for c in &coarse {
        let d = fine.iter().map(|k| (k[0] - c[0]).hypot(k[1] - c[1])).fold(f64::INFINITY, f64::min);
        assert!(d < 1e-4);
    }
}

#[test]
fn unperturbed_caustic_is_a_point() {
    let d = tempfile::tempdir().unwrap();
    let o = umbilic(d.path(), &["caustic", "--eps", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("single point"));
}

#[test]
fn config_errors_exit_with_two() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(umbilic(d.path(), &["caustic", "--tol-wall=0"]).status.code(), Some(2));
    assert_eq!(umbilic(d.path(), &["caustic", "--window", "0.01"]).status.code(), Some(2));
    assert_eq!(umbilic(d.path(), &["caustic", "--config", "/nonexistent.json"]).status.code(), Some(2));
    assert_eq!(umbilic(d.path(), &["monodromy", "--loop", "{"]).status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_with_three() {
    let d = tempfile::tempdir().unwrap();
    let g = d.path().join("g.json");
    std::fs::write(&g, r#"{"regions":[],"walls":[],"cusps":[],"twist_lines":[]}"#).unwrap();
    let o = umbilic(
        d.path(),
        &["monodromy", "--graph", g.to_str().unwrap(), "--loop", r#"{"base":0,"crossings":[]}"#],
    );
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn graph_is_deterministic_and_monodromy_closes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = umbilic(d.path(), &["graph", "--eps", "0.1"]);
        assert_eq!(o.status.code(), Some(0));
    }
    let ja = std::fs::read(a.path().join("graph.json")).unwrap();
    let jb = std::fs::read(b.path().join("graph.json")).unwrap();
    assert_eq!(ja, jb);
    let v: Value = serde_json::from_slice(&ja).unwrap();
    assert_eq!(v["cusps"].as_array().unwrap().len(), 3);
    assert_eq!(v["twist_lines"].as_array().unwrap().len(), 3);

    let walls = v["walls"].as_array().unwrap();
    assert!(walls.iter().any(|w| w["kind"] == "bifurcation"));
    let o = umbilic(a.path(), &["monodromy", "--loop", r#"{"center":[0,0],"radius":0.5}"#]);
    assert_eq!(o.status.code(), Some(0));
    let m = read_json(&a.path().join("monodromy.json"));
    assert_eq!(m["all"]["is_identity"], true);
    assert_eq!(m["no_twist"]["trace"], 0);
    assert_eq!(m["no_twist"]["det"], -1);
}

#[test]
fn unperturbed_graph_has_three_half_lines() {
    let d = tempfile::tempdir().unwrap();
    let o = umbilic(d.path(), &["graph", "--eps", "0", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = read_json(&d.path().join("graph.json"));
    assert_eq!(v["walls"].as_array().unwrap().len(), 3);
    assert_eq!(v["regions"].as_array().unwrap().len(), 3);
}

#[test]
fn mirror_sample_writes_csv() {
    let d = tempfile::tempdir().unwrap();
    let o = umbilic(
        d.path(),
        &["mirror-sample", "--preset", "umbilic-coefficient", "--eps", "0", "--anchor", "1,0", "--n", "4"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(d.path().join("mirror.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x1,x2,sheet,y1,y2,h,re_weight,im_weight"));
    assert_eq!(lines.count(), 32);
}

#[test]
fn flags_override_config_file() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("run.json");
    std::fs::write(&cfg, r#"{"perturbation": {"eps": 0.0}, "window": 0.5}"#).unwrap();
    let o = umbilic(d.path(), &["caustic", "--config", cfg.to_str().unwrap(), "--eps", "0.1", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(cusps(&read_json(&d.path().join("caustic.json"))).len(), 3);
}
