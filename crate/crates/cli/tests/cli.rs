use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const EU_1957: &str = r#"{"weights":[4,4,4,2,2,1],"quota":12}"#;
const MAJ3: &str = r#"{"weights":[1,1,1],"threshold":0,"encoding":"pm1"}"#;
const DICTATOR: &str = r#"{"weights":[1,0,0],"threshold":0,"encoding":"pm1"}"#;

fn powindex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_powindex"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// `index,value` rows as pairs, header skipped.
fn csv_rows(text: &str) -> Vec<(usize, f64)> {
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("index,value"));
    lines
        .map(|l| {
            let (i, v) = l.split_once(',').unwrap();
            (i.parse().unwrap(), v.parse().unwrap())
        })
        .collect()
}

#[test]
fn luxembourg_has_no_power() {
    let dir = TempDir::new().unwrap();
    let game = write(&dir, "eu.json", EU_1957);
    let out = powindex(&["indices", "--game", s(&game), "--kind", "shapley", "--exact", "--format", "csv"]);
    assert!(out.status.success());
    let rows = csv_rows(&stdout(&out));
    assert_eq!(rows.len(), 6);
    assert_eq!(rows[5], (6, 0.0));
}

#[test]
fn majority_chow_rows() {
    let dir = TempDir::new().unwrap();
    let game = write(&dir, "maj.json", MAJ3);
    let out = powindex(&["indices", "--game", s(&game), "--kind", "chow", "--format", "csv"]);
    assert!(out.status.success());
    let rows = csv_rows(&stdout(&out));
    assert_eq!(rows, vec![(0, 0.0), (1, 0.5), (2, 0.5), (3, 0.5)]);
}

#[test]
fn unbiased_chow_matches_plain() {
    let dir = TempDir::new().unwrap();
    let game = write(&dir, "g.json", r#"{"weights":[3,1,1,0.5],"threshold":0.7,"encoding":"pm1"}"#);
    let plain = powindex(&["indices", "--game", s(&game), "--kind", "chow", "--format", "csv"]);
    let biased = powindex(&["indices", "--game", s(&game), "--kind", "chow", "--p", "0.5", "--format", "csv"]);
    let (a, b) = (csv_rows(&stdout(&plain)), csv_rows(&stdout(&biased)));
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.0, y.0);
        assert!((x.1 - y.1).abs() <= 1e-12);
    }
}

#[test]
fn estimates_are_seeded() {
    let dir = TempDir::new().unwrap();
    let game = write(&dir, "eu.json", EU_1957);
    let run = |seed: &str| {
        let out = powindex(&["estimate", "--game", s(&game), "--kind", "shapley", "--gamma", "0.2", "--seed", seed]);
        assert!(out.status.success());
        stdout(&out)
    };
    assert_eq!(run("5"), run("5"));
    let v: Value = serde_json::from_str(&run("5")).unwrap();
    let lux = v["values"][5].as_f64().unwrap();
    assert!(lux.abs() < 1e-12, "a null player is never pivotal");
    let chow = powindex(&["indices", "--estimate", "--game", s(&game), "--kind", "chow", "--positions", "0,1,6"]);
    let v: Value = serde_json::from_str(&stdout(&chow)).unwrap();
    assert_eq!(v["indices"], serde_json::json!([0, 1, 6]));
}

#[test]
fn hermite_and_correlation_kinds() {
    let dir = TempDir::new().unwrap();
    let game = write(&dir, "maj.json", MAJ3);
    let corr = powindex(&["indices", "--game", s(&game), "--kind", "corr", "--p", "0.5"]);
    assert!(corr.status.success());
    let v: Value = serde_json::from_str(&stdout(&corr)).unwrap();
    assert_eq!(v["kind"], "corr_p");
    let herm = powindex(&["indices", "--game", s(&game), "--kind", "hermite", "--samples", "20000"]);
    assert!(herm.status.success());
    let v: Value = serde_json::from_str(&stdout(&herm)).unwrap();
    // E[sign(x₁+x₂+x₃) x₁] = √(2/(3π)) under N(0, I)
    let want = (2.0 / (3.0 * std::f64::consts::PI)).sqrt();
    assert!((v["values"][0].as_f64().unwrap() - want).abs() < 0.05);
    let missing_p = powindex(&["indices", "--game", s(&game), "--kind", "corr"]);
    assert_eq!(missing_p.status.code(), Some(3));
}

#[test]
fn chow_round_trip() {
    let dir = TempDir::new().unwrap();
    let game = write(&dir, "g.json", r#"{"weights":[5,3,2,1,1,1],"threshold":1,"encoding":"pm1"}"#);
    let full = dir.path().join("full.json");
    assert!(powindex(&["indices", "--game", s(&game), "--kind", "chow", "-o", s(&full)]).status.success());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&full).unwrap()).unwrap();
    let vals = v["values"].as_array().unwrap();
    let partial = serde_json::json!({
        "kind": "chow", "n": 6, "indices": [0, 1, 2, 5],
        "values": [v["degree0"], vals[0], vals[1], vals[4]],
    });
    let input = write(&dir, "partial.json", &partial.to_string());
    let out_path = dir.path().join("out.json");
    let out = powindex(&[
        "reconstruct", "chow", "--input", s(&input), "--n", "6", "--eps", "0.2", "--delta", "0.1", "--exact",
        "-o", s(&out_path),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(r["certified"], true);
    assert!(r["achieved_distance"].as_f64().unwrap() <= 0.4);
    assert!(r["candidates_tried"].as_u64().unwrap() >= 1);
    // the reported function is itself a loadable game
    let back = write(&dir, "back.json", &r["ltf"].to_string());
    let d = powindex(&["distance", "--f", s(&back), "--g", s(&game), "--positions", "0,1,2,5"]);
    let d: f64 = stdout(&d).trim().parse().unwrap();
    assert!((d - r["achieved_distance"].as_f64().unwrap()).abs() < 1e-9);
}

#[test]
fn shapley_round_trip_with_config_file() {
    let dir = TempDir::new().unwrap();
    let game = write(&dir, "eu.json", EU_1957);
    let full = dir.path().join("shap.json");
    assert!(powindex(&["indices", "--game", s(&game), "--kind", "shapley", "-o", s(&full)]).status.success());
    let cfg = write(&dir, "run.cfg", "# solver settings\neps = 0.9\ndelta = 0.1\nhead_cap = 2\n");
    let manifest = dir.path().join("manifest.json");
    let out = powindex(&[
        "reconstruct", "shapley", "--input", s(&full), "--eps", "0.25", "--config", s(&cfg),
        "--manifest", s(&manifest), "--seed", "3",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(r["certified"], true);
    assert!(r.get("head_size_guess").is_some() && r.get("w1").is_some() && r.get("w2").is_some());
    let m: Value = serde_json::from_str(&std::fs::read_to_string(&manifest).unwrap()).unwrap();
    // the flag beat the file, the file set what the flag did not
    assert_eq!(m["config"]["eps"], 0.25);
    assert_eq!(m["config"]["head_cap"], 2);
    assert_eq!(m["seed"], 3);
    assert_eq!(m["inputs"].as_array().unwrap().len(), 1);
    assert_eq!(m["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
    assert_eq!(m["outputs"][0]["path"], "-");
}

#[test]
fn reruns_are_identical() {
    let dir = TempDir::new().unwrap();
    let input = write(
        &dir,
        "p.json",
        r#"{"kind":"chow","n":5,"indices":[0,1,2],"values":[0.1,0.45,0.3]}"#,
    );
    let run = |threads: &str| {
        let out = powindex(&["reconstruct", "chow", "--input", s(&input), "--sampled", "--seed", "9", "--threads", threads]);
        (out.status.code(), stdout(&out))
    };
    let first = run("1");
    assert_eq!(first, run("1"));
    assert_eq!(first, run("2"));
}

#[test]
fn uncertified_exits_one() {
    let dir = TempDir::new().unwrap();
    // no LTF has these Chow parameters
    let input = write(&dir, "p.json", r#"{"kind":"chow","n":2,"indices":[0,1,2],"values":[0.9,0.9,0.9]}"#);
    let out = powindex(&["reconstruct", "chow", "--input", s(&input), "--eps", "0.05"]);
    assert_eq!(out.status.code(), Some(1));
    let r: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(r["certified"], false);
}

#[test]
fn asymptotic_parameters_only() {
    let out = powindex(&["reconstruct", "chow", "--paper-exact", "--eps", "0.1"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["log10_tau"], -1000.0);
    let out = powindex(&["reconstruct", "shapley", "--paper-exact", "--n", "50", "--eps", "0.3", "--form", "via-tau"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["form"], "via_tau");
    assert_eq!(v["delta"], 1.0 / 2500.0);
}

#[test]
fn malformed_json_reports_position() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "bad.json", "{\"kind\": \"chow\",\n \"n\": 3,\n \"values\": [0.5, 0.5,, 0.5]}");
    let out = powindex(&["reconstruct", "chow", "--input", s(&input)]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 3"), "{err}");
    assert!(err.contains("column"), "{err}");
    let game = write(&dir, "bad_game.json", "{\"weights\": [1, 2}");
    let out = powindex(&["indices", "--game", s(&game)]);
    assert_eq!(out.status.code(), Some(2));
    let wrong = write(&dir, "wrong.json", r#"{"weights":[1,2]}"#);
    assert_eq!(powindex(&["indices", "--game", s(&wrong)]).status.code(), Some(2));
}

#[test]
fn sample_rows_match_count() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("samples.csv");
    let out = powindex(&["sample-dshap", "-n", "6", "--count", "250", "--seed", "2", "-o", s(&path)]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x1,x2,x3,x4,x5,x6"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 250);
    for r in rows {
        let cells: Vec<i32> = r.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cells.len(), 6);
        assert!(cells.contains(&1) && cells.contains(&-1));
    }
    let json = powindex(&["sample-dshap", "-n", "4", "--count", "7", "--format", "json"]);
    let v: Value = serde_json::from_str(&stdout(&json)).unwrap();
    assert_eq!(v["samples"].as_array().unwrap().len(), 7);
}

#[test]
fn distances() {
    let dir = TempDir::new().unwrap();
    let maj = write(&dir, "maj.json", MAJ3);
    let dict = write(&dir, "dict.json", DICTATOR);
    let d = |f: &Path, g: &Path, metric: &str| -> f64 {
        let out = powindex(&["distance", "--f", s(f), "--g", s(g), "--metric", metric]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        stdout(&out).trim().parse().unwrap()
    };
    for m in ["hamming", "chow", "shapley"] {
        assert_eq!(d(&maj, &maj, m), 0.0);
    }
    assert!((d(&maj, &dict, "chow") - 3f64.sqrt() / 2.0).abs() < 1e-12);
    assert!((d(&maj, &dict, "hamming") - 0.25).abs() < 1e-12);
    // index files work as operands too
    let v = dir.path().join("v.json");
    assert!(powindex(&["indices", "--game", s(&maj), "-o", s(&v)]).status.success());
    assert_eq!(d(&v, &v, "chow"), 0.0);
    assert!((d(&v, &dict, "chow") - 3f64.sqrt() / 2.0).abs() < 1e-12);
}

#[test]
fn selftest_subset() {
    let out = powindex(&["selftest", "--only", "1,2"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines.iter().all(|l| l.starts_with("[PASS]")));
}
