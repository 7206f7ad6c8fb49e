use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn strokefrag(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_strokefrag")).args(args).current_dir(dir).output().expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Screen coordinates: 10 units down, then 10 units right.
fn l_stroke_json() -> String {
    let mut pts: Vec<[f64; 2]> = (0..=40).map(|i| [0.0, i as f64 * 0.25]).collect();
    pts.extend((1..=40).map(|i| [i as f64 * 0.25, 10.0]));
    serde_json::json!({"strokes": [{"id": "L", "points": pts}]}).to_string()
}

fn write(dir: &Path, name: &str, text: &str) {
    fs::write(dir.join(name), text).unwrap();
}

#[test]
fn fragments_an_l_stroke() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "l.json", &l_stroke_json());
    let out = strokefrag(&["fragment", "l.json", "-o", "out.json", "--svg", "out.svg"], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));

    let text = fs::read_to_string(dir.path().join("out.json")).unwrap();
    let json: Value = serde_json::from_str(&text).unwrap();
    let result = &json["results"][0];
    assert_eq!(result["id"], "L");
    let points = result["segment_points"].as_array().unwrap();
    assert_eq!(points.len(), 1);
    let corner = points[0].as_u64().unwrap();
    assert!((38..=42).contains(&corner), "corner at {corner}");
    let segs = result["segments"].as_array().unwrap();
    assert_eq!(segs.len(), 2);
    // down in screen coordinates is direction 6, then right is 0
    assert_eq!(segs[0]["kind"], "line");
    assert_eq!(segs[0]["direction"], 6);
    assert_eq!(segs[1]["direction"], 0);

    // round trip through the typed format
    let typed: strokefrag::io::FragmentationFile = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::to_value(&typed).unwrap(), json);

    let svg = fs::read_to_string(dir.path().join("out.svg")).unwrap();
    let doc = roxmltree::Document::parse(&svg).expect("well-formed SVG");
    let count = |tag: &str| doc.descendants().filter(|n| n.has_tag_name(tag)).count();
    assert_eq!(count("path"), 2);
    assert_eq!(count("circle"), 1);
}

#[test]
fn reads_stdin_and_writes_stdout() {
    let dir = TempDir::new().unwrap();
    let mut child = Command::new(env!("CARGO_BIN_EXE_strokefrag"))
        .arg("fragment")
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .current_dir(dir.path())
        .spawn()
        .unwrap();
    use std::io::Write;
    child.stdin.take().unwrap().write_all(l_stroke_json().as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    let json: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["results"][0]["segment_points"].as_array().unwrap().len(), 1);
}

#[test]
fn empty_input_is_fine() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "empty.json", r#"{"strokes": []}"#);
    let out = strokefrag(&["fragment", "empty.json", "--svg", "e.svg"], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    let json: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["results"].as_array().unwrap().len(), 0);
    roxmltree::Document::parse(&fs::read_to_string(dir.path().join("e.svg")).unwrap()).unwrap();
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "bad.json", "{\"strokes\": [");
    let out = strokefrag(&["fragment", "bad.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));

    let out = strokefrag(&["fragment", "missing.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));

    // shorter than the feature window
    write(dir.path(), "short.json", r#"{"strokes": [{"id": "tiny-one", "points": [[0,0],[0.5,0],[1,0]]}]}"#);
    let out = strokefrag(&["fragment", "short.json", "--config", "fixed.toml"], dir.path());
    assert_eq!(out.status.code(), Some(1), "missing config file is an input error");
    write(dir.path(), "fixed.toml", "step = 1.0\n");
    let out = strokefrag(&["fragment", "short.json", "--config", "fixed.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("tiny-one"), "{}", stderr(&out));

    write(dir.path(), "dot.json", r#"{"strokes": [{"id": "dot", "points": [[1,1]]}]}"#);
    let out = strokefrag(&["fragment", "dot.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("dot"));

    write(dir.path(), "typo.toml", "line_slef = 0.5\n");
    write(dir.path(), "l.json", &l_stroke_json());
    let out = strokefrag(&["fragment", "l.json", "--config", "typo.toml"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line_slef"));

    let out = strokefrag(&["fragment", "l.json", "--model", "hidden"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

fn hash(path: &Path) -> String {
    use std::collections::hash_map::DefaultHasher;
    use std::hash::{Hash, Hasher};
    let mut h = DefaultHasher::new();
    fs::read(path).unwrap().hash(&mut h);
    format!("{:016x}", h.finish())
}

#[test]
fn generation_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    assert!(strokefrag(&["gen", "-o", "a.json", "--truth", "ta.json"], d).status.success());
    assert!(strokefrag(&["gen", "-o", "b.json", "--truth", "tb.json"], d).status.success());
    assert!(strokefrag(&["gen", "--seed", "7", "-o", "c.json", "--truth", "tc.json"], d).status.success());
    assert_eq!(hash(&d.join("a.json")), hash(&d.join("b.json")));
    assert_eq!(hash(&d.join("ta.json")), hash(&d.join("tb.json")));
    assert_ne!(hash(&d.join("a.json")), hash(&d.join("c.json")));
    let corpus: Value = serde_json::from_str(&fs::read_to_string(d.join("a.json")).unwrap()).unwrap();
    assert_eq!(corpus["strokes"].as_array().unwrap().len(), 600);
}

#[test]
fn unknown_family_is_rejected() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "r.json", r#"{"seed": 1, "families": [{"family": "spiral", "count": 3}]}"#);
    let out = strokefrag(&["gen", "--recipe", "r.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("spiral"));
}

fn clean_recipe(dir: &Path) {
    write(
        dir,
        "clean.json",
        r#"{"seed": 5, "families": [{"family": "l_shape", "count": 6}, {"family": "square", "count": 6}, {"family": "circle", "count": 4}]}"#,
    );
    let out = strokefrag(&["gen", "--recipe", "clean.json", "-o", "c.json", "--truth", "t.json"], dir);
    assert!(out.status.success(), "{}", stderr(&out));
}

#[test]
fn clean_corpus_scores_perfectly() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    clean_recipe(d);
    let out = strokefrag(&["eval", "c.json", "t.json", "--json", "r.json", "--csv", "r.csv"], d);
    assert!(out.status.success(), "{}", stderr(&out));
    let table = String::from_utf8(out.stdout).unwrap();
    let all = table.lines().find(|l| l.starts_with("all")).unwrap();
    assert!(all.contains("0.00%"), "{table}");
    assert!(table.contains("ms/stroke"));
    let report: Value = serde_json::from_str(&fs::read_to_string(d.join("r.json")).unwrap()).unwrap();
    assert_eq!(report["false_positive_rate"], 0.0);
    assert_eq!(report["false_negative_rate"], 0.0);
    for s in report["strokes"].as_array().unwrap() {
        assert!(s["decode_ms"].as_f64().unwrap() >= 0.0);
    }
    let csv = fs::read_to_string(d.join("r.csv")).unwrap();
    assert_eq!(csv.lines().count(), 17);

    let out = strokefrag(&["eval", "c.json", "t.json", "--compare"], d);
    assert!(out.status.success());
    let table = String::from_utf8(out.stdout).unwrap();
    assert!(table.contains("FP struct") && table.contains("FP base") && table.contains("ms base"));
}

#[test]
fn eval_rejects_mismatched_ids() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    clean_recipe(d);
    let truth = fs::read_to_string(d.join("t.json")).unwrap().replacen("l_shape-0000", "renamed", 1);
    write(d, "t2.json", &truth);
    let out = strokefrag(&["eval", "c.json", "t2.json"], d);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("id mismatch"));
}

#[test]
fn dump_model_tables() {
    let dir = TempDir::new().unwrap();
    let out = strokefrag(&["dump-model"], dir.path());
    assert!(out.status.success());
    let m: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(m["states"].as_array().unwrap().len(), 82);
    assert_eq!(m["emissions"].as_array().unwrap().len(), 82);
    let out = strokefrag(&["dump-model", "--model", "ergodic"], dir.path());
    let m: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(m["states"].as_array().unwrap().len(), 24);
    assert_eq!(m["transitions"].as_array().unwrap().len(), 24 * 24);
}
