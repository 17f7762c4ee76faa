use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn scrambler(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scrambler")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn construct_small(dir: &Path, name: &str, levels: &str, seed: &str) -> String {
    let out = dir.join(name);
    let o = scrambler(&[
        "construct", "--measure", "bernoulli:0.5,0.5", "--delta", "0.05", "--hprime", "0.9", "--levels", levels,
        "--n1", "16", "--rho0", "2", "--seed", seed, "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    out.to_str().unwrap().to_string()
}

#[test]
fn entropy_golden_values() {
    for (spec, want) in [
        ("bernoulli:0.5,0.5", "1.000000\n"),
        ("bernoulli:0.3,0.7", "0.881291\n"),
        ("markov:0.9,0.1;0.5,0.5", "0.557496\n"),
    ] {
        let o = scrambler(&["entropy", "--measure", spec]);
        assert_eq!(code(&o), 0);
        assert_eq!(stdout(&o), want);
    }
}

#[test]
fn entropy_parse_error_names_token() {
    let o = scrambler(&["entropy", "--measure", "bernoulli:0.5,half"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("\"half\""));
    let o = scrambler(&["entropy", "--measure", "bernoulli:0.5,0.6"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn smcheck_golden_values() {
    let o = scrambler(&["smcheck", "--measure", "bernoulli:0.3", "--n", "4", "--epsilon", "0.3"]);
    assert_eq!(stdout(&o), "0.676200 false\n");
    assert_eq!(code(&o), 0);
    let o = scrambler(&["smcheck", "--measure", "bernoulli:0.5,0.5", "--n", "12", "--epsilon", "0.1"]);
    assert_eq!(stdout(&o), "1.000000 true\n");
    let o = scrambler(&["smcheck", "--measure", "bernoulli:0.3", "--n", "128", "--epsilon", "0.1"]);
    let text = stdout(&o);
    let (mass, holds) = text.trim().split_once(' ').unwrap();
    assert!(mass.parse::<f64>().unwrap() >= 0.9);
    assert_eq!(holds, "true");
}

#[test]
fn smcheck_enumeration_cap() {
    let o = scrambler(&["smcheck", "--measure", "markov:0.9,0.1;0.5,0.5", "--n", "25", "--epsilon", "0.1"]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
}

#[test]
fn ball_command() {
    let o = scrambler(&["ball", "--n", "8", "--delta", "0.25", "--l", "3"]);
    assert_eq!(stdout(&o), "129 809.086420 true\n");
}

#[test]
fn construct_verify_round_trip() {
    let dir = TempDir::new().unwrap();
    let tree = construct_small(dir.path(), "t.json", "2", "3");
    let o = scrambler(&["verify", "--tree", &tree]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("6/6 pairs pass"));
    let o = scrambler(&["verify", "--tree", &tree, "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["summary"]["pairs"], 6);
    assert_eq!(v["summary"]["valid"], true);
    let names: Vec<String> = v["pairs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| format!("{}-{}", p["a"].as_str().unwrap(), p["b"].as_str().unwrap()))
        .collect();
    assert_eq!(names, ["00-01", "00-10", "00-11", "01-10", "01-11", "10-11"]);
}

#[test]
fn construct_reports_budget_and_summary() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("t.json");
    let o = scrambler(&[
        "construct", "--measure", "bernoulli:0.5,0.5", "--delta", "0.05", "--hprime", "0.9", "--levels", "1",
        "--out", out.to_str().unwrap(),
    ]);
    let text = stdout(&o);
    assert!(text.starts_with("budget level 1: window 256"), "{text}");
    assert!(text.contains("leaves 2  windows 16,48,256"));
}

#[test]
fn construct_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = construct_small(dir.path(), "a.json", "2", "9");
    let b = construct_small(dir.path(), "b.json", "2", "9");
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let c = construct_small(dir.path(), "c.json", "2", "10");
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap());
    let p1 = scrambler(&["points", "--tree", &a, "--kappa", "01"]);
    let p2 = scrambler(&["points", "--tree", &b, "--kappa", "01"]);
    assert_eq!(p1.stdout, p2.stdout);
    assert_eq!(p1.stdout.len(), 13440 + 1);
}

#[test]
fn infeasible_delta_exits_4() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("t.json");
    let o = scrambler(&[
        "construct", "--measure", "bernoulli:0.5,0.5", "--delta", "0.2", "--hprime", "0.9", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 4);
    assert!(stderr(&o).contains("3δ = 0.600000 > 1/2"), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn hprime_above_entropy_exits_4() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("t.json");
    let o = scrambler(&[
        "construct", "--measure", "bernoulli:0.5,0.5", "--delta", "0.05", "--hprime", "1.0", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 4);
    assert!(stderr(&o).contains("h' < h"));
}

#[test]
fn single_root_tree() {
    let dir = TempDir::new().unwrap();
    let tree = construct_small(dir.path(), "t.json", "0", "0");
    let o = scrambler(&["points", "--tree", &tree, "--kappa", ""]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim().len(), 16);
    let o = scrambler(&["verify", "--tree", &tree]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("vacuous"));
}

#[test]
fn points_lookup_errors() {
    let dir = TempDir::new().unwrap();
    let tree = construct_small(dir.path(), "t.json", "1", "0");
    assert_eq!(code(&scrambler(&["points", "--tree", &tree, "--kappa", "01"])), 5);
    assert_eq!(code(&scrambler(&["points", "--tree", &tree, "--kappa", "x"])), 5);
    assert_eq!(code(&scrambler(&["points", "--tree", &tree, "--kappa", "0", "--length", "321"])), 5);
    let o = scrambler(&["points", "--tree", &tree, "--kappa", "1", "--length", "20"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim().len(), 20);
    let out = dir.path().join("p.txt");
    let o = scrambler(&["points", "--tree", &tree, "--kappa", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read_to_string(out).unwrap().trim().len(), 320);
}

#[test]
fn zeroed_block_fails_verification() {
    let dir = TempDir::new().unwrap();
    let tree = construct_small(dir.path(), "t.json", "2", "5");
    let mut doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&tree).unwrap()).unwrap();
    let block = doc["nodes"]["1"].as_str().unwrap();
    let zeroed = "0".repeat(block.len());
    doc["nodes"]["1"] = serde_json::Value::String(zeroed.clone());
    doc["nodes"]["0"] = serde_json::Value::String(zeroed);
    let bad = dir.path().join("bad.json");
    fs::write(&bad, serde_json::to_string(&doc).unwrap()).unwrap();
    let o = scrambler(&["verify", "--tree", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 6);
    let text = stdout(&o);
    for pair in ["00-10", "00-11", "01-10", "01-11"] {
        assert!(text.contains(&format!("{pair} FAIL")), "{text}");
    }
    assert!(text.contains("00-01 pass"));
    assert!(text.contains("NOT valid"));
}

#[test]
fn malformed_tree_exits_2() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"levels\": 1}").unwrap();
    assert_eq!(code(&scrambler(&["verify", "--tree", bad.to_str().unwrap()])), 2);
    let missing = dir.path().join("missing.json");
    assert_eq!(code(&scrambler(&["verify", "--tree", missing.to_str().unwrap()])), 2);
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = TempDir::new().unwrap();
    let tree = construct_small(dir.path(), "t.json", "2", "1");
    let one = Command::new(env!("CARGO_BIN_EXE_scrambler"))
        .args(["verify", "--tree", &tree, "--format", "json"])
        .env("SCRAMBLER_THREADS", "1")
        .output()
        .unwrap();
    let many = scrambler(&["verify", "--tree", &tree, "--format", "json"]);
    assert_eq!(one.stdout, many.stdout);
}

fn write_column(path: &Path, header: bool, values: impl IntoIterator<Item = f64>) {
    let mut s = String::new();
    if header {
        s.push_str("# trajectory\n");
    }
    for v in values {
        s.push_str(&format!("{v:?}\n"));
    }
    fs::write(path, s).unwrap();
}

#[test]
fn profile_identical_files() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.txt");
    write_column(&a, true, (0..500).map(|i| (i as f64 * 0.1).sin()));
    let o = scrambler(&["profile", "--a", a.to_str().unwrap(), "--b", a.to_str().unwrap(), "--t", "0.001,0.5", "--format", "json", "--strict"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    for row in v["rows"].as_array().unwrap() {
        assert_eq!(row["average"], 0.0);
        assert!(row["density"].as_array().unwrap().iter().all(|f| f == 1.0));
    }
}

#[test]
fn profile_alternating_fixture() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (dir.path().join("a.txt"), dir.path().join("b.txt"));
    write_column(&a, false, (0..100).map(|_| 0.0));
    write_column(&b, true, (0..100).map(|i| (i % 2) as f64));
    let o = scrambler(&[
        "profile", "--a", a.to_str().unwrap(), "--b", b.to_str().unwrap(), "--t", "0.5", "--checkpoints", "10,20,100",
        "--strict",
    ]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    for n in ["10", "20", "100"] {
        let line = text.lines().find(|l| l.split_whitespace().next() == Some(n)).unwrap();
        assert_eq!(line.split_whitespace().collect::<Vec<_>>(), [n, "0.500000", "0.500000"]);
    }
    assert!(text.contains("0 violated"));
}

#[test]
fn profile_errors() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (dir.path().join("a.txt"), dir.path().join("b.txt"));
    write_column(&a, false, [0.0, 1.0]);
    fs::write(&b, "# h\n0.5\nnope\n").unwrap();
    let o = scrambler(&["profile", "--a", a.to_str().unwrap(), "--b", b.to_str().unwrap(), "--t", "0.5"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 3"));
    write_column(&b, false, [0.0]);
    let o = scrambler(&["profile", "--a", a.to_str().unwrap(), "--b", b.to_str().unwrap(), "--t", "0.5"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn profile_logistic_smoke() {
    let dir = TempDir::new().unwrap();
    let orbit = |x0: f64| {
        let mut x = x0;
        (0..10_000).map(move |_| {
            let v = x;
            x = 4.0 * x * (1.0 - x);
            v
        })
    };
    let (a, b) = (dir.path().join("a.txt"), dir.path().join("b.txt"));
    write_column(&a, false, orbit(0.2));
    write_column(&b, false, orbit(0.2000001));
    let o = scrambler(&[
        "profile", "--a", a.to_str().unwrap(), "--b", b.to_str().unwrap(), "--t", "0.01,0.1,0.5", "--diameter", "1",
        "--strict",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("0 violated"));
}

#[test]
fn lemmalab_exit_codes() {
    let o = scrambler(&["lemmalab", "--trials", "1", "--seed", "1"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("total failures 0"));
    let o = scrambler(&["lemmalab", "--trials", "200", "--seed", "1", "--broken-threshold", "--format", "json"]);
    assert_eq!(code(&o), 6);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["join"]["failures"].as_u64().unwrap() >= 1);
    assert_eq!(code(&scrambler(&["lemmalab", "--trials", "0"])), 2);
}
