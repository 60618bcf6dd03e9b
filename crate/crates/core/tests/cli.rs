use std::fs;
use std::process::Command;

use serde_json::Value;
use tildea::engine::Seed;
use tildea::{ArcLift, MarkedAnnulus, Quiver, Triangulation};

fn tildea(args: &[&str]) -> (i32, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_tildea")).args(args).output().unwrap();
    let stdout = String::from_utf8(out.stdout).unwrap();
    (out.status.code().unwrap(), serde_json::from_str(&stdout).unwrap_or(Value::Null))
}

fn scratch(name: &str, value: &impl serde::Serialize) -> String {
    let dir = std::env::temp_dir().join(format!("tildea-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string(value).unwrap()).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn classify_and_mutate_quiver() {
    let q = Quiver::tilde_a(2, 1).unwrap();
    let file = scratch("q.json", &q);
    let (code, v) = tildea(&["classify", "--quiver", &file]);
    assert_eq!(code, 0);
    assert_eq!(v, serde_json::json!({"type": "TildeA", "p": 2, "q": 1}));
    let (code, v) = tildea(&["mutate-quiver", "--quiver", &file, "--at", "1"]);
    assert_eq!(code, 0);
    let mutated: Quiver = serde_json::from_value(v).unwrap();
    assert_eq!(mutated, q.mutate(1).unwrap());

    let cycle = scratch("cycle.json", &Quiver::from_arrows(3, &[(0, 1), (1, 2), (2, 0)]).unwrap());
    assert_eq!(tildea(&["classify", "--quiver", &cycle]).1, serde_json::json!({"type": "Other"}));
}

#[test]
fn seed_mutation_and_graph() {
    let seed = Seed::initial(Quiver::tilde_a(1, 1).unwrap());
    let file = scratch("seed.json", &seed);
    let (code, v) = tildea(&["mutate-seed", "--seed", &file, "--at", "0", "--trace"]);
    assert_eq!(code, 0);
    let next: Seed = serde_json::from_value(v["seed"].clone()).unwrap();
    assert_eq!(next, seed.mutate(0).unwrap());
    assert!(v["exchange"]["out"].is_object());

    let dot = std::env::temp_dir().join(format!("tildea-cli-{}", std::process::id())).join("g.dot");
    let (code, v) = tildea(&["exchange-graph", "--seed", &file, "--depth", "3", "--dot", dot.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(v["nodes"].as_array().unwrap().len(), 7);
    assert!(fs::read_to_string(dot).unwrap().starts_with("graph exchange"));
}

#[test]
fn annulus_commands() {
    let c = MarkedAnnulus::new(2, 1).unwrap();
    let t = Triangulation::initial(c);
    let file = scratch("t.json", &t);
    let (code, v) = tildea(&["annulus", "flip", "--triangulation", &file, "--arc", "1"]);
    assert_eq!(code, 0);
    let flipped: Triangulation = serde_json::from_value(v["triangulation"].clone()).unwrap();
    assert_eq!(flipped, t.flip(1).unwrap().triangulation);

    let arc = scratch("arc.json", &ArcLift::of(0, 0, 0, 2));
    let (code, v) = tildea(&["annulus", "variable", "--p", "2", "--q", "1", "--arc", &arc]);
    assert_eq!(code, 0);
    assert_eq!(v["variable"]["arity"], 3);

    let bad = scratch("bad.json", &ArcLift::of(0, 0, 0, 1));
    assert_eq!(tildea(&["annulus", "variable", "--p", "2", "--q", "1", "--arc", &bad]).0, 2);
}

#[test]
fn verify_reports_exit_codes() {
    let (code, v) = tildea(&["verify", "--report", "case3-n3"]);
    assert_eq!(code, 0);
    assert_eq!(v[0]["passed"], true);
    let (code, v) = tildea(&["verify", "--report", "cover-flip", "--p", "3", "--q", "2", "--seed-rng", "9"]);
    assert_eq!(code, 0);
    assert_eq!(v[0]["steps"].as_array().unwrap().len(), 20);
    // a bad annulus is an error, not a failed report
    assert_eq!(tildea(&["verify", "--report", "case2-geometric", "--p", "2", "--q", "1"]).0, 2);
}
