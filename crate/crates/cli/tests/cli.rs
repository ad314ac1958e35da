use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
        .display()
        .to_string()
}

fn cde(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cde")).args(args).output().unwrap()
}

fn structured(args: &[&str]) -> (i32, Value) {
    let mut full = args.to_vec();
    full.extend(["--format", "structured"]);
    let out = cde(&full);
    let code = out.status.code().unwrap();
    let value = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (code, value)
}

#[test]
fn analyze_six_clients() {
    let p = fixture("six_clients.problem.toml");
    let (code, v) = structured(&["analyze", "--problem", &p]);
    assert_eq!(code, 0);
    assert_eq!(v["rho_per_client"], serde_json::json!([4, 4, 4, 4, 4, 4]));
    assert_eq!(v["rho"], 4);
    assert_eq!(v["delta"], 1);
    assert_eq!(v["degree_bound"], "180");
}

#[test]
fn text_and_structured_carry_the_same_fields() {
    let p = fixture("six_clients.problem.toml");
    let text = String::from_utf8(cde(&["analyze", "--problem", &p]).stdout).unwrap();
    let (_, v) = structured(&["analyze", "--problem", &p]);
    for key in v.as_object().unwrap().keys() {
        assert!(text.lines().any(|l| l.starts_with(&format!("{key}:"))), "{key} missing from text");
    }
}

#[test]
fn analyze_edge_fixtures() {
    let out = cde(&["analyze", "--problem", &fixture("infeasible.problem.toml")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("client 1"));

    let (code, v) = structured(&["analyze", "--problem", &fixture("full.problem.toml")]);
    assert_eq!(code, 0);
    assert_eq!((v["rho"].as_u64(), v["delta"].as_u64()), (Some(0), Some(2)));
    assert!(v["note"].as_str().unwrap().contains("no decoding is needed"));
}

#[test]
fn input_errors_exit_1() {
    assert_eq!(cde(&["analyze", "--problem", "/no/such/file"]).status.code(), Some(1));
    assert_eq!(cde(&["frobnicate"]).status.code(), Some(1));
    let p = fixture("six_clients.problem.toml");
    assert_eq!(cde(&["analyze", "--problem", &p, "--field", "4"]).status.code(), Some(1));
    assert_eq!(cde(&["simulate", "--problem", &p, "--trials", "0"]).status.code(), Some(1));
    assert_eq!(cde(&["--help"]).status.code(), Some(0));
}

#[test]
fn verify_six_client_scheme() {
    let p = fixture("six_clients.problem.toml");
    // Over GF(3) every local distance is 2, so one error is not correctable.
    let (code, v) = structured(&["verify", "--problem", &p, "--matrix", &fixture("six_clients.matrix.toml")]);
    assert_eq!(code, 4);
    assert_eq!(v["distances"], serde_json::json!([2, 2, 2, 2, 2, 2]));

    let gf5 = fixture("six_clients_gf5.matrix.toml");
    let (code, v) = structured(&["verify", "--problem", &p, "--matrix", &gf5, "--delta", "1"]);
    assert_eq!(code, 0);
    assert_eq!(v["passed"], true);
    let (code, _) = structured(&["verify", "--problem", &p, "--matrix", &gf5, "--delta", "2"]);
    assert_eq!(code, 4);
    let (code, _) = structured(&["verify", "--problem", &p, "--matrix", &gf5, "--field", "3"]);
    assert_eq!(code, 1);
}

#[test]
fn verify_rejects_entries_outside_the_support() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("bad.toml");
    let text = std::fs::read_to_string(fixture("six_clients.matrix.toml")).unwrap();
    std::fs::write(&m, text.replacen("[1, 0, 1, 0, 0, 1]", "[1, 1, 1, 0, 0, 1]", 1)).unwrap();
    let out = cde(&["verify", "--problem", &fixture("six_clients.problem.toml"), "--matrix", m.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("packet 1"));
}

#[test]
fn construct_round_trips_through_verify_and_simulate() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("e.toml");
    let m = m.to_str().unwrap();
    let p = fixture("six_clients.problem.toml");
    let (code, v) = structured(&["construct", "--problem", &p, "--field", "1009", "--output", m]);
    assert_eq!(code, 0);
    assert_eq!(v["passed"], true);
    assert!(v["distances"].as_array().unwrap().iter().all(|d| d.as_u64().unwrap() >= 3));
    let first = std::fs::read_to_string(m).unwrap();

    let (code, _) = structured(&["verify", "--problem", &p, "--matrix", m]);
    assert_eq!(code, 0);
    // Decoding over GF(1009) enumerates 1009^3 candidates per client.
    let (code, _) = structured(&["simulate", "--problem", &p, "--matrix", m, "--exhaustive", "--budget", "100000000"]);
    assert_eq!(code, 5);

    // Same inputs, same matrix.
    let (_, _) = structured(&["construct", "--problem", &p, "--field", "1009", "--output", m]);
    assert_eq!(std::fs::read_to_string(m).unwrap(), first);

    let (code, _) = structured(&["construct", "--problem", &p, "--field", "7", "--output", m]);
    assert_eq!(code, 0);
    let (code, v) = structured(&["simulate", "--problem", &p, "--matrix", m, "--exhaustive", "--seed", "9"]);
    assert_eq!(code, 0);
    assert_eq!(v["exhaustive"]["plans_checked"], 1 + 6 * 7);
    assert_eq!(v["exhaustive"]["passed"], true);
}

#[test]
fn construct_outcomes_by_field() {
    let p = fixture("six_clients.problem.toml");
    let (code, _) = structured(&["construct", "--problem", &p, "--field", "2", "--attempts", "500"]);
    assert_eq!(code, 3);
    let (code, _) = structured(&["construct", "--problem", &p, "--exhaustive"]);
    assert_eq!(code, 3);
    let (code, v) = structured(&["construct", "--problem", &p, "--field", "5", "--strategy", "exhaustive"]);
    assert_eq!(code, 0);
    assert!(v["matrix"].as_str().unwrap().starts_with("q = 5\n"));
    let (code, v) = structured(&["construct", "--problem", &fixture("full.problem.toml"), "--field", "7"]);
    assert_eq!(code, 0);
    assert_eq!(v["passed"], true);
}

#[test]
fn decode_with_one_corrupted_broadcast() {
    // X = (1,2,0,1,2,1) gives Y = (2,0,2,1,2,1); client 2 lies with 1.
    let (code, v) = structured(&[
        "decode",
        "--problem",
        &fixture("six_clients.problem.toml"),
        "--matrix",
        &fixture("six_clients.matrix.toml"),
        "--client",
        "1",
        "--broadcast",
        "2,1,2,1,2,1",
        "--held",
        "1=1,3=0,6=1",
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["status"], "unique");
    assert_eq!(v["recovered"], serde_json::json!({"2": 2, "4": 1, "5": 2}));
    assert_eq!(v["estimate"], serde_json::json!([1, 2, 0, 1, 2, 1]));
    assert_eq!(v["distance"], 1);

    let (code, _) = structured(&[
        "decode",
        "--problem",
        &fixture("six_clients.problem.toml"),
        "--matrix",
        &fixture("six_clients.matrix.toml"),
        "--client",
        "1",
        "--broadcast",
        "2,1,2,1,2,1",
        "--held",
        "1=1,3=0",
    ]);
    assert_eq!(code, 1);
}

#[test]
fn simulate_exhaustive_sweeps() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("trace.jsonl");
    let p = fixture("six_clients.problem.toml");
    let (code, v) = structured(&[
        "simulate",
        "--problem",
        &p,
        "--matrix",
        &fixture("six_clients_gf5.matrix.toml"),
        "--exhaustive",
        "--packets",
        "1,2,0,1,2,1",
        "--trace-log",
        log.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["exhaustive"]["plans_checked"], 31);
    assert_eq!(v["exhaustive"]["passed"], true);
    assert_eq!(std::fs::read_to_string(&log).unwrap().lines().count(), 31);

    let (code, v) = structured(&[
        "simulate",
        "--problem",
        &p,
        "--matrix",
        &fixture("six_clients.matrix.toml"),
        "--exhaustive",
        "--packets",
        "1,2,0,1,2,1",
    ]);
    assert_eq!(code, 4);
    assert_eq!(v["exhaustive"]["violating_plans"], 12);
}

#[test]
fn simulate_monte_carlo_is_seeded() {
    let p = fixture("six_clients.problem.toml");
    let args = ["simulate", "--problem", &p, "--field", "1009", "--trials", "100", "--seed", "4"];
    let (code, a) = structured(&args);
    assert_eq!(code, 0);
    let (_, b) = structured(&args);
    assert_eq!(a, b);
    assert_eq!(a["monte_carlo"]["degree_bound"], "180");
    assert_eq!(a["monte_carlo"]["consistent_with_floor"], true);
}
