use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spectral-csp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn duplicated_constraints_sparsify_to_one() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("csp 1\nfield 2\nvars 4\n");
    for _ in 0..50 {
        text.push_str("c 1 : 1*x1 + 1*x3 != 0\n");
    }
    let orig = write(dir.path(), "dup.csp", &text);
    let sparse = dir.path().join("dup.sparse.csp");
    let sparse = sparse.to_str().unwrap();
    let out = run(&["sparsify", &orig, "--eps", "0.1", "--seed", "1", "--out", sparse]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("VALUE kept=1\n"));
    let written = std::fs::read_to_string(sparse).unwrap();
    assert!(written.contains("c 50 : 1*x1 + 1*x3 != 0"));
    let out = run(&["verify", &orig, sparse, "--eps", "0.1"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("CHECK family_crossing_degrees pass"));
}

#[test]
fn verify_fails_on_bad_sparsifier() {
    let dir = tempfile::tempdir().unwrap();
    let orig = write(dir.path(), "o.csp", "csp 1\nfield 2\nvars 4\nc 1 : x1 + x2 != 0\nc 1 : x3 + x4 != 0\n");
    let bad = write(dir.path(), "b.csp", "csp 1\nfield 2\nvars 4\nc 1.5 : x1 + x2 != 0\nc 1 : x3 + x4 != 0\n");
    let out = run(&["verify", &orig, &bad, "--eps", "0.1"]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("CHECK boolean_values fail"));
    assert!(text.contains("tol="));
    assert!(text.ends_with("status fail\n"));
}

#[test]
fn matrices_all_permutations() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(
        dir.path(),
        "m.csp",
        "csp 1\nfield 2\nvars 5\nc 1 : x1 + x2 != 0\nc 2 : x2 + x3 + x4 + x5 != 0\n",
    );
    let out = run(&["matrices", &file, "--perm", "all"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("VALUE permutations=120"));
    assert!(text.contains("VALUE factorization_holds=120"));
}

#[test]
fn matrices_augments_and_dumps() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "odd.csp", "csp 1\nfield 2\nvars 3\nc 1 : x1 + x2 + x3 != 0\n");
    let out = run(&["matrices", &file]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("NOTE augmented to 4 variables"));
    assert!(text.contains("BLOCK B_inc"));
    assert!(text.contains("BLOCK B_cross"));
}

#[test]
fn cheeger_single_edge() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "edge.csp", "csp 1\nfield 2\nvars 2\nc 1 : 1*x1 + 1*x2 != 0\n");
    let out = run(&["cheeger", &file]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("VALUE expansion=1\n"));
    assert!(text.contains("CHECK gamma2_at_most_twice_expansion pass"));
    assert!(text.contains("CHECK expansion_within_cheeger_bound pass"));
}

#[test]
fn energy_all_boolean_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "e.csp", "csp 1\nfield 3\nvars 3\nc 2 : 1*x1 + 2*x2 != 1\nc 1 : x2 + x3 != 0\n");
    let out = run(&["energy", &file, "--assign", "all-boolean", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["command"], "energy");
    assert_eq!(v["passed"], true);
    assert_eq!(v["checks"][0]["name"], "energy_equals_value");
    assert!(v.get("timing_ms").is_none());
    let out = run(&["energy", &file, "--assign", "0.2,0.9,0.4", "--timing"]);
    assert!(stdout(&out).contains("timing_ms "));
}

#[test]
fn parse_errors_exit_two_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "bad.csp", "csp 1\nfield 4\nvars 2\n");
    let out = run(&["energy", &file, "--assign", "0,1"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 2"), "{err}");
    assert!(err.contains("not prime"), "{err}");
}

#[test]
fn gen_round_trips_through_stdout() {
    let out = run(&["gen", "--n", "5", "--m", "200", "--p", "3", "--arity", "3", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let inst = spectral_csp::format::parse_instance(&text).unwrap();
    assert_eq!(inst.m(), 200);
    assert_eq!(spectral_csp::format::serialize_instance(&inst), text);
}

#[test]
fn sampled_mode_is_labelled_heuristic() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["gen", "--n", "6", "--m", "40", "--p", "2", "--arity", "2", "--seed", "2"]);
    let file = write(dir.path(), "g.csp", &stdout(&out));
    let out = run(&["sparsify", &file, "--eps", "0.2", "--mode", "sampled:30"]);
    let text = stdout(&out);
    assert!(text.contains("NOTE heuristic"), "{text}");
    assert!(text.contains("param mode=sampled:30"));
}
