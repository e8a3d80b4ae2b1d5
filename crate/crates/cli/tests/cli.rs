use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn maxduo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_maxduo"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn solve_three_squares_json() {
    let path = fixture("three_squares.duo");
    let o = maxduo(&[
        "solve",
        path.to_str().unwrap(),
        "--backend",
        "exact",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["preserved"], 8);
    assert_eq!(v["vertices"].as_array().unwrap().len(), 8);
    assert_eq!(v["stats"]["backend"], "exact");
    assert_eq!(v["blocks_a"][0], serde_json::json!({"start": 1, "len": 5}));
}

#[test]
fn solve_two_squares_text() {
    let path = fixture("two_squares.duo");
    let o = maxduo(&["solve", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("preserved duos: 9\n"), "{out}");
    assert!(out.contains("series: S^2(2,8;2,8)"));
}

#[test]
fn output_is_byte_deterministic() {
    let path = fixture("two_squares.duo");
    let args = [
        "solve",
        path.to_str().unwrap(),
        "--format",
        "json",
        "--no-timing",
        "--backend",
        "local",
        "--seed",
        "3",
    ];
    let a = maxduo(&args);
    let b = maxduo(&args);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["stats"]["elapsed_ms"], 0);
}

#[test]
fn exit_codes() {
    let bad = fixture("bad.duo");
    let o = maxduo(&["solve", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not a permutation"));

    assert_eq!(
        maxduo(&["solve", "/nonexistent/x.duo"]).status.code(),
        Some(3)
    );

    let kernel = fixture("kernel.duo");
    let o = maxduo(&[
        "solve",
        kernel.to_str().unwrap(),
        "--backend",
        "exact",
        "--exact-limit",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(5));
    let o = maxduo(&["solve", kernel.to_str().unwrap(), "--backend", "exact"]);
    assert_eq!(o.status.code(), Some(0));

    assert_eq!(maxduo(&["suite", "--count", "0"]).status.code(), Some(2));
    assert_eq!(
        maxduo(&["solve", "--swap", "4", "x"]).status.code(),
        Some(2)
    );
    assert_eq!(maxduo(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn suite_passes_and_reports_json() {
    let o = maxduo(&["suite", "--count", "50", "--seed", "4", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["failures"], 0);
    assert_eq!(v["properties"]["oracle_equivalence"]["checked"], 50);
}

#[test]
fn injected_fault_writes_replayable_counterexamples() {
    let dir = tempfile::tempdir().unwrap();
    let cex = dir.path().join("cex");
    let o = maxduo(&[
        "suite",
        "--count",
        "100",
        "--inject-fault",
        "skip-anchor-edges",
        "--cex-dir",
        cex.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(6));
    let stderr = String::from_utf8_lossy(&o.stderr);
    let first = stderr
        .lines()
        .find_map(|l| l.strip_prefix("counterexample: "))
        .expect("counterexample path on stderr");
    assert!(fs::read_to_string(first)
        .unwrap()
        .starts_with("# property: "));
    assert_eq!(maxduo(&["solve", first]).status.code(), Some(0));
}

#[test]
fn export_dot_stages() {
    let three_squares = fixture("three_squares.duo");
    let g = stdout(&maxduo(&[
        "export-dot",
        three_squares.to_str().unwrap(),
        "--stage",
        "G",
    ]));
    assert_eq!(g.matches("[label=").count(), 14);
    assert_eq!(g.matches("subgraph \"cluster_").count(), 3);
    let g1 = stdout(&maxduo(&[
        "export-dot",
        three_squares.to_str().unwrap(),
        "--stage",
        "G1",
    ]));
    assert_eq!(g1.matches("[label=").count(), 2);
    let h = stdout(&maxduo(&[
        "export-dot",
        three_squares.to_str().unwrap(),
        "--stage",
        "H",
    ]));
    assert!(h.starts_with("graph H {"));

    let dir = tempfile::tempdir().unwrap();
    let one = dir.path().join("one.duo");
    fs::write(&one, "a\na\n").unwrap();
    let o = maxduo(&["export-dot", one.to_str().unwrap(), "--stage", "G"]);
    assert_eq!(stdout(&o), "graph G {\n}\n");

    let snaps = dir.path().join("snaps");
    let two_squares = fixture("two_squares.duo");
    let o = maxduo(&[
        "export-dot",
        two_squares.to_str().unwrap(),
        "--snapshots",
        snaps.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let mut names: Vec<String> = fs::read_dir(&snaps)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["00-G.dot", "01-contract-2-8-2-8.dot"]);
}

#[test]
fn gen_then_solve_and_verify() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("g.duo");
    let args = ["gen", "--n", "12", "--seed", "7", "--shuffle", "segments"];
    let a = maxduo(&args);
    assert_eq!(a.stdout, maxduo(&args).stdout);
    fs::write(&inst, &a.stdout).unwrap();
    assert_eq!(
        maxduo(&["verify", inst.to_str().unwrap()]).status.code(),
        Some(0)
    );

    let sol = dir.path().join("s.json");
    let o = maxduo(&[
        "solve",
        inst.to_str().unwrap(),
        "--format",
        "json",
        "--out",
        sol.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let o = maxduo(&[
        "verify",
        inst.to_str().unwrap(),
        "--solution",
        sol.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );

    let mut doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&sol).unwrap()).unwrap();
    doc["mapping"].as_array_mut().unwrap().swap(0, 1);
    fs::write(&sol, doc.to_string()).unwrap();
    let o = maxduo(&[
        "verify",
        inst.to_str().unwrap(),
        "--solution",
        sol.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(4));

    assert_eq!(
        maxduo(&["gen", "--n", "3", "--k", "1", "--alphabet", "2"])
            .status
            .code(),
        Some(4)
    );
}

#[test]
fn verify_checks_bound() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("k3.duo");
    fs::write(&p, "# three a's\naaab\nabaa\n").unwrap();
    assert_eq!(
        maxduo(&["verify", p.to_str().unwrap()]).status.code(),
        Some(4)
    );
    assert_eq!(
        maxduo(&["verify", p.to_str().unwrap(), "--k", "3"])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        maxduo(&["solve", p.to_str().unwrap()]).status.code(),
        Some(4)
    );
}

#[test]
fn token_mode() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("tok.duo");
    fs::write(&p, "x10 x11 x12\nx12 x10 x11\n").unwrap();
    let o = maxduo(&[
        "solve",
        p.to_str().unwrap(),
        "--mode",
        "token",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["preserved"], 1);
    assert_eq!(
        v["vertices"][0]["content"],
        serde_json::json!(["x10", "x11"])
    );
}
