use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dtnmap"))
}

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn dtnmap")
}

fn run_with_stdin(args: &[&str], input: &[u8]) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn dtnmap");
    child.stdin.take().unwrap().write_all(input).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn path(name: &str) -> String {
    data(name).to_string_lossy().into_owned()
}

#[test]
fn forward_single_edge() {
    let o = run(&["forward", &path("single_edge.net")]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "2 2\n5 -5\n-5 5\n");
}

#[test]
fn forward_lattice_rows_sum_to_zero() {
    let o = run(&["forward", &path("lattice.net")]);
    assert_eq!(code(&o), 0);
    let m = dtnmap::DenseMatrix::parse_text(&stdout(&o)).unwrap();
    assert_eq!((m.rows(), m.cols()), (8, 8));
    for i in 0..8 {
        let s: f64 = m.row(i).iter().sum();
        assert!(s.abs() <= 1e-12 * m.max_abs());
    }
}

#[test]
fn forward_rejects_self_loop() {
    let o = run(&["forward", &path("self_loop.net")]);
    assert_eq!(code(&o), 2);
    assert!(o.stdout.is_empty());
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}

#[test]
fn forward_ungrounded_interior_is_model_error() {
    let o = run_with_stdin(&["forward", "-"], b"boundary 1\ninterior 2\nedge 2 3 1\n");
    assert_eq!(code(&o), 3);
}

#[test]
fn paths_one_to_five() {
    let o = run(&["paths", &path("lattice.net"), "--from", "1", "--to", "5"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.contains("1-9-10-11-5  residual: 12  sign: -1"));
    assert!(out.contains("1-9-12-11-5  residual: 10  sign: -1"));
    assert!(out.contains("systems = 2\n"));
    assert!(out.contains("total = -9672\n"));
}

#[test]
fn paths_two_sources() {
    let o = run(&["paths", &path("lattice.net"), "--from", "1,2", "--to", "5,6"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.starts_with("1-9-12-6 | 2-10-11-5  residual: -  sign: -1"));
    assert!(out.contains("systems = 1\n"));
}

#[test]
fn paths_size_mismatch() {
    let o = run(&["paths", &path("lattice.net"), "--from", "1", "--to", "1,2"]);
    assert_eq!(code(&o), 2);
    let o = run(&["paths", &path("lattice.net"), "--from", "9", "--to", "1"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn rank_verdicts() {
    let o = run(&["rank", &path("lattice.net")]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.contains("rank=13 unknowns=13 verdict=full"), "{out}");

    let o = run(&["rank", &path("lattice.net"), "--exhaustive"]);
    assert_eq!(stdout(&o), "rows=1288 rank=13 unknowns=13 verdict=full\n");

    let o = run(&["rank", &path("single_edge.net")]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("unknowns=1 verdict=full"));

    let o = run(&["rank", &path("split.net")]);
    assert_eq!(code(&o), 5);
    assert!(stdout(&o).contains("verdict=deficient"));

    let o = run(&["rank", &path("lattice.net"), "--max-pair-size", "1"]);
    assert_eq!(code(&o), 5);
}

#[test]
fn forward_pipes_into_invert() {
    let fwd = run(&["forward", &path("lattice.net")]);
    let o = run_with_stdin(&["invert", &path("lattice_topology.net"), "-"], &fwd.stdout);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    for k in 1..=12 {
        let line = out
            .lines()
            .find(|l| l.starts_with(&format!("gamma {k} = ")))
            .unwrap();
        let v: f64 = line.rsplit(' ').next().unwrap().parse().unwrap();
        assert!((v - k as f64).abs() <= 1e-8 * k as f64, "{line}");
    }
    assert!(out.contains("rank = 13\n"));
    assert!(out.contains("residual = "));
    assert!(out.contains("roundtrip_error = "));
}

#[test]
fn invert_dimension_mismatch() {
    let fwd = run(&["forward", &path("single_edge.net")]);
    let o = run_with_stdin(&["invert", &path("lattice_topology.net"), "-"], &fwd.stdout);
    assert_eq!(code(&o), 2);
}

#[test]
fn invert_foreign_dtn_fails_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cycle = dir.path().join("cycle.net");
    std::fs::write(
        &cycle,
        "boundary 4\ninterior 0\nedge 1 2 1\nedge 2 3 1\nedge 3 4 1\nedge 4 1 1\n",
    )
    .unwrap();
    let complete = dir.path().join("complete.net");
    std::fs::write(
        &complete,
        "boundary 4\ninterior 0\nedge 1 2 1\nedge 2 3 2\nedge 3 4 3\nedge 4 1 4\nedge 1 3 5\nedge 2 4 6\n",
    )
    .unwrap();
    let fwd = run(&["forward", complete.to_str().unwrap()]);
    let o = run_with_stdin(&["invert", cycle.to_str().unwrap(), "-"], &fwd.stdout);
    assert_eq!(code(&o), 6);
    assert!(stdout(&o).contains("roundtrip_error = "));
}

#[test]
fn roundtrip_is_deterministic() {
    let args = ["roundtrip", &path("lattice.net"), "--seed", "11", "--trials", "5"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).lines().count(), 5);
}

#[test]
fn roundtrip_lattice_hundred_trials() {
    let o = run(&["roundtrip", &path("lattice.net"), "--trials", "100"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().count(), 100);
}

#[test]
fn roundtrip_deficient_topology() {
    let o = run(&["roundtrip", &path("split.net"), "--trials", "3"]);
    assert_eq!(code(&o), 5);
    assert!(o.stdout.is_empty());
}

#[test]
fn bad_flags_exit_two() {
    assert_eq!(code(&run(&["rank"])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
    assert_eq!(code(&run(&["forward", "/nonexistent/file.net"])), 2);
}
