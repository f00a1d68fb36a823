use std::io::Write;
use std::process::{Command, Output, Stdio};

use taut_core::relcert::parse_sparse;
use taut_core::scalar::{PhiScalar, Rational};
use taut_core::spin3::{relation_class, shifted_witten_formula};
use taut_core::strata::TautClass;

fn taut(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_taut")).args(args).output().unwrap()
}

fn taut_stdin(args: &[&str], input: &[u8]) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_taut"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn graph_counts() {
    for (g, n, count) in [("0", "4", 4), ("0", "3", 1), ("2", "0", 7)] {
        let o = taut(&["graphs", g, n]);
        assert_eq!(code(&o), 0);
        let text = stdout(&o);
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), count.to_string());
        assert_eq!(lines.count(), count);
    }
    assert_eq!(code(&taut(&["graphs", "0", "2"])), 1);
}

#[test]
fn relation_output_round_trips() {
    let o = taut(&["relation", "0", "4", "1", "0,0,0,0"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let (head, body) = text.split_once('\n').unwrap();
    assert_eq!(head, "R g=0 n=4 d=1 A=0,0,0,0");
    assert_eq!(body.lines().count(), 8);
    let coeffs: Vec<&str> = body.lines().map(|l| l.split(" * ").next().unwrap()).collect();
    assert!(coeffs.iter().all(|c| *c == "60" || *c == "-60"));
    let back = TautClass::<Rational>::parse(0, 4, body).unwrap();
    assert_eq!(back, relation_class(0, 4, &[0, 0, 0, 0], 1).unwrap());
}

#[test]
fn witten_piped_into_integral() {
    let w = taut(&["witten", "0", "4", "1,1,1,1"]);
    assert_eq!(code(&w), 0);
    let i = taut_stdin(&["integral"], &w.stdout);
    assert_eq!(code(&i), 0);
    assert_eq!(stdout(&i).trim(), "1/3");
}

#[test]
fn shifted_witten_symbolic_and_specialized() {
    let o = taut(&["witten", "0", "4", "0,0,1,1", "--phi", "symbolic"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let (head, body) = text.split_once('\n').unwrap();
    assert!(head.ends_with("phi=symbolic"));
    let back = TautClass::<PhiScalar>::parse(0, 4, body).unwrap();
    assert_eq!(back, shifted_witten_formula(0, &[0, 0, 1, 1]).unwrap());
    // both code paths agree at a rational point
    let a = taut(&["witten", "1", "1", "0", "--phi", "16"]);
    let b = taut(&["witten", "1", "1", "0", "--phi", "16", "--order", "2"]);
    assert_eq!(code(&a), 0);
    assert_eq!(stdout(&a), stdout(&b));
    assert_eq!(code(&taut(&["witten", "1", "2", "0,0", "--phi", "1", "--order", "1"])), 1);
    assert_eq!(code(&taut(&["witten", "0", "4", "0,0,1,1", "--phi", "-2"])), 1);
}

#[test]
fn certify_exit_codes() {
    let ok = taut(&["certify", "1", "4", "2", "1,1,1,1"]);
    assert_eq!(code(&ok), 0);
    assert_eq!(stdout(&ok).trim(), "CERTIFIED 1 4 2 1,1,1,1");
    // d = D: this is Witten's class, not a relation
    let bad = taut(&["certify", "0", "4", "1", "1,1,1,1"]);
    assert_eq!(code(&bad), 2);
    assert!(stdout(&bad).starts_with("FAILED 0 4 1 1,1,1,1"));
    assert_eq!(code(&taut(&["certify", "0", "4", "1", "0,2,0,0"])), 1);
    assert_eq!(code(&taut(&["certify", "0", "4"])), 1);
}

#[test]
fn batch_and_rank_write_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = taut(&["certify", "--budget", "2", "--jobs", "1", "--out", out]);
    assert_eq!(code(&o), 0);
    let log = std::fs::read_to_string(dir.path().join("certify.log")).unwrap();
    assert!(log.lines().all(|l| l.starts_with("CERTIFIED ")));
    let summary = std::fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    assert!(summary.contains("failed=0") && summary.contains("complete=true"));

    let o = taut(&["rank", "0", "4", "1", "--out", out]);
    assert_eq!(code(&o), 0);
    let line = std::fs::read_to_string(dir.path().join("rank_0_4_1.txt")).unwrap();
    assert_eq!(line.trim(), "rank g=0 n=4 d=1 rows=8 cols=1 rank=1");
    let sparse = std::fs::read_to_string(dir.path().join("pairing_0_4_1.txt")).unwrap();
    let (r, c, entries) = parse_sparse(&sparse).unwrap();
    assert_eq!((r, c, entries.len()), (8, 1, 8));
}

#[test]
fn usage_errors() {
    assert_eq!(code(&taut(&["bogus"])), 1);
    assert_eq!(code(&taut(&["relation", "0", "4", "1", "0,0,0"])), 1);
    assert_eq!(code(&taut(&["relation", "0", "4", "1", "0,0,2,0"])), 1);
    assert_eq!(code(&taut(&["relation", "0", "3", "1", "0,0,0", "--sigma", "2"])), 1);
    assert_eq!(code(&taut_stdin(&["integral"], b"nonsense\n")), 1);
    assert_eq!(code(&taut(&["--help"])), 0);
}
