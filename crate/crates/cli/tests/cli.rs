use std::path::PathBuf;
use std::process::{Command, Output};

use usol_cli::{EXIT_FAILED, EXIT_INPUT, EXIT_OK, EXIT_UNKNOWN};

fn sample(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../samples").join(name)
}

fn usol(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_usol")).args(args).env_remove("USOL_MAX_STATES").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn golden_check_is_certified() {
    let f = sample("equations.ccs");
    let o = usol(&["check", f.to_str().unwrap(), "--system", "S1", "--candidates", "CK,CH"]);
    assert_eq!(o.status.code(), Some(EXIT_OK), "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("certified-equal"), "{}", stdout(&o));
}

#[test]
fn non_innocuous_divergence_is_reported_with_its_lasso() {
    let f = sample("equations.ccs");
    let o = usol(&["diverge", f.to_str().unwrap(), "--system", "Strange", "--max-states", "1000"]);
    assert_eq!(o.status.code(), Some(EXIT_FAILED), "{}{}", stdout(&o), stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("non-innocuous"), "{text}");
    assert!(text.contains("tau"), "{text}");
}

#[test]
fn unguarded_system_is_refused_by_check() {
    let f = sample("equations.ccs");
    let o = usol(&["check", f.to_str().unwrap(), "--system", "Loop", "--candidates", "LZ"]);
    assert_eq!(o.status.code(), Some(EXIT_FAILED));
    assert!(stdout(&o).contains("guard"), "{}", stdout(&o));
}

#[test]
fn syntax_errors_are_located() {
    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.ccs");
    std::fs::write(&broken, "const A = a.A;\nconst B = a.(B | ;\n").unwrap();
    let o = usol(&["parse", broken.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(EXIT_INPUT));
    let err = stderr(&o);
    assert!(err.contains("broken.ccs:2:"), "{err}");
}

#[test]
fn parse_prints_the_program_without_values() {
    let f = sample("servers.ccs");
    let o = usol(&["parse", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(EXIT_OK), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("system Srv"), "{text}");
    assert!(!text.contains("0..3"), "{text}");
}

#[test]
fn state_bound_comes_from_the_environment() {
    let f = sample("equations.ccs");
    let run = |bound: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_usol"));
        c.args(["lts", f.to_str().unwrap(), "--term", "K | H | G"]);
        match bound {
            Some(b) => c.env("USOL_MAX_STATES", b),
            None => c.env_remove("USOL_MAX_STATES"),
        };
        c.output().unwrap()
    };
    let bounded = run(Some("2"));
    assert_eq!(bounded.status.code(), Some(EXIT_UNKNOWN));
    assert!(stdout(&bounded).contains("truncated at 2 states"), "{}", stdout(&bounded));
    let full = run(None);
    assert_eq!(full.status.code(), Some(EXIT_OK));
    assert!(stdout(&full).contains("complete"));
}

#[test]
fn lts_exports_dot_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let (dot, json) = (dir.path().join("k.dot"), dir.path().join("k.json"));
    let f = sample("equations.ccs");
    let o = usol(&[
        "lts",
        f.to_str().unwrap(),
        "--term",
        "K",
        "--dot",
        dot.to_str().unwrap(),
        "--json",
        json.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(EXIT_OK));
    assert!(std::fs::read_to_string(&dot).unwrap().starts_with("digraph"));
    let j = std::fs::read_to_string(&json).unwrap();
    assert!(j.contains("\"states\"") && j.contains("\"transitions\""), "{j}");
}

#[test]
fn certificates_written_by_check_replay() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("busy.json");
    let f = sample("equations.ccs");
    let o = usol(&[
        "check",
        f.to_str().unwrap(),
        "--system",
        "Busy",
        "--candidates",
        "BH",
        "--cert",
        cert.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(EXIT_OK), "{}", stdout(&o));
    let r = usol(&["replay", f.to_str().unwrap(), "--cert", cert.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(EXIT_OK), "{}", stdout(&r));
    assert!(!stdout(&r).contains("FAIL"));
}

#[test]
fn equiv_reports_a_witness() {
    let f = sample("equations.ccs");
    let o = usol(&["equiv", f.to_str().unwrap(), "--lhs", "H", "--rhs", "G"]);
    assert_eq!(o.status.code(), Some(EXIT_FAILED));
    assert!(stdout(&o).contains("witness"), "{}", stdout(&o));
    let o = usol(&["equiv", f.to_str().unwrap(), "--lhs", "K", "--rhs", "H"]);
    assert_eq!(o.status.code(), Some(EXIT_OK));
}

#[test]
fn infinitary_relations_are_rejected() {
    let f = sample("equations.ccs");
    let o = usol(&["equiv", f.to_str().unwrap(), "--lhs", "H", "--rhs", "H", "--rel", "inf-trace-incl"]);
    assert_eq!(o.status.code(), Some(EXIT_INPUT));
    assert!(stderr(&o).contains("infinitary"), "{}", stderr(&o));
}

#[test]
fn preorders_need_a_direction() {
    let f = sample("equations.ccs");
    let path = f.to_str().unwrap();
    let o = usol(&["check", path, "--system", "S1", "--candidates", "Zero", "--rel", "sim"]);
    assert_eq!(o.status.code(), Some(EXIT_INPUT));
    let o = usol(&["check", path, "--system", "S1", "--candidates", "Zero", "--rel", "sim", "--direction", "max"]);
    assert_eq!(o.status.code(), Some(EXIT_OK), "{}", stdout(&o));
}

#[test]
fn unfold_prints_the_requested_power() {
    let f = sample("equations.ccs");
    let o = usol(&["unfold", f.to_str().unwrap(), "--system", "Late", "-n", "2"]);
    assert_eq!(o.status.code(), Some(EXIT_OK));
    let text = stdout(&o);
    assert!(text.contains("system Late^2"), "{text}");
    assert!(text.contains("X = a.X;"), "{text}");
}

#[test]
fn captured_names_are_warned_about() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("capture.ccs");
    std::fs::write(&f, "system S { X = new a in (X | b.0); }\ncandidates Out for S = ('a.0);\n").unwrap();
    let o = usol(&["check", f.to_str().unwrap(), "--system", "S", "--candidates", "Out"]);
    assert!(stderr(&o).contains("warning: substituting for `X`"), "{}", stderr(&o));
    let o = usol(&["check", sample("equations.ccs").to_str().unwrap(), "--system", "S1", "--candidates", "CK,CH"]);
    assert!(!stderr(&o).contains("warning"), "{}", stderr(&o));
}
