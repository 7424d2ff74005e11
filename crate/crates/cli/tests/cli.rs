use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap()
}

fn tau(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tau"))
        .args(args)
        .output()
        .unwrap()
}

fn check(book: &str, flags: &[&str]) -> Output {
    let path = fixture(book);
    let mut args = vec!["check", path.to_str().unwrap()];
    args.extend_from_slice(flags);
    tau(&args)
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

#[test]
fn empty_book_succeeds() {
    let o = check("empty.lisp", &[]);
    assert_eq!(code(&o), 0);
    assert_eq!(
        stdout(&o),
        "events: 0, checks: 0, proved: 0, unknown: 0, refuted: 0, errors: 0\n"
    );
}

#[test]
fn proved_book_matches_golden() {
    let o = check("proved.lisp", &["--paranoid", "--oracle"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(stdout(&o), golden("proved.out"));
}

#[test]
fn unknown_fails_unless_allowed() {
    let o = check("unknown.lisp", &[]);
    assert_eq!(code(&o), 1);
    let o = check("unknown.lisp", &["--allow-unknown"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), golden("unknown.out"));
}

#[test]
fn print_directives_and_oracle() {
    let o = check("radix.lisp", &["--oracle", "--allow-unknown"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), golden("radix.out"));
}

#[test]
fn print_flags_set_initial_base() {
    let o = check(
        "unknown.lisp",
        &["--allow-unknown", "--print-base", "2", "--print-radix"],
    );
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("(<= #b0 X)"), "{}", stdout(&o));
    let o = check("empty.lisp", &["--print-base", "7"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn unsound_rule_is_caught() {
    let o = check("unsound.lisp", &[]);
    assert_eq!(code(&o), 0);
    let o = check("unsound.lisp", &["--oracle"]);
    assert_eq!(code(&o), 1);
    assert_eq!(stdout(&o), golden("unsound.out"));
    let o = check("unsound.lisp", &["--paranoid"]);
    assert_eq!(code(&o), 1);
    assert!(
        stderr(&o).contains("4:1: rule (:TAU-SYSTEM INT-P) refuted by X=0"),
        "{}",
        stderr(&o)
    );
}

#[test]
fn parse_error_reports_position() {
    let o = check("malformed.lisp", &[]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("2:8"), "{}", stderr(&o));
}

#[test]
fn missing_book_is_an_io_error() {
    let o = check("no-such-book.lisp", &[]);
    assert_eq!(code(&o), 2);
}

#[test]
fn latin1_books_are_read() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(b"; \xe9t\xe9\n(defun s (x) (equal x \"\xfc\"))\n(check (implies (natp x) (rationalp x)))\n")
        .unwrap();
    let o = tau(&["check", f.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).ends_with("proved: 1, unknown: 0, refuted: 0, errors: 0\n"));
}

#[test]
fn output_is_stable() {
    let a = check(
        "proved.lisp",
        &["--oracle", "--seed", "5", "--max-samples", "100"],
    );
    let b = check(
        "proved.lisp",
        &["--oracle", "--seed", "5", "--max-samples", "100"],
    );
    assert_eq!(a.stdout, b.stdout);
}

const INLINE: &str = "(defun-inline f (x)
  (declare (xargs :guard (consp x)))
  (integerp (car x)))";

#[test]
fn trans1_from_argument_and_stdin() {
    let o = tau(&["trans1", INLINE]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), golden("trans1.out"));

    let mut child = Command::new(env!("CARGO_BIN_EXE_tau"))
        .arg("trans1")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(INLINE.as_bytes())
        .unwrap();
    let o = child.wait_with_output().unwrap();
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), golden("trans1.out"));
}

#[test]
fn trans1_rejects_non_macros() {
    let o = tau(&["trans1", "(defun f (x) x)"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("not a macro form"));
    let o = tau(&["trans1", "(defun"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn sweep_exit_codes() {
    let o = tau(&["sweep", "-n", "0"]);
    assert_eq!(code(&o), 0);
    let o = tau(&["sweep", "-n", "5", "--inject-fault"]);
    assert_eq!(code(&o), 1);
    assert!(
        !stdout(&o).contains("\"refuted_after_proved\":0"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn sweep_is_deterministic() {
    let a = tau(&["sweep", "-n", "20", "--seed", "11"]);
    let b = tau(&["sweep", "-n", "20", "--seed", "11"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn default_sweep_is_sound() {
    let o = tau(&["sweep"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
}
