use std::io::Write;
use std::path::PathBuf;

use qrhl::lang::Settings;
use qrhl_cli::commands::{check, oracle, sim, Suite};
use qrhl_cli::repl::{Repl, Reply};
use qrhl_cli::{goals, sig12};

fn example(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../examples").join(name)
}

fn script(src: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(src.as_bytes()).unwrap();
    f
}

const TRIVIAL: &str = "classical var x : bit.\nqrhl t : {Cla[x1 = x2]} { skip; } ~ { skip; } {Cla[x1 = x2]}.\n";

#[test]
fn shipped_examples_check() {
    for name in ["epr.qrhl", "epr-measure.qrhl", "prg-enc-rorcpa.qrhl"] {
        let o = check(&example(name), Settings::default());
        assert_eq!(o.code, 0, "{name}: {}{}", o.stdout, o.stderr);
        assert!(o.stdout.contains("closed"));
        assert!(!o.stdout.contains("WARNING"));
    }
}

#[test]
fn admitted_proof_exits_zero_with_a_warning() {
    let f = script(&format!("{TRIVIAL}admit.\nqed.\n"));
    let o = check(f.path(), Settings::default());
    assert_eq!(o.code, 0);
    assert!(o.stdout.contains("WARNING: admitted"), "{}", o.stdout);
}

#[test]
fn open_proof_exits_one() {
    let f = script(TRIVIAL);
    let o = check(f.path(), Settings::default());
    assert_eq!(o.code, 1);
    assert!(o.stdout.contains("t: 1 open goal"), "{}", o.stdout);
}

#[test]
fn failing_tactic_exits_one() {
    let f = script(&format!("{TRIVIAL}assign1.\n"));
    assert_eq!(check(f.path(), Settings::default()).code, 1);
}

#[test]
fn malformed_and_missing_files_exit_two() {
    let f = script("classical var x : .\n");
    assert_eq!(check(f.path(), Settings::default()).code, 2);
    assert_eq!(check(&PathBuf::from("/no/such/file.qrhl"), Settings::default()).code, 2);
}

#[test]
fn ill_typed_declaration_exits_two() {
    let f = script("classical var x : bit.\nprogram p := { x <- (0, 1); }.\n");
    assert_eq!(check(f.path(), Settings::default()).code, 2);
}

#[test]
fn simulating_uniform_sampling() {
    let f = script("classical var x : bit.\nprogram c := { x <$ uniform(bit); }.\n");
    let o = sim(f.path(), "c", None, &["x = 0".into()], Settings::default());
    assert_eq!(o.code, 0, "{}", o.stderr);
    assert!(o.stdout.contains("tr = 1.00000000000"), "{}", o.stdout);
    assert!(o.stdout.contains("x = 0: 0.500000000000"), "{}", o.stdout);
    assert!(o.stdout.contains("Pr[x = 0] = 0.500000000000"), "{}", o.stdout);
}

#[test]
fn simulating_the_measured_epr_program() {
    let o = sim(
        &example("epr-measure.qrhl"),
        "c; x <- measure q, r with computational(bit * bit);",
        None,
        &["x = (0, 0)".into()],
        Settings::default(),
    );
    assert_eq!(o.code, 0, "{}", o.stderr);
    assert!(o.stdout.contains("Pr[x = (0, 0)] = 0.250000000000"), "{}", o.stdout);
}

#[test]
fn simulation_errors() {
    let f = script("classical var x : bit.\nadversary A vars x.\nprogram loop := { while (true) { skip; } }.\n");
    let o = sim(f.path(), "loop", None, &[], Settings { max_iters: 50, ..Settings::default() });
    assert_eq!(o.code, 1);
    assert!(o.stderr.contains("did not converge"), "{}", o.stderr);
    let o = sim(f.path(), "call A;", None, &[], Settings::default());
    assert_eq!(o.code, 1);
    assert!(o.stderr.contains("no instantiation"), "{}", o.stderr);
}

#[test]
fn twelve_significant_digits() {
    assert_eq!(sig12(0.5), "0.500000000000");
    assert_eq!(sig12(1.0), "1.00000000000");
    assert_eq!(sig12(1.0 / 3.0), "0.333333333333");
    assert_eq!(sig12(0.0), "0");
}

#[test]
fn oracle_output_ends_with_json() {
    let o = oracle(Suite::Lemmas, 5, 5);
    assert_eq!(o.code, 0, "{}", o.stdout);
    let last = o.stdout.lines().last().unwrap();
    let v: serde_json::Value = serde_json::from_str(last).unwrap();
    assert_eq!(v["suite"], "lemmas");
    assert_eq!(v["passed"], true);
    assert!(v["failures"].as_array().unwrap().is_empty());
}

fn feed(r: &mut Repl, line: &str) -> String {
    match r.feed(line) {
        Reply::Output(s) => s,
        Reply::More => "<more>".into(),
        Reply::Quit => "<quit>".into(),
    }
}

#[test]
fn repl_proves_epr_interactively() {
    let mut r = Repl::new(Settings::default());
    let src = std::fs::read_to_string(example("epr.qrhl")).unwrap();
    let mut last = String::new();
    for line in src.lines() {
        last = feed(&mut r, line);
        assert!(!last.starts_with("error"), "{line}: {last}");
    }
    assert_eq!(last, "epr: closed");
}

#[test]
fn repl_undo_and_errors() {
    let mut r = Repl::new(Settings::default());
    for line in TRIVIAL.lines() {
        feed(&mut r, line);
    }
    assert_eq!(goals(&r.session).len(), 1);
    assert_eq!(feed(&mut r, "skip."), "t: no goals left");
    assert!(goals(&r.session).is_empty());
    assert_eq!(feed(&mut r, "undo"), "t: 1 goal\n  [1] qrhl: {Cla[x1 = x2]} { skip; } ~ { skip; } {Cla[x1 = x2]}");
    let before = goals(&r.session).to_vec();
    assert!(feed(&mut r, "frobnicate.").starts_with("error"));
    assert_eq!(goals(&r.session), &before[..]);
    assert_eq!(feed(&mut r, "conseq pre"), "<more>");
    let out = feed(&mut r, "  Cla[true].");
    assert!(out.starts_with("t: 1 goal"), "{out}");
    assert_eq!(feed(&mut r, "quit"), "<quit>");
}

#[test]
fn check_and_repl_agree() {
    let src = std::fs::read_to_string(example("epr-measure.qrhl")).unwrap();
    let prefix: String = src.lines().take_while(|l| !l.starts_with("skip")).map(|l| format!("{l}\n")).collect();
    let mut batch = qrhl_cli::new_session(Settings::default());
    batch.run(&prefix).unwrap();
    let mut r = Repl::new(Settings::default());
    for line in prefix.lines() {
        feed(&mut r, line);
    }
    assert_eq!(goals(&batch), goals(&r.session));
    assert!(!goals(&batch).is_empty());
}
