use std::path::PathBuf;

use qrhl::prover::{ProofStatus, Session};

fn example(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../examples").join(name);
    std::fs::read_to_string(p).unwrap()
}

fn replay(name: &str) -> Session {
    let mut s = Session::default();
    if let Err(e) = s.run(&example(name)) {
        panic!("{name}: {e}\nstate: {}", s.to_json());
    }
    s
}

#[test]
fn epr_script_closes() {
    let s = replay("epr.qrhl");
    assert_eq!(s.report()[0].status, ProofStatus::Closed);
}

#[test]
fn epr_measure_script_closes() {
    let s = replay("epr-measure.qrhl");
    assert_eq!(s.report()[0].status, ProofStatus::Closed);
}

#[test]
fn rorcpa_script_closes() {
    let s = replay("prg-enc-rorcpa.qrhl");
    assert_eq!(s.report()[0].status, ProofStatus::Closed);
}
