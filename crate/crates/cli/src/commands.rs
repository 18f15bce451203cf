//! `check`, `sim` and `oracle`.

use std::fmt::Write as _;
use std::path::Path;

use qrhl::lang::parser::{parse_expr, parse_program};
use qrhl::lang::{Block, Settings};
use qrhl::oracle::{fuzz_suite, lemma_suite};
use qrhl::prover::{ProofStatus, ScriptErrorKind};
use qrhl::semantics::{classical_part, denot, initial_state, prafter};

use crate::{new_session, sig12};

/// Text for standard output and the process exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

impl Outcome {
    fn fail(code: i32, stderr: String) -> Self {
        Outcome { stdout: String::new(), stderr, code }
    }
}

fn read(path: &Path) -> Result<String, Outcome> {
    std::fs::read_to_string(path).map_err(|e| Outcome::fail(2, format!("error: {}: {e}", path.display())))
}

/// Replays a script: 0 when every proof is closed, 1 when one is open or a
/// proof step fails, 2 on unreadable or malformed input.
pub fn check(path: &Path, settings: Settings) -> Outcome {
    let src = match read(path) {
        Ok(s) => s,
        Err(o) => return o,
    };
    let mut s = new_session(settings);
    let result = s.run(&src);
    let reports = s.report();
    let mut out = String::new();
    for r in &reports {
        writeln!(out, "{r}").unwrap();
    }
    if let Err(e) = result {
        let msg = format!("error: {}:{e}", path.display());
        let code = if e.kind == ScriptErrorKind::Proof { 1 } else { 2 };
        return Outcome { stdout: out, stderr: msg, code };
    }
    if reports.iter().any(|r| matches!(r.status, ProofStatus::Open(_))) {
        return Outcome { stdout: out, stderr: String::new(), code: 1 };
    }
    if s.any_admitted() {
        writeln!(out, "WARNING: admitted").unwrap();
    }
    match reports.len() {
        1 => writeln!(out, "1 proof checked").unwrap(),
        n => writeln!(out, "{n} proofs checked").unwrap(),
    }
    Outcome { stdout: out, stderr: String::new(), code: 0 }
}

/// Runs a program of a script on an initial state and prints the trace,
/// the distribution of classical memories and the queried probabilities.
pub fn sim(path: &Path, program: &str, init: Option<&str>, queries: &[String], settings: Settings) -> Outcome {
    let src = match read(path) {
        Ok(s) => s,
        Err(o) => return o,
    };
    let mut s = new_session(settings);
    if let Err(e) = s.run(&src) {
        return Outcome::fail(2, format!("error: {}:{e}", path.display()));
    }
    let ctx = &s.ctx;
    let prog: Block = match ctx.programs.get(program) {
        Some(b) => b.clone(),
        None => match parse_program(program, ctx) {
            Ok(b) => b,
            Err(e) => return Outcome::fail(2, format!("error: program `{program}`: {e}")),
        },
    };
    let rho = match init {
        Some(name) => match s.inits.get(name) {
            Some(r) => r.clone(),
            None => return Outcome::fail(2, format!("error: unknown initial state `{name}`")),
        },
        None => match initial_state(ctx, &[]) {
            Ok(r) => r,
            Err(e) => return Outcome::fail(1, format!("error: {e}")),
        },
    };
    let mut exprs = Vec::new();
    for q in queries {
        match parse_expr(q, ctx, false) {
            Ok(e) => exprs.push(e),
            Err(e) => return Outcome::fail(2, format!("error: query `{q}`: {e}")),
        }
    }
    let out_state = match denot(&prog, &rho, ctx) {
        Ok(st) => st,
        Err(e) => return Outcome::fail(1, format!("error: {e}")),
    };
    let mut out = String::new();
    writeln!(out, "tr = {}", sig12(out_state.trace())).unwrap();
    let names: Vec<&str> = ctx.classical_vars().map(|d| &*d.name).collect();
    for (m, p) in classical_part(&out_state) {
        let label: Vec<String> = names.iter().zip(&m).map(|(n, v)| format!("{n} = {v}")).collect();
        let label = if label.is_empty() { "(no classical variables)".to_string() } else { label.join(", ") };
        writeln!(out, "{label}: {}", sig12(p)).unwrap();
    }
    for (q, e) in queries.iter().zip(&exprs) {
        match prafter(e, &prog, &rho, ctx) {
            Ok(p) => writeln!(out, "Pr[{q}] = {}", sig12(p)).unwrap(),
            Err(err) => return Outcome { stdout: out, stderr: format!("error: {err}"), code: 1 },
        }
    }
    Outcome { stdout: out, stderr: String::new(), code: 0 }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Lemmas,
    Fuzz,
}

/// One line per check followed by the JSON summary.
pub fn oracle(suite: Suite, seed: u64, trials: usize) -> Outcome {
    let report = match suite {
        Suite::Lemmas => lemma_suite(seed, trials),
        Suite::Fuzz => fuzz_suite(seed, trials),
    };
    let json = report.to_json();
    let summary = serde_json::json!({
        "suite": json["suite"],
        "passed": json["passed"],
        "failures": json["failures"],
    });
    Outcome {
        stdout: format!("{report}\n{summary}\n"),
        stderr: String::new(),
        code: if report.passed() { 0 } else { 1 },
    }
}
