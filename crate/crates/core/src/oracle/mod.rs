//! Semantic ground truth at desk scale: couplings for the classical
//! fragment, probability comparisons, lemma identities and rule fuzzing.

pub mod coupling;
pub mod fuzz;
pub mod lemmas;
pub mod semantic;

use std::fmt;

use serde_json::{json, Value as Json};
use thiserror::Error;

use crate::lang::LangError;
use crate::semantics::SemError;

pub use coupling::{
    check_probrel, coupling, pred_to_expr, prhl_holds, prhl_holds_pred, probabilities, strassen_feasible,
    CouplingProblem,
};
pub use fuzz::{fuzz_rule_soundness, fuzz_suite, FUZZ_RULES};
pub use lemmas::lemma_suite;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("program is not classical: {0}")]
    NotClassical(String),
    #[error("{0} memory pairs exceed the enumeration cap {1}")]
    AmbientTooLarge(u128, usize),
    #[error(transparent)]
    Sem(#[from] SemError),
    #[error(transparent)]
    Lang(#[from] LangError),
}

pub type OracleResult<T> = Result<T, OracleError>;

/// Outcome of one named check over a number of random instances.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub trials: usize,
    /// Instances on which the property was actually tested, as opposed to
    /// skipped because a precondition failed.
    pub exercised: usize,
    pub failures: Vec<String>,
}

impl Check {
    pub fn new(name: &str) -> Self {
        Check { name: name.to_string(), trials: 0, exercised: 0, failures: Vec::new() }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn to_json(&self) -> Json {
        json!({
            "name": self.name,
            "trials": self.trials,
            "exercised": self.exercised,
            "passed": self.passed(),
            "failures": self.failures,
        })
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "ok" } else { "FAIL" };
        write!(f, "{}: {status} ({} trials, {} exercised)", self.name, self.trials, self.exercised)?;
        for m in &self.failures {
            write!(f, "\n  {m}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub suite: String,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> Json {
        let failures: Vec<String> = self
            .checks
            .iter()
            .flat_map(|c| c.failures.iter().map(move |m| format!("{}: {m}", c.name)))
            .collect();
        json!({
            "suite": self.suite,
            "passed": self.passed(),
            "failures": failures,
            "checks": self.checks.iter().map(Check::to_json).collect::<Vec<_>>(),
        })
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        write!(f, "{}: {}", self.suite, if self.passed() { "passed" } else { "FAILED" })
    }
}
