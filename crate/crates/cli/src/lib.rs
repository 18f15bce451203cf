//! Batch checking, simulation, the oracle suites, an interactive loop and
//! a JSON session service over the `qrhl` prover.

pub mod commands;
pub mod repl;
pub mod service;

use qrhl::lang::{Context, Settings};
use qrhl::prover::{Goal, Session};

/// Numeric limits taken from the command line or `QRHL_*` variables.
#[derive(Debug, Clone, Copy, PartialEq, clap::Args)]
pub struct Limits {
    /// Absolute tolerance for rank, membership and inclusion decisions
    #[arg(long, env = "QRHL_EPS", global = true)]
    pub eps: Option<f64>,
    /// Maximal total quantum dimension per program side
    #[arg(long, env = "QRHL_DIM_CAP", global = true)]
    pub dim_cap: Option<usize>,
    /// Iteration bound of the while-loop series
    #[arg(long, env = "QRHL_MAX_ITERS", global = true)]
    pub max_iters: Option<usize>,
}

impl Limits {
    pub fn settings(&self) -> Settings {
        let mut s = Settings::default();
        if let Some(e) = self.eps {
            s.eps = e;
        }
        if let Some(d) = self.dim_cap {
            s.dim_cap = d;
        }
        if let Some(n) = self.max_iters {
            s.max_iters = n;
        }
        s
    }
}

pub fn new_session(settings: Settings) -> Session {
    Session::new(Context::new(settings))
}

/// Open goals of the proof in progress.
pub fn goals(s: &Session) -> &[Goal] {
    s.current.as_ref().map_or(&[], |p| &p.goals)
}

/// Human-readable goal list.
pub fn render_goals(s: &Session) -> String {
    let Some(p) = &s.current else {
        return s.reports.last().map_or_else(|| "ok".to_string(), |r| r.to_string());
    };
    let mut out = match p.goals.len() {
        0 => format!("{}: no goals left", p.name),
        1 => format!("{}: 1 goal", p.name),
        n => format!("{}: {n} goals", p.name),
    };
    for (i, g) in p.goals.iter().enumerate() {
        out.push_str(&format!("\n  [{}] {}: {g}", i + 1, g.kind()));
    }
    out
}

/// `x` rounded to 12 significant digits in positional notation.
pub fn sig12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    let decimals = (11 - mag).clamp(0, 40) as usize;
    format!("{x:.decimals$}")
}
