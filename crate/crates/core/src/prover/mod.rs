//! Goals, proof states and the tactic engine.

pub mod rules;
pub mod script;
pub mod tactic;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde_json::{json, Value as Json};
use thiserror::Error;

use crate::lang::stmt::fmt_block;
use crate::lang::{Block, Context, Expr, LangError};
use crate::predicates::{Pred, PredError};
use crate::semantics::{SemError, State};

pub use script::{ProofReport, ProofStatus, ScriptError, ScriptErrorKind, Session};
pub use tactic::{Side, Tactic};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProverError {
    #[error(transparent)]
    Lang(#[from] LangError),
    #[error(transparent)]
    Pred(#[from] PredError),
    #[error(transparent)]
    Sem(#[from] SemError),
    #[error("no open goals")]
    NoGoal,
    #[error("{0}")]
    Shape(String),
    #[error("side condition failed: {0}")]
    SideCondition(String),
    #[error("witness error: {0}")]
    Witness(String),
    #[error("{0}")]
    Failed(String),
}

pub type ProverResult<T> = Result<T, ProverError>;

pub fn shape(msg: impl Into<String>) -> ProverError {
    ProverError::Shape(msg.into())
}

pub fn side(msg: impl Into<String>) -> ProverError {
    ProverError::SideCondition(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rel {
    Le,
    Eq,
    Ge,
}

impl Rel {
    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Le => "<=",
            Rel::Eq => "=",
            Rel::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Goal {
    Qrhl {
        pre: Pred,
        left: Block,
        right: Block,
        post: Pred,
    },
    /// A closed boolean fact over ambient variables.
    Ambient { expr: Expr, note: Option<String> },
    Leq(Pred, Pred),
    /// `Pr[e : c(ρ)] REL Pr[f : d(ρ)]` for the named initial state, or for
    /// every state when `rho` is `None`.
    ProbRel {
        e: Expr,
        c: Block,
        f: Expr,
        d: Block,
        rho: Option<String>,
        rel: Rel,
    },
}

fn prog(b: &[crate::lang::Stmt]) -> String {
    if b.is_empty() {
        "skip;".into()
    } else {
        fmt_block(b)
    }
}

impl fmt::Display for Goal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Goal::Qrhl { pre, left, right, post } => {
                write!(f, "{{{pre}}} {{ {} }} ~ {{ {} }} {{{post}}}", prog(left), prog(right))
            }
            Goal::Ambient { expr, note } => match note {
                Some(n) => write!(f, "{expr}   // {n}"),
                None => write!(f, "{expr}"),
            },
            Goal::Leq(a, b) => write!(f, "{a} <= {b}"),
            Goal::ProbRel { e, c, f: g, d, rho, rel } => {
                write!(f, "Pr[{e} : {{ {} }}] {} Pr[{g} : {{ {} }}]", prog(c), rel.symbol(), prog(d))?;
                match rho {
                    Some(r) => write!(f, " init {r}"),
                    None => Ok(()),
                }
            }
        }
    }
}

impl Goal {
    pub fn kind(&self) -> &'static str {
        match self {
            Goal::Qrhl { .. } => "qrhl",
            Goal::Ambient { .. } => "ambient",
            Goal::Leq(..) => "leq",
            Goal::ProbRel { .. } => "probrel",
        }
    }

    pub fn to_json(&self) -> Json {
        let ast = match self {
            Goal::Qrhl { pre, left, right, post } => json!({
                "pre": pred_doc(pre),
                "left": left.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
                "right": right.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
                "post": pred_doc(post),
            }),
            Goal::Ambient { expr, note } => json!({ "expr": expr.to_string(), "note": note }),
            Goal::Leq(a, b) => json!({ "lhs": pred_doc(a), "rhs": pred_doc(b) }),
            Goal::ProbRel { e, c, f, d, rho, rel } => json!({
                "e": e.to_string(),
                "c": c.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
                "f": f.to_string(),
                "d": d.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
                "rho": rho,
                "rel": rel.symbol(),
            }),
        };
        json!({ "kind": self.kind(), "pretty": self.to_string(), "ast": ast })
    }
}

fn pred_doc(p: &Pred) -> Json {
    json!({ "pretty": p.to_string(), "tree": p.to_json() })
}

#[derive(Clone)]
struct Snapshot {
    ctx: Context,
    goals: Vec<Goal>,
    admitted: bool,
}

/// An open proof: its goals, the context (extended by ambient variables
/// introduced during the proof), and the history for undo.
#[derive(Clone)]
pub struct ProofState {
    pub name: String,
    pub ctx: Context,
    pub goals: Vec<Goal>,
    pub log: Vec<String>,
    pub admitted: bool,
    pub inits: Arc<BTreeMap<String, State>>,
    history: Vec<Snapshot>,
}

impl ProofState {
    pub fn new(name: &str, ctx: Context, goal: Goal, inits: Arc<BTreeMap<String, State>>) -> Self {
        ProofState {
            name: name.to_string(),
            ctx,
            goals: vec![goal],
            log: Vec::new(),
            admitted: false,
            inits,
            history: Vec::new(),
        }
    }

    pub fn is_closed(&self) -> bool {
        self.goals.is_empty()
    }

    /// Applies `t` to the first goal. On failure the state is unchanged.
    pub fn apply(&mut self, t: &Tactic, text: &str) -> ProverResult<()> {
        if self.goals.is_empty() {
            return Err(ProverError::NoGoal);
        }
        let mut ctx = self.ctx.clone();
        let goal = self.goals[0].clone();
        let sub = rules::apply(t, &goal, &mut ctx, &self.inits)?;
        self.history.push(Snapshot {
            ctx: std::mem::replace(&mut self.ctx, ctx),
            goals: self.goals.clone(),
            admitted: self.admitted,
        });
        if matches!(t, Tactic::Admit) {
            self.admitted = true;
        }
        self.goals.splice(0..1, sub);
        self.log.push(text.to_string());
        Ok(())
    }

    pub fn undo(&mut self) -> bool {
        match self.history.pop() {
            Some(s) => {
                self.ctx = s.ctx;
                self.goals = s.goals;
                self.admitted = s.admitted;
                self.log.pop();
                true
            }
            None => false,
        }
    }

    pub fn to_json(&self) -> Json {
        json!({
            "name": self.name,
            "goals": self.goals.iter().map(Goal::to_json).collect::<Vec<_>>(),
            "log": self.log,
            "admitted": self.admitted,
        })
    }
}
