//! Proof scripts: declarations, goal commands, tactics and `qed`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde_json::{json, Value as Json};

use crate::lang::eval::eval_closed;
use crate::lang::{Adversary, Block, Context, Expr, LangError, Parser, Type, VarKind, VarName};
use crate::predicates::{parse_pred, Pred};
use crate::semantics::{initial_state, State};

use super::tactic::{is_tactic_start, parse_tactic, program_arg, Tactic};
use super::{Goal, ProofState, ProverError, Rel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScriptErrorKind {
    Syntax,
    /// A declaration, program or instantiation was rejected.
    Declaration,
    /// A tactic, `qed` or `undo` failed, or a proof was left open.
    Proof,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScriptError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
    pub kind: ScriptErrorKind,
}

impl fmt::Display for ScriptError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.msg)
    }
}

impl std::error::Error for ScriptError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProofStatus {
    Closed,
    Admitted,
    Open(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProofReport {
    pub name: String,
    pub status: ProofStatus,
}

impl fmt::Display for ProofReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.status {
            ProofStatus::Closed => write!(f, "{}: closed", self.name),
            ProofStatus::Admitted => write!(f, "{}: closed (admitted)", self.name),
            ProofStatus::Open(1) => write!(f, "{}: 1 open goal", self.name),
            ProofStatus::Open(n) => write!(f, "{}: {n} open goals", self.name),
        }
    }
}

enum Command {
    Var(Vec<String>, Type, VarKind),
    Ambient(Vec<String>, Type),
    Adversary(Adversary),
    Const(String, Type, Expr),
    Program(String, Block),
    Init(String, Vec<(VarName, Expr)>),
    Instantiate(String, Block),
    Qrhl(String, Goal),
    Prob(String, Goal),
    Tactic(Tactic),
    Qed,
    Undo,
}

/// Declarations, finished proofs and the proof in progress.
#[derive(Clone, Default)]
pub struct Session {
    pub ctx: Context,
    pub inits: Arc<BTreeMap<String, State>>,
    pub current: Option<ProofState>,
    pub reports: Vec<ProofReport>,
}

impl Session {
    pub fn new(ctx: Context) -> Self {
        Session { ctx, ..Default::default() }
    }

    /// Executes every command of `src`, stopping at the first failure.
    pub fn run(&mut self, src: &str) -> Result<(), ScriptError> {
        self.run_with(src, |_, _| {})
    }

    /// Like [`Session::run`], calling `on_step` with the text of each
    /// command after it has been executed.
    pub fn run_with(
        &mut self,
        src: &str,
        mut on_step: impl FnMut(&str, &Session),
    ) -> Result<(), ScriptError> {
        let lex_err = |e: LangError| syntax(e, 1, 1);
        let mut susp = Parser::new(src, &self.ctx).map_err(lex_err)?.suspend();
        loop {
            let ctx = match &self.current {
                Some(p) => &p.ctx,
                None => &self.ctx,
            };
            let mut p = susp.resume(ctx);
            if p.at_eof() {
                return Ok(());
            }
            let (line, col) = (p.token().line, p.token().col);
            let start = p.position();
            let cmd = parse_command(&mut p, self.current.is_some()).map_err(|e| syntax(e, line, col))?;
            let text = p.text_since(start).to_string();
            susp = p.suspend();
            let kind = if matches!(cmd, Command::Tactic(_) | Command::Qed | Command::Undo)
                || self.current.as_ref().is_some_and(|p| !p.goals.is_empty())
            {
                ScriptErrorKind::Proof
            } else {
                ScriptErrorKind::Declaration
            };
            self.execute(cmd, &text).map_err(|msg| ScriptError { line, col, msg, kind })?;
            on_step(&text, self);
        }
    }

    /// Final status of every proof, including one still in progress.
    pub fn report(&self) -> Vec<ProofReport> {
        let mut out = self.reports.clone();
        if let Some(p) = &self.current {
            out.push(ProofReport {
                name: p.name.clone(),
                status: match (p.goals.len(), p.admitted) {
                    (0, false) => ProofStatus::Closed,
                    (0, true) => ProofStatus::Admitted,
                    (n, _) => ProofStatus::Open(n),
                },
            });
        }
        out
    }

    pub fn any_admitted(&self) -> bool {
        self.report().iter().any(|r| r.status == ProofStatus::Admitted)
    }

    pub fn to_json(&self) -> Json {
        json!({
            "proof": self.current.as_ref().map(ProofState::to_json),
            "reports": self.report().iter().map(|r| r.to_string()).collect::<Vec<_>>(),
        })
    }

    fn execute(&mut self, cmd: Command, text: &str) -> Result<(), String> {
        let decl = |e: LangError| e.to_string();
        if self.current.is_some()
            && !matches!(cmd, Command::Tactic(_) | Command::Qed | Command::Undo)
        {
            let name = &self.current.as_ref().expect("checked").name;
            let open = self.current.as_ref().expect("checked").goals.len();
            if open > 0 {
                return Err(format!("proof `{name}` is still open ({open} goals); finish it with qed"));
            }
            self.close();
        }
        match cmd {
            Command::Var(names, ty, kind) => {
                for n in names {
                    self.ctx.add_var(&n, ty.clone(), kind).map_err(decl)?;
                }
            }
            Command::Ambient(names, ty) => {
                for n in names {
                    self.ctx.add_ambient(&n, ty.clone()).map_err(decl)?;
                }
            }
            Command::Adversary(a) => self.ctx.add_adversary(a).map_err(decl)?,
            Command::Const(name, ty, e) => {
                let v = eval_closed(&e, &self.ctx).map_err(decl)?.coerce(&ty);
                if !v.inhabits(&ty) {
                    return Err(format!("constant `{name}`: value {v} is not of type {ty}"));
                }
                self.ctx.add_const(&name, ty, v).map_err(decl)?;
            }
            Command::Program(name, body) => {
                crate::lang::typecheck::check_block(&body, &self.ctx).map_err(decl)?;
                self.ctx.add_program(&name, body).map_err(decl)?;
            }
            Command::Init(name, clauses) => {
                let st = initial_state(&self.ctx, &clauses).map_err(|e| e.to_string())?;
                Arc::make_mut(&mut self.inits).insert(name, st);
            }
            Command::Instantiate(name, body) => {
                crate::lang::typecheck::check_block(&body, &self.ctx).map_err(decl)?;
                let adv = self
                    .ctx
                    .adversaries
                    .get(name.as_str())
                    .cloned()
                    .ok_or_else(|| format!("unknown adversary `{name}`"))?;
                let allowed: std::collections::BTreeSet<VarName> =
                    adv.vars.iter().map(|v| VarName::plain(v)).collect();
                let fv = crate::lang::stmt::fv(&body, &self.ctx);
                if let Some(v) = fv.difference(&allowed).next() {
                    return Err(format!("instantiation of `{name}` uses `{v}` outside its footprint"));
                }
                let ro: std::collections::BTreeSet<VarName> =
                    adv.readonly.iter().map(|v| VarName::plain(v)).collect();
                if let Some(v) = crate::lang::stmt::written(&body, &self.ctx).intersection(&ro).next() {
                    return Err(format!("instantiation of `{name}` writes the readonly variable `{v}`"));
                }
                self.ctx.adversaries.get_mut(name.as_str()).expect("checked").body = Some(body);
            }
            Command::Qrhl(name, goal) | Command::Prob(name, goal) => {
                if let Goal::ProbRel { rho: Some(r), .. } = &goal {
                    if !self.inits.contains_key(r) {
                        return Err(format!("unknown initial state `{r}`"));
                    }
                }
                self.current = Some(ProofState::new(&name, self.ctx.clone(), goal, self.inits.clone()));
            }
            Command::Tactic(t) => {
                let p = self.current.as_mut().ok_or("no proof in progress")?;
                p.apply(&t, text).map_err(|e: ProverError| format!("{}: {e}", text.trim_end_matches('.')))?;
            }
            Command::Qed => {
                let p = self.current.as_ref().ok_or("qed: no proof in progress")?;
                if !p.goals.is_empty() {
                    return Err(format!("qed: {} open goals remain", p.goals.len()));
                }
                self.close();
            }
            Command::Undo => {
                let p = self.current.as_mut().ok_or("undo: no proof in progress")?;
                if !p.undo() {
                    return Err("undo: nothing to undo".into());
                }
            }
        }
        Ok(())
    }

    fn close(&mut self) {
        if let Some(p) = self.current.take() {
            self.reports.push(ProofReport {
                name: p.name.clone(),
                status: if p.admitted { ProofStatus::Admitted } else { ProofStatus::Closed },
            });
        }
    }

    /// Applies one tactic given as text to the proof in progress.
    pub fn tactic(&mut self, text: &str) -> Result<(), ScriptError> {
        if self.current.is_none() {
            return Err(ScriptError { line: 1, col: 1, msg: "no proof in progress".into(), kind: ScriptErrorKind::Proof });
        }
        self.run(text)
    }
}

fn syntax(e: LangError, line: usize, col: usize) -> ScriptError {
    match e {
        LangError::Syntax { line, col, msg } => ScriptError { line, col, msg, kind: ScriptErrorKind::Syntax },
        e => ScriptError { line, col, msg: e.to_string(), kind: ScriptErrorKind::Syntax },
    }
}

fn name_list(p: &mut Parser) -> Result<Vec<String>, LangError> {
    let mut out = vec![p.ident()?];
    while p.eat_sym(",") {
        out.push(p.ident()?);
    }
    Ok(out)
}

fn braced_pred(p: &mut Parser) -> Result<Pred, LangError> {
    p.expect_sym("{")?;
    p.relational = true;
    let a = parse_pred(p);
    p.relational = false;
    let a = a?;
    p.expect_sym("}")?;
    Ok(a)
}

fn prob_term(p: &mut Parser) -> Result<(Expr, Block), LangError> {
    p.expect_kw("Pr")?;
    p.expect_sym("[")?;
    let e = p.parse_expr()?;
    p.expect_sym(":")?;
    let c = program_arg(p)?;
    p.expect_sym("]")?;
    Ok((e, c))
}

fn parse_command(p: &mut Parser, in_proof: bool) -> Result<Command, LangError> {
    if in_proof && is_tactic_start(p) {
        return Ok(Command::Tactic(parse_tactic(p)?));
    }
    let cmd = if p.eat_kw("classical") || p.at_kw("quantum") {
        let kind = if p.eat_kw("quantum") { VarKind::Quantum } else { VarKind::Classical };
        p.expect_kw("var")?;
        let names = name_list(p)?;
        p.expect_sym(":")?;
        Command::Var(names, p.parse_type()?, kind)
    } else if p.eat_kw("ambient") {
        p.expect_kw("var")?;
        let names = name_list(p)?;
        p.expect_sym(":")?;
        Command::Ambient(names, p.parse_type()?)
    } else if p.eat_kw("adversary") {
        let name = p.ident()?;
        p.expect_kw("vars")?;
        let vars = name_list(p)?;
        let readonly = if p.eat_kw("readonly") { name_list(p)? } else { Vec::new() };
        Command::Adversary(Adversary {
            name: Arc::from(name.as_str()),
            vars: vars.iter().map(|v| Arc::from(v.as_str())).collect(),
            readonly: readonly.iter().map(|v| Arc::from(v.as_str())).collect(),
            body: None,
        })
    } else if p.eat_kw("const") {
        let name = p.ident()?;
        p.expect_sym(":")?;
        let ty = p.parse_type()?;
        p.expect_sym(":")?;
        p.expect_sym("=")?;
        Command::Const(name, ty, p.parse_expr()?)
    } else if p.eat_kw("program") {
        let name = p.ident()?;
        p.expect_sym(":")?;
        p.expect_sym("=")?;
        Command::Program(name, program_arg(p)?)
    } else if p.eat_kw("instantiate") {
        let name = p.ident()?;
        p.expect_sym(":")?;
        p.expect_sym("=")?;
        Command::Instantiate(name, program_arg(p)?)
    } else if p.eat_kw("init") {
        let name = p.ident()?;
        p.expect_sym(":")?;
        p.expect_sym("=")?;
        let mut clauses = Vec::new();
        if !p.at_sym(".") {
            loop {
                let pos = p.position();
                let x = p.ident()?;
                if p.ctx.var(&x).is_none() {
                    p.set_position(pos);
                    return Err(p.err(format!("`{x}` is not a program variable")));
                }
                p.expect_sym("=")?;
                clauses.push((VarName::plain(&x), p.parse_expr()?));
                if !p.eat_sym(",") {
                    break;
                }
            }
        }
        Command::Init(name, clauses)
    } else if p.eat_kw("qrhl") {
        let name = p.ident()?;
        p.expect_sym(":")?;
        let pre = braced_pred(p)?;
        let left = program_arg(p)?;
        p.expect_sym("~")?;
        let right = program_arg(p)?;
        let post = braced_pred(p)?;
        Command::Qrhl(name, Goal::Qrhl { pre, left, right, post })
    } else if p.eat_kw("prob") {
        let name = p.ident()?;
        p.expect_sym(":")?;
        let (e, c) = prob_term(p)?;
        let rel = if p.eat_sym("<=") {
            Rel::Le
        } else if p.eat_sym(">=") {
            Rel::Ge
        } else {
            p.expect_sym("=")?;
            Rel::Eq
        };
        let (f, d) = prob_term(p)?;
        let rho = if p.eat_kw("init") { Some(p.ident()?) } else { None };
        Command::Prob(name, Goal::ProbRel { e, c, f, d, rho, rel })
    } else if p.eat_kw("qed") {
        Command::Qed
    } else if p.eat_kw("undo") {
        Command::Undo
    } else if is_tactic_start(p) {
        return Err(p.err("tactic outside of a proof"));
    } else {
        return Err(p.err(format!("expected a command, found {}", p.peek())));
    };
    p.expect_sym(".")?;
    Ok(cmd)
}
