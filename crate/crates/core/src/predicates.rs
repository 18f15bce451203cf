//! Quantum predicates: syntax, evaluation to subspaces, satisfaction,
//! inclusion, and the rewriting rules of the simplifier.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_complex::Complex64;
use serde_json::{json, Value as Json};
use thiserror::Error;

use crate::lang::eval::{eval, eval_bool, Env};
use crate::lang::expr::{adj, and_all, bin, fresh_name, not, or, BinOp, Domain, Expr, Quant, TypeFn};
use crate::lang::lexer::Tok;
use crate::lang::simp::{conjuncts, simp_expr};
use crate::lang::typecheck::for_each_assignment;
use crate::lang::value::Mat;
use crate::lang::{Context, LangError, Parser, Type, Value, VarName};
use crate::linalg::Matrix;
use crate::registers::{lift_op, lift_subspace, list_dim, CqState, LabeledVector, Reg, RegError, Space};
use crate::Subspace;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PredError {
    #[error(transparent)]
    Lang(#[from] LangError),
    #[error(transparent)]
    Reg(#[from] RegError),
    #[error("predicate type error: {0}")]
    Type(String),
}

pub type PredResult<T> = Result<T, PredError>;

/// One side `u @ Q` of a quantum equality; `op = None` is the identity.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QSide {
    pub op: Option<Expr>,
    pub vars: Vec<VarName>,
}

impl QSide {
    pub fn plain(vars: Vec<VarName>) -> Self {
        QSide { op: None, vars }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Pred {
    Top,
    Bot,
    Cla(Expr),
    /// `span{ψ} » Q`
    Span(Expr, Vec<VarName>),
    /// `im(A) » Q`
    Im(Expr, Vec<VarName>),
    Qeq(QSide, QSide),
    And(Box<Pred>, Box<Pred>),
    Sum(Box<Pred>, Box<Pred>),
    Ortho(Box<Pred>),
    /// `(A ÷ ψ»Q) ⊗ ℓ2[Q]`
    Div(Box<Pred>, Expr, Vec<VarName>),
    /// `(U»Q) · A`
    Apply(Expr, Vec<VarName>, Box<Pred>),
    Inf(VarName, Domain, Box<Pred>),
}

pub fn cla(e: Expr) -> Pred {
    Pred::Cla(e)
}

pub fn pand(a: Pred, b: Pred) -> Pred {
    Pred::And(Box::new(a), Box::new(b))
}

pub fn psum(a: Pred, b: Pred) -> Pred {
    Pred::Sum(Box::new(a), Box::new(b))
}

pub fn ortho(a: Pred) -> Pred {
    Pred::Ortho(Box::new(a))
}

/// Intersection of a list; `top` when empty.
pub fn pand_all(ps: impl IntoIterator<Item = Pred>) -> Pred {
    let mut it = ps.into_iter();
    match it.next() {
        None => Pred::Top,
        Some(first) => it.fold(first, pand),
    }
}

pub fn qeq(q1: Vec<VarName>, q2: Vec<VarName>) -> Pred {
    Pred::Qeq(QSide::plain(q1), QSide::plain(q2))
}

impl Pred {
    /// Conjuncts of nested intersections.
    pub fn conjuncts(&self) -> Vec<&Pred> {
        match self {
            Pred::And(a, b) => {
                let mut out = a.conjuncts();
                out.extend(b.conjuncts());
                out
            }
            p => vec![p],
        }
    }

    fn summands(&self) -> Vec<&Pred> {
        match self {
            Pred::Sum(a, b) => {
                let mut out = a.summands();
                out.extend(b.summands());
                out
            }
            p => vec![p],
        }
    }

    fn exprs(&self, out: &mut Vec<Expr>) {
        match self {
            Pred::Top | Pred::Bot => {}
            Pred::Cla(e) | Pred::Span(e, _) | Pred::Im(e, _) => out.push(e.clone()),
            Pred::Qeq(a, b) => out.extend(a.op.iter().chain(b.op.iter()).cloned()),
            Pred::And(a, b) | Pred::Sum(a, b) => {
                a.exprs(out);
                b.exprs(out);
            }
            Pred::Ortho(a) => a.exprs(out),
            Pred::Div(a, e, _) | Pred::Apply(e, _, a) => {
                out.push(e.clone());
                a.exprs(out);
            }
            Pred::Inf(..) => {}
        }
    }

    /// Free classical (and ambient) variables.
    pub fn fv(&self) -> BTreeSet<VarName> {
        match self {
            Pred::Inf(z, dom, body) => {
                let mut out = body.fv();
                out.remove(z);
                if let Domain::Set(s) = dom {
                    out.extend(s.fv());
                }
                out
            }
            Pred::And(a, b) | Pred::Sum(a, b) => {
                let mut out = a.fv();
                out.extend(b.fv());
                out
            }
            Pred::Ortho(a) => a.fv(),
            Pred::Div(a, e, _) | Pred::Apply(e, _, a) => {
                let mut out = a.fv();
                out.extend(e.fv());
                out
            }
            p => {
                let mut es = Vec::new();
                p.exprs(&mut es);
                es.iter().flat_map(|e| e.fv()).collect()
            }
        }
    }

    /// Quantum variables mentioned by lifting, equality, division and
    /// application nodes.
    pub fn qvars(&self) -> BTreeSet<VarName> {
        let mut out = BTreeSet::new();
        self.collect_qvars(&mut out);
        out
    }

    fn collect_qvars(&self, out: &mut BTreeSet<VarName>) {
        match self {
            Pred::Top | Pred::Bot | Pred::Cla(_) => {}
            Pred::Span(_, q) | Pred::Im(_, q) => out.extend(q.iter().cloned()),
            Pred::Qeq(a, b) => {
                out.extend(a.vars.iter().cloned());
                out.extend(b.vars.iter().cloned());
            }
            Pred::And(a, b) | Pred::Sum(a, b) => {
                a.collect_qvars(out);
                b.collect_qvars(out);
            }
            Pred::Ortho(a) | Pred::Inf(_, _, a) => a.collect_qvars(out),
            Pred::Div(a, _, q) | Pred::Apply(_, q, a) => {
                out.extend(q.iter().cloned());
                a.collect_qvars(out);
            }
        }
    }

    /// Capture-avoiding simultaneous substitution into every embedded
    /// classical expression.
    pub fn subst(&self, map: &BTreeMap<VarName, Expr>) -> Pred {
        if map.is_empty() {
            return self.clone();
        }
        let s = |e: &Expr| e.subst(map);
        match self {
            Pred::Top | Pred::Bot => self.clone(),
            Pred::Cla(e) => Pred::Cla(s(e)),
            Pred::Span(e, q) => Pred::Span(s(e), q.clone()),
            Pred::Im(e, q) => Pred::Im(s(e), q.clone()),
            Pred::Qeq(a, b) => Pred::Qeq(
                QSide { op: a.op.as_ref().map(s), vars: a.vars.clone() },
                QSide { op: b.op.as_ref().map(s), vars: b.vars.clone() },
            ),
            Pred::And(a, b) => pand(a.subst(map), b.subst(map)),
            Pred::Sum(a, b) => psum(a.subst(map), b.subst(map)),
            Pred::Ortho(a) => ortho(a.subst(map)),
            Pred::Div(a, e, q) => Pred::Div(Box::new(a.subst(map)), s(e), q.clone()),
            Pred::Apply(e, q, a) => Pred::Apply(s(e), q.clone(), Box::new(a.subst(map))),
            Pred::Inf(z, dom, body) => {
                let dom = match dom {
                    Domain::Type(t) => Domain::Type(t.clone()),
                    Domain::Set(x) => Domain::Set(Box::new(s(x))),
                };
                let mut inner = map.clone();
                inner.remove(z);
                let body_fv = body.fv();
                inner.retain(|k, _| body_fv.contains(k));
                if inner.values().any(|e| e.fv().contains(z)) {
                    let mut avoid = body_fv;
                    for e in inner.values() {
                        avoid.extend(e.fv());
                    }
                    let z2 = fresh_name(z, &avoid);
                    inner.insert(z.clone(), Expr::Var(z2.clone()));
                    Pred::Inf(z2, dom, Box::new(body.subst(&inner)))
                } else {
                    Pred::Inf(z.clone(), dom, Box::new(body.subst(&inner)))
                }
            }
        }
    }

    pub fn subst1(&self, x: &VarName, e: &Expr) -> Pred {
        self.subst(&BTreeMap::from([(x.clone(), e.clone())]))
    }

    /// Renames free classical variables and all quantum variables through `f`.
    pub fn rename(&self, f: &dyn Fn(&VarName) -> Option<VarName>) -> Pred {
        let rq = |q: &Vec<VarName>| q.iter().map(|v| f(v).unwrap_or_else(|| v.clone())).collect::<Vec<_>>();
        let re = |e: &Expr| e.rename_free(f);
        match self {
            Pred::Top | Pred::Bot => self.clone(),
            Pred::Cla(e) => Pred::Cla(re(e)),
            Pred::Span(e, q) => Pred::Span(re(e), rq(q)),
            Pred::Im(e, q) => Pred::Im(re(e), rq(q)),
            Pred::Qeq(a, b) => Pred::Qeq(
                QSide { op: a.op.as_ref().map(re), vars: rq(&a.vars) },
                QSide { op: b.op.as_ref().map(re), vars: rq(&b.vars) },
            ),
            Pred::And(a, b) => pand(a.rename(f), b.rename(f)),
            Pred::Sum(a, b) => psum(a.rename(f), b.rename(f)),
            Pred::Ortho(a) => ortho(a.rename(f)),
            Pred::Div(a, e, q) => Pred::Div(Box::new(a.rename(f)), re(e), rq(q)),
            Pred::Apply(e, q, a) => Pred::Apply(re(e), rq(q), Box::new(a.rename(f))),
            Pred::Inf(z, dom, body) => {
                let z2 = z.clone();
                let g = move |v: &VarName| if *v == z2 { None } else { f(v) };
                let dom = match dom {
                    Domain::Type(t) => Domain::Type(t.clone()),
                    Domain::Set(x) => Domain::Set(Box::new(re(x))),
                };
                Pred::Inf(z.clone(), dom, Box::new(body.rename(&g)))
            }
        }
    }

    /// Swaps the side tags 1 and 2 of every variable.
    pub fn swap_sides(&self) -> Pred {
        self.rename(&|v| match v.tag {
            1 => Some(v.with_tag(2)),
            2 => Some(v.with_tag(1)),
            _ => None,
        })
    }

    /// Tags every untagged program variable with `tag`.
    pub fn idx(&self, tag: u8, ctx: &Context) -> Pred {
        self.rename(&|v| {
            (v.tag == 0 && ctx.var(&v.base).is_some() && ctx.ambient_type(&v.base).is_none())
                .then(|| v.with_tag(tag))
        })
    }

    /// Representative up to renaming of bound variables.
    pub fn canonical(&self) -> Pred {
        self.canon(0)
    }

    fn canon(&self, depth: usize) -> Pred {
        let c = |e: &Expr| e.canonical();
        match self {
            Pred::Top | Pred::Bot => self.clone(),
            Pred::Cla(e) => Pred::Cla(c(e)),
            Pred::Span(e, q) => Pred::Span(c(e), q.clone()),
            Pred::Im(e, q) => Pred::Im(c(e), q.clone()),
            Pred::Qeq(a, b) => Pred::Qeq(
                QSide { op: a.op.as_ref().map(c), vars: a.vars.clone() },
                QSide { op: b.op.as_ref().map(c), vars: b.vars.clone() },
            ),
            Pred::And(a, b) => pand(a.canon(depth), b.canon(depth)),
            Pred::Sum(a, b) => psum(a.canon(depth), b.canon(depth)),
            Pred::Ortho(a) => ortho(a.canon(depth)),
            Pred::Div(a, e, q) => Pred::Div(Box::new(a.canon(depth)), c(e), q.clone()),
            Pred::Apply(e, q, a) => Pred::Apply(c(e), q.clone(), Box::new(a.canon(depth))),
            Pred::Inf(z, dom, body) => {
                let fresh = VarName::plain(&format!("%p{depth}"));
                let dom = match dom {
                    Domain::Type(t) => Domain::Type(t.clone()),
                    Domain::Set(x) => Domain::Set(Box::new(c(x))),
                };
                let body = body.subst1(z, &Expr::Var(fresh.clone())).canon(depth + 1);
                Pred::Inf(fresh, dom, Box::new(body))
            }
        }
    }

    pub fn alpha_eq(&self, other: &Pred) -> bool {
        self.canonical() == other.canonical()
    }

    pub fn contains_qeq(&self) -> bool {
        match self {
            Pred::Qeq(..) => true,
            Pred::And(a, b) | Pred::Sum(a, b) => a.contains_qeq() || b.contains_qeq(),
            Pred::Ortho(a) | Pred::Div(a, ..) | Pred::Apply(_, _, a) | Pred::Inf(_, _, a) => a.contains_qeq(),
            _ => false,
        }
    }

    /// Syntactic approximation of `X`-locality: all classical free
    /// variables and all mentioned quantum variables lie in `xs`.
    pub fn is_local(&self, xs: &BTreeSet<VarName>) -> bool {
        self.fv().iter().all(|v| xs.contains(v)) && self.qvars().iter().all(|v| xs.contains(v))
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Pred::Top => "Top",
            Pred::Bot => "Bottom",
            Pred::Cla(_) => "Cla",
            Pred::Span(..) => "LiftSpan",
            Pred::Im(..) => "LiftSub",
            Pred::Qeq(..) => "QEq",
            Pred::And(..) => "Cap",
            Pred::Sum(..) => "Plus",
            Pred::Ortho(_) => "Ortho",
            Pred::Div(..) => "Div",
            Pred::Apply(..) => "ApplyOp",
            Pred::Inf(..) => "BigCap",
        }
    }

    /// Structured JSON rendering; expressions appear as concrete syntax.
    pub fn to_json(&self) -> Json {
        let vars = |q: &[VarName]| q.iter().map(|v| v.to_string()).collect::<Vec<_>>();
        let side = |s: &QSide| json!({"op": s.op.as_ref().map(|e| e.to_string()), "vars": vars(&s.vars)});
        let node = self.kind_name();
        match self {
            Pred::Top | Pred::Bot => json!({"node": node}),
            Pred::Cla(e) => json!({"node": node, "expr": e.to_string()}),
            Pred::Span(e, q) | Pred::Im(e, q) => json!({"node": node, "expr": e.to_string(), "vars": vars(q)}),
            Pred::Qeq(a, b) => json!({"node": node, "left": side(a), "right": side(b)}),
            Pred::And(a, b) | Pred::Sum(a, b) => json!({"node": node, "args": [a.to_json(), b.to_json()]}),
            Pred::Ortho(a) => json!({"node": node, "args": [a.to_json()]}),
            Pred::Div(a, e, q) => json!({"node": node, "args": [a.to_json()], "expr": e.to_string(), "vars": vars(q)}),
            Pred::Apply(e, q, a) => json!({"node": node, "args": [a.to_json()], "expr": e.to_string(), "vars": vars(q)}),
            Pred::Inf(z, dom, body) => {
                let dom = match dom {
                    Domain::Type(t) => json!({"type": t.to_string()}),
                    Domain::Set(s) => json!({"set": s.to_string()}),
                };
                json!({"node": node, "binder": z.to_string(), "domain": dom, "args": [body.to_json()]})
            }
        }
    }
}

// ---- printing ----

fn fmt_vars(f: &mut fmt::Formatter<'_>, q: &[VarName]) -> fmt::Result {
    for (i, v) in q.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{v}")?;
    }
    Ok(())
}

fn fmt_op(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    match e {
        Expr::Var(_) | Expr::Const(_) | Expr::TypeFn(..) | Expr::Call(..) => write!(f, "{e}"),
        e => write!(f, "({e})"),
    }
}

fn fmt_side(f: &mut fmt::Formatter<'_>, s: &QSide) -> fmt::Result {
    if let Some(op) = &s.op {
        fmt_op(f, op)?;
        write!(f, " @ ")?;
    }
    fmt_vars(f, &s.vars)
}

impl Pred {
    fn prec(&self) -> u8 {
        match self {
            Pred::Inf(..) => 0,
            Pred::Sum(..) => 1,
            Pred::And(..) => 2,
            Pred::Ortho(_) | Pred::Apply(..) => 3,
            Pred::Div(..) => 4,
            _ => 5,
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.prec() < min {
            write!(f, "(")?;
            self.fmt_at(f, 0)?;
            return write!(f, ")");
        }
        match self {
            Pred::Top => write!(f, "top"),
            Pred::Bot => write!(f, "bot"),
            Pred::Cla(e) => write!(f, "Cla[{e}]"),
            Pred::Span(e, q) => {
                write!(f, "span{{{e}}} >> [")?;
                fmt_vars(f, q)?;
                write!(f, "]")
            }
            Pred::Im(e, q) => {
                write!(f, "im({e}) >> [")?;
                fmt_vars(f, q)?;
                write!(f, "]")
            }
            Pred::Qeq(a, b) => {
                write!(f, "Qeq[")?;
                fmt_side(f, a)?;
                write!(f, " == ")?;
                fmt_side(f, b)?;
                write!(f, "]")
            }
            Pred::And(a, b) => {
                a.fmt_at(f, 2)?;
                write!(f, " /\\ ")?;
                b.fmt_at(f, 3)
            }
            Pred::Sum(a, b) => {
                a.fmt_at(f, 1)?;
                write!(f, " \\/+ ")?;
                b.fmt_at(f, 2)
            }
            Pred::Ortho(a) => {
                write!(f, "ortho ")?;
                a.fmt_at(f, 3)
            }
            Pred::Apply(e, q, a) => {
                write!(f, "({e} @ ")?;
                fmt_vars(f, q)?;
                write!(f, ") * ")?;
                a.fmt_at(f, 3)
            }
            Pred::Div(a, e, q) => {
                a.fmt_at(f, 4)?;
                write!(f, " div ")?;
                fmt_op(f, e)?;
                write!(f, " @ [")?;
                fmt_vars(f, q)?;
                write!(f, "]")
            }
            Pred::Inf(z, dom, body) => {
                write!(f, "Inf {z}")?;
                match dom {
                    Domain::Type(t) => write!(f, " : {t}")?,
                    Domain::Set(s) => write!(f, " in {s}")?,
                }
                write!(f, ". ")?;
                body.fmt_at(f, 0)
            }
        }
    }
}

impl fmt::Display for Pred {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, 0)
    }
}

// ---- parsing ----

/// Parses a predicate at the parser's position.
pub fn parse_pred(p: &mut Parser) -> Result<Pred, LangError> {
    if p.eat_kw("Inf") {
        let z = p.ident()?;
        let dom = p.domain()?;
        p.expect_sym(".")?;
        p.push_bound(&z);
        let body = parse_pred(p);
        p.pop_bound();
        return Ok(Pred::Inf(VarName::plain(&z), dom, Box::new(body?)));
    }
    let mut a = pred_and(p)?;
    while p.eat_sym("\\/+") {
        let b = if p.at_kw("Inf") { parse_pred(p)? } else { pred_and(p)? };
        a = psum(a, b);
    }
    Ok(a)
}

fn pred_and(p: &mut Parser) -> Result<Pred, LangError> {
    let mut a = pred_unary(p)?;
    while p.eat_sym("/\\") {
        let b = if p.at_kw("Inf") { parse_pred(p)? } else { pred_unary(p)? };
        a = pand(a, b);
    }
    Ok(a)
}

fn pred_unary(p: &mut Parser) -> Result<Pred, LangError> {
    if p.eat_kw("ortho") {
        return Ok(ortho(pred_unary(p)?));
    }
    if p.at_sym("(") {
        let start = p.position();
        p.bump();
        if let Ok(e) = p.parse_expr() {
            if p.eat_sym("@") {
                let q = p.qvar_list()?;
                p.expect_sym(")")?;
                p.expect_sym("*")?;
                let a = pred_unary(p)?;
                return Ok(Pred::Apply(e, q, Box::new(a)));
            }
        }
        p.set_position(start);
    }
    pred_postfix(p)
}

fn pred_postfix(p: &mut Parser) -> Result<Pred, LangError> {
    let mut a = pred_atom(p)?;
    while p.eat_kw("div") {
        let e = p.parse_expr()?;
        p.expect_sym("@")?;
        p.expect_sym("[")?;
        let q = p.qvar_list()?;
        p.expect_sym("]")?;
        a = Pred::Div(Box::new(a), e, q);
    }
    Ok(a)
}

fn bracketed_vars(p: &mut Parser) -> Result<Vec<VarName>, LangError> {
    p.expect_sym(">>")?;
    p.expect_sym("[")?;
    let q = p.qvar_list()?;
    p.expect_sym("]")?;
    Ok(q)
}

fn qside(p: &mut Parser) -> Result<QSide, LangError> {
    let start = p.position();
    if let Ok(e) = p.parse_expr() {
        if p.eat_sym("@") {
            return Ok(QSide { op: Some(e), vars: p.qvar_list()? });
        }
    }
    p.set_position(start);
    Ok(QSide::plain(p.qvar_list()?))
}

fn pred_atom(p: &mut Parser) -> Result<Pred, LangError> {
    if p.eat_kw("top") {
        return Ok(Pred::Top);
    }
    if p.eat_kw("bot") {
        return Ok(Pred::Bot);
    }
    if p.eat_kw("Cla") {
        p.expect_sym("[")?;
        let e = p.parse_expr()?;
        p.expect_sym("]")?;
        return Ok(Pred::Cla(e));
    }
    if p.eat_kw("span") {
        p.expect_sym("{")?;
        let e = p.parse_expr()?;
        p.expect_sym("}")?;
        return Ok(Pred::Span(e, bracketed_vars(p)?));
    }
    if p.eat_kw("im") {
        p.expect_sym("(")?;
        let e = p.parse_expr()?;
        p.expect_sym(")")?;
        return Ok(Pred::Im(e, bracketed_vars(p)?));
    }
    if p.eat_kw("Qeq") {
        p.expect_sym("[")?;
        let a = qside(p)?;
        p.expect_sym("==")?;
        let b = qside(p)?;
        p.expect_sym("]")?;
        return Ok(Pred::Qeq(a, b));
    }
    if p.eat_sym("(") {
        let a = parse_pred(p)?;
        p.expect_sym(")")?;
        return Ok(a);
    }
    Err(match p.peek() {
        Tok::Eof => p.err("expected a predicate, found end of input"),
        _ => p.err("expected a predicate"),
    })
}

/// Parses a complete predicate; `relational` requires side tags on
/// program variables.
pub fn parse_predicate(src: &str, ctx: &Context, relational: bool) -> Result<Pred, LangError> {
    let mut p = Parser::new(src, ctx)?.relational(relational);
    let a = parse_pred(&mut p)?;
    if !p.at_eof() {
        return Err(p.err("unexpected input after predicate"));
    }
    Ok(a)
}

// ---- evaluation ----

/// The empty evaluation environment.
pub fn no_env() -> BTreeMap<VarName, Value> {
    BTreeMap::new()
}

struct Extend<'e> {
    inner: &'e dyn Env,
    z: &'e VarName,
    v: Value,
}

impl Env for Extend<'_> {
    fn lookup(&self, v: &VarName) -> Option<Value> {
        if v == self.z {
            Some(self.v.clone())
        } else {
            self.inner.lookup(v)
        }
    }
}

/// Evaluates predicates to subspaces of `ℓ2` over a fixed set of quantum
/// registers (all quantum program variables with the given tags).
#[derive(Clone)]
pub struct Evaluator<'a> {
    pub ctx: &'a Context,
    pub space: Space,
    pub eps: f64,
}

/// Tolerance of the isometry and unitarity guards.
pub const ISO_TOL: f64 = 1e-6;

impl<'a> Evaluator<'a> {
    pub fn new(ctx: &'a Context, tags: &[u8]) -> Self {
        Evaluator { ctx, space: ctx.quantum_space(tags), eps: ctx.settings.eps }
    }

    /// Over `qu V1 ∪ qu V2`.
    pub fn relational(ctx: &'a Context) -> Self {
        Self::new(ctx, &[1, 2])
    }

    pub fn on_space(ctx: &'a Context, space: Space) -> Self {
        Evaluator { ctx, space, eps: ctx.settings.eps }
    }

    fn regs(&self, q: &[VarName]) -> PredResult<Vec<Reg>> {
        let regs = self.ctx.regs(q)?;
        for r in &regs {
            if !self.space.contains(r.id) {
                return Err(PredError::Type(format!(
                    "quantum variable `{}` is outside the predicate's registers",
                    self.ctx.reg_name(r.id)
                )));
            }
        }
        Ok(regs)
    }

    pub fn op(&self, e: &Expr, env: &dyn Env) -> PredResult<Mat> {
        match eval(e, self.ctx, env)? {
            Value::Op(m) => Ok((*m).clone()),
            Value::Vector(v) => Ok(Matrix::column_vector(&v)),
            v => Err(PredError::Type(format!("`{e}` evaluated to {v}, not an operator"))),
        }
    }

    pub fn vector(&self, e: &Expr, env: &dyn Env) -> PredResult<Vec<Complex64>> {
        match eval(e, self.ctx, env)? {
            Value::Vector(v) => Ok((*v).clone()),
            v => Err(PredError::Type(format!("`{e}` evaluated to {v}, not a vector"))),
        }
    }

    pub fn domain(&self, dom: &Domain, env: &dyn Env) -> PredResult<Vec<Value>> {
        match dom {
            Domain::Type(t) => Ok(t.elements()),
            Domain::Set(s) => match eval(s, self.ctx, env)? {
                Value::Set(items) => Ok(items.iter().cloned().collect()),
                v => Err(PredError::Type(format!("`{s}` evaluated to {v}, not a set"))),
            },
        }
    }

    /// `⟦A⟧m`
    pub fn eval(&self, a: &Pred, env: &dyn Env) -> PredResult<Subspace> {
        let eps = self.eps;
        Ok(match a {
            Pred::Top => Subspace::full(self.space.clone()),
            Pred::Bot => Subspace::zero(self.space.clone()),
            Pred::Cla(e) => {
                if eval_bool(e, self.ctx, env)? {
                    Subspace::full(self.space.clone())
                } else {
                    Subspace::zero(self.space.clone())
                }
            }
            Pred::Span(e, q) => {
                let regs = self.regs(q)?;
                let v = self.vector(e, env)?;
                if v.len() != list_dim(&regs) {
                    return Err(PredError::Type(format!(
                        "span vector `{e}` has dimension {} but the registers have dimension {}",
                        v.len(),
                        list_dim(&regs)
                    )));
                }
                lift_subspace(&[v], &regs, &self.space, eps)?
            }
            Pred::Im(e, q) => {
                let regs = self.regs(q)?;
                let m = self.op(e, env)?;
                if m.rows() != list_dim(&regs) {
                    return Err(PredError::Type(format!(
                        "image of `{e}` has dimension {} but the registers have dimension {}",
                        m.rows(),
                        list_dim(&regs)
                    )));
                }
                lift_subspace(&m.columns(), &regs, &self.space, eps)?
            }
            Pred::Qeq(l, r) => self.qeq(l, r, env)?,
            Pred::And(a, b) => self.eval(a, env)?.intersect(&self.eval(b, env)?, eps)?,
            Pred::Sum(a, b) => self.eval(a, env)?.sum(&self.eval(b, env)?, eps)?,
            Pred::Ortho(a) => self.eval(a, env)?.complement(),
            Pred::Div(a, e, q) => {
                let regs = self.regs(q)?;
                let v = self.vector(e, env)?;
                let psi = LabeledVector::on_list(&regs, &v)?;
                self.eval(a, env)?.divide(&psi, eps)?.extend(&self.space)?
            }
            Pred::Apply(e, q, a) => {
                let regs = self.regs(q)?;
                let m = self.op(e, env)?;
                let l = lift_op(&m, &regs, &self.space)?;
                self.eval(a, env)?.apply_op(&l, eps)?
            }
            Pred::Inf(z, dom, body) => {
                let mut acc = Subspace::full(self.space.clone());
                for v in self.domain(dom, env)? {
                    let ext = Extend { inner: env, z, v };
                    acc = acc.intersect(&self.eval(body, &ext)?, eps)?;
                    if acc.is_zero() {
                        break;
                    }
                }
                acc
            }
        })
    }

    /// The subspace fixed by `U_Q2 u2† u1 U_Q1† ⊗ U_Q1 u1† u2 U_Q2† ⊗ id`.
    pub fn qeq(&self, l: &QSide, r: &QSide, env: &dyn Env) -> PredResult<Subspace> {
        let q1 = self.regs(&l.vars)?;
        let q2 = self.regs(&r.vars)?;
        if l.vars.iter().any(|v| r.vars.contains(v)) {
            return Err(PredError::Type("quantum equality between overlapping variable lists".into()));
        }
        let (d1, d2) = (list_dim(&q1), list_dim(&q2));
        let u1 = match &l.op {
            Some(e) => self.op(e, env)?,
            None => Matrix::identity(d1),
        };
        let u2 = match &r.op {
            Some(e) => self.op(e, env)?,
            None => Matrix::identity(d2),
        };
        if u1.cols() != d1 || u2.cols() != d2 || u1.rows() != u2.rows() {
            return Err(PredError::Type(format!(
                "quantum equality operators of shapes {}x{} and {}x{} do not fit registers of dimensions {d1} and {d2}",
                u1.rows(),
                u1.cols(),
                u2.rows(),
                u2.cols()
            )));
        }
        let fixed = qeq_fixed_vectors(&u1, &u2, self.eps);
        let mut list = q1;
        list.extend(q2);
        Ok(lift_subspace(&fixed, &list, &self.space, self.eps)?)
    }
}

/// Basis of the fixed space of the operator `|a,b⟩ ↦ (u1†u2|b⟩) ⊗ (u2†u1|a⟩)`
/// on `ℓ2[Q1 Q2]`.
pub fn qeq_fixed_vectors(u1: &Mat, u2: &Mat, eps: f64) -> Vec<Vec<Complex64>> {
    let (d1, d2) = (u1.cols(), u2.cols());
    let m12 = u2.adjoint().matmul(u1);
    let m21 = u1.adjoint().matmul(u2);
    let n = d1 * d2;
    let s = Matrix::from_fn(n, n, |row, col| {
        let (a2, b2) = (row / d2, row % d2);
        let (a, b) = (col / d2, col % d2);
        m21[(a2, b)] * m12[(b2, a)]
    });
    (&s - &Matrix::identity(n)).kernel(eps)
}

/// Evaluation environment of a block key: the classical variables of
/// each tag in declaration order.
pub fn memory_env(ctx: &Context, tags: &[u8], mem: &[Value]) -> BTreeMap<VarName, Value> {
    let names = tags.iter().flat_map(|&t| ctx.classical_list(t));
    names.map(|(v, _)| v).zip(mem.iter().cloned()).collect()
}

/// `ρ` satisfies `A`: the support of every block lies in `⟦A⟧m`.
pub fn satisfies<K: Ord + Clone>(
    ev: &Evaluator,
    rho: &CqState<K, f64>,
    a: &Pred,
    env_of: impl Fn(&K) -> BTreeMap<VarName, Value>,
) -> PredResult<bool> {
    if rho.space != ev.space {
        return Err(PredError::Type("state and predicate live on different registers".into()));
    }
    for (k, block) in &rho.blocks {
        let env = env_of(k);
        let s = ev.eval(a, &env)?;
        let p = s.projector();
        let outside = block.trace().re - p.matmul(block).trace().re;
        if outside > ev.eps.max(1e-9) * block.rows().max(1) as f64 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `A ⊆ B`: subspace inclusion for every assignment to the free variables.
pub fn pred_leq(ev: &Evaluator, a: &Pred, b: &Pred) -> PredResult<bool> {
    let mut vars = a.fv();
    vars.extend(b.fv());
    let vars: Vec<VarName> = vars.into_iter().collect();
    let mut err = None;
    let ok = for_each_assignment(&vars, ev.ctx, |env| {
        let r = ev.eval(a, env).and_then(|sa| Ok(sa.leq(&ev.eval(b, env)?, ev.eps)?));
        match r {
            Ok(b) => Ok(b),
            Err(e) => {
                err = Some(e);
                Ok(false)
            }
        }
    })?;
    match err {
        Some(e) => Err(e),
        None => Ok(ok),
    }
}

/// `A = B` for every assignment to the free variables.
pub fn pred_equiv(ev: &Evaluator, a: &Pred, b: &Pred) -> PredResult<bool> {
    Ok(pred_leq(ev, a, b)? && pred_leq(ev, b, a)?)
}

// ---- simplification ----

const MAX_PASSES: usize = 12;
const FOLD_DIM: usize = 256;
const GUARD_ASSIGNMENTS: usize = 256;

fn list_type(ctx: &Context, q: &[VarName]) -> Option<Type> {
    let ts: Option<Vec<Type>> = q.iter().map(|v| ctx.type_of(v)).collect();
    let ts = ts?;
    Some(if ts.len() == 1 { ts[0].clone() } else { Type::Tuple(ts) })
}

fn id_of(ctx: &Context, q: &[VarName]) -> Option<Expr> {
    list_type(ctx, q).map(|t| Expr::TypeFn(TypeFn::Id, t))
}

fn contiguous(sub: &[VarName], list: &[VarName]) -> Option<usize> {
    (0..=list.len().saturating_sub(sub.len())).find(|&i| list[i..].starts_with(sub))
}

fn is_bool_lit(e: &Expr, b: bool) -> bool {
    e.as_bool_lit() == Some(b)
}

impl Evaluator<'_> {
    /// `check` holds for the value of `e` under every assignment to its
    /// free variables; false when undecidable.
    pub fn for_all_values(&self, e: &Expr, check: impl Fn(&Value) -> bool) -> bool {
        let vars: Vec<VarName> = e.fv().into_iter().collect();
        let mut total: u128 = 1;
        for v in &vars {
            match self.ctx.type_of(v).and_then(|t| t.card()) {
                Some(c) => total = total.saturating_mul(c as u128),
                None => return false,
            }
        }
        if total > GUARD_ASSIGNMENTS as u128 {
            return false;
        }
        for_each_assignment(&vars, self.ctx, |env| Ok(eval(e, self.ctx, env).is_ok_and(|v| check(&v))))
            .unwrap_or(false)
    }

    fn op_check(&self, e: &Expr, check: impl Fn(&Mat) -> bool) -> bool {
        self.for_all_values(e, |v| match v {
            Value::Op(m) => check(m),
            _ => false,
        })
    }

    pub fn is_unitary(&self, e: &Expr) -> bool {
        self.op_check(e, |m| m.is_unitary(ISO_TOL))
    }

    pub fn is_isometry(&self, e: &Expr) -> bool {
        self.op_check(e, |m| m.is_isometry(ISO_TOL))
    }

    fn is_identity(&self, e: &Expr) -> bool {
        matches!(e, Expr::TypeFn(TypeFn::Id, _))
            || self.op_check(e, |m| m.is_square() && m.approx_eq(&Matrix::identity(m.rows()), ISO_TOL))
    }

    fn surjective(&self, e: &Expr) -> bool {
        self.op_check(e, |m| m.range(self.eps).len() == m.rows())
    }

    fn nonzero_vector(&self, e: &Expr) -> bool {
        self.for_all_values(e, |v| match v {
            Value::Vector(x) => crate::linalg::norm(x.as_slice()) > self.eps,
            _ => false,
        })
    }

    fn zero_vector(&self, e: &Expr) -> bool {
        self.for_all_values(e, |v| match v {
            Value::Vector(x) => crate::linalg::norm(x.as_slice()) <= self.eps,
            _ => false,
        })
    }

    fn unit_vector(&self, e: &Expr) -> bool {
        self.for_all_values(e, |v| match v {
            Value::Vector(x) => (crate::linalg::norm(x.as_slice()) - 1.0).abs() <= ISO_TOL,
            _ => false,
        })
    }

    fn nonempty_domain(&self, dom: &Domain) -> Option<bool> {
        match dom {
            Domain::Type(t) => Some(t.card().is_some_and(|c| c > 0)),
            Domain::Set(s) if s.fv().is_empty() => {
                self.domain(dom, &no_env()).ok().map(|v| !v.is_empty())
            }
            _ => None,
        }
    }

    /// Rewrites `a` to a semantically equal predicate.
    pub fn simplify(&self, a: &Pred) -> Pred {
        let mut cur = a.clone();
        for _ in 0..MAX_PASSES {
            let next = self.simp(&cur);
            if next == cur {
                break;
            }
            cur = next;
        }
        cur
    }

    fn simp(&self, a: &Pred) -> Pred {
        let out = match a {
            Pred::Top | Pred::Bot => return a.clone(),
            Pred::Cla(e) => {
                let e = simp_expr(e, self.ctx);
                match e.as_bool_lit() {
                    Some(true) => Pred::Top,
                    Some(false) => Pred::Bot,
                    None => Pred::Cla(e),
                }
            }
            Pred::Span(e, q) => {
                let e = simp_expr(e, self.ctx);
                if self.zero_vector(&e) {
                    Pred::Bot
                } else {
                    Pred::Span(e, q.clone())
                }
            }
            Pred::Im(e, q) => {
                let e = simp_expr(e, self.ctx);
                if self.surjective(&e) {
                    Pred::Top
                } else {
                    Pred::Im(e, q.clone())
                }
            }
            Pred::Qeq(l, r) => {
                let side = |s: &QSide| QSide {
                    op: s.op.as_ref().map(|e| simp_expr(e, self.ctx)).filter(|e| {
                        !matches!(e, Expr::TypeFn(TypeFn::Id, t) if Some(t) == list_type(self.ctx, &s.vars).as_ref())
                    }),
                    vars: s.vars.clone(),
                };
                let p = Pred::Qeq(side(l), side(r));
                qeq_cancel(self, &p).unwrap_or(p)
            }
            Pred::And(..) => self.simp_and(a),
            Pred::Sum(..) => self.simp_sum(a),
            Pred::Ortho(x) => match self.simp(x) {
                Pred::Top => Pred::Bot,
                Pred::Bot => Pred::Top,
                Pred::Cla(e) => Pred::Cla(simp_expr(&not(e), self.ctx)),
                Pred::Ortho(y) => *y,
                x => ortho(x),
            },
            Pred::Inf(z, dom, body) => self.simp_inf(z, dom, &self.simp(body)),
            Pred::Div(x, e, q) => self.simp_div(&self.simp(x), &simp_expr(e, self.ctx), q),
            Pred::Apply(e, q, x) => self.simp_apply(&simp_expr(e, self.ctx), q, &self.simp(x)),
        };
        self.fold(out)
    }

    fn fold(&self, a: Pred) -> Pred {
        if matches!(a, Pred::Top | Pred::Bot | Pred::Cla(_) | Pred::Qeq(..)) || self.space.dim() > FOLD_DIM {
            return a;
        }
        if !a.fv().is_empty() || a.contains_qeq() {
            return a;
        }
        match self.eval(&a, &no_env()) {
            Ok(s) if s.is_full() => Pred::Top,
            Ok(s) if s.is_zero() => Pred::Bot,
            _ => a,
        }
    }

    fn simp_and(&self, a: &Pred) -> Pred {
        let mut clas = Vec::new();
        let mut rest: Vec<Pred> = Vec::new();
        for c in a.conjuncts() {
            for c in self.simp(c).conjuncts() {
                match c {
                    Pred::Top => {}
                    Pred::Bot => return Pred::Bot,
                    Pred::Cla(e) => clas.extend(conjuncts(e)),
                    c => {
                        if !rest.contains(c) {
                            rest.push(c.clone())
                        }
                    }
                }
            }
        }
        let mut parts = Vec::new();
        if !clas.is_empty() {
            let e = simp_expr(&and_all(clas), self.ctx);
            match e.as_bool_lit() {
                Some(false) => return Pred::Bot,
                Some(true) => {}
                None => parts.push(Pred::Cla(e)),
            }
        }
        for i in 0..rest.len() {
            for j in 0..rest.len() {
                if i == j {
                    continue;
                }
                let pair = pand(rest[i].clone(), rest[j].clone());
                if let Some(new) = qeq_span(self, &pair).or_else(|| quanteqaddstate(self, &pair)) {
                    let (lo, hi) = (i.min(j), i.max(j));
                    rest.remove(hi);
                    rest[lo] = new;
                    parts.extend(rest);
                    return pand_all(parts);
                }
            }
        }
        parts.extend(rest);
        pand_all(parts)
    }

    fn simp_sum(&self, a: &Pred) -> Pred {
        let mut clas = Vec::new();
        let mut rest: Vec<Pred> = Vec::new();
        for s in a.summands() {
            match self.simp(s) {
                Pred::Bot => {}
                Pred::Top => return Pred::Top,
                Pred::Cla(e) => clas.push(e),
                s => {
                    if !rest.contains(&s) {
                        rest.push(s)
                    }
                }
            }
        }
        let mut parts = Vec::new();
        if !clas.is_empty() {
            let e = clas.into_iter().reduce(or).expect("nonempty");
            match simp_expr(&e, self.ctx).as_bool_lit() {
                Some(true) => return Pred::Top,
                Some(false) => {}
                None => parts.push(Pred::Cla(simp_expr(&e, self.ctx))),
            }
        }
        parts.extend(rest);
        parts.into_iter().reduce(psum).unwrap_or(Pred::Bot)
    }

    fn simp_inf(&self, z: &VarName, dom: &Domain, body: &Pred) -> Pred {
        let dom = match dom {
            Domain::Set(s) => Domain::Set(Box::new(simp_expr(s, self.ctx))),
            d => d.clone(),
        };
        let nonempty = self.nonempty_domain(&dom);
        if nonempty == Some(false) || *body == Pred::Top {
            return Pred::Top;
        }
        if !body.fv().contains(z) && nonempty == Some(true) {
            return body.clone();
        }
        if let Pred::Cla(e) = body {
            return Pred::Cla(simp_expr(&Expr::Quant(Quant::Forall, z.clone(), dom, Box::new(e.clone())), self.ctx));
        }
        if nonempty == Some(true) {
            let (inner, outer): (Vec<&Pred>, Vec<&Pred>) = body.conjuncts().into_iter().partition(|c| c.fv().contains(z));
            if !outer.is_empty() {
                let inf = Pred::Inf(z.clone(), dom, Box::new(pand_all(inner.into_iter().cloned())));
                return pand_all(outer.into_iter().cloned().chain([inf]));
            }
        }
        Pred::Inf(z.clone(), dom, Box::new(body.clone()))
    }

    fn simp_div(&self, a: &Pred, e: &Expr, q: &[VarName]) -> Pred {
        let keep = || Pred::Div(Box::new(a.clone()), e.clone(), q.to_vec());
        if self.zero_vector(e) {
            return Pred::Top;
        }
        if !self.nonzero_vector(e) {
            return keep();
        }
        match a {
            Pred::Top | Pred::Bot | Pred::Cla(_) => a.clone(),
            Pred::And(x, y) => pand(self.simp_div(x, e, q), self.simp_div(y, e, q)),
            a if a.qvars().iter().all(|v| !q.contains(v)) => a.clone(),
            _ => keep(),
        }
    }

    fn simp_apply(&self, e: &Expr, q: &[VarName], a: &Pred) -> Pred {
        let keep = || Pred::Apply(e.clone(), q.to_vec(), Box::new(a.clone()));
        if *a == Pred::Bot {
            return Pred::Bot;
        }
        if self.is_identity(e) {
            return a.clone();
        }
        if *a == Pred::Top {
            return if self.surjective(e) { Pred::Top } else { keep() };
        }
        if !self.is_unitary(e) {
            return keep();
        }
        match a {
            Pred::Cla(_) => a.clone(),
            Pred::And(x, y) => pand(self.simp_apply(e, q, x), self.simp_apply(e, q, y)),
            a if a.qvars().iter().all(|v| !q.contains(v)) => a.clone(),
            a => qeq_inside(self, &Pred::Apply(e.clone(), q.to_vec(), Box::new(a.clone()))).unwrap_or_else(keep),
        }
    }
}

/// `(A u1) Q1 ≡ u2 Q2  =  u1 Q1 ≡ (A† u2) Q2` when `u1 = A * u1'`.
pub fn qeq_move(a: &Pred) -> Option<Pred> {
    let Pred::Qeq(l, r) = a else { return None };
    let Some(Expr::Bin(BinOp::Mul, f, u1)) = &l.op else { return None };
    let u2 = match &r.op {
        Some(u2) => bin(BinOp::Mul, adj((**f).clone()), u2.clone()),
        None => adj((**f).clone()),
    };
    Some(Pred::Qeq(
        QSide { op: Some((**u1).clone()), vars: l.vars.clone() },
        QSide { op: Some(u2), vars: r.vars.clone() },
    ))
}

/// Cancels a common isometric left factor: `(A u1) Q1 ≡ (A u2) Q2 = u1 Q1 ≡ u2 Q2`.
pub fn qeq_cancel(ev: &Evaluator, a: &Pred) -> Option<Pred> {
    let Pred::Qeq(l, r) = a else { return None };
    let (lo, ro) = (l.op.as_ref()?, r.op.as_ref()?);
    let split = |e: &Expr| match e {
        Expr::Bin(BinOp::Mul, f, u) => (Some((**f).clone()), Some((**u).clone())),
        e => (Some(e.clone()), None),
    };
    let (f1, u1) = split(lo);
    let (f2, u2) = split(ro);
    let (f1, f2) = (f1?, f2?);
    if !f1.alpha_eq(&f2) || !ev.is_isometry(&f1) {
        return None;
    }
    Some(Pred::Qeq(QSide { op: u1, vars: l.vars.clone() }, QSide { op: u2, vars: r.vars.clone() }))
}

/// `(A»Q) · (u1 Q1 ≡ u2 Q2) = (u1 A'†) Q1 ≡ u2 Q2` for unitary `A`, where
/// `Q` is a contiguous part of `Q1` (or of `Q2`) and `A'` is `A` padded
/// with identities.
pub fn qeq_inside(ev: &Evaluator, a: &Pred) -> Option<Pred> {
    let Pred::Apply(e, q, inner) = a else { return None };
    let Pred::Qeq(l, r) = &**inner else { return None };
    if !ev.is_unitary(e) {
        return None;
    }
    let pad = |list: &[VarName]| -> Option<Expr> {
        let i = contiguous(q, list)?;
        let mut op = e.clone();
        if i > 0 {
            op = bin(BinOp::Tensor, id_of(ev.ctx, &list[..i])?, op);
        }
        if i + q.len() < list.len() {
            op = bin(BinOp::Tensor, op, id_of(ev.ctx, &list[i + q.len()..])?);
        }
        Some(op)
    };
    let absorb = |s: &QSide, a: Expr| -> QSide {
        let a = simp_expr(&adj(a), ev.ctx);
        QSide {
            op: Some(match &s.op {
                Some(u) => simp_expr(&bin(BinOp::Mul, u.clone(), a), ev.ctx),
                None => a,
            }),
            vars: s.vars.clone(),
        }
    };
    if let Some(a1) = pad(&l.vars) {
        return Some(Pred::Qeq(absorb(l, a1), r.clone()));
    }
    if let Some(a2) = pad(&r.vars) {
        return Some(Pred::Qeq(l.clone(), absorb(r, a2)));
    }
    None
}

fn qeq_and_span(a: &Pred) -> Option<(&QSide, &QSide, &Expr, &Vec<VarName>)> {
    let Pred::And(x, y) = a else { return None };
    match (&**x, &**y) {
        (Pred::Qeq(l, r), Pred::Span(psi, q)) | (Pred::Span(psi, q), Pred::Qeq(l, r)) => Some((l, r, psi, q)),
        _ => None,
    }
}

/// `(u1 Q1 ≡ u2 Q2) ∩ span{ψ}»Q1 = span{ψ}»Q1 ∩ span{u2† u1 ψ}»Q2`
/// provided `u1† u2 u2† u1 ψ = ψ` (and symmetrically for `Q2`).
pub fn qeq_span(ev: &Evaluator, a: &Pred) -> Option<Pred> {
    let (l, r, psi, q) = qeq_and_span(a)?;
    let (this, other) = if *q == l.vars {
        (l, r)
    } else if *q == r.vars {
        (r, l)
    } else {
        return None;
    };
    let apply = |op: &Option<Expr>, x: Expr| match op {
        Some(u) => bin(BinOp::Mul, u.clone(), x),
        None => x,
    };
    let adj_apply = |op: &Option<Expr>, x: Expr| match op {
        Some(u) => bin(BinOp::Mul, adj(u.clone()), x),
        None => x,
    };
    let moved = adj_apply(&other.op, apply(&this.op, psi.clone()));
    let round = adj_apply(&this.op, apply(&other.op, moved.clone()));
    let cond = bin(BinOp::Eq, round, psi.clone());
    if !ev.for_all_values(&cond, |v| v.as_bool() == Some(true)) {
        return None;
    }
    Some(pand(
        Pred::Span(psi.clone(), q.clone()),
        Pred::Span(simp_expr(&moved, ev.ctx), other.vars.clone()),
    ))
}

/// `(u1 Q1 ≡ u2 Q2) ∩ span{ψ}»R = (u1 ⊗ id) (Q1 R) ≡ (u2 ⊗ ψ) Q2` for a
/// unit vector `ψ` and `R` disjoint from `Q1 Q2`. `R` joins the side
/// whose variables carry the same tag.
pub fn quanteqaddstate(ev: &Evaluator, a: &Pred) -> Option<Pred> {
    let (l, r, psi, q) = qeq_and_span(a)?;
    if q.iter().any(|v| l.vars.contains(v) || r.vars.contains(v)) || !ev.unit_vector(psi) {
        return None;
    }
    let join_right = q.first().map(|v| v.tag) == r.vars.first().map(|v| v.tag)
        && q.first().map(|v| v.tag) != l.vars.first().map(|v| v.tag);
    let (grow, keep) = if join_right { (r, l) } else { (l, r) };
    let grow_op = bin(BinOp::Tensor, grow.op.clone().or_else(|| id_of(ev.ctx, &grow.vars))?, id_of(ev.ctx, q)?);
    let keep_op = bin(BinOp::Tensor, keep.op.clone().or_else(|| id_of(ev.ctx, &keep.vars))?, psi.clone());
    let mut vars = grow.vars.clone();
    vars.extend(q.iter().cloned());
    let grown = QSide { op: Some(grow_op), vars };
    let kept = QSide { op: Some(keep_op), vars: keep.vars.clone() };
    Some(if join_right { Pred::Qeq(kept, grown) } else { Pred::Qeq(grown, kept) })
}

/// `Cla[e] ∩ Cla[f] = Cla[e ∧ f]`, `Cla[e] + Cla[f] = Cla[e ∨ f]`,
/// `ortho Cla[e] = Cla[¬e]`, `⋂_{z∈g} Cla[e] = Cla[∀z∈g. e]`.
pub fn cl_simps(a: &Pred) -> Option<Pred> {
    match a {
        Pred::And(x, y) => match (&**x, &**y) {
            (Pred::Cla(e), Pred::Cla(f)) => Some(Pred::Cla(bin(BinOp::And, e.clone(), f.clone()))),
            _ => None,
        },
        Pred::Sum(x, y) => match (&**x, &**y) {
            (Pred::Cla(e), Pred::Cla(f)) => Some(Pred::Cla(or(e.clone(), f.clone()))),
            _ => None,
        },
        Pred::Ortho(x) => match &**x {
            Pred::Cla(e) => Some(Pred::Cla(not(e.clone()))),
            _ => None,
        },
        Pred::Inf(z, dom, body) => match &**body {
            Pred::Cla(e) => Some(Pred::Cla(Expr::Quant(Quant::Forall, z.clone(), dom.clone(), Box::new(e.clone())))),
            _ => None,
        },
        _ => None,
    }
}

/// `A ⊆ (B ÷ ψ»Q) ⊗ ℓ2[Q]  ⟺  A ∩ span{ψ}»Q ⊆ B` when `A` does not
/// mention `Q`.
pub fn spacediv_leq(a: &Pred, b: &Pred) -> Option<(Pred, Pred)> {
    let Pred::Div(inner, psi, q) = b else { return None };
    if a.qvars().iter().any(|v| q.contains(v)) {
        return None;
    }
    Some((pand(a.clone(), Pred::Span(psi.clone(), q.clone())), (**inner).clone()))
}

/// A remaining proof obligation of an inclusion.
#[derive(Debug, Clone, PartialEq)]
pub enum Obligation {
    Leq(Pred, Pred),
    Ambient(Expr),
}

fn cla_atoms(p: &Pred) -> Vec<Pred> {
    match p {
        Pred::Cla(e) => conjuncts(e).into_iter().map(Pred::Cla).collect(),
        p => vec![p.clone()],
    }
}

/// Every conjunct of `b` occurs among the conjuncts of `a`.
pub fn syntactic_leq(a: &Pred, b: &Pred) -> bool {
    let have: Vec<Pred> = a.conjuncts().into_iter().flat_map(cla_atoms).map(|p| p.canonical()).collect();
    b.conjuncts().into_iter().flat_map(cla_atoms).all(|c| *b == Pred::Top || is_bool_cla(&c) || have.contains(&c.canonical()))
}

fn is_bool_cla(p: &Pred) -> bool {
    matches!(p, Pred::Cla(e) if is_bool_lit(e, true)) || *p == Pred::Top
}

impl Evaluator<'_> {
    /// Reduces `A ⊆ B` by simplification, splitting, `spacediv.leq` and the
    /// product-state characterization of quantum equality. Returns the
    /// remaining obligations (empty when proved syntactically).
    pub fn reduce_leq(&self, a: &Pred, b: &Pred) -> Vec<Obligation> {
        let mut out = Vec::new();
        let mut work = vec![(a.clone(), b.clone())];
        let mut steps = 0;
        while let Some((a, b)) = work.pop() {
            steps += 1;
            let a = self.simplify(&a);
            let b = self.simplify(&b);
            if b == Pred::Top || a == Pred::Bot || syntactic_leq(&a, &b) {
                continue;
            }
            if steps > 64 {
                out.push(Obligation::Leq(a, b));
                continue;
            }
            if let Pred::And(..) = b {
                for c in b.conjuncts() {
                    work.push((a.clone(), c.clone()));
                }
                continue;
            }
            if let Some(pair) = spacediv_leq(&a, &b) {
                work.push(pair);
                continue;
            }
            if let Some(e) = self.qeq_membership(&a, &b) {
                out.push(Obligation::Ambient(e));
                continue;
            }
            out.push(Obligation::Leq(a, b));
        }
        out.reverse();
        out
    }

    /// `span{ψ1}»Q1 ∩ span{ψ2}»Q2 ⊆ (u1 Q1 ≡ u2 Q2)  ⟺  u1 ψ1 = u2 ψ2` for
    /// unit vectors and isometries; sufficient when `a` has more conjuncts.
    fn qeq_membership(&self, a: &Pred, b: &Pred) -> Option<Expr> {
        let Pred::Qeq(l, r) = b else { return None };
        let find = |q: &[VarName]| {
            a.conjuncts().into_iter().find_map(|c| match c {
                Pred::Span(psi, v) if v.as_slice() == q => Some(psi.clone()),
                _ => None,
            })
        };
        let (p1, p2) = (find(&l.vars)?, find(&r.vars)?);
        if !self.unit_vector(&p1) || !self.unit_vector(&p2) {
            return None;
        }
        for s in [l, r] {
            if let Some(u) = &s.op {
                if !self.is_isometry(u) {
                    return None;
                }
            }
        }
        let side = |s: &QSide, psi: Expr| match &s.op {
            Some(u) => bin(BinOp::Mul, u.clone(), psi),
            None => psi,
        };
        Some(bin(BinOp::Eq, side(l, p1), side(r, p2)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::types::BIT;
    use crate::lang::VarKind;

    fn ctx() -> Context {
        let mut c = Context::default();
        c.add_var("x", BIT, VarKind::Classical).unwrap();
        c.add_var("q", BIT, VarKind::Quantum).unwrap();
        c.add_var("r", BIT, VarKind::Quantum).unwrap();
        c
    }

    fn p(c: &Context, s: &str) -> Pred {
        parse_predicate(s, c, true).unwrap()
    }

    #[test]
    fn printing_round_trips() {
        let c = ctx();
        for s in [
            "Cla[x1 = x2] /\\ Qeq[q1, r1 == q2, r2]",
            "Qeq[(H ⊗ id(bit)) @ q1, r1 == q2, r2]",
            "ortho span{ket0} >> [q1] \\/+ im(H) >> [r2]",
            "(H @ q1) * Qeq[q1 == q2] div EPR @ [q2, r2]",
            "Inf z : bit. Cla[z = x1] /\\ top",
            "(top \\/+ bot) /\\ Cla[true]",
        ] {
            let a = p(&c, s);
            let printed = a.to_string();
            assert_eq!(p(&c, &printed), a, "{printed}");
        }
    }

    #[test]
    fn swap_equality_has_symmetric_dimension() {
        let c = ctx();
        let ev = Evaluator::relational(&c);
        let env = no_env();
        let s = ev.eval(&p(&c, "Qeq[q1 == q2]"), &env).unwrap();
        assert_eq!(s.dim(), 3 * 4);
    }

    #[test]
    fn qapply_precondition_simplifies_into_equality() {
        let c = ctx();
        let ev = Evaluator::relational(&c);
        let pre = p(&c, "(adj(H) @ q1) * (Qeq[q1, r1 == q2, r2] /\\ im(H) >> [q1])");
        let s = ev.simplify(&pre);
        assert_eq!(s.to_string(), "Qeq[(H ⊗ id(bit)) @ q1, r1 == q2, r2]");
        assert!(pred_equiv(&ev, &pre, &s).unwrap());
    }

    #[test]
    fn epr_inclusion_reduces_to_vector_identity() {
        let c = ctx();
        let ev = Evaluator::relational(&c);
        let i2 = p(&c, "Qeq[(H ⊗ id(bit)) @ q1, r1 == (id(bit) ⊗ H) @ q2, r2]");
        let i4 = Pred::Div(
            Box::new(Pred::Div(Box::new(i2), Expr::Const("EPR".into()), vec![VarName::new("q", 1), VarName::new("r", 1)])),
            Expr::Const("EPR".into()),
            vec![VarName::new("q", 2), VarName::new("r", 2)],
        );
        let obl = ev.reduce_leq(&Pred::Top, &i4);
        assert_eq!(obl.len(), 1);
        let Obligation::Ambient(e) = &obl[0] else { panic!("{obl:?}") };
        assert_eq!(e.to_string(), "H ⊗ id(bit) * EPR = id(bit) ⊗ H * EPR");
        assert!(pred_leq(&ev, &Pred::Top, &i4).unwrap());
    }

    #[test]
    fn substitution_then_simplify_reaches_bottom() {
        let c = ctx();
        let ev = Evaluator::relational(&c);
        let a = p(&c, "Cla[x1 = 0]").subst1(&VarName::new("x", 1), &Expr::Lit(Value::Int(1, 2)));
        assert_eq!(ev.simplify(&a), Pred::Bot);
    }
}
