use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use super::context::Context;
use super::expr::{Expr, VarName};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Stmt {
    Skip,
    Assign(VarName, Expr),
    Sample(VarName, Expr),
    If(Expr, Block, Block),
    While(Expr, Block),
    QInit(Vec<VarName>, Expr),
    QApply(Expr, Vec<VarName>),
    Measure(VarName, Vec<VarName>, Expr),
    Call(Arc<str>),
}

pub type Block = Vec<Stmt>;

/// Drops `skip` statements (recursively); `skip; c = c = c; skip`.
pub fn normalize(block: &[Stmt]) -> Block {
    block
        .iter()
        .filter(|s| !matches!(s, Stmt::Skip))
        .map(|s| match s {
            Stmt::If(e, a, b) => Stmt::If(e.clone(), normalize(a), normalize(b)),
            Stmt::While(e, body) => Stmt::While(e.clone(), normalize(body)),
            s => s.clone(),
        })
        .collect()
}

impl Stmt {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Stmt::Skip => "skip",
            Stmt::Assign(..) => "assignment",
            Stmt::Sample(..) => "sampling",
            Stmt::If(..) => "conditional",
            Stmt::While(..) => "while loop",
            Stmt::QInit(..) => "quantum initialization",
            Stmt::QApply(..) => "quantum application",
            Stmt::Measure(..) => "measurement",
            Stmt::Call(..) => "adversary call",
        }
    }

    /// Applies `f` to every embedded variable occurrence (lhs, registers,
    /// and free variables of expressions).
    pub fn rename_vars(&self, f: &dyn Fn(&VarName) -> Option<VarName>) -> Stmt {
        let v = |x: &VarName| f(x).unwrap_or_else(|| x.clone());
        let vs = |xs: &[VarName]| xs.iter().map(&v).collect::<Vec<_>>();
        match self {
            Stmt::Skip => Stmt::Skip,
            Stmt::Assign(x, e) => Stmt::Assign(v(x), e.rename_free(f)),
            Stmt::Sample(x, e) => Stmt::Sample(v(x), e.rename_free(f)),
            Stmt::If(e, a, b) => Stmt::If(e.rename_free(f), rename_block(a, f), rename_block(b, f)),
            Stmt::While(e, body) => Stmt::While(e.rename_free(f), rename_block(body, f)),
            Stmt::QInit(q, e) => Stmt::QInit(vs(q), e.rename_free(f)),
            Stmt::QApply(e, q) => Stmt::QApply(e.rename_free(f), vs(q)),
            Stmt::Measure(x, q, e) => Stmt::Measure(v(x), vs(q), e.rename_free(f)),
            Stmt::Call(a) => Stmt::Call(a.clone()),
        }
    }
}

pub fn rename_block(block: &[Stmt], f: &dyn Fn(&VarName) -> Option<VarName>) -> Block {
    block.iter().map(|s| s.rename_vars(f)).collect()
}

/// `idx_i`: tags every program variable with `tag`.
pub fn idx(block: &[Stmt], tag: u8, ctx: &Context) -> Block {
    rename_block(block, &|v| {
        if v.tag == 0 && ctx.var(&v.base).is_some() {
            Some(v.with_tag(tag))
        } else {
            None
        }
    })
}

/// Free variables: read and written classical variables, all quantum
/// registers of quantum statements, and declared adversary footprints.
pub fn fv(block: &[Stmt], ctx: &Context) -> BTreeSet<VarName> {
    let mut out = BTreeSet::new();
    for s in block {
        fv_stmt(s, ctx, &mut out);
    }
    out
}

fn fv_stmt(s: &Stmt, ctx: &Context, out: &mut BTreeSet<VarName>) {
    match s {
        Stmt::Skip => {}
        Stmt::Assign(x, e) | Stmt::Sample(x, e) => {
            out.insert(x.clone());
            out.extend(e.fv());
        }
        Stmt::If(e, a, b) => {
            out.extend(e.fv());
            out.extend(fv(a, ctx));
            out.extend(fv(b, ctx));
        }
        Stmt::While(e, body) => {
            out.extend(e.fv());
            out.extend(fv(body, ctx));
        }
        Stmt::QInit(q, e) | Stmt::QApply(e, q) => {
            out.extend(q.iter().cloned());
            out.extend(e.fv());
        }
        Stmt::Measure(x, q, e) => {
            out.insert(x.clone());
            out.extend(q.iter().cloned());
            out.extend(e.fv());
        }
        Stmt::Call(a) => {
            if let Some(adv) = ctx.adversaries.get(a) {
                out.extend(adv.vars.iter().map(|v| VarName::plain(v)));
            }
        }
    }
}

/// Classical variables that may be overwritten.
pub fn written(block: &[Stmt], ctx: &Context) -> BTreeSet<VarName> {
    let mut out = BTreeSet::new();
    for s in block {
        match s {
            Stmt::Assign(x, _) | Stmt::Sample(x, _) | Stmt::Measure(x, _, _) => {
                out.insert(x.clone());
            }
            Stmt::If(_, a, b) => {
                out.extend(written(a, ctx));
                out.extend(written(b, ctx));
            }
            Stmt::While(_, body) => out.extend(written(body, ctx)),
            Stmt::Call(a) => {
                if let Some(adv) = ctx.adversaries.get(a) {
                    for v in &adv.vars {
                        if !adv.readonly.contains(v) && ctx.is_classical(v) {
                            out.insert(VarName::plain(v));
                        }
                    }
                }
            }
            _ => {}
        }
    }
    out
}

pub fn is_local(block: &[Stmt], xs: &BTreeSet<VarName>, ctx: &Context) -> bool {
    fv(block, ctx).is_subset(xs)
}

pub fn is_readonly(block: &[Stmt], xs: &BTreeSet<VarName>, ctx: &Context) -> bool {
    written(block, ctx).is_disjoint(xs)
}

pub fn contains_call(block: &[Stmt]) -> bool {
    block.iter().any(|s| match s {
        Stmt::Call(_) => true,
        Stmt::If(_, a, b) => contains_call(a) || contains_call(b),
        Stmt::While(_, body) => contains_call(body),
        _ => false,
    })
}

pub fn is_classical(block: &[Stmt]) -> bool {
    block.iter().all(|s| match s {
        Stmt::QInit(..) | Stmt::QApply(..) | Stmt::Measure(..) | Stmt::Call(_) => false,
        Stmt::If(_, a, b) => is_classical(a) && is_classical(b),
        Stmt::While(_, body) => is_classical(body),
        _ => true,
    })
}

fn list(q: &[VarName]) -> String {
    q.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

pub fn fmt_block(block: &[Stmt]) -> String {
    block
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

impl fmt::Display for Stmt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stmt::Skip => write!(f, "skip;"),
            Stmt::Assign(x, e) => write!(f, "{x} <- {e};"),
            Stmt::Sample(x, e) => write!(f, "{x} <$ {e};"),
            Stmt::If(e, a, b) => {
                write!(
                    f,
                    "if ({e}) {{ {} }} else {{ {} }}",
                    fmt_block(a),
                    fmt_block(b)
                )
            }
            Stmt::While(e, body) => write!(f, "while ({e}) {{ {} }}", fmt_block(body)),
            Stmt::QInit(q, e) => write!(f, "{} <q {e};", list(q)),
            Stmt::QApply(e, q) => write!(f, "on {} apply {e};", list(q)),
            Stmt::Measure(x, q, e) => write!(f, "{x} <- measure {} with {e};", list(q)),
            Stmt::Call(a) => write!(f, "call {a};"),
        }
    }
}
