//! Boolean and operator expression simplification used by the predicate
//! simplifier.

use super::eval::eval_closed;
use super::expr::{adj, and_all, bin, not, BinOp, Builtin, Domain, Expr, TypeFn, UnOp};
use super::{Context, Value};

const EXPAND_LIMIT: usize = 16;

/// Rewrites `e` to a simpler equivalent expression.
pub fn simp_expr(e: &Expr, ctx: &Context) -> Expr {
    let e = simp_children(e, ctx);
    let e = simp_node(e, ctx);
    fold_closed(e, ctx)
}

fn simp_children(e: &Expr, ctx: &Context) -> Expr {
    let s = |x: &Expr| simp_expr(x, ctx);
    match e {
        Expr::Lit(_) | Expr::Var(_) | Expr::Const(_) | Expr::TypeFn(..) => e.clone(),
        Expr::Tuple(es) => Expr::Tuple(es.iter().map(s).collect()),
        Expr::SetLit(es) => Expr::SetLit(es.iter().map(s).collect()),
        Expr::Call(b, es) => Expr::Call(*b, es.iter().map(s).collect()),
        Expr::DistrLit(es) => Expr::DistrLit(es.iter().map(|(x, w)| (s(x), *w)).collect()),
        Expr::Proj(x, i) => Expr::Proj(Box::new(s(x)), *i),
        Expr::Un(op, x) => Expr::Un(*op, Box::new(s(x))),
        Expr::Bin(op, a, b) => Expr::Bin(*op, Box::new(s(a)), Box::new(s(b))),
        Expr::If(a, b, c) => Expr::If(Box::new(s(a)), Box::new(s(b)), Box::new(s(c))),
        Expr::App(h, args) => Expr::App(Box::new(s(h)), args.iter().map(s).collect()),
        Expr::Quant(q, z, dom, body) => {
            let dom = match dom {
                Domain::Type(t) => Domain::Type(t.clone()),
                Domain::Set(x) => Domain::Set(Box::new(s(x))),
            };
            Expr::Quant(*q, z.clone(), dom, Box::new(s(body)))
        }
        Expr::Lambda(z, t, body) => Expr::Lambda(z.clone(), t.clone(), Box::new(s(body))),
    }
}

/// Conjuncts of a right- or left-nested conjunction.
pub fn conjuncts(e: &Expr) -> Vec<Expr> {
    match e {
        Expr::Bin(BinOp::And, a, b) => {
            let mut out = conjuncts(a);
            out.extend(conjuncts(b));
            out
        }
        e => vec![e.clone()],
    }
}

fn disjuncts(e: &Expr) -> Vec<Expr> {
    match e {
        Expr::Bin(BinOp::Or, a, b) => {
            let mut out = disjuncts(a);
            out.extend(disjuncts(b));
            out
        }
        e => vec![e.clone()],
    }
}

fn dedup(items: Vec<Expr>) -> Vec<Expr> {
    let mut out: Vec<Expr> = Vec::new();
    for x in items {
        if !out.iter().any(|y| y.alpha_eq(&x)) {
            out.push(x);
        }
    }
    out
}

fn lit(b: bool) -> Expr {
    Expr::Lit(Value::Bool(b))
}

fn is_id(e: &Expr) -> bool {
    matches!(e, Expr::TypeFn(TypeFn::Id, _))
}

fn simp_node(e: Expr, ctx: &Context) -> Expr {
    match e {
        Expr::Un(UnOp::Not, x) => match *x {
            Expr::Lit(Value::Bool(b)) => lit(!b),
            Expr::Un(UnOp::Not, y) => *y,
            x => not(x),
        },
        Expr::Bin(BinOp::And, ..) => {
            let parts = conjuncts(&e);
            if parts.iter().any(|p| p.as_bool_lit() == Some(false)) {
                return lit(false);
            }
            let parts = dedup(parts.into_iter().filter(|p| p.as_bool_lit() != Some(true)).collect());
            if parts.is_empty() {
                lit(true)
            } else {
                and_all(parts)
            }
        }
        Expr::Bin(BinOp::Or, ..) => {
            let parts = disjuncts(&e);
            if parts.iter().any(|p| p.as_bool_lit() == Some(true)) {
                return lit(true);
            }
            let parts = dedup(parts.into_iter().filter(|p| p.as_bool_lit() != Some(false)).collect());
            let mut it = parts.into_iter();
            match it.next() {
                None => lit(false),
                Some(first) => it.fold(first, |a, b| bin(BinOp::Or, a, b)),
            }
        }
        Expr::Bin(BinOp::Implies, a, b) => match (a.as_bool_lit(), b.as_bool_lit()) {
            (Some(true), _) => *b,
            (Some(false), _) | (_, Some(true)) => lit(true),
            (_, Some(false)) => simp_node(not(*a), ctx),
            _ if a.alpha_eq(&b) => lit(true),
            _ => Expr::Bin(BinOp::Implies, a, b),
        },
        Expr::Bin(BinOp::Iff, a, b) => match (a.as_bool_lit(), b.as_bool_lit()) {
            (Some(true), _) => *b,
            (_, Some(true)) => *a,
            _ if a.alpha_eq(&b) => lit(true),
            _ => Expr::Bin(BinOp::Iff, a, b),
        },
        Expr::Bin(BinOp::Eq, a, b) if a.alpha_eq(&b) => lit(true),
        Expr::Bin(BinOp::Neq, a, b) if a.alpha_eq(&b) => lit(false),
        Expr::Bin(BinOp::Mul, a, b) if is_id(&a) => *b,
        Expr::Bin(BinOp::Mul, a, b) if is_id(&b) => *a,
        Expr::If(c, a, b) => match c.as_bool_lit() {
            Some(true) => *a,
            Some(false) => *b,
            None if a.alpha_eq(&b) => *a,
            None => Expr::If(c, a, b),
        },
        Expr::Call(Builtin::Adj, mut args) if args.len() == 1 => match args.pop().expect("one") {
            Expr::Call(Builtin::Adj, mut inner) if inner.len() == 1 => inner.pop().expect("one"),
            x @ Expr::TypeFn(TypeFn::Id, _) => x,
            Expr::Bin(BinOp::Tensor, a, b) => bin(
                BinOp::Tensor,
                simp_node(adj(*a), ctx),
                simp_node(adj(*b), ctx),
            ),
            Expr::Bin(BinOp::Mul, a, b) => {
                bin(BinOp::Mul, simp_node(adj(*b), ctx), simp_node(adj(*a), ctx))
            }
            x => adj(x),
        },
        Expr::Quant(super::expr::Quant::Forall, z, dom, body) => {
            let elems = match &dom {
                Domain::Set(s) if s.fv().is_empty() => match eval_closed(s, ctx) {
                    Ok(Value::Set(items)) => Some(items.iter().cloned().collect::<Vec<_>>()),
                    _ => None,
                },
                Domain::Type(t) if t.card().is_some_and(|c| c as usize <= EXPAND_LIMIT) => {
                    Some(t.elements())
                }
                _ => None,
            };
            match elems {
                Some(items) if !body.fv().contains(&z) && !items.is_empty() => *body,
                Some(items) if items.is_empty() => lit(true),
                Some(items) if items.len() <= EXPAND_LIMIT => {
                    let parts = items
                        .iter()
                        .map(|v| simp_expr(&body.subst1(&z, &Expr::from_value(v)), ctx))
                        .collect::<Vec<_>>();
                    simp_node(and_all(parts), ctx)
                }
                _ => Expr::Quant(super::expr::Quant::Forall, z, dom, body),
            }
        }
        e => e,
    }
}

fn foldable(v: &Value) -> bool {
    match v {
        Value::Bool(_) | Value::Int(..) | Value::Enum(..) => true,
        Value::Tuple(vs) => vs.iter().all(foldable),
        _ => false,
    }
}

fn fold_closed(e: Expr, ctx: &Context) -> Expr {
    if matches!(e, Expr::Lit(_) | Expr::Lambda(..) | Expr::Const(_) | Expr::TypeFn(..)) {
        return e;
    }
    if !e.fv().is_empty() {
        return e;
    }
    match eval_closed(&e, ctx) {
        Ok(v) if foldable(&v) => Expr::from_value(&v),
        _ => e,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parser::parse_expr;
    use crate::lang::types::BIT;
    use crate::lang::VarKind;

    fn ctx() -> Context {
        let mut c = Context::default();
        c.add_var("x", BIT, VarKind::Classical).unwrap();
        c.add_var("y", BIT, VarKind::Classical).unwrap();
        c
    }

    fn s(src: &str) -> String {
        let c = ctx();
        simp_expr(&parse_expr(src, &c, true).unwrap(), &c).to_string()
    }

    #[test]
    fn reflexive_equalities_vanish() {
        assert_eq!(s("x1 = x1 && y1 = y2"), "y1 = y2");
        assert_eq!(s("x1 = 1 && (1 = 0)"), "false");
    }

    #[test]
    fn finite_forall_expands() {
        assert_eq!(s("forall z : bit. z = z || x1 = z"), "true");
        assert_eq!(s("forall z in {(0, 0), (1, 1)}. z.0 = z.1 && x1 = x2"), "x1 = x2");
    }

    #[test]
    fn adjoints_push_inward() {
        assert_eq!(s("adj(adj(H) ⊗ id(bit))"), "H ⊗ id(bit)");
    }
}
