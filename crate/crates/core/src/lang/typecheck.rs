use std::collections::BTreeMap;

use super::context::Context;
use super::eval::eval;
use super::expr::{BinOp, Builtin, Domain, Expr, TypeFn, UnOp, VarName};
use super::stmt::Stmt;
use super::types::Type;
use super::value::Value;
use super::LangError;

/// Type of a literal value.
pub fn value_type(v: &Value) -> Type {
    let elem =
        |mut it: Box<dyn Iterator<Item = &Value> + '_>| it.next().map_or(Type::Int(0), value_type);
    match v {
        Value::Bool(_) => Type::Bool,
        Value::Int(_, m) => Type::Int(*m),
        Value::Enum(_, names) => Type::Enum(names.clone()),
        Value::Tuple(vs) => Type::Tuple(vs.iter().map(value_type).collect()),
        Value::Func(m) => Type::Func(
            Box::new(elem(Box::new(m.keys()))),
            Box::new(elem(Box::new(m.values()))),
        ),
        Value::Distr(d) => Type::Distr(Box::new(elem(Box::new(d.iter().map(|(v, _)| v))))),
        Value::Set(s) => Type::Set(Box::new(elem(Box::new(s.iter())))),
        Value::Vector(x) => Type::Vec(Box::new(Type::Int(x.len() as u64))),
        Value::Op(m) => Type::Op(
            Box::new(Type::Int(m.cols() as u64)),
            Box::new(Type::Int(m.rows() as u64)),
        ),
        Value::Meas(m) => {
            let n = m.values().next().map_or(0, |p| p.rows());
            Type::Meas(
                Box::new(elem(Box::new(m.keys()))),
                Box::new(Type::Int(n as u64)),
            )
        }
    }
}

/// Quantum spaces are compatible when they have the same dimension.
pub fn qcompat(a: &Type, b: &Type) -> bool {
    match (a.card(), b.card()) {
        (Some(x), Some(y)) => x == y,
        _ => false,
    }
}

/// Least common type of two expression types; untyped integer literals
/// adopt the modulus of the other side.
pub fn unify(a: &Type, b: &Type) -> Option<Type> {
    match (a, b) {
        _ if a == b => Some(a.clone()),
        (Type::Int(0), Type::Int(_)) => Some(b.clone()),
        (Type::Int(_), Type::Int(0)) => Some(a.clone()),
        (Type::Tuple(x), Type::Tuple(y)) if x.len() == y.len() => Some(Type::Tuple(
            x.iter()
                .zip(y)
                .map(|(p, q)| unify(p, q))
                .collect::<Option<_>>()?,
        )),
        (Type::Func(a1, b1), Type::Func(a2, b2)) => Some(Type::Func(
            Box::new(unify(a1, a2)?),
            Box::new(unify(b1, b2)?),
        )),
        (Type::Distr(x), Type::Distr(y)) => Some(Type::Distr(Box::new(unify(x, y)?))),
        (Type::Set(x), Type::Set(y)) => Some(Type::Set(Box::new(unify(x, y)?))),
        (Type::Vec(x), Type::Vec(y)) if qcompat(x, y) => {
            Some(if x.is_finite() && !matches!(**x, Type::Int(_)) {
                a.clone()
            } else {
                b.clone()
            })
        }
        (Type::Op(a1, b1), Type::Op(a2, b2)) if qcompat(a1, a2) && qcompat(b1, b2) => {
            Some(if matches!((&**a1, &**b1), (Type::Int(_), Type::Int(_))) {
                b.clone()
            } else {
                a.clone()
            })
        }
        (Type::Meas(o1, s1), Type::Meas(o2, s2)) if qcompat(s1, s2) => {
            Some(Type::Meas(Box::new(unify(o1, o2)?), s1.clone()))
        }
        _ => None,
    }
}

/// `e` of type `actual` may be stored in a location of type `target`.
pub fn fits(actual: &Type, target: &Type) -> bool {
    unify(actual, target).is_some_and(|u| u == *target || qcompat_types(&u, target))
}

fn qcompat_types(a: &Type, b: &Type) -> bool {
    match (a, b) {
        (Type::Vec(x), Type::Vec(y)) => qcompat(x, y),
        (Type::Op(a1, b1), Type::Op(a2, b2)) => qcompat(a1, a2) && qcompat(b1, b2),
        (Type::Meas(o1, s1), Type::Meas(o2, s2)) => o1 == o2 && qcompat(s1, s2),
        _ => false,
    }
}

pub struct TypeChecker<'a> {
    ctx: &'a Context,
    locals: Vec<(VarName, Type)>,
}

pub fn infer(e: &Expr, ctx: &Context) -> Result<Type, LangError> {
    TypeChecker {
        ctx,
        locals: Vec::new(),
    }
    .infer(e)
}

pub fn check_bool(e: &Expr, ctx: &Context) -> Result<(), LangError> {
    let t = infer(e, ctx)?;
    if t != Type::Bool {
        return Err(LangError::ty(format!("`{e}` has type {t}, expected bool")));
    }
    Ok(())
}

fn mismatch(op: &str, a: &Type, b: &Type) -> LangError {
    LangError::ty(format!("`{op}` cannot combine {a} and {b}"))
}

impl TypeChecker<'_> {
    fn var(&self, v: &VarName) -> Result<Type, LangError> {
        if let Some((_, t)) = self.locals.iter().rev().find(|(n, _)| n == v) {
            return Ok(t.clone());
        }
        if self.ctx.is_quantum_name(v) {
            return Err(LangError::ty(format!(
                "quantum variable `{v}` used in a classical expression"
            )));
        }
        self.ctx
            .type_of(v)
            .ok_or_else(|| LangError::ty(format!("unknown variable `{v}`")))
    }

    fn bound<R>(&mut self, z: &VarName, t: Type, f: impl FnOnce(&mut Self) -> R) -> R {
        self.locals.push((z.clone(), t));
        let r = f(self);
        self.locals.pop();
        r
    }

    fn expect_bool(&mut self, e: &Expr) -> Result<(), LangError> {
        let t = self.infer(e)?;
        if t != Type::Bool {
            return Err(LangError::ty(format!("`{e}` has type {t}, expected bool")));
        }
        Ok(())
    }

    fn domain(&mut self, d: &Domain) -> Result<Type, LangError> {
        match d {
            Domain::Type(t) if t.is_finite() => Ok(t.clone()),
            Domain::Type(t) => Err(LangError::ty(format!(
                "binder over the non-enumerable type {t}"
            ))),
            Domain::Set(s) => match self.infer(s)? {
                Type::Set(t) | Type::Distr(t) => Ok(*t),
                t => Err(LangError::ty(format!("`{s}` has type {t}, expected a set"))),
            },
        }
    }

    pub fn infer(&mut self, e: &Expr) -> Result<Type, LangError> {
        match e {
            Expr::Lit(v) => Ok(value_type(v)),
            Expr::Var(v) => self.var(v),
            Expr::Const(c) => self
                .ctx
                .consts
                .get(c)
                .map(|(t, _)| t.clone())
                .ok_or_else(|| LangError::ty(format!("unknown constant `{c}`"))),
            Expr::Tuple(es) => Ok(Type::Tuple(
                es.iter().map(|e| self.infer(e)).collect::<Result<_, _>>()?,
            )),
            Expr::Proj(inner, i) => match self.infer(inner)? {
                Type::Tuple(ts) if *i < ts.len() => Ok(ts[*i].clone()),
                t => Err(LangError::ty(format!(
                    "projection .{i} of a value of type {t}"
                ))),
            },
            Expr::Un(UnOp::Not, a) => {
                self.expect_bool(a)?;
                Ok(Type::Bool)
            }
            Expr::Un(UnOp::Neg, a) => match self.infer(a)? {
                t @ (Type::Int(_) | Type::Op(..) | Type::Vec(_)) => Ok(t),
                t => Err(LangError::ty(format!("negation of {t}"))),
            },
            Expr::Bin(op, a, b) => self.binary(*op, a, b),
            Expr::If(c, a, b) => {
                self.expect_bool(c)?;
                let (ta, tb) = (self.infer(a)?, self.infer(b)?);
                unify(&ta, &tb).ok_or_else(|| {
                    LangError::ty(format!("branches of `{e}` have types {ta} and {tb}"))
                })
            }
            Expr::App(h, args) => {
                let th = self.infer(h)?;
                let mut ts = args
                    .iter()
                    .map(|a| self.infer(a))
                    .collect::<Result<Vec<_>, _>>()?;
                let ta = if ts.len() == 1 {
                    ts.pop().expect("one")
                } else {
                    Type::Tuple(ts)
                };
                match th {
                    Type::Func(d, r) if fits(&ta, &d) => Ok(*r),
                    Type::Meas(o, s) if fits(&ta, &o) => Ok(Type::Op(s.clone(), s)),
                    t => Err(LangError::ty(format!(
                        "`{h}` of type {t} cannot be applied to {ta}"
                    ))),
                }
            }
            Expr::Call(b, args) => self.builtin(*b, args),
            Expr::TypeFn(tf, t) => {
                if !t.is_finite() {
                    return Err(LangError::ty(format!(
                        "{}({t}) needs a finite type",
                        tf.name()
                    )));
                }
                let b = Box::new(t.clone());
                Ok(match tf {
                    TypeFn::Uniform => Type::Distr(b),
                    TypeFn::Univ => Type::Set(b),
                    TypeFn::Id => Type::Op(b.clone(), b),
                    TypeFn::Computational => Type::Meas(b.clone(), b),
                })
            }
            Expr::DistrLit(items) => {
                let mut t = None::<Type>;
                let mut total = num_rational::Rational64::from_integer(0);
                for (x, w) in items {
                    if *w < num_rational::Rational64::from_integer(0) {
                        return Err(LangError::ty("negative weight in distribution literal"));
                    }
                    total += w;
                    let tx = self.infer(x)?;
                    t = Some(match t {
                        None => tx,
                        Some(prev) => {
                            unify(&prev, &tx).ok_or_else(|| mismatch("distr", &prev, &tx))?
                        }
                    });
                }
                if total > num_rational::Rational64::from_integer(1) {
                    return Err(LangError::ty(format!(
                        "distribution literal has total mass {total} > 1"
                    )));
                }
                Ok(Type::Distr(Box::new(t.unwrap_or(Type::Int(0)))))
            }
            Expr::SetLit(items) => {
                let mut t = None::<Type>;
                for x in items {
                    let tx = self.infer(x)?;
                    t = Some(match t {
                        None => tx,
                        Some(prev) => {
                            unify(&prev, &tx).ok_or_else(|| mismatch("{..}", &prev, &tx))?
                        }
                    });
                }
                Ok(Type::Set(Box::new(t.unwrap_or(Type::Int(0)))))
            }
            Expr::Quant(_, z, d, body) => {
                let t = self.domain(d)?;
                self.bound(z, t, |s| s.expect_bool(body))?;
                Ok(Type::Bool)
            }
            Expr::Lambda(z, t, body) => {
                if !t.is_finite() {
                    return Err(LangError::ty(format!(
                        "lambda over the non-enumerable type {t}"
                    )));
                }
                let r = self.bound(z, t.clone(), |s| s.infer(body))?;
                Ok(Type::Func(Box::new(t.clone()), Box::new(r)))
            }
        }
    }

    fn binary(&mut self, op: BinOp, a: &Expr, b: &Expr) -> Result<Type, LangError> {
        let ta = self.infer(a)?;
        let tb = self.infer(b)?;
        let err = || mismatch(op.symbol(), &ta, &tb);
        match op {
            BinOp::And | BinOp::Or | BinOp::Implies | BinOp::Iff => {
                if ta == Type::Bool && tb == Type::Bool {
                    Ok(Type::Bool)
                } else {
                    Err(err())
                }
            }
            BinOp::Eq | BinOp::Neq => unify(&ta, &tb).map(|_| Type::Bool).ok_or_else(err),
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => match unify(&ta, &tb) {
                Some(Type::Int(_)) => Ok(Type::Bool),
                _ => Err(err()),
            },
            BinOp::In => match &tb {
                Type::Set(t) if unify(&ta, t).is_some() => Ok(Type::Bool),
                _ => Err(err()),
            },
            BinOp::Add | BinOp::Sub => match unify(&ta, &tb) {
                Some(t @ (Type::Int(_) | Type::Op(..) | Type::Vec(_))) => Ok(t),
                _ => Err(err()),
            },
            BinOp::Xor => match unify(&ta, &tb) {
                Some(t) if xor_type(&t) => Ok(t),
                _ => Err(err()),
            },
            BinOp::Mul => match (&ta, &tb) {
                (Type::Int(_), Type::Int(_)) => unify(&ta, &tb).ok_or_else(err),
                (Type::Op(x, y), Type::Op(u, v)) if qcompat(x, v) => {
                    Ok(Type::Op(u.clone(), y.clone()))
                }
                (Type::Op(x, y), Type::Vec(v)) if qcompat(x, v) => Ok(Type::Vec(y.clone())),
                _ => Err(err()),
            },
            BinOp::Tensor => match (&ta, &tb) {
                (Type::Op(x, y), Type::Op(u, v)) => Ok(Type::Op(
                    Box::new(Type::pair((**x).clone(), (**u).clone())),
                    Box::new(Type::pair((**y).clone(), (**v).clone())),
                )),
                (Type::Vec(x), Type::Vec(y)) => Ok(Type::Vec(Box::new(Type::pair(
                    (**x).clone(),
                    (**y).clone(),
                )))),
                (Type::Op(x, y), Type::Vec(v)) => Ok(Type::Op(
                    x.clone(),
                    Box::new(Type::pair((**y).clone(), (**v).clone())),
                )),
                (Type::Vec(v), Type::Op(x, y)) => Ok(Type::Op(
                    x.clone(),
                    Box::new(Type::pair((**v).clone(), (**y).clone())),
                )),
                _ => Err(err()),
            },
        }
    }

    fn builtin(&mut self, b: Builtin, args: &[Expr]) -> Result<Type, LangError> {
        let t = self.infer(&args[0])?;
        let err = || LangError::ty(format!("{}() is not defined on {t}", b.name()));
        match (b, &t) {
            (Builtin::Supp, Type::Distr(x)) => Ok(Type::Set(x.clone())),
            (Builtin::Marg1, Type::Distr(x)) => match &**x {
                Type::Tuple(ts) if ts.len() == 2 => Ok(Type::Distr(Box::new(ts[0].clone()))),
                _ => Err(err()),
            },
            (Builtin::Marg2, Type::Distr(x)) => match &**x {
                Type::Tuple(ts) if ts.len() == 2 => Ok(Type::Distr(Box::new(ts[1].clone()))),
                _ => Err(err()),
            },
            (Builtin::Total, Type::Distr(_) | Type::Meas(..)) => Ok(Type::Bool),
            (Builtin::Adj, Type::Op(x, y)) => Ok(Type::Op(y.clone(), x.clone())),
            (Builtin::Ket, x) if x.is_finite() => Ok(Type::Vec(Box::new(x.clone()))),
            (Builtin::IsZero, Type::Op(..) | Type::Vec(_)) => Ok(Type::Bool),
            (Builtin::Card, Type::Set(_) | Type::Distr(_)) => Ok(Type::Int(0)),
            (Builtin::Map, Type::Func(d, r)) => match self.infer(&args[1])? {
                Type::Distr(x) if fits(&x, d) => Ok(Type::Distr(r.clone())),
                Type::Set(x) if fits(&x, d) => Ok(Type::Set(r.clone())),
                u => Err(LangError::ty(format!("map of {t} over {u}"))),
            },
            _ => Err(err()),
        }
    }
}

fn xor_type(t: &Type) -> bool {
    match t {
        Type::Bool | Type::Int(_) => true,
        Type::Tuple(ts) => ts.iter().all(xor_type),
        _ => false,
    }
}

/// Calls `f` for every assignment to the free variables of `e` (bound to
/// their declared types). Fails if the enumeration exceeds the cap.
pub fn for_each_assignment(
    vars: &[VarName],
    ctx: &Context,
    mut f: impl FnMut(&BTreeMap<VarName, Value>) -> Result<bool, LangError>,
) -> Result<bool, LangError> {
    let mut doms = Vec::with_capacity(vars.len());
    let mut total: u128 = 1;
    for v in vars {
        let t = ctx
            .type_of(v)
            .ok_or_else(|| LangError::ty(format!("unknown variable `{v}`")))?;
        let es = t.elements();
        total = total.saturating_mul(es.len() as u128);
        doms.push(es);
    }
    if total > ctx.settings.enum_cap as u128 {
        return Err(LangError::TooLarge(total, ctx.settings.enum_cap));
    }
    if doms.iter().any(|d| d.is_empty()) {
        return Ok(true);
    }
    let mut idx = vec![0usize; vars.len()];
    let mut mem: BTreeMap<VarName, Value> = vars
        .iter()
        .zip(&doms)
        .map(|(v, d)| (v.clone(), d[0].clone()))
        .collect();
    loop {
        if !f(&mem)? {
            return Ok(false);
        }
        let mut k = vars.len();
        loop {
            if k == 0 {
                return Ok(true);
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < doms[k].len() {
                mem.insert(vars[k].clone(), doms[k][idx[k]].clone());
                break;
            }
            idx[k] = 0;
            mem.insert(vars[k].clone(), doms[k][0].clone());
        }
    }
}

fn qlist_type(q: &[VarName], ctx: &Context, what: &str) -> Result<Type, LangError> {
    let mut ts = Vec::new();
    for (i, v) in q.iter().enumerate() {
        if !ctx.is_quantum_name(v) {
            return Err(LangError::ty(format!(
                "{what}: `{v}` is not a quantum variable"
            )));
        }
        if q[..i].contains(v) {
            return Err(LangError::ty(format!(
                "{what}: quantum variable `{v}` listed twice"
            )));
        }
        ts.push(ctx.type_of(v).expect("declared"));
    }
    Ok(Type::product(ts))
}

/// Checks a property of `e` at every memory over its free variables.
fn check_values(
    e: &Expr,
    ctx: &Context,
    what: &str,
    ok: impl Fn(&Value) -> Result<(), String>,
) -> Result<(), LangError> {
    let vars: Vec<VarName> = e.fv().into_iter().collect();
    let mut failure = None;
    for_each_assignment(&vars, ctx, |mem| {
        let v = eval(e, ctx, mem)?;
        if let Err(msg) = ok(&v) {
            failure = Some(msg);
            return Ok(false);
        }
        Ok(true)
    })?;
    match failure {
        Some(msg) => Err(LangError::ty(format!("{what}: {msg}"))),
        None => Ok(()),
    }
}

const ISO_TOL: f64 = 1e-6;

pub fn check_stmt(s: &Stmt, ctx: &Context) -> Result<(), LangError> {
    match s {
        Stmt::Skip => Ok(()),
        Stmt::Assign(x, e) => {
            let tx = classical_target(x, ctx, "assignment")?;
            let te = infer(e, ctx)?;
            if !fits(&te, &tx) {
                return Err(LangError::ty(format!(
                    "assignment `{s}`: T[e] = {te} is not contained in T[{x}] = {tx}"
                )));
            }
            Ok(())
        }
        Stmt::Sample(x, e) => {
            let tx = classical_target(x, ctx, "sampling")?;
            match infer(e, ctx)? {
                Type::Distr(t) if fits(&t, &tx) => Ok(()),
                te => Err(LangError::ty(format!(
                    "sampling `{s}`: T[e] = {te} is not contained in D[T[{x}]] = distr {tx}"
                ))),
            }
        }
        Stmt::If(e, a, b) => {
            check_bool(e, ctx).map_err(|err| LangError::ty(format!("conditional guard: {err}")))?;
            check_block(a, ctx)?;
            check_block(b, ctx)
        }
        Stmt::While(e, body) => {
            check_bool(e, ctx).map_err(|err| LangError::ty(format!("loop guard: {err}")))?;
            check_block(body, ctx)
        }
        Stmt::QInit(q, e) => {
            let tq = qlist_type(q, ctx, "quantum initialization")?;
            match infer(e, ctx)? {
                Type::Vec(t) if qcompat(&t, &tq) => {}
                te => return Err(LangError::ty(format!(
                    "quantum initialization `{s}`: T[e] = {te} is not a set of vectors in ℓ2[{tq}]"
                ))),
            }
            check_values(
                e,
                ctx,
                "quantum initialization (T[e] ⊆ unit vectors)",
                |v| match v {
                    Value::Vector(x) if (crate::linalg::norm(x) - 1.0).abs() <= ISO_TOL => Ok(()),
                    v => Err(format!("{v} is not a unit vector")),
                },
            )
        }
        Stmt::QApply(e, q) => {
            let tq = qlist_type(q, ctx, "quantum application")?;
            match infer(e, ctx)? {
                Type::Op(a, b) if qcompat(&a, &tq) && qcompat(&b, &tq) => {}
                te => {
                    return Err(LangError::ty(format!(
                        "quantum application `{s}`: T[e] = {te} is not contained in iso({tq})"
                    )))
                }
            }
            check_values(e, ctx, "quantum application (T[e] ⊆ iso)", |v| match v {
                Value::Op(m) if m.is_isometry(ISO_TOL) => Ok(()),
                v => Err(format!("{v} is not an isometry")),
            })
        }
        Stmt::Measure(x, q, e) => {
            let tx = classical_target(x, ctx, "measurement")?;
            let tq = qlist_type(q, ctx, "measurement")?;
            match infer(e, ctx)? {
                Type::Meas(o, sp) if fits(&o, &tx) && qcompat(&sp, &tq) => {}
                te => {
                    return Err(LangError::ty(format!(
                        "measurement `{s}`: T[e] = {te} is not contained in Meas(T[{x}], ℓ2[{tq}])"
                    )))
                }
            }
            check_values(e, ctx, "measurement (projective)", |v| match v {
                Value::Meas(m) => check_projective(m),
                v => Err(format!("{v} is not a measurement")),
            })
        }
        Stmt::Call(a) => {
            if ctx.adversaries.contains_key(a) {
                Ok(())
            } else {
                Err(LangError::ty(format!("call of undeclared adversary `{a}`")))
            }
        }
    }
}

/// Projectors that are pairwise orthogonal (so their sum is at most id).
pub fn check_projective(m: &BTreeMap<Value, super::value::Mat>) -> Result<(), String> {
    let mut sum: Option<super::value::Mat> = None;
    for (k, p) in m {
        if !p.is_projector(ISO_TOL) {
            return Err(format!("the element for outcome {k} is not a projector"));
        }
        sum = Some(match sum {
            None => p.clone(),
            Some(s) => &s + p,
        });
    }
    match sum {
        Some(s) if !s.is_projector(ISO_TOL) => {
            Err("projectors sum to more than the identity".into())
        }
        _ => Ok(()),
    }
}

fn classical_target(x: &VarName, ctx: &Context, what: &str) -> Result<Type, LangError> {
    if !ctx.is_classical_name(x) {
        return Err(LangError::ty(format!(
            "{what}: `{x}` is not a classical variable"
        )));
    }
    Ok(ctx.type_of(x).expect("declared"))
}

pub fn check_block(b: &[Stmt], ctx: &Context) -> Result<(), LangError> {
    b.iter().try_for_each(|s| check_stmt(s, ctx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parser::parse_program;
    use crate::lang::types::BIT;
    use crate::lang::VarKind;

    fn ctx() -> Context {
        let mut c = Context::default();
        c.add_var("x", BIT, VarKind::Classical).unwrap();
        c.add_var("y", Type::Int(4), VarKind::Classical).unwrap();
        c.add_var("q", BIT, VarKind::Quantum).unwrap();
        c
    }

    #[test]
    fn assignment_of_wider_int_rejected() {
        let c = ctx();
        assert!(check_block(&parse_program("x <- y;", &c).unwrap(), &c).is_err());
        assert!(check_block(&parse_program("x <- 1; y <- y + 1;", &c).unwrap(), &c).is_ok());
    }

    #[test]
    fn non_isometry_rejected() {
        let mut c = ctx();
        let m = crate::lang::parser::parse_expr("[[1, 1], [0, 1]]", &c, false).unwrap();
        let v = crate::lang::eval::eval_closed(&m, &c).unwrap();
        c.add_const("B", Type::Op(Box::new(BIT), Box::new(BIT)), v)
            .unwrap();
        let err = check_block(&parse_program("on q apply B;", &c).unwrap(), &c).unwrap_err();
        assert!(err.to_string().contains("iso"));
        assert!(check_block(&parse_program("on q apply H;", &c).unwrap(), &c).is_ok());
    }

    #[test]
    fn overfull_measurement_rejected() {
        let mut c = ctx();
        let m = crate::lang::parser::parse_expr("[[[1, 0], [0, 1]], [[1, 0], [0, 0]]]", &c, false)
            .unwrap();
        let v = crate::lang::eval::eval_closed(&m, &c).unwrap();
        let v = match v {
            Value::Meas(m) => Value::Meas(std::sync::Arc::new(
                m.iter().map(|(k, p)| (k.coerce(&BIT), p.clone())).collect(),
            )),
            _ => unreachable!(),
        };
        c.add_const("M", Type::Meas(Box::new(BIT), Box::new(BIT)), v)
            .unwrap();
        assert!(check_block(&parse_program("x <- measure q with M;", &c).unwrap(), &c).is_err());
        assert!(check_block(
            &parse_program("x <- measure q with computational(bit);", &c).unwrap(),
            &c
        )
        .is_ok());
    }
}
