use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::{One, Zero};

use super::context::Context;
use super::expr::{BinOp, Builtin, Domain, Expr, Quant, TypeFn, UnOp, VarName};
use super::types::Type;
use super::value::{Mat, Value};
use super::LangError;

/// Variable lookup for evaluation.
pub trait Env {
    fn lookup(&self, v: &VarName) -> Option<Value>;
}

impl Env for BTreeMap<VarName, Value> {
    fn lookup(&self, v: &VarName) -> Option<Value> {
        self.get(v).cloned()
    }
}

impl<F: Fn(&VarName) -> Option<Value>> Env for F {
    fn lookup(&self, v: &VarName) -> Option<Value> {
        self(v)
    }
}

struct Empty;

impl Env for Empty {
    fn lookup(&self, _: &VarName) -> Option<Value> {
        None
    }
}

pub fn eval(e: &Expr, ctx: &Context, env: &dyn Env) -> Result<Value, LangError> {
    Evaluator {
        ctx,
        env,
        locals: Vec::new(),
    }
    .eval(e)
}

pub fn eval_bool(e: &Expr, ctx: &Context, env: &dyn Env) -> Result<bool, LangError> {
    match eval(e, ctx, env)? {
        Value::Bool(b) => Ok(b),
        v => Err(LangError::eval(format!(
            "`{e}` evaluated to the non-boolean {v}"
        ))),
    }
}

pub fn eval_closed(e: &Expr, ctx: &Context) -> Result<Value, LangError> {
    eval(e, ctx, &Empty)
}

/// Dimension of the basis vector `|v⟩`, read off the value's annotations.
pub fn value_dim(v: &Value) -> Option<(usize, usize)> {
    match v {
        Value::Bool(b) => Some((*b as usize, 2)),
        Value::Int(x, m) if *m > 0 => Some((*x as usize, *m as usize)),
        Value::Enum(i, names) => Some((*i as usize, names.len())),
        Value::Tuple(vs) => {
            let mut idx = 0;
            let mut dim = 1;
            for x in vs {
                let (i, d) = value_dim(x)?;
                idx = idx * d + i;
                dim *= d;
            }
            Some((idx, dim))
        }
        _ => None,
    }
}

fn c1() -> Complex64 {
    Complex64::one()
}

struct Evaluator<'a> {
    ctx: &'a Context,
    env: &'a dyn Env,
    locals: Vec<(VarName, Value)>,
}

fn bad(op: &str, a: &Value, b: &Value) -> LangError {
    LangError::eval(format!("`{op}` is not defined on {a} and {b}"))
}

fn modulus(a: u64, b: u64) -> u64 {
    if a == 0 {
        b
    } else {
        a
    }
}

fn wrap(v: i128, m: u64) -> u64 {
    if m == 0 {
        v.max(0) as u64
    } else {
        v.rem_euclid(m as i128) as u64
    }
}

impl Evaluator<'_> {
    fn eps(&self) -> f64 {
        self.ctx.settings.eps
    }

    fn var(&self, v: &VarName) -> Result<Value, LangError> {
        if let Some((_, x)) = self.locals.iter().rev().find(|(n, _)| n == v) {
            return Ok(x.clone());
        }
        self.env
            .lookup(v)
            .ok_or_else(|| LangError::eval(format!("no value for variable `{v}`")))
    }

    fn domain(&mut self, d: &Domain) -> Result<Vec<Value>, LangError> {
        match d {
            Domain::Type(t) => {
                if !t.is_finite() {
                    return Err(LangError::eval(format!("cannot enumerate type {t}")));
                }
                Ok(t.elements())
            }
            Domain::Set(s) => match self.eval(s)? {
                Value::Set(s) => Ok(s.iter().cloned().collect()),
                Value::Distr(d) => Ok(d.iter().map(|(v, _)| v.clone()).collect()),
                v => Err(LangError::eval(format!("{v} is not a set"))),
            },
        }
    }

    fn with_local<R>(&mut self, z: &VarName, v: Value, f: impl FnOnce(&mut Self) -> R) -> R {
        self.locals.push((z.clone(), v));
        let r = f(self);
        self.locals.pop();
        r
    }

    fn eval_bool(&mut self, e: &Expr) -> Result<bool, LangError> {
        match self.eval(e)? {
            Value::Bool(b) => Ok(b),
            v => Err(LangError::eval(format!(
                "`{e}` evaluated to the non-boolean {v}"
            ))),
        }
    }

    fn apply_fn(&mut self, f: &Value, arg: Value) -> Result<Value, LangError> {
        match f {
            Value::Func(m) => m
                .get(&arg)
                .cloned()
                .ok_or_else(|| LangError::eval(format!("{arg} outside the function domain"))),
            Value::Meas(m) => match m.get(&arg) {
                Some(p) => Ok(Value::Op(Arc::new(p.clone()))),
                None => match m.values().next() {
                    Some(p) => Ok(Value::Op(Arc::new(Mat::zeros(p.rows(), p.cols())))),
                    None => Err(LangError::eval(format!("{arg} is not an outcome"))),
                },
            },
            v => Err(LangError::eval(format!("{v} cannot be applied"))),
        }
    }

    fn eval(&mut self, e: &Expr) -> Result<Value, LangError> {
        match e {
            Expr::Lit(v) => Ok(v.clone()),
            Expr::Var(v) => self.var(v),
            Expr::Const(c) => self
                .ctx
                .consts
                .get(c)
                .map(|(_, v)| v.clone())
                .ok_or_else(|| LangError::eval(format!("unknown constant `{c}`"))),
            Expr::Tuple(es) => Ok(Value::Tuple(
                es.iter().map(|e| self.eval(e)).collect::<Result<_, _>>()?,
            )),
            Expr::Proj(e, i) => match self.eval(e)? {
                Value::Tuple(vs) if *i < vs.len() => Ok(vs[*i].clone()),
                v => Err(LangError::eval(format!("projection .{i} of {v}"))),
            },
            Expr::Un(UnOp::Not, e) => Ok(Value::Bool(!self.eval_bool(e)?)),
            Expr::Un(UnOp::Neg, e) => match self.eval(e)? {
                Value::Int(v, m) => Ok(Value::Int(wrap(-(v as i128), m), m)),
                Value::Op(a) => Ok(Value::Op(Arc::new(a.scale(-c1())))),
                Value::Vector(a) => Ok(Value::Vector(Arc::new(a.iter().map(|z| -z).collect()))),
                v => Err(LangError::eval(format!("negation of {v}"))),
            },
            Expr::Bin(op, a, b) => self.binary(*op, a, b),
            Expr::If(c, a, b) => {
                if self.eval_bool(c)? {
                    self.eval(a)
                } else {
                    self.eval(b)
                }
            }
            Expr::App(h, args) => {
                let f = self.eval(h)?;
                let mut vals = args
                    .iter()
                    .map(|a| self.eval(a))
                    .collect::<Result<Vec<_>, _>>()?;
                let arg = if vals.len() == 1 {
                    vals.pop().expect("one")
                } else {
                    Value::Tuple(vals)
                };
                self.apply_fn(&f, arg)
            }
            Expr::Call(b, args) => self.builtin(*b, args),
            Expr::TypeFn(tf, t) => type_fn(*tf, t),
            Expr::DistrLit(items) => {
                let mut out = Vec::with_capacity(items.len());
                for (e, w) in items {
                    out.push((self.eval(e)?, *w));
                }
                Ok(Value::distr(out))
            }
            Expr::SetLit(items) => Ok(Value::set(
                items
                    .iter()
                    .map(|e| self.eval(e))
                    .collect::<Result<Vec<_>, _>>()?,
            )),
            Expr::Quant(q, z, dom, body) => {
                let elems = self.domain(dom)?;
                let mut count = 0usize;
                for v in elems {
                    let b = self.with_local(z, v, |s| s.eval_bool(body))?;
                    match q {
                        Quant::Forall if !b => return Ok(Value::Bool(false)),
                        Quant::Exists if b => return Ok(Value::Bool(true)),
                        _ => count += b as usize,
                    }
                }
                Ok(Value::Bool(match q {
                    Quant::Forall => true,
                    Quant::Exists => false,
                    Quant::One => count == 1,
                }))
            }
            Expr::Lambda(z, t, body) => {
                if !t.is_finite() {
                    return Err(LangError::eval(format!(
                        "lambda over the infinite type {t}"
                    )));
                }
                let mut map = BTreeMap::new();
                for v in t.elements() {
                    let r = self.with_local(z, v.clone(), |s| s.eval(body))?;
                    map.insert(v, r);
                }
                Ok(Value::Func(Arc::new(map)))
            }
        }
    }

    fn binary(&mut self, op: BinOp, a: &Expr, b: &Expr) -> Result<Value, LangError> {
        match op {
            BinOp::And => return Ok(Value::Bool(self.eval_bool(a)? && self.eval_bool(b)?)),
            BinOp::Or => return Ok(Value::Bool(self.eval_bool(a)? || self.eval_bool(b)?)),
            BinOp::Implies => return Ok(Value::Bool(!self.eval_bool(a)? || self.eval_bool(b)?)),
            BinOp::Iff => return Ok(Value::Bool(self.eval_bool(a)? == self.eval_bool(b)?)),
            _ => {}
        }
        let x = self.eval(a)?;
        let y = self.eval(b)?;
        let eps = self.eps();
        match op {
            BinOp::Eq => Ok(Value::Bool(values_equal(&x, &y, eps))),
            BinOp::Neq => Ok(Value::Bool(!values_equal(&x, &y, eps))),
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => match (&x, &y) {
                (Value::Int(p, _), Value::Int(q, _)) => Ok(Value::Bool(match op {
                    BinOp::Lt => p < q,
                    BinOp::Le => p <= q,
                    BinOp::Gt => p > q,
                    _ => p >= q,
                })),
                _ => Err(bad(op.symbol(), &x, &y)),
            },
            BinOp::In => match &y {
                Value::Set(s) => Ok(Value::Bool(s.contains(&x))),
                _ => Err(bad("in", &x, &y)),
            },
            BinOp::Add | BinOp::Sub => {
                let sign = if op == BinOp::Add { 1i128 } else { -1 };
                match (&x, &y) {
                    (Value::Int(p, m), Value::Int(q, n)) => {
                        let m = modulus(*m, *n);
                        Ok(Value::Int(wrap(*p as i128 + sign * *q as i128, m), m))
                    }
                    (Value::Op(p), Value::Op(q))
                        if p.rows() == q.rows() && p.cols() == q.cols() =>
                    {
                        Ok(Value::Op(Arc::new(if sign > 0 {
                            &**p + &**q
                        } else {
                            &**p - &**q
                        })))
                    }
                    (Value::Vector(p), Value::Vector(q)) if p.len() == q.len() => {
                        Ok(Value::Vector(Arc::new(
                            p.iter()
                                .zip(q.iter())
                                .map(|(u, v)| if sign > 0 { u + v } else { u - v })
                                .collect(),
                        )))
                    }
                    _ => Err(bad(op.symbol(), &x, &y)),
                }
            }
            BinOp::Xor => xor(&x, &y).ok_or_else(|| bad("xor", &x, &y)),
            BinOp::Mul => match (&x, &y) {
                (Value::Int(p, m), Value::Int(q, n)) => {
                    let m = modulus(*m, *n);
                    Ok(Value::Int(wrap(*p as i128 * *q as i128, m), m))
                }
                (Value::Op(p), Value::Op(q)) if p.cols() == q.rows() => {
                    Ok(Value::Op(Arc::new(p.matmul(q))))
                }
                (Value::Op(p), Value::Vector(v)) if p.cols() == v.len() => {
                    Ok(Value::Vector(Arc::new(p.apply(v))))
                }
                _ => Err(bad("*", &x, &y)),
            },
            BinOp::Tensor => match (&x, &y) {
                (Value::Op(p), Value::Op(q)) => Ok(Value::Op(Arc::new(p.kron(q)))),
                (Value::Vector(p), Value::Vector(q)) => {
                    Ok(Value::Vector(Arc::new(crate::linalg::kron_vec(p, q))))
                }
                (Value::Op(p), Value::Vector(v)) => Ok(Value::Op(Arc::new(
                    p.kron(&crate::linalg::Matrix::column_vector(v)),
                ))),
                (Value::Vector(v), Value::Op(p)) => Ok(Value::Op(Arc::new(
                    crate::linalg::Matrix::column_vector(v).kron(p),
                ))),
                _ => Err(bad("⊗", &x, &y)),
            },
            _ => unreachable!("handled above"),
        }
    }

    fn builtin(&mut self, b: Builtin, args: &[Expr]) -> Result<Value, LangError> {
        let v = self.eval(&args[0])?;
        match (b, &v) {
            (Builtin::Supp, Value::Distr(d)) => Ok(Value::set(d.iter().map(|(v, _)| v.clone()))),
            (Builtin::Marg1 | Builtin::Marg2, Value::Distr(d)) => {
                let i = if b == Builtin::Marg1 { 0 } else { 1 };
                let mut out = Vec::new();
                for (v, w) in d.iter() {
                    match v {
                        Value::Tuple(p) if p.len() == 2 => out.push((p[i].clone(), *w)),
                        _ => {
                            return Err(LangError::eval(format!(
                                "{} of a distribution over non-pairs",
                                b.name()
                            )))
                        }
                    }
                }
                Ok(Value::distr(out))
            }
            (Builtin::Total, Value::Distr(d)) => {
                Ok(Value::Bool(Value::distr_total(d) == Rational64::one()))
            }
            (Builtin::Total, Value::Meas(ps)) => {
                let mut sum: Option<crate::lang::value::Mat> = None;
                for p in ps.values() {
                    sum = Some(match sum {
                        None => p.clone(),
                        Some(s) => &s + p,
                    });
                }
                Ok(Value::Bool(sum.is_some_and(|s| {
                    s.approx_eq(&crate::linalg::Matrix::identity(s.rows()), 1e-6)
                })))
            }
            (Builtin::Adj, Value::Op(m)) => Ok(Value::Op(Arc::new(m.adjoint()))),
            (Builtin::Ket, v) => {
                let (i, n) = value_dim(v)
                    .ok_or_else(|| LangError::eval(format!("ket({v}) needs a typed value")))?;
                let mut out = vec![Complex64::zero(); n];
                out[i] = c1();
                Ok(Value::Vector(Arc::new(out)))
            }
            (Builtin::IsZero, Value::Op(m)) => Ok(Value::Bool(m.frobenius() <= self.eps())),
            (Builtin::IsZero, Value::Vector(x)) => {
                Ok(Value::Bool(crate::linalg::norm(x) <= self.eps()))
            }
            (Builtin::Card, Value::Set(s)) => Ok(Value::Int(s.len() as u64, 0)),
            (Builtin::Card, Value::Distr(d)) => Ok(Value::Int(d.len() as u64, 0)),
            (Builtin::Map, f) => {
                let f = f.clone();
                match self.eval(&args[1])? {
                    Value::Distr(d) => {
                        let mut out = Vec::new();
                        for (x, w) in d.iter() {
                            out.push((self.apply_fn(&f, x.clone())?, *w));
                        }
                        Ok(Value::distr(out))
                    }
                    Value::Set(s) => {
                        let mut out = BTreeSet::new();
                        for x in s.iter() {
                            out.insert(self.apply_fn(&f, x.clone())?);
                        }
                        Ok(Value::Set(Arc::new(out)))
                    }
                    v => Err(LangError::eval(format!("map over {v}"))),
                }
            }
            _ => Err(LangError::eval(format!("{}({v}) is undefined", b.name()))),
        }
    }
}

pub fn type_fn(tf: TypeFn, t: &Type) -> Result<Value, LangError> {
    if !t.is_finite() {
        return Err(LangError::eval(format!(
            "{}({t}) needs a finite type",
            tf.name()
        )));
    }
    let elems = t.elements();
    let n = elems.len();
    Ok(match tf {
        TypeFn::Uniform => {
            let w = Rational64::new(1, n as i64);
            Value::distr(elems.into_iter().map(|v| (v, w)))
        }
        TypeFn::Univ => Value::set(elems),
        TypeFn::Id => Value::Op(Arc::new(Mat::identity(n))),
        TypeFn::Computational => Value::Meas(Arc::new(
            elems
                .into_iter()
                .enumerate()
                .map(|(i, v)| {
                    let mut p = Mat::zeros(n, n);
                    p[(i, i)] = c1();
                    (v, p)
                })
                .collect(),
        )),
    })
}

fn xor(x: &Value, y: &Value) -> Option<Value> {
    match (x, y) {
        (Value::Bool(a), Value::Bool(b)) => Some(Value::Bool(a != b)),
        (Value::Int(a, m), Value::Int(b, n)) => {
            let m = modulus(*m, *n);
            Some(Value::Int(wrap((a ^ b) as i128, m), m))
        }
        (Value::Tuple(a), Value::Tuple(b)) if a.len() == b.len() => Some(Value::Tuple(
            a.iter()
                .zip(b)
                .map(|(p, q)| xor(p, q))
                .collect::<Option<_>>()?,
        )),
        _ => None,
    }
}

/// Equality; vectors and operators compare within `eps`.
pub fn values_equal(x: &Value, y: &Value, eps: f64) -> bool {
    match (x, y) {
        (Value::Vector(a), Value::Vector(b)) => {
            a.len() == b.len() && crate::linalg::norm(&crate::linalg::sub(a, b)) <= eps
        }
        (Value::Op(a), Value::Op(b)) => {
            a.rows() == b.rows() && a.cols() == b.cols() && a.dist(b) <= eps
        }
        (Value::Tuple(a), Value::Tuple(b)) => {
            a.len() == b.len() && a.iter().zip(b).all(|(p, q)| values_equal(p, q, eps))
        }
        _ => x == y,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parser::parse_expr;
    use crate::lang::types::BIT;
    use crate::lang::VarKind;

    #[test]
    fn arithmetic_wraps() {
        let mut c = Context::default();
        c.add_var("y", Type::Int(4), VarKind::Classical).unwrap();
        let e = parse_expr("y - 1", &c, false).unwrap();
        let env: BTreeMap<VarName, Value> = [(VarName::plain("y"), Value::int(0, 4))].into();
        assert_eq!(eval(&e, &c, &env).unwrap(), Value::int(3, 4));
    }

    #[test]
    fn hadamard_identity() {
        let c = Context::default();
        let e = parse_expr("(H ⊗ id(bit)) * EPR = (id(bit) ⊗ H) * EPR", &c, false).unwrap();
        assert_eq!(eval_closed(&e, &c).unwrap(), Value::Bool(true));
    }

    #[test]
    fn quantifiers_and_distributions() {
        let c = Context::default();
        let e = parse_expr(
            "forall z in supp(map(fun w : bit => (w, w), uniform(bit))). z.0 = z.1",
            &c,
            false,
        )
        .unwrap();
        assert_eq!(eval_closed(&e, &c).unwrap(), Value::Bool(true));
        let e = parse_expr("one z : bit. z = 1", &c, false).unwrap();
        assert_eq!(eval_closed(&e, &c).unwrap(), Value::Bool(true));
        let e = parse_expr("total(distr{0 -> 1/3})", &c, false).unwrap();
        assert_eq!(eval_closed(&e, &c).unwrap(), Value::Bool(false));
        assert!(matches!(type_fn(TypeFn::Uniform, &BIT).unwrap(), Value::Distr(d) if d.len() == 2));
    }
}
