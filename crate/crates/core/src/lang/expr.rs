use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_rational::Rational64;

use super::types::Type;
use super::value::Value;

/// Variable name with an optional side tag (0 = untagged).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarName {
    pub base: Arc<str>,
    pub tag: u8,
}

impl VarName {
    pub fn new(base: &str, tag: u8) -> Self {
        VarName {
            base: Arc::from(base),
            tag,
        }
    }

    pub fn plain(base: &str) -> Self {
        Self::new(base, 0)
    }

    pub fn with_tag(&self, tag: u8) -> Self {
        VarName {
            base: self.base.clone(),
            tag,
        }
    }
}

impl fmt::Display for VarName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.tag == 0 {
            write!(f, "{}", self.base)
        } else {
            write!(f, "{}{}", self.base, self.tag)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnOp {
    Not,
    Neg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    And,
    Or,
    Implies,
    Iff,
    Eq,
    Neq,
    Lt,
    Le,
    Gt,
    Ge,
    In,
    Add,
    Sub,
    Xor,
    Mul,
    Tensor,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::And => "&&",
            BinOp::Or => "||",
            BinOp::Implies => "==>",
            BinOp::Iff => "<=>",
            BinOp::Eq => "=",
            BinOp::Neq => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::In => "in",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Xor => "xor",
            BinOp::Mul => "*",
            BinOp::Tensor => "⊗",
        }
    }

    pub fn prec(self) -> u8 {
        match self {
            BinOp::Implies | BinOp::Iff => 1,
            BinOp::Or => 2,
            BinOp::And => 3,
            BinOp::Eq | BinOp::Neq | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::In => 4,
            BinOp::Add | BinOp::Sub | BinOp::Xor => 5,
            BinOp::Mul | BinOp::Tensor => 6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Builtin {
    Supp,
    Marg1,
    Marg2,
    Total,
    Adj,
    Ket,
    IsZero,
    Map,
    Card,
}

impl Builtin {
    pub fn name(self) -> &'static str {
        match self {
            Builtin::Supp => "supp",
            Builtin::Marg1 => "marg1",
            Builtin::Marg2 => "marg2",
            Builtin::Total => "total",
            Builtin::Adj => "adj",
            Builtin::Ket => "ket",
            Builtin::IsZero => "iszero",
            Builtin::Map => "map",
            Builtin::Card => "card",
        }
    }

    pub fn from_name(s: &str) -> Option<Builtin> {
        Some(match s {
            "supp" => Builtin::Supp,
            "marg1" => Builtin::Marg1,
            "marg2" => Builtin::Marg2,
            "total" => Builtin::Total,
            "adj" => Builtin::Adj,
            "ket" => Builtin::Ket,
            "iszero" => Builtin::IsZero,
            "map" => Builtin::Map,
            "card" => Builtin::Card,
            _ => return None,
        })
    }

    pub fn arity(self) -> usize {
        match self {
            Builtin::Map => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TypeFn {
    Uniform,
    Univ,
    Id,
    Computational,
}

impl TypeFn {
    pub fn name(self) -> &'static str {
        match self {
            TypeFn::Uniform => "uniform",
            TypeFn::Univ => "univ",
            TypeFn::Id => "id",
            TypeFn::Computational => "computational",
        }
    }

    pub fn from_name(s: &str) -> Option<TypeFn> {
        Some(match s {
            "uniform" => TypeFn::Uniform,
            "univ" => TypeFn::Univ,
            "id" => TypeFn::Id,
            "computational" => TypeFn::Computational,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quant {
    Forall,
    Exists,
    /// Unique existence.
    One,
}

impl Quant {
    pub fn keyword(self) -> &'static str {
        match self {
            Quant::Forall => "forall",
            Quant::Exists => "exists",
            Quant::One => "one",
        }
    }
}

/// Range of a bound variable: a whole finite type or the elements of a set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Domain {
    Type(Type),
    Set(Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Lit(Value),
    Var(VarName),
    Const(Arc<str>),
    Tuple(Vec<Expr>),
    Proj(Box<Expr>, usize),
    Un(UnOp, Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    If(Box<Expr>, Box<Expr>, Box<Expr>),
    App(Box<Expr>, Vec<Expr>),
    Call(Builtin, Vec<Expr>),
    TypeFn(TypeFn, Type),
    DistrLit(Vec<(Expr, Rational64)>),
    SetLit(Vec<Expr>),
    Quant(Quant, VarName, Domain, Box<Expr>),
    Lambda(VarName, Type, Box<Expr>),
}

pub fn tt() -> Expr {
    Expr::Lit(Value::Bool(true))
}

pub fn ff() -> Expr {
    Expr::Lit(Value::Bool(false))
}

pub fn var(v: &VarName) -> Expr {
    Expr::Var(v.clone())
}

pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
    Expr::Bin(op, Box::new(a), Box::new(b))
}

pub fn not(a: Expr) -> Expr {
    Expr::Un(UnOp::Not, Box::new(a))
}

pub fn eq(a: Expr, b: Expr) -> Expr {
    bin(BinOp::Eq, a, b)
}

pub fn and(a: Expr, b: Expr) -> Expr {
    bin(BinOp::And, a, b)
}

pub fn or(a: Expr, b: Expr) -> Expr {
    bin(BinOp::Or, a, b)
}

pub fn implies(a: Expr, b: Expr) -> Expr {
    bin(BinOp::Implies, a, b)
}

/// Conjunction of a list; `true` when empty.
pub fn and_all(es: impl IntoIterator<Item = Expr>) -> Expr {
    let mut it = es.into_iter();
    match it.next() {
        None => tt(),
        Some(first) => it.fold(first, and),
    }
}

pub fn call(b: Builtin, args: Vec<Expr>) -> Expr {
    Expr::Call(b, args)
}

pub fn adj(e: Expr) -> Expr {
    Expr::Call(Builtin::Adj, vec![e])
}

pub fn proj(e: Expr, i: usize) -> Expr {
    Expr::Proj(Box::new(e), i)
}

pub fn id_op(t: Type) -> Expr {
    Expr::TypeFn(TypeFn::Id, t)
}

impl Expr {
    pub fn from_value(v: &Value) -> Expr {
        match v {
            Value::Tuple(vs) => Expr::Tuple(vs.iter().map(Expr::from_value).collect()),
            Value::Set(s) => Expr::SetLit(s.iter().map(Expr::from_value).collect()),
            Value::Distr(d) => {
                Expr::DistrLit(d.iter().map(|(v, w)| (Expr::from_value(v), *w)).collect())
            }
            v => Expr::Lit(v.clone()),
        }
    }

    pub fn as_bool_lit(&self) -> Option<bool> {
        match self {
            Expr::Lit(Value::Bool(b)) => Some(*b),
            _ => None,
        }
    }

    /// Free variables.
    pub fn fv(&self) -> BTreeSet<VarName> {
        let mut out = BTreeSet::new();
        self.collect_fv(&mut Vec::new(), &mut out);
        out
    }

    fn collect_fv(&self, bound: &mut Vec<VarName>, out: &mut BTreeSet<VarName>) {
        match self {
            Expr::Lit(_) | Expr::Const(_) | Expr::TypeFn(..) => {}
            Expr::Var(v) => {
                if !bound.contains(v) {
                    out.insert(v.clone());
                }
            }
            Expr::Tuple(es) | Expr::SetLit(es) | Expr::Call(_, es) => {
                for e in es {
                    e.collect_fv(bound, out);
                }
            }
            Expr::DistrLit(es) => {
                for (e, _) in es {
                    e.collect_fv(bound, out);
                }
            }
            Expr::Proj(e, _) | Expr::Un(_, e) => e.collect_fv(bound, out),
            Expr::Bin(_, a, b) => {
                a.collect_fv(bound, out);
                b.collect_fv(bound, out);
            }
            Expr::If(a, b, c) => {
                a.collect_fv(bound, out);
                b.collect_fv(bound, out);
                c.collect_fv(bound, out);
            }
            Expr::App(h, args) => {
                h.collect_fv(bound, out);
                for a in args {
                    a.collect_fv(bound, out);
                }
            }
            Expr::Quant(_, z, dom, body) => {
                if let Domain::Set(s) = dom {
                    s.collect_fv(bound, out);
                }
                bound.push(z.clone());
                body.collect_fv(bound, out);
                bound.pop();
            }
            Expr::Lambda(z, _, body) => {
                bound.push(z.clone());
                body.collect_fv(bound, out);
                bound.pop();
            }
        }
    }

    /// Every variable name occurring anywhere, bound or free.
    pub fn all_names(&self, out: &mut BTreeSet<VarName>) {
        self.visit(&mut |e| match e {
            Expr::Var(v) => {
                out.insert(v.clone());
            }
            Expr::Quant(_, z, _, _) | Expr::Lambda(z, _, _) => {
                out.insert(z.clone());
            }
            _ => {}
        });
    }

    pub fn visit(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Lit(_) | Expr::Const(_) | Expr::TypeFn(..) | Expr::Var(_) => {}
            Expr::Tuple(es) | Expr::SetLit(es) | Expr::Call(_, es) => {
                es.iter().for_each(|e| e.visit(f))
            }
            Expr::DistrLit(es) => es.iter().for_each(|(e, _)| e.visit(f)),
            Expr::Proj(e, _) | Expr::Un(_, e) | Expr::Lambda(_, _, e) => e.visit(f),
            Expr::Bin(_, a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Expr::If(a, b, c) => {
                a.visit(f);
                b.visit(f);
                c.visit(f);
            }
            Expr::App(h, args) => {
                h.visit(f);
                args.iter().for_each(|e| e.visit(f));
            }
            Expr::Quant(_, _, dom, body) => {
                if let Domain::Set(s) = dom {
                    s.visit(f);
                }
                body.visit(f);
            }
        }
    }

    /// Simultaneous capture-avoiding substitution `e{e1/x1, …}`.
    pub fn subst(&self, map: &BTreeMap<VarName, Expr>) -> Expr {
        if map.is_empty() {
            return self.clone();
        }
        match self {
            Expr::Var(v) => map.get(v).cloned().unwrap_or_else(|| self.clone()),
            Expr::Lit(_) | Expr::Const(_) | Expr::TypeFn(..) => self.clone(),
            Expr::Tuple(es) => Expr::Tuple(es.iter().map(|e| e.subst(map)).collect()),
            Expr::SetLit(es) => Expr::SetLit(es.iter().map(|e| e.subst(map)).collect()),
            Expr::Call(b, es) => Expr::Call(*b, es.iter().map(|e| e.subst(map)).collect()),
            Expr::DistrLit(es) => {
                Expr::DistrLit(es.iter().map(|(e, w)| (e.subst(map), *w)).collect())
            }
            Expr::Proj(e, i) => Expr::Proj(Box::new(e.subst(map)), *i),
            Expr::Un(op, e) => Expr::Un(*op, Box::new(e.subst(map))),
            Expr::Bin(op, a, b) => Expr::Bin(*op, Box::new(a.subst(map)), Box::new(b.subst(map))),
            Expr::If(a, b, c) => Expr::If(
                Box::new(a.subst(map)),
                Box::new(b.subst(map)),
                Box::new(c.subst(map)),
            ),
            Expr::App(h, args) => Expr::App(
                Box::new(h.subst(map)),
                args.iter().map(|e| e.subst(map)).collect(),
            ),
            Expr::Quant(q, z, dom, body) => {
                let dom = match dom {
                    Domain::Type(t) => Domain::Type(t.clone()),
                    Domain::Set(s) => Domain::Set(Box::new(s.subst(map))),
                };
                let (z2, body2) = subst_binder(z, body, map);
                Expr::Quant(*q, z2, dom, Box::new(body2))
            }
            Expr::Lambda(z, t, body) => {
                let (z2, body2) = subst_binder(z, body, map);
                Expr::Lambda(z2, t.clone(), Box::new(body2))
            }
        }
    }

    pub fn subst1(&self, x: &VarName, e: &Expr) -> Expr {
        self.subst(&BTreeMap::from([(x.clone(), e.clone())]))
    }

    /// Renames free variables through `f` (bound variables are untouched).
    pub fn rename_free(&self, f: &dyn Fn(&VarName) -> Option<VarName>) -> Expr {
        let map: BTreeMap<VarName, Expr> = self
            .fv()
            .into_iter()
            .filter_map(|v| f(&v).map(|w| (v, Expr::Var(w))))
            .collect();
        self.subst(&map)
    }

    /// Copy with every free untagged variable that satisfies `is_prog`
    /// tagged with `tag`.
    pub fn idx(&self, tag: u8, is_prog: &dyn Fn(&VarName) -> bool) -> Expr {
        self.rename_free(&|v| {
            if v.tag == 0 && is_prog(v) {
                Some(v.with_tag(tag))
            } else {
                None
            }
        })
    }

    /// Representative of the α-equivalence class (bound variables renamed
    /// canonically by depth).
    pub fn canonical(&self) -> Expr {
        self.canon(0)
    }

    fn canon(&self, depth: usize) -> Expr {
        match self {
            Expr::Quant(q, z, dom, body) => {
                let fresh = VarName::plain(&format!("%{depth}"));
                let dom = match dom {
                    Domain::Type(t) => Domain::Type(t.clone()),
                    Domain::Set(s) => Domain::Set(Box::new(s.canon(depth))),
                };
                let body = body.subst1(z, &Expr::Var(fresh.clone())).canon(depth + 1);
                Expr::Quant(*q, fresh, dom, Box::new(body))
            }
            Expr::Lambda(z, t, body) => {
                let fresh = VarName::plain(&format!("%{depth}"));
                let body = body.subst1(z, &Expr::Var(fresh.clone())).canon(depth + 1);
                Expr::Lambda(fresh, t.clone(), Box::new(body))
            }
            Expr::Lit(_) | Expr::Const(_) | Expr::TypeFn(..) | Expr::Var(_) => self.clone(),
            Expr::Tuple(es) => Expr::Tuple(es.iter().map(|e| e.canon(depth)).collect()),
            Expr::SetLit(es) => Expr::SetLit(es.iter().map(|e| e.canon(depth)).collect()),
            Expr::Call(b, es) => Expr::Call(*b, es.iter().map(|e| e.canon(depth)).collect()),
            Expr::DistrLit(es) => {
                Expr::DistrLit(es.iter().map(|(e, w)| (e.canon(depth), *w)).collect())
            }
            Expr::Proj(e, i) => Expr::Proj(Box::new(e.canon(depth)), *i),
            Expr::Un(op, e) => Expr::Un(*op, Box::new(e.canon(depth))),
            Expr::Bin(op, a, b) => {
                Expr::Bin(*op, Box::new(a.canon(depth)), Box::new(b.canon(depth)))
            }
            Expr::If(a, b, c) => Expr::If(
                Box::new(a.canon(depth)),
                Box::new(b.canon(depth)),
                Box::new(c.canon(depth)),
            ),
            Expr::App(h, args) => Expr::App(
                Box::new(h.canon(depth)),
                args.iter().map(|e| e.canon(depth)).collect(),
            ),
        }
    }

    pub fn alpha_eq(&self, other: &Expr) -> bool {
        self.canonical() == other.canonical()
    }

    fn prec(&self) -> u8 {
        match self {
            Expr::Quant(..) | Expr::Lambda(..) | Expr::If(..) => 0,
            Expr::Bin(op, _, _) => op.prec(),
            Expr::Un(..) => 7,
            Expr::App(..) | Expr::Proj(..) => 8,
            Expr::Lit(Value::Int(..)) => 9,
            _ => 9,
        }
    }
}

fn subst_binder(z: &VarName, body: &Expr, map: &BTreeMap<VarName, Expr>) -> (VarName, Expr) {
    let mut inner = map.clone();
    inner.remove(z);
    let body_fv = body.fv();
    inner.retain(|k, _| body_fv.contains(k));
    if inner.is_empty() {
        return (z.clone(), body.clone());
    }
    let captured = inner.values().any(|e| e.fv().contains(z));
    if !captured {
        return (z.clone(), body.subst(&inner));
    }
    let mut avoid: BTreeSet<VarName> = body_fv;
    for e in inner.values() {
        avoid.extend(e.fv());
    }
    let fresh = fresh_name(z, &avoid);
    inner.insert(z.clone(), Expr::Var(fresh.clone()));
    (fresh, body.subst(&inner))
}

/// A variant of `z` (primes appended) that is not in `avoid`.
pub fn fresh_name(z: &VarName, avoid: &BTreeSet<VarName>) -> VarName {
    let mut cand = z.clone();
    while avoid.contains(&cand) {
        cand = VarName::new(&format!("{}'", cand.base), cand.tag);
    }
    cand
}

fn fmt_weight(w: &Rational64) -> String {
    if *w.denom() == 1 {
        w.numer().to_string()
    } else {
        format!("{}/{}", w.numer(), w.denom())
    }
}

impl Expr {
    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let p = self.prec();
        if p < min {
            write!(f, "(")?;
            self.fmt_at(f, 0)?;
            return write!(f, ")");
        }
        match self {
            Expr::Lit(v) => write!(f, "{v}"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Tuple(es) => {
                write!(f, "(")?;
                for (i, e) in es.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    e.fmt_at(f, 1)?;
                }
                if es.len() == 1 {
                    write!(f, ",")?;
                }
                write!(f, ")")
            }
            Expr::Proj(e, i) => {
                if matches!(**e, Expr::Lit(_)) {
                    write!(f, "(")?;
                    e.fmt_at(f, 0)?;
                    write!(f, ")")?;
                } else {
                    e.fmt_at(f, 8)?;
                }
                write!(f, ".{i}")
            }
            Expr::Un(UnOp::Not, e) => {
                write!(f, "!")?;
                e.fmt_at(f, 7)
            }
            Expr::Un(UnOp::Neg, e) => {
                write!(f, "-")?;
                e.fmt_at(f, 7)
            }
            Expr::Bin(op, a, b) => {
                let p = op.prec();
                let (lp, rp) = match op {
                    BinOp::Implies => (p + 1, p),
                    BinOp::Iff
                    | BinOp::Eq
                    | BinOp::Neq
                    | BinOp::Lt
                    | BinOp::Le
                    | BinOp::Gt
                    | BinOp::Ge
                    | BinOp::In => (p + 1, p + 1),
                    _ => (p, p + 1),
                };
                a.fmt_at(f, lp)?;
                write!(f, " {} ", op.symbol())?;
                b.fmt_at(f, rp)
            }
            Expr::If(c, a, b) => {
                write!(f, "if ")?;
                c.fmt_at(f, 1)?;
                write!(f, " then ")?;
                a.fmt_at(f, 1)?;
                write!(f, " else ")?;
                b.fmt_at(f, 0)
            }
            Expr::App(h, args) => {
                h.fmt_at(f, 8)?;
                write!(f, "(")?;
                for (i, e) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    e.fmt_at(f, 1)?;
                }
                write!(f, ")")
            }
            Expr::Call(b, args) => {
                write!(f, "{}(", b.name())?;
                for (i, e) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    e.fmt_at(f, 1)?;
                }
                write!(f, ")")
            }
            Expr::TypeFn(tf, t) => write!(f, "{}({t})", tf.name()),
            Expr::DistrLit(es) => {
                write!(f, "distr{{")?;
                for (i, (e, w)) in es.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    e.fmt_at(f, 1)?;
                    write!(f, " -> {}", fmt_weight(w))?;
                }
                write!(f, "}}")
            }
            Expr::SetLit(es) => {
                write!(f, "{{")?;
                for (i, e) in es.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    e.fmt_at(f, 1)?;
                }
                write!(f, "}}")
            }
            Expr::Quant(q, z, dom, body) => {
                write!(f, "{} {z}", q.keyword())?;
                match dom {
                    Domain::Type(t) => write!(f, " : {t}. ")?,
                    Domain::Set(s) => {
                        write!(f, " in ")?;
                        s.fmt_at(f, 1)?;
                        write!(f, ". ")?;
                    }
                }
                body.fmt_at(f, 0)
            }
            Expr::Lambda(z, t, body) => {
                write!(f, "fun {z} : {t} => ")?;
                body.fmt_at(f, 0)
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn substitution_avoids_capture() {
        let z = VarName::plain("z");
        let x = VarName::new("x", 1);
        let body = eq(var(&x), var(&z));
        let e = Expr::Quant(
            Quant::Forall,
            z.clone(),
            Domain::Type(Type::Bool),
            Box::new(body),
        );
        let s = e.subst1(&x, &var(&z));
        match &s {
            Expr::Quant(_, z2, _, _) => assert_ne!(z2, &z),
            _ => unreachable!(),
        }
        assert!(s.fv().contains(&z));
    }

    #[test]
    fn alpha_equivalence() {
        let a = Expr::Quant(
            Quant::Exists,
            VarName::plain("a"),
            Domain::Type(Type::Bool),
            Box::new(var(&VarName::plain("a"))),
        );
        let b = Expr::Quant(
            Quant::Exists,
            VarName::plain("b"),
            Domain::Type(Type::Bool),
            Box::new(var(&VarName::plain("b"))),
        );
        assert!(a.alpha_eq(&b));
        assert_ne!(a, b);
    }
}
