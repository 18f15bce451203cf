use std::sync::Arc;

use num_complex::Complex64;
use num_rational::Rational64;

use super::context::Context;
use super::expr::{BinOp, Builtin, Domain, Expr, Quant, TypeFn, UnOp, VarName};
use super::lexer::{lex, Tok, Token};
use super::stmt::{Block, Stmt};
use super::types::{Type, BIT};
use super::value::{Mat, Value};
use super::LangError;

/// Recursive-descent parser over a token stream. Expression parsing
/// resolves identifiers against the context; in relational mode a program
/// variable `x` is only accessible as `x1` or `x2`.
pub struct Parser<'c> {
    toks: Vec<Token>,
    pos: usize,
    src: Arc<str>,
    pub ctx: &'c Context,
    pub relational: bool,
    bound: Vec<String>,
}

/// A parser position without a context, resumable under a new context.
pub struct Suspended {
    toks: Vec<Token>,
    pos: usize,
    src: Arc<str>,
}

impl Suspended {
    pub fn resume(self, ctx: &Context) -> Parser<'_> {
        Parser {
            toks: self.toks,
            pos: self.pos,
            src: self.src,
            ctx,
            relational: false,
            bound: Vec::new(),
        }
    }
}

impl<'c> Parser<'c> {
    pub fn new(src: &str, ctx: &'c Context) -> Result<Self, LangError> {
        Ok(Parser {
            toks: lex(src)?,
            pos: 0,
            src: Arc::from(src),
            ctx,
            relational: false,
            bound: Vec::new(),
        })
    }

    pub fn relational(mut self, on: bool) -> Self {
        self.relational = on;
        self
    }

    pub fn with_context<'d>(self, ctx: &'d Context) -> Parser<'d> {
        Parser {
            toks: self.toks,
            pos: self.pos,
            src: self.src,
            ctx,
            relational: self.relational,
            bound: self.bound,
        }
    }

    /// Detaches the token stream from the context.
    pub fn suspend(self) -> Suspended {
        Suspended {
            toks: self.toks,
            pos: self.pos,
            src: self.src,
        }
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    pub fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    pub fn token(&self) -> &Token {
        &self.toks[self.pos]
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn set_position(&mut self, pos: usize) {
        self.pos = pos;
    }

    /// Source text of the tokens in `from..self.pos`.
    pub fn text_since(&self, from: usize) -> &str {
        if from >= self.pos {
            return "";
        }
        let a = self.toks[from].start;
        let b = self.toks[self.pos - 1].end;
        &self.src[a..b]
    }

    pub fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    pub fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub fn err(&self, msg: impl Into<String>) -> LangError {
        let t = &self.toks[self.pos];
        LangError::Syntax {
            line: t.line,
            col: t.col,
            msg: msg.into(),
        }
    }

    fn unexpected(&self, what: &str) -> LangError {
        self.err(format!("expected {what}, found {}", self.peek()))
    }

    pub fn at_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(t) if *t == s)
    }

    pub fn eat_sym(&mut self, s: &str) -> bool {
        if self.at_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn expect_sym(&mut self, s: &str) -> Result<(), LangError> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{s}`")))
        }
    }

    pub fn at_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(t) if t == kw)
    }

    pub fn eat_kw(&mut self, kw: &str) -> bool {
        if self.at_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn expect_kw(&mut self, kw: &str) -> Result<(), LangError> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{kw}`")))
        }
    }

    pub fn ident(&mut self) -> Result<String, LangError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected("an identifier")),
        }
    }

    pub fn int(&mut self) -> Result<u64, LangError> {
        match *self.peek() {
            Tok::Int(n) => {
                self.bump();
                Ok(n)
            }
            _ => Err(self.unexpected("an integer")),
        }
    }

    /// True if the current token starts right where the previous one ended.
    fn attached(&self) -> bool {
        self.pos > 0 && self.toks[self.pos].start == self.toks[self.pos - 1].end
    }

    pub fn ident_list(&mut self) -> Result<Vec<String>, LangError> {
        let mut out = vec![self.ident()?];
        while self.eat_sym(",") {
            out.push(self.ident()?);
        }
        Ok(out)
    }

    // ---- types ----

    pub fn parse_type(&mut self) -> Result<Type, LangError> {
        let a = self.type_prod()?;
        if self.eat_sym("->") {
            let b = self.parse_type()?;
            return Ok(Type::Func(Box::new(a), Box::new(b)));
        }
        Ok(a)
    }

    fn type_prod(&mut self) -> Result<Type, LangError> {
        let mut parts = vec![self.type_prefix()?];
        while self.eat_sym("*") {
            parts.push(self.type_prefix()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().expect("one")
        } else {
            Type::Tuple(parts)
        })
    }

    fn type_prefix(&mut self) -> Result<Type, LangError> {
        if self.eat_kw("distr") {
            return Ok(Type::Distr(Box::new(self.type_prefix()?)));
        }
        if self.eat_kw("set") {
            return Ok(Type::Set(Box::new(self.type_prefix()?)));
        }
        if self.eat_kw("vec") {
            return Ok(Type::Vec(Box::new(self.type_prefix()?)));
        }
        self.type_atom()
    }

    fn type_pair(&mut self) -> Result<(Type, Type), LangError> {
        self.expect_sym("(")?;
        let a = self.parse_type()?;
        self.expect_sym(",")?;
        let b = self.parse_type()?;
        self.expect_sym(")")?;
        Ok((a, b))
    }

    fn type_atom(&mut self) -> Result<Type, LangError> {
        if self.eat_sym("(") {
            let t = self.parse_type()?;
            self.expect_sym(")")?;
            return Ok(t);
        }
        let name = match self.peek() {
            Tok::Ident(s) => s.clone(),
            _ => return Err(self.unexpected("a type")),
        };
        self.bump();
        match name.as_str() {
            "bit" => Ok(BIT),
            "bool" => Ok(Type::Bool),
            "unit" => Ok(Type::unit()),
            "int" => {
                self.expect_sym("<")?;
                let n = self.int()?;
                self.expect_sym(">")?;
                if n == 0 {
                    return Err(self.err("int<0> is empty"));
                }
                Ok(Type::Int(n))
            }
            "enum" => {
                self.expect_sym("{")?;
                let names = self.ident_list()?;
                self.expect_sym("}")?;
                let mut seen = std::collections::BTreeSet::new();
                if names.iter().any(|n| !seen.insert(n.clone())) {
                    return Err(self.err("enum constructors must be distinct"));
                }
                Ok(Type::Enum(names.into()))
            }
            "op" | "iso" => {
                let (a, b) = self.type_pair()?;
                Ok(Type::Op(Box::new(a), Box::new(b)))
            }
            "meas" => {
                let (a, b) = self.type_pair()?;
                Ok(Type::Meas(Box::new(a), Box::new(b)))
            }
            _ => Err(self.err(format!("unknown type `{name}`"))),
        }
    }

    // ---- expressions ----

    pub fn parse_expr(&mut self) -> Result<Expr, LangError> {
        if self.at_kw("forall") || self.at_kw("exists") || self.at_kw("one") {
            return self.quantifier();
        }
        if self.eat_kw("fun") {
            let z = self.ident()?;
            self.expect_sym(":")?;
            let t = self.parse_type()?;
            self.expect_sym("=>")?;
            self.bound.push(z.clone());
            let body = self.parse_expr();
            self.bound.pop();
            return Ok(Expr::Lambda(VarName::plain(&z), t, Box::new(body?)));
        }
        if self.eat_kw("if") {
            let c = self.parse_expr()?;
            self.expect_kw("then")?;
            let a = self.parse_expr()?;
            self.expect_kw("else")?;
            let b = self.parse_expr()?;
            return Ok(Expr::If(Box::new(c), Box::new(a), Box::new(b)));
        }
        self.expr_implies()
    }

    fn quantifier(&mut self) -> Result<Expr, LangError> {
        let q = match self.ident()?.as_str() {
            "forall" => Quant::Forall,
            "exists" => Quant::Exists,
            _ => Quant::One,
        };
        let names = self.ident_list()?;
        let dom = self.domain()?;
        self.expect_sym(".")?;
        let n = names.len();
        self.bound.extend(names.iter().cloned());
        let body = self.parse_expr();
        self.bound.truncate(self.bound.len() - n);
        let mut e = body?;
        for z in names.iter().rev() {
            e = Expr::Quant(q, VarName::plain(z), dom.clone(), Box::new(e));
        }
        Ok(e)
    }

    /// `: τ` or `in S`.
    pub fn domain(&mut self) -> Result<Domain, LangError> {
        if self.eat_sym(":") {
            Ok(Domain::Type(self.parse_type()?))
        } else if self.eat_kw("in") {
            Ok(Domain::Set(Box::new(self.expr_additive()?)))
        } else {
            Err(self.unexpected("`:` or `in`"))
        }
    }

    /// Right operand that may start with a binder form.
    fn operand(
        &mut self,
        next: fn(&mut Self) -> Result<Expr, LangError>,
    ) -> Result<Expr, LangError> {
        if ["forall", "exists", "one", "fun", "if"]
            .iter()
            .any(|k| self.at_kw(k))
        {
            self.parse_expr()
        } else {
            next(self)
        }
    }

    fn expr_implies(&mut self) -> Result<Expr, LangError> {
        let a = self.expr_or()?;
        if self.eat_sym("==>") {
            let b = self.operand(Self::expr_implies)?;
            return Ok(Expr::Bin(BinOp::Implies, Box::new(a), Box::new(b)));
        }
        if self.eat_sym("<=>") {
            let b = self.operand(Self::expr_or)?;
            return Ok(Expr::Bin(BinOp::Iff, Box::new(a), Box::new(b)));
        }
        Ok(a)
    }

    fn expr_or(&mut self) -> Result<Expr, LangError> {
        let mut a = self.expr_and()?;
        while self.eat_sym("||") {
            let b = self.operand(Self::expr_and)?;
            a = Expr::Bin(BinOp::Or, Box::new(a), Box::new(b));
        }
        Ok(a)
    }

    fn expr_and(&mut self) -> Result<Expr, LangError> {
        let mut a = self.expr_cmp()?;
        while self.eat_sym("&&") {
            let b = self.operand(Self::expr_cmp)?;
            a = Expr::Bin(BinOp::And, Box::new(a), Box::new(b));
        }
        Ok(a)
    }

    fn expr_cmp(&mut self) -> Result<Expr, LangError> {
        let a = self.expr_additive()?;
        let op = match self.peek() {
            Tok::Sym("=") => BinOp::Eq,
            Tok::Sym("!=") => BinOp::Neq,
            Tok::Sym("<=") => BinOp::Le,
            Tok::Sym(">=") => BinOp::Ge,
            Tok::Sym(">") => BinOp::Gt,
            Tok::Sym("<")
                if !(matches!(self.peek_at(1), Tok::Ident(q) if q == "q")
                    && self.next_attached()) =>
            {
                BinOp::Lt
            }
            Tok::Ident(k) if k == "in" => BinOp::In,
            _ => return Ok(a),
        };
        self.bump();
        let b = self.operand(Self::expr_additive)?;
        Ok(Expr::Bin(op, Box::new(a), Box::new(b)))
    }

    fn next_attached(&self) -> bool {
        let i = self.pos + 1;
        i < self.toks.len() && self.toks[i].start == self.toks[self.pos].end
    }

    fn expr_additive(&mut self) -> Result<Expr, LangError> {
        let mut a = self.expr_mul()?;
        loop {
            let op = match self.peek() {
                Tok::Sym("+") => BinOp::Add,
                Tok::Sym("-") => BinOp::Sub,
                Tok::Sym("xor") => BinOp::Xor,
                _ => return Ok(a),
            };
            self.bump();
            let b = self.operand(Self::expr_mul)?;
            a = Expr::Bin(op, Box::new(a), Box::new(b));
        }
    }

    fn expr_mul(&mut self) -> Result<Expr, LangError> {
        let mut a = self.expr_unary()?;
        loop {
            let op = match self.peek() {
                Tok::Sym("*") => BinOp::Mul,
                Tok::Sym("⊗") | Tok::Sym("(*)") => BinOp::Tensor,
                _ => return Ok(a),
            };
            self.bump();
            let b = self.operand(Self::expr_unary)?;
            a = Expr::Bin(op, Box::new(a), Box::new(b));
        }
    }

    fn expr_unary(&mut self) -> Result<Expr, LangError> {
        if self.eat_sym("!") {
            return Ok(Expr::Un(UnOp::Not, Box::new(self.expr_unary()?)));
        }
        if self.eat_sym("-") {
            return Ok(Expr::Un(UnOp::Neg, Box::new(self.expr_unary()?)));
        }
        self.expr_postfix()
    }

    fn expr_postfix(&mut self) -> Result<Expr, LangError> {
        let mut e = self.expr_atom()?;
        loop {
            match self.peek() {
                Tok::Proj(n) => {
                    let n = *n;
                    self.bump();
                    e = Expr::Proj(Box::new(e), n);
                }
                Tok::Sym("(") if self.attached() => {
                    self.bump();
                    let args = self.expr_args()?;
                    e = Expr::App(Box::new(e), args);
                }
                _ => return Ok(e),
            }
        }
    }

    /// Comma-separated expressions up to and including `)`.
    fn expr_args(&mut self) -> Result<Vec<Expr>, LangError> {
        let mut args = Vec::new();
        if self.eat_sym(")") {
            return Ok(args);
        }
        loop {
            args.push(self.parse_expr()?);
            if self.eat_sym(")") {
                return Ok(args);
            }
            self.expect_sym(",")?;
        }
    }

    fn weight(&mut self) -> Result<Rational64, LangError> {
        let n = self.int()? as i64;
        if self.eat_sym("/") {
            let d = self.int()? as i64;
            if d == 0 {
                return Err(self.err("zero denominator"));
            }
            return Ok(Rational64::new(n, d));
        }
        Ok(Rational64::from_integer(n))
    }

    fn expr_atom(&mut self) -> Result<Expr, LangError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Expr::Lit(Value::Int(n, 0)))
            }
            Tok::Sym("(") => {
                self.bump();
                if self.eat_sym(")") {
                    return Ok(Expr::Tuple(Vec::new()));
                }
                let first = self.parse_expr()?;
                if self.eat_sym(")") {
                    return Ok(first);
                }
                let mut items = vec![first];
                while self.eat_sym(",") {
                    if self.at_sym(")") {
                        break;
                    }
                    items.push(self.parse_expr()?);
                }
                self.expect_sym(")")?;
                Ok(Expr::Tuple(items))
            }
            Tok::Sym("{") => {
                self.bump();
                let mut items = Vec::new();
                if !self.eat_sym("}") {
                    loop {
                        items.push(self.parse_expr()?);
                        if self.eat_sym("}") {
                            break;
                        }
                        self.expect_sym(",")?;
                    }
                }
                Ok(Expr::SetLit(items))
            }
            Tok::Sym("[") => Ok(Expr::Lit(self.numeric_literal()?)),
            Tok::Ident(name) => self.ident_expr(&name),
            _ => Err(self.unexpected("an expression")),
        }
    }

    fn ident_expr(&mut self, name: &str) -> Result<Expr, LangError> {
        let call_follows = matches!(self.peek_at(1), Tok::Sym("(")) && self.next_attached();
        let brace_follows = matches!(self.peek_at(1), Tok::Sym("{"));
        let bracket_follows = matches!(self.peek_at(1), Tok::Sym("["));
        match name {
            "true" => {
                self.bump();
                return Ok(Expr::Lit(Value::Bool(true)));
            }
            "false" => {
                self.bump();
                return Ok(Expr::Lit(Value::Bool(false)));
            }
            "distr" if brace_follows => {
                self.bump();
                self.bump();
                let mut items = Vec::new();
                if !self.eat_sym("}") {
                    loop {
                        let e = self.expr_or()?;
                        self.expect_sym("->")?;
                        items.push((e, self.weight()?));
                        if self.eat_sym("}") {
                            break;
                        }
                        self.expect_sym(",")?;
                    }
                }
                return Ok(Expr::DistrLit(items));
            }
            "table" if bracket_follows => {
                self.bump();
                self.bump();
                let mut map = std::collections::BTreeMap::new();
                if !self.eat_sym("]") {
                    loop {
                        let k = self.closed_value()?;
                        self.expect_sym("->")?;
                        let v = self.closed_value()?;
                        map.insert(k, v);
                        if self.eat_sym("]") {
                            break;
                        }
                        self.expect_sym(",")?;
                    }
                }
                return Ok(Expr::Lit(Value::Func(Arc::new(map))));
            }
            _ => {}
        }
        if self.bound.iter().any(|b| b == name) {
            self.bump();
            return Ok(Expr::Var(VarName::plain(name)));
        }
        if call_follows {
            if let Some(b) = Builtin::from_name(name) {
                self.bump();
                self.bump();
                let args = self.expr_args()?;
                if args.len() != b.arity() {
                    return Err(self.err(format!("{name} takes {} argument(s)", b.arity())));
                }
                return Ok(Expr::Call(b, args));
            }
            if let Some(tf) = TypeFn::from_name(name) {
                self.bump();
                self.bump();
                let t = self.parse_type()?;
                self.expect_sym(")")?;
                return Ok(Expr::TypeFn(tf, t));
            }
        }
        let v = self.resolve_var(name)?;
        self.bump();
        Ok(v)
    }

    fn closed_value(&mut self) -> Result<Value, LangError> {
        let e = self.expr_or()?;
        super::eval::eval_closed(&e, self.ctx)
    }

    /// Resolves a (possibly tagged) variable, ambient variable, constant or
    /// enum constructor.
    pub fn resolve_var(&self, name: &str) -> Result<Expr, LangError> {
        if let Some(v) = self.resolve_name(name) {
            return Ok(Expr::Var(v));
        }
        if self.ctx.consts.contains_key(name) {
            return Ok(Expr::Const(Arc::from(name)));
        }
        if let Some(v) = self.ctx.enum_ctors.get(name) {
            return Ok(Expr::Lit(v.clone()));
        }
        if self.relational && self.ctx.var(name).is_some() {
            return Err(self.err(format!(
                "program variable `{name}` needs a side tag (`{name}1` or `{name}2`)"
            )));
        }
        Err(self.err(format!("unknown identifier `{name}`")))
    }

    /// Variable names only (program variables, tagged in relational mode,
    /// ambient variables and bound variables).
    pub fn resolve_name(&self, name: &str) -> Option<VarName> {
        if self.bound.iter().any(|b| b == name) || self.ctx.ambient_type(name).is_some() {
            return Some(VarName::plain(name));
        }
        if self.relational {
            if let Some(base) = name.strip_suffix('1').or_else(|| name.strip_suffix('2')) {
                if self.ctx.var(base).is_some() {
                    let tag = if name.ends_with('1') { 1 } else { 2 };
                    return Some(VarName::new(base, tag));
                }
            }
            None
        } else if self.ctx.var(name).is_some() {
            Some(VarName::plain(name))
        } else {
            None
        }
    }

    /// A comma separated list of quantum variables (tagged in relational mode).
    pub fn qvar_list(&mut self) -> Result<Vec<VarName>, LangError> {
        let mut out = Vec::new();
        loop {
            let name = self.ident()?;
            let v = match self.resolve_name(&name) {
                Some(v) if self.ctx.is_quantum_name(&v) => v,
                _ => {
                    self.pos -= 1;
                    return Err(self.err(format!("`{name}` is not a quantum variable")));
                }
            };
            if out.contains(&v) {
                self.pos -= 1;
                return Err(self.err(format!("quantum variable `{name}` listed twice")));
            }
            out.push(v);
            if !self.eat_sym(",") {
                return Ok(out);
            }
        }
    }

    pub fn push_bound(&mut self, name: &str) {
        self.bound.push(name.to_string());
    }

    pub fn pop_bound(&mut self) {
        self.bound.pop();
    }

    // ---- numeric literals ----

    /// `[s, ...]` vector, `[[s, ...], ...]` matrix (rows), or `[[[..]], ...]`
    /// list of projectors (a measurement indexed 0, 1, ...).
    fn numeric_literal(&mut self) -> Result<Value, LangError> {
        self.expect_sym("[")?;
        if self.at_sym("[") {
            let mut items = Vec::new();
            loop {
                items.push(self.numeric_literal()?);
                if self.eat_sym("]") {
                    break;
                }
                self.expect_sym(",")?;
            }
            if items.iter().all(|v| matches!(v, Value::Vector(_))) {
                let rows: Vec<Vec<Complex64>> = items
                    .iter()
                    .map(|v| match v {
                        Value::Vector(r) => r.to_vec(),
                        _ => unreachable!(),
                    })
                    .collect();
                if rows.iter().any(|r| r.len() != rows[0].len()) {
                    return Err(self.err("matrix rows have different lengths"));
                }
                return Ok(Value::Op(Arc::new(Mat::from_rows(&rows))));
            }
            if items.iter().all(|v| matches!(v, Value::Op(_))) {
                let map = items
                    .into_iter()
                    .enumerate()
                    .map(|(i, v)| match v {
                        Value::Op(m) => (Value::Int(i as u64, 0), (*m).clone()),
                        _ => unreachable!(),
                    })
                    .collect();
                return Ok(Value::Meas(Arc::new(map)));
            }
            return Err(self.err("mixed nesting in numeric literal"));
        }
        let mut out = Vec::new();
        if !self.eat_sym("]") {
            loop {
                out.push(self.scalar()?);
                if self.eat_sym("]") {
                    break;
                }
                self.expect_sym(",")?;
            }
        }
        Ok(Value::Vector(Arc::new(out)))
    }

    /// Complex scalar: sums and products of decimals, fractions, `i` and
    /// `sqrt(..)`.
    pub fn scalar(&mut self) -> Result<Complex64, LangError> {
        let mut acc = self.scalar_term()?;
        loop {
            if self.eat_sym("+") {
                acc += self.scalar_term()?;
            } else if self.eat_sym("-") {
                acc -= self.scalar_term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn scalar_term(&mut self) -> Result<Complex64, LangError> {
        let mut acc = self.scalar_factor()?;
        loop {
            if self.eat_sym("*") {
                acc *= self.scalar_factor()?;
            } else if self.eat_sym("/") {
                let d = self.scalar_factor()?;
                if d.norm() == 0.0 {
                    return Err(self.err("division by zero"));
                }
                acc /= d;
            } else {
                return Ok(acc);
            }
        }
    }

    fn scalar_factor(&mut self) -> Result<Complex64, LangError> {
        match self.peek().clone() {
            Tok::Sym("-") => {
                self.bump();
                Ok(-self.scalar_factor()?)
            }
            Tok::Sym("(") => {
                self.bump();
                let s = self.scalar()?;
                self.expect_sym(")")?;
                Ok(s)
            }
            Tok::Int(n) => {
                self.bump();
                Ok(Complex64::new(n as f64, 0.0))
            }
            Tok::Float(s) => {
                self.bump();
                s.parse::<f64>()
                    .map(|x| Complex64::new(x, 0.0))
                    .map_err(|_| self.err("bad decimal"))
            }
            Tok::Ident(s) if s == "i" => {
                self.bump();
                Ok(Complex64::new(0.0, 1.0))
            }
            Tok::Ident(s) if s == "sqrt" => {
                self.bump();
                self.expect_sym("(")?;
                let x = self.scalar()?;
                self.expect_sym(")")?;
                Ok(x.sqrt())
            }
            _ => Err(self.unexpected("a number")),
        }
    }

    // ---- statements ----

    /// Statements up to (not including) `}` or end of input.
    pub fn parse_block(&mut self) -> Result<Block, LangError> {
        let mut out = Vec::new();
        while !self.at_sym("}") && !self.at_eof() {
            self.parse_stmt(&mut out)?;
        }
        Ok(out)
    }

    fn braced_block(&mut self) -> Result<Block, LangError> {
        self.expect_sym("{")?;
        let b = self.parse_block()?;
        self.expect_sym("}")?;
        Ok(b)
    }

    fn classical_lhs(&mut self) -> Result<VarName, LangError> {
        let name = self.ident()?;
        if !self.ctx.is_classical(&name) {
            self.pos -= 1;
            return Err(self.err(format!("`{name}` is not a classical variable")));
        }
        Ok(VarName::plain(&name))
    }

    fn parse_stmt(&mut self, out: &mut Block) -> Result<(), LangError> {
        let saved = self.relational;
        self.relational = false;
        let r = self.parse_stmt_inner(out);
        self.relational = saved;
        r
    }

    fn parse_stmt_inner(&mut self, out: &mut Block) -> Result<(), LangError> {
        if self.eat_kw("skip") {
            self.expect_sym(";")?;
            out.push(Stmt::Skip);
            return Ok(());
        }
        if self.eat_kw("if") {
            self.expect_sym("(")?;
            let e = self.parse_expr()?;
            self.expect_sym(")")?;
            let a = self.braced_block()?;
            let b = if self.eat_kw("else") {
                self.braced_block()?
            } else {
                Vec::new()
            };
            out.push(Stmt::If(e, a, b));
            return Ok(());
        }
        if self.eat_kw("while") {
            self.expect_sym("(")?;
            let e = self.parse_expr()?;
            self.expect_sym(")")?;
            let body = self.braced_block()?;
            out.push(Stmt::While(e, body));
            return Ok(());
        }
        if self.eat_kw("on") {
            let q = self.qvar_list()?;
            self.expect_kw("apply")?;
            let e = self.parse_expr()?;
            self.expect_sym(";")?;
            out.push(Stmt::QApply(e, q));
            return Ok(());
        }
        if self.eat_kw("call") {
            let a = self.ident()?;
            if !self.ctx.adversaries.contains_key(a.as_str()) {
                self.pos -= 1;
                return Err(self.err(format!("unknown adversary `{a}`")));
            }
            self.expect_sym(";")?;
            out.push(Stmt::Call(Arc::from(a.as_str())));
            return Ok(());
        }
        if let Tok::Ident(name) = self.peek().clone() {
            if matches!(self.peek_at(1), Tok::Sym(";")) {
                if let Some(body) = self.ctx.programs.get(name.as_str()) {
                    self.bump();
                    self.bump();
                    out.extend(body.iter().cloned());
                    return Ok(());
                }
            }
            if self.ctx.is_quantum(&name) {
                let q = self.qvar_list()?;
                if !(self.at_sym("<")
                    && matches!(self.peek_at(1), Tok::Ident(s) if s == "q")
                    && self.next_attached())
                {
                    return Err(self.unexpected("`<q`"));
                }
                self.bump();
                self.bump();
                let e = self.parse_expr()?;
                self.expect_sym(";")?;
                out.push(Stmt::QInit(q, e));
                return Ok(());
            }
        }
        let x = self.classical_lhs()?;
        if self.eat_sym("<$") {
            let e = self.parse_expr()?;
            self.expect_sym(";")?;
            out.push(Stmt::Sample(x, e));
            return Ok(());
        }
        self.expect_sym("<-")?;
        if self.eat_kw("measure") {
            let q = self.qvar_list()?;
            self.expect_kw("with")?;
            let e = self.parse_expr()?;
            self.expect_sym(";")?;
            out.push(Stmt::Measure(x, q, e));
            return Ok(());
        }
        let e = self.parse_expr()?;
        self.expect_sym(";")?;
        out.push(Stmt::Assign(x, e));
        Ok(())
    }
}

/// Parses a complete expression.
pub fn parse_expr(src: &str, ctx: &Context, relational: bool) -> Result<Expr, LangError> {
    let mut p = Parser::new(src, ctx)?.relational(relational);
    let e = p.parse_expr()?;
    if !p.at_eof() {
        return Err(p.unexpected("end of expression"));
    }
    Ok(e)
}

/// Parses a statement list.
pub fn parse_program(src: &str, ctx: &Context) -> Result<Block, LangError> {
    let mut p = Parser::new(src, ctx)?;
    let b = p.parse_block()?;
    if !p.at_eof() {
        return Err(p.unexpected("a statement"));
    }
    Ok(b)
}

pub fn parse_type(src: &str, ctx: &Context) -> Result<Type, LangError> {
    let mut p = Parser::new(src, ctx)?;
    let t = p.parse_type()?;
    if !p.at_eof() {
        return Err(p.unexpected("end of type"));
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::context::VarKind;

    fn ctx() -> Context {
        let mut c = Context::default();
        c.add_var("x", BIT, VarKind::Classical).unwrap();
        c.add_var("y", Type::Int(4), VarKind::Classical).unwrap();
        c.add_var("q", BIT, VarKind::Quantum).unwrap();
        c.add_var("r", BIT, VarKind::Quantum).unwrap();
        c
    }

    #[test]
    fn statements() {
        let c = ctx();
        let b = parse_program("q,r <q EPR; on q apply H;", &c).unwrap();
        assert_eq!(b.len(), 2);
        assert!(matches!(&b[0], Stmt::QInit(q, Expr::Const(n)) if q.len() == 2 && &**n == "EPR"));
        assert!(matches!(&b[1], Stmt::QApply(Expr::Const(n), q) if q.len() == 1 && &**n == "H"));
        let b = parse_program("x <$ uniform(bit); skip;", &c).unwrap();
        assert!(matches!(&b[0], Stmt::Sample(_, Expr::TypeFn(TypeFn::Uniform, t)) if *t == BIT));
    }

    #[test]
    fn tags_in_relational_mode() {
        let c = ctx();
        let e = parse_expr("x1 = x2", &c, true).unwrap();
        assert_eq!(
            e.fv().into_iter().map(|v| v.tag).collect::<Vec<_>>(),
            vec![1, 2]
        );
        assert!(parse_expr("x = 0", &c, true).is_err());
    }

    #[test]
    fn expression_round_trip() {
        let c = ctx();
        for s in [
            "forall z : bit. z = z",
            "if x = 0 then y + 1 else y - 1",
            "(x, y).1 = 3 && !(x = 1) ==> x xor 1 = 0",
            "distr{0 -> 1/2, 1 -> 1/2}",
            "map(fun z : bit => (z, z), uniform(bit))",
            "adj(H) * (id(bit) ⊗ X)",
        ] {
            let e = parse_expr(s, &c, false).unwrap();
            let again = parse_expr(&e.to_string(), &c, false).unwrap();
            assert_eq!(e, again, "{s}");
        }
    }

    #[test]
    fn numeric_literals() {
        let c = ctx();
        let e = parse_expr("[[1/sqrt(2), 1/sqrt(2)], [0.5*i, -0.5*i]]", &c, false).unwrap();
        match e {
            Expr::Lit(Value::Op(m)) => assert!((m[(1, 1)].im + 0.5).abs() < 1e-15),
            _ => panic!("not a matrix"),
        }
    }

    #[test]
    fn types() {
        let c = ctx();
        assert_eq!(
            parse_type("bit*int<3>->bool", &c).unwrap().to_string(),
            "bit*int<3>->bool"
        );
        assert_eq!(
            parse_type("distr (bit*bit)", &c).unwrap(),
            Type::Distr(Box::new(Type::pair(BIT, BIT)))
        );
    }
}
