use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;

use super::expr::VarName;
use super::stmt::Block;
use super::types::{Type, BIT};
use super::value::{Mat, Value};
use super::LangError;
use crate::registers::{Reg, RegId, Space};

/// Numeric and size limits shared by all engines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    /// Absolute tolerance for rank, membership and inclusion decisions.
    pub eps: f64,
    /// Maximal total quantum dimension per program side.
    pub dim_cap: usize,
    /// Iteration bound for the while-loop series.
    pub max_iters: usize,
    /// Maximal number of assignments enumerated by a single check.
    pub enum_cap: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            eps: 1e-9,
            dim_cap: 256,
            max_iters: 10_000,
            enum_cap: 1 << 16,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Classical,
    Quantum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarDecl {
    pub name: Arc<str>,
    pub ty: Type,
    pub kind: VarKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Adversary {
    pub name: Arc<str>,
    pub vars: Vec<Arc<str>>,
    pub readonly: Vec<Arc<str>>,
    pub body: Option<Block>,
}

/// Declarations in scope: program variables, ambient variables, constants,
/// adversaries and named programs.
#[derive(Debug, Clone)]
pub struct Context {
    pub settings: Settings,
    pub vars: Vec<VarDecl>,
    pub ambient: Vec<(Arc<str>, Type)>,
    pub consts: BTreeMap<Arc<str>, (Type, Value)>,
    pub enum_ctors: BTreeMap<Arc<str>, Value>,
    pub adversaries: BTreeMap<Arc<str>, Adversary>,
    pub programs: BTreeMap<Arc<str>, Block>,
}

pub const RESERVED: &[&str] = &[
    "true", "false", "if", "then", "else", "forall", "exists", "one", "fun", "in", "xor", "distr",
    "measure", "with", "on", "apply", "call", "skip", "while", "Cla", "Qeq", "span", "im", "top",
    "bot", "ortho", "div", "Inf", "unit", "bit", "bool", "int", "enum", "vec", "op", "iso", "meas",
    "set",
];

impl Default for Context {
    fn default() -> Self {
        Self::new(Settings::default())
    }
}

impl Context {
    pub fn new(settings: Settings) -> Self {
        let mut ctx = Context {
            settings,
            vars: Vec::new(),
            ambient: Vec::new(),
            consts: BTreeMap::new(),
            enum_ctors: BTreeMap::new(),
            adversaries: BTreeMap::new(),
            programs: BTreeMap::new(),
        };
        for (name, ty, v) in builtin_constants() {
            ctx.consts.insert(Arc::from(name), (ty, v));
        }
        ctx
    }

    pub fn var(&self, name: &str) -> Option<&VarDecl> {
        self.vars.iter().find(|d| &*d.name == name)
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|d| &*d.name == name)
    }

    pub fn is_classical(&self, name: &str) -> bool {
        self.var(name).is_some_and(|d| d.kind == VarKind::Classical)
    }

    pub fn is_quantum(&self, name: &str) -> bool {
        self.var(name).is_some_and(|d| d.kind == VarKind::Quantum)
    }

    pub fn ambient_type(&self, name: &str) -> Option<&Type> {
        self.ambient
            .iter()
            .find(|(n, _)| &**n == name)
            .map(|(_, t)| t)
    }

    /// Type of a (possibly tagged) program variable or an ambient variable.
    pub fn type_of(&self, v: &VarName) -> Option<Type> {
        if v.tag == 0 {
            if let Some(t) = self.ambient_type(&v.base) {
                return Some(t.clone());
            }
        }
        self.var(&v.base).map(|d| d.ty.clone())
    }

    pub fn is_quantum_name(&self, v: &VarName) -> bool {
        self.is_quantum(&v.base) && !(v.tag == 0 && self.ambient_type(&v.base).is_some())
    }

    pub fn is_classical_name(&self, v: &VarName) -> bool {
        self.is_classical(&v.base) && !(v.tag == 0 && self.ambient_type(&v.base).is_some())
    }

    pub fn reg(&self, v: &VarName) -> Result<Reg, LangError> {
        let idx = self
            .vars
            .iter()
            .position(|d| *d.name == *v.base && d.kind == VarKind::Quantum)
            .ok_or_else(|| LangError::Type(format!("{v} is not a quantum variable")))?;
        let card = self.vars[idx].ty.card().unwrap_or(0) as usize;
        Ok(Reg::new(RegId::new(v.tag, idx as u32), card))
    }

    pub fn regs(&self, list: &[VarName]) -> Result<Vec<Reg>, LangError> {
        list.iter().map(|v| self.reg(v)).collect()
    }

    /// Register to variable name.
    pub fn reg_name(&self, id: RegId) -> VarName {
        VarName::new(&self.vars[id.index as usize].name, id.tag)
    }

    pub fn quantum_vars(&self) -> impl Iterator<Item = &VarDecl> {
        self.vars.iter().filter(|d| d.kind == VarKind::Quantum)
    }

    pub fn classical_vars(&self) -> impl Iterator<Item = &VarDecl> {
        self.vars.iter().filter(|d| d.kind == VarKind::Classical)
    }

    /// Quantum space of all program variables with the given tags.
    pub fn quantum_space(&self, tags: &[u8]) -> Space {
        let mut regs = Vec::new();
        for &t in tags {
            for d in self.quantum_vars() {
                regs.push(
                    self.reg(&VarName::new(&d.name, t))
                        .expect("declared quantum var"),
                );
            }
        }
        Space::new(regs).expect("distinct registers")
    }

    /// Classical program variables tagged with `tag`, in declaration order.
    pub fn classical_list(&self, tag: u8) -> Vec<(VarName, Type)> {
        self.classical_vars()
            .map(|d| (VarName::new(&d.name, tag), d.ty.clone()))
            .collect()
    }

    pub fn quantum_dim(&self) -> usize {
        self.quantum_vars()
            .map(|d| d.ty.card().unwrap_or(0) as usize)
            .product()
    }

    fn name_free(&self, name: &str) -> Result<(), LangError> {
        if RESERVED.contains(&name) {
            return Err(LangError::Decl(format!("`{name}` is a reserved word")));
        }
        if self.var(name).is_some()
            || self.ambient_type(name).is_some()
            || self.consts.contains_key(name)
            || self.enum_ctors.contains_key(name)
            || self.adversaries.contains_key(name)
        {
            return Err(LangError::Decl(format!("`{name}` is already declared")));
        }
        Ok(())
    }

    fn register_enums(&mut self, ty: &Type) -> Result<(), LangError> {
        match ty {
            Type::Enum(names) => {
                for (i, n) in names.iter().enumerate() {
                    let v = Value::Enum(i as u32, names.clone());
                    match self.enum_ctors.get(n.as_str()) {
                        Some(old)
                            if *old == v && matches!(old, Value::Enum(_, n2) if n2 == names) => {}
                        Some(_) => {
                            return Err(LangError::Decl(format!(
                                "enum constructor `{n}` declared twice"
                            )))
                        }
                        None => {
                            if self.var(n).is_some() || self.consts.contains_key(n.as_str()) {
                                return Err(LangError::Decl(format!("`{n}` is already declared")));
                            }
                            self.enum_ctors.insert(Arc::from(n.as_str()), v);
                        }
                    }
                }
                Ok(())
            }
            Type::Tuple(ts) => ts.iter().try_for_each(|t| self.register_enums(t)),
            Type::Func(a, b) | Type::Op(a, b) | Type::Meas(a, b) => {
                self.register_enums(a)?;
                self.register_enums(b)
            }
            Type::Distr(t) | Type::Set(t) | Type::Vec(t) => self.register_enums(t),
            _ => Ok(()),
        }
    }

    pub fn add_var(&mut self, name: &str, ty: Type, kind: VarKind) -> Result<(), LangError> {
        self.name_free(name)?;
        if !ty.is_finite() {
            return Err(LangError::Decl(format!(
                "variable `{name}` needs a finite type, got {ty}"
            )));
        }
        if name.ends_with(['1', '2']) && self.var(&name[..name.len() - 1]).is_some() {
            return Err(LangError::Decl(format!(
                "`{name}` would clash with a tagged variable"
            )));
        }
        if kind == VarKind::Quantum {
            let dim = self
                .quantum_dim()
                .saturating_mul(ty.card().unwrap_or(u64::MAX) as usize);
            if dim > self.settings.dim_cap {
                return Err(LangError::DimensionCap(dim, self.settings.dim_cap));
            }
        }
        self.register_enums(&ty)?;
        self.vars.push(VarDecl {
            name: Arc::from(name),
            ty,
            kind,
        });
        Ok(())
    }

    pub fn add_ambient(&mut self, name: &str, ty: Type) -> Result<(), LangError> {
        self.name_free(name)?;
        if !ty.is_finite() {
            return Err(LangError::Decl(format!(
                "ambient variable `{name}` needs a finite type"
            )));
        }
        self.register_enums(&ty)?;
        self.ambient.push((Arc::from(name), ty));
        Ok(())
    }

    /// A fresh ambient variable name derived from `hint`.
    pub fn fresh_ambient(&self, hint: &str) -> String {
        let mut i = 0;
        loop {
            let cand = if i == 0 {
                hint.to_string()
            } else {
                format!("{hint}{i}_")
            };
            if self.name_free(&cand).is_ok() && !cand.ends_with(['1', '2']) {
                return cand;
            }
            i += 1;
        }
    }

    pub fn add_const(&mut self, name: &str, ty: Type, value: Value) -> Result<(), LangError> {
        self.name_free(name)?;
        self.register_enums(&ty)?;
        self.consts.insert(Arc::from(name), (ty, value));
        Ok(())
    }

    pub fn add_adversary(&mut self, adv: Adversary) -> Result<(), LangError> {
        self.name_free(&adv.name)?;
        for v in adv.vars.iter().chain(&adv.readonly) {
            if self.var(v).is_none() {
                return Err(LangError::Decl(format!(
                    "adversary `{}` mentions unknown variable `{v}`",
                    adv.name
                )));
            }
        }
        for v in &adv.readonly {
            if !adv.vars.contains(v) {
                return Err(LangError::Decl(format!(
                    "readonly variable `{v}` of `{}` is not in its footprint",
                    adv.name
                )));
            }
        }
        self.adversaries.insert(adv.name.clone(), adv);
        Ok(())
    }

    pub fn add_program(&mut self, name: &str, body: Block) -> Result<(), LangError> {
        if self.programs.contains_key(name) {
            return Err(LangError::Decl(format!(
                "program `{name}` is already declared"
            )));
        }
        self.programs.insert(Arc::from(name), body);
        Ok(())
    }
}

fn mat(rows: &[&[(f64, f64)]]) -> Mat {
    Mat::from_rows(
        &rows
            .iter()
            .map(|r| r.iter().map(|&(a, b)| Complex64::new(a, b)).collect())
            .collect::<Vec<_>>(),
    )
}

fn op(m: Mat) -> Value {
    Value::Op(Arc::new(m))
}

fn vector(v: &[f64]) -> Value {
    Value::Vector(Arc::new(
        v.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
    ))
}

/// Built-in quantum constants.
pub fn builtin_constants() -> Vec<(&'static str, Type, Value)> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let qubit = || Type::Op(Box::new(BIT), Box::new(BIT));
    let two = || {
        Type::Op(
            Box::new(Type::pair(BIT, BIT)),
            Box::new(Type::pair(BIT, BIT)),
        )
    };
    let perm4 = |p: [usize; 4]| {
        let mut m = Mat::zeros(4, 4);
        for (c, &r) in p.iter().enumerate() {
            m[(r, c)] = Complex64::new(1.0, 0.0);
        }
        m
    };
    vec![
        (
            "H",
            qubit(),
            op(mat(&[&[(s, 0.0), (s, 0.0)], &[(s, 0.0), (-s, 0.0)]])),
        ),
        (
            "X",
            qubit(),
            op(mat(&[&[(0.0, 0.0), (1.0, 0.0)], &[(1.0, 0.0), (0.0, 0.0)]])),
        ),
        (
            "Y",
            qubit(),
            op(mat(&[
                &[(0.0, 0.0), (0.0, -1.0)],
                &[(0.0, 1.0), (0.0, 0.0)],
            ])),
        ),
        (
            "Z",
            qubit(),
            op(mat(&[
                &[(1.0, 0.0), (0.0, 0.0)],
                &[(0.0, 0.0), (-1.0, 0.0)],
            ])),
        ),
        (
            "S",
            qubit(),
            op(mat(&[&[(1.0, 0.0), (0.0, 0.0)], &[(0.0, 0.0), (0.0, 1.0)]])),
        ),
        (
            "T",
            qubit(),
            op(mat(&[&[(1.0, 0.0), (0.0, 0.0)], &[(0.0, 0.0), (s, s)]])),
        ),
        ("CNOT", two(), op(perm4([0, 1, 3, 2]))),
        ("SWAP", two(), op(perm4([0, 2, 1, 3]))),
        (
            "EPR",
            Type::Vec(Box::new(Type::pair(BIT, BIT))),
            vector(&[s, 0.0, 0.0, s]),
        ),
        ("ket0", Type::Vec(Box::new(BIT)), vector(&[1.0, 0.0])),
        ("ket1", Type::Vec(Box::new(BIT)), vector(&[0.0, 1.0])),
        ("ketplus", Type::Vec(Box::new(BIT)), vector(&[s, s])),
        ("ketminus", Type::Vec(Box::new(BIT)), vector(&[s, -s])),
    ]
}
