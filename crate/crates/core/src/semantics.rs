//! Denotational semantics of programs: cq-superoperators on [`State`]s and
//! the classical semantics on distributions over memories.

use std::collections::BTreeMap;

use num_complex::Complex64;
use thiserror::Error;

use crate::lang::eval::{eval, eval_bool, Env};
use crate::lang::value::{rational_to_f64, Mat};
use crate::lang::{Context, Expr, LangError, Stmt, Type, Value, VarName};
use crate::registers::{lift_op, pure, CqState, LabeledOperator, LabeledVector, RegError, Space};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SemError {
    #[error(transparent)]
    Lang(#[from] LangError),
    #[error(transparent)]
    Reg(#[from] RegError),
    #[error("while loop did not converge within {0} iterations")]
    Divergence(usize),
    #[error("adversary `{0}` has no instantiation")]
    UninstantiatedAdversary(String),
    #[error("program contains the quantum statement `{0}`")]
    NotClassical(String),
}

pub type SemResult<T> = Result<T, SemError>;

/// Assignment to the classical program variables in declaration order.
pub type Memory = Vec<Value>;

/// cq-state over the untagged quantum variables.
pub type State = CqState<Memory, f64>;

/// Subprobability distribution over memories.
pub type ClassicalDistr = BTreeMap<Memory, f64>;

/// Remaining loop mass below which the while series is considered converged.
pub const WHILE_TOL: f64 = 1e-12;

const DROP_TOL: f64 = 1e-300;

/// Evaluation environment of a single memory.
pub struct MemEnv<'a> {
    names: Vec<&'a str>,
    mem: &'a [Value],
}

impl<'a> MemEnv<'a> {
    pub fn new(ctx: &'a Context, mem: &'a [Value]) -> Self {
        MemEnv { names: ctx.classical_vars().map(|d| &*d.name).collect(), mem }
    }
}

impl Env for MemEnv<'_> {
    fn lookup(&self, v: &VarName) -> Option<Value> {
        if v.tag != 0 {
            return None;
        }
        self.names.iter().position(|n| **n == *v.base).map(|i| self.mem[i].clone())
    }
}

fn classical_index(ctx: &Context, x: &VarName) -> SemResult<(usize, Type)> {
    ctx.classical_vars()
        .enumerate()
        .find(|(_, d)| *d.name == *x.base)
        .map(|(i, d)| (i, d.ty.clone()))
        .ok_or_else(|| LangError::eval(format!("`{x}` is not a classical variable")).into())
}

/// The memory with every classical variable at the first element of its type.
pub fn default_memory(ctx: &Context) -> Memory {
    ctx.classical_vars().map(|d| d.ty.elements()[0].clone()).collect()
}

/// All memories over the classical variables, in lexicographic order.
pub fn all_memories(ctx: &Context) -> SemResult<Vec<Memory>> {
    let doms: Vec<Vec<Value>> = ctx.classical_vars().map(|d| d.ty.elements()).collect();
    let total = doms.iter().fold(1u128, |acc, d| acc.saturating_mul(d.len() as u128));
    if total > ctx.settings.enum_cap as u128 {
        return Err(LangError::TooLarge(total, ctx.settings.enum_cap).into());
    }
    let mut out = vec![Vec::new()];
    for d in doms {
        out = out
            .into_iter()
            .flat_map(|m| {
                d.iter().map(move |v| {
                    let mut m2 = m.clone();
                    m2.push(v.clone());
                    m2
                })
            })
            .collect();
    }
    Ok(out)
}

pub fn space(ctx: &Context) -> Space {
    ctx.quantum_space(&[0])
}

/// Point state `|m⟩⟨m| ⊗ ρ`.
pub fn point_state(ctx: &Context, mem: Memory, rho: Mat) -> SemResult<State> {
    Ok(CqState::point(space(ctx), mem, rho)?)
}

/// `⟨μ⟩ ⊗ σ`: the diagonal embedding of a classical distribution.
pub fn qlift(ctx: &Context, mu: &ClassicalDistr, sigma: &Mat) -> SemResult<State> {
    let mut out = CqState::new(space(ctx));
    for (m, w) in mu {
        out.add_block(m.clone(), sigma.scale_real(*w))?;
    }
    Ok(out)
}

/// Weights of the classical part: `m ↦ tr ρ_m`.
pub fn classical_part(rho: &State) -> ClassicalDistr {
    rho.blocks.iter().map(|(m, b)| (m.clone(), b.trace().re)).collect()
}

pub fn denot(block: &[Stmt], rho: &State, ctx: &Context) -> SemResult<State> {
    let mut cur = rho.clone();
    for s in block {
        cur = denot_stmt(s, &cur, ctx)?;
    }
    Ok(cur)
}

/// Blocks where `e` holds.
pub fn restrict(e: &Expr, rho: &State, ctx: &Context) -> SemResult<State> {
    let mut out = CqState::new(rho.space.clone());
    for (m, b) in &rho.blocks {
        if eval_bool(e, ctx, &MemEnv::new(ctx, m))? {
            out.blocks.insert(m.clone(), b.clone());
        }
    }
    Ok(out)
}

/// `Pr[e : c(ρ)]`
pub fn prafter(e: &Expr, c: &[Stmt], rho: &State, ctx: &Context) -> SemResult<f64> {
    let out = denot(c, rho, ctx)?;
    let mut p = 0.0;
    for (m, b) in &out.blocks {
        if eval_bool(e, ctx, &MemEnv::new(ctx, m))? {
            p += b.trace().re;
        }
    }
    Ok(p)
}

fn store(ctx: &Context, m: &Memory, x: &VarName, v: &Value) -> SemResult<Memory> {
    let (i, ty) = classical_index(ctx, x)?;
    let v = v.coerce(&ty);
    if !v.inhabits(&ty) {
        return Err(LangError::eval(format!("value {v} does not fit the type {ty} of `{x}`")).into());
    }
    let mut m2 = m.clone();
    m2[i] = v;
    Ok(m2)
}

fn distr_of(v: Value, e: &Expr) -> SemResult<Vec<(Value, f64)>> {
    match v {
        Value::Distr(d) => Ok(d.iter().map(|(v, w)| (v.clone(), rational_to_f64(w))).collect()),
        v => Err(LangError::eval(format!("`{e}` evaluated to {v}, not a distribution")).into()),
    }
}

fn while_series<S>(
    ctx: &Context,
    init: S,
    split: impl Fn(&S) -> SemResult<(S, S)>,
    mass: impl Fn(&S) -> f64,
    mut add: impl FnMut(&mut S, &S) -> SemResult<()>,
    body: impl Fn(&S) -> SemResult<S>,
    empty: S,
) -> SemResult<S> {
    let mut acc = empty;
    let mut cur = init;
    for _ in 0..=ctx.settings.max_iters {
        let (t, f) = split(&cur)?;
        add(&mut acc, &f)?;
        if mass(&t) <= WHILE_TOL {
            return Ok(acc);
        }
        cur = body(&t)?;
    }
    Err(SemError::Divergence(ctx.settings.max_iters))
}

fn denot_stmt(s: &Stmt, rho: &State, ctx: &Context) -> SemResult<State> {
    let sp = rho.space.clone();
    let mut out = CqState::new(sp.clone());
    match s {
        Stmt::Skip => return Ok(rho.clone()),
        Stmt::Assign(x, e) => {
            for (m, b) in &rho.blocks {
                let v = eval(e, ctx, &MemEnv::new(ctx, m))?;
                out.add_block(store(ctx, m, x, &v)?, b.clone())?;
            }
        }
        Stmt::Sample(x, e) => {
            for (m, b) in &rho.blocks {
                for (v, w) in distr_of(eval(e, ctx, &MemEnv::new(ctx, m))?, e)? {
                    out.add_block(store(ctx, m, x, &v)?, b.scale_real(w))?;
                }
            }
        }
        Stmt::If(e, a, b) => {
            let (t, f) = split_state(e, rho, ctx)?;
            out = denot(a, &t, ctx)?;
            out.add(&denot(b, &f, ctx)?)?;
        }
        Stmt::While(e, body) => {
            return while_series(
                ctx,
                rho.clone(),
                |st| split_state(e, st, ctx),
                |st| st.trace(),
                |acc, f| Ok(acc.add(f)?),
                |t| denot(body, t, ctx),
                out,
            );
        }
        Stmt::QInit(q, e) => {
            let regs = ctx.regs(q)?;
            let qspace = Space::new(regs.clone())?;
            let rest = sp.minus(&qspace);
            for (m, b) in &rho.blocks {
                let psi = vector_of(eval(e, ctx, &MemEnv::new(ctx, m))?, e)?;
                let lv = LabeledVector::on_list(&regs, &psi)?;
                let traced = crate::registers::partial_trace_matrix(b, &sp, &rest)?;
                let left = LabeledOperator::new(rest.clone(), rest.clone(), traced)?;
                let right = LabeledOperator::new(lv.space.clone(), lv.space.clone(), pure(&lv.amps))?;
                out.add_block(m.clone(), left.tensor(&right)?.mat)?;
            }
        }
        Stmt::QApply(e, q) => {
            let regs = ctx.regs(q)?;
            for (m, b) in &rho.blocks {
                let u = op_of(eval(e, ctx, &MemEnv::new(ctx, m))?, e)?;
                let l = lift_op(&u, &regs, &sp)?;
                out.add_block(m.clone(), l.mat.conjugate(b))?;
            }
        }
        Stmt::Measure(x, q, e) => {
            let regs = ctx.regs(q)?;
            for (m, b) in &rho.blocks {
                let meas = match eval(e, ctx, &MemEnv::new(ctx, m))? {
                    Value::Meas(p) => p,
                    v => return Err(LangError::eval(format!("`{e}` evaluated to {v}, not a measurement")).into()),
                };
                for (z, p) in meas.iter() {
                    let l = lift_op(p, &regs, &sp)?;
                    let r = l.mat.conjugate(b);
                    if r.trace().re.abs() > DROP_TOL {
                        out.add_block(store(ctx, m, x, z)?, r)?;
                    }
                }
            }
        }
        Stmt::Call(a) => {
            let body = ctx
                .adversaries
                .get(a)
                .and_then(|adv| adv.body.clone())
                .ok_or_else(|| SemError::UninstantiatedAdversary(a.to_string()))?;
            return denot(&body, rho, ctx);
        }
    }
    out.prune(DROP_TOL);
    Ok(out)
}

fn split_state(e: &Expr, rho: &State, ctx: &Context) -> SemResult<(State, State)> {
    let mut t = CqState::new(rho.space.clone());
    let mut f = CqState::new(rho.space.clone());
    for (m, b) in &rho.blocks {
        let target = if eval_bool(e, ctx, &MemEnv::new(ctx, m))? { &mut t } else { &mut f };
        target.blocks.insert(m.clone(), b.clone());
    }
    Ok((t, f))
}

pub fn vector_of(v: Value, e: &Expr) -> SemResult<Vec<Complex64>> {
    match v {
        Value::Vector(x) => Ok(x.to_vec()),
        v => Err(LangError::eval(format!("`{e}` evaluated to {v}, not a vector")).into()),
    }
}

pub fn op_of(v: Value, e: &Expr) -> SemResult<Mat> {
    match v {
        Value::Op(m) => Ok((*m).clone()),
        v => Err(LangError::eval(format!("`{e}` evaluated to {v}, not an operator")).into()),
    }
}

/// Classical semantics on subprobability distributions over memories.
pub fn denot_classical(block: &[Stmt], mu: &ClassicalDistr, ctx: &Context) -> SemResult<ClassicalDistr> {
    let mut cur = mu.clone();
    for s in block {
        cur = denot_classical_stmt(s, &cur, ctx)?;
    }
    Ok(cur)
}

fn add_weight(d: &mut ClassicalDistr, m: Memory, w: f64) {
    if w > 0.0 {
        *d.entry(m).or_insert(0.0) += w;
    }
}

fn split_distr(e: &Expr, mu: &ClassicalDistr, ctx: &Context) -> SemResult<(ClassicalDistr, ClassicalDistr)> {
    let mut t = ClassicalDistr::new();
    let mut f = ClassicalDistr::new();
    for (m, w) in mu {
        let target = if eval_bool(e, ctx, &MemEnv::new(ctx, m))? { &mut t } else { &mut f };
        target.insert(m.clone(), *w);
    }
    Ok((t, f))
}

fn denot_classical_stmt(s: &Stmt, mu: &ClassicalDistr, ctx: &Context) -> SemResult<ClassicalDistr> {
    let mut out = ClassicalDistr::new();
    match s {
        Stmt::Skip => return Ok(mu.clone()),
        Stmt::Assign(x, e) => {
            for (m, w) in mu {
                let v = eval(e, ctx, &MemEnv::new(ctx, m))?;
                add_weight(&mut out, store(ctx, m, x, &v)?, *w);
            }
        }
        Stmt::Sample(x, e) => {
            for (m, w) in mu {
                for (v, p) in distr_of(eval(e, ctx, &MemEnv::new(ctx, m))?, e)? {
                    add_weight(&mut out, store(ctx, m, x, &v)?, w * p);
                }
            }
        }
        Stmt::If(e, a, b) => {
            let (t, f) = split_distr(e, mu, ctx)?;
            out = denot_classical(a, &t, ctx)?;
            for (m, w) in denot_classical(b, &f, ctx)? {
                add_weight(&mut out, m, w);
            }
        }
        Stmt::While(e, body) => {
            return while_series(
                ctx,
                mu.clone(),
                |d| split_distr(e, d, ctx),
                |d| d.values().sum(),
                |acc, f| {
                    for (m, w) in f {
                        add_weight(acc, m.clone(), *w);
                    }
                    Ok(())
                },
                |t| denot_classical(body, t, ctx),
                out,
            );
        }
        Stmt::Call(a) => match ctx.adversaries.get(a).and_then(|adv| adv.body.clone()) {
            Some(body) if crate::lang::stmt::is_classical(&body) => return denot_classical(&body, mu, ctx),
            Some(_) => return Err(SemError::NotClassical(s.to_string())),
            None => return Err(SemError::UninstantiatedAdversary(a.to_string())),
        },
        Stmt::QInit(..) | Stmt::QApply(..) | Stmt::Measure(..) => {
            return Err(SemError::NotClassical(s.to_string()))
        }
    }
    Ok(out)
}

/// Point distribution `δ_m`.
pub fn delta(m: Memory) -> ClassicalDistr {
    BTreeMap::from([(m, 1.0)])
}

/// Builds the initial state from `x = e` and `q = e` clauses; unlisted
/// classical variables take their first value and unlisted quantum
/// variables the first basis state.
pub fn initial_state(ctx: &Context, clauses: &[(VarName, Expr)]) -> SemResult<State> {
    let mut mem = default_memory(ctx);
    let sp = space(ctx);
    let mut psi: Option<LabeledVector<f64>> = None;
    let mut covered = Vec::new();
    let env = |_: &VarName| None;
    for (x, e) in clauses {
        if ctx.is_classical(&x.base) {
            let v = eval(e, ctx, &env)?;
            mem = store(ctx, &mem, x, &v)?;
        } else {
            let regs = ctx.regs(std::slice::from_ref(x))?;
            let v = vector_of(eval(e, ctx, &env)?, e)?;
            let lv = LabeledVector::on_list(&regs, &v)?;
            covered.push(regs[0]);
            psi = Some(match psi {
                None => lv,
                Some(p) => p.tensor(&lv)?,
            });
        }
    }
    let rest = sp.minus(&Space::new(covered)?);
    let zero = LabeledVector::basis(rest, 0);
    let full = match psi {
        None => zero,
        Some(p) => p.tensor(&zero)?,
    };
    point_state(ctx, mem, pure(&full.amps))
}

/// `true` iff the state is a cq-state with blocks in memory order and
/// positive semidefinite within `eps`.
pub fn is_valid(rho: &State, ctx: &Context) -> bool {
    let n = ctx.classical_vars().count();
    rho.blocks.keys().all(|m| m.len() == n) && rho.is_positive(ctx.settings.eps.max(1e-9))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parser::{parse_expr, parse_program};
    use crate::lang::types::BIT;
    use crate::lang::VarKind;

    fn ctx() -> Context {
        let mut c = Context::default();
        c.add_var("x", BIT, VarKind::Classical).unwrap();
        c.add_var("q", BIT, VarKind::Quantum).unwrap();
        c.add_var("r", BIT, VarKind::Quantum).unwrap();
        c
    }

    #[test]
    fn sampling_splits_mass() {
        let c = ctx();
        let rho = initial_state(&c, &[]).unwrap();
        let p = parse_program("x <$ uniform(bit);", &c).unwrap();
        let pr = prafter(&parse_expr("x = 0", &c, false).unwrap(), &p, &rho, &c).unwrap();
        assert!((pr - 0.5).abs() < 1e-12);
    }

    #[test]
    fn measuring_plus_is_fair() {
        let c = ctx();
        let rho = initial_state(&c, &[(VarName::plain("q"), parse_expr("ketplus", &c, false).unwrap())]).unwrap();
        let p = parse_program("x <- measure q with computational(bit);", &c).unwrap();
        let out = denot(&p, &rho, &c).unwrap();
        assert_eq!(out.blocks.len(), 2);
        for b in out.blocks.values() {
            assert!((b.trace().re - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn nonterminating_loop_diverges() {
        let mut c = ctx();
        c.settings.max_iters = 50;
        let rho = initial_state(&c, &[]).unwrap();
        let p = parse_program("while (true) { skip; }", &c).unwrap();
        assert!(matches!(denot(&p, &rho, &c), Err(SemError::Divergence(50))));
    }

    #[test]
    fn geometric_loop_converges() {
        let c = ctx();
        let rho = initial_state(&c, &[]).unwrap();
        let p = parse_program("while (x = 0) { x <$ uniform(bit); }", &c).unwrap();
        let out = denot(&p, &rho, &c).unwrap();
        assert!((out.trace() - 1.0).abs() < 1e-11);
    }
}
