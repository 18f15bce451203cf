//! Couplings of finite distributions, pRHL judgments on the classical
//! fragment and probability comparisons.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::lang::eval::eval_bool;
use crate::lang::expr::{and_all, ff, tt};
use crate::lang::typecheck::for_each_assignment;
use crate::lang::{Context, Expr, LangError, Stmt, Value, VarName};
use crate::predicates::{memory_env, Pred};
use crate::prover::Rel;
use crate::semantics::{all_memories, delta, denot_classical, prafter, ClassicalDistr, Memory, SemResult, State};

use super::{OracleError, OracleResult};

/// Total masses further apart than this admit no coupling.
pub const MASS_TOL: f64 = 1e-12;
/// Slack between the maximal flow and the total mass.
const FLOW_TOL: f64 = 1e-9;
/// Residual capacities at or below this are treated as saturated.
const EDGE_TOL: f64 = 1e-15;
/// Tolerance of probability comparisons.
pub const PROB_TOL: f64 = 1e-9;

/// Two finite distributions and the pairs of support points a coupling
/// may put weight on.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingProblem {
    pub w1: Vec<f64>,
    pub w2: Vec<f64>,
    /// `allowed[i][j]`: the pair (i, j) lies in the relation.
    pub allowed: Vec<Vec<bool>>,
}

impl CouplingProblem {
    /// Restricts to the supports of `mu1` and `mu2`.
    pub fn new<K, E>(
        mu1: &BTreeMap<K, f64>,
        mu2: &BTreeMap<K, f64>,
        mut rel: impl FnMut(&K, &K) -> Result<bool, E>,
    ) -> Result<Self, E> {
        let s1: Vec<(&K, f64)> = mu1.iter().filter(|(_, w)| **w > 0.0).map(|(k, w)| (k, *w)).collect();
        let s2: Vec<(&K, f64)> = mu2.iter().filter(|(_, w)| **w > 0.0).map(|(k, w)| (k, *w)).collect();
        let mut allowed = vec![vec![false; s2.len()]; s1.len()];
        for (i, (a, _)) in s1.iter().enumerate() {
            for (j, (b, _)) in s2.iter().enumerate() {
                allowed[i][j] = rel(a, b)?;
            }
        }
        Ok(CouplingProblem {
            w1: s1.iter().map(|p| p.1).collect(),
            w2: s2.iter().map(|p| p.1).collect(),
            allowed,
        })
    }
}

/// A coupling `μ′` with marginals `w1`, `w2` and support in the relation,
/// as a matrix of weights, or `None` when none exists.
pub fn coupling(p: &CouplingProblem) -> Option<Vec<Vec<f64>>> {
    let (n1, n2) = (p.w1.len(), p.w2.len());
    let (m1, m2): (f64, f64) = (p.w1.iter().sum(), p.w2.iter().sum());
    if (m1 - m2).abs() > MASS_TOL {
        return None;
    }
    // nodes: 0 source, 1..=n1 left, n1+1..=n1+n2 right, n1+n2+1 sink
    let n = n1 + n2 + 2;
    let sink = n - 1;
    let mut cap = vec![vec![0.0f64; n]; n];
    for i in 0..n1 {
        cap[0][1 + i] = p.w1[i];
        for j in 0..n2 {
            if p.allowed[i][j] {
                cap[1 + i][1 + n1 + j] = f64::INFINITY;
            }
        }
    }
    for j in 0..n2 {
        cap[1 + n1 + j][sink] = p.w2[j];
    }
    let mut flow = vec![vec![0.0f64; n]; n];
    let mut total = 0.0;
    loop {
        let mut prev = vec![usize::MAX; n];
        prev[0] = 0;
        let mut queue = VecDeque::from([0usize]);
        while let Some(u) = queue.pop_front() {
            for v in 0..n {
                if prev[v] == usize::MAX && cap[u][v] - flow[u][v] > EDGE_TOL {
                    prev[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if prev[sink] == usize::MAX {
            break;
        }
        let mut push = f64::INFINITY;
        let mut v = sink;
        while v != 0 {
            let u = prev[v];
            push = push.min(cap[u][v] - flow[u][v]);
            v = u;
        }
        let mut v = sink;
        while v != 0 {
            let u = prev[v];
            flow[u][v] += push;
            flow[v][u] -= push;
            v = u;
        }
        total += push;
    }
    if total < m1.max(m2) - FLOW_TOL {
        return None;
    }
    Some((0..n1).map(|i| (0..n2).map(|j| flow[1 + i][1 + n1 + j].max(0.0)).collect()).collect())
}

/// A coupling of the two distributions with support in the relation exists.
pub fn strassen_feasible(p: &CouplingProblem) -> bool {
    coupling(p).is_some()
}

/// The boolean expression of a predicate built from `top`, `bot`, `Cla`,
/// intersections and infima; `None` for anything quantum.
pub fn pred_to_expr(p: &Pred) -> Option<Expr> {
    match p {
        Pred::Top => Some(tt()),
        Pred::Bot => Some(ff()),
        Pred::Cla(e) => Some(e.clone()),
        Pred::And(..) => p.conjuncts().into_iter().map(pred_to_expr).collect::<Option<Vec<_>>>().map(and_all),
        Pred::Inf(z, dom, body) => Some(Expr::Quant(
            crate::lang::expr::Quant::Forall,
            z.clone(),
            dom.clone(),
            Box::new(pred_to_expr(body)?),
        )),
        _ => None,
    }
}

fn ambient_vars(exprs: &[&Expr], ctx: &Context) -> Vec<VarName> {
    let mut out = BTreeSet::new();
    for e in exprs {
        out.extend(e.fv().into_iter().filter(|v| v.tag == 0 && ctx.ambient_type(&v.base).is_some()));
    }
    out.into_iter().collect()
}

/// Quantum-free, with adversary calls resolved through their instantiations.
fn check_classical(block: &[Stmt], ctx: &Context) -> OracleResult<()> {
    if concrete_classical(block, ctx) {
        Ok(())
    } else {
        Err(OracleError::NotClassical(crate::lang::stmt::fmt_block(block)))
    }
}

fn concrete_classical(block: &[Stmt], ctx: &Context) -> bool {
    block.iter().all(|s| match s {
        Stmt::QInit(..) | Stmt::QApply(..) | Stmt::Measure(..) => false,
        Stmt::Call(a) => ctx
            .adversaries
            .get(a)
            .and_then(|adv| adv.body.as_ref())
            .is_some_and(|b| concrete_classical(b, ctx)),
        Stmt::If(_, a, b) => concrete_classical(a, ctx) && concrete_classical(b, ctx),
        Stmt::While(_, body) => concrete_classical(body, ctx),
        _ => true,
    })
}

/// `⊨ {a} c ~ d {b}` in the probabilistic sense: for all memory pairs
/// satisfying `a`, the output distributions have a coupling supported in
/// `b`. Free ambient variables are universally quantified.
pub fn prhl_holds(a: &Expr, c: &[Stmt], d: &[Stmt], b: &Expr, ctx: &Context) -> OracleResult<bool> {
    check_classical(c, ctx)?;
    check_classical(d, ctx)?;
    let mems = all_memories(ctx).map_err(|_| too_large(ctx))?;
    let pairs = (mems.len() as u128).saturating_mul(mems.len() as u128);
    if pairs > ctx.settings.enum_cap as u128 {
        return Err(OracleError::AmbientTooLarge(pairs, ctx.settings.enum_cap));
    }
    let out1: Vec<ClassicalDistr> = mems.iter().map(|m| denot_classical(c, &delta(m.clone()), ctx)).collect::<SemResult<_>>()?;
    let out2: Vec<ClassicalDistr> = mems.iter().map(|m| denot_classical(d, &delta(m.clone()), ctx)).collect::<SemResult<_>>()?;
    let amb = ambient_vars(&[a, b], ctx);
    let r = for_each_assignment(&amb, ctx, |env_amb| {
        for (i, m1) in mems.iter().enumerate() {
            for (j, m2) in mems.iter().enumerate() {
                let env = pair_env(ctx, m1, m2, env_amb);
                if !eval_bool(a, ctx, &env)? {
                    continue;
                }
                let p = CouplingProblem::new(&out1[i], &out2[j], |x: &Memory, y: &Memory| {
                    eval_bool(b, ctx, &pair_env(ctx, x, y, env_amb))
                })?;
                if !strassen_feasible(&p) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    });
    match r {
        Ok(ok) => Ok(ok),
        Err(LangError::TooLarge(n, cap)) => Err(OracleError::AmbientTooLarge(n, cap)),
        Err(e) => Err(e.into()),
    }
}

fn too_large(ctx: &Context) -> OracleError {
    let total = ctx
        .classical_vars()
        .fold(1u128, |acc, d| acc.saturating_mul(d.ty.card().unwrap_or(u64::MAX) as u128));
    OracleError::AmbientTooLarge(total, ctx.settings.enum_cap)
}

fn pair_env(ctx: &Context, m1: &[Value], m2: &[Value], amb: &BTreeMap<VarName, Value>) -> BTreeMap<VarName, Value> {
    let mut env = memory_env(ctx, &[1], m1);
    env.extend(memory_env(ctx, &[2], m2));
    env.extend(amb.iter().map(|(k, v)| (k.clone(), v.clone())));
    env
}

/// `prhl_holds` for predicates that are classical.
pub fn prhl_holds_pred(a: &Pred, c: &[Stmt], d: &[Stmt], b: &Pred, ctx: &Context) -> OracleResult<bool> {
    let (Some(ea), Some(eb)) = (pred_to_expr(a), pred_to_expr(b)) else {
        return Err(OracleError::NotClassical(format!("{a} / {b}")));
    };
    prhl_holds(&ea, c, d, &eb, ctx)
}

/// `(Pr[e : c(ρ)], Pr[f : d(ρ)])`
pub fn probabilities(e: &Expr, c: &[Stmt], f: &Expr, d: &[Stmt], rho: &State, ctx: &Context) -> SemResult<(f64, f64)> {
    Ok((prafter(e, c, rho, ctx)?, prafter(f, d, rho, ctx)?))
}

/// `Pr[e : c(ρ)] REL Pr[f : d(ρ)]` within [`PROB_TOL`].
pub fn check_probrel(
    e: &Expr,
    c: &[Stmt],
    f: &Expr,
    d: &[Stmt],
    rho: &State,
    rel: Rel,
    ctx: &Context,
) -> SemResult<bool> {
    let (p, q) = probabilities(e, c, f, d, rho, ctx)?;
    Ok(match rel {
        Rel::Le => p <= q + PROB_TOL,
        Rel::Eq => (p - q).abs() <= PROB_TOL,
        Rel::Ge => p + PROB_TOL >= q,
    })
}
