//! The qRHL rules as goal transformations. Every tactic replaces the first
//! goal by the premises of the rule (or derived rule) it applies: side
//! conditions (inclusions and ambient facts) first, then judgments in
//! program order. Side goals that hold syntactically are dropped.

use std::collections::{BTreeMap, BTreeSet};

use crate::lang::eval::eval_bool;
use crate::lang::expr::{
    and, and_all, bin, call, eq, fresh_name, implies, not, proj, var, BinOp, Builtin, Domain,
    Expr, Quant,
};
use crate::lang::stmt::{self, normalize, Block, Stmt};
use crate::lang::typecheck::{for_each_assignment, infer, unify};
use crate::lang::{Context, LangError, Type, Value, VarName};
use crate::linalg::{eigh, Matrix};
use crate::predicates::{
    cla, memory_env, ortho, pand, pand_all, pred_leq, psum, satisfies, syntactic_leq, Evaluator,
    Obligation, Pred, QSide,
};
use crate::registers::pure;
use crate::semantics::{all_memories, delta, denot, denot_classical, point_state, State};

use super::tactic::{AdversaryArgs, Side, Tactic, TransArgs};
use super::{shape, side, Goal, ProverError, ProverResult, Rel};

/// Budget of loop runs for the numeric totality check.
const TOTALITY_RUNS: usize = 4096;
/// Required output trace of a total loop on a normalized input.
const TOTALITY_TOL: f64 = 1e-6;

pub fn apply(
    t: &Tactic,
    goal: &Goal,
    ctx: &mut Context,
    inits: &BTreeMap<String, State>,
) -> ProverResult<Vec<Goal>> {
    let out = match (t, goal) {
        (Tactic::Admit, _) => return Ok(Vec::new()),
        (Tactic::Simp, g) => return simp_goal(g, ctx),
        (Tactic::ElimEq { vars, quantum, pre }, Goal::ProbRel { e, c, f, d, rho, rel }) => {
            let r = ElimEq { vars, quantum, pre: pre.as_ref() };
            r.apply(ctx, inits, e, c, f, d, rho.as_deref(), *rel)?
        }
        (Tactic::ElimEq { .. }, g) => {
            return Err(shape(format!("elimeq needs a probability goal, found a {} goal", g.kind())))
        }
        (_, Goal::Qrhl { pre, left, right, post }) => {
            let j = Judgment { pre, left: normalize(left), right: normalize(right), post };
            j.apply(t, ctx)?
        }
        (t, g) => {
            return Err(shape(format!(
                "{} applies to qRHL judgments, the current goal is a {} goal",
                tactic_name(t),
                g.kind()
            )))
        }
    };
    Ok(prune(out, ctx))
}

fn tactic_name(t: &Tactic) -> &'static str {
    match t {
        Tactic::Skip => "skip",
        Tactic::Sym => "sym",
        Tactic::Conseq { .. } => "conseq",
        Tactic::Seq { .. } => "seq",
        Tactic::Case(_) => "case",
        Tactic::Equal(_) => "equal",
        Tactic::Frame => "frame",
        Tactic::Assign(_) => "assign",
        Tactic::Sample(_) => "sample",
        Tactic::JointSample(_) => "jointsample",
        Tactic::If(_) => "if",
        Tactic::JointIf => "jointif",
        Tactic::While(..) => "while",
        Tactic::JointWhile(_) => "jointwhile",
        Tactic::QInit(_) => "qinit",
        Tactic::QApply(_) => "qapply",
        Tactic::Measure(_) => "measure",
        Tactic::JointMeasureSimple => "jointmeasure-simple",
        Tactic::JointMeasure { .. } => "jointmeasure",
        Tactic::ElimEq { .. } => "elimeq",
        Tactic::TransSimple(_) => "trans-simple",
        Tactic::Trans(_) => "trans",
        Tactic::Adversary(_) => "adversary",
        Tactic::Simp => "simp",
        Tactic::Admit => "admit",
    }
}

/// Drops side goals that hold syntactically.
fn prune(goals: Vec<Goal>, ctx: &Context) -> Vec<Goal> {
    let ev = Evaluator::relational(ctx);
    goals
        .into_iter()
        .filter(|g| match g {
            Goal::Leq(a, b) => !ev.reduce_leq(a, b).is_empty(),
            Goal::Ambient { expr, .. } => expr.as_bool_lit() != Some(true),
            _ => true,
        })
        .collect()
}

// ---- helpers ----

fn is_prog(ctx: &Context) -> impl Fn(&VarName) -> bool + '_ {
    |v: &VarName| ctx.var(&v.base).is_some()
}

fn tag_expr(e: &Expr, t: u8, ctx: &Context) -> Expr {
    e.idx(t, &is_prog(ctx))
}

fn tag_vars(q: &[VarName], t: u8) -> Vec<VarName> {
    q.iter().map(|v| v.with_tag(t)).collect()
}

/// A bound variable name not free in `avoid` and not shadowing a declared name.
fn fresh(hint: &str, avoid: &BTreeSet<VarName>, ctx: &Context) -> VarName {
    let mut z = fresh_name(&VarName::plain(hint), avoid);
    while ctx.var(&z.base).is_some()
        || ctx.ambient_type(&z.base).is_some()
        || ctx.consts.contains_key(&z.base)
    {
        let mut more = avoid.clone();
        more.insert(z.clone());
        z = fresh_name(&z, &more);
    }
    z
}

fn all_fv(parts: &[&Pred], exprs: &[&Expr]) -> BTreeSet<VarName> {
    let mut s = BTreeSet::new();
    for p in parts {
        s.extend(p.fv());
        s.extend(p.qvars());
    }
    for e in exprs {
        s.extend(e.fv());
    }
    s
}

fn simp_pred(p: &Pred, ctx: &Context) -> Pred {
    Evaluator::relational(ctx).simplify(p)
}

fn vars_of_kind(vs: &BTreeSet<VarName>, ctx: &Context, quantum: bool) -> Vec<VarName> {
    vs.iter()
        .filter(|v| ctx.var(&v.base).is_some_and(|d| (d.kind == crate::lang::VarKind::Quantum) == quantum))
        .cloned()
        .collect()
}

fn list_type(q: &[VarName], ctx: &Context) -> Type {
    Type::product(q.iter().map(|v| ctx.type_of(v).expect("declared variable")).collect())
}

fn tuple(vs: &[VarName]) -> Expr {
    if vs.len() == 1 {
        var(&vs[0])
    } else {
        Expr::Tuple(vs.iter().map(var).collect())
    }
}

/// `x1 = x2 ∧ …` for the untagged classical variables `xs`.
fn cl_eq(xs: &[VarName]) -> Expr {
    and_all(xs.iter().map(|x| eq(var(&x.with_tag(1)), var(&x.with_tag(2)))))
}

/// `Cla[X1=X2] ∩ (Y1≡Y2)`; the quantum equality is omitted for empty `Y`.
fn equality_pred(xs: &[VarName], ys: &[VarName]) -> Pred {
    let mut parts = vec![cla(cl_eq(xs))];
    if !ys.is_empty() {
        parts.push(Pred::Qeq(QSide::plain(tag_vars(ys, 1)), QSide::plain(tag_vars(ys, 2))));
    }
    pand_all(parts)
}

/// Conjuncts with classical conjunctions split into atoms.
fn atoms(p: &Pred) -> Vec<Pred> {
    p.conjuncts()
        .into_iter()
        .flat_map(|c| match c {
            Pred::Cla(e) => crate::lang::simp::conjuncts(e).into_iter().map(Pred::Cla).collect(),
            Pred::Top => Vec::new(),
            c => vec![c.clone()],
        })
        .collect()
}

/// `r` mentions no classical variable written by, and no quantum variable
/// of, the left (tag 1) and right (tag 2) programs.
fn frame_compatible(r: &Pred, left: &[Stmt], right: &[Stmt], ctx: &Context) -> bool {
    let wl = stmt::written(left, ctx);
    let wr = stmt::written(right, ctx);
    let fl = stmt::fv(left, ctx);
    let fr = stmt::fv(right, ctx);
    let hit = |v: &VarName, w: &BTreeSet<VarName>| w.contains(&VarName::plain(&v.base));
    r.fv().iter().all(|v| match v.tag {
        1 => !hit(v, &wl) && !(ctx.is_quantum(&v.base) && hit(v, &fl)),
        2 => !hit(v, &wr) && !(ctx.is_quantum(&v.base) && hit(v, &fr)),
        _ => true,
    }) && r.qvars().iter().all(|v| match v.tag {
        1 => !hit(v, &fl),
        2 => !hit(v, &fr),
        _ => true,
    })
}

fn split_last(b: &[Stmt]) -> Option<(Block, Stmt)> {
    let (last, prefix) = b.split_last()?;
    Some((prefix.to_vec(), last.clone()))
}

fn op_norm_le_one(m: &Matrix<f64>) -> bool {
    let g = m.adjoint().matmul(m);
    let (vals, _) = eigh(&g);
    vals.iter().all(|&l| l <= 1.0 + 1e-9)
}

/// Decides a boolean fact by enumerating its free variables.
pub fn decide(e: &Expr, ctx: &Context) -> ProverResult<bool> {
    let vars: Vec<VarName> = e.fv().into_iter().collect();
    Ok(for_each_assignment(&vars, ctx, |env| eval_bool(e, ctx, env))?)
}

// ---- simp ----

fn simp_goal(g: &Goal, ctx: &Context) -> ProverResult<Vec<Goal>> {
    let ev = Evaluator::relational(ctx);
    match g {
        Goal::Qrhl { pre, left, right, post } => Ok(vec![Goal::Qrhl {
            pre: ev.simplify(pre),
            left: normalize(left),
            right: normalize(right),
            post: ev.simplify(post),
        }]),
        Goal::Leq(a, b) => {
            let mut rest = Vec::new();
            for o in ev.reduce_leq(a, b) {
                match o {
                    Obligation::Leq(x, y) => match pred_leq(&ev, &x, &y) {
                        Ok(true) => {}
                        Ok(false) => {
                            return Err(ProverError::Failed(format!("inclusion does not hold: {x} <= {y}")))
                        }
                        Err(crate::predicates::PredError::Lang(LangError::TooLarge(..))) => {
                            rest.push(Goal::Leq(x, y))
                        }
                        Err(e) => return Err(e.into()),
                    },
                    Obligation::Ambient(e) => {
                        if !decide(&e, ctx)? {
                            return Err(ProverError::Failed(format!("ambient fact is false: {e}")));
                        }
                    }
                }
            }
            Ok(rest)
        }
        Goal::Ambient { expr, note } => {
            if decide(expr, ctx)? {
                Ok(Vec::new())
            } else {
                Err(ProverError::Failed(match note {
                    Some(n) => format!("ambient fact is false: {expr} ({n})"),
                    None => format!("ambient fact is false: {expr}"),
                }))
            }
        }
        Goal::ProbRel { .. } => Err(shape("simp does not apply to probability goals; use elimeq")),
    }
}

// ---- qRHL judgments ----

struct Judgment<'a> {
    pre: &'a Pred,
    left: Block,
    right: Block,
    post: &'a Pred,
}

fn qrhl(pre: Pred, left: Block, right: Block, post: Pred) -> Goal {
    Goal::Qrhl { pre, left, right, post }
}

impl Judgment<'_> {
    fn side(&self, s: Side) -> &Block {
        match s {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }

    fn last(&self, s: Side, what: &str) -> ProverResult<(Block, Stmt)> {
        split_last(self.side(s))
            .ok_or_else(|| shape(format!("{what}: the {} program is empty", side_word(s))))
    }

    /// The goal with the last statement of side `s` replaced by the wp `a`.
    fn with_prefix(&self, s: Side, prefix: Block, a: Pred, ctx: &Context) -> Goal {
        let a = simp_pred(&a, ctx);
        match s {
            Side::Left => qrhl(self.pre.clone(), prefix, self.right.clone(), a),
            Side::Right => qrhl(self.pre.clone(), self.left.clone(), prefix, a),
        }
    }

    fn apply(&self, t: &Tactic, ctx: &mut Context) -> ProverResult<Vec<Goal>> {
        match t {
            Tactic::Skip => self.skip(ctx),
            Tactic::Sym => Ok(vec![qrhl(
                self.pre.swap_sides(),
                self.right.clone(),
                self.left.clone(),
                self.post.swap_sides(),
            )]),
            Tactic::Conseq { pre, post } => {
                let mut out = Vec::new();
                if let Some(p) = pre {
                    out.push(Goal::Leq(self.pre.clone(), p.clone()));
                }
                if let Some(q) = post {
                    out.push(Goal::Leq(q.clone(), self.post.clone()));
                }
                out.push(qrhl(
                    pre.clone().unwrap_or_else(|| self.pre.clone()),
                    self.left.clone(),
                    self.right.clone(),
                    post.clone().unwrap_or_else(|| self.post.clone()),
                ));
                Ok(out)
            }
            Tactic::Seq { left, right, mid } => {
                if *left > self.left.len() || *right > self.right.len() {
                    return Err(shape(format!(
                        "seq {left} {right}: the programs have {} and {} statements",
                        self.left.len(),
                        self.right.len()
                    )));
                }
                Ok(vec![
                    qrhl(self.pre.clone(), self.left[..*left].to_vec(), self.right[..*right].to_vec(), mid.clone()),
                    qrhl(mid.clone(), self.left[*left..].to_vec(), self.right[*right..].to_vec(), self.post.clone()),
                ])
            }
            Tactic::Case(e) => {
                let ty = infer(e, ctx)?;
                let z = ctx.fresh_ambient("z");
                ctx.add_ambient(&z, ty)?;
                let pre = pand(cla(eq(e.clone(), var(&VarName::plain(&z)))), self.pre.clone());
                Ok(vec![qrhl(pre, self.left.clone(), self.right.clone(), self.post.clone())])
            }
            Tactic::Frame => self.frame(ctx),
            Tactic::Equal(vars) => self.equal(vars, ctx),
            Tactic::Assign(s) => {
                let t = s.tag();
                match self.last(*s, "assign")? {
                    (prefix, Stmt::Assign(x, e)) => {
                        let wp = self.post.subst1(&x.with_tag(t), &tag_expr(&e, t, ctx));
                        Ok(vec![self.with_prefix(*s, prefix, wp, ctx)])
                    }
                    (_, st) => Err(expected(*s, "an assignment", &st)),
                }
            }
            Tactic::Sample(s) => {
                let t = s.tag();
                match self.last(*s, "sample")? {
                    (prefix, Stmt::Sample(x, e)) => {
                        let e = tag_expr(&e, t, ctx);
                        let z = fresh("z", &all_fv(&[self.post], &[&e]), ctx);
                        let body = self.post.subst1(&x.with_tag(t), &var(&z));
                        let wp = pand(
                            cla(call(Builtin::Total, vec![e.clone()])),
                            Pred::Inf(z, Domain::Set(Box::new(call(Builtin::Supp, vec![e]))), Box::new(body)),
                        );
                        Ok(vec![self.with_prefix(*s, prefix, wp, ctx)])
                    }
                    (_, st) => Err(expected(*s, "a sampling", &st)),
                }
            }
            Tactic::JointSample(f) => self.joint_sample(f, ctx),
            Tactic::If(s) => self.if_one(*s, ctx),
            Tactic::JointIf => self.joint_if(ctx),
            Tactic::While(s, inv) => self.while_one(*s, inv, ctx),
            Tactic::JointWhile(inv) => self.joint_while(inv, ctx),
            Tactic::QInit(s) => {
                let t = s.tag();
                match self.last(*s, "qinit")? {
                    (prefix, Stmt::QInit(q, e)) => {
                        let wp = Pred::Div(Box::new(self.post.clone()), tag_expr(&e, t, ctx), tag_vars(&q, t));
                        Ok(vec![self.with_prefix(*s, prefix, wp, ctx)])
                    }
                    (_, st) => Err(expected(*s, "a quantum initialization", &st)),
                }
            }
            Tactic::QApply(s) => {
                let t = s.tag();
                match self.last(*s, "qapply")? {
                    (prefix, Stmt::QApply(e, q)) => {
                        let e = tag_expr(&e, t, ctx);
                        let q = tag_vars(&q, t);
                        let inner = pand(self.post.clone(), Pred::Im(e.clone(), q.clone()));
                        let wp = Pred::Apply(crate::lang::expr::adj(e), q, Box::new(inner));
                        Ok(vec![self.with_prefix(*s, prefix, wp, ctx)])
                    }
                    (_, st) => Err(expected(*s, "a quantum application", &st)),
                }
            }
            Tactic::Measure(s) => {
                let t = s.tag();
                match self.last(*s, "measure")? {
                    (prefix, Stmt::Measure(x, q, e)) => {
                        let e = tag_expr(&e, t, ctx);
                        let q = tag_vars(&q, t);
                        let ty = ctx.type_of(&x).expect("declared variable");
                        let z = fresh("z", &all_fv(&[self.post], &[&e]), ctx);
                        let im = Pred::Im(Expr::App(Box::new(e.clone()), vec![var(&z)]), q);
                        let body = psum(pand(self.post.subst1(&x.with_tag(t), &var(&z)), im.clone()), ortho(im));
                        let wp = pand(
                            cla(call(Builtin::Total, vec![e])),
                            Pred::Inf(z, Domain::Type(ty), Box::new(body)),
                        );
                        Ok(vec![self.with_prefix(*s, prefix, wp, ctx)])
                    }
                    (_, st) => Err(expected(*s, "a measurement", &st)),
                }
            }
            Tactic::JointMeasureSimple => self.joint_measure_simple(ctx),
            Tactic::JointMeasure { f, u1, u2 } => self.joint_measure(f, u1, u2, ctx),
            Tactic::TransSimple(mid) => self.trans_simple(mid, ctx),
            Tactic::Trans(args) => self.trans(args, ctx),
            Tactic::Adversary(args) => self.adversary(args, ctx),
            Tactic::Simp | Tactic::Admit | Tactic::ElimEq { .. } => unreachable!("handled by apply"),
        }
    }

    fn skip(&self, ctx: &Context) -> ProverResult<Vec<Goal>> {
        if !self.left.is_empty() || !self.right.is_empty() {
            return Err(shape("skip needs both programs to be empty"));
        }
        let ev = Evaluator::relational(ctx);
        let (a, b) = (ev.simplify(self.pre), ev.simplify(self.post));
        if a.alpha_eq(&b) || syntactic_leq(&a, &b) {
            return Ok(Vec::new());
        }
        Ok(vec![Goal::Leq(self.pre.clone(), self.post.clone())])
    }

    fn frame(&self, ctx: &Context) -> ProverResult<Vec<Goal>> {
        let pre = atoms(self.pre);
        let post = atoms(self.post);
        let common: Vec<Pred> = post
            .iter()
            .filter(|r| {
                pre.iter().any(|p| p.alpha_eq(r)) && frame_compatible(r, &self.left, &self.right, ctx)
            })
            .cloned()
            .collect();
        if common.is_empty() {
            return Err(shape("frame: no conjunct common to pre and post is untouched by the programs"));
        }
        let keep = |xs: Vec<Pred>| pand_all(xs.into_iter().filter(|p| !common.iter().any(|c| c.alpha_eq(p))));
        Ok(vec![qrhl(keep(pre), self.left.clone(), self.right.clone(), keep(post))])
    }

    fn equal(&self, vars: &[VarName], ctx: &Context) -> ProverResult<Vec<Goal>> {
        let (lp, ls) = self.last(Side::Left, "equal")?;
        let (rp, rs) = self.last(Side::Right, "equal")?;
        if ls != rs {
            return Err(shape(format!("equal: the last statements differ: `{ls}` vs `{rs}`")));
        }
        let c = vec![ls];
        let fv = stmt::fv(&c, ctx);
        let chosen: BTreeSet<VarName> = if vars.is_empty() { fv.clone() } else { vars.iter().cloned().collect() };
        if !fv.is_subset(&chosen) {
            let missing: Vec<String> = fv.difference(&chosen).map(|v| v.to_string()).collect();
            return Err(side(format!("equal: the statement is not local to the given variables (also uses {})", missing.join(", "))));
        }
        let xs = vars_of_kind(&chosen, ctx, false);
        let ys = vars_of_kind(&chosen, ctx, true);
        let frame: Vec<Pred> = atoms(self.post)
            .into_iter()
            .filter(|r| frame_compatible(r, &c, &c, ctx))
            .collect();
        let mid = simp_pred(&pand(equality_pred(&xs, &ys), pand_all(frame)), ctx);
        Ok(vec![Goal::Leq(mid.clone(), self.post.clone()), qrhl(self.pre.clone(), lp, rp, mid)])
    }

    fn joint_sample(&self, f: &Expr, ctx: &Context) -> ProverResult<Vec<Goal>> {
        let (lp, ls) = self.last(Side::Left, "jointsample")?;
        let (rp, rs) = self.last(Side::Right, "jointsample")?;
        let (Stmt::Sample(x, e1), Stmt::Sample(y, e2)) = (&ls, &rs) else {
            return Err(shape("jointsample needs a sampling as the last statement on both sides"));
        };
        let want = Type::Distr(Box::new(Type::pair(
            ctx.type_of(x).expect("declared"),
            ctx.type_of(y).expect("declared"),
        )));
        let got = infer(f, ctx)?;
        if unify(&got, &want).is_none() {
            return Err(ProverError::Witness(format!("`{f}` has type {got}, expected {want}")));
        }
        let (e1, e2) = (tag_expr(e1, 1, ctx), tag_expr(e2, 2, ctx));
        let z = fresh("z", &all_fv(&[self.post], &[f, &e1, &e2]), ctx);
        let body = self.post.subst(&BTreeMap::from([
            (x.with_tag(1), proj(var(&z), 0)),
            (y.with_tag(2), proj(var(&z), 1)),
        ]));
        let marg = and(
            eq(call(Builtin::Marg1, vec![f.clone()]), e1),
            eq(call(Builtin::Marg2, vec![f.clone()]), e2),
        );
        let wp = pand(
            cla(marg),
            Pred::Inf(z, Domain::Set(Box::new(call(Builtin::Supp, vec![f.clone()]))), Box::new(body)),
        );
        Ok(vec![qrhl(self.pre.clone(), lp, rp, simp_pred(&wp, ctx))])
    }

    fn if_one(&self, s: Side, ctx: &Context) -> ProverResult<Vec<Goal>> {
        let other = match s {
            Side::Left => &self.right,
            Side::Right => &self.left,
        };
        let [Stmt::If(e, a, b)] = self.side(s).as_slice() else {
            return Err(shape(format!("if{}: the {} program must be a single conditional", s.tag(), side_word(s))));
        };
        if !other.is_empty() {
            return Err(shape(format!("if{}: the other program must be empty", s.tag())));
        }
        let e = tag_expr(e, s.tag(), ctx);
        let mk = |cond: Expr, body: &Block| {
            let pre = pand(cla(cond), self.pre.clone());
            match s {
                Side::Left => qrhl(pre, body.clone(), Vec::new(), self.post.clone()),
                Side::Right => qrhl(pre, Vec::new(), body.clone(), self.post.clone()),
            }
        };
        Ok(vec![mk(e.clone(), a), mk(not(e), b)])
    }

    fn joint_if(&self, ctx: &Context) -> ProverResult<Vec<Goal>> {
        let ([Stmt::If(e1, a1, b1)], [Stmt::If(e2, a2, b2)]) = (self.left.as_slice(), self.right.as_slice()) else {
            return Err(shape("jointif: both programs must be a single conditional"));
        };
        let (e1, e2) = (tag_expr(e1, 1, ctx), tag_expr(e2, 2, ctx));
        Ok(vec![
            Goal::Leq(self.pre.clone(), cla(eq(e1.clone(), e2.clone()))),
            qrhl(pand(cla(and(e1.clone(), e2.clone())), self.pre.clone()), a1.clone(), a2.clone(), self.post.clone()),
            qrhl(pand(cla(and(not(e1), not(e2))), self.pre.clone()), b1.clone(), b2.clone(), self.post.clone()),
        ])
    }

    fn while_one(&self, s: Side, inv: &Pred, ctx: &Context) -> ProverResult<Vec<Goal>> {
        let t = s.tag();
        let (prefix, st) = self.last(s, &format!("while{t}"))?;
        let Stmt::While(e, body) = &st else {
            return Err(expected(s, "a while loop", &st));
        };
        let other_tag = 3 - t;
        if inv.fv().iter().chain(inv.qvars().iter()).any(|v| v.tag == other_tag) {
            return Err(side(format!(
                "while{t}: the invariant must only mention variables of side {t}"
            )));
        }
        let e = tag_expr(e, t, ctx);
        let mut out = vec![Goal::Leq(pand(cla(not(e.clone())), inv.clone()), self.post.clone())];
        if let Some(note) = loop_not_total(&st, ctx)? {
            out.push(Goal::Ambient { expr: crate::lang::expr::ff(), note: Some(note) });
        }
        out.push(match s {
            Side::Left => qrhl(self.pre.clone(), prefix, self.right.clone(), inv.clone()),
            Side::Right => qrhl(self.pre.clone(), self.left.clone(), prefix, inv.clone()),
        });
        let body_pre = pand(cla(e), inv.clone());
        out.push(match s {
            Side::Left => qrhl(body_pre, body.clone(), Vec::new(), inv.clone()),
            Side::Right => qrhl(body_pre, Vec::new(), body.clone(), inv.clone()),
        });
        Ok(out)
    }

    fn joint_while(&self, inv: &Pred, ctx: &Context) -> ProverResult<Vec<Goal>> {
        let (lp, ls) = self.last(Side::Left, "jointwhile")?;
        let (rp, rs) = self.last(Side::Right, "jointwhile")?;
        let (Stmt::While(e1, c), Stmt::While(e2, d)) = (&ls, &rs) else {
            return Err(shape("jointwhile needs a while loop as the last statement on both sides"));
        };
        let (e1, e2) = (tag_expr(e1, 1, ctx), tag_expr(e2, 2, ctx));
        Ok(vec![
            Goal::Leq(inv.clone(), cla(eq(e1.clone(), e2.clone()))),
            Goal::Leq(pand(cla(and(not(e1.clone()), not(e2.clone()))), inv.clone()), self.post.clone()),
            qrhl(self.pre.clone(), lp, rp, inv.clone()),
            qrhl(pand(cla(and(e1, e2)), inv.clone()), c.clone(), d.clone(), inv.clone()),
        ])
    }

    fn measures(&self, what: &str) -> ProverResult<(Block, Block, [(VarName, Vec<VarName>, Expr); 2])> {
        let (lp, ls) = self.last(Side::Left, what)?;
        let (rp, rs) = self.last(Side::Right, what)?;
        match (ls, rs) {
            (Stmt::Measure(x, q1, e1), Stmt::Measure(y, q2, e2)) => Ok((lp, rp, [(x, q1, e1), (y, q2, e2)])),
            _ => Err(shape(format!("{what} needs a measurement as the last statement on both sides"))),
        }
    }

    fn joint_measure_simple(&self, ctx: &Context) -> ProverResult<Vec<Goal>> {
        let (lp, rp, [(x, q1, e1), (y, q2, e2)]) = self.measures("jointmeasure-simple")?;
        let tx = ctx.type_of(&x).expect("declared");
        let ty = ctx.type_of(&y).expect("declared");
        if tx != ty {
            return Err(side(format!("jointmeasure-simple: outcome types {tx} and {ty} differ")));
        }
        if !list_type(&q1, ctx).same_space(&list_type(&q2, ctx)) {
            return Err(side("jointmeasure-simple: the measured registers have different types"));
        }
        let (e1, e2) = (tag_expr(&e1, 1, ctx), tag_expr(&e2, 2, ctx));
        let (q1, q2) = (tag_vars(&q1, 1), tag_vars(&q2, 2));
        let z = fresh("z", &all_fv(&[self.post], &[&e1, &e2]), ctx);
        let zv = var(&z);
        let im1 = Pred::Im(Expr::App(Box::new(e1.clone()), vec![zv.clone()]), q1.clone());
        let im2 = Pred::Im(Expr::App(Box::new(e2.clone()), vec![zv.clone()]), q2.clone());
        let b = self.post.subst(&BTreeMap::from([(x.with_tag(1), zv.clone()), (y.with_tag(2), zv)]));
        let body = psum(psum(pand_all([b, im1.clone(), im2.clone()]), ortho(im1)), ortho(im2));
        let wp = pand_all([
            cla(eq(e1, e2)),
            Pred::Qeq(QSide::plain(q1), QSide::plain(q2)),
            Pred::Inf(z, Domain::Type(tx), Box::new(body)),
        ]);
        Ok(vec![qrhl(self.pre.clone(), lp, rp, simp_pred(&wp, ctx))])
    }

    fn joint_measure(&self, f: &Expr, u1: &Expr, u2: &Expr, ctx: &Context) -> ProverResult<Vec<Goal>> {
        let (lp, rp, [(x, q1, e1), (y, q2, e2)]) = self.measures("jointmeasure")?;
        let tx = ctx.type_of(&x).expect("declared");
        let ty = ctx.type_of(&y).expect("declared");
        let want = Type::Set(Box::new(Type::pair(tx.clone(), ty.clone())));
        let got = infer(f, ctx)?;
        if unify(&got, &want).is_none() {
            return Err(ProverError::Witness(format!("`{f}` has type {got}, expected {want}")));
        }
        let ev = Evaluator::relational(ctx);
        for u in [u1, u2] {
            if !ev.is_isometry(u) {
                return Err(ProverError::Witness(format!("`{u}` is not an isometry")));
            }
        }
        let (e1, e2) = (tag_expr(&e1, 1, ctx), tag_expr(&e2, 2, ctx));
        let (q1, q2) = (tag_vars(&q1, 1), tag_vars(&q2, 2));
        let avoid = all_fv(&[self.post], &[f, u1, u2, &e1, &e2]);
        let a = fresh("a", &avoid, ctx);
        let w = fresh("w", &avoid, ctx);
        let app = |m: &Expr, z: Expr| Expr::App(Box::new(m.clone()), vec![z]);
        let wv = var(&w);
        let unique = |i: usize, z: &VarName, m: &Expr, t: &Type| {
            Expr::Quant(
                Quant::Forall,
                z.clone(),
                Domain::Type(t.clone()),
                Box::new(implies(
                    not(call(Builtin::IsZero, vec![app(m, var(z))])),
                    Expr::Quant(Quant::One, w.clone(), Domain::Set(Box::new(f.clone())), Box::new(eq(proj(wv.clone(), i), var(z)))),
                )),
            )
        };
        let c_f = and(unique(0, &a, &e1, &tx), unique(1, &a, &e2, &ty));
        let conj = |u: &Expr, p: Expr| {
            bin(BinOp::Mul, bin(BinOp::Mul, u.clone(), p), crate::lang::expr::adj(u.clone()))
        };
        let c_e = Expr::Quant(
            Quant::Forall,
            w.clone(),
            Domain::Set(Box::new(f.clone())),
            Box::new(eq(conj(u1, app(&e1, proj(wv.clone(), 0))), conj(u2, app(&e2, proj(wv.clone(), 1))))),
        );
        let im1 = Pred::Im(app(&e1, proj(wv.clone(), 0)), q1.clone());
        let im2 = Pred::Im(app(&e2, proj(wv.clone(), 1)), q2.clone());
        let b = self.post.subst(&BTreeMap::from([
            (x.with_tag(1), proj(wv.clone(), 0)),
            (y.with_tag(2), proj(wv.clone(), 1)),
        ]));
        let body = psum(psum(pand_all([b, im1.clone(), im2.clone()]), ortho(im1)), ortho(im2));
        let wp = pand_all([
            cla(c_f),
            cla(c_e),
            Pred::Inf(w, Domain::Set(Box::new(f.clone())), Box::new(body)),
            Pred::Qeq(QSide { op: Some(u1.clone()), vars: q1 }, QSide { op: Some(u2.clone()), vars: q2 }),
        ]);
        Ok(vec![qrhl(self.pre.clone(), lp, rp, simp_pred(&wp, ctx))])
    }

    /// `Cla[X_p1 = X_q2] ∩ (Q_p1 ≡ Q_q2)` from the free variables of `p`, `q`.
    fn fv_equality(p: &[Stmt], q: &[Stmt], ctx: &Context) -> ProverResult<Pred> {
        let (fp, fq) = (stmt::fv(p, ctx), stmt::fv(q, ctx));
        let (xp, xq) = (vars_of_kind(&fp, ctx, false), vars_of_kind(&fq, ctx, false));
        let (yp, yq) = (vars_of_kind(&fp, ctx, true), vars_of_kind(&fq, ctx, true));
        if unify(&list_type(&xp, ctx), &list_type(&xq, ctx)).is_none() {
            return Err(side("trans-simple: the classical free variables of the programs have different types"));
        }
        if !list_type(&yp, ctx).same_space(&list_type(&yq, ctx)) {
            return Err(side("trans-simple: the quantum free variables of the programs have different types"));
        }
        let mut parts = Vec::new();
        if !xp.is_empty() {
            parts.push(cla(eq(tuple(&tag_vars(&xp, 1)), tuple(&tag_vars(&xq, 2)))));
        }
        if !yp.is_empty() {
            parts.push(Pred::Qeq(QSide::plain(tag_vars(&yp, 1)), QSide::plain(tag_vars(&yq, 2))));
        }
        Ok(pand_all(parts))
    }

    fn trans_simple(&self, mid: &Block, ctx: &Context) -> ProverResult<Vec<Goal>> {
        let d = normalize(mid);
        let p_cd = Self::fv_equality(&self.left, &d, ctx)?;
        let p_de = Self::fv_equality(&d, &self.right, ctx)?;
        let p_ce = Self::fv_equality(&self.left, &self.right, ctx)?;
        Ok(vec![
            Goal::Leq(self.pre.clone(), p_ce.clone()),
            Goal::Leq(p_ce, self.post.clone()),
            qrhl(p_cd.clone(), self.left.clone(), d.clone(), p_cd),
            qrhl(p_de.clone(), d, self.right.clone(), p_de),
        ])
    }

    fn trans(&self, a: &TransArgs, ctx: &Context) -> ProverResult<Vec<Goal>> {
        let d = normalize(&a.mid);
        let (c, e) = (&self.left, &self.right);
        let qset = |q: &[VarName]| q.iter().cloned().collect::<BTreeSet<_>>();
        let qu = |b: &[Stmt]| vars_of_kind(&stmt::fv(b, ctx), ctx, true).into_iter().collect::<BTreeSet<_>>();
        if !qu(c).is_subset(&qset(&a.qc)) {
            return Err(side("trans: the quantum variables of the left program are not contained in qc"));
        }
        if !qu(e).is_subset(&qset(&a.qe)) {
            return Err(side("trans: the quantum variables of the right program are not contained in qe"));
        }
        let ev = Evaluator::new(ctx, &[0]);
        let check = |u: &Expr, ok: bool, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(ProverError::Witness(format!("`{u}` is not {what}")))
            }
        };
        check(&a.u_c, ev.is_isometry(&a.u_c), "an isometry")?;
        check(&a.u_d, ev.is_unitary(&a.u_d), "unitary")?;
        check(&a.u_e, ev.is_isometry(&a.u_e), "an isometry")?;
        check(&a.v_c, ev.is_isometry(&a.v_c), "an isometry")?;
        check(&a.v_e, ev.is_isometry(&a.v_e), "an isometry")?;
        let vd_ok = ev.for_all_values(&a.v_d, |v| matches!(v, Value::Op(m) if op_norm_le_one(m)));
        check(&a.v_d, vd_ok, "of norm at most 1")?;

        let cl = |b: &[Stmt]| vars_of_kind(&stmt::fv(b, ctx), ctx, false);
        let (xc, xd) = (cl(c), cl(&d));
        let mut out = Vec::new();
        if !xc.is_empty() {
            out.push(Goal::Ambient {
                expr: implies(a.b_cd.clone(), eq(tuple(&tag_vars(&xc, 1)), tag_expr(&a.e_c, 2, ctx))),
                note: Some("witness e_c".into()),
            });
        }
        if !xd.is_empty() {
            out.push(Goal::Ambient {
                expr: implies(a.b_de.clone(), eq(tuple(&tag_vars(&xd, 2)), tag_expr(&a.e_e, 1, ctx))),
                note: Some("witness e_e".into()),
            });
        }
        let side_eq = |u: &Expr, tu: u8, q: &[VarName], w: &Expr, tw: u8, r: &[VarName]| {
            Pred::Qeq(
                QSide { op: Some(tag_expr(u, tu, ctx)), vars: tag_vars(q, tu) },
                QSide { op: Some(tag_expr(w, tw, ctx)), vars: tag_vars(r, tw) },
            )
        };
        let concl_pre = pand(cla(compose(&a.a_cd, &a.a_de, ctx)?), side_eq(&a.u_c, 1, &a.qc, &a.u_e, 2, &a.qe));
        let concl_post = pand(cla(compose(&a.b_cd, &a.b_de, ctx)?), side_eq(&a.v_c, 1, &a.qc, &a.v_e, 2, &a.qe));
        out.push(Goal::Leq(self.pre.clone(), concl_pre));
        out.push(Goal::Leq(concl_post, self.post.clone()));
        out.push(qrhl(
            pand(cla(a.a_cd.clone()), side_eq(&a.u_c, 1, &a.qc, &a.u_d, 2, &a.qd)),
            c.clone(),
            d.clone(),
            pand(cla(a.b_cd.clone()), side_eq(&a.v_c, 1, &a.qc, &a.v_d, 2, &a.rd)),
        ));
        out.push(qrhl(
            pand(cla(a.a_de.clone()), side_eq(&a.u_d, 1, &a.qd, &a.u_e, 2, &a.qe)),
            d,
            e.clone(),
            pand(cla(a.b_de.clone()), side_eq(&a.v_d, 1, &a.rd, &a.v_e, 2, &a.qe)),
        ));
        Ok(out)
    }

    fn adversary(&self, args: &AdversaryArgs, ctx: &Context) -> ProverResult<Vec<Goal>> {
        let ev = Evaluator::relational(ctx);
        let a = ev.simplify(self.pre);
        if !a.alpha_eq(&ev.simplify(self.post)) {
            return Err(shape("adversary: pre and postcondition must coincide"));
        }
        // Decompose A = Cla[X1=X2] ∩ (Y1W1 ≡ Y2W2) ∩ R.
        let mut eq_vars = Vec::new();
        let mut qlist: Option<Vec<VarName>> = None;
        let mut rest = Vec::new();
        for c in atoms(&a) {
            if let Some(x) = var_equality(&c) {
                eq_vars.push(x);
                continue;
            }
            if qlist.is_none() {
                if let Some(l) = plain_qeq(&c) {
                    qlist = Some(l);
                    continue;
                }
            }
            rest.push(c);
        }
        let qlist = qlist.unwrap_or_default();
        let mut holes = Vec::new();
        let mut context = Vec::new();
        let mut conds = Vec::new();
        find_holes(&self.left, &self.right, &mut context, &mut conds, &mut holes);
        let mut cfv = stmt::fv(&context, ctx);
        for e in &conds {
            cfv.extend(e.fv());
        }

        let (xs, ys) = match &args.vars {
            Some(v) => {
                let set: BTreeSet<VarName> = v.iter().cloned().collect();
                (vars_of_kind(&set, ctx, false), vars_of_kind(&set, ctx, true))
            }
            None => (
                eq_vars.clone(),
                qlist.iter().filter(|q| cfv.contains(q)).cloned().collect(),
            ),
        };
        for x in &xs {
            if !eq_vars.contains(x) {
                return Err(side(format!("adversary: the invariant does not contain `{x}1 = {x}2`")));
            }
        }
        for x in &eq_vars {
            if !xs.contains(x) {
                rest.push(cla(eq(var(&x.with_tag(1)), var(&x.with_tag(2)))));
            }
        }
        let ws: Vec<VarName> = match &args.aux {
            Some(w) => w.clone(),
            None => qlist.iter().filter(|q| !ys.contains(q)).cloned().collect(),
        };
        if ys.iter().any(|y| ws.contains(y)) {
            return Err(side("adversary: Y and W overlap"));
        }
        let yw: BTreeSet<VarName> = ys.iter().chain(&ws).cloned().collect();
        if yw != qlist.iter().cloned().collect() {
            return Err(side("adversary: the quantum equality of the invariant is not over Y and W"));
        }
        let r = pand_all(rest);
        let (xt, z): (BTreeSet<VarName>, BTreeSet<VarName>) = match &args.frame {
            Some(f) => {
                let set: BTreeSet<VarName> = f.iter().cloned().collect();
                let qs: BTreeSet<VarName> = vars_of_kind(&set, ctx, true).into_iter().flat_map(|q| [q.with_tag(1), q.with_tag(2)]).collect();
                (vars_of_kind(&set, ctx, false).into_iter().collect(), qs)
            }
            None => (
                r.fv().iter().filter(|v| v.tag != 0 && ctx.is_classical(&v.base)).map(|v| VarName::plain(&v.base)).collect(),
                r.qvars(),
            ),
        };
        let xy: BTreeSet<VarName> = xs.iter().chain(&ys).cloned().collect();
        if !cfv.is_subset(&xy) {
            let extra: Vec<String> = cfv.difference(&xy).map(|v| v.to_string()).collect();
            return Err(side(format!("adversary: the context is not local to X, Y (uses {})", extra.join(", "))));
        }
        let r_ok = r.fv().iter().all(|v| v.tag == 0 || xt.contains(&VarName::plain(&v.base)) || z.contains(v))
            && r.qvars().iter().all(|v| z.contains(v));
        if !r_ok {
            return Err(side("adversary: the frame R is not local to the frame variables"));
        }
        let written = stmt::written(&context, ctx);
        if let Some(v) = xs.iter().find(|x| xt.contains(*x) && written.contains(*x)) {
            return Err(side(format!("adversary: the context writes `{v}`, which occurs in the frame")));
        }
        if ys.iter().any(|y| z.contains(&y.with_tag(1)) || z.contains(&y.with_tag(2))) {
            return Err(side("adversary: Y overlaps the quantum frame Z"));
        }
        Ok(holes.into_iter().map(|(l, r)| qrhl(a.clone(), l, r, a.clone())).collect())
    }
}

fn side_word(s: Side) -> &'static str {
    match s {
        Side::Left => "left",
        Side::Right => "right",
    }
}

fn expected(s: Side, what: &str, found: &Stmt) -> ProverError {
    shape(format!(
        "expected {what} as the last {} statement, found {} `{found}`",
        side_word(s),
        found.kind_name()
    ))
}

/// `x` when `c` is `Cla[x1 = x2]`.
fn var_equality(c: &Pred) -> Option<VarName> {
    let Pred::Cla(Expr::Bin(BinOp::Eq, a, b)) = c else { return None };
    match (&**a, &**b) {
        (Expr::Var(x), Expr::Var(y)) if x.base == y.base && x.tag == 1 && y.tag == 2 => {
            Some(VarName::plain(&x.base))
        }
        _ => None,
    }
}

/// The untagged list `Q` when `c` is `Q1 ≡ Q2` without operators.
fn plain_qeq(c: &Pred) -> Option<Vec<VarName>> {
    let Pred::Qeq(l, r) = c else { return None };
    if l.op.is_some() || r.op.is_some() || l.vars.len() != r.vars.len() {
        return None;
    }
    l.vars
        .iter()
        .zip(&r.vars)
        .map(|(a, b)| (a.tag == 1 && b.tag == 2 && a.base == b.base).then(|| VarName::plain(&a.base)))
        .collect()
}

/// Splits two programs into a common context and the differing holes.
fn find_holes(l: &[Stmt], r: &[Stmt], context: &mut Block, conds: &mut Vec<Expr>, holes: &mut Vec<(Block, Block)>) {
    let mut p = 0;
    while p < l.len() && p < r.len() && l[p] == r[p] {
        p += 1;
    }
    let mut s = 0;
    while s < l.len() - p && s < r.len() - p && l[l.len() - 1 - s] == r[r.len() - 1 - s] {
        s += 1;
    }
    context.extend(l[..p].iter().cloned());
    context.extend(l[l.len() - s..].iter().cloned());
    let (lm, rm) = (&l[p..l.len() - s], &r[p..r.len() - s]);
    if lm.is_empty() && rm.is_empty() {
        return;
    }
    match (lm, rm) {
        ([Stmt::If(e1, a1, b1)], [Stmt::If(e2, a2, b2)]) if e1 == e2 => {
            conds.push(e1.clone());
            find_holes(a1, a2, context, conds, holes);
            find_holes(b1, b2, context, conds, holes);
        }
        ([Stmt::While(e1, a1)], [Stmt::While(e2, a2)]) if e1 == e2 => {
            conds.push(e1.clone());
            find_holes(a1, a2, context, conds, holes);
        }
        _ => holes.push((lm.to_vec(), rm.to_vec())),
    }
}

/// `e ∘ f`: `∃ m. e[m/V2] ∧ f[m/V1]` over a tuple of all classical variables.
fn compose(e: &Expr, f: &Expr, ctx: &Context) -> ProverResult<Expr> {
    let xs: Vec<(VarName, Type)> = ctx.classical_list(0);
    let ty = Type::product(xs.iter().map(|(_, t)| t.clone()).collect());
    let mut avoid = e.fv();
    avoid.extend(f.fv());
    let m = fresh("m", &avoid, ctx);
    let comp = |i: usize| if xs.len() == 1 { var(&m) } else { proj(var(&m), i) };
    let e2: BTreeMap<VarName, Expr> = xs.iter().enumerate().map(|(i, (x, _))| (x.with_tag(2), comp(i))).collect();
    let f1: BTreeMap<VarName, Expr> = xs.iter().enumerate().map(|(i, (x, _))| (x.with_tag(1), comp(i))).collect();
    Ok(Expr::Quant(Quant::Exists, m, Domain::Type(ty), Box::new(and(e.subst(&e2), f.subst(&f1)))))
}

/// `None` when the loop terminates with probability one from every state;
/// otherwise a note explaining why totality could not be established.
fn loop_not_total(w: &Stmt, ctx: &Context) -> ProverResult<Option<String>> {
    let block = vec![w.clone()];
    let mems = match all_memories(ctx) {
        Ok(m) => m,
        Err(_) => return Ok(Some("loop totality not checked: too many memories".into())),
    };
    if stmt::is_classical(&block) {
        for m in mems {
            let out = match denot_classical(&block, &delta(m), ctx) {
                Ok(o) => o,
                Err(_) => return Ok(Some("loop does not terminate within the iteration bound".into())),
            };
            if out.values().sum::<f64>() < 1.0 - TOTALITY_TOL {
                return Ok(Some("loop is not total".into()));
            }
        }
        return Ok(None);
    }
    let d = crate::semantics::space(ctx).dim();
    if mems.len().saturating_mul(d * d) > TOTALITY_RUNS {
        return Ok(Some("loop totality not checked: state space too large".into()));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let basis = |i: usize| crate::linalg::basis_vector::<f64>(d, i);
    let mut inputs = Vec::new();
    for i in 0..d {
        inputs.push(basis(i));
        for j in i + 1..d {
            let (bi, bj) = (basis(i), basis(j));
            inputs.push(bi.iter().zip(&bj).map(|(a, b)| (a + b) * s).collect::<Vec<_>>());
            inputs.push(
                bi.iter()
                    .zip(&bj)
                    .map(|(a, b)| (a + b * crate::Complex::new(0.0, 1.0)) * s)
                    .collect(),
            );
        }
    }
    for m in mems {
        for v in &inputs {
            let rho = point_state(ctx, m.clone(), pure(v))?;
            match denot(&block, &rho, ctx) {
                Ok(out) if out.trace() >= 1.0 - TOTALITY_TOL => {}
                Ok(_) => return Ok(Some("loop is not total".into())),
                Err(_) => return Ok(Some("loop does not terminate within the iteration bound".into())),
            }
        }
    }
    Ok(None)
}

// ---- elimeq ----

struct ElimEq<'a> {
    vars: &'a [VarName],
    quantum: &'a [VarName],
    pre: Option<&'a Pred>,
}

impl ElimEq<'_> {
    #[allow(clippy::too_many_arguments)]
    fn apply(
        &self,
        ctx: &Context,
        inits: &BTreeMap<String, State>,
        e: &Expr,
        c: &Block,
        f: &Expr,
        d: &Block,
        rho: Option<&str>,
        rel: Rel,
    ) -> ProverResult<Vec<Goal>> {
        let xs: BTreeSet<VarName> = self.vars.iter().cloned().collect();
        let ys: BTreeSet<VarName> = self.quantum.iter().cloned().collect();
        if let Some(v) = xs.iter().find(|v| !ctx.is_classical(&v.base)) {
            return Err(shape(format!("elimeq: `{v}` is not a classical variable")));
        }
        if let Some(v) = ys.iter().find(|v| !ctx.is_quantum(&v.base)) {
            return Err(shape(format!("elimeq: `{v}` is not a quantum variable")));
        }
        let xy: BTreeSet<VarName> = xs.union(&ys).cloned().collect();
        for (b, name) in [(c, "left"), (d, "right")] {
            if !stmt::is_local(b, &xy, ctx) {
                let extra: Vec<String> = stmt::fv(b, ctx).difference(&xy).map(|v| v.to_string()).collect();
                return Err(side(format!(
                    "elimeq: the {name} program is not local to the given variables (also uses {})",
                    extra.join(", ")
                )));
            }
        }
        let mut parts = vec![equality_pred(self.vars, self.quantum)];
        if let Some(a) = self.pre {
            if !a.qvars().iter().all(|q| ys.contains(&VarName::plain(&q.base))) {
                return Err(side("elimeq: the precondition mentions quantum variables outside Y"));
            }
            let Some(name) = rho else {
                return Err(side("elimeq: a precondition needs a goal with a named initial state"));
            };
            let state = inits.get(name).ok_or_else(|| shape(format!("unknown initial state `{name}`")))?;
            let ev = Evaluator::new(ctx, &[0]);
            if !satisfies(&ev, state, a, |m| memory_env(ctx, &[0], m))? {
                return Err(side(format!("elimeq: the initial state `{name}` does not satisfy {a}")));
            }
            parts.push(a.idx(1, ctx));
            parts.push(a.idx(2, ctx));
        }
        let (e1, f2) = (tag_expr(e, 1, ctx), tag_expr(f, 2, ctx));
        let post = match rel {
            Rel::Eq => bin(BinOp::Iff, e1, f2),
            Rel::Le => implies(e1, f2),
            Rel::Ge => implies(f2, e1),
        };
        Ok(vec![qrhl(pand_all(parts), c.clone(), d.clone(), cla(post))])
    }
}
