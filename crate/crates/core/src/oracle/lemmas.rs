//! Identity suites over random small instances.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lang::expr::{bin, var, BinOp};
use crate::lang::value::Mat;
use crate::lang::{Context, Expr, Type, Value, VarKind, VarName};
use crate::linalg::{dot, kron_vec, norm, normalize, orthonormalize, scale, sub, svd, Matrix};
use crate::predicates::{
    cl_simps, no_env, pand, pred_equiv, pred_leq, psum, qeq_inside, qeq_move, qeq_span, quanteqaddstate,
    spacediv_leq, Evaluator, Pred, QSide,
};
use crate::registers::{LabeledVector, Reg, Space};

use super::{Check, Report};

/// Subspace equality tolerance of the identity checks.
pub const LEMMA_TOL: f64 = 1e-9;

/// Singular values below this count as zero; the decomposition goes
/// through `A A†`, so noise sits near the square root of machine precision.
const RANK_TOL: f64 = 1e-6;

pub type Rng8 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng8 {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---- random instances ----

pub fn random_vector(rng: &mut Rng8, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
}

pub fn random_unit(rng: &mut Rng8, n: usize) -> Vec<Complex64> {
    loop {
        if let Some(v) = normalize(&random_vector(rng, n)) {
            return v;
        }
    }
}

pub fn random_matrix(rng: &mut Rng8, rows: usize, cols: usize) -> Mat {
    let cols: Vec<Vec<Complex64>> = (0..cols).map(|_| random_vector(rng, rows)).collect();
    Matrix::from_columns(rows, &cols)
}

/// Isometry `ℓ2(from) → ℓ2(to)` with `from <= to`.
pub fn random_isometry(rng: &mut Rng8, from: usize, to: usize) -> Mat {
    assert!(from <= to, "isometry from dimension {from} into {to}");
    loop {
        let cols: Vec<Vec<Complex64>> = (0..from).map(|_| random_vector(rng, to)).collect();
        let q = orthonormalize(&cols, 1e-6);
        if q.len() == from {
            return Matrix::from_columns(to, &q);
        }
    }
}

pub fn random_unitary(rng: &mut Rng8, n: usize) -> Mat {
    random_isometry(rng, n, n)
}

pub fn lit_op(m: Mat) -> Expr {
    Expr::Lit(Value::Op(Arc::new(m)))
}

pub fn lit_vec(v: Vec<Complex64>) -> Expr {
    Expr::Lit(Value::Vector(Arc::new(v)))
}

/// A context with the given quantum variables.
fn quantum_ctx(vars: &[(&str, usize)]) -> Context {
    let mut ctx = Context::default();
    for (name, d) in vars {
        ctx.add_var(name, Type::Int(*d as u64), VarKind::Quantum).expect("fresh variable");
    }
    ctx
}

fn tagged(name: &str, tag: u8) -> VarName {
    VarName::new(name, tag)
}

fn regs(ctx: &Context, vs: &[&VarName]) -> Vec<Reg> {
    vs.iter().map(|v| ctx.reg(v).expect("declared")).collect()
}

fn evaluator<'a>(ctx: &'a Context, vs: &[&VarName]) -> Evaluator<'a> {
    let mut ev = Evaluator::on_space(ctx, Space::new(regs(ctx, vs)).expect("distinct registers"));
    ev.eps = LEMMA_TOL;
    ev
}

fn dim(rng: &mut Rng8) -> usize {
    rng.gen_range(2..=3)
}

/// Compares `⟦a⟧` and `⟦b⟧`; `Err` carries the failure message.
fn same_subspace(ev: &Evaluator, a: &Pred, b: &Pred) -> Result<(), String> {
    let sa = ev.eval(a, &no_env()).map_err(|e| format!("{a}: {e}"))?;
    let sb = ev.eval(b, &no_env()).map_err(|e| format!("{b}: {e}"))?;
    match sa.equals(&sb, LEMMA_TOL) {
        Ok(true) => Ok(()),
        Ok(false) => Err(format!("{a}  (dim {})  !=  {b}  (dim {})", sa.dim(), sb.dim())),
        Err(e) => Err(e.to_string()),
    }
}

fn run(name: &str, trials: usize, mut trial: impl FnMut(&mut Check) -> Result<(), String>) -> Check {
    let mut c = Check::new(name);
    for _ in 0..trials {
        c.trials += 1;
        if let Err(m) = trial(&mut c) {
            c.failures.push(m);
        }
    }
    c
}

// ---- fixed vectors ----

pub const PROJ_VECTORS: [[f64; 3]; 6] =
    [[0.0, 1.0, 2.0], [2.0, 1.0, 0.0], [1.0, 1.0, 1.0], [1.0, 2.0, 3.0], [3.0, 2.0, 1.0], [3.0, 4.0, 5.0]];
pub const PROJ_ALPHA: [f64; 6] = [25.0, -15.0, -162.0, -147.0, 49.0, 250.0];
pub const PROJ_P: [f64; 3] = [1.0, 1.0, 0.0];

fn proj(v: &[Complex64]) -> Mat {
    Matrix::outer(v, v)
}

/// `M1 = Σ αᵢ |ψᵢ⟩⟨ψᵢ| ⊗ |ψᵢ⟩⟨ψᵢ|` and
/// `M2 = Σ αᵢ |Pψᵢ⟩⟨Pψᵢ| ⊗ |Pψᵢ⟩⟨Pψᵢ| / ‖Pψᵢ‖²` for the normalized `ψᵢ`.
pub fn projection_matrices() -> (Mat, Mat) {
    let mut m1 = Matrix::zeros(9, 9);
    let mut m2 = Matrix::zeros(9, 9);
    for (v, a) in PROJ_VECTORS.iter().zip(PROJ_ALPHA) {
        let raw: Vec<Complex64> = v.iter().map(|x| Complex64::new(*x, 0.0)).collect();
        let psi = normalize(&raw).expect("nonzero vector");
        let ppsi: Vec<Complex64> = psi.iter().zip(PROJ_P).map(|(x, p)| x * p).collect();
        let n2 = norm(&ppsi).powi(2);
        let t1 = proj(&psi).kron(&proj(&psi)).scale_real(a);
        let t2 = proj(&ppsi).kron(&proj(&ppsi)).scale_real(a / n2);
        m1 = &m1 + &t1;
        m2 = &m2 + &t2;
    }
    (m1, m2)
}

pub fn check_projection() -> Check {
    let mut c = Check::new("projection.counterexample");
    c.trials = 1;
    c.exercised = 1;
    let (m1, m2) = projection_matrices();
    if m1.frobenius() > 1e-9 {
        c.failures.push(format!("first combination has norm {:e}", m1.frobenius()));
    }
    if m2.frobenius() < 1e-6 {
        c.failures.push(format!("second combination has norm {:e}", m2.frobenius()));
    }
    c
}

// ---- bipartite vectors ----

/// `v` over `ℓ2(da) ⊗ ℓ2(db)` as a `da × db` matrix.
fn reshape(v: &[Complex64], da: usize, db: usize) -> Mat {
    Matrix::from_fn(da, db, |i, j| v[i * db + j])
}

/// Terms `(λ, a, b)` with `v = Σ λ a ⊗ b`, orthonormal `a`s and `b`s.
pub fn schmidt(v: &[Complex64], da: usize, db: usize, eps: f64) -> Vec<(f64, Vec<Complex64>, Vec<Complex64>)> {
    svd(&reshape(v, da, db), eps)
        .into_iter()
        .map(|(s, u, w)| (s, u, w.iter().map(|x| x.conj()).collect()))
        .collect()
}

fn orthonormal(vs: &[&Vec<Complex64>]) -> bool {
    vs.iter().enumerate().all(|(i, a)| {
        vs.iter().enumerate().all(|(j, b)| {
            let want = if i == j { 1.0 } else { 0.0 };
            (dot(a, b) - Complex64::new(want, 0.0)).norm() <= 1e-9
        })
    })
}

pub fn check_schmidt(rng: &mut Rng8, trials: usize) -> Check {
    run("schmidt", trials, |c| {
        let (da, db) = (dim(rng), dim(rng));
        let v = random_unit(rng, da * db);
        let terms = schmidt(&v, da, db, RANK_TOL);
        let mut rebuilt = vec![Complex64::new(0.0, 0.0); da * db];
        for (l, a, b) in &terms {
            rebuilt = crate::linalg::add(&rebuilt, &scale(&kron_vec(a, b), Complex64::new(*l, 0.0)));
        }
        c.exercised += 1;
        let err = norm(&sub(&rebuilt, &v));
        let mass: f64 = terms.iter().map(|t| t.0 * t.0).sum();
        let a_s: Vec<&Vec<Complex64>> = terms.iter().map(|t| &t.1).collect();
        let b_s: Vec<&Vec<Complex64>> = terms.iter().map(|t| &t.2).collect();
        if err > 1e-9 || (mass - 1.0).abs() > 1e-9 || !orthonormal(&a_s) || !orthonormal(&b_s) {
            return Err(format!("{da}x{db} vector {v:?}: reconstruction error {err:e}, mass {mass}"));
        }
        Ok(())
    })
}

/// `ψ ⊗ ψ′ = φ ⊗ φ′ ≠ 0` determines the factors up to a scalar: the
/// factors recovered from the product are collinear with the originals.
pub fn check_tensor_cancel(rng: &mut Rng8, trials: usize) -> Check {
    run("tensor-cancel", trials, |c| {
        let (da, db) = (dim(rng), dim(rng));
        let (psi, psi2) = (random_vector(rng, da), random_vector(rng, db));
        let w = kron_vec(&psi, &psi2);
        let terms = schmidt(&w, da, db, RANK_TOL);
        if terms.len() != 1 {
            return Err(format!("product vector has Schmidt rank {}", terms.len()));
        }
        c.exercised += 1;
        let (l, a, b) = &terms[0];
        let phi = scale(a, Complex64::new(*l, 0.0));
        let phi2 = b.clone();
        if norm(&sub(&kron_vec(&phi, &phi2), &w)) > 1e-9 {
            return Err("recovered factors do not multiply back".into());
        }
        let k = dot(&phi, &psi) / Complex64::new(norm(&phi).powi(2), 0.0);
        let ok1 = norm(&sub(&psi, &scale(&phi, k))) <= 1e-9;
        let ok2 = norm(&sub(&psi2, &scale(&phi2, k.inv()))) <= 1e-9;
        if !(ok1 && ok2) {
            return Err(format!("factors of {psi:?} ⊗ {psi2:?} are not determined up to a scalar"));
        }
        Ok(())
    })
}

// ---- quantum equality ----

/// `dim ⟦q1 ≡ q2⟧` over two `n`-dimensional registers.
pub fn qeq_dimension(n: usize) -> usize {
    let ctx = quantum_ctx(&[("q", n)]);
    let (q1, q2) = (tagged("q", 1), tagged("q", 2));
    let ev = evaluator(&ctx, &[&q1, &q2]);
    let p = crate::predicates::qeq(vec![q1], vec![q2]);
    ev.eval(&p, &no_env()).map(|s| s.dim()).unwrap_or(usize::MAX)
}

pub fn check_qeq_dimension() -> Check {
    let mut c = Check::new("qeq-dimension");
    for n in [2, 3] {
        c.trials += 1;
        c.exercised += 1;
        let d = qeq_dimension(n);
        if d != n * (n + 1) / 2 {
            c.failures.push(format!("n = {n}: dimension {d}, expected {}", n * (n + 1) / 2));
        }
    }
    c
}

/// Membership of `ψ1 ⊗ ψ2` in `U1 q1 ≡ U2 q2` against the factorization
/// criterion, for isometric `U1`, `U2`, on random positive and negative
/// instances.
pub fn check_quanteq(rng: &mut Rng8, trials: usize) -> Check {
    run("quanteq", trials, |c| {
        let d = dim(rng);
        let dy = 2;
        let z = rng.gen_range(d..=3);
        let ctx = quantum_ctx(&[("q", d), ("y", dy)]);
        let (q1, y1, q2, y2) = (tagged("q", 1), tagged("y", 1), tagged("q", 2), tagged("y", 2));
        let ev = evaluator(&ctx, &[&q1, &y1, &q2, &y2]);
        let u1 = random_isometry(rng, d, z);
        let kind = rng.gen_range(0..4);
        let v = random_unitary(rng, d);
        let u2 = if kind == 3 { random_isometry(rng, d, z) } else { u1.matmul(&v) };
        let a = random_unit(rng, d);
        let b = match kind {
            0 => v.adjoint().apply(&a),
            _ => random_unit(rng, d),
        };
        let psi1 = match kind {
            2 => random_unit(rng, d * dy),
            _ => kron_vec(&a, &random_unit(rng, dy)),
        };
        let psi2 = kron_vec(&b, &random_unit(rng, dy));

        let pred = Pred::Qeq(
            QSide { op: Some(lit_op(u1.clone())), vars: vec![q1.clone()] },
            QSide { op: Some(lit_op(u2.clone())), vars: vec![q2.clone()] },
        );
        let sub_space = ev.eval(&pred, &no_env()).map_err(|e| e.to_string())?;
        let lv1 = LabeledVector::on_list(&regs(&ctx, &[&q1, &y1]), &psi1).map_err(|e| e.to_string())?;
        let lv2 = LabeledVector::on_list(&regs(&ctx, &[&q2, &y2]), &psi2).map_err(|e| e.to_string())?;
        let both = lv1.tensor(&lv2).map_err(|e| e.to_string())?;
        if both.space != *sub_space.space() {
            return Err("register order mismatch".into());
        }
        let member = sub_space.residual(&both.amps) <= LEMMA_TOL;

        let factor = |psi: &[Complex64]| {
            let t = schmidt(psi, d, dy, RANK_TOL);
            (t.len() == 1).then(|| t[0].1.clone())
        };
        let factorizes = match (factor(&psi1), factor(&psi2)) {
            (Some(fa), Some(fb)) => dot(&u1.apply(&fa), &u2.apply(&fb)).norm() >= 1.0 - 1e-9,
            _ => false,
        };
        if member {
            c.exercised += 1;
        }
        if member != factorizes {
            return Err(format!("kind {kind}, d = {d}, z = {z}: membership {member}, factorization {factorizes}"));
        }
        Ok(())
    })
}

// ---- simplification identities ----

pub fn check_qeq_move(rng: &mut Rng8, trials: usize) -> Check {
    run("qeq.move", trials, |c| {
        let (da, db) = (dim(rng), dim(rng));
        let (y, z) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
        let ctx = quantum_ctx(&[("a", da), ("b", db)]);
        let (a1, b2) = (tagged("a", 1), tagged("b", 2));
        let ev = evaluator(&ctx, &[&a1, &b2]);
        let u1 = random_matrix(rng, y, da);
        let f = random_matrix(rng, z, y);
        let u2 = if z == db && rng.gen_bool(0.3) { None } else { Some(lit_op(random_matrix(rng, z, db))) };
        let p = Pred::Qeq(
            QSide { op: Some(bin(BinOp::Mul, lit_op(f), lit_op(u1))), vars: vec![a1] },
            QSide { op: u2, vars: vec![b2] },
        );
        let q = qeq_move(&p).ok_or_else(|| format!("qeq.move does not apply to {p}"))?;
        c.exercised += 1;
        same_subspace(&ev, &p, &q)
    })
}

pub fn check_qeq_inside(rng: &mut Rng8, trials: usize) -> Check {
    run("qeq.inside", trials, |c| {
        let (da, db, dc) = (dim(rng), dim(rng), dim(rng));
        let z = rng.gen_range(1..=3);
        let ctx = quantum_ctx(&[("a", da), ("b", db), ("c", dc)]);
        let (a1, b1, c2) = (tagged("a", 1), tagged("b", 1), tagged("c", 2));
        let ev = evaluator(&ctx, &[&a1, &b1, &c2]);
        let u1 = lit_op(random_matrix(rng, z, da * db));
        let u2 = lit_op(random_matrix(rng, z, dc));
        let (target, d) = match rng.gen_range(0..4) {
            0 => (vec![a1.clone()], da),
            1 => (vec![b1.clone()], db),
            2 => (vec![a1.clone(), b1.clone()], da * db),
            _ => (vec![c2.clone()], dc),
        };
        let a = lit_op(random_unitary(rng, d));
        let p = Pred::Apply(
            a,
            target,
            Box::new(Pred::Qeq(
                QSide { op: Some(u1), vars: vec![a1, b1] },
                QSide { op: Some(u2), vars: vec![c2] },
            )),
        );
        let q = qeq_inside(&ev, &p).ok_or_else(|| format!("qeq.inside does not apply to {p}"))?;
        c.exercised += 1;
        same_subspace(&ev, &p, &q)
    })
}

pub fn check_qeq_span(rng: &mut Rng8, trials: usize) -> Check {
    run("qeq.span", trials, |c| {
        let dt = dim(rng);
        let dother = rng.gen_range(dt..=3);
        let z = rng.gen_range(dt..=dother);
        let span_left = rng.gen_bool(0.5);
        let (nt, no) = if span_left { (("a", 1), ("b", 2)) } else { (("b", 2), ("a", 1)) };
        let ctx = quantum_ctx(&[(nt.0, dt), (no.0, dother)]);
        let (this, other) = (tagged(nt.0, nt.1), tagged(no.0, no.1));
        let ev = evaluator(&ctx, &[&this, &other]);
        let ut = if z == dt && rng.gen_bool(0.3) { None } else { Some(lit_op(random_isometry(rng, dt, z))) };
        let uo = if z == dother && rng.gen_bool(0.3) {
            None
        } else {
            Some(lit_op(random_isometry(rng, z, dother).adjoint()))
        };
        let psi = lit_vec(random_vector(rng, dt));
        let st = QSide { op: ut, vars: vec![this.clone()] };
        let so = QSide { op: uo, vars: vec![other] };
        let eq = if span_left { Pred::Qeq(st, so) } else { Pred::Qeq(so, st) };
        let p = pand(eq, Pred::Span(psi, vec![this]));
        let q = qeq_span(&ev, &p).ok_or_else(|| format!("qeq.span does not apply to {p}"))?;
        c.exercised += 1;
        same_subspace(&ev, &p, &q)
    })
}

pub fn check_quanteqaddstate(rng: &mut Rng8, trials: usize) -> Check {
    run("quanteqaddstate", trials, |c| {
        let (da, db, dc) = (dim(rng), dim(rng), dim(rng));
        let z = rng.gen_range(1..=3);
        let ctx = quantum_ctx(&[("a", da), ("b", db), ("c", dc)]);
        let r = tagged("c", rng.gen_range(1..=2));
        let (a1, b2) = (tagged("a", 1), tagged("b", 2));
        let ev = evaluator(&ctx, &[&a1, &b2, &r]);
        let u1 = Some(lit_op(random_matrix(rng, z, da)));
        let u2 = Some(lit_op(random_matrix(rng, z, db)));
        let psi = lit_vec(random_unit(rng, dc));
        let p = pand(
            Pred::Qeq(QSide { op: u1, vars: vec![a1] }, QSide { op: u2, vars: vec![b2] }),
            Pred::Span(psi, vec![r]),
        );
        let q = quanteqaddstate(&ev, &p).ok_or_else(|| format!("quanteqaddstate does not apply to {p}"))?;
        c.exercised += 1;
        same_subspace(&ev, &p, &q)
    })
}

pub fn check_spacediv_leq(rng: &mut Rng8, trials: usize) -> Check {
    run("spacediv.leq", trials, |c| {
        let (dx, dq) = (dim(rng), dim(rng));
        let ctx = quantum_ctx(&[("x", dx), ("q", dq)]);
        let (x1, q1) = (tagged("x", 1), tagged("q", 1));
        let ev = evaluator(&ctx, &[&x1, &q1]);
        let a = match rng.gen_range(0..4) {
            0 => Pred::Span(lit_vec(random_vector(rng, dx)), vec![x1.clone()]),
            1 => {
                let k = rng.gen_range(1..=dx);
                Pred::Im(lit_op(random_matrix(rng, dx, k)), vec![x1.clone()])
            }
            2 => Pred::Top,
            _ => Pred::Bot,
        };
        let psi = if rng.gen_bool(0.1) { vec![Complex64::new(0.0, 0.0); dq] } else { random_vector(rng, dq) };
        let both = vec![x1.clone(), q1.clone()];
        let extra = |rng: &mut Rng8, k: usize| Pred::Im(lit_op(random_matrix(rng, dx * dq, k)), both.clone());
        let b = match rng.gen_range(0..4) {
            0 | 1 => psum(pand(a.clone(), Pred::Span(lit_vec(psi.clone()), vec![q1.clone()])), extra(rng, 1)),
            2 => {
                let k = rng.gen_range(1..=dx * dq);
                extra(rng, k)
            }
            _ => Pred::Span(lit_vec(psi.clone()), vec![q1.clone()]),
        };
        let div = Pred::Div(Box::new(b), lit_vec(psi), vec![q1]);
        let (l2, r2) = spacediv_leq(&a, &div).ok_or_else(|| format!("spacediv.leq does not apply to {a} <= {div}"))?;
        let lhs = pred_leq(&ev, &a, &div).map_err(|e| e.to_string())?;
        let rhs = pred_leq(&ev, &l2, &r2).map_err(|e| e.to_string())?;
        c.exercised += 1;
        if lhs != rhs {
            return Err(format!("{a} <= {div} is {lhs} but {l2} <= {r2} is {rhs}"));
        }
        Ok(())
    })
}

pub fn check_cl_simps(rng: &mut Rng8, trials: usize) -> Check {
    let mut ctx = Context::default();
    ctx.add_var("x", Type::Int(3), VarKind::Classical).expect("fresh");
    ctx.add_var("y", crate::lang::types::BIT, VarKind::Classical).expect("fresh");
    ctx.add_var("q", crate::lang::types::BIT, VarKind::Quantum).expect("fresh");
    let mut ev = Evaluator::relational(&ctx);
    ev.eps = LEMMA_TOL;
    let (x1, x2, y1, y2) = (tagged("x", 1), tagged("x", 2), tagged("y", 1), tagged("y", 2));
    let z = VarName::plain("k");
    let atom = |rng: &mut Rng8, with_z: bool| -> Expr {
        let x = if rng.gen_bool(0.5) { &x1 } else { &x2 };
        let y = if rng.gen_bool(0.5) { &y1 } else { &y2 };
        let k3 = Expr::Lit(Value::int(rng.gen_range(0..3), 3));
        let k2 = Expr::Lit(Value::bit(rng.gen_range(0..2)));
        let choice = rng.gen_range(0..if with_z { 7 } else { 5 });
        match choice {
            0 => bin(BinOp::Eq, var(x), k3),
            1 => bin(BinOp::Neq, var(x), k3),
            2 => bin(BinOp::Eq, var(y), k2),
            3 => bin(BinOp::Eq, var(&x1), var(&x2)),
            4 => bin(BinOp::Neq, var(&y1), var(&y2)),
            5 => bin(BinOp::Neq, var(&z), var(x)),
            _ => bin(BinOp::Or, bin(BinOp::Eq, var(&z), k3), bin(BinOp::Eq, var(y), k2)),
        }
    };
    let expr = |rng: &mut Rng8, with_z: bool| -> Expr {
        let a = atom(rng, with_z);
        match rng.gen_range(0..3) {
            0 => a,
            1 => bin(BinOp::And, a, atom(rng, with_z)),
            _ => bin(BinOp::Or, a, atom(rng, with_z)),
        }
    };
    run("cl.simps", trials, |c| {
        let p = match rng.gen_range(0..4) {
            0 => pand(Pred::Cla(expr(rng, false)), Pred::Cla(expr(rng, false))),
            1 => psum(Pred::Cla(expr(rng, false)), Pred::Cla(expr(rng, false))),
            2 => crate::predicates::ortho(Pred::Cla(expr(rng, false))),
            _ => Pred::Inf(
                z.clone(),
                crate::lang::expr::Domain::Type(Type::Int(3)),
                Box::new(Pred::Cla(expr(rng, true))),
            ),
        };
        let q = cl_simps(&p).ok_or_else(|| format!("cl.simps does not apply to {p}"))?;
        c.exercised += 1;
        match pred_equiv(&ev, &p, &q) {
            Ok(true) => Ok(()),
            Ok(false) => Err(format!("{p}  !=  {q}")),
            Err(e) => Err(format!("{p}: {e}")),
        }
    })
}

/// Names of the simplification identities, in suite order.
pub const SIMPLIFICATION_CHECKS: &[&str] =
    &["qeq.move", "qeq.inside", "qeq.span", "quanteqaddstate", "spacediv.leq", "cl.simps"];

/// One simplification identity by name.
pub fn simplification_check(name: &str, rng: &mut Rng8, trials: usize) -> Option<Check> {
    Some(match name {
        "qeq.move" => check_qeq_move(rng, trials),
        "qeq.inside" => check_qeq_inside(rng, trials),
        "qeq.span" => check_qeq_span(rng, trials),
        "quanteqaddstate" => check_quanteqaddstate(rng, trials),
        "spacediv.leq" => check_spacediv_leq(rng, trials),
        "cl.simps" => check_cl_simps(rng, trials),
        _ => return None,
    })
}

/// Every identity check: `trials` random instances each plus the fixed
/// vectors.
pub fn lemma_suite(seed: u64, trials: usize) -> Report {
    let mut r = rng(seed);
    let mut checks = vec![
        check_projection(),
        check_qeq_dimension(),
        check_schmidt(&mut r, trials),
        check_tensor_cancel(&mut r, trials),
        check_quanteq(&mut r, trials),
        super::semantic::check_classical_lift(&mut r, trials),
        super::semantic::check_locality(&mut r, trials),
    ];
    for name in SIMPLIFICATION_CHECKS {
        checks.extend(simplification_check(name, &mut r, trials));
    }
    Report { suite: "lemmas".into(), checks }
}
