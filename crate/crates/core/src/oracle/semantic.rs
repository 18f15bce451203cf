//! Properties of the denotational semantics on random programs: agreement
//! of the quantum and classical semantics on classical programs, and
//! locality.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::lang::parser::parse_program;
use crate::lang::types::BIT;
use crate::lang::value::Mat;
use crate::lang::{Context, VarKind};
use crate::linalg::Matrix;
use crate::semantics::{all_memories, denot, denot_classical, qlift, ClassicalDistr, State};

use super::lemmas::{random_matrix, Rng8};
use super::Check;

/// Blockwise tolerance of the semantic checks.
pub const SEM_TOL: f64 = 1e-9;

const BITS: &[&str] = &["x", "y", "z"];
const VALUES: &[&str] = &["0", "1", "x", "y xor z", "x xor 1", "if x = y then z else 1"];
const SAMPLES: &[&str] = &["uniform(bit)", "distr{0 -> 1/3, 1 -> 2/3}", "distr{1 -> 1/2}"];
const CONDS: &[&str] = &["x = 1", "x = y", "z != y", "true"];
const LOOPS: &[&str] = &[
    "while (x = 1) { x <$ uniform(bit); }",
    "while (y != z) { y <- z; }",
    "while (x = 0 && y = 0) { x <$ distr{0 -> 1/2, 1 -> 1/4}; y <$ uniform(bit); }",
];

fn random_classical(rng: &mut Rng8, len: usize, depth: usize) -> String {
    let mut out = Vec::new();
    for _ in 0..len {
        let x = BITS.choose(rng).expect("nonempty");
        out.push(match rng.gen_range(0..10) {
            0..=3 => format!("{x} <- {};", VALUES.choose(rng).expect("nonempty")),
            4..=6 => format!("{x} <$ {};", SAMPLES.choose(rng).expect("nonempty")),
            7 | 8 if depth > 0 => {
                let cond = CONDS.choose(rng).expect("nonempty");
                let (n1, n2) = (rng.gen_range(0..=2), rng.gen_range(0..=2));
                let a = random_classical(rng, n1, depth - 1);
                let b = random_classical(rng, n2, depth - 1);
                format!("if ({cond}) {{ {a} }} else {{ {b} }}")
            }
            _ => LOOPS.choose(rng).expect("nonempty").to_string(),
        });
    }
    out.join(" ")
}

fn random_distr(rng: &mut Rng8, ctx: &Context) -> ClassicalDistr {
    let mems = all_memories(ctx).expect("small");
    let ws: Vec<f64> = mems.iter().map(|_| if rng.gen_bool(0.3) { 0.0 } else { rng.gen::<f64>() }).collect();
    let total: f64 = ws.iter().sum::<f64>().max(1e-3);
    mems.into_iter().zip(ws).filter(|(_, w)| *w > 0.0).map(|(m, w)| (m, w / total)).collect()
}

/// Density operator `A A† / tr(A A†)`.
pub fn random_density(rng: &mut Rng8, n: usize) -> Mat {
    let a = random_matrix(rng, n, n);
    let rho = a.matmul(&a.adjoint());
    let t = rho.trace().re;
    rho.scale_real(1.0 / t)
}

/// Largest Frobenius distance between corresponding blocks.
pub fn state_distance(a: &State, b: &State) -> f64 {
    let zero = Matrix::zeros(a.space.dim(), a.space.dim());
    a.blocks
        .keys()
        .chain(b.blocks.keys())
        .map(|k| {
            let x = a.blocks.get(k).unwrap_or(&zero);
            let y = b.blocks.get(k).unwrap_or(&zero);
            x.dist(y)
        })
        .fold(0.0, f64::max)
}

/// `denot(c, ⟨μ⟩ ⊗ σ) = ⟨denot_classical(c, μ)⟩ ⊗ σ` on random classical
/// programs of up to six statements over three bits, with a qubit along.
pub fn check_classical_lift(rng: &mut Rng8, trials: usize) -> Check {
    let mut ctx = Context::default();
    for x in BITS {
        ctx.add_var(x, BIT, VarKind::Classical).expect("fresh");
    }
    ctx.add_var("q", BIT, VarKind::Quantum).expect("fresh");
    let mut check = Check::new("classical.lift");
    for _ in 0..trials {
        check.trials += 1;
        let len = rng.gen_range(1..=6);
        let src = random_classical(rng, len, 1);
        let prog = match parse_program(&src, &ctx) {
            Ok(p) => p,
            Err(e) => {
                check.failures.push(format!("`{src}` does not parse: {e}"));
                continue;
            }
        };
        let mu = random_distr(rng, &ctx);
        let sigma = random_density(rng, 2);
        let r = (|| {
            let quantum = denot(&prog, &qlift(&ctx, &mu, &sigma)?, &ctx)?;
            let classical = qlift(&ctx, &denot_classical(&prog, &mu, &ctx)?, &sigma)?;
            Ok::<_, crate::semantics::SemError>(state_distance(&quantum, &classical))
        })();
        check.exercised += 1;
        match r {
            Ok(d) if d <= SEM_TOL => {}
            Ok(d) => check.failures.push(format!("`{src}`: blocks differ by {d:e}")),
            Err(e) => check.failures.push(format!("`{src}`: {e}")),
        }
    }
    check
}

const LOCAL_STMTS: &[&str] = &[
    "x <$ uniform(bit);",
    "x <- x xor 1;",
    "on q apply H;",
    "on q apply X;",
    "x <- measure q with computational(bit);",
    "q <q ket(x);",
    "if (x = 1) { on q apply H; } else { x <$ distr{0 -> 1/4, 1 -> 3/4}; }",
];

/// `ρ ⊗ σ` for a state over `x, q` and one over `y, r`.
fn tensor_states(rho: &State, sigma: &State, big: &Context) -> State {
    let mut out = State::new(crate::semantics::space(big));
    for (m1, a) in &rho.blocks {
        for (m2, b) in &sigma.blocks {
            let key: Vec<_> = m1.iter().chain(m2).cloned().collect();
            out.add_block(key, a.kron(b)).expect("shape");
        }
    }
    out
}

fn random_state(rng: &mut Rng8, ctx: &Context) -> State {
    let mu = random_distr(rng, ctx);
    let mut out = State::new(crate::semantics::space(ctx));
    for (m, w) in mu {
        out.add_block(m, random_density(rng, 2).scale_real(w)).expect("shape");
    }
    out
}

/// A program over `x, q` run in a context that also has `y, r` acts as
/// the identity on the `y, r` part.
pub fn check_locality(rng: &mut Rng8, trials: usize) -> Check {
    let mut small = Context::default();
    small.add_var("x", BIT, VarKind::Classical).expect("fresh");
    small.add_var("q", BIT, VarKind::Quantum).expect("fresh");
    let mut rest = Context::default();
    rest.add_var("y", BIT, VarKind::Classical).expect("fresh");
    rest.add_var("r", BIT, VarKind::Quantum).expect("fresh");
    let mut big = small.clone();
    big.add_var("y", BIT, VarKind::Classical).expect("fresh");
    big.add_var("r", BIT, VarKind::Quantum).expect("fresh");
    let mut check = Check::new("locality");
    for _ in 0..trials {
        check.trials += 1;
        let n = rng.gen_range(1..=4);
        let src: String = (0..n).map(|_| *LOCAL_STMTS.choose(rng).expect("nonempty")).collect::<Vec<_>>().join(" ");
        let prog = match parse_program(&src, &small) {
            Ok(p) => p,
            Err(e) => {
                check.failures.push(format!("`{src}` does not parse: {e}"));
                continue;
            }
        };
        let rho = random_state(rng, &small);
        let sigma = random_state(rng, &rest);
        let r = (|| {
            let whole = denot(&prog, &tensor_states(&rho, &sigma, &big), &big)?;
            let local = tensor_states(&denot(&prog, &rho, &small)?, &sigma, &big);
            Ok::<_, crate::semantics::SemError>(state_distance(&whole, &local))
        })();
        check.exercised += 1;
        match r {
            Ok(d) if d <= SEM_TOL => {}
            Ok(d) => check.failures.push(format!("`{src}`: blocks differ by {d:e}")),
            Err(e) => check.failures.push(format!("`{src}`: {e}")),
        }
    }
    check
}
