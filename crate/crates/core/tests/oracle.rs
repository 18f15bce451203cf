use std::collections::BTreeMap;

use proptest::prelude::*;
use qrhl::lang::parser::{parse_expr, parse_program};
use qrhl::lang::types::BIT;
use qrhl::lang::{Context, Type, VarKind};
use qrhl::oracle::fuzz::fuzz_suite;
use qrhl::oracle::{
    check_probrel, coupling, lemma_suite, prhl_holds, probabilities, strassen_feasible, CouplingProblem,
};
use qrhl::prover::Rel;
use qrhl::semantics::initial_state;

fn uniform_bit() -> BTreeMap<u8, f64> {
    BTreeMap::from([(0, 0.5), (1, 0.5)])
}

fn problem(rel: impl Fn(u8, u8) -> bool) -> CouplingProblem {
    CouplingProblem::new(&uniform_bit(), &uniform_bit(), |a, b| Ok::<_, ()>(rel(*a, *b))).unwrap()
}

#[test]
fn coupling_for_equality() {
    let p = problem(|a, b| a == b);
    assert!(strassen_feasible(&p));
    let w = coupling(&p).unwrap();
    assert!((w[0][0] - 0.5).abs() < 1e-12 && (w[1][1] - 0.5).abs() < 1e-12);
    assert_eq!(w[0][1], 0.0);
}

#[test]
fn coupling_for_inequality() {
    assert!(strassen_feasible(&problem(|a, b| a != b)));
}

#[test]
fn no_coupling_into_single_pair() {
    assert!(!strassen_feasible(&problem(|a, b| a == 0 && b == 0)));
}

#[test]
fn unequal_masses_are_infeasible() {
    let half = BTreeMap::from([(0u8, 0.5)]);
    let p = CouplingProblem::new(&uniform_bit(), &half, |_, _| Ok::<_, ()>(true)).unwrap();
    assert!(!strassen_feasible(&p));
}

/// Strassen's criterion checked directly: every subset of the left support
/// has at most as much mass as its neighbourhood on the right.
fn hall(p: &CouplingProblem) -> bool {
    let (m1, m2): (f64, f64) = (p.w1.iter().sum(), p.w2.iter().sum());
    if (m1 - m2).abs() > 1e-12 {
        return false;
    }
    let n1 = p.w1.len();
    (0u32..(1 << n1)).all(|s| {
        let left: f64 = (0..n1).filter(|i| s >> i & 1 == 1).map(|i| p.w1[i]).sum();
        let right: f64 = (0..p.w2.len())
            .filter(|&j| (0..n1).any(|i| s >> i & 1 == 1 && p.allowed[i][j]))
            .map(|j| p.w2[j])
            .sum();
        left <= right + 1e-9
    })
}

fn arb_problem() -> impl Strategy<Value = CouplingProblem> {
    (1usize..=4, 1usize..=4).prop_flat_map(|(n1, n2)| {
        (
            prop::collection::vec(1u32..=6, n1),
            prop::collection::vec(1u32..=6, n2),
            prop::collection::vec(prop::collection::vec(prop::bool::weighted(0.4), n2), n1),
        )
            .prop_map(|(a, b, allowed)| {
                let (sa, sb) = (a.iter().sum::<u32>() as f64, b.iter().sum::<u32>() as f64);
                CouplingProblem {
                    w1: a.iter().map(|x| *x as f64 / sa).collect(),
                    w2: b.iter().map(|x| *x as f64 / sb).collect(),
                    allowed,
                }
            })
    })
}

proptest! {
    #[test]
    fn max_flow_agrees_with_hall(p in arb_problem()) {
        prop_assert_eq!(strassen_feasible(&p), hall(&p));
    }

    #[test]
    fn witness_has_the_marginals(p in arb_problem()) {
        if let Some(w) = coupling(&p) {
            for (i, row) in w.iter().enumerate() {
                prop_assert!((row.iter().sum::<f64>() - p.w1[i]).abs() < 1e-9);
                for (j, x) in row.iter().enumerate() {
                    prop_assert!(*x == 0.0 || p.allowed[i][j]);
                }
            }
            for j in 0..p.w2.len() {
                prop_assert!((w.iter().map(|r| r[j]).sum::<f64>() - p.w2[j]).abs() < 1e-9);
            }
        }
    }
}

fn bit_ctx() -> Context {
    let mut ctx = Context::default();
    ctx.add_var("x", BIT, VarKind::Classical).unwrap();
    ctx
}

fn judgment(ctx: &Context, a: &str, c: &str, d: &str, b: &str) -> bool {
    let a = parse_expr(a, ctx, true).unwrap();
    let b = parse_expr(b, ctx, true).unwrap();
    let c = parse_program(c, ctx).unwrap();
    let d = parse_program(d, ctx).unwrap();
    prhl_holds(&a, &c, &d, &b, ctx).unwrap()
}

#[test]
fn uniform_sampling_couples_to_equality_and_inequality() {
    let ctx = bit_ctx();
    let c = "x <$ uniform(bit);";
    assert!(judgment(&ctx, "true", c, c, "x1 = x2"));
    assert!(judgment(&ctx, "true", c, c, "x1 != x2"));
    assert!(!judgment(&ctx, "true", c, c, "x1 = x2 && x1 != x2"));
}

#[test]
fn shifts_modulo_four() {
    let mut ctx = Context::default();
    ctx.add_var("x", Type::Int(4), VarKind::Classical).unwrap();
    assert!(judgment(&ctx, "x1 = x2", "x <- x + 1;", "x <- x - 1;", "x1 = x2 + 2"));
    assert!(!judgment(&ctx, "x1 = x2", "x <- x + 1;", "x <- x - 1;", "x1 = x2"));
}

#[test]
fn quantum_programs_are_rejected() {
    let mut ctx = bit_ctx();
    ctx.add_var("q", BIT, VarKind::Quantum).unwrap();
    let c = parse_program("x <- measure q with computational(bit);", &ctx).unwrap();
    let t = parse_expr("true", &ctx, true).unwrap();
    assert!(prhl_holds(&t, &c, &c, &t, &ctx).is_err());
}

#[test]
fn probability_of_true_after_skip() {
    let ctx = bit_ctx();
    let rho = initial_state(&ctx, &[]).unwrap();
    let t = parse_expr("true", &ctx, false).unwrap();
    assert!(check_probrel(&t, &[], &t, &[], &rho, Rel::Eq, &ctx).unwrap());
}

#[test]
fn probrel_is_symmetric() {
    let ctx = bit_ctx();
    let rho = initial_state(&ctx, &[]).unwrap();
    let e = parse_expr("x = 1", &ctx, false).unwrap();
    let c = parse_program("x <$ distr{0 -> 1/4, 1 -> 3/4};", &ctx).unwrap();
    let d = parse_program("x <$ uniform(bit);", &ctx).unwrap();
    let (p, q) = probabilities(&e, &c, &e, &d, &rho, &ctx).unwrap();
    assert!((p - 0.75).abs() < 1e-12 && (q - 0.5).abs() < 1e-12);
    for (rel, flipped) in [(Rel::Le, Rel::Ge), (Rel::Eq, Rel::Eq), (Rel::Ge, Rel::Le)] {
        assert_eq!(
            check_probrel(&e, &c, &e, &d, &rho, rel, &ctx).unwrap(),
            check_probrel(&e, &d, &e, &c, &rho, flipped, &ctx).unwrap()
        );
    }
    assert!(check_probrel(&e, &c, &e, &d, &rho, Rel::Ge, &ctx).unwrap());
    assert!(!check_probrel(&e, &c, &e, &d, &rho, Rel::Le, &ctx).unwrap());
}

#[test]
fn lemma_suite_passes() {
    let r = lemma_suite(7, 30);
    assert!(r.passed(), "{r}");
    assert_eq!(r.to_json()["suite"], "lemmas");
}

#[test]
fn fuzz_suite_finds_no_counterexample() {
    let r = fuzz_suite(11, 60);
    println!("{r}");
    assert!(r.passed(), "{r}");
    for c in &r.checks {
        assert!(c.exercised > 0, "{c}");
    }
}
