use proptest::prelude::*;

use qrhl::lang::parser::parse_program;
use qrhl::predicates::parse_predicate;
use qrhl::prover::Session;
use qrhl::semantics::{denot, initial_state, is_valid};

const DECLS: &str = "classical var x, y : bit.\nquantum var q, r : bit.\n";

fn session() -> Session {
    let mut s = Session::default();
    s.run(DECLS).unwrap();
    s
}

fn leaf() -> impl Strategy<Value = String> {
    prop::sample::select(vec![
        "top",
        "bot",
        "Cla[x1 = x2]",
        "Cla[x1 = 0 || y2 != 1]",
        "Qeq[q1 == q2]",
        "Qeq[H @ q1 == r2]",
        "Qeq[q1, r1 == q2, r2]",
        "span{ket(0)} >> [q1]",
        "im(H) >> [r2]",
    ])
    .prop_map(str::to_string)
}

fn pred_src() -> impl Strategy<Value = String> {
    leaf().prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) /\\ ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) \\/+ ({b})")),
            inner.clone().prop_map(|a| format!("ortho ({a})")),
            inner.clone().prop_map(|a| format!("({a}) div ket(1) @ [q2]")),
            inner.clone().prop_map(|a| format!("(X @ r1) * ({a})")),
            inner.prop_map(|a| format!("Inf z : bit. ({a}) /\\ Cla[x1 = z]")),
        ]
    })
}

const STMTS: &[&str] = &[
    "x <- y;",
    "y <- x xor 1;",
    "x <$ uniform(bit);",
    "y <$ distr{0 -> 1/4, 1 -> 3/4};",
    "on q apply H;",
    "x <- measure q with computational(bit);",
    "q <q ket(x);",
    "if (x = y) { y <- 0; } else { on r apply X; }",
];

fn program() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(STMTS), 0..4).prop_map(|v| v.join(" "))
}

fn goal_script() -> impl Strategy<Value = String> {
    (leaf(), program(), program(), leaf())
        .prop_map(|(a, c, d, b)| format!("qrhl g : {{{a}}} {{ {c} }} ~ {{ {d} }} {{{b}}}."))
}

const TACTICS: &[&str] = &[
    "skip.", "sym.", "simp.", "assign1.", "assign2.", "sample1.", "sample2.", "qapply1.", "qapply2.",
    "qinit1.", "qinit2.", "measure1.", "measure2.", "if1.", "if2.", "jointif.", "frame.", "equal.",
    "case x1.", "seq 1 0 with Cla[true].", "conseq pre Cla[x1 = x2].",
];

fn tactics() -> impl Strategy<Value = Vec<&'static str>> {
    prop::collection::vec(prop::sample::select(TACTICS), 1..6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn predicates_round_trip_through_the_printer(src in pred_src()) {
        let s = session();
        let p = parse_predicate(&src, &s.ctx, true).unwrap();
        let printed = p.to_string();
        let q = parse_predicate(&printed, &s.ctx, true).unwrap();
        prop_assert_eq!(&q, &p, "{}", printed);
        prop_assert_eq!(q.to_string(), printed);
    }

    #[test]
    fn sym_is_an_involution(script in goal_script()) {
        let mut s = session();
        s.run(&script).unwrap();
        let before = s.current.as_ref().unwrap().goals.clone();
        s.tactic("sym.").unwrap();
        s.tactic("sym.").unwrap();
        prop_assert_eq!(&s.current.as_ref().unwrap().goals, &before);
    }

    #[test]
    fn undo_restores_every_earlier_state(script in goal_script(), ts in tactics()) {
        let mut s = session();
        s.run(&script).unwrap();
        let mut states = vec![s.current.as_ref().unwrap().goals.clone()];
        for t in ts {
            let before = s.current.as_ref().unwrap().goals.clone();
            match s.tactic(t) {
                Ok(()) => states.push(s.current.as_ref().unwrap().goals.clone()),
                Err(_) => prop_assert_eq!(&s.current.as_ref().unwrap().goals, &before),
            }
        }
        while states.len() > 1 {
            states.pop();
            s.tactic("undo.").unwrap();
            prop_assert_eq!(&s.current.as_ref().unwrap().goals, states.last().unwrap());
        }
        prop_assert!(s.tactic("undo.").is_err());
    }

    #[test]
    fn replaying_the_log_reproduces_the_state(script in goal_script(), ts in tactics()) {
        let mut s = session();
        s.run(&script).unwrap();
        for t in ts {
            let _ = s.tactic(t);
        }
        let p = s.current.as_ref().unwrap();
        let mut again = session();
        again.run(&script).unwrap();
        for t in &p.log {
            again.tactic(t).unwrap();
        }
        prop_assert_eq!(&again.current.as_ref().unwrap().goals, &p.goals);
    }

    #[test]
    fn programs_map_states_to_states(src in program()) {
        let s = session();
        let c = parse_program(&src, &s.ctx).unwrap();
        let rho = initial_state(&s.ctx, &[]).unwrap();
        let out = denot(&c, &rho, &s.ctx).unwrap();
        prop_assert!(is_valid(&out, &s.ctx));
        prop_assert!(out.trace() <= 1.0 + 1e-9);
    }

    #[test]
    fn semantics_is_deterministic(src in program()) {
        let s = session();
        let c = parse_program(&src, &s.ctx).unwrap();
        let rho = initial_state(&s.ctx, &[]).unwrap();
        let (a, b) = (denot(&c, &rho, &s.ctx).unwrap(), denot(&c, &rho, &s.ctx).unwrap());
        prop_assert_eq!(&a.blocks, &b.blocks);
    }
}
