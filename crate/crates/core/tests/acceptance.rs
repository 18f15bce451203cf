use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::Rng;

use qrhl::lang::parser::{parse_expr, parse_program};
use qrhl::lang::types::BIT;
use qrhl::lang::{Context, Stmt, Value, VarKind};
use qrhl::oracle::lemmas::{self, rng, SIMPLIFICATION_CHECKS};
use qrhl::oracle::semantic::{check_classical_lift, random_density};
use qrhl::oracle::{check_probrel, fuzz_rule_soundness, prhl_holds, probabilities, Check, FUZZ_RULES};
use qrhl::predicates::Pred;
use qrhl::prover::{Goal, ProofStatus, Rel, Session};
use qrhl::semantics::{all_memories, classical_part, denot, initial_state, space, State};

fn example(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../examples").join(name);
    std::fs::read_to_string(p).unwrap()
}

struct Outcome {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn outcome(name: &'static str, passed: bool, detail: String) -> Outcome {
    println!("{} {name}: {detail}", if passed { "PASS" } else { "FAIL" });
    Outcome { name, passed, detail }
}

/// Replays a script, recording the goals after every step.
fn replay(name: &str) -> (Session, Vec<(String, Vec<Goal>)>, Result<(), String>) {
    let mut s = Session::default();
    let mut steps = Vec::new();
    let r = s
        .run_with(&example(name), |text, s| {
            if let Some(p) = &s.current {
                steps.push((text.trim().to_string(), p.goals.clone()));
            }
        })
        .map_err(|e| e.to_string());
    (s, steps, r)
}

fn closed(s: &Session) -> bool {
    s.report().iter().all(|r| r.status == ProofStatus::Closed)
}

// ---- EPR ----

/// `(H ⊗ id) EPR` and `(id ⊗ H) EPR` by hand on real amplitudes.
fn epr_distance() -> f64 {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let epr = [h, 0.0, 0.0, h];
    let had = [[h, h], [h, -h]];
    let mut left = [0.0; 4];
    let mut right = [0.0; 4];
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                left[2 * a + b] += had[a][c] * epr[2 * c + b];
                right[2 * a + b] += had[b][c] * epr[2 * a + c];
            }
        }
    }
    left.iter().zip(&right).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn epr() -> Outcome {
    let start = Instant::now();
    let (s, steps, r) = replay("epr.qrhl");
    let elapsed = start.elapsed();
    let last_leq = steps.iter().rev().find_map(|(_, gs)| match gs.first() {
        Some(g @ Goal::Leq(..)) => Some(g.to_string()),
        _ => None,
    });
    let reduces = last_leq.as_deref().is_some_and(|g| g.contains("(H ⊗ id(bit))") && g.contains("(id(bit) ⊗ H)"));
    let dist = epr_distance();
    let ok = r.is_ok() && closed(&s) && reduces && dist < 1e-9 && elapsed < Duration::from_secs(1);
    outcome(
        "epr",
        ok,
        format!("closed={} final check `{}` distance={dist:e} time={elapsed:?}", closed(&s), last_leq.unwrap_or_default()),
    )
}

// ---- EPR with measurement ----

fn x_distribution(prog: &[Stmt], ctx: &Context) -> BTreeMap<Value, f64> {
    let rho = initial_state(ctx, &[]).unwrap();
    let out = denot(prog, &rho, ctx).unwrap();
    let ix = ctx.classical_vars().position(|d| &*d.name == "x").unwrap();
    let mut d = BTreeMap::new();
    for (m, w) in classical_part(&out) {
        *d.entry(m[ix].clone()).or_insert(0.0) += w;
    }
    d
}

fn epr_measure() -> Outcome {
    let (s, steps, r) = replay("epr-measure.qrhl");
    let Some(Goal::Qrhl { left, right, .. }) = steps.first().and_then(|(_, g)| g.first().cloned()) else {
        return outcome("epr-measure", false, "no qRHL goal".into());
    };
    let ctx = &s.ctx;
    let (dl, dr) = (x_distribution(&left, ctx), x_distribution(&right, ctx));
    let quarter = |d: &BTreeMap<Value, f64>| d.len() == 4 && d.values().all(|p| (p - 0.25).abs() <= 1e-9);
    let same = dl.len() == dr.len() && dl.iter().all(|(k, p)| dr.get(k).is_some_and(|q| (p - q).abs() <= 1e-9));
    let ok = r.is_ok() && closed(&s) && quarter(&dl) && quarter(&dr) && same;
    outcome("epr-measure", ok, format!("closed={} left={dl:?} right={dr:?}", closed(&s)))
}

// ---- ROR-OT-CPA ----

fn qeq_shape(p: &Pred) -> bool {
    let cs = p.conjuncts();
    cs.iter().any(|c| matches!(c, Pred::Qeq(..))) && cs.iter().all(|c| matches!(c, Pred::Qeq(..) | Pred::Cla(_)))
}

fn random_initial(rng: &mut lemmas::Rng8, ctx: &Context) -> State {
    let mems = all_memories(ctx).unwrap();
    let ws: Vec<f64> = mems.iter().map(|_| rng.gen::<f64>()).collect();
    let total: f64 = ws.iter().sum();
    let mut st = State::new(space(ctx));
    for (m, w) in mems.into_iter().zip(ws) {
        st.add_block(m, random_density(rng, 2).scale_real(w / total)).unwrap();
    }
    st
}

fn rorcpa() -> Outcome {
    let (s, steps, r) = replay("prg-enc-rorcpa.qrhl");
    let mut shapes = 0;
    let mut bad = Vec::new();
    for (text, goals) in &steps {
        if text.starts_with("prob") || text.starts_with("elimeq") {
            continue;
        }
        for g in goals {
            if let Goal::Qrhl { pre, post, .. } = g {
                for p in [pre, post] {
                    shapes += 1;
                    if !qeq_shape(p) {
                        bad.push(p.to_string());
                    }
                }
            }
        }
    }
    let ctx = &s.ctx;
    let e = parse_expr("b = 1", ctx, false).unwrap();
    let (g1, g2) = (&ctx.programs["G1"], &ctx.programs["G2"]);
    let mut r8 = rng(2024);
    let mut probs = Vec::new();
    let mut rel_ok = true;
    for _ in 0..5 {
        let rho = random_initial(&mut r8, ctx);
        rel_ok &= check_probrel(&e, g1, &e, g2, &rho, Rel::Eq, ctx).unwrap();
        probs.push(probabilities(&e, g1, &e, g2, &rho, ctx).unwrap());
    }
    let ok = r.is_ok() && closed(&s) && bad.is_empty() && shapes > 0 && rel_ok;
    outcome(
        "rorcpa",
        ok,
        format!("closed={} predicates={shapes} off-shape={bad:?} Pr pairs={probs:?}", closed(&s)),
    )
}

// ---- lemma suites ----

fn summary(checks: &[Check]) -> (bool, String) {
    let ok = checks.iter().all(|c| c.passed() && c.exercised >= c.trials.min(100));
    (ok, checks.iter().map(|c| c.to_string()).collect::<Vec<_>>().join("; "))
}

fn projection_counterexample() -> Outcome {
    let (m1, m2) = lemmas::projection_matrices();
    let (n1, n2) = (m1.frobenius(), m2.frobenius());
    outcome("projection-counterexample", n1 <= 1e-9 && n2 >= 1e-6, format!("|M1|={n1:e} |M2|={n2:e}"))
}

fn quantum_equality() -> Outcome {
    let dims = [2, 3].map(|n| (n, lemmas::qeq_dimension(n)));
    let dims_ok = dims.iter().all(|(n, d)| *d == n * (n + 1) / 2);
    let q = lemmas::check_quanteq(&mut rng(31), 100);
    let ok = dims_ok && q.passed() && q.trials >= 100;
    outcome("qeq-structure", ok, format!("dims={dims:?} {q}"))
}

fn simplification() -> Outcome {
    let start = Instant::now();
    let mut r = rng(41);
    let checks: Vec<Check> =
        SIMPLIFICATION_CHECKS.iter().map(|n| lemmas::simplification_check(n, &mut r, 100).unwrap()).collect();
    let elapsed = start.elapsed();
    let (ok, detail) = summary(&checks);
    outcome("simplification", ok && elapsed < Duration::from_secs(30), format!("{detail}; time={elapsed:?}"))
}

fn classical_fragment() -> Outcome {
    let lift = check_classical_lift(&mut rng(53), 200);
    let mut ctx = Context::default();
    ctx.add_var("x", BIT, VarKind::Classical).unwrap();
    let c = parse_program("x <$ uniform(bit);", &ctx).unwrap();
    let holds = |post: &str| {
        let a = parse_expr("true", &ctx, true).unwrap();
        let b = parse_expr(post, &ctx, true).unwrap();
        prhl_holds(&a, &c, &c, &b, &ctx).unwrap()
    };
    let (eq, ne, both) = (holds("x1 = x2"), holds("x1 != x2"), holds("x1 = x2 && x1 != x2"));
    let ok = lift.passed() && lift.trials >= 200 && eq && ne && !both;
    outcome("classical-fragment", ok, format!("{lift}; eq={eq} neq={ne} conjunction={both}"))
}

fn rule_soundness() -> Outcome {
    let checks: Vec<Check> = FUZZ_RULES.iter().map(|r| fuzz_rule_soundness(r, 200, 97).unwrap()).collect();
    let ok = checks.iter().all(|c| c.passed() && c.trials >= 200 && c.exercised > 0);
    let detail = checks.iter().map(|c| format!("{} {}/{}", c.name, c.exercised, c.trials)).collect::<Vec<_>>();
    let failures: Vec<&String> = checks.iter().flat_map(|c| &c.failures).collect();
    outcome("rule-soundness", ok, format!("exercised {}; counterexamples={failures:?}", detail.join(", ")))
}

#[test]
fn acceptance() {
    let all = [
        epr(),
        epr_measure(),
        rorcpa(),
        projection_counterexample(),
        quantum_equality(),
        simplification(),
        classical_fragment(),
        rule_soundness(),
    ];
    let failed: Vec<String> = all.iter().filter(|o| !o.passed).map(|o| format!("{}: {}", o.name, o.detail)).collect();
    println!("{}/{} criteria passed", all.len() - failed.len(), all.len());
    assert!(failed.is_empty(), "failed criteria:\n{}", failed.join("\n"));
}
