//! Rule soundness on random classical goals: whenever every subgoal a
//! tactic emits holds under the pRHL oracle, the goal itself must hold.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::lang::expr::implies;
use crate::lang::parser::parse_program;
use crate::lang::types::BIT;
use crate::lang::{Context, Parser, VarKind};
use crate::predicates::{parse_predicate, Pred};
use crate::prover::rules::{self, decide};
use crate::prover::tactic::parse_tactic;
use crate::prover::Goal;

use super::coupling::{pred_to_expr, prhl_holds_pred};
use super::lemmas::{rng, Rng8};
use super::{Check, OracleError, Report};

pub const FUZZ_RULES: &[&str] = &[
    "skip", "assign1", "assign2", "sample1", "sample2", "jointsample", "if1", "if2", "jointif", "while1",
    "while2", "jointwhile", "seq", "conseq", "case", "sym", "frame", "equal",
];

/// Two bit variables per side.
pub fn fuzz_context() -> Context {
    let mut ctx = Context::default();
    ctx.add_var("x", BIT, VarKind::Classical).expect("fresh");
    ctx.add_var("y", BIT, VarKind::Classical).expect("fresh");
    ctx
}

const VALUES: &[&str] = &["x", "y", "0", "1", "x xor y", "x xor 1", "y xor 1"];
const CONDS: &[&str] = &["x = 0", "x = y", "y = 1", "x != y", "true"];
const SAMPLES: &[&str] = &["uniform(bit)", "distr{0 -> 1/4, 1 -> 3/4}", "distr{1 -> 1}"];
const REL_ATOMS: &[&str] = &[
    "x1 = x2", "y1 = y2", "x1 = 0", "x2 = 1", "y1 != x2", "(x1 xor y1) = x2", "y2 = 0", "x1 = y1", "true",
];
const EQUAL: &str = "Cla[x1 = x2 && y1 = y2]";
const LEFT_ATOMS: &[&str] = &["x1 = 0", "y1 = 1", "x1 = y1", "x1 != y1", "true"];
const WITNESSES: &[&str] = &[
    "map(fun z : bit => (z, z), uniform(bit))",
    "map(fun z : bit => (z, z xor 1), uniform(bit))",
    "uniform(bit * bit)",
    "distr{(0, 0) -> 1/4, (1, 1) -> 3/4}",
    "distr{(1, 1) -> 1}",
];
/// The coupling onto the diagonal for each entry of `SAMPLES`.
const DIAGONAL: [&str; 3] =
    ["map(fun z : bit => (z, z), uniform(bit))", "distr{(0, 0) -> 1/4, (1, 1) -> 3/4}", "distr{(1, 1) -> 1}"];
const LOOPS: &[&str] = &["while (x = 1) { x <- 0; }", "while (x != y) { x <- y; }", "while (y = 0) { y <- x xor 1; x <- 0; }"];

struct Gen<'r> {
    rng: &'r mut Rng8,
}

impl Gen<'_> {
    fn pick(&mut self, xs: &[&'static str]) -> &'static str {
        xs.choose(self.rng).expect("nonempty")
    }

    fn var(&mut self) -> &'static str {
        self.pick(&["x", "y"])
    }

    fn simple_stmt(&mut self) -> String {
        let x = self.var();
        match self.rng.gen_range(0..3) {
            0 | 1 => format!("{x} <- {};", self.pick(VALUES)),
            _ => format!("{x} <$ {};", self.pick(SAMPLES)),
        }
    }

    fn stmt(&mut self) -> String {
        if self.rng.gen_bool(0.15) {
            format!("if ({}) {{ {} }} else {{ {} }}", self.pick(CONDS), self.simple_stmt(), self.prog(1))
        } else {
            self.simple_stmt()
        }
    }

    fn prog(&mut self, max: usize) -> String {
        let n = self.rng.gen_range(0..=max);
        (0..n).map(|_| self.stmt()).collect::<Vec<_>>().join(" ")
    }

    fn if_stmt(&mut self) -> String {
        format!("if ({}) {{ {} }} else {{ {} }}", self.pick(CONDS), self.prog(1), self.prog(1))
    }

    fn atoms(&mut self, pool: &[&'static str]) -> String {
        let a = self.pick(pool);
        match self.rng.gen_range(0..4) {
            0 => format!("{a} && {}", self.pick(pool)),
            1 => format!("{a} || {}", self.pick(pool)),
            _ => a.to_string(),
        }
    }

    fn pred(&mut self) -> String {
        format!("Cla[{}]", self.atoms(REL_ATOMS))
    }
}

struct Instance {
    pre: String,
    left: String,
    right: String,
    post: String,
    tactic: String,
}

fn instance(rule: &str, g: &mut Gen) -> Instance {
    let mut i = Instance { pre: g.pred(), left: g.prog(2), right: g.prog(2), post: g.pred(), tactic: format!("{rule}.") };
    if g.rng.gen_bool(0.4) {
        i.pre = EQUAL.into();
    }
    match rule {
        "skip" => {
            i.left.clear();
            i.right.clear();
        }
        "assign1" => i.left = format!("{} {} <- {};", i.left, g.var(), g.pick(VALUES)),
        "assign2" => i.right = format!("{} {} <- {};", i.right, g.var(), g.pick(VALUES)),
        "sample1" => i.left = format!("{} {} <$ {};", i.left, g.var(), g.pick(SAMPLES)),
        "sample2" => i.right = format!("{} {} <$ {};", i.right, g.var(), g.pick(SAMPLES)),
        "jointsample" => {
            let k = g.rng.gen_range(0..SAMPLES.len());
            let k2 = if g.rng.gen_bool(0.7) { k } else { g.rng.gen_range(0..SAMPLES.len()) };
            i.left = format!("{} {} <$ {};", i.left, g.var(), SAMPLES[k]);
            i.right = format!("{} {} <$ {};", i.right, g.var(), SAMPLES[k2]);
            let w = if g.rng.gen_bool(0.7) { DIAGONAL[k] } else { g.pick(WITNESSES) };
            i.tactic = format!("jointsample {w}.");
        }
        "if1" => {
            i.left = g.if_stmt();
            i.right.clear();
        }
        "if2" => {
            i.right = g.if_stmt();
            i.left.clear();
        }
        "jointif" => {
            i.left = g.if_stmt();
            i.right = g.if_stmt();
            if g.rng.gen_bool(0.6) {
                let c = g.pick(CONDS);
                i.left = format!("if ({c}) {{ {} }} else {{ {} }}", g.prog(1), g.prog(1));
                i.right = format!("if ({c}) {{ {} }} else {{ {} }}", g.prog(1), g.prog(1));
                i.pre = "Cla[x1 = x2 && y1 = y2]".into();
            }
        }
        "while1" => {
            i.left = format!("{} {}", g.prog(1), g.pick(LOOPS));
            i.tactic = format!("while1 inv Cla[{}].", g.atoms(LEFT_ATOMS));
        }
        "while2" => {
            i.right = format!("{} {}", g.prog(1), g.pick(LOOPS));
            let inv = g.atoms(LEFT_ATOMS).replace("x1", "x2").replace("y1", "y2");
            i.tactic = format!("while2 inv Cla[{inv}].");
        }
        "jointwhile" => {
            let l = g.pick(LOOPS);
            i.left = format!("{} {l}", g.prog(1));
            i.right = format!("{} {}", g.prog(1), if g.rng.gen_bool(0.7) { l } else { g.pick(LOOPS) });
            let inv = if g.rng.gen_bool(0.6) { EQUAL.to_string() } else { g.pred() };
            i.tactic = format!("jointwhile inv {inv}.");
        }
        "seq" => {
            i.left = format!("{} {}", g.stmt(), g.prog(2));
            i.right = format!("{} {}", g.stmt(), g.prog(2));
            let (nl, nr) = (g.rng.gen_range(0..=1), g.rng.gen_range(0..=1));
            let mid = if g.rng.gen_bool(0.5) { EQUAL.to_string() } else { g.pred() };
            i.tactic = format!("seq {nl} {nr} with {mid}.");
        }
        "conseq" => {
            let weaker = format!("Cla[true] /\\ {}", i.pre);
            let pre = if g.rng.gen_bool(0.5) { weaker } else { g.pred() };
            let stronger = format!("{} /\\ {}", i.post, g.pred());
            let post = if g.rng.gen_bool(0.5) { stronger } else { g.pred() };
            i.tactic = match g.rng.gen_range(0..3) {
                0 => format!("conseq pre {pre}."),
                1 => format!("conseq post {post}."),
                _ => format!("conseq pre {pre} post {post}."),
            };
        }
        "case" => i.tactic = format!("case {}.", g.pick(&["x1", "y2", "x1 xor y2", "x1 = x2"])),
        "frame" => {
            let keep = g.pick(&["y1 = y2", "y1 = 0", "y2 = 1"]);
            let only_x = |g: &mut Gen| {
                let n = g.rng.gen_range(0..=2);
                (0..n).map(|_| format!("x <- {};", g.pick(&["x", "y", "0", "1", "x xor y"]))).collect::<Vec<_>>().join(" ")
            };
            i.left = only_x(g);
            i.right = only_x(g);
            i.pre = format!("Cla[{keep}] /\\ {}", g.pred());
            i.post = format!("Cla[{keep}] /\\ {}", g.pred());
        }
        "equal" => {
            let s = g.simple_stmt();
            i.left = format!("{} {s}", i.left);
            i.right = format!("{} {s}", i.right);
            if g.rng.gen_bool(0.5) {
                i.left = s.clone();
                i.right = s;
                i.post = EQUAL.into();
            }
            if g.rng.gen_bool(0.3) {
                i.tactic = "equal [x, y].".into();
            }
        }
        _ => {}
    }
    i
}

fn build(i: &Instance, ctx: &Context) -> Result<Goal, String> {
    let pre = parse_predicate(&i.pre, ctx, true).map_err(|e| e.to_string())?;
    let post = parse_predicate(&i.post, ctx, true).map_err(|e| e.to_string())?;
    let left = parse_program(&i.left, ctx).map_err(|e| e.to_string())?;
    let right = parse_program(&i.right, ctx).map_err(|e| e.to_string())?;
    Ok(Goal::Qrhl { pre, left, right, post })
}

/// Truth of a classical goal; `None` when it is outside the fragment.
fn holds(g: &Goal, ctx: &Context) -> Result<Option<bool>, OracleError> {
    let leq = |a: &Pred, b: &Pred| -> Result<Option<bool>, OracleError> {
        let (Some(ea), Some(eb)) = (pred_to_expr(a), pred_to_expr(b)) else { return Ok(None) };
        match decide(&implies(ea, eb), ctx) {
            Ok(v) => Ok(Some(v)),
            Err(e) => Err(OracleError::NotClassical(e.to_string())),
        }
    };
    match g {
        Goal::Qrhl { pre, left, right, post } => match prhl_holds_pred(pre, left, right, post, ctx) {
            Ok(v) => Ok(Some(v)),
            Err(OracleError::NotClassical(_)) => Ok(None),
            Err(e) => Err(e),
        },
        Goal::Leq(a, b) => leq(a, b),
        Goal::Ambient { expr, .. } => match decide(expr, ctx) {
            Ok(v) => Ok(Some(v)),
            Err(e) => Err(OracleError::NotClassical(e.to_string())),
        },
        Goal::ProbRel { .. } => Ok(None),
    }
}

/// Fuzzes one tactic. `None` for an unknown rule name.
pub fn fuzz_rule_soundness(rule: &str, trials: usize, seed: u64) -> Option<Check> {
    if !FUZZ_RULES.contains(&rule) {
        return None;
    }
    let base = fuzz_context();
    let mut r = rng(seed ^ name_hash(rule));
    let mut check = Check::new(rule);
    let inits = BTreeMap::new();
    for _ in 0..trials {
        check.trials += 1;
        let inst = instance(rule, &mut Gen { rng: &mut r });
        let goal = match build(&inst, &base) {
            Ok(g) => g,
            Err(e) => {
                check.failures.push(format!("generated goal does not parse: {e}"));
                continue;
            }
        };
        let tactic = {
            let mut p = match Parser::new(&inst.tactic, &base) {
                Ok(p) => p,
                Err(e) => {
                    check.failures.push(format!("`{}`: {e}", inst.tactic));
                    continue;
                }
            };
            match parse_tactic(&mut p) {
                Ok(t) => t,
                Err(e) => {
                    check.failures.push(format!("`{}`: {e}", inst.tactic));
                    continue;
                }
            }
        };
        let mut ctx = base.clone();
        let Ok(subgoals) = rules::apply(&tactic, &goal, &mut ctx, &inits) else { continue };
        let mut all = true;
        for sg in &subgoals {
            match holds(sg, &ctx) {
                Ok(Some(true)) => {}
                Ok(Some(false)) | Ok(None) | Err(_) => {
                    all = false;
                    break;
                }
            }
        }
        if !all {
            continue;
        }
        check.exercised += 1;
        match holds(&goal, &base) {
            Ok(Some(true)) => {}
            Ok(Some(false)) => check.failures.push(format!(
                "`{}` on {goal}: all {} subgoals hold but the goal does not",
                inst.tactic,
                subgoals.len()
            )),
            Ok(None) => {}
            Err(e) => check.failures.push(format!("{goal}: {e}")),
        }
    }
    Some(check)
}

/// Stable per-rule seed offset.
fn name_hash(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3))
}

/// Every rule in [`FUZZ_RULES`] with `trials` random goals each.
pub fn fuzz_suite(seed: u64, trials: usize) -> Report {
    let checks = FUZZ_RULES.iter().filter_map(|r| fuzz_rule_soundness(r, trials, seed)).collect();
    Report { suite: "fuzz".into(), checks }
}
