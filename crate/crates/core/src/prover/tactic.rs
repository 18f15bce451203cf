//! Tactic syntax.

use crate::lang::{Block, Expr, LangError, Parser, VarName};
use crate::predicates::{parse_pred, Pred};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn tag(self) -> u8 {
        match self {
            Side::Left => 1,
            Side::Right => 2,
        }
    }
}

/// Arguments of the general transitivity rule. Operators and witnesses
/// are expressions over untagged program variables; the relations are
/// relational expressions.
#[derive(Debug, Clone, PartialEq)]
pub struct TransArgs {
    pub mid: Block,
    pub qc: Vec<VarName>,
    pub qd: Vec<VarName>,
    pub rd: Vec<VarName>,
    pub qe: Vec<VarName>,
    pub a_cd: Expr,
    pub a_de: Expr,
    pub b_cd: Expr,
    pub b_de: Expr,
    pub u_c: Expr,
    pub u_d: Expr,
    pub u_e: Expr,
    pub v_c: Expr,
    pub v_d: Expr,
    pub v_e: Expr,
    pub e_c: Expr,
    pub e_e: Expr,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AdversaryArgs {
    pub vars: Option<Vec<VarName>>,
    pub aux: Option<Vec<VarName>>,
    pub frame: Option<Vec<VarName>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Tactic {
    Skip,
    Sym,
    Conseq { pre: Option<Pred>, post: Option<Pred> },
    Seq { left: usize, right: usize, mid: Pred },
    Case(Expr),
    Equal(Vec<VarName>),
    Frame,
    Assign(Side),
    Sample(Side),
    JointSample(Expr),
    If(Side),
    JointIf,
    While(Side, Pred),
    JointWhile(Pred),
    QInit(Side),
    QApply(Side),
    Measure(Side),
    JointMeasureSimple,
    JointMeasure { f: Expr, u1: Expr, u2: Expr },
    ElimEq { vars: Vec<VarName>, quantum: Vec<VarName>, pre: Option<Pred> },
    TransSimple(Block),
    Trans(Box<TransArgs>),
    Adversary(AdversaryArgs),
    Simp,
    Admit,
}

/// Names of all tactics, as accepted at the start of a tactic command.
pub const TACTIC_NAMES: &[&str] = &[
    "skip", "sym", "conseq", "seq", "case", "equal", "frame", "assign1", "assign2", "sample1",
    "sample2", "jointsample", "if1", "if2", "jointif", "while1", "while2", "jointwhile", "qinit1",
    "qinit2", "qapply1", "qapply2", "measure1", "measure2", "jointmeasure", "elimeq", "trans",
    "trans-simple", "adversary", "simp", "admit",
];

pub fn is_tactic_start(p: &Parser) -> bool {
    TACTIC_NAMES.iter().any(|n| p.at_kw(n))
}

fn relational_expr(p: &mut Parser) -> Result<Expr, LangError> {
    let saved = p.relational;
    p.relational = true;
    let r = p.parse_expr();
    p.relational = saved;
    r
}

fn plain_expr(p: &mut Parser) -> Result<Expr, LangError> {
    let saved = p.relational;
    p.relational = false;
    let r = p.parse_expr();
    p.relational = saved;
    r
}

fn relational_pred(p: &mut Parser) -> Result<Pred, LangError> {
    let saved = p.relational;
    p.relational = true;
    let r = parse_pred(p);
    p.relational = saved;
    r
}

fn plain_pred(p: &mut Parser) -> Result<Pred, LangError> {
    let saved = p.relational;
    p.relational = false;
    let r = parse_pred(p);
    p.relational = saved;
    r
}

/// `[x, y, q]`: untagged program variable names.
pub fn name_list(p: &mut Parser) -> Result<Vec<VarName>, LangError> {
    p.expect_sym("[")?;
    let mut out = Vec::new();
    if p.eat_sym("]") {
        return Ok(out);
    }
    loop {
        out.push(program_var(p)?);
        if p.eat_sym("]") {
            return Ok(out);
        }
        p.expect_sym(",")?;
    }
}

fn program_var(p: &mut Parser) -> Result<VarName, LangError> {
    let pos = p.position();
    let name = p.ident()?;
    if p.ctx.var(&name).is_none() {
        p.set_position(pos);
        return Err(p.err(format!("`{name}` is not a program variable")));
    }
    Ok(VarName::plain(&name))
}

/// `x, y, z` without brackets.
fn bare_list(p: &mut Parser) -> Result<Vec<VarName>, LangError> {
    let mut out = vec![program_var(p)?];
    while p.eat_sym(",") {
        out.push(program_var(p)?);
    }
    Ok(out)
}

fn count(p: &mut Parser) -> Result<usize, LangError> {
    Ok(p.int()? as usize)
}

/// A program argument: `{ stmts }` or the name of a declared program.
pub fn program_arg(p: &mut Parser) -> Result<Block, LangError> {
    if p.eat_sym("{") {
        let b = p.parse_block()?;
        p.expect_sym("}")?;
        return Ok(b);
    }
    let pos = p.position();
    let name = p.ident()?;
    match p.ctx.programs.get(name.as_str()) {
        Some(b) => Ok(b.clone()),
        None => {
            p.set_position(pos);
            Err(p.err(format!("unknown program `{name}`")))
        }
    }
}

fn trans_args(p: &mut Parser) -> Result<TransArgs, LangError> {
    p.expect_kw("via")?;
    let mid = program_arg(p)?;
    let mut lists: [Option<Vec<VarName>>; 4] = Default::default();
    let mut exprs: [Option<Expr>; 12] = Default::default();
    const LISTS: [&str; 4] = ["qc", "qd", "rd", "qe"];
    const EXPRS: [&str; 12] = [
        "acd", "ade", "bcd", "bde", "uc", "ud", "ue", "vc", "vd", "ve", "ec", "ee",
    ];
    while !p.at_sym(".") && !p.at_eof() {
        let pos = p.position();
        let key = p.ident()?;
        if let Some(i) = LISTS.iter().position(|k| *k == key) {
            lists[i] = Some(name_list(p)?);
        } else if let Some(i) = EXPRS.iter().position(|k| *k == key) {
            exprs[i] = Some(if i < 4 { relational_expr(p)? } else { plain_expr(p)? });
        } else {
            p.set_position(pos);
            return Err(p.err(format!("unknown trans argument `{key}`")));
        }
    }
    for (i, l) in lists.iter().enumerate() {
        if l.is_none() {
            return Err(p.err(format!("trans: missing argument `{}`", LISTS[i])));
        }
    }
    for (i, e) in exprs.iter().enumerate() {
        if e.is_none() {
            return Err(p.err(format!("trans: missing argument `{}`", EXPRS[i])));
        }
    }
    let [qc, qd, rd, qe] = lists.map(|l| l.expect("checked"));
    let [a_cd, a_de, b_cd, b_de, u_c, u_d, u_e, v_c, v_d, v_e, e_c, e_e] =
        exprs.map(|e| e.expect("checked"));
    Ok(TransArgs {
        mid,
        qc,
        qd,
        rd,
        qe,
        a_cd,
        a_de,
        b_cd,
        b_de,
        u_c,
        u_d,
        u_e,
        v_c,
        v_d,
        v_e,
        e_c,
        e_e,
    })
}

/// Parses one tactic including its terminating `.`.
pub fn parse_tactic(p: &mut Parser) -> Result<Tactic, LangError> {
    let pos = p.position();
    let name = p.ident()?;
    let t = match name.as_str() {
        "skip" => Tactic::Skip,
        "sym" => Tactic::Sym,
        "conseq" => {
            let mut pre = None;
            let mut post = None;
            loop {
                if p.eat_kw("pre") {
                    pre = Some(relational_pred(p)?);
                } else if p.eat_kw("post") {
                    post = Some(relational_pred(p)?);
                } else {
                    break;
                }
            }
            if pre.is_none() && post.is_none() {
                return Err(p.err("conseq needs `pre <P>` or `post <P>`"));
            }
            Tactic::Conseq { pre, post }
        }
        "seq" => {
            let left = count(p)?;
            let right = count(p)?;
            p.expect_kw("with")?;
            Tactic::Seq { left, right, mid: relational_pred(p)? }
        }
        "case" => Tactic::Case(relational_expr(p)?),
        "equal" => Tactic::Equal(if p.at_sym("[") { name_list(p)? } else { Vec::new() }),
        "frame" => Tactic::Frame,
        "assign1" => Tactic::Assign(Side::Left),
        "assign2" => Tactic::Assign(Side::Right),
        "sample1" => Tactic::Sample(Side::Left),
        "sample2" => Tactic::Sample(Side::Right),
        "jointsample" => Tactic::JointSample(relational_expr(p)?),
        "if1" => Tactic::If(Side::Left),
        "if2" => Tactic::If(Side::Right),
        "jointif" => Tactic::JointIf,
        "while1" | "while2" | "jointwhile" => {
            p.expect_kw("inv")?;
            let inv = relational_pred(p)?;
            match name.as_str() {
                "while1" => Tactic::While(Side::Left, inv),
                "while2" => Tactic::While(Side::Right, inv),
                _ => Tactic::JointWhile(inv),
            }
        }
        "qinit1" => Tactic::QInit(Side::Left),
        "qinit2" => Tactic::QInit(Side::Right),
        "qapply1" => Tactic::QApply(Side::Left),
        "qapply2" => Tactic::QApply(Side::Right),
        "measure1" => Tactic::Measure(Side::Left),
        "measure2" => Tactic::Measure(Side::Right),
        "jointmeasure" => {
            if p.eat_sym("-") {
                p.expect_kw("simple")?;
                Tactic::JointMeasureSimple
            } else {
                let f = relational_expr(p)?;
                let u1 = relational_expr(p)?;
                let u2 = relational_expr(p)?;
                Tactic::JointMeasure { f, u1, u2 }
            }
        }
        "elimeq" => {
            p.expect_kw("vars")?;
            let vars = if p.at_kw("quantum") { Vec::new() } else { bare_list(p)? };
            let quantum = if p.eat_kw("quantum") { bare_list(p)? } else { Vec::new() };
            let pre = if p.eat_kw("pre") { Some(plain_pred(p)?) } else { None };
            Tactic::ElimEq { vars, quantum, pre }
        }
        "trans" => {
            if p.eat_sym("-") {
                p.expect_kw("simple")?;
                p.expect_kw("via")?;
                Tactic::TransSimple(program_arg(p)?)
            } else {
                Tactic::Trans(Box::new(trans_args(p)?))
            }
        }
        "adversary" => {
            let mut args = AdversaryArgs::default();
            loop {
                if p.eat_kw("vars") {
                    args.vars = Some(name_list(p)?);
                } else if p.eat_kw("aux") {
                    args.aux = Some(name_list(p)?);
                } else if p.eat_kw("frame") {
                    args.frame = Some(name_list(p)?);
                } else {
                    break;
                }
            }
            Tactic::Adversary(args)
        }
        "simp" => Tactic::Simp,
        "admit" => Tactic::Admit,
        _ => {
            p.set_position(pos);
            return Err(p.err(format!("unknown tactic `{name}`")));
        }
    };
    p.expect_sym(".")?;
    Ok(t)
}
