//! Expression language, quantum while-programs, their concrete syntax and
//! static checks.

pub mod context;
pub mod eval;
pub mod expr;
pub mod lexer;
pub mod parser;
pub mod simp;
pub mod stmt;
pub mod typecheck;
pub mod types;
pub mod value;

use thiserror::Error;

pub use context::{Adversary, Context, Settings, VarDecl, VarKind};
pub use eval::{eval, eval_bool, Env};
pub use expr::{Expr, VarName};
pub use parser::Parser;
pub use stmt::{Block, Stmt};
pub use types::Type;
pub use value::Value;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LangError {
    #[error("{line}:{col}: {msg}")]
    Syntax {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("type error: {0}")]
    Type(String),
    #[error("declaration error: {0}")]
    Decl(String),
    #[error("total quantum dimension {0} exceeds the cap {1}")]
    DimensionCap(usize, usize),
    #[error("evaluation error: {0}")]
    Eval(String),
    #[error("enumeration of {0} assignments exceeds the bound {1}")]
    TooLarge(u128, usize),
}

impl LangError {
    pub fn ty(msg: impl Into<String>) -> Self {
        LangError::Type(msg.into())
    }

    pub fn eval(msg: impl Into<String>) -> Self {
        LangError::Eval(msg.into())
    }
}
