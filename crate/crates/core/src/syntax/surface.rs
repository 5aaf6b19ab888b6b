use std::fmt;

use super::Span;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Eq,
    Le,
    Ge,
    Lt,
    Gt,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Eq => "==",
            BinOp::Le => "<=",
            BinOp::Ge => ">=",
            BinOp::Lt => "<",
            BinOp::Gt => ">",
            BinOp::And => "and",
            BinOp::Or => "or",
        }
    }
}

impl fmt::Display for BinOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Parsed expression with all sugar still present.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfExpr {
    pub span: Span,
    pub kind: SurfKind,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SurfKind {
    Ident(String),
    Num(f64),
    Bool(bool),
    /// An operator used as a value, e.g. the `+` in `nfold(+, w, 0)`.
    Op(BinOp),
    Call(Box<SurfExpr>, Vec<SurfExpr>),
    Binary(BinOp, Box<SurfExpr>, Box<SurfExpr>),
    Neg(Box<SurfExpr>),
    Val(String, Box<SurfExpr>, Box<SurfExpr>),
    /// `def f(x̄) { e } rest` appearing inside an expression.
    Def(Box<Def>, Box<SurfExpr>),
    Fun(String, Vec<String>, Box<SurfExpr>),
    Lambda(Vec<String>, Box<SurfExpr>),
    If(Box<SurfExpr>, Box<SurfExpr>, Box<SurfExpr>),
    RetSend(Box<SurfExpr>),
    ReturnSend(Box<SurfExpr>, Box<SurfExpr>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Def {
    pub span: Span,
    pub name: String,
    pub params: Vec<String>,
    pub body: SurfExpr,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SourceProgram {
    pub defs: Vec<Def>,
    pub main: Option<SurfExpr>,
}
