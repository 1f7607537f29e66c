//! Surface syntax as written by users.

use std::fmt;

use crate::rational::Rational;
use crate::syntax::{Label, LabelSet, Name, PrimOp, SType};

/// Source position. Positions never affect equality, so re-parsing printed
/// output compares equal to the original tree.
#[derive(Debug, Clone, Copy, Default)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl PartialEq for Span {
    fn eq(&self, _: &Span) -> bool {
        true
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Expr {
        Expr { kind, span }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Var(Name),
    Int(i64),
    Unit,
    Nil,
    Pair(Box<Expr>, Box<Expr>),
    Inl(Box<Expr>),
    Inr(Box<Expr>),
    Cons(Box<Expr>, Box<Expr>),
    Let(Name, Box<Expr>, Box<Expr>),
    Tick(Rational),
    Do(Label, Box<Expr>),
    Handle(Box<HandleExpr>),
    Raise(Box<Expr>),
    Try(Box<Expr>, Name, Box<Expr>),
    MatchList {
        scrut: Box<Expr>,
        nil: Box<Expr>,
        head: Name,
        tail: Name,
        cons: Box<Expr>,
    },
    MatchSum {
        scrut: Box<Expr>,
        left: Name,
        left_body: Box<Expr>,
        right: Name,
        right_body: Box<Expr>,
    },
    MatchPair {
        scrut: Box<Expr>,
        left: Name,
        right: Name,
        body: Box<Expr>,
    },
    Absurd(Box<Expr>),
    Fn(Name, Box<Expr>),
    BinOp(PrimOp, Box<Expr>, Box<Expr>),
    App(Box<Expr>, Box<Expr>),
    Annot(Box<Expr>, SType),
}

#[derive(Debug, Clone, PartialEq)]
pub struct HandleExpr {
    pub body: Expr,
    pub ret_var: Name,
    pub ret_body: Expr,
    pub branches: Vec<HandlerBranch>,
    pub forwards: Vec<(Label, Span)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HandlerBranch {
    pub label: Label,
    pub payload: Name,
    pub cont: Name,
    pub body: Expr,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EffectDeclS {
    pub label: Label,
    pub input: SType,
    pub output: SType,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunDeclS {
    pub name: Name,
    pub param: Name,
    pub param_ty: SType,
    pub result_ty: SType,
    pub effects: LabelSet,
    pub body: Expr,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SurfaceProgram {
    pub effects: Vec<EffectDeclS>,
    /// Payload type of the program's exception label, if declared.
    pub exception: Option<SType>,
    pub funs: Vec<FunDeclS>,
    pub main: Option<Expr>,
}
