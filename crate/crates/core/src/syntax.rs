//! Fine-grain core language: structural types, values, computations, programs.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use crate::rational::{fmt_rat, Rational};

pub type Name = Arc<str>;
pub type Label = Arc<str>;
pub type LabelSet = BTreeSet<Label>;

/// Label reserved for exceptions after desugaring.
pub const EXC: &str = "exc";

pub fn name(s: &str) -> Name {
    Arc::from(s)
}

/// Structural (annotation-free) types.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SType {
    Unit,
    Void,
    Int,
    Prod(Box<SType>, Box<SType>),
    Sum(Box<SType>, Box<SType>),
    List(Box<SType>),
    Fun(Box<FnType>),
    LinFun(Box<FnType>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FnType {
    pub arg: SType,
    pub res: SType,
    pub effects: LabelSet,
}

impl SType {
    pub fn prod(a: SType, b: SType) -> SType {
        SType::Prod(Box::new(a), Box::new(b))
    }
    pub fn sum(a: SType, b: SType) -> SType {
        SType::Sum(Box::new(a), Box::new(b))
    }
    pub fn list(a: SType) -> SType {
        SType::List(Box::new(a))
    }
    pub fn bool() -> SType {
        SType::sum(SType::Unit, SType::Unit)
    }
    pub fn linfun(arg: SType, res: SType, effects: LabelSet) -> SType {
        SType::LinFun(Box::new(FnType { arg, res, effects }))
    }
    pub fn fun(arg: SType, res: SType, effects: LabelSet) -> SType {
        SType::Fun(Box::new(FnType { arg, res, effects }))
    }

    /// True if a linear function type occurs anywhere inside.
    pub fn contains_linear(&self) -> bool {
        match self {
            SType::Unit | SType::Void | SType::Int | SType::Fun(_) => false,
            SType::LinFun(_) => true,
            SType::Prod(a, b) | SType::Sum(a, b) => a.contains_linear() || b.contains_linear(),
            SType::List(a) => a.contains_linear(),
        }
    }
}

fn fmt_effects(f: &mut fmt::Formatter<'_>, effects: &LabelSet) -> fmt::Result {
    if effects.is_empty() {
        return Ok(());
    }
    write!(f, " / {{")?;
    for (i, l) in effects.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{l}")?;
    }
    write!(f, "}}")
}

impl SType {
    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
        // precedence: 0 arrows, 1 sums, 2 products, 3 atoms
        let (mine, paren) = match self {
            SType::Fun(_) | SType::LinFun(_) => (0, prec > 0),
            SType::Sum(..) => (1, prec > 1),
            SType::Prod(..) => (2, prec > 2),
            _ => (3, false),
        };
        if paren {
            write!(f, "(")?;
        }
        match self {
            SType::Unit => write!(f, "unit")?,
            SType::Void => write!(f, "void")?,
            SType::Int => write!(f, "int")?,
            SType::List(a) => write!(f, "list({a})")?,
            SType::Prod(a, b) => {
                a.fmt_prec(f, mine + 1)?;
                write!(f, " * ")?;
                b.fmt_prec(f, mine + 1)?;
            }
            SType::Sum(a, b) => {
                a.fmt_prec(f, mine + 1)?;
                write!(f, " + ")?;
                b.fmt_prec(f, mine + 1)?;
            }
            SType::Fun(ft) | SType::LinFun(ft) => {
                ft.arg.fmt_prec(f, 1)?;
                let arrow = if matches!(self, SType::Fun(_)) { "->" } else { "-o" };
                write!(f, " {arrow} ")?;
                ft.res.fmt_prec(f, 1)?;
                fmt_effects(f, &ft.effects)?;
            }
        }
        if paren {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for SType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PrimOp {
    Add,
    Sub,
    Mul,
    Lt,
    Eq,
}

impl PrimOp {
    pub fn symbol(self) -> &'static str {
        match self {
            PrimOp::Add => "+",
            PrimOp::Sub => "-",
            PrimOp::Mul => "*",
            PrimOp::Lt => "<",
            PrimOp::Eq => "==",
        }
    }

    pub fn result_type(self) -> SType {
        match self {
            PrimOp::Add | PrimOp::Sub | PrimOp::Mul => SType::Int,
            PrimOp::Lt | PrimOp::Eq => SType::bool(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Var(Name),
    /// Reference to a top-level (possibly recursive) function declaration.
    Fun(Name),
    Unit,
    Int(i64),
    Pair(Arc<Value>, Arc<Value>),
    Inl(Arc<Value>),
    Inr(Arc<Value>),
    Nil,
    Cons(Arc<Value>, Arc<Value>),
    LinLam(Arc<LinLam>),
    Dcont(Arc<Dcont>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinLam {
    pub param: Name,
    pub ty: FnType,
    pub body: Computation,
}

/// A captured stack segment, bottom frame first. Applying it marks it used.
#[derive(Debug)]
pub struct Dcont {
    pub frames: Vec<Frame>,
    used: AtomicBool,
}

impl Dcont {
    pub fn new(frames: Vec<Frame>) -> Dcont {
        Dcont {
            frames,
            used: AtomicBool::new(false),
        }
    }

    pub fn is_used(&self) -> bool {
        self.used.load(Ordering::SeqCst)
    }

    /// Marks the continuation as used; returns false if it already was.
    pub fn take(&self) -> bool {
        !self.used.swap(true, Ordering::SeqCst)
    }
}

impl PartialEq for Dcont {
    fn eq(&self, other: &Dcont) -> bool {
        std::ptr::eq(self, other)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Frame {
    Bind {
        var: Name,
        ty: SType,
        body: Arc<Computation>,
    },
    Handler(Arc<HandlerDef>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub label: Label,
    pub payload: Name,
    pub cont: Name,
    pub body: Computation,
}

/// Everything of a `handle` node except the handled computation.
#[derive(Debug, Clone, PartialEq)]
pub struct HandlerDef {
    /// Structural type of the handled computation.
    pub body_ty: SType,
    /// Labels handled, in declaration order of the branches.
    pub branches: Vec<Branch>,
    pub ret_var: Name,
    pub ret_body: Computation,
    /// Result type of the whole handle expression.
    pub res_ty: SType,
    /// Effects the branches and return branch may perform.
    pub ambient: LabelSet,
}

impl HandlerDef {
    pub fn labels(&self) -> LabelSet {
        self.branches.iter().map(|b| b.label.clone()).collect()
    }

    pub fn branch(&self, label: &str) -> Option<&Branch> {
        self.branches.iter().find(|b| &*b.label == label)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Computation {
    Ret(Value),
    Let {
        var: Name,
        ty: SType,
        bound: Box<Computation>,
        body: Box<Computation>,
    },
    Tick(Rational),
    App(Value, Value),
    LinApp(Value, Value),
    CasePair {
        scrut: Value,
        ty: SType,
        left: Name,
        right: Name,
        body: Box<Computation>,
    },
    CaseVoid {
        scrut: Value,
        res_ty: SType,
    },
    CaseSum {
        scrut: Value,
        ty: SType,
        left: Name,
        left_body: Box<Computation>,
        right: Name,
        right_body: Box<Computation>,
    },
    CaseList {
        scrut: Value,
        ty: SType,
        nil_body: Box<Computation>,
        head: Name,
        tail: Name,
        cons_body: Box<Computation>,
    },
    Do {
        label: Label,
        payload: Value,
    },
    Handle {
        body: Box<Computation>,
        handler: Arc<HandlerDef>,
    },
    Prim {
        op: PrimOp,
        left: Value,
        right: Value,
    },
    /// Exception raise; removed by desugaring. `ty` is the type it is used at.
    Raise {
        payload: Value,
        ty: SType,
    },
    /// Exception handler; removed by desugaring.
    Try {
        body: Box<Computation>,
        body_ty: SType,
        var: Name,
        handler: Box<Computation>,
        ambient: LabelSet,
    },
    /// Splits the potential of `value` between two fresh names bound in `body`.
    Share {
        value: Value,
        /// Structural type of `value`, kept so closed values stay checkable.
        ty: SType,
        left: Name,
        right: Name,
        body: Box<Computation>,
    },
}

impl Computation {
    pub fn let_(var: Name, ty: SType, bound: Computation, body: Computation) -> Computation {
        Computation::Let {
            var,
            ty,
            bound: Box::new(bound),
            body: Box::new(body),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EffectDecl {
    pub label: Label,
    pub input: SType,
    pub output: SType,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunDecl {
    pub name: Name,
    pub param: Name,
    pub param_ty: SType,
    pub result_ty: SType,
    pub effects: LabelSet,
    pub body: Computation,
}

impl FunDecl {
    pub fn fn_type(&self) -> FnType {
        FnType {
            arg: self.param_ty.clone(),
            res: self.result_ty.clone(),
            effects: self.effects.clone(),
        }
    }
}

/// A lowered program. `main`, if present, is stored as a function of unit.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Program {
    pub effects: Vec<EffectDecl>,
    pub funs: Vec<FunDecl>,
}

pub const MAIN: &str = "main";

impl Program {
    pub fn effect(&self, label: &str) -> Option<&EffectDecl> {
        self.effects.iter().find(|d| &*d.label == label)
    }

    pub fn fun(&self, name: &str) -> Option<&FunDecl> {
        self.funs.iter().find(|d| &*d.name == name)
    }

    /// Position of the label in declaration order, used to order signatures.
    pub fn label_rank(&self, label: &str) -> usize {
        self.effects
            .iter()
            .position(|d| &*d.label == label)
            .unwrap_or(usize::MAX)
    }

    /// Labels sorted by declaration order.
    pub fn ordered_labels<'a>(&self, labels: impl IntoIterator<Item = &'a Label>) -> Vec<Label> {
        let mut v: Vec<Label> = labels.into_iter().cloned().collect();
        v.sort_by_key(|l| (self.label_rank(l), l.clone()));
        v.dedup();
        v
    }

    pub fn map_bodies(
        &self,
        mut f: impl FnMut(&FunDecl) -> Result<Computation, crate::Error>,
    ) -> Result<Program, crate::Error> {
        let mut funs = Vec::with_capacity(self.funs.len());
        for d in &self.funs {
            let body = f(d)?;
            funs.push(FunDecl { body, ..d.clone() });
        }
        Ok(Program {
            effects: self.effects.clone(),
            funs,
        })
    }
}

// ---------------------------------------------------------------------------
// Printing

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Var(x) => write!(f, "{x}"),
            Value::Fun(g) => write!(f, "{g}"),
            Value::Unit => write!(f, "()"),
            Value::Int(n) => write!(f, "{n}"),
            Value::Pair(a, b) => write!(f, "({a}, {b})"),
            Value::Inl(a) => write!(f, "inl {}", Atom(a)),
            Value::Inr(a) => write!(f, "inr {}", Atom(a)),
            Value::Nil => write!(f, "[]"),
            Value::Cons(..) => {
                if let Some(items) = self.list_items() {
                    write!(f, "[")?;
                    for (i, v) in items.iter().enumerate() {
                        if i > 0 {
                            write!(f, ", ")?;
                        }
                        write!(f, "{v}")?;
                    }
                    write!(f, "]")
                } else {
                    let Value::Cons(h, t) = self else { unreachable!() };
                    write!(f, "{} :: {t}", Atom(h))
                }
            }
            Value::LinLam(l) => write!(f, "(fn {} -> {})", l.param, l.body),
            Value::Dcont(d) => write!(f, "<dcont/{}>", d.frames.len()),
        }
    }
}

struct Atom<'a>(&'a Value);

impl fmt::Display for Atom<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Value::Inl(_) | Value::Inr(_) => write!(f, "({})", self.0),
            Value::Cons(..) if self.0.list_items().is_none() => write!(f, "({})", self.0),
            Value::Int(n) if *n < 0 => write!(f, "({n})"),
            v => write!(f, "{v}"),
        }
    }
}

impl Value {
    /// The elements of a nil-terminated list value.
    pub fn list_items(&self) -> Option<Vec<&Value>> {
        let mut out = Vec::new();
        let mut cur = self;
        loop {
            match cur {
                Value::Nil => return Some(out),
                Value::Cons(h, t) => {
                    out.push(&**h);
                    cur = t;
                }
                _ => return None,
            }
        }
    }

    pub fn list(items: impl IntoIterator<Item = Value>) -> Value {
        let items: Vec<Value> = items.into_iter().collect();
        items
            .into_iter()
            .rev()
            .fold(Value::Nil, |acc, v| Value::Cons(Arc::new(v), Arc::new(acc)))
    }

    pub fn pair(a: Value, b: Value) -> Value {
        Value::Pair(Arc::new(a), Arc::new(b))
    }

    pub fn inl(a: Value) -> Value {
        Value::Inl(Arc::new(a))
    }

    pub fn inr(a: Value) -> Value {
        Value::Inr(Arc::new(a))
    }

    /// Equality that ignores continuation identity and lambda bodies' sharing.
    pub fn same_data(&self, other: &Value) -> bool {
        match (self, other) {
            (Value::Pair(a, b), Value::Pair(c, d)) | (Value::Cons(a, b), Value::Cons(c, d)) => {
                a.same_data(c) && b.same_data(d)
            }
            (Value::Inl(a), Value::Inl(b)) | (Value::Inr(a), Value::Inr(b)) => a.same_data(b),
            (Value::Dcont(_), Value::Dcont(_)) => true,
            _ => self == other,
        }
    }
}

fn indent(f: &mut fmt::Formatter<'_>, n: usize) -> fmt::Result {
    for _ in 0..n {
        write!(f, "  ")?;
    }
    Ok(())
}

impl Computation {
    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, ind: usize) -> fmt::Result {
        match self {
            Computation::Ret(v) => write!(f, "ret {}", Atom(v)),
            Computation::Let {
                var,
                ty,
                bound,
                body,
            } => {
                write!(f, "let {var} : {ty} = ")?;
                bound.fmt_at(f, ind + 1)?;
                writeln!(f, " in")?;
                indent(f, ind)?;
                body.fmt_at(f, ind)
            }
            Computation::Tick(q) => write!(f, "tick {}", fmt_rat(q)),
            Computation::App(g, v) => write!(f, "{} {}", Atom(g), Atom(v)),
            Computation::LinApp(g, v) => write!(f, "{} @ {}", Atom(g), Atom(v)),
            Computation::CasePair {
                scrut,
                left,
                right,
                body,
                ..
            } => {
                write!(f, "case {scrut} {{ ({left}, {right}) -> ")?;
                body.fmt_at(f, ind + 1)?;
                write!(f, " }}")
            }
            Computation::CaseVoid { scrut, .. } => write!(f, "case-void {scrut}"),
            Computation::CaseSum {
                scrut,
                left,
                left_body,
                right,
                right_body,
                ..
            } => {
                writeln!(f, "case {scrut} {{")?;
                indent(f, ind + 1)?;
                write!(f, "inl {left} -> ")?;
                left_body.fmt_at(f, ind + 2)?;
                writeln!(f)?;
                indent(f, ind + 1)?;
                write!(f, "| inr {right} -> ")?;
                right_body.fmt_at(f, ind + 2)?;
                writeln!(f)?;
                indent(f, ind)?;
                write!(f, "}}")
            }
            Computation::CaseList {
                scrut,
                nil_body,
                head,
                tail,
                cons_body,
                ..
            } => {
                writeln!(f, "case {scrut} {{")?;
                indent(f, ind + 1)?;
                write!(f, "[] -> ")?;
                nil_body.fmt_at(f, ind + 2)?;
                writeln!(f)?;
                indent(f, ind + 1)?;
                write!(f, "| {head} :: {tail} -> ")?;
                cons_body.fmt_at(f, ind + 2)?;
                writeln!(f)?;
                indent(f, ind)?;
                write!(f, "}}")
            }
            Computation::Do { label, payload } => write!(f, "do {label} {}", Atom(payload)),
            Computation::Handle { body, handler } => {
                write!(f, "handle ")?;
                body.fmt_at(f, ind + 1)?;
                writeln!(f, " {{")?;
                indent(f, ind + 1)?;
                write!(f, "return {} -> ", handler.ret_var)?;
                handler.ret_body.fmt_at(f, ind + 2)?;
                for b in &handler.branches {
                    writeln!(f)?;
                    indent(f, ind + 1)?;
                    write!(f, "| {} {} {} -> ", b.label, b.payload, b.cont)?;
                    b.body.fmt_at(f, ind + 2)?;
                }
                writeln!(f)?;
                indent(f, ind)?;
                write!(f, "}}")
            }
            Computation::Prim { op, left, right } => {
                write!(f, "{} {} {}", Atom(left), op.symbol(), Atom(right))
            }
            Computation::Raise { payload, .. } => write!(f, "raise {}", Atom(payload)),
            Computation::Try {
                body, var, handler, ..
            } => {
                write!(f, "try ")?;
                body.fmt_at(f, ind + 1)?;
                write!(f, " catch {var} -> ")?;
                handler.fmt_at(f, ind + 1)
            }
            Computation::Share {
                value,
                left,
                right,
                body,
                ..
            } => {
                writeln!(f, "share {value} as {left}, {right} in")?;
                indent(f, ind)?;
                body.fmt_at(f, ind)
            }
        }
    }
}

impl fmt::Display for Computation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, 0)
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.effects {
            writeln!(f, "effect {} : {} => {};", e.label, e.input, e.output)?;
        }
        for d in &self.funs {
            write!(f, "fun {} ({}: {}): {}", d.name, d.param, d.param_ty, d.result_ty)?;
            if !d.effects.is_empty() {
                let labels = self.ordered_labels(&d.effects);
                let labels: Vec<&str> = labels.iter().map(|l| &**l).collect();
                write!(f, " / {{{}}}", labels.join(", "))?;
            }
            writeln!(f, " =")?;
            indent(f, 1)?;
            d.body.fmt_at(f, 1)?;
            writeln!(f, ";")?;
        }
        Ok(())
    }
}

impl Computation {
    /// Visits every value occurring directly in `self` or its
    /// subcomputations, not descending into values themselves.
    pub fn for_each_value<'a>(&'a self, f: &mut impl FnMut(&'a Value)) {
        match self {
            Computation::Ret(v) | Computation::Do { payload: v, .. } | Computation::Raise { payload: v, .. } => f(v),
            Computation::CaseVoid { scrut, .. } => f(scrut),
            Computation::Tick(_) => {}
            Computation::App(a, b) | Computation::LinApp(a, b) | Computation::Prim { left: a, right: b, .. } => {
                f(a);
                f(b);
            }
            Computation::Let { bound, body, .. } => {
                bound.for_each_value(f);
                body.for_each_value(f);
            }
            Computation::CasePair { scrut, body, .. } => {
                f(scrut);
                body.for_each_value(f);
            }
            Computation::CaseSum { scrut, left_body, right_body, .. } => {
                f(scrut);
                left_body.for_each_value(f);
                right_body.for_each_value(f);
            }
            Computation::CaseList { scrut, nil_body, cons_body, .. } => {
                f(scrut);
                nil_body.for_each_value(f);
                cons_body.for_each_value(f);
            }
            Computation::Handle { body, handler } => {
                body.for_each_value(f);
                handler.ret_body.for_each_value(f);
                for b in &handler.branches {
                    b.body.for_each_value(f);
                }
            }
            Computation::Try { body, handler, .. } => {
                body.for_each_value(f);
                handler.for_each_value(f);
            }
            Computation::Share { value, body, .. } => {
                f(value);
                body.for_each_value(f);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prints_structural_types() {
        let t = SType::fun(
            SType::prod(SType::list(SType::Int), SType::sum(SType::Unit, SType::Int)),
            SType::Unit,
            [name("Insert")].into_iter().collect(),
        );
        assert_eq!(t.to_string(), "list(int) * (unit + int) -> unit / {Insert}");
    }

    #[test]
    fn prints_list_values() {
        let v = Value::list([Value::Int(1), Value::list([Value::Int(-2)])]);
        assert_eq!(v.to_string(), "[1, [-2]]");
        let open = Value::Cons(Arc::new(Value::Int(1)), Arc::new(Value::Var(name("t"))));
        assert_eq!(open.to_string(), "1 :: t");
    }

    #[test]
    fn dcont_is_one_shot() {
        let d = Dcont::new(vec![]);
        assert!(!d.is_used());
        assert!(d.take());
        assert!(!d.take());
        assert!(d.is_used());
    }
}
