//! Resource-annotated types, generic over the annotation domain.
//!
//! During inference annotations are LP variables; after solving they are
//! concrete rationals (`AnnType`).

use std::fmt;
use std::sync::Arc;

use num_traits::Zero;

use crate::rational::{fmt_rat, Rational};
use crate::syntax::{FnType, Label, SType};

/// Reference to the constraint family describing a (non-linear) function type.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FunRef {
    pub id: u32,
    pub shape: Arc<FnType>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Ty<A> {
    Unit,
    Void,
    Int,
    Prod(Box<Ann<A>>, Box<Ann<A>>),
    Sum(Box<Ann<A>>, Box<Ann<A>>),
    List(Box<Ann<A>>),
    Fun(FunRef),
    LinFun(Box<Arrow<A>>),
}

/// A type paired with a constant potential.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ann<A> {
    pub ty: Ty<A>,
    pub pot: A,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Arrow<A> {
    pub arg: Ann<A>,
    pub res: Ann<A>,
    pub effects: EffectSig<A>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SigEntry<A> {
    pub label: Label,
    pub input: Ann<A>,
    pub output: Ann<A>,
}

/// Effect signature; entries are kept in label declaration order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EffectSig<A> {
    pub entries: Vec<SigEntry<A>>,
}

impl<A> Default for EffectSig<A> {
    fn default() -> Self {
        EffectSig {
            entries: Vec::new(),
        }
    }
}

impl<A> EffectSig<A> {
    pub fn get(&self, label: &str) -> Option<&SigEntry<A>> {
        self.entries.iter().find(|e| &*e.label == label)
    }

    pub fn labels(&self) -> impl Iterator<Item = &Label> {
        self.entries.iter().map(|e| &e.label)
    }
}

pub type AnnType = Ann<Rational>;
pub type ConcreteTy = Ty<Rational>;
pub type ConcreteArrow = Arrow<Rational>;

impl<A> Ann<A> {
    pub fn new(ty: Ty<A>, pot: A) -> Ann<A> {
        Ann { ty, pot }
    }

    pub fn map<B>(&self, f: &mut impl FnMut(&A) -> B) -> Ann<B> {
        Ann {
            ty: self.ty.map(f),
            pot: f(&self.pot),
        }
    }

    pub fn try_map<B, E>(&self, f: &mut impl FnMut(&A) -> Result<B, E>) -> Result<Ann<B>, E> {
        Ok(Ann {
            ty: self.ty.try_map(f)?,
            pot: f(&self.pot)?,
        })
    }

    /// Visits every annotation, including the top-level one, in pre-order.
    pub fn for_each_pot<'a>(&'a self, f: &mut impl FnMut(&'a A)) {
        f(&self.pot);
        self.ty.for_each_pot(f);
    }

    pub fn erase(&self) -> SType {
        self.ty.erase()
    }
}

impl<A> Ty<A> {
    pub fn map<B>(&self, f: &mut impl FnMut(&A) -> B) -> Ty<B> {
        match self {
            Ty::Unit => Ty::Unit,
            Ty::Void => Ty::Void,
            Ty::Int => Ty::Int,
            Ty::Prod(a, b) => Ty::Prod(Box::new(a.map(f)), Box::new(b.map(f))),
            Ty::Sum(a, b) => Ty::Sum(Box::new(a.map(f)), Box::new(b.map(f))),
            Ty::List(a) => Ty::List(Box::new(a.map(f))),
            Ty::Fun(r) => Ty::Fun(r.clone()),
            Ty::LinFun(arrow) => Ty::LinFun(Box::new(arrow.map(f))),
        }
    }

    pub fn try_map<B, E>(&self, f: &mut impl FnMut(&A) -> Result<B, E>) -> Result<Ty<B>, E> {
        Ok(match self {
            Ty::Unit => Ty::Unit,
            Ty::Void => Ty::Void,
            Ty::Int => Ty::Int,
            Ty::Prod(a, b) => Ty::Prod(Box::new(a.try_map(f)?), Box::new(b.try_map(f)?)),
            Ty::Sum(a, b) => Ty::Sum(Box::new(a.try_map(f)?), Box::new(b.try_map(f)?)),
            Ty::List(a) => Ty::List(Box::new(a.try_map(f)?)),
            Ty::Fun(r) => Ty::Fun(r.clone()),
            Ty::LinFun(arrow) => Ty::LinFun(Box::new(arrow.try_map(f)?)),
        })
    }

    pub fn for_each_pot<'a>(&'a self, f: &mut impl FnMut(&'a A)) {
        match self {
            Ty::Unit | Ty::Void | Ty::Int | Ty::Fun(_) => {}
            Ty::Prod(a, b) | Ty::Sum(a, b) => {
                a.for_each_pot(f);
                b.for_each_pot(f);
            }
            Ty::List(a) => a.for_each_pot(f),
            Ty::LinFun(arrow) => arrow.for_each_pot(f),
        }
    }

    pub fn erase(&self) -> SType {
        match self {
            Ty::Unit => SType::Unit,
            Ty::Void => SType::Void,
            Ty::Int => SType::Int,
            Ty::Prod(a, b) => SType::prod(a.erase(), b.erase()),
            Ty::Sum(a, b) => SType::sum(a.erase(), b.erase()),
            Ty::List(a) => SType::list(a.erase()),
            Ty::Fun(r) => SType::Fun(Box::new((*r.shape).clone())),
            Ty::LinFun(arrow) => SType::LinFun(Box::new(arrow.erase())),
        }
    }

    pub fn contains_linear(&self) -> bool {
        match self {
            Ty::Unit | Ty::Void | Ty::Int | Ty::Fun(_) => false,
            Ty::LinFun(_) => true,
            Ty::Prod(a, b) | Ty::Sum(a, b) => a.ty.contains_linear() || b.ty.contains_linear(),
            Ty::List(a) => a.ty.contains_linear(),
        }
    }

    /// Builds an annotated type of the given shape, drawing annotations from
    /// `pot` and function references from `fun`.
    pub fn from_stype(
        s: &SType,
        pot: &mut impl FnMut() -> A,
        fun: &mut impl FnMut(&FnType) -> FunRef,
        labels: &mut impl FnMut(&FnType) -> Vec<(Label, SType, SType)>,
    ) -> Ty<A> {
        match s {
            SType::Unit => Ty::Unit,
            SType::Void => Ty::Void,
            SType::Int => Ty::Int,
            SType::Prod(a, b) => Ty::Prod(
                Box::new(Ann::from_stype(a, pot, fun, labels)),
                Box::new(Ann::from_stype(b, pot, fun, labels)),
            ),
            SType::Sum(a, b) => Ty::Sum(
                Box::new(Ann::from_stype(a, pot, fun, labels)),
                Box::new(Ann::from_stype(b, pot, fun, labels)),
            ),
            SType::List(a) => Ty::List(Box::new(Ann::from_stype(a, pot, fun, labels))),
            SType::Fun(ft) => Ty::Fun(fun(ft)),
            SType::LinFun(ft) => Ty::LinFun(Box::new(Arrow::from_fn_type(ft, pot, fun, labels))),
        }
    }
}

impl<A> Ann<A> {
    pub fn from_stype(
        s: &SType,
        pot: &mut impl FnMut() -> A,
        fun: &mut impl FnMut(&FnType) -> FunRef,
        labels: &mut impl FnMut(&FnType) -> Vec<(Label, SType, SType)>,
    ) -> Ann<A> {
        let p = pot();
        Ann {
            ty: Ty::from_stype(s, pot, fun, labels),
            pot: p,
        }
    }
}

impl<A> Arrow<A> {
    pub fn map<B>(&self, f: &mut impl FnMut(&A) -> B) -> Arrow<B> {
        Arrow {
            arg: self.arg.map(f),
            res: self.res.map(f),
            effects: self.effects.map(f),
        }
    }

    pub fn try_map<B, E>(&self, f: &mut impl FnMut(&A) -> Result<B, E>) -> Result<Arrow<B>, E> {
        Ok(Arrow {
            arg: self.arg.try_map(f)?,
            res: self.res.try_map(f)?,
            effects: self.effects.try_map(f)?,
        })
    }

    pub fn for_each_pot<'a>(&'a self, f: &mut impl FnMut(&'a A)) {
        self.arg.for_each_pot(f);
        self.res.for_each_pot(f);
        self.effects.for_each_pot(f);
    }

    pub fn erase(&self) -> FnType {
        FnType {
            arg: self.arg.erase(),
            res: self.res.erase(),
            effects: self.effects.labels().cloned().collect(),
        }
    }

    /// `labels` supplies the signature entries (label, input, output) in order.
    pub fn from_fn_type(
        ft: &FnType,
        pot: &mut impl FnMut() -> A,
        fun: &mut impl FnMut(&FnType) -> FunRef,
        labels: &mut impl FnMut(&FnType) -> Vec<(Label, SType, SType)>,
    ) -> Arrow<A> {
        let arg = Ann::from_stype(&ft.arg, pot, fun, labels);
        let res = Ann::from_stype(&ft.res, pot, fun, labels);
        let entries = labels(ft)
            .into_iter()
            .map(|(label, input, output)| SigEntry {
                label,
                input: Ann::from_stype(&input, pot, fun, labels),
                output: Ann::from_stype(&output, pot, fun, labels),
            })
            .collect();
        Arrow {
            arg,
            res,
            effects: EffectSig { entries },
        }
    }
}

impl<A> EffectSig<A> {
    pub fn map<B>(&self, f: &mut impl FnMut(&A) -> B) -> EffectSig<B> {
        EffectSig {
            entries: self
                .entries
                .iter()
                .map(|e| SigEntry {
                    label: e.label.clone(),
                    input: e.input.map(f),
                    output: e.output.map(f),
                })
                .collect(),
        }
    }

    pub fn try_map<B, E>(&self, f: &mut impl FnMut(&A) -> Result<B, E>) -> Result<EffectSig<B>, E> {
        let mut entries = Vec::with_capacity(self.entries.len());
        for e in &self.entries {
            entries.push(SigEntry {
                label: e.label.clone(),
                input: e.input.try_map(f)?,
                output: e.output.try_map(f)?,
            });
        }
        Ok(EffectSig { entries })
    }

    pub fn for_each_pot<'a>(&'a self, f: &mut impl FnMut(&'a A)) {
        for e in &self.entries {
            e.input.for_each_pot(f);
            e.output.for_each_pot(f);
        }
    }
}

// ---------------------------------------------------------------------------
// Zeroing

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("linear function type cannot be zeroed")]
pub struct LinearInZero;

/// Sets every annotation to zero. Undefined (error) on linear function types.
pub fn zero(t: &AnnType) -> Result<AnnType, LinearInZero> {
    Ok(Ann {
        ty: zero_ty(&t.ty)?,
        pot: Rational::zero(),
    })
}

pub fn zero_ty(t: &ConcreteTy) -> Result<ConcreteTy, LinearInZero> {
    if t.contains_linear() {
        return Err(LinearInZero);
    }
    Ok(t.map(&mut |_| Rational::zero()))
}

pub fn is_potential_free(t: &AnnType) -> bool {
    match zero(t) {
        Ok(z) => z == *t,
        Err(_) => false,
    }
}

// ---------------------------------------------------------------------------
// Printing

/// How an annotation is shown by the type printer.
pub trait ShowPot {
    fn show(&self) -> String;
    fn is_zero_pot(&self) -> bool;
}

impl ShowPot for Rational {
    fn show(&self) -> String {
        fmt_rat(self)
    }
    fn is_zero_pot(&self) -> bool {
        self.is_zero()
    }
}

impl<A: ShowPot> Ty<A> {
    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
        let (mine, paren) = match self {
            Ty::LinFun(_) => (0, prec > 0),
            Ty::Sum(..) => (1, prec > 1),
            Ty::Prod(..) => (2, prec > 2),
            _ => (3, false),
        };
        if paren {
            write!(f, "(")?;
        }
        match self {
            Ty::Unit => write!(f, "unit")?,
            Ty::Void => write!(f, "void")?,
            Ty::Int => write!(f, "int")?,
            Ty::List(a) => {
                write!(f, "L^{}(", a.pot.show())?;
                a.ty.fmt_prec(f, 0)?;
                write!(f, ")")?;
            }
            Ty::Sum(a, b) => {
                a.ty.fmt_prec(f, 3)?;
                write!(f, "^{} + ", a.pot.show())?;
                b.ty.fmt_prec(f, 3)?;
                write!(f, "^{}", b.pot.show())?;
            }
            Ty::Prod(a, b) => {
                for (i, c) in [a, b].into_iter().enumerate() {
                    if i == 1 {
                        write!(f, " * ")?;
                    }
                    if c.pot.is_zero_pot() {
                        c.ty.fmt_prec(f, mine + 1)?;
                    } else {
                        c.ty.fmt_prec(f, 3)?;
                        write!(f, "^{}", c.pot.show())?;
                    }
                }
            }
            Ty::Fun(r) => write!(f, "({})", SType::Fun(Box::new((*r.shape).clone())))?,
            Ty::LinFun(arrow) => arrow.fmt_with(f, "-o")?,
        }
        if paren {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl<A: ShowPot> Arrow<A> {
    fn fmt_with(&self, f: &mut fmt::Formatter<'_>, arrow: &str) -> fmt::Result {
        self.arg.ty.fmt_prec(f, 1)?;
        write!(f, " {arrow}[{};{}] ", self.arg.pot.show(), self.res.pot.show())?;
        self.res.ty.fmt_prec(f, 1)?;
        if !self.effects.entries.is_empty() {
            write!(f, " / {}", self.effects)?;
        }
        Ok(())
    }

    /// Prints as a (resource-polymorphic instance of a) function arrow.
    pub fn display_fun(&self) -> impl fmt::Display + '_ {
        struct D<'a, A>(&'a Arrow<A>);
        impl<A: ShowPot> fmt::Display for D<'_, A> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                self.0.fmt_with(f, "->")
            }
        }
        D(self)
    }
}

impl<A: ShowPot> fmt::Display for EffectSig<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}: ", e.label)?;
            e.input.ty.fmt_prec(f, 1)?;
            write!(f, " =>[{};{}] ", e.input.pot.show(), e.output.pot.show())?;
            e.output.ty.fmt_prec(f, 1)?;
        }
        write!(f, "}}")
    }
}

impl<A: ShowPot> fmt::Display for Ty<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

/// Shows the type and, when nonzero, its constant potential as `<τ, q>`.
impl<A: ShowPot> fmt::Display for Ann<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pot.is_zero_pot() {
            write!(f, "{}", self.ty)
        } else {
            write!(f, "<{}, {}>", self.ty, self.pot.show())
        }
    }
}

impl<A: ShowPot> fmt::Display for Arrow<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_with(f, "->")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    pub(crate) fn ann(ty: ConcreteTy, q: i64) -> AnnType {
        Ann::new(ty, rat(q))
    }

    fn list(elem: ConcreteTy, q: i64) -> ConcreteTy {
        Ty::List(Box::new(ann(elem, q)))
    }

    #[test]
    fn prints_list_and_arrow() {
        let arrow = Arrow {
            arg: ann(list(list(Ty::Int, 1), 2), 1),
            res: ann(Ty::Unit, 0),
            effects: EffectSig::default(),
        };
        assert_eq!(arrow.to_string(), "L^2(L^1(int)) ->[1;0] unit");
    }

    #[test]
    fn prints_sums_products_and_effects() {
        let sum = Ty::Sum(Box::new(ann(Ty::Unit, 3)), Box::new(ann(Ty::Unit, 5)));
        assert_eq!(sum.to_string(), "unit^3 + unit^5");
        let prod = Ty::Prod(
            Box::new(ann(list(Ty::Int, 1), 0)),
            Box::new(ann(Ty::Int, 2)),
        );
        assert_eq!(prod.to_string(), "L^1(int) * int^2");
        let lin = Arrow {
            arg: ann(Ty::Unit, 1),
            res: ann(Ty::Unit, 0),
            effects: EffectSig {
                entries: vec![SigEntry {
                    label: Arc::from("Yield"),
                    input: ann(Ty::Int, 1),
                    output: ann(Ty::Unit, 0),
                }],
            },
        };
        assert_eq!(
            Ty::LinFun(Box::new(lin)).to_string(),
            "unit -o[1;0] unit / {Yield: int =>[1;0] unit}"
        );
    }

    #[test]
    fn zero_clears_every_annotation() {
        let t = ann(list(Ty::Unit, 3), 2);
        assert_eq!(zero(&t).unwrap(), ann(list(Ty::Unit, 0), 0));
        assert_eq!(zero(&ann(Ty::Unit, 0)).unwrap(), ann(Ty::Unit, 0));
    }

    #[test]
    fn zero_rejects_linear_functions() {
        let lin = Arrow {
            arg: ann(Ty::Unit, 1),
            res: ann(Ty::Unit, 0),
            effects: EffectSig::default(),
        };
        let t = ann(Ty::LinFun(Box::new(lin)), 0);
        assert_eq!(zero(&t), Err(LinearInZero));
        assert!(!is_potential_free(&t));
    }

    #[test]
    fn potential_freedom() {
        assert!(is_potential_free(&ann(list(Ty::Unit, 0), 0)));
        assert!(!is_potential_free(&ann(list(Ty::Unit, 1), 0)));
    }
}
