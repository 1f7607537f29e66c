//! Symbolic linear bounds over size measures of the entry argument.

use std::fmt;

use num_traits::{One, Zero};

use crate::potential::StructuralMismatch;
use crate::rational::{fmt_rat, Rational};
use crate::syntax::{SType, Value};
use crate::types::{AnnType, Ty};

/// One step from a value to a sub-value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Step {
    /// Every element of a list.
    Elem,
    Fst,
    Snd,
    /// Payload of a left injection.
    Inl,
    Inr,
}

/// What is counted at the end of a path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Measure {
    /// Total length of all lists at the path.
    Len,
    /// Number of left injections at the path.
    InlCount,
    InrCount,
    /// Number of pairs at the path.
    PairCount,
}

/// A size variable: a measure of the sub-values of the argument at a path.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SizeVar {
    pub path: Vec<Step>,
    pub measure: Measure,
}

impl SizeVar {
    /// True when the measure is 1 on every value (a pair not under a list
    /// or variant).
    fn is_unit(&self) -> bool {
        self.measure == Measure::PairCount && self.path.iter().all(|s| matches!(s, Step::Fst | Step::Snd))
    }

    pub fn display<'a>(&'a self, root: &'a str) -> impl fmt::Display + 'a {
        struct D<'a>(&'a SizeVar, &'a str);
        impl fmt::Display for D<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                let mut path = self.1.to_string();
                for s in &self.0.path {
                    path.push_str(match s {
                        Step::Elem => "[i]",
                        Step::Fst => ".0",
                        Step::Snd => ".1",
                        Step::Inl => ".inl",
                        Step::Inr => ".inr",
                    });
                }
                let nested = self.0.path.contains(&Step::Elem);
                match self.0.measure {
                    Measure::Len if nested => write!(f, "sum|{path}|"),
                    Measure::Len => write!(f, "|{path}|"),
                    Measure::InlCount => write!(f, "#inl({path})"),
                    Measure::InrCount => write!(f, "#inr({path})"),
                    Measure::PairCount => write!(f, "#pairs({path})"),
                }
            }
        }
        D(self, root)
    }

    /// The measure of `v`, which must inhabit the argument type.
    pub fn measure(&self, v: &Value) -> u64 {
        let mut here = vec![v];
        for s in &self.path {
            let mut next = Vec::new();
            for w in here {
                match (s, w) {
                    (Step::Elem, _) => {
                        if let Some(items) = w.list_items() {
                            next.extend(items);
                        }
                    }
                    (Step::Fst, Value::Pair(a, _)) => next.push(&**a),
                    (Step::Snd, Value::Pair(_, b)) => next.push(&**b),
                    (Step::Inl, Value::Inl(a)) => next.push(&**a),
                    (Step::Inr, Value::Inr(b)) => next.push(&**b),
                    _ => {}
                }
            }
            here = next;
        }
        here.iter()
            .map(|w| match (self.measure, w) {
                (Measure::Len, _) => w.list_items().map_or(0, |i| i.len() as u64),
                (Measure::InlCount, Value::Inl(_)) | (Measure::InrCount, Value::Inr(_)) => 1,
                (Measure::PairCount, Value::Pair(..)) => 1,
                _ => 0,
            })
            .sum()
    }
}

/// `constant + Σ coeff · size`, with nonnegative coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundPolynomial {
    /// Name used for the argument when printing.
    pub root: String,
    pub arg_ty: SType,
    pub constant: Rational,
    pub terms: Vec<(SizeVar, Rational)>,
}

impl BoundPolynomial {
    /// Reads the bound off a concrete argument type: each annotation becomes
    /// the coefficient of the measure of the positions it decorates.
    pub fn from_signature(root: &str, arg: &AnnType) -> BoundPolynomial {
        let mut b = BoundPolynomial {
            root: root.to_string(),
            arg_ty: arg.erase(),
            constant: arg.pot.clone(),
            terms: Vec::new(),
        };
        b.collect(&arg.ty, &mut Vec::new());
        b.terms.retain(|(_, c)| !c.is_zero());
        b
    }

    fn add(&mut self, v: SizeVar, c: &Rational) {
        if c.is_zero() {
            return;
        }
        if v.is_unit() {
            self.constant += c;
            return;
        }
        match self.terms.iter_mut().find(|(w, _)| *w == v) {
            Some((_, d)) => *d += c,
            None => self.terms.push((v, c.clone())),
        }
    }

    fn collect(&mut self, t: &Ty<Rational>, path: &mut Vec<Step>) {
        let at = |path: &Vec<Step>, measure| SizeVar {
            path: path.clone(),
            measure,
        };
        match t {
            Ty::Unit | Ty::Void | Ty::Int | Ty::Fun(_) | Ty::LinFun(_) => {}
            Ty::List(e) => {
                self.add(at(path, Measure::Len), &e.pot);
                path.push(Step::Elem);
                self.collect(&e.ty, path);
                path.pop();
            }
            Ty::Sum(a, b) => {
                self.add(at(path, Measure::InlCount), &a.pot);
                self.add(at(path, Measure::InrCount), &b.pot);
                for (s, c) in [(Step::Inl, a), (Step::Inr, b)] {
                    path.push(s);
                    self.collect(&c.ty, path);
                    path.pop();
                }
            }
            Ty::Prod(a, b) => {
                self.add(at(path, Measure::PairCount), &(&a.pot + &b.pot));
                for (s, c) in [(Step::Fst, a), (Step::Snd, b)] {
                    path.push(s);
                    self.collect(&c.ty, path);
                    path.pop();
                }
            }
        }
    }

    pub fn coefficient(&self, v: &SizeVar) -> Rational {
        self.terms
            .iter()
            .find(|(w, _)| w == v)
            .map(|(_, c)| c.clone())
            .unwrap_or_else(Rational::zero)
    }

    /// Sum of all coefficients.
    pub fn total_coefficient(&self) -> Rational {
        self.terms.iter().map(|(_, c)| c.clone()).sum()
    }

    /// Value of the bound on a concrete argument.
    pub fn eval(&self, v: &Value) -> Result<Rational, StructuralMismatch> {
        if !inhabits(v, &self.arg_ty) {
            return Err(StructuralMismatch {
                value: v.to_string(),
                ty: self.arg_ty.to_string(),
            });
        }
        let mut total = self.constant.clone();
        for (s, c) in &self.terms {
            total += c * Rational::from_integer(s.measure(v).into());
        }
        Ok(total)
    }
}

pub fn eval_bound(b: &BoundPolynomial, v: &Value) -> Result<Rational, StructuralMismatch> {
    b.eval(v)
}

/// Whether a closed first-order value has the given structural type.
pub fn inhabits(v: &Value, t: &SType) -> bool {
    match (v, t) {
        (Value::Unit, SType::Unit) | (Value::Int(_), SType::Int) => true,
        (Value::Pair(a, b), SType::Prod(ta, tb)) => inhabits(a, ta) && inhabits(b, tb),
        (Value::Inl(a), SType::Sum(ta, _)) => inhabits(a, ta),
        (Value::Inr(b), SType::Sum(_, tb)) => inhabits(b, tb),
        (Value::Nil | Value::Cons(..), SType::List(e)) => match v.list_items() {
            Some(items) => items.into_iter().all(|x| inhabits(x, e)),
            None => false,
        },
        (Value::Fun(_), SType::Fun(_)) => true,
        (Value::LinLam(_) | Value::Dcont(_), SType::LinFun(_)) => true,
        _ => false,
    }
}

impl fmt::Display for BoundPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if !self.constant.is_zero() || self.terms.is_empty() {
            parts.push(fmt_rat(&self.constant));
        }
        for (v, c) in &self.terms {
            let name = v.display(&self.root).to_string();
            if c.is_one() {
                parts.push(name);
            } else {
                parts.push(format!("{}*{name}", fmt_rat(c)));
            }
        }
        write!(f, "{}", parts.join(" + "))
    }
}
