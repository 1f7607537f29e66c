//! Linear constraint systems over nonnegative rational variables.

mod simplex;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{Signed, Zero};

use crate::rational::{fmt_rat, Rational};
use crate::types::ShowPot;

pub use simplex::{solve, Solution};

/// An annotation variable. Variables are implicitly constrained to be >= 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(pub u32);

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q{}", self.0)
    }
}

impl ShowPot for Var {
    fn show(&self) -> String {
        self.to_string()
    }
    fn is_zero_pot(&self) -> bool {
        false
    }
}

/// Allocates variables and remembers where each came from.
#[derive(Debug, Clone, Default)]
pub struct VarPool {
    tags: Vec<Arc<str>>,
}

impl VarPool {
    pub fn new() -> VarPool {
        VarPool::default()
    }

    pub fn new_var(&mut self, tag: impl Into<Arc<str>>) -> Var {
        let id = u32::try_from(self.tags.len()).expect("variable pool exhausted");
        self.tags.push(tag.into());
        Var(id)
    }

    pub fn tag(&self, v: Var) -> Option<&str> {
        self.tags.get(v.0 as usize).map(|t| &**t)
    }

    pub fn shared_tag(&self, v: Var) -> Option<Arc<str>> {
        self.tags.get(v.0 as usize).cloned()
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }
}

/// `Σ coeff·var + constant`, with no zero coefficients stored.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LinExpr {
    terms: BTreeMap<Var, Rational>,
    constant: Rational,
}

impl LinExpr {
    pub fn zero() -> LinExpr {
        LinExpr::default()
    }

    pub fn constant(c: Rational) -> LinExpr {
        LinExpr {
            terms: BTreeMap::new(),
            constant: c,
        }
    }

    pub fn var(v: Var) -> LinExpr {
        let mut e = LinExpr::zero();
        e.add_term(v, Rational::from_integer(1.into()));
        e
    }

    pub fn terms(&self) -> impl Iterator<Item = (Var, &Rational)> {
        self.terms.iter().map(|(v, c)| (*v, c))
    }

    pub fn constant_part(&self) -> &Rational {
        &self.constant
    }

    pub fn coeff(&self, v: Var) -> Rational {
        self.terms.get(&v).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, v: Var, c: Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(v).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&v);
        }
    }

    pub fn add_constant(&mut self, c: &Rational) {
        self.constant += c;
    }

    pub fn add(&mut self, other: &LinExpr) {
        for (v, c) in &other.terms {
            self.add_term(*v, c.clone());
        }
        self.constant += &other.constant;
    }

    pub fn sub(&mut self, other: &LinExpr) {
        for (v, c) in &other.terms {
            self.add_term(*v, -c.clone());
        }
        self.constant -= &other.constant;
    }

    pub fn plus(mut self, other: &LinExpr) -> LinExpr {
        self.add(other);
        self
    }

    pub fn minus(mut self, other: &LinExpr) -> LinExpr {
        self.sub(other);
        self
    }

    pub fn minus_var(mut self, v: Var) -> LinExpr {
        self.add_term(v, -Rational::from_integer(1.into()));
        self
    }

    pub fn plus_var(mut self, v: Var) -> LinExpr {
        self.add_term(v, Rational::from_integer(1.into()));
        self
    }

    pub fn scale(&self, k: &Rational) -> LinExpr {
        let mut out = LinExpr::constant(&self.constant * k);
        for (v, c) in &self.terms {
            out.add_term(*v, c * k);
        }
        out
    }

    /// Renames variables; used when instantiating templates.
    pub fn rename(&self, f: &impl Fn(Var) -> Var) -> LinExpr {
        let mut out = LinExpr::constant(self.constant.clone());
        for (v, c) in &self.terms {
            out.add_term(f(*v), c.clone());
        }
        out
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.terms.keys().copied()
    }
}

impl From<Var> for LinExpr {
    fn from(v: Var) -> LinExpr {
        LinExpr::var(v)
    }
}

impl fmt::Display for LinExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (v, c) in &self.terms {
            let (sign, mag) = if c.is_negative() { ("-", -c.clone()) } else { ("+", c.clone()) };
            if first {
                if sign == "-" {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            if mag == Rational::from_integer(1.into()) {
                write!(f, "{v}")?;
            } else {
                write!(f, "{} {v}", fmt_rat(&mag))?;
            }
            first = false;
        }
        if first {
            write!(f, "{}", fmt_rat(&self.constant))
        } else if !self.constant.is_zero() {
            let sign = if self.constant.is_negative() { "-" } else { "+" };
            write!(f, " {sign} {}", fmt_rat(&self.constant.abs()))
        } else {
            Ok(())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rel {
    /// `expr >= 0`
    Ge,
    /// `expr = 0`
    Eq,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub expr: LinExpr,
    pub rel: Rel,
    /// Typing-rule site that produced the constraint.
    pub tag: Arc<str>,
}

impl Constraint {
    pub fn ge(expr: LinExpr, tag: impl Into<Arc<str>>) -> Constraint {
        Constraint {
            expr,
            rel: Rel::Ge,
            tag: tag.into(),
        }
    }

    pub fn eq(expr: LinExpr, tag: impl Into<Arc<str>>) -> Constraint {
        Constraint {
            expr,
            rel: Rel::Eq,
            tag: tag.into(),
        }
    }

    pub fn holds(&self, a: &Assignment) -> Result<bool, UnboundVar> {
        let value = a.eval(&self.expr)?;
        Ok(match self.rel {
            Rel::Ge => !value.is_negative(),
            Rel::Eq => value.is_zero(),
        })
    }

    pub fn is_trivial(&self) -> bool {
        self.expr.is_constant()
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rel = match self.rel {
            Rel::Ge => ">=",
            Rel::Eq => "=",
        };
        write!(f, "{} {rel} 0", self.expr)
    }
}

/// Minimize `Σ weight·var`; every weight is positive.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Objective {
    weights: BTreeMap<Var, Rational>,
}

impl Objective {
    pub fn new() -> Objective {
        Objective::default()
    }

    /// Adds `w·v` to the objective. Non-positive weights are rejected.
    pub fn add(&mut self, v: Var, w: Rational) {
        assert!(w.is_positive(), "objective weights must be positive");
        *self.weights.entry(v).or_insert_with(Rational::zero) += w;
    }

    pub fn weights(&self) -> impl Iterator<Item = (Var, &Rational)> {
        self.weights.iter().map(|(v, w)| (*v, w))
    }

    pub fn value(&self, a: &Assignment) -> Result<Rational, UnboundVar> {
        let mut total = Rational::zero();
        for (v, w) in &self.weights {
            total += w * a.get(*v).ok_or(UnboundVar(*v))?;
        }
        Ok(total)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("variable {0} is not bound by the assignment")]
pub struct UnboundVar(pub Var);

/// A value for each variable.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Assignment {
    values: BTreeMap<Var, Rational>,
}

impl Assignment {
    pub fn new() -> Assignment {
        Assignment::default()
    }

    pub fn set(&mut self, v: Var, q: Rational) {
        self.values.insert(v, q);
    }

    pub fn get(&self, v: Var) -> Option<&Rational> {
        self.values.get(&v)
    }

    pub fn value(&self, v: Var) -> Result<Rational, UnboundVar> {
        self.values.get(&v).cloned().ok_or(UnboundVar(v))
    }

    pub fn iter(&self) -> impl Iterator<Item = (Var, &Rational)> {
        self.values.iter().map(|(v, q)| (*v, q))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn eval(&self, e: &LinExpr) -> Result<Rational, UnboundVar> {
        eval_assignment(self, e)
    }
}

pub fn eval_assignment(a: &Assignment, e: &LinExpr) -> Result<Rational, UnboundVar> {
    let mut total = e.constant.clone();
    for (v, c) in &e.terms {
        total += c * a.get(*v).ok_or(UnboundVar(*v))?;
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LpError {
    #[error("the constraint system is infeasible")]
    Infeasible,
    #[error("internal solver error: {0}")]
    Internal(String),
}

/// Renders the system in LP text format for external cross-checking.
pub fn dump_lp(constraints: &[Constraint], objective: &Objective, pool: Option<&VarPool>) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    let obj: Vec<String> = objective
        .weights()
        .map(|(v, w)| format!("{} {v}", fmt_rat(w)))
        .collect();
    let obj = if obj.is_empty() { "0".to_string() } else { obj.join(" + ") };
    writeln!(out, "min: {obj};").unwrap();
    for (i, c) in constraints.iter().enumerate() {
        let mut lhs = c.expr.clone();
        let constant = lhs.constant.clone();
        lhs.constant = Rational::zero();
        let rel = match c.rel {
            Rel::Ge => ">=",
            Rel::Eq => "=",
        };
        writeln!(out, "/* {} */ c{}: {lhs} {rel} {};", c.tag, i + 1, fmt_rat(&-constant)).unwrap();
    }
    if let Some(pool) = pool {
        let mut vars: Vec<Var> = constraints.iter().flat_map(|c| c.expr.vars()).collect();
        vars.sort();
        vars.dedup();
        for v in vars {
            writeln!(out, "/* {v}: {} */", pool.tag(v).unwrap_or("?")).unwrap();
        }
    }
    out
}
