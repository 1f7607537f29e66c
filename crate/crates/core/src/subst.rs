//! Substitution of values for variables, and free-variable computation.
//!
//! Substituted values are closed (machine) or carry globally fresh names
//! (renaming), so no binder can capture them; substitution stops at binders
//! that shadow the substituted name.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::syntax::{Branch, Computation, HandlerDef, LinLam, Name, Value};

/// A simultaneous substitution with a handful of entries.
#[derive(Debug, Clone, Default)]
pub struct Subst {
    entries: Vec<(Name, Value)>,
}

impl Subst {
    pub fn new() -> Subst {
        Subst::default()
    }

    pub fn single(x: Name, v: Value) -> Subst {
        Subst {
            entries: vec![(x, v)],
        }
    }

    pub fn with(mut self, x: Name, v: Value) -> Subst {
        self.entries.retain(|(y, _)| *y != x);
        self.entries.push((x, v));
        self
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn get(&self, x: &str) -> Option<&Value> {
        self.entries.iter().find(|(y, _)| &**y == x).map(|(_, v)| v)
    }

    /// The substitution restricted to names not bound by `binders`.
    fn without(&self, binders: &[&Name]) -> Option<Subst> {
        if !self.entries.iter().any(|(y, _)| binders.contains(&y)) {
            return None;
        }
        Some(Subst {
            entries: self
                .entries
                .iter()
                .filter(|(y, _)| !binders.contains(&y))
                .cloned()
                .collect(),
        })
    }
}

pub fn subst_value(v: &Value, s: &Subst) -> Value {
    if s.is_empty() {
        return v.clone();
    }
    match v {
        Value::Var(x) => s.get(x).cloned().unwrap_or_else(|| v.clone()),
        Value::Fun(_) | Value::Unit | Value::Int(_) | Value::Nil | Value::Dcont(_) => v.clone(),
        Value::Pair(a, b) => Value::Pair(Arc::new(subst_value(a, s)), Arc::new(subst_value(b, s))),
        Value::Cons(a, b) => Value::Cons(Arc::new(subst_value(a, s)), Arc::new(subst_value(b, s))),
        Value::Inl(a) => Value::Inl(Arc::new(subst_value(a, s))),
        Value::Inr(a) => Value::Inr(Arc::new(subst_value(a, s))),
        Value::LinLam(l) => {
            let body = under(&[&l.param], s, &l.body);
            Value::LinLam(Arc::new(LinLam {
                param: l.param.clone(),
                ty: l.ty.clone(),
                body,
            }))
        }
    }
}

fn under(binders: &[&Name], s: &Subst, c: &Computation) -> Computation {
    match s.without(binders) {
        Some(inner) => subst_comp(c, &inner),
        None => subst_comp(c, s),
    }
}

pub fn subst_handler(h: &HandlerDef, s: &Subst) -> HandlerDef {
    HandlerDef {
        body_ty: h.body_ty.clone(),
        branches: h
            .branches
            .iter()
            .map(|b| Branch {
                label: b.label.clone(),
                payload: b.payload.clone(),
                cont: b.cont.clone(),
                body: under(&[&b.payload, &b.cont], s, &b.body),
            })
            .collect(),
        ret_var: h.ret_var.clone(),
        ret_body: under(&[&h.ret_var], s, &h.ret_body),
        res_ty: h.res_ty.clone(),
        ambient: h.ambient.clone(),
    }
}

pub fn subst_comp(c: &Computation, s: &Subst) -> Computation {
    if s.is_empty() {
        return c.clone();
    }
    let v = |x: &Value| subst_value(x, s);
    match c {
        Computation::Ret(x) => Computation::Ret(v(x)),
        Computation::Let {
            var,
            ty,
            bound,
            body,
        } => Computation::Let {
            var: var.clone(),
            ty: ty.clone(),
            bound: Box::new(subst_comp(bound, s)),
            body: Box::new(under(&[var], s, body)),
        },
        Computation::Tick(q) => Computation::Tick(q.clone()),
        Computation::App(f, a) => Computation::App(v(f), v(a)),
        Computation::LinApp(f, a) => Computation::LinApp(v(f), v(a)),
        Computation::CasePair {
            scrut,
            ty,
            left,
            right,
            body,
        } => Computation::CasePair {
            scrut: v(scrut),
            ty: ty.clone(),
            left: left.clone(),
            right: right.clone(),
            body: Box::new(under(&[left, right], s, body)),
        },
        Computation::CaseVoid { scrut, res_ty } => Computation::CaseVoid {
            scrut: v(scrut),
            res_ty: res_ty.clone(),
        },
        Computation::CaseSum {
            scrut,
            ty,
            left,
            left_body,
            right,
            right_body,
        } => Computation::CaseSum {
            scrut: v(scrut),
            ty: ty.clone(),
            left: left.clone(),
            left_body: Box::new(under(&[left], s, left_body)),
            right: right.clone(),
            right_body: Box::new(under(&[right], s, right_body)),
        },
        Computation::CaseList {
            scrut,
            ty,
            nil_body,
            head,
            tail,
            cons_body,
        } => Computation::CaseList {
            scrut: v(scrut),
            ty: ty.clone(),
            nil_body: Box::new(subst_comp(nil_body, s)),
            head: head.clone(),
            tail: tail.clone(),
            cons_body: Box::new(under(&[head, tail], s, cons_body)),
        },
        Computation::Do { label, payload } => Computation::Do {
            label: label.clone(),
            payload: v(payload),
        },
        Computation::Handle { body, handler } => Computation::Handle {
            body: Box::new(subst_comp(body, s)),
            handler: Arc::new(subst_handler(handler, s)),
        },
        Computation::Prim { op, left, right } => Computation::Prim {
            op: *op,
            left: v(left),
            right: v(right),
        },
        Computation::Raise { payload, ty } => Computation::Raise {
            payload: v(payload),
            ty: ty.clone(),
        },
        Computation::Try {
            body,
            body_ty,
            var,
            handler,
            ambient,
        } => Computation::Try {
            body: Box::new(subst_comp(body, s)),
            body_ty: body_ty.clone(),
            var: var.clone(),
            handler: Box::new(under(&[var], s, handler)),
            ambient: ambient.clone(),
        },
        Computation::Share {
            value,
            ty,
            left,
            right,
            body,
        } => Computation::Share {
            value: v(value),
            ty: ty.clone(),
            left: left.clone(),
            right: right.clone(),
            body: Box::new(under(&[left, right], s, body)),
        },
    }
}

/// Renames free occurrences of `from` to the (fresh) name `to`.
pub fn rename(c: &Computation, from: &Name, to: &Name) -> Computation {
    subst_comp(c, &Subst::single(from.clone(), Value::Var(to.clone())))
}

pub fn free_vars_value(v: &Value, out: &mut BTreeSet<Name>) {
    match v {
        Value::Var(x) => {
            out.insert(x.clone());
        }
        Value::Fun(_) | Value::Unit | Value::Int(_) | Value::Nil | Value::Dcont(_) => {}
        Value::Pair(a, b) | Value::Cons(a, b) => {
            free_vars_value(a, out);
            free_vars_value(b, out);
        }
        Value::Inl(a) | Value::Inr(a) => free_vars_value(a, out),
        Value::LinLam(l) => {
            let mut inner = BTreeSet::new();
            free_vars(&l.body, &mut inner);
            inner.remove(&l.param);
            out.extend(inner);
        }
    }
}

fn free_under(binders: &[&Name], c: &Computation, out: &mut BTreeSet<Name>) {
    let mut inner = BTreeSet::new();
    free_vars(c, &mut inner);
    for b in binders {
        inner.remove(*b);
    }
    out.extend(inner);
}

pub fn free_vars_handler(h: &HandlerDef, out: &mut BTreeSet<Name>) {
    free_under(&[&h.ret_var], &h.ret_body, out);
    for b in &h.branches {
        free_under(&[&b.payload, &b.cont], &b.body, out);
    }
}

pub fn free_vars(c: &Computation, out: &mut BTreeSet<Name>) {
    match c {
        Computation::Ret(v) | Computation::Do { payload: v, .. } => free_vars_value(v, out),
        Computation::Raise { payload, .. } => free_vars_value(payload, out),
        Computation::Let {
            var, bound, body, ..
        } => {
            free_vars(bound, out);
            free_under(&[var], body, out);
        }
        Computation::Tick(_) => {}
        Computation::App(f, a) | Computation::LinApp(f, a) => {
            free_vars_value(f, out);
            free_vars_value(a, out);
        }
        Computation::Prim { left, right, .. } => {
            free_vars_value(left, out);
            free_vars_value(right, out);
        }
        Computation::CasePair {
            scrut,
            left,
            right,
            body,
            ..
        } => {
            free_vars_value(scrut, out);
            free_under(&[left, right], body, out);
        }
        Computation::CaseVoid { scrut, .. } => free_vars_value(scrut, out),
        Computation::CaseSum {
            scrut,
            left,
            left_body,
            right,
            right_body,
            ..
        } => {
            free_vars_value(scrut, out);
            free_under(&[left], left_body, out);
            free_under(&[right], right_body, out);
        }
        Computation::CaseList {
            scrut,
            nil_body,
            head,
            tail,
            cons_body,
            ..
        } => {
            free_vars_value(scrut, out);
            free_vars(nil_body, out);
            free_under(&[head, tail], cons_body, out);
        }
        Computation::Handle { body, handler } => {
            free_vars(body, out);
            free_vars_handler(handler, out);
        }
        Computation::Try {
            body, var, handler, ..
        } => {
            free_vars(body, out);
            free_under(&[var], handler, out);
        }
        Computation::Share {
            value,
            left,
            right,
            body,
            ..
        } => {
            free_vars_value(value, out);
            free_under(&[left, right], body, out);
        }
    }
}

pub fn free_var_set(c: &Computation) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    free_vars(c, &mut out);
    out
}
