//! Makes variable use linear by splitting multiply-used variables through
//! explicit `share` nodes, and rejects continuations used twice.
//!
//! A node's *parts* are its independently consumed subpositions: each
//! variable occurrence in a value, each linear lambda, and each
//! subcomputation. Alternative branches form one part together; a handler's
//! return branch and its effect branches are separate parts.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::analysis::effects::{lookup, TypeEnv};
use crate::subst::{free_vars, free_vars_value, subst_comp, subst_handler, subst_value, Subst};
use crate::surface::SurfaceError;
use crate::syntax::{Branch, Computation, HandlerDef, LinLam, Name, Program, SType, Value};

/// True if values of the type can carry potential in some component.
pub fn carries_annotations(t: &SType) -> bool {
    match t {
        SType::Unit | SType::Void | SType::Int | SType::Fun(_) => false,
        SType::Prod(..) | SType::Sum(..) | SType::List(_) | SType::LinFun(_) => true,
    }
}

pub fn insert_sharing(p: &Program) -> Result<Program, SurfaceError> {
    let mut out = p.clone();
    for (i, d) in p.funs.iter().enumerate() {
        let mut s = Sharer {
            prog: p,
            env: vec![(d.param.clone(), d.param_ty.clone())],
            counter: 0,
        };
        out.funs[i].body = s.comp(&d.body)?;
    }
    Ok(out)
}

struct Sharer<'p> {
    prog: &'p Program,
    env: TypeEnv,
    counter: usize,
}

/// A subposition of a node together with the names it binds.
enum Part<'a> {
    Occurrence(Name),
    Lambda(&'a Value),
    Comps(Vec<(&'a Computation, Vec<&'a Name>)>),
}

impl Part<'_> {
    fn free(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        match self {
            Part::Occurrence(x) => {
                out.insert(x.clone());
            }
            Part::Lambda(v) => free_vars_value(v, &mut out),
            Part::Comps(cs) => {
                for (c, binders) in cs {
                    let mut inner = BTreeSet::new();
                    free_vars(c, &mut inner);
                    for b in binders {
                        inner.remove(*b);
                    }
                    out.extend(inner);
                }
            }
        }
        out
    }
}

fn value_parts<'a>(v: &'a Value, out: &mut Vec<Part<'a>>) {
    match v {
        Value::Var(x) => out.push(Part::Occurrence(x.clone())),
        Value::Pair(a, b) | Value::Cons(a, b) => {
            value_parts(a, out);
            value_parts(b, out);
        }
        Value::Inl(a) | Value::Inr(a) => value_parts(a, out),
        Value::LinLam(_) => out.push(Part::Lambda(v)),
        Value::Fun(_) | Value::Unit | Value::Int(_) | Value::Nil | Value::Dcont(_) => {}
    }
}

/// Renames value parts in the same order `value_parts` enumerates them.
fn rename_value(v: &Value, renames: &[Subst], idx: &mut usize) -> Value {
    match v {
        Value::Var(_) | Value::LinLam(_) => {
            let r = subst_value(v, &renames[*idx]);
            *idx += 1;
            r
        }
        Value::Pair(a, b) => {
            let a = rename_value(a, renames, idx);
            Value::Pair(Arc::new(a), Arc::new(rename_value(b, renames, idx)))
        }
        Value::Cons(a, b) => {
            let a = rename_value(a, renames, idx);
            Value::Cons(Arc::new(a), Arc::new(rename_value(b, renames, idx)))
        }
        Value::Inl(a) => Value::Inl(Arc::new(rename_value(a, renames, idx))),
        Value::Inr(a) => Value::Inr(Arc::new(rename_value(a, renames, idx))),
        Value::Fun(_) | Value::Unit | Value::Int(_) | Value::Nil | Value::Dcont(_) => v.clone(),
    }
}

fn branch_binders(h: &HandlerDef) -> Vec<(&Computation, Vec<&Name>)> {
    h.branches
        .iter()
        .map(|b| (&b.body, vec![&b.payload, &b.cont]))
        .collect()
}

fn parts(c: &Computation) -> Vec<Part<'_>> {
    let mut out = Vec::new();
    match c {
        Computation::Ret(v) => value_parts(v, &mut out),
        Computation::Tick(_) => {}
        Computation::App(f, a) | Computation::LinApp(f, a) => {
            value_parts(f, &mut out);
            value_parts(a, &mut out);
        }
        Computation::Prim { left, right, .. } => {
            value_parts(left, &mut out);
            value_parts(right, &mut out);
        }
        Computation::Do { payload, .. } | Computation::Raise { payload, .. } => {
            value_parts(payload, &mut out)
        }
        Computation::CaseVoid { scrut, .. } => value_parts(scrut, &mut out),
        Computation::Let {
            var, bound, body, ..
        } => {
            out.push(Part::Comps(vec![(bound, vec![])]));
            out.push(Part::Comps(vec![(body, vec![var])]));
        }
        Computation::CasePair {
            scrut,
            left,
            right,
            body,
            ..
        } => {
            value_parts(scrut, &mut out);
            out.push(Part::Comps(vec![(body, vec![left, right])]));
        }
        Computation::CaseSum {
            scrut,
            left,
            left_body,
            right,
            right_body,
            ..
        } => {
            value_parts(scrut, &mut out);
            out.push(Part::Comps(vec![(left_body, vec![left]), (right_body, vec![right])]));
        }
        Computation::CaseList {
            scrut,
            nil_body,
            head,
            tail,
            cons_body,
            ..
        } => {
            value_parts(scrut, &mut out);
            out.push(Part::Comps(vec![(nil_body, vec![]), (cons_body, vec![head, tail])]));
        }
        Computation::Handle { body, handler } => {
            out.push(Part::Comps(vec![(body, vec![])]));
            out.push(Part::Comps(vec![(&handler.ret_body, vec![&handler.ret_var])]));
            out.push(Part::Comps(branch_binders(handler)));
        }
        Computation::Try {
            body, var, handler, ..
        } => {
            out.push(Part::Comps(vec![(body, vec![])]));
            out.push(Part::Comps(vec![(handler, vec![var])]));
        }
        Computation::Share {
            value,
            left,
            right,
            body,
            ..
        } => {
            value_parts(value, &mut out);
            out.push(Part::Comps(vec![(body, vec![left, right])]));
        }
    }
    out
}

/// Applies `renames[i]` to part `i`, in `parts` order.
fn rename_parts(c: &Computation, renames: &[Subst]) -> Computation {
    let mut i = 0;
    let val = |v: &Value, i: &mut usize| rename_value(v, renames, i);
    let next = |i: &mut usize| {
        *i += 1;
        &renames[*i - 1]
    };
    match c {
        Computation::Ret(v) => Computation::Ret(val(v, &mut i)),
        Computation::Tick(_) => c.clone(),
        Computation::App(f, a) => {
            let f = val(f, &mut i);
            Computation::App(f, val(a, &mut i))
        }
        Computation::LinApp(f, a) => {
            let f = val(f, &mut i);
            Computation::LinApp(f, val(a, &mut i))
        }
        Computation::Prim { op, left, right } => {
            let left = val(left, &mut i);
            Computation::Prim {
                op: *op,
                left,
                right: val(right, &mut i),
            }
        }
        Computation::Do { label, payload } => Computation::Do {
            label: label.clone(),
            payload: val(payload, &mut i),
        },
        Computation::Raise { payload, ty } => Computation::Raise {
            payload: val(payload, &mut i),
            ty: ty.clone(),
        },
        Computation::CaseVoid { scrut, res_ty } => Computation::CaseVoid {
            scrut: val(scrut, &mut i),
            res_ty: res_ty.clone(),
        },
        Computation::Let {
            var,
            ty,
            bound,
            body,
        } => {
            let bound = subst_comp(bound, next(&mut i));
            let body = subst_comp(body, next(&mut i));
            Computation::let_(var.clone(), ty.clone(), bound, body)
        }
        Computation::CasePair {
            scrut,
            ty,
            left,
            right,
            body,
        } => Computation::CasePair {
            scrut: val(scrut, &mut i),
            ty: ty.clone(),
            left: left.clone(),
            right: right.clone(),
            body: Box::new(subst_comp(body, next(&mut i))),
        },
        Computation::CaseSum {
            scrut,
            ty,
            left,
            left_body,
            right,
            right_body,
        } => {
            let scrut = val(scrut, &mut i);
            let s = next(&mut i);
            Computation::CaseSum {
                scrut,
                ty: ty.clone(),
                left: left.clone(),
                left_body: Box::new(subst_comp(left_body, s)),
                right: right.clone(),
                right_body: Box::new(subst_comp(right_body, s)),
            }
        }
        Computation::CaseList {
            scrut,
            ty,
            nil_body,
            head,
            tail,
            cons_body,
        } => {
            let scrut = val(scrut, &mut i);
            let s = next(&mut i);
            Computation::CaseList {
                scrut,
                ty: ty.clone(),
                nil_body: Box::new(subst_comp(nil_body, s)),
                head: head.clone(),
                tail: tail.clone(),
                cons_body: Box::new(subst_comp(cons_body, s)),
            }
        }
        Computation::Handle { body, handler } => {
            let body = subst_comp(body, next(&mut i));
            let ret_body = subst_comp(&handler.ret_body, next(&mut i));
            let h = subst_handler(handler, next(&mut i));
            Computation::Handle {
                body: Box::new(body),
                handler: Arc::new(HandlerDef { ret_body, ..h }),
            }
        }
        Computation::Try {
            body,
            body_ty,
            var,
            handler,
            ambient,
        } => {
            let body = subst_comp(body, next(&mut i));
            Computation::Try {
                body: Box::new(body),
                body_ty: body_ty.clone(),
                var: var.clone(),
                handler: Box::new(subst_comp(handler, next(&mut i))),
                ambient: ambient.clone(),
            }
        }
        Computation::Share {
            value,
            ty,
            left,
            right,
            body,
        } => {
            let value = val(value, &mut i);
            Computation::Share {
                value,
                ty: ty.clone(),
                left: left.clone(),
                right: right.clone(),
                body: Box::new(subst_comp(body, next(&mut i))),
            }
        }
    }
}

impl Sharer<'_> {
    fn fresh(&mut self, x: &str) -> Name {
        let n = self.counter;
        self.counter += 1;
        Arc::from(format!("{x}#{n}").as_str())
    }

    fn under<T>(
        &mut self,
        binders: Vec<(Name, SType)>,
        f: impl FnOnce(&mut Self) -> Result<T, SurfaceError>,
    ) -> Result<T, SurfaceError> {
        let depth = self.env.len();
        self.env.extend(binders);
        let r = f(self);
        self.env.truncate(depth);
        r
    }

    fn value(&mut self, v: &Value) -> Result<Value, SurfaceError> {
        Ok(match v {
            Value::Pair(a, b) => Value::Pair(Arc::new(self.value(a)?), Arc::new(self.value(b)?)),
            Value::Cons(a, b) => Value::Cons(Arc::new(self.value(a)?), Arc::new(self.value(b)?)),
            Value::Inl(a) => Value::Inl(Arc::new(self.value(a)?)),
            Value::Inr(a) => Value::Inr(Arc::new(self.value(a)?)),
            Value::LinLam(l) => {
                let body = self.under(vec![(l.param.clone(), l.ty.arg.clone())], |s| s.comp(&l.body))?;
                Value::LinLam(Arc::new(LinLam {
                    param: l.param.clone(),
                    ty: l.ty.clone(),
                    body,
                }))
            }
            other => other.clone(),
        })
    }

    fn handler(&mut self, h: &HandlerDef) -> Result<HandlerDef, SurfaceError> {
        let ret_body = self.under(vec![(h.ret_var.clone(), h.body_ty.clone())], |s| s.comp(&h.ret_body))?;
        let mut branches = Vec::with_capacity(h.branches.len());
        for b in &h.branches {
            let (input, output) = self
                .prog
                .effect(&b.label)
                .map(|d| (d.input.clone(), d.output.clone()))
                .unwrap_or((SType::Unit, SType::Unit));
            let cont = SType::linfun(output, h.res_ty.clone(), h.ambient.clone());
            let binders = vec![(b.payload.clone(), input), (b.cont.clone(), cont)];
            let body = self.under(binders, |s| s.comp(&b.body))?;
            branches.push(Branch { body, ..b.clone() });
        }
        Ok(HandlerDef {
            ret_body,
            branches,
            ..h.clone()
        })
    }

    /// Linearizes the children, then this node.
    fn comp(&mut self, c: &Computation) -> Result<Computation, SurfaceError> {
        let inner = self.children(c)?;
        self.split(inner)
    }

    fn children(&mut self, c: &Computation) -> Result<Computation, SurfaceError> {
        Ok(match c {
            Computation::Ret(v) => Computation::Ret(self.value(v)?),
            Computation::App(f, a) => Computation::App(self.value(f)?, self.value(a)?),
            Computation::LinApp(f, a) => Computation::LinApp(self.value(f)?, self.value(a)?),
            Computation::Do { label, payload } => Computation::Do {
                label: label.clone(),
                payload: self.value(payload)?,
            },
            Computation::Raise { payload, ty } => Computation::Raise {
                payload: self.value(payload)?,
                ty: ty.clone(),
            },
            Computation::Tick(_) | Computation::Prim { .. } | Computation::CaseVoid { .. } => c.clone(),
            Computation::Let {
                var,
                ty,
                bound,
                body,
            } => {
                let bound = self.comp(bound)?;
                let body = self.under(vec![(var.clone(), ty.clone())], |s| s.comp(body))?;
                Computation::let_(var.clone(), ty.clone(), bound, body)
            }
            Computation::CasePair {
                scrut,
                ty,
                left,
                right,
                body,
            } => {
                let binders = match ty {
                    SType::Prod(a, b) => vec![(left.clone(), (**a).clone()), (right.clone(), (**b).clone())],
                    _ => vec![],
                };
                Computation::CasePair {
                    scrut: scrut.clone(),
                    ty: ty.clone(),
                    left: left.clone(),
                    right: right.clone(),
                    body: Box::new(self.under(binders, |s| s.comp(body))?),
                }
            }
            Computation::CaseSum {
                scrut,
                ty,
                left,
                left_body,
                right,
                right_body,
            } => {
                let (a, b) = match ty {
                    SType::Sum(a, b) => ((**a).clone(), (**b).clone()),
                    _ => (SType::Unit, SType::Unit),
                };
                let lb = self.under(vec![(left.clone(), a)], |s| s.comp(left_body))?;
                let rb = self.under(vec![(right.clone(), b)], |s| s.comp(right_body))?;
                Computation::CaseSum {
                    scrut: scrut.clone(),
                    ty: ty.clone(),
                    left: left.clone(),
                    left_body: Box::new(lb),
                    right: right.clone(),
                    right_body: Box::new(rb),
                }
            }
            Computation::CaseList {
                scrut,
                ty,
                nil_body,
                head,
                tail,
                cons_body,
            } => {
                let elem = match ty {
                    SType::List(a) => (**a).clone(),
                    _ => SType::Unit,
                };
                let nil_body = self.comp(nil_body)?;
                let binders = vec![(head.clone(), elem), (tail.clone(), ty.clone())];
                let cons_body = self.under(binders, |s| s.comp(cons_body))?;
                Computation::CaseList {
                    scrut: scrut.clone(),
                    ty: ty.clone(),
                    nil_body: Box::new(nil_body),
                    head: head.clone(),
                    tail: tail.clone(),
                    cons_body: Box::new(cons_body),
                }
            }
            Computation::Handle { body, handler } => Computation::Handle {
                body: Box::new(self.comp(body)?),
                handler: Arc::new(self.handler(handler)?),
            },
            Computation::Try {
                body,
                body_ty,
                var,
                handler,
                ambient,
            } => {
                let payload = self
                    .prog
                    .effect(crate::syntax::EXC)
                    .map(|d| d.input.clone())
                    .unwrap_or(SType::Unit);
                Computation::Try {
                    body: Box::new(self.comp(body)?),
                    body_ty: body_ty.clone(),
                    var: var.clone(),
                    handler: Box::new(self.under(vec![(var.clone(), payload)], |s| s.comp(handler))?),
                    ambient: ambient.clone(),
                }
            }
            Computation::Share {
                value,
                ty,
                left,
                right,
                body,
            } => {
                let binders = vec![(left.clone(), ty.clone()), (right.clone(), ty.clone())];
                Computation::Share {
                    value: value.clone(),
                    ty: ty.clone(),
                    left: left.clone(),
                    right: right.clone(),
                    body: Box::new(self.under(binders, |s| s.comp(body))?),
                }
            }
        })
    }

    /// Splits every variable that occurs in more than one part of `c`.
    fn split(&mut self, c: Computation) -> Result<Computation, SurfaceError> {
        let ps = parts(&c);
        let mut uses: BTreeMap<Name, Vec<usize>> = BTreeMap::new();
        for (i, p) in ps.iter().enumerate() {
            for x in p.free() {
                uses.entry(x).or_default().push(i);
            }
        }
        let mut renames = vec![Subst::new(); ps.len()];
        let mut shares = Vec::new();
        for (x, at) in uses {
            if at.len() < 2 {
                continue;
            }
            let Some(ty) = lookup(&self.env, &x).cloned() else {
                continue;
            };
            if ty.contains_linear() {
                return Err(SurfaceError::LinearReuse(x.to_string()));
            }
            if !carries_annotations(&ty) {
                continue;
            }
            let copies: Vec<Name> = at.iter().map(|_| self.fresh(&x)).collect();
            for (part, copy) in at.iter().zip(&copies) {
                renames[*part] = std::mem::take(&mut renames[*part]).with(x.clone(), Value::Var(copy.clone()));
            }
            shares.push((x, ty, copies));
        }
        if shares.is_empty() {
            return Ok(c);
        }
        let mut out = rename_parts(&c, &renames);
        for (x, ty, copies) in shares.into_iter().rev() {
            out = self.share_chain(&x, &ty, &copies, out);
        }
        Ok(out)
    }

    /// `share x as c1, r1 in share r1 as c2, r2 in ... share r as c(m-1), cm in body`.
    fn share_chain(&mut self, x: &Name, ty: &SType, copies: &[Name], body: Computation) -> Computation {
        let m = copies.len();
        let mut rest: Vec<Name> = (0..m - 2).map(|_| self.fresh(x)).collect();
        rest.push(copies[m - 1].clone());
        let mut out = body;
        for i in (0..m - 1).rev() {
            let source = if i == 0 { x.clone() } else { rest[i - 1].clone() };
            out = Computation::Share {
                value: Value::Var(source),
                ty: ty.clone(),
                left: copies[i].clone(),
                right: rest[i].clone(),
                body: Box::new(out),
            };
        }
        out
    }
}

/// Variables with annotation positions (or linear types) used more than once
/// on some control path, per function.
pub fn linearity_violations(p: &Program) -> Vec<String> {
    let mut out = Vec::new();
    for d in &p.funs {
        let mut scanner = Scanner {
            prog: p,
            env: vec![(d.param.clone(), d.param_ty.clone())],
            bad: BTreeSet::new(),
        };
        let counts = scanner.comp(&d.body);
        scanner.check(&counts);
        for x in scanner.bad {
            out.push(format!("{}: {x}", d.name));
        }
    }
    out
}

type Counts = BTreeMap<Name, usize>;

fn seq(mut a: Counts, b: Counts) -> Counts {
    for (x, n) in b {
        *a.entry(x).or_default() += n;
    }
    a
}

fn alt(mut a: Counts, b: Counts) -> Counts {
    for (x, n) in b {
        let e = a.entry(x).or_default();
        *e = (*e).max(n);
    }
    a
}

struct Scanner<'p> {
    prog: &'p Program,
    env: TypeEnv,
    bad: BTreeSet<Name>,
}

impl Scanner<'_> {
    fn tracked(&self, x: &str) -> bool {
        lookup(&self.env, x).is_some_and(carries_annotations)
    }

    fn check(&mut self, counts: &Counts) {
        for (x, n) in counts {
            if *n > 1 && self.tracked(x) {
                self.bad.insert(x.clone());
            }
        }
    }

    /// Closes a scope: checks the binders and removes them from the counts.
    fn bind(&mut self, binders: Vec<(Name, SType)>, f: impl FnOnce(&mut Self) -> Counts) -> Counts {
        let depth = self.env.len();
        let names: Vec<Name> = binders.iter().map(|(x, _)| x.clone()).collect();
        self.env.extend(binders);
        let mut counts = f(self);
        let own: Counts = names.iter().filter_map(|x| counts.get(x).map(|n| (x.clone(), *n))).collect();
        self.check(&own);
        self.env.truncate(depth);
        for x in names {
            counts.remove(&x);
        }
        counts
    }

    fn value(&mut self, v: &Value) -> Counts {
        match v {
            Value::Var(x) => [(x.clone(), 1)].into_iter().collect(),
            Value::Pair(a, b) | Value::Cons(a, b) => {
                let a = self.value(a);
                seq(a, self.value(b))
            }
            Value::Inl(a) | Value::Inr(a) => self.value(a),
            Value::LinLam(l) => self.bind(vec![(l.param.clone(), l.ty.arg.clone())], |s| s.comp(&l.body)),
            _ => Counts::new(),
        }
    }

    fn comp(&mut self, c: &Computation) -> Counts {
        match c {
            Computation::Ret(v) | Computation::Do { payload: v, .. } | Computation::Raise { payload: v, .. } => {
                self.value(v)
            }
            Computation::CaseVoid { scrut, .. } => self.value(scrut),
            Computation::Tick(_) => Counts::new(),
            Computation::App(f, a) | Computation::LinApp(f, a) => {
                let f = self.value(f);
                seq(f, self.value(a))
            }
            Computation::Prim { left, right, .. } => {
                let l = self.value(left);
                seq(l, self.value(right))
            }
            Computation::Let {
                var,
                ty,
                bound,
                body,
            } => {
                let b = self.comp(bound);
                seq(b, self.bind(vec![(var.clone(), ty.clone())], |s| s.comp(body)))
            }
            Computation::CasePair {
                scrut,
                ty,
                left,
                right,
                body,
            } => {
                let binders = match ty {
                    SType::Prod(a, b) => vec![(left.clone(), (**a).clone()), (right.clone(), (**b).clone())],
                    _ => vec![],
                };
                let s = self.value(scrut);
                seq(s, self.bind(binders, |s| s.comp(body)))
            }
            Computation::CaseSum {
                scrut,
                ty,
                left,
                left_body,
                right,
                right_body,
            } => {
                let (a, b) = match ty {
                    SType::Sum(a, b) => ((**a).clone(), (**b).clone()),
                    _ => (SType::Unit, SType::Unit),
                };
                let s = self.value(scrut);
                let l = self.bind(vec![(left.clone(), a)], |s| s.comp(left_body));
                let r = self.bind(vec![(right.clone(), b)], |s| s.comp(right_body));
                seq(s, alt(l, r))
            }
            Computation::CaseList {
                scrut,
                ty,
                nil_body,
                head,
                tail,
                cons_body,
            } => {
                let elem = match ty {
                    SType::List(a) => (**a).clone(),
                    _ => SType::Unit,
                };
                let s = self.value(scrut);
                let n = self.comp(nil_body);
                let c = self.bind(vec![(head.clone(), elem), (tail.clone(), ty.clone())], |s| {
                    s.comp(cons_body)
                });
                seq(s, alt(n, c))
            }
            Computation::Handle { body, handler } => {
                let b = self.comp(body);
                let r = self.bind(vec![(handler.ret_var.clone(), handler.body_ty.clone())], |s| {
                    s.comp(&handler.ret_body)
                });
                let mut h = Counts::new();
                for br in &handler.branches {
                    let (input, output) = self
                        .prog
                        .effect(&br.label)
                        .map(|d| (d.input.clone(), d.output.clone()))
                        .unwrap_or((SType::Unit, SType::Unit));
                    let cont = SType::linfun(output, handler.res_ty.clone(), handler.ambient.clone());
                    let binders = vec![(br.payload.clone(), input), (br.cont.clone(), cont)];
                    let c = self.bind(binders, |s| s.comp(&br.body));
                    h = alt(h, c);
                }
                seq(seq(b, r), h)
            }
            Computation::Try {
                body, var, handler, ..
            } => {
                let b = self.comp(body);
                let payload = self
                    .prog
                    .effect(crate::syntax::EXC)
                    .map(|d| d.input.clone())
                    .unwrap_or(SType::Unit);
                seq(b, self.bind(vec![(var.clone(), payload)], |s| s.comp(handler)))
            }
            Computation::Share {
                value,
                ty,
                left,
                right,
                body,
            } => {
                let v = self.value(value);
                seq(v, self.bind(vec![(left.clone(), ty.clone()), (right.clone(), ty.clone())], |s| s.comp(body)))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{lower_to_fine_grain, parse};

    fn program(src: &str) -> Program {
        lower_to_fine_grain(&parse(src).unwrap()).unwrap()
    }

    fn count_shares(c: &Computation) -> usize {
        c.to_string().matches("share ").count()
    }

    #[test]
    fn duplicated_list_is_split() {
        let p = program("fun f (x: list(unit)): list(unit) * list(unit) = (x, x);");
        assert_eq!(linearity_violations(&p), vec!["f: x"]);
        let s = insert_sharing(&p).unwrap();
        assert_eq!(count_shares(&s.fun("f").unwrap().body), 1);
        assert!(linearity_violations(&s).is_empty());
    }

    #[test]
    fn three_uses_need_two_shares() {
        let p = program("fun f (x: list(unit)): list(unit) * (list(unit) * list(unit)) = (x, (x, x));");
        let s = insert_sharing(&p).unwrap();
        assert_eq!(count_shares(&s.fun("f").unwrap().body), 2);
        assert!(linearity_violations(&s).is_empty());
    }

    #[test]
    fn recursive_double_call_is_unchanged() {
        let p = program(
            "fun f (n: int): unit = match n < 1 { inl a -> () | inr b -> let u = f (n - 1) in f (n - 1) };",
        );
        assert_eq!(insert_sharing(&p).unwrap(), p);
    }

    #[test]
    fn branches_share_one_part() {
        let p = program(
            "fun f (x: list(unit)): list(unit) = match x { [] -> x | h :: t -> x };",
        );
        let s = insert_sharing(&p).unwrap();
        assert_eq!(count_shares(&s.fun("f").unwrap().body), 1);
        assert!(linearity_violations(&s).is_empty());
    }

    #[test]
    fn continuation_used_twice_is_rejected() {
        let p = program(
            "effect A : unit => unit;
             fun f (x: unit): unit = handle do A () { return y -> y | A u k -> let z = k () in k () };",
        );
        assert_eq!(insert_sharing(&p), Err(SurfaceError::LinearReuse("k".into())));
    }
}
