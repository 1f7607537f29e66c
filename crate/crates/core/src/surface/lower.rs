//! Type-directed lowering of surface expressions to the fine-grain core.
//!
//! Every compound subexpression in a value position is bound to a fresh
//! `%tN` variable; the counter restarts for each declaration.

use std::collections::HashMap;
use std::sync::Arc;

use super::ast::*;
use super::SurfaceError;
use crate::syntax::{
    Branch, Computation, EffectDecl, FnType, FunDecl, HandlerDef, Label, LabelSet, LinLam, Name,
    Program, SType, Value, EXC, MAIN,
};

type Binding = (Name, SType, Computation);

pub fn lower_to_fine_grain(p: &SurfaceProgram) -> Result<Program, SurfaceError> {
    let mut effects: Vec<EffectDecl> = p
        .effects
        .iter()
        .map(|d| EffectDecl {
            label: d.label.clone(),
            input: d.input.clone(),
            output: d.output.clone(),
        })
        .collect();
    if let Some(t) = &p.exception {
        effects.push(EffectDecl {
            label: Arc::from(EXC),
            input: t.clone(),
            output: SType::Void,
        });
    }
    let mut globals = HashMap::new();
    for f in &p.funs {
        globals.insert(
            f.name.clone(),
            FnType {
                arg: f.param_ty.clone(),
                res: f.result_ty.clone(),
                effects: f.effects.clone(),
            },
        );
    }
    let mut lw = Lowerer {
        effects: effects.iter().map(|d| (d.label.clone(), d.clone())).collect(),
        order: effects.iter().map(|d| d.label.clone()).collect(),
        globals,
        scope: Vec::new(),
        counter: 0,
    };
    let mut funs = Vec::new();
    for f in &p.funs {
        lw.counter = 0;
        lw.scope = vec![(f.param.clone(), f.param_ty.clone())];
        let (body, _) = lw.comp(&f.body, Some(&f.result_ty), &f.effects)?;
        funs.push(FunDecl {
            name: f.name.clone(),
            param: f.param.clone(),
            param_ty: f.param_ty.clone(),
            result_ty: f.result_ty.clone(),
            effects: f.effects.clone(),
            body,
        });
    }
    if let Some(m) = &p.main {
        lw.counter = 0;
        lw.scope = Vec::new();
        let all: LabelSet = effects.iter().map(|d| d.label.clone()).collect();
        let (body, ty) = lw.comp(m, None, &all)?;
        funs.push(FunDecl {
            name: Arc::from(MAIN),
            param: Arc::from("_"),
            param_ty: SType::Unit,
            result_ty: ty,
            effects: all,
            body,
        });
    }
    Ok(Program { effects, funs })
}

struct Lowerer {
    effects: HashMap<Label, EffectDecl>,
    order: Vec<Label>,
    globals: HashMap<Name, FnType>,
    scope: Vec<(Name, SType)>,
    counter: usize,
}

fn type_error(span: Span, msg: impl Into<String>) -> SurfaceError {
    SurfaceError::Type {
        line: span.line,
        col: span.col,
        msg: msg.into(),
    }
}

fn wrap(bindings: Vec<Binding>, body: Computation) -> Computation {
    bindings
        .into_iter()
        .rev()
        .fold(body, |acc, (x, t, c)| Computation::let_(x, t, c, acc))
}

fn check(expected: Option<&SType>, got: SType, span: Span) -> Result<SType, SurfaceError> {
    match expected {
        Some(t) if *t != got => Err(type_error(span, format!("expected `{t}`, found `{got}`"))),
        _ => Ok(got),
    }
}

impl Lowerer {
    fn fresh(&mut self) -> Name {
        let n = self.counter;
        self.counter += 1;
        Arc::from(format!("%t{n}").as_str())
    }

    fn lookup(&self, x: &str) -> Option<&SType> {
        self.scope.iter().rev().find(|(n, _)| &**n == x).map(|(_, t)| t)
    }

    fn effect(&self, l: &Label, span: Span) -> Result<EffectDecl, SurfaceError> {
        self.effects.get(l).cloned().ok_or_else(|| SurfaceError::UnknownEffectLabel {
            label: l.to_string(),
            line: span.line,
            col: span.col,
        })
    }

    fn rank(&self, l: &Label) -> usize {
        self.order.iter().position(|x| x == l).unwrap_or(usize::MAX)
    }

    /// Runs `f`, rolling back scope and name counter if it fails.
    fn attempt<T>(
        &mut self,
        f: impl FnOnce(&mut Self) -> Result<T, SurfaceError>,
    ) -> Result<T, SurfaceError> {
        let (depth, counter) = (self.scope.len(), self.counter);
        let r = f(self);
        if r.is_err() {
            self.scope.truncate(depth);
            self.counter = counter;
        }
        r
    }

    fn with_binders<T>(
        &mut self,
        binders: &[(Name, SType)],
        f: impl FnOnce(&mut Self) -> Result<T, SurfaceError>,
    ) -> Result<T, SurfaceError> {
        let depth = self.scope.len();
        self.scope.extend(binders.iter().cloned());
        let r = f(self);
        self.scope.truncate(depth);
        r
    }

    /// Lowers two alternative branches to a common result type.
    fn branches(
        &mut self,
        expected: Option<&SType>,
        amb: &LabelSet,
        left: (&[(Name, SType)], &Expr),
        right: (&[(Name, SType)], &Expr),
        span: Span,
    ) -> Result<(Computation, Computation, SType), SurfaceError> {
        if let Some(t) = expected {
            let (a, _) = self.with_binders(left.0, |s| s.comp(left.1, Some(t), amb))?;
            let (b, _) = self.with_binders(right.0, |s| s.comp(right.1, Some(t), amb))?;
            return Ok((a, b, t.clone()));
        }
        let first = self.attempt(|s| s.with_binders(left.0, |s| s.comp(left.1, None, amb)));
        match first {
            Ok((a, t)) => {
                let (b, _) = self.with_binders(right.0, |s| s.comp(right.1, Some(&t), amb))?;
                Ok((a, b, t))
            }
            Err(first_err) => {
                let second =
                    self.attempt(|s| s.with_binders(right.0, |s| s.comp(right.1, None, amb)));
                let Ok((b, t)) = second else {
                    return Err(match first_err {
                        SurfaceError::Type { .. } => type_error(
                            span,
                            "cannot infer the type of this expression; add an ascription",
                        ),
                        other => other,
                    });
                };
                // restart the left branch so fresh names follow source order
                let (a, _) = self.with_binders(left.0, |s| s.comp(left.1, Some(&t), amb))?;
                Ok((a, b, t))
            }
        }
    }

    fn comp(
        &mut self,
        e: &Expr,
        expected: Option<&SType>,
        amb: &LabelSet,
    ) -> Result<(Computation, SType), SurfaceError> {
        let span = e.span;
        match &e.kind {
            ExprKind::Var(_)
            | ExprKind::Int(_)
            | ExprKind::Unit
            | ExprKind::Nil
            | ExprKind::Pair(..)
            | ExprKind::Inl(_)
            | ExprKind::Inr(_)
            | ExprKind::Cons(..)
            | ExprKind::Fn(..) => {
                let (bs, v, t) = self.atom(e, expected, amb)?;
                Ok((wrap(bs, Computation::Ret(v)), t))
            }
            ExprKind::Annot(a, t) => {
                let (c, _) = self.comp(a, Some(t), amb)?;
                let t = check(expected, t.clone(), span)?;
                Ok((c, t))
            }
            ExprKind::Let(x, a, b) => {
                let (c1, t1) = self.comp(a, None, amb)?;
                let (c2, t2) =
                    self.with_binders(&[(x.clone(), t1.clone())], |s| s.comp(b, expected, amb))?;
                Ok((Computation::let_(x.clone(), t1, c1, c2), t2))
            }
            ExprKind::Tick(q) => {
                let t = check(expected, SType::Unit, span)?;
                Ok((Computation::Tick(q.clone()), t))
            }
            ExprKind::Do(l, a) => {
                let decl = self.effect(l, span)?;
                if !amb.contains(l) {
                    return Err(type_error(
                        span,
                        format!("effect `{l}` is not in the enclosing effect set"),
                    ));
                }
                let (bs, v, _) = self.atom(a, Some(&decl.input), amb)?;
                let t = check(expected, decl.output, span)?;
                Ok((
                    wrap(
                        bs,
                        Computation::Do {
                            label: l.clone(),
                            payload: v,
                        },
                    ),
                    t,
                ))
            }
            ExprKind::Raise(a) => {
                let exc = Arc::from(EXC);
                let decl = self
                    .effects
                    .get(&exc)
                    .cloned()
                    .ok_or_else(|| type_error(span, "`raise` needs an `exception` declaration"))?;
                if !amb.contains(&exc) {
                    return Err(type_error(
                        span,
                        "`raise` outside `try` in a function without `exc` in its effect set",
                    ));
                }
                let Some(t) = expected.cloned() else {
                    return Err(type_error(span, "cannot infer the type of `raise`; add an ascription"));
                };
                let (bs, v, _) = self.atom(a, Some(&decl.input), amb)?;
                Ok((wrap(bs, Computation::Raise { payload: v, ty: t.clone() }), t))
            }
            ExprKind::Try(a, x, b) => {
                let exc: Label = Arc::from(EXC);
                let decl = self
                    .effects
                    .get(&exc)
                    .cloned()
                    .ok_or_else(|| type_error(span, "`try` needs an `exception` declaration"))?;
                let mut inner = amb.clone();
                inner.insert(exc);
                let (c1, t) = self.comp(a, expected, &inner)?;
                let (c2, _) =
                    self.with_binders(&[(x.clone(), decl.input)], |s| s.comp(b, Some(&t), amb))?;
                Ok((
                    Computation::Try {
                        body: Box::new(c1),
                        body_ty: t.clone(),
                        var: x.clone(),
                        handler: Box::new(c2),
                        ambient: amb.clone(),
                    },
                    t,
                ))
            }
            ExprKind::MatchList {
                scrut,
                nil,
                head,
                tail,
                cons,
            } => {
                let (bs, v, ts) = self.atom(scrut, None, amb)?;
                let SType::List(elem) = &ts else {
                    return Err(type_error(scrut.span, format!("expected a list, found `{ts}`")));
                };
                let binders = [(head.clone(), (**elem).clone()), (tail.clone(), ts.clone())];
                let (n, c, t) = self.branches(expected, amb, (&[], nil), (&binders, cons), span)?;
                Ok((
                    wrap(
                        bs,
                        Computation::CaseList {
                            scrut: v,
                            ty: ts,
                            nil_body: Box::new(n),
                            head: head.clone(),
                            tail: tail.clone(),
                            cons_body: Box::new(c),
                        },
                    ),
                    t,
                ))
            }
            ExprKind::MatchSum {
                scrut,
                left,
                left_body,
                right,
                right_body,
            } => {
                let (bs, v, ts) = self.atom(scrut, None, amb)?;
                let SType::Sum(tl, tr) = &ts else {
                    return Err(type_error(scrut.span, format!("expected a sum, found `{ts}`")));
                };
                let lb = [(left.clone(), (**tl).clone())];
                let rb = [(right.clone(), (**tr).clone())];
                let (l, r, t) =
                    self.branches(expected, amb, (&lb, left_body), (&rb, right_body), span)?;
                Ok((
                    wrap(
                        bs,
                        Computation::CaseSum {
                            scrut: v,
                            ty: ts.clone(),
                            left: left.clone(),
                            left_body: Box::new(l),
                            right: right.clone(),
                            right_body: Box::new(r),
                        },
                    ),
                    t,
                ))
            }
            ExprKind::MatchPair {
                scrut,
                left,
                right,
                body,
            } => {
                let (bs, v, ts) = self.atom(scrut, None, amb)?;
                let SType::Prod(ta, tb) = &ts else {
                    return Err(type_error(scrut.span, format!("expected a pair, found `{ts}`")));
                };
                let binders = [(left.clone(), (**ta).clone()), (right.clone(), (**tb).clone())];
                let (c, t) = self.with_binders(&binders, |s| s.comp(body, expected, amb))?;
                Ok((
                    wrap(
                        bs,
                        Computation::CasePair {
                            scrut: v,
                            ty: ts.clone(),
                            left: left.clone(),
                            right: right.clone(),
                            body: Box::new(c),
                        },
                    ),
                    t,
                ))
            }
            ExprKind::Absurd(a) => {
                let Some(t) = expected.cloned() else {
                    return Err(type_error(span, "cannot infer the type of `absurd`; add an ascription"));
                };
                let (bs, v, _) = self.atom(a, Some(&SType::Void), amb)?;
                Ok((wrap(bs, Computation::CaseVoid { scrut: v, res_ty: t.clone() }), t))
            }
            ExprKind::Handle(h) => self.handle(h, expected, amb, span),
            ExprKind::BinOp(op, a, b) => {
                let (mut bs, va, _) = self.atom(a, Some(&SType::Int), amb)?;
                let (bs2, vb, _) = self.atom(b, Some(&SType::Int), amb)?;
                bs.extend(bs2);
                let t = check(expected, op.result_type(), span)?;
                Ok((
                    wrap(
                        bs,
                        Computation::Prim {
                            op: *op,
                            left: va,
                            right: vb,
                        },
                    ),
                    t,
                ))
            }
            ExprKind::App(f, a) => {
                let (mut bs, vf, tf) = self.atom(f, None, amb)?;
                let (ft, linear) = match &tf {
                    SType::Fun(ft) => (ft.clone(), false),
                    SType::LinFun(ft) => (ft.clone(), true),
                    other => {
                        return Err(type_error(f.span, format!("`{other}` is not a function type")))
                    }
                };
                let (bs2, va, _) = self.atom(a, Some(&ft.arg), amb)?;
                bs.extend(bs2);
                if let Some(l) = ft.effects.iter().find(|l| !amb.contains(*l)) {
                    return Err(type_error(
                        span,
                        format!("callee may perform `{l}`, which is not in the enclosing effect set"),
                    ));
                }
                let node = if linear {
                    Computation::LinApp(vf, va)
                } else {
                    Computation::App(vf, va)
                };
                let t = check(expected, ft.res.clone(), span)?;
                Ok((wrap(bs, node), t))
            }
        }
    }

    fn handle(
        &mut self,
        h: &HandleExpr,
        expected: Option<&SType>,
        amb: &LabelSet,
        span: Span,
    ) -> Result<(Computation, SType), SurfaceError> {
        let mut handled = LabelSet::new();
        for b in &h.branches {
            handled.insert(b.label.clone());
        }
        for (l, _) in &h.forwards {
            handled.insert(l.clone());
        }
        let (body, body_ty) = self.comp(&h.body, None, &handled)?;
        let ret_binder = [(h.ret_var.clone(), body_ty.clone())];
        let (ret_body, res_ty) = match expected {
            Some(t) => {
                let (c, _) = self.with_binders(&ret_binder, |s| s.comp(&h.ret_body, Some(t), amb))?;
                (c, t.clone())
            }
            None => self
                .with_binders(&ret_binder, |s| s.comp(&h.ret_body, None, amb))
                .map_err(|err| match err {
                    SurfaceError::Type { .. } => type_error(
                        span,
                        "cannot infer the handler's result type; add an ascription",
                    ),
                    other => other,
                })?,
        };
        let mut branches = Vec::new();
        for b in &h.branches {
            let decl = self.effect(&b.label, b.span)?;
            let cont_ty = SType::linfun(decl.output.clone(), res_ty.clone(), amb.clone());
            let binders = [(b.payload.clone(), decl.input.clone()), (b.cont.clone(), cont_ty)];
            let (body, _) = self.with_binders(&binders, |s| s.comp(&b.body, Some(&res_ty), amb))?;
            branches.push(Branch {
                label: b.label.clone(),
                payload: b.payload.clone(),
                cont: b.cont.clone(),
                body,
            });
        }
        for (l, fspan) in &h.forwards {
            let decl = self.effect(l, *fspan)?;
            if !amb.contains(l) {
                return Err(type_error(
                    *fspan,
                    format!("cannot forward `{l}`: it is not in the enclosing effect set"),
                ));
            }
            let (x, k, y) = (self.fresh(), self.fresh(), self.fresh());
            let body = Computation::let_(
                y.clone(),
                decl.output.clone(),
                Computation::Do {
                    label: l.clone(),
                    payload: Value::Var(x.clone()),
                },
                Computation::LinApp(Value::Var(k.clone()), Value::Var(y)),
            );
            branches.push(Branch {
                label: l.clone(),
                payload: x,
                cont: k,
                body,
            });
        }
        branches.sort_by_key(|b| (self.rank(&b.label), b.label.clone()));
        Ok((
            Computation::Handle {
                body: Box::new(body),
                handler: Arc::new(HandlerDef {
                    body_ty,
                    branches,
                    ret_var: h.ret_var.clone(),
                    ret_body,
                    res_ty: res_ty.clone(),
                    ambient: amb.clone(),
                }),
            },
            res_ty,
        ))
    }

    /// Lowers `e` to a value, binding any computation it contains.
    fn atom(
        &mut self,
        e: &Expr,
        expected: Option<&SType>,
        amb: &LabelSet,
    ) -> Result<(Vec<Binding>, Value, SType), SurfaceError> {
        let span = e.span;
        match &e.kind {
            ExprKind::Var(x) => {
                if let Some(t) = self.lookup(x) {
                    let t = check(expected, t.clone(), span)?;
                    return Ok((vec![], Value::Var(x.clone()), t));
                }
                if let Some(ft) = self.globals.get(x) {
                    let t = check(expected, SType::Fun(Box::new(ft.clone())), span)?;
                    return Ok((vec![], Value::Fun(x.clone()), t));
                }
                Err(SurfaceError::Scope {
                    name: x.to_string(),
                    line: span.line,
                    col: span.col,
                })
            }
            ExprKind::Int(n) => Ok((vec![], Value::Int(*n), check(expected, SType::Int, span)?)),
            ExprKind::Unit => Ok((vec![], Value::Unit, check(expected, SType::Unit, span)?)),
            ExprKind::Nil => match expected {
                Some(t @ SType::List(_)) => Ok((vec![], Value::Nil, t.clone())),
                Some(t) => Err(type_error(span, format!("expected `{t}`, found a list"))),
                None => Err(type_error(span, "cannot infer the type of `[]`; add an ascription")),
            },
            ExprKind::Pair(a, b) => {
                let (ea, eb) = match expected {
                    Some(SType::Prod(ta, tb)) => (Some(&**ta), Some(&**tb)),
                    Some(t) => return Err(type_error(span, format!("expected `{t}`, found a pair"))),
                    None => (None, None),
                };
                let (mut bs, va, ta) = self.atom(a, ea, amb)?;
                let (bs2, vb, tb) = self.atom(b, eb, amb)?;
                bs.extend(bs2);
                Ok((bs, Value::pair(va, vb), SType::prod(ta, tb)))
            }
            ExprKind::Inl(a) | ExprKind::Inr(a) => {
                let left = matches!(e.kind, ExprKind::Inl(_));
                let Some(t @ SType::Sum(tl, tr)) = expected else {
                    return Err(match expected {
                        Some(t) => type_error(span, format!("expected `{t}`, found an injection")),
                        None => type_error(span, "cannot infer the type of an injection; add an ascription"),
                    });
                };
                let payload_ty = if left { &**tl } else { &**tr };
                let (bs, v, _) = self.atom(a, Some(payload_ty), amb)?;
                let v = if left { Value::inl(v) } else { Value::inr(v) };
                Ok((bs, v, t.clone()))
            }
            ExprKind::Cons(h, t) => {
                let (mut bs, vh, th) = match expected {
                    Some(SType::List(te)) => self.atom(h, Some(te), amb)?,
                    Some(t) => return Err(type_error(span, format!("expected `{t}`, found a list"))),
                    None => self.atom(h, None, amb)?,
                };
                let lt = SType::list(th);
                let (bs2, vt, _) = self.atom(t, Some(&lt), amb)?;
                bs.extend(bs2);
                Ok((bs, Value::Cons(Arc::new(vh), Arc::new(vt)), lt))
            }
            ExprKind::Fn(x, body) => {
                let Some(t @ SType::LinFun(ft)) = expected else {
                    return Err(match expected {
                        Some(t) => type_error(span, format!("expected `{t}`, found a linear function")),
                        None => type_error(span, "cannot infer the type of `fn`; add an ascription"),
                    });
                };
                let (c, _) = self.with_binders(&[(x.clone(), ft.arg.clone())], |s| {
                    s.comp(body, Some(&ft.res), &ft.effects)
                })?;
                Ok((
                    vec![],
                    Value::LinLam(Arc::new(LinLam {
                        param: x.clone(),
                        ty: (**ft).clone(),
                        body: c,
                    })),
                    t.clone(),
                ))
            }
            ExprKind::Annot(a, t) => {
                let (bs, v, _) = self.atom(a, Some(t), amb)?;
                Ok((bs, v, check(expected, t.clone(), span)?))
            }
            _ => {
                let (c, t) = self.comp(e, expected, amb)?;
                let x = self.fresh();
                Ok((vec![(x.clone(), t.clone(), c)], Value::Var(x), t))
            }
        }
    }
}

/// Lowers a closed literal expression (such as a CLI input) to a value.
pub fn lower_literal(e: &Expr, ty: &SType) -> Result<Value, SurfaceError> {
    let mut lw = Lowerer {
        effects: HashMap::new(),
        order: Vec::new(),
        globals: HashMap::new(),
        scope: Vec::new(),
        counter: 0,
    };
    let (bs, v, _) = lw.atom(e, Some(ty), &LabelSet::new())?;
    if !bs.is_empty() {
        return Err(type_error(e.span, "input must be a literal value"));
    }
    Ok(v)
}
