//! Cost instrumentation: ticks next to function calls and handler branches.

use std::sync::Arc;

use crate::rational::one;
use crate::syntax::{Branch, Computation, HandlerDef, LinLam, Name, Program, SType, Value};

/// Which constructs cost one unit. User-written ticks always count.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CostMetric {
    pub tick_calls: bool,
    pub tick_handlers: bool,
}

pub fn insert_ticks(p: &Program, m: CostMetric) -> Program {
    if m == CostMetric::default() {
        return p.clone();
    }
    let mut out = p.clone();
    for d in &mut out.funs {
        let mut t = Ticker {
            metric: m,
            scope: vec![(d.param.clone(), false)],
        };
        d.body = t.comp(&d.body);
    }
    out
}

fn ticked(c: Computation) -> Computation {
    Computation::let_(Arc::from("_"), SType::Unit, Computation::Tick(one()), c)
}

struct Ticker {
    metric: CostMetric,
    /// Names in scope, flagged when bound to a captured continuation.
    scope: Vec<(Name, bool)>,
}

impl Ticker {
    fn is_cont(&self, v: &Value) -> bool {
        match v {
            Value::Var(x) => self
                .scope
                .iter()
                .rev()
                .find(|(n, _)| n == x)
                .is_some_and(|(_, k)| *k),
            _ => false,
        }
    }

    fn under(&mut self, binders: &[&Name], c: &Computation) -> Computation {
        self.under_flagged(binders.iter().map(|b| ((*b).clone(), false)).collect(), c)
    }

    fn under_flagged(&mut self, binders: Vec<(Name, bool)>, c: &Computation) -> Computation {
        let depth = self.scope.len();
        self.scope.extend(binders);
        let r = self.comp(c);
        self.scope.truncate(depth);
        r
    }

    fn value(&mut self, v: &Value) -> Value {
        match v {
            Value::Pair(a, b) => Value::Pair(Arc::new(self.value(a)), Arc::new(self.value(b))),
            Value::Cons(a, b) => Value::Cons(Arc::new(self.value(a)), Arc::new(self.value(b))),
            Value::Inl(a) => Value::Inl(Arc::new(self.value(a))),
            Value::Inr(a) => Value::Inr(Arc::new(self.value(a))),
            Value::LinLam(l) => Value::LinLam(Arc::new(LinLam {
                param: l.param.clone(),
                ty: l.ty.clone(),
                body: self.under(&[&l.param], &l.body),
            })),
            other => other.clone(),
        }
    }

    fn handler(&mut self, h: &HandlerDef) -> HandlerDef {
        let ret_body = self.under(&[&h.ret_var], &h.ret_body);
        let branches = h
            .branches
            .iter()
            .map(|b| {
                let body = self.under_flagged(vec![(b.payload.clone(), false), (b.cont.clone(), true)], &b.body);
                let body = if self.metric.tick_handlers { ticked(body) } else { body };
                Branch { body, ..b.clone() }
            })
            .collect();
        HandlerDef {
            ret_body,
            branches,
            ..h.clone()
        }
    }

    fn comp(&mut self, c: &Computation) -> Computation {
        match c {
            Computation::App(f, a) => {
                let app = Computation::App(self.value(f), self.value(a));
                if self.metric.tick_calls { ticked(app) } else { app }
            }
            Computation::LinApp(f, a) => {
                let cont = self.is_cont(f);
                let app = Computation::LinApp(self.value(f), self.value(a));
                if self.metric.tick_calls && !cont { ticked(app) } else { app }
            }
            Computation::Ret(v) => Computation::Ret(self.value(v)),
            Computation::Do { label, payload } => Computation::Do {
                label: label.clone(),
                payload: self.value(payload),
            },
            Computation::Raise { payload, ty } => Computation::Raise {
                payload: self.value(payload),
                ty: ty.clone(),
            },
            Computation::Tick(_) | Computation::Prim { .. } | Computation::CaseVoid { .. } => c.clone(),
            Computation::Let {
                var,
                ty,
                bound,
                body,
            } => {
                let bound = self.comp(bound);
                Computation::let_(var.clone(), ty.clone(), bound, self.under(&[var], body))
            }
            Computation::CasePair {
                scrut,
                ty,
                left,
                right,
                body,
            } => Computation::CasePair {
                scrut: scrut.clone(),
                ty: ty.clone(),
                left: left.clone(),
                right: right.clone(),
                body: Box::new(self.under(&[left, right], body)),
            },
            Computation::CaseSum {
                scrut,
                ty,
                left,
                left_body,
                right,
                right_body,
            } => Computation::CaseSum {
                scrut: scrut.clone(),
                ty: ty.clone(),
                left: left.clone(),
                left_body: Box::new(self.under(&[left], left_body)),
                right: right.clone(),
                right_body: Box::new(self.under(&[right], right_body)),
            },
            Computation::CaseList {
                scrut,
                ty,
                nil_body,
                head,
                tail,
                cons_body,
            } => Computation::CaseList {
                scrut: scrut.clone(),
                ty: ty.clone(),
                nil_body: Box::new(self.comp(nil_body)),
                head: head.clone(),
                tail: tail.clone(),
                cons_body: Box::new(self.under(&[head, tail], cons_body)),
            },
            Computation::Handle { body, handler } => Computation::Handle {
                body: Box::new(self.comp(body)),
                handler: Arc::new(self.handler(handler)),
            },
            Computation::Try {
                body,
                body_ty,
                var,
                handler,
                ambient,
            } => Computation::Try {
                body: Box::new(self.comp(body)),
                body_ty: body_ty.clone(),
                var: var.clone(),
                handler: Box::new(self.under(&[var], handler)),
                ambient: ambient.clone(),
            },
            Computation::Share {
                value,
                ty,
                left,
                right,
                body,
            } => Computation::Share {
                value: value.clone(),
                ty: ty.clone(),
                left: left.clone(),
                right: right.clone(),
                body: Box::new(self.under(&[left, right], body)),
            },
        }
    }
}
