//! Exceptions as effects: `raise` performs `exc`, `try` handles it.

use std::sync::Arc;

use crate::analysis::effects::{effect_set_of, TypeEnv};
use crate::analysis::AnalysisError;
use crate::syntax::{
    Branch, Computation, HandlerDef, LinLam, Name, Program, SType, Value, EXC,
};

/// Rewrites every `raise`/`try` into `do exc` and a handler that forwards
/// all other effects of the protected computation.
pub fn desugar_exceptions(p: &Program) -> Result<Program, AnalysisError> {
    let mut out = p.clone();
    for (i, d) in p.funs.iter().enumerate() {
        let mut ds = Desugarer {
            prog: p,
            env: vec![(d.param.clone(), d.param_ty.clone())],
            counter: 0,
        };
        out.funs[i].body = ds.comp(&d.body)?;
    }
    Ok(out)
}

struct Desugarer<'p> {
    prog: &'p Program,
    env: TypeEnv,
    counter: usize,
}

impl Desugarer<'_> {
    fn fresh(&mut self, stem: &str) -> Name {
        let n = self.counter;
        self.counter += 1;
        Arc::from(format!("%{stem}{n}").as_str())
    }

    fn under<T>(
        &mut self,
        binders: Vec<(Name, SType)>,
        f: impl FnOnce(&mut Self) -> Result<T, AnalysisError>,
    ) -> Result<T, AnalysisError> {
        let depth = self.env.len();
        self.env.extend(binders);
        let r = f(self);
        self.env.truncate(depth);
        r
    }

    fn value(&mut self, v: &Value) -> Result<Value, AnalysisError> {
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

    fn exc_payload(&self) -> Result<SType, AnalysisError> {
        self.prog
            .effect(EXC)
            .map(|d| d.input.clone())
            .ok_or_else(|| AnalysisError::UnhandledLabelNotDeclared(EXC.to_string()))
    }

    fn comp(&mut self, e: &Computation) -> Result<Computation, AnalysisError> {
        Ok(match e {
            Computation::Raise { payload, ty } => {
                let x = self.fresh("d");
                Computation::let_(
                    x.clone(),
                    SType::Void,
                    Computation::Do {
                        label: Arc::from(EXC),
                        payload: self.value(payload)?,
                    },
                    Computation::CaseVoid {
                        scrut: Value::Var(x),
                        res_ty: ty.clone(),
                    },
                )
            }
            Computation::Try {
                body,
                body_ty,
                var,
                handler,
                ambient,
            } => {
                let body = self.comp(body)?;
                let payload_ty = self.exc_payload()?;
                let handler = self.under(vec![(var.clone(), payload_ty)], |s| s.comp(handler))?;
                let performed = effect_set_of(self.prog, &self.env, &body)?;
                let mut branches = vec![Branch {
                    label: Arc::from(EXC),
                    payload: var.clone(),
                    cont: self.fresh("k"),
                    body: handler,
                }];
                for l in self.prog.ordered_labels(performed.iter().filter(|l| &***l != EXC)) {
                    let decl = self
                        .prog
                        .effect(&l)
                        .ok_or_else(|| AnalysisError::UnhandledLabelNotDeclared(l.to_string()))?;
                    let (x, k, y) = (self.fresh("d"), self.fresh("k"), self.fresh("d"));
                    branches.push(Branch {
                        label: l.clone(),
                        payload: x.clone(),
                        cont: k.clone(),
                        body: Computation::let_(
                            y.clone(),
                            decl.output.clone(),
                            Computation::Do {
                                label: l.clone(),
                                payload: Value::Var(x),
                            },
                            Computation::LinApp(Value::Var(k), Value::Var(y)),
                        ),
                    });
                }
                branches.sort_by_key(|b| (self.prog.label_rank(&b.label), b.label.clone()));
                let y = self.fresh("d");
                Computation::Handle {
                    body: Box::new(body),
                    handler: Arc::new(HandlerDef {
                        body_ty: body_ty.clone(),
                        branches,
                        ret_var: y.clone(),
                        ret_body: Computation::Ret(Value::Var(y)),
                        res_ty: body_ty.clone(),
                        ambient: ambient.clone(),
                    }),
                }
            }
            Computation::Ret(v) => Computation::Ret(self.value(v)?),
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
            Computation::Tick(_) | Computation::Prim { .. } | Computation::CaseVoid { .. } => e.clone(),
            Computation::App(f, a) => Computation::App(self.value(f)?, self.value(a)?),
            Computation::LinApp(f, a) => Computation::LinApp(self.value(f)?, self.value(a)?),
            Computation::Do { label, payload } => Computation::Do {
                label: label.clone(),
                payload: self.value(payload)?,
            },
            Computation::CasePair {
                scrut,
                ty,
                left,
                right,
                body,
            } => {
                let SType::Prod(a, b) = ty else { return Ok(e.clone()) };
                let binders = vec![(left.clone(), (**a).clone()), (right.clone(), (**b).clone())];
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
                let SType::Sum(a, b) = ty else { return Ok(e.clone()) };
                let lb = self.under(vec![(left.clone(), (**a).clone())], |s| s.comp(left_body))?;
                let rb = self.under(vec![(right.clone(), (**b).clone())], |s| s.comp(right_body))?;
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
                let SType::List(a) = ty else { return Ok(e.clone()) };
                let nil_body = self.comp(nil_body)?;
                let binders = vec![(head.clone(), (**a).clone()), (tail.clone(), ty.clone())];
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
            Computation::Handle { body, handler } => {
                let new_body = self.comp(body)?;
                let ret_body = self.under(
                    vec![(handler.ret_var.clone(), handler.body_ty.clone())],
                    |s| s.comp(&handler.ret_body),
                )?;
                let mut branches = Vec::new();
                for b in &handler.branches {
                    let decl = self
                        .prog
                        .effect(&b.label)
                        .ok_or_else(|| AnalysisError::UnhandledLabelNotDeclared(b.label.to_string()))?;
                    let cont = SType::linfun(
                        decl.output.clone(),
                        handler.res_ty.clone(),
                        handler.ambient.clone(),
                    );
                    let binders = vec![(b.payload.clone(), decl.input.clone()), (b.cont.clone(), cont)];
                    let body = self.under(binders, |s| s.comp(&b.body))?;
                    branches.push(Branch {
                        body,
                        ..b.clone()
                    });
                }
                Computation::Handle {
                    body: Box::new(new_body),
                    handler: Arc::new(HandlerDef {
                        branches,
                        ret_body,
                        ..(**handler).clone()
                    }),
                }
            }
            Computation::Share { .. } => {
                return Err(AnalysisError::Unsupported(
                    "exceptions must be desugared before sharing is inserted".into(),
                ))
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{lower_to_fine_grain, parse};

    fn program(src: &str) -> Program {
        lower_to_fine_grain(&parse(src).unwrap()).unwrap()
    }

    #[test]
    fn raise_becomes_do_and_void_case() {
        let p = program("exception unit; fun f (x: unit): int / {exc} = raise x;");
        let d = desugar_exceptions(&p).unwrap();
        let Computation::Let { ty, bound, body, .. } = &d.fun("f").unwrap().body else { panic!() };
        assert_eq!(*ty, SType::Void);
        assert!(matches!(**bound, Computation::Do { ref label, .. } if &**label == EXC));
        assert!(matches!(**body, Computation::CaseVoid { .. }));
    }

    #[test]
    fn exception_free_programs_are_unchanged() {
        let p = program(
            "effect A : unit => unit;
             fun f (x: list(int)): unit / {A} = match x { [] -> () | h :: t -> do A () };",
        );
        assert_eq!(desugar_exceptions(&p).unwrap(), p);
    }

    #[test]
    fn try_forwards_other_effects() {
        let p = program(
            "effect A : unit => unit;
             exception unit;
             fun g (x: unit): unit / {A, exc} = let u = do A x in raise u;
             fun f (x: unit): unit / {A} = try g x catch e -> ();",
        );
        let d = desugar_exceptions(&p).unwrap();
        let Computation::Handle { handler, .. } = &d.fun("f").unwrap().body else { panic!() };
        let labels: Vec<&str> = handler.branches.iter().map(|b| &*b.label).collect();
        assert_eq!(labels, vec!["A", "exc"]);
    }
}
