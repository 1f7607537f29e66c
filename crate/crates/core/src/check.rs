//! Structural (annotation-free) type checking of core terms and stacks.

use crate::analysis::effects::{lookup, TypeEnv};
use crate::syntax::{Computation, Dcont, Frame, FnType, HandlerDef, LabelSet, Program, SType, Value, EXC};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{0}")]
pub struct TypeError(pub String);

fn err<T>(msg: impl Into<String>) -> Result<T, TypeError> {
    Err(TypeError(msg.into()))
}

fn expect_eq(expected: &SType, got: &SType, what: &str) -> Result<(), TypeError> {
    if expected == got {
        Ok(())
    } else {
        err(format!("{what}: expected `{expected}`, found `{got}`"))
    }
}

/// What a stack (segment) accepts or produces; `None` components are
/// unconstrained, as for the empty stack at the bottom of the machine.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Junction {
    pub ty: Option<SType>,
    pub effects: Option<LabelSet>,
}

impl Junction {
    pub fn any() -> Junction {
        Junction::default()
    }

    pub fn of(ty: SType, effects: LabelSet) -> Junction {
        Junction {
            ty: Some(ty),
            effects: Some(effects),
        }
    }
}

/// Structural checker over a program's declarations.
pub struct Checker<'p> {
    pub prog: &'p Program,
}

impl<'p> Checker<'p> {
    pub fn new(prog: &'p Program) -> Checker<'p> {
        Checker { prog }
    }

    fn with<T>(env: &mut TypeEnv, binders: Vec<(crate::syntax::Name, SType)>, f: impl FnOnce(&mut TypeEnv) -> T) -> T {
        let depth = env.len();
        env.extend(binders);
        let r = f(env);
        env.truncate(depth);
        r
    }

    fn effect_types(&self, label: &str) -> Result<(SType, SType), TypeError> {
        self.prog
            .effect(label)
            .map(|d| (d.input.clone(), d.output.clone()))
            .ok_or_else(|| TypeError(format!("unknown effect `{label}`")))
    }

    /// Type of a value whose type is determined without context.
    pub fn synth_value(&self, env: &mut TypeEnv, v: &Value) -> Result<SType, TypeError> {
        match v {
            Value::Var(x) => lookup(env, x)
                .cloned()
                .ok_or_else(|| TypeError(format!("unbound variable `{x}`"))),
            Value::Fun(f) => self
                .prog
                .fun(f)
                .map(|d| SType::Fun(Box::new(d.fn_type())))
                .ok_or_else(|| TypeError(format!("unknown function `{f}`"))),
            Value::Unit => Ok(SType::Unit),
            Value::Int(_) => Ok(SType::Int),
            Value::Pair(a, b) => Ok(SType::prod(self.synth_value(env, a)?, self.synth_value(env, b)?)),
            Value::LinLam(l) => {
                self.check_lambda(env, &l.param, &l.ty, &l.body)?;
                Ok(SType::LinFun(Box::new(l.ty.clone())))
            }
            Value::Dcont(d) => Ok(SType::LinFun(Box::new(self.dcont_type(d)?))),
            Value::Inl(_) | Value::Inr(_) | Value::Nil | Value::Cons(..) => {
                err(format!("cannot infer the type of `{v}` without context"))
            }
        }
    }

    fn check_lambda(&self, env: &mut TypeEnv, param: &crate::syntax::Name, ty: &FnType, body: &Computation) -> Result<(), TypeError> {
        let got = Self::with(env, vec![(param.clone(), ty.arg.clone())], |env| {
            self.check_comp(env, body, Some(&ty.res))
        })?;
        expect_eq(&ty.res, &got, "linear function body")
    }

    /// The linear function type of a captured continuation.
    pub fn dcont_type(&self, d: &Dcont) -> Result<FnType, TypeError> {
        let Some(Frame::Handler(h)) = d.frames.first() else {
            return err("continuation does not start with its handler frame");
        };
        let out = Junction::of(h.res_ty.clone(), h.ambient.clone());
        let accepts = self.stack_accepts(&d.frames, out)?;
        Ok(FnType {
            arg: accepts.ty.unwrap_or(SType::Unit),
            res: h.res_ty.clone(),
            effects: h.ambient.clone(),
        })
    }

    pub fn check_value(&self, env: &mut TypeEnv, v: &Value, ty: &SType) -> Result<(), TypeError> {
        match (v, ty) {
            (Value::Pair(a, b), SType::Prod(ta, tb)) => {
                self.check_value(env, a, ta)?;
                self.check_value(env, b, tb)
            }
            (Value::Inl(a), SType::Sum(ta, _)) => self.check_value(env, a, ta),
            (Value::Inr(b), SType::Sum(_, tb)) => self.check_value(env, b, tb),
            (Value::Nil, SType::List(_)) => Ok(()),
            (Value::Cons(h, t), SType::List(te)) => {
                self.check_value(env, h, te)?;
                self.check_value(env, t, ty)
            }
            (Value::Inl(_) | Value::Inr(_) | Value::Nil | Value::Cons(..) | Value::Pair(..), _) => {
                err(format!("value `{v}` does not have type `{ty}`"))
            }
            _ => {
                let got = self.synth_value(env, v)?;
                expect_eq(ty, &got, &format!("value `{v}`"))
            }
        }
    }

    fn result(expected: Option<&SType>, got: SType, what: &str) -> Result<SType, TypeError> {
        if let Some(t) = expected {
            expect_eq(t, &got, what)?;
        }
        Ok(got)
    }

    /// Checks `e`, returning its structural result type.
    pub fn check_comp(&self, env: &mut TypeEnv, e: &Computation, expected: Option<&SType>) -> Result<SType, TypeError> {
        match e {
            Computation::Ret(v) => match expected {
                Some(t) => {
                    self.check_value(env, v, t)?;
                    Ok(t.clone())
                }
                None => self.synth_value(env, v),
            },
            Computation::Let { var, ty, bound, body } => {
                self.check_comp(env, bound, Some(ty))?;
                Self::with(env, vec![(var.clone(), ty.clone())], |env| self.check_comp(env, body, expected))
            }
            Computation::Tick(_) => Self::result(expected, SType::Unit, "tick"),
            Computation::App(f, a) => match self.synth_value(env, f)? {
                SType::Fun(ft) => {
                    self.check_value(env, a, &ft.arg)?;
                    Self::result(expected, ft.res, "application")
                }
                other => err(format!("`{f}` of type `{other}` is not a function")),
            },
            Computation::LinApp(f, a) => match self.synth_value(env, f)? {
                SType::LinFun(ft) => {
                    self.check_value(env, a, &ft.arg)?;
                    Self::result(expected, ft.res, "linear application")
                }
                other => err(format!("`{f}` of type `{other}` is not a linear function")),
            },
            Computation::CasePair { scrut, ty, left, right, body } => {
                let SType::Prod(a, b) = ty else {
                    return err(format!("pair case on `{ty}`"));
                };
                self.check_value(env, scrut, ty)?;
                let binders = vec![(left.clone(), (**a).clone()), (right.clone(), (**b).clone())];
                Self::with(env, binders, |env| self.check_comp(env, body, expected))
            }
            Computation::CaseVoid { scrut, res_ty } => {
                self.check_value(env, scrut, &SType::Void)?;
                Self::result(expected, res_ty.clone(), "void case")
            }
            Computation::CaseSum { scrut, ty, left, left_body, right, right_body } => {
                let SType::Sum(a, b) = ty else {
                    return err(format!("sum case on `{ty}`"));
                };
                self.check_value(env, scrut, ty)?;
                let lt = Self::with(env, vec![(left.clone(), (**a).clone())], |env| {
                    self.check_comp(env, left_body, expected)
                })?;
                Self::with(env, vec![(right.clone(), (**b).clone())], |env| {
                    self.check_comp(env, right_body, Some(&lt))
                })
            }
            Computation::CaseList { scrut, ty, nil_body, head, tail, cons_body } => {
                let SType::List(a) = ty else {
                    return err(format!("list case on `{ty}`"));
                };
                self.check_value(env, scrut, ty)?;
                let nt = self.check_comp(env, nil_body, expected)?;
                let binders = vec![(head.clone(), (**a).clone()), (tail.clone(), ty.clone())];
                Self::with(env, binders, |env| self.check_comp(env, cons_body, Some(&nt)))
            }
            Computation::Do { label, payload } => {
                if &**label == EXC && self.prog.effect(EXC).is_none() {
                    return err("`exc` performed without an exception declaration");
                }
                let (input, output) = self.effect_types(label)?;
                self.check_value(env, payload, &input)?;
                Self::result(expected, output, &format!("do {label}"))
            }
            Computation::Handle { body, handler } => {
                self.check_comp(env, body, Some(&handler.body_ty))?;
                self.check_handler(env, handler)?;
                Self::result(expected, handler.res_ty.clone(), "handle")
            }
            Computation::Prim { op, left, right } => {
                self.check_value(env, left, &SType::Int)?;
                self.check_value(env, right, &SType::Int)?;
                Self::result(expected, op.result_type(), op.symbol())
            }
            Computation::Raise { payload, ty } => {
                let (input, _) = self.effect_types(EXC)?;
                self.check_value(env, payload, &input)?;
                Self::result(expected, ty.clone(), "raise")
            }
            Computation::Try { body, body_ty, var, handler, .. } => {
                self.check_comp(env, body, Some(body_ty))?;
                let (input, _) = self.effect_types(EXC)?;
                Self::with(env, vec![(var.clone(), input)], |env| self.check_comp(env, handler, Some(body_ty)))?;
                Self::result(expected, body_ty.clone(), "try")
            }
            Computation::Share { value, ty, left, right, body } => {
                self.check_value(env, value, ty)?;
                let ty = ty.clone();
                let binders = vec![(left.clone(), ty.clone()), (right.clone(), ty)];
                Self::with(env, binders, |env| self.check_comp(env, body, expected))
            }
        }
    }

    /// Checks the return and effect branches of a handler.
    pub fn check_handler(&self, env: &mut TypeEnv, h: &HandlerDef) -> Result<(), TypeError> {
        Self::with(env, vec![(h.ret_var.clone(), h.body_ty.clone())], |env| {
            self.check_comp(env, &h.ret_body, Some(&h.res_ty))
        })?;
        for b in &h.branches {
            let (input, output) = self.effect_types(&b.label)?;
            let cont = SType::linfun(output, h.res_ty.clone(), h.ambient.clone());
            Self::with(env, vec![(b.payload.clone(), input), (b.cont.clone(), cont)], |env| {
                self.check_comp(env, &b.body, Some(&h.res_ty))
            })?;
        }
        Ok(())
    }

    /// Checks a frame against what the stack beneath it accepts and
    /// returns what the frame accepts.
    pub fn check_frame(&self, f: &Frame, below: &Junction) -> Result<Junction, TypeError> {
        let mut env = TypeEnv::new();
        match f {
            Frame::Bind { var, ty, body } => {
                env.push((var.clone(), ty.clone()));
                self.check_comp(&mut env, body, below.ty.as_ref())?;
                if let Some(allowed) = &below.effects {
                    self.effects_within(&env, body, allowed)?;
                }
                Ok(Junction {
                    ty: Some(ty.clone()),
                    effects: below.effects.clone(),
                })
            }
            Frame::Handler(h) => {
                if let Some(t) = &below.ty {
                    expect_eq(t, &h.res_ty, "handler result")?;
                }
                if let Some(e) = &below.effects {
                    if !h.ambient.is_subset(e) {
                        return err("handler branches may perform effects the stack below does not accept");
                    }
                }
                self.check_handler(&mut env, h)?;
                Ok(Junction::of(h.body_ty.clone(), h.labels()))
            }
        }
    }

    /// Folds a bottom-first stack segment whose bottom frame returns to
    /// `output`, yielding what its top accepts.
    pub fn stack_accepts(&self, frames: &[Frame], output: Junction) -> Result<Junction, TypeError> {
        let mut cur = output;
        for (i, f) in frames.iter().enumerate() {
            cur = self
                .check_frame(f, &cur)
                .map_err(|e| TypeError(format!("frame {i}: {}", e.0)))?;
        }
        Ok(cur)
    }

    pub fn effects_within(&self, env: &TypeEnv, e: &Computation, allowed: &LabelSet) -> Result<(), TypeError> {
        let performed = crate::analysis::effect_set_of(self.prog, env, e).map_err(|e| TypeError(e.to_string()))?;
        match performed.iter().find(|l| !allowed.contains(*l)) {
            Some(l) => err(format!("effect `{l}` may escape to a context that does not handle it")),
            None => Ok(()),
        }
    }
}

/// Structurally checks every declaration of a core program.
pub fn check_program(p: &Program) -> Result<(), TypeError> {
    let c = Checker::new(p);
    for d in &p.funs {
        let mut env = vec![(d.param.clone(), d.param_ty.clone())];
        c.check_comp(&mut env, &d.body, Some(&d.result_ty))
            .map_err(|e| TypeError(format!("in `{}`: {}", d.name, e.0)))?;
        c.effects_within(&env, &d.body, &d.effects)
            .map_err(|e| TypeError(format!("in `{}`: {}", d.name, e.0)))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{lower_to_fine_grain, parse};

    #[test]
    fn lowered_programs_check() {
        let p = lower_to_fine_grain(
            &parse(
                "effect A : int => unit;
                 fun f (x: list(int)): unit / {A} = match x { [] -> () | h :: t -> let u = do A h in f t };
                 fun g (x: list(int)): unit = handle f x { return y -> y | A n k -> k () };",
            )
            .unwrap(),
        )
        .unwrap();
        check_program(&p).unwrap();
    }

    #[test]
    fn ill_typed_return_is_rejected() {
        let p = Program::default();
        let c = Checker::new(&p);
        let e = Computation::Ret(Value::pair(Value::Unit, Value::Unit));
        assert!(c.check_comp(&mut vec![], &e, Some(&SType::list(SType::Unit))).is_err());
    }
}
