//! Per-step structural well-formedness of machine states: the stack is
//! well typed, the focus fits what the stack accepts, and a propagating
//! effect's captured stack accepts the effect's result type.

use crate::check::{Checker, Junction, TypeError};
use crate::machine::{Focus, MachineState};
use crate::syntax::{Frame, Program};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StructuralViolation {
    #[error("ill-typed stack: {0}")]
    Stack(TypeError),
    #[error("focus does not fit the stack: {0}")]
    Focus(TypeError),
    #[error("effect `{0}` is not accepted by the stack")]
    EffectNotAccepted(String),
    #[error("captured stack: {0}")]
    Captured(TypeError),
}

pub fn check_state_structure(p: &Program, s: &MachineState) -> Result<(), StructuralViolation> {
    let c = Checker::new(p);
    let top = c
        .stack_accepts(
            &s.stack,
            Junction {
                ty: s.result_ty.clone(),
                effects: None,
            },
        )
        .map_err(StructuralViolation::Stack)?;
    let mut env = Vec::new();
    match &s.focus {
        Focus::Eval(e) => {
            c.check_comp(&mut env, e, top.ty.as_ref()).map_err(StructuralViolation::Focus)?;
            if let Some(allowed) = &top.effects {
                c.effects_within(&env, e, allowed).map_err(StructuralViolation::Focus)?;
            }
        }
        Focus::Return(v) => {
            if let Some(t) = &top.ty {
                c.check_value(&mut env, v, t).map_err(StructuralViolation::Focus)?;
            }
        }
        Focus::Propagate {
            label,
            payload,
            captured,
        } => {
            if let Some(allowed) = &top.effects {
                if !allowed.contains(label) {
                    return Err(StructuralViolation::EffectNotAccepted(label.to_string()));
                }
            }
            let decl = p
                .effect(label)
                .ok_or_else(|| StructuralViolation::EffectNotAccepted(label.to_string()))?;
            c.check_value(&mut env, payload, &decl.input)
                .map_err(StructuralViolation::Focus)?;
            let segment: Vec<Frame> = captured.iter().rev().cloned().collect();
            let accepts = c.stack_accepts(&segment, top).map_err(StructuralViolation::Captured)?;
            if let Some(t) = accepts.ty {
                if t != decl.output {
                    return Err(StructuralViolation::Captured(TypeError(format!(
                        "accepts `{t}` but `{label}` returns `{}`",
                        decl.output
                    ))));
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::{init_state, step, Mode, StepResult};
    use crate::surface::{lower_to_fine_grain, parse};
    use crate::syntax::{name, Computation, SType, Value};
    use std::sync::Arc;

    #[test]
    fn every_state_of_a_handled_run_is_well_formed() {
        let p = lower_to_fine_grain(
            &parse(
                "effect A : int => int;
                 fun f (x: list(int)): int / {A} = match x { [] -> 0 | h :: t -> let a = do A h in let b = f t in a + b };
                 fun g (x: list(int)): int = handle f x { return y -> y | A n k -> k (n + 1) };",
            )
            .unwrap(),
        )
        .unwrap();
        let arg = Value::list([Value::Int(1), Value::Int(2)]);
        let e = Computation::App(Value::Fun(name("g")), arg);
        let mut s = init_state(e, Mode::Profile).unwrap();
        loop {
            check_state_structure(&p, &s).unwrap();
            match step(&p, &mut s) {
                StepResult::Next(_) => {}
                StepResult::Final(_) => break,
                StepResult::Stuck(r) => panic!("{r}"),
            }
        }
    }

    #[test]
    fn ill_typed_return_is_detected() {
        let p = Program::default();
        let mut s = init_state(Computation::Ret(Value::Unit), Mode::Profile).unwrap();
        s.stack.push(Frame::Bind {
            var: name("x"),
            ty: SType::Int,
            body: Arc::new(Computation::Ret(Value::Var(name("x")))),
        });
        assert!(matches!(check_state_structure(&p, &s), Err(StructuralViolation::Focus(_))));
    }
}
