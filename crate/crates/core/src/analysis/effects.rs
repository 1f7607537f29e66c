//! Syntactic effect sets of computations.

use crate::analysis::AnalysisError;
use crate::syntax::{Computation, LabelSet, Name, Program, SType, Value, EXC};

/// Variable typing context used while walking a computation.
pub type TypeEnv = Vec<(Name, SType)>;

pub fn lookup<'a>(env: &'a TypeEnv, x: &str) -> Option<&'a SType> {
    env.iter().rev().find(|(n, _)| &**n == x).map(|(_, t)| t)
}

/// Labels `e` may perform: `do` labels plus callee effect sets, minus what
/// enclosing handlers inside `e` handle. Handlers must cover their body.
pub fn effect_set_of(p: &Program, env: &TypeEnv, e: &Computation) -> Result<LabelSet, AnalysisError> {
    let mut env = env.clone();
    let mut out = LabelSet::new();
    walk(p, &mut env, e, &mut out)?;
    Ok(out)
}

fn callee_effects(p: &Program, env: &TypeEnv, f: &Value) -> Result<LabelSet, AnalysisError> {
    let ty = match f {
        Value::Fun(g) => {
            return p
                .fun(g)
                .map(|d| d.effects.clone())
                .ok_or_else(|| AnalysisError::Unsupported(format!("unknown function `{g}`")))
        }
        Value::Var(x) => lookup(env, x)
            .cloned()
            .ok_or_else(|| AnalysisError::Unsupported(format!("unbound variable `{x}`")))?,
        Value::LinLam(l) => return Ok(l.ty.effects.clone()),
        Value::Dcont(d) => {
            return match d.frames.first() {
                Some(crate::syntax::Frame::Handler(h)) => Ok(h.ambient.clone()),
                _ => Err(AnalysisError::Unsupported("continuation without handler frame".into())),
            }
        }
        other => return Err(AnalysisError::Unsupported(format!("`{other}` is not applicable"))),
    };
    match ty {
        SType::Fun(ft) | SType::LinFun(ft) => Ok(ft.effects),
        other => Err(AnalysisError::Unsupported(format!("`{other}` is not a function type"))),
    }
}

fn with<T>(env: &mut TypeEnv, binders: Vec<(Name, SType)>, f: impl FnOnce(&mut TypeEnv) -> T) -> T {
    let depth = env.len();
    env.extend(binders);
    let r = f(env);
    env.truncate(depth);
    r
}

fn walk(p: &Program, env: &mut TypeEnv, e: &Computation, out: &mut LabelSet) -> Result<(), AnalysisError> {
    match e {
        Computation::Ret(_) | Computation::Tick(_) | Computation::Prim { .. } | Computation::CaseVoid { .. } => Ok(()),
        Computation::Let { var, ty, bound, body } => {
            walk(p, env, bound, out)?;
            with(env, vec![(var.clone(), ty.clone())], |env| walk(p, env, body, out))
        }
        Computation::App(f, _) | Computation::LinApp(f, _) => {
            out.extend(callee_effects(p, env, f)?);
            Ok(())
        }
        Computation::CasePair { ty, left, right, body, .. } => {
            let SType::Prod(a, b) = ty else {
                return Err(AnalysisError::Unsupported(format!("pair case on `{ty}`")));
            };
            let binders = vec![(left.clone(), (**a).clone()), (right.clone(), (**b).clone())];
            with(env, binders, |env| walk(p, env, body, out))
        }
        Computation::CaseSum { ty, left, left_body, right, right_body, .. } => {
            let SType::Sum(a, b) = ty else {
                return Err(AnalysisError::Unsupported(format!("sum case on `{ty}`")));
            };
            with(env, vec![(left.clone(), (**a).clone())], |env| walk(p, env, left_body, out))?;
            with(env, vec![(right.clone(), (**b).clone())], |env| walk(p, env, right_body, out))
        }
        Computation::CaseList { ty, nil_body, head, tail, cons_body, .. } => {
            let SType::List(a) = ty else {
                return Err(AnalysisError::Unsupported(format!("list case on `{ty}`")));
            };
            walk(p, env, nil_body, out)?;
            let binders = vec![(head.clone(), (**a).clone()), (tail.clone(), ty.clone())];
            with(env, binders, |env| walk(p, env, cons_body, out))
        }
        Computation::Do { label, .. } => {
            out.insert(label.clone());
            Ok(())
        }
        Computation::Raise { .. } => {
            out.insert(EXC.into());
            Ok(())
        }
        Computation::Try { body, var, handler, .. } => {
            let mut inner = LabelSet::new();
            walk(p, env, body, &mut inner)?;
            inner.remove(EXC);
            out.extend(inner);
            let payload = p
                .effect(EXC)
                .map(|d| d.input.clone())
                .ok_or_else(|| AnalysisError::UnhandledLabelNotDeclared(EXC.to_string()))?;
            with(env, vec![(var.clone(), payload)], |env| walk(p, env, handler, out))
        }
        Computation::Handle { body, handler } => {
            let mut inner = LabelSet::new();
            walk(p, env, body, &mut inner)?;
            let covered = handler.labels();
            if let Some(l) = inner.iter().find(|l| !covered.contains(*l)) {
                return Err(AnalysisError::UnhandledLabelNotDeclared(l.to_string()));
            }
            with(env, vec![(handler.ret_var.clone(), handler.body_ty.clone())], |env| {
                walk(p, env, &handler.ret_body, out)
            })?;
            for b in &handler.branches {
                let decl = p
                    .effect(&b.label)
                    .ok_or_else(|| AnalysisError::UnhandledLabelNotDeclared(b.label.to_string()))?;
                let cont = SType::linfun(decl.output.clone(), handler.res_ty.clone(), handler.ambient.clone());
                let binders = vec![(b.payload.clone(), decl.input.clone()), (b.cont.clone(), cont)];
                with(env, binders, |env| walk(p, env, &b.body, out))?;
            }
            Ok(())
        }
        Computation::Share { left, right, body, ty, .. } => {
            with(env, vec![(left.clone(), ty.clone()), (right.clone(), ty.clone())], |env| {
                walk(p, env, body, out)
            })
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

    fn effects_of(p: &Program, f: &str) -> Vec<String> {
        let d = p.fun(f).unwrap();
        let env = vec![(d.param.clone(), d.param_ty.clone())];
        effect_set_of(p, &env, &d.body).unwrap().iter().map(|l| l.to_string()).collect()
    }

    #[test]
    fn do_labels_are_collected() {
        let p = program("effect Insert : int => unit; fun f (x: int): unit / {Insert} = do Insert x;");
        assert_eq!(effects_of(&p, "f"), vec!["Insert"]);
    }

    #[test]
    fn handled_body_contributes_nothing() {
        let p = program(
            "effect A : unit => unit;
             fun f (x: unit): unit = handle do A () { return y -> y | A u k -> k () };",
        );
        assert!(effects_of(&p, "f").is_empty());
    }

    #[test]
    fn forwarding_branches_reperform() {
        let p = program(
            "effect A : unit => unit;
             fun f (x: unit): unit / {A} = handle do A () { return y -> y | forward A };",
        );
        assert_eq!(effects_of(&p, "f"), vec!["A"]);
    }

    #[test]
    fn callee_sets_are_included() {
        let p = program(
            "effect A : unit => unit;
             fun g (x: unit): unit / {A} = do A x;
             fun f (x: unit): unit / {A} = g x;",
        );
        assert_eq!(effects_of(&p, "f"), vec!["A"]);
    }
}
